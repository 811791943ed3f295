//! Correlated Ornstein-Uhlenbeck simulation with the exact Gaussian
//! transition.
//!
//! The drift matrix is `(1/theta) * I` (one shared decay constant), so the
//! one-step transition law is closed-form:
//!
//! ```text
//! mean = y * exp(-h/theta) + gamma * theta * (1 - exp(-h/theta))
//! cov  = psi * (theta/2) * (1 - exp(-2h/theta))
//! ```
//!
//! Stepping with these moments puts no discretization bias on grid-point
//! marginals, whatever the step size. An Euler-Maruyama stepper is kept as an
//! independent cross-check for tests.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::model::LimitParams;

/// A path sampled on a uniform grid `0, h, ..., m*h`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridPath {
    pub y0: Vec<f64>,
    pub h: f64,
    /// Row `i` holds the state at time `i*h`; row 0 equals `y0`.
    pub states: Vec<Vec<f64>>,
}

impl GridPath {
    pub fn k(&self) -> usize {
        self.y0.len()
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.states.len()).map(move |i| i as f64 * self.h)
    }
}

/// Mean and covariance of one exact transition step of length `h` from state
/// `y`.
pub fn ou_step_law(lp: &LimitParams, theta: f64, y: &[f64], h: f64) -> (Vec<f64>, Mat) {
    assert!(h > 0.0, "step must be positive");
    let decay = (-h / theta).exp();
    let gain = theta * (1.0 - decay);
    let mean = y
        .iter()
        .zip(&lp.gamma)
        .map(|(&yj, &gj)| yj * decay + gj * gain)
        .collect();
    let cov = lp.psi.scaled((theta / 2.0) * (1.0 - (-2.0 * h / theta).exp()));
    (mean, cov)
}

/// Precomputed one-step transition: decay factor, drift gain, and a factor of
/// the step covariance. Build once per `(limit params, theta, h)` and reuse
/// across steps and replications.
#[derive(Debug, Clone)]
pub struct StepKernel {
    pub decay: f64,
    pub gain: f64,
    /// Lower-triangular factor of the step covariance.
    pub noise_factor: Mat,
    /// Per-component step variance (diagonal of the step covariance).
    pub step_var: Vec<f64>,
    gamma: Vec<f64>,
}

impl StepKernel {
    pub fn new(lp: &LimitParams, theta: f64, h: f64) -> Self {
        assert!(h > 0.0 && theta > 0.0);
        let decay = (-h / theta).exp();
        let var_scale = (theta / 2.0) * (1.0 - (-2.0 * h / theta).exp());
        Self {
            decay,
            gain: theta * (1.0 - decay),
            noise_factor: lp.chol.scaled(var_scale.sqrt()),
            step_var: (0..lp.k()).map(|j| lp.psi[(j, j)] * var_scale).collect(),
            gamma: lp.gamma.clone(),
        }
    }

    pub fn k(&self) -> usize {
        self.gamma.len()
    }

    /// Advance `y` by one step in place.
    pub fn step<R: Rng>(&self, y: &mut [f64], rng: &mut R) {
        let k = self.k();
        let xi: Vec<f64> = (0..k).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        for row in 0..k {
            let mut noise = 0.0;
            for col in 0..=row {
                noise += self.noise_factor[(row, col)] * xi[col];
            }
            y[row] = y[row] * self.decay + self.gamma[row] * self.gain + noise;
        }
    }

    /// Deterministic part of one step (the fluid path).
    pub fn step_mean(&self, y: &[f64]) -> Vec<f64> {
        y.iter()
            .zip(&self.gamma)
            .map(|(&yj, &gj)| yj * self.decay + gj * self.gain)
            .collect()
    }
}

/// Sample the diffusion on a uniform grid covering `[0, horizon]`.
///
/// The grid has `ceil(horizon/h)` steps, so it covers the horizon within one
/// step. Marginals at grid points follow the exact transition law.
pub fn simulate_ou<R: Rng>(
    lp: &LimitParams,
    theta: f64,
    y0: &[f64],
    horizon: f64,
    h: f64,
    rng: &mut R,
) -> Result<GridPath> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidSpec(format!("step h must be positive, got {h}")));
    }
    if !(horizon >= h) {
        return Err(Error::InvalidSpec(format!(
            "horizon {horizon} must be at least one step h={h}"
        )));
    }
    let kernel = StepKernel::new(lp, theta, h);
    let steps = (horizon / h).ceil() as usize;
    let mut states = Vec::with_capacity(steps + 1);
    states.push(y0.to_vec());
    let mut y = y0.to_vec();
    for _ in 0..steps {
        kernel.step(&mut y, rng);
        states.push(y.clone());
    }
    Ok(GridPath {
        y0: y0.to_vec(),
        h,
        states,
    })
}

/// Euler-Maruyama stepper on the same grid; biased at order `h`, retained
/// purely as an independent oracle for tests.
pub fn simulate_ou_euler<R: Rng>(
    lp: &LimitParams,
    theta: f64,
    y0: &[f64],
    horizon: f64,
    h: f64,
    rng: &mut R,
) -> Result<GridPath> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidSpec(format!("step h must be positive, got {h}")));
    }
    let k = lp.k();
    let sqrt_h = h.sqrt();
    let steps = (horizon / h).ceil() as usize;
    let mut states = Vec::with_capacity(steps + 1);
    states.push(y0.to_vec());
    let mut y = y0.to_vec();
    for _ in 0..steps {
        let xi: Vec<f64> = (0..k).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let mut next = vec![0.0; k];
        for row in 0..k {
            let mut noise = 0.0;
            for col in 0..=row {
                noise += lp.chol[(row, col)] * xi[col];
            }
            next[row] = y[row] + (-y[row] / theta + lp.gamma[row]) * h + noise * sqrt_h;
        }
        y = next;
        states.push(y.clone());
    }
    Ok(GridPath {
        y0: y0.to_vec(),
        h,
        states,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::LimitParams;
    use crate::presets;
    use crate::rng::SeedStream;

    fn limit(spec: &crate::model::NetworkSpec) -> LimitParams {
        LimitParams::from_spec(spec).unwrap()
    }

    #[test]
    fn step_law_continuous_at_zero_step() {
        let lp = limit(&presets::cluster_pair());
        let y = vec![0.4, -0.2];
        let (mean, cov) = ou_step_law(&lp, 1.0, &y, 1e-12);
        for j in 0..2 {
            assert!((mean[j] - y[j]).abs() < 1e-10);
        }
        assert!(cov.max_abs() < 1e-11);
    }

    #[test]
    fn step_law_matches_euler_second_moment_recursion() {
        // Independent oracle: propagate the Euler-Maruyama covariance
        // recursion V <- (1 - dt/theta)^2 V + psi dt on a fine grid and
        // compare with the closed-form step covariance.
        let lp = limit(&presets::cluster_pair());
        let theta = 1.3;
        let h = 0.7;
        let substeps = 20_000;
        let dt = h / substeps as f64;
        let mut v = Mat::zeros(2);
        for _ in 0..substeps {
            let shrink = (1.0 - dt / theta) * (1.0 - dt / theta);
            let mut next = v.scaled(shrink);
            let add = lp.psi.scaled(dt);
            for i in 0..2 {
                for j in 0..2 {
                    next[(i, j)] += add[(i, j)];
                }
            }
            v = next;
        }
        let (_, cov) = ou_step_law(&lp, theta, &[0.0, 0.0], h);
        for i in 0..2 {
            for j in 0..2 {
                let rel = (v[(i, j)] - cov[(i, j)]).abs() / cov.max_abs();
                assert!(rel < 1e-3, "entry ({i},{j}): {} vs {}", v[(i, j)], cov[(i, j)]);
            }
        }
    }

    #[test]
    fn step_law_long_step_reaches_stationary_law() {
        let lp = limit(&presets::cluster_pair());
        let theta = 0.8;
        let (mean, cov) = ou_step_law(&lp, theta, &[5.0, -3.0], 1e4);
        for j in 0..2 {
            assert!((mean[j] - lp.gamma[j] * theta).abs() < 1e-9);
        }
        let stationary = lp.psi.scaled(theta / 2.0);
        assert!(cov.max_abs_diff(&stationary) < 1e-9);
    }

    #[test]
    fn noiseless_path_solves_the_fluid_ode() {
        let lp = limit(&presets::fluid_pair());
        assert_eq!(lp.psi.max_abs(), 0.0);
        let theta = 1.0;
        let y0 = vec![0.1, 0.2];
        let path =
            simulate_ou(&lp, theta, &y0, 3.0, 0.01, &mut SeedStream::new(5).rng()).unwrap();
        for (i, state) in path.states.iter().enumerate() {
            let t = i as f64 * path.h;
            for j in 0..2 {
                let ode = y0[j] * (-t / theta).exp() + lp.gamma[j] * theta * (1.0 - (-t / theta).exp());
                assert!((state[j] - ode).abs() < 1e-12, "t={t} j={j}");
            }
        }
    }

    #[test]
    fn scalar_variance_matches_analytic_value() {
        let spec = crate::model::NetworkSpec {
            k: 1,
            theta: 1.0,
            mu: vec![0.0],
            sigma2: vec![1.0],
            clusters: vec![],
            boundary: vec![f64::INFINITY],
            reset: vec![0.0],
            refractory: vec![0.0],
            y0: vec![0.0],
        };
        let lp = limit(&spec);
        let root = SeedStream::new(808);
        let reps = 100_000;
        let mut sum = 0.0;
        let mut sumsq = 0.0;
        for r in 0..reps {
            let path = simulate_ou(&lp, 1.0, &[0.0], 1.0, 0.25, &mut root.substream(r).rng())
                .unwrap();
            let y = path.states.last().unwrap()[0];
            sum += y;
            sumsq += y * y;
        }
        let n = reps as f64;
        let var = sumsq / n - (sum / n) * (sum / n);
        let expect = 0.5 * (1.0 - (-2.0_f64).exp());
        let se = expect * (2.0 / n).sqrt();
        assert!((var - expect).abs() < 4.0 * se, "var {var} vs {expect}");
    }

    #[test]
    fn cluster_correlation_matches_step_law_recursion() {
        let spec = presets::cluster_pair();
        let lp = limit(&spec);
        let theta = spec.theta;
        let h = 0.2;
        let t_steps = 5;
        // Oracle: exact covariance recursion at grid points.
        let mut v = Mat::zeros(2);
        let decay = (-h / theta).exp();
        let step_cov = lp.psi.scaled((theta / 2.0) * (1.0 - (-2.0 * h / theta).exp()));
        for _ in 0..t_steps {
            let mut next = v.scaled(decay * decay);
            for i in 0..2 {
                for j in 0..2 {
                    next[(i, j)] += step_cov[(i, j)];
                }
            }
            v = next;
        }
        let expect_corr = v[(0, 1)] / (v[(0, 0)] * v[(1, 1)]).sqrt();
        let root = SeedStream::new(909);
        let reps = 40_000;
        let (mut s1, mut s2, mut s11, mut s22, mut s12) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for r in 0..reps {
            let path = simulate_ou(
                &lp,
                theta,
                &[0.0, 0.0],
                h * t_steps as f64,
                h,
                &mut root.substream(r).rng(),
            )
            .unwrap();
            let y = path.states.last().unwrap();
            s1 += y[0];
            s2 += y[1];
            s11 += y[0] * y[0];
            s22 += y[1] * y[1];
            s12 += y[0] * y[1];
        }
        let n = reps as f64;
        let c11 = s11 / n - (s1 / n) * (s1 / n);
        let c22 = s22 / n - (s2 / n) * (s2 / n);
        let c12 = s12 / n - (s1 / n) * (s2 / n);
        let corr = c12 / (c11 * c22).sqrt();
        let se = (1.0 - expect_corr * expect_corr) / n.sqrt();
        assert!(
            (corr - expect_corr).abs() < 4.0 * se,
            "corr {corr} vs {expect_corr} (se {se})"
        );
    }

    #[test]
    fn grid_refinement_preserves_marginals() {
        let spec = presets::cluster_pair();
        let lp = limit(&spec);
        let root = SeedStream::new(313);
        let reps = 30_000;
        let t = 1.0;
        let collect = |h: f64, offset: u64| -> (f64, f64) {
            let mut sum = 0.0;
            let mut sumsq = 0.0;
            for r in 0..reps {
                let path = simulate_ou(
                    &lp,
                    spec.theta,
                    &[0.0, 0.0],
                    t,
                    h,
                    &mut root.substream(offset + r).rng(),
                )
                .unwrap();
                let y = path.states.last().unwrap()[0];
                sum += y;
                sumsq += y * y;
            }
            let n = reps as f64;
            (sum / n, sumsq / n - (sum / n) * (sum / n))
        };
        let (m_coarse, v_coarse) = collect(0.5, 0);
        let (m_fine, v_fine) = collect(0.25, reps);
        let n = reps as f64;
        let se_mean = (v_coarse / n).sqrt() * 1.5;
        let se_var = v_coarse * (2.0 / n).sqrt() * 1.5;
        assert!((m_coarse - m_fine).abs() < 4.0 * se_mean);
        assert!((v_coarse - v_fine).abs() < 4.0 * se_var);
    }

    #[test]
    fn standardized_increments_have_gaussian_moments() {
        let spec = presets::cluster_pair();
        let lp = limit(&spec);
        let theta = spec.theta;
        let h = 0.3;
        let kernel = StepKernel::new(&lp, theta, h);
        // Whiten increments with the inverse of the step factor (forward
        // substitution on the lower-triangular factor).
        let solve = |l: &Mat, b: &[f64]| -> Vec<f64> {
            let k = b.len();
            let mut x = vec![0.0; k];
            for i in 0..k {
                let mut acc = b[i];
                for j in 0..i {
                    acc -= l[(i, j)] * x[j];
                }
                x[i] = acc / l[(i, i)];
            }
            x
        };
        let root = SeedStream::new(515);
        let samples = 100_000;
        let mut m3 = vec![0.0; 2];
        let mut m4 = vec![0.0; 2];
        let mut rng = root.rng();
        let mut y = vec![0.0, 0.0];
        for _ in 0..samples {
            let mean = kernel.step_mean(&y);
            kernel.step(&mut y, &mut rng);
            let incr: Vec<f64> = (0..2).map(|j| y[j] - mean[j]).collect();
            let z = solve(&kernel.noise_factor, &incr);
            for j in 0..2 {
                m3[j] += z[j].powi(3);
                m4[j] += z[j].powi(4);
            }
        }
        let n = samples as f64;
        for j in 0..2 {
            let skew = m3[j] / n;
            let kurt = m4[j] / n;
            let se3 = (15.0_f64 / n).sqrt(); // Var[Z^3] = 15
            let se4 = (96.0_f64 / n).sqrt(); // Var[Z^4] = 96
            assert!(skew.abs() < 4.0 * se3, "third moment {skew}");
            assert!((kurt - 3.0).abs() < 4.0 * se4, "fourth moment {kurt}");
        }
    }

    #[test]
    fn euler_and_exact_schemes_agree_at_fine_steps() {
        let spec = presets::cluster_pair();
        let lp = limit(&spec);
        let root = SeedStream::new(616);
        let reps = 20_000;
        let t = 1.0;
        let mut mean_exact = 0.0;
        let mut mean_euler = 0.0;
        for r in 0..reps {
            let e = simulate_ou(&lp, spec.theta, &[0.0, 0.0], t, 0.5, &mut root.substream(r).rng())
                .unwrap();
            let u = simulate_ou_euler(
                &lp,
                spec.theta,
                &[0.0, 0.0],
                t,
                0.002,
                &mut root.substream(reps + r).rng(),
            )
            .unwrap();
            mean_exact += e.states.last().unwrap()[1];
            mean_euler += u.states.last().unwrap()[1];
        }
        let n = reps as f64;
        assert!(
            (mean_exact / n - mean_euler / n).abs() < 0.02,
            "{} vs {}",
            mean_exact / n,
            mean_euler / n
        );
    }
}
