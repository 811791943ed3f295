//! Network description, finite-index jump parameters, and their diffusion
//! limit.
//!
//! A network of `k` components is described by per-component drift and
//! variance inputs plus *clusters*: subsets of at least two components that
//! receive shared Poisson input and therefore jump simultaneously. As the
//! sequence index `n` grows, jump amplitudes shrink like `1/n` while rates
//! grow like `n^2`, and the jump model approaches an Ornstein-Uhlenbeck
//! diffusion with drift vector `gamma` and noise covariance `psi`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{cholesky_factor, Mat};

/// Shared Poisson input acting on a subset of components.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cluster {
    /// Zero-based component indices, sorted, at least two of them.
    pub members: Vec<usize>,
    /// Limit drift contribution of the cluster stream.
    pub mu: f64,
    /// Limit variance contribution of the cluster stream.
    pub sigma2: f64,
}

/// Limit-level description of the network.
///
/// Component indices are zero-based in code; configuration files and
/// serialized marks use one-based labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkSpec {
    /// Number of components.
    pub k: usize,
    /// Decay time constant shared by all components.
    pub theta: f64,
    /// Per-component limit drift input.
    pub mu: Vec<f64>,
    /// Per-component limit variance input.
    pub sigma2: Vec<f64>,
    /// Cluster streams.
    pub clusters: Vec<Cluster>,
    /// Firing boundaries (may be `+inf` to disable a component).
    pub boundary: Vec<f64>,
    /// Post-crossing reset values, `reset[j] < boundary[j]`.
    pub reset: Vec<f64>,
    /// Refractory delays, zero for instantaneous reset.
    pub refractory: Vec<f64>,
    /// Initial state, strictly below the boundary.
    pub y0: Vec<f64>,
}

impl NetworkSpec {
    /// Check every structural invariant; returns a named violation otherwise.
    pub fn validate(&self) -> Result<()> {
        let k = self.k;
        if k == 0 {
            return Err(Error::InvalidSpec("dimension must be at least 1".into()));
        }
        if !(self.theta.is_finite() && self.theta > 0.0) {
            return Err(Error::InvalidSpec(format!(
                "theta must be a positive real, got {}",
                self.theta
            )));
        }
        for (name, v) in [
            ("mu", &self.mu),
            ("sigma2", &self.sigma2),
            ("boundary", &self.boundary),
            ("reset", &self.reset),
            ("refractory", &self.refractory),
            ("y0", &self.y0),
        ] {
            if v.len() != k {
                return Err(Error::InvalidSpec(format!(
                    "{name} has {} entries, expected k={k}",
                    v.len()
                )));
            }
        }
        for j in 0..k {
            let c = j + 1;
            if !self.mu[j].is_finite() {
                return Err(Error::InvalidSpec(format!("component {c}: mu must be finite")));
            }
            if !(self.sigma2[j].is_finite() && self.sigma2[j] >= 0.0) {
                return Err(Error::InvalidSpec(format!(
                    "component {c}: sigma2 must be non-negative, got {}",
                    self.sigma2[j]
                )));
            }
            if self.boundary[j].is_nan() || self.boundary[j] == f64::NEG_INFINITY {
                return Err(Error::InvalidSpec(format!(
                    "component {c}: boundary must be a real or +inf"
                )));
            }
            if !self.reset[j].is_finite() {
                return Err(Error::InvalidSpec(format!("component {c}: reset must be finite")));
            }
            if self.reset[j] >= self.boundary[j] {
                return Err(Error::InvalidSpec(format!(
                    "component {c}: reset {} must lie strictly below boundary {}",
                    self.reset[j], self.boundary[j]
                )));
            }
            if !self.y0[j].is_finite() || self.y0[j] >= self.boundary[j] {
                return Err(Error::InvalidSpec(format!(
                    "component {c}: initial state {} must lie strictly below boundary {}",
                    self.y0[j], self.boundary[j]
                )));
            }
            if !(self.refractory[j].is_finite() && self.refractory[j] >= 0.0) {
                return Err(Error::InvalidSpec(format!(
                    "component {c}: refractory delay must be non-negative, got {}",
                    self.refractory[j]
                )));
            }
        }
        let mut seen: Vec<&[usize]> = Vec::new();
        for (ci, cl) in self.clusters.iter().enumerate() {
            let label = ci + 1;
            if cl.members.len() < 2 {
                return Err(Error::InvalidSpec(format!(
                    "cluster {label}: needs at least two members, got {}",
                    cl.members.len()
                )));
            }
            if cl.members.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::InvalidSpec(format!(
                    "cluster {label}: members must be sorted and distinct"
                )));
            }
            if *cl.members.last().unwrap() >= k {
                return Err(Error::InvalidSpec(format!(
                    "cluster {label}: member {} out of range 1..={k}",
                    cl.members.last().unwrap() + 1
                )));
            }
            if seen.contains(&cl.members.as_slice()) {
                return Err(Error::InvalidSpec(format!(
                    "cluster {label}: duplicate member set"
                )));
            }
            seen.push(&cl.members);
            if !cl.mu.is_finite() {
                return Err(Error::InvalidSpec(format!("cluster {label}: mu must be finite")));
            }
            if !(cl.sigma2.is_finite() && cl.sigma2 >= 0.0) {
                return Err(Error::InvalidSpec(format!(
                    "cluster {label}: sigma2 must be non-negative, got {}",
                    cl.sigma2
                )));
            }
        }
        Ok(())
    }

    /// Clusters containing component `j`.
    pub fn clusters_of(&self, j: usize) -> impl Iterator<Item = &Cluster> {
        self.clusters.iter().filter(move |c| c.members.contains(&j))
    }

    /// Stable content hash binding derived artifacts to this spec.
    pub fn content_hash(&self) -> String {
        crate::serialize::sha256_hex(
            serde_json::to_string(self)
                .expect("spec serializes")
                .as_bytes(),
        )
    }
}

/// Jump-model parameters at one sequence index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SteinParams {
    /// Sequence index the parameters were derived at.
    pub n: u64,
    /// Excitatory jump amplitude, positive.
    pub a: f64,
    /// Inhibitory jump amplitude, negative.
    pub b: f64,
    /// Per-component excitatory rates.
    pub alpha: Vec<f64>,
    /// Per-component inhibitory rates.
    pub beta: Vec<f64>,
    /// Cluster member sets (zero-based, sorted).
    pub cluster_members: Vec<Vec<usize>>,
    /// Per-cluster excitatory rates.
    pub lambda: Vec<f64>,
    /// Per-cluster inhibitory rates.
    pub omega: Vec<f64>,
    /// Initial state.
    pub x0: Vec<f64>,
}

impl SteinParams {
    pub fn k(&self) -> usize {
        self.alpha.len()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.a > 0.0 && self.a.is_finite()) {
            return Err(Error::InvalidSpec(format!("amplitude a must be positive, got {}", self.a)));
        }
        if !(self.b < 0.0 && self.b.is_finite()) {
            return Err(Error::InvalidSpec(format!("amplitude b must be negative, got {}", self.b)));
        }
        let k = self.k();
        if self.beta.len() != k || self.x0.len() != k {
            return Err(Error::InvalidSpec("rate/state vectors disagree on k".into()));
        }
        if self.lambda.len() != self.cluster_members.len()
            || self.omega.len() != self.cluster_members.len()
        {
            return Err(Error::InvalidSpec("cluster rate vectors disagree on cluster count".into()));
        }
        for (name, rates) in [
            ("alpha", &self.alpha),
            ("beta", &self.beta),
            ("lambda", &self.lambda),
            ("omega", &self.omega),
        ] {
            if let Some(r) = rates.iter().find(|r| !(r.is_finite() && **r >= 0.0)) {
                return Err(Error::InvalidSpec(format!(
                    "{name} rates must be finite and non-negative, got {r}"
                )));
            }
        }
        Ok(())
    }

    /// Total Poisson intensity over all streams.
    pub fn total_rate(&self) -> f64 {
        self.alpha.iter().sum::<f64>()
            + self.beta.iter().sum::<f64>()
            + self.lambda.iter().sum::<f64>()
            + self.omega.iter().sum::<f64>()
    }
}

/// First and second moments of the jump input per unit time.
#[derive(Debug, Clone, PartialEq)]
pub struct SteinMoments {
    /// Per-component drift `alpha*a + beta*b`.
    pub mu: Vec<f64>,
    /// Per-component variance `alpha*a^2 + beta*b^2`.
    pub sigma2: Vec<f64>,
    /// Per-cluster drift.
    pub mu_cluster: Vec<f64>,
    /// Per-cluster variance.
    pub sigma2_cluster: Vec<f64>,
    /// Cluster member sets, mirrored from the params.
    pub cluster_members: Vec<Vec<usize>>,
}

impl SteinMoments {
    /// Total drift per component including cluster contributions.
    pub fn gamma(&self) -> Vec<f64> {
        let mut g = self.mu.clone();
        for (c, members) in self.cluster_members.iter().enumerate() {
            for &j in members {
                g[j] += self.mu_cluster[c];
            }
        }
        g
    }

    /// Second-moment matrix entry `1{j=l} sigma2_j + sum over shared clusters`.
    pub fn second_moment_matrix(&self) -> Mat {
        let k = self.mu.len();
        let mut m = Mat::zeros(k);
        for j in 0..k {
            m[(j, j)] = self.sigma2[j];
        }
        for (c, members) in self.cluster_members.iter().enumerate() {
            for &j in members {
                for &l in members {
                    m[(j, l)] += self.sigma2_cluster[c];
                }
            }
        }
        m
    }
}

/// Drift vector of the limiting diffusion: `gamma_j = mu_j + sum of cluster mu
/// over clusters containing j`.
pub fn limit_drift(spec: &NetworkSpec) -> Vec<f64> {
    let mut gamma = spec.mu.clone();
    for cl in &spec.clusters {
        for &j in &cl.members {
            gamma[j] += cl.mu;
        }
    }
    gamma
}

/// Noise covariance of the limiting diffusion:
/// `psi_jl = 1{j=l} sigma2_j + sum of cluster sigma2 over clusters containing
/// both j and l`. Symmetric and positive semi-definite by construction.
pub fn limit_covariance(spec: &NetworkSpec) -> Mat {
    let mut psi = Mat::zeros(spec.k);
    for j in 0..spec.k {
        psi[(j, j)] = spec.sigma2[j];
    }
    for cl in &spec.clusters {
        for &j in &cl.members {
            for &l in &cl.members {
                psi[(j, l)] += cl.sigma2;
            }
        }
    }
    psi
}

/// Drift, covariance and its Cholesky factor for the limiting diffusion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitParams {
    pub gamma: Vec<f64>,
    pub psi: Mat,
    pub chol: Mat,
}

impl LimitParams {
    pub fn from_spec(spec: &NetworkSpec) -> Result<Self> {
        spec.validate()?;
        let psi = limit_covariance(spec);
        let chol = cholesky_factor(&psi)?;
        let residual = chol.mul_transpose().max_abs_diff(&psi);
        let scale = psi.max_abs().max(f64::MIN_POSITIVE);
        debug_assert!(residual <= 1e-8 * scale, "factor residual {residual}");
        Ok(Self {
            gamma: limit_drift(spec),
            psi,
            chol,
        })
    }

    pub fn k(&self) -> usize {
        self.gamma.len()
    }
}

/// A rule turning a network spec and a sequence index into finite-index jump
/// parameters.
///
/// The default rule ([`scale_params`]) is one admissible choice; the limit
/// theorems hold for any rule whose moments converge, so tests can probe
/// alternatives through this trait. Use [`validate_scheme`] to check a rule
/// numerically on a probe set of indices.
pub trait ScalingScheme {
    fn params(&self, spec: &NetworkSpec, n: u64) -> Result<SteinParams>;
}

/// The default scheme: `a = 1/n`, `b = -1/n`,
/// `alpha_j = (mu_j + sigma2_j n/2) n`, `beta_j = (sigma2_j/2) n^2`, and the
/// cluster analogues.
#[derive(Debug, Clone, Copy, Default)]
pub struct DefaultScheme;

impl ScalingScheme for DefaultScheme {
    fn params(&self, spec: &NetworkSpec, n: u64) -> Result<SteinParams> {
        scale_params(spec, n)
    }
}

/// Apply the default scaling scheme at index `n`.
///
/// Fails with [`Error::NegativeRate`] when `mu + sigma2*n/2 < 0` for any
/// component or cluster: rates are never clamped to zero.
pub fn scale_params(spec: &NetworkSpec, n: u64) -> Result<SteinParams> {
    spec.validate()?;
    if n == 0 {
        return Err(Error::InvalidSpec("sequence index n must be at least 1".into()));
    }
    let nf = n as f64;
    let rate_pair = |mu: f64, sigma2: f64, stream: &str| -> Result<(f64, f64)> {
        let exc = (mu + sigma2 * nf / 2.0) * nf;
        if exc < 0.0 {
            return Err(Error::NegativeRate {
                stream: stream.into(),
                n,
                rate: exc,
            });
        }
        Ok((exc, (sigma2 / 2.0) * nf * nf))
    };
    let mut alpha = Vec::with_capacity(spec.k);
    let mut beta = Vec::with_capacity(spec.k);
    for j in 0..spec.k {
        let (a, b) = rate_pair(spec.mu[j], spec.sigma2[j], &format!("alpha[{}]", j + 1))?;
        alpha.push(a);
        beta.push(b);
    }
    let mut lambda = Vec::with_capacity(spec.clusters.len());
    let mut omega = Vec::with_capacity(spec.clusters.len());
    for (c, cl) in spec.clusters.iter().enumerate() {
        let (l, o) = rate_pair(cl.mu, cl.sigma2, &format!("lambda[{}]", c + 1))?;
        lambda.push(l);
        omega.push(o);
    }
    Ok(SteinParams {
        n,
        a: 1.0 / nf,
        b: -1.0 / nf,
        alpha,
        beta,
        cluster_members: spec.clusters.iter().map(|c| c.members.clone()).collect(),
        lambda,
        omega,
        x0: spec.y0.clone(),
    })
}

/// First and second moments of the jump input at the given parameters.
pub fn stein_moments(p: &SteinParams) -> SteinMoments {
    let moment = |exc: f64, inh: f64| {
        (
            exc * p.a + inh * p.b,
            exc * p.a * p.a + inh * p.b * p.b,
        )
    };
    let (mu, sigma2) = p
        .alpha
        .iter()
        .zip(&p.beta)
        .map(|(&al, &be)| moment(al, be))
        .unzip();
    let (mu_cluster, sigma2_cluster) = p
        .lambda
        .iter()
        .zip(&p.omega)
        .map(|(&la, &om)| moment(la, om))
        .unzip();
    SteinMoments {
        mu,
        sigma2,
        mu_cluster,
        sigma2_cluster,
        cluster_members: p.cluster_members.clone(),
    }
}

/// Characteristic exponent of the compensated jump input `Z_n` at frequency
/// `u`, so that the characteristic function of `Z_n(t)` is `exp(t rho(u))`.
pub fn characteristic_exponent(p: &SteinParams, u: &[f64]) -> Complex64 {
    assert_eq!(u.len(), p.k(), "frequency vector must have k entries");
    let gamma = stein_moments(p).gamma();
    let i = Complex64::i();
    let mut rho = -i * u
        .iter()
        .zip(&gamma)
        .map(|(&uj, &gj)| uj * gj)
        .sum::<f64>();
    let jump_term = |rate: f64, phase: f64| rate * ((i * phase).exp() - 1.0);
    for j in 0..p.k() {
        rho += jump_term(p.alpha[j], u[j] * p.a);
        rho += jump_term(p.beta[j], u[j] * p.b);
    }
    for (c, members) in p.cluster_members.iter().enumerate() {
        let g: f64 = members.iter().map(|&j| u[j]).sum();
        rho += jump_term(p.lambda[c], g * p.a);
        rho += jump_term(p.omega[c], g * p.b);
    }
    rho
}

/// Numerically check a scaling scheme against the admissibility conditions on
/// a probe set of indices: positive/negative amplitudes shrinking toward zero,
/// non-negative rates growing without bound, and moments converging to the
/// spec's limit values.
pub fn validate_scheme<S: ScalingScheme>(
    scheme: &S,
    spec: &NetworkSpec,
    probe: &[u64],
) -> Result<()> {
    if probe.len() < 2 {
        return Err(Error::SchemeViolation(
            "need at least two probe indices".into(),
        ));
    }
    let mut sorted = probe.to_vec();
    sorted.sort_unstable();
    let mut prev: Option<(f64, f64, f64)> = None; // |a|, |b|, moment error
    for &n in &sorted {
        let p = scheme.params(spec, n)?;
        p.validate()?;
        let m = stein_moments(&p);
        let mut err = 0.0_f64;
        for j in 0..spec.k {
            err = err
                .max((m.mu[j] - spec.mu[j]).abs())
                .max((m.sigma2[j] - spec.sigma2[j]).abs());
        }
        for (c, cl) in spec.clusters.iter().enumerate() {
            err = err
                .max((m.mu_cluster[c] - cl.mu).abs())
                .max((m.sigma2_cluster[c] - cl.sigma2).abs());
        }
        if let Some((pa, pb, perr)) = prev {
            if p.a.abs() >= pa || p.b.abs() >= pb {
                return Err(Error::SchemeViolation(format!(
                    "amplitudes do not shrink between probes (n={n})"
                )));
            }
            // Allow a small additive slack so exact schemes (error identically
            // ~1 ulp) are not rejected for noise-level wiggles.
            if err > perr + 1e-9 {
                return Err(Error::SchemeViolation(format!(
                    "moment error grows between probes (n={n}: {err:.3e} > {perr:.3e})"
                )));
            }
        }
        prev = Some((p.a.abs(), p.b.abs(), err));
    }
    let (_, _, final_err) = prev.unwrap();
    let scale = spec
        .sigma2
        .iter()
        .chain(spec.mu.iter())
        .fold(1.0_f64, |m, v| m.max(v.abs()));
    let largest = *sorted.last().unwrap() as f64;
    if final_err > scale * (10.0 / largest + 1e-9) {
        return Err(Error::SchemeViolation(format!(
            "moments have not converged at n={largest}: error {final_err:.3e}"
        )));
    }
    Ok(())
}
