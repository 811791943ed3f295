//! Exact event-driven simulation of the multivariate Stein jump process.
//!
//! Between Poisson events every component decays exponentially toward zero
//! with shared time constant `theta`; at an event, the source stream's
//! amplitude is added to every component the stream feeds. One exponential
//! clock at the total rate plus a categorical source draw reproduces the
//! superposition of all streams with O(1) work per event.

use rand::Rng;
use rand_distr::{Distribution, Exp1, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{stein_moments, SteinParams};

/// Default cap on events per simulated path; guards accidental huge runs.
pub const DEFAULT_EVENT_BUDGET: u64 = 100_000_000;

/// Which Poisson stream produced an event.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Source {
    /// Excitatory stream of one component.
    CompExc(usize),
    /// Inhibitory stream of one component.
    CompInh(usize),
    /// Excitatory stream of a cluster.
    ClusterExc(usize),
    /// Inhibitory stream of a cluster.
    ClusterInh(usize),
}

impl Source {
    pub fn is_excitatory(&self) -> bool {
        matches!(self, Source::CompExc(_) | Source::ClusterExc(_))
    }
}

/// One jump: when it happened, which stream fired, by how much.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JumpEvent {
    pub time: f64,
    pub source: Source,
    pub amplitude: f64,
}

/// A complete realization of the jump process on `[0, horizon]`.
///
/// The path is self-contained: it carries the cluster member sets so that the
/// components affected by any event can be resolved without the originating
/// parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JumpPath {
    pub x0: Vec<f64>,
    pub theta: f64,
    pub horizon: f64,
    pub cluster_members: Vec<Vec<usize>>,
    pub events: Vec<JumpEvent>,
}

impl JumpPath {
    pub fn k(&self) -> usize {
        self.x0.len()
    }
}

/// Components affected by an event, resolved against cluster membership.
pub fn affected_components<'a>(
    event: &'a JumpEvent,
    cluster_members: &'a [Vec<usize>],
    scratch: &'a mut [usize; 1],
) -> &'a [usize] {
    match event.source {
        Source::CompExc(j) | Source::CompInh(j) => {
            scratch[0] = j;
            &scratch[..]
        }
        Source::ClusterExc(c) | Source::ClusterInh(c) => &cluster_members[c],
    }
}

/// Draws interarrival times and sources for the stream superposition.
///
/// Shared by the plain simulator and the reset engine so both see the exact
/// same construction.
pub(crate) struct EventSampler<'p> {
    params: &'p SteinParams,
    total_rate: f64,
    // Cumulative rate thresholds in fixed stream order:
    // alpha[0..k], beta[0..k], lambda[0..m], omega[0..m].
    thresholds: Vec<(f64, Source, f64)>,
}

impl<'p> EventSampler<'p> {
    pub fn new(params: &'p SteinParams) -> Self {
        let mut thresholds = Vec::with_capacity(2 * params.k() + 2 * params.lambda.len());
        let mut acc = 0.0;
        for (j, &r) in params.alpha.iter().enumerate() {
            acc += r;
            thresholds.push((acc, Source::CompExc(j), params.a));
        }
        for (j, &r) in params.beta.iter().enumerate() {
            acc += r;
            thresholds.push((acc, Source::CompInh(j), params.b));
        }
        for (c, &r) in params.lambda.iter().enumerate() {
            acc += r;
            thresholds.push((acc, Source::ClusterExc(c), params.a));
        }
        for (c, &r) in params.omega.iter().enumerate() {
            acc += r;
            thresholds.push((acc, Source::ClusterInh(c), params.b));
        }
        Self {
            params,
            total_rate: acc,
            thresholds,
        }
    }

    pub fn total_rate(&self) -> f64 {
        self.total_rate
    }

    /// Time to the next event, exponential at the total rate; infinite when
    /// every stream is silent.
    pub fn next_interarrival<R: Rng>(&self, rng: &mut R) -> f64 {
        if self.total_rate <= 0.0 {
            return f64::INFINITY;
        }
        let e: f64 = Exp1.sample(rng);
        e / self.total_rate
    }

    /// Pick the source of an event, categorically by rate.
    pub fn draw_source<R: Rng>(&self, rng: &mut R) -> (Source, f64) {
        let target = rng.random::<f64>() * self.total_rate;
        for &(threshold, source, amplitude) in &self.thresholds {
            if target < threshold {
                return (source, amplitude);
            }
        }
        // Roundoff fell past the last threshold; attribute to the last
        // non-empty stream.
        let &(_, source, amplitude) = self.thresholds.last().expect("total_rate > 0");
        (source, amplitude)
    }

    pub fn params(&self) -> &SteinParams {
        self.params
    }
}

/// Simulate the jump process on `[0, horizon]` with the default event budget.
pub fn simulate_stein<R: Rng>(
    params: &SteinParams,
    theta: f64,
    horizon: f64,
    rng: &mut R,
) -> Result<JumpPath> {
    simulate_stein_capped(params, theta, horizon, DEFAULT_EVENT_BUDGET, rng)
}

/// Simulate with an explicit cap on the number of events.
pub fn simulate_stein_capped<R: Rng>(
    params: &SteinParams,
    theta: f64,
    horizon: f64,
    budget: u64,
    rng: &mut R,
) -> Result<JumpPath> {
    params.validate()?;
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(Error::InvalidSpec(format!(
            "horizon must be positive and finite, got {horizon}"
        )));
    }
    if !(theta > 0.0 && theta.is_finite()) {
        return Err(Error::InvalidSpec(format!("theta must be positive, got {theta}")));
    }
    let sampler = EventSampler::new(params);
    let mut events = Vec::new();
    let mut t = 0.0;
    loop {
        t += sampler.next_interarrival(rng);
        if t > horizon {
            break;
        }
        if events.len() as u64 >= budget {
            return Err(Error::EventBudgetExceeded { budget });
        }
        let (source, amplitude) = sampler.draw_source(rng);
        events.push(JumpEvent {
            time: t,
            source,
            amplitude,
        });
    }
    Ok(JumpPath {
        x0: params.x0.clone(),
        theta,
        horizon,
        cluster_members: params.cluster_members.clone(),
        events,
    })
}

/// State of the path at time `t`, right-continuous at event times.
pub fn evaluate(path: &JumpPath, t: f64) -> Result<Vec<f64>> {
    if !(0.0..=path.horizon).contains(&t) || t.is_nan() {
        return Err(Error::OutOfRange {
            t,
            horizon: path.horizon,
        });
    }
    let mut state = path.x0.clone();
    let mut now = 0.0;
    let mut scratch = [0usize];
    for ev in &path.events {
        if ev.time > t {
            break;
        }
        let decay = (-(ev.time - now) / path.theta).exp();
        for v in &mut state {
            *v *= decay;
        }
        for &j in affected_components(ev, &path.cluster_members, &mut scratch) {
            state[j] += ev.amplitude;
        }
        now = ev.time;
    }
    let decay = (-(t - now) / path.theta).exp();
    for v in &mut state {
        *v *= decay;
    }
    Ok(state)
}

/// Compensated jump input at time `t`: amplitudes received per component
/// minus `gamma_n * t`, where `gamma_n` comes from the parameter moments.
/// This is the martingale part of the path and carries no decay.
pub fn martingale_part(path: &JumpPath, params: &SteinParams, t: f64) -> Result<Vec<f64>> {
    if !(0.0..=path.horizon).contains(&t) || t.is_nan() {
        return Err(Error::OutOfRange {
            t,
            horizon: path.horizon,
        });
    }
    let gamma = stein_moments(params).gamma();
    let mut z: Vec<f64> = gamma.iter().map(|g| -g * t).collect();
    let mut scratch = [0usize];
    for ev in &path.events {
        if ev.time > t {
            break;
        }
        for &j in affected_components(ev, &path.cluster_members, &mut scratch) {
            z[j] += ev.amplitude;
        }
    }
    Ok(z)
}

/// Draw the compensated jump input `Z_n(t)` directly from its marginal law.
///
/// Counts per stream are Poisson with mean `rate * t`, so the value at a
/// single time needs no event-by-event simulation. Distributionally identical
/// to [`martingale_part`] applied to a simulated path; used for large
/// replication counts.
pub fn sample_martingale_at<R: Rng>(params: &SteinParams, t: f64, rng: &mut R) -> Vec<f64> {
    let gamma = stein_moments(params).gamma();
    let mut z: Vec<f64> = gamma.iter().map(|g| -g * t).collect();
    let mut add = |rate: f64, amplitude: f64, members: &[usize], z: &mut Vec<f64>, rng: &mut R| {
        if rate <= 0.0 || t <= 0.0 {
            return;
        }
        let count = Poisson::new(rate * t).expect("positive mean").sample(rng);
        for &j in members {
            z[j] += amplitude * count;
        }
    };
    for j in 0..params.k() {
        add(params.alpha[j], params.a, &[j], &mut z, rng);
        add(params.beta[j], params.b, &[j], &mut z, rng);
    }
    for (c, members) in params.cluster_members.iter().enumerate() {
        add(params.lambda[c], params.a, members, &mut z, rng);
        add(params.omega[c], params.b, members, &mut z, rng);
    }
    z
}
