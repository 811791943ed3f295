//! Bundled reference networks used by tests, docs, and example configs.

use crate::model::{Cluster, NetworkSpec};

/// Two components sharing one cluster stream, mildly asymmetric, with
/// supra-threshold limit drift so that both components fire at unit-order
/// rates. The workhorse network for convergence checks.
pub fn cluster_pair() -> NetworkSpec {
    NetworkSpec {
        k: 2,
        theta: 1.0,
        mu: vec![0.7, 0.5],
        sigma2: vec![0.5, 0.3],
        clusters: vec![Cluster {
            members: vec![0, 1],
            mu: 0.5,
            sigma2: 0.4,
        }],
        boundary: vec![1.0, 0.9],
        reset: vec![0.0, 0.0],
        refractory: vec![0.0, 0.0],
        y0: vec![0.0, 0.0],
    }
}

/// Single self-driven component, no clusters.
pub fn single_unit() -> NetworkSpec {
    NetworkSpec {
        k: 1,
        theta: 1.0,
        mu: vec![1.0],
        sigma2: vec![0.8],
        clusters: vec![],
        boundary: vec![1.0],
        reset: vec![0.0],
        refractory: vec![0.0],
        y0: vec![0.0],
    }
}

/// [`cluster_pair`] with all variances zeroed: the deterministic (fluid)
/// regime.
pub fn fluid_pair() -> NetworkSpec {
    let mut spec = cluster_pair();
    spec.sigma2 = vec![0.0, 0.0];
    spec.clusters[0].sigma2 = 0.0;
    spec
}
