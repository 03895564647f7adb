//! Metropolis sampling baseline and distribution distances.
//!
//! The sampler is the plain single-spin-flip Metropolis chain: propose a
//! uniformly random spin, accept with min(1, exp(-beta dE)). Energies are
//! tracked through local fields, so a proposal costs O(1) and an accepted
//! flip O(n). States are recorded after every proposal, accepted or not;
//! multiple independent chains (one RNG stream each) are pooled by count, so
//! a run is reproducible bit for bit from its seed.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ising::{EnergyTable, IsingInstance};
use crate::rng;
use crate::thermal::ThermalFit;
use rand::Rng;

/// Transition matrices are dense 4^n; keep them to small systems.
pub const MAX_TRANSITION_MATRIX_QUBITS: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainConfig {
    pub beta: f64,
    /// Recorded sweeps per chain; one sweep is n proposals.
    pub sweeps: usize,
    /// Discarded sweeps per chain before recording starts.
    pub burn_in_sweeps: usize,
    pub chain_count: usize,
    pub seed: u64,
}

/// Pooled outcome of one or more Metropolis chains.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct McmcRun {
    pub probabilities: Vec<f64>,
    /// Acceptance fraction over the recorded (post burn-in) proposals.
    pub acceptance_rate: f64,
    pub total_samples: u64,
    pub proposals: u64,
    pub accepted: u64,
}

/// Exact Boltzmann distribution of a spectrum at inverse temperature beta.
pub fn exact_boltzmann(table: &EnergyTable, beta: f64) -> Vec<f64> {
    // Shift by the dominant end so every exponent is nonpositive.
    let shift = if beta >= 0.0 { table.min() } else { table.max() };
    let weights: Vec<f64> = table.values().iter().map(|&e| (-beta * (e - shift)).exp()).collect();
    let z: f64 = weights.iter().sum();
    weights.into_iter().map(|w| w / z).collect()
}

pub fn metropolis_sample(instance: &IsingInstance, config: &ChainConfig) -> Result<McmcRun> {
    if !config.beta.is_finite() {
        return Err(Error::InvalidArgument(format!("beta must be finite, got {}", config.beta)));
    }
    if config.sweeps == 0 || config.chain_count == 0 {
        return Err(Error::InvalidArgument(
            "need at least one sweep and one chain".into(),
        ));
    }
    let n = instance.n();
    let mut counts = vec![0u64; instance.state_count()];
    let mut accepted = 0u64;
    let mut proposals = 0u64;
    for chain in 0..config.chain_count {
        let mut rng = rng::stream(config.seed, chain as u64);
        let mut state = rng.random_range(0..instance.state_count());
        let mut spins: Vec<f64> =
            (0..n).map(|i| if state >> i & 1 == 1 { 1.0 } else { -1.0 }).collect();
        let mut local: Vec<f64> = (0..n)
            .map(|i| (0..n).map(|j| instance.coupling(i, j) * spins[j]).sum())
            .collect();
        let total_proposals = (config.burn_in_sweeps + config.sweeps) * n;
        let burn_in = config.burn_in_sweeps * n;
        for step in 0..total_proposals {
            let k = rng.random_range(0..n);
            let delta_e = -2.0 * spins[k] * (local[k] + instance.field(k));
            let log_accept = -config.beta * delta_e;
            let accept = log_accept >= 0.0 || rng.random::<f64>() < log_accept.exp();
            if accept {
                spins[k] = -spins[k];
                state ^= 1 << k;
                for i in 0..n {
                    local[i] += 2.0 * spins[k] * instance.coupling(i, k);
                }
            }
            if step >= burn_in {
                counts[state] += 1;
                proposals += 1;
                accepted += u64::from(accept);
            }
        }
    }
    let total: u64 = counts.iter().sum();
    Ok(McmcRun {
        probabilities: counts.iter().map(|&c| c as f64 / total as f64).collect(),
        acceptance_rate: accepted as f64 / proposals as f64,
        total_samples: total,
        proposals,
        accepted,
    })
}

/// Dense single-flip Metropolis transition matrix, row-major with rows
/// indexed by the current state: entry (x, y) is the probability of moving
/// from x to y in one proposal.
pub fn transition_matrix(instance: &IsingInstance, beta: f64) -> Result<Vec<f64>> {
    let n = instance.n();
    if n > MAX_TRANSITION_MATRIX_QUBITS {
        return Err(Error::SizeLimit {
            what: "transition_matrix",
            n,
            max: MAX_TRANSITION_MATRIX_QUBITS,
        });
    }
    if !beta.is_finite() {
        return Err(Error::InvalidArgument(format!("beta must be finite, got {beta}")));
    }
    let table = instance.full_spectrum();
    let m = instance.state_count();
    let mut p = vec![0.0f64; m * m];
    for x in 0..m {
        let ex = table.values()[x];
        let mut stay = 1.0;
        for k in 0..n {
            let y = x ^ (1 << k);
            let delta_e = table.values()[y] - ex;
            let accept = (-beta * delta_e).exp().min(1.0);
            let prob = accept / n as f64;
            p[x * m + y] = prob;
            stay -= prob;
        }
        p[x * m + x] = stay;
    }
    Ok(p)
}

/// Total variation distance between two distributions on the same support.
pub fn total_variation(p: &[f64], q: &[f64]) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::DimensionMismatch { left: p.len(), right: q.len() });
    }
    Ok(0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>())
}

/// KL divergence D(p || q) with q floored at epsilon to keep the sum finite
/// on empirical supports.
pub fn kl_divergence(p: &[f64], q: &[f64], epsilon: f64) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::DimensionMismatch { left: p.len(), right: q.len() });
    }
    if !(epsilon > 0.0) {
        return Err(Error::InvalidArgument(format!("epsilon must be positive, got {epsilon}")));
    }
    Ok(p.iter()
        .zip(q)
        .filter(|(a, _)| **a > 0.0)
        .map(|(&a, &b)| a * (a / b.max(epsilon)).ln())
        .sum())
}

/// Default floor for [`kl_divergence`] when comparing empirical histograms.
pub const KL_EPSILON: f64 = 1e-12;

/// TVD and KL of one distribution against another.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DistanceReport {
    pub tvd: f64,
    pub kl: f64,
    pub epsilon: f64,
}

impl DistanceReport {
    pub fn compare(p: &[f64], q: &[f64], epsilon: f64) -> Result<Self> {
        Ok(DistanceReport {
            tvd: total_variation(p, q)?,
            kl: kl_divergence(p, q, epsilon)?,
            epsilon,
        })
    }
}

/// Relation of a fitted temperature to the coupling scale: single-flip
/// dynamics mix rapidly when the temperature dominates the spectral norm of
/// the coupling matrix.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MixingBoundReport {
    pub beta: f64,
    /// 1 / |beta|; infinite at beta = 0.
    pub temperature: f64,
    pub spectral_norm: f64,
    /// temperature / spectral_norm; `None` when either is degenerate.
    pub ratio: Option<f64>,
    /// True when the temperature sits below the coupling norm, where fast
    /// mixing is no longer guaranteed.
    pub below_bound: bool,
    pub infinite_temperature: bool,
}

pub fn mixing_bound_report(instance: &IsingInstance, fit: &ThermalFit) -> MixingBoundReport {
    let beta = fit.beta;
    let norm = instance.spectral_norm();
    if beta == 0.0 {
        return MixingBoundReport {
            beta,
            temperature: f64::INFINITY,
            spectral_norm: norm,
            ratio: None,
            below_bound: false,
            infinite_temperature: true,
        };
    }
    let temperature = 1.0 / beta.abs();
    let ratio = if norm > 0.0 { Some(temperature / norm) } else { None };
    MixingBoundReport {
        beta,
        temperature,
        spectral_norm: norm,
        ratio,
        below_bound: temperature < norm,
        infinite_temperature: false,
    }
}
