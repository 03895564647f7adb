//! Effective-temperature analysis of output distributions.
//!
//! A distribution is pseudo-Boltzmann when ln p(x) is affine in E(x); the
//! tools here fit that line, predict its slope from spectrum statistics, and
//! find the coupling strength where the thermal picture stops holding.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::interference::reparameterize;
use crate::ising::EnergyTable;
use crate::numeric;
use crate::qaoa::{run_qaoa_with_spectrum, AngleSchedule};

/// Probabilities at or below this are treated as numerically zero and left
/// out of log-domain fits.
pub const PROBABILITY_FLOOR: f64 = 1e-300;

/// Least-squares fit of ln p against E. A positive `beta` means low energies
/// carry more weight, as for a physical Boltzmann distribution.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ThermalFit {
    pub beta: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub residual_std: f64,
    /// Fraction of states dropped for having vanishing probability.
    pub excluded_fraction: f64,
    /// Set when splitting the fit at E = 0 improves R^2 by more than 0.2,
    /// the signature of two distinct exponential branches.
    pub two_exponential: bool,
}

/// Fits ln p(x) = intercept - beta E(x) over all states with nonvanishing
/// probability.
pub fn fit_beta(probabilities: &[f64], table: &EnergyTable) -> Result<ThermalFit> {
    if probabilities.len() != table.len() {
        return Err(Error::DimensionMismatch { left: probabilities.len(), right: table.len() });
    }
    let mut energies = Vec::new();
    let mut logs = Vec::new();
    for (&p, &e) in probabilities.iter().zip(table.values()) {
        if p > PROBABILITY_FLOOR {
            energies.push(e);
            logs.push(p.ln());
        }
    }
    let excluded_fraction = 1.0 - energies.len() as f64 / probabilities.len() as f64;
    if energies.len() < 3 {
        return Err(Error::TooFewStates { what: "thermal fit", got: energies.len(), need: 3 });
    }
    let spread = energies.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        - energies.iter().cloned().fold(f64::INFINITY, f64::min);
    if spread == 0.0 {
        return Err(Error::FlatSpectrum { energy: energies[0], count: energies.len() });
    }
    let fit = numeric::linear_fit(&energies, &logs);

    // Split at E = 0 and see whether two separate lines explain the data far
    // better than one; that happens when the distribution is a mix of two
    // exponentials with different slopes.
    let mut two_exponential = false;
    let lo: Vec<usize> = (0..energies.len()).filter(|&i| energies[i] < 0.0).collect();
    let hi: Vec<usize> = (0..energies.len()).filter(|&i| energies[i] > 0.0).collect();
    let side_spread = |idx: &[usize]| {
        let mx = idx.iter().map(|&i| energies[i]).fold(f64::NEG_INFINITY, f64::max);
        let mn = idx.iter().map(|&i| energies[i]).fold(f64::INFINITY, f64::min);
        mx - mn
    };
    if !fit.degenerate_response
        && lo.len() >= 3
        && hi.len() >= 3
        && side_spread(&lo) > 0.0
        && side_spread(&hi) > 0.0
    {
        let pick = |idx: &[usize]| -> (Vec<f64>, Vec<f64>) {
            (
                idx.iter().map(|&i| energies[i]).collect(),
                idx.iter().map(|&i| logs[i]).collect(),
            )
        };
        let (le, ll) = pick(&lo);
        let (he, hl) = pick(&hi);
        let lo_fit = numeric::linear_fit(&le, &ll);
        let hi_fit = numeric::linear_fit(&he, &hl);
        if fit.ss_tot > 0.0 {
            let split_r2 = 1.0 - (lo_fit.ss_res + hi_fit.ss_res) / fit.ss_tot;
            two_exponential = split_r2 - fit.r_squared > 0.2;
        }
    }

    Ok(ThermalFit {
        beta: -fit.slope,
        intercept: fit.intercept,
        r_squared: fit.r_squared,
        residual_std: fit.residual_std,
        excluded_fraction,
        two_exponential,
    })
}

/// Predicted inverse temperature from the covariance slope c of the
/// spectrum: `beta = -c pi gamma`, with an extra sign from the mixer drift
/// direction when the spectrum is mirrored. At theta = pi/4 the mirrored
/// form carries no direction and is rejected.
pub fn predicted_beta(c: f64, gamma: f64, theta: f64, degenerate: bool) -> Result<f64> {
    if !c.is_finite() || !gamma.is_finite() {
        return Err(Error::InvalidArgument("c and gamma must be finite".into()));
    }
    let base = -c * std::f64::consts::PI * gamma;
    if !degenerate {
        return Ok(base);
    }
    let rep = reparameterize(theta)?;
    if rep.r.abs() < 1e-12 {
        return Err(Error::ThetaAtQuarterPi);
    }
    Ok(rep.r.signum() * base)
}

/// Runs the layer at fixed theta across a gamma scan and fits an effective
/// temperature at each point.
pub fn beta_gamma_scan(
    table: &EnergyTable,
    theta: f64,
    gammas: &[f64],
) -> Result<Vec<(f64, ThermalFit)>> {
    if gammas.is_empty() {
        return Err(Error::InvalidArgument("gamma scan needs at least one point".into()));
    }
    gammas
        .iter()
        .map(|&gamma| {
            let state = run_qaoa_with_spectrum(table, &AngleSchedule::single(gamma, theta))?;
            let fit = fit_beta(&state.probabilities(), table)?;
            Ok((gamma, fit))
        })
        .collect()
}

/// Where the thermal description breaks down along a gamma scan.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GammaCReport {
    /// Smallest |gamma| whose fit quality drops below the threshold; the
    /// largest scanned |gamma| when none does.
    pub gamma_c: f64,
    /// Half the best R^2 seen along the scan.
    pub threshold: f64,
    pub max_r_squared: f64,
    /// False when the fit quality never dropped below the threshold inside
    /// the scanned range.
    pub reached: bool,
}

/// Scans outward in |gamma| for the first point where R^2 falls below half
/// its maximum along the scan.
pub fn detect_gamma_c(scan: &[(f64, ThermalFit)]) -> Result<GammaCReport> {
    if scan.is_empty() {
        return Err(Error::InvalidArgument("empty gamma scan".into()));
    }
    let mut order: Vec<usize> = (0..scan.len()).collect();
    order.sort_by(|&a, &b| scan[a].0.abs().total_cmp(&scan[b].0.abs()));
    let max_r_squared =
        scan.iter().map(|(_, f)| f.r_squared).fold(f64::NEG_INFINITY, f64::max);
    let threshold = 0.5 * max_r_squared;
    for &i in &order {
        if scan[i].1.r_squared < threshold {
            return Ok(GammaCReport { gamma_c: scan[i].0, threshold, max_r_squared, reached: true });
        }
    }
    let last = order[order.len() - 1];
    Ok(GammaCReport { gamma_c: scan[last].0, threshold, max_r_squared, reached: false })
}

/// Probability mass aggregated over equal-width energy bins.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EnergyDistribution {
    /// bin_count + 1 edges; the last bin includes its upper edge.
    pub bin_edges: Vec<f64>,
    pub probability_mass: Vec<f64>,
    pub state_counts: Vec<u64>,
}

pub fn energy_distribution(
    probabilities: &[f64],
    table: &EnergyTable,
    bin_count: usize,
) -> Result<EnergyDistribution> {
    if probabilities.len() != table.len() {
        return Err(Error::DimensionMismatch { left: probabilities.len(), right: table.len() });
    }
    if bin_count < 2 {
        return Err(Error::InvalidArgument(format!("need at least 2 bins, got {bin_count}")));
    }
    if table.range() == 0.0 {
        return Err(Error::FlatSpectrum { energy: table.min(), count: table.len() });
    }
    let width = table.range() / bin_count as f64;
    let mut mass = vec![0.0f64; bin_count];
    let mut counts = vec![0u64; bin_count];
    for (&p, &e) in probabilities.iter().zip(table.values()) {
        let idx = (((e - table.min()) / width) as usize).min(bin_count - 1);
        mass[idx] += p;
        counts[idx] += 1;
    }
    let bin_edges = (0..=bin_count).map(|i| table.min() + i as f64 * width).collect();
    Ok(EnergyDistribution { bin_edges, probability_mass: mass, state_counts: counts })
}
