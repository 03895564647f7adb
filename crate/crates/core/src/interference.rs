//! Interference view of the single-layer output amplitudes.
//!
//! The amplitude of configuration x after one layer is a sum over all
//! configurations x', weighted by how many spins separate them:
//!
//! ```text
//! F(x) = 2^(-n/2) * sum_x' cos(theta)^(n-H) * (-i sin(theta))^H * exp(-i gamma E_x'),
//! ```
//!
//! with H the Hamming distance between x and x'. Treating (H, E) as a
//! bivariate Gaussian over x' and integrating gives closed-form predictions
//! for ln |F(x)|^2; those predictions are what the thermometry module turns
//! into effective temperatures. The reparameterization
//! `cos(theta) = sqrt(R) e^(r/2), sin(theta) = sqrt(R) e^(-r/2)` makes the
//! Hamming weight a tilted binomial with drift r.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::ising::{EnergyTable, SpinConfiguration};
use crate::stats::JointMoments;

/// Exhaustive-sum amplitudes get expensive fast; this is a deliberate guard,
/// not an allocation limit.
pub const MAX_BRUTE_FORCE_QUBITS: usize = 14;

/// Predictions clamp theta this far inside (0, pi/2) instead of failing on
/// the boundary, where r = -ln(tan theta) diverges.
pub const THETA_CLAMP: f64 = 1e-6;

/// Tilted-binomial parameters of a mixer angle in (0, pi/2):
/// `r = -ln(tan theta)` and `big_r = sin(theta) cos(theta)`, which satisfy
/// `2 big_r cosh(r) = 1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ReparamAngles {
    pub r: f64,
    pub big_r: f64,
}

/// Maps theta in the open interval (0, pi/2) to its drift/scale pair.
pub fn reparameterize(theta: f64) -> Result<ReparamAngles> {
    if !theta.is_finite() || theta <= 0.0 || theta >= std::f64::consts::FRAC_PI_2 {
        return Err(Error::ThetaOutOfDomain { theta });
    }
    Ok(ReparamAngles { r: -theta.tan().ln(), big_r: theta.sin() * theta.cos() })
}

/// Exhaustive evaluation of the interference sum for one target
/// configuration, by accumulating a complex phase sum per Hamming class.
pub fn brute_force_amplitude(
    table: &EnergyTable,
    gamma: f64,
    theta: f64,
    x: SpinConfiguration,
) -> Result<Complex64> {
    let n = table.n();
    if n > MAX_BRUTE_FORCE_QUBITS {
        return Err(Error::SizeLimit { what: "brute_force_amplitude", n, max: MAX_BRUTE_FORCE_QUBITS });
    }
    let mut class_sums = vec![Complex64::new(0.0, 0.0); n + 1];
    for (xp, &e) in table.values().iter().enumerate() {
        let h = (x.index() ^ xp).count_ones() as usize;
        class_sums[h] += Complex64::from_polar(1.0, -gamma * e);
    }
    let (sin_t, cos_t) = theta.sin_cos();
    let mut f = Complex64::new(0.0, 0.0);
    for (h, acc) in class_sums.iter().enumerate() {
        let minus_i_pow = match h % 4 {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, -1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, 1.0),
        };
        f += acc * minus_i_pow * cos_t.powi((n - h) as i32) * sin_t.powi(h as i32);
    }
    Ok(f / (table.len() as f64).sqrt())
}

/// Interference of one pair of basis amplitudes a0, a1 whose energies differ
/// by `delta_e`, under a single mixer rotation. Returns the resulting
/// (|N0|^2, |N1|^2); their sum equals a0^2 + a1^2.
pub fn pairwise_interference(
    a0: f64,
    a1: f64,
    theta: f64,
    gamma: f64,
    delta_e: f64,
) -> (f64, f64) {
    let c2 = theta.cos() * theta.cos();
    let s2 = theta.sin() * theta.sin();
    let cross = a0 * a1 * (2.0 * theta).sin() * (gamma * delta_e).sin();
    (a0 * a0 * c2 + a1 * a1 * s2 - cross, a0 * a0 * s2 + a1 * a1 * c2 + cross)
}

/// Closed-form outcome probability of the two-level system
/// E = (delta/2) sigma^z: `p(sigma) = (1 + sigma sin(2 theta) sin(gamma delta)) / 2`.
pub fn two_level_probability(theta: f64, gamma: f64, delta: f64, sigma_z: i32) -> f64 {
    assert!(sigma_z == 1 || sigma_z == -1, "sigma_z must be +-1");
    let p = 0.5 * (1.0 + sigma_z as f64 * (2.0 * theta).sin() * (gamma * delta).sin());
    p.clamp(0.0, 1.0)
}

/// Angle ranges outside which the layer only repeats itself: theta is
/// pi-periodic, and the phase stays interference-dominated while
/// |gamma| < pi / (E_max - E_min).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AngleBounds {
    pub theta_period: (f64, f64),
    pub gamma_bound: f64,
}

pub fn angle_bounds(table: &EnergyTable) -> Result<AngleBounds> {
    if table.range() == 0.0 {
        return Err(Error::FlatSpectrum { energy: table.min(), count: table.len() });
    }
    Ok(AngleBounds {
        theta_period: (0.0, std::f64::consts::PI),
        gamma_bound: std::f64::consts::PI / table.range(),
    })
}

/// Additive pieces of a predicted log-weight; `log_weight` is their sum.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PredictionTerms {
    /// -gamma^2 sigma_E^2: dephasing across the energy spread.
    pub phase_spread: f64,
    /// (r^2 - pi^2/4) sigma_H^2: tilted-binomial Hamming spread.
    pub hamming_spread: f64,
    /// -2 r mu_H: drift of the Hamming weight toward one pole.
    pub hamming_drift: f64,
    /// Energy-Hamming coupling; the only term that varies across x, hence
    /// the one that sets the effective temperature.
    pub correlation: f64,
}

/// Predicted ln |F(x)|^2 up to an x-independent normalization.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AmplitudePrediction {
    pub log_weight: f64,
    pub terms: PredictionTerms,
    /// Set when theta was clamped off the boundary of (0, pi/2).
    pub theta_clamped: bool,
}

fn clamp_theta(theta: f64) -> Result<(f64, bool)> {
    if !theta.is_finite() || theta < 0.0 || theta > std::f64::consts::FRAC_PI_2 {
        return Err(Error::ThetaOutOfDomain { theta });
    }
    let clamped = theta.clamp(THETA_CLAMP, std::f64::consts::FRAC_PI_2 - THETA_CLAMP);
    Ok((clamped, clamped != theta))
}

fn assemble(terms: PredictionTerms, theta_clamped: bool) -> AmplitudePrediction {
    AmplitudePrediction {
        log_weight: terms.phase_spread + terms.hamming_spread + terms.hamming_drift + terms.correlation,
        terms,
        theta_clamped,
    }
}

/// Gaussian-model prediction for a non-degenerate spectrum:
///
/// ```text
/// ln |F(x)|^2 ~ -gamma^2 sigma_E^2 + (r^2 - pi^2/4) sigma_H^2 - 2 r mu_H
///               - gamma pi rho sigma_E sigma_H
/// ```
///
/// with all moments taken relative to the reference configuration x.
pub fn predicted_log_weight_nondegenerate(
    moments: &JointMoments,
    gamma: f64,
    theta: f64,
) -> Result<AmplitudePrediction> {
    let (theta, clamped) = clamp_theta(theta)?;
    let rep = reparameterize(theta)?;
    let terms = PredictionTerms {
        phase_spread: -gamma * gamma * moments.sigma_e * moments.sigma_e,
        hamming_spread: (rep.r * rep.r - std::f64::consts::PI * std::f64::consts::PI / 4.0)
            * moments.sigma_h
            * moments.sigma_h,
        hamming_drift: -2.0 * rep.r * moments.mu_h,
        correlation: -gamma * std::f64::consts::PI * moments.sigma_eh,
    };
    Ok(assemble(terms, clamped))
}

/// Gaussian-mixture prediction for a Z2-degenerate spectrum, whose joint
/// (H, E) distribution is two mirrored components offset by +-h0 in Hamming
/// weight. `moments` must be the within-hierarchy moments of x's own
/// component.
///
/// The full form keeps the oscillatory cross term:
///
/// ```text
/// ln |F(x)|^2 ~ Y' + ln( cos(h0 pi + 2 r gamma sigma_EH)
///                      + cosh(2 h0 r - gamma pi sigma_EH) ),
/// ```
///
/// where Y' collects the three x-independent Gaussian terms. The approximate
/// form replaces the logarithm with its dominant exponential,
/// `-sgn(r) gamma pi sigma_EH` plus a constant, which is direction-less at
/// theta = pi/4 (r = 0) and is rejected there.
pub fn predicted_log_weight_degenerate(
    moments: &JointMoments,
    h0: f64,
    gamma: f64,
    theta: f64,
    full_form: bool,
) -> Result<AmplitudePrediction> {
    if !h0.is_finite() || h0 <= 0.0 {
        return Err(Error::InvalidArgument(format!("h0 must be positive, got {h0}")));
    }
    let (theta, clamped) = clamp_theta(theta)?;
    let rep = reparameterize(theta)?;
    let sigma_eh = moments.sigma_eh;
    let correlation = if full_form {
        let oscillatory = (h0 * std::f64::consts::PI + 2.0 * rep.r * gamma * sigma_eh).cos();
        let dominant = (2.0 * h0 * rep.r - gamma * std::f64::consts::PI * sigma_eh).cosh();
        (oscillatory + dominant).max(1e-300).ln()
    } else {
        if rep.r.abs() < 1e-12 {
            return Err(Error::ThetaAtQuarterPi);
        }
        -rep.r.signum() * gamma * std::f64::consts::PI * sigma_eh
    };
    let terms = PredictionTerms {
        phase_spread: -gamma * gamma * moments.sigma_e * moments.sigma_e,
        hamming_spread: (rep.r * rep.r - std::f64::consts::PI * std::f64::consts::PI / 4.0)
            * moments.sigma_h
            * moments.sigma_h,
        hamming_drift: -2.0 * rep.r * moments.mu_h,
        correlation,
    };
    Ok(assemble(terms, clamped))
}
