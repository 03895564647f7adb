//! Joint statistics of energy and Hamming distance over the hypercube.
//!
//! Everything here is exhaustive: expectations run over all 2^n
//! configurations, so the outputs are exact population moments rather than
//! sample estimates. The central object is the pair (H, E) where
//! H = H(x, x') is the Hamming distance from a reference configuration x and
//! E = E(x') the energy; the amplitude predictions in [`crate::interference`]
//! treat that pair as bivariate Gaussian, and the tools here both feed the
//! predictions (moments, covariance slopes) and test the assumption
//! (Mahalanobis Q-Q reports, mixture fits for mirrored spectra).
//!
//! Two exact facts keep recurring and are worth stating once: over the full
//! hypercube the Hamming marginal is Binomial(n, 1/2), so mu_H = n/2 and
//! sigma_H = sqrt(n)/2 regardless of the instance or the reference; and the
//! energy-Hamming covariance reduces to a per-bit sum, which is what makes
//! the all-references sweep O(n 2^n) instead of O(4^n).

use serde::Serialize;

use crate::error::{Error, Result};
use crate::ising::{EnergyTable, IsingInstance, SpinConfiguration};
use crate::numeric;

/// Population moments of (H, E) relative to one reference configuration.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct JointMoments {
    pub reference: SpinConfiguration,
    pub mu_e: f64,
    pub sigma_e: f64,
    pub mu_h: f64,
    pub sigma_h: f64,
    /// Covariance of Hamming distance with energy; the reference-dependent
    /// quantity everything else is built from.
    pub sigma_eh: f64,
    /// Correlation; zero by convention when either marginal is flat.
    pub rho: f64,
}

/// Exhaustive moments of (H(x, x'), E(x')) over all x'.
pub fn joint_moments(table: &EnergyTable, reference: SpinConfiguration) -> JointMoments {
    let n = table.n();
    let m = table.len() as f64;
    let mu_e = table.mean();
    let mu_h = n as f64 / 2.0;
    let (mut se2, mut sh2, mut seh) = (0.0, 0.0, 0.0);
    for (xp, &e) in table.values().iter().enumerate() {
        let de = e - mu_e;
        let dh = (reference.index() ^ xp).count_ones() as f64 - mu_h;
        se2 += de * de;
        sh2 += dh * dh;
        seh += de * dh;
    }
    let sigma_e = (se2 / m).sqrt();
    let sigma_h = (sh2 / m).sqrt();
    let sigma_eh = seh / m;
    let rho = if sigma_e > 0.0 && sigma_h > 0.0 { sigma_eh / (sigma_e * sigma_h) } else { 0.0 };
    JointMoments { reference, mu_e, sigma_e, mu_h, sigma_h, sigma_eh, rho }
}

/// Energy-Hamming covariance for every reference configuration at once.
///
/// Writing H(x, x') = sum_i (x_i XOR x'_i) splits the covariance into per-bit
/// pieces: with U_i = sum over configurations with bit i set of (E - mu_E),
///
/// ```text
/// sigma_EH(x) = 2^-n * sum_i (1 - 2 x_i) U_i,
/// ```
///
/// which costs O(n 2^n) for all 2^n references together.
pub fn sigma_eh_all(table: &EnergyTable) -> Vec<f64> {
    let n = table.n();
    let m = table.len() as f64;
    let mu_e = table.mean();
    let mut u = vec![0.0f64; n];
    for (xp, &e) in table.values().iter().enumerate() {
        let de = e - mu_e;
        for (i, ui) in u.iter_mut().enumerate() {
            if xp >> i & 1 == 1 {
                *ui += de;
            }
        }
    }
    (0..table.len())
        .map(|x| {
            let mut s = 0.0;
            for (i, ui) in u.iter().enumerate() {
                let sign = 1.0 - 2.0 * (x >> i & 1) as f64;
                s += sign * ui;
            }
            s / m
        })
        .collect()
}

/// Joint moments for every reference configuration. The Hamming marginal is
/// reference-independent (mu_H = n/2, sigma_H = sqrt(n)/2 exactly), as is the
/// energy marginal, so only sigma_EH varies across entries.
pub fn joint_moments_all(table: &EnergyTable) -> Vec<JointMoments> {
    let n = table.n();
    let m = table.len() as f64;
    let mu_e = table.mean();
    let se2: f64 = table.values().iter().map(|e| (e - mu_e) * (e - mu_e)).sum();
    let sigma_e = (se2 / m).sqrt();
    let mu_h = n as f64 / 2.0;
    let sigma_h = (n as f64).sqrt() / 2.0;
    sigma_eh_all(table)
        .into_iter()
        .enumerate()
        .map(|(x, sigma_eh)| {
            let rho =
                if sigma_e > 0.0 && sigma_h > 0.0 { sigma_eh / (sigma_e * sigma_h) } else { 0.0 };
            JointMoments {
                reference: SpinConfiguration(x),
                mu_e,
                sigma_e,
                mu_h,
                sigma_h,
                sigma_eh,
                rho,
            }
        })
        .collect()
}

struct SubsetStats {
    mu_e: f64,
    sigma_e: f64,
    /// Per-bit covariance Cov(x'_i, E') within the subset.
    bit_cov: Vec<f64>,
}

fn subset_stats(table: &EnergyTable, assignments: &[u8], which: u8) -> SubsetStats {
    let n = table.n();
    let mut count = 0usize;
    let mut sum_e = 0.0;
    for (xp, &e) in table.values().iter().enumerate() {
        if assignments[xp] == which {
            count += 1;
            sum_e += e;
        }
    }
    let mu_e = if count > 0 { sum_e / count as f64 } else { 0.0 };
    let mut se2 = 0.0;
    let mut bit_e = vec![0.0f64; n];
    for (xp, &e) in table.values().iter().enumerate() {
        if assignments[xp] != which {
            continue;
        }
        let de = e - mu_e;
        se2 += de * de;
        for (i, acc) in bit_e.iter_mut().enumerate() {
            if xp >> i & 1 == 1 {
                *acc += de;
            }
        }
    }
    let sigma_e = if count > 0 { (se2 / count as f64).sqrt() } else { 0.0 };
    // Cov(x'_i, E') = mean(x'_i * dE) since dE is centered within the subset.
    let bit_cov = if count > 0 {
        bit_e.iter().map(|s| s / count as f64).collect()
    } else {
        vec![0.0; n]
    };
    SubsetStats { mu_e, sigma_e, bit_cov }
}

/// Within-hierarchy energy-Hamming covariance for every configuration, each
/// taken over its own mixture component:
///
/// ```text
/// sigma_EH^S(x) = sum_i (1 - 2 x_i) Cov_S(x'_i, E').
/// ```
pub fn sigma_eh_hierarchy_all(table: &EnergyTable, fit: &MixtureFit) -> Result<Vec<f64>> {
    if fit.assignments.len() != table.len() {
        return Err(Error::DimensionMismatch { left: fit.assignments.len(), right: table.len() });
    }
    let n = table.n();
    let subsets = [subset_stats(table, &fit.assignments, 0), subset_stats(table, &fit.assignments, 1)];
    Ok((0..table.len())
        .map(|x| {
            let s = &subsets[fit.assignments[x] as usize];
            let mut v = 0.0;
            for i in 0..n {
                let sign = 1.0 - 2.0 * (x >> i & 1) as f64;
                v += sign * s.bit_cov[i];
            }
            v
        })
        .collect())
}

/// Per-configuration moments for mirrored spectra. The mixture model fixes
/// the Hamming marginal of each component at Binomial(n, 1/2) shifted by the
/// separation h0 (which the cross term in the degenerate prediction handles
/// explicitly), so mu_h and sigma_h keep their full-cube values here while
/// mu_e, sigma_e and sigma_eh come from the configuration's own component.
pub fn hierarchy_moments_all(table: &EnergyTable, fit: &MixtureFit) -> Result<Vec<JointMoments>> {
    if fit.assignments.len() != table.len() {
        return Err(Error::DimensionMismatch { left: fit.assignments.len(), right: table.len() });
    }
    let n = table.n();
    let mu_h = n as f64 / 2.0;
    let sigma_h = (n as f64).sqrt() / 2.0;
    let sigma_eh = sigma_eh_hierarchy_all(table, fit)?;
    let subsets = [subset_stats(table, &fit.assignments, 0), subset_stats(table, &fit.assignments, 1)];
    Ok((0..table.len())
        .map(|x| {
            let s = &subsets[fit.assignments[x] as usize];
            let rho = if s.sigma_e > 0.0 && sigma_h > 0.0 {
                sigma_eh[x] / (s.sigma_e * sigma_h)
            } else {
                0.0
            };
            JointMoments {
                reference: SpinConfiguration(x),
                mu_e: s.mu_e,
                sigma_e: s.sigma_e,
                mu_h,
                sigma_h,
                sigma_eh: sigma_eh[x],
                rho,
            }
        })
        .collect())
}

/// Linear model sigma_EH(x) = -c E(x) + noise, fitted across all
/// configurations. `c` is reported with the sign convention that makes it
/// positive for typical instances; `omega` is the residual spread.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SlopeFit {
    pub c: f64,
    pub omega: f64,
    pub r_squared: f64,
}

/// Fits the covariance-energy slope. Mirrored spectra mix two branches of
/// opposite slope, so they must be split by a hierarchy fit first; passing
/// `None` for one is an error.
pub fn fit_sigma_eh_slope(
    instance: &IsingInstance,
    table: &EnergyTable,
    hierarchy: Option<&MixtureFit>,
) -> Result<SlopeFit> {
    if table.len() != instance.state_count() {
        return Err(Error::DimensionMismatch { left: table.len(), right: instance.state_count() });
    }
    if table.range() == 0.0 {
        return Err(Error::FlatSpectrum { energy: table.min(), count: table.len() });
    }
    let sigma = match hierarchy {
        Some(fit) => sigma_eh_hierarchy_all(table, fit)?,
        None => {
            if instance.is_degenerate() {
                return Err(Error::MissingHierarchy);
            }
            sigma_eh_all(table)
        }
    };
    let fit = numeric::linear_fit(table.values(), &sigma);
    Ok(SlopeFit { c: -fit.slope, omega: fit.residual_std, r_squared: fit.r_squared })
}

/// Mahalanobis distance of the point (h, e) under the bivariate Gaussian
/// described by `moments`.
pub fn mahalanobis(h: f64, e: f64, moments: &JointMoments) -> Result<f64> {
    let JointMoments { sigma_e, sigma_h, rho, .. } = *moments;
    if sigma_e <= 0.0 || sigma_h <= 0.0 || rho.abs() >= 1.0 {
        return Err(Error::SingularCovariance { sigma_h, sigma_e, rho });
    }
    let ze = (e - moments.mu_e) / sigma_e;
    let zh = (h - moments.mu_h) / sigma_h;
    let d2 = (ze * ze + zh * zh - 2.0 * rho * ze * zh) / (1.0 - rho * rho);
    Ok(d2.max(0.0).sqrt())
}

/// One Q-Q comparison point: the empirical quantile of squared Mahalanobis
/// distances against the chi-squared (2 dof) quantile at the same level.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct QuantilePair {
    pub level: f64,
    pub empirical: f64,
    pub theoretical: f64,
}

/// Q-Q summary of squared Mahalanobis distances against chi-squared with two
/// degrees of freedom.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NormalityReport {
    pub quantile_pairs: Vec<QuantilePair>,
    /// Fraction of quantile levels whose empirical value sits within the
    /// agreement band max(10% relative, 0.2 absolute) of the theory.
    pub agreement_fraction: f64,
    /// Fraction of levels at and above the lowest disagreeing quantile; small
    /// values mean only the extreme tail departs.
    pub tail_outlier_fraction: f64,
    pub sample_count: usize,
}

impl NormalityReport {
    /// Agreement fraction restricted to quantile levels at or below `level`.
    pub fn agreement_up_to(&self, level: f64) -> f64 {
        let mut total = 0usize;
        let mut ok = 0usize;
        for p in &self.quantile_pairs {
            if p.level <= level {
                total += 1;
                if within_band(p.empirical, p.theoretical) {
                    ok += 1;
                }
            }
        }
        if total == 0 {
            1.0
        } else {
            ok as f64 / total as f64
        }
    }
}

fn within_band(empirical: f64, theoretical: f64) -> bool {
    (empirical - theoretical).abs() <= (0.1 * theoretical).max(0.2)
}

/// Builds the Q-Q report from raw squared distances. Exposed separately so
/// synthetic null distributions can exercise the comparison directly.
pub fn qq_report(mut d_squared: Vec<f64>, quantile_count: usize) -> Result<NormalityReport> {
    if quantile_count < 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least 2 quantile levels, got {quantile_count}"
        )));
    }
    if d_squared.len() < 2 {
        return Err(Error::TooFewStates { what: "qq_report", got: d_squared.len(), need: 2 });
    }
    if d_squared.iter().any(|d| !d.is_finite() || *d < 0.0) {
        return Err(Error::InvalidArgument("squared distances must be finite and nonnegative".into()));
    }
    d_squared.sort_by(f64::total_cmp);
    let sample_count = d_squared.len();
    let mut pairs = Vec::with_capacity(quantile_count);
    let mut agree = 0usize;
    let mut first_failure = quantile_count;
    for k in 0..quantile_count {
        let level = (k as f64 + 0.5) / quantile_count as f64;
        let empirical = numeric::quantile_sorted(&d_squared, level);
        let theoretical = -2.0 * (1.0 - level).ln();
        if within_band(empirical, theoretical) {
            agree += 1;
        } else if first_failure == quantile_count {
            first_failure = k;
        }
        pairs.push(QuantilePair { level, empirical, theoretical });
    }
    Ok(NormalityReport {
        quantile_pairs: pairs,
        agreement_fraction: agree as f64 / quantile_count as f64,
        tail_outlier_fraction: 1.0 - first_failure as f64 / quantile_count as f64,
        sample_count,
    })
}

/// Sample (H, E) moments of each of the two clusters induced by a hierarchy
/// assignment, with H measured from `reference`.
fn cluster_moments(
    table: &EnergyTable,
    reference: SpinConfiguration,
    assignments: &[u8],
) -> Result<[JointMoments; 2]> {
    let mut count = [0usize; 2];
    let mut mean = [[0.0f64; 2]; 2];
    for (xp, &e) in table.values().iter().enumerate() {
        let h = (reference.index() ^ xp).count_ones() as f64;
        let k = assignments[xp] as usize;
        count[k] += 1;
        mean[k][0] += h;
        mean[k][1] += e;
    }
    for k in 0..2 {
        if count[k] < 3 {
            return Err(Error::TooFewStates { what: "hierarchy cluster", got: count[k], need: 3 });
        }
        mean[k][0] /= count[k] as f64;
        mean[k][1] /= count[k] as f64;
    }
    let mut cov = [[0.0f64; 3]; 2];
    for (xp, &e) in table.values().iter().enumerate() {
        let h = (reference.index() ^ xp).count_ones() as f64;
        let k = assignments[xp] as usize;
        let dh = h - mean[k][0];
        let de = e - mean[k][1];
        cov[k][0] += dh * dh;
        cov[k][1] += dh * de;
        cov[k][2] += de * de;
    }
    let moments = std::array::from_fn(|k| {
        let m = count[k] as f64;
        let sigma_h = (cov[k][0] / m).sqrt();
        let sigma_e = (cov[k][2] / m).sqrt();
        let sigma_eh = cov[k][1] / m;
        let rho = if sigma_h > 0.0 && sigma_e > 0.0 { sigma_eh / (sigma_h * sigma_e) } else { 0.0 };
        JointMoments {
            reference,
            mu_e: mean[k][1],
            sigma_e,
            mu_h: mean[k][0],
            sigma_h,
            sigma_eh,
            rho,
        }
    });
    Ok(moments)
}

/// Tests bivariate normality of (H, E) around a reference configuration: the
/// squared Mahalanobis distance of every configuration is compared against
/// its chi-squared (2 dof) null. Mirrored spectra must pass the hierarchy fit
/// obtained at the same reference, and each configuration is then scored
/// within its own cluster.
pub fn normality_test(
    instance: &IsingInstance,
    table: &EnergyTable,
    reference: SpinConfiguration,
    hierarchy: Option<&MixtureFit>,
    quantile_count: usize,
) -> Result<NormalityReport> {
    if table.len() != instance.state_count() {
        return Err(Error::DimensionMismatch { left: table.len(), right: instance.state_count() });
    }
    let d2: Vec<f64> = match hierarchy {
        Some(fit) => {
            if fit.reference != Some(reference) {
                return Err(Error::InvalidArgument(
                    "hierarchy fit was made at a different reference configuration".into(),
                ));
            }
            if fit.assignments.len() != table.len() {
                return Err(Error::DimensionMismatch {
                    left: fit.assignments.len(),
                    right: table.len(),
                });
            }
            // Score each configuration against the realized moments of its
            // own cluster, not the raw mixture ellipses: assignment picks the
            // component a point is most likely under, which deflates bulk
            // distances, while the cluster sample moments absorb that
            // selection and restore the chi-squared null.
            let cluster = cluster_moments(table, reference, &fit.assignments)?;
            table
                .values()
                .iter()
                .enumerate()
                .map(|(xp, &e)| {
                    let h = (reference.index() ^ xp).count_ones() as f64;
                    mahalanobis(h, e, &cluster[fit.assignments[xp] as usize]).map(|d| d * d)
                })
                .collect::<Result<_>>()?
        }
        None => {
            if instance.is_degenerate() {
                return Err(Error::MissingHierarchy);
            }
            let moments = joint_moments(table, reference);
            table
                .values()
                .iter()
                .enumerate()
                .map(|(xp, &e)| {
                    let h = (reference.index() ^ xp).count_ones() as f64;
                    mahalanobis(h, e, &moments).map(|d| d * d)
                })
                .collect::<Result<_>>()?
        }
    };
    qq_report(d2, quantile_count)
}

/// One bivariate Gaussian component over (H, E).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GaussianComponent {
    pub weight: f64,
    pub mean_h: f64,
    pub mean_e: f64,
    pub cov_hh: f64,
    pub cov_he: f64,
    pub cov_ee: f64,
}

impl GaussianComponent {
    pub fn correlation(&self) -> f64 {
        let denom = (self.cov_hh * self.cov_ee).sqrt();
        if denom > 0.0 {
            self.cov_he / denom
        } else {
            0.0
        }
    }

    fn det(&self) -> f64 {
        self.cov_hh * self.cov_ee - self.cov_he * self.cov_he
    }

    pub fn mahalanobis_sq(&self, h: f64, e: f64) -> Result<f64> {
        let det = self.det();
        if det <= 0.0 || self.cov_hh <= 0.0 || self.cov_ee <= 0.0 {
            return Err(Error::SingularCovariance {
                sigma_h: self.cov_hh.max(0.0).sqrt(),
                sigma_e: self.cov_ee.max(0.0).sqrt(),
                rho: self.correlation(),
            });
        }
        let dh = h - self.mean_h;
        let de = e - self.mean_e;
        Ok(((self.cov_ee * dh * dh - 2.0 * self.cov_he * dh * de + self.cov_hh * de * de) / det)
            .max(0.0))
    }

    /// Log density at (h, e), without the mixture weight.
    pub fn log_density(&self, h: f64, e: f64) -> Result<f64> {
        let d2 = self.mahalanobis_sq(h, e)?;
        Ok(-(2.0 * std::f64::consts::PI).ln() - 0.5 * self.det().ln() - 0.5 * d2)
    }
}

/// Two-component Gaussian mixture over (H, E), used to split mirrored
/// spectra into their two hierarchies.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MixtureFit {
    /// Reference configuration the Hamming coordinates were measured from;
    /// `None` for fits on synthetic point sets.
    pub reference: Option<SpinConfiguration>,
    /// Ordered by ascending Hamming mean.
    pub components: [GaussianComponent; 2],
    /// Half the separation between the component Hamming means.
    pub h0: f64,
    /// Component index (0 or 1) of every input point.
    #[serde(skip)]
    pub assignments: Vec<u8>,
    /// Responsibility of component 0 for every input point.
    #[serde(skip)]
    pub responsibilities: Vec<f64>,
    pub log_likelihood: f64,
    /// Log likelihood of the best single Gaussian on the same data, for
    /// judging whether two components are warranted at all.
    pub single_log_likelihood: f64,
    pub converged: bool,
    pub iterations: usize,
    /// Heuristic: no sign of two real components. Set when one component
    /// absorbs nearly all the weight, or when neither bimodality signature
    /// holds: cleanly separated Hamming means ([`MixtureFit::ashman_d`]
    /// above 2) or the mirrored-hierarchy shape
    /// ([`MixtureFit::mirror_structure`]).
    pub effectively_unimodal: bool,
}

impl MixtureFit {
    /// Ashman's D along the Hamming axis,
    /// `sqrt(2) |mu1 - mu0| / sqrt(cov_hh0 + cov_hh1)`; a mixture of two
    /// Gaussians is cleanly bimodal when D exceeds 2.
    pub fn ashman_d(&self) -> f64 {
        let denom = (self.components[0].cov_hh + self.components[1].cov_hh).sqrt();
        if denom > 0.0 {
            2.0 * std::f64::consts::SQRT_2 * self.h0 / denom
        } else {
            f64::INFINITY
        }
    }

    /// The shape two mirrored hierarchies produce even when their Hamming
    /// marginals overlap heavily: both components carry close to half the
    /// weight and their energy tilts point in clearly opposite directions.
    /// A single tilted cluster split in two inherits one common tilt sign
    /// instead.
    pub fn mirror_structure(&self) -> bool {
        let balanced = (self.components[0].weight - 0.5).abs() <= 0.1;
        let tilt_product = self.components[0].correlation() * self.components[1].correlation();
        balanced && tilt_product < -0.05
    }
}

const EM_MAX_ITERS: usize = 500;
const EM_TOL: f64 = 1e-8;
const EM_RIDGE: f64 = 1e-9;

fn mixture_log_likelihood(points: &[(f64, f64)], comps: &[GaussianComponent; 2]) -> Result<f64> {
    let mut ll = 0.0;
    for &(h, e) in points {
        let l0 = comps[0].weight.max(1e-300).ln() + comps[0].log_density(h, e)?;
        let l1 = comps[1].weight.max(1e-300).ln() + comps[1].log_density(h, e)?;
        let m = l0.max(l1);
        ll += m + ((l0 - m).exp() + (l1 - m).exp()).ln();
    }
    Ok(ll)
}

fn single_gaussian_log_likelihood(points: &[(f64, f64)], ridge: f64) -> Result<f64> {
    let m = points.len() as f64;
    let mean_h = points.iter().map(|p| p.0).sum::<f64>() / m;
    let mean_e = points.iter().map(|p| p.1).sum::<f64>() / m;
    let (mut chh, mut che, mut cee) = (0.0, 0.0, 0.0);
    for &(h, e) in points {
        let (dh, de) = (h - mean_h, e - mean_e);
        chh += dh * dh;
        che += dh * de;
        cee += de * de;
    }
    let single = GaussianComponent {
        weight: 1.0,
        mean_h,
        mean_e,
        cov_hh: chh / m + ridge,
        cov_he: che / m,
        cov_ee: cee / m + ridge,
    };
    let mut ll = 0.0;
    for &(h, e) in points {
        ll += single.log_density(h, e)?;
    }
    Ok(ll)
}

/// EM fit of a two-component bivariate Gaussian mixture with explicit initial
/// means. Deterministic: fixed initialization, fixed iteration budget, no
/// randomness. Components come back ordered by ascending Hamming mean.
pub fn fit_mixture2_points(
    points: &[(f64, f64)],
    init_means: [(f64, f64); 2],
) -> Result<MixtureFit> {
    if points.len() < 4 {
        return Err(Error::TooFewStates { what: "mixture fit", got: points.len(), need: 4 });
    }
    if points.iter().any(|(h, e)| !h.is_finite() || !e.is_finite()) {
        return Err(Error::InvalidArgument("mixture input must be finite".into()));
    }
    let m = points.len() as f64;
    let mean_h = points.iter().map(|p| p.0).sum::<f64>() / m;
    let mean_e = points.iter().map(|p| p.1).sum::<f64>() / m;
    let var_h = points.iter().map(|p| (p.0 - mean_h) * (p.0 - mean_h)).sum::<f64>() / m;
    let var_e = points.iter().map(|p| (p.1 - mean_e) * (p.1 - mean_e)).sum::<f64>() / m;
    let sigma0 = (0.5 * (var_h + var_e)).max(1e-12);
    let ridge = EM_RIDGE * sigma0.max(1.0);

    let mut comps = [0, 1].map(|k| GaussianComponent {
        weight: 0.5,
        mean_h: init_means[k].0,
        mean_e: init_means[k].1,
        cov_hh: sigma0,
        cov_he: 0.0,
        cov_ee: sigma0,
    });

    let mut resp = vec![0.5f64; points.len()];
    let mut prev_ll = f64::NEG_INFINITY;
    let mut converged = false;
    let mut iterations = 0;
    for iter in 0..EM_MAX_ITERS {
        iterations = iter + 1;
        // E step: responsibility of component 0 per point.
        let mut new_ll = 0.0;
        for (p, r) in points.iter().zip(resp.iter_mut()) {
            let l0 = comps[0].weight.max(1e-300).ln() + comps[0].log_density(p.0, p.1)?;
            let l1 = comps[1].weight.max(1e-300).ln() + comps[1].log_density(p.0, p.1)?;
            let mx = l0.max(l1);
            let (e0, e1) = ((l0 - mx).exp(), (l1 - mx).exp());
            *r = e0 / (e0 + e1);
            new_ll += mx + (e0 + e1).ln();
        }
        // M step.
        for k in 0..2 {
            let rk = |r: f64| if k == 0 { r } else { 1.0 - r };
            let total: f64 = resp.iter().map(|&r| rk(r)).sum();
            let total = total.max(1e-12);
            let mh = points.iter().zip(&resp).map(|(p, &r)| rk(r) * p.0).sum::<f64>() / total;
            let me = points.iter().zip(&resp).map(|(p, &r)| rk(r) * p.1).sum::<f64>() / total;
            let (mut chh, mut che, mut cee) = (0.0, 0.0, 0.0);
            for (p, &r) in points.iter().zip(&resp) {
                let w = rk(r);
                let (dh, de) = (p.0 - mh, p.1 - me);
                chh += w * dh * dh;
                che += w * dh * de;
                cee += w * de * de;
            }
            comps[k] = GaussianComponent {
                weight: total / m,
                mean_h: mh,
                mean_e: me,
                cov_hh: chh / total + ridge,
                cov_he: che / total,
                cov_ee: cee / total + ridge,
            };
        }
        if (new_ll - prev_ll).abs() < EM_TOL {
            converged = true;
            break;
        }
        prev_ll = new_ll;
    }
    // Final E step so assignments match the last parameter update.
    let ll = mixture_log_likelihood(points, &comps)?;
    for (p, r) in points.iter().zip(resp.iter_mut()) {
        let l0 = comps[0].weight.max(1e-300).ln() + comps[0].log_density(p.0, p.1)?;
        let l1 = comps[1].weight.max(1e-300).ln() + comps[1].log_density(p.0, p.1)?;
        let mx = l0.max(l1);
        let (e0, e1) = ((l0 - mx).exp(), (l1 - mx).exp());
        *r = e0 / (e0 + e1);
    }

    if comps[0].mean_h > comps[1].mean_h {
        comps.swap(0, 1);
        for r in resp.iter_mut() {
            *r = 1.0 - *r;
        }
    }
    let assignments: Vec<u8> = resp
        .iter()
        .map(|&r| {
            if (r - 0.5).abs() < 1e-9 {
                // Dead tie: keep the component with the positive tilt, an
                // arbitrary but fixed rule.
                u8::from(comps[1].cov_he > 0.0 && comps[0].cov_he <= 0.0)
            } else {
                u8::from(r < 0.5)
            }
        })
        .collect();
    let h0 = 0.5 * (comps[1].mean_h - comps[0].mean_h);
    let single_ll = single_gaussian_log_likelihood(points, ridge)?;
    let max_weight = comps[0].weight.max(comps[1].weight);
    let mut fit = MixtureFit {
        reference: None,
        components: comps,
        h0,
        assignments,
        responsibilities: resp,
        log_likelihood: ll,
        single_log_likelihood: single_ll,
        converged,
        iterations,
        effectively_unimodal: false,
    };
    let bimodal = fit.ashman_d() > 2.0 || fit.mirror_structure();
    fit.effectively_unimodal = max_weight >= 0.95 || !bimodal;
    Ok(fit)
}

/// Fits the two-hierarchy mixture of a spectrum as seen from `reference`:
/// points are (H(reference, x'), E(x')) for all x', initialized at Hamming
/// means n/2 -+ sqrt(n)/2.
///
/// Mirrored spectra carry an exact ambiguity the raw EM cannot resolve: a
/// configuration and its complement at Hamming distance n/2 present the very
/// same (H, E) point, so both responsibilities are exactly one half. Such
/// pairs are split by convention, the lower index into the near component,
/// which keeps the two subsets exact mirror images of each other.
pub fn fit_mixture2(table: &EnergyTable, reference: SpinConfiguration) -> Result<MixtureFit> {
    let n = table.n();
    let points: Vec<(f64, f64)> = table
        .values()
        .iter()
        .enumerate()
        .map(|(xp, &e)| ((reference.index() ^ xp).count_ones() as f64, e))
        .collect();
    let center = n as f64 / 2.0;
    let split = (n as f64).sqrt() / 2.0;
    let mut fit = fit_mixture2_points(&points, [(center - split, 0.0), (center + split, 0.0)])?;
    let mask = table.len() - 1;
    for x in 0..table.len() {
        let xb = x ^ mask;
        if xb > x
            && (fit.responsibilities[x] - 0.5).abs() < 1e-9
            && (fit.responsibilities[xb] - 0.5).abs() < 1e-9
        {
            fit.assignments[x] = 0;
            fit.assignments[xb] = 1;
        }
    }
    fit.reference = Some(reference);
    Ok(fit)
}
