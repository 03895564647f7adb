//! Plot-ready data files. Plotting itself is out of scope: each kind writes
//! one CSV with documented columns plus a small metadata JSON describing the
//! parameters that produced it, so any plotting tool can consume the output.

use std::f64::consts::{FRAC_PI_3, FRAC_PI_4, FRAC_PI_6, FRAC_PI_8, PI};
use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::Serialize;
use serde_json::json;

use qaoatherm_core::ising::{generate_maxcut, generate_qubo, two_level, SpinConfiguration};
use qaoatherm_core::qaoa::{optimize_angles, run_qaoa_with_spectrum, AngleSchedule, GridSpec};
use qaoatherm_core::rng;
use qaoatherm_core::stats::{fit_mixture2, joint_moments, normality_test, GaussianComponent};

use crate::config::{ConfigError, Family, Resolved};
use crate::experiment::{within_band, THRESHOLDS};

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum FigureKind {
    /// Single-spin amplification landscape over the angle grid.
    Fig2,
    /// Energy vs Hamming-distance cloud with fitted ellipse parameters.
    Fig3,
    /// Mahalanobis Q-Q quantiles across an instance batch.
    Fig4,
    /// Sampled distributions along a ladder of gamma values.
    Fig5,
    /// Sampled distributions across mixer angles at the optimal gamma.
    Fig6,
}

impl FigureKind {
    fn label(self) -> &'static str {
        match self {
            FigureKind::Fig2 => "fig2",
            FigureKind::Fig3 => "fig3",
            FigureKind::Fig4 => "fig4",
            FigureKind::Fig5 => "fig5",
            FigureKind::Fig6 => "fig6",
        }
    }
}

/// Batch size presets for fig4: `quick` keeps CI fast, `full` reproduces the
/// headline batch (minutes of runtime).
#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Profile {
    Quick,
    Full,
}

fn config_mismatch(kind: FigureKind, needs: &str) -> anyhow::Error {
    ConfigError(format!("family: figure {} requires {needs}", kind.label())).into()
}

pub fn emit(kind: FigureKind, cfg: &Resolved, profile: Option<Profile>) -> anyhow::Result<()> {
    match kind {
        FigureKind::Fig2 => {
            if cfg.family != Family::TwoLevel {
                return Err(config_mismatch(kind, "family two_level"));
            }
        }
        _ => {
            if cfg.family == Family::TwoLevel {
                return Err(config_mismatch(kind, "a random instance family (qubo or maxcut)"));
            }
        }
    }
    if profile.is_some() && kind != FigureKind::Fig4 {
        return Err(ConfigError("profile: only figure fig4 has batch profiles".into()).into());
    }
    std::fs::create_dir_all(&cfg.output_dir).with_context(|| {
        format!("output_dir: cannot create {}", cfg.output_dir.display())
    })?;
    match kind {
        FigureKind::Fig2 => fig2(cfg),
        FigureKind::Fig3 => fig3(cfg),
        FigureKind::Fig4 => fig4(cfg, profile),
        FigureKind::Fig5 => fig5(cfg),
        FigureKind::Fig6 => fig6(cfg),
    }
}

fn csv_path(cfg: &Resolved, kind: FigureKind) -> PathBuf {
    cfg.output_dir.join(format!("figure_{}.csv", kind.label()))
}

fn write_meta(
    cfg: &Resolved,
    kind: FigureKind,
    parameters: serde_json::Value,
    files: &[String],
) -> anyhow::Result<()> {
    let meta = json!({
        "kind": kind.label(),
        "version": env!("CARGO_PKG_VERSION"),
        "config": cfg.raw,
        "parameters": parameters,
        "files": files,
    });
    let path = cfg.output_dir.join(format!("figure_{}_meta.json", kind.label()));
    let mut text = serde_json::to_string_pretty(&meta)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

fn csv_writer(path: &Path) -> anyhow::Result<csv::Writer<std::fs::File>> {
    csv::Writer::from_path(path).with_context(|| format!("cannot write {}", path.display()))
}

/// Probability of both levels over a 41 x 41 (theta, gamma) grid. The grid
/// deliberately contains the analytic maxima: theta = pi/4 at index 11 of
/// the theta axis, |gamma| = pi / (2 delta) at plus/minus 10 steps from the
/// center of the gamma axis.
fn fig2(cfg: &Resolved) -> anyhow::Result<()> {
    let delta = cfg.delta;
    let instance = two_level(delta)?;
    let table = instance.full_spectrum();
    let (ground, excited) = (table.ground_state(), table.highest_state());
    let gamma_peak = PI / (2.0 * delta);

    let path = csv_path(cfg, FigureKind::Fig2);
    let mut w = csv_writer(&path)?;
    w.write_record(["theta", "gamma", "p_ground", "p_excited"])?;
    for j in 1..=41 {
        let theta = j as f64 * PI / 44.0;
        for i in 0..41 {
            let gamma = -2.0 * gamma_peak + i as f64 * gamma_peak / 10.0;
            let state = run_qaoa_with_spectrum(&table, &AngleSchedule::single(gamma, theta))?;
            let probs = state.probabilities();
            w.write_record([
                theta.to_string(),
                gamma.to_string(),
                probs[ground.index()].to_string(),
                probs[excited.index()].to_string(),
            ])?;
        }
    }
    w.flush()?;
    write_meta(
        cfg,
        FigureKind::Fig2,
        json!({
            "delta": delta,
            "theta_points": 41,
            "theta_step": PI / 44.0,
            "gamma_points": 41,
            "gamma_half_width": 2.0 * gamma_peak,
        }),
        &["figure_fig2.csv".into()],
    )
}

#[derive(Serialize)]
struct Ellipse {
    weight: f64,
    mean_h: f64,
    mean_e: f64,
    cov_hh: f64,
    cov_he: f64,
    cov_ee: f64,
}

impl From<&GaussianComponent> for Ellipse {
    fn from(c: &GaussianComponent) -> Self {
        Ellipse {
            weight: c.weight,
            mean_h: c.mean_h,
            mean_e: c.mean_e,
            cov_hh: c.cov_hh,
            cov_he: c.cov_he,
            cov_ee: c.cov_ee,
        }
    }
}

/// The (H, E) point cloud of the first instance from its ground-state
/// reference, labeled by mixture component for degenerate spectra, plus a
/// sidecar JSON with the fitted ellipse parameters.
fn fig3(cfg: &Resolved) -> anyhow::Result<()> {
    let seed = rng::derive_seed(cfg.seed, 0);
    let instance = match cfg.family {
        Family::Qubo => generate_qubo(cfg.n, cfg.density, seed)?,
        Family::Maxcut => generate_maxcut(cfg.n, cfg.density, seed)?,
        Family::TwoLevel => unreachable!("rejected in emit"),
    };
    let table = instance.full_spectrum();
    let reference = table.ground_state();

    let (labels, ellipses): (Vec<u8>, Vec<Ellipse>) = if instance.is_degenerate() {
        let fit = fit_mixture2(&table, reference)?;
        let ellipses = fit.components.iter().map(Ellipse::from).collect();
        (fit.assignments.clone(), ellipses)
    } else {
        let m = joint_moments(&table, reference);
        let single = Ellipse {
            weight: 1.0,
            mean_h: m.mu_h,
            mean_e: m.mu_e,
            cov_hh: m.sigma_h * m.sigma_h,
            cov_he: m.sigma_eh,
            cov_ee: m.sigma_e * m.sigma_e,
        };
        (vec![0; table.len()], vec![single])
    };

    let path = csv_path(cfg, FigureKind::Fig3);
    let mut w = csv_writer(&path)?;
    w.write_record(["h", "e", "component_label"])?;
    for (x, &e) in table.values().iter().enumerate() {
        let h = reference.hamming_to(SpinConfiguration(x));
        w.write_record([h.to_string(), e.to_string(), labels[x].to_string()])?;
    }
    w.flush()?;

    let sidecar = json!({
        "reference": reference.index(),
        "hierarchical": instance.is_degenerate(),
        "ellipses": ellipses,
    });
    let mut text = serde_json::to_string_pretty(&sidecar)?;
    text.push('\n');
    std::fs::write(cfg.output_dir.join("figure_fig3_ellipses.json"), text)?;

    write_meta(
        cfg,
        FigureKind::Fig3,
        json!({ "instance_seed": seed, "reference": reference.index() }),
        &["figure_fig3.csv".into(), "figure_fig3_ellipses.json".into()],
    )
}

/// Q-Q quantile rows (exactly `qq_quantile_count` per instance) of squared
/// Mahalanobis distances against the chi-squared(2) law, ground-state
/// reference, mixture-clustered for degenerate spectra.
fn fig4(cfg: &Resolved, profile: Option<Profile>) -> anyhow::Result<()> {
    let (n, instances) = match profile {
        Some(Profile::Quick) => (12, 100),
        Some(Profile::Full) => (14, 1000),
        None => (cfg.n, cfg.instance_count),
    };

    let path = csv_path(cfg, FigureKind::Fig4);
    let mut w = csv_writer(&path)?;
    w.write_record(["instance", "level", "theoretical", "empirical", "within_band"])?;
    for index in 0..instances {
        let seed = rng::derive_seed(cfg.seed, index as u64);
        let instance = match cfg.family {
            Family::Qubo => generate_qubo(n, cfg.density, seed)?,
            Family::Maxcut => generate_maxcut(n, cfg.density, seed)?,
            Family::TwoLevel => unreachable!("rejected in emit"),
        };
        let table = instance.full_spectrum();
        let reference = table.ground_state();
        let mixture = if instance.is_degenerate() {
            Some(fit_mixture2(&table, reference)?)
        } else {
            None
        };
        let report = normality_test(
            &instance,
            &table,
            reference,
            mixture.as_ref(),
            THRESHOLDS.qq_quantile_count,
        )?;
        for pair in &report.quantile_pairs {
            w.write_record([
                index.to_string(),
                pair.level.to_string(),
                pair.theoretical.to_string(),
                pair.empirical.to_string(),
                within_band(pair.empirical, pair.theoretical).to_string(),
            ])?;
        }
    }
    w.flush()?;
    write_meta(
        cfg,
        FigureKind::Fig4,
        json!({
            "n": n,
            "instances": instances,
            "profile": profile.map(|p| match p { Profile::Quick => "quick", Profile::Full => "full" }),
            "quantile_count": THRESHOLDS.qq_quantile_count,
            "band_relative": THRESHOLDS.qq_band_relative,
            "band_absolute": THRESHOLDS.qq_band_absolute,
        }),
        &["figure_fig4.csv".into()],
    )
}

/// Shared scaffolding for fig5/fig6: first instance, optimized angles, one
/// probability table per swept value.
struct SweepBase {
    table: qaoatherm_core::ising::EnergyTable,
    gamma_opt: f64,
    theta_opt: f64,
    seed: u64,
}

fn sweep_base(cfg: &Resolved) -> anyhow::Result<SweepBase> {
    let seed = rng::derive_seed(cfg.seed, 0);
    let instance = match cfg.family {
        Family::Qubo => generate_qubo(cfg.n, cfg.density, seed)?,
        Family::Maxcut => generate_maxcut(cfg.n, cfg.density, seed)?,
        Family::TwoLevel => unreachable!("rejected in emit"),
    };
    let table = instance.full_spectrum();
    let opt = optimize_angles(&table, &GridSpec::default())?;
    Ok(SweepBase { table, gamma_opt: opt.gamma_opt, theta_opt: opt.theta_opt, seed })
}

fn write_sweep_rows(
    w: &mut csv::Writer<std::fs::File>,
    table: &qaoatherm_core::ising::EnergyTable,
    swept: f64,
    gamma: f64,
    theta: f64,
) -> anyhow::Result<()> {
    let state = run_qaoa_with_spectrum(table, &AngleSchedule::single(gamma, theta))?;
    let probs = state.probabilities();
    for (x, &e) in table.values().iter().enumerate() {
        w.write_record([
            swept.to_string(),
            x.to_string(),
            e.to_string(),
            probs[x].to_string(),
        ])?;
    }
    Ok(())
}

/// Distribution ladder in gamma at the optimal mixer angle; the zero row set
/// is the uniform superposition.
const FIG5_MULTIPLIERS: [f64; 6] = [0.0, 0.25, 0.5, 1.0, 2.0, 4.0];

fn fig5(cfg: &Resolved) -> anyhow::Result<()> {
    let base = sweep_base(cfg)?;
    let path = csv_path(cfg, FigureKind::Fig5);
    let mut w = csv_writer(&path)?;
    w.write_record(["gamma", "x", "e", "prob"])?;
    for m in FIG5_MULTIPLIERS {
        // Avoids a negative zero in the output at the m = 0 row set.
        let gamma = if m == 0.0 { 0.0 } else { m * base.gamma_opt };
        write_sweep_rows(&mut w, &base.table, gamma, gamma, base.theta_opt)?;
    }
    w.flush()?;
    write_meta(
        cfg,
        FigureKind::Fig5,
        json!({
            "instance_seed": base.seed,
            "gamma_opt": base.gamma_opt,
            "theta_opt": base.theta_opt,
            "gamma_multipliers": FIG5_MULTIPLIERS,
        }),
        &["figure_fig5.csv".into()],
    )
}

/// Distribution across mixer angles at the optimal gamma.
const FIG6_THETAS: [f64; 5] = [FRAC_PI_8, FRAC_PI_6, FRAC_PI_4, FRAC_PI_3, 3.0 * FRAC_PI_8];

fn fig6(cfg: &Resolved) -> anyhow::Result<()> {
    let base = sweep_base(cfg)?;
    let path = csv_path(cfg, FigureKind::Fig6);
    let mut w = csv_writer(&path)?;
    w.write_record(["theta", "x", "e", "prob"])?;
    for theta in FIG6_THETAS {
        write_sweep_rows(&mut w, &base.table, theta, base.gamma_opt, theta)?;
    }
    w.flush()?;
    write_meta(
        cfg,
        FigureKind::Fig6,
        json!({
            "instance_seed": base.seed,
            "gamma_opt": base.gamma_opt,
            "theta_opt": base.theta_opt,
            "thetas": FIG6_THETAS,
        }),
        &["figure_fig6.csv".into()],
    )
}
