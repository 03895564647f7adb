//! Batch experiment runner: one record JSON per instance, one aggregate CSV
//! per requested analysis. Instances run on a small worker pool; results are
//! written in index order so reruns of the same config are byte-identical.

use std::collections::BTreeSet;
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use anyhow::Context;
use serde::Serialize;

use qaoatherm_core::ising::{
    generate_maxcut, generate_qubo, two_level, EnergyTable, IsingInstance, SpinConfiguration,
};
use qaoatherm_core::mcmc::{
    exact_boltzmann, metropolis_sample, mixing_bound_report, total_variation, ChainConfig,
    MixingBoundReport,
};
use qaoatherm_core::qaoa::{
    mean_energy, optimize_angles, run_qaoa_with_spectrum, AngleSchedule, GridSpec,
};
use qaoatherm_core::rng;
use qaoatherm_core::stats::{
    fit_mixture2, fit_sigma_eh_slope, joint_moments, normality_test, JointMoments, MixtureFit,
    SlopeFit,
};
use qaoatherm_core::thermal::{beta_gamma_scan, detect_gamma_c, fit_beta, GammaCReport, ThermalFit};

use crate::config::{Analysis, AnglePair, AnglePolicy, ExperimentConfig, Family, Resolved};

/// Fixed pipeline parameters, echoed into every record so each number is
/// traceable to the thresholds that produced it.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct Thresholds {
    /// Quantile levels per Q-Q comparison.
    pub qq_quantile_count: usize,
    /// Agreement band: |empirical - theoretical| within
    /// max(relative * theoretical, absolute).
    pub qq_band_relative: f64,
    pub qq_band_absolute: f64,
    /// Points in the gamma scan, spaced k/points * gamma up to the base angle.
    pub scan_points: usize,
    pub mcmc_sweeps: usize,
    pub mcmc_burn_in_sweeps: usize,
    pub mcmc_chain_count: usize,
}

pub const THRESHOLDS: Thresholds = Thresholds {
    qq_quantile_count: 500,
    qq_band_relative: 0.1,
    qq_band_absolute: 0.2,
    scan_points: 8,
    mcmc_sweeps: 2_000,
    mcmc_burn_in_sweeps: 500,
    mcmc_chain_count: 4,
};

/// Inside the band rule recorded in `Thresholds`.
pub fn within_band(empirical: f64, theoretical: f64) -> bool {
    (empirical - theoretical).abs()
        <= f64::max(THRESHOLDS.qq_band_relative * theoretical, THRESHOLDS.qq_band_absolute)
}

/// What the subcommand asked for beyond the per-analysis blocks.
#[derive(Clone, Copy, Debug, Default)]
pub struct RunOptions {
    /// Write each sampled instance as `instance_NNNN.json`.
    pub write_instances: bool,
    /// Emit `aggregate_optimize.csv` from the per-instance optima.
    pub emit_optimize_csv: bool,
}

#[derive(Serialize)]
struct InstanceSummary {
    family: &'static str,
    n: usize,
    state_count: usize,
    density: Option<f64>,
    delta: Option<f64>,
    offset: f64,
    degenerate: bool,
    spectral_norm: f64,
    ground_energy: f64,
    highest_energy: f64,
}

#[derive(Serialize)]
struct OptimizationSummary {
    gamma_opt: f64,
    theta_opt: f64,
    mean_energy: f64,
    gamma_range: f64,
    evaluations: usize,
}

#[derive(Serialize)]
struct SimulateBlock {
    gamma: f64,
    theta: f64,
    mean_energy: f64,
    /// (E_max - <E>) / (E_max - E_min): how far the mean sits below the top.
    mean_energy_ratio: f64,
    ground_probability: f64,
    max_probability: f64,
}

#[derive(Serialize)]
struct StructureBlock {
    references: Vec<JointMoments>,
    slope: SlopeFit,
    /// True when the slope fit ran inside mixture clusters (degenerate
    /// spectra mix two branches of opposite slope).
    hierarchy_used: bool,
}

#[derive(Serialize)]
struct MixtureBlock {
    reference: usize,
    fit: MixtureFit,
    ashman_d: f64,
    mirror_structure: bool,
}

#[derive(Serialize)]
struct NormalityBlock {
    reference: usize,
    agreement_fraction: f64,
    agreement_to_p99: f64,
    tail_outlier_fraction: f64,
    sample_count: usize,
}

#[derive(Serialize)]
struct ThermalBlock {
    gamma: f64,
    theta: f64,
    fit: ThermalFit,
}

#[derive(Serialize)]
struct ScanPoint {
    gamma: f64,
    beta: f64,
    r_squared: f64,
}

#[derive(Serialize)]
struct ScanBlock {
    theta: f64,
    points: Vec<ScanPoint>,
    gamma_c: GammaCReport,
}

#[derive(Serialize)]
struct McmcBlock {
    beta: f64,
    sweeps: usize,
    burn_in_sweeps: usize,
    chain_count: usize,
    chain_seed: u64,
    acceptance_rate: f64,
    total_samples: u64,
    tvd_to_exact: f64,
    mixing: MixingBoundReport,
}

/// Everything known about one instance run. Absent analyses serialize as
/// null so the record schema is identical across configs.
#[derive(Serialize)]
struct Record {
    version: &'static str,
    instance_index: usize,
    instance_seed: u64,
    config: ExperimentConfig,
    instance: InstanceSummary,
    optimization: Option<OptimizationSummary>,
    angles: Option<Vec<AnglePair>>,
    simulate: Option<Vec<SimulateBlock>>,
    structure: Option<StructureBlock>,
    mixture: Option<Vec<MixtureBlock>>,
    normality: Option<Vec<NormalityBlock>>,
    thermal: Option<Vec<ThermalBlock>>,
    scan: Option<ScanBlock>,
    mcmc: Option<McmcBlock>,
    thresholds: Thresholds,
}

struct InstanceOutput {
    record: Record,
    instance_json: Option<String>,
}

fn build_instance(cfg: &Resolved, seed: u64) -> qaoatherm_core::Result<IsingInstance> {
    match cfg.family {
        Family::Qubo => generate_qubo(cfg.n, cfg.density, seed),
        Family::Maxcut => generate_maxcut(cfg.n, cfg.density, seed),
        Family::TwoLevel => two_level(cfg.delta),
    }
}

fn probabilities(table: &EnergyTable, gamma: f64, theta: f64) -> qaoatherm_core::Result<Vec<f64>> {
    Ok(run_qaoa_with_spectrum(table, &AngleSchedule::single(gamma, theta))?.probabilities())
}

/// The effective analysis set: the config's own plus whatever the subcommand
/// implies; `mcmc` needs a fitted temperature, so it pulls in `thermal`.
pub fn effective_analyses(cfg: &Resolved, implied: &[Analysis]) -> BTreeSet<Analysis> {
    let mut set = cfg.analyses.clone();
    set.extend(implied.iter().copied());
    if set.contains(&Analysis::Mcmc) {
        set.insert(Analysis::Thermal);
    }
    set.remove(&Analysis::Figures);
    set
}

fn process_instance(
    cfg: &Resolved,
    analyses: &BTreeSet<Analysis>,
    options: RunOptions,
    index: usize,
) -> anyhow::Result<InstanceOutput> {
    let instance_seed = rng::derive_seed(cfg.seed, index as u64);
    let instance = build_instance(cfg, instance_seed)?;
    let table = instance.full_spectrum();
    let degenerate = instance.is_degenerate();

    let summary = InstanceSummary {
        family: cfg.family.label(),
        n: instance.n(),
        state_count: instance.state_count(),
        density: (cfg.family != Family::TwoLevel).then_some(cfg.density),
        delta: (cfg.family == Family::TwoLevel).then_some(cfg.delta),
        offset: instance.offset(),
        degenerate,
        spectral_norm: instance.spectral_norm(),
        ground_energy: table.value(table.ground_state()),
        highest_energy: table.value(table.highest_state()),
    };

    // Angles are only resolved when something downstream consumes them.
    let needs_angles = !analyses.is_empty() || options.emit_optimize_csv;
    let mut optimization = None;
    let mut angles: Option<Vec<AnglePair>> = None;
    if needs_angles {
        angles = Some(match &cfg.angle_policy {
            AnglePolicy::Explicit(pairs) => pairs.clone(),
            AnglePolicy::Optimize | AnglePolicy::Grid { .. } => {
                let spec = match &cfg.angle_policy {
                    AnglePolicy::Grid { gamma_points, theta_points, gamma_max } => GridSpec {
                        gamma_points: *gamma_points,
                        theta_points: *theta_points,
                        gamma_max: *gamma_max,
                    },
                    _ => GridSpec::default(),
                };
                let result = optimize_angles(&table, &spec)?;
                optimization = Some(OptimizationSummary {
                    gamma_opt: result.gamma_opt,
                    theta_opt: result.theta_opt,
                    mean_energy: result.mean_energy,
                    gamma_range: result.gamma_range,
                    evaluations: result.trace.len(),
                });
                vec![AnglePair { gamma: result.gamma_opt, theta: result.theta_opt }]
            }
        });
    }
    let pairs = angles.clone().unwrap_or_default();
    let references = [table.ground_state(), table.highest_state()];

    let simulate = if analyses.contains(&Analysis::Simulate) {
        let mut blocks = Vec::with_capacity(pairs.len());
        for pair in &pairs {
            let state =
                run_qaoa_with_spectrum(&table, &AngleSchedule::single(pair.gamma, pair.theta))?;
            let probs = state.probabilities();
            let energy = mean_energy(&state, &table)?;
            let range = table.value(table.highest_state()) - table.value(table.ground_state());
            blocks.push(SimulateBlock {
                gamma: pair.gamma,
                theta: pair.theta,
                mean_energy: energy,
                mean_energy_ratio: (table.value(table.highest_state()) - energy) / range,
                ground_probability: probs[table.ground_state().index()],
                max_probability: probs.iter().cloned().fold(0.0, f64::max),
            });
        }
        Some(blocks)
    } else {
        None
    };

    // Degenerate spectra need the mixture hierarchy for slope fits and
    // normality scoring even when the mixture block itself was not asked for.
    let hierarchy = |reference: SpinConfiguration| -> anyhow::Result<Option<MixtureFit>> {
        Ok(if degenerate { Some(fit_mixture2(&table, reference)?) } else { None })
    };

    let structure = if analyses.contains(&Analysis::Structure) {
        let moments = references.iter().map(|&r| joint_moments(&table, r)).collect();
        let fit = hierarchy(references[0])?;
        let slope = fit_sigma_eh_slope(&instance, &table, fit.as_ref())?;
        Some(StructureBlock { references: moments, slope, hierarchy_used: fit.is_some() })
    } else {
        None
    };

    let mixture = if analyses.contains(&Analysis::Mixture) {
        let mut blocks = Vec::with_capacity(references.len());
        for &r in &references {
            let fit = fit_mixture2(&table, r)?;
            blocks.push(MixtureBlock {
                reference: r.index(),
                ashman_d: fit.ashman_d(),
                mirror_structure: fit.mirror_structure(),
                fit,
            });
        }
        Some(blocks)
    } else {
        None
    };

    let normality = if analyses.contains(&Analysis::Normality) {
        let mut blocks = Vec::with_capacity(references.len());
        for &r in &references {
            let fit = hierarchy(r)?;
            let report =
                normality_test(&instance, &table, r, fit.as_ref(), THRESHOLDS.qq_quantile_count)?;
            blocks.push(NormalityBlock {
                reference: r.index(),
                agreement_fraction: report.agreement_fraction,
                agreement_to_p99: report.agreement_up_to(0.99),
                tail_outlier_fraction: report.tail_outlier_fraction,
                sample_count: report.sample_count,
            });
        }
        Some(blocks)
    } else {
        None
    };

    let thermal = if analyses.contains(&Analysis::Thermal) {
        let mut blocks = Vec::with_capacity(pairs.len());
        for pair in &pairs {
            let fit = fit_beta(&probabilities(&table, pair.gamma, pair.theta)?, &table)?;
            blocks.push(ThermalBlock { gamma: pair.gamma, theta: pair.theta, fit });
        }
        Some(blocks)
    } else {
        None
    };

    let scan = if analyses.contains(&Analysis::Scan) {
        let base = pairs.first().copied().ok_or_else(|| {
            anyhow::anyhow!("scan: no angles resolved for instance {index}")
        })?;
        let count = THRESHOLDS.scan_points;
        let gammas: Vec<f64> =
            (1..=count).map(|k| base.gamma * k as f64 / count as f64).collect();
        let swept = beta_gamma_scan(&table, base.theta, &gammas)?;
        let gamma_c = detect_gamma_c(&swept)?;
        let points = swept
            .iter()
            .map(|(gamma, fit)| ScanPoint { gamma: *gamma, beta: fit.beta, r_squared: fit.r_squared })
            .collect();
        Some(ScanBlock { theta: base.theta, points, gamma_c })
    } else {
        None
    };

    let mcmc = if analyses.contains(&Analysis::Mcmc) {
        let fit = &thermal.as_ref().expect("mcmc implies thermal")[0].fit;
        let chain_seed = rng::derive_seed(instance_seed, 101);
        let chain = ChainConfig {
            beta: fit.beta,
            sweeps: THRESHOLDS.mcmc_sweeps,
            burn_in_sweeps: THRESHOLDS.mcmc_burn_in_sweeps,
            chain_count: THRESHOLDS.mcmc_chain_count,
            seed: chain_seed,
        };
        let run = metropolis_sample(&instance, &chain)?;
        let tvd = total_variation(&run.probabilities, &exact_boltzmann(&table, fit.beta))?;
        Some(McmcBlock {
            beta: fit.beta,
            sweeps: chain.sweeps,
            burn_in_sweeps: chain.burn_in_sweeps,
            chain_count: chain.chain_count,
            chain_seed,
            acceptance_rate: run.acceptance_rate,
            total_samples: run.total_samples,
            tvd_to_exact: tvd,
            mixing: mixing_bound_report(&instance, fit),
        })
    } else {
        None
    };

    let record = Record {
        version: env!("CARGO_PKG_VERSION"),
        instance_index: index,
        instance_seed,
        config: cfg.raw.clone(),
        instance: summary,
        optimization,
        angles,
        simulate,
        structure,
        mixture,
        normality,
        thermal,
        scan,
        mcmc,
        thresholds: THRESHOLDS,
    };
    let instance_json = if options.write_instances {
        Some(to_pretty_json(&instance)?)
    } else {
        None
    };
    Ok(InstanceOutput { record, instance_json })
}

fn to_pretty_json<T: Serialize>(value: &T) -> anyhow::Result<String> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    Ok(text)
}

/// Runs the whole batch and writes records, instances and aggregates under
/// the config's output directory. Reruns with the same config produce
/// byte-identical files: no timestamps, deterministic seeds, ordered output.
pub fn run_experiment(
    cfg: &Resolved,
    implied: &[Analysis],
    options: RunOptions,
) -> anyhow::Result<()> {
    let analyses = effective_analyses(cfg, implied);
    std::fs::create_dir_all(&cfg.output_dir).with_context(|| {
        format!("output_dir: cannot create {}", cfg.output_dir.display())
    })?;

    let count = cfg.instance_count;
    let workers = std::thread::available_parallelism()
        .map(|p| p.get())
        .unwrap_or(1)
        .min(count);
    let slots: Mutex<Vec<Option<anyhow::Result<InstanceOutput>>>> =
        Mutex::new((0..count).map(|_| None).collect());
    let next = AtomicUsize::new(0);
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let index = next.fetch_add(1, Ordering::SeqCst);
                if index >= count {
                    break;
                }
                let output = process_instance(cfg, &analyses, options, index);
                slots.lock().unwrap()[index] = Some(output);
            });
        }
    });

    let mut outputs = Vec::with_capacity(count);
    for slot in slots.into_inner().unwrap() {
        outputs.push(slot.expect("every index processed")?);
    }

    let write_records = !analyses.is_empty() || options.emit_optimize_csv;
    for (index, output) in outputs.iter().enumerate() {
        if let Some(json) = &output.instance_json {
            std::fs::write(cfg.output_dir.join(format!("instance_{index:04}.json")), json)?;
        }
        if write_records {
            let path = cfg.output_dir.join(format!("record_{index:04}.json"));
            std::fs::write(path, to_pretty_json(&output.record)?)?;
        }
    }

    let records: Vec<&Record> = outputs.iter().map(|o| &o.record).collect();
    if options.emit_optimize_csv {
        write_optimize_csv(&cfg.output_dir, &records)?;
    }
    for analysis in &analyses {
        write_aggregate(&cfg.output_dir, *analysis, &records)?;
    }

    let noun = if count == 1 { "instance" } else { "instances" };
    println!("wrote {count} {noun} to {}", cfg.output_dir.display());
    Ok(())
}

fn csv_writer(path: &Path) -> anyhow::Result<csv::Writer<std::fs::File>> {
    csv::Writer::from_path(path).with_context(|| format!("cannot write {}", path.display()))
}

fn write_optimize_csv(dir: &Path, records: &[&Record]) -> anyhow::Result<()> {
    let mut w = csv_writer(&dir.join("aggregate_optimize.csv"))?;
    w.write_record([
        "instance",
        "seed",
        "gamma_opt",
        "theta_opt",
        "mean_energy",
        "gamma_range",
        "evaluations",
    ])?;
    for r in records {
        let o = r.optimization.as_ref().ok_or_else(|| {
            anyhow::anyhow!("optimize output requested but angle policy is explicit")
        })?;
        w.write_record([
            r.instance_index.to_string(),
            r.instance_seed.to_string(),
            o.gamma_opt.to_string(),
            o.theta_opt.to_string(),
            o.mean_energy.to_string(),
            o.gamma_range.to_string(),
            o.evaluations.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn write_aggregate(dir: &Path, analysis: Analysis, records: &[&Record]) -> anyhow::Result<()> {
    let path = dir.join(format!("aggregate_{}.csv", analysis.label()));
    let mut w = csv_writer(&path)?;
    match analysis {
        Analysis::Simulate => {
            w.write_record([
                "instance",
                "seed",
                "gamma",
                "theta",
                "mean_energy",
                "mean_energy_ratio",
                "ground_probability",
                "max_probability",
            ])?;
            for r in records {
                for b in r.simulate.as_deref().unwrap_or_default() {
                    w.write_record([
                        r.instance_index.to_string(),
                        r.instance_seed.to_string(),
                        b.gamma.to_string(),
                        b.theta.to_string(),
                        b.mean_energy.to_string(),
                        b.mean_energy_ratio.to_string(),
                        b.ground_probability.to_string(),
                        b.max_probability.to_string(),
                    ])?;
                }
            }
        }
        Analysis::Structure => {
            w.write_record([
                "instance",
                "seed",
                "reference",
                "mu_e",
                "sigma_e",
                "mu_h",
                "sigma_h",
                "sigma_eh",
                "rho",
                "slope_c",
                "slope_omega",
                "slope_r_squared",
            ])?;
            for r in records {
                if let Some(b) = &r.structure {
                    for m in &b.references {
                        w.write_record([
                            r.instance_index.to_string(),
                            r.instance_seed.to_string(),
                            m.reference.index().to_string(),
                            m.mu_e.to_string(),
                            m.sigma_e.to_string(),
                            m.mu_h.to_string(),
                            m.sigma_h.to_string(),
                            m.sigma_eh.to_string(),
                            m.rho.to_string(),
                            b.slope.c.to_string(),
                            b.slope.omega.to_string(),
                            b.slope.r_squared.to_string(),
                        ])?;
                    }
                }
            }
        }
        Analysis::Mixture => {
            w.write_record([
                "instance",
                "seed",
                "reference",
                "weight_0",
                "mean_h_0",
                "mean_e_0",
                "weight_1",
                "mean_h_1",
                "mean_e_1",
                "h0",
                "ashman_d",
                "mirror_structure",
                "converged",
            ])?;
            for r in records {
                for b in r.mixture.as_deref().unwrap_or_default() {
                    let [c0, c1] = &b.fit.components;
                    w.write_record([
                        r.instance_index.to_string(),
                        r.instance_seed.to_string(),
                        b.reference.to_string(),
                        c0.weight.to_string(),
                        c0.mean_h.to_string(),
                        c0.mean_e.to_string(),
                        c1.weight.to_string(),
                        c1.mean_h.to_string(),
                        c1.mean_e.to_string(),
                        b.fit.h0.to_string(),
                        b.ashman_d.to_string(),
                        b.mirror_structure.to_string(),
                        b.fit.converged.to_string(),
                    ])?;
                }
            }
        }
        Analysis::Normality => {
            w.write_record([
                "instance",
                "seed",
                "reference",
                "agreement_fraction",
                "agreement_to_p99",
                "tail_outlier_fraction",
                "sample_count",
            ])?;
            for r in records {
                for b in r.normality.as_deref().unwrap_or_default() {
                    w.write_record([
                        r.instance_index.to_string(),
                        r.instance_seed.to_string(),
                        b.reference.to_string(),
                        b.agreement_fraction.to_string(),
                        b.agreement_to_p99.to_string(),
                        b.tail_outlier_fraction.to_string(),
                        b.sample_count.to_string(),
                    ])?;
                }
            }
        }
        Analysis::Thermal => {
            w.write_record([
                "instance",
                "seed",
                "gamma",
                "theta",
                "beta",
                "intercept",
                "r_squared",
                "residual_std",
                "excluded_fraction",
                "two_exponential",
            ])?;
            for r in records {
                for b in r.thermal.as_deref().unwrap_or_default() {
                    w.write_record([
                        r.instance_index.to_string(),
                        r.instance_seed.to_string(),
                        b.gamma.to_string(),
                        b.theta.to_string(),
                        b.fit.beta.to_string(),
                        b.fit.intercept.to_string(),
                        b.fit.r_squared.to_string(),
                        b.fit.residual_std.to_string(),
                        b.fit.excluded_fraction.to_string(),
                        b.fit.two_exponential.to_string(),
                    ])?;
                }
            }
        }
        Analysis::Scan => {
            w.write_record([
                "instance", "seed", "gamma", "beta", "r_squared", "gamma_c", "reached",
            ])?;
            for r in records {
                if let Some(b) = &r.scan {
                    for p in &b.points {
                        w.write_record([
                            r.instance_index.to_string(),
                            r.instance_seed.to_string(),
                            p.gamma.to_string(),
                            p.beta.to_string(),
                            p.r_squared.to_string(),
                            b.gamma_c.gamma_c.to_string(),
                            b.gamma_c.reached.to_string(),
                        ])?;
                    }
                }
            }
        }
        Analysis::Mcmc => {
            w.write_record([
                "instance",
                "seed",
                "beta",
                "acceptance_rate",
                "total_samples",
                "tvd_to_exact",
                "temperature",
                "spectral_norm",
                "ratio",
                "below_bound",
            ])?;
            for r in records {
                if let Some(b) = &r.mcmc {
                    w.write_record([
                        r.instance_index.to_string(),
                        r.instance_seed.to_string(),
                        b.beta.to_string(),
                        b.acceptance_rate.to_string(),
                        b.total_samples.to_string(),
                        b.tvd_to_exact.to_string(),
                        b.mixing.temperature.to_string(),
                        b.mixing.spectral_norm.to_string(),
                        b.mixing.ratio.map(|r| r.to_string()).unwrap_or_default(),
                        b.mixing.below_bound.to_string(),
                    ])?;
                }
            }
        }
        Analysis::Figures => unreachable!("filtered out of the effective set"),
    }
    w.flush()?;
    Ok(())
}
