//! Experiment configuration: a JSON file, command-line overrides on top,
//! then a validation pass that turns the optional soup into a `Resolved`
//! config with every field checked. Validation errors carry the field name
//! so a bad config is diagnosable from the message alone.

use std::collections::BTreeSet;
use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

/// A rejected configuration; the message starts with the offending field.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl std::error::Error for ConfigError {}

fn field_err<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError(msg.into()))
}

#[derive(
    Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize, clap::ValueEnum,
)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum Family {
    Qubo,
    Maxcut,
    TwoLevel,
}

impl Family {
    pub fn label(self) -> &'static str {
        match self {
            Family::Qubo => "qubo",
            Family::Maxcut => "maxcut",
            Family::TwoLevel => "two_level",
        }
    }
}

/// One analysis stage of the per-instance pipeline. `Figures` is accepted in
/// configs for completeness but only acts through the `figure` subcommand,
/// which needs a kind argument.
#[derive(
    Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize,
)]
#[serde(rename_all = "snake_case")]
pub enum Analysis {
    Simulate,
    Structure,
    Normality,
    Mixture,
    Thermal,
    Scan,
    Mcmc,
    Figures,
}

impl Analysis {
    pub fn label(self) -> &'static str {
        match self {
            Analysis::Simulate => "simulate",
            Analysis::Structure => "structure",
            Analysis::Normality => "normality",
            Analysis::Mixture => "mixture",
            Analysis::Thermal => "thermal",
            Analysis::Scan => "scan",
            Analysis::Mcmc => "mcmc",
            Analysis::Figures => "figures",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnglePair {
    pub gamma: f64,
    pub theta: f64,
}

/// How the circuit angles are chosen per instance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum AnglePolicy {
    /// Grid sweep plus simplex refinement at default resolution.
    #[default]
    Optimize,
    /// Same search with an explicit grid shape.
    Grid {
        gamma_points: usize,
        theta_points: usize,
        #[serde(default)]
        gamma_max: Option<f64>,
    },
    /// Fixed angle list; analyses that need a single pair use the first.
    Explicit(Vec<AnglePair>),
}

/// On-disk / command-line shape. Every field is optional so a config file
/// and flag overrides can each supply any subset; `resolve` checks the
/// combination and fills documented defaults.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub family: Option<Family>,
    pub n: Option<usize>,
    pub density: Option<f64>,
    pub instance_count: Option<usize>,
    pub seed: Option<u64>,
    /// Level splitting, two_level only.
    pub delta: Option<f64>,
    pub angle_policy: Option<AnglePolicy>,
    pub analyses: Option<BTreeSet<Analysis>>,
    pub output_dir: Option<PathBuf>,
}

/// Flag overrides shared by every subcommand.
#[derive(Clone, Debug, Default, clap::Args)]
pub struct Overrides {
    /// JSON experiment config; the flags below override its fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Number of spins.
    #[arg(long)]
    pub n: Option<usize>,
    /// Master seed; per-instance seeds are derived from it.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Instance family.
    #[arg(long)]
    pub family: Option<Family>,
    /// Coupling density in (0, 1].
    #[arg(long)]
    pub density: Option<f64>,
    /// Number of instances.
    #[arg(long)]
    pub instances: Option<usize>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            ConfigError(format!("config: cannot read {}: {e}", path.display()))
        })?;
        serde_json::from_str(&text)
            .map_err(|e| ConfigError(format!("config: {}: {e}", path.display())))
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(n) = o.n {
            self.n = Some(n);
        }
        if let Some(seed) = o.seed {
            self.seed = Some(seed);
        }
        if let Some(family) = o.family {
            self.family = Some(family);
        }
        if let Some(density) = o.density {
            self.density = Some(density);
        }
        if let Some(instances) = o.instances {
            self.instance_count = Some(instances);
        }
        if let Some(out) = &o.out {
            self.output_dir = Some(out.clone());
        }
    }

    pub fn resolve(self) -> Result<Resolved, ConfigError> {
        let family = match self.family {
            Some(f) => f,
            None => return field_err("family: required (qubo, maxcut or two_level)"),
        };

        let (n, density, seed, delta) = match family {
            Family::TwoLevel => {
                if self.density.is_some() {
                    return field_err("density: not allowed for family two_level");
                }
                if let Some(n) = self.n {
                    if n != 1 {
                        return field_err(
                            "n: family two_level is a single spin; omit n or set it to 1",
                        );
                    }
                }
                let delta = self.delta.unwrap_or(1.0);
                if !(delta.is_finite() && delta > 0.0) {
                    return field_err("delta: must be a positive finite level splitting");
                }
                (1, 1.0, self.seed.unwrap_or(0), delta)
            }
            Family::Qubo | Family::Maxcut => {
                if self.delta.is_some() {
                    return field_err("delta: only meaningful for family two_level");
                }
                let n = match self.n {
                    Some(n) if n >= 1 => n,
                    Some(_) => return field_err("n: must be at least 1"),
                    None => return field_err("n: required for random instance families"),
                };
                let density = self.density.unwrap_or(1.0);
                if !(density.is_finite() && density > 0.0 && density <= 1.0) {
                    return field_err("density: must lie in (0, 1]");
                }
                let seed = match self.seed {
                    Some(s) => s,
                    None => return field_err("seed: required whenever instances are random"),
                };
                (n, density, seed, 0.0)
            }
        };

        let instance_count = self.instance_count.unwrap_or(1);
        if instance_count < 1 {
            return field_err("instance_count: must be at least 1");
        }
        if family == Family::TwoLevel && instance_count != 1 {
            return field_err(
                "instance_count: family two_level is deterministic; omit or set to 1",
            );
        }

        let angle_policy = self.angle_policy.clone().unwrap_or_default();
        match &angle_policy {
            AnglePolicy::Optimize => {}
            AnglePolicy::Grid { gamma_points, theta_points, gamma_max } => {
                if *gamma_points < 2 || *theta_points < 2 {
                    return field_err("angle_policy: grid needs at least 2 points per axis");
                }
                if let Some(g) = gamma_max {
                    if !(g.is_finite() && *g > 0.0) {
                        return field_err("angle_policy: gamma_max must be positive and finite");
                    }
                }
            }
            AnglePolicy::Explicit(pairs) => {
                if pairs.is_empty() {
                    return field_err("angle_policy: explicit angle list must not be empty");
                }
                if pairs.iter().any(|p| !(p.gamma.is_finite() && p.theta.is_finite())) {
                    return field_err("angle_policy: angles must be finite");
                }
            }
        }

        let output_dir = match &self.output_dir {
            Some(d) => d.clone(),
            None => return field_err("output_dir: required (or pass --out)"),
        };

        Ok(Resolved {
            family,
            n,
            density,
            instance_count,
            seed,
            delta,
            angle_policy,
            analyses: self.analyses.clone().unwrap_or_default(),
            output_dir,
            raw: self,
        })
    }
}

/// A fully checked configuration. `raw` is the pre-validation shape, echoed
/// verbatim into every record so outputs stay traceable to their inputs.
#[derive(Clone, Debug)]
pub struct Resolved {
    pub family: Family,
    pub n: usize,
    pub density: f64,
    pub instance_count: usize,
    pub seed: u64,
    pub delta: f64,
    pub angle_policy: AnglePolicy,
    pub analyses: BTreeSet<Analysis>,
    pub output_dir: PathBuf,
    pub raw: ExperimentConfig,
}

/// Load (or default), override, resolve.
pub fn load(overrides: &Overrides) -> Result<Resolved, ConfigError> {
    let mut config = match &overrides.config {
        Some(path) => ExperimentConfig::from_file(path)?,
        None => ExperimentConfig::default(),
    };
    config.apply(overrides);
    config.resolve()
}
