//! Exact simulation of single-layer QAOA on Ising models, together with the
//! analysis tools needed to study the thermal structure of the resulting
//! output distributions: interference-based amplitude predictions, joint
//! (Hamming, energy) statistics, effective-temperature fits, and a Metropolis
//! sampling baseline to compare against.
//!
//! Everything operates on exhaustive state enumeration, so instance sizes are
//! capped at [`MAX_QUBITS`] qubits. All randomized operations take explicit
//! seeds and are reproducible run to run.

pub mod error;
pub mod interference;
pub mod ising;
pub mod mcmc;
pub mod numeric;
pub mod qaoa;
pub mod rng;
pub mod stats;
pub mod thermal;

pub use error::{Error, Result};
pub use interference::{AmplitudePrediction, AngleBounds, PredictionTerms, ReparamAngles};
pub use ising::{EnergyTable, GeneratorMetadata, IsingInstance, SpinConfiguration, MAX_QUBITS};
pub use mcmc::{ChainConfig, DistanceReport, McmcRun, MixingBoundReport};
pub use qaoa::{AngleSchedule, GridSpec, OptimizationResult, StateVector};
pub use stats::{GaussianComponent, JointMoments, MixtureFit, NormalityReport, SlopeFit};
pub use thermal::{EnergyDistribution, GammaCReport, ThermalFit};
