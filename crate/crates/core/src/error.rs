//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Instance or state size exceeds the exhaustive-enumeration cap.
    #[error("{what} needs n <= {max} qubits, got n = {n}")]
    SizeLimit { what: &'static str, n: usize, max: usize },

    /// A parameter is outside its documented domain.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Two inputs describe different system sizes.
    #[error("dimension mismatch: {left} vs {right} states")]
    DimensionMismatch { left: usize, right: usize },

    /// An operation that needs energy spread got a constant spectrum.
    #[error("flat spectrum: all {count} states share energy {energy}")]
    FlatSpectrum { energy: f64, count: usize },

    /// Reported energy does not belong to the instance's spectrum.
    #[error("energy {achieved} lies outside the spectrum [{min}, {max}] or between its levels")]
    EnergyNotInSpectrum { achieved: f64, min: f64, max: f64 },

    /// Mixer angle outside the open interval the reparameterization covers.
    #[error("theta = {theta} is outside the open interval (0, pi/2)")]
    ThetaOutOfDomain { theta: f64 },

    /// Degenerate-case prediction at theta = pi/4, where the thermal sign is undefined.
    #[error("theta = pi/4: sign of r is undefined, the degenerate thermal form has no direction")]
    ThetaAtQuarterPi,

    /// Joint covariance cannot be inverted (zero spread or |rho| = 1).
    #[error("singular joint covariance: sigma_h = {sigma_h}, sigma_e = {sigma_e}, rho = {rho}")]
    SingularCovariance { sigma_h: f64, sigma_e: f64, rho: f64 },

    /// Not enough usable states for a least-squares fit.
    #[error("{what}: {got} usable states, need at least {need}")]
    TooFewStates { what: &'static str, got: usize, need: usize },

    /// A degenerate instance was analyzed without the required hierarchy split.
    #[error("degenerate instance (all fields zero) requires a mixture-fit hierarchy")]
    MissingHierarchy,
}
