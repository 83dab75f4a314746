//! Error type of the CLI with stable machine-parsable codes.

use std::fmt;

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Fock(photonkin::fock::FockError),
    Stats(photonkin::stats::StatsError),
    Geometry(photonkin::geometry::GeometryError),
    Wave(photonkin::wavepacket::WaveError),
    Io(std::io::Error),
}

impl CliError {
    /// Stable error code, one per failure family.
    pub fn code(&self) -> &'static str {
        use photonkin::{fock::FockError as F, geometry::GeometryError as G, stats::StatsError as S, wavepacket::WaveError as W};
        match self {
            CliError::Config(_) => "E_CONFIG",
            CliError::Io(_) => "E_IO",
            CliError::Fock(e) => match e {
                F::TruncationTooSmall { .. } => "E_TRUNCATION_TOO_SMALL",
                F::StepTooLarge { .. } => "E_STEP_TOO_LARGE",
                F::InsufficientSupport { .. } => "E_INSUFFICIENT_SUPPORT",
                F::InvalidDrive(_) | F::InvalidState(_) => "E_INVALID_INPUT",
            },
            CliError::Stats(e) => match e {
                S::InvalidN(_) => "E_INVALID_N",
                S::ZeroMean => "E_ZERO_MEAN",
                S::UnsupportedSource(_) => "E_UNSUPPORTED_SOURCE",
                S::InvalidParameter(_) => "E_INVALID_INPUT",
            },
            CliError::Geometry(e) => match e {
                G::SingularMomentum { .. } => "E_SINGULAR_MOMENTUM",
                G::SimplexHitsSingularity { .. } => "E_SIMPLEX_SINGULARITY",
                G::PathNotClosed { .. } => "E_PATH_NOT_CLOSED",
                G::NonConstantEnergy { .. } => "E_NON_CONSTANT_ENERGY",
                G::DegeneratePath(_) => "E_DEGENERATE_PATH",
                G::StepTooLarge { .. } => "E_STEP_TOO_LARGE",
                G::InvalidHelicity(_) => "E_INVALID_HELICITY",
                G::InvalidPath(_) => "E_INVALID_INPUT",
            },
            CliError::Wave(e) => match e {
                W::ResolutionError { .. } => "E_RESOLUTION",
                W::AliasError { .. } => "E_ALIAS",
                W::DomainTooSmall { .. } => "E_DOMAIN_TOO_SMALL",
                W::WrapAroundError { .. } => "E_WRAP_AROUND",
                W::InvalidGrid(_) => "E_INVALID_INPUT",
            },
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "{m}"),
            CliError::Fock(e) => write!(f, "{e}"),
            CliError::Stats(e) => write!(f, "{e}"),
            CliError::Geometry(e) => write!(f, "{e}"),
            CliError::Wave(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<photonkin::fock::FockError> for CliError {
    fn from(e: photonkin::fock::FockError) -> Self {
        CliError::Fock(e)
    }
}
impl From<photonkin::stats::StatsError> for CliError {
    fn from(e: photonkin::stats::StatsError) -> Self {
        CliError::Stats(e)
    }
}
impl From<photonkin::geometry::GeometryError> for CliError {
    fn from(e: photonkin::geometry::GeometryError) -> Self {
        CliError::Geometry(e)
    }
}
impl From<photonkin::wavepacket::WaveError> for CliError {
    fn from(e: photonkin::wavepacket::WaveError) -> Self {
        CliError::Wave(e)
    }
}
impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
