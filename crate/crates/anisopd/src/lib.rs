//! Meshfree explicit dynamics for generally anisotropic 2D plates.
//!
//! The solver discretises a plate into a uniform particle cloud, couples the
//! particles through a non-local correspondence model (a best-fit deformation
//! gradient per particle feeding a classical plane-stress constitutive law),
//! advances the motion with a semi-implicit explicit scheme, breaks pairwise
//! bonds with a quadratic composite failure surface, and extracts dynamic
//! crack-tip intensity factors from crack-face opening displacements through
//! the complex-variable eigenformulation of anisotropic plane elasticity.

pub mod config;
pub mod damage;
pub mod fracture;
pub mod geometry;
pub mod grid;
pub mod integrator;
pub mod kernel;
pub mod material;
pub mod runner;
pub mod stroh;

use std::fmt;
use std::path::PathBuf;

/// Crate-wide error type.
#[derive(Debug)]
pub enum Error {
    /// Configuration parse or validation failure.
    Config(String),
    /// Unphysical material input (non-positive moduli, indefinite stiffness).
    Material(String),
    /// Repeated characteristic roots that survive the retry perturbation, or
    /// a singular crack-opening relation.
    Degenerate(String),
    /// Non-finite state detected during time stepping.
    Numerical { step: u64, particle: usize },
    /// A probe or series request that cannot be satisfied by the data.
    Measurement(String),
    /// Filesystem failure, carrying the offending path.
    Io { path: PathBuf, source: std::io::Error },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Config(msg) => write!(f, "configuration error: {msg}"),
            Error::Material(msg) => write!(f, "material error: {msg}"),
            Error::Degenerate(msg) => write!(f, "degenerate system: {msg}"),
            Error::Numerical { step, particle } => write!(
                f,
                "non-finite state at step {step}, particle {particle}"
            ),
            Error::Measurement(msg) => write!(f, "measurement error: {msg}"),
            Error::Io { path, source } => {
                write!(f, "i/o error on {}: {source}", path.display())
            }
        }
    }
}

impl std::error::Error for Error {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            Error::Io { source, .. } => Some(source),
            _ => None,
        }
    }
}

impl Error {
    /// Process exit code mapping: configuration/setup problems exit 1,
    /// numerical aborts during stepping exit 2.
    pub fn exit_code(&self) -> u8 {
        match self {
            Error::Numerical { .. } => 2,
            _ => 1,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
