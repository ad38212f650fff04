//! Error types shared by the simulation and analysis modules.

use std::fmt;
use std::io;

/// Domain and numerical errors raised by state evolution, geometry and fitting.
#[derive(Debug)]
pub enum Error {
    /// A state amplitude is NaN or infinite.
    NonFiniteAmplitude,
    /// Transmissivity outside the physical range [0, 1].
    TransmissivityOutOfRange(f64),
    /// Damping coefficient outside [0, 1].
    DampingOutOfRange(f64),
    /// Exponents s1, s2 must satisfy s1 + s2 = 1.
    ExponentSumInvalid { s1: f64, s2: f64 },
    /// Inner product modulus below tolerance: relative phase undefined.
    OrthogonalStates,
    /// State with (near-)zero norm has no Bloch-sphere image.
    ZeroState,
    /// Geodesic between antipodal points is not unique.
    GeodesicUndefined,
    /// Antipodal corner configuration in the solid-angle fan at a polyline index.
    AntipodalPoints { index: usize },
    /// Solid angle requested for a path that is not closed.
    OpenPath,
    /// Consecutive arcs of a sphere path are not connected at the given arc index.
    DisconnectedPath { index: usize },
    /// Interferogram grid is malformed (too short, non-increasing, negative counts...).
    InvalidGrid(String),
    /// Fringe amplitude below tolerance: fitted phase undefined.
    PhaseUndefined,
    /// Objective is flat in C: the data cannot identify the visibility coefficient.
    CUnidentifiable,
    /// Nothing to emit.
    EmptyRows,
    /// File I/O failure with the offending path.
    Io { path: String, source: io::Error },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::NonFiniteAmplitude => write!(f, "non-finite state amplitude"),
            Error::TransmissivityOutOfRange(t) => {
                write!(f, "transmissivity T = {t} out of range [0, 1]")
            }
            Error::DampingOutOfRange(c) => write!(f, "damping C = {c} out of range [0, 1]"),
            Error::ExponentSumInvalid { s1, s2 } => {
                write!(f, "exponents must satisfy s1 + s2 = 1, got s1 = {s1}, s2 = {s2}")
            }
            Error::OrthogonalStates => write!(f, "orthogonal states, phase undefined"),
            Error::ZeroState => write!(f, "zero state has no Bloch vector"),
            Error::GeodesicUndefined => write!(f, "geodesic undefined between antipodal points"),
            Error::AntipodalPoints { index } => {
                write!(f, "antipodal points in solid-angle fan at polyline index {index}")
            }
            Error::OpenPath => write!(f, "solid angle requires a closed path"),
            Error::DisconnectedPath { index } => {
                write!(f, "sphere path disconnected after arc {index}")
            }
            Error::InvalidGrid(msg) => write!(f, "invalid grid: {msg}"),
            Error::PhaseUndefined => write!(f, "fringe amplitude vanishes, phase undefined"),
            Error::CUnidentifiable => write!(f, "C unidentifiable from the supplied points"),
            Error::EmptyRows => write!(f, "no rows to emit"),
            Error::Io { path, source } => write!(f, "I/O error on {path}: {source}"),
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

pub type Result<T> = std::result::Result<T, Error>;
