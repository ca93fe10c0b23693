use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("({u}, {v}) is not a valid UV coordinate (u^2 + v^2 > 1)")]
    InvalidUv { u: f64, v: f64 },

    #[error("azimuth {phi_deg:.3} deg lies behind the array plane")]
    BehindArray { phi_deg: f64 },

    #[error("trajectory sample {index} leaves the front hemisphere")]
    TrajectoryOutsideHemisphere { index: usize },

    #[error("beamwidth is undefined at a steering angle of {alpha_deg:.3} deg")]
    DegenerateBeam { alpha_deg: f64 },

    #[error("distance must be positive, got {0} m")]
    NonPositiveDistance(f64),

    #[error("trajectory spacing {spacing:.5} at sample {index} is not below the sub-beam half width {half_width:.5}")]
    SamplingTooCoarse {
        index: usize,
        spacing: f64,
        half_width: f64,
    },

    #[error("trajectory extrapolation exceeded {limit} points without covering the tail")]
    ExtrapolationLimit { limit: usize },

    #[error("{beams} sub-beams requested but only {sub_arrays} sub-arrays are available")]
    TooManyBeams { beams: usize, sub_arrays: usize },

    #[error("no head rotation of UV length {target} found after {attempts} attempts")]
    UnreachableLength { target: f64, attempts: usize },

    #[error("invalid configuration: {0}")]
    Config(String),
}

impl Error {
    /// True for errors raised by the physical model (hemisphere and
    /// coordinate validity) rather than by a malformed configuration.
    pub fn is_domain(&self) -> bool {
        !matches!(self, Error::Config(_) | Error::TooManyBeams { .. })
    }
}
