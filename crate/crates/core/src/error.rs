use num_complex::Complex64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("coincident points: {0}")]
    CoincidentPoints(String),

    #[error("kernel matrix is singular at omega = {omega}")]
    Singular { omega: Complex64 },

    #[error("pole search did not converge: {0}")]
    PoleSearch(String),

    #[error("configuration is dynamically unstable: {upper_poles} pole(s) with Im(omega) > 0, max Im = {max_im:.6e}")]
    Unstable { upper_poles: usize, max_im: f64 },

    #[error("quadrature did not converge: achieved {achieved:.3e}, requested {requested:.3e}")]
    Quadrature { achieved: f64, requested: f64 },

    #[error("invalid covariance matrix: {0}")]
    InvalidCovariance(String),

    #[error("invalid reduced state: nu = {0} is below 1/2")]
    InvalidReducedState(f64),

    #[error("no closed entangled contour: {0}")]
    NoClosedContour(String),
}

impl Error {
    /// True for failures of an iterative numerical method (as opposed to bad input).
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::PoleSearch(_) | Error::Quadrature { .. })
    }
}

pub(crate) fn require(cond: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::InvalidParameter(msg()))
    }
}
