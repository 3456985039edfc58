//! Frequency-domain kernels of a massless scalar field in free space and in
//! the Dirichlet half-space `z > 0`.
//!
//! Time dependence is `e^{-iωt}`, so retarded kernels are analytic in the
//! upper half ω-plane: `G_R,0(r, ω) = e^{iωr} / (4πr)`. The half-space kernel
//! is the free kernel minus the free kernel to the mirror image of the source.
//! Noise (Hadamard) kernels follow from the fluctuation-dissipation relation
//! `G_H = coth(βω/2) Im G_R`, with `coth → sgn` for the vacuum.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{require, Error, Result};
use crate::geometry::{separations, AtomPosition};

const FOUR_PI: f64 = 4.0 * PI;

/// Initial state of the field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Default)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum FieldState {
    #[default]
    Vacuum,
    Thermal { beta: f64 },
}

impl FieldState {
    pub fn thermal(beta: f64) -> Result<Self> {
        require(beta.is_finite() && beta > 0.0, || format!("inverse temperature must be > 0, got {beta}"))?;
        Ok(FieldState::Thermal { beta })
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            FieldState::Vacuum => Ok(()),
            FieldState::Thermal { beta } => FieldState::thermal(beta).map(|_| ()),
        }
    }

    /// `sgn(ω)` for the vacuum, `coth(βω/2)` for a thermal state.
    pub fn statistical_factor(&self, omega: f64) -> Result<f64> {
        require(omega != 0.0 && omega.is_finite(), || {
            format!("statistical factor needs a finite nonzero frequency, got {omega}")
        })?;
        Ok(self.factor_unchecked(omega))
    }

    #[inline]
    pub(crate) fn factor_unchecked(&self, omega: f64) -> f64 {
        match *self {
            FieldState::Vacuum => omega.signum(),
            FieldState::Thermal { beta } => 1.0 / (0.5 * beta * omega).tanh(),
        }
    }
}

/// UV cutoff `Λ`. It only bounds the covariance quadrature; the divergent
/// free-space frequency shift is already absorbed into `ω_p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CutoffScheme {
    pub lambda: f64,
}

impl CutoffScheme {
    pub const DEFAULT_LAMBDA: f64 = 100.0;
    /// Smallest admissible `Λ / ω_p`.
    pub const MIN_RATIO: f64 = 20.0;

    pub fn new(lambda: f64) -> Result<Self> {
        require(lambda.is_finite() && lambda > 0.0, || format!("cutoff must be finite and > 0, got {lambda}"))?;
        Ok(Self { lambda })
    }

    pub fn validate_against(&self, omega_p: f64) -> Result<()> {
        require(self.lambda >= Self::MIN_RATIO * omega_p, || {
            format!(
                "cutoff {} must be at least {}·ω_p = {}",
                self.lambda,
                Self::MIN_RATIO,
                Self::MIN_RATIO * omega_p
            )
        })
    }
}

impl Default for CutoffScheme {
    fn default() -> Self {
        Self { lambda: Self::DEFAULT_LAMBDA }
    }
}

#[inline]
pub(crate) fn free_kernel(r: f64, omega: Complex64) -> Complex64 {
    (Complex64::i() * omega * r).exp() / (FOUR_PI * r)
}

/// `d/dω` of [`free_kernel`].
#[inline]
pub(crate) fn free_kernel_derivative(r: f64, omega: Complex64) -> Complex64 {
    Complex64::i() * (Complex64::i() * omega * r).exp() / FOUR_PI
}

#[inline]
fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        1.0 - x2 / 6.0 + x2 * x2 / 120.0
    } else {
        x.sin() / x
    }
}

/// `Im G_R(ω)` of the half-space kernel for real `ω`, continuous through the
/// coincidence limit where it becomes `ω/(4π) − sin(2ωz)/(8πz)`.
#[inline]
pub(crate) fn halfspace_im(r_direct: f64, r_image: f64, omega: f64) -> f64 {
    omega / FOUR_PI * (sinc(omega * r_direct) - sinc(omega * r_image))
}

/// Free-space retarded kernel `e^{iωr} / (4πr)`.
pub fn retarded_free(r: f64, omega: Complex64) -> Result<Complex64> {
    if r == 0.0 {
        return Err(Error::CoincidentPoints(
            "the free kernel diverges at r = 0; the coincidence limit is absorbed by renormalization".into(),
        ));
    }
    require(r.is_finite() && r > 0.0, || format!("distance must be finite and > 0, got {r}"))?;
    require(omega.re.is_finite() && omega.im.is_finite(), || format!("frequency must be finite, got {omega}"))?;
    Ok(free_kernel(r, omega))
}

/// Boundary-induced self kernel of an atom at height `z`: `−e^{2iωz} / (8πz)`.
pub fn image_self(z: f64, omega: Complex64) -> Result<Complex64> {
    require(z.is_finite() && z > 0.0, || format!("height must be finite and > 0, got {z}"))?;
    retarded_free(2.0 * z, omega).map(|g| -g)
}

/// Retarded kernel between two distinct points of the half-space.
pub fn retarded_halfspace(a: &AtomPosition, b: &AtomPosition, omega: Complex64) -> Result<Complex64> {
    let s = separations(a, b);
    if s.r_direct == 0.0 {
        return Err(Error::CoincidentPoints(
            "retarded_halfspace needs distinct points; use image_self for the boundary self-interaction".into(),
        ));
    }
    Ok(retarded_free(s.r_direct, omega)? - retarded_free(s.r_image, omega)?)
}

/// Noise kernel `statistical_factor(ω) · Im G_R(a, b, ω)` for real `ω ≠ 0`.
/// Coincident points use the renormalized self part `ω/(4π)` plus the image term.
pub fn hadamard_halfspace(a: &AtomPosition, b: &AtomPosition, omega: f64, state: FieldState) -> Result<f64> {
    let factor = state.statistical_factor(omega)?;
    let s = separations(a, b);
    Ok(factor * halfspace_im(s.r_direct, s.r_image, omega))
}
