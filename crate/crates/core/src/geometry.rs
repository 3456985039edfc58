//! Atom positions in the half-space `z > 0` and the two distances every
//! half-space kernel needs: to the partner and to the partner's mirror image.

use serde::Serialize;

use crate::error::{require, Result};

/// Position of an atom. Only the transverse offset along one axis is kept:
/// all observables depend on the horizontal separation `ρ` alone.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AtomPosition {
    rho_offset: f64,
    z: f64,
}

impl AtomPosition {
    pub fn new(rho_offset: f64, z: f64) -> Result<Self> {
        require(rho_offset.is_finite(), || format!("transverse offset must be finite, got {rho_offset}"))?;
        require(z.is_finite() && z > 0.0, || format!("height above the plate must be > 0, got {z}"))?;
        Ok(Self { rho_offset, z })
    }

    pub fn rho_offset(&self) -> f64 {
        self.rho_offset
    }

    pub fn z(&self) -> f64 {
        self.z
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeparationPair {
    /// `sqrt(ρ² + (z_a − z_b)²)`
    pub r_direct: f64,
    /// `sqrt(ρ² + (z_a + z_b)²)`, distance from `a` to the mirror image of `b`
    pub r_image: f64,
}

pub fn separations(a: &AtomPosition, b: &AtomPosition) -> SeparationPair {
    let rho = (a.rho_offset - b.rho_offset).abs();
    SeparationPair {
        r_direct: rho.hypot(a.z - b.z),
        r_image: rho.hypot(a.z + b.z),
    }
}

/// Horizontal separation between two atoms.
pub fn horizontal_separation(a: &AtomPosition, b: &AtomPosition) -> f64 {
    (a.rho_offset - b.rho_offset).abs()
}
