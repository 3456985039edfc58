//! Frequency-domain dynamics of the two coupled atoms.
//!
//! With time dependence `e^{-iωt}` the reduced equations of motion become
//! `D(ω) χ̃(ω) = (e/m) φ̃_h(ω)` with the symmetric 2×2 kernel matrix (per unit mass)
//!
//! ```text
//! D_ii(ω) = −ω² − 2iγω + ω_p² + 8πγ · e^{2iωz_i} / (8πz_i)
//! D_12(ω) = −8πγ · [e^{iωr} / (4πr) − e^{iωr̃} / (4πr̃)]
//! ```
//!
//! where `e²/m = 8πγ`, `r` is the interatomic distance and `r̃` the distance
//! to the partner's mirror image. The free-space self-interaction has already
//! been split into the radiation damping `−2iγω` and a divergent shift that is
//! absorbed into the physical frequency `ω_p`; the boundary-induced self term
//! stays explicit. Poles of `D⁻¹` with `Im ω > 0` are runaway modes.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{require, Error, Result};
use crate::field_kernels::{free_kernel, free_kernel_derivative, CutoffScheme, FieldState};
use crate::geometry::{horizontal_separation, separations, AtomPosition, SeparationPair};
use crate::roots::{Holomorphic, Rect, RootError, RootFinder, RootFinderOptions};

pub type Region = Rect;
pub type Matrix2 = [[Complex64; 2]; 2];

/// Default threshold on `Im ω / ω_p` separating runaway from decaying modes.
pub const DEFAULT_STABILITY_EPS: f64 = 1e-9;

/// Physical parameters of the two-atom problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AtomPairConfig {
    pub atom1: AtomPosition,
    pub atom2: AtomPosition,
    /// Damping rate `γ = e²/(8πm)`.
    pub gamma: f64,
    /// Physical (renormalized) oscillator frequency.
    pub omega_p: f64,
    pub mass: f64,
    pub cutoff: CutoffScheme,
    pub field: FieldState,
}

impl AtomPairConfig {
    pub const DEFAULT_GAMMA: f64 = 0.05;

    pub fn new(atom1: AtomPosition, atom2: AtomPosition) -> Self {
        Self {
            atom1,
            atom2,
            gamma: Self::DEFAULT_GAMMA,
            omega_p: 1.0,
            mass: 1.0,
            cutoff: CutoffScheme::default(),
            field: FieldState::Vacuum,
        }
    }

    /// Atom 1 on the axis at height `z1`, atom 2 at height `z2` and horizontal offset `rho`.
    pub fn from_geometry(z1: f64, z2: f64, rho: f64) -> Result<Self> {
        let cfg = Self::new(AtomPosition::new(0.0, z1)?, AtomPosition::new(rho, z2)?);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_gamma(mut self, gamma: f64) -> Self {
        self.gamma = gamma;
        self
    }

    pub fn with_cutoff(mut self, lambda: f64) -> Self {
        self.cutoff = CutoffScheme { lambda };
        self
    }

    pub fn with_field(mut self, field: FieldState) -> Self {
        self.field = field;
        self
    }

    pub fn with_omega_p(mut self, omega_p: f64) -> Self {
        self.omega_p = omega_p;
        self
    }

    pub fn with_mass(mut self, mass: f64) -> Self {
        self.mass = mass;
        self
    }

    pub fn validate(&self) -> Result<()> {
        require(self.gamma.is_finite() && self.gamma > 0.0, || format!("gamma must be > 0, got {}", self.gamma))?;
        require(self.omega_p.is_finite() && self.omega_p > 0.0, || format!("omega_p must be > 0, got {}", self.omega_p))?;
        require(self.mass.is_finite() && self.mass > 0.0, || format!("mass must be > 0, got {}", self.mass))?;
        CutoffScheme::new(self.cutoff.lambda)?.validate_against(self.omega_p)?;
        self.field.validate()?;
        if self.separations().r_direct == 0.0 {
            return Err(Error::CoincidentPoints("the two atoms occupy the same point".into()));
        }
        Ok(())
    }

    /// Coupling constant squared, `e² = 8π m γ`.
    pub fn coupling_squared(&self) -> f64 {
        8.0 * PI * self.mass * self.gamma
    }

    pub fn separations(&self) -> SeparationPair {
        separations(&self.atom1, &self.atom2)
    }

    pub fn rho(&self) -> f64 {
        horizontal_separation(&self.atom1, &self.atom2)
    }

    /// Same physical configuration with the atom labels exchanged.
    pub fn swapped(&self) -> Self {
        Self { atom1: self.atom2, atom2: self.atom1, ..*self }
    }
}

/// `D(ω)` at one frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KernelMatrix {
    pub omega: Complex64,
    pub entries: Matrix2,
}

impl KernelMatrix {
    pub fn det(&self) -> Complex64 {
        let d = &self.entries;
        d[0][0] * d[1][1] - d[0][1] * d[1][0]
    }
}

/// Precomputed geometry and couplings for repeated evaluation of `D(ω)`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct PairKernel {
    z: [f64; 2],
    r: f64,
    r_image: f64,
    gamma: f64,
    omega_p_sq: f64,
    /// `e²/m = 8πγ`
    coupling: f64,
}

impl PairKernel {
    pub(crate) fn new(cfg: &AtomPairConfig) -> Self {
        let s = cfg.separations();
        Self {
            z: [cfg.atom1.z(), cfg.atom2.z()],
            r: s.r_direct,
            r_image: s.r_image,
            gamma: cfg.gamma,
            omega_p_sq: cfg.omega_p * cfg.omega_p,
            coupling: 8.0 * PI * cfg.gamma,
        }
    }

    #[inline]
    pub(crate) fn entries(&self, w: Complex64) -> Matrix2 {
        let local = -w * w - Complex64::i() * (2.0 * self.gamma) * w + self.omega_p_sq;
        let d11 = local + self.coupling * free_kernel(2.0 * self.z[0], w);
        let d22 = local + self.coupling * free_kernel(2.0 * self.z[1], w);
        let d12 = -self.coupling * (free_kernel(self.r, w) - free_kernel(self.r_image, w));
        [[d11, d12], [d12, d22]]
    }

    #[inline]
    fn derivatives(&self, w: Complex64) -> Matrix2 {
        let local = -2.0 * w - Complex64::i() * (2.0 * self.gamma);
        let d11 = local + self.coupling * free_kernel_derivative(2.0 * self.z[0], w);
        let d22 = local + self.coupling * free_kernel_derivative(2.0 * self.z[1], w);
        let d12 = -self.coupling * (free_kernel_derivative(self.r, w) - free_kernel_derivative(self.r_image, w));
        [[d11, d12], [d12, d22]]
    }

    #[inline]
    pub(crate) fn det(&self, w: Complex64) -> Complex64 {
        let d = self.entries(w);
        d[0][0] * d[1][1] - d[0][1] * d[0][1]
    }

    /// Sum of the magnitudes of the terms entering `det D(ω)`.
    pub(crate) fn det_scale(&self, w: Complex64) -> f64 {
        let poly = w.norm_sqr() + 2.0 * self.gamma * w.norm() + self.omega_p_sq;
        let decay = |len: f64| (-w.im * len).exp();
        let s11 = poly + self.gamma * decay(2.0 * self.z[0]) / self.z[0];
        let s22 = poly + self.gamma * decay(2.0 * self.z[1]) / self.z[1];
        let s12 = 2.0 * self.gamma * (decay(self.r) / self.r + decay(self.r_image) / self.r_image);
        s11 * s22 + s12 * s12
    }

    /// Radius of a disc containing every zero of `det D` with `Im ω ≥ 0`:
    /// there `|e^{iωL}| ≤ 1`, so `|D_ii| ≥ |ω|² − 2γ|ω| − ω_p² − γ/z_i` while
    /// `|D_12| ≤ 2γ(1/r + 1/r̃)`, and `det D = 0` needs `min |D_ii| ≤ |D_12|`.
    pub(crate) fn upper_root_bound(&self) -> f64 {
        let g = self.gamma;
        let zmin = self.z[0].min(self.z[1]);
        let c = self.omega_p_sq + g / zmin + 2.0 * g * (1.0 / self.r + 1.0 / self.r_image);
        g + (g * g + c).sqrt()
    }
}

impl Holomorphic for PairKernel {
    fn value(&self, z: Complex64) -> Complex64 {
        self.det(z)
    }

    fn value_and_derivative(&self, w: Complex64) -> (Complex64, Complex64) {
        let d = self.entries(w);
        let dd = self.derivatives(w);
        let det = d[0][0] * d[1][1] - d[0][1] * d[0][1];
        let ddet = dd[0][0] * d[1][1] + d[0][0] * dd[1][1] - 2.0 * d[0][1] * dd[0][1];
        (det, ddet)
    }

    fn scale(&self, z: Complex64) -> f64 {
        self.det_scale(z)
    }

    fn phase_rate_hint(&self) -> f64 {
        2.0 * (self.z[0] + self.z[1]) + 2.0 * self.r_image + 2.0
    }
}

pub fn kernel_matrix(config: &AtomPairConfig, omega: Complex64) -> Result<KernelMatrix> {
    config.validate()?;
    require(omega.re.is_finite() && omega.im.is_finite(), || format!("frequency must be finite, got {omega}"))?;
    Ok(KernelMatrix { omega, entries: PairKernel::new(config).entries(omega) })
}

/// `M(ω) = D(ω)⁻¹`.
pub fn susceptibility(config: &AtomPairConfig, omega: Complex64) -> Result<Matrix2> {
    config.validate()?;
    let k = PairKernel::new(config);
    invert(&k.entries(omega), k.det_scale(omega), omega)
}

#[inline]
pub(crate) fn invert(d: &Matrix2, scale: f64, omega: Complex64) -> Result<Matrix2> {
    let det = d[0][0] * d[1][1] - d[0][1] * d[1][0];
    if !(det.norm() > 1e-14 * scale) {
        return Err(Error::Singular { omega });
    }
    let inv = det.inv();
    Ok([[d[1][1] * inv, -d[0][1] * inv], [-d[1][0] * inv, d[0][0] * inv]])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Pole {
    pub omega: Complex64,
    pub multiplicity: usize,
    /// `|det D| / scale` at the polished pole.
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PoleSet {
    pub poles: Vec<Pole>,
    pub search_region: Region,
    /// Zero count from the argument principle on the region boundary.
    pub winding_count: usize,
    pub stable: bool,
    /// `−max Im ω` over the poles.
    pub margin: f64,
    /// Poles (with multiplicity) above `Im ω = ε_stab`.
    pub upper_count: usize,
}

impl PoleSet {
    pub fn max_im(&self) -> Option<f64> {
        self.poles.iter().map(|p| p.omega.im).reduce(f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StabilityVerdict {
    pub stable: bool,
    pub margin: f64,
    pub upper_count: usize,
}

/// Default pole-search rectangle: `Re ω ∈ [−X, X]`, `Im ω ∈ [−30γ, Y]`, with
/// `X = max(3ω_p, 1.05 R)` and `Y = max(ω_p, 1.05 R)` where `R` bounds every
/// zero in the closed upper half-plane, so no runaway mode can be missed.
pub fn default_region(config: &AtomPairConfig) -> Region {
    let bound = 1.05 * PairKernel::new(config).upper_root_bound();
    let x = (3.0 * config.omega_p).max(bound);
    let y = config.omega_p.max(bound);
    Rect::new(-x, x, -30.0 * config.gamma, y)
}

pub fn find_poles(config: &AtomPairConfig, region: &Region) -> Result<PoleSet> {
    find_poles_with(config, region, DEFAULT_STABILITY_EPS)
}

pub fn find_poles_with(config: &AtomPairConfig, region: &Region, stability_eps: f64) -> Result<PoleSet> {
    config.validate()?;
    require(
        region.re_min < region.re_max && region.im_min < region.im_max && region.width().is_finite() && region.height().is_finite(),
        || format!("pole search region must be a bounded nonempty rectangle, got {region:?}"),
    )?;
    let kernel = PairKernel::new(config);
    let search = RootFinder::new(&kernel, RootFinderOptions::default())
        .find(*region)
        .map_err(|e: RootError| Error::PoleSearch(e.to_string()))?;
    let eps = stability_eps * config.omega_p;
    let poles: Vec<Pole> = search
        .roots
        .iter()
        .map(|r| Pole { omega: r.z, multiplicity: r.multiplicity, residual: r.residual })
        .collect();
    let max_im = poles.iter().map(|p| p.omega.im).reduce(f64::max);
    let upper_count = poles.iter().filter(|p| p.omega.im > eps).map(|p| p.multiplicity).sum();
    let stable = poles.iter().all(|p| p.omega.im < -eps);
    Ok(PoleSet {
        poles,
        search_region: search.region,
        winding_count: search.count,
        stable,
        margin: -max_im.unwrap_or(search.region.im_min),
        upper_count,
    })
}

pub fn is_stable(config: &AtomPairConfig) -> Result<StabilityVerdict> {
    let set = find_poles(config, &default_region(config))?;
    Ok(StabilityVerdict { stable: set.stable, margin: set.margin, upper_count: set.upper_count })
}
