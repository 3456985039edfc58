//! Late-time Gaussian state of two harmonic atoms coupled through a massless
//! scalar field that vanishes on a perfectly conducting plane at `z = 0`.
//!
//! Units: `ħ = c = 1`, lengths in `1/ω_p`, frequencies in `ω_p`. The pipeline is
//!
//! 1. [`geometry`]: atom positions and the direct/image separations,
//! 2. [`field_kernels`]: retarded and Hadamard kernels of the half-space field,
//! 3. [`dynamics`]: the 2×2 frequency-domain kernel matrix `D(ω)`, its poles,
//!    and the stability verdict,
//! 4. [`steady_state`]: the 4×4 late-time covariance matrix,
//! 5. [`gaussian_info`]: symplectic spectrum, partial-transpose discriminant,
//!    purity and entropy,
//! 6. [`topography`]: parameter sweeps, contour extraction and domain metrics.

pub mod dynamics;
pub mod error;
pub mod field_kernels;
pub mod gaussian_info;
pub mod geometry;
pub mod quadrature;
pub mod roots;
pub mod steady_state;
pub mod topography;

pub use dynamics::{AtomPairConfig, KernelMatrix, PoleSet, Region, StabilityVerdict};
pub use error::{Error, Result};
pub use field_kernels::{CutoffScheme, FieldState};
pub use gaussian_info::SymplecticSpectrum;
pub use geometry::{AtomPosition, SeparationPair};
pub use steady_state::CovarianceMatrix;
pub use topography::{DomainMap, GridSpec};

pub use num_complex::Complex64;
