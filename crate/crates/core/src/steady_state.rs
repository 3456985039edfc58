//! Late-time covariance matrix of `(χ₁, p₁, χ₂, p₂)`.
//!
//! Once transients have decayed the atoms are driven by field noise only, so
//! with `M = D⁻¹` and the noise matrix `N_kl(ω) = n(ω) Im G_R(x_k, x_l; ω)`
//! (`n = sgn ω` for vacuum, `coth(βω/2)` thermally) and `F = M N M†`:
//!
//! ```text
//! ⟨χ_i χ_j⟩        = (e²/m²) ∫ dω/2π Re F_ij        = (8γ/m) ∫₀^Λ Re F_ij
//! ⟨p_i p_j⟩        = (e²/m²) ∫ dω/2π m²ω² Re F_ij   = 8γm ∫₀^Λ ω² Re F_ij
//! ⟨{χ_i, p_j}⟩ / 2 = (e²/m²) ∫ dω/2π m Re(iω F_ij)  = −8γ ∫₀^Λ ω Im F_ij
//! ```
//!
//! using `F(−ω) = F(ω)*`. `F` is Hermitian, so `⟨{χ_i, p_i}⟩ = 0` and the
//! two mixed cross terms are opposite.

use serde::Serialize;

use crate::dynamics::{default_region, find_poles, invert, AtomPairConfig, PairKernel, PoleSet};
use crate::error::{Error, Result};
use crate::field_kernels::halfspace_im;
use crate::quadrature::{integrate, QuadOptions};

/// Real symmetric 4×4 covariance in the ordering `(χ₁, p₁, χ₂, p₂)`,
/// i.e. `σ = [[A, C], [Cᵀ, B]]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CovarianceMatrix {
    pub sigma: [[f64; 4]; 4],
}

impl CovarianceMatrix {
    /// Checks that `sigma` is finite and symmetric (to 1e-12 relative) and symmetrizes it.
    pub fn new(sigma: [[f64; 4]; 4]) -> Result<Self> {
        let scale = sigma.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
        for i in 0..4 {
            for j in 0..4 {
                if !sigma[i][j].is_finite() {
                    return Err(Error::InvalidCovariance(format!("entry ({i},{j}) is not finite")));
                }
                if (sigma[i][j] - sigma[j][i]).abs() > 1e-12 * scale {
                    return Err(Error::InvalidCovariance(format!("not symmetric at ({i},{j})")));
                }
            }
        }
        let mut s = sigma;
        for i in 0..4 {
            for j in 0..i {
                let avg = 0.5 * (sigma[i][j] + sigma[j][i]);
                s[i][j] = avg;
                s[j][i] = avg;
            }
        }
        Ok(Self { sigma: s })
    }

    pub fn from_blocks(a: [[f64; 2]; 2], b: [[f64; 2]; 2], c: [[f64; 2]; 2]) -> Result<Self> {
        let mut s = [[0.0; 4]; 4];
        for i in 0..2 {
            for j in 0..2 {
                s[i][j] = a[i][j];
                s[i + 2][j + 2] = b[i][j];
                s[i][j + 2] = c[i][j];
                s[j + 2][i] = c[i][j];
            }
        }
        Self::new(s)
    }

    fn block(&self, r: usize, c: usize) -> [[f64; 2]; 2] {
        let s = &self.sigma;
        [[s[r][c], s[r][c + 1]], [s[r + 1][c], s[r + 1][c + 1]]]
    }

    pub fn a(&self) -> [[f64; 2]; 2] {
        self.block(0, 0)
    }

    pub fn b(&self) -> [[f64; 2]; 2] {
        self.block(2, 2)
    }

    pub fn c(&self) -> [[f64; 2]; 2] {
        self.block(0, 2)
    }

    /// `⟨{χ₁, χ₂}⟩ / 2`.
    pub fn correlation(&self) -> f64 {
        self.sigma[0][2]
    }

    /// Exchange the atom labels: `A ↔ B`, `C ↔ Cᵀ`.
    pub fn swapped(&self) -> Self {
        let perm = [2, 3, 0, 1];
        let mut s = [[0.0; 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                s[i][j] = self.sigma[perm[i]][perm[j]];
            }
        }
        Self { sigma: s }
    }

    /// Flip the sign of `p₂` (partial transpose with respect to atom 2).
    pub fn partial_transpose(&self) -> Self {
        let sign = [1.0, 1.0, 1.0, -1.0];
        let mut s = self.sigma;
        for i in 0..4 {
            for j in 0..4 {
                s[i][j] *= sign[i] * sign[j];
            }
        }
        Self { sigma: s }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CovarianceOptions {
    pub quad: QuadOptions,
}

impl Default for CovarianceOptions {
    fn default() -> Self {
        Self { quad: QuadOptions::default() }
    }
}

/// Steady-state covariance. Refuses configurations with runaway modes.
pub fn covariance(config: &AtomPairConfig) -> Result<CovarianceMatrix> {
    let poles = find_poles(config, &default_region(config))?;
    covariance_with(config, &poles, &CovarianceOptions::default())
}

pub fn correlation_x1x2(config: &AtomPairConfig) -> Result<f64> {
    Ok(covariance(config)?.correlation())
}

/// Steady-state covariance using an already computed pole set for the
/// stability check and the resonance panel breaks.
pub fn covariance_with(config: &AtomPairConfig, poles: &PoleSet, opts: &CovarianceOptions) -> Result<CovarianceMatrix> {
    config.validate()?;
    if !poles.stable {
        return Err(Error::Unstable { upper_poles: poles.upper_count, max_im: poles.max_im().unwrap_or(0.0) });
    }
    let lambda = config.cutoff.lambda;
    let kernel = PairKernel::new(config);
    let s = config.separations();
    let (z1, z2) = (config.atom1.z(), config.atom2.z());
    let field = config.field;

    let mut breaks = vec![config.omega_p];
    for p in &poles.poles {
        let (re, w) = (p.omega.re, p.omega.im.abs());
        if re > 0.0 {
            breaks.push(re);
            for k in [1.0, 10.0, 100.0] {
                breaks.push(re - k * w);
                breaks.push(re + k * w);
            }
        }
    }
    for len in [s.r_direct, s.r_image, 2.0 * z1, 2.0 * z2] {
        let step = std::f64::consts::PI / len;
        let n = (lambda / step) as usize;
        breaks.extend((1..=n).map(|k| k as f64 * step));
    }

    let integrand = |w: f64| -> [f64; 7] {
        let omega = w.into();
        let m = match invert(&kernel.entries(omega), kernel.det_scale(omega), omega) {
            Ok(m) => m,
            Err(_) => return [f64::NAN; 7],
        };
        let n = field.factor_unchecked(w);
        let g11 = n * halfspace_im(0.0, 2.0 * z1, w);
        let g22 = n * halfspace_im(0.0, 2.0 * z2, w);
        let g12 = n * halfspace_im(s.r_direct, s.r_image, w);
        // F = M N M†, with N real symmetric
        let mn = [
            [m[0][0] * g11 + m[0][1] * g12, m[0][0] * g12 + m[0][1] * g22],
            [m[1][0] * g11 + m[1][1] * g12, m[1][0] * g12 + m[1][1] * g22],
        ];
        let f = |i: usize, j: usize| mn[i][0] * m[j][0].conj() + mn[i][1] * m[j][1].conj();
        let (f11, f22, f12) = (f(0, 0).re, f(1, 1).re, f(0, 1));
        let w2 = w * w;
        [f11, f22, f12.re, w2 * f11, w2 * f22, w2 * f12.re, w * f12.im]
    };

    let r = integrate(integrand, 0.0, lambda, &breaks, &opts.quad)?;
    let v = r.value;
    let (g, mass) = (config.gamma, config.mass);
    let x = 8.0 * g / mass;
    let p = 8.0 * g * mass;
    let (x11, x22, x12) = (x * v[0], x * v[1], x * v[2]);
    let (p11, p22, p12) = (p * v[3], p * v[4], p * v[5]);
    let y12 = -8.0 * g * v[6];
    CovarianceMatrix::new([
        [x11, 0.0, x12, y12],
        [0.0, p11, -y12, p12],
        [x12, -y12, x22, 0.0],
        [y12, p12, 0.0, p22],
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field_kernels::FieldState;
    use crate::gaussian_info::symplectic_eigenvalues;
    use approx::assert_relative_eq;

    #[test]
    fn weak_coupling_gives_ground_state_positions() {
        let cfg = AtomPairConfig::from_geometry(50.0, 50.0, 50.0).unwrap().with_gamma(1e-4);
        let s = covariance(&cfg).unwrap().sigma;
        assert_relative_eq!(s[0][0], 0.5, max_relative = 1e-3);
        assert_relative_eq!(s[2][2], 0.5, max_relative = 1e-3);
        assert!(s[0][2].abs() < 1e-4);
    }

    #[test]
    fn far_atom_matches_single_oscillator_spectral_integral() {
        let g = 0.01;
        let cfg = AtomPairConfig::from_geometry(50.0, 50.0, 50.0).unwrap().with_gamma(g);
        let s = covariance(&cfg).unwrap().sigma;
        // (2γ/π) ∫₀^Λ ω dω / ((ω² − 1)² + 4γ²ω²)
        let single = integrate(
            |w: f64| [2.0 * g / std::f64::consts::PI * w / ((w * w - 1.0).powi(2) + 4.0 * g * g * w * w)],
            0.0,
            100.0,
            &[1.0],
            &QuadOptions::default(),
        )
        .unwrap()
        .value[0];
        assert_relative_eq!(s[0][0], single, max_relative = 2e-2);
        assert_relative_eq!(s[2][2], single, max_relative = 2e-2);
    }

    #[test]
    fn structure_and_physicality() {
        let cfg = AtomPairConfig::from_geometry(1.0, 0.8, 0.3).unwrap();
        let cov = covariance(&cfg).unwrap();
        let s = cov.sigma;
        assert_eq!(s[0][1], 0.0);
        assert_eq!(s[2][3], 0.0);
        assert_eq!(s[1][2], -s[0][3]);
        let (lm, _) = symplectic_eigenvalues(&cov).unwrap();
        assert!(lm >= 0.5 - 1e-6);
    }

    #[test]
    fn swapping_atoms_swaps_blocks() {
        let cfg = AtomPairConfig::from_geometry(0.7, 1.2, 0.35).unwrap();
        let a = covariance(&cfg).unwrap();
        let b = covariance(&cfg.swapped()).unwrap();
        let sw = a.swapped();
        for i in 0..4 {
            for j in 0..4 {
                assert!((sw.sigma[i][j] - b.sigma[i][j]).abs() <= 1e-9 * b.sigma[i][j].abs().max(1e-3));
            }
        }
    }

    #[test]
    fn unstable_config_is_refused() {
        let cfg = AtomPairConfig::from_geometry(1.0, 1.0, 0.02).unwrap();
        assert!(matches!(covariance(&cfg), Err(Error::Unstable { .. })));
    }

    #[test]
    fn atom_at_plate_decouples() {
        let cfg = AtomPairConfig::from_geometry(1.0, 0.005, 0.3).unwrap();
        let cov = covariance(&cfg).unwrap();
        // the atom nearly at the plate is close to a pure oscillator state
        let b = cov.b();
        let nu = (b[0][0] * b[1][1] - b[0][1] * b[1][0]).sqrt();
        assert!(nu < 0.52, "nu = {nu}");
        assert!(cov.correlation().abs() < 1e-2);
    }

    #[test]
    fn thermal_state_is_more_mixed_than_vacuum() {
        let cfg = AtomPairConfig::from_geometry(1.0, 1.0, 1.0).unwrap();
        let vac = covariance(&cfg).unwrap();
        let hot = covariance(&cfg.with_field(FieldState::thermal(1.0).unwrap())).unwrap();
        assert!(hot.sigma[0][0] > vac.sigma[0][0] * 1.1);
        // very cold thermal state reproduces the vacuum
        let cold = covariance(&cfg.with_field(FieldState::thermal(200.0).unwrap())).unwrap();
        assert_relative_eq!(cold.sigma[0][0], vac.sigma[0][0], max_relative = 1e-8);
    }

    #[test]
    fn block_accessors_round_trip() {
        let a = [[1.0, 0.1], [0.1, 2.0]];
        let b = [[3.0, -0.2], [-0.2, 4.0]];
        let c = [[0.3, 0.4], [-0.5, 0.6]];
        let cov = CovarianceMatrix::from_blocks(a, b, c).unwrap();
        assert_eq!(cov.a(), a);
        assert_eq!(cov.b(), b);
        assert_eq!(cov.c(), c);
        assert!(CovarianceMatrix::new([[1.0, 2.0, 0.0, 0.0], [0.0, 1.0, 0.0, 0.0], [0.0; 4], [0.0; 4]]).is_err());
    }
}
