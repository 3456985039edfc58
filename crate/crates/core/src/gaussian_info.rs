//! Two-mode Gaussian state analysis: symplectic invariants, Williamson
//! spectrum, the partial-transpose (PPT) entanglement test, and purity and
//! entropy of the single-atom reduced states.
//!
//! All quantities use `ħ = 1`, so the vacuum has `σ = I/2` and physical
//! states have symplectic eigenvalues `≥ 1/2`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::steady_state::CovarianceMatrix;

/// Slack below 1/2 absorbed as quadrature noise.
pub const PHYSICALITY_TOL: f64 = 1e-6;

type M2 = [[f64; 2]; 2];

fn det2(m: &M2) -> f64 {
    m[0][0] * m[1][1] - m[0][1] * m[1][0]
}

fn mul2(a: &M2, b: &M2) -> M2 {
    let mut r = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            r[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    r
}

fn transpose2(m: &M2) -> M2 {
    [[m[0][0], m[1][0]], [m[0][1], m[1][1]]]
}

const J: M2 = [[0.0, 1.0], [-1.0, 0.0]];

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Invariants {
    pub i1: f64,
    pub i2: f64,
    pub i3: f64,
    pub i4: f64,
    /// `I₁ + I₂ + 2I₃`
    pub delta: f64,
    /// `I₁ + I₂ − 2I₃`, i.e. `Δ` of the partially transposed state
    pub delta_pt: f64,
    /// `I₁I₂ + I₃² − I₄`
    pub det: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SymplecticSpectrum {
    pub lambda_minus: f64,
    pub lambda_plus: f64,
    /// Squared smaller symplectic eigenvalue of the partial transpose;
    /// the state is entangled iff this is below 1/4.
    pub pt_lambda_minus_sq: f64,
    pub invariants: Invariants,
}

impl SymplecticSpectrum {
    pub fn entangled(&self) -> bool {
        self.pt_lambda_minus_sq < 0.25
    }
}

pub fn symplectic_invariants(sigma: &CovarianceMatrix) -> Invariants {
    let (a, b, c) = (sigma.a(), sigma.b(), sigma.c());
    let (i1, i2, i3) = (det2(&a), det2(&b), det2(&c));
    let chain = mul2(&mul2(&mul2(&mul2(&a, &J), &mul2(&c, &J)), &mul2(&b, &J)), &mul2(&transpose2(&c), &J));
    let i4 = chain[0][0] + chain[1][1];
    Invariants { i1, i2, i3, i4, delta: i1 + i2 + 2.0 * i3, delta_pt: i1 + i2 - 2.0 * i3, det: i1 * i2 + i3 * i3 - i4 }
}

/// `(λ₋², λ₊²)` from `Δ` and `det σ`; `λ₋²` via `det/λ₊²` to avoid cancellation.
/// `root` is `sqrt(Δ² − 4 det σ)` evaluated without cancellation.
fn squared_pair(delta: f64, det: f64, root: f64) -> Result<(f64, f64)> {
    if !(det > 0.0) || !(delta > 0.0) {
        return Err(Error::InvalidCovariance(format!("not positive definite (det = {det:e}, delta = {delta:e})")));
    }
    let disc = delta * delta - 4.0 * det;
    if disc < -1e-9 * delta * delta {
        return Err(Error::InvalidCovariance(format!("negative discriminant {disc:e}")));
    }
    let plus = 0.5 * (delta + root);
    Ok((det / plus, plus))
}

fn cholesky(s: &[[f64; 4]; 4]) -> Result<[[f64; 4]; 4]> {
    let mut l = [[0.0; 4]; 4];
    for j in 0..4 {
        let d = s[j][j] - (0..j).map(|k| l[j][k] * l[j][k]).sum::<f64>();
        if !(d > 0.0) {
            return Err(Error::InvalidCovariance(format!("not positive definite (pivot {d:e})")));
        }
        l[j][j] = d.sqrt();
        for i in j + 1..4 {
            l[i][j] = (s[i][j] - (0..j).map(|k| l[i][k] * l[j][k]).sum::<f64>()) / l[j][j];
        }
    }
    Ok(l)
}

/// `|λ₊² − λ₋²| = sqrt(Δ² − 4 det σ)` without cancellation. With `σ = L Lᵀ`,
/// `G = Lᵀ Ω L` is antisymmetric and similar to `Ωσ`; its self-dual and
/// anti-self-dual parts have norms `λ₊ + λ₋` and `λ₊ − λ₋`. `pt` uses
/// `Ω` with the atom-2 block negated, i.e. the spectrum of `σ^PT`.
fn discriminant_root(l: &[[f64; 4]; 4], pt: bool) -> f64 {
    let signs = [1.0, if pt { -1.0 } else { 1.0 }];
    let g = |i: usize, j: usize| -> f64 {
        (0..2).map(|b| signs[b] * (l[2 * b][i] * l[2 * b + 1][j] - l[2 * b + 1][i] * l[2 * b][j])).sum()
    };
    let (a, b, c, d, e, f) = (g(0, 1), g(0, 2), g(0, 3), g(1, 2), g(1, 3), g(2, 3));
    let norm = |x: f64, y: f64, z: f64| (x * x + y * y + z * z).sqrt();
    norm(a + f, b - e, c + d) * norm(a - f, b + e, c - d)
}

/// `(λ₋, λ₊)` with `λ₋ ≤ λ₊`.
pub fn symplectic_eigenvalues(sigma: &CovarianceMatrix) -> Result<(f64, f64)> {
    let inv = symplectic_invariants(sigma);
    let root = discriminant_root(&cholesky(&sigma.sigma)?, false);
    let (m, p) = squared_pair(inv.delta, inv.det, root)?;
    Ok((m.sqrt(), p.sqrt()))
}

/// `(λ₋^PT)²`, partial transpose taken on atom 2.
pub fn pt_discriminant(sigma: &CovarianceMatrix) -> Result<f64> {
    let inv = symplectic_invariants(sigma);
    let root = discriminant_root(&cholesky(&sigma.sigma)?, true);
    Ok(squared_pair(inv.delta_pt, inv.det, root)?.0)
}

pub fn symplectic_spectrum(sigma: &CovarianceMatrix) -> Result<SymplecticSpectrum> {
    let inv = symplectic_invariants(sigma);
    let l = cholesky(&sigma.sigma)?;
    let (m, p) = squared_pair(inv.delta, inv.det, discriminant_root(&l, false))?;
    let (pt, _) = squared_pair(inv.delta_pt, inv.det, discriminant_root(&l, true))?;
    Ok(SymplecticSpectrum { lambda_minus: m.sqrt(), lambda_plus: p.sqrt(), pt_lambda_minus_sq: pt, invariants: inv })
}

/// Symplectic eigenvalue `ν = sqrt(det)` of a single-mode 2×2 block.
pub fn reduced_nu(block: &[[f64; 2]; 2]) -> Result<f64> {
    let d = det2(block);
    if !(d > 0.0) {
        return Err(Error::InvalidCovariance(format!("reduced block has det = {d:e}")));
    }
    Ok(d.sqrt())
}

fn check_nu(nu: f64) -> Result<f64> {
    if !nu.is_finite() || nu < 0.5 - PHYSICALITY_TOL {
        return Err(Error::InvalidReducedState(nu));
    }
    Ok(nu.max(0.5))
}

/// `μ = Tr ρ² = 1/(2ν)`.
pub fn purity(nu: f64) -> Result<f64> {
    Ok(0.5 / check_nu(nu)?)
}

/// `S = (ν+½) ln(ν+½) − (ν−½) ln(ν−½)`, zero for a pure state.
pub fn von_neumann_entropy(nu: f64) -> Result<f64> {
    let nu = check_nu(nu)?;
    let (hi, lo) = (nu + 0.5, nu - 0.5);
    let low_term = if lo > 0.0 { lo * lo.ln() } else { 0.0 };
    Ok(hi * hi.ln() - low_term)
}

/// `max(0, −ln(2 λ₋^PT))`.
pub fn log_negativity(pt_lambda_minus_sq: f64) -> f64 {
    (-(2.0 * pt_lambda_minus_sq.sqrt()).ln()).max(0.0)
}
