//! Independent oracles for the acceptance suite.

use entdomain::steady_state::CovarianceMatrix;
use nalgebra::{Matrix4, SymmetricEigen};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

fn omega() -> Matrix4<f64> {
    let mut om = Matrix4::zeros();
    om[(0, 1)] = 1.0;
    om[(1, 0)] = -1.0;
    om[(2, 3)] = 1.0;
    om[(3, 2)] = -1.0;
    om
}

/// Ascending moduli of the eigenvalues of `iΩσ`, via the symmetric matrix
/// `σ^½ Ωᵀ σ Ω σ^½` whose eigenvalues are their squares.
pub fn omega_moduli(c: &CovarianceMatrix) -> Vec<f64> {
    let s = Matrix4::from_fn(|i, j| c.sigma[i][j]);
    let om = omega();
    let eig = SymmetricEigen::new(s);
    let root = eig.eigenvectors * Matrix4::from_diagonal(&eig.eigenvalues.map(f64::sqrt)) * eig.eigenvectors.transpose();
    let m = root * om.transpose() * s * om * root;
    let mut v: Vec<f64> = SymmetricEigen::new(0.5 * (m + m.transpose())).eigenvalues.iter().map(|x| x.sqrt()).collect();
    v.sort_by(f64::total_cmp);
    v
}

pub fn random_symplectic(rng: &mut ChaCha8Rng) -> Matrix4<f64> {
    let mut sq = Matrix4::zeros();
    for k in [0, 2] {
        let r = rng.gen_range(-0.8..0.8f64);
        sq[(k, k)] = r.exp();
        sq[(k + 1, k + 1)] = (-r).exp();
    }
    let mut rot = Matrix4::zeros();
    for k in [0, 2] {
        let ph = rng.gen_range(0.0..std::f64::consts::TAU);
        rot[(k, k)] = ph.cos();
        rot[(k, k + 1)] = ph.sin();
        rot[(k + 1, k)] = -ph.sin();
        rot[(k + 1, k + 1)] = ph.cos();
    }
    let th = rng.gen_range(0.0..std::f64::consts::TAU);
    let mut bs = Matrix4::zeros();
    for k in 0..2 {
        bs[(k, k)] = th.cos();
        bs[(k + 2, k + 2)] = th.cos();
        bs[(k, k + 2)] = th.sin();
        bs[(k + 2, k)] = -th.sin();
    }
    bs * rot * sq
}

pub fn random_state(rng: &mut ChaCha8Rng) -> CovarianceMatrix {
    let nu1 = 0.5 + rng.gen::<f64>() * 2.0;
    let nu2 = 0.5 + rng.gen::<f64>() * 2.0;
    let mut s = Matrix4::from_diagonal(&nalgebra::Vector4::new(nu1, nu1, nu2, nu2));
    for _ in 0..3 {
        let t = random_symplectic(rng);
        s = t * s * t.transpose();
    }
    CovarianceMatrix::new(std::array::from_fn(|i| std::array::from_fn(|j| 0.5 * (s[(i, j)] + s[(j, i)])))).unwrap()
}
