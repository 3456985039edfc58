//! Globally adaptive 21-point Gauss–Kronrod quadrature for vector-valued
//! integrands on a finite interval with user-supplied panel breaks.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

const XGK: [f64; 11] = [
    0.995_657_163_025_808_1,
    0.973_906_528_517_171_7,
    0.930_157_491_355_708_2,
    0.865_063_366_688_984_5,
    0.780_817_726_586_416_9,
    0.679_409_568_299_024_4,
    0.562_757_134_668_604_7,
    0.433_395_394_129_247_2,
    0.294_392_862_701_460_2,
    0.148_874_338_981_631_2,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874,
    0.032_558_162_307_964_725,
    0.054_755_896_574_351_995,
    0.075_039_674_810_919_96,
    0.093_125_454_583_697_6,
    0.109_387_158_802_297_64,
    0.123_491_976_262_065_84,
    0.134_709_217_311_473_34,
    0.142_775_938_577_060_09,
    0.147_739_104_901_338_49,
    0.149_445_554_002_916_9,
];

// Gauss weights for the nodes XGK[1], XGK[3], .., XGK[9]
const WG: [f64; 5] = [
    0.066_671_344_308_688_14,
    0.149_451_349_150_580_6,
    0.219_086_362_515_982_04,
    0.269_266_719_309_996_35,
    0.295_524_224_714_752_87,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_panels: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self { rel_tol: 1e-8, abs_tol: 1e-15, max_panels: 200_000 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult<const N: usize> {
    pub value: [f64; N],
    /// Estimated absolute error, summed over panels (max over components).
    pub error: f64,
    pub evaluations: usize,
}

struct Panel<const N: usize> {
    a: f64,
    b: f64,
    value: [f64; N],
    err: [f64; N],
    worst: f64,
}

impl<const N: usize> PartialEq for Panel<N> {
    fn eq(&self, other: &Self) -> bool {
        self.worst == other.worst
    }
}
impl<const N: usize> Eq for Panel<N> {}
impl<const N: usize> PartialOrd for Panel<N> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<const N: usize> Ord for Panel<N> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.worst.total_cmp(&other.worst)
    }
}

fn gk21<const N: usize, F: Fn(f64) -> [f64; N]>(f: &F, a: f64, b: f64) -> Panel<N> {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut fv = [[0.0; N]; 21];
    for (i, &x) in XGK.iter().enumerate().take(10) {
        fv[2 * i] = f(c - h * x);
        fv[2 * i + 1] = f(c + h * x);
    }
    fv[20] = f(c);

    let mut value = [0.0; N];
    let mut err = [0.0; N];
    for k in 0..N {
        let mut kron = WGK[10] * fv[20][k];
        let mut gauss = 0.0;
        for i in 0..10 {
            let pair = fv[2 * i][k] + fv[2 * i + 1][k];
            kron += WGK[i] * pair;
            if i % 2 == 1 {
                gauss += WG[i / 2] * pair;
            }
        }
        let mean = 0.5 * kron;
        let mut resasc = WGK[10] * (fv[20][k] - mean).abs();
        for i in 0..10 {
            resasc += WGK[i] * ((fv[2 * i][k] - mean).abs() + (fv[2 * i + 1][k] - mean).abs());
        }
        let resasc = resasc * h.abs();
        let mut e = ((kron - gauss) * h).abs();
        if resasc != 0.0 && e != 0.0 {
            e = resasc * (200.0 * e / resasc).powf(1.5).min(1.0);
        }
        value[k] = kron * h;
        err[k] = e.max(50.0 * f64::EPSILON * (kron * h).abs());
    }
    let worst = err.iter().copied().fold(0.0, f64::max);
    Panel { a, b, value, err, worst }
}

/// Integrate `f` over `[a, b]`. Every breakpoint strictly inside the interval
/// becomes a panel edge. Convergence is declared when, for every component,
/// the summed panel error is below `max(abs_tol, rel_tol · max_k |I_k|)`.
pub fn integrate<const N: usize, F>(f: F, a: f64, b: f64, breakpoints: &[f64], opts: &QuadOptions) -> Result<QuadResult<N>>
where
    F: Fn(f64) -> [f64; N],
{
    if !(a.is_finite() && b.is_finite() && a < b) {
        return Err(Error::InvalidParameter(format!("integration interval [{a}, {b}] must be finite and nonempty")));
    }
    let mut edges: Vec<f64> = breakpoints.iter().copied().filter(|x| x.is_finite() && *x > a && *x < b).collect();
    edges.push(a);
    edges.push(b);
    edges.sort_by(f64::total_cmp);
    let min_gap = 1e-12 * (b - a);
    edges.dedup_by(|x, y| (*x - *y).abs() < min_gap);
    *edges.last_mut().unwrap() = b;

    let mut heap = BinaryHeap::new();
    let mut total = [0.0; N];
    let mut total_err = [0.0; N];
    let mut evaluations = 0;
    for w in edges.windows(2) {
        let p = gk21(&f, w[0], w[1]);
        evaluations += 21;
        for k in 0..N {
            total[k] += p.value[k];
            total_err[k] += p.err[k];
        }
        heap.push(p);
    }

    let target = |total: &[f64; N]| opts.abs_tol.max(opts.rel_tol * total.iter().fold(0.0f64, |m, v| m.max(v.abs())));
    let max_err = |e: &[f64; N]| e.iter().copied().fold(0.0, f64::max);

    loop {
        let tol = target(&total);
        let err = max_err(&total_err);
        if !total.iter().all(|v| v.is_finite()) || !err.is_finite() {
            return Err(Error::Quadrature { achieved: f64::INFINITY, requested: opts.rel_tol });
        }
        if err <= tol {
            return Ok(QuadResult { value: total, error: err, evaluations });
        }
        let scale = (tol / opts.rel_tol).max(f64::MIN_POSITIVE);
        let worst = heap.pop().unwrap();
        let mid = 0.5 * (worst.a + worst.b);
        if heap.len() + 2 > opts.max_panels || mid <= worst.a || mid >= worst.b {
            return Err(Error::Quadrature { achieved: err / scale, requested: opts.rel_tol });
        }
        let left = gk21(&f, worst.a, mid);
        let right = gk21(&f, mid, worst.b);
        evaluations += 42;
        for k in 0..N {
            total[k] += left.value[k] + right.value[k] - worst.value[k];
            total_err[k] += left.err[k] + right.err[k] - worst.err[k];
        }
        heap.push(left);
        heap.push(right);
    }
}
