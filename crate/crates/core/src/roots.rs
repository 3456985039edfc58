//! Zeros of a holomorphic function inside a rectangle.
//!
//! The number of zeros enclosed by a rectangle is the winding number of `f`
//! along its boundary. Rectangles are bisected until each holds a single zero,
//! which is then polished by Newton's method with the analytic derivative.
//! Every bisection is checked (children must add up to the parent count) and
//! the final tally must equal the winding number of the full region, so a zero
//! is never dropped silently.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

/// A function holomorphic on (a neighbourhood of) the search region.
pub trait Holomorphic {
    fn value(&self, z: Complex64) -> Complex64;

    fn value_and_derivative(&self, z: Complex64) -> (Complex64, Complex64);

    /// Magnitude of the individual terms making up `f(z)`. A value is treated
    /// as zero when `|f(z)|` is tiny relative to this.
    fn scale(&self, z: Complex64) -> f64 {
        self.value(z).norm().max(1.0)
    }

    /// Upper bound on `|d arg f / dz|` away from zeros, used to pick the
    /// initial sampling density along contour edges.
    fn phase_rate_hint(&self) -> f64 {
        1.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Rect {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
}

impl Rect {
    pub fn new(re_min: f64, re_max: f64, im_min: f64, im_max: f64) -> Self {
        Self { re_min, re_max, im_min, im_max }
    }

    pub fn width(&self) -> f64 {
        self.re_max - self.re_min
    }

    pub fn height(&self) -> f64 {
        self.im_max - self.im_min
    }

    pub fn contains(&self, z: Complex64, slack: f64) -> bool {
        z.re >= self.re_min - slack
            && z.re <= self.re_max + slack
            && z.im >= self.im_min - slack
            && z.im <= self.im_max + slack
    }

    pub fn center(&self) -> Complex64 {
        Complex64::new(0.5 * (self.re_min + self.re_max), 0.5 * (self.im_min + self.im_max))
    }

    fn corners(&self) -> [Complex64; 4] {
        [
            Complex64::new(self.re_min, self.im_min),
            Complex64::new(self.re_max, self.im_min),
            Complex64::new(self.re_max, self.im_max),
            Complex64::new(self.re_min, self.im_max),
        ]
    }

    fn grown(&self, by: f64) -> Self {
        Self::new(self.re_min - by, self.re_max + by, self.im_min - by, self.im_max + by)
    }

    fn split(&self, fraction: f64) -> (Self, Self) {
        if self.width() >= self.height() {
            let x = self.re_min + fraction * self.width();
            (Self { re_max: x, ..*self }, Self { re_min: x, ..*self })
        } else {
            let y = self.im_min + fraction * self.height();
            (Self { im_max: y, ..*self }, Self { im_min: y, ..*self })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Root {
    pub z: Complex64,
    pub multiplicity: usize,
    /// `|f(z)| / scale(z)` at the polished root.
    pub residual: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct RootFinderOptions {
    /// Largest accepted phase change of `f` between adjacent contour samples.
    pub max_phase_step: f64,
    /// `|f| / scale` below this on a contour means a zero sits on the contour.
    pub contour_zero_tol: f64,
    /// Relative residual required of a polished root.
    pub residual_tol: f64,
    /// Rectangles smaller than this (relative to the region) holding several
    /// zeros are reported as one multiple zero.
    pub cluster_size: f64,
    /// Relative size below which an unsplittable rectangle is reported as a cluster.
    pub cluster_fallback: f64,
    pub max_depth: usize,
    pub max_evaluations: usize,
}

impl Default for RootFinderOptions {
    fn default() -> Self {
        Self {
            max_phase_step: 0.5,
            contour_zero_tol: 1e-13,
            residual_tol: 1e-12,
            cluster_size: 1e-9,
            cluster_fallback: 1e-5,
            max_depth: 80,
            max_evaluations: 20_000_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum RootError {
    /// A zero lies on (or numerically indistinguishable from) a contour.
    ZeroOnContour(Complex64),
    NonIntegerWinding(f64),
    CountMismatch { expected: usize, found: usize },
    Budget(String),
    NonFinite(Complex64),
}

impl std::fmt::Display for RootError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RootError::ZeroOnContour(z) => write!(f, "zero on contour near {z}"),
            RootError::NonIntegerWinding(w) => write!(f, "winding number {w} is not an integer"),
            RootError::CountMismatch { expected, found } => {
                write!(f, "argument principle counts {expected} zero(s) but {found} were located")
            }
            RootError::Budget(msg) => write!(f, "search budget exhausted: {msg}"),
            RootError::NonFinite(z) => write!(f, "function is not finite at {z}"),
        }
    }
}

/// Split fractions tried in turn when a bisection line passes through a zero.
/// Deliberately off-centre so symmetric regions are not cut along their axis.
const SPLIT_FRACTIONS: [f64; 6] = [0.4871, 0.5317, 0.4417, 0.5733, 0.3911, 0.6183];

pub struct RootFinder<'a, F: Holomorphic> {
    f: &'a F,
    opts: RootFinderOptions,
    evaluations: usize,
    region_size: f64,
}

pub struct RootSearch {
    pub roots: Vec<Root>,
    /// Winding number of the (possibly slightly enlarged) region boundary.
    pub count: usize,
    /// Region actually searched.
    pub region: Rect,
    pub evaluations: usize,
}

impl<'a, F: Holomorphic> RootFinder<'a, F> {
    pub fn new(f: &'a F, opts: RootFinderOptions) -> Self {
        Self { f, opts, evaluations: 0, region_size: 1.0 }
    }

    /// Locate every zero inside `region`. If a zero sits on the boundary the
    /// region is grown by a small amount and the search repeated.
    pub fn find(mut self, region: Rect) -> Result<RootSearch, RootError> {
        self.region_size = region.width().max(region.height());
        let mut last_err = None;
        for attempt in 0..6 {
            let rect = if attempt == 0 { region } else { region.grown(self.region_size * 1e-4 * (attempt as f64).powi(2)) };
            match self.count(&rect) {
                Ok(count) => {
                    let mut roots = Vec::new();
                    self.search(&rect, count, 0, &mut roots)?;
                    let found: usize = roots.iter().map(|r| r.multiplicity).sum();
                    if found != count {
                        return Err(RootError::CountMismatch { expected: count, found });
                    }
                    roots.sort_by(|a, b| a.z.re.total_cmp(&b.z.re).then(a.z.im.total_cmp(&b.z.im)));
                    return Ok(RootSearch { roots, count, region: rect, evaluations: self.evaluations });
                }
                Err(e @ RootError::ZeroOnContour(_)) => last_err = Some(e),
                Err(e) => return Err(e),
            }
        }
        Err(last_err.unwrap())
    }

    fn eval(&mut self, z: Complex64) -> Result<Complex64, RootError> {
        self.evaluations += 1;
        if self.evaluations > self.opts.max_evaluations {
            return Err(RootError::Budget(format!("more than {} evaluations", self.opts.max_evaluations)));
        }
        let v = self.f.value(z);
        if !(v.re.is_finite() && v.im.is_finite()) {
            return Err(RootError::NonFinite(z));
        }
        if v.norm() <= self.opts.contour_zero_tol * self.f.scale(z) {
            return Err(RootError::ZeroOnContour(z));
        }
        Ok(v)
    }

    /// Number of zeros enclosed by the boundary of `rect`.
    pub fn count(&mut self, rect: &Rect) -> Result<usize, RootError> {
        let c = rect.corners();
        let mut vals = [Complex64::new(0.0, 0.0); 4];
        for (v, z) in vals.iter_mut().zip(c.iter()) {
            *v = self.eval(*z)?;
        }
        let mut total = 0.0;
        for k in 0..4 {
            let j = (k + 1) % 4;
            total += self.edge_phase(c[k], c[j], vals[k], vals[j])?;
        }
        let winding = total / (2.0 * PI);
        let n = winding.round();
        if (winding - n).abs() > 0.05 || n < 0.0 {
            return Err(RootError::NonIntegerWinding(winding));
        }
        Ok(n as usize)
    }

    /// Continuous change of `arg f` along the straight segment `a → b`.
    fn edge_phase(&mut self, a: Complex64, b: Complex64, fa: Complex64, fb: Complex64) -> Result<f64, RootError> {
        let len = (b - a).norm();
        let step = self.opts.max_phase_step;
        let n0 = ((len * self.f.phase_rate_hint() / step).ceil() as usize).clamp(4, 1_000_000);
        let min_len = len.max(self.region_size) * 1e-13;

        // Work stack of parameter intervals, processed left to right.
        let mut stack: Vec<(f64, f64, Complex64, Complex64)> = Vec::with_capacity(64);
        let mut pieces = Vec::with_capacity(n0 + 1);
        pieces.push((0.0, fa));
        for k in 1..n0 {
            let t = k as f64 / n0 as f64;
            pieces.push((t, self.eval(a + (b - a) * t)?));
        }
        pieces.push((1.0, fb));
        for w in pieces.windows(2).rev() {
            stack.push((w[0].0, w[1].0, w[0].1, w[1].1));
        }

        let mut total = 0.0;
        while let Some((t0, t1, f0, f1)) = stack.pop() {
            let d = (f1 / f0).arg();
            let tm = 0.5 * (t0 + t1);
            let fm = self.eval(a + (b - a) * tm)?;
            let d1 = (fm / f0).arg();
            let d2 = (f1 / fm).arg();
            let consistent = (d1 + d2 - d).abs() < 1e-9;
            if consistent && d1.abs() <= step && d2.abs() <= step {
                total += d;
                continue;
            }
            if (t1 - t0) * len < min_len {
                return Err(RootError::ZeroOnContour(a + (b - a) * tm));
            }
            stack.push((tm, t1, fm, f1));
            stack.push((t0, tm, f0, fm));
        }
        Ok(total)
    }

    fn newton(&mut self, start: Complex64, rect: &Rect) -> Option<Root> {
        let mut z = start;
        let size = rect.width().max(rect.height());
        for _ in 0..100 {
            self.evaluations += 1;
            let (v, dv) = self.f.value_and_derivative(z);
            if !(v.re.is_finite() && v.im.is_finite()) || dv.norm() == 0.0 {
                return None;
            }
            let scale = self.f.scale(z);
            let step = v / dv;
            z -= step;
            if !rect.contains(z, 4.0 * size) {
                return None;
            }
            if step.norm() <= 1e-15 * z.norm().max(1.0) || v.norm() <= 1e-3 * self.opts.residual_tol * scale {
                let (v, _) = self.f.value_and_derivative(z);
                let residual = v.norm() / self.f.scale(z);
                return Some(Root { z, multiplicity: 1, residual });
            }
        }
        None
    }

    fn search(&mut self, rect: &Rect, count: usize, depth: usize, out: &mut Vec<Root>) -> Result<(), RootError> {
        if count == 0 {
            return Ok(());
        }
        let size = rect.width().max(rect.height());
        if count == 1 {
            if let Some(root) = self.newton(rect.center(), rect) {
                if rect.contains(root.z, 1e-12 * self.region_size) && root.residual <= self.opts.residual_tol {
                    out.push(root);
                    return Ok(());
                }
            }
        }
        if size <= self.opts.cluster_size * self.region_size {
            let z = self.newton(rect.center(), rect).map(|r| r.z).filter(|z| rect.contains(*z, size)).unwrap_or(rect.center());
            let residual = self.f.value(z).norm() / self.f.scale(z);
            out.push(Root { z, multiplicity: count, residual });
            return Ok(());
        }
        if depth >= self.opts.max_depth {
            return Err(RootError::Budget(format!("subdivision depth {depth} reached near {}", rect.center())));
        }
        let mut last_err = None;
        for &fraction in SPLIT_FRACTIONS.iter() {
            let (lo, hi) = rect.split(fraction);
            let counts = self.count(&lo).and_then(|a| self.count(&hi).map(|b| (a, b)));
            match counts {
                Ok((a, b)) if a + b == count => {
                    self.search(&lo, a, depth + 1, out)?;
                    self.search(&hi, b, depth + 1, out)?;
                    return Ok(());
                }
                Ok((a, b)) => last_err = Some(RootError::CountMismatch { expected: count, found: a + b }),
                Err(e @ RootError::ZeroOnContour(_)) => last_err = Some(e),
                Err(e) => return Err(e),
            }
        }
        // Near a multiple zero |f| is tiny over a whole neighbourhood and no
        // split line avoids it; the zeros cannot be separated in floating point.
        if matches!(last_err, Some(RootError::ZeroOnContour(_))) && size <= self.opts.cluster_fallback * self.region_size {
            let residual = self.f.value(rect.center()).norm() / self.f.scale(rect.center());
            out.push(Root { z: rect.center(), multiplicity: count, residual });
            return Ok(());
        }
        Err(last_err.unwrap())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Poly(Vec<Complex64>);

    impl Holomorphic for Poly {
        fn value(&self, z: Complex64) -> Complex64 {
            self.0.iter().fold(Complex64::new(1.0, 0.0), |acc, r| acc * (z - r))
        }
        fn value_and_derivative(&self, z: Complex64) -> (Complex64, Complex64) {
            let mut v = Complex64::new(1.0, 0.0);
            let mut d = Complex64::new(0.0, 0.0);
            for r in &self.0 {
                d = d * (z - r) + v;
                v *= z - r;
            }
            (v, d)
        }
        fn scale(&self, z: Complex64) -> f64 {
            self.0.iter().map(|r| z.norm() + r.norm()).product::<f64>().max(1.0)
        }
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn finds_simple_roots_of_polynomial() {
        let zs = vec![c(0.3, 0.2), c(-0.7, -0.4), c(1.1, 0.9), c(0.0, 0.5), c(2.5, 0.0)];
        let p = Poly(zs.clone());
        let res = RootFinder::new(&p, RootFinderOptions::default()).find(Rect::new(-2.0, 2.0, -1.0, 1.0)).unwrap();
        assert_eq!(res.count, 4);
        assert_eq!(res.roots.len(), 4);
        for z in zs.iter().take(4) {
            assert!(res.roots.iter().any(|r| (r.z - z).norm() < 1e-12), "missing {z}");
        }
    }

    #[test]
    fn handles_root_on_boundary_and_on_symmetry_axis() {
        // zeros on the imaginary axis and exactly on the initial top edge
        let p = Poly(vec![c(0.0, 0.5), c(0.0, -0.5), c(0.4, 1.0)]);
        let res = RootFinder::new(&p, RootFinderOptions::default()).find(Rect::new(-1.0, 1.0, -1.0, 1.0)).unwrap();
        assert_eq!(res.roots.len(), 3);
    }

    #[test]
    fn reports_multiplicity_of_double_root() {
        let p = Poly(vec![c(0.2, 0.1), c(0.2, 0.1), c(-0.5, 0.0)]);
        let res = RootFinder::new(&p, RootFinderOptions::default()).find(Rect::new(-1.0, 1.0, -1.0, 1.0)).unwrap();
        assert_eq!(res.count, 3);
        let total: usize = res.roots.iter().map(|r| r.multiplicity).sum();
        assert_eq!(total, 3);
        let double = res.roots.iter().find(|r| (r.z - c(0.2, 0.1)).norm() < 1e-6).unwrap();
        assert_eq!(double.multiplicity, 2);
    }

    #[test]
    fn close_pair_is_resolved() {
        let p = Poly(vec![c(0.1, 0.1), c(0.1 + 1e-6, 0.1), c(0.9, -0.9)]);
        let res = RootFinder::new(&p, RootFinderOptions::default()).find(Rect::new(-1.0, 1.0, -1.0, 1.0)).unwrap();
        assert_eq!(res.count, 3);
        assert_eq!(res.roots.iter().map(|r| r.multiplicity).sum::<usize>(), 3);
    }

    struct Exp;
    impl Holomorphic for Exp {
        // e^{iz·10} − 2 has zeros at z = (2πk − i ln 2)/10
        fn value(&self, z: Complex64) -> Complex64 {
            (Complex64::i() * z * 10.0).exp() - 2.0
        }
        fn value_and_derivative(&self, z: Complex64) -> (Complex64, Complex64) {
            let e = (Complex64::i() * z * 10.0).exp();
            (e - 2.0, Complex64::i() * 10.0 * e)
        }
        fn scale(&self, z: Complex64) -> f64 {
            (Complex64::i() * z * 10.0).exp().norm() + 2.0
        }
        fn phase_rate_hint(&self) -> f64 {
            10.0
        }
    }

    #[test]
    fn finds_lattice_of_exponential_zeros() {
        let res = RootFinder::new(&Exp, RootFinderOptions::default()).find(Rect::new(-3.0, 3.0, -1.0, 1.0)).unwrap();
        let expected: Vec<f64> = (-4..=4).map(|k| 2.0 * PI * k as f64 / 10.0).filter(|x| x.abs() <= 3.0).collect();
        assert_eq!(res.roots.len(), expected.len());
        for (r, x) in res.roots.iter().zip(expected) {
            assert!((r.z - c(x, -(2f64).ln() / 10.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn empty_region() {
        let p = Poly(vec![c(5.0, 5.0)]);
        let res = RootFinder::new(&p, RootFinderOptions::default()).find(Rect::new(-1.0, 1.0, -1.0, 1.0)).unwrap();
        assert_eq!(res.count, 0);
        assert!(res.roots.is_empty());
    }
}
