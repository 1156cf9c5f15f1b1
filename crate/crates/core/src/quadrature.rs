//! One-dimensional quadrature rules, tensor grids and adaptive integration.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math::{abs, asinh, cos, cosh, sinh, PI};

/// Rule that produced a [`QuadratureGrid`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridKind {
    /// Uniform nodes including both end points, trapezoid weights.
    Trapezoid,
    /// Uniform cell centres; staggered by half a spacing against [`GridKind::Trapezoid`].
    Midpoint,
    GaussLegendre,
    Composite,
    Custom,
}

/// Nodes and positive weights on a truncated interval.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureGrid {
    pub kind: GridKind,
    pub lo: f64,
    pub hi: f64,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl QuadratureGrid {
    /// Uniform trapezoid rule on `[-half_width, half_width]` with `n` nodes.
    pub fn trapezoid(half_width: f64, n: usize) -> Result<Self> {
        Self::check(half_width, n)?;
        let h = 2.0 * half_width / (n - 1) as f64;
        let nodes = (0..n).map(|i| -half_width + i as f64 * h).collect();
        let mut weights = vec![h; n];
        weights[0] = 0.5 * h;
        weights[n - 1] = 0.5 * h;
        Ok(Self {
            kind: GridKind::Trapezoid,
            lo: -half_width,
            hi: half_width,
            nodes,
            weights,
        })
    }

    /// Uniform midpoint rule on `[-half_width, half_width]` with `n` cells.
    pub fn midpoint(half_width: f64, n: usize) -> Result<Self> {
        Self::check(half_width, n)?;
        Self::midpoint_on(-half_width, half_width, n)
    }

    pub fn midpoint_on(lo: f64, hi: f64, n: usize) -> Result<Self> {
        if !(hi > lo) || n == 0 {
            return Err(Error::domain("midpoint rule needs lo < hi and n > 0"));
        }
        let h = (hi - lo) / n as f64;
        Ok(Self {
            kind: GridKind::Midpoint,
            lo,
            hi,
            nodes: (0..n).map(|i| lo + (i as f64 + 0.5) * h).collect(),
            weights: vec![h; n],
        })
    }

    /// Gauss–Legendre rule with `n` nodes on `[a, b]`.
    pub fn gauss_legendre(a: f64, b: f64, n: usize) -> Result<Self> {
        if !(b > a) || n == 0 {
            return Err(Error::domain("Gauss–Legendre needs a < b and n > 0"));
        }
        let (x, w) = gauss_legendre_unit(n);
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        Ok(Self {
            kind: GridKind::GaussLegendre,
            lo: a,
            hi: b,
            nodes: x.iter().map(|t| mid + half * t).collect(),
            weights: w.iter().map(|v| v * half).collect(),
        })
    }

    /// Gauss–Legendre panels between consecutive (sorted, distinct) break points.
    pub fn composite_gauss(breaks: &[f64], per_panel: usize) -> Result<Self> {
        if breaks.len() < 2 || per_panel == 0 {
            return Err(Error::domain("composite rule needs two break points"));
        }
        let (x, w) = gauss_legendre_unit(per_panel);
        let mut nodes = Vec::with_capacity((breaks.len() - 1) * per_panel);
        let mut weights = Vec::with_capacity(nodes.capacity());
        for pair in breaks.windows(2) {
            let (a, b) = (pair[0], pair[1]);
            if !(b > a) {
                return Err(Error::domain("break points must be strictly increasing"));
            }
            let half = 0.5 * (b - a);
            let mid = 0.5 * (a + b);
            for (t, wt) in x.iter().zip(&w) {
                nodes.push(mid + half * t);
                weights.push(wt * half);
            }
        }
        Ok(Self {
            kind: GridKind::Composite,
            lo: breaks[0],
            hi: breaks[breaks.len() - 1],
            nodes,
            weights,
        })
    }

    /// Geometrically graded panels on `[0, hi]` refined towards 0, for
    /// integrands with an integrable singularity at the origin.
    pub fn graded(hi: f64, smallest: f64, ratio: f64, per_panel: usize) -> Result<Self> {
        if !(hi > smallest && smallest > 0.0 && ratio > 1.0) {
            return Err(Error::domain("graded rule needs 0 < smallest < hi and ratio > 1"));
        }
        let mut breaks = vec![0.0];
        let mut b = smallest;
        while b < hi {
            breaks.push(b);
            b *= ratio;
        }
        breaks.push(hi);
        Self::composite_gauss(&breaks, per_panel)
    }

    pub fn from_parts(nodes: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if nodes.len() != weights.len() || nodes.is_empty() {
            return Err(Error::DimensionMismatch("nodes and weights differ in length".into()));
        }
        if weights.iter().any(|w| !(*w > 0.0)) {
            return Err(Error::domain("quadrature weights must be positive"));
        }
        let lo = nodes.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = nodes.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        Ok(Self {
            kind: GridKind::Custom,
            lo,
            hi,
            nodes,
            weights,
        })
    }

    fn check(half_width: f64, n: usize) -> Result<()> {
        if !(half_width > 0.0) || !half_width.is_finite() {
            return Err(Error::domain("grid half-width must be positive and finite"));
        }
        if n < 8 {
            return Err(Error::domain(alloc::format!("grid needs at least 8 nodes, got {n}")));
        }
        Ok(())
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Largest gap between neighbouring nodes.
    pub fn spacing(&self) -> f64 {
        self.nodes
            .windows(2)
            .map(|w| abs(w[1] - w[0]))
            .fold(0.0, f64::max)
    }

    pub fn half_width(&self) -> f64 {
        0.5 * (self.hi - self.lo)
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(x, w)| w * f(*x)).sum()
    }

    pub fn weight_sum(&self) -> f64 {
        self.weights.iter().sum()
    }
}

/// Cartesian product of one-dimensional grids, flattened in row-major order
/// (last axis fastest).
#[derive(Debug, Clone, PartialEq)]
pub struct ProductGrid {
    pub axes: Vec<QuadratureGrid>,
}

impl ProductGrid {
    pub fn new(axes: Vec<QuadratureGrid>) -> Self {
        Self { axes }
    }

    pub fn cube(axis: QuadratureGrid, dim: usize) -> Self {
        Self {
            axes: vec![axis; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(|a| a.len()).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Writes the coordinates of flat index `k` into `out` and returns its weight.
    pub fn point(&self, mut k: usize, out: &mut [f64]) -> f64 {
        let mut w = 1.0;
        for (slot, axis) in out.iter_mut().zip(&self.axes).rev() {
            let n = axis.len();
            let i = k % n;
            k /= n;
            *slot = axis.nodes[i];
            w *= axis.weights[i];
        }
        w
    }

    pub fn weights(&self) -> Vec<f64> {
        let mut buf = vec![0.0; self.dim()];
        (0..self.len()).map(|k| self.point(k, &mut buf)).collect()
    }

    pub fn points(&self) -> Vec<f64> {
        let d = self.dim();
        let mut out = vec![0.0; self.len() * d];
        for k in 0..self.len() {
            self.point(k, &mut out[k * d..(k + 1) * d]);
        }
        out
    }
}

/// Nodes and weights of the n-point Gauss–Legendre rule on [-1, 1].
pub fn gauss_legendre_unit(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut t = cos(PI * (i as f64 + 0.75) / (n as f64 + 0.5));
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, t);
            dp = d;
            let step = p / d;
            t -= step;
            if abs(step) < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, t);
        dp = if d != 0.0 { d } else { dp };
        let wt = 2.0 / ((1.0 - t * t) * dp * dp);
        x[i] = -t;
        x[n - 1 - i] = t;
        w[i] = wt;
        w[n - 1 - i] = wt;
    }
    (x, w)
}

fn legendre_with_derivative(n: usize, t: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = t;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * t * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (t * p1 - p0) / (t * t - 1.0);
    (p1, d)
}

const GK_NODES: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const GK_WEIGHTS: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const GAUSS7_WEIGHTS: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let fc = f(mid);
    let mut kron = GK_WEIGHTS[7] * fc;
    let mut gauss = GAUSS7_WEIGHTS[3] * fc;
    for j in 0..7 {
        let dx = half * GK_NODES[j];
        let s = f(mid - dx) + f(mid + dx);
        kron += GK_WEIGHTS[j] * s;
        if j % 2 == 1 {
            gauss += GAUSS7_WEIGHTS[j / 2] * s;
        }
    }
    (kron * half, abs((kron - gauss) * half))
}

/// Adaptive Gauss–Kronrod (7, 15) integration on a finite interval.
///
/// Bisects the interval with the largest error estimate until the summed
/// estimate drops below `max(abs_tol, rel_tol·|I|)`.
pub fn integrate_adaptive(
    f: impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let (a, b, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
    let (v, e) = gk15(&f, a, b);
    let mut segs: Vec<(f64, f64, f64, f64)> = vec![(a, b, v, e)];
    for _ in 0..4000 {
        let total: f64 = segs.iter().map(|s| s.2).sum();
        let err: f64 = segs.iter().map(|s| s.3).sum();
        if err <= abs_tol.max(rel_tol * abs(total)) {
            return Ok(sign * total);
        }
        let (idx, _) = segs
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .expect("non-empty");
        let (lo, hi, _, _) = segs.swap_remove(idx);
        let mid = 0.5 * (lo + hi);
        let (v1, e1) = gk15(&f, lo, mid);
        let (v2, e2) = gk15(&f, mid, hi);
        segs.push((lo, mid, v1, e1));
        segs.push((mid, hi, v2, e2));
    }
    let err: f64 = segs.iter().map(|s| s.3).sum();
    Err(Error::QuadratureNonConvergence {
        delta: err,
        tol: abs_tol,
    })
}

/// Adaptive integration over `[a, ∞)` through the map `x = a + t/(1−t)`.
pub fn integrate_to_infinity(
    f: impl Fn(f64) -> f64,
    a: f64,
    abs_tol: f64,
    rel_tol: f64,
) -> Result<f64> {
    integrate_adaptive(
        |t| {
            if t >= 1.0 {
                return 0.0;
            }
            let s = 1.0 - t;
            let v = f(a + t / s) / (s * s);
            if v.is_finite() {
                v
            } else {
                0.0
            }
        },
        0.0,
        1.0,
        abs_tol,
        rel_tol,
    )
}

/// Nodes clustered near 0 by `x = scale·sinh(t)`; handy for kernels with
/// sharp features at the origin and slow tails.
pub fn sinh_grid(half_width: f64, scale: f64, n: usize) -> Result<QuadratureGrid> {
    QuadratureGrid::check(half_width, n)?;
    let tmax = asinh(half_width / scale);
    let h = 2.0 * tmax / n as f64;
    let mut nodes = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for i in 0..n {
        let t = -tmax + (i as f64 + 0.5) * h;
        let (s, c) = (sinh(t), cosh(t));
        nodes.push(scale * s);
        weights.push(scale * c * h);
    }
    let mut g = QuadratureGrid::from_parts(nodes, weights)?;
    g.lo = -half_width;
    g.hi = half_width;
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::{exp, sqrt};
    use approx::assert_relative_eq;

    #[test]
    fn gauss_legendre_is_exact_for_polynomials() {
        let g = QuadratureGrid::gauss_legendre(-1.0, 2.0, 6).unwrap();
        // ∫_{-1}^{2} x^11 dx = (2^12 - 1)/12
        let v = g.integrate(|x| libm::pow(x, 11.0));
        assert_relative_eq!(v, (4096.0 - 1.0) / 12.0, max_relative = 1e-13);
        assert_relative_eq!(g.weight_sum(), 3.0, max_relative = 1e-14);
    }

    #[test]
    fn trapezoid_and_midpoint_weights_cover_the_interval() {
        let t = QuadratureGrid::trapezoid(8.0, 257).unwrap();
        let m = QuadratureGrid::midpoint(8.0, 256).unwrap();
        assert_relative_eq!(t.weight_sum(), 16.0, max_relative = 1e-14);
        assert_relative_eq!(m.weight_sum(), 16.0, max_relative = 1e-14);
        // staggered by half a spacing
        assert_relative_eq!(m.nodes[0] - t.nodes[0], 0.5 * t.spacing(), max_relative = 1e-12);
        assert!(QuadratureGrid::trapezoid(1.0, 7).is_err());
    }

    #[test]
    fn adaptive_handles_infinite_tails() {
        let v = integrate_to_infinity(|x| exp(-x * x), 0.0, 1e-14, 1e-13).unwrap();
        assert_relative_eq!(v, 0.5 * sqrt(PI), max_relative = 1e-12);
        let v = integrate_adaptive(sqrt, 0.0, 1.0, 1e-13, 1e-12).unwrap();
        assert_relative_eq!(v, 2.0 / 3.0, max_relative = 1e-11);
    }

    #[test]
    fn product_grid_flattens_row_major() {
        let a = QuadratureGrid::midpoint(1.0, 8).unwrap();
        let b = QuadratureGrid::midpoint(2.0, 8).unwrap();
        let p = ProductGrid::new(vec![a.clone(), b.clone()]);
        let mut x = [0.0; 2];
        let w = p.point(9, &mut x);
        assert_eq!(x, [a.nodes[1], b.nodes[1]]);
        assert_relative_eq!(w, a.weights[1] * b.weights[1]);
        assert_relative_eq!(p.weights().iter().sum::<f64>(), 8.0, max_relative = 1e-13);
    }

    #[test]
    fn graded_rule_integrates_log_singularity() {
        let g = QuadratureGrid::graded(1.0, 1e-8, 2.0, 10).unwrap();
        assert_relative_eq!(g.integrate(crate::math::ln), -1.0, max_relative = 1e-9);
    }
}
