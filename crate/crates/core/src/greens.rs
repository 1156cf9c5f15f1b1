//! Free Green's functions of `−Δ + z` on ℝ^d and their basic properties.
//!
//! `G^d_z(x) = ∫₀^∞ (4πt)^{−d/2} exp(−|x|²/4t − zt) dt`. Dimensions 1 and 3
//! have elementary closed forms; every dimension can be evaluated by a
//! log-substituted quadrature of the heat-kernel integral.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::math::{abs, exp, ln, norm, powf, sqrt, unit_sphere_area, PI};
use crate::quadrature::QuadratureGrid;

/// Radius below which `d ≥ 2` evaluations are refused.
pub const SINGULAR_RADIUS: f64 = 1e-8;

/// Dimension and spectral parameter of a Green's function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GreenParams {
    pub d: u32,
    pub z: Complex64,
}

impl GreenParams {
    pub fn new(d: u32, z: f64) -> Result<Self> {
        Self::complex(d, Complex64::new(z, 0.0))
    }

    /// Complex spectral parameter; only evaluation is supported for these.
    pub fn complex(d: u32, z: Complex64) -> Result<Self> {
        if !(1..=4).contains(&d) {
            return Err(Error::domain(alloc::format!("dimension {d} outside 1..=4")));
        }
        if !(z.re > 0.0) || !z.im.is_finite() {
            return Err(Error::domain(alloc::format!("Re z must be positive, got {z}")));
        }
        Ok(Self { d, z })
    }

    pub fn is_real(&self) -> bool {
        self.z.im == 0.0
    }

    fn real_z(&self) -> Result<f64> {
        if self.is_real() {
            Ok(self.z.re)
        } else {
            Err(Error::domain("real spectral parameter required"))
        }
    }
}

/// Variable transformation applied to the heat-kernel integral.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Transform {
    /// `t = e^u`, trapezoid rule in `u`.
    LogSubstitution,
    /// `t = e^u`, composite Gauss–Legendre panels in `u`.
    GaussType,
}

/// Truncation and resolution of the heat-kernel quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadSpec {
    pub t_max: f64,
    pub nodes: usize,
    pub transform: Transform,
    /// Relative agreement demanded between successive refinements.
    pub tol: f64,
}

impl QuadSpec {
    /// Spec whose truncation tail `e^{−Re z·t_max}` is below `tol`.
    pub fn for_tolerance(re_z: f64, tol: f64) -> Self {
        let t_max = (-ln(tol.min(0.5) * 1e-6)) / re_z;
        Self {
            t_max,
            nodes: 64,
            transform: Transform::LogSubstitution,
            tol,
        }
    }

    pub fn validate(&self, re_z: f64) -> Result<()> {
        if self.nodes < 16 {
            return Err(Error::domain(alloc::format!(
                "quadrature needs at least 16 nodes, got {}",
                self.nodes
            )));
        }
        if !(self.t_max > 0.0) || !(self.tol > 0.0) {
            return Err(Error::domain("t_max and tolerance must be positive"));
        }
        let tail = exp(-re_z * self.t_max);
        if tail >= self.tol {
            return Err(Error::TruncationTooSmall { tail, tol: self.tol });
        }
        Ok(())
    }
}

impl Default for QuadSpec {
    fn default() -> Self {
        Self {
            t_max: f64::INFINITY,
            nodes: 64,
            transform: Transform::LogSubstitution,
            tol: 1e-12,
        }
    }
}

/// Closed form for `d ∈ {1, 3}` and real `z`.
pub fn green_closed(params: &GreenParams, x: &[f64]) -> Result<f64> {
    check_point(params, x)?;
    closed_radial(params.d, params.real_z()?, norm(x))
}

/// Closed form for `d ∈ {1, 3}` and complex `z` (principal square root).
pub fn green_closed_complex(params: &GreenParams, x: &[f64]) -> Result<Complex64> {
    check_point(params, x)?;
    let r = norm(x);
    let k = params.z.sqrt();
    match params.d {
        1 => Ok((-k * r).exp() / (2.0 * k)),
        3 => {
            if r < SINGULAR_RADIUS {
                return Err(Error::SingularPoint { norm: r });
            }
            Ok((-k * r).exp() / (4.0 * PI * r))
        }
        d => Err(Error::domain(alloc::format!("no closed form in dimension {d}"))),
    }
}

/// Closed form as a function of the radius.
pub fn closed_radial(d: u32, z: f64, r: f64) -> Result<f64> {
    if !(z > 0.0) {
        return Err(Error::domain(alloc::format!("z must be positive, got {z}")));
    }
    let k = sqrt(z);
    match d {
        1 => Ok(exp(-k * r) / (2.0 * k)),
        3 => {
            if r < SINGULAR_RADIUS {
                return Err(Error::SingularPoint { norm: r });
            }
            Ok(exp(-k * r) / (4.0 * PI * r))
        }
        _ => Err(Error::domain(alloc::format!("no closed form in dimension {d}"))),
    }
}

fn check_point(params: &GreenParams, x: &[f64]) -> Result<()> {
    if x.len() != params.d as usize {
        return Err(Error::DimensionMismatch(alloc::format!(
            "point of length {} in dimension {}",
            x.len(),
            params.d
        )));
    }
    Ok(())
}

/// Quadrature of the heat-kernel representation.
pub fn green_quad(params: &GreenParams, x: &[f64], spec: &QuadSpec) -> Result<f64> {
    check_point(params, x)?;
    let z = params.real_z()?;
    spec.validate(z)?;
    heat_integral(params.d, z, norm(x), spec)
}

/// Quadrature for complex `z`.
pub fn green_quad_complex(params: &GreenParams, x: &[f64], spec: &QuadSpec) -> Result<Complex64> {
    check_point(params, x)?;
    spec.validate(params.z.re)?;
    heat_integral_complex(params.d, params.z, norm(x), spec)
}

/// `G^d_z(r)` for any `d ≥ 1` by quadrature; used internally for `d` up to 6.
pub fn heat_integral(d: u32, z: f64, r: f64, spec: &QuadSpec) -> Result<f64> {
    let v = heat_integral_complex(d, Complex64::new(z, 0.0), r, spec)?;
    Ok(v.re)
}

fn heat_integral_complex(d: u32, z: Complex64, r: f64, spec: &QuadSpec) -> Result<Complex64> {
    if !(z.re > 0.0) {
        return Err(Error::domain("Re z must be positive"));
    }
    if d >= 2 && r < SINGULAR_RADIUS {
        return Err(Error::SingularPoint { norm: r });
    }
    let a = 0.25 * r * r;
    let p = 1.0 - 0.5 * d as f64;
    let zr = z.norm();
    // saddle of (1 − d/2)u − a e^{−u} − |z| e^{u}
    let disc = sqrt(p * p + 4.0 * zr * a);
    let y0 = if p >= 0.0 {
        (p + disc) / (2.0 * zr)
    } else {
        2.0 * a / (disc - p)
    };
    let u0 = ln(y0);
    let curvature = a / y0 + zr * y0;
    let sigma = 1.0 / sqrt(curvature);
    let log_f = |u: f64| p * u - a * exp(-u) - z.re * exp(u);
    let peak = log_f(u0);
    let drop = 46.0;
    let mut lo = u0;
    let mut step = sigma.max(0.05);
    while log_f(lo) > peak - drop {
        lo -= step;
        step *= 1.2;
    }
    let mut hi = u0;
    step = sigma.max(0.05);
    while log_f(hi) > peak - drop {
        hi += step;
        step *= 1.2;
    }
    if spec.t_max.is_finite() {
        hi = hi.min(ln(spec.t_max));
    }
    if !(hi > lo) {
        return Err(Error::TruncationTooSmall {
            tail: 1.0,
            tol: spec.tol,
        });
    }
    let prefactor = powf(4.0 * PI, -0.5 * d as f64);
    let integrand = |u: f64| -> Complex64 {
        let t = exp(u);
        let e = Complex64::new(p * u - a / t, 0.0) - z * t;
        e.exp() * prefactor
    };
    match spec.transform {
        Transform::LogSubstitution => {
            let h0 = (0.1f64).min(0.4 * sigma).min((hi - lo) / spec.nodes as f64);
            let mut n = ((hi - lo) / h0).ceil() as usize;
            let mut h = (hi - lo) / n as f64;
            let mut sum = Complex64::new(0.0, 0.0);
            for i in 0..=n {
                let w = if i == 0 || i == n { 0.5 } else { 1.0 };
                sum += integrand(lo + i as f64 * h) * w;
            }
            let mut prev = sum * h;
            for _ in 0..10 {
                let mut mid = Complex64::new(0.0, 0.0);
                for i in 0..n {
                    mid += integrand(lo + (i as f64 + 0.5) * h);
                }
                sum += mid;
                n *= 2;
                h *= 0.5;
                let cur = sum * h;
                if (cur - prev).norm() <= spec.tol * cur.norm().max(f64::MIN_POSITIVE) {
                    return Ok(cur);
                }
                prev = cur;
            }
            Err(Error::QuadratureNonConvergence {
                delta: (prev - sum * h).norm(),
                tol: spec.tol,
            })
        }
        Transform::GaussType => {
            let per_panel = 16;
            let mut panels = (spec.nodes / per_panel).max(((hi - lo) / sigma).ceil() as usize).max(4);
            let eval = |m: usize| -> Result<Complex64> {
                let width = (hi - lo) / m as f64;
                let breaks: Vec<f64> = (0..=m).map(|i| lo + i as f64 * width).collect();
                let g = QuadratureGrid::composite_gauss(&breaks, per_panel)?;
                Ok(g
                    .nodes
                    .iter()
                    .zip(&g.weights)
                    .map(|(u, w)| integrand(*u) * *w)
                    .sum())
            };
            let mut prev = eval(panels)?;
            for _ in 0..8 {
                panels *= 2;
                let cur = eval(panels)?;
                if (cur - prev).norm() <= spec.tol * cur.norm().max(f64::MIN_POSITIVE) {
                    return Ok(cur);
                }
                prev = cur;
            }
            Err(Error::QuadratureNonConvergence {
                delta: f64::NAN,
                tol: spec.tol,
            })
        }
    }
}

/// `G^d_z` at radius `r` by the cheapest exact route (closed form when one exists).
pub fn green_radial(d: u32, z: f64, r: f64) -> Result<f64> {
    match d {
        1 | 3 => closed_radial(d, z, r),
        _ => heat_integral(d, z, r, &QuadSpec::default()),
    }
}

/// Marginal `∫_{ℝ^{d−d1}} G^d_z(x1, x2) dx2` by radial reduction on the
/// given radial grid over `[0, ρ_max]`.
pub fn green_partial_integral(
    d: u32,
    d1: u32,
    z: f64,
    x1: &[f64],
    radial: &QuadratureGrid,
) -> Result<f64> {
    if d1 == 0 || d1 >= d || d > 4 {
        return Err(Error::domain(alloc::format!("need 1 ≤ d1 < d ≤ 4, got d={d}, d1={d1}")));
    }
    if x1.len() != d1 as usize {
        return Err(Error::DimensionMismatch("x1 has the wrong length".into()));
    }
    let r1 = norm(x1);
    if r1 == 0.0 && d1 > 1 {
        return Err(Error::SingularPoint { norm: 0.0 });
    }
    let d2 = d - d1;
    let table = RadialGreen::new(d, z, 1e-7, radial.hi.max(r1) * 1.5 + 1.0, 3000)?;
    let sphere = unit_sphere_area(d2);
    let mut total = 0.0;
    for (rho, w) in radial.nodes.iter().zip(&radial.weights) {
        let r = sqrt(r1 * r1 + rho * rho);
        total += w * powf(*rho, (d2 - 1) as f64) * table.eval(r)?;
    }
    let rho_max = radial.hi;
    let edge = sqrt(r1 * r1 + rho_max * rho_max);
    let tail = sphere * powf(rho_max, (d2 - 1) as f64) * table.eval(edge)? * (1.0 + 1.0 / sqrt(z));
    let value = sphere * total;
    let tol = 1e-9 * value.max(1e-300) + 1e-14;
    if tail > tol {
        return Err(Error::TruncationTooSmall { tail, tol });
    }
    Ok(value)
}

/// Radial grid suited to [`green_partial_integral`]: graded towards 0 and
/// long enough for the exponential tail at spectral parameter `z`.
pub fn marginal_grid(z: f64) -> Result<QuadratureGrid> {
    QuadratureGrid::graded(40.0 / sqrt(z) + 5.0, 1e-5, 1.5, 16)
}

/// Constant `max(λ^{−3/4}, (16λ)^{−1/4})` of the one-dimensional shift bound.
pub fn green_shift_const(lambda: f64) -> Result<f64> {
    if !(lambda > 0.0) {
        return Err(Error::domain(alloc::format!("λ must be positive, got {lambda}")));
    }
    Ok(powf(lambda, -0.75).max(powf(16.0 * lambda, -0.25)))
}

/// `(‖G_λ(·+x) − G_λ‖₂, C(λ)·min(1,|x|))` with the norm on the given grid.
pub fn check_shift_l2(lambda: f64, x: f64, grid: &QuadratureGrid) -> Result<(f64, f64)> {
    let c = green_shift_const(lambda)?;
    if x != 0.0 && abs(x) < grid.spacing() {
        return Err(Error::GridResolution(alloc::format!(
            "shift {x} is below the grid spacing {}",
            grid.spacing()
        )));
    }
    let mut acc = 0.0;
    for (y, w) in grid.nodes.iter().zip(&grid.weights) {
        let diff = closed_radial(1, lambda, abs(y + x))? - closed_radial(1, lambda, abs(*y))?;
        acc += w * diff * diff;
    }
    Ok((sqrt(acc), c * abs(x).min(1.0)))
}

/// Outcome of the L¹ shift-difference check in ℝ^{d−1}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HolderShift {
    pub lhs: f64,
    /// `(1 + |ln|y||)·|y|`.
    pub log_form: f64,
    /// `|y|^s`.
    pub power_form: f64,
}

/// `∫_{ℝ^{d−1}} |G^d_z(x+y, 0) − G^d_z(x, 0)| dx` by a reduction to the
/// coordinate along `y` and the radius orthogonal to it. `per_panel` sets
/// the Gauss order of every graded panel.
pub fn check_holder_shift_l1(
    d: u32,
    z: f64,
    y: &[f64],
    s: f64,
    per_panel: usize,
) -> Result<HolderShift> {
    if !(2..=4).contains(&d) {
        return Err(Error::domain(alloc::format!("dimension {d} outside 2..=4")));
    }
    if y.len() != (d - 1) as usize {
        return Err(Error::DimensionMismatch("shift has the wrong length".into()));
    }
    if !(s > 0.0 && s < 1.0) || !(z > 0.0) {
        return Err(Error::domain("need 0 < s < 1 and z > 0"));
    }
    let b = norm(y);
    if b == 0.0 {
        return Ok(HolderShift {
            lhs: 0.0,
            log_form: 0.0,
            power_form: 0.0,
        });
    }
    let m = d - 1;
    let reach = 45.0 / sqrt(z);
    let t_breaks = graded_breaks(-b - reach, reach, &[-b, -0.5 * b, 0.0], 1e-6 * b.min(1.0), 1.6);
    let t_grid = QuadratureGrid::composite_gauss(&t_breaks, per_panel)?;
    let table = RadialGreen::new(d, z, 2.0 * SINGULAR_RADIUS, 2.0 * reach + b + 1.0, 4000)?;
    let g = |r: f64| table.eval(r.max(table.r_min));
    if m == 1 {
        let mut acc = 0.0;
        for (t, w) in t_grid.nodes.iter().zip(&t_grid.weights) {
            acc += w * abs(g(abs(t + b))? - g(abs(*t))?);
        }
        return Ok(finish(acc, b, s));
    }
    let rho_breaks = graded_breaks(0.0, reach, &[0.0], 1e-6 * b.min(1.0), 1.6);
    let rho_grid = QuadratureGrid::composite_gauss(&rho_breaks, per_panel)?;
    let sphere = unit_sphere_area(m - 1);
    let mut acc = 0.0;
    for (t, wt) in t_grid.nodes.iter().zip(&t_grid.weights) {
        let mut inner = 0.0;
        for (rho, wr) in rho_grid.nodes.iter().zip(&rho_grid.weights) {
            let a = g(sqrt((t + b) * (t + b) + rho * rho))?;
            let c = g(sqrt(t * t + rho * rho))?;
            inner += wr * powf(*rho, (m - 2) as f64) * abs(a - c);
        }
        acc += wt * inner;
    }
    Ok(finish(sphere * acc, b, s))
}

fn finish(lhs: f64, b: f64, s: f64) -> HolderShift {
    HolderShift {
        lhs,
        log_form: (1.0 + abs(ln(b))) * b,
        power_form: powf(b, s),
    }
}

/// Sorted break points on `[lo, hi]` refined geometrically towards each of
/// `points`, starting at offset `smallest` and growing by `ratio`.
pub fn graded_breaks(lo: f64, hi: f64, points: &[f64], smallest: f64, ratio: f64) -> Vec<f64> {
    let mut out = vec![lo, hi];
    for &p in points {
        if p < lo || p > hi {
            continue;
        }
        out.push(p);
        let gap = points
            .iter()
            .filter(|&&q| q != p)
            .map(|q| abs(q - p))
            .fold(f64::INFINITY, f64::min);
        let limit = (0.5 * gap).min(hi - lo);
        let mut off = smallest;
        while off < limit {
            for c in [p - off, p + off] {
                if c > lo && c < hi {
                    out.push(c);
                }
            }
            off *= ratio;
        }
    }
    // fill long stretches with unit-ish panels
    out.sort_by(f64::total_cmp);
    out.dedup_by(|a, b| abs(*a - *b) < 1e-15 * (1.0 + abs(*b)));
    let mut filled = Vec::with_capacity(out.len());
    for w in out.windows(2) {
        filled.push(w[0]);
        let span = w[1] - w[0];
        let k = (span / 1.0).ceil() as usize;
        for j in 1..k {
            filled.push(w[0] + span * j as f64 / k as f64);
        }
    }
    filled.push(out[out.len() - 1]);
    filled
}

/// Tabulated radial profile `r ↦ G^d_z(r)` for fast repeated evaluation.
///
/// Stores `ln G` on a uniform grid in `ln r` together with its exact
/// derivative from `∂_r G^d = −2πr G^{d+2}` and interpolates with cubic
/// Hermite polynomials. Beyond `r_max` the profile is treated as zero.
#[derive(Debug, Clone)]
pub struct RadialGreen {
    pub d: u32,
    pub z: f64,
    pub r_min: f64,
    pub r_max: f64,
    log_r0: f64,
    step: f64,
    log_g: Vec<f64>,
    slope: Vec<f64>,
}

impl RadialGreen {
    pub fn new(d: u32, z: f64, r_min: f64, r_max: f64, n: usize) -> Result<Self> {
        if !(z > 0.0) || !(r_max > r_min) || !(r_min > 0.0) || n < 16 {
            return Err(Error::domain("invalid radial table parameters"));
        }
        let spec = QuadSpec::default();
        let log_r0 = ln(r_min);
        let step = (ln(r_max) - log_r0) / (n - 1) as f64;
        let mut log_g = Vec::with_capacity(n);
        let mut slope = Vec::with_capacity(n);
        for i in 0..n {
            let r = exp(log_r0 + i as f64 * step).max(r_min);
            let g = value_any(d, z, r, &spec)?;
            let g2 = value_any(d + 2, z, r, &spec)?;
            log_g.push(ln(g));
            slope.push(-2.0 * PI * r * r * g2 / g);
        }
        Ok(Self {
            d,
            z,
            r_min,
            r_max,
            log_r0,
            step,
            log_g,
            slope,
        })
    }

    /// Default table for spectral parameter `z`: radii `[1e-8, 60/√z]`.
    pub fn standard(d: u32, z: f64) -> Result<Self> {
        Self::new(d, z, SINGULAR_RADIUS, 60.0 / sqrt(z) + 1.0, 1600)
    }

    pub fn eval(&self, r: f64) -> Result<f64> {
        if r < self.r_min {
            return Err(Error::SingularPoint { norm: r });
        }
        if r >= self.r_max {
            return Ok(0.0);
        }
        let x = (ln(r) - self.log_r0) / self.step;
        let i = (x as usize).min(self.log_g.len() - 2);
        let t = x - i as f64;
        let h = self.step;
        let (p0, p1) = (self.log_g[i], self.log_g[i + 1]);
        let (m0, m1) = (self.slope[i] * h, self.slope[i + 1] * h);
        let t2 = t * t;
        let t3 = t2 * t;
        let v = (2.0 * t3 - 3.0 * t2 + 1.0) * p0
            + (t3 - 2.0 * t2 + t) * m0
            + (-2.0 * t3 + 3.0 * t2) * p1
            + (t3 - t2) * m1;
        Ok(exp(v))
    }
}

fn value_any(d: u32, z: f64, r: f64, spec: &QuadSpec) -> Result<f64> {
    match d {
        1 | 3 => closed_radial(d, z, r),
        5 => {
            // G^5 = −(2πr)^{-1} ∂_r G^3
            let k = sqrt(z);
            Ok(exp(-k * r) * (1.0 + k * r) / (8.0 * PI * PI * r * r * r))
        }
        _ => heat_integral(d, z, r, spec),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn closed_forms_at_the_origin() {
        let p = GreenParams::new(1, 1.0).unwrap();
        assert_relative_eq!(green_closed(&p, &[0.0]).unwrap(), 0.5, max_relative = 1e-15);
        let p = GreenParams::new(1, 4.0).unwrap();
        assert_relative_eq!(green_closed(&p, &[0.0]).unwrap(), 0.25, max_relative = 1e-15);
        let p = GreenParams::new(3, 1.0).unwrap();
        assert!(matches!(green_closed(&p, &[0.0; 3]), Err(Error::SingularPoint { .. })));
        assert!(GreenParams::new(1, 0.0).is_err());
        assert!(GreenParams::new(5, 1.0).is_err());
    }

    #[test]
    fn both_transforms_reproduce_the_closed_forms() {
        for transform in [Transform::LogSubstitution, Transform::GaussType] {
            let spec = QuadSpec {
                transform,
                ..QuadSpec::default()
            };
            for (d, x) in [(1u32, vec![0.0]), (1, vec![2.5]), (3, vec![0.3, -0.4, 1.2])] {
                let p = GreenParams::new(d, 1.7).unwrap();
                let q = green_quad(&p, &x, &spec).unwrap();
                let c = green_closed(&p, &x).unwrap();
                assert_relative_eq!(q, c, max_relative = 1e-11);
            }
        }
    }

    #[test]
    fn complex_quadrature_matches_complex_closed_form() {
        let p = GreenParams::complex(3, Complex64::new(2.0, 1.5)).unwrap();
        let x = [0.7, 0.1, 0.0];
        let q = green_quad_complex(&p, &x, &QuadSpec::default()).unwrap();
        let c = green_closed_complex(&p, &x).unwrap();
        assert!((q - c).norm() < 1e-11 * c.norm());
    }

    #[test]
    fn truncation_tail_is_validated() {
        let spec = QuadSpec {
            t_max: 3.0,
            ..QuadSpec::default()
        };
        let p = GreenParams::new(1, 1.0).unwrap();
        assert!(matches!(green_quad(&p, &[0.0], &spec), Err(Error::TruncationTooSmall { .. })));
        let spec = QuadSpec::for_tolerance(1.0, 1e-12);
        assert_relative_eq!(green_quad(&p, &[0.0], &spec).unwrap(), 0.5, max_relative = 1e-11);
    }

    #[test]
    fn shift_constant_examples() {
        assert_relative_eq!(green_shift_const(1.0).unwrap(), 1.0);
        assert_relative_eq!(green_shift_const(16.0).unwrap(), 0.25, max_relative = 1e-15);
        assert_relative_eq!(green_shift_const(1.0 / 16.0).unwrap(), 8.0, max_relative = 1e-14);
        assert!(green_shift_const(0.0).is_err());
    }

    #[test]
    fn radial_table_tracks_closed_form() {
        let t = RadialGreen::standard(3, 2.0).unwrap();
        for r in [1e-6, 1e-3, 0.2, 1.0, 7.5, 30.0] {
            assert_relative_eq!(t.eval(r).unwrap(), closed_radial(3, 2.0, r).unwrap(), max_relative = 1e-8);
        }
    }
}
