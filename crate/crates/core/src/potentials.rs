//! Even two-body potentials, their rescalings `ε^{−1}V(r/ε)`, cutoffs,
//! factorizations `V = v·u` and moments.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math::{abs, erf, exp, lgamma, powf, sin, sqrt, PI};
use crate::quadrature::{integrate_adaptive, integrate_to_infinity};

/// Unscaled profile of a potential.
#[derive(Debug, Clone, PartialEq)]
pub enum Shape {
    Zero,
    /// `height` on `[−half_width, half_width]`.
    Box { height: f64, half_width: f64 },
    /// `height·(1 − |r|/half_width)₊`.
    Triangle { height: f64, half_width: f64 },
    /// `amplitude·e^{−rate·|r|}`.
    Exponential { amplitude: f64, rate: f64 },
    /// `amplitude·e^{−r²/width²}`.
    Gaussian { amplitude: f64, width: f64 },
    /// `amplitude·cos(πr/half_width)` on `[−half_width, half_width]`; integrates to zero.
    CosineBox { amplitude: f64, half_width: f64 },
    /// `amplitude·(1 + |r|)^{−power}`.
    HeavyTail { amplitude: f64, power: f64 },
    /// Samples `(r, V(r))`, symmetrized as `½(f(r) + f(−r))` and linearly
    /// interpolated; zero outside the sampled range.
    Table { r: Vec<f64>, v: Vec<f64> },
}

impl Shape {
    pub fn unit_box() -> Self {
        Shape::Box {
            height: 1.0,
            half_width: 0.5,
        }
    }

    fn validate(&self) -> Result<()> {
        let positive = |x: f64, what: &str| {
            if x > 0.0 && x.is_finite() {
                Ok(())
            } else {
                Err(Error::domain(alloc::format!("{what} must be positive, got {x}")))
            }
        };
        let finite = |x: f64| {
            if x.is_finite() {
                Ok(())
            } else {
                Err(Error::domain("potential parameters must be finite"))
            }
        };
        match self {
            Shape::Zero => Ok(()),
            Shape::Box { height, half_width }
            | Shape::Triangle { height, half_width }
            | Shape::CosineBox {
                amplitude: height,
                half_width,
            } => {
                finite(*height)?;
                positive(*half_width, "half-width")
            }
            Shape::Exponential { amplitude, rate } => {
                finite(*amplitude)?;
                positive(*rate, "rate")
            }
            Shape::Gaussian { amplitude, width } => {
                finite(*amplitude)?;
                positive(*width, "width")
            }
            Shape::HeavyTail { amplitude, power } => {
                finite(*amplitude)?;
                if *power <= 1.0 {
                    return Err(Error::Divergent(alloc::format!(
                        "(1+|r|)^(-{power}) is not integrable"
                    )));
                }
                Ok(())
            }
            Shape::Table { r, v } => {
                if r.len() != v.len() || r.len() < 2 {
                    return Err(Error::DimensionMismatch("sample table needs ≥ 2 (r, V) pairs".into()));
                }
                if r.windows(2).any(|w| !(w[1] > w[0])) {
                    return Err(Error::domain("sample abscissae must be strictly increasing"));
                }
                if v.iter().chain(r).any(|x| !x.is_finite()) {
                    return Err(Error::domain("sample table contains non-finite values"));
                }
                Ok(())
            }
        }
    }

    pub fn eval(&self, r: f64) -> f64 {
        let a = abs(r);
        match self {
            Shape::Zero => 0.0,
            Shape::Box { height, half_width } => {
                if a <= *half_width {
                    *height
                } else {
                    0.0
                }
            }
            Shape::Triangle { height, half_width } => height * (1.0 - a / half_width).max(0.0),
            Shape::Exponential { amplitude, rate } => amplitude * exp(-rate * a),
            Shape::Gaussian { amplitude, width } => amplitude * exp(-(r / width) * (r / width)),
            Shape::CosineBox {
                amplitude,
                half_width,
            } => {
                if a <= *half_width {
                    amplitude * crate::math::cos(PI * r / half_width)
                } else {
                    0.0
                }
            }
            Shape::HeavyTail { amplitude, power } => amplitude * powf(1.0 + a, -power),
            Shape::Table { r: xs, v } => 0.5 * (interp(xs, v, r) + interp(xs, v, -r)),
        }
    }

    /// Radius of the support; infinite for non-compact shapes.
    pub fn support_radius(&self) -> f64 {
        match self {
            Shape::Zero => 0.0,
            Shape::Box { half_width, .. }
            | Shape::Triangle { half_width, .. }
            | Shape::CosineBox { half_width, .. } => *half_width,
            Shape::Table { r, .. } => abs(r[0]).max(abs(r[r.len() - 1])),
            _ => f64::INFINITY,
        }
    }

    /// Points where the profile is not smooth (besides the origin).
    fn kinks(&self) -> Vec<f64> {
        match self {
            Shape::Box { half_width, .. } | Shape::Triangle { half_width, .. } => {
                alloc::vec![-half_width, *half_width]
            }
            Shape::CosineBox { half_width, .. } => {
                alloc::vec![-half_width, -0.5 * half_width, 0.5 * half_width, *half_width]
            }
            Shape::Table { r, .. } => {
                let mut k: Vec<f64> = r.iter().flat_map(|x| [*x, -*x]).collect();
                k.sort_by(f64::total_cmp);
                k.dedup();
                k
            }
            _ => Vec::new(),
        }
    }

    /// `∫_0^x` of the profile (signed, or of its absolute value).
    fn primitive(&self, x: f64, absolute: bool) -> f64 {
        let s = crate::math::signum(x);
        let a = abs(x);
        match self {
            Shape::Zero => 0.0,
            Shape::Box { height, half_width } => {
                let h = if absolute { abs(*height) } else { *height };
                h * x.clamp(-half_width, *half_width)
            }
            Shape::Triangle { height, half_width } => {
                let h = if absolute { abs(*height) } else { *height };
                let c = x.clamp(-half_width, *half_width);
                h * (c - c * abs(c) / (2.0 * half_width))
            }
            Shape::Exponential { amplitude, rate } => {
                let h = if absolute { abs(*amplitude) } else { *amplitude };
                h * s * (-crate::math::expm1(-rate * a)) / rate
            }
            Shape::Gaussian { amplitude, width } => {
                let h = if absolute { abs(*amplitude) } else { *amplitude };
                h * width * sqrt(PI) * 0.5 * erf(x / width)
            }
            Shape::CosineBox {
                amplitude,
                half_width,
            } => {
                let c = x.clamp(-half_width, *half_width);
                let theta = PI * c / half_width;
                let scale = half_width / PI;
                if absolute {
                    let g = if theta > 0.5 * PI {
                        2.0 - sin(theta)
                    } else if theta < -0.5 * PI {
                        -2.0 - sin(theta)
                    } else {
                        sin(theta)
                    };
                    abs(*amplitude) * scale * g
                } else {
                    amplitude * scale * sin(theta)
                }
            }
            Shape::HeavyTail { amplitude, power } => {
                let h = if absolute { abs(*amplitude) } else { *amplitude };
                h * s * (1.0 - powf(1.0 + a, 1.0 - power)) / (power - 1.0)
            }
            Shape::Table { .. } => {
                let knots = self.kinks();
                let reach = self.support_radius();
                piecewise_linear_integral(&knots, |r| self.eval(r), 0.0, x.clamp(-reach, reach), absolute)
            }
        }
    }
}

fn interp(xs: &[f64], vs: &[f64], r: f64) -> f64 {
    if r < xs[0] || r > xs[xs.len() - 1] {
        return 0.0;
    }
    let i = match xs.binary_search_by(|p| p.total_cmp(&r)) {
        Ok(i) => return vs[i],
        Err(i) => i,
    };
    let (x0, x1) = (xs[i - 1], xs[i]);
    let t = (r - x0) / (x1 - x0);
    vs[i - 1] * (1.0 - t) + vs[i] * t
}

/// Exact integral of a function that is linear between `knots` (and zero
/// outside them) over `[a, b]`, optionally of its absolute value.
fn piecewise_linear_integral(knots: &[f64], f: impl Fn(f64) -> f64, a: f64, b: f64, absolute: bool) -> f64 {
    if a == b {
        return 0.0;
    }
    if b < a {
        return -piecewise_linear_integral(knots, f, b, a, absolute);
    }
    let mut pts: Vec<f64> = knots.iter().cloned().filter(|k| *k > a && *k < b).collect();
    pts.insert(0, a);
    pts.push(b);
    let mut total = 0.0;
    for w in pts.windows(2) {
        let (x0, x1) = (w[0], w[1]);
        // evaluate just inside the segment to respect jumps at knots
        let eps = 1e-15 * (1.0 + abs(x0) + abs(x1));
        let (f0, f1) = (f(x0 + eps), f(x1 - eps));
        let len = x1 - x0;
        if !absolute || f0 * f1 >= 0.0 {
            let v = 0.5 * (f0 + f1) * len;
            total += if absolute { abs(v) } else { v };
        } else {
            let root = len * abs(f0) / (abs(f0) + abs(f1));
            total += 0.5 * abs(f0) * root + 0.5 * abs(f1) * (len - root);
        }
    }
    total
}

/// Even potential `V_ε(r) = ε^{−1}·shape(r/ε)`, optionally cut off at `|r| ≤ k`.
#[derive(Debug, Clone, PartialEq)]
pub struct Potential {
    shape: Shape,
    eps: f64,
    cutoff: Option<f64>,
    l1: f64,
    l2: f64,
    integral: f64,
}

impl Potential {
    pub fn new(shape: Shape) -> Result<Self> {
        shape.validate()?;
        Self::assemble(shape, 1.0, None)
    }

    pub fn unit_box() -> Self {
        Self::new(Shape::unit_box()).expect("unit box is valid")
    }

    pub fn zero() -> Self {
        Self::new(Shape::Zero).expect("zero potential is valid")
    }

    fn assemble(shape: Shape, eps: f64, cutoff: Option<f64>) -> Result<Self> {
        let mut p = Self {
            shape,
            eps,
            cutoff,
            l1: 0.0,
            l2: 0.0,
            integral: 0.0,
        };
        p.l1 = p.abs_integral(f64::NEG_INFINITY, f64::INFINITY);
        p.integral = p.signed_integral(f64::NEG_INFINITY, f64::INFINITY);
        p.l2 = sqrt(p.quad_even(|v, _| v * v)?);
        if !p.l1.is_finite() || !p.l2.is_finite() {
            return Err(Error::Divergent("potential is not in L¹ ∩ L²".into()));
        }
        Ok(p)
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    /// Current length scale ε.
    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn cutoff_radius(&self) -> Option<f64> {
        self.cutoff
    }

    pub fn eval(&self, r: f64) -> f64 {
        if let Some(k) = self.cutoff {
            if abs(r) > k {
                return 0.0;
            }
        }
        self.shape.eval(r / self.eps) / self.eps
    }

    pub fn support_radius(&self) -> f64 {
        let s = self.shape.support_radius() * self.eps;
        match self.cutoff {
            Some(k) => s.min(k),
            None => s,
        }
    }

    /// Radius beyond which `∫|V|` is below `tol·‖V‖₁`.
    pub fn effective_radius(&self, tol: f64) -> f64 {
        let s = self.support_radius();
        if s.is_finite() {
            return s;
        }
        let total = self.l1.max(f64::MIN_POSITIVE);
        let mut r = self.eps;
        while self.abs_integral(r, f64::INFINITY) > tol * total && r < 1e12 {
            r *= 1.5;
        }
        r
    }

    pub fn l1_norm(&self) -> f64 {
        self.l1
    }

    pub fn l2_norm(&self) -> f64 {
        self.l2
    }

    /// `∫V`.
    pub fn integral(&self) -> f64 {
        self.integral
    }

    /// Exact `∫_a^b V`.
    pub fn signed_integral(&self, a: f64, b: f64) -> f64 {
        let (a, b) = self.clip(a, b);
        if b <= a {
            return 0.0;
        }
        self.shape.primitive(b / self.eps, false) - self.shape.primitive(a / self.eps, false)
    }

    /// Exact `∫_a^b |V|`.
    pub fn abs_integral(&self, a: f64, b: f64) -> f64 {
        let (a, b) = self.clip(a, b);
        if b <= a {
            return 0.0;
        }
        self.shape.primitive(b / self.eps, true) - self.shape.primitive(a / self.eps, true)
    }

    /// Average of `V` over the cell `[a, b]`.
    pub fn cell_average(&self, a: f64, b: f64) -> f64 {
        self.signed_integral(a, b) / (b - a)
    }

    fn clip(&self, a: f64, b: f64) -> (f64, f64) {
        match self.cutoff {
            Some(k) => (a.max(-k), b.min(k)),
            None => (a, b),
        }
    }

    /// `2∫_0^∞ f(V(r), r) dr` by adaptive quadrature split at the kinks.
    fn quad_even(&self, f: impl Fn(f64, f64) -> f64) -> Result<f64> {
        let g = |r: f64| f(self.eval(r), r);
        let mut knots: Vec<f64> = self
            .shape
            .kinks()
            .into_iter()
            .map(|k| k * self.eps)
            .filter(|k| *k > 0.0)
            .collect();
        if let Some(k) = self.cutoff {
            knots.push(k);
        }
        let s = self.support_radius();
        knots.retain(|k| *k < s);
        knots.sort_by(f64::total_cmp);
        knots.dedup();
        let mut total = 0.0;
        let mut lo = 0.0;
        for k in knots {
            total += integrate_adaptive(g, lo, k, 1e-15, 1e-13)?;
            lo = k;
        }
        total += if s.is_finite() {
            integrate_adaptive(g, lo, s, 1e-15, 1e-13)?
        } else {
            integrate_to_infinity(g, lo, 1e-15, 1e-12)?
        };
        Ok(2.0 * total)
    }

    /// `V_ε(r) = ε^{−1} V(r/ε)`; an existing cutoff radius is scaled by ε too.
    pub fn scale(&self, eps: f64) -> Result<Self> {
        if !(eps > 0.0) || !eps.is_finite() {
            return Err(Error::domain(alloc::format!("ε must be positive, got {eps}")));
        }
        let mut out = self.clone();
        out.eps = self.eps * eps;
        out.cutoff = self.cutoff.map(|k| k * eps);
        out.l2 = self.l2 / sqrt(eps);
        Ok(out)
    }

    /// `V·1_{|r| ≤ k}`.
    pub fn cutoff(&self, k: f64) -> Result<Self> {
        if !(k > 0.0) {
            return Err(Error::domain(alloc::format!("cutoff radius must be positive, got {k}")));
        }
        let k = self.cutoff.map_or(k, |c| c.min(k));
        Self::assemble(self.shape.clone(), self.eps, Some(k))
    }

    /// `‖V − V_k‖₁`, the tail mass outside `[−k, k]`.
    pub fn tail_l1(&self, k: f64) -> f64 {
        self.abs_integral(f64::NEG_INFINITY, -k) + self.abs_integral(k, f64::INFINITY)
    }

    /// `(∫|r|^{2s}|V|, ‖V‖₁ + ∫|r|^{2s}|V|)` with a divergence flag.
    pub fn moment(&self, s: f64) -> Result<Moment> {
        if !(s > 0.0 && s <= 1.0) {
            return Err(Error::domain(alloc::format!("moment order s must lie in (0, 1], got {s}")));
        }
        if let (Shape::HeavyTail { power, .. }, None) = (&self.shape, self.cutoff) {
            if *power <= 2.0 * s + 1.0 {
                return Ok(Moment {
                    m2s: f64::INFINITY,
                    i_vs: f64::INFINITY,
                    divergent: true,
                });
            }
        }
        if let (Shape::HeavyTail { amplitude, power }, None) = (&self.shape, self.cutoff) {
            // 2A∫₀^∞ ρ^{2s}(1+ρ)^{−p} dρ = 2A·B(2s+1, p−2s−1)
            let (a, b) = (2.0 * s + 1.0, power - 2.0 * s - 1.0);
            let beta = exp(lgamma(a) + lgamma(b) - lgamma(a + b));
            let m = 2.0 * abs(*amplitude) * beta * powf(self.eps, 2.0 * s);
            return Ok(Moment {
                m2s: m,
                i_vs: self.l1 + m,
                divergent: false,
            });
        }
        match self.quad_even(|v, r| powf(r, 2.0 * s) * abs(v)) {
            Ok(m) if m.is_finite() => Ok(Moment {
                m2s: m,
                i_vs: self.l1 + m,
                divergent: false,
            }),
            _ => Ok(Moment {
                m2s: f64::INFINITY,
                i_vs: f64::INFINITY,
                divergent: true,
            }),
        }
    }

    pub fn factorize(&self) -> Factorization<'_> {
        Factorization { potential: self }
    }

    /// Largest s ∈ (0, 1] with a finite |r|^{2s} moment, probed on a grid of step 0.05.
    pub fn max_moment_order(&self) -> Result<f64> {
        let mut best = 0.0;
        for k in 1..=20 {
            let s = k as f64 * 0.05;
            if self.moment(s)?.divergent {
                break;
            }
            best = s;
        }
        Ok(best)
    }
}

/// Moments `m_{2s} = ∫|r|^{2s}|V|` and `I(V, s) = ‖V‖₁ + m_{2s}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moment {
    pub m2s: f64,
    pub i_vs: f64,
    pub divergent: bool,
}

/// `v = |V|^{1/2}`, `u = sgn(V)·v` and `J = sgn(V)`.
#[derive(Debug, Clone, Copy)]
pub struct Factorization<'a> {
    potential: &'a Potential,
}

impl Factorization<'_> {
    pub fn v(&self, r: f64) -> f64 {
        sqrt(abs(self.potential.eval(r)))
    }

    pub fn u(&self, r: f64) -> f64 {
        let x = self.potential.eval(r);
        crate::math::signum(x) * sqrt(abs(x))
    }

    pub fn j(&self, r: f64) -> f64 {
        crate::math::signum(self.potential.eval(r))
    }

    pub fn potential(&self) -> &Potential {
        self.potential
    }
}

/// Coupling constants `g_ε` along the limit ε → 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CouplingSchedule {
    Constant { g: f64 },
    /// `g_ε = g + coeff·ε^{rate}`.
    Perturbed { g: f64, coeff: f64, rate: f64 },
}

impl CouplingSchedule {
    pub fn constant(g: f64) -> Self {
        CouplingSchedule::Constant { g }
    }

    pub fn perturbed(g: f64, rate: f64) -> Result<Self> {
        if !(rate > 0.0 && rate <= 1.0) {
            return Err(Error::domain(alloc::format!("schedule rate must lie in (0, 1], got {rate}")));
        }
        Ok(CouplingSchedule::Perturbed { g, coeff: 1.0, rate })
    }

    pub fn limit(&self) -> f64 {
        match *self {
            CouplingSchedule::Constant { g } | CouplingSchedule::Perturbed { g, .. } => g,
        }
    }

    pub fn at(&self, eps: f64) -> f64 {
        match *self {
            CouplingSchedule::Constant { g } => g,
            CouplingSchedule::Perturbed { g, coeff, rate } => g + coeff * powf(eps, rate),
        }
    }

    pub fn rate(&self) -> Option<f64> {
        match *self {
            CouplingSchedule::Constant { .. } => None,
            CouplingSchedule::Perturbed { rate, .. } => Some(rate),
        }
    }

    /// `α = g·∫V`.
    pub fn alpha(&self, v: &Potential) -> f64 {
        self.limit() * v.integral()
    }
}

/// Coupling that gives `g·∫V = alpha`.
pub fn coupling_for_alpha(v: &Potential, alpha: f64) -> Result<f64> {
    let i = v.integral();
    if abs(i) < 1e-14 * v.l1_norm().max(1e-300) {
        return Err(Error::domain("∫V vanishes; α is zero for every coupling"));
    }
    Ok(alpha / i)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn exp_pot() -> Potential {
        Potential::new(Shape::Exponential {
            amplitude: 1.0,
            rate: 1.0,
        })
        .unwrap()
    }

    #[test]
    fn scaling_preserves_l1_and_sets_height() {
        let b = Potential::unit_box();
        let h = b.scale(0.5).unwrap();
        assert_eq!(h.eval(0.2), 2.0);
        assert_eq!(h.eval(0.3), 0.0);
        assert_relative_eq!(h.support_radius(), 0.25);
        let s = b.scale(0.1).unwrap();
        assert_relative_eq!(s.l1_norm(), 1.0, max_relative = 1e-14);
        assert_relative_eq!(s.l2_norm() * s.l2_norm(), 10.0, max_relative = 1e-12);
        assert_eq!(b.scale(1.0).unwrap(), b);
        assert!(b.scale(0.0).is_err());
    }

    #[test]
    fn cutoff_examples() {
        let e = exp_pot();
        assert_relative_eq!(e.l1_norm(), 2.0, max_relative = 1e-14);
        assert_relative_eq!(e.cutoff(60.0).unwrap().l1_norm(), 2.0, max_relative = 1e-12);
        let k1 = e.cutoff(1.0).unwrap();
        assert_relative_eq!(e.l1_norm() - k1.l1_norm(), 2.0 * exp(-1.0), max_relative = 1e-13);
        assert_relative_eq!(e.tail_l1(1.0), 2.0 * exp(-1.0), max_relative = 1e-13);
        let b = Potential::unit_box();
        let bk = b.cutoff(1.0).unwrap();
        for r in [-0.7, -0.5, 0.0, 0.3, 0.5, 0.9] {
            assert_eq!(bk.eval(r), b.eval(r));
        }
        assert_relative_eq!(bk.l1_norm(), b.l1_norm());
    }

    #[test]
    fn box_moments() {
        let b = Potential::unit_box();
        assert_relative_eq!(b.moment(0.5).unwrap().m2s, 0.25, max_relative = 1e-12);
        let m = b.moment(1.0).unwrap();
        assert_relative_eq!(m.m2s, 1.0 / 12.0, max_relative = 1e-12);
        assert_relative_eq!(m.i_vs, 1.0 + 1.0 / 12.0, max_relative = 1e-12);
        let z = Potential::zero().moment(0.3).unwrap();
        assert_eq!((z.m2s, z.i_vs, z.divergent), (0.0, 0.0, false));
    }

    #[test]
    fn heavy_tail_moment_divergence_is_flagged() {
        let h = Potential::new(Shape::HeavyTail {
            amplitude: 1.0,
            power: 2.2,
        })
        .unwrap();
        let m = h.moment(0.55).unwrap();
        assert!(!m.divergent);
        // 2·B(2.1, 0.1) = 2Γ(2.1)Γ(0.1)/Γ(2.2)
        assert_relative_eq!(m.m2s, 18.071_752_864_962_65, max_relative = 1e-9);
        assert!(h.moment(0.6).unwrap().divergent);
        assert!(Potential::new(Shape::HeavyTail {
            amplitude: 1.0,
            power: 1.0
        })
        .is_err());
    }

    #[test]
    fn signed_factorization() {
        let c = Potential::new(Shape::CosineBox {
            amplitude: 1.0,
            half_width: PI,
        })
        .unwrap();
        let f = c.factorize();
        let mut worst: f64 = 0.0;
        for i in 0..=2000 {
            let r = -4.0 + 8.0 * i as f64 / 2000.0;
            worst = worst.max(abs(f.v(r) * f.u(r) - c.eval(r)));
        }
        assert!(worst < 1e-12);
        assert_eq!(f.j(1.0), 1.0);
        assert_eq!(f.j(2.0), -1.0);
        assert_relative_eq!(c.integral(), 0.0, epsilon = 1e-14);
        assert_relative_eq!(c.l1_norm(), 4.0, max_relative = 1e-13);
        let neg = Potential::new(Shape::Box {
            height: -1.0,
            half_width: 1.0,
        })
        .unwrap();
        assert_eq!((neg.factorize().v(0.5), neg.factorize().u(0.5)), (1.0, -1.0));
    }

    #[test]
    fn table_potential_is_symmetrized() {
        let t = Potential::new(Shape::Table {
            r: alloc::vec![-1.0, 0.0, 2.0],
            v: alloc::vec![0.0, 2.0, 0.0],
        })
        .unwrap();
        assert_relative_eq!(t.eval(1.0), t.eval(-1.0));
        // symmetrization keeps the integral of the height-2 hat on [-1, 2]
        assert_relative_eq!(t.integral(), 3.0, max_relative = 1e-12);
    }

    #[test]
    fn schedules() {
        let s = CouplingSchedule::perturbed(1.0, 0.5).unwrap();
        assert_relative_eq!(s.at(0.25), 1.5);
        assert_eq!(s.limit(), 1.0);
        assert_eq!(CouplingSchedule::constant(2.0).alpha(&Potential::unit_box()), 2.0);
    }
}
