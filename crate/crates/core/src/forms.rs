//! Quadratic forms of the contact interaction and of its regularizations,
//! evaluated on smooth test functions in two and three variables.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::math::{abs, cos, exp, powf, sin, sqrt, PI};
use crate::potentials::Potential;
use crate::quadrature::{gauss_legendre_unit, QuadratureGrid};

/// `coeff·exp(−|x − center|²/(2·width²))·cos(wave·x + phase)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Term {
    pub coeff: f64,
    pub center: Vec<f64>,
    pub width: f64,
    pub wave: Vec<f64>,
    pub phase: f64,
}

/// Finite sum of modulated Gaussians in `dim` variables.
#[derive(Debug, Clone, PartialEq)]
pub struct Profile {
    dim: usize,
    terms: Vec<Term>,
}

impl Profile {
    pub fn new(dim: usize, terms: Vec<Term>) -> Result<Self> {
        if !(2..=3).contains(&dim) {
            return Err(Error::domain(format!("only 2 or 3 particles are supported, got {dim}")));
        }
        for t in &terms {
            if t.center.len() != dim || t.wave.len() != dim {
                return Err(Error::DimensionMismatch("term dimension differs from profile".into()));
            }
            if !(t.width > 0.0) {
                return Err(Error::domain("term width must be positive"));
            }
        }
        Ok(Self { dim, terms })
    }

    /// `π^{−dim/4}·e^{−|x|²/2}`, normalized in `L²`.
    pub fn gaussian(dim: usize) -> Result<Self> {
        Self::new(
            dim,
            vec![Term {
                coeff: powf(PI, -(dim as f64) / 4.0),
                center: vec![0.0; dim],
                width: 1.0,
                wave: vec![0.0; dim],
                phase: 0.0,
            }],
        )
    }

    pub fn zero(dim: usize) -> Result<Self> {
        Self::new(dim, Vec::new())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn scaled(&self, s: f64) -> Self {
        let mut p = self.clone();
        p.terms.iter_mut().for_each(|t| t.coeff *= s);
        p
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|t| {
                let mut q = 0.0;
                let mut phase = t.phase;
                for k in 0..self.dim {
                    let d = x[k] - t.center[k];
                    q += d * d;
                    phase += t.wave[k] * x[k];
                }
                t.coeff * exp(-0.5 * q / (t.width * t.width)) * cos(phase)
            })
            .sum()
    }

    pub fn eval_grad(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        grad.iter_mut().for_each(|g| *g = 0.0);
        let mut value = 0.0;
        for t in &self.terms {
            let mut q = 0.0;
            let mut phase = t.phase;
            for k in 0..self.dim {
                let d = x[k] - t.center[k];
                q += d * d;
                phase += t.wave[k] * x[k];
            }
            let w2 = t.width * t.width;
            let env = t.coeff * exp(-0.5 * q / w2);
            let (c, s) = (cos(phase), sin(phase));
            value += env * c;
            for k in 0..self.dim {
                grad[k] += env * (-(x[k] - t.center[k]) / w2 * c - t.wave[k] * s);
            }
        }
        value
    }
}

/// A test function sampled with its gradient on the uniform trapezoid grid
/// `[−L, L]^N`.
#[derive(Debug, Clone)]
pub struct WaveFunction {
    profile: Profile,
    axis: QuadratureGrid,
    values: Vec<f64>,
    grads: Vec<Vec<f64>>,
}

impl WaveFunction {
    pub fn sample(profile: Profile, half_width: f64, nodes: usize) -> Result<Self> {
        let axis = QuadratureGrid::trapezoid(half_width, nodes)?;
        let n = profile.dim();
        let total = nodes.pow(n as u32);
        let mut values = vec![0.0; total];
        let mut grads = vec![vec![0.0; total]; n];
        let mut x = vec![0.0; n];
        let mut g = vec![0.0; n];
        for (k, v) in values.iter_mut().enumerate() {
            index_point(&axis.nodes, k, &mut x);
            *v = profile.eval_grad(&x, &mut g);
            for d in 0..n {
                grads[d][k] = g[d];
            }
        }
        Ok(Self {
            profile,
            axis,
            values,
            grads,
        })
    }

    /// Rescaled to unit `L²` norm (unchanged if the norm vanishes).
    pub fn normalized(self) -> Result<Self> {
        let n = sqrt(self.norm_sq());
        if n == 0.0 {
            return Ok(self);
        }
        let half = self.axis.hi;
        let m = self.axis.len();
        Self::sample(self.profile.scaled(1.0 / n), half, m)
    }

    /// Same profile on a grid with `2m − 1` nodes per axis.
    pub fn refined(&self) -> Result<Self> {
        Self::sample(self.profile.clone(), self.axis.hi, 2 * self.axis.len() - 1)
    }

    pub fn particles(&self) -> usize {
        self.profile.dim()
    }

    pub fn profile(&self) -> &Profile {
        &self.profile
    }

    pub fn axis(&self) -> &QuadratureGrid {
        &self.axis
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    fn weight(&self, k: usize) -> f64 {
        let m = self.axis.len();
        let mut k = k;
        let mut w = 1.0;
        for _ in 0..self.particles() {
            w *= self.axis.weights[k % m];
            k /= m;
        }
        w
    }

    fn weighted_sum(&self, f: impl Fn(usize) -> f64) -> f64 {
        (0..self.values.len()).map(|k| self.weight(k) * f(k)).sum()
    }

    pub fn norm_sq(&self) -> f64 {
        self.weighted_sum(|k| self.values[k] * self.values[k])
    }

    pub fn grad_norm_sq(&self) -> f64 {
        self.weighted_sum(|k| self.grads.iter().map(|g| g[k] * g[k]).sum())
    }

    pub fn h1_norm_sq(&self) -> f64 {
        self.norm_sq() + self.grad_norm_sq()
    }

    /// `‖∂_r ψ̃‖` for the relative coordinate `r = x_j − x_i`, i.e.
    /// `‖(∂_j − ∂_i)ψ‖/2`.
    pub fn relative_derivative_norm(&self, i: usize, j: usize) -> f64 {
        let (gi, gj) = (&self.grads[i], &self.grads[j]);
        0.5 * sqrt(self.weighted_sum(|k| {
            let d = gj[k] - gi[k];
            d * d
        }))
    }

    /// `F_ij(r) = ∫|ψ|²` over the plane `x_j − x_i = r`, parametrized by
    /// `x_i = R − r/2`, `x_j = R + r/2` and the remaining coordinates.
    pub fn diagonal_mass(&self, i: usize, j: usize, r: f64) -> f64 {
        let n = self.particles();
        let m = self.axis.len();
        let others = n - 2;
        let count = m.pow(others as u32 + 1);
        let mut x = vec![0.0; n];
        let mut sum = 0.0;
        for k in 0..count {
            let mut kk = k;
            let rr = kk % m;
            kk /= m;
            let mut w = self.axis.weights[rr];
            let big_r = self.axis.nodes[rr];
            x[i] = big_r - 0.5 * r;
            x[j] = big_r + 0.5 * r;
            for d in 0..n {
                if d == i || d == j {
                    continue;
                }
                let idx = kk % m;
                kk /= m;
                x[d] = self.axis.nodes[idx];
                w *= self.axis.weights[idx];
            }
            let v = self.profile.eval(&x);
            sum += w * v * v;
        }
        sum
    }

    /// Largest `|x_j − x_i|` on which `F_ij` can be nonnegligible.
    fn diagonal_reach(&self) -> f64 {
        2.0 * self.axis.hi
    }
}

fn index_point(nodes: &[f64], mut k: usize, out: &mut [f64]) {
    let m = nodes.len();
    for x in out.iter_mut() {
        *x = nodes[k % m];
        k /= m;
    }
}

fn check_pair(psi: &WaveFunction, i: usize, j: usize) -> Result<()> {
    if !(i < j && j < psi.particles()) {
        return Err(Error::domain(format!(
            "pair ({i}, {j}) invalid for {} particles",
            psi.particles()
        )));
    }
    Ok(())
}

fn pairs(n: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            out.push((i, j));
        }
    }
    out
}

/// `γ_ij ψ` on the grid of the remaining `N − 1` variables (the variable
/// `x_j` removed, the others in order).
pub fn trace_gamma(psi: &WaveFunction, i: usize, j: usize) -> Result<Vec<f64>> {
    check_pair(psi, i, j)?;
    let n = psi.particles();
    let m = psi.axis.len();
    let count = m.pow(n as u32 - 1);
    let mut out = Vec::with_capacity(count);
    let mut idx = vec![0usize; n];
    for k in 0..count {
        let mut kk = k;
        for d in 0..n {
            if d == j {
                continue;
            }
            idx[d] = kk % m;
            kk /= m;
        }
        idx[j] = idx[i];
        let mut flat = 0;
        for d in (0..n).rev() {
            flat = flat * m + idx[d];
        }
        out.push(psi.values[flat]);
    }
    Ok(out)
}

/// `‖γ_ij ψ‖²`.
pub fn trace_norm_sq(psi: &WaveFunction, i: usize, j: usize) -> Result<f64> {
    check_pair(psi, i, j)?;
    Ok(psi.diagonal_mass(i, j, 0.0))
}

/// `q(ψ) = ∫|∇ψ|² + C|ψ|² − α·Σ_{i<j}‖γ_ij ψ‖²`.
pub fn q_form(psi: &WaveFunction, alpha: f64, shift: f64) -> Result<f64> {
    let mut traces = 0.0;
    for (i, j) in pairs(psi.particles()) {
        traces += trace_norm_sq(psi, i, j)?;
    }
    Ok(psi.grad_norm_sq() + shift * psi.norm_sq() - alpha * traces)
}

/// `∫V(r)·F_ij(r) dr` for the (scaled) potential `v`.
pub fn pair_interaction(psi: &WaveFunction, v: &Potential, i: usize, j: usize) -> Result<f64> {
    check_pair(psi, i, j)?;
    let reach = psi.diagonal_reach();
    let hi = v.support_radius().min(v.effective_radius(1e-15)).min(reach);
    if hi <= 0.0 {
        return Ok(0.0);
    }
    let scale = v.effective_radius(0.5).min(hi);
    let mut breaks = vec![0.0];
    let mut b = (0.05 * scale).min(hi);
    while b < hi {
        breaks.push(b);
        b *= 2.0;
    }
    breaks.push(hi);
    let (x, w) = gauss_legendre_unit(16);
    let mut sum = 0.0;
    for p in breaks.windows(2) {
        let (a, c) = (p[0], p[1]);
        let mid = 0.5 * (a + c);
        let half = 0.5 * (c - a);
        for (t, wt) in x.iter().zip(&w) {
            let r = mid + half * t;
            let vr = v.eval(r);
            if vr == 0.0 {
                continue;
            }
            sum += wt * half * vr * (psi.diagonal_mass(i, j, r) + psi.diagonal_mass(i, j, -r));
        }
    }
    Ok(sum)
}

/// `Σ_{i<j} ∫V(x_j − x_i)|ψ|² dx`.
pub fn interaction_energy(psi: &WaveFunction, v: &Potential) -> Result<f64> {
    let mut s = 0.0;
    for (i, j) in pairs(psi.particles()) {
        s += pair_interaction(psi, v, i, j)?;
    }
    Ok(s)
}

/// `q_ε(ψ) = ∫|∇ψ|² + C|ψ|² − g·Σ_{i<j}∫V_ε(x_j − x_i)|ψ|²`, with `v_eps`
/// the already scaled potential.
pub fn q_eps_form(psi: &WaveFunction, v_eps: &Potential, g: f64, shift: f64) -> Result<f64> {
    Ok(psi.grad_norm_sq() + shift * psi.norm_sq() - g * interaction_energy(psi, v_eps)?)
}

/// `|q(ψ)` on the grid minus `q(ψ)` on the refined grid`|`.
pub fn q_form_refinement_change(psi: &WaveFunction, alpha: f64, shift: f64) -> Result<f64> {
    let fine = psi.refined()?;
    Ok(abs(q_form(psi, alpha, shift)? - q_form(&fine, alpha, shift)?))
}

/// One inequality `lhs ≤ rhs` evaluated on one test function.
#[derive(Debug, Clone, PartialEq)]
pub struct InequalityCheck {
    pub name: String,
    pub pair: (usize, usize),
    pub lhs: f64,
    pub rhs: f64,
}

impl InequalityCheck {
    pub fn holds(&self, tol: f64) -> bool {
        self.lhs <= self.rhs * (1.0 + tol) + 1e-14
    }

    pub fn margin(&self) -> f64 {
        self.rhs - self.lhs
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FormBoundsReport {
    pub checks: Vec<InequalityCheck>,
    /// Smallest `C_μ` making the trace bound hold for this function.
    pub fitted_c_mu: f64,
}

impl FormBoundsReport {
    pub fn all_hold(&self, tol: f64) -> bool {
        self.checks.iter().all(|c| c.holds(tol))
    }
}

/// Offsets at which the supremum over the relative coordinate is sampled.
fn sample_offsets(reach: f64) -> Vec<f64> {
    let mut r = Vec::new();
    let mut t = 1.0 / 4096.0;
    while t < reach {
        r.push(t);
        r.push(-t);
        t *= 1.25;
    }
    r
}

/// Evaluates the trace and interaction inequalities on `psi`:
///
/// * `sup_r F(r) ≤ ‖∂_r ψ̃‖·‖ψ‖`,
/// * `sup_{r≠0} |F(r) − F(0)|/|r|^{1/2} ≤ 2‖∂_r ψ̃‖^{3/2}‖ψ‖^{1/2}`,
/// * `‖γ_ij ψ‖ ≤ μ‖∇ψ‖ + C_μ‖ψ‖` with `C_μ = 1/(4μ)`,
/// * `|∫V(x_j − x_i)|ψ|²| ≤ ‖V‖₁·‖∇ψ‖·‖ψ‖`.
pub fn check_form_bounds(psi: &WaveFunction, v: &Potential, mu: f64) -> Result<FormBoundsReport> {
    if !(mu > 0.0) {
        return Err(Error::domain("μ must be positive"));
    }
    let norm = sqrt(psi.norm_sq());
    let grad = sqrt(psi.grad_norm_sq());
    let offsets = sample_offsets(psi.diagonal_reach());
    let mut checks = Vec::new();
    let mut fitted: f64 = f64::NEG_INFINITY;
    for (i, j) in pairs(psi.particles()) {
        let dr = psi.relative_derivative_norm(i, j);
        let f0 = psi.diagonal_mass(i, j, 0.0);
        let mut sup = f0;
        let mut holder: f64 = 0.0;
        for &r in &offsets {
            let f = psi.diagonal_mass(i, j, r);
            sup = sup.max(f);
            holder = holder.max(abs(f - f0) / sqrt(abs(r)));
        }
        checks.push(InequalityCheck {
            name: "sup-trace".into(),
            pair: (i, j),
            lhs: sup,
            rhs: dr * norm,
        });
        checks.push(InequalityCheck {
            name: "holder-trace".into(),
            pair: (i, j),
            lhs: holder,
            rhs: 2.0 * powf(dr, 1.5) * sqrt(norm),
        });
        let gamma = sqrt(f0);
        checks.push(InequalityCheck {
            name: "trace-mu".into(),
            pair: (i, j),
            lhs: gamma,
            rhs: mu * grad + norm / (4.0 * mu),
        });
        if norm > 0.0 {
            fitted = fitted.max((gamma - mu * grad) / norm);
        }
        checks.push(InequalityCheck {
            name: "interaction".into(),
            pair: (i, j),
            lhs: abs(pair_interaction(psi, v, i, j)?),
            rhs: v.l1_norm() * grad * norm,
        });
    }
    Ok(FormBoundsReport {
        checks,
        fitted_c_mu: fitted.max(0.0),
    })
}

/// A shift `C` with `q ≥ 0` and `q_ε ≥ 0` for couplings up to `g_max`.
pub fn sufficient_shift(v: &Potential, g_max: f64, particles: usize) -> f64 {
    let k = abs(g_max) * pairs(particles).len() as f64 * v.l1_norm();
    0.25 * k * k
}

/// A constant `b` for which
/// `(1−a)‖ψ‖²_{H¹} − b‖ψ‖² ≤ q_ε(ψ) ≤ (1+a)‖ψ‖²_{H¹} + b‖ψ‖²`
/// holds uniformly in ε.
pub fn sandwich_constant(v: &Potential, g_max: f64, particles: usize, a: f64, shift: f64) -> f64 {
    let k = abs(g_max) * pairs(particles).len() as f64 * v.l1_norm();
    let base = k * k / (4.0 * a);
    (base - shift + 1.0 - a).max(base + shift - 1.0 - a).max(0.0)
}

/// Lower and upper sandwich bounds for `q_ε(ψ)`.
pub fn sandwich_sides(psi: &WaveFunction, a: f64, b: f64) -> (f64, f64) {
    let h1 = psi.h1_norm_sq();
    let n = psi.norm_sq();
    ((1.0 - a) * h1 - b * n, (1.0 + a) * h1 + b * n)
}

/// Kinetic energy of a two-variable function computed in the original
/// coordinates and via `2|∂_r ψ̃|² + ½|∂_R ψ̃|²` in relative and centre
/// coordinates.
pub fn kinetic_split(psi: &WaveFunction) -> Result<(f64, f64)> {
    if psi.particles() != 2 {
        return Err(Error::domain("kinetic split is defined for two variables"));
    }
    let direct = psi.grad_norm_sq();
    let l = psi.axis.hi;
    let m = 2 * psi.axis.len() - 1;
    // ψ̃(r, R) = ψ(R − r/2, R + r/2); the support in r is twice as wide.
    let rg = QuadratureGrid::trapezoid(2.0 * l, m)?;
    let bg = QuadratureGrid::trapezoid(l, m)?;
    let mut split = 0.0;
    let mut g = [0.0; 2];
    for (r, wr) in rg.nodes.iter().zip(&rg.weights) {
        for (big, wb) in bg.nodes.iter().zip(&bg.weights) {
            psi.profile.eval_grad(&[big - 0.5 * r, big + 0.5 * r], &mut g);
            let dr = 0.5 * (g[1] - g[0]);
            let dbig = g[0] + g[1];
            split += wr * wb * (2.0 * dr * dr + 0.5 * dbig * dbig);
        }
    }
    Ok((direct, split))
}

/// Grid used for two-variable test functions.
pub const FAMILY_GRID_2D: (f64, usize) = (7.0, 64);
/// Grid used for three-variable test functions.
pub const FAMILY_GRID_3D: (f64, usize) = (6.0, 32);

fn random_profile(rng: &mut ChaCha8Rng, dim: usize, max_wave: f64) -> Result<Profile> {
    let terms = (0..3)
        .map(|_| Term {
            coeff: rng.gen_range(-1.0..1.0),
            center: (0..dim).map(|_| rng.gen_range(-1.5..1.5)).collect(),
            width: rng.gen_range(0.7..1.2),
            wave: (0..dim).map(|_| rng.gen_range(-max_wave..max_wave)).collect(),
            phase: rng.gen_range(0.0..2.0 * PI),
        })
        .collect();
    Profile::new(dim, terms)
}

fn gaussian_at(dim: usize, center: Vec<f64>, width: f64, coeff: f64) -> Term {
    Term {
        coeff,
        center,
        width,
        wave: vec![0.0; dim],
        phase: 0.0,
    }
}

/// Twenty normalized test functions: tensor and shifted Gaussians with
/// nonzero diagonal traces, an exchange-odd function, and seeded random
/// band-limited fields, in two and three variables.
pub fn test_family(seed: u64) -> Result<Vec<WaveFunction>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (l2, m2) = FAMILY_GRID_2D;
    let (l3, m3) = FAMILY_GRID_3D;
    let mut profiles: Vec<Profile> = vec![Profile::gaussian(2)?];
    profiles.push(Profile::new(
        2,
        vec![Term {
            coeff: 1.0,
            center: vec![0.0, 0.0],
            width: 0.8,
            wave: vec![0.0, 0.0],
            phase: 0.0,
        }],
    )?);
    profiles.push(Profile::new(2, vec![gaussian_at(2, vec![0.6, -0.6], 0.9, 1.0)])?);
    profiles.push(Profile::new(
        2,
        vec![
            gaussian_at(2, vec![0.8, -0.8], 0.8, 1.0),
            gaussian_at(2, vec![-0.8, 0.8], 0.8, 1.0),
        ],
    )?);
    profiles.push(Profile::new(
        2,
        vec![
            gaussian_at(2, vec![0.7, -0.3], 0.9, 1.0),
            gaussian_at(2, vec![-0.3, 0.7], 0.9, -1.0),
        ],
    )?);
    for _ in 0..9 {
        profiles.push(random_profile(&mut rng, 2, 2.0)?);
    }
    profiles.push(Profile::gaussian(3)?);
    profiles.push(Profile::new(3, vec![gaussian_at(3, vec![0.5, -0.5, 0.2], 0.9, 1.0)])?);
    for _ in 0..4 {
        profiles.push(random_profile(&mut rng, 3, 1.0)?);
    }
    profiles
        .into_iter()
        .map(|p| {
            let (l, m) = if p.dim() == 2 { (l2, m2) } else { (l3, m3) };
            WaveFunction::sample(p, l, m)?.normalized()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potentials::Shape;
    use approx::assert_relative_eq;

    fn gauss2() -> WaveFunction {
        WaveFunction::sample(Profile::gaussian(2).unwrap(), 7.0, 64).unwrap()
    }

    #[test]
    fn gaussian_form_values() {
        let psi = gauss2();
        assert_relative_eq!(psi.norm_sq(), 1.0, epsilon = 1e-12);
        assert_relative_eq!(q_form(&psi, 0.0, 0.0).unwrap(), 1.0, epsilon = 1e-12);
        let q1 = q_form(&psi, 1.0, 0.0).unwrap();
        assert_relative_eq!(q1, 1.0 - 1.0 / sqrt(2.0 * PI), epsilon = 1e-12);
    }

    #[test]
    fn trace_of_gaussian() {
        let psi = gauss2();
        let t = trace_gamma(&psi, 0, 1).unwrap();
        for (x, v) in psi.axis().nodes.iter().zip(&t) {
            assert_relative_eq!(*v, exp(-x * x) / sqrt(PI), epsilon = 1e-14);
        }
        assert_relative_eq!(trace_norm_sq(&psi, 0, 1).unwrap(), 1.0 / sqrt(2.0 * PI), epsilon = 1e-12);
    }

    #[test]
    fn odd_function_has_zero_trace() {
        let p = Profile::new(
            2,
            vec![
                gaussian_at(2, vec![0.5, -0.2], 0.8, 1.0),
                gaussian_at(2, vec![-0.2, 0.5], 0.8, -1.0),
            ],
        )
        .unwrap();
        let psi = WaveFunction::sample(p, 7.0, 64).unwrap();
        assert!(trace_gamma(&psi, 0, 1).unwrap().iter().all(|v| abs(*v) < 1e-15));
    }

    #[test]
    fn zero_function() {
        let psi = WaveFunction::sample(Profile::zero(2).unwrap(), 5.0, 16).unwrap();
        assert_eq!(q_form(&psi, 1.0, 0.0).unwrap(), 0.0);
        let r = check_form_bounds(&psi, &Potential::unit_box(), 0.5).unwrap();
        assert!(r.checks.iter().all(|c| c.lhs == 0.0 && c.rhs == 0.0));
    }

    #[test]
    fn interaction_bound_example() {
        let psi = gauss2();
        let v = Potential::unit_box();
        let r = check_form_bounds(&psi, &v, 0.5).unwrap();
        let c = r.checks.iter().find(|c| c.name == "interaction").unwrap();
        assert_relative_eq!(c.lhs, 0.3829249225480261, epsilon = 1e-11);
        assert_relative_eq!(c.rhs, 1.0, epsilon = 1e-12);
        assert!(r.all_hold(1e-9));
    }

    #[test]
    fn q_eps_approaches_q() {
        let psi = gauss2();
        let v = Potential::unit_box();
        let q = q_form(&psi, 1.0, 0.0).unwrap();
        let e1 = abs(q_eps_form(&psi, &v.scale(0.1).unwrap(), 1.0, 0.0).unwrap() - q);
        let e2 = abs(q_eps_form(&psi, &v.scale(0.05).unwrap(), 1.0, 0.0).unwrap() - q);
        assert!(e2 < e1 && e1 < 1e-3);
    }

    #[test]
    fn far_from_diagonal_no_interaction() {
        let p = Profile::new(2, vec![gaussian_at(2, vec![3.0, -3.0], 0.3, 1.0)]).unwrap();
        let psi = WaveFunction::sample(p, 7.0, 64).unwrap();
        let v = Potential::new(Shape::Box {
            height: 1.0,
            half_width: 1.0,
        })
        .unwrap()
        .scale(0.01)
        .unwrap();
        let g = psi.grad_norm_sq();
        assert_relative_eq!(q_eps_form(&psi, &v, 5.0, 0.0).unwrap(), g, epsilon = 1e-12);
    }

    #[test]
    fn kinetic_split_agrees() {
        let fam = test_family(11).unwrap();
        let (a, b) = kinetic_split(&fam[6]).unwrap();
        assert_relative_eq!(a, b, max_relative = 1e-9);
    }

    #[test]
    fn family_shape() {
        let fam = test_family(1).unwrap();
        assert_eq!(fam.len(), 20);
        for psi in &fam {
            assert_relative_eq!(psi.norm_sq(), 1.0, epsilon = 1e-12);
        }
        assert_eq!(fam.iter().filter(|p| p.particles() == 3).count(), 6);
    }
}
