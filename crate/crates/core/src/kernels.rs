//! Integral kernels of the Birman–Schwinger-type operators, their Nyström
//! discretization and norms.
//!
//! Variable conventions (target point `t`, source point `s`):
//!
//! | class | variables |
//! |---|---|
//! | `T`, `Phi12` | `[r]` |
//! | `Phi1j`, `Phi2j` | `[r, R, x_j]` |
//! | `Phiij` | `[r, R, x_i, x_j]` |
//! | `Phi1jFiber`, `Phi2jFiber` | `[r, x_j − R]` |
//! | `PhiijFiber` | `[r, x_i − R, x_j − R]` |
//! | `SchurF` / `SchurFFiber` | `[x, y]` / `[y − x]` |
//! | `SchurB` / `SchurBFiber` | `[w, x, y]` / `[x − w, y − w]` |
//!
//! The three-particle kernels are invariant under a common translation of
//! all centre and spectator coordinates. Integrating the common shift out
//! gives the zero-momentum fibre: a kernel of the same form with the Green's
//! function one dimension lower, evaluated at the component of the argument
//! orthogonal to `(1, …, 1)` and divided by `|(1, …, 1)|`. For kernels of the
//! form `u(r)·k·v(r')` with `k ≥ 0` every other fibre is dominated by this
//! one, so its norm is the norm of the full operator.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::greens::{closed_radial, heat_integral, QuadSpec, RadialGreen, SINGULAR_RADIUS};
use crate::linalg::{lanczos_norm, power_norm, symmetric_eigen, LinearOperator, Matrix, PowerIteration};
use crate::math::{abs, norm, powf, sqrt};
use crate::potentials::Potential;
use crate::quadrature::{ProductGrid, QuadratureGrid};

/// Default cap on the number of stored table entries (512 MiB of f64).
pub const DEFAULT_ENTRY_CAP: usize = 1 << 26;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum KernelClass {
    T,
    Phi12,
    Phi1j,
    Phi2j,
    Phiij,
    Phi1jFiber,
    Phi2jFiber,
    PhiijFiber,
    SchurF,
    SchurFFiber,
    SchurB,
    SchurBFiber,
}

impl KernelClass {
    pub fn name(&self) -> &'static str {
        match self {
            KernelClass::T => "T",
            KernelClass::Phi12 => "phi12",
            KernelClass::Phi1j => "phi1j",
            KernelClass::Phi2j => "phi2j",
            KernelClass::Phiij => "phiij",
            KernelClass::Phi1jFiber => "phi1j-fiber",
            KernelClass::Phi2jFiber => "phi2j-fiber",
            KernelClass::PhiijFiber => "phiij-fiber",
            KernelClass::SchurF => "schur-F",
            KernelClass::SchurFFiber => "schur-F-fiber",
            KernelClass::SchurB => "schur-B",
            KernelClass::SchurBFiber => "schur-B-fiber",
        }
    }

    /// Number of variables on each side.
    pub fn arity(&self) -> usize {
        match self {
            KernelClass::T | KernelClass::Phi12 | KernelClass::SchurFFiber => 1,
            KernelClass::Phi1jFiber | KernelClass::Phi2jFiber | KernelClass::SchurF | KernelClass::SchurBFiber => 2,
            KernelClass::Phi1j | KernelClass::Phi2j | KernelClass::PhiijFiber | KernelClass::SchurB => 3,
            KernelClass::Phiij => 4,
        }
    }

    /// Whether the first variable on each side is the relative coordinate `r`
    /// weighted by the potential.
    pub fn uses_potential(&self) -> bool {
        !matches!(
            self,
            KernelClass::SchurF | KernelClass::SchurFFiber | KernelClass::SchurB | KernelClass::SchurBFiber
        )
    }

    /// Dimension of the Green's function that appears in the kernel.
    fn green_dim(&self) -> u32 {
        match self {
            KernelClass::T | KernelClass::Phi12 => 1,
            KernelClass::Phi1jFiber | KernelClass::Phi2jFiber | KernelClass::SchurFFiber => 2,
            KernelClass::Phi1j | KernelClass::Phi2j | KernelClass::SchurF => 3,
            KernelClass::PhiijFiber | KernelClass::SchurBFiber => 3,
            KernelClass::Phiij | KernelClass::SchurB => 4,
        }
    }
}

/// A kernel that can be sampled pointwise.
pub trait KernelFn {
    fn arity(&self) -> usize;
    fn eval(&self, target: &[f64], source: &[f64]) -> Result<f64>;
}

/// One kernel class at fixed (ε, z, Q) and potential.
#[derive(Debug, Clone)]
pub struct Kernel {
    pub class: KernelClass,
    pub eps: f64,
    pub z: f64,
    pub q: f64,
    potential: Potential,
    table: Option<RadialGreen>,
}

impl Kernel {
    pub fn new(class: KernelClass, eps: f64, z: f64, q: f64, potential: &Potential) -> Result<Self> {
        if !(eps >= 0.0) || !(z > 0.0) || !(q >= 0.0) {
            return Err(Error::domain(alloc::format!(
                "kernel needs ε ≥ 0, z > 0, Q ≥ 0 (got ε={eps}, z={z}, Q={q})"
            )));
        }
        let table = match class.green_dim() {
            2 | 4 => Some(RadialGreen::standard(class.green_dim(), z + q)?),
            _ => None,
        };
        Ok(Self {
            class,
            eps,
            z,
            q,
            potential: potential.clone(),
            table,
        })
    }

    /// Same kernel at another ε, reusing the Green's function table.
    pub fn with_eps(&self, eps: f64) -> Result<Self> {
        if !(eps >= 0.0) {
            return Err(Error::domain("ε must be non-negative"));
        }
        let mut k = self.clone();
        k.eps = eps;
        Ok(k)
    }

    /// Same kernel with another potential.
    pub fn with_potential(&self, potential: &Potential) -> Self {
        let mut k = self.clone();
        k.potential = potential.clone();
        k
    }

    pub fn potential(&self) -> &Potential {
        &self.potential
    }

    fn green(&self, d: u32, zz: f64, r: f64) -> Result<f64> {
        match d {
            1 | 3 => closed_radial(d, zz, r),
            _ => match &self.table {
                Some(t) => t.eval(r),
                None => heat_integral(d, zz, r, &QuadSpec::default()),
            },
        }
    }
}

fn perp_norm(p: &[f64]) -> f64 {
    let mean = p.iter().sum::<f64>() / p.len() as f64;
    sqrt(p.iter().map(|x| (x - mean) * (x - mean)).sum())
}

fn nonsingular(x: f64) -> Result<f64> {
    if x < SINGULAR_RADIUS {
        Err(Error::SingularPoint { norm: x })
    } else {
        Ok(x)
    }
}

impl KernelFn for Kernel {
    fn arity(&self) -> usize {
        self.class.arity()
    }

    fn eval(&self, t: &[f64], s: &[f64]) -> Result<f64> {
        let e = self.eps;
        let zq = self.z + self.q;
        let f = self.potential.factorize();
        match self.class {
            KernelClass::T => {
                let v = f.v(t[0]);
                if v == 0.0 {
                    return Ok(0.0);
                }
                Ok(0.5 * v * closed_radial(1, 0.5 * zq, abs(e * t[0] - s[0]))?)
            }
            KernelClass::Phi12 => {
                let (u, v) = (f.u(t[0]), f.v(s[0]));
                if u == 0.0 || v == 0.0 {
                    return Ok(0.0);
                }
                Ok(0.5 * u * closed_radial(1, 0.5 * zq, abs(e * (t[0] - s[0])))? * v)
            }
            KernelClass::Phi1j | KernelClass::Phi2j => {
                let (u, v) = (f.u(t[0]), f.v(s[0]));
                if u == 0.0 || v == 0.0 {
                    return Ok(0.0);
                }
                let r = if self.class == KernelClass::Phi2j { -t[0] } else { t[0] };
                let x = three_body_argument(e, r, t[1], t[2], s[0], s[1], s[2]);
                Ok(u * closed_radial(3, zq, nonsingular(norm(&x))?)? * v)
            }
            KernelClass::Phiij => {
                let (u, v) = (f.u(t[0]), f.v(s[0]));
                if u == 0.0 || v == 0.0 {
                    return Ok(0.0);
                }
                let x = four_body_argument(e, t[0], t[1], t[2], t[3], s[0], s[1], s[2], s[3]);
                Ok(u * self.green(4, zq, nonsingular(norm(&x))?)? * v)
            }
            KernelClass::Phi1jFiber | KernelClass::Phi2jFiber => {
                let (u, v) = (f.u(t[0]), f.v(s[0]));
                if u == 0.0 || v == 0.0 {
                    return Ok(0.0);
                }
                let r = if self.class == KernelClass::Phi2jFiber { -t[0] } else { t[0] };
                let x = three_body_argument(e, r, 0.0, t[1], s[0], 0.0, s[1]);
                let rho = nonsingular(perp_norm(&x))?;
                Ok(u * self.green(2, zq, rho)? * v / sqrt(3.0))
            }
            KernelClass::PhiijFiber => {
                let (u, v) = (f.u(t[0]), f.v(s[0]));
                if u == 0.0 || v == 0.0 {
                    return Ok(0.0);
                }
                let x = four_body_argument(e, t[0], 0.0, t[1], t[2], s[0], 0.0, s[1], s[2]);
                let rho = nonsingular(perp_norm(&x))?;
                Ok(0.5 * u * closed_radial(3, zq, rho)? * v)
            }
            KernelClass::SchurF => {
                let x = [t[0] - s[0], t[0] - s[1], t[1] - s[0]];
                closed_radial(3, zq, nonsingular(norm(&x))?)
            }
            KernelClass::SchurFFiber => {
                let x = [0.0, -s[0], t[0]];
                Ok(self.green(2, zq, nonsingular(perp_norm(&x))?)? / sqrt(3.0))
            }
            KernelClass::SchurB => {
                let x = [t[0] - s[1], t[0] - s[2], t[1] - s[0], t[2] - s[0]];
                self.green(4, zq, nonsingular(norm(&x))?)
            }
            KernelClass::SchurBFiber => {
                let x = [-s[0], -s[1], t[0], t[1]];
                Ok(0.5 * closed_radial(3, zq, nonsingular(perp_norm(&x))?)?)
            }
        }
    }
}

/// Argument of the `(1, j)` kernel for target `(r, R, x_j)` and source `(r', R', x_j')`.
pub fn three_body_argument(e: f64, r: f64, big_r: f64, xj: f64, rp: f64, big_rp: f64, xjp: f64) -> [f64; 3] {
    [
        big_r - big_rp - 0.5 * e * (r - rp),
        big_r + 0.5 * e * r - xjp,
        xj - big_rp - 0.5 * e * rp,
    ]
}

/// Argument of the `(i, j)` kernel for target `(r, R, x_i, x_j)` and primed source.
#[allow(clippy::too_many_arguments)]
pub fn four_body_argument(
    e: f64,
    r: f64,
    big_r: f64,
    xi: f64,
    xj: f64,
    rp: f64,
    big_rp: f64,
    xip: f64,
    xjp: f64,
) -> [f64; 4] {
    [
        big_r - 0.5 * e * r - xip,
        big_r + 0.5 * e * r - xjp,
        xi - big_rp + 0.5 * e * rp,
        xj - big_rp - 0.5 * e * rp,
    ]
}

/// `½ v(r) G_{(z+Q)/2}(εr − r')`.
pub fn t_kernel(eps: f64, z: f64, q: f64, v: &Potential, r: f64, rp: f64) -> Result<f64> {
    Kernel::new(KernelClass::T, eps, z, q, v)?.eval(&[r], &[rp])
}

/// `½ u(r) G_{(z+Q)/2}(ε(r − r')) v(r')`.
pub fn phi12_kernel(eps: f64, z: f64, q: f64, v: &Potential, r: f64, rp: f64) -> Result<f64> {
    Kernel::new(KernelClass::Phi12, eps, z, q, v)?.eval(&[r], &[rp])
}

/// `u(r) G³_{z+Q}(X) v(r')` on `(r, R, x_j)`.
pub fn phi1j_kernel(eps: f64, z: f64, q: f64, v: &Potential, t: [f64; 3], s: [f64; 3]) -> Result<f64> {
    Kernel::new(KernelClass::Phi1j, eps, z, q, v)?.eval(&t, &s)
}

/// The `(2, j)` variant; equals [`phi1j_kernel`] with `r → −r`.
pub fn phi2j_kernel(eps: f64, z: f64, q: f64, v: &Potential, t: [f64; 3], s: [f64; 3]) -> Result<f64> {
    Kernel::new(KernelClass::Phi2j, eps, z, q, v)?.eval(&t, &s)
}

/// `u(r) G⁴_{z+Q}(X) v(r')` on `(r, R, x_i, x_j)`, with `G⁴` by quadrature.
pub fn phiij_kernel(eps: f64, z: f64, q: f64, v: &Potential, t: [f64; 4], s: [f64; 4]) -> Result<f64> {
    let f = v.factorize();
    let (u, vv) = (f.u(t[0]), f.v(s[0]));
    if u == 0.0 || vv == 0.0 {
        return Ok(0.0);
    }
    let x = four_body_argument(eps, t[0], t[1], t[2], t[3], s[0], s[1], s[2], s[3]);
    Ok(u * heat_integral(4, z + q, nonsingular(norm(&x))?, &QuadSpec::default())? * vv)
}

/// `K_a − K_b` evaluated pointwise.
pub struct Difference<'a, A: KernelFn, B: KernelFn> {
    pub a: &'a A,
    pub b: &'a B,
}

impl<A: KernelFn, B: KernelFn> KernelFn for Difference<'_, A, B> {
    fn arity(&self) -> usize {
        self.a.arity()
    }

    fn eval(&self, t: &[f64], s: &[f64]) -> Result<f64> {
        Ok(self.a.eval(t, s)? - self.b.eval(t, s)?)
    }
}

/// Resolution of the Nyström grids.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    /// Cells across the support of the potential (relative coordinate).
    pub n_support: usize,
    /// Cells across every other axis.
    pub n_free: usize,
    /// Half-width of every other axis.
    pub half_width: f64,
}

impl GridSpec {
    /// 1D default: 256 cells on `[−8, 8]`.
    pub fn one_dimensional() -> Self {
        Self {
            n_support: 256,
            n_free: 256,
            half_width: 8.0,
        }
    }

    /// Three-variable default: 24 per axis on `[−5, 5]`.
    pub fn three_variable() -> Self {
        Self {
            n_support: 24,
            n_free: 24,
            half_width: 5.0,
        }
    }

    /// Four-variable coarse default: 12 per axis.
    pub fn coarse() -> Self {
        Self {
            n_support: 12,
            n_free: 12,
            half_width: 5.0,
        }
    }

    pub fn refined(&self, factor: f64) -> Self {
        let scale = |n: usize| ((n as f64 * factor).round() as usize).max(8);
        Self {
            n_support: scale(self.n_support),
            n_free: scale(self.n_free),
            half_width: self.half_width,
        }
    }
}

/// Target grid: midpoint cells; source grid: trapezoid nodes, so that the
/// two are staggered by half a spacing and G³/G⁴ diagonals are never hit.
pub fn staggered_axis(lo: f64, hi: f64, n: usize) -> Result<(QuadratureGrid, QuadratureGrid)> {
    let target = QuadratureGrid::midpoint_on(lo, hi, n)?;
    let source = QuadratureGrid::trapezoid(0.5 * (hi - lo), n + 1)?;
    let shift = 0.5 * (lo + hi);
    let mut source = source;
    source.nodes.iter_mut().for_each(|x| *x += shift);
    source.lo += shift;
    source.hi += shift;
    Ok((target, source))
}

/// Radius used for the relative-coordinate axis of a potential.
pub fn support_extent(v: &Potential) -> f64 {
    let r = v.support_radius();
    if r.is_finite() && r > 0.0 {
        r
    } else if r == 0.0 {
        1.0
    } else {
        v.effective_radius(1e-6)
    }
}

/// Target and source product grids for a kernel class.
pub fn grids_for(class: KernelClass, v: &Potential, spec: &GridSpec) -> Result<(ProductGrid, ProductGrid)> {
    let rv = support_extent(v);
    let (st, ss) = staggered_axis(-rv, rv, spec.n_support)?;
    let (ft, fs) = staggered_axis(-spec.half_width, spec.half_width, spec.n_free)?;
    let free = class.arity() - usize::from(class.uses_potential());
    let mut t = Vec::new();
    let mut s = Vec::new();
    match class {
        KernelClass::T => {
            t.push(st);
            s.push(fs);
        }
        _ => {
            if class.uses_potential() {
                t.push(st);
                s.push(ss);
            }
            for _ in 0..free {
                t.push(ft.clone());
                s.push(fs.clone());
            }
        }
    }
    Ok((ProductGrid::new(t), ProductGrid::new(s)))
}

/// Metadata carried by a discretized operator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelMeta {
    pub class: KernelClass,
    pub eps: f64,
    pub z: f64,
    pub q: f64,
    /// Set for tables built on deliberately under-resolved grids.
    pub coarse: bool,
}

/// Nyström table `M[i, j] = K(target_i, source_j)` with quadrature weights.
#[derive(Debug, Clone)]
pub struct KernelOperator {
    pub values: Matrix,
    pub targets: ProductGrid,
    pub sources: ProductGrid,
    pub target_weights: Vec<f64>,
    pub source_weights: Vec<f64>,
    pub meta: KernelMeta,
}

/// Fills row `i` of the table (target point `i`) into `row`.
pub fn fill_row(
    kernel: &impl KernelFn,
    targets: &ProductGrid,
    sources: &ProductGrid,
    i: usize,
    row: &mut [f64],
) -> Result<()> {
    let mut tp = vec![0.0; targets.dim()];
    let mut sp = vec![0.0; sources.dim()];
    targets.point(i, &mut tp);
    for (j, slot) in row.iter_mut().enumerate() {
        sources.point(j, &mut sp);
        *slot = kernel.eval(&tp, &sp)?;
    }
    Ok(())
}

/// Checks the entry budget of a `targets × sources` table.
pub fn check_budget(targets: &ProductGrid, sources: &ProductGrid, cap: usize) -> Result<usize> {
    let entries = targets.len().saturating_mul(sources.len());
    if entries > cap {
        return Err(Error::MemoryBudget { entries, cap });
    }
    Ok(entries)
}

/// Serial Nyström discretization.
pub fn discretize(
    kernel: &impl KernelFn,
    meta: KernelMeta,
    targets: &ProductGrid,
    sources: &ProductGrid,
    cap: usize,
) -> Result<KernelOperator> {
    check_budget(targets, sources, cap)?;
    if kernel.arity() != targets.dim() || kernel.arity() != sources.dim() {
        return Err(Error::DimensionMismatch("grid dimension differs from kernel arity".into()));
    }
    let mut values = Matrix::zeros(targets.len(), sources.len());
    for i in 0..targets.len() {
        fill_row(kernel, targets, sources, i, values.row_mut(i))?;
    }
    KernelOperator::from_table(values, targets.clone(), sources.clone(), meta)
}

impl KernelOperator {
    pub fn from_table(values: Matrix, targets: ProductGrid, sources: ProductGrid, meta: KernelMeta) -> Result<Self> {
        if values.rows() != targets.len() || values.cols() != sources.len() {
            return Err(Error::DimensionMismatch("table shape differs from grids".into()));
        }
        if !values.is_finite() {
            return Err(Error::domain("kernel table has non-finite entries"));
        }
        Ok(Self {
            target_weights: targets.weights(),
            source_weights: sources.weights(),
            values,
            targets,
            sources,
            meta,
        })
    }

    /// Weighted Frobenius norm `√(Σ w_i |M_ij|² w_j)`.
    pub fn hs_norm(&self) -> f64 {
        let mut acc = 0.0;
        for (i, wi) in self.target_weights.iter().enumerate() {
            let row: f64 = self
                .values
                .row(i)
                .iter()
                .zip(&self.source_weights)
                .map(|(m, w)| m * m * w)
                .sum();
            acc += wi * row;
        }
        sqrt(acc)
    }

    /// Largest singular value of `W_t^{1/2} M W_s^{1/2}` (Lanczos).
    pub fn op_norm(&self) -> Result<f64> {
        lanczos_norm(&self.weighted(), PowerIteration::default())
    }

    /// Same quantity by plain power iteration.
    pub fn op_norm_power(&self, opts: PowerIteration) -> Result<f64> {
        power_norm(&self.weighted(), opts)
    }

    /// The weighted operator as a [`LinearOperator`].
    pub fn weighted(&self) -> Weighted<'_> {
        Weighted {
            m: &self.values,
            wt: self.target_weights.iter().map(|w| sqrt(*w)).collect(),
            ws: self.source_weights.iter().map(|w| sqrt(*w)).collect(),
        }
    }

    /// Dense weighted matrix; used by the small-table SVD oracle.
    pub fn weighted_matrix(&self) -> Matrix {
        let w = self.weighted();
        Matrix::from_fn(self.values.rows(), self.values.cols(), |i, j| {
            w.wt[i] * self.values[(i, j)] * w.ws[j]
        })
    }

    /// Operator norm from a full eigen-decomposition of `NᵀN`; small tables only.
    pub fn dense_norm(&self) -> Result<f64> {
        if self.values.cols() > 400 {
            return Err(Error::MemoryBudget {
                entries: self.values.cols() * self.values.cols(),
                cap: 400 * 400,
            });
        }
        let n = self.weighted_matrix();
        let gram = n.transpose().matmul(&n)?;
        let (vals, _) = symmetric_eigen(&gram)?;
        Ok(sqrt(vals.last().copied().unwrap_or(0.0).max(0.0)))
    }

    /// Adjoint table on swapped grids.
    pub fn adjoint(&self) -> Self {
        Self {
            values: self.values.transpose(),
            targets: self.sources.clone(),
            sources: self.targets.clone(),
            target_weights: self.source_weights.clone(),
            source_weights: self.target_weights.clone(),
            meta: self.meta,
        }
    }

    /// Entry-wise difference with a table on the same grids.
    pub fn sub(&self, other: &KernelOperator) -> Result<KernelOperator> {
        if self.targets != other.targets || self.sources != other.sources {
            return Err(Error::DimensionMismatch("tables live on different grids".into()));
        }
        let mut out = self.clone();
        out.values = self.values.sub(&other.values)?;
        Ok(out)
    }
}

/// `W_t^{1/2} M W_s^{1/2}` applied without forming it.
pub struct Weighted<'a> {
    m: &'a Matrix,
    wt: Vec<f64>,
    ws: Vec<f64>,
}

impl LinearOperator for Weighted<'_> {
    fn nrows(&self) -> usize {
        self.m.rows()
    }

    fn ncols(&self) -> usize {
        self.m.cols()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let xs: Vec<f64> = x.iter().zip(&self.ws).map(|(a, w)| a * w).collect();
        self.m.matvec(&xs, y);
        y.iter_mut().zip(&self.wt).for_each(|(a, w)| *a *= w);
    }

    fn apply_transpose(&self, x: &[f64], y: &mut [f64]) {
        let xs: Vec<f64> = x.iter().zip(&self.wt).map(|(a, w)| a * w).collect();
        self.m.matvec_transpose(&xs, y);
        y.iter_mut().zip(&self.ws).for_each(|(a, w)| *a *= w);
    }
}

/// Hilbert–Schmidt norm of a kernel on product grids without storing the table.
pub fn hs_norm_streaming(kernel: &impl KernelFn, targets: &ProductGrid, sources: &ProductGrid) -> Result<f64> {
    let tw = targets.weights();
    let sw = sources.weights();
    let mut tp = vec![0.0; targets.dim()];
    let mut sp = vec![0.0; sources.dim()];
    let mut acc = 0.0;
    for (i, wi) in tw.iter().enumerate() {
        targets.point(i, &mut tp);
        let mut row = 0.0;
        for (j, wj) in sw.iter().enumerate() {
            sources.point(j, &mut sp);
            let k = kernel.eval(&tp, &sp)?;
            row += k * k * wj;
        }
        acc += wi * row;
    }
    Ok(sqrt(acc))
}

/// `‖G¹_λ‖₂ = 1/(2λ^{3/4})`.
pub fn green_l2_norm(lambda: f64) -> f64 {
    0.5 * powf(lambda, -0.75)
}

/// Norm bound of a kernel class at Q = 0 in terms of `‖V‖₁`.
pub fn norm_bound(class: KernelClass, v: &Potential, z: f64) -> f64 {
    let l1 = v.l1_norm();
    match class {
        KernelClass::T => 0.5 * sqrt(l1) * green_l2_norm(0.5 * z),
        KernelClass::Phi12 => l1 / (2.0 * sqrt(2.0 * z)),
        KernelClass::SchurF | KernelClass::SchurFFiber | KernelClass::SchurB | KernelClass::SchurBFiber => {
            schur_bound_f(z)
        }
        _ => l1 / (2.0 * sqrt(z)),
    }
}

/// Bound on `‖K(V) − K(V_k)‖` in terms of `‖V‖₁` and the tail mass `‖V − V_k‖₁`.
pub fn cutoff_bound(class: KernelClass, v: &Potential, tail: f64, z: f64) -> f64 {
    let l1 = v.l1_norm();
    match class {
        KernelClass::T => 0.5 * sqrt(tail) * green_l2_norm(0.5 * z),
        KernelClass::Phi12 => sqrt(l1) * sqrt(tail) / (2.0 * sqrt(z)),
        _ => sqrt(l1) * sqrt(tail) / sqrt(2.0 * z),
    }
}

/// `(2√z)^{−1}`, the Schur-test bound of the three-variable operator.
pub fn schur_bound_f(z: f64) -> f64 {
    0.5 / sqrt(z)
}

/// `(2√z)^{−1}`, the Schur-test bound of the four-variable operator.
pub fn schur_bound_b(z: f64) -> f64 {
    0.5 / sqrt(z)
}

/// Direct Nyström table of the three-variable Schur operator on `[−L, L]²`.
pub fn schur_f_table(z: f64, half_width: f64, n: usize, cap: usize) -> Result<KernelOperator> {
    schur_table(KernelClass::SchurF, z, half_width, n, cap)
}

/// Direct Nyström table of the four-variable Schur operator on `[−L, L]³`.
pub fn schur_b_table(z: f64, half_width: f64, n: usize, cap: usize) -> Result<KernelOperator> {
    schur_table(KernelClass::SchurB, z, half_width, n, cap)
}

/// Nyström table of any Schur class (direct or fibre).
pub fn schur_table(class: KernelClass, z: f64, half_width: f64, n: usize, cap: usize) -> Result<KernelOperator> {
    let k = Kernel::new(class, 0.0, z, 0.0, &Potential::zero())?;
    let (t, s) = staggered_axis(-half_width, half_width, n)?;
    let targets = ProductGrid::cube(t, class.arity());
    let sources = ProductGrid::cube(s, class.arity());
    let meta = KernelMeta {
        class,
        eps: 0.0,
        z,
        q: 0.0,
        coarse: matches!(class, KernelClass::SchurB),
    };
    discretize(&k, meta, &targets, &sources, cap)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::exp;
    use approx::assert_relative_eq;

    #[test]
    fn point_kernel_examples() {
        let b = Potential::unit_box();
        assert_relative_eq!(t_kernel(0.0, 2.0, 0.0, &b, 0.0, 0.0).unwrap(), 0.25, max_relative = 1e-15);
        assert_relative_eq!(t_kernel(1.0, 2.0, 0.0, &b, 0.0, 0.0).unwrap(), 0.25, max_relative = 1e-15);
        assert_eq!(t_kernel(0.3, 2.0, 0.0, &b, 0.7, 0.1).unwrap(), 0.0);
        assert_relative_eq!(phi12_kernel(0.0, 2.0, 0.0, &b, 0.0, 0.0).unwrap(), 0.25, max_relative = 1e-15);
        assert_relative_eq!(
            phi12_kernel(0.0, 2.0, 2.0, &b, 0.0, 0.0).unwrap(),
            1.0 / (2.0 * sqrt(8.0)),
            max_relative = 1e-15
        );
        let pi = crate::math::PI;
        // (R, x_j) = (1, 0) against the origin gives X = (1, 1, 0)
        let g = phi1j_kernel(0.0, 1.0, 0.0, &b, [0.0, 1.0, 0.0], [0.0, 0.0, 0.0]).unwrap();
        assert_relative_eq!(g, exp(-sqrt(2.0)) / (4.0 * pi * sqrt(2.0)), max_relative = 1e-14);
        let g = phi1j_kernel(0.0, 1.0, 0.0, &b, [0.0, 1.0, 1.0], [0.0, 0.0, 0.0]).unwrap();
        assert_relative_eq!(g, exp(-sqrt(3.0)) / (4.0 * pi * sqrt(3.0)), max_relative = 1e-14);
        assert_eq!(phi1j_kernel(0.1, 1.0, 0.0, &b, [0.8, 1.0, 0.0], [0.0, 0.0, 0.0]).unwrap(), 0.0);
    }

    #[test]
    fn phi2j_is_phi1j_reflected() {
        let b = Potential::new(crate::potentials::Shape::Gaussian {
            amplitude: 1.0,
            width: 1.0,
        })
        .unwrap();
        for (r, rp) in [(0.3, -0.2), (-0.7, 0.4), (0.05, 0.9)] {
            let t = [r, 0.4, -0.3];
            let s = [rp, 0.1, 0.5];
            let a = phi2j_kernel(0.5, 1.3, 0.2, &b, t, s).unwrap();
            let c = phi1j_kernel(0.5, 1.3, 0.2, &b, [-r, t[1], t[2]], s).unwrap();
            assert_relative_eq!(a, c, max_relative = 1e-14);
        }
    }

    #[test]
    fn phiij_shift_in_q_equals_shift_in_z() {
        let b = Potential::unit_box();
        let t = [0.1, 0.5, 0.5, 0.5];
        let s = [0.0, 0.0, -0.5, -0.5];
        let a = phiij_kernel(0.0, 1.0, 3.0, &b, t, s).unwrap();
        let c = phiij_kernel(0.0, 4.0, 0.0, &b, t, s).unwrap();
        assert_relative_eq!(a, c, max_relative = 1e-14);
        assert!(phiij_kernel(0.0, 1.0, 0.0, &b, [0.0; 4], [0.0; 4]).is_err());
    }

    #[test]
    fn zero_potential_gives_zero_table() {
        let z = Potential::zero();
        let spec = GridSpec {
            n_support: 8,
            n_free: 8,
            half_width: 2.0,
        };
        for class in [KernelClass::T, KernelClass::Phi12, KernelClass::Phi1jFiber] {
            let k = Kernel::new(class, 0.1, 1.0, 0.0, &z).unwrap();
            let (t, s) = grids_for(class, &z, &spec).unwrap();
            let meta = KernelMeta {
                class,
                eps: 0.1,
                z: 1.0,
                q: 0.0,
                coarse: false,
            };
            let op = discretize(&k, meta, &t, &s, DEFAULT_ENTRY_CAP).unwrap();
            assert_eq!(op.hs_norm(), 0.0);
        }
    }

    #[test]
    fn memory_budget_is_enforced() {
        let b = Potential::unit_box();
        let k = Kernel::new(KernelClass::Phi12, 0.0, 1.0, 0.0, &b).unwrap();
        let (t, s) = grids_for(KernelClass::Phi12, &b, &GridSpec::one_dimensional()).unwrap();
        let meta = KernelMeta {
            class: KernelClass::Phi12,
            eps: 0.0,
            z: 1.0,
            q: 0.0,
            coarse: false,
        };
        assert!(matches!(discretize(&k, meta, &t, &s, 1000), Err(Error::MemoryBudget { .. })));
    }
}
