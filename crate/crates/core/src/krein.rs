//! Krein resolvent formula for factored couplings, discretized two-particle
//! Hamiltonians in the relative coordinate, and the exact resolvent of the
//! two-particle contact interaction.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::{
    lanczos_norm, relative_frobenius, symmetric_eigen, FnOperator, Lu, Matrix, PowerIteration,
    SymTridiagonal, TridiagLu,
};
use crate::math::{abs, exp, sqrt};
use crate::potentials::Potential;
use crate::quadrature::QuadratureGrid;

/// Condition numbers above this are treated as singular.
pub const CONDITION_CAP: f64 = 1e12;

/// Self-adjoint unperturbed operator `H₀` as a dense table.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteHamiltonian {
    h0: Matrix,
}

impl DiscreteHamiltonian {
    pub fn new(h0: Matrix) -> Result<Self> {
        if h0.rows() != h0.cols() {
            return Err(Error::DimensionMismatch(format!(
                "Hamiltonian must be square, got {}x{}",
                h0.rows(),
                h0.cols()
            )));
        }
        if !h0.is_finite() {
            return Err(Error::domain("Hamiltonian has non-finite entries"));
        }
        if h0.asymmetry() > 1e-12 * h0.max_abs().max(1.0) {
            return Err(Error::domain(format!(
                "Hamiltonian is not symmetric (asymmetry {:e})",
                h0.asymmetry()
            )));
        }
        Ok(Self { h0 })
    }

    /// `−mass·∂²` on `n` interior nodes of `[−L, L]` with Dirichlet walls.
    pub fn laplacian(half_width: f64, n: usize, mass: f64) -> Result<Self> {
        if n == 0 || !(half_width > 0.0) || !(mass > 0.0) {
            return Err(Error::domain("laplacian needs n ≥ 1, L > 0 and mass > 0"));
        }
        let h = 2.0 * half_width / (n + 1) as f64;
        let c = mass / (h * h);
        let m = Matrix::from_fn(n, n, |i, j| {
            if i == j {
                2.0 * c
            } else if i.abs_diff(j) == 1 {
                -c
            } else {
                0.0
            }
        });
        Self::new(m)
    }

    pub fn dim(&self) -> usize {
        self.h0.rows()
    }

    pub fn matrix(&self) -> &Matrix {
        &self.h0
    }

    /// `H₀ − g·AᵀJA`.
    pub fn perturbed(&self, c: &FactoredCoupling) -> Result<Matrix> {
        c.check_dim(self.dim())?;
        let ja = Matrix::from_fn(c.a.rows(), c.a.cols(), |i, j| c.j[i] * c.a[(i, j)]);
        let ata = c.a.transpose().matmul(&ja)?;
        self.h0.sub(&ata.scale(c.g))
    }
}

/// Coupling `g·AᵀJA` with `A` mapping states to an auxiliary space and `J`
/// a diagonal sign.
#[derive(Debug, Clone, PartialEq)]
pub struct FactoredCoupling {
    a: Matrix,
    j: Vec<f64>,
    g: f64,
}

impl FactoredCoupling {
    pub fn new(a: Matrix, j: Vec<f64>, g: f64) -> Result<Self> {
        if j.len() != a.rows() {
            return Err(Error::DimensionMismatch(format!(
                "sign vector has {} entries, coupling map has {} rows",
                j.len(),
                a.rows()
            )));
        }
        if j.iter().any(|&s| s != 1.0 && s != -1.0) {
            return Err(Error::domain("J must be diagonal with entries ±1"));
        }
        if !g.is_finite() || !a.is_finite() {
            return Err(Error::domain("coupling must be finite"));
        }
        Ok(Self { a, j, g })
    }

    pub fn a(&self) -> &Matrix {
        &self.a
    }

    pub fn signs(&self) -> &[f64] {
        &self.j
    }

    pub fn strength(&self) -> f64 {
        self.g
    }

    pub fn rank(&self) -> usize {
        self.a.rows()
    }

    /// `B = g·J·A`.
    pub fn b(&self) -> Matrix {
        Matrix::from_fn(self.a.rows(), self.a.cols(), |i, j| {
            self.g * self.j[i] * self.a[(i, j)]
        })
    }

    fn check_dim(&self, n: usize) -> Result<()> {
        if self.a.cols() != n {
            return Err(Error::DimensionMismatch(format!(
                "coupling acts on dimension {}, Hamiltonian has {n}",
                self.a.cols()
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResolventMethod {
    Krein,
    Direct,
    Limit,
}

impl ResolventMethod {
    pub fn name(self) -> &'static str {
        match self {
            ResolventMethod::Krein => "krein",
            ResolventMethod::Direct => "direct",
            ResolventMethod::Limit => "limit",
        }
    }
}

/// Resolvent table at a real spectral parameter.
#[derive(Debug, Clone)]
pub struct ResolventReport {
    pub z: f64,
    pub table: Matrix,
    pub method: ResolventMethod,
    /// 1-norm condition number of the matrix that was inverted.
    pub condition: f64,
    pub asymmetry: f64,
}

fn inverse_with_condition(m: &Matrix, what: &str) -> Result<(Matrix, f64)> {
    let lu = Lu::factor(m).map_err(|_| Error::NotInvertible(format!("{what} is singular")))?;
    let inv = lu.inverse();
    let cond = one_norm(m) * one_norm(&inv);
    if !cond.is_finite() || cond > CONDITION_CAP {
        return Err(Error::NotInvertible(format!(
            "{what} has condition number {cond:e}"
        )));
    }
    Ok((inv, cond))
}

fn one_norm(m: &Matrix) -> f64 {
    (0..m.cols())
        .map(|j| (0..m.rows()).map(|i| abs(m[(i, j)])).sum::<f64>())
        .fold(0.0, f64::max)
}

fn report(z: f64, table: Matrix, method: ResolventMethod, condition: f64) -> Result<ResolventReport> {
    if !table.is_finite() {
        return Err(Error::NotInvertible("resolvent has non-finite entries".into()));
    }
    let asymmetry = table.asymmetry() / table.max_abs().max(f64::MIN_POSITIVE);
    Ok(ResolventReport {
        z,
        table,
        method,
        condition,
        asymmetry,
    })
}

/// Dense `(H + z)⁻¹`.
pub fn direct_resolvent(h: &Matrix, z: f64) -> Result<ResolventReport> {
    let n = h.rows();
    let shifted = h.add(&Matrix::identity(n).scale(z))?;
    let (inv, cond) = inverse_with_condition(&shifted, "H + z")?;
    report(z, inv, ResolventMethod::Direct, cond)
}

/// Pieces of the Krein formula at one spectral parameter.
struct KreinParts {
    r0: Matrix,
    /// `A·R₀(z)`.
    ar0: Matrix,
    /// `φ(z) = B·R₀(z)·Aᵀ`.
    phi: Matrix,
}

fn krein_parts(h0: &DiscreteHamiltonian, c: &FactoredCoupling, z: f64) -> Result<KreinParts> {
    c.check_dim(h0.dim())?;
    let r0 = direct_resolvent(h0.matrix(), z)?.table;
    let ar0 = c.a.matmul(&r0)?;
    let b = c.b();
    let phi = b.matmul(&r0)?.matmul(&c.a.transpose())?;
    Ok(KreinParts { r0, ar0, phi })
}

/// `(H + z)⁻¹ = R₀ + R₀Aᵀ(1 − φ)⁻¹BR₀` for `H = H₀ − g·AᵀJA`.
///
/// Fails with [`Error::NotInvertible`] when `1 − φ(z)` is singular, which
/// happens exactly when `−z` is an eigenvalue of `H`.
pub fn krein_resolvent(
    h0: &DiscreteHamiltonian,
    c: &FactoredCoupling,
    z: f64,
) -> Result<ResolventReport> {
    let parts = krein_parts(h0, c, z)?;
    let m = c.rank();
    let one_minus_phi = Matrix::identity(m).sub(&parts.phi)?;
    let (inv, cond) = inverse_with_condition(&one_minus_phi, "1 − φ(z)")?;
    let b = c.b();
    let br0 = b.matmul(&parts.r0)?;
    let correction = parts.ar0.transpose().matmul(&inv)?.matmul(&br0)?;
    report(z, parts.r0.add(&correction)?, ResolventMethod::Krein, cond)
}

/// Relative Frobenius distance between `(1 − φ)⁻¹` and `1 + B(H+z)⁻¹Aᵀ`.
pub fn inverse_identity_error(h0: &DiscreteHamiltonian, c: &FactoredCoupling, z: f64) -> Result<f64> {
    let parts = krein_parts(h0, c, z)?;
    let m = c.rank();
    let (lhs, _) = inverse_with_condition(&Matrix::identity(m).sub(&parts.phi)?, "1 − φ(z)")?;
    let h = h0.perturbed(c)?;
    let r = direct_resolvent(&h, z)?.table;
    let rhs = Matrix::identity(m).add(&c.b().matmul(&r)?.matmul(&c.a.transpose())?)?;
    relative_frobenius(&lhs, &rhs)
}

/// `det(1 − φ(z))`, which equals `det(H + z)/det(H₀ + z)`.
pub fn coupling_determinant(h0: &DiscreteHamiltonian, c: &FactoredCoupling, z: f64) -> Result<f64> {
    let parts = krein_parts(h0, c, z)?;
    let m = Matrix::identity(c.rank()).sub(&parts.phi)?;
    match Lu::factor(&m) {
        Ok(lu) => Ok(lu.determinant()),
        Err(_) => Ok(0.0),
    }
}

/// Bisects the sign change of `det(1 − φ(z))` on `[lo, hi]`; the root is a
/// point `z` with `−z` in the spectrum of `H`.
pub fn locate_singular_parameter(
    h0: &DiscreteHamiltonian,
    c: &FactoredCoupling,
    lo: f64,
    hi: f64,
    tol: f64,
) -> Result<f64> {
    let (mut lo, mut hi) = (lo, hi);
    let mut flo = coupling_determinant(h0, c, lo)?;
    let fhi = coupling_determinant(h0, c, hi)?;
    if flo * fhi > 0.0 {
        return Err(Error::domain(format!(
            "det(1 − φ) has no sign change on [{lo}, {hi}]"
        )));
    }
    while hi - lo > tol * hi.abs().max(1.0) {
        let mid = 0.5 * (lo + hi);
        // `H₀ + z` itself may be singular at the midpoint only if `−mid` is
        // in the spectrum of `H₀`; nudge off it.
        let fm = match coupling_determinant(h0, c, mid) {
            Ok(v) => v,
            Err(_) => coupling_determinant(h0, c, mid + tol)?,
        };
        if fm == 0.0 {
            return Ok(mid);
        }
        if flo * fm < 0.0 {
            hi = mid;
        } else {
            lo = mid;
            flo = fm;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Smallest singular value of `1 − φ(z)`.
pub fn coupling_min_singular(h0: &DiscreteHamiltonian, c: &FactoredCoupling, z: f64) -> Result<f64> {
    let parts = krein_parts(h0, c, z)?;
    let m = Matrix::identity(c.rank()).sub(&parts.phi)?;
    let s = crate::linalg::singular_values(&m)?;
    Ok(s.iter().copied().fold(f64::INFINITY, f64::min))
}

/// Randomized Krein self-test settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelfTestOptions {
    pub trials: usize,
    pub max_dim: usize,
    pub seed: u64,
}

impl Default for SelfTestOptions {
    fn default() -> Self {
        Self {
            trials: 100,
            max_dim: 60,
            seed: 7,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InstanceReport {
    pub index: usize,
    pub dim: usize,
    pub rank: usize,
    pub g: f64,
    pub z: f64,
    pub krein_error: f64,
    pub identity_error: f64,
    pub condition: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelfTestReport {
    pub instances: Vec<InstanceReport>,
}

impl SelfTestReport {
    pub fn max_krein_error(&self) -> f64 {
        self.instances.iter().map(|r| r.krein_error).fold(0.0, f64::max)
    }

    pub fn max_identity_error(&self) -> f64 {
        self.instances.iter().map(|r| r.identity_error).fold(0.0, f64::max)
    }

    pub fn passed_count(&self, tol: f64) -> usize {
        self.instances
            .iter()
            .filter(|r| r.krein_error <= tol && r.identity_error <= tol)
            .count()
    }
}

/// One random `(H₀ ≥ 0, A, J, g, z)` instance.
pub fn random_instance(
    rng: &mut ChaCha8Rng,
    max_dim: usize,
) -> Result<(DiscreteHamiltonian, FactoredCoupling, f64)> {
    let max_dim = max_dim.max(2);
    let n = rng.gen_range(2..=max_dim);
    let x = Matrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
    let h0 = x.transpose().matmul(&x)?.scale(1.0 / n as f64);
    let sym = Matrix::from_fn(n, n, |i, j| 0.5 * (h0[(i, j)] + h0[(j, i)]));
    let m = rng.gen_range(1..=n.min(8));
    let a = Matrix::from_fn(m, n, |_, _| rng.gen_range(-1.0..1.0));
    let j: Vec<f64> = (0..m)
        .map(|_| if rng.gen_bool(0.5) { 1.0 } else { -1.0 })
        .collect();
    let g = rng.gen_range(0.05..2.0);
    let z = rng.gen_range(0.5..10.0);
    Ok((DiscreteHamiltonian::new(sym)?, FactoredCoupling::new(a, j, g)?, z))
}

/// Compares the Krein formula against a dense inverse on random instances.
///
/// Instances for which `H + z` or `1 − φ(z)` is numerically singular are
/// redrawn from the same stream, so the run is reproducible from the seed.
pub fn krein_selftest(opts: SelfTestOptions) -> Result<SelfTestReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut instances = Vec::with_capacity(opts.trials);
    let mut attempts = 0;
    while instances.len() < opts.trials {
        attempts += 1;
        if attempts > 20 * opts.trials.max(1) {
            return Err(Error::NonConvergence {
                iterations: attempts,
                change: f64::NAN,
            });
        }
        let (h0, c, z) = random_instance(&mut rng, opts.max_dim)?;
        let h = h0.perturbed(&c)?;
        let direct = match direct_resolvent(&h, z) {
            Ok(d) if d.condition < 1e8 => d,
            _ => continue,
        };
        let krein = match krein_resolvent(&h0, &c, z) {
            Ok(k) if k.condition < 1e8 => k,
            _ => continue,
        };
        let krein_error = relative_frobenius(&krein.table, &direct.table)?;
        let identity_error = inverse_identity_error(&h0, &c, z)?;
        instances.push(InstanceReport {
            index: instances.len(),
            dim: h0.dim(),
            rank: c.rank(),
            g: c.strength(),
            z,
            krein_error,
            identity_error,
            condition: krein.condition.max(direct.condition),
        });
    }
    Ok(SelfTestReport { instances })
}

/// Symmetric node set on `[−L, L]` with Dirichlet walls at `±L` and a node
/// at the origin. Only the interior nodes carry unknowns.
#[derive(Debug, Clone, PartialEq)]
pub struct PairGrid {
    /// Nonnegative interior nodes, starting at 0.
    half: Vec<f64>,
    half_width: f64,
}

impl PairGrid {
    /// Uniform grid with `cells` cells (an even number) on `[−L, L]`.
    pub fn uniform(half_width: f64, cells: usize) -> Result<Self> {
        if cells < 4 || !cells.is_multiple_of(2) || !(half_width > 0.0) {
            return Err(Error::domain(format!(
                "uniform pair grid needs an even cell count ≥ 4 and L > 0, got {cells}, {half_width}"
            )));
        }
        let h = 2.0 * half_width / cells as f64;
        let half = (0..cells / 2).map(|i| i as f64 * h).collect();
        Ok(Self { half, half_width })
    }

    /// Spacing `fine` on `[0, fine_extent]`, growing geometrically by `ratio`
    /// up to `coarse`, then uniform to the wall. Mirrored to `[−L, 0]`.
    pub fn graded(half_width: f64, fine_extent: f64, fine: f64, coarse: f64, ratio: f64) -> Result<Self> {
        if !(fine > 0.0 && coarse >= fine && ratio > 1.0 && fine_extent >= 0.0 && half_width > fine_extent + coarse) {
            return Err(Error::domain("graded pair grid parameters out of range"));
        }
        let mut half = vec![0.0];
        let mut x = 0.0;
        let steps = (fine_extent / fine).ceil() as usize;
        for _ in 0..steps {
            x += fine;
            half.push(x);
        }
        let mut h = fine;
        loop {
            h = (h * ratio).min(coarse);
            if x + h >= half_width - 0.5 * h {
                break;
            }
            x += h;
            half.push(x);
        }
        Ok(Self { half, half_width })
    }

    /// Every spacing halved.
    pub fn refined(&self) -> Self {
        let mut half = Vec::with_capacity(2 * self.half.len());
        for w in self.half.windows(2) {
            half.push(w[0]);
            half.push(0.5 * (w[0] + w[1]));
        }
        let last = *self.half.last().expect("grid is nonempty");
        half.push(last);
        half.push(0.5 * (last + self.half_width));
        Self {
            half,
            half_width: self.half_width,
        }
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    /// Nonnegative interior nodes.
    pub fn half_nodes(&self) -> &[f64] {
        &self.half
    }

    /// All interior nodes in increasing order.
    pub fn nodes(&self) -> Vec<f64> {
        let mut out: Vec<f64> = self.half[1..].iter().rev().map(|x| -x).collect();
        out.extend_from_slice(&self.half);
        out
    }

    pub fn len(&self) -> usize {
        2 * self.half.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Spacing to the right of each nonnegative node (the last one reaches the wall).
    fn half_spacings(&self) -> Vec<f64> {
        let mut h: Vec<f64> = self.half.windows(2).map(|w| w[1] - w[0]).collect();
        h.push(self.half_width - self.half[self.half.len() - 1]);
        h
    }

    /// Dual-cell widths of the nonnegative nodes on the full line.
    pub fn half_dual_widths(&self) -> Vec<f64> {
        let h = self.half_spacings();
        (0..self.half.len())
            .map(|i| if i == 0 { h[0] } else { 0.5 * (h[i - 1] + h[i]) })
            .collect()
    }

    /// Even-sector weights: `w₀` at the origin and `2wᵢ` elsewhere.
    pub fn even_weights(&self) -> Vec<f64> {
        let mut w = self.half_dual_widths();
        w.iter_mut().skip(1).for_each(|x| *x *= 2.0);
        w
    }

    pub fn max_spacing(&self) -> f64 {
        self.half_spacings().into_iter().fold(0.0, f64::max)
    }

    /// Largest spacing among nodes with `|x| ≤ r`.
    pub fn max_spacing_within(&self, r: f64) -> f64 {
        let h = self.half_spacings();
        self.half
            .iter()
            .zip(&h)
            .filter(|(x, _)| **x <= r)
            .map(|(_, h)| *h)
            .fold(0.0, f64::max)
    }

    /// Graded grid adapted to a scaled potential.
    pub fn for_potential(v: &Potential, half_width: f64, coarse: f64) -> Result<Self> {
        let r = v.effective_radius(1e-12).min(0.25 * half_width);
        Self::graded(half_width, 2.0 * r, r / 32.0, coarse, 1.05)
    }
}

/// `H_ε = −2∂²_r − g_ε·V_ε(r)` on a [`PairGrid`], stored in the symmetric
/// form `W^{−1/2}KW^{−1/2} − g·diag(V̄)` where `K` is the stiffness matrix,
/// `W` the dual-cell widths and `V̄` dual-cell averages.
#[derive(Debug, Clone)]
pub struct PairHamiltonian {
    grid: PairGrid,
    /// Kinetic diagonal on the nonnegative nodes.
    kin_diag: Vec<f64>,
    /// Kinetic coupling between nonnegative nodes `i` and `i+1`.
    kin_off: Vec<f64>,
    /// `g·V̄` on the nonnegative nodes.
    pot: Vec<f64>,
    pub coupling: f64,
    pub eps: f64,
    /// Spacing inside the support exceeds `support width / 8`.
    pub under_resolved: bool,
}

/// Kinetic mass factor of the relative coordinate.
pub const RELATIVE_MASS: f64 = 2.0;

/// Builds `H_ε` for the scaled potential `v` (already `V_ε`) and coupling `g`.
pub fn build_pair_hamiltonian(v: &Potential, g: f64, grid: &PairGrid) -> Result<PairHamiltonian> {
    if !g.is_finite() {
        return Err(Error::domain("coupling must be finite"));
    }
    let h = grid.half_spacings();
    let w = grid.half_dual_widths();
    let n = w.len();
    let m = RELATIVE_MASS;
    let mut kin_diag = vec![0.0; n];
    let mut kin_off = vec![0.0; n.saturating_sub(1)];
    for i in 0..n {
        let left = if i == 0 { h[0] } else { h[i - 1] };
        kin_diag[i] = m * (1.0 / left + 1.0 / h[i]) / w[i];
        if i + 1 < n {
            kin_off[i] = -m / (h[i] * sqrt(w[i] * w[i + 1]));
        }
    }
    let pot: Vec<f64> = (0..n)
        .map(|i| {
            let left = if i == 0 { h[0] } else { h[i - 1] };
            let x = grid.half[i];
            g * v.cell_average(x - 0.5 * left, x + 0.5 * h[i])
        })
        .collect();
    let width = 2.0 * v.effective_radius(1e-6);
    let under_resolved = grid.max_spacing_within(0.5 * width) > width / 8.0;
    Ok(PairHamiltonian {
        grid: grid.clone(),
        kin_diag,
        kin_off,
        pot,
        coupling: g,
        eps: v.eps(),
        under_resolved,
    })
}

impl PairHamiltonian {
    pub fn grid(&self) -> &PairGrid {
        &self.grid
    }

    /// Full symmetric tridiagonal on all interior nodes.
    pub fn full(&self) -> Result<SymTridiagonal> {
        let n = self.kin_diag.len();
        let mut diag = Vec::with_capacity(2 * n - 1);
        let mut off = Vec::with_capacity(2 * n - 2);
        for i in (1..n).rev() {
            diag.push(self.kin_diag[i] - self.pot[i]);
            off.push(self.kin_off[i - 1]);
        }
        for i in 0..n {
            diag.push(self.kin_diag[i] - self.pot[i]);
            if i + 1 < n {
                off.push(self.kin_off[i]);
            }
        }
        SymTridiagonal::new(diag, off)
    }

    /// Restriction to even functions in the orthonormal even basis.
    pub fn even(&self) -> Result<SymTridiagonal> {
        let diag: Vec<f64> = self
            .kin_diag
            .iter()
            .zip(&self.pot)
            .map(|(k, p)| k - p)
            .collect();
        let mut off = self.kin_off.clone();
        if let Some(first) = off.first_mut() {
            *first *= crate::math::SQRT_2;
        }
        SymTridiagonal::new(diag, off)
    }

    /// `Σ wᵢ·|g·V̄ᵢ|` over the full grid, the discrete `g‖V‖₁`.
    pub fn potential_mass(&self) -> f64 {
        self.grid
            .even_weights()
            .iter()
            .zip(&self.pot)
            .map(|(w, p)| w * abs(*p))
            .sum()
    }

    /// Smallest even-sector eigenvalue.
    pub fn ground_energy_even(&self) -> Result<f64> {
        self.even()?.eigenvalue(0, 1e-14)
    }

    /// Splits the even-sector operator into the free part and a diagonal
    /// factored coupling supported where `V̄ ≠ 0`.
    pub fn factored_even(&self) -> Result<(DiscreteHamiltonian, FactoredCoupling)> {
        let n = self.kin_diag.len();
        let mut free = self.even()?.to_dense();
        for i in 0..n {
            free[(i, i)] += self.pot[i];
        }
        let support: Vec<usize> = (0..n).filter(|&i| self.pot[i] != 0.0).collect();
        let g = if self.coupling == 0.0 { 1.0 } else { self.coupling };
        let a = Matrix::from_fn(support.len(), n, |r, c| {
            if support[r] == c {
                sqrt(abs(self.pot[c] / g))
            } else {
                0.0
            }
        });
        let j = support
            .iter()
            .map(|&i| if self.pot[i] / g >= 0.0 { 1.0 } else { -1.0 })
            .collect();
        Ok((DiscreteHamiltonian::new(free)?, FactoredCoupling::new(a, j, g)?))
    }
}

/// Exact resolvent of `−2∂²_r − α·δ(r)` on the line, or on `[−L, L]` with
/// Dirichlet walls when a finite half-width is given.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeltaLimitN2 {
    pub alpha: f64,
    pub z: f64,
    k: f64,
    wall: f64,
    denom: f64,
    coeff: f64,
}

impl DeltaLimitN2 {
    pub fn new(alpha: f64, z: f64) -> Result<Self> {
        Self::walled(alpha, z, f64::INFINITY)
    }

    pub fn walled(alpha: f64, z: f64, half_width: f64) -> Result<Self> {
        if !(z > 0.0) || !alpha.is_finite() || !(half_width > 0.0) {
            return Err(Error::domain(format!(
                "limit resolvent needs z > 0 and finite α, got z = {z}, α = {alpha}"
            )));
        }
        let k = sqrt(0.5 * z);
        let mut s = Self {
            alpha,
            z,
            k,
            wall: half_width,
            denom: 1.0,
            coeff: 0.0,
        };
        let phi = s.free(0.0, 0.0);
        s.denom = 1.0 - alpha * phi;
        if abs(s.denom) < 1e-12 {
            return Err(Error::Pole {
                z,
                pole: Self::pole(alpha).unwrap_or(f64::NAN),
            });
        }
        s.coeff = alpha / s.denom;
        Ok(s)
    }

    /// The value of `z` at which `1 − α/(2√(2z))` vanishes, for `α > 0`.
    pub fn pole(alpha: f64) -> Option<f64> {
        (alpha > 0.0).then(|| alpha * alpha / 8.0)
    }

    /// `φ̃(z)`, the diagonal of the free kernel at the origin.
    pub fn phi(&self) -> f64 {
        self.free(0.0, 0.0)
    }

    /// `(1 − α·φ̃(z))⁻¹`.
    pub fn scalar_inverse(&self) -> f64 {
        1.0 / self.denom
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    fn wall_factors(&self, lo: f64, hi: f64) -> (f64, f64, f64) {
        let l = self.wall;
        let k = self.k;
        let a = 1.0 - exp(-2.0 * k * (lo + l));
        let b = 1.0 - exp(-2.0 * k * (l - hi));
        let d = 2.0 * k * (1.0 - exp(-4.0 * k * l));
        (a, b, d)
    }

    /// Kernel of `(−2∂² + z)⁻¹`, i.e. `½G_{z/2}` with the wall correction.
    pub fn free(&self, x: f64, y: f64) -> f64 {
        let (lo, hi) = if x <= y { (x, y) } else { (y, x) };
        if lo <= -self.wall || hi >= self.wall {
            return 0.0;
        }
        let (a, b, d) = self.wall_factors(lo, hi);
        0.5 * exp(-self.k * (hi - lo)) * a * b / d
    }

    pub fn kernel(&self, x: f64, y: f64) -> f64 {
        self.free(x, y) + self.coeff * self.free(x, 0.0) * self.free(0.0, y)
    }

    /// Kernel table on `targets × sources` (no quadrature weights).
    pub fn table(&self, targets: &[f64], sources: &[f64]) -> Matrix {
        Matrix::from_fn(targets.len(), sources.len(), |i, j| {
            self.kernel(targets[i], sources[j])
        })
    }

    /// Nyström resolvent on a quadrature grid, as a [`ResolventReport`].
    pub fn resolvent(&self, grid: &QuadratureGrid) -> Result<ResolventReport> {
        let w = &grid.weights;
        let t = Matrix::from_fn(grid.len(), grid.len(), |i, j| {
            sqrt(w[i]) * self.kernel(grid.nodes[i], grid.nodes[j]) * sqrt(w[j])
        });
        report(self.z, t, ResolventMethod::Limit, abs(self.scalar_inverse()))
    }

    /// `y ← W̃^{1/2}·K_even·W̃^{1/2}·x` on the nonnegative nodes, where
    /// `K_even(x, y) = ½(K(x, y) + K(x, −y))`. Runs in linear time.
    pub fn apply_even(&self, nodes: &[f64], sqrt_w: &[f64], x: &[f64], y: &mut [f64]) {
        let n = nodes.len();
        let k = self.k;
        let l = self.wall;
        let f: Vec<f64> = x.iter().zip(sqrt_w).map(|(a, b)| a * b).collect();
        let d = 2.0 * k * (1.0 - exp(-4.0 * k * l));
        let a: Vec<f64> = nodes.iter().map(|&t| 1.0 - exp(-2.0 * k * (t + l))).collect();
        let b: Vec<f64> = nodes.iter().map(|&t| 1.0 - exp(-2.0 * k * (l - t))).collect();
        // Same-side part: Σⱼ e^{−k|xᵢ−xⱼ|}·a(min)·b(max)/d.
        let mut acc = vec![0.0; n];
        let mut fwd = 0.0;
        for i in 0..n {
            if i > 0 {
                fwd *= exp(-k * (nodes[i] - nodes[i - 1]));
            }
            fwd += a[i] * f[i];
            acc[i] = b[i] * fwd;
        }
        let mut bwd = 0.0;
        for i in (0..n.saturating_sub(1)).rev() {
            bwd = exp(-k * (nodes[i + 1] - nodes[i])) * (bwd + b[i + 1] * f[i + 1]);
            acc[i] += a[i] * bwd;
        }
        // Mirror part: G(x, −y) = e^{−k(x+y)}·b(x)·b(y)/d.
        let p: Vec<f64> = nodes.iter().zip(&b).map(|(&t, bb)| exp(-k * t) * bb).collect();
        let mirror: f64 = p.iter().zip(&f).map(|(a, b)| a * b).sum();
        // Contact part: coeff·φ(x)φ(y) with φ(x) = free(x, 0).
        let phi: Vec<f64> = nodes.iter().map(|&t| self.free(t, 0.0)).collect();
        let contact: f64 = phi.iter().zip(&f).map(|(a, b)| a * b).sum();
        for i in 0..n {
            let same = 0.5 * acc[i] / d;
            let mir = 0.5 * p[i] * mirror / d;
            y[i] = sqrt_w[i] * (0.5 * (same + mir) + self.coeff * phi[i] * contact);
        }
    }
}

/// Kernel table of the free resolvent `½G_{z/2}(r − r′)`.
pub fn free_resolvent_n2(z: f64, targets: &[f64], sources: &[f64]) -> Result<Matrix> {
    Ok(DeltaLimitN2::new(0.0, z)?.table(targets, sources))
}

/// `R(z)` on a Nyström grid for the two-particle problem.
pub fn delta_limit_resolvent_n2(alpha: f64, z: f64, grid: &QuadratureGrid) -> Result<ResolventReport> {
    DeltaLimitN2::new(alpha, z)?.resolvent(grid)
}

/// Limit resolvent assembled from the factored coupling of `g·V`:
/// `R₀ + g·S*(1 − g·φ)⁻¹·J·S` with `S = v ⊗ S̃`, `φ = |u⟩⟨v| ⊗ φ̃`, the
/// auxiliary variable discretized on `aux`.
pub fn factored_limit_resolvent(
    v: &Potential,
    g: f64,
    z: f64,
    aux: &QuadratureGrid,
    grid: &QuadratureGrid,
) -> Result<ResolventReport> {
    let free = DeltaLimitN2::new(0.0, z)?;
    let phi_t = free.phi();
    let f = v.factorize();
    let m = aux.len();
    let vv: Vec<f64> = aux.nodes.iter().map(|&r| f.v(r)).collect();
    let uu: Vec<f64> = aux.nodes.iter().map(|&r| f.u(r)).collect();
    // (1 − g·φ) as an m×m table in the weighted auxiliary space.
    let one_minus = Matrix::from_fn(m, m, |i, j| {
        let delta = if i == j { 1.0 } else { 0.0 };
        delta - g * phi_t * uu[i] * vv[j] * aux.weights[j]
    });
    let lu = Lu::factor(&one_minus).map_err(|_| Error::Pole {
        z,
        pole: DeltaLimitN2::pole(g * v.integral()).unwrap_or(f64::NAN),
    })?;
    // J·S maps to u·s̃; S* pairs with v.
    let sol = lu.solve(&uu);
    let scalar: f64 = g * (0..m).map(|i| vv[i] * aux.weights[i] * sol[i]).sum::<f64>();
    if !scalar.is_finite() {
        return Err(Error::Pole {
            z,
            pole: DeltaLimitN2::pole(g * v.integral()).unwrap_or(f64::NAN),
        });
    }
    let w = &grid.weights;
    let t = Matrix::from_fn(grid.len(), grid.len(), |i, j| {
        let (x, y) = (grid.nodes[i], grid.nodes[j]);
        sqrt(w[i]) * (free.free(x, y) + scalar * free.free(x, 0.0) * free.free(0.0, y)) * sqrt(w[j])
    });
    report(z, t, ResolventMethod::Limit, abs(1.0 / (1.0 - g * phi_t * v.integral())))
}

/// Auxiliary grid resolving the support of `v`, with a break at the origin.
pub fn auxiliary_grid(v: &Potential, per_panel: usize) -> Result<QuadratureGrid> {
    let r = v.effective_radius(1e-16);
    let s = v.support_radius();
    let mut breaks = vec![-r, 0.0, r];
    if s.is_finite() && s < r {
        breaks = vec![-s, 0.0, s];
    }
    let mut fine = Vec::new();
    for w in breaks.windows(2) {
        let panels = 16;
        for p in 0..panels {
            let t = p as f64 / panels as f64;
            // Cluster panels toward the origin for slowly decaying profiles.
            let tt = if w[0] < 0.0 { 1.0 - (1.0 - t) * (1.0 - t) } else { t * t };
            fine.push(w[0] + (w[1] - w[0]) * tt);
        }
    }
    fine.push(breaks[breaks.len() - 1]);
    fine.dedup();
    QuadratureGrid::composite_gauss(&fine, per_panel)
}

/// Relative Frobenius distance between the factored limit resolvents of
/// `g₁V₁` and `g₂V₂` on `grid`.
pub fn vfree_factor_check(
    v1: &Potential,
    g1: f64,
    v2: &Potential,
    g2: f64,
    z: f64,
    grid: &QuadratureGrid,
) -> Result<f64> {
    let r1 = factored_limit_resolvent(v1, g1, z, &auxiliary_grid(v1, 12)?, grid)?;
    let r2 = factored_limit_resolvent(v2, g2, z, &auxiliary_grid(v2, 12)?, grid)?;
    relative_frobenius(&r1.table, &r2.table)
}

/// Operator-norm distance in the even sector between the grid resolvent of
/// `H_ε` and the exact walled limit resolvent at the same `z`.
pub fn pair_resolvent_distance(h: &PairHamiltonian, limit: &DeltaLimitN2) -> Result<f64> {
    let t = h.even()?;
    let lu = t.factor_shifted(limit.z)?;
    pair_distance_with(&lu, h.grid(), limit)
}

fn pair_distance_with(lu: &TridiagLu, grid: &PairGrid, limit: &DeltaLimitN2) -> Result<f64> {
    let nodes = grid.half_nodes().to_vec();
    let sqrt_w: Vec<f64> = grid.even_weights().iter().map(|w| sqrt(*w)).collect();
    let n = nodes.len();
    let apply = |x: &[f64], y: &mut [f64]| {
        let mut r = x.to_vec();
        lu.solve_in_place(&mut r);
        limit.apply_even(&nodes, &sqrt_w, x, y);
        for i in 0..n {
            y[i] = r[i] - y[i];
        }
    };
    let op = FnOperator {
        rows: n,
        cols: n,
        forward: &apply,
        transpose: &apply,
    };
    lanczos_norm(&op, PowerIteration::default())
}

/// `‖(H_ε + z)⁻¹‖` from the even-sector ground energy.
pub fn pair_resolvent_norm(h: &PairHamiltonian, z: f64) -> Result<f64> {
    let e = h.ground_energy_even()?;
    if e + z <= 0.0 {
        return Err(Error::Pole { z, pole: -e });
    }
    Ok(1.0 / (e + z))
}

/// Both sides of `‖R_ε(z) − R(z)‖ ≤ (1 + |z − z₀|·C)²·‖R_ε(z₀) − R(z₀)‖`
/// with `C = ‖R_ε(z)‖`.
pub fn resolvent_diff_propagation(h: &PairHamiltonian, alpha: f64, z: f64, z0: f64) -> Result<(f64, f64)> {
    let l = h.grid().half_width();
    let lhs = pair_resolvent_distance(h, &DeltaLimitN2::walled(alpha, z, l)?)?;
    let base = pair_resolvent_distance(h, &DeltaLimitN2::walled(alpha, z0, l)?)?;
    let c = pair_resolvent_norm(h, z)?;
    let f = 1.0 + abs(z - z0) * c;
    Ok((lhs, f * f * base))
}

/// Eigenvalues of a dense symmetric table, ascending.
pub fn spectrum(h: &Matrix) -> Result<Vec<f64>> {
    Ok(symmetric_eigen(h)?.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potentials::Shape;
    use approx::assert_relative_eq;

    #[test]
    fn two_by_two_example() {
        let h0 = DiscreteHamiltonian::new(Matrix::identity(2)).unwrap();
        let a = Matrix::from_row_major(1, 2, vec![1.0, 0.0]).unwrap();
        let c = FactoredCoupling::new(a, vec![1.0], 1.0).unwrap();
        let r = krein_resolvent(&h0, &c, 1.0).unwrap();
        assert_relative_eq!(r.table[(0, 0)], 1.0, epsilon = 1e-14);
        assert_relative_eq!(r.table[(1, 1)], 0.5, epsilon = 1e-14);
        assert_relative_eq!(r.table[(0, 1)], 0.0, epsilon = 1e-14);
    }

    #[test]
    fn zero_coupling_is_free() {
        let h0 = DiscreteHamiltonian::laplacian(3.0, 12, 2.0).unwrap();
        let a = Matrix::from_fn(2, 12, |i, j| (i + j) as f64 * 0.1);
        let c = FactoredCoupling::new(a, vec![1.0, -1.0], 0.0).unwrap();
        let k = krein_resolvent(&h0, &c, 2.0).unwrap();
        let d = direct_resolvent(h0.matrix(), 2.0).unwrap();
        assert!(relative_frobenius(&k.table, &d.table).unwrap() < 1e-15);
    }

    #[test]
    fn singular_point_detected() {
        // H = 1 − 2·e₀e₀ᵀ has eigenvalue −1, so z = 1 is excluded.
        let h0 = DiscreteHamiltonian::new(Matrix::identity(2)).unwrap();
        let a = Matrix::from_row_major(1, 2, vec![1.0, 0.0]).unwrap();
        let c = FactoredCoupling::new(a, vec![1.0], 2.0).unwrap();
        assert!(matches!(krein_resolvent(&h0, &c, 1.0), Err(Error::NotInvertible(_))));
        let z = locate_singular_parameter(&h0, &c, 0.5, 1.7, 1e-13).unwrap();
        assert_relative_eq!(z, 1.0, epsilon = 1e-10);
    }

    #[test]
    fn bad_signs_rejected() {
        let a = Matrix::identity(2);
        assert!(FactoredCoupling::new(a, vec![1.0, 0.5], 1.0).is_err());
    }

    #[test]
    fn selftest_small() {
        let r = krein_selftest(SelfTestOptions {
            trials: 10,
            max_dim: 20,
            seed: 3,
        })
        .unwrap();
        assert_eq!(r.passed_count(1e-10), 10);
    }

    #[test]
    fn pole_of_contact_resolvent() {
        assert_eq!(DeltaLimitN2::pole(2.0), Some(0.5));
        assert!(matches!(DeltaLimitN2::new(2.0, 0.5), Err(Error::Pole { .. })));
        assert!(DeltaLimitN2::pole(-2.0).is_none());
        let r = DeltaLimitN2::new(-2.0, 0.3).unwrap();
        assert!(r.scalar_inverse() < 1.0 && r.scalar_inverse() > 0.0);
    }

    #[test]
    fn even_apply_matches_table() {
        let grid = PairGrid::graded(4.0, 0.2, 0.05, 0.3, 1.2).unwrap();
        let lim = DeltaLimitN2::walled(1.0, 3.0, 4.0).unwrap();
        let nodes = grid.half_nodes();
        let w = grid.even_weights();
        let sw: Vec<f64> = w.iter().map(|x| sqrt(*x)).collect();
        let n = nodes.len();
        let x: Vec<f64> = (0..n).map(|i| (i as f64 * 0.37).sin()).collect();
        let mut y = vec![0.0; n];
        lim.apply_even(nodes, &sw, &x, &mut y);
        for i in 0..n {
            let mut s = 0.0;
            for j in 0..n {
                let ke = 0.5 * (lim.kernel(nodes[i], nodes[j]) + lim.kernel(nodes[i], -nodes[j]));
                s += sw[i] * ke * sw[j] * x[j];
            }
            assert_relative_eq!(y[i], s, epsilon = 1e-13, max_relative = 1e-11);
        }
    }

    #[test]
    fn pair_hamiltonian_basics() {
        let grid = PairGrid::uniform(5.0, 200).unwrap();
        let v = Potential::new(Shape::Box {
            height: 1.0,
            half_width: 1.0,
        })
        .unwrap();
        let free = build_pair_hamiltonian(&v, 0.0, &grid).unwrap();
        assert!(free.ground_energy_even().unwrap() > 0.0);
        let h = build_pair_hamiltonian(&v, 2.0, &grid).unwrap();
        assert!(h.ground_energy_even().unwrap() < 0.0);
        assert_relative_eq!(h.potential_mass(), 2.0 * v.l1_norm(), max_relative = 1e-12);
        // The even sector is part of the full spectrum.
        let full = h.full().unwrap();
        assert_relative_eq!(
            full.eigenvalue(0, 1e-14).unwrap(),
            h.ground_energy_even().unwrap(),
            max_relative = 1e-10
        );
    }

    #[test]
    fn krein_on_pair_hamiltonian() {
        let grid = PairGrid::uniform(4.0, 60).unwrap();
        let v = Potential::unit_box();
        let h = build_pair_hamiltonian(&v, 1.5, &grid).unwrap();
        let (h0, c) = h.factored_even().unwrap();
        let k = krein_resolvent(&h0, &c, 2.0).unwrap();
        let d = direct_resolvent(&h.even().unwrap().to_dense(), 2.0).unwrap();
        assert!(relative_frobenius(&k.table, &d.table).unwrap() < 1e-12);
        assert!(d.asymmetry < 1e-12);
    }
}
