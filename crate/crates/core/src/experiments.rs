//! Convergence sweeps in ε and log-log rate fits.
//!
//! Every sweep is split into independent per-point functions so callers can
//! schedule points in parallel and then reduce them, ordered by ε, with
//! [`assemble`].

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::forms::{q_eps_form, q_form, WaveFunction};
use crate::kernels::{
    discretize, grids_for, hs_norm_streaming, Difference, GridSpec, Kernel, KernelClass, KernelMeta,
    DEFAULT_ENTRY_CAP,
};
use crate::krein::{build_pair_hamiltonian, pair_resolvent_distance, DeltaLimitN2, PairGrid};
use crate::math::{abs, ln, powi};
use crate::potentials::{coupling_for_alpha, CouplingSchedule, Potential};

/// Errors below this are indistinguishable from rounding.
pub const NUMERICAL_FLOOR: f64 = 1e-13;

/// Representative rate used for statements that hold for every `s < 1`.
pub const OPEN_INTERVAL_RATE: f64 = 0.75;

/// Admissible discretization-to-error ratio on deliberately coarse grids.
pub const COARSE_DISC_RATIO: f64 = 0.5;

/// `ε = 2^{−first}, …, 2^{−last}`.
pub fn geometric_eps(first: i32, last: i32) -> Vec<f64> {
    (first..=last).map(|m| powi(0.5, m)).collect()
}

/// What a sweep measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepTarget {
    Kernel(KernelClass),
    ResolventN2,
}

impl SweepTarget {
    pub fn name(&self) -> String {
        match self {
            SweepTarget::Kernel(c) => c.name().to_string(),
            SweepTarget::ResolventN2 => "resolvent-n2".to_string(),
        }
    }
}

/// Grid of the two-particle relative coordinate used by resolvent sweeps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairSweepSpec {
    pub half_width: f64,
    /// Spacing away from the potential.
    pub coarse_spacing: f64,
}

impl Default for PairSweepSpec {
    fn default() -> Self {
        Self {
            half_width: 10.0,
            coarse_spacing: 0.002,
        }
    }
}

/// A convergence sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPlan {
    pub target: SweepTarget,
    /// Strictly decreasing, positive.
    pub eps: Vec<f64>,
    pub z: Vec<f64>,
    /// Unscaled profile `V`.
    pub potential: Potential,
    pub schedule: CouplingSchedule,
    pub grid: GridSpec,
    pub pair: PairSweepSpec,
    /// Resolution factor of the second grid in the two-grid error estimate.
    pub refine: f64,
    /// Also measure operator-norm differences.
    pub op_norm: bool,
    /// Largest admissible ratio of discretization to convergence error.
    pub max_disc_ratio: f64,
    pub theory_rate: Option<f64>,
}

impl SweepPlan {
    pub fn new(target: SweepTarget, potential: Potential) -> Self {
        let grid = match target {
            SweepTarget::Kernel(c) => default_grid(c),
            SweepTarget::ResolventN2 => GridSpec::one_dimensional(),
        };
        let coarse = matches!(target, SweepTarget::Kernel(c) if is_coarse(c));
        Self {
            target,
            eps: geometric_eps(1, if coarse { 7 } else { 10 }),
            z: alloc::vec![2.0],
            potential,
            schedule: CouplingSchedule::constant(1.0),
            grid,
            pair: PairSweepSpec::default(),
            refine: if coarse { 1.25 } else { 1.5 },
            op_norm: false,
            max_disc_ratio: if coarse { COARSE_DISC_RATIO } else { 0.1 },
            theory_rate: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.eps.is_empty() || self.eps.iter().any(|e| !(*e > 0.0 && e.is_finite())) {
            return Err(Error::domain("sweep ε values must be positive and finite"));
        }
        if self.eps.windows(2).any(|w| !(w[1] < w[0])) {
            return Err(Error::domain("sweep ε values must be strictly decreasing"));
        }
        if self.z.is_empty() || self.z.iter().any(|z| !(*z > 0.0)) {
            return Err(Error::domain("sweep z values must be positive"));
        }
        if !(self.refine > 1.0) {
            return Err(Error::domain("refinement factor must exceed 1"));
        }
        Ok(())
    }

    /// Rate guaranteed by the convergence statements for this plan.
    pub fn theory(&self) -> Result<f64> {
        if let Some(s) = self.theory_rate {
            return Ok(s);
        }
        theory_rate(self.target, &self.potential, &self.schedule)
    }
}

/// Default grids: full 1D grids for `T` and `φ12`, the reduced three-variable
/// grid for the `(1, j)` fiber and a coarse grid for the `(i, j)` fiber.
pub fn default_grid(class: KernelClass) -> GridSpec {
    match class {
        KernelClass::T | KernelClass::Phi12 => GridSpec::one_dimensional(),
        KernelClass::Phi1j | KernelClass::Phi2j | KernelClass::Phi1jFiber | KernelClass::Phi2jFiber => GridSpec {
            n_support: 16,
            n_free: 96,
            half_width: 8.0,
        },
        _ => GridSpec {
            n_support: 8,
            n_free: 20,
            half_width: 5.0,
        },
    }
}

/// Whether a class is only ever computed on deliberately coarse grids.
pub fn is_coarse(class: KernelClass) -> bool {
    matches!(
        class,
        KernelClass::Phiij | KernelClass::PhiijFiber | KernelClass::SchurB | KernelClass::SchurBFiber
    )
}

/// `s` from the moments of `V` and the coupling schedule.
pub fn theory_rate(target: SweepTarget, v: &Potential, schedule: &CouplingSchedule) -> Result<f64> {
    let m = v.max_moment_order()?;
    let s = match target {
        SweepTarget::Kernel(KernelClass::T) | SweepTarget::Kernel(KernelClass::Phi12) => m,
        _ => m.min(OPEN_INTERVAL_RATE),
    };
    Ok(match (target, schedule.rate()) {
        (SweepTarget::ResolventN2, Some(r)) => s.min(r),
        _ => s,
    })
}

/// One row of a sweep table.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub target: String,
    pub eps: f64,
    pub z: f64,
    pub error_hs: f64,
    pub error_op: Option<f64>,
    pub grid_n: usize,
    pub grid_l: f64,
    pub disc_err_est: f64,
}

impl SweepRow {
    /// The error the fit uses: the operator norm when measured, else HS.
    pub fn error(&self) -> f64 {
        self.error_op.unwrap_or(self.error_hs)
    }

    pub fn accepted(&self, max_ratio: f64) -> bool {
        self.disc_err_est <= max_ratio * self.error()
    }
}

/// Log-log least-squares fit of `error ≈ C·ε^ŝ`.
#[derive(Debug, Clone, PartialEq)]
pub struct RateFitReport {
    pub samples: Vec<(f64, f64)>,
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// Number of smallest-ε samples the fit used.
    pub fitted: usize,
    pub theory: Option<f64>,
    /// False when the fitted slope is indistinguishable from zero.
    pub converging: bool,
}

impl RateFitReport {
    /// `ŝ ≥ 0.9·s − slack`.
    pub fn meets_theory(&self, slack: f64) -> Option<bool> {
        self.theory.map(|s| self.slope >= 0.9 * s - slack)
    }
}

/// Fits the slope over the asymptotic tail: the smallest half of the ε
/// values, and never fewer than three.
pub fn fit_rate(samples: &[(f64, f64)]) -> Result<RateFitReport> {
    if samples.len() < 4 {
        return Err(Error::DegenerateFit(format!(
            "need at least 4 samples, got {}",
            samples.len()
        )));
    }
    if samples.iter().any(|(e, err)| !(*e > 0.0) || !(*err > 0.0) || !err.is_finite()) {
        return Err(Error::DegenerateFit("ε and errors must be positive and finite".into()));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    let k = sorted.len().div_ceil(2).max(3);
    let tail = &sorted[..k];
    if tail.iter().any(|(_, err)| *err < NUMERICAL_FLOOR) {
        return Err(Error::DegenerateFit(format!(
            "errors fall below the numerical floor {NUMERICAL_FLOOR:e}"
        )));
    }
    let xs: Vec<f64> = tail.iter().map(|(e, _)| ln(*e)).collect();
    let ys: Vec<f64> = tail.iter().map(|(_, err)| ln(*err)).collect();
    let n = k as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(Error::DegenerateFit("all ε values coincide".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy == 0.0 { 1.0 } else { (sxy * sxy) / (sxx * syy) };
    Ok(RateFitReport {
        samples: samples.to_vec(),
        slope,
        intercept,
        r_squared,
        fitted: k,
        theory: None,
        converging: slope > 0.05,
    })
}

/// Rows and fit of one sweep at one `z`.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepReport {
    pub target: String,
    pub z: f64,
    pub rows: Vec<SweepRow>,
    /// Rows whose discretization estimate stayed within the admissible ratio.
    pub accepted: Vec<bool>,
    pub fit: RateFitReport,
    /// Errors strictly decrease along the whole sweep.
    pub monotone: bool,
}

/// Orders rows by decreasing ε, discards rows dominated by discretization
/// error and fits the rest.
pub fn assemble(target: &str, z: f64, mut rows: Vec<SweepRow>, max_disc_ratio: f64, theory: Option<f64>) -> Result<SweepReport> {
    rows.sort_by(|a, b| b.eps.total_cmp(&a.eps));
    let accepted: Vec<bool> = rows.iter().map(|r| r.accepted(max_disc_ratio)).collect();
    let samples: Vec<(f64, f64)> = rows
        .iter()
        .zip(&accepted)
        .filter(|(_, a)| **a)
        .map(|(r, _)| (r.eps, r.error()))
        .collect();
    if samples.len() >= 2 {
        let last = samples[samples.len() - 1].1;
        let prev = samples[samples.len() - 2].1;
        if last >= prev {
            return Err(Error::GridResolution(format!(
                "{target}: errors at the two smallest ε are not decreasing ({prev:e}, {last:e})"
            )));
        }
    }
    let mut fit = fit_rate(&samples)?;
    fit.theory = theory;
    let monotone = rows.windows(2).all(|w| w[1].error() < w[0].error());
    Ok(SweepReport {
        target: target.to_string(),
        z,
        rows,
        accepted,
        fit,
        monotone,
    })
}

/// HS (and optionally operator) norm of `K_ε − K_0` at `Q = 0` on `spec`,
/// with `k0` the kernel at ε = 0.
pub fn kernel_difference(k0: &Kernel, eps: f64, spec: &GridSpec, op_norm: bool) -> Result<(f64, Option<f64>, usize)> {
    let class = k0.class;
    let ke = k0.with_eps(eps)?;
    let (t, s) = grids_for(class, k0.potential(), spec)?;
    let diff = Difference { a: &ke, b: k0 };
    let hs = hs_norm_streaming(&diff, &t, &s)?;
    let op = if op_norm {
        let meta = KernelMeta {
            class,
            eps,
            z: k0.z,
            q: 0.0,
            coarse: is_coarse(class),
        };
        Some(discretize(&diff, meta, &t, &s, DEFAULT_ENTRY_CAP)?.op_norm()?)
    } else {
        None
    };
    Ok((hs, op, t.len()))
}

/// A kernel sweep at one `z`, holding the ε = 0 kernel (and its Green's
/// function table) for reuse across points.
#[derive(Debug, Clone)]
pub struct KernelSweep<'a> {
    plan: &'a SweepPlan,
    k0: Kernel,
}

impl<'a> KernelSweep<'a> {
    pub fn new(plan: &'a SweepPlan, z: f64) -> Result<Self> {
        plan.validate()?;
        let class = match plan.target {
            SweepTarget::Kernel(c) => c,
            SweepTarget::ResolventN2 => return Err(Error::domain("plan target is not a kernel class")),
        };
        Ok(Self {
            plan,
            k0: Kernel::new(class, 0.0, z, 0.0, &plan.potential)?,
        })
    }

    /// One point with a two-grid discretization estimate.
    pub fn point(&self, eps: f64) -> Result<SweepRow> {
        let plan = self.plan;
        let (hs, op, n) = kernel_difference(&self.k0, eps, &plan.grid, plan.op_norm)?;
        let fine = plan.grid.refined(plan.refine);
        let (hs_f, op_f, _) = kernel_difference(&self.k0, eps, &fine, plan.op_norm)?;
        let disc = match (op, op_f) {
            (Some(a), Some(b)) => abs(a - b),
            _ => abs(hs - hs_f),
        };
        Ok(SweepRow {
            target: self.k0.class.name().to_string(),
            eps,
            z: self.k0.z,
            error_hs: hs,
            error_op: op,
            grid_n: n,
            grid_l: plan.grid.half_width,
            disc_err_est: disc,
        })
    }

    pub fn finish(&self, rows: Vec<SweepRow>) -> Result<SweepReport> {
        assemble(
            self.k0.class.name(),
            self.k0.z,
            rows,
            self.plan.max_disc_ratio,
            Some(self.plan.theory()?),
        )
    }
}

/// Serial kernel sweep, one report per `z`.
pub fn kernel_convergence_sweep(plan: &SweepPlan) -> Result<Vec<SweepReport>> {
    plan.z
        .iter()
        .map(|&z| {
            let sweep = KernelSweep::new(plan, z)?;
            let rows = plan.eps.iter().map(|&e| sweep.point(e)).collect::<Result<Vec<_>>>()?;
            sweep.finish(rows)
        })
        .collect()
}

/// Distance between the grid resolvent of `H_ε` and the walled limit
/// resolvent on one pair grid.
pub fn pair_distance(v: &Potential, g: f64, alpha: f64, eps: f64, z: f64, grid: &PairGrid) -> Result<f64> {
    let ve = v.scale(eps)?;
    let h = build_pair_hamiltonian(&ve, g, grid)?;
    let limit = DeltaLimitN2::walled(alpha, z, grid.half_width())?;
    if abs(1.0 - alpha * limit.phi()) < 1e-3 {
        return Err(Error::Pole {
            z,
            pole: DeltaLimitN2::pole(alpha).unwrap_or(f64::NAN),
        });
    }
    pair_resolvent_distance(&h, &limit)
}

/// One point of the two-particle resolvent sweep. The reported error is the
/// one on the refined grid.
pub fn resolvent_sweep_point(plan: &SweepPlan, eps: f64, z: f64) -> Result<SweepRow> {
    let v = &plan.potential;
    let alpha = plan.schedule.alpha(v);
    let g = plan.schedule.at(eps);
    let ve = v.scale(eps)?;
    let grid = PairGrid::for_potential(&ve, plan.pair.half_width, plan.pair.coarse_spacing)?;
    let fine = grid.refined();
    let coarse_err = pair_distance(v, g, alpha, eps, z, &grid)?;
    let fine_err = pair_distance(v, g, alpha, eps, z, &fine)?;
    Ok(SweepRow {
        target: SweepTarget::ResolventN2.name(),
        eps,
        z,
        error_hs: fine_err,
        error_op: Some(fine_err),
        grid_n: fine.half_nodes().len(),
        grid_l: plan.pair.half_width,
        disc_err_est: abs(coarse_err - fine_err),
    })
}

/// Serial two-particle resolvent sweep, one report per `z`.
pub fn resolvent_convergence_sweep_n2(plan: &SweepPlan) -> Result<Vec<SweepReport>> {
    plan.validate()?;
    let theory = plan.theory()?;
    plan.z
        .iter()
        .map(|&z| {
            let rows = plan
                .eps
                .iter()
                .map(|&e| resolvent_sweep_point(plan, e, z))
                .collect::<Result<Vec<_>>>()?;
            assemble(&SweepTarget::ResolventN2.name(), z, rows, plan.max_disc_ratio, Some(theory))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenRow {
    pub eps: f64,
    pub energy: f64,
    /// `|E_ε − E|`.
    pub error: f64,
    pub under_resolved: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenReport {
    pub alpha: f64,
    /// `−α²/8` for `α > 0`, else 0.
    pub reference: f64,
    pub rows: Vec<EigenRow>,
}

impl EigenReport {
    pub fn decreasing(&self) -> bool {
        self.rows.windows(2).all(|w| w[1].error <= w[0].error)
    }
}

/// Even-sector ground energy of `H_ε` at one ε.
pub fn ground_energy_point(v: &Potential, alpha: f64, eps: f64, grid: &PairGrid) -> Result<EigenRow> {
    let g = coupling_for_alpha(v, alpha)?;
    let h = build_pair_hamiltonian(&v.scale(eps)?, g, grid)?;
    let energy = h.ground_energy_even()?;
    let reference = DeltaLimitN2::pole(alpha).map_or(0.0, |p| -p);
    Ok(EigenRow {
        eps,
        energy,
        error: abs(energy - reference),
        under_resolved: h.under_resolved,
    })
}

/// Ground energies along an ε list against `−α²/8`.
pub fn eigenvalue_convergence_n2(v: &Potential, alpha: f64, eps: &[f64], grid: &PairGrid) -> Result<EigenReport> {
    let rows = eps
        .iter()
        .map(|&e| ground_energy_point(v, alpha, e, grid))
        .collect::<Result<Vec<_>>>()?;
    Ok(EigenReport {
        alpha,
        reference: DeltaLimitN2::pole(alpha).map_or(0.0, |p| -p),
        rows,
    })
}

/// `|q_ε(ψ) − q(ψ)|` along an ε list for a constant coupling `g`.
pub fn form_gaps(psi: &WaveFunction, v: &Potential, g: f64, eps: &[f64], shift: f64) -> Result<Vec<(f64, f64)>> {
    let q = q_form(psi, g * v.integral(), shift)?;
    eps.iter()
        .map(|&e| Ok((e, abs(q_eps_form(psi, &v.scale(e)?, g, shift)? - q))))
        .collect()
}

/// Rate of `q_ε(ψ) → q(ψ)`; the theory rate is ½ whenever `V` has a finite
/// `|r|^{1/2}` moment.
pub fn form_convergence(psi: &WaveFunction, v: &Potential, g: f64, eps: &[f64]) -> Result<RateFitReport> {
    let gaps = form_gaps(psi, v, g, eps, 0.0)?;
    let mut fit = fit_rate(&gaps)?;
    let half_moment = v.moment(0.25).map(|m| !m.divergent).unwrap_or(false);
    fit.theory = half_moment.then_some(0.5);
    Ok(fit)
}
