//! Verification suites behind each subcommand. Every suite returns a
//! [`SuiteReport`] with named checks and writes its artifacts into the
//! output directory. Numerical failures become failed checks; only IO
//! problems abort a suite.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use contact_limit_core::experiments::{
    assemble, form_convergence, geometric_eps, is_coarse, resolvent_sweep_point, theory_rate,
    KernelSweep, RateFitReport, SweepPlan, SweepReport, SweepRow, SweepTarget,
};
use contact_limit_core::forms::{
    check_form_bounds, q_eps_form, q_form, sandwich_constant, sandwich_sides, sufficient_shift, test_family,
};
use contact_limit_core::greens::{
    check_holder_shift_l1, green_closed, green_partial_integral, green_quad, green_radial, check_shift_l2, marginal_grid,
    GreenParams, QuadSpec,
};
use contact_limit_core::kernels::{
    discretize, grids_for, norm_bound, schur_bound_b, schur_bound_f, schur_table, Kernel, KernelClass, KernelMeta,
    DEFAULT_ENTRY_CAP,
};
use contact_limit_core::krein::{
    auxiliary_grid, build_pair_hamiltonian, delta_limit_resolvent_n2, factored_limit_resolvent, krein_selftest,
    vfree_factor_check, PairGrid, SelfTestOptions,
};
use contact_limit_core::experiments::{default_grid, eigenvalue_convergence_n2, PairSweepSpec};
use contact_limit_core::linalg::relative_frobenius;
use contact_limit_core::potentials::{coupling_for_alpha, CouplingSchedule, Potential};
use contact_limit_core::quadrature::QuadratureGrid;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{parse_class, ConfigError, RunConfig};
use crate::io::{export_table, write_csv, TableHeader, AxisHeader};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub limit: f64,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    /// `value ≤ limit`.
    pub fn at_most(name: impl Into<String>, value: f64, limit: f64) -> Self {
        Self {
            name: name.into(),
            value,
            limit,
            passed: value <= limit,
            detail: String::new(),
        }
    }

    /// `value ≥ limit`.
    pub fn at_least(name: impl Into<String>, value: f64, limit: f64) -> Self {
        Self {
            name: name.into(),
            value,
            limit,
            passed: value >= limit,
            detail: String::new(),
        }
    }

    pub fn flag(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            value: f64::from(u8::from(passed)),
            limit: 1.0,
            passed,
            detail: detail.into(),
        }
    }

    pub fn failed(name: impl Into<String>, err: impl std::fmt::Display) -> Self {
        Self {
            name: name.into(),
            value: f64::NAN,
            limit: f64::NAN,
            passed: false,
            detail: err.to_string(),
        }
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = detail.into();
        self
    }
}

/// Slope fit of one sweep as reported in the summary.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitSummary {
    pub target: String,
    pub label: String,
    pub z: f64,
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub theory_s: Option<f64>,
    pub fitted: usize,
    pub converging: bool,
    pub monotone: bool,
    pub rejected_eps: Vec<f64>,
    pub passed: bool,
}

impl FitSummary {
    fn from_sweep(r: &SweepReport, label: &str, passed: bool) -> Self {
        let mut s = Self::from_fit(&r.target, label, r.z, &r.fit, passed);
        s.monotone = r.monotone;
        s.rejected_eps = r
            .rows
            .iter()
            .zip(&r.accepted)
            .filter(|(_, a)| !**a)
            .map(|(row, _)| row.eps)
            .collect();
        s
    }

    fn from_fit(target: &str, label: &str, z: f64, f: &RateFitReport, passed: bool) -> Self {
        Self {
            target: target.to_string(),
            label: label.to_string(),
            z,
            slope: f.slope,
            intercept: f.intercept,
            r_squared: f.r_squared,
            theory_s: f.theory,
            fitted: f.fitted,
            converging: f.converging,
            monotone: f.samples.windows(2).all(|w| w[1].1 < w[0].1),
            rejected_eps: Vec::new(),
            passed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub passed: bool,
    pub checks: Vec<Check>,
    pub fits: Vec<FitSummary>,
    pub artifacts: Vec<String>,
}

impl SuiteReport {
    fn new(suite: &str) -> Self {
        Self {
            suite: suite.to_string(),
            passed: true,
            checks: Vec::new(),
            fits: Vec::new(),
            artifacts: Vec::new(),
        }
    }

    fn finish(mut self) -> Self {
        self.passed = self.checks.iter().all(|c| c.passed) && self.fits.iter().all(|f| f.passed);
        self
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    fn merge(&mut self, other: SuiteReport) {
        self.checks.extend(other.checks);
        self.fits.extend(other.fits);
        self.artifacts.extend(other.artifacts);
    }
}

/// Validated configuration, output directory and worker pool.
pub struct Runner {
    pub cfg: RunConfig,
    pub out: PathBuf,
    pool: rayon::ThreadPool,
}

impl Runner {
    pub fn new(cfg: RunConfig) -> Result<Self, ConfigError> {
        cfg.validate()?;
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.jobs)
            .build()
            .map_err(|e| ConfigError::Invalid(format!("cannot start {} workers: {e}", cfg.jobs)))?;
        Ok(Self {
            out: cfg.out_dir(),
            cfg,
            pool,
        })
    }

    pub fn prepare(&self) -> Result<()> {
        std::fs::create_dir_all(&self.out).with_context(|| format!("creating {}", self.out.display()))
    }

    /// Maps `f` over `items` on the worker pool, keeping the input order.
    pub fn par_map<T: Sync, R: Send>(&self, items: &[T], f: impl Fn(&T) -> R + Sync + Send) -> Vec<R> {
        self.pool.install(|| items.par_iter().map(f).collect())
    }

    fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    fn potential(&self) -> Result<Potential> {
        Ok(self.cfg.potential.build()?)
    }
}

fn csv_out<T: Serialize>(run: &Runner, report: &mut SuiteReport, name: &str, rows: &[T]) -> Result<()> {
    write_csv(&run.path(name), rows)?;
    report.artifacts.push(name.to_string());
    Ok(())
}

fn max_of(xs: impl IntoIterator<Item = f64>) -> f64 {
    xs.into_iter().fold(f64::NEG_INFINITY, |a, b| if b.is_nan() || a.is_nan() { f64::NAN } else { a.max(b) })
}

fn unit_sphere_area(d: u32) -> f64 {
    use std::f64::consts::PI;
    match d {
        1 => 2.0,
        2 => 2.0 * PI,
        3 => 4.0 * PI,
        _ => 2.0 * PI * PI,
    }
}

#[derive(Serialize)]
struct GreenRow {
    index: usize,
    d: u32,
    z: f64,
    r: f64,
    closed: f64,
    quad: f64,
    rel_error: f64,
}

#[derive(Serialize)]
struct MarginalRow {
    d: u32,
    d1: u32,
    z: f64,
    x1: f64,
    marginal: f64,
    reference: f64,
    rel_error: f64,
}

#[derive(Serialize)]
struct L1Row {
    d: u32,
    z: f64,
    integral: f64,
    bound: f64,
    rel_gap: f64,
}

/// Integral representation against closed forms, the marginal identity,
/// the L¹ bound, monotonicity and the one-dimensional shift bound.
pub fn greens_check(run: &Runner) -> Result<SuiteReport> {
    let cfg = &run.cfg;
    let mut report = SuiteReport::new("greens-check");
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let samples: Vec<(u32, f64, Vec<f64>)> = (0..cfg.greens.samples)
        .map(|k| {
            let d = if k % 2 == 0 { 1 } else { 3 };
            let z = rng.gen_range(0.2f64.ln()..8.0f64.ln()).exp();
            let r = rng.gen_range(0.01f64.ln()..10.0f64.ln()).exp();
            let x = if d == 1 {
                vec![if rng.gen_bool(0.5) { r } else { -r }]
            } else {
                let u: [f64; 3] = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
                let n = u.iter().map(|a| a * a).sum::<f64>().sqrt().max(1e-3);
                u.iter().map(|a| a / n * r).collect()
            };
            (d, z, x)
        })
        .collect();

    let tol = cfg.tol(cfg.greens.tolerance);
    let rows = run.par_map(&samples, |(d, z, x)| {
        let p = GreenParams::new(*d, *z)?;
        let closed = green_closed(&p, x)?;
        let quad = green_quad(&p, x, &QuadSpec::for_tolerance(*z, 1e-3 * tol))?;
        let r = x.iter().map(|a| a * a).sum::<f64>().sqrt();
        Ok::<_, contact_limit_core::Error>((*d, *z, r, closed, quad))
    });
    let mut green_rows = Vec::new();
    let mut failure = None;
    for (index, row) in rows.into_iter().enumerate() {
        match row {
            Ok((d, z, r, closed, quad)) => green_rows.push(GreenRow {
                index,
                d,
                z,
                r,
                closed,
                quad,
                rel_error: (quad - closed).abs() / closed,
            }),
            Err(e) => failure = Some(e),
        }
    }
    match failure {
        Some(e) => report.checks.push(Check::failed("quadrature-vs-closed", e)),
        None => report.checks.push(
            Check::at_most("quadrature-vs-closed", max_of(green_rows.iter().map(|r| r.rel_error)), tol)
                .with_detail(format!("{} samples, d ∈ {{1, 3}}", green_rows.len())),
        ),
    }
    csv_out(run, &mut report, "greens_check.csv", &green_rows)?;

    // Monotonicity in |x| and z, and domination of differences when z grows.
    let mono: Vec<bool> = run.par_map(&samples, |(_, z, x)| {
        let r = x.iter().map(|a| a * a).sum::<f64>().sqrt();
        (1..=4).all(|d| {
            let g = |zz: f64, rr: f64| green_radial(d, zz, rr).unwrap_or(f64::NAN);
            let (a, b) = (g(*z, r), g(*z, 1.3 * r));
            let (aq, bq) = (g(z + 1.0, r), g(z + 1.0, 1.3 * r));
            b < a && aq < a && (aq - bq).abs() <= (a - b).abs() * (1.0 + 1e-12)
        })
    });
    let bad = mono.iter().filter(|m| !**m).count();
    report.checks.push(Check::flag(
        "monotonicity",
        bad == 0,
        format!("{bad} of {} samples violate monotonicity in |x|, z or difference domination", mono.len()),
    ));

    let mtol = cfg.tol(cfg.greens.marginal_tolerance);
    let cases: Vec<(u32, u32, f64, f64)> = [(3, 1), (4, 1), (4, 2), (3, 2)]
        .into_iter()
        .flat_map(|(d, d1)| {
            [0.5, 1.0, 4.0].into_iter().flat_map(move |z| {
                let xs: &[f64] = &[0.1, 0.3, 1.5];
                xs.iter().map(move |&x| (d, d1, z, x)).collect::<Vec<_>>()
            })
        })
        .collect();
    let marg = run.par_map(&cases, |&(d, d1, z, x)| {
        let grid = marginal_grid(z)?;
        let mut x1 = vec![0.0; d1 as usize];
        x1[0] = x;
        let m = green_partial_integral(d, d1, z, &x1, &grid)?;
        let reference = green_radial(d1, z, x)?;
        Ok::<_, contact_limit_core::Error>(MarginalRow {
            d,
            d1,
            z,
            x1: x,
            marginal: m,
            reference,
            rel_error: (m - reference).abs() / reference,
        })
    });
    match marg.into_iter().collect::<Result<Vec<_>, _>>() {
        Ok(rows) => {
            report
                .checks
                .push(Check::at_most("marginal-identity", max_of(rows.iter().map(|r| r.rel_error)), mtol));
            csv_out(run, &mut report, "greens_marginal.csv", &rows)?;
        }
        Err(e) => report.checks.push(Check::failed("marginal-identity", e)),
    }

    let l1_cases: Vec<(u32, f64)> = (1..=4).flat_map(|d| [0.5, 1.0, 4.0].map(|z| (d, z))).collect();
    let l1 = run.par_map(&l1_cases, |&(d, z)| {
        let grid = marginal_grid(z)?;
        let mut acc = 0.0;
        for (r, w) in grid.nodes.iter().zip(&grid.weights) {
            acc += w * r.powi(d as i32 - 1) * green_radial(d, z, *r)?;
        }
        let integral = unit_sphere_area(d) * acc;
        let bound = 1.0 / z;
        Ok::<_, contact_limit_core::Error>(L1Row {
            d,
            z,
            integral,
            bound,
            rel_gap: (integral - bound) / bound,
        })
    });
    match l1.into_iter().collect::<Result<Vec<_>, _>>() {
        Ok(rows) => {
            report.checks.push(
                Check::at_most("l1-bound", max_of(rows.iter().map(|r| r.rel_gap)), mtol)
                    .with_detail("∫G ≤ 1/z, relative excess"),
            );
            report.checks.push(
                Check::at_most("l1-equality", max_of(rows.iter().map(|r| r.rel_gap.abs())), mtol)
                    .with_detail("∫G = 1/z for real z"),
            );
            csv_out(run, &mut report, "greens_l1.csv", &rows)?;
        }
        Err(e) => report.checks.push(Check::failed("l1-bound", e)),
    }

    #[derive(Serialize)]
    struct HolderRow {
        d: u32,
        shift: f64,
        lhs: f64,
        log_form: f64,
        ratio: f64,
    }
    let shifts: Vec<(u32, f64)> = (2..=4)
        .flat_map(|d| [1.0, 0.1, 0.01, 0.001].map(|b| (d, b)))
        .collect();
    let holder = run.par_map(&shifts, |&(d, b)| {
        let mut y = vec![0.0; d as usize - 1];
        y[0] = b;
        let h = check_holder_shift_l1(d, 1.0, &y, 0.5, 8)?;
        Ok::<_, contact_limit_core::Error>(HolderRow {
            d,
            shift: b,
            lhs: h.lhs,
            log_form: h.log_form,
            ratio: h.lhs / h.log_form,
        })
    });
    match holder.into_iter().collect::<Result<Vec<_>, _>>() {
        Ok(rows) => {
            // Growth of lhs/((1+|ln|y||)|y|) over the last decade of |y|.
            let growth = max_of(rows.chunks(4).map(|c| c[3].ratio / c[2].ratio));
            report.checks.push(
                Check::at_most("holder-shift-bounded", growth, 1.25)
                    .with_detail("largest ratio(|y|=1e-3)/ratio(|y|=1e-2), d = 2, 3, 4"),
            );
            csv_out(run, &mut report, "greens_holder.csv", &rows)?;
        }
        Err(e) => report.checks.push(Check::failed("holder-shift-bounded", e)),
    }

    let grid = QuadratureGrid::trapezoid(40.0, 16001)?;
    let mut worst: f64 = 0.0;
    for lambda in [0.25, 1.0, 4.0] {
        for x in [0.05, 0.5, 3.0, 10.0] {
            let (lhs, rhs) = check_shift_l2(lambda, x, &grid)?;
            worst = worst.max(lhs / rhs);
        }
    }
    report.checks.push(Check::at_most("shift-l2-bound", worst, 1.0).with_detail("largest lhs/rhs"));
    Ok(report.finish())
}

#[derive(Serialize)]
struct KreinRow {
    index: usize,
    dim: usize,
    rank: usize,
    g: f64,
    z: f64,
    krein_error: f64,
    identity_error: f64,
    condition: f64,
}

/// Randomized Krein formula and inverse identity against dense inverses.
pub fn krein_check(run: &Runner) -> Result<SuiteReport> {
    let cfg = &run.cfg;
    let mut report = SuiteReport::new("krein-selftest");
    let opts = SelfTestOptions {
        trials: cfg.krein.trials,
        max_dim: cfg.krein.max_dim,
        seed: cfg.seed,
    };
    let tol = cfg.tol(cfg.krein.tolerance);
    match krein_selftest(opts) {
        Ok(st) => {
            let rows: Vec<KreinRow> = st
                .instances
                .iter()
                .map(|i| KreinRow {
                    index: i.index,
                    dim: i.dim,
                    rank: i.rank,
                    g: i.g,
                    z: i.z,
                    krein_error: i.krein_error,
                    identity_error: i.identity_error,
                    condition: i.condition,
                })
                .collect();
            report.checks.push(Check::at_most("krein-formula", st.max_krein_error(), tol));
            report.checks.push(Check::at_most("inverse-identity", st.max_identity_error(), tol));
            let passed = st.passed_count(tol);
            report.checks.push(
                Check::at_least("instances-matching", passed as f64, cfg.krein.trials as f64)
                    .with_detail(format!("{passed}/{} instances", cfg.krein.trials)),
            );
            csv_out(run, &mut report, "krein_selftest.csv", &rows)?;
        }
        Err(e) => report.checks.push(Check::failed("krein-formula", e)),
    }
    Ok(report.finish())
}

#[derive(Serialize)]
struct BoundRow {
    potential: String,
    class: String,
    eps: f64,
    z: f64,
    op_norm: f64,
    hs_norm: f64,
    bound: f64,
    ratio: f64,
}

/// Discretized kernel norms at `Q = 0` against their analytic bounds.
pub fn kernel_bounds(run: &Runner) -> Result<SuiteReport> {
    let cfg = &run.cfg;
    let b = &cfg.bounds;
    let mut report = SuiteReport::new("kernel-bounds");
    let classes: Vec<KernelClass> = b.classes.iter().map(|c| parse_class(c)).collect::<Result<_, _>>()?;
    let potentials: Vec<(String, Potential)> = b
        .potentials
        .iter()
        .map(|p| Ok((p.label(), p.build()?)))
        .collect::<Result<_, ConfigError>>()?;
    let mut jobs = Vec::new();
    for class in &classes {
        for (pi, _) in potentials.iter().enumerate() {
            for &z in &b.z {
                for &eps in &b.eps {
                    jobs.push((*class, pi, z, eps));
                }
            }
        }
    }
    let export_dir = run.out.clone();
    let results = run.par_map(&jobs, |&(class, pi, z, eps)| {
        let (label, v) = &potentials[pi];
        let k = Kernel::new(class, eps, z, 0.0, v)?;
        let mut spec = default_grid(class);
        if !v.support_radius().is_finite() {
            spec.n_support *= 2;
        }
        let (t, s) = grids_for(class, v, &spec)?;
        let meta = KernelMeta {
            class,
            eps,
            z,
            q: 0.0,
            coarse: is_coarse(class),
        };
        let op = discretize(&k, meta, &t, &s, DEFAULT_ENTRY_CAP)?;
        let op_norm = op.op_norm()?;
        let bound = norm_bound(class, v, z);
        let files = if b.export {
            let stem = format!("table_{}_{}_z{}_eps{}", class.name(), label, z, eps);
            export_table(&export_dir, &stem, &TableHeader::for_kernel(&op), &op.values).unwrap_or_default()
        } else {
            Vec::new()
        };
        Ok::<_, contact_limit_core::Error>((
            BoundRow {
                potential: label.clone(),
                class: class.name().to_string(),
                eps,
                z,
                op_norm,
                hs_norm: op.hs_norm(),
                bound,
                ratio: op_norm / bound,
            },
            files,
        ))
    });
    let mut rows = Vec::new();
    for (job, r) in jobs.iter().zip(results) {
        match r {
            Ok((row, files)) => {
                rows.push(row);
                report.artifacts.extend(files);
            }
            Err(e) => report.checks.push(Check::failed(
                format!("bound-{}", job.0.name()),
                format!("{} z={} ε={}: {e}", potentials[job.1].0, job.2, job.3),
            )),
        }
    }
    for class in &classes {
        let ratios: Vec<f64> = rows.iter().filter(|r| r.class == class.name()).map(|r| r.ratio).collect();
        if !ratios.is_empty() {
            report.checks.push(
                Check::at_most(format!("bound-{}", class.name()), max_of(ratios.iter().copied()), b.factor)
                    .with_detail(format!("largest ‖K‖/bound over {} tables", ratios.len())),
            );
        }
    }
    csv_out(run, &mut report, "kernel_bounds.csv", &rows)?;
    Ok(report.finish())
}

#[derive(Serialize)]
struct SchurRow {
    class: String,
    z: f64,
    cells: usize,
    half_width: f64,
    op_norm: f64,
    bound: f64,
    ratio: f64,
}

/// Schur-test operators against `(2√z)^{−1}`: the reduced operators on
/// fine grids, the unreduced ones on coarse grids.
pub fn schur_check(run: &Runner) -> Result<SuiteReport> {
    let s = &run.cfg.schur;
    let mut report = SuiteReport::new("schur-check");
    let mut jobs = Vec::new();
    for &z in &s.z {
        jobs.push((KernelClass::SchurFFiber, z, s.three_variable_cells, s.three_variable_half_width));
        jobs.push((KernelClass::SchurBFiber, z, s.four_variable_cells, s.four_variable_half_width));
        jobs.push((KernelClass::SchurF, z, s.four_variable_cells, s.four_variable_half_width));
        jobs.push((KernelClass::SchurB, z, 12, s.four_variable_half_width));
    }
    let results = run.par_map(&jobs, |&(class, z, n, l)| {
        let op = schur_table(class, z, l, n, DEFAULT_ENTRY_CAP)?;
        let bound = match class {
            KernelClass::SchurF | KernelClass::SchurFFiber => schur_bound_f(z),
            _ => schur_bound_b(z),
        };
        let norm = op.op_norm()?;
        Ok::<_, contact_limit_core::Error>(SchurRow {
            class: class.name().to_string(),
            z,
            cells: n,
            half_width: l,
            op_norm: norm,
            bound,
            ratio: norm / bound,
        })
    });
    let mut rows = Vec::new();
    for (job, r) in jobs.iter().zip(results) {
        match r {
            Ok(row) => rows.push(row),
            Err(e) => report
                .checks
                .push(Check::failed(format!("schur-{}", job.0.name()), e)),
        }
    }
    for (name, classes) in [
        ("schur-F", [KernelClass::SchurF, KernelClass::SchurFFiber]),
        ("schur-B", [KernelClass::SchurB, KernelClass::SchurBFiber]),
    ] {
        let worst = max_of(
            rows.iter()
                .filter(|r| classes.iter().any(|c| c.name() == r.class))
                .map(|r| r.ratio),
        );
        report.checks.push(Check::at_most(name, worst, s.factor).with_detail("largest ‖K‖·2√z"));
    }
    csv_out(run, &mut report, "schur_check.csv", &rows)?;
    Ok(report.finish())
}

#[derive(Serialize)]
struct CsvSweepRow {
    target: String,
    eps: f64,
    z: f64,
    error_hs: f64,
    error_op: Option<f64>,
    grid_n: usize,
    #[serde(rename = "grid_L")]
    grid_l: f64,
    disc_err_est: f64,
}

impl From<&SweepRow> for CsvSweepRow {
    fn from(r: &SweepRow) -> Self {
        Self {
            target: r.target.clone(),
            eps: r.eps,
            z: r.z,
            error_hs: r.error_hs,
            error_op: r.error_op,
            grid_n: r.grid_n,
            grid_l: r.grid_l,
            disc_err_est: r.disc_err_est,
        }
    }
}

fn eps_list(exponents: Option<(i32, i32)>, default: &[f64]) -> Vec<f64> {
    match exponents {
        Some((a, b)) => geometric_eps(a, b),
        None => default.to_vec(),
    }
}

/// Kernel convergence sweeps with rate fits; `ŝ ≥ 0.9·s − slack`.
pub fn rate_sweep(run: &Runner) -> Result<SuiteReport> {
    let cfg = &run.cfg;
    let mut report = SuiteReport::new("rate-sweep");
    let v = run.potential()?;
    let schedule = cfg.schedule.build(&v)?;
    for name in &cfg.sweep.targets {
        let class = parse_class(name)?;
        let mut plan = SweepPlan::new(SweepTarget::Kernel(class), v.clone());
        plan.eps = eps_list(cfg.sweep.eps_exponents, &plan.eps);
        plan.z = cfg.sweep.z.clone();
        plan.schedule = schedule;
        plan.op_norm = cfg.sweep.op_norm;
        let slack = cfg.sweep.slack.unwrap_or(if is_coarse(class) { 0.15 } else { 0.05 });
        let mut csv_rows = Vec::new();
        for &z in &plan.z {
            let check = format!("rate-{}-z{z}", class.name());
            let sweep = match KernelSweep::new(&plan, z) {
                Ok(s) => s,
                Err(e) => {
                    report.checks.push(Check::failed(check, e));
                    continue;
                }
            };
            let rows = run.par_map(&plan.eps, |&e| sweep.point(e));
            let rows = match rows.into_iter().collect::<Result<Vec<_>, _>>() {
                Ok(r) => r,
                Err(e) => {
                    report.checks.push(Check::failed(check, e));
                    continue;
                }
            };
            csv_rows.extend(rows.iter().map(CsvSweepRow::from));
            match sweep.finish(rows) {
                Ok(r) => {
                    let theory = r.fit.theory.unwrap_or(f64::NAN);
                    let limit = 0.9 * theory - slack;
                    let c = Check::at_least(check, r.fit.slope, limit).with_detail(format!(
                        "theory s = {theory}, R² = {:.6}, slack {slack}",
                        r.fit.r_squared
                    ));
                    report.fits.push(FitSummary::from_sweep(&r, "constant", c.passed && r.fit.converging));
                    report.checks.push(c);
                }
                Err(e) => report.checks.push(Check::failed(check, e)),
            }
        }
        csv_out(run, &mut report, &format!("sweep_{}.csv", class.name()), &csv_rows)?;
    }
    Ok(report.finish())
}

/// Both resolvent sweeps (constant and perturbed schedule) at every `z`.
pub fn resolvent_sweeps(run: &Runner) -> Result<SuiteReport> {
    let cfg = &run.cfg;
    let r = &cfg.resolvent;
    let mut report = SuiteReport::new("resolvent-sweep-n2");
    let v = run.potential()?;
    let g = match coupling_for_alpha(&v, r.alpha) {
        Ok(g) => g,
        Err(e) => {
            report.checks.push(Check::failed("resolvent-coupling", e));
            return Ok(report.finish());
        }
    };
    let schedules = [
        ("constant", CouplingSchedule::constant(g)),
        ("perturbed", CouplingSchedule::perturbed(g, r.perturbation_rate)?),
    ];
    for (label, schedule) in schedules {
        let mut plan = SweepPlan::new(SweepTarget::ResolventN2, v.clone());
        plan.eps = geometric_eps(r.eps_exponents.0, r.eps_exponents.1);
        plan.z = r.z.clone();
        plan.schedule = schedule;
        plan.pair = PairSweepSpec {
            half_width: r.half_width,
            coarse_spacing: r.coarse_spacing,
        };
        let theory = theory_rate(plan.target, &v, &schedule)?;
        let mut csv_rows = Vec::new();
        for &z in &plan.z {
            let check = format!("resolvent-{label}-z{z}");
            let rows = run.par_map(&plan.eps, |&e| resolvent_sweep_point(&plan, e, z));
            let rows = match rows.into_iter().collect::<Result<Vec<_>, _>>() {
                Ok(rows) => rows,
                Err(e) => {
                    report.checks.push(Check::failed(check, e));
                    continue;
                }
            };
            csv_rows.extend(rows.iter().map(CsvSweepRow::from));
            match assemble(&plan.target.name(), z, rows, plan.max_disc_ratio, Some(theory)) {
                Ok(rep) => {
                    let s = rep.fit.slope;
                    let c = if label == "constant" {
                        let mut c = Check::at_least(check, s, r.min_slope);
                        c.passed &= rep.monotone;
                        c.with_detail(format!("monotone = {}, R² = {:.6}", rep.monotone, rep.fit.r_squared))
                    } else {
                        let (lo, hi) = r.perturbed_band;
                        let mut c = Check::at_least(check, s, lo);
                        c.passed &= s <= hi;
                        c.with_detail(format!("band [{lo}, {hi}], R² = {:.6}", rep.fit.r_squared))
                    };
                    report.fits.push(FitSummary::from_sweep(&rep, label, c.passed));
                    report.checks.push(c);
                }
                Err(e) => report.checks.push(Check::failed(check, e)),
            }
        }
        csv_out(run, &mut report, &format!("sweep_resolvent_n2_{label}.csv"), &csv_rows)?;
    }
    Ok(report.finish())
}

/// Limit resolvents depend on `V` only through `α`; zero-mean `V` gives the
/// free resolvent. Also exports the limit table.
pub fn potential_independence(run: &Runner) -> Result<SuiteReport> {
    let cfg = &run.cfg;
    let r = &cfg.resolvent;
    let mut report = SuiteReport::new("resolvent-sweep-n2");
    let tol = cfg.tol(r.independence_tolerance);
    let v = run.potential()?;
    let w = r.comparison.build()?;
    let zero = r.zero_mean.build()?;
    let grid = QuadratureGrid::gauss_legendre(-4.0, 4.0, r.table_nodes)?;
    for &z in &r.z {
        let pair = (|| {
            let g1 = coupling_for_alpha(&v, r.alpha)?;
            let g2 = coupling_for_alpha(&w, r.alpha)?;
            vfree_factor_check(&v, g1, &w, g2, z, &grid)
        })();
        report.checks.push(match pair {
            Ok(d) => Check::at_most(format!("independence-z{z}"), d, tol).with_detail(format!(
                "{} vs {} at α = {}",
                cfg.potential.label(),
                r.comparison.label(),
                r.alpha
            )),
            Err(e) => Check::failed(format!("independence-z{z}"), e),
        });
        let free = (|| {
            let lim = factored_limit_resolvent(&zero, 1.0, z, &auxiliary_grid(&zero, 12)?, &grid)?;
            let free = delta_limit_resolvent_n2(0.0, z, &grid)?;
            relative_frobenius(&lim.table, &free.table)
        })();
        report.checks.push(match free {
            Ok(d) => Check::at_most(format!("zero-mean-free-z{z}"), d, tol),
            Err(e) => Check::failed(format!("zero-mean-free-z{z}"), e),
        });
        if let Ok(lim) = delta_limit_resolvent_n2(r.alpha, z, &grid) {
            let axis = AxisHeader::from_grid(&grid);
            let header = TableHeader {
                rows: lim.table.rows(),
                cols: lim.table.cols(),
                target_axes: vec![axis.clone()],
                source_axes: vec![axis],
                meta: [
                    ("kind", "resolvent".to_string()),
                    ("method", lim.method.name().to_string()),
                    ("alpha", r.alpha.to_string()),
                    ("z", z.to_string()),
                    ("weighting", "sqrt(w_i)·R(x_i, x_j)·sqrt(w_j)".to_string()),
                ]
                .into_iter()
                .map(|(k, v)| (k.to_string(), v))
                .collect(),
            };
            let files = export_table(&run.out, &format!("limit_resolvent_z{z}"), &header, &lim.table)?;
            report.artifacts.extend(files);
        }
    }
    Ok(report.finish())
}

pub fn resolvent_sweep_n2(run: &Runner) -> Result<SuiteReport> {
    let mut report = resolvent_sweeps(run)?;
    report.merge(potential_independence(run)?);
    Ok(report.finish())
}

#[derive(Serialize)]
struct EigenCsvRow {
    eps: f64,
    energy: f64,
    reference: f64,
    error: f64,
    under_resolved: bool,
}

#[derive(Serialize)]
struct LevelRow {
    eps: f64,
    level: usize,
    eigenvalue: f64,
}

/// Even-sector ground energies against `−α²/8` on a uniform grid.
pub fn eigen_sweep_n2(run: &Runner) -> Result<SuiteReport> {
    let cfg = &run.cfg;
    let e = &cfg.eigen;
    let mut report = SuiteReport::new("eigen-sweep-n2");
    let v = run.potential()?;
    let grid = PairGrid::uniform(e.half_width, e.cells)?;
    let eps = geometric_eps(e.eps_exponents.0, e.eps_exponents.1);
    match eigenvalue_convergence_n2(&v, e.alpha, &eps, &grid) {
        Ok(rep) => {
            let rows: Vec<EigenCsvRow> = rep
                .rows
                .iter()
                .map(|r| EigenCsvRow {
                    eps: r.eps,
                    energy: r.energy,
                    reference: rep.reference,
                    error: r.error,
                    under_resolved: r.under_resolved,
                })
                .collect();
            let last = rep.rows.last().expect("at least one ε");
            report.checks.push(
                Check::at_most("ground-energy", last.error, cfg.tol(e.tolerance))
                    .with_detail(format!("E = {} at ε = {}, reference {}", last.energy, last.eps, rep.reference)),
            );
            report.checks.push(Check::flag(
                "ground-energy-decreasing",
                rep.decreasing(),
                "|E_ε − E| non-increasing as ε decreases",
            ));
            csv_out(run, &mut report, "eigen_n2.csv", &rows)?;
        }
        Err(err) => report.checks.push(Check::failed("ground-energy", err)),
    }
    let g = coupling_for_alpha(&v, e.alpha).ok();
    let levels = run.par_map(&eps, |&ep| {
        let g = g.ok_or_else(|| contact_limit_core::Error::Domain("∫V vanishes".into()))?;
        let h = build_pair_hamiltonian(&v.scale(ep)?, g, &grid)?.even()?;
        (0..e.levels.min(h.dim()))
            .map(|k| Ok(LevelRow { eps: ep, level: k, eigenvalue: h.eigenvalue(k, 1e-13)? }))
            .collect::<Result<Vec<_>, contact_limit_core::Error>>()
    });
    match levels.into_iter().collect::<Result<Vec<_>, _>>() {
        Ok(rows) => csv_out(run, &mut report, "spectrum_n2.csv", &rows.into_iter().flatten().collect::<Vec<_>>())?,
        Err(err) => report.checks.push(Check::failed("spectrum", err)),
    }
    Ok(report.finish())
}

#[derive(Serialize)]
struct FormCheckRow {
    psi_id: usize,
    particles: usize,
    potential: String,
    mu: f64,
    check: String,
    pair_i: usize,
    pair_j: usize,
    lhs: f64,
    rhs: f64,
    margin: f64,
}

#[derive(Serialize)]
struct FormValueRow {
    psi_id: usize,
    potential: String,
    eps: f64,
    q_eps: f64,
    q: f64,
    gap: f64,
    lower_margin: f64,
    upper_margin: f64,
}

struct PsiOutcome {
    checks: Vec<FormCheckRow>,
    values: Vec<FormValueRow>,
    fits: Vec<(String, RateFitReport)>,
    fitted_c_mu: f64,
}

/// Trace and interaction inequalities, the uniform sandwich of `q_ε` and
/// the rate of `q_ε → q` on the test family.
pub fn forms_check(run: &Runner) -> Result<SuiteReport> {
    let cfg = &run.cfg;
    let f = &cfg.forms;
    let mut report = SuiteReport::new("forms-check");
    let family = test_family(cfg.seed)?;
    let potentials: Vec<(String, Potential)> = f
        .potentials
        .iter()
        .map(|p| Ok((p.label(), p.build()?)))
        .collect::<Result<_, ConfigError>>()?;
    let eps = geometric_eps(f.eps_exponents.0, f.eps_exponents.1);
    let indexed: Vec<usize> = (0..family.len()).collect();
    let g = 1.0;
    let outcomes = run.par_map(&indexed, |&id| {
        let psi = &family[id];
        let n = psi.particles();
        let mut out = PsiOutcome {
            checks: Vec::new(),
            values: Vec::new(),
            fits: Vec::new(),
            fitted_c_mu: 0.0,
        };
        for (label, v) in &potentials {
            for &mu in &f.mu {
                let rep = check_form_bounds(psi, v, mu)?;
                out.fitted_c_mu = out.fitted_c_mu.max(rep.fitted_c_mu * mu);
                out.checks.extend(rep.checks.into_iter().map(|c| FormCheckRow {
                    psi_id: id,
                    particles: n,
                    potential: label.clone(),
                    mu,
                    margin: c.margin(),
                    check: c.name,
                    pair_i: c.pair.0,
                    pair_j: c.pair.1,
                    lhs: c.lhs,
                    rhs: c.rhs,
                }));
            }
            let shift = sufficient_shift(v, g, n);
            let b = sandwich_constant(v, g, n, f.sandwich_a, shift);
            let (lo, hi) = sandwich_sides(psi, f.sandwich_a, b);
            let q = q_form(psi, g * v.integral(), shift)?;
            for &e in &eps {
                let qe = q_eps_form(psi, &v.scale(e)?, g, shift)?;
                out.values.push(FormValueRow {
                    psi_id: id,
                    potential: label.clone(),
                    eps: e,
                    q_eps: qe,
                    q,
                    gap: (qe - q).abs(),
                    lower_margin: qe - lo,
                    upper_margin: hi - qe,
                });
            }
            out.fits.push((label.clone(), form_convergence(psi, v, g, &eps)?));
        }
        Ok::<_, contact_limit_core::Error>(out)
    });
    let tol = cfg.tol(f.tolerance);
    let mut check_rows = Vec::new();
    let mut value_rows = Vec::new();
    let mut slopes = Vec::new();
    let mut fitted_c = 0.0f64;
    for (id, o) in outcomes.into_iter().enumerate() {
        match o {
            Ok(o) => {
                fitted_c = fitted_c.max(o.fitted_c_mu);
                check_rows.extend(o.checks);
                value_rows.extend(o.values);
                for (label, fit) in o.fits {
                    slopes.push((id, label, fit));
                }
            }
            Err(e) => report.checks.push(Check::failed(format!("forms-psi{id}"), e)),
        }
    }
    for name in ["sup-trace", "holder-trace", "trace-mu", "interaction"] {
        let rows: Vec<&FormCheckRow> = check_rows.iter().filter(|r| r.check == name).collect();
        let bad = rows.iter().filter(|r| !(r.lhs <= r.rhs * (1.0 + tol) + 1e-14)).count();
        let worst = rows
            .iter()
            .map(|r| r.lhs / r.rhs)
            .filter(|x| x.is_finite())
            .fold(0.0, f64::max);
        report.checks.push(
            Check::at_most(name, worst, 1.0 + tol)
                .with_detail(format!("{bad} violations in {} evaluations; largest lhs/rhs shown", rows.len())),
        );
    }
    let sandwich_bad = value_rows
        .iter()
        .filter(|r| r.lower_margin < -tol || r.upper_margin < -tol)
        .count();
    report.checks.push(Check::flag(
        "sandwich",
        sandwich_bad == 0,
        format!("{sandwich_bad} of {} q_ε values outside the uniform sandwich", value_rows.len()),
    ));
    let mut min_slope = f64::INFINITY;
    for (id, label, fit) in &slopes {
        let asserted = fit.theory.is_some();
        let passed = !asserted || fit.slope >= f.min_slope;
        if asserted {
            min_slope = min_slope.min(fit.slope);
        }
        report
            .fits
            .push(FitSummary::from_fit(&format!("q-eps-psi{id}"), label, 0.0, fit, passed));
    }
    report.checks.push(
        Check::at_least("q-eps-rate", min_slope, f.min_slope)
            .with_detail("smallest slope over functions and potentials with a finite |r|^{1/2} moment"),
    );
    report.checks.push(Check {
        name: "fitted-trace-constant".into(),
        value: fitted_c,
        limit: 0.25,
        passed: fitted_c <= 0.25 * (1.0 + tol),
        detail: "largest μ·C_μ needed on the family; the derived constant gives 1/4".into(),
    });
    csv_out(run, &mut report, "forms_checks.csv", &check_rows)?;
    csv_out(run, &mut report, "forms_values.csv", &value_rows)?;
    Ok(report.finish())
}

/// Subcommands that run suites.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    GreensCheck,
    KernelBounds,
    SchurCheck,
    KreinSelftest,
    RateSweep,
    ResolventSweepN2,
    EigenSweepN2,
    FormsCheck,
    All,
}

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::GreensCheck => "greens-check",
            Suite::KernelBounds => "kernel-bounds",
            Suite::SchurCheck => "schur-check",
            Suite::KreinSelftest => "krein-selftest",
            Suite::RateSweep => "rate-sweep",
            Suite::ResolventSweepN2 => "resolvent-sweep-n2",
            Suite::EigenSweepN2 => "eigen-sweep-n2",
            Suite::FormsCheck => "forms-check",
            Suite::All => "all",
        }
    }

    fn members(self) -> Vec<Suite> {
        match self {
            Suite::All => vec![
                Suite::GreensCheck,
                Suite::KreinSelftest,
                Suite::KernelBounds,
                Suite::SchurCheck,
                Suite::RateSweep,
                Suite::ResolventSweepN2,
                Suite::EigenSweepN2,
                Suite::FormsCheck,
            ],
            s => vec![s],
        }
    }

    fn run_one(self, run: &Runner) -> Result<SuiteReport> {
        match self {
            Suite::GreensCheck => greens_check(run),
            Suite::KernelBounds => kernel_bounds(run),
            Suite::SchurCheck => schur_check(run),
            Suite::KreinSelftest => krein_check(run),
            Suite::RateSweep => rate_sweep(run),
            Suite::ResolventSweepN2 => resolvent_sweep_n2(run),
            Suite::EigenSweepN2 => eigen_sweep_n2(run),
            Suite::FormsCheck => forms_check(run),
            Suite::All => unreachable!("expanded by members"),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Metadata {
    pub timestamp_unix: u64,
    pub version: &'static str,
}

#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub command: String,
    pub passed: bool,
    pub suites: Vec<SuiteReport>,
    pub errors: Vec<String>,
    pub config: RunConfig,
    pub metadata: Metadata,
}

pub const SUMMARY_FILE: &str = "summary.json";

/// Runs `suite` (or every suite for `all`) and writes `summary.json`.
/// IO errors inside a suite are recorded in the summary and fail the run.
pub fn execute(run: &Runner, suite: Suite) -> Result<Summary> {
    run.prepare()?;
    let mut suites = Vec::new();
    let mut errors = Vec::new();
    for s in suite.members() {
        match s.run_one(run) {
            Ok(r) => suites.push(r),
            Err(e) => errors.push(format!("{}: {e:#}", s.name())),
        }
    }
    let timestamp_unix = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let summary = Summary {
        command: suite.name().to_string(),
        passed: errors.is_empty() && suites.iter().all(|s| s.passed),
        suites,
        errors,
        config: run.cfg.clone(),
        metadata: Metadata {
            timestamp_unix,
            version: env!("CARGO_PKG_VERSION"),
        },
    };
    crate::io::write_json(&run.path(SUMMARY_FILE), &summary)?;
    Ok(summary)
}

/// Writes a summary for a run that never started (invalid configuration).
pub fn write_failure_summary(out: &Path, command: &str, error: &str) -> Result<()> {
    #[derive(Serialize)]
    struct Failed<'a> {
        command: &'a str,
        passed: bool,
        suites: [(); 0],
        errors: [&'a str; 1],
        metadata: Metadata,
    }
    std::fs::create_dir_all(out)?;
    let timestamp_unix = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    crate::io::write_json(
        &out.join(SUMMARY_FILE),
        &Failed {
            command,
            passed: false,
            suites: [],
            errors: [error],
            metadata: Metadata {
                timestamp_unix,
                version: env!("CARGO_PKG_VERSION"),
            },
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn check_predicates() {
        assert!(Check::at_most("a", 1.0, 1.0).passed);
        assert!(!Check::at_most("a", f64::NAN, 1.0).passed);
        assert!(Check::at_least("b", 2.0, 1.0).passed);
        assert!(!Check::failed("c", "boom").passed);
    }

    #[test]
    fn all_expands_to_every_suite() {
        assert_eq!(Suite::All.members().len(), 8);
        assert_eq!(Suite::RateSweep.members(), vec![Suite::RateSweep]);
    }

    #[test]
    fn max_of_propagates_nan() {
        assert!(max_of([1.0, f64::NAN, 2.0]).is_nan());
        assert_eq!(max_of([1.0, 3.0, 2.0]), 3.0);
    }
}
