use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use contact_limit::suites::write_failure_summary;
use contact_limit::{execute, Overrides, RunConfig, Runner, Suite};

#[derive(Parser)]
#[command(name = "contact-limit", version, about = "Numerical checks of contact-interaction limits")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// TOML configuration; flags override its keys.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory; defaults to $CONTACT_LIMIT_OUT, then ./contact-limit-out.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Seed for sampled points, random instances and test functions.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Multiplies every error tolerance.
    #[arg(long, global = true, value_name = "FLOAT")]
    tolerance_scale: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Green's function representations, marginals and bounds.
    GreensCheck,
    /// Kernel operator norms against their analytic bounds.
    KernelBounds,
    /// Schur-test operators against (2√z)^{-1}.
    SchurCheck,
    /// Randomized Krein formula and inverse identity.
    KreinSelftest,
    /// Kernel convergence rates.
    RateSweep {
        /// Comma-separated kernel classes.
        #[arg(long, value_delimiter = ',')]
        target: Option<Vec<String>>,
    },
    /// Two-particle resolvent convergence and potential independence.
    ResolventSweepN2,
    /// Two-particle ground-energy convergence.
    EigenSweepN2,
    /// Form inequalities and q_ε → q.
    FormsCheck,
    /// Every suite.
    All,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (suite, targets) = match cli.command {
        Command::GreensCheck => (Suite::GreensCheck, None),
        Command::KernelBounds => (Suite::KernelBounds, None),
        Command::SchurCheck => (Suite::SchurCheck, None),
        Command::KreinSelftest => (Suite::KreinSelftest, None),
        Command::RateSweep { target } => (Suite::RateSweep, target),
        Command::ResolventSweepN2 => (Suite::ResolventSweepN2, None),
        Command::EigenSweepN2 => (Suite::EigenSweepN2, None),
        Command::FormsCheck => (Suite::FormsCheck, None),
        Command::All => (Suite::All, None),
    };
    let g = cli.global;
    let overrides = Overrides {
        out: g.out,
        seed: g.seed,
        jobs: g.jobs,
        tolerance_scale: g.tolerance_scale,
        targets,
    };
    let mut cfg = match &g.config {
        Some(p) => RunConfig::load(p),
        None => Ok(RunConfig::default()),
    }
    .unwrap_or_else(|e| usage_failure(&overrides, suite, &e.to_string()));
    cfg.apply(&overrides);
    let runner = Runner::new(cfg.clone()).unwrap_or_else(|e| usage_failure_cfg(&cfg, suite, &e.to_string()));

    match execute(&runner, suite) {
        Ok(summary) => {
            for s in &summary.suites {
                for c in &s.checks {
                    println!(
                        "{} {:<20} {:<32} value {:.6e}  limit {:.6e}  {}",
                        if c.passed { "PASS" } else { "FAIL" },
                        s.suite,
                        c.name,
                        c.value,
                        c.limit,
                        c.detail
                    );
                }
            }
            for e in &summary.errors {
                eprintln!("error: {e}");
            }
            println!(
                "{}: {} ({})",
                summary.command,
                if summary.passed { "passed" } else { "FAILED" },
                runner.out.join(contact_limit::suites::SUMMARY_FILE).display()
            );
            if summary.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn usage_failure(o: &Overrides, suite: Suite, msg: &str) -> ! {
    let mut cfg = RunConfig::default();
    cfg.apply(o);
    usage_failure_cfg(&cfg, suite, msg)
}

fn usage_failure_cfg(cfg: &RunConfig, suite: Suite, msg: &str) -> ! {
    eprintln!("error: {msg}");
    if let Err(e) = write_failure_summary(&cfg.out_dir(), suite.name(), msg) {
        eprintln!("error: cannot write summary: {e:#}");
    }
    std::process::exit(2)
}
