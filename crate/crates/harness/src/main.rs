use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ms2gd::theory::{theory_report, TheoryQuery};
use ms2gd::{Loss, RegKind, TheoryInputs};
use ms2gd_harness::experiment::{build_problem, read_spec, run_experiment, ExperimentOutcome};
use ms2gd_harness::reference::compute_reference;
use ms2gd_harness::spec::{DataSpec, ExperimentSpec, InnerSteps, LambdaSpec, ReferencePolicy, SolverSpec, StepSize};
use ms2gd_harness::tune::{tune_stepsize_by, TuneScore};
use ms2gd_harness::{HarnessError, Result};
use serde_json::json;

#[derive(Parser)]
#[command(
    name = "ms2gd",
    version,
    about = "Mini-batch semi-stochastic gradient descent experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run solvers on a LIBSVM file or a JSON experiment spec.
    Run(RunArgs),
    /// Grid-search the stepsize under a pass budget.
    Tune(TuneArgs),
    /// Print the rate and optimal parameters as JSON.
    Theory(TheoryArgs),
    /// Run on a synthetic banded LASSO problem.
    LassoSynth(LassoArgs),
}

#[derive(Args, Clone)]
struct ProblemArgs {
    /// LIBSVM file.
    #[arg(long)]
    data: Option<PathBuf>,
    #[arg(long, default_value = "logistic")]
    loss: String,
    #[arg(long, default_value = "l2")]
    reg: String,
    /// Number or `c/n`.
    #[arg(long, default_value = "1/n")]
    lambda: String,
    #[arg(long)]
    mu: Option<f64>,
    #[arg(long)]
    normalize_rows: bool,
    #[arg(long)]
    expect_dim: Option<usize>,
    /// Keep only the first this many rows.
    #[arg(long)]
    head: Option<usize>,
}

#[derive(Args, Clone)]
struct SolverArgs {
    /// `ms2gd` or one of sgd_const, sgd_decay, gd, fista, sag, s2gd.
    #[arg(long, default_value = "ms2gd")]
    solver: String,
    #[arg(long, default_value_t = 1)]
    b: usize,
    /// Count or fraction of n such as `0.11n`.
    #[arg(long)]
    m: Option<String>,
    /// Value or multiple of 1/L such as `5.5/L`.
    #[arg(long, default_value = "1/L")]
    h: String,
    #[arg(long, default_value_t = 10)]
    epochs: usize,
    /// Comma-separated seeds.
    #[arg(long, default_value = "0", value_delimiter = ',')]
    seed: Vec<u64>,
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    lazy: bool,
    #[arg(long, default_value_t = 0)]
    checkpoints: usize,
}

#[derive(Args)]
struct RunArgs {
    /// Experiment spec or manifest JSON; replaces the problem and solver flags.
    #[arg(long)]
    spec: Option<PathBuf>,
    #[command(flatten)]
    problem: ProblemArgs,
    #[command(flatten)]
    solver: SolverArgs,
    /// Output directory for CSV traces and the manifest.
    #[arg(long)]
    out: Option<PathBuf>,
    /// `none`, `fista` or a file holding `P*`.
    #[arg(long = "ref", default_value = "none")]
    reference: String,
}

#[derive(Args)]
struct TuneArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    #[command(flatten)]
    solver: SolverArgs,
    /// Comma-separated stepsizes in the units of `--h`.
    #[arg(long, value_delimiter = ',', required = true)]
    grid: Vec<f64>,
    /// Effective passes.
    #[arg(long)]
    budget: f64,
    /// Score by passes to this suboptimality against a FISTA reference
    /// instead of by the objective at the budget.
    #[arg(long)]
    target: Option<f64>,
}

#[derive(Args)]
struct TheoryArgs {
    #[arg(long)]
    n: f64,
    #[arg(long = "L")]
    lipschitz: Option<f64>,
    #[arg(long)]
    mu: Option<f64>,
    /// Shorthand for `--L kappa --mu 1`.
    #[arg(long)]
    kappa: Option<f64>,
    #[arg(long)]
    b: usize,
    #[arg(long)]
    rho_target: Option<f64>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    h: Option<f64>,
    #[arg(long)]
    m: Option<f64>,
}

#[derive(Args)]
struct LassoArgs {
    #[arg(long, default_value_t = 256)]
    n: usize,
    #[arg(long, default_value_t = 4)]
    band: usize,
    #[arg(long, default_value_t = 1e-2)]
    sigma: f64,
    /// Number or `c/n`.
    #[arg(long, default_value = "1e-4/n")]
    lambda: String,
    #[arg(long, default_value_t = 0)]
    data_seed: u64,
    #[command(flatten)]
    solver: SolverArgs,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long = "ref", default_value = "fista")]
    reference: String,
}

/// Pretty JSON on stdout; a closed pipe is not an error.
fn print_json(value: &impl serde::Serialize) {
    let text = serde_json::to_string_pretty(value).expect("json");
    let _ = writeln!(std::io::stdout().lock(), "{text}");
}

fn parse_loss(s: &str) -> Result<Loss> {
    serde_json::from_value(json!(s)).map_err(|_| HarnessError::validation(format!("unknown loss `{s}`")))
}

fn parse_reg(s: &str) -> Result<RegKind> {
    serde_json::from_value(json!(s)).map_err(|_| HarnessError::validation(format!("unknown regularizer `{s}`")))
}

impl SolverArgs {
    fn to_spec(&self) -> Result<SolverSpec> {
        Ok(SolverSpec {
            label: None,
            solver: self.solver.clone(),
            b: self.b,
            m: self.m.as_deref().map(str::parse::<InnerSteps>).transpose()?,
            h: self.h.parse::<StepSize>()?,
            epochs: self.epochs,
            lazy: self.lazy,
            checkpoints: self.checkpoints,
        })
    }
}

fn spec_from_flags(p: &ProblemArgs, s: &SolverArgs, reference: &str) -> Result<ExperimentSpec> {
    let path = p
        .data
        .clone()
        .ok_or_else(|| HarnessError::validation("either --data or --spec is required"))?;
    Ok(ExperimentSpec {
        data: DataSpec::Libsvm {
            path,
            normalize_rows: p.normalize_rows,
            expect_dim: p.expect_dim,
            head: p.head,
        },
        loss: parse_loss(&p.loss)?,
        reg: parse_reg(&p.reg)?,
        lambda: p.lambda.parse::<LambdaSpec>()?,
        mu: p.mu,
        solvers: vec![s.to_spec()?],
        seeds: s.seed.clone(),
        reference: reference.parse::<ReferencePolicy>()?,
    })
}

fn summary(out: &ExperimentOutcome) -> serde_json::Value {
    let runs: Vec<_> = out
        .runs
        .iter()
        .map(|r| {
            let last = r.trace.rows.last();
            json!({
                "label": r.entry.label,
                "seed": r.entry.seed,
                "h": r.entry.h_used,
                "m": r.entry.m_used,
                "passes": last.map(|l| l.effective_passes),
                "objective": last.map(|l| l.objective),
                "suboptimality": last.and_then(|l| l.suboptimality),
                "file": r.entry.file,
            })
        })
        .collect();
    json!({
        "problem": out.manifest.problem,
        "p_star": out.p_star,
        "runs": runs,
        "failures": out.failures,
    })
}

fn finish(out: ExperimentOutcome) -> Result<()> {
    print_json(&summary(&out));
    if out.failures.is_empty() {
        Ok(())
    } else {
        Err(HarnessError::Runtime(format!("{} run(s) failed", out.failures.len())))
    }
}

fn run(args: RunArgs) -> Result<()> {
    let spec = match &args.spec {
        Some(path) => read_spec(path)?,
        None => spec_from_flags(&args.problem, &args.solver, &args.reference)?,
    };
    finish(run_experiment(&spec, args.out.as_deref())?)
}

fn tune(args: TuneArgs) -> Result<()> {
    let spec = spec_from_flags(&args.problem, &args.solver, "none")?;
    spec.validate()?;
    let problem = build_problem(&spec)?;
    let by = match args.target {
        Some(target) => TuneScore::PassesToTarget {
            p_star: compute_reference(&problem)?.p_star,
            target,
        },
        None => TuneScore::ObjectiveAtBudget,
    };
    let result = tune_stepsize_by(&problem, &spec.solvers[0], &args.grid, args.budget, &spec.seeds, by)?;
    print_json(&result);
    Ok(())
}

fn theory(args: TheoryArgs) -> Result<()> {
    if !(args.n >= 1.0 && args.n.fract() == 0.0) {
        return Err(HarnessError::validation(format!(
            "n must be a positive integer, got {}",
            args.n
        )));
    }
    let n = args.n as usize;
    let inputs = match (args.kappa, args.lipschitz, args.mu) {
        (Some(k), None, None) => TheoryInputs::from_kappa(n, k, args.b)?,
        (None, Some(l), Some(mu)) => TheoryInputs::new(n, l, mu, args.b)?,
        _ => return Err(HarnessError::validation("give either --kappa or both --L and --mu")),
    };
    let query = TheoryQuery {
        h: args.h,
        m: args.m,
        rho_target: args.rho_target,
        epsilon: args.epsilon,
    };
    let report = theory_report(&inputs, &query).map_err(|e| HarnessError::validation(e.to_string()))?;
    print_json(&report);
    Ok(())
}

fn lasso(args: LassoArgs) -> Result<()> {
    let spec = ExperimentSpec {
        data: DataSpec::LassoSynthetic {
            n: args.n,
            band: args.band,
            sigma: args.sigma,
            seed: args.data_seed,
        },
        loss: Loss::Squared,
        reg: RegKind::L1,
        lambda: args.lambda.parse()?,
        mu: None,
        solvers: vec![args.solver.to_spec()?],
        seeds: args.solver.seed.clone(),
        reference: args.reference.parse()?,
    };
    finish(run_experiment(&spec, args.out.as_deref())?)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Run(a) => run(a),
        Command::Tune(a) => tune(a),
        Command::Theory(a) => theory(a),
        Command::LassoSynth(a) => lasso(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
