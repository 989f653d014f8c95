//! Command-line front end: build and export protocol complexes, run the
//! solver, compute closures and lower-bound chains, execute the named
//! decision rules, and check the claims corpus.
//!
//! Exit codes: 0 success / solvable / equal, 1 semantic negative
//! (unsolvable, not a fixed point, rule fails, claim failure), 2 usage or
//! parse error, 3 resource limit.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use roundlab::claims::{run_claims, rule_schedule, ClaimSpec};
use roundlab::closure::{
    closure, closure_beta, is_fixed_point, lower_bound_chain, ChainStatus, ClosureError,
    ClosureOptions,
};
use roundlab::complex::{ChromaticComplex, ProcessId, Simplex, Value, Vertex};
use roundlab::dot::complex_to_dot;
use roundlab::json::{
    beta_from_json, complex_from_dto, complex_to_json, map_to_json, model_from_json,
    task_from_dto, task_to_json, ComplexDto, TaskDto, VertexDto,
};
use roundlab::model::ModelSpec;
use roundlab::protocol::carrier;
use roundlab::rules::run_rule;
use roundlab::solver::{solve, SolveError, SolveOptions, SolveVerdict};
use roundlab::task::{tasks_equal, Task};

#[derive(Parser)]
#[command(name = "roundlab", version, about = "Protocol complexes, task closures, and round lower bounds for iterated shared-memory models")]
struct Cli {
    /// Bound the worker pool used by the closure engine.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the t-round protocol complex of one input simplex.
    GenProtocol(GenProtocolArgs),
    /// Decide t-round solvability of a task in a model.
    Solve(SolveArgs),
    /// Compute the closure of a task with respect to a model.
    Closure(ClosureArgs),
    /// Check whether a task equals its own closure.
    FixedPoint(FixedPointArgs),
    /// Iterate the closure to derive a round lower bound.
    LowerBound(LowerBoundArgs),
    /// Run a named decision rule as an upper-bound witness.
    RunRule(RunRuleArgs),
    /// Run the claims corpus and report pass/fail per claim.
    VerifyClaims(VerifyClaimsArgs),
    /// Re-emit a complex or task file canonically, as DOT, or as a table.
    Export(ExportArgs),
}

#[derive(Args)]
struct GenProtocolArgs {
    /// Number of processes; the input simplex gets distinct symbolic values.
    #[arg(long, conflicts_with = "sigma")]
    n: Option<u32>,
    /// JSON file holding one input simplex (an array of vertices).
    #[arg(long)]
    sigma: Option<PathBuf>,
    /// Model JSON file; immediate snapshot without a box when omitted.
    #[arg(long)]
    model: Option<PathBuf>,
    #[arg(long)]
    rounds: u32,
    /// Write the complex as JSON.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write the 1-skeleton as DOT.
    #[arg(long)]
    dot: Option<PathBuf>,
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long)]
    task: PathBuf,
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    rounds: u32,
    /// Abort with exit code 3 after this many search nodes.
    #[arg(long)]
    budget: Option<u64>,
    /// Write the witness map when solvable.
    #[arg(long)]
    witness: Option<PathBuf>,
}

#[derive(Args)]
struct ClosureArgs {
    #[arg(long)]
    task: PathBuf,
    #[arg(long)]
    model: PathBuf,
    /// Pin the binary-consensus input bits: JSON {"<id>|*": 0|1}.
    #[arg(long)]
    beta: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct FixedPointArgs {
    #[arg(long)]
    task: PathBuf,
    #[arg(long)]
    model: PathBuf,
}

#[derive(Args)]
struct LowerBoundArgs {
    #[arg(long)]
    task: PathBuf,
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    max_steps: u32,
    /// After verifying the first closure against the task's named family,
    /// continue the chain by re-parameterizing instead of recomputing.
    #[arg(long)]
    fast_family: bool,
}

#[derive(Args)]
struct RunRuleArgs {
    /// One of: halving, two-proc, ts-consensus.
    #[arg(long)]
    rule: String,
    #[arg(long)]
    task: PathBuf,
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    rounds: u32,
}

#[derive(Args)]
struct VerifyClaimsArgs {
    /// Claims manifest (JSON array of claims).
    #[arg(long, default_value = "claims/corpus.json")]
    corpus: PathBuf,
    /// Glob over claim ids, e.g. "consensus-*".
    #[arg(long)]
    filter: Option<String>,
}

#[derive(Args)]
struct ExportArgs {
    #[arg(long)]
    input: PathBuf,
    /// json (canonical re-emission), dot (complex 1-skeleton), or table
    /// (task relation).
    #[arg(long, default_value = "json")]
    format: String,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

enum CliError {
    /// Bad input or usage: exit 2.
    Input(String),
    /// Search or step budget exhausted: exit 3.
    Resource(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Resource(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Input(msg) | CliError::Resource(msg) => msg,
        }
    }
}

impl From<roundlab::json::JsonError> for CliError {
    fn from(err: roundlab::json::JsonError) -> Self {
        CliError::Input(err.to_string())
    }
}

impl From<SolveError> for CliError {
    fn from(err: SolveError) -> Self {
        match err {
            SolveError::ResourceLimit { .. } => CliError::Resource(err.to_string()),
            other => CliError::Input(other.to_string()),
        }
    }
}

impl From<ClosureError> for CliError {
    fn from(err: ClosureError) -> Self {
        match err {
            ClosureError::Solve(SolveError::ResourceLimit { .. })
            | ClosureError::StepBudgetExceeded(_) => CliError::Resource(err.to_string()),
            other => CliError::Input(other.to_string()),
        }
    }
}

impl From<roundlab::claims::ClaimError> for CliError {
    fn from(err: roundlab::claims::ClaimError) -> Self {
        CliError::Input(err.to_string())
    }
}

impl From<roundlab::rules::RuleError> for CliError {
    fn from(err: roundlab::rules::RuleError) -> Self {
        CliError::Input(err.to_string())
    }
}

impl From<roundlab::task::TaskError> for CliError {
    fn from(err: roundlab::task::TaskError) -> Self {
        CliError::Input(err.to_string())
    }
}

impl From<roundlab::model::ModelError> for CliError {
    fn from(err: roundlab::model::ModelError) -> Self {
        CliError::Input(err.to_string())
    }
}

fn read_file(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path)
        .map_err(|err| CliError::Input(format!("reading {}: {err}", path.display())))
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents)
        .map_err(|err| CliError::Input(format!("writing {}: {err}", path.display())))
}

fn load_task(path: &Path) -> Result<(TaskDto, Task), CliError> {
    let text = read_file(path)?;
    let dto: TaskDto =
        serde_json::from_str(&text).map_err(|err| CliError::Input(format!("task: {err}")))?;
    let task = task_from_dto(&dto)?;
    Ok((dto, task))
}

fn load_model(path: &Path) -> Result<ModelSpec, CliError> {
    model_from_json(&read_file(path)?).map_err(CliError::from)
}

fn cmd_gen_protocol(args: &GenProtocolArgs) -> Result<u8, CliError> {
    let sigma = match (&args.sigma, args.n) {
        (Some(path), _) => {
            let text = read_file(path)?;
            let dto: Vec<VertexDto> = serde_json::from_str(&text)
                .map_err(|err| CliError::Input(format!("sigma: {err}")))?;
            roundlab::json::simplex_from_dto(&dto)?
        }
        (None, Some(n)) if n >= 1 => Simplex::new((1..=n).map(|k| {
            Vertex::new(
                ProcessId::new(k).expect("ids start at 1"),
                Value::symbol(format!("x{k}")),
            )
        }))
        .map_err(|err| CliError::Input(err.to_string()))?,
        _ => {
            return Err(CliError::Input(
                "gen-protocol needs --n or --sigma".to_string(),
            ))
        }
    };
    let model = match &args.model {
        Some(path) => load_model(path)?,
        None => ModelSpec::iis(),
    };
    let complex = carrier(&sigma, &model, args.rounds)?;
    println!("vertices: {}", complex.vertex_count());
    println!("facets: {}", complex.facet_count());
    if let Some(out) = &args.out {
        write_file(out, &complex_to_json(&complex))?;
    }
    if let Some(dot) = &args.dot {
        write_file(dot, &complex_to_dot(&complex))?;
    }
    Ok(0)
}

fn cmd_solve(args: &SolveArgs) -> Result<u8, CliError> {
    let (_, task) = load_task(&args.task)?;
    let model = load_model(&args.model)?;
    let options = SolveOptions {
        node_budget: args.budget,
    };
    let verdict = solve(&task, &model, args.rounds, options)?;
    println!("{verdict}");
    match verdict {
        SolveVerdict::Solvable(witness) => {
            if let Some(path) = &args.witness {
                write_file(path, &map_to_json(&witness))?;
            }
            Ok(0)
        }
        SolveVerdict::Unsolvable { .. } => Ok(1),
    }
}

fn cmd_closure(args: &ClosureArgs) -> Result<u8, CliError> {
    let (_, task) = load_task(&args.task)?;
    let model = load_model(&args.model)?;
    let closed = match &args.beta {
        Some(path) => {
            let beta = beta_from_json(&read_file(path)?, task.inputs().ids())?;
            closure_beta(&task, &beta, ClosureOptions::default())?
        }
        None => closure(&task, &model, ClosureOptions::default())?,
    };
    write_file(&args.out, &task_to_json(&closed))?;
    println!(
        "closure written: {} input simplices, {} output facets",
        closed.delta_map().len(),
        closed.outputs().facet_count()
    );
    Ok(0)
}

fn cmd_fixed_point(args: &FixedPointArgs) -> Result<u8, CliError> {
    let (_, task) = load_task(&args.task)?;
    let model = load_model(&args.model)?;
    let fixed = is_fixed_point(&task, &model, ClosureOptions::default())?;
    println!("fixed point: {fixed}");
    Ok(if fixed { 0 } else { 1 })
}

/// Doubles (or for two-process strict agreement, triples) the precision
/// parameter: the closed form of one closure step for the named families.
fn reparameterize(dto: &TaskDto) -> Option<TaskDto> {
    match dto {
        TaskDto::Approx { n: 2, m, eps_num } => Some(TaskDto::Approx {
            n: 2,
            m: *m,
            eps_num: eps_num * 3,
        }),
        TaskDto::LiberalApprox { n, m, eps_num } => Some(TaskDto::LiberalApprox {
            n: *n,
            m: *m,
            eps_num: eps_num * 2,
        }),
        _ => None,
    }
}

fn cmd_lower_bound(args: &LowerBoundArgs) -> Result<u8, CliError> {
    let (dto, task) = load_task(&args.task)?;
    let model = load_model(&args.model)?;
    let solver = SolveOptions::default();

    if args.fast_family {
        let family = reparameterize(&dto).ok_or_else(|| {
            CliError::Input("--fast-family needs an approx or liberal_approx task".to_string())
        })?;
        let expected = task_from_dto(&family)?;
        let closed = closure(&task, &model, ClosureOptions::default())?;
        if !tasks_equal(&closed, &expected)? {
            return Err(CliError::Input(
                "closure does not match the family re-parameterization; rerun without --fast-family"
                    .to_string(),
            ));
        }
        // Equality verified at this instance: continue with re-parameterized
        // tasks only.
        let mut current_dto = dto;
        for step in 0..=args.max_steps {
            let current = task_from_dto(&current_dto)?;
            if solve(&current, &model, 0, solver)?.is_solvable() {
                println!("lower bound: {step} (exact chain bottom)");
                return Ok(0);
            }
            if step == args.max_steps {
                return Err(CliError::Resource(format!(
                    "chain did not stabilize within {} steps",
                    args.max_steps
                )));
            }
            current_dto = reparameterize(&current_dto)
                .expect("family membership is preserved by re-parameterization");
        }
        unreachable!("loop returns or errors at step == max_steps");
    }

    let transform = |t: &Task| closure(t, &model, ClosureOptions::default());
    let report = lower_bound_chain(&task, &model, &transform, None, args.max_steps, solver)?;
    match report.status {
        ChainStatus::ZeroRoundSolvable => {
            println!("lower bound: {} (exact chain bottom)", report.bound)
        }
        ChainStatus::FixedPoint => println!(
            "lower bound: {} (fixed point, unbounded within budget)",
            report.bound
        ),
    }
    Ok(0)
}

fn cmd_run_rule(args: &RunRuleArgs) -> Result<u8, CliError> {
    let (dto, task) = load_task(&args.task)?;
    let model = load_model(&args.model)?;
    let rule_name = args.rule.replace('-', "_");
    let rules = rule_schedule(&rule_name, &dto, args.rounds)?;
    let solved = run_rule(&task, &model, args.rounds, &rules)?;
    println!("rule solves the task: {solved}");
    Ok(if solved { 0 } else { 1 })
}

fn cmd_verify_claims(args: &VerifyClaimsArgs) -> Result<u8, CliError> {
    let text = read_file(&args.corpus)?;
    let corpus: Vec<ClaimSpec> =
        serde_json::from_str(&text).map_err(|err| CliError::Input(format!("corpus: {err}")))?;
    let outcomes = run_claims(&corpus, args.filter.as_deref());
    if outcomes.is_empty() {
        println!("warning: no claim matches the filter");
        return Ok(0);
    }
    let mut failures = 0;
    for outcome in &outcomes {
        let status = if outcome.pass { "PASS" } else { "FAIL" };
        println!("{status} {} — {} ({})", outcome.id, outcome.description, outcome.detail);
        if !outcome.pass {
            failures += 1;
        }
    }
    println!("{} of {} claims pass", outcomes.len() - failures, outcomes.len());
    Ok(if failures == 0 { 0 } else { 1 })
}

fn task_table(task: &Task) -> String {
    let mut out = String::new();
    for (sigma, taus) in task.delta_map() {
        let images: Vec<String> = taus.iter().map(|t| t.to_string()).collect();
        out.push_str(&format!("{sigma} -> {}\n", images.join(" | ")));
    }
    out
}

fn cmd_export(args: &ExportArgs) -> Result<u8, CliError> {
    let text = read_file(&args.input)?;
    // A file is either a complex ({"n", "facets"}) or a task ({"kind", ...}).
    let complex: Option<ChromaticComplex> = serde_json::from_str::<ComplexDto>(&text)
        .ok()
        .map(|dto| complex_from_dto(&dto))
        .transpose()?;
    let task: Option<Task> = match &complex {
        Some(_) => None,
        None => serde_json::from_str::<TaskDto>(&text)
            .ok()
            .map(|dto| task_from_dto(&dto))
            .transpose()?,
    };
    let rendered = match (&complex, &task, args.format.as_str()) {
        (Some(c), _, "json") => complex_to_json(c),
        (Some(c), _, "dot") => complex_to_dot(c),
        (None, Some(t), "json") => task_to_json(t),
        (None, Some(t), "table") => task_table(t),
        (None, None, _) => {
            return Err(CliError::Input(
                "input is neither a complex nor a task".to_string(),
            ))
        }
        (_, _, format) => {
            return Err(CliError::Input(format!(
                "format {format:?} does not apply to this input"
            )))
        }
    };
    match &args.out {
        Some(path) => write_file(path, &rendered)?,
        None => print!("{rendered}"),
    }
    Ok(0)
}

fn run(cli: &Cli) -> Result<u8, CliError> {
    if let Some(threads) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|err| CliError::Input(format!("thread pool: {err}")))?;
    }
    match &cli.command {
        Command::GenProtocol(args) => cmd_gen_protocol(args),
        Command::Solve(args) => cmd_solve(args),
        Command::Closure(args) => cmd_closure(args),
        Command::FixedPoint(args) => cmd_fixed_point(args),
        Command::LowerBound(args) => cmd_lower_bound(args),
        Command::RunRule(args) => cmd_run_rule(args),
        Command::VerifyClaims(args) => cmd_verify_claims(args),
        Command::Export(args) => cmd_export(args),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {}", err.message());
            ExitCode::from(err.code())
        }
    }
}
