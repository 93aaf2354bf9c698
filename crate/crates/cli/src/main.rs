use std::collections::BTreeSet;
use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use pcl_assort::bench::{
    desk_grid, emit_report, large_grid, run_experiment, write_log, ExperimentConfig, Method,
    ReportFormat,
};
use pcl_assort::exact::MAX_BRUTE_FORCE_N;
use pcl_assort::prelude::*;
use pcl_assort::Error;
use serde::Serialize;
use serde_json::json;

/// Assortment and price optimization under the paired combinatorial logit model.
#[derive(Parser)]
#[command(name = "pclopt", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random instance.
    Generate(GenerateArgs),
    /// Optimize the assortment and its uniform price.
    Solve(SolveArgs),
    /// Closed-form choice probabilities and expected revenue.
    Evaluate(EvaluateArgs),
    /// Monte Carlo choice frequencies.
    Simulate(SimulateArgs),
    /// Run the benchmark grid and write a report.
    Bench(BenchArgs),
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long)]
    n: usize,
    /// Capacity as a fraction of the total weight.
    #[arg(long)]
    kappa: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0.1)]
    beta: f64,
    #[arg(long)]
    integer_weights: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SolveMethod {
    Exact,
    BruteForce,
    Greedy,
    Grasp,
    LpBound,
}

#[derive(Clone, Copy, ValueEnum)]
enum BoundArg {
    Lp,
    Majorant,
}

#[derive(Args)]
struct SolveArgs {
    /// Instance JSON file, or `-` for stdin.
    #[arg(long)]
    instance: PathBuf,
    #[arg(long, value_enum)]
    method: SolveMethod,
    #[arg(long)]
    rcl_max: Option<usize>,
    #[arg(long)]
    max_iter: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    budget_seconds: Option<f64>,
    #[arg(long, value_enum)]
    bound_mode: Option<BoundArg>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ChoiceArgs {
    #[arg(long)]
    instance: PathBuf,
    /// `optimal`, a single number (uniform price), a JSON array, or a JSON file.
    #[arg(long, default_value = "optimal")]
    prices: String,
    /// A JSON 0/1 array, comma-separated product indices, `all`, `none`, or a JSON file.
    #[arg(long)]
    assortment: String,
}

#[derive(Args)]
struct EvaluateArgs {
    #[command(flatten)]
    choice: ChoiceArgs,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    choice: ChoiceArgs,
    #[arg(long, default_value_t = 100_000)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
    Markdown,
}

#[derive(Args)]
struct BenchArgs {
    /// `desk`, `large`, or a list such as `20:0.02,50:0.04`.
    #[arg(long, default_value = "desk")]
    grid: String,
    #[arg(long, default_value_t = 25)]
    instances: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Comma-separated subset of exact, lp-bound, greedy, grasp.
    #[arg(long, default_value = "exact,lp-bound,greedy,grasp")]
    methods: String,
    #[arg(long, value_enum, default_value = "markdown")]
    format: FormatArg,
    /// Report destination; the per-instance log goes next to it as `<out>.jsonl`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Per-instance log destination (JSON lines).
    #[arg(long)]
    log: Option<PathBuf>,
    /// Wall-clock budget per exact solve [default: 60].
    #[arg(long)]
    budget_seconds: Option<f64>,
    #[arg(long)]
    integer_weights: bool,
    #[arg(long)]
    jobs: Option<usize>,
    #[arg(long, value_enum)]
    bound_mode: Option<BoundArg>,
}

#[derive(Debug)]
struct Failure {
    code: &'static str,
    message: String,
    path: Option<String>,
    exit: u8,
}

impl Failure {
    fn usage(message: impl Into<String>, path: impl Into<String>) -> Self {
        Failure {
            code: "invalid-argument",
            message: message.into(),
            path: Some(path.into()),
            exit: 2,
        }
    }

    fn io(err: io::Error, path: &Path) -> Self {
        Failure {
            code: "io",
            message: err.to_string(),
            path: Some(path.display().to_string()),
            exit: 1,
        }
    }
}

impl From<Error> for Failure {
    fn from(err: Error) -> Self {
        let message = err.to_string();
        match err {
            Error::InvalidInstance { path, .. } => Failure {
                code: "invalid-instance",
                message,
                path: Some(path),
                exit: 2,
            },
            Error::InvalidArgument { name, .. } => Failure::usage(message, format!("--{name}")),
            Error::TooLarge { .. } => Failure::usage(message, "--method"),
            Error::Io(_) => Failure {
                code: "io",
                message,
                path: None,
                exit: 1,
            },
            _ => Failure {
                code: "internal",
                message,
                path: None,
                exit: 1,
            },
        }
    }
}

type CliResult<T = ()> = Result<T, Failure>;

fn read_text(path: &Path) -> CliResult<String> {
    if path == Path::new("-") {
        let mut s = String::new();
        io::stdin()
            .read_to_string(&mut s)
            .map_err(|e| Failure::io(e, path))?;
        Ok(s)
    } else {
        fs::read_to_string(path).map_err(|e| Failure::io(e, path))
    }
}

fn load_instance(path: &Path) -> CliResult<Instance> {
    Ok(Instance::from_json(&read_text(path)?)?)
}

fn emit(text: &str, out: Option<&Path>) -> CliResult {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| Failure::io(e, p)),
        None => {
            let mut stdout = io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| Failure::io(e, Path::new("<stdout>")))
        }
    }
}

fn emit_json<T: Serialize>(value: &T, out: Option<&Path>) -> CliResult {
    let text = serde_json::to_string_pretty(value).expect("serializable output") + "\n";
    emit(&text, out)
}

fn check_positive(value: f64, flag: &str) -> CliResult {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Failure::usage(
            format!("{flag} must be a positive number"),
            flag,
        ))
    }
}

fn generate(args: GenerateArgs) -> CliResult {
    if args.n < 2 {
        return Err(Failure::usage("--n must be at least 2", "--n"));
    }
    if !(args.kappa > 0.0 && args.kappa < 1.0) {
        return Err(Failure::usage("--kappa must lie in (0, 1)", "--kappa"));
    }
    check_positive(args.beta, "--beta")?;
    let inst = generate_instance(&GeneratorConfig {
        n: args.n,
        kappa: args.kappa,
        seed: args.seed,
        beta: args.beta,
        integer_weights: args.integer_weights,
    });
    emit(&(inst.to_json() + "\n"), args.out.as_deref())
}

fn solve(args: SolveArgs) -> CliResult {
    use SolveMethod::*;
    let m = args.method;
    let reject = |set: bool, flag: &str, allowed: &str| {
        if set {
            Err(Failure::usage(
                format!("{flag} only applies to {allowed}"),
                flag,
            ))
        } else {
            Ok(())
        }
    };
    let grasp_like = matches!(m, Grasp | Exact);
    reject(
        args.rcl_max.is_some() && !grasp_like,
        "--rcl-max",
        "--method grasp or exact",
    )?;
    reject(
        args.max_iter.is_some() && !grasp_like,
        "--max-iter",
        "--method grasp or exact",
    )?;
    reject(
        args.seed.is_some() && !grasp_like,
        "--seed",
        "--method grasp or exact",
    )?;
    reject(
        args.budget_seconds.is_some() && m != Exact,
        "--budget-seconds",
        "--method exact",
    )?;
    reject(
        args.bound_mode.is_some() && m != Exact,
        "--bound-mode",
        "--method exact",
    )?;
    if args.rcl_max == Some(0) {
        return Err(Failure::usage("--rcl-max must be at least 1", "--rcl-max"));
    }
    if let Some(b) = args.budget_seconds {
        check_positive(b, "--budget-seconds")?;
    }

    let inst = load_instance(&args.instance)?;
    let defaults = GraspConfig::default();
    let grasp_cfg = GraspConfig {
        rcl_max: args.rcl_max.unwrap_or(defaults.rcl_max),
        max_iter: args.max_iter.unwrap_or(defaults.max_iter),
        seed: args.seed.unwrap_or(defaults.seed),
    };
    let out = args.out.as_deref();
    match m {
        Greedy => emit_json(&with_method("greedy", greedy(&inst)), out),
        Grasp => emit_json(&with_method("grasp", grasp(&inst, &grasp_cfg)), out),
        BruteForce => {
            if inst.n() > MAX_BRUTE_FORCE_N {
                return Err(Failure::usage(
                    format!(
                        "brute force is limited to n <= {MAX_BRUTE_FORCE_N}, got {}",
                        inst.n()
                    ),
                    "--method",
                ));
            }
            emit_json(&with_method("brute-force", brute_force_oracle(&inst)?), out)
        }
        Exact => {
            let cfg = BnbConfig {
                bound_mode: match args.bound_mode {
                    Some(BoundArg::Majorant) => BoundMode::Majorant,
                    _ => BoundMode::Lp,
                },
                node_limit: None,
                time_limit: args.budget_seconds.map(Duration::from_secs_f64),
                grasp: grasp_cfg,
            };
            let r = branch_and_bound(&inst, &cfg);
            if r.status == SolveStatus::Feasible {
                eprintln!(
                    "budget exhausted after {} nodes; returning best feasible assortment",
                    r.stats.nodes
                );
            }
            emit_json(&with_method("exact", r), out)
        }
        LpBound => {
            let lp = lp_relaxation(&inst);
            let revenue_bound =
                pcl_assort::pricing::revenue_from_a_value(lp.objective_value, inst.beta());
            emit_json(
                &json!({
                    "method": "lp-bound",
                    "status": SolveStatus::BoundOnly,
                    "a_value": lp.objective_value,
                    "upper_bound": lp.objective_value,
                    "revenue_upper_bound": revenue_bound,
                    "x_frac": lp.x_frac,
                }),
                out,
            )
        }
    }
}

fn with_method<T: Serialize>(method: &str, result: T) -> serde_json::Value {
    let mut v = serde_json::to_value(result).expect("serializable result");
    if let serde_json::Value::Object(map) = &mut v {
        map.insert("method".into(), json!(method));
    }
    v
}

fn parse_json_or_file(arg: &str, flag: &str) -> CliResult<serde_json::Value> {
    let text = if arg.trim_start().starts_with('[') {
        arg.to_string()
    } else {
        read_text(Path::new(arg))?
    };
    serde_json::from_str(&text).map_err(|e| Failure::usage(format!("{flag}: {e}"), flag))
}

fn parse_prices(arg: &str, inst: &Instance, x: &Assortment) -> CliResult<PriceVector> {
    let n = inst.n();
    if arg == "optimal" {
        let up = optimal_uniform_price(inst, x);
        return Ok(PriceVector::uniform(n, up.price)?);
    }
    if let Ok(p) = arg.parse::<f64>() {
        return PriceVector::uniform(n, p).map_err(|e| Failure::usage(e.to_string(), "--prices"));
    }
    let value = parse_json_or_file(arg, "--prices")?;
    let list = value
        .as_array()
        .ok_or_else(|| Failure::usage("expected an array of prices", "--prices"))?;
    if list.len() != n {
        return Err(Failure::usage(
            format!("expected {n} prices, found {}", list.len()),
            "--prices",
        ));
    }
    let mut prices = Vec::with_capacity(n);
    for (i, v) in list.iter().enumerate() {
        match v.as_f64() {
            Some(p) if p.is_finite() && p >= 0.0 => prices.push(p),
            _ => {
                return Err(Failure::usage(
                    "price must be a finite nonnegative number",
                    format!("--prices/{i}"),
                ))
            }
        }
    }
    PriceVector::new(prices).map_err(|e| Failure::usage(e.to_string(), "--prices"))
}

fn parse_assortment(arg: &str, n: usize) -> CliResult<Assortment> {
    let flag = "--assortment";
    match arg.trim() {
        "all" => return Ok(Assortment::full(n)),
        "none" | "" => return Ok(Assortment::empty(n)),
        _ => {}
    }
    let looks_like_indices = arg
        .chars()
        .all(|c| c.is_ascii_digit() || c == ',' || c == ' ');
    if looks_like_indices {
        let mut idx = Vec::new();
        for part in arg.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let i: usize = part
                .parse()
                .map_err(|_| Failure::usage(format!("bad index `{part}`"), flag))?;
            if i >= n {
                return Err(Failure::usage(
                    format!("index {i} out of range for n = {n}"),
                    flag,
                ));
            }
            idx.push(i);
        }
        return Ok(Assortment::from_indices(n, &idx));
    }
    let value = parse_json_or_file(arg, flag)?;
    let list = value
        .as_array()
        .ok_or_else(|| Failure::usage("expected an array of 0/1 flags", flag))?;
    if list.len() != n {
        return Err(Failure::usage(
            format!("expected {n} flags, found {}", list.len()),
            flag,
        ));
    }
    let mut bits = Vec::with_capacity(n);
    for (i, v) in list.iter().enumerate() {
        match v.as_u64().or_else(|| v.as_bool().map(u64::from)) {
            Some(0) => bits.push(false),
            Some(1) => bits.push(true),
            _ => return Err(Failure::usage("expected 0 or 1", format!("{flag}/{i}"))),
        }
    }
    Ok(Assortment::new(bits))
}

fn choice_inputs(args: &ChoiceArgs) -> CliResult<(Instance, Assortment, PriceVector)> {
    let inst = load_instance(&args.instance)?;
    let x = parse_assortment(&args.assortment, inst.n())?;
    let p = parse_prices(&args.prices, &inst, &x)?;
    Ok((inst, x, p))
}

fn evaluate(args: EvaluateArgs) -> CliResult {
    let (inst, x, p) = choice_inputs(&args.choice)?;
    let q = choice_probabilities(&inst, &p, &x);
    emit_json(
        &json!({
            "product_probs": q.product_probs,
            "no_purchase": q.no_purchase,
            "expected_revenue": expected_revenue(&inst, &p, &x),
            "feasible": x.is_feasible(&inst),
            "prices": p,
            "assortment": x,
        }),
        None,
    )
}

fn simulate(args: SimulateArgs) -> CliResult {
    if args.trials == 0 {
        return Err(Failure::usage("--trials must be positive", "--trials"));
    }
    let (inst, x, p) = choice_inputs(&args.choice)?;
    let q = simulate_choice(&inst, &p, &x, args.seed, args.trials);
    emit_json(
        &json!({
            "trials": args.trials,
            "seed": args.seed,
            "product_freqs": q.product_probs,
            "no_purchase": q.no_purchase,
        }),
        None,
    )
}

fn parse_grid(arg: &str) -> CliResult<Vec<(usize, f64)>> {
    match arg {
        "desk" => return Ok(desk_grid()),
        "large" => return Ok(large_grid()),
        _ => {}
    }
    let mut grid = Vec::new();
    for (k, item) in arg.split(',').map(str::trim).enumerate() {
        let path = format!("--grid/{k}");
        let (n, kappa) = item.split_once(':').ok_or_else(|| {
            Failure::usage(format!("expected `n:kappa`, found `{item}`"), path.clone())
        })?;
        let n: usize = n
            .trim()
            .parse()
            .map_err(|_| Failure::usage(format!("bad n `{n}`"), path.clone()))?;
        let kappa: f64 = kappa
            .trim()
            .parse()
            .map_err(|_| Failure::usage(format!("bad kappa `{kappa}`"), path.clone()))?;
        if n < 2 || !(kappa > 0.0 && kappa < 1.0) {
            return Err(Failure::usage("need n >= 2 and kappa in (0, 1)", path));
        }
        grid.push((n, kappa));
    }
    Ok(grid)
}

fn bench(args: BenchArgs) -> CliResult {
    let grid = parse_grid(&args.grid)?;
    let methods: BTreeSet<Method> = args
        .methods
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<Method>())
        .collect::<Result<_, _>>()?;
    if let Some(b) = args.budget_seconds {
        check_positive(b, "--budget-seconds")?;
    }
    if args.jobs == Some(0) {
        return Err(Failure::usage("--jobs must be at least 1", "--jobs"));
    }
    let format = match args.format {
        FormatArg::Csv => ReportFormat::Csv,
        FormatArg::Json => ReportFormat::Json,
        FormatArg::Markdown => ReportFormat::Markdown,
    };
    let config = ExperimentConfig {
        grid,
        instances_per_combo: args.instances,
        methods,
        master_seed: args.seed,
        integer_weights: args.integer_weights,
        exact_time_limit: Some(Duration::from_secs_f64(args.budget_seconds.unwrap_or(60.0))),
        jobs: args.jobs,
        bound_mode: match args.bound_mode {
            Some(BoundArg::Majorant) => BoundMode::Majorant,
            _ => BoundMode::Lp,
        },
        ..ExperimentConfig::default()
    };
    eprintln!(
        "running {} combos x {} instances",
        config.grid.len(),
        config.instances_per_combo
    );
    let experiment = run_experiment(&config);
    let report = emit_report(&experiment.rows, format)?;

    let log_path = args.log.clone().or_else(|| {
        args.out.as_ref().map(|p| {
            let mut s = p.clone().into_os_string();
            s.push(".jsonl");
            PathBuf::from(s)
        })
    });
    if let Some(path) = &log_path {
        let file = fs::File::create(path).map_err(|e| Failure::io(e, path))?;
        write_log(&experiment.records, io::BufWriter::new(file))?;
        eprintln!(
            "wrote {} instance records to {}",
            experiment.records.len(),
            path.display()
        );
    }
    emit(&report, args.out.as_deref())
}

fn run(cli: Cli) -> CliResult {
    match cli.command {
        Command::Generate(a) => generate(a),
        Command::Solve(a) => solve(a),
        Command::Evaluate(a) => evaluate(a),
        Command::Simulate(a) => simulate(a),
        Command::Bench(a) => bench(a),
    }
}

fn report_failure(f: &Failure) {
    let envelope = json!({ "code": f.code, "message": f.message, "path": f.path });
    eprintln!("{envelope}");
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::{ContextKind, ErrorKind};
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            let path = e.get(ContextKind::InvalidArg).map(|v| v.to_string());
            let message = e.render().to_string();
            report_failure(&Failure {
                code: "usage",
                message: message
                    .lines()
                    .next()
                    .unwrap_or_default()
                    .trim_start_matches("error: ")
                    .to_string(),
                path,
                exit: 2,
            });
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            report_failure(&f);
            ExitCode::from(f.exit)
        }
    }
}
