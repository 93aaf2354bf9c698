//! Seeded instance generation and the experiment harness.
//!
//! Instances follow the usual random protocol: `θ_i = e^{α_i} ~ U(0, 5]`,
//! `w_i ~ U[1, 10]`, `γ_ij ~ U[0.1, 1]` per unordered pair, and
//! `C = κ Σ w_i`. For every `(n, κ)` combination the harness generates a batch
//! of instances, runs the requested methods, and aggregates runtimes and
//! optimality gaps against the LP revenue bound into one row per combination.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::io::Write;
use std::str::FromStr;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{
    branch_and_bound, knapsack_majorant_bound, lp_relaxation, BnbConfig, BoundMode, SolveStatus,
};
use crate::heuristics::{grasp, greedy, GraspConfig};
use crate::instance::{pair_count, Instance};
use crate::pricing::revenue_from_a_value;

/// Desk-scale grid: `n ∈ {20, 50, 100}`, `κ ∈ {0.02, 0.04, 0.06}`.
pub fn desk_grid() -> Vec<(usize, f64)> {
    grid(&[20, 50, 100], &[0.02, 0.04, 0.06])
}

/// Large grid: `n ∈ {400, 600, 800, 1000}`, `κ ∈ {0.02, 0.04, 0.06}`.
pub fn large_grid() -> Vec<(usize, f64)> {
    grid(&[400, 600, 800, 1000], &[0.02, 0.04, 0.06])
}

fn grid(ns: &[usize], kappas: &[f64]) -> Vec<(usize, f64)> {
    ns.iter()
        .flat_map(|&n| kappas.iter().map(move |&k| (n, k)))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeneratorConfig {
    pub n: usize,
    pub kappa: f64,
    pub seed: u64,
    pub beta: f64,
    /// Draw weights from the integers `1..=10` instead of the continuous range.
    pub integer_weights: bool,
}

impl GeneratorConfig {
    pub fn new(n: usize, kappa: f64, seed: u64) -> Self {
        GeneratorConfig {
            n,
            kappa,
            seed,
            beta: 0.1,
            integer_weights: false,
        }
    }
}

/// # Panics
///
/// Panics if `n < 2`, `κ ∉ (0, 1)` or `β ≤ 0`.
pub fn generate_instance(config: &GeneratorConfig) -> Instance {
    assert!(config.n >= 2, "n must be at least 2");
    assert!(
        config.kappa > 0.0 && config.kappa < 1.0,
        "kappa must lie in (0, 1)"
    );
    let n = config.n;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    // 5 (1 − u) with u ∈ [0, 1) lands in (0, 5].
    let alpha: Vec<f64> = (0..n)
        .map(|_| (5.0 * (1.0 - rng.gen::<f64>())).ln())
        .collect();
    let weights: Vec<f64> = (0..n)
        .map(|_| {
            if config.integer_weights {
                rng.gen_range(1..=10) as f64
            } else {
                rng.gen_range(1.0..=10.0)
            }
        })
        .collect();
    let gamma: Vec<f64> = (0..pair_count(n))
        .map(|_| rng.gen_range(0.1..=1.0))
        .collect();
    let capacity = config.kappa * weights.iter().sum::<f64>();
    Instance::new(alpha, weights, capacity, config.beta, gamma).expect("generated data is valid")
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of one instance: a splitmix64 fold of the master seed, `n`, the bit
/// pattern of `κ`, and the instance index. Stable across platforms and
/// releases.
pub fn instance_seed(master_seed: u64, n: usize, kappa: f64, index: usize) -> u64 {
    [n as u64, kappa.to_bits(), index as u64]
        .into_iter()
        .fold(splitmix64(master_seed), |h, v| {
            splitmix64(h ^ splitmix64(v))
        })
}

/// `(1 − method / reference) × 100`, clamped at zero.
pub fn compute_gap(reference_obj: f64, method_obj: f64) -> Result<f64> {
    if reference_obj.is_nan() || reference_obj <= 0.0 {
        return Err(Error::NonPositiveReference(reference_obj));
    }
    Ok(((1.0 - method_obj / reference_obj) * 100.0).max(0.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Exact,
    LpBound,
    Greedy,
    Grasp,
}

impl Method {
    pub const ALL: [Method; 4] = [
        Method::Exact,
        Method::LpBound,
        Method::Greedy,
        Method::Grasp,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Exact => "exact",
            Method::LpBound => "lp-bound",
            Method::Greedy => "greedy",
            Method::Grasp => "grasp",
        }
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::InvalidArgument {
                name: "methods",
                message: format!("unknown method `{s}`"),
            })
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub grid: Vec<(usize, f64)>,
    pub instances_per_combo: usize,
    pub methods: BTreeSet<Method>,
    pub master_seed: u64,
    pub beta: f64,
    pub integer_weights: bool,
    /// `seed` is ignored; every instance uses its own seed.
    pub grasp: GraspConfig,
    pub bound_mode: BoundMode,
    pub exact_time_limit: Option<Duration>,
    pub exact_node_limit: Option<u64>,
    /// Worker threads; `None` uses the global pool.
    pub jobs: Option<usize>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            grid: desk_grid(),
            instances_per_combo: 25,
            methods: Method::ALL.into_iter().collect(),
            master_seed: 0,
            beta: 0.1,
            integer_weights: false,
            grasp: GraspConfig::default(),
            bound_mode: BoundMode::Lp,
            exact_time_limit: Some(Duration::from_secs(60)),
            exact_node_limit: None,
            jobs: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodOutcome {
    pub a_value: f64,
    pub revenue: f64,
    pub seconds: f64,
    /// `optimal`, `feasible`, `bound-only` or `heuristic`.
    pub status: String,
}

/// One line of the per-instance log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceRecord {
    pub n: usize,
    pub kappa: f64,
    pub index: usize,
    pub seed: u64,
    pub majorant_bound: f64,
    pub exact: Option<MethodOutcome>,
    pub lp_bound: Option<MethodOutcome>,
    pub greedy: Option<MethodOutcome>,
    pub grasp: Option<MethodOutcome>,
}

impl InstanceRecord {
    pub fn outcome(&self, method: Method) -> Option<&MethodOutcome> {
        match method {
            Method::Exact => self.exact.as_ref(),
            Method::LpBound => self.lp_bound.as_ref(),
            Method::Greedy => self.greedy.as_ref(),
            Method::Grasp => self.grasp.as_ref(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stat {
    pub avg: f64,
    pub max: f64,
}

impl Stat {
    fn of(values: &[f64]) -> Option<Stat> {
        if values.is_empty() {
            return None;
        }
        Some(Stat {
            avg: values.iter().sum::<f64>() / values.len() as f64,
            max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        })
    }
}

/// Aggregates of one `(n, κ)` combination, laid out like a results table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRow {
    pub n: usize,
    pub kappa: f64,
    pub instance_count: usize,
    pub exact_time: Option<Stat>,
    pub lp_bound_time: Option<Stat>,
    pub greedy_time: Option<Stat>,
    pub grasp_time: Option<Stat>,
    pub exact_gap: Option<Stat>,
    pub greedy_gap: Option<Stat>,
    pub grasp_gap: Option<Stat>,
    /// Exact solves that stopped on a budget and are only feasible.
    pub exact_budget_hits: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Experiment {
    pub rows: Vec<ExperimentRow>,
    pub records: Vec<InstanceRecord>,
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, f64) {
    let start = Instant::now();
    let out = f();
    (out, start.elapsed().as_secs_f64())
}

fn run_instance(config: &ExperimentConfig, n: usize, kappa: f64, index: usize) -> InstanceRecord {
    let seed = instance_seed(config.master_seed, n, kappa, index);
    let inst = generate_instance(&GeneratorConfig {
        n,
        kappa,
        seed,
        beta: config.beta,
        integer_weights: config.integer_weights,
    });
    let grasp_config = GraspConfig {
        seed,
        ..config.grasp
    };
    let beta = inst.beta();
    let wants = |m| config.methods.contains(&m);

    let lp_bound = wants(Method::LpBound).then(|| {
        let (lp, secs) = timed(|| lp_relaxation(&inst));
        MethodOutcome {
            a_value: lp.objective_value,
            revenue: revenue_from_a_value(lp.objective_value, beta),
            seconds: secs,
            status: "bound-only".into(),
        }
    });
    let heuristic = |r: crate::heuristics::HeuristicResult, secs| MethodOutcome {
        a_value: r.a_value,
        revenue: r.revenue,
        seconds: secs,
        status: "heuristic".into(),
    };
    let greedy = wants(Method::Greedy).then(|| {
        let (r, secs) = timed(|| greedy(&inst));
        heuristic(r, secs)
    });
    let grasp = wants(Method::Grasp).then(|| {
        let (r, secs) = timed(|| grasp(&inst, &grasp_config));
        heuristic(r, secs)
    });
    let exact = wants(Method::Exact).then(|| {
        let bnb = BnbConfig {
            bound_mode: config.bound_mode,
            node_limit: config.exact_node_limit,
            time_limit: config.exact_time_limit,
            grasp: grasp_config,
        };
        let (r, secs) = timed(|| branch_and_bound(&inst, &bnb));
        MethodOutcome {
            a_value: r.a_value,
            revenue: r.revenue,
            seconds: secs,
            status: match r.status {
                SolveStatus::Optimal => "optimal",
                SolveStatus::Feasible => "feasible",
                SolveStatus::BoundOnly => "bound-only",
            }
            .into(),
        }
    });

    InstanceRecord {
        n,
        kappa,
        index,
        seed,
        majorant_bound: knapsack_majorant_bound(&inst),
        exact,
        lp_bound,
        greedy,
        grasp,
    }
}

/// Runs every requested method on every generated instance. Instances of a
/// combination run in parallel; results are ordered by instance index.
pub fn run_experiment(config: &ExperimentConfig) -> Experiment {
    if config.methods.is_empty() || config.instances_per_combo == 0 {
        return Experiment {
            rows: Vec::new(),
            records: Vec::new(),
        };
    }
    let run = || {
        let mut records = Vec::new();
        for &(n, kappa) in &config.grid {
            let batch: Vec<InstanceRecord> = (0..config.instances_per_combo)
                .into_par_iter()
                .map(|index| run_instance(config, n, kappa, index))
                .collect();
            records.extend(batch);
        }
        records
    };
    let records = match config.jobs {
        Some(jobs) => rayon::ThreadPoolBuilder::new()
            .num_threads(jobs.max(1))
            .build()
            .expect("thread pool")
            .install(run),
        None => run(),
    };
    Experiment {
        rows: aggregate(&records),
        records,
    }
}

/// Groups records by `(n, κ)` in order of first appearance and aggregates.
pub fn aggregate(records: &[InstanceRecord]) -> Vec<ExperimentRow> {
    let mut combos: Vec<(usize, f64)> = Vec::new();
    for r in records {
        if !combos.iter().any(|&(n, k)| n == r.n && k == r.kappa) {
            combos.push((r.n, r.kappa));
        }
    }
    combos
        .into_iter()
        .map(|(n, kappa)| {
            let group: Vec<&InstanceRecord> = records
                .iter()
                .filter(|r| r.n == n && r.kappa == kappa)
                .collect();
            let times = |m: Method| {
                let v: Vec<f64> = group
                    .iter()
                    .filter_map(|r| r.outcome(m))
                    .map(|o| o.seconds)
                    .collect();
                Stat::of(&v)
            };
            let gaps = |m: Method| {
                let v: Vec<f64> = group
                    .iter()
                    .filter_map(|r| {
                        let ub = r.lp_bound.as_ref()?.revenue;
                        let got = r.outcome(m)?.revenue;
                        compute_gap(ub, got).ok()
                    })
                    .collect();
                Stat::of(&v)
            };
            ExperimentRow {
                n,
                kappa,
                instance_count: group.len(),
                exact_time: times(Method::Exact),
                lp_bound_time: times(Method::LpBound),
                greedy_time: times(Method::Greedy),
                grasp_time: times(Method::Grasp),
                exact_gap: gaps(Method::Exact),
                greedy_gap: gaps(Method::Greedy),
                grasp_gap: gaps(Method::Grasp),
                exact_budget_hits: group
                    .iter()
                    .filter(|r| r.exact.as_ref().is_some_and(|o| o.status == "feasible"))
                    .count(),
            }
        })
        .collect()
}

/// Writes one JSON object per line.
pub fn write_log<W: Write>(records: &[InstanceRecord], mut out: W) -> Result<()> {
    for r in records {
        serde_json::to_writer(&mut out, r)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_log(text: &str) -> Result<Vec<InstanceRecord>> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| Ok(serde_json::from_str(l)?))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Json,
    Markdown,
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            "markdown" | "md" => Ok(ReportFormat::Markdown),
            other => Err(Error::InvalidArgument {
                name: "format",
                message: format!("unknown report format `{other}`"),
            }),
        }
    }
}

/// Reference aggregates reported for `n` between 400 and 1000, quoted in the
/// markdown report for comparison.
pub const REFERENCE_NOTE: &str = "Reference values at n = 400..1000: exact gap 0.03% avg; \
greedy gap 0.18% avg, 0.46% worst; GRASP gap 0.16% avg, 0.31% worst.";

const HEADER: [&str; 15] = [
    "combo",
    "exact_time_avg",
    "exact_time_max",
    "ub_time_avg",
    "ub_time_max",
    "greedy_time_avg",
    "greedy_time_max",
    "grasp_time_avg",
    "grasp_time_max",
    "exact_gap_avg",
    "exact_gap_max",
    "greedy_gap_avg",
    "greedy_gap_max",
    "grasp_gap_avg",
    "grasp_gap_max",
];

fn cells(row: &ExperimentRow) -> Vec<String> {
    let time = |s: Option<Stat>| match s {
        Some(s) => [format!("{:.3}", s.avg), format!("{:.3}", s.max)],
        None => [String::new(), String::new()],
    };
    let gap = |s: Option<Stat>| match s {
        Some(s) => [format!("{:.2}", s.avg), format!("{:.2}", s.max)],
        None => [String::new(), String::new()],
    };
    let mut out = vec![format!("({}, {})", row.n, row.kappa)];
    for s in [
        row.exact_time,
        row.lp_bound_time,
        row.greedy_time,
        row.grasp_time,
    ] {
        out.extend(time(s));
    }
    for s in [row.exact_gap, row.greedy_gap, row.grasp_gap] {
        out.extend(gap(s));
    }
    out
}

/// Column means of the gap statistics; runtime cells are dashed.
fn average_cells(rows: &[ExperimentRow]) -> Vec<String> {
    let mut out = vec!["Average".to_string()];
    out.extend(std::iter::repeat_n("----".to_string(), 8));
    for pick in [
        |r: &ExperimentRow| r.exact_gap,
        |r: &ExperimentRow| r.greedy_gap,
        |r: &ExperimentRow| r.grasp_gap,
    ] {
        let stats: Vec<Stat> = rows.iter().filter_map(pick).collect();
        if stats.is_empty() {
            out.extend([String::new(), String::new()]);
        } else {
            let k = stats.len() as f64;
            out.push(format!(
                "{:.2}",
                stats.iter().map(|s| s.avg).sum::<f64>() / k
            ));
            out.push(format!(
                "{:.2}",
                stats.iter().map(|s| s.max).sum::<f64>() / k
            ));
        }
    }
    out
}

fn csv_field(s: &str) -> String {
    if s.contains(',') || s.contains('"') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn emit_report(rows: &[ExperimentRow], format: ReportFormat) -> Result<String> {
    match format {
        ReportFormat::Json => Ok(serde_json::to_string_pretty(rows)? + "\n"),
        ReportFormat::Csv => {
            if rows.is_empty() {
                return Err(Error::EmptyReport("csv"));
            }
            let mut out = HEADER.join(",") + "\n";
            for line in rows
                .iter()
                .map(cells)
                .chain(std::iter::once(average_cells(rows)))
            {
                let fields: Vec<String> = line.iter().map(|c| csv_field(c)).collect();
                out += &fields.join(",");
                out.push('\n');
            }
            Ok(out)
        }
        ReportFormat::Markdown => {
            if rows.is_empty() {
                return Err(Error::EmptyReport("markdown"));
            }
            let mut out = String::new();
            let _ = writeln!(out, "| {} |", HEADER.join(" | "));
            let _ = writeln!(out, "|{}", "---|".repeat(HEADER.len()));
            for line in rows
                .iter()
                .map(cells)
                .chain(std::iter::once(average_cells(rows)))
            {
                let _ = writeln!(out, "| {} |", line.join(" | "));
            }
            let hits: usize = rows.iter().map(|r| r.exact_budget_hits).sum();
            if hits > 0 {
                let _ = writeln!(
                    out,
                    "\n{hits} exact solve(s) stopped on a budget and are reported as feasible."
                );
            }
            let _ = writeln!(out, "\n{REFERENCE_NOTE}");
            Ok(out)
        }
    }
}
