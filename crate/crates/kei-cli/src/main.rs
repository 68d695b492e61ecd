//! `kei`: command-line clearing tools for kidney exchange pools with a
//! budgeted supply of immunosuppressants.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use kei_core::gen::{self, GeneratorConfig};
use kei_core::graph::ExchangeGraph;
use kei_core::instance::{Allocation, AllocationStats, KeiInstance};
use kei_core::oracle::{self, OracleConstraints};
use kei_core::picef::PicefModel;
use kei_core::pool::{DirectedPoolGraph, PoolOptions};
use kei_core::scheme::{CustomWeights, WeightScheme};
use kei_core::solve::{self, SolveOptions};
use kei_core::solver::{BranchBoundSolver, Limits, SolveStatus, SolverBackend};
use kei_core::sweep::{self, ExperimentSpec, RunOptions};

#[derive(Parser)]
#[command(
    name = "kei",
    version,
    about = "Exact clearing for kidney exchange pools with immunosuppressant budgets"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic pool instance.
    Gen(GenArgs),
    /// Clear an instance with the bipartite matching solver.
    Solve(SolveArgs),
    /// Clear an instance with the cycle-and-chain integer program.
    IlpSolve(IlpArgs),
    /// Run a budget-sweep experiment from a spec file.
    Sweep(SweepArgs),
    /// Dump the bipartite exchange graph in DOT format.
    Graph(GraphArgs),
    /// Export the budgeted-matching form of an instance.
    ExportBudgeted(ExportArgs),
    /// Brute-force reference optimum (fixture generation; small instances
    /// only).
    #[command(hide = true)]
    Oracle(OracleArgs),
}

#[derive(Args)]
struct GenArgs {
    /// Pool vertices (couples + non-directed donors).
    #[arg(long, default_value_t = 64)]
    n: usize,
    /// Fraction of eligible combinations activated as half-compatible.
    #[arg(long, default_value_t = 0.2)]
    alpha: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Generator config JSON; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    ndd_fraction: Option<f64>,
    #[arg(long)]
    sensitized_fraction: Option<f64>,
    #[arg(long)]
    base_compat_density: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long)]
    instance: PathBuf,
    /// max-tr | max-co-bm | lex-co-tr | lex-co-neg-hc | lex-tr-neg-hc | custom
    #[arg(long)]
    scheme: String,
    /// Custom weight table (JSON), required with --scheme custom.
    #[arg(long)]
    custom_weights: Option<PathBuf>,
    /// Suppressant budget; switches to the silver-bullet budgeted solver.
    #[arg(long)]
    budget: Option<u32>,
    /// Guarantee own-compatible pairs a compatible kidney.
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    strict_pairs: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct IlpArgs {
    #[arg(long)]
    instance: PathBuf,
    /// Maximum cycle length.
    #[arg(long, default_value_t = 3)]
    cycle_cap: usize,
    /// Maximum chain length (edges); 0 disables chains.
    #[arg(long, default_value_t = 3)]
    chain_cap: usize,
    /// Suppressant budget; unbounded when omitted.
    #[arg(long)]
    budget: Option<u32>,
    #[arg(long, default_value = "max-tr")]
    scheme: String,
    #[arg(long)]
    custom_weights: Option<PathBuf>,
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    strict_pairs: bool,
    /// Allow a recipient to receive her own donor's kidney.
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    self_loops: bool,
    /// Seconds; falls back to KEI_TIME_LIMIT.
    #[arg(long)]
    time_limit: Option<f64>,
    /// Search node budget; falls back to KEI_NODE_LIMIT.
    #[arg(long)]
    node_limit: Option<u64>,
    /// Write the model in LP text format.
    #[arg(long)]
    export_lp: Option<PathBuf>,
    /// Append the incumbent trajectory as CSV.
    #[arg(long)]
    log_csv: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    /// Experiment spec (JSON).
    #[arg(long)]
    spec: PathBuf,
    #[arg(long)]
    out_dir: PathBuf,
    /// Disable parallel solving of budget points.
    #[arg(long)]
    sequential: bool,
    #[arg(long)]
    time_limit: Option<f64>,
    #[arg(long)]
    node_limit: Option<u64>,
}

#[derive(Args)]
struct GraphArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long, default_value = "max-tr")]
    scheme: String,
    /// Apply the own-compatible pair restriction before dumping.
    #[arg(long)]
    restrict: bool,
    /// Insert the suppressant gadget with this many slots.
    #[arg(long)]
    gadget: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ExportArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long)]
    budget: u32,
    /// Weight target carried into the exported decision problem.
    #[arg(long)]
    threshold: i64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct OracleArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long, default_value = "max-tr")]
    scheme: String,
    #[arg(long)]
    budget: Option<u32>,
    #[arg(long)]
    cycle_cap: Option<usize>,
    #[arg(long)]
    chain_cap: Option<usize>,
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    strict_pairs: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() {
    if let Err(err) = run() {
        eprintln!("error: {err:#}");
        std::process::exit(1);
    }
}

fn run() -> Result<()> {
    match Cli::parse().command {
        Command::Gen(args) => cmd_gen(args),
        Command::Solve(args) => cmd_solve(args),
        Command::IlpSolve(args) => cmd_ilp_solve(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Graph(args) => cmd_graph(args),
        Command::ExportBudgeted(args) => cmd_export(args),
        Command::Oracle(args) => cmd_oracle(args),
    }
}

fn write_output(out: &Option<PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(path) => {
            fs::write(path, text).with_context(|| format!("writing {}", path.display()))?
        }
        None => {
            use std::io::Write as _;
            let mut stdout = std::io::stdout().lock();
            // A closed pipe (e.g. piping into head) is not an error worth
            // reporting.
            match writeln!(stdout, "{text}") {
                Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => {}
                other => other?,
            }
        }
    }
    Ok(())
}

fn load_instance(path: &Path) -> Result<KeiInstance> {
    let text =
        fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let inst = KeiInstance::from_json(&text)?;
    inst.ensure_valid()?;
    Ok(inst)
}

fn load_scheme(name: &str, custom: &Option<PathBuf>) -> Result<WeightScheme> {
    if name == "custom" {
        let path = custom
            .as_ref()
            .context("--scheme custom requires --custom-weights FILE")?;
        let text =
            fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let weights: CustomWeights = serde_json::from_str(&text)?;
        return Ok(WeightScheme::Custom(weights));
    }
    name.parse::<WeightScheme>().map_err(anyhow::Error::msg)
}

fn limits_from(time_limit: Option<f64>, node_limit: Option<u64>) -> Result<Limits> {
    let time_limit = match time_limit {
        Some(s) => Some(s),
        None => std::env::var("KEI_TIME_LIMIT")
            .ok()
            .map(|v| v.parse::<f64>().context("parsing KEI_TIME_LIMIT"))
            .transpose()?,
    };
    let node_limit = match node_limit {
        Some(n) => Some(n),
        None => std::env::var("KEI_NODE_LIMIT")
            .ok()
            .map(|v| v.parse::<u64>().context("parsing KEI_NODE_LIMIT"))
            .transpose()?,
    };
    Ok(Limits {
        time_limit: time_limit.map(Duration::from_secs_f64),
        node_limit,
    })
}

#[derive(Serialize)]
struct AllocationReport {
    assignment: Vec<[usize; 2]>,
    suppressed: Vec<usize>,
    suppressant_count: usize,
    stats: AllocationStats,
}

impl AllocationReport {
    fn new(inst: &KeiInstance, alloc: &Allocation) -> Result<Self> {
        let stats = inst.stats(alloc)?;
        Ok(AllocationReport {
            assignment: alloc.assignment.iter().map(|(&r, &d)| [r, d]).collect(),
            suppressed: alloc.suppressed.iter().copied().collect(),
            suppressant_count: alloc.suppressed.len(),
            stats,
        })
    }
}

fn cmd_gen(args: GenArgs) -> Result<()> {
    let mut config = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))?;
            serde_json::from_str::<GeneratorConfig>(&text)?
        }
        None => GeneratorConfig::default(),
    };
    config.n_vertices = args.n;
    config.alpha = args.alpha;
    config.seed = args.seed;
    if let Some(v) = args.ndd_fraction {
        config.ndd_fraction = v;
    }
    if let Some(v) = args.sensitized_fraction {
        config.sensitized_fraction = v;
    }
    if let Some(v) = args.base_compat_density {
        config.base_compat_density = v;
    }
    let inst = gen::generate_pool(&config)?;
    write_output(&args.out, &inst.to_json()?)
}

fn cmd_solve(args: SolveArgs) -> Result<()> {
    let inst = load_instance(&args.instance)?;
    let scheme = load_scheme(&args.scheme, &args.custom_weights)?;
    let opts = SolveOptions {
        protect_compatible_pairs: args.strict_pairs,
    };
    let outcome = match args.budget {
        Some(budget) => solve::solve_budgeted_sbm(&inst, budget, &scheme, &opts)?,
        None => solve::solve_objective(&inst, &scheme, &opts)?,
    };

    #[derive(Serialize)]
    struct SolveReport {
        scheme: String,
        strict_pairs: bool,
        budget: Option<u32>,
        objective: Vec<i64>,
        objective_value: i64,
        #[serde(flatten)]
        allocation: AllocationReport,
    }
    let report = SolveReport {
        scheme: scheme.to_string(),
        strict_pairs: args.strict_pairs,
        budget: args.budget,
        objective: outcome.objective.clone(),
        objective_value: outcome.value,
        allocation: AllocationReport::new(&inst, &outcome.allocation)?,
    };
    write_output(&args.out, &serde_json::to_string_pretty(&report)?)
}

fn cmd_ilp_solve(args: IlpArgs) -> Result<()> {
    let inst = load_instance(&args.instance)?;
    let scheme = load_scheme(&args.scheme, &args.custom_weights)?;
    let limits = limits_from(args.time_limit, args.node_limit)?;
    let pool_opts = PoolOptions {
        allow_self_loops: args.self_loops,
        protect_compatible_pairs: args.strict_pairs,
    };
    let graph = DirectedPoolGraph::build(&inst, &scheme, &pool_opts);
    // An omitted budget never binds: no solution can use more half edges
    // than the graph has.
    let budget = args
        .budget
        .unwrap_or_else(|| graph.half_edge_count() as u32);
    let model = PicefModel::build(graph, args.cycle_cap, args.chain_cap, budget);
    if let Some(path) = &args.export_lp {
        fs::write(path, model.to_lp()).with_context(|| format!("writing {}", path.display()))?;
    }
    let solver = BranchBoundSolver::default();
    let result = solver.solve(&model, &limits)?;
    if let Some(path) = &args.log_csv {
        let mut csv = String::from("nodes,incumbent\n");
        for point in &result.stats.incumbent_trace {
            csv.push_str(&format!("{},{}\n", point.nodes, point.objective));
        }
        csv.push_str(&format!("{},{}\n", result.stats.nodes, result.objective));
        fs::write(path, csv).with_context(|| format!("writing {}", path.display()))?;
    }
    let solution = model.extract(&result.assignment)?;
    let allocation = model.solution_allocation(&inst, &solution)?;

    #[derive(Serialize)]
    struct IlpReport {
        scheme: String,
        cycle_cap: usize,
        chain_cap: usize,
        budget: u32,
        status: String,
        gap: Option<i64>,
        objective: i64,
        cycles: Vec<Vec<usize>>,
        chains: Vec<ChainReport>,
        nodes_explored: u64,
        #[serde(flatten)]
        allocation: AllocationReport,
    }
    #[derive(Serialize)]
    struct ChainReport {
        ndd_donor: usize,
        couples: Vec<usize>,
    }
    let (status, gap) = match result.status {
        SolveStatus::Optimal => ("optimal", None),
        SolveStatus::Feasible { gap } => ("feasible", Some(gap)),
        SolveStatus::Infeasible => ("infeasible", None),
    };
    let report = IlpReport {
        scheme: scheme.to_string(),
        cycle_cap: args.cycle_cap,
        chain_cap: args.chain_cap,
        budget,
        status: status.into(),
        gap,
        objective: result.objective,
        cycles: solution
            .cycles
            .iter()
            .map(|&c| model.cycles()[c].vertices.clone())
            .collect(),
        chains: solution
            .chains
            .iter()
            .map(|ch| ChainReport {
                ndd_donor: model.graph().vertices()[ch.ndd].donor.expect("ndd has donor"),
                couples: ch
                    .edges
                    .iter()
                    .map(|&e| model.graph().edges()[e].to)
                    .collect(),
            })
            .collect(),
        nodes_explored: result.stats.nodes,
        allocation: AllocationReport::new(&inst, &allocation)?,
    };
    write_output(&args.out, &serde_json::to_string_pretty(&report)?)
}

fn cmd_sweep(args: SweepArgs) -> Result<()> {
    let text = fs::read_to_string(&args.spec)
        .with_context(|| format!("reading {}", args.spec.display()))?;
    let spec: ExperimentSpec = serde_json::from_str(&text)?;
    let opts = RunOptions {
        parallel: !args.sequential,
        limits: limits_from(args.time_limit, args.node_limit)?,
    };
    let outcome = sweep::run_sweep(&spec, &args.out_dir, &opts)?;
    eprintln!(
        "wrote {} rows to {} (all optimal: {})",
        outcome.rows.len(),
        outcome.results_path.display(),
        outcome.all_optimal
    );
    Ok(())
}

fn cmd_graph(args: GraphArgs) -> Result<()> {
    let inst = load_instance(&args.instance)?;
    let scheme = load_scheme(&args.scheme, &None)?;
    let mut graph = ExchangeGraph::build(&inst, &scheme);
    if args.restrict {
        graph = graph.restrict_compatible_pairs(&inst)?;
    }
    if let Some(slots) = args.gadget {
        graph = graph.with_suppressant_gadget(slots)?;
    }
    write_output(&args.out, &graph.to_dot())
}

fn cmd_export(args: ExportArgs) -> Result<()> {
    let inst = load_instance(&args.instance)?;
    let export = solve::export_budgeted_matching(&inst, args.budget, args.threshold)?;
    write_output(&args.out, &export.to_json()?)
}

fn cmd_oracle(args: OracleArgs) -> Result<()> {
    let inst = load_instance(&args.instance)?;
    let scheme = load_scheme(&args.scheme, &None)?;
    let constraints = OracleConstraints {
        budget: args.budget,
        cycle_cap: args.cycle_cap,
        chain_cap: args.chain_cap,
        protect_compatible_pairs: args.strict_pairs,
        ..OracleConstraints::default()
    };
    let result = oracle::oracle_optimum(&inst, &scheme, &constraints)?;

    #[derive(Serialize)]
    struct OracleReport {
        scheme: String,
        objective: Vec<i64>,
        optima_count: usize,
        #[serde(flatten)]
        witness: AllocationReport,
    }
    let report = OracleReport {
        scheme: scheme.to_string(),
        objective: result.objective.clone(),
        optima_count: result.optima_count,
        witness: AllocationReport::new(&inst, &result.witness)?,
    };
    write_output(&args.out, &serde_json::to_string_pretty(&report)?)
}
