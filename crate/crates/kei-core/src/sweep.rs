//! Budget-sweep experiment harness.
//!
//! For each (pool size, alpha, replicate) a synthetic pool is generated and
//! cleared once per suppressant budget `h in 0..=budget_max` with the exact
//! cycle-and-chain solver. Results are appended to `results.csv` replicate
//! by replicate (crash-safe), then summarized into median/min/max curves of
//! the relative gain over the zero-budget baseline and per-category match
//! percentages, with a small hand-rolled SVG chart.
//!
//! Budget points within a replicate are independent solves and run through
//! the crate's parallel map; sequential execution produces byte-identical
//! output files.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{KeiError, Result};
use crate::gen::{generate_pool, GeneratorConfig};
use crate::instance::{Allocation, BloodType, KeiInstance};
use crate::par;
use crate::picef::PicefModel;
use crate::pool::{compute_positions, enumerate_cycles, DirectedPoolGraph, PoolOptions};
use crate::scheme::WeightScheme;
use crate::solver::{BranchBoundSolver, Limits, SolveStatus, SolverBackend};

/// Declarative description of a sweep.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentSpec {
    pub sizes: Vec<usize>,
    pub alphas: Vec<f64>,
    /// Budgets swept: `0..=budget_max`.
    pub budget_max: u32,
    pub replicates: usize,
    pub cycle_cap: usize,
    pub chain_cap: usize,
    pub scheme: WeightScheme,
    pub base_seed: u64,
    /// Generator template; `n_vertices`, `alpha`, and `seed` are overridden
    /// per run.
    pub generator: GeneratorConfig,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        ExperimentSpec {
            sizes: vec![64],
            alphas: vec![0.05, 0.1, 0.2],
            budget_max: 20,
            replicates: 10,
            cycle_cap: 3,
            chain_cap: 3,
            scheme: WeightScheme::MaxTr,
            base_seed: 1,
            generator: GeneratorConfig::default(),
        }
    }
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        if self.replicates == 0 {
            return Err(KeiError::InvalidArgument(
                "replicate count must be at least 1".into(),
            ));
        }
        if self.sizes.is_empty() || self.alphas.is_empty() {
            return Err(KeiError::InvalidArgument(
                "sizes and alphas must be non-empty".into(),
            ));
        }
        Ok(())
    }
}

/// Execution knobs independent of the experiment definition.
#[derive(Debug, Clone, Copy)]
pub struct RunOptions {
    /// Solve budget points in parallel (needs the `parallel` feature to
    /// actually fan out; results are identical either way).
    pub parallel: bool,
    pub limits: Limits,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            parallel: true,
            limits: Limits::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowStatus {
    Optimal,
    /// A solver limit was hit; the reported value is a lower bound.
    Feasible,
}

impl RowStatus {
    fn as_str(self) -> &'static str {
        match self {
            RowStatus::Optimal => "optimal",
            RowStatus::Feasible => "feasible",
        }
    }
}

/// One `results.csv` row: a (replicate, budget) measurement.
#[derive(Debug, Clone)]
pub struct SweepRow {
    pub size: usize,
    pub alpha: f64,
    pub seed: u64,
    pub budget: u32,
    pub objective: i64,
    /// `100 * (M_h - M_0) / M_0`; `None` when the baseline is zero.
    pub pct_baseline: Option<f64>,
    /// Matched percentage of recipients with blood type O, A, B, AB, and of
    /// sensitized recipients; `None` where the category is empty.
    pub pct_matched: [Option<f64>; 5],
    pub status: RowStatus,
}

/// One solved budget point of a single pool.
#[derive(Debug, Clone)]
pub struct BudgetPoint {
    pub budget: u32,
    pub objective: i64,
    pub allocation: Allocation,
    pub optimal: bool,
}

/// Clears one pool at every requested budget. The pool graph, cycles, and
/// chain positions are shared across budgets; each budget is an independent
/// exact solve (no warm starts).
pub fn budget_curve(
    inst: &KeiInstance,
    scheme: &WeightScheme,
    cycle_cap: usize,
    chain_cap: usize,
    budgets: &[u32],
    opts: &RunOptions,
) -> Result<Vec<BudgetPoint>> {
    let graph = DirectedPoolGraph::build(inst, scheme, &PoolOptions::default());
    let cycles = enumerate_cycles(&graph, cycle_cap);
    let positions = compute_positions(&graph, chain_cap);
    let solver = BranchBoundSolver::default();
    let solve_one = |budget: &u32| -> Result<BudgetPoint> {
        let model = PicefModel::from_parts(
            graph.clone(),
            cycles.clone(),
            positions.clone(),
            cycle_cap,
            chain_cap,
            *budget,
        );
        let result = solver.solve(&model, &opts.limits)?;
        let solution = model.extract(&result.assignment)?;
        let allocation = model.solution_allocation(inst, &solution)?;
        Ok(BudgetPoint {
            budget: *budget,
            objective: result.objective,
            allocation,
            optimal: result.status == SolveStatus::Optimal,
        })
    };
    let results = if opts.parallel {
        par::map_parallel(budgets, solve_one)
    } else {
        par::map_sequential(budgets, solve_one)
    };
    results.into_iter().collect()
}

const CATEGORY_NAMES: [&str; 5] = ["O", "A", "B", "AB", "sens"];

fn category_members(inst: &KeiInstance, category: usize) -> Vec<usize> {
    inst.recipients()
        .iter()
        .filter(|r| match category {
            0..=3 => r.blood == Some(BloodType::ALL[category]),
            _ => r.sensitized,
        })
        .map(|r| r.id)
        .collect()
}

fn matched_percentages(inst: &KeiInstance, alloc: &Allocation) -> [Option<f64>; 5] {
    let mut out = [None; 5];
    for (c, slot) in out.iter_mut().enumerate() {
        let members = category_members(inst, c);
        if members.is_empty() {
            continue;
        }
        let matched = members
            .iter()
            .filter(|r| alloc.assignment.contains_key(r))
            .count();
        *slot = Some(100.0 * matched as f64 / members.len() as f64);
    }
    out
}

/// Deterministic per-replicate seed derivation (splitmix over the
/// coordinates, so adding sizes or alphas never shifts other runs).
pub fn replicate_seed(base: u64, size: usize, alpha_idx: usize, replicate: usize) -> u64 {
    fn splitmix(mut x: u64) -> u64 {
        x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = x;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }
    let mut x = base;
    for v in [size as u64, alpha_idx as u64, replicate as u64] {
        x = splitmix(x ^ splitmix(v));
    }
    x
}

fn fmt_opt(v: Option<f64>) -> String {
    match v {
        Some(x) => format!("{x:.4}"),
        None => "NA".into(),
    }
}

fn write_row(out: &mut impl std::io::Write, row: &SweepRow) -> std::io::Result<()> {
    writeln!(
        out,
        "{},{},{},{},{},{},{},{},{},{},{},{}",
        row.size,
        row.alpha,
        row.seed,
        row.budget,
        row.objective,
        fmt_opt(row.pct_baseline),
        fmt_opt(row.pct_matched[0]),
        fmt_opt(row.pct_matched[1]),
        fmt_opt(row.pct_matched[2]),
        fmt_opt(row.pct_matched[3]),
        fmt_opt(row.pct_matched[4]),
        row.status.as_str(),
    )
}

pub const RESULTS_HEADER: &str = "size,alpha,seed,h,M_h,pct_baseline,pct_matched_O,\
pct_matched_A,pct_matched_B,pct_matched_AB,pct_matched_sens,status";

/// Output of a sweep: all rows, the summary, and where they were written.
#[derive(Debug, Clone)]
pub struct SweepOutcome {
    pub rows: Vec<SweepRow>,
    pub summary: Vec<SummaryRow>,
    pub results_path: PathBuf,
    pub summary_path: PathBuf,
    pub curves_path: PathBuf,
    /// False when any budget point hit a solver limit.
    pub all_optimal: bool,
}

/// Runs the sweep, writing `results.csv` incrementally (one flush per
/// replicate), then `summary.csv` and `curves.svg`.
pub fn run_sweep(spec: &ExperimentSpec, out_dir: &Path, opts: &RunOptions) -> Result<SweepOutcome> {
    spec.validate()?;
    fs::create_dir_all(out_dir)?;
    let results_path = out_dir.join("results.csv");
    let mut results = fs::File::create(&results_path)?;
    writeln!(results, "{RESULTS_HEADER}")?;
    results.flush()?;

    let budgets: Vec<u32> = (0..=spec.budget_max).collect();
    let mut rows = Vec::new();
    let mut all_optimal = true;
    for &size in &spec.sizes {
        for (alpha_idx, &alpha) in spec.alphas.iter().enumerate() {
            for replicate in 0..spec.replicates {
                let seed = replicate_seed(spec.base_seed, size, alpha_idx, replicate);
                let config = GeneratorConfig {
                    n_vertices: size,
                    alpha,
                    seed,
                    ..spec.generator.clone()
                };
                let inst = generate_pool(&config)?;
                let points =
                    budget_curve(&inst, &spec.scheme, spec.cycle_cap, spec.chain_cap, &budgets, opts)?;
                let baseline = points[0].objective;
                for p in &points {
                    let pct_baseline = if baseline > 0 {
                        Some(100.0 * (p.objective - baseline) as f64 / baseline as f64)
                    } else {
                        None
                    };
                    let row = SweepRow {
                        size,
                        alpha,
                        seed,
                        budget: p.budget,
                        objective: p.objective,
                        pct_baseline,
                        pct_matched: matched_percentages(&inst, &p.allocation),
                        status: if p.optimal {
                            RowStatus::Optimal
                        } else {
                            RowStatus::Feasible
                        },
                    };
                    all_optimal &= p.optimal;
                    write_row(&mut results, &row)?;
                    rows.push(row);
                }
                results.flush()?;
            }
        }
    }

    let summary = summarize(&rows);
    let summary_path = out_dir.join("summary.csv");
    let mut summary_file = fs::File::create(&summary_path)?;
    writeln!(summary_file, "size,alpha,h,metric,median,min,max,samples")?;
    for s in &summary {
        writeln!(
            summary_file,
            "{},{},{},{},{},{},{},{}",
            s.size,
            s.alpha,
            s.budget,
            s.metric,
            fmt_opt(s.median),
            fmt_opt(s.min),
            fmt_opt(s.max),
            s.samples
        )?;
    }
    summary_file.flush()?;

    let curves_path = out_dir.join("curves.svg");
    fs::write(&curves_path, render_curves(spec, &summary))?;

    Ok(SweepOutcome {
        rows,
        summary,
        results_path,
        summary_path,
        curves_path,
        all_optimal,
    })
}

/// Aggregated statistics of one metric at one (size, alpha, budget) cell.
#[derive(Debug, Clone)]
pub struct SummaryRow {
    pub size: usize,
    pub alpha: f64,
    pub budget: u32,
    pub metric: String,
    pub median: Option<f64>,
    pub min: Option<f64>,
    pub max: Option<f64>,
    /// Replicates contributing (rows with an undefined metric are skipped).
    pub samples: usize,
}

fn median_of(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0
    }
}

fn aggregate(values: Vec<f64>) -> (Option<f64>, Option<f64>, Option<f64>, usize) {
    if values.is_empty() {
        return (None, None, None, 0);
    }
    let mut v = values;
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    (
        Some(median_of(&v)),
        Some(v[0]),
        Some(*v.last().unwrap()),
        v.len(),
    )
}

/// Median / min / max per (size, alpha, budget) for the objective, the
/// baseline gain, and every match-percentage category. Per-category values
/// are *not* monotone in the budget (optima may trade categories); only the
/// aggregate objective is.
pub fn summarize(rows: &[SweepRow]) -> Vec<SummaryRow> {
    let mut keys: Vec<(usize, u64, u32)> = rows
        .iter()
        .map(|r| (r.size, r.alpha.to_bits(), r.budget))
        .collect();
    keys.sort_unstable();
    keys.dedup();
    let mut out = Vec::new();
    for (size, alpha_bits, budget) in keys {
        let alpha = f64::from_bits(alpha_bits);
        let cell: Vec<&SweepRow> = rows
            .iter()
            .filter(|r| r.size == size && r.alpha.to_bits() == alpha_bits && r.budget == budget)
            .collect();
        let mut push = |metric: &str, values: Vec<f64>| {
            let (median, min, max, samples) = aggregate(values);
            out.push(SummaryRow {
                size,
                alpha,
                budget,
                metric: metric.into(),
                median,
                min,
                max,
                samples,
            });
        };
        push("M", cell.iter().map(|r| r.objective as f64).collect());
        push(
            "pct_baseline",
            cell.iter().filter_map(|r| r.pct_baseline).collect(),
        );
        for (c, name) in CATEGORY_NAMES.iter().enumerate() {
            push(
                &format!("pct_matched_{name}"),
                cell.iter().filter_map(|r| r.pct_matched[c]).collect(),
            );
        }
    }
    out
}

// ---------------------------------------------------------------------------
// SVG rendering: one panel per pool size, one banded curve per alpha.
// ---------------------------------------------------------------------------

const PALETTE: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
];

struct CurvePoints {
    median: Vec<(f64, f64)>,
    band: Vec<(f64, f64)>,
}

/// Renders the median baseline-gain curves with min-max bands.
pub fn render_curves(spec: &ExperimentSpec, summary: &[SummaryRow]) -> String {
    let width = 640.0;
    let panel_h = 200.0;
    let margin_l = 60.0;
    let margin_r = 140.0;
    let margin_v = 40.0;
    let plot_w = width - margin_l - margin_r;
    let height = (panel_h + margin_v) * spec.sizes.len() as f64 + margin_v;
    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" \
         viewBox=\"0 0 {width} {height}\" font-family=\"sans-serif\" font-size=\"11\">\n"
    ));
    for (panel, &size) in spec.sizes.iter().enumerate() {
        let top = margin_v + (panel_h + margin_v) * panel as f64;
        let bottom = top + panel_h;
        // Y range across every alpha of this panel.
        let mut y_max = 1.0f64;
        for s in summary {
            if s.size == size && s.metric == "pct_baseline" {
                if let Some(m) = s.max {
                    y_max = y_max.max(m);
                }
            }
        }
        let x_of = |h: f64| margin_l + plot_w * h / spec.budget_max.max(1) as f64;
        let y_of = |v: f64| bottom - panel_h * (v / y_max).clamp(0.0, 1.0);
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-weight=\"bold\">{} vertices</text>\n",
            margin_l,
            top - 8.0,
            size
        ));
        // Axes.
        svg.push_str(&format!(
            "<line x1=\"{margin_l}\" y1=\"{bottom}\" x2=\"{}\" y2=\"{bottom}\" stroke=\"#333\"/>\n",
            margin_l + plot_w
        ));
        svg.push_str(&format!(
            "<line x1=\"{margin_l}\" y1=\"{top}\" x2=\"{margin_l}\" y2=\"{bottom}\" stroke=\"#333\"/>\n"
        ));
        for frac in [0.0, 0.5, 1.0] {
            let v = y_max * frac;
            let y = y_of(v);
            svg.push_str(&format!(
                "<text x=\"{}\" y=\"{:.2}\" text-anchor=\"end\">{:.0}%</text>\n",
                margin_l - 6.0,
                y + 4.0,
                v
            ));
            let h = spec.budget_max as f64 * frac;
            svg.push_str(&format!(
                "<text x=\"{:.2}\" y=\"{}\" text-anchor=\"middle\">{:.0}</text>\n",
                x_of(h),
                bottom + 14.0,
                h
            ));
        }
        svg.push_str(&format!(
            "<text x=\"{:.2}\" y=\"{}\" text-anchor=\"middle\">suppressant budget h</text>\n",
            margin_l + plot_w / 2.0,
            bottom + 28.0
        ));
        for (ai, &alpha) in spec.alphas.iter().enumerate() {
            let color = PALETTE[ai % PALETTE.len()];
            let points = curve_points(summary, size, alpha);
            if points.median.is_empty() {
                continue;
            }
            if !points.band.is_empty() {
                let path: Vec<String> = points
                    .band
                    .iter()
                    .map(|&(h, v)| format!("{:.2},{:.2}", x_of(h), y_of(v)))
                    .collect();
                svg.push_str(&format!(
                    "<polygon points=\"{}\" fill=\"{color}\" opacity=\"0.15\" stroke=\"none\"/>\n",
                    path.join(" ")
                ));
            }
            let path: Vec<String> = points
                .median
                .iter()
                .map(|&(h, v)| format!("{:.2},{:.2}", x_of(h), y_of(v)))
                .collect();
            svg.push_str(&format!(
                "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"/>\n",
                path.join(" ")
            ));
            let ly = top + 14.0 * ai as f64;
            svg.push_str(&format!(
                "<line x1=\"{}\" y1=\"{ly}\" x2=\"{}\" y2=\"{ly}\" stroke=\"{color}\" stroke-width=\"2\"/>\n",
                margin_l + plot_w + 10.0,
                margin_l + plot_w + 30.0
            ));
            svg.push_str(&format!(
                "<text x=\"{}\" y=\"{}\">alpha = {alpha}</text>\n",
                margin_l + plot_w + 36.0,
                ly + 4.0
            ));
        }
    }
    svg.push_str("</svg>\n");
    svg
}

fn curve_points(summary: &[SummaryRow], size: usize, alpha: f64) -> CurvePoints {
    let mut cells: Vec<&SummaryRow> = summary
        .iter()
        .filter(|s| {
            s.size == size
                && s.alpha.to_bits() == alpha.to_bits()
                && s.metric == "pct_baseline"
                && s.median.is_some()
        })
        .collect();
    cells.sort_by_key(|s| s.budget);
    let median = cells
        .iter()
        .map(|s| (s.budget as f64, s.median.unwrap()))
        .collect();
    // Band: min curve forward, max curve backward.
    let mut band: Vec<(f64, f64)> = cells
        .iter()
        .map(|s| (s.budget as f64, s.min.unwrap()))
        .collect();
    band.extend(
        cells
            .iter()
            .rev()
            .map(|s| (s.budget as f64, s.max.unwrap())),
    );
    CurvePoints { median, band }
}
