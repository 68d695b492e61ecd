// Profiles exact solves per budget on one 64-vertex sweep replicate.
use std::time::Instant;

use kei_core::gen::{generate_pool, GeneratorConfig};
use kei_core::picef::PicefModel;
use kei_core::pool::{compute_positions, enumerate_cycles, DirectedPoolGraph, PoolOptions};
use kei_core::scheme::WeightScheme;
use kei_core::solver::{BranchBoundSolver, Limits, SolverBackend};
use kei_core::sweep::replicate_seed;

fn main() {
    let seed = replicate_seed(2026, 64, 0, 0);
    let config = GeneratorConfig { n_vertices: 64, alpha: 0.2, seed, ..GeneratorConfig::default() };
    let inst = generate_pool(&config).unwrap();
    let g = DirectedPoolGraph::build(&inst, &WeightScheme::MaxTr, &PoolOptions::default());
    println!("pairs {} ndds {} edges {} (half {})", g.pair_count(), g.ndd_vertices().len(), g.edges().len(), g.half_edge_count());
    let t = Instant::now();
    let cycles = enumerate_cycles(&g, 3);
    println!("cycles {} in {:.2?}", cycles.len(), t.elapsed());
    let positions = compute_positions(&g, 3);
    let solver = BranchBoundSolver::default();
    let limits = Limits { time_limit: Some(std::time::Duration::from_secs(20)), node_limit: None };
    for budget in [0u32, 1, 2, 3, 5, 8, 10, 15, 20] {
        let model = PicefModel::from_parts(g.clone(), cycles.clone(), positions.clone(), 3, 3, budget);
        let t = Instant::now();
        let r = solver.solve(&model, &limits).unwrap();
        println!("budget {budget}: obj {} status {:?} nodes {} in {:.2?}", r.objective, r.status, r.stats.nodes, t.elapsed());
    }
}
