// Prints per-budget root bounds to compare bound quality.
use kei_core::gen::{generate_pool, GeneratorConfig};
use kei_core::picef::PicefModel;
use kei_core::pool::{compute_positions, enumerate_cycles, DirectedPoolGraph, PoolOptions};
use kei_core::scheme::WeightScheme;
use kei_core::solver::debug_root_bounds;
use kei_core::sweep::replicate_seed;

fn main() {
    let seed = replicate_seed(2026, 64, 0, 0);
    let config = GeneratorConfig { n_vertices: 64, alpha: 0.2, seed, ..GeneratorConfig::default() };
    let inst = generate_pool(&config).unwrap();
    let g = DirectedPoolGraph::build(&inst, &WeightScheme::MaxTr, &PoolOptions::default());
    let cycles = enumerate_cycles(&g, 3);
    let positions = compute_positions(&g, 3);
    for budget in [0u32, 1, 2, 3, 5, 8, 10, 15, 20, 138] {
        let model = PicefModel::from_parts(g.clone(), cycles.clone(), positions.clone(), 3, 3, budget);
        let (greedy, slot, dual, matching) = debug_root_bounds(&model);
        println!("budget {budget}: greedy {greedy} slot {slot} dual {dual} matching {matching}");
    }
}
