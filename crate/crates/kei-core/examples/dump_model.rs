// Dumps model rows as JSON for external cross-checking during development.
use kei_core::gen::{generate_pool, GeneratorConfig};
use kei_core::picef::{Cmp, PicefModel};
use kei_core::pool::{compute_positions, enumerate_cycles, DirectedPoolGraph, PoolOptions};
use kei_core::scheme::WeightScheme;
use kei_core::sweep::replicate_seed;
use std::io::Write;

fn main() {
    let budget: u32 = std::env::args().nth(1).unwrap().parse().unwrap();
    let seed = replicate_seed(2026, 64, 0, 0);
    let config = GeneratorConfig { n_vertices: 64, alpha: 0.2, seed, ..GeneratorConfig::default() };
    let inst = generate_pool(&config).unwrap();
    let g = DirectedPoolGraph::build(&inst, &WeightScheme::MaxTr, &PoolOptions::default());
    let cycles = enumerate_cycles(&g, 3);
    let positions = compute_positions(&g, 3);
    let model = PicefModel::from_parts(g, cycles, positions, 3, 3, budget);
    let n = model.var_count();
    let mut obj = vec![0i64; n];
    for e in 0..model.graph().edges().len() {
        obj[model.u_index(e)] = model.graph().edges()[e].weight;
    }
    let rows: Vec<serde_json::Value> = model
        .rows()
        .iter()
        .map(|r| {
            serde_json::json!({
                "terms": r.terms,
                "cmp": match r.cmp { Cmp::Le => "le", Cmp::Ge => "ge", Cmp::Eq => "eq" },
                "rhs": r.rhs,
            })
        })
        .collect();
    let out = serde_json::json!({"n": n, "obj": obj, "rows": rows});
    let mut f = std::fs::File::create(format!("/tmp/model_{budget}.json")).unwrap();
    write!(f, "{out}").unwrap();
    eprintln!("vars {n} rows {}", rows.len());
}
