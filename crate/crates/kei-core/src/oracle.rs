//! Exhaustive reference optima for small instances.
//!
//! Enumeration runs over vertex-disjoint families of directed cycles and
//! NDD-rooted chains in the pool graph, never over raw assignment maps, so
//! every emitted allocation is exchange-implementable by construction (a
//! paired donor gives a kidney only when her recipient receives one). Used
//! by the test suites and the hidden `oracle` CLI subcommand; never on
//! production solve paths.

use crate::error::{KeiError, Result};
use crate::instance::{Allocation, KeiInstance};
use crate::pool::{enumerate_cycles, DirectedPoolGraph, PoolOptions};
use crate::scheme::WeightScheme;

/// Feasibility constraints for the enumeration.
#[derive(Debug, Clone)]
pub struct OracleConstraints {
    /// Maximum number of suppressants (half-compatible transplants).
    pub budget: Option<u32>,
    /// Maximum cycle length; `None` = unbounded.
    pub cycle_cap: Option<usize>,
    /// Maximum chain length (edges per chain); `None` = unbounded.
    pub chain_cap: Option<usize>,
    /// Strip half-compatible options from own-compatible recipients, the
    /// strong-IR trade-down protection.
    pub protect_compatible_pairs: bool,
    /// Allow a recipient to receive her own donor's kidney.
    pub allow_self_loops: bool,
    /// Refuse instances with more recipients than this.
    pub max_recipients: usize,
}

impl Default for OracleConstraints {
    fn default() -> Self {
        OracleConstraints {
            budget: None,
            cycle_cap: None,
            chain_cap: None,
            protect_compatible_pairs: true,
            allow_self_loops: true,
            max_recipients: 10,
        }
    }
}

/// Result of folding the enumeration under an objective.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleResult {
    /// Lexicographic objective tuple of the optimum.
    pub objective: Vec<i64>,
    /// First optimal allocation in enumeration order.
    pub witness: Allocation,
    /// Number of distinct optimal allocations.
    pub optima_count: usize,
}

/// One cycle or chain, with the edges it uses.
#[derive(Debug, Clone)]
struct Structure {
    edges: Vec<usize>,
    vertex_mask: u128,
    half_count: u32,
    weight: i64,
}

fn build_structures(
    g: &DirectedPoolGraph,
    cycle_cap: Option<usize>,
    chain_cap: Option<usize>,
) -> Vec<Structure> {
    let unbounded = g.pair_count().max(1);
    let mut structures = Vec::new();
    for cycle in enumerate_cycles(g, cycle_cap.unwrap_or(unbounded)) {
        let mut mask = 0u128;
        for &v in &cycle.vertices {
            mask |= 1 << v;
        }
        structures.push(Structure {
            edges: cycle.edges,
            vertex_mask: mask,
            half_count: cycle.half_count,
            weight: cycle.weight,
        });
    }
    // Chains: every simple path out of every NDD, each prefix emitted as its
    // own structure (a chain may stop anywhere, leaving a bridge donor).
    let chain_cap = chain_cap.unwrap_or(unbounded);
    for ndd in g.ndd_vertices() {
        let mut path_edges = Vec::new();
        let mut mask = 1u128 << ndd;
        grow_chain(g, ndd, chain_cap, &mut path_edges, &mut mask, &mut structures);
    }
    structures
}

fn grow_chain(
    g: &DirectedPoolGraph,
    head: usize,
    remaining: usize,
    path_edges: &mut Vec<usize>,
    mask: &mut u128,
    out: &mut Vec<Structure>,
) {
    if remaining == 0 {
        return;
    }
    for &eid in g.out_edges(head) {
        let e = g.edges()[eid];
        if e.to == e.from || *mask & (1 << e.to) != 0 {
            continue;
        }
        path_edges.push(eid);
        *mask |= 1 << e.to;
        out.push(Structure {
            edges: path_edges.clone(),
            vertex_mask: *mask,
            half_count: path_edges.iter().filter(|&&x| g.edges()[x].half).count() as u32,
            weight: path_edges.iter().map(|&x| g.edges()[x].weight).sum(),
        });
        grow_chain(g, e.to, remaining - 1, path_edges, mask, out);
        *mask &= !(1 << e.to);
        path_edges.pop();
    }
}

fn family_to_allocation(
    inst: &KeiInstance,
    g: &DirectedPoolGraph,
    family: &[usize],
    structures: &[Structure],
) -> Result<Allocation> {
    let mut assignment = Vec::new();
    for &s in family {
        for &eid in &structures[s].edges {
            let e = g.edges()[eid];
            let recipient = g.vertices()[e.to]
                .recipient
                .expect("pool edges point at couples");
            let donor = g.vertices()[e.from]
                .donor
                .expect("pool edges leave donors");
            assignment.push((recipient, donor));
        }
    }
    inst.make_allocation(assignment)
}

/// Calls `visit` once for every feasible allocation under the constraints,
/// including the empty one. Refuses oversized instances.
pub fn enumerate_allocations(
    inst: &KeiInstance,
    constraints: &OracleConstraints,
    mut visit: impl FnMut(&Allocation),
) -> Result<()> {
    inst.ensure_valid()?;
    if inst.n_recipients() > constraints.max_recipients {
        return Err(KeiError::TooLarge(format!(
            "{} recipients exceeds the cap of {}",
            inst.n_recipients(),
            constraints.max_recipients
        )));
    }
    let opts = PoolOptions {
        allow_self_loops: constraints.allow_self_loops,
        protect_compatible_pairs: constraints.protect_compatible_pairs,
    };
    let g = DirectedPoolGraph::build(inst, &WeightScheme::MaxTr, &opts);
    let structures = build_structures(&g, constraints.cycle_cap, constraints.chain_cap);
    let budget = constraints.budget;
    let mut family = Vec::new();
    visit_families(
        &g,
        inst,
        &structures,
        0,
        0,
        0,
        budget,
        &mut family,
        &mut visit,
    )
}

#[allow(clippy::too_many_arguments)]
fn visit_families(
    g: &DirectedPoolGraph,
    inst: &KeiInstance,
    structures: &[Structure],
    next: usize,
    used: u128,
    half_used: u32,
    budget: Option<u32>,
    family: &mut Vec<usize>,
    visit: &mut impl FnMut(&Allocation),
) -> Result<()> {
    let alloc = family_to_allocation(inst, g, family, structures)?;
    visit(&alloc);
    for s in next..structures.len() {
        let st = &structures[s];
        if st.vertex_mask & used != 0 {
            continue;
        }
        if let Some(h) = budget {
            if half_used + st.half_count > h {
                continue;
            }
        }
        family.push(s);
        visit_families(
            g,
            inst,
            structures,
            s + 1,
            used | st.vertex_mask,
            half_used + st.half_count,
            budget,
            family,
            visit,
        )?;
        family.pop();
    }
    Ok(())
}

/// Materializes the full enumeration (small instances only).
pub fn collect_allocations(
    inst: &KeiInstance,
    constraints: &OracleConstraints,
) -> Result<Vec<Allocation>> {
    let mut out = Vec::new();
    enumerate_allocations(inst, constraints, |a| out.push(a.clone()))?;
    Ok(out)
}

/// Folds the enumeration under a scheme's lexicographic objective. For the
/// baseline scheme, allocations using suppressants are infeasible rather
/// than merely undesirable and are skipped.
pub fn oracle_optimum(
    inst: &KeiInstance,
    scheme: &WeightScheme,
    constraints: &OracleConstraints,
) -> Result<OracleResult> {
    let mut best: Option<OracleResult> = None;
    let forbids_half = scheme.forbids_half();
    enumerate_allocations(inst, constraints, |alloc| {
        let stats = inst.stats(alloc).expect("enumerated allocations are feasible");
        if forbids_half && stats.hc > 0 {
            return;
        }
        let tuple = scheme.objective_tuple_from(inst, alloc, stats);
        match &mut best {
            None => {
                best = Some(OracleResult {
                    objective: tuple,
                    witness: alloc.clone(),
                    optima_count: 1,
                });
            }
            Some(b) => {
                if tuple > b.objective {
                    b.objective = tuple;
                    b.witness = alloc.clone();
                    b.optima_count = 1;
                } else if tuple == b.objective {
                    b.optima_count += 1;
                }
            }
        }
    })?;
    best.ok_or_else(|| {
        KeiError::InvalidArgument(
            "no feasible allocation under the scheme (cannot happen: the empty one is)".into(),
        )
    })
}

/// Maximum total edge weight over disjoint cycle/chain families of a
/// scheme-weighted pool graph, honoring the caps and the suppressant budget.
/// Cross-checks the exact integer-program solver.
pub fn pool_weight_optimum(
    g: &DirectedPoolGraph,
    cycle_cap: usize,
    chain_cap: usize,
    budget: Option<u32>,
    max_pairs: usize,
) -> Result<i64> {
    if g.pair_count() > max_pairs {
        return Err(KeiError::TooLarge(format!(
            "{} couples exceeds the cap of {max_pairs}",
            g.pair_count()
        )));
    }
    let structures = build_structures(g, Some(cycle_cap), Some(chain_cap));
    fn fold(
        structures: &[Structure],
        next: usize,
        used: u128,
        half_used: u32,
        value: i64,
        budget: Option<u32>,
        best: &mut i64,
    ) {
        *best = (*best).max(value);
        for s in next..structures.len() {
            let st = &structures[s];
            if st.vertex_mask & used != 0 {
                continue;
            }
            if let Some(h) = budget {
                if half_used + st.half_count > h {
                    continue;
                }
            }
            fold(
                structures,
                s + 1,
                used | st.vertex_mask,
                half_used + st.half_count,
                value + st.weight,
                budget,
                best,
            );
        }
    }
    let mut best = 0;
    fold(&structures, 0, 0, 0, 0, budget, &mut best);
    Ok(best)
}
