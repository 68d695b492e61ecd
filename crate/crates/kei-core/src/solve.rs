//! Exact solvers on the bipartite exchange graph: objective optimization,
//! the all-satisfied decision, the budgeted silver-bullet optimizer, and the
//! budgeted-matching export.
//!
//! Every solver follows the same pipeline: build the exchange graph under a
//! weight scheme, optionally protect compatible pairs, apply the
//! perfectization shift, compute one maximum-weight matching, and decode the
//! (necessarily perfect) result into an allocation.

use serde::Serialize;

use crate::error::{KeiError, Result};
use crate::graph::{EdgeKind, ExchangeGraph};
use crate::instance::{Allocation, AllocationStats, KeiInstance};
use crate::matching::max_weight_matching;
use crate::scheme::{CustomWeights, WeightScheme};

/// Options shared by the bipartite solvers.
#[derive(Debug, Clone, Copy)]
pub struct SolveOptions {
    /// Guarantee recipients with a compatible paired donor a compatible
    /// kidney by deleting their half-compatible edges before solving.
    pub protect_compatible_pairs: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            protect_compatible_pairs: true,
        }
    }
}

/// A solved allocation with its statistics and objective.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolveOutcome {
    pub allocation: Allocation,
    pub stats: AllocationStats,
    /// Lexicographic objective tuple under the scheme.
    pub objective: Vec<i64>,
    /// Scalar scheme value (includes waiting gains for custom weights).
    pub value: i64,
}

/// Outcome of the all-satisfied decision.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AllSatisfiedOutcome {
    /// Every recipient can be served with at most the given number of
    /// suppressants; carries one witness allocation.
    Satisfiable {
        allocation: Allocation,
        suppressants: u32,
    },
    Impossible,
}

fn solve_graph(g: &ExchangeGraph, inst: &KeiInstance) -> Result<Allocation> {
    let shifted = g.perfectized();
    let m = max_weight_matching(shifted.n_left(), shifted.n_right(), &shifted.edge_tuples());
    shifted.matching_to_allocation(&m, inst)
}

fn outcome(inst: &KeiInstance, scheme: &WeightScheme, alloc: Allocation) -> Result<SolveOutcome> {
    let stats = inst.stats(&alloc)?;
    let objective = scheme.objective_tuple_from(inst, &alloc, stats);
    let value = scheme.allocation_value(inst, &alloc);
    Ok(SolveOutcome {
        allocation: alloc,
        stats,
        objective,
        value,
    })
}

/// Optimal allocation for a scheme over unbounded exchanges. A solution
/// always exists: matching everyone along private edges is feasible.
pub fn solve_objective(
    inst: &KeiInstance,
    scheme: &WeightScheme,
    opts: &SolveOptions,
) -> Result<SolveOutcome> {
    inst.ensure_valid()?;
    let mut g = ExchangeGraph::build(inst, scheme);
    if opts.protect_compatible_pairs {
        g = g.restrict_compatible_pairs(inst)?;
    }
    let alloc = solve_graph(&g, inst)?;
    outcome(inst, scheme, alloc)
}

/// Decides whether some allocation serves every recipient using at most
/// `budget` suppressants, returning a witness when one exists.
///
/// Private edges of real recipients are deleted, compatible edges get weight
/// one and everything else weight zero; a perfect matching of weight `w`
/// then serves all `n` recipients with exactly `n - w` suppressants, so the
/// answer is yes iff the maximum weight over perfect matchings is at least
/// `n - budget`.
pub fn solve_all_satisfied(inst: &KeiInstance, budget: u32) -> Result<AllSatisfiedOutcome> {
    inst.ensure_valid()?;
    let counting = WeightScheme::Custom(CustomWeights {
        compatible_default: 1,
        ..CustomWeights::default()
    });
    let g = ExchangeGraph::build(inst, &counting).without_recipient_private_edges();
    let shifted = g.perfectized();
    let m = max_weight_matching(shifted.n_left(), shifted.n_right(), &shifted.edge_tuples());
    if !m.is_perfect(shifted.n_left(), shifted.n_right()) {
        return Ok(AllSatisfiedOutcome::Impossible);
    }
    let compatible_count = m.weight_under(&g.edge_tuples());
    let suppressants = inst.n_recipients() as i64 - compatible_count;
    if suppressants > i64::from(budget) {
        return Ok(AllSatisfiedOutcome::Impossible);
    }
    let allocation = shifted.matching_to_allocation(&m, inst)?;
    Ok(AllSatisfiedOutcome::Satisfiable {
        allocation,
        suppressants: suppressants as u32,
    })
}

/// Maximum-weight allocation of a silver-bullet instance subject to at most
/// `budget` half-compatible transplants, via the slot gadget.
///
/// Only schemes that make a half-compatible donation strictly less desirable
/// than a compatible one are accepted; for equal or arbitrary weights the
/// gadget's optimality argument does not go through.
pub fn solve_budgeted_sbm(
    inst: &KeiInstance,
    budget: u32,
    scheme: &WeightScheme,
    opts: &SolveOptions,
) -> Result<SolveOutcome> {
    inst.ensure_valid()?;
    if !inst.is_silver_bullet() {
        return Err(KeiError::ModelClass(
            "the budgeted solver requires a silver-bullet instance".into(),
        ));
    }
    if !scheme.half_strictly_worse() {
        return Err(KeiError::UnsupportedScheme(format!(
            "budgeted silver-bullet solving supports max-co-bm, lex-co-tr, lex-co-neg-hc, \
             and lex-tr-neg-hc; got {scheme}"
        )));
    }
    let mut g = ExchangeGraph::build(inst, scheme);
    if opts.protect_compatible_pairs {
        g = g.restrict_compatible_pairs(inst)?;
    }
    let g = g.with_suppressant_gadget(budget as usize)?;
    let alloc = solve_graph(&g, inst)?;
    let stats = inst.stats(&alloc)?;
    assert!(
        stats.hc <= budget,
        "gadget admitted {} half-compatible transplants over budget {budget}",
        stats.hc
    );
    outcome(inst, scheme, alloc)
}

/// A unit-cost budgeted matching instance: a bipartite graph, a special edge
/// subset, shifted weights, and the bounds `h` (budget) and `t` (target).
#[derive(Debug, Clone, Serialize)]
pub struct BudgetedMatchingInstance {
    pub version: u32,
    pub n_left: usize,
    pub n_right: usize,
    pub edges: Vec<BudgetedMatchingEdge>,
    /// At most this many special edges may be matched.
    pub budget: u32,
    /// Weight target the matching must reach.
    pub threshold: i64,
}

#[derive(Debug, Clone, Serialize)]
pub struct BudgetedMatchingEdge {
    pub left: usize,
    pub right: usize,
    pub weight: i64,
    /// Member of the special (budgeted) edge set.
    pub special: bool,
}

impl BudgetedMatchingInstance {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Exports the budget-constrained clearing problem as a unit-cost budgeted
/// matching instance: compatible edges carry weight one, every other edge
/// zero, all weights are shifted up by the recipient count so maximum-weight
/// matchings of the export are perfect, and the special set consists of the
/// half-compatible edges.
pub fn export_budgeted_matching(
    inst: &KeiInstance,
    budget: u32,
    threshold: i64,
) -> Result<BudgetedMatchingInstance> {
    inst.ensure_valid()?;
    let counting = WeightScheme::Custom(CustomWeights {
        compatible_default: 1,
        ..CustomWeights::default()
    });
    let g = ExchangeGraph::build(inst, &counting);
    let shift = inst.n_recipients() as i64;
    let edges = g
        .edges()
        .iter()
        .map(|e| BudgetedMatchingEdge {
            left: e.left,
            right: e.right,
            weight: e.weight + shift,
            special: e.kind == EdgeKind::HalfCompatible,
        })
        .collect();
    Ok(BudgetedMatchingInstance {
        version: 1,
        n_left: g.n_left(),
        n_right: g.n_right(),
        edges,
        budget,
        threshold,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::oracle::{self, OracleConstraints};

    fn opts() -> SolveOptions {
        SolveOptions::default()
    }

    #[test]
    fn worked_example_maximum_transplants() {
        let inst = fixtures::three_cycle();
        let out = solve_objective(&inst, &WeightScheme::MaxTr, &opts()).unwrap();
        assert_eq!((out.stats.co, out.stats.hc, out.stats.tr), (1, 2, 3));
        assert_eq!(out.allocation, fixtures::three_cycle_solution(&inst));
    }

    #[test]
    fn worked_example_baseline_scheme_matches_nobody() {
        let inst = fixtures::three_cycle();
        let out = solve_objective(&inst, &WeightScheme::MaxCoBm, &opts()).unwrap();
        assert_eq!(out.stats.tr, 0);
        assert!(out.allocation.is_empty());
    }

    #[test]
    fn mixed_pool_lexicographic_total_then_few_suppressants() {
        let inst = fixtures::figure_pool();
        let out = solve_objective(&inst, &WeightScheme::LexTrNegHc, &opts()).unwrap();
        // The unique transplant-maximal allocation is the full chain from
        // the altruist: four transplants, three of them half-compatible.
        assert_eq!(out.objective, vec![4, -3]);
        let best = oracle::oracle_optimum(
            &inst,
            &WeightScheme::LexTrNegHc,
            &OracleConstraints::default(),
        )
        .unwrap();
        assert_eq!(out.objective, best.objective);
    }

    #[test]
    fn objective_matches_oracle_on_random_instances() {
        let schemes = [
            WeightScheme::MaxTr,
            WeightScheme::MaxCoBm,
            WeightScheme::LexCoTr,
            WeightScheme::LexCoNegHc,
            WeightScheme::LexTrNegHc,
        ];
        for seed in 0..25u64 {
            let inst = fixtures::random_instance(seed, 7);
            for scheme in &schemes {
                let fast = solve_objective(&inst, scheme, &opts()).unwrap();
                let slow =
                    oracle::oracle_optimum(&inst, scheme, &OracleConstraints::default()).unwrap();
                assert_eq!(fast.objective, slow.objective, "seed {seed} scheme {scheme}");
            }
        }
    }

    #[test]
    fn baseline_scheme_never_uses_suppressants_even_on_general_instances() {
        for seed in 0..25u64 {
            let inst = fixtures::random_instance(seed, 8);
            let out = solve_objective(&inst, &WeightScheme::MaxCoBm, &opts()).unwrap();
            assert_eq!(out.stats.hc, 0, "seed {seed}");
        }
    }

    #[test]
    fn all_satisfied_on_worked_example() {
        let inst = fixtures::three_cycle();
        match solve_all_satisfied(&inst, 2).unwrap() {
            AllSatisfiedOutcome::Satisfiable {
                allocation,
                suppressants,
            } => {
                assert_eq!(allocation.len(), 3);
                assert_eq!(suppressants, 2);
            }
            AllSatisfiedOutcome::Impossible => panic!("budget two suffices"),
        }
        assert_eq!(
            solve_all_satisfied(&inst, 1).unwrap(),
            AllSatisfiedOutcome::Impossible
        );
    }

    #[test]
    fn all_satisfied_baseline_with_zero_budget() {
        // Compatible ring: donor i serves recipient i+1.
        let inst = fixtures::pairs_instance(4, |r, d| ((d + 1) % 4 == r, false));
        match solve_all_satisfied(&inst, 0).unwrap() {
            AllSatisfiedOutcome::Satisfiable { suppressants, .. } => {
                assert_eq!(suppressants, 0)
            }
            AllSatisfiedOutcome::Impossible => panic!("ring covers everyone"),
        }
    }

    #[test]
    fn all_satisfied_matches_oracle_decision() {
        for seed in 0..40u64 {
            let inst = fixtures::random_instance(seed, 7);
            for budget in 0..=3u32 {
                let fast = solve_all_satisfied(&inst, budget).unwrap();
                let mut best: Option<u32> = None;
                oracle::enumerate_allocations(
                    &inst,
                    &OracleConstraints {
                        protect_compatible_pairs: false,
                        ..OracleConstraints::default()
                    },
                    |alloc| {
                        if alloc.len() == inst.n_recipients() {
                            let hc = alloc.suppressed.len() as u32;
                            best = Some(best.map_or(hc, |b| b.min(hc)));
                        }
                    },
                )
                .unwrap();
                let feasible = best.is_some_and(|hc| hc <= budget);
                assert_eq!(
                    matches!(fast, AllSatisfiedOutcome::Satisfiable { .. }),
                    feasible,
                    "seed {seed} budget {budget}"
                );
                if let AllSatisfiedOutcome::Satisfiable { suppressants, .. } = fast {
                    assert_eq!(suppressants, best.unwrap(), "seed {seed} budget {budget}");
                }
            }
        }
    }

    #[test]
    fn budgeted_sbm_rejects_general_instances_and_equal_weights() {
        let inst = fixtures::three_cycle();
        assert!(matches!(
            solve_budgeted_sbm(&inst, 1, &WeightScheme::LexCoNegHc, &opts()),
            Err(KeiError::ModelClass(_))
        ));
        let sbm = fixtures::figure_pool_sbm();
        assert!(matches!(
            solve_budgeted_sbm(&sbm, 1, &WeightScheme::MaxTr, &opts()),
            Err(KeiError::UnsupportedScheme(_))
        ));
    }

    #[test]
    fn budgeted_sbm_on_flattened_pool() {
        let inst = fixtures::figure_pool_sbm();
        let out = solve_budgeted_sbm(&inst, 2, &WeightScheme::LexCoNegHc, &opts()).unwrap();
        // Both compatible edges are usable; serving donor 2's couple forces
        // exactly one half-compatible donation.
        assert_eq!(out.objective, vec![2, -1]);
        let best = oracle::oracle_optimum(
            &inst,
            &WeightScheme::LexCoNegHc,
            &OracleConstraints {
                budget: Some(2),
                ..OracleConstraints::default()
            },
        )
        .unwrap();
        assert_eq!(out.objective, best.objective);
    }

    #[test]
    fn budgeted_sbm_with_zero_budget_is_compatible_only() {
        let inst = fixtures::random_sbm_instance(11, 6);
        let out = solve_budgeted_sbm(&inst, 0, &WeightScheme::LexCoTr, &opts()).unwrap();
        assert_eq!(out.stats.hc, 0);
    }

    #[test]
    fn budgeted_sbm_with_slack_budget_equals_unbudgeted_solve() {
        for seed in 0..15u64 {
            let inst = fixtures::random_sbm_instance(seed, 6);
            let n = inst.n_recipients() as u32;
            let budgeted =
                solve_budgeted_sbm(&inst, n, &WeightScheme::LexCoNegHc, &opts()).unwrap();
            let free = solve_objective(&inst, &WeightScheme::LexCoNegHc, &opts()).unwrap();
            assert_eq!(budgeted.objective, free.objective, "seed {seed}");
        }
    }

    #[test]
    fn budgeted_sbm_objective_is_monotone_in_budget() {
        for seed in 0..15u64 {
            let inst = fixtures::random_sbm_instance(seed + 100, 6);
            let mut prev: Option<Vec<i64>> = None;
            for budget in 0..=4u32 {
                let out =
                    solve_budgeted_sbm(&inst, budget, &WeightScheme::LexTrNegHc, &opts()).unwrap();
                assert!(out.stats.hc <= budget);
                if let Some(p) = &prev {
                    assert!(out.objective >= *p, "seed {seed} budget {budget}");
                }
                prev = Some(out.objective);
            }
        }
    }

    #[test]
    fn export_shifts_weights_and_marks_half_edges() {
        let inst = fixtures::three_cycle();
        let export = export_budgeted_matching(&inst, 2, 3).unwrap();
        assert_eq!(export.n_left, 3);
        assert_eq!(export.n_right, 3);
        let special: Vec<&BudgetedMatchingEdge> =
            export.edges.iter().filter(|e| e.special).collect();
        assert_eq!(special.len(), 2);
        // Compatible edges carry 1 + n, everything else 0 + n.
        for e in &export.edges {
            assert!(e.weight == 3 || e.weight == 4);
        }
        assert!(special.iter().all(|e| e.weight == 3));
        assert_eq!(export.edges.iter().filter(|e| e.weight == 4).count(), 1);
        assert_eq!(export.budget, 2);
        assert_eq!(export.threshold, 3);
    }

    #[test]
    fn export_without_half_edges_has_empty_special_set() {
        let inst = fixtures::pairs_instance(3, |r, d| (r == d, false));
        let export = export_budgeted_matching(&inst, 1, 0).unwrap();
        assert!(export.edges.iter().all(|e| !e.special));
    }
}
