//! Directed pool graph for the cycle-and-chain formulation.
//!
//! One vertex per recipient-donor couple (single recipients become couples
//! without a donor and thus without out-edges) plus one vertex per
//! non-directed donor (NDD). An edge `u -> v` means `u`'s donor can donate
//! to `v`'s recipient, flagged `half` when the donation needs a
//! suppressant.

use std::collections::BTreeMap;

use crate::instance::KeiInstance;
use crate::par;
use crate::scheme::WeightScheme;

/// A pool vertex: a couple (recipient with optional donor) or an NDD
/// (donor only).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PoolVertex {
    pub recipient: Option<usize>,
    pub donor: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PoolEdge {
    pub from: usize,
    pub to: usize,
    pub half: bool,
    pub weight: i64,
}

/// Options controlling pool construction.
#[derive(Debug, Clone, Copy)]
pub struct PoolOptions {
    /// Permit `u -> u` edges when a recipient can take her own donor's
    /// kidney (they clear as length-1 cycles).
    pub allow_self_loops: bool,
    /// Strip half-compatible options from recipients whose own donor is
    /// compatible before building, mirroring the bipartite model's
    /// compatible-pair protection.
    pub protect_compatible_pairs: bool,
}

impl Default for PoolOptions {
    fn default() -> Self {
        PoolOptions {
            allow_self_loops: true,
            protect_compatible_pairs: true,
        }
    }
}

/// Directed compatibility graph over couples and NDDs.
#[derive(Debug, Clone)]
pub struct DirectedPoolGraph {
    vertices: Vec<PoolVertex>,
    edges: Vec<PoolEdge>,
    pair_count: usize,
    out_adj: Vec<Vec<usize>>,
    in_adj: Vec<Vec<usize>>,
}

impl DirectedPoolGraph {
    /// Builds the pool graph for a valid instance; edge weights follow the
    /// scheme (half-compatible edges are omitted when the scheme forbids
    /// them).
    pub fn build(inst: &KeiInstance, scheme: &WeightScheme, opts: &PoolOptions) -> Self {
        let inst_owned;
        let inst = if opts.protect_compatible_pairs {
            inst_owned = inst.with_protected_compatible_pairs();
            &inst_owned
        } else {
            inst
        };
        let n = inst.n_recipients();
        let mut vertices: Vec<PoolVertex> = (0..n)
            .map(|r| PoolVertex {
                recipient: Some(r),
                donor: inst.paired_donor(r),
            })
            .collect();
        for d in inst.altruistic_donors() {
            vertices.push(PoolVertex {
                recipient: None,
                donor: Some(d),
            });
        }
        let mut edges = Vec::new();
        for (u, vu) in vertices.iter().enumerate() {
            let Some(d) = vu.donor else { continue };
            for v in 0..n {
                if u == v && !opts.allow_self_loops {
                    continue;
                }
                if inst.is_compatible(v, d) {
                    edges.push(PoolEdge {
                        from: u,
                        to: v,
                        half: false,
                        weight: scheme.compatible_weight(n, v, d),
                    });
                } else if inst.is_half_compatible(v, d) {
                    if let Some(w) = scheme.half_weight(n, v, d) {
                        edges.push(PoolEdge {
                            from: u,
                            to: v,
                            half: true,
                            weight: w,
                        });
                    }
                }
            }
        }
        let mut out_adj = vec![Vec::new(); vertices.len()];
        let mut in_adj = vec![Vec::new(); vertices.len()];
        for (id, e) in edges.iter().enumerate() {
            out_adj[e.from].push(id);
            in_adj[e.to].push(id);
        }
        DirectedPoolGraph {
            vertices,
            edges,
            pair_count: n,
            out_adj,
            in_adj,
        }
    }

    pub fn vertices(&self) -> &[PoolVertex] {
        &self.vertices
    }

    pub fn edges(&self) -> &[PoolEdge] {
        &self.edges
    }

    /// Number of couple vertices; they occupy ids `0..pair_count`.
    pub fn pair_count(&self) -> usize {
        self.pair_count
    }

    pub fn is_ndd(&self, v: usize) -> bool {
        v >= self.pair_count
    }

    /// Ids of the NDD vertices.
    pub fn ndd_vertices(&self) -> Vec<usize> {
        (self.pair_count..self.vertices.len()).collect()
    }

    pub fn out_edges(&self, v: usize) -> &[usize] {
        &self.out_adj[v]
    }

    pub fn in_edges(&self, v: usize) -> &[usize] {
        &self.in_adj[v]
    }

    pub fn half_edge_count(&self) -> usize {
        self.edges.iter().filter(|e| e.half).count()
    }

    /// Looks up the unique edge `u -> v`, if present.
    pub fn edge_between(&self, u: usize, v: usize) -> Option<usize> {
        self.out_adj[u]
            .iter()
            .copied()
            .find(|&id| self.edges[id].to == v)
    }
}

/// A simple directed cycle over couple vertices, stored in canonical
/// rotation (smallest vertex first).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cycle {
    pub vertices: Vec<usize>,
    pub edges: Vec<usize>,
    pub weight: i64,
    pub half_count: u32,
}

impl Cycle {
    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }
}

/// Enumerates every simple cycle of length at most `max_len` over couple
/// vertices, each reported once in canonical rotation. Work is partitioned
/// by the smallest vertex of the cycle, which keeps the output order
/// deterministic under parallel execution.
pub fn enumerate_cycles(g: &DirectedPoolGraph, max_len: usize) -> Vec<Cycle> {
    if max_len == 0 {
        return Vec::new();
    }
    let starts: Vec<usize> = (0..g.pair_count()).collect();
    let per_start = par::map(&starts, |&s| cycles_from(g, s, max_len));
    per_start.into_iter().flatten().collect()
}

fn cycles_from(g: &DirectedPoolGraph, start: usize, max_len: usize) -> Vec<Cycle> {
    let mut found = Vec::new();
    let mut visited = vec![false; g.pair_count()];
    visited[start] = true;
    let mut path = vec![start];
    let mut path_edges = Vec::new();
    dfs(g, start, max_len, &mut visited, &mut path, &mut path_edges, &mut found);
    found
}

fn dfs(
    g: &DirectedPoolGraph,
    start: usize,
    max_len: usize,
    visited: &mut Vec<bool>,
    path: &mut Vec<usize>,
    path_edges: &mut Vec<usize>,
    found: &mut Vec<Cycle>,
) {
    let u = *path.last().unwrap();
    for &eid in g.out_edges(u) {
        let v = g.edges()[eid].to;
        if v == start {
            let mut edges = path_edges.clone();
            edges.push(eid);
            let weight = edges.iter().map(|&e| g.edges()[e].weight).sum();
            let half_count = edges.iter().filter(|&&e| g.edges()[e].half).count() as u32;
            found.push(Cycle {
                vertices: path.clone(),
                edges,
                weight,
                half_count,
            });
        } else if v > start && v < g.pair_count() && !visited[v] && path.len() < max_len {
            visited[v] = true;
            path.push(v);
            path_edges.push(eid);
            dfs(g, start, max_len, visited, path, path_edges, found);
            path_edges.pop();
            path.pop();
            visited[v] = false;
        }
    }
}

/// Chain positions each edge can occupy, indexed by edge id.
///
/// NDD out-edges can only open a chain (position 1). A couple-to-couple
/// edge can sit at position `k in 2..=max_chain_len` when its tail is
/// reachable from some NDD by a walk of `k - 1` edges; walks over-approximate
/// the simple paths chains actually use, so no feasible position is ever
/// excluded while most infeasible ones are. Self-loops never participate in
/// chains. With `max_chain_len == 0` every set is empty and chain variables
/// vanish.
pub fn compute_positions(g: &DirectedPoolGraph, max_chain_len: usize) -> Vec<Vec<u32>> {
    let mut positions = vec![Vec::new(); g.edges().len()];
    if max_chain_len == 0 {
        return positions;
    }
    // reach[j - 1][v]: some walk of exactly j edges from an NDD ends at v.
    let mut reach: Vec<Vec<bool>> = Vec::new();
    let mut first = vec![false; g.pair_count()];
    for v in g.ndd_vertices() {
        for &eid in g.out_edges(v) {
            first[g.edges()[eid].to] = true;
        }
    }
    reach.push(first);
    for _ in 2..max_chain_len {
        let prev = reach.last().unwrap();
        let mut next = vec![false; g.pair_count()];
        for (id, e) in g.edges().iter().enumerate() {
            let _ = id;
            if e.from < g.pair_count() && e.from != e.to && prev[e.from] {
                next[e.to] = true;
            }
        }
        reach.push(next);
    }
    for (id, e) in g.edges().iter().enumerate() {
        if g.is_ndd(e.from) {
            positions[id].push(1);
        } else if e.from != e.to {
            for k in 2..=max_chain_len {
                if reach[k - 2][e.from] {
                    positions[id].push(k as u32);
                }
            }
        }
    }
    positions
}

/// Independent summaries useful to callers building models.
pub fn position_variable_count(positions: &[Vec<u32>]) -> usize {
    positions.iter().map(Vec::len).sum()
}

/// Deterministic edge lookup table `(from, to) -> edge id`.
pub fn edge_table(g: &DirectedPoolGraph) -> BTreeMap<(usize, usize), usize> {
    g.edges()
        .iter()
        .enumerate()
        .map(|(id, e)| ((e.from, e.to), id))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn pool(inst: &KeiInstance) -> DirectedPoolGraph {
        DirectedPoolGraph::build(inst, &WeightScheme::MaxTr, &PoolOptions::default())
    }

    #[test]
    fn three_cycle_pool_is_one_directed_cycle() {
        let inst = fixtures::three_cycle();
        let g = pool(&inst);
        assert_eq!(g.pair_count(), 3);
        assert_eq!(g.vertices().len(), 3);
        assert_eq!(g.edges().len(), 3);
        let halves: Vec<bool> = g.edges().iter().map(|e| e.half).collect();
        assert_eq!(halves.iter().filter(|&&h| h).count(), 2);
        // d1 compatible for r0 gives the one compatible edge 1 -> 0.
        let compat = g.edges().iter().find(|e| !e.half).unwrap();
        assert_eq!((compat.from, compat.to), (1, 0));

        let cycles = enumerate_cycles(&g, 3);
        assert_eq!(cycles.len(), 1);
        assert_eq!(cycles[0].vertices, vec![0, 2, 1]);
        assert_eq!(cycles[0].half_count, 2);
        assert!(enumerate_cycles(&g, 2).is_empty());
    }

    #[test]
    fn altruist_only_instance_has_ndds_and_no_cycles() {
        let inst = KeiInstance::new(
            vec![],
            (0..2)
                .map(|id| crate::instance::Donor {
                    id,
                    blood: None,
                    altruistic: true,
                })
                .collect(),
            vec![],
            vec![],
            vec![],
        );
        let g = pool(&inst);
        assert_eq!(g.pair_count(), 0);
        assert_eq!(g.ndd_vertices().len(), 2);
        assert!(enumerate_cycles(&g, 3).is_empty());
    }

    #[test]
    fn baseline_instances_have_no_half_edges() {
        let inst = fixtures::pairs_instance(4, |r, d| ((r + 1) % 4 == d, false));
        let g = pool(&inst);
        assert!(g.edges().iter().all(|e| !e.half));
    }

    #[test]
    fn mixed_pool_edges_and_cycles() {
        let inst = fixtures::figure_pool();
        let g = pool(&inst);
        assert_eq!(g.vertices().len(), 5);
        assert_eq!(g.pair_count(), 4);
        assert_eq!(g.edges().len(), 7);
        assert_eq!(g.half_edge_count(), 5);
        let mut cycles = enumerate_cycles(&g, 3);
        cycles.sort_by(|a, b| a.vertices.cmp(&b.vertices));
        let vertex_lists: Vec<&[usize]> =
            cycles.iter().map(|c| c.vertices.as_slice()).collect();
        // The self-loop on couple 1 (own donor half-compatible) and the
        // two-cycle between couples 2 and 3.
        assert_eq!(vertex_lists, vec![&[1][..], &[2, 3][..]]);

        let no_loops = DirectedPoolGraph::build(
            &inst,
            &WeightScheme::MaxTr,
            &PoolOptions {
                allow_self_loops: false,
                ..PoolOptions::default()
            },
        );
        assert_eq!(enumerate_cycles(&no_loops, 3).len(), 1);
    }

    #[test]
    fn compatible_pair_protection_drops_half_in_edges() {
        // r0's own donor is compatible; donor 1 is half-compatible for r0.
        let inst = fixtures::pairs_instance(2, |r, d| (r == 0 && d == 0, d == 1));
        let protected = pool(&inst);
        assert!(protected
            .edges()
            .iter()
            .all(|e| !(e.to == 0 && e.half)));
        let raw = DirectedPoolGraph::build(
            &inst,
            &WeightScheme::MaxTr,
            &PoolOptions {
                protect_compatible_pairs: false,
                ..PoolOptions::default()
            },
        );
        assert!(raw.edges().iter().any(|e| e.to == 0 && e.half));
    }

    /// Brute-force cycle count: choose a subset containing its minimum
    /// first, then count orderings whose consecutive edges all exist.
    fn count_cycles_brute(g: &DirectedPoolGraph, max_len: usize) -> usize {
        fn orderings(
            g: &DirectedPoolGraph,
            first: usize,
            rest: &mut Vec<usize>,
            chosen: &mut Vec<usize>,
            count: &mut usize,
        ) {
            if rest.is_empty() {
                let mut ok = true;
                let mut prev = first;
                for &v in chosen.iter() {
                    if g.edge_between(prev, v).is_none() {
                        ok = false;
                        break;
                    }
                    prev = v;
                }
                if ok && g.edge_between(prev, first).is_some() {
                    *count += 1;
                }
                return;
            }
            for i in 0..rest.len() {
                let v = rest.remove(i);
                chosen.push(v);
                orderings(g, first, rest, chosen, count);
                chosen.pop();
                rest.insert(i, v);
            }
        }
        let n = g.pair_count();
        let mut total = 0;
        for mask in 1u32..(1 << n) {
            let members: Vec<usize> = (0..n).filter(|&v| mask & (1 << v) != 0).collect();
            if members.len() > max_len {
                continue;
            }
            let first = members[0];
            let mut rest = members[1..].to_vec();
            orderings(g, first, &mut rest, &mut Vec::new(), &mut total);
        }
        total
    }

    #[test]
    fn cycle_enumeration_matches_brute_force() {
        for seed in 0..40u64 {
            let inst = fixtures::random_instance(seed, 7);
            let g = pool(&inst);
            for max_len in [2, 3, 4] {
                let fast = enumerate_cycles(&g, max_len).len();
                let brute = count_cycles_brute(&g, max_len);
                assert_eq!(fast, brute, "seed {seed} max_len {max_len}");
            }
        }
    }

    #[test]
    fn positions_on_a_line_of_couples() {
        // NDD -> p0 -> p1 -> p2 as the only edges.
        let inst = {
            use crate::instance::{Donor, Recipient};
            use std::collections::BTreeSet;
            let recipients: Vec<Recipient> = (0..3)
                .map(|id| Recipient {
                    id,
                    blood: None,
                    sensitized: false,
                })
                .collect();
            let donors: Vec<Donor> = (0..4)
                .map(|id| Donor {
                    id,
                    blood: None,
                    altruistic: id == 3,
                })
                .collect();
            let mut compat = vec![BTreeSet::new(); 3];
            compat[0].insert(3); // NDD -> p0
            compat[1].insert(0); // p0 -> p1
            compat[2].insert(1); // p1 -> p2
            KeiInstance::new(
                recipients,
                donors,
                vec![(0, 0), (1, 1), (2, 2)],
                compat,
                vec![BTreeSet::new(); 3],
            )
        };
        let g = pool(&inst);
        let positions = compute_positions(&g, 3);
        let ndd_edge = g.edge_between(3, 0).unwrap();
        let e01 = g.edge_between(0, 1).unwrap();
        let e12 = g.edge_between(1, 2).unwrap();
        assert_eq!(positions[ndd_edge], vec![1]);
        assert_eq!(positions[e01], vec![2]);
        assert_eq!(positions[e12], vec![3]);

        let empty = compute_positions(&g, 0);
        assert!(empty.iter().all(Vec::is_empty));

        let short = compute_positions(&g, 2);
        assert_eq!(short[e01], vec![2]);
        assert!(short[e12].is_empty());
    }

    #[test]
    fn positions_merge_multiple_walk_lengths() {
        // Two NDD entry points one and two hops away from the same couple.
        let inst = {
            use crate::instance::{Donor, Recipient};
            use std::collections::BTreeSet;
            let recipients: Vec<Recipient> = (0..3)
                .map(|id| Recipient {
                    id,
                    blood: None,
                    sensitized: false,
                })
                .collect();
            let donors: Vec<Donor> = (0..4)
                .map(|id| Donor {
                    id,
                    blood: None,
                    altruistic: id == 3,
                })
                .collect();
            let mut compat = vec![BTreeSet::new(); 3];
            compat[0].insert(3); // NDD -> p0
            compat[1].insert(3); // NDD -> p1
            compat[1].insert(0); // p0 -> p1
            compat[2].insert(1); // p1 -> p2
            KeiInstance::new(
                recipients,
                donors,
                vec![(0, 0), (1, 1), (2, 2)],
                compat,
                vec![BTreeSet::new(); 3],
            )
        };
        let g = pool(&inst);
        let positions = compute_positions(&g, 3);
        let e12 = g.edge_between(1, 2).unwrap();
        // p1 is reachable by walks of length 1 (direct NDD) and 2 (via p0).
        assert_eq!(positions[e12], vec![2, 3]);
    }

    #[test]
    fn self_loops_never_take_chain_positions() {
        let inst = fixtures::figure_pool();
        let g = pool(&inst);
        let positions = compute_positions(&g, 3);
        for (id, e) in g.edges().iter().enumerate() {
            if e.from == e.to {
                assert!(positions[id].is_empty());
            }
        }
    }
}
