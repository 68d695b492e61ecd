//! Hand-built fixtures and seeded random generators shared by the test
//! suites, the acceptance harness, and the benches. Nothing here is used on
//! production solve paths.

use std::collections::BTreeSet;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::instance::{Allocation, Donor, KeiInstance, Recipient};

fn plain_recipients(n: usize) -> Vec<Recipient> {
    (0..n)
        .map(|id| Recipient {
            id,
            blood: None,
            sensitized: false,
        })
        .collect()
}

fn plain_donors(n: usize, altruistic: impl Fn(usize) -> bool) -> Vec<Donor> {
    (0..n)
        .map(|id| Donor {
            id,
            blood: None,
            altruistic: altruistic(id),
        })
        .collect()
}

/// `n` recipient-donor couples (recipient `i` paired with donor `i`);
/// `kind(r, d)` returns `(compatible, half_compatible)` for every pair.
pub fn pairs_instance(n: usize, kind: impl Fn(usize, usize) -> (bool, bool)) -> KeiInstance {
    let mut compat = vec![BTreeSet::new(); n];
    let mut half = vec![BTreeSet::new(); n];
    for (r, (c, h)) in compat.iter_mut().zip(half.iter_mut()).enumerate() {
        for d in 0..n {
            match kind(r, d) {
                (true, _) => {
                    c.insert(d);
                }
                (false, true) => {
                    h.insert(d);
                }
                _ => {}
            }
        }
    }
    KeiInstance::new(
        plain_recipients(n),
        plain_donors(n, |_| false),
        (0..n).map(|i| (i, i)).collect(),
        compat,
        half,
    )
}

/// The canonical worked example: three couples whose only exchange is a
/// single three-way cycle needing two suppressants. Recipient 0 is
/// compatible with donor 1; donor 2 is half-compatible for recipient 1 and
/// donor 0 for recipient 2.
pub fn three_cycle() -> KeiInstance {
    pairs_instance(3, |r, d| match (r, d) {
        (0, 1) => (true, false),
        (1, 2) => (false, true),
        (2, 0) => (false, true),
        _ => (false, false),
    })
}

/// The unique transplant-maximal solution of [`three_cycle`].
pub fn three_cycle_solution(inst: &KeiInstance) -> Allocation {
    inst.make_allocation([(0, 1), (1, 2), (2, 0)]).unwrap()
}

/// A mixed pool with one single recipient and one altruistic donor.
///
/// Recipients 0..=3 (0 is single), donors 0..=3 (3 is altruistic), couples
/// (1,0), (2,1), (3,2). Compatible: (r0,d0), (r1,d2). Half-compatible:
/// (r1,d0), (r1,d1), (r2,d2), (r3,d1), (r3,d3).
pub fn figure_pool() -> KeiInstance {
    let mut compat = vec![BTreeSet::new(); 4];
    let mut half = vec![BTreeSet::new(); 4];
    compat[0].insert(0);
    compat[1].insert(2);
    half[1].extend([0, 1]);
    half[2].insert(2);
    half[3].extend([1, 3]);
    KeiInstance::new(
        plain_recipients(4),
        plain_donors(4, |id| id == 3),
        vec![(1, 0), (2, 1), (3, 2)],
        compat,
        half,
    )
}

/// [`figure_pool`] flattened into the silver-bullet model: the two
/// compatible edges stay, every other recipient-donor combination becomes
/// half-compatible.
pub fn figure_pool_sbm() -> KeiInstance {
    let mut compat = vec![BTreeSet::new(); 4];
    let mut half = vec![BTreeSet::new(); 4];
    for (r, h) in half.iter_mut().enumerate() {
        for d in 0..4 {
            if (r, d) == (0, 0) || (r, d) == (1, 2) {
                compat[r].insert(d);
            } else {
                h.insert(d);
            }
        }
    }
    KeiInstance::new(
        plain_recipients(4),
        plain_donors(4, |id| id == 3),
        vec![(1, 0), (2, 1), (3, 2)],
        compat,
        half,
    )
}

/// Seeded random general-model instance with up to `max_n` recipients,
/// occasional singles and altruists, and moderate edge density.
pub fn random_instance(seed: u64, max_n: usize) -> KeiInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(1..=max_n.max(1));
    build_random(&mut rng, n, 0.25, 0.25)
}

/// Seeded random silver-bullet instance: every donor is compatible or
/// half-compatible for every recipient.
pub fn random_sbm_instance(seed: u64, max_n: usize) -> KeiInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(1..=max_n.max(1));
    build_random(&mut rng, n, 0.4, 1.0)
}

fn build_random(rng: &mut ChaCha8Rng, n: usize, p_compat: f64, p_half_rest: f64) -> KeiInstance {
    let single: Vec<bool> = (0..n).map(|_| rng.gen_bool(0.15)).collect();
    let n_alt = rng.gen_range(0..=2usize);
    let mut pairs = Vec::new();
    let mut next_donor = 0;
    for (r, &is_single) in single.iter().enumerate() {
        if !is_single {
            pairs.push((r, next_donor));
            next_donor += 1;
        }
    }
    let n_donors = next_donor + n_alt;
    let mut compat = vec![BTreeSet::new(); n];
    let mut half = vec![BTreeSet::new(); n];
    for r in 0..n {
        for d in 0..n_donors {
            if rng.gen_bool(p_compat) {
                compat[r].insert(d);
            } else if rng.gen_bool(p_half_rest) {
                half[r].insert(d);
            }
        }
    }
    KeiInstance::new(
        plain_recipients(n),
        plain_donors(n_donors, |id| id >= next_donor),
        pairs,
        compat,
        half,
    )
}

/// Seeded random bipartite graph that is guaranteed to admit a perfect
/// matching (a planted permutation plus random extra edges). Weights are
/// uniform in `0..=max_w`. Returns `(n, edges)` with `n` vertices per side.
pub fn random_bigraph_with_perfect_matching(
    seed: u64,
    max_n: usize,
    max_w: i64,
) -> (usize, Vec<(usize, usize, i64)>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(1..=max_n.max(1));
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut rng);
    let mut edges = Vec::new();
    for (l, &r) in perm.iter().enumerate() {
        edges.push((l, r, rng.gen_range(0..=max_w)));
    }
    for l in 0..n {
        for r in 0..n {
            if perm[l] != r && rng.gen_bool(0.4) {
                edges.push((l, r, rng.gen_range(0..=max_w)));
            }
        }
    }
    edges.sort();
    (n, edges)
}

/// Exhaustive maximum-weight matching (any cardinality) over an explicit
/// edge list. Test oracle; exponential.
pub fn max_weight_matching_brute(edges: &[(usize, usize, i64)]) -> i64 {
    fn go(edges: &[(usize, usize, i64)], idx: usize, used_l: u64, used_r: u64) -> i64 {
        if idx == edges.len() {
            return 0;
        }
        let (l, r, w) = edges[idx];
        let mut best = go(edges, idx + 1, used_l, used_r);
        if used_l & (1 << l) == 0 && used_r & (1 << r) == 0 {
            best = best.max(w + go(edges, idx + 1, used_l | (1 << l), used_r | (1 << r)));
        }
        best
    }
    assert!(
        edges.iter().all(|&(l, r, _)| l < 64 && r < 64),
        "brute-force matcher supports at most 64 vertices per side"
    );
    go(edges, 0, 0, 0)
}

/// Exhaustive maximum-weight *perfect* matching on a balanced bipartite
/// graph with `n` vertices per side; `None` when no perfect matching exists.
pub fn max_weight_perfect_matching_brute(
    n: usize,
    edges: &[(usize, usize, i64)],
) -> Option<i64> {
    fn go(
        n: usize,
        adj: &[Vec<(usize, i64)>],
        l: usize,
        used_r: u64,
    ) -> Option<i64> {
        if l == n {
            return Some(0);
        }
        let mut best = None;
        for &(r, w) in &adj[l] {
            if used_r & (1 << r) == 0 {
                if let Some(rest) = go(n, adj, l + 1, used_r | (1 << r)) {
                    best = Some(best.map_or(w + rest, |b: i64| b.max(w + rest)));
                }
            }
        }
        best
    }
    let mut adj = vec![Vec::new(); n];
    for &(l, r, w) in edges {
        adj[l].push((r, w));
    }
    // Parallel edges: only the heaviest copy can appear in an optimum.
    for a in &mut adj {
        a.sort();
        a.dedup_by(|b, keep| {
            if b.0 == keep.0 {
                keep.1 = keep.1.max(b.1);
                true
            } else {
                false
            }
        });
    }
    go(n, &adj, 0, 0)
}
