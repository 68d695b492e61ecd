//! Maximum-weight bipartite matching on integer-weighted multigraphs.
//!
//! The solver runs shortest augmenting paths with dual potentials on a dense
//! padded matrix (O(V^3)), which is exact for any integer weights. Callers
//! that need a maximum-weight *perfect* matching first apply [`perfectize`],
//! a uniform weight shift large enough that bigger matchings always win.

/// A matching returned by [`max_weight_matching`]: edge ids into the
/// caller's edge list plus their total weight.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Matching {
    /// Indices into the edge slice the matching was computed from, sorted.
    pub edges: Vec<usize>,
    /// Sum of the weights of the matched edges.
    pub weight: i64,
}

impl Matching {
    /// True when the matching covers every vertex of a balanced bipartition.
    pub fn is_perfect(&self, n_left: usize, n_right: usize) -> bool {
        n_left == n_right && self.edges.len() == n_left
    }

    /// Re-evaluates the matching under a different weight slice (same edge
    /// ids), e.g. to read off the pre-shift weight after perfectization.
    pub fn weight_under(&self, edges: &[(usize, usize, i64)]) -> i64 {
        self.edges.iter().map(|&e| edges[e].2).sum()
    }
}

/// Maximum-weight matching of any cardinality.
///
/// Parallel edges are supported; among parallel edges only the heaviest can
/// be matched, with ties broken towards the lowest edge index. Edges of
/// non-positive weight are never selected (dropping one never hurts), so the
/// returned weight is always >= 0.
pub fn max_weight_matching(
    n_left: usize,
    n_right: usize,
    edges: &[(usize, usize, i64)],
) -> Matching {
    let s = n_left.max(n_right);
    if s == 0 {
        return Matching {
            edges: Vec::new(),
            weight: 0,
        };
    }
    // Collapse the multigraph: keep the best positive edge per vertex pair.
    // Unconnected pairs keep gain 0, which models "leave both unmatched".
    let mut gain = vec![0i64; s * s];
    let mut best_edge = vec![usize::MAX; s * s];
    for (id, &(l, r, w)) in edges.iter().enumerate() {
        assert!(l < n_left && r < n_right, "edge endpoint out of range");
        if w > 0 && w > gain[l * s + r] {
            gain[l * s + r] = w;
            best_edge[l * s + r] = id;
        }
    }
    let row_to_col = min_cost_assignment(s, |i, j| -gain[i * s + j]);
    let mut ids = Vec::new();
    let mut weight = 0i64;
    for (l, &r) in row_to_col.iter().enumerate() {
        if l < n_left && r < n_right {
            let e = best_edge[l * s + r];
            if e != usize::MAX {
                ids.push(e);
                weight += gain[l * s + r];
            }
        }
    }
    ids.sort_unstable();
    Matching { edges: ids, weight }
}

/// Uniform weight shift under which maximum-weight matchings are maximum
/// cardinality first and weight-optimal second.
///
/// For non-negative weights the shift is `n * w_max + 1` with `n` the number
/// of left vertices; with negative weights present the span
/// `max(0, w_max) - min(0, w_min)` replaces `w_max` so that the shift still
/// dominates any weight difference between matchings of different sizes.
/// Returns the shifted edge list (same order, hence same edge ids) and the
/// per-edge shift applied.
pub fn perfectize(
    n_left: usize,
    edges: &[(usize, usize, i64)],
) -> (Vec<(usize, usize, i64)>, i64) {
    let w_max = edges.iter().map(|e| e.2).max().unwrap_or(0).max(0);
    let w_min = edges.iter().map(|e| e.2).min().unwrap_or(0).min(0);
    let shift = n_left as i64 * (w_max - w_min) + 1;
    let shifted = edges.iter().map(|&(l, r, w)| (l, r, w + shift)).collect();
    (shifted, shift)
}

/// Minimum-cost perfect assignment on a dense `n x n` cost matrix via
/// shortest augmenting paths with dual potentials. Returns the column
/// assigned to each row. Deterministic: ties resolve by scan order.
pub(crate) fn min_cost_assignment(n: usize, cost: impl Fn(usize, usize) -> i64) -> Vec<usize> {
    min_cost_assignment_full(n, cost).0
}

/// [`min_cost_assignment`] plus the final dual potentials `(u, v)`, which
/// satisfy `u[i] + v[j] <= cost(i, j)` with equality on assigned cells.
pub(crate) fn min_cost_assignment_full(
    n: usize,
    cost: impl Fn(usize, usize) -> i64,
) -> (Vec<usize>, Vec<i64>, Vec<i64>) {
    const INF: i64 = i64::MAX / 4;
    // Column 0 is a virtual root; real columns are 1..=n. `row_of[j]` is the
    // 1-based row currently assigned to column j (0 = free).
    let mut u = vec![0i64; n + 1];
    let mut v = vec![0i64; n + 1];
    let mut row_of = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        row_of[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![INF; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = row_of[j0];
            let mut delta = INF;
            let mut j1 = 0usize;
            for j in 1..=n {
                if !used[j] {
                    let cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[row_of[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if row_of[j0] == 0 {
                break;
            }
        }
        // Unwind the alternating path recorded in `way`.
        loop {
            let j1 = way[j0];
            row_of[j0] = row_of[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut assignment = vec![usize::MAX; n];
    for j in 1..=n {
        if row_of[j] != 0 {
            assignment[row_of[j] - 1] = j - 1;
        }
    }
    (assignment, u[1..].to_vec(), v[1..].to_vec())
}
