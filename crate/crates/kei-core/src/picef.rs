//! Position-indexed cycle-and-chain integer program with a suppressant
//! budget.
//!
//! Binary variables: `y[e][k]` (edge `e` matched at chain position `k`),
//! `z[c]` (cycle `c` matched), and `u[e]` (edge `e` matched in any role).
//! Constraint families:
//!
//! 1. per couple: incoming chain positions plus containing cycles <= 1,
//! 2. chain flow: positions `k+1` out of a couple need position `k` in,
//! 3. per NDD: at most one opening edge,
//! 4. per edge: `u[e]` equals the sum of its `y`s and containing-cycle `z`s,
//! 5. at most `h` half-compatible edges matched.
//!
//! The model can be exported in LP text format so external solvers can
//! cross-check the bundled branch-and-bound backend.

use std::fmt::Write as _;

use crate::error::{KeiError, Result};
use crate::instance::{Allocation, KeiInstance};
use crate::pool::{compute_positions, enumerate_cycles, Cycle, DirectedPoolGraph};

/// Identity of a model variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarId {
    /// Edge matched at a chain position.
    Y { edge: usize, position: u32 },
    /// Cycle matched.
    Z { cycle: usize },
    /// Edge matched (chain or cycle).
    U { edge: usize },
}

/// Comparison operator of a constraint row.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cmp {
    Le,
    Ge,
    Eq,
}

/// One linear constraint over variable indices.
#[derive(Debug, Clone)]
pub struct Row {
    pub name: String,
    pub terms: Vec<(usize, i64)>,
    pub cmp: Cmp,
    pub rhs: i64,
}

impl Row {
    fn satisfied(&self, assignment: &[bool]) -> bool {
        let lhs: i64 = self
            .terms
            .iter()
            .map(|&(v, c)| if assignment[v] { c } else { 0 })
            .sum();
        match self.cmp {
            Cmp::Le => lhs <= self.rhs,
            Cmp::Ge => lhs >= self.rhs,
            Cmp::Eq => lhs == self.rhs,
        }
    }
}

/// The assembled integer program.
#[derive(Debug, Clone)]
pub struct PicefModel {
    graph: DirectedPoolGraph,
    cycles: Vec<Cycle>,
    positions: Vec<Vec<u32>>,
    budget: u32,
    cycle_cap: usize,
    chain_cap: usize,
    y_offset: Vec<usize>,
    n_y: usize,
}

/// A decoded solution: selected cycles and position-ordered chains.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IlpSolution {
    /// Indices into [`PicefModel::cycles`].
    pub cycles: Vec<usize>,
    pub chains: Vec<ChainSolution>,
    pub objective: i64,
    pub suppressants: u32,
}

/// One chain: the NDD it starts at and its edges in position order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChainSolution {
    pub ndd: usize,
    pub edges: Vec<usize>,
}

impl PicefModel {
    /// Enumerates cycles and chain positions for the graph and assembles the
    /// model.
    pub fn build(
        graph: DirectedPoolGraph,
        cycle_cap: usize,
        chain_cap: usize,
        budget: u32,
    ) -> PicefModel {
        let cycles = enumerate_cycles(&graph, cycle_cap);
        let positions = compute_positions(&graph, chain_cap);
        Self::from_parts(graph, cycles, positions, cycle_cap, chain_cap, budget)
    }

    /// Assembles the model from pre-enumerated parts.
    pub fn from_parts(
        graph: DirectedPoolGraph,
        cycles: Vec<Cycle>,
        positions: Vec<Vec<u32>>,
        cycle_cap: usize,
        chain_cap: usize,
        budget: u32,
    ) -> PicefModel {
        assert_eq!(positions.len(), graph.edges().len());
        let mut y_offset = Vec::with_capacity(positions.len());
        let mut n_y = 0;
        for ks in &positions {
            y_offset.push(n_y);
            n_y += ks.len();
        }
        PicefModel {
            graph,
            cycles,
            positions,
            budget,
            cycle_cap,
            chain_cap,
            y_offset,
            n_y,
        }
    }

    pub fn graph(&self) -> &DirectedPoolGraph {
        &self.graph
    }

    pub fn cycles(&self) -> &[Cycle] {
        &self.cycles
    }

    pub fn positions(&self) -> &[Vec<u32>] {
        &self.positions
    }

    pub fn budget(&self) -> u32 {
        self.budget
    }

    pub fn cycle_cap(&self) -> usize {
        self.cycle_cap
    }

    pub fn chain_cap(&self) -> usize {
        self.chain_cap
    }

    /// Total number of binary variables.
    pub fn var_count(&self) -> usize {
        self.n_y + self.cycles.len() + self.graph.edges().len()
    }

    /// Index of `y[edge]` at `position`, if that position is admissible.
    pub fn y_index(&self, edge: usize, position: u32) -> Option<usize> {
        self.positions[edge]
            .iter()
            .position(|&k| k == position)
            .map(|i| self.y_offset[edge] + i)
    }

    pub fn z_index(&self, cycle: usize) -> usize {
        self.n_y + cycle
    }

    pub fn u_index(&self, edge: usize) -> usize {
        self.n_y + self.cycles.len() + edge
    }

    /// Reverse lookup of a variable index.
    pub fn var_id(&self, index: usize) -> VarId {
        if index < self.n_y {
            let mut edge = match self.y_offset.binary_search(&index) {
                Ok(e) => e,
                Err(e) => e - 1,
            };
            // Offsets repeat for edges with empty position sets; land on the
            // edge that actually owns this slot.
            while self.positions[edge].is_empty() {
                edge += 1;
            }
            VarId::Y {
                edge,
                position: self.positions[edge][index - self.y_offset[edge]],
            }
        } else if index < self.n_y + self.cycles.len() {
            VarId::Z {
                cycle: index - self.n_y,
            }
        } else {
            VarId::U {
                edge: index - self.n_y - self.cycles.len(),
            }
        }
    }

    pub fn var_name(&self, index: usize) -> String {
        match self.var_id(index) {
            VarId::Y { edge, position } => format!("y_e{edge}_p{position}"),
            VarId::Z { cycle } => format!("z_c{cycle}"),
            VarId::U { edge } => format!("u_e{edge}"),
        }
    }

    /// Materializes every constraint row in deterministic order.
    pub fn rows(&self) -> Vec<Row> {
        let g = &self.graph;
        let mut cycles_of_vertex = vec![Vec::new(); g.vertices().len()];
        let mut cycles_of_edge = vec![Vec::new(); g.edges().len()];
        for (c, cycle) in self.cycles.iter().enumerate() {
            for &v in &cycle.vertices {
                cycles_of_vertex[v].push(c);
            }
            for &e in &cycle.edges {
                cycles_of_edge[e].push(c);
            }
        }
        let mut rows = Vec::new();
        // (1) per-couple capacity.
        for i in 0..g.pair_count() {
            let mut terms = Vec::new();
            for &e in g.in_edges(i) {
                for &k in &self.positions[e] {
                    terms.push((self.y_index(e, k).unwrap(), 1));
                }
            }
            for &c in &cycles_of_vertex[i] {
                terms.push((self.z_index(c), 1));
            }
            if !terms.is_empty() {
                rows.push(Row {
                    name: format!("cap_pair_{i}"),
                    terms,
                    cmp: Cmp::Le,
                    rhs: 1,
                });
            }
        }
        // (2) chain flow: an out-edge at position k+1 needs an in-edge at k.
        for i in 0..g.pair_count() {
            for k in 1..self.chain_cap.max(1) as u32 {
                let mut terms = Vec::new();
                let mut has_out = false;
                for &e in g.out_edges(i) {
                    if let Some(idx) = self.y_index(e, k + 1) {
                        terms.push((idx, -1));
                        has_out = true;
                    }
                }
                if !has_out {
                    continue;
                }
                for &e in g.in_edges(i) {
                    if let Some(idx) = self.y_index(e, k) {
                        terms.push((idx, 1));
                    }
                }
                terms.sort_unstable();
                rows.push(Row {
                    name: format!("flow_{i}_{k}"),
                    terms,
                    cmp: Cmp::Ge,
                    rhs: 0,
                });
            }
        }
        // (3) per-NDD capacity.
        for v in g.ndd_vertices() {
            let mut terms = Vec::new();
            for &e in g.out_edges(v) {
                if let Some(idx) = self.y_index(e, 1) {
                    terms.push((idx, 1));
                }
            }
            if !terms.is_empty() {
                rows.push(Row {
                    name: format!("cap_ndd_{v}"),
                    terms,
                    cmp: Cmp::Le,
                    rhs: 1,
                });
            }
        }
        // (4) u definition.
        for e in 0..g.edges().len() {
            let mut terms = vec![(self.u_index(e), 1)];
            for &k in &self.positions[e] {
                terms.push((self.y_index(e, k).unwrap(), -1));
            }
            for &c in &cycles_of_edge[e] {
                terms.push((self.z_index(c), -1));
            }
            rows.push(Row {
                name: format!("link_e{e}"),
                terms,
                cmp: Cmp::Eq,
                rhs: 0,
            });
        }
        // (5) suppressant budget.
        let half_terms: Vec<(usize, i64)> = g
            .edges()
            .iter()
            .enumerate()
            .filter(|(_, e)| e.half)
            .map(|(e, _)| (self.u_index(e), 1))
            .collect();
        if !half_terms.is_empty() {
            rows.push(Row {
                name: "budget".into(),
                terms: half_terms,
                cmp: Cmp::Le,
                rhs: i64::from(self.budget),
            });
        }
        rows
    }

    /// Objective value of an assignment: sum of matched edge weights.
    pub fn objective_of(&self, assignment: &[bool]) -> i64 {
        self.graph
            .edges()
            .iter()
            .enumerate()
            .filter(|&(e, _)| assignment[self.u_index(e)])
            .map(|(_, e)| e.weight)
            .sum()
    }

    /// Checks every constraint row; the error names the first violated one.
    pub fn validate(&self, assignment: &[bool]) -> Result<()> {
        if assignment.len() != self.var_count() {
            return Err(KeiError::InvalidArgument(format!(
                "assignment has {} entries for {} variables",
                assignment.len(),
                self.var_count()
            )));
        }
        for row in self.rows() {
            if !row.satisfied(assignment) {
                return Err(KeiError::ConstraintViolated(row.name));
            }
        }
        Ok(())
    }

    /// Validates and decodes an assignment into cycles and ordered chains.
    pub fn extract(&self, assignment: &[bool]) -> Result<IlpSolution> {
        self.validate(assignment)?;
        let g = &self.graph;
        let cycles: Vec<usize> = (0..self.cycles.len())
            .filter(|&c| assignment[self.z_index(c)])
            .collect();
        let mut used_y = 0usize;
        let mut chains = Vec::new();
        for v in g.ndd_vertices() {
            let mut head = v;
            let mut edges = Vec::new();
            let mut k = 1u32;
            loop {
                let mut next = None;
                for &e in g.out_edges(head) {
                    if self.y_index(e, k).is_some_and(|idx| assignment[idx]) {
                        next = Some(e);
                        break;
                    }
                }
                let Some(e) = next else { break };
                edges.push(e);
                used_y += 1;
                head = g.edges()[e].to;
                k += 1;
            }
            if !edges.is_empty() {
                chains.push(ChainSolution { ndd: v, edges });
            }
        }
        let total_y = (0..self.n_y).filter(|&i| assignment[i]).count();
        if total_y != used_y {
            return Err(KeiError::ConstraintViolated(
                "dangling chain positions not reachable from any NDD".into(),
            ));
        }
        let suppressants = g
            .edges()
            .iter()
            .enumerate()
            .filter(|&(e, edge)| edge.half && assignment[self.u_index(e)])
            .count() as u32;
        Ok(IlpSolution {
            cycles,
            chains,
            objective: self.objective_of(assignment),
            suppressants,
        })
    }

    /// Converts a decoded solution into an allocation of the instance the
    /// pool graph was built from: every couple on a selected cycle or chain
    /// receives the kidney of its in-edge's donor.
    pub fn solution_allocation(
        &self,
        inst: &KeiInstance,
        solution: &IlpSolution,
    ) -> Result<Allocation> {
        let g = &self.graph;
        let mut assignment = Vec::new();
        let edge_iter = solution
            .cycles
            .iter()
            .flat_map(|&c| self.cycles[c].edges.iter().copied())
            .chain(
                solution
                    .chains
                    .iter()
                    .flat_map(|ch| ch.edges.iter().copied()),
            );
        for eid in edge_iter {
            let e = g.edges()[eid];
            let recipient = g.vertices()[e.to].recipient.expect("edges point at couples");
            let donor = g.vertices()[e.from].donor.expect("edges leave donors");
            assignment.push((recipient, donor));
        }
        inst.make_allocation(assignment)
    }

    /// Builds the variable assignment corresponding to a set of structures.
    pub fn assignment_from_structures(
        &self,
        cycles: &[usize],
        chains: &[ChainSolution],
    ) -> Vec<bool> {
        let mut assignment = vec![false; self.var_count()];
        for &c in cycles {
            assignment[self.z_index(c)] = true;
            for &e in &self.cycles[c].edges {
                assignment[self.u_index(e)] = true;
            }
        }
        for chain in chains {
            for (i, &e) in chain.edges.iter().enumerate() {
                let k = (i + 1) as u32;
                let idx = self.y_index(e, k).unwrap_or_else(|| {
                    panic!(
                        "chain edge {e} lacks position {k}; K(e) = {:?}",
                        self.positions[e]
                    )
                });
                assignment[idx] = true;
                assignment[self.u_index(e)] = true;
            }
        }
        assignment
    }

    /// Serializes the model in LP text format (maximization, binaries).
    pub fn to_lp(&self) -> String {
        fn push_terms(out: &mut String, terms: &[(String, i64)]) {
            for (i, (name, coef)) in terms.iter().enumerate() {
                if i == 0 {
                    if *coef < 0 {
                        let _ = write!(out, "- {} {}", coef.abs(), name);
                    } else {
                        let _ = write!(out, "{coef} {name}");
                    }
                } else if *coef < 0 {
                    let _ = write!(out, " - {} {}", coef.abs(), name);
                } else {
                    let _ = write!(out, " + {coef} {name}");
                }
            }
        }
        let mut out = String::new();
        out.push_str("\\ position-indexed cycle-and-chain clearing model\n");
        out.push_str("Maximize\n obj: ");
        let obj_terms: Vec<(String, i64)> = self
            .graph
            .edges()
            .iter()
            .enumerate()
            .map(|(e, edge)| (self.var_name(self.u_index(e)), edge.weight))
            .collect();
        if obj_terms.is_empty() {
            out.push('0');
        } else {
            push_terms(&mut out, &obj_terms);
        }
        out.push_str("\nSubject To\n");
        for row in self.rows() {
            let _ = write!(out, " {}: ", row.name);
            let terms: Vec<(String, i64)> = row
                .terms
                .iter()
                .map(|&(v, c)| (self.var_name(v), c))
                .collect();
            push_terms(&mut out, &terms);
            let op = match row.cmp {
                Cmp::Le => "<=",
                Cmp::Ge => ">=",
                Cmp::Eq => "=",
            };
            let _ = writeln!(out, " {op} {}", row.rhs);
        }
        out.push_str("Binaries\n");
        for v in 0..self.var_count() {
            let _ = writeln!(out, " {}", self.var_name(v));
        }
        out.push_str("End\n");
        out
    }
}
