//! The bipartite exchange graph.
//!
//! Left vertices are recipients plus one dummy recipient per altruistic
//! donor; right vertices are donors plus one dummy donor per single
//! recipient. Both sides always have equal size, every left vertex has a
//! private edge, and dummy recipients connect to every other donor, so a
//! perfect matching always exists and perfect matchings correspond exactly
//! to feasible allocations satisfying strong individual rationality.
//!
//! [`ExchangeGraph::with_suppressant_gadget`] replaces the half-compatible
//! edges of a silver-bullet instance with paths through `h` zero-weight
//! slots, which caps the number of half-compatible donations any perfect
//! matching can realize.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use crate::error::{KeiError, Result};
use crate::instance::{Allocation, KeiInstance};
use crate::matching::{self, Matching};
use crate::scheme::WeightScheme;

/// Role of an edge in the exchange graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeKind {
    /// Recipient to her own donor (or to her dummy donor): no transplant.
    Private,
    /// Dummy recipient to a donor: the donor stays unused.
    Dummy,
    /// Transplant from a compatible donor.
    Compatible,
    /// Transplant from a half-compatible donor (needs a suppressant).
    HalfCompatible,
    /// Recipient-to-slot or slot-to-donor edge of the suppressant gadget.
    Gadget,
    /// The `(a_k, b_k)` edge closing an unused gadget slot.
    GadgetLink,
}

/// Left-side vertex.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LeftNode {
    Recipient(usize),
    /// Dummy recipient standing in for an altruistic donor.
    DummyRecipient { altruist: usize },
    /// Gadget slot vertex on the recipient side.
    GadgetB(usize),
}

/// Right-side vertex.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RightNode {
    Donor(usize),
    /// Dummy donor standing in for a single (donorless) recipient.
    DummyDonor { single: usize },
    /// Gadget slot vertex on the donor side.
    GadgetA(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GraphEdge {
    pub left: usize,
    pub right: usize,
    pub kind: EdgeKind,
    pub weight: i64,
}

/// Weighted bipartite multigraph over an exchange instance.
#[derive(Debug, Clone)]
pub struct ExchangeGraph {
    left: Vec<LeftNode>,
    right: Vec<RightNode>,
    edges: Vec<GraphEdge>,
    /// All weights are multiplied by this factor (2 once the gadget has
    /// halved edge weights; keeping arithmetic integral).
    weight_scale: i64,
    silver_bullet: bool,
    gadget_slots: Option<usize>,
}

impl ExchangeGraph {
    /// Builds the exchange graph for a valid instance under a weight scheme.
    /// Half-compatible edges are omitted entirely when the scheme forbids
    /// them.
    pub fn build(inst: &KeiInstance, scheme: &WeightScheme) -> ExchangeGraph {
        let n = inst.n_recipients();
        let singles = inst.single_recipients();
        let altruists = inst.altruistic_donors();

        let mut left: Vec<LeftNode> = (0..n).map(LeftNode::Recipient).collect();
        left.extend(
            altruists
                .iter()
                .map(|&altruist| LeftNode::DummyRecipient { altruist }),
        );
        let mut right: Vec<RightNode> = (0..inst.n_donors()).map(RightNode::Donor).collect();
        right.extend(singles.iter().map(|&single| RightNode::DummyDonor { single }));

        let dummy_donor_of = |r: usize| {
            inst.n_donors() + singles.binary_search(&r).expect("recipient is single")
        };

        let mut edges = Vec::new();
        // Private edges: every real recipient to her (possibly dummy) donor.
        for r in 0..n {
            let target = match inst.paired_donor(r) {
                Some(d) => d,
                None => dummy_donor_of(r),
            };
            edges.push(GraphEdge {
                left: r,
                right: target,
                kind: EdgeKind::Private,
                weight: scheme.private_weight(r),
            });
        }
        // Each dummy recipient keeps a private edge to its own altruist and
        // dummy edges to every other donor (real or dummy).
        for (k, &altruist) in altruists.iter().enumerate() {
            edges.push(GraphEdge {
                left: n + k,
                right: altruist,
                kind: EdgeKind::Private,
                weight: 0,
            });
        }
        for (k, &altruist) in altruists.iter().enumerate() {
            for target in 0..right.len() {
                if target != altruist {
                    edges.push(GraphEdge {
                        left: n + k,
                        right: target,
                        kind: EdgeKind::Dummy,
                        weight: 0,
                    });
                }
            }
        }
        for r in 0..n {
            for &d in inst.compat_set(r) {
                edges.push(GraphEdge {
                    left: r,
                    right: d,
                    kind: EdgeKind::Compatible,
                    weight: scheme.compatible_weight(n, r, d),
                });
            }
        }
        for r in 0..n {
            for &d in inst.half_set(r) {
                if let Some(w) = scheme.half_weight(n, r, d) {
                    edges.push(GraphEdge {
                        left: r,
                        right: d,
                        kind: EdgeKind::HalfCompatible,
                        weight: w,
                    });
                }
            }
        }
        ExchangeGraph {
            left,
            right,
            edges,
            weight_scale: 1,
            silver_bullet: inst.is_silver_bullet(),
            gadget_slots: None,
        }
    }

    pub fn n_left(&self) -> usize {
        self.left.len()
    }

    pub fn n_right(&self) -> usize {
        self.right.len()
    }

    pub fn left_nodes(&self) -> &[LeftNode] {
        &self.left
    }

    pub fn right_nodes(&self) -> &[RightNode] {
        &self.right
    }

    pub fn edges(&self) -> &[GraphEdge] {
        &self.edges
    }

    /// Factor by which all stored weights exceed the scheme weights.
    pub fn weight_scale(&self) -> i64 {
        self.weight_scale
    }

    pub fn gadget_slots(&self) -> Option<usize> {
        self.gadget_slots
    }

    /// Edge list as `(left, right, weight)` tuples for the matcher.
    pub fn edge_tuples(&self) -> Vec<(usize, usize, i64)> {
        self.edges
            .iter()
            .map(|e| (e.left, e.right, e.weight))
            .collect()
    }

    /// Removes every half-compatible edge incident to a recipient whose own
    /// donor is compatible, so such pairs only ever trade for a compatible
    /// kidney. Must run before gadget insertion.
    pub fn restrict_compatible_pairs(&self, inst: &KeiInstance) -> Result<ExchangeGraph> {
        if self.gadget_slots.is_some() {
            return Err(KeiError::InvalidArgument(
                "restrict compatible pairs before inserting the gadget".into(),
            ));
        }
        let mut out = self.clone();
        out.edges.retain(|e| {
            !(e.kind == EdgeKind::HalfCompatible
                && matches!(self.left[e.left], LeftNode::Recipient(r) if inst.own_compatible(r)))
        });
        Ok(out)
    }

    /// Removes the private edges of real recipients, so every recipient must
    /// be matched along a transplant edge. Perfect matchings of the result
    /// are exactly the allocations satisfying all recipients; dummy
    /// recipients keep their edges so altruists may still sit out.
    pub fn without_recipient_private_edges(&self) -> ExchangeGraph {
        let mut out = self.clone();
        out.edges.retain(|e| {
            !(e.kind == EdgeKind::Private
                && matches!(self.left[e.left], LeftNode::Recipient(_)))
        });
        out
    }

    /// Replaces all half-compatible edges with paths through `h` zero-weight
    /// slots, capping half-compatible donations at `h` in any perfect
    /// matching.
    ///
    /// Requires the underlying instance to satisfy the silver-bullet
    /// condition (the slot pairing argument needs every recipient-donor
    /// combination to be feasible) and a uniform half-edge weight (the slot
    /// decomposition halves one global weight). All pre-existing weights are
    /// doubled so the halves stay integral.
    pub fn with_suppressant_gadget(&self, h: usize) -> Result<ExchangeGraph> {
        if !self.silver_bullet {
            return Err(KeiError::ModelClass(
                "the suppressant gadget requires a silver-bullet instance".into(),
            ));
        }
        if self.gadget_slots.is_some() {
            return Err(KeiError::InvalidArgument("gadget already inserted".into()));
        }
        let half_weights: BTreeSet<i64> = self
            .edges
            .iter()
            .filter(|e| e.kind == EdgeKind::HalfCompatible)
            .map(|e| e.weight)
            .collect();
        if half_weights.len() > 1 {
            return Err(KeiError::UnsupportedScheme(
                "gadget insertion needs a uniform half-compatible edge weight".into(),
            ));
        }
        let half_weight = half_weights.into_iter().next().unwrap_or(0);

        let mut half_recipients = BTreeSet::new();
        let mut half_donors = BTreeSet::new();
        for e in &self.edges {
            if e.kind == EdgeKind::HalfCompatible {
                half_recipients.insert(e.left);
                half_donors.insert(e.right);
            }
        }

        let mut out = self.clone();
        out.weight_scale = self.weight_scale * 2;
        out.edges.retain(|e| e.kind != EdgeKind::HalfCompatible);
        for e in &mut out.edges {
            e.weight *= 2;
        }
        let b_base = out.left.len();
        let a_base = out.right.len();
        for k in 0..h {
            out.left.push(LeftNode::GadgetB(k));
            out.right.push(RightNode::GadgetA(k));
        }
        for k in 0..h {
            out.edges.push(GraphEdge {
                left: b_base + k,
                right: a_base + k,
                kind: EdgeKind::GadgetLink,
                weight: 0,
            });
        }
        // The doubled half weight split evenly across the two path edges.
        for &l in &half_recipients {
            for k in 0..h {
                out.edges.push(GraphEdge {
                    left: l,
                    right: a_base + k,
                    kind: EdgeKind::Gadget,
                    weight: half_weight,
                });
            }
        }
        for &r in &half_donors {
            for k in 0..h {
                out.edges.push(GraphEdge {
                    left: b_base + k,
                    right: r,
                    kind: EdgeKind::Gadget,
                    weight: half_weight,
                });
            }
        }
        out.gadget_slots = Some(h);
        Ok(out)
    }

    /// Applies the uniform perfectization shift to every edge; the result
    /// shares edge ids with `self`.
    pub fn perfectized(&self) -> ExchangeGraph {
        let tuples = self.edge_tuples();
        let (shifted, _) = matching::perfectize(self.left.len(), &tuples);
        let mut out = self.clone();
        for (e, &(_, _, w)) in out.edges.iter_mut().zip(shifted.iter()) {
            e.weight = w;
        }
        out
    }

    /// Decodes a perfect matching into an allocation. Recipients matched
    /// along private or dummy edges stay unassigned; gadget slots pair the
    /// recipient on `a_k` with the donor on `b_k`.
    pub fn matching_to_allocation(
        &self,
        matching: &Matching,
        inst: &KeiInstance,
    ) -> Result<Allocation> {
        if !matching.is_perfect(self.left.len(), self.right.len()) {
            return Err(KeiError::NotPerfect(format!(
                "{} matched edges for {} + {} vertices",
                matching.edges.len(),
                self.left.len(),
                self.right.len()
            )));
        }
        let slots = self.gadget_slots.unwrap_or(0);
        let mut assignment: Vec<(usize, usize)> = Vec::new();
        let mut slot_recipient = vec![None; slots];
        let mut slot_donor = vec![None; slots];
        for &id in &matching.edges {
            let e = &self.edges[id];
            match e.kind {
                EdgeKind::Compatible | EdgeKind::HalfCompatible => {
                    let (LeftNode::Recipient(r), RightNode::Donor(d)) =
                        (self.left[e.left], self.right[e.right])
                    else {
                        return Err(KeiError::InvalidArgument(
                            "transplant edge between non-agent vertices".into(),
                        ));
                    };
                    assignment.push((r, d));
                }
                EdgeKind::Gadget => match (self.left[e.left], self.right[e.right]) {
                    (LeftNode::Recipient(r), RightNode::GadgetA(k)) => {
                        slot_recipient[k] = Some(r);
                    }
                    (LeftNode::GadgetB(k), RightNode::Donor(d)) => {
                        slot_donor[k] = Some(d);
                    }
                    _ => {
                        return Err(KeiError::InvalidArgument(
                            "malformed gadget edge".into(),
                        ));
                    }
                },
                EdgeKind::Private | EdgeKind::Dummy | EdgeKind::GadgetLink => {}
            }
        }
        for k in 0..slots {
            match (slot_recipient[k], slot_donor[k]) {
                (Some(r), Some(d)) => assignment.push((r, d)),
                (None, None) => {}
                _ => {
                    return Err(KeiError::NotPerfect(format!(
                        "gadget slot {k} is covered on only one side"
                    )));
                }
            }
        }
        inst.make_allocation(assignment)
    }

    /// Debug dump in DOT format; edge kinds map to the styles of the usual
    /// drawing convention (private dotted, dummy dotted gray, compatible
    /// solid, half-compatible dashed).
    pub fn to_dot(&self) -> String {
        fn left_name(node: &LeftNode) -> String {
            match node {
                LeftNode::Recipient(r) => format!("r{r}"),
                LeftNode::DummyRecipient { altruist } => format!("dummy_r_for_d{altruist}"),
                LeftNode::GadgetB(k) => format!("b{k}"),
            }
        }
        fn right_name(node: &RightNode) -> String {
            match node {
                RightNode::Donor(d) => format!("d{d}"),
                RightNode::DummyDonor { single } => format!("dummy_d_for_r{single}"),
                RightNode::GadgetA(k) => format!("a{k}"),
            }
        }
        let mut out = String::from("graph exchange {\n");
        for node in &self.left {
            let shape = match node {
                LeftNode::Recipient(_) => "circle",
                LeftNode::DummyRecipient { .. } => "box",
                LeftNode::GadgetB(_) => "diamond",
            };
            let _ = writeln!(out, "  {} [shape={shape}, side=left];", left_name(node));
        }
        for node in &self.right {
            let shape = match node {
                RightNode::Donor(_) => "circle",
                RightNode::DummyDonor { .. } => "box",
                RightNode::GadgetA(_) => "diamond",
            };
            let _ = writeln!(out, "  {} [shape={shape}, side=right];", right_name(node));
        }
        for e in &self.edges {
            let (style, color) = match e.kind {
                EdgeKind::Private => ("dotted", "black"),
                EdgeKind::Dummy => ("dotted", "gray"),
                EdgeKind::Compatible => ("solid", "black"),
                EdgeKind::HalfCompatible => ("dashed", "black"),
                EdgeKind::Gadget => ("dashed", "gray"),
                EdgeKind::GadgetLink => ("solid", "gray"),
            };
            let _ = writeln!(
                out,
                "  {} -- {} [style={style}, color={color}, weight={}];",
                left_name(&self.left[e.left]),
                right_name(&self.right[e.right]),
                e.weight
            );
        }
        out.push_str("}\n");
        out
    }
}
