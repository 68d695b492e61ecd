//! Edge-weight schemes encoding the policy objectives.
//!
//! Each scheme assigns integer weights to compatible, half-compatible, and
//! private (no-transplant) edges; dummy edges always carry weight zero.
//! Lexicographic objectives are encoded with a scale constant `BIG` strictly
//! larger than the number of recipients, so that one unit of the primary
//! criterion outweighs any achievable amount of the secondary one.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::instance::{Allocation, AllocationStats, KeiInstance};

/// The supported objectives.
///
/// * `MaxTr` — maximize total transplants (compatible 1, half 1, private 0).
/// * `MaxCoBm` — maximize compatible transplants with half-compatible
///   donations forbidden outright (edges omitted rather than carrying a
///   sentinel weight).
/// * `LexCoTr` — maximize compatible transplants, then total transplants
///   (compatible BIG, half 1).
/// * `LexCoNegHc` — maximize compatible transplants, then minimize
///   half-compatible ones (compatible BIG, half -1).
/// * `LexTrNegHc` — maximize total transplants, then minimize
///   half-compatible ones (compatible BIG, half BIG-1).
/// * `Custom` — arbitrary per-pair utilities, including waiting gains on
///   private edges.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WeightScheme {
    MaxTr,
    MaxCoBm,
    LexCoTr,
    LexCoNegHc,
    LexTrNegHc,
    Custom(CustomWeights),
}

/// Per-pair utilities for [`WeightScheme::Custom`]. Overrides are keyed by
/// `(recipient, donor)`; anything not listed falls back to the defaults.
/// Private-edge weights ("waiting gains") may be negative, e.g. to model
/// health deterioration while waiting.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CustomWeights {
    #[serde(default)]
    pub compatible_default: i64,
    #[serde(default)]
    pub half_default: i64,
    #[serde(default)]
    pub private_default: i64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub compatible_overrides: Vec<(usize, usize, i64)>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub half_overrides: Vec<(usize, usize, i64)>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub private_overrides: Vec<(usize, i64)>,
}

impl CustomWeights {
    fn pair_weight(overrides: &[(usize, usize, i64)], fallback: i64, r: usize, d: usize) -> i64 {
        overrides
            .iter()
            .find(|&&(or, od, _)| (or, od) == (r, d))
            .map_or(fallback, |&(_, _, w)| w)
    }
}

impl WeightScheme {
    /// The lexicographic scale constant. Strictly larger than the recipient
    /// count so that dominance is strict for every matching: with weights
    /// `(BIG, BIG - 1)` a transplant-improving swap could tie if `BIG = n`
    /// and the half-compatible count shifts by `n`.
    pub fn big(n_recipients: usize) -> i64 {
        n_recipients as i64 + 1
    }

    /// Weight of a compatible edge `(r, d)`.
    pub fn compatible_weight(&self, n: usize, r: usize, d: usize) -> i64 {
        match self {
            WeightScheme::MaxTr | WeightScheme::MaxCoBm => 1,
            WeightScheme::LexCoTr | WeightScheme::LexCoNegHc | WeightScheme::LexTrNegHc => {
                Self::big(n)
            }
            WeightScheme::Custom(c) => {
                CustomWeights::pair_weight(&c.compatible_overrides, c.compatible_default, r, d)
            }
        }
    }

    /// Weight of a half-compatible edge `(r, d)`, or `None` when the scheme
    /// forbids half-compatible donations and the edge must be omitted.
    pub fn half_weight(&self, n: usize, r: usize, d: usize) -> Option<i64> {
        match self {
            WeightScheme::MaxTr => Some(1),
            WeightScheme::MaxCoBm => None,
            WeightScheme::LexCoTr => Some(1),
            WeightScheme::LexCoNegHc => Some(-1),
            WeightScheme::LexTrNegHc => Some(Self::big(n) - 1),
            WeightScheme::Custom(c) => Some(CustomWeights::pair_weight(
                &c.half_overrides,
                c.half_default,
                r,
                d,
            )),
        }
    }

    /// Weight of recipient `r`'s private edge (no transplant).
    pub fn private_weight(&self, r: usize) -> i64 {
        match self {
            WeightScheme::Custom(c) => c
                .private_overrides
                .iter()
                .find(|&&(or, _)| or == r)
                .map_or(c.private_default, |&(_, w)| w),
            _ => 0,
        }
    }

    /// True when half-compatible donations are disallowed entirely.
    pub fn forbids_half(&self) -> bool {
        matches!(self, WeightScheme::MaxCoBm)
    }

    /// True when the scheme guarantees that a half-compatible donation is
    /// strictly less desirable than a compatible one, which the suppressant
    /// slot gadget relies on. Holds for `MaxCoBm`, `LexCoTr`, `LexCoNegHc`,
    /// and `LexTrNegHc`; `MaxTr` weighs both kinds equally and `Custom` gives
    /// no guarantee.
    pub fn half_strictly_worse(&self) -> bool {
        matches!(
            self,
            WeightScheme::MaxCoBm
                | WeightScheme::LexCoTr
                | WeightScheme::LexCoNegHc
                | WeightScheme::LexTrNegHc
        )
    }

    /// The objective of an allocation as a lexicographic tuple (larger is
    /// better). Schemes 1..=5 are functions of the transplant counts; the
    /// custom scheme collapses to its scalar utility.
    pub fn objective_tuple(&self, inst: &KeiInstance, alloc: &Allocation) -> Vec<i64> {
        let stats = inst
            .stats(alloc)
            .expect("objective_tuple requires a feasible allocation");
        self.objective_tuple_from(inst, alloc, stats)
    }

    pub(crate) fn objective_tuple_from(
        &self,
        inst: &KeiInstance,
        alloc: &Allocation,
        stats: AllocationStats,
    ) -> Vec<i64> {
        let (co, hc, tr) = (stats.co as i64, stats.hc as i64, stats.tr as i64);
        match self {
            WeightScheme::MaxTr => vec![tr],
            WeightScheme::MaxCoBm => vec![co],
            WeightScheme::LexCoTr => vec![co, tr],
            WeightScheme::LexCoNegHc => vec![co, -hc],
            WeightScheme::LexTrNegHc => vec![tr, -hc],
            WeightScheme::Custom(_) => vec![self.allocation_value(inst, alloc)],
        }
    }

    /// Scalar objective value of an allocation: transplant-edge weights plus
    /// private-edge weights of every unassigned recipient.
    pub fn allocation_value(&self, inst: &KeiInstance, alloc: &Allocation) -> i64 {
        let n = inst.n_recipients();
        let mut value = 0;
        for (&r, &d) in &alloc.assignment {
            value += if inst.is_compatible(r, d) {
                self.compatible_weight(n, r, d)
            } else {
                self.half_weight(n, r, d)
                    .expect("scheme forbids a half-compatible assignment present in allocation")
            };
        }
        for r in 0..n {
            if !alloc.assignment.contains_key(&r) {
                value += self.private_weight(r);
            }
        }
        value
    }
}

impl fmt::Display for WeightScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            WeightScheme::MaxTr => "max-tr",
            WeightScheme::MaxCoBm => "max-co-bm",
            WeightScheme::LexCoTr => "lex-co-tr",
            WeightScheme::LexCoNegHc => "lex-co-neg-hc",
            WeightScheme::LexTrNegHc => "lex-tr-neg-hc",
            WeightScheme::Custom(_) => "custom",
        };
        f.write_str(s)
    }
}

impl FromStr for WeightScheme {
    type Err = String;

    /// Parses the named schemes; custom weights need an explicit table and
    /// are not constructible from a bare name.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "max-tr" => Ok(WeightScheme::MaxTr),
            "max-co-bm" => Ok(WeightScheme::MaxCoBm),
            "lex-co-tr" => Ok(WeightScheme::LexCoTr),
            "lex-co-neg-hc" => Ok(WeightScheme::LexCoNegHc),
            "lex-tr-neg-hc" => Ok(WeightScheme::LexTrNegHc),
            other => Err(format!(
                "unknown scheme {other:?} (expected max-tr, max-co-bm, lex-co-tr, \
                 lex-co-neg-hc, or lex-tr-neg-hc)"
            )),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn table_weights() {
        let n = 5;
        let big = WeightScheme::big(n);
        assert_eq!(big, 6);
        assert_eq!(WeightScheme::MaxTr.compatible_weight(n, 0, 0), 1);
        assert_eq!(WeightScheme::MaxTr.half_weight(n, 0, 0), Some(1));
        assert_eq!(WeightScheme::MaxCoBm.half_weight(n, 0, 0), None);
        assert_eq!(WeightScheme::LexCoTr.compatible_weight(n, 0, 0), big);
        assert_eq!(WeightScheme::LexCoTr.half_weight(n, 0, 0), Some(1));
        assert_eq!(WeightScheme::LexCoNegHc.half_weight(n, 0, 0), Some(-1));
        assert_eq!(WeightScheme::LexTrNegHc.half_weight(n, 0, 0), Some(big - 1));
        for scheme in [
            WeightScheme::MaxTr,
            WeightScheme::MaxCoBm,
            WeightScheme::LexCoTr,
            WeightScheme::LexCoNegHc,
            WeightScheme::LexTrNegHc,
        ] {
            assert_eq!(scheme.private_weight(3), 0);
        }
    }

    #[test]
    fn custom_lookup_and_waiting_gain() {
        let scheme = WeightScheme::Custom(CustomWeights {
            compatible_default: 10,
            half_default: 4,
            private_default: -1,
            compatible_overrides: vec![(0, 1, 25)],
            half_overrides: vec![],
            private_overrides: vec![(2, 7)],
        });
        assert_eq!(scheme.compatible_weight(3, 0, 1), 25);
        assert_eq!(scheme.compatible_weight(3, 1, 1), 10);
        assert_eq!(scheme.half_weight(3, 0, 0), Some(4));
        assert_eq!(scheme.private_weight(2), 7);
        assert_eq!(scheme.private_weight(0), -1);
    }

    #[test]
    fn objective_tuples_on_worked_example() {
        let inst = fixtures::three_cycle();
        let alloc = fixtures::three_cycle_solution(&inst);
        assert_eq!(WeightScheme::MaxTr.objective_tuple(&inst, &alloc), vec![3]);
        assert_eq!(
            WeightScheme::LexCoTr.objective_tuple(&inst, &alloc),
            vec![1, 3]
        );
        assert_eq!(
            WeightScheme::LexTrNegHc.objective_tuple(&inst, &alloc),
            vec![3, -2]
        );
    }

    #[test]
    fn scheme_names_round_trip() {
        for name in [
            "max-tr",
            "max-co-bm",
            "lex-co-tr",
            "lex-co-neg-hc",
            "lex-tr-neg-hc",
        ] {
            let scheme: WeightScheme = name.parse().unwrap();
            assert_eq!(scheme.to_string(), name);
        }
        assert!("nope".parse::<WeightScheme>().is_err());
    }

    #[test]
    fn scheme_serde_uses_kebab_names() {
        let json = serde_json::to_string(&WeightScheme::LexCoNegHc).unwrap();
        assert_eq!(json, "\"lex-co-neg-hc\"");
        let back: WeightScheme = serde_json::from_str(&json).unwrap();
        assert_eq!(back, WeightScheme::LexCoNegHc);
    }
}
