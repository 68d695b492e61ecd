//! Domain model: recipients, donors, donor partitions, allocations, and the
//! feasibility / rationality checks defined on them.
//!
//! Every recipient partitions the donor set into compatible donors (`C_i`),
//! half-compatible donors (`H_i`, usable only with a suppressant), and the
//! implicit remainder of incompatible donors. Instances are immutable after
//! construction; all operations here are pure.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{KeiError, Result};

/// ABO blood groups with the standard donation rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BloodType {
    O,
    A,
    B,
    AB,
}

impl BloodType {
    /// Standard ABO rule: O donates to all, A to {A, AB}, B to {B, AB},
    /// AB to {AB}.
    pub fn can_donate_to(self, recipient: BloodType) -> bool {
        use BloodType::*;
        match self {
            O => true,
            A => matches!(recipient, A | AB),
            B => matches!(recipient, B | AB),
            AB => recipient == AB,
        }
    }

    pub const ALL: [BloodType; 4] = [BloodType::O, BloodType::A, BloodType::B, BloodType::AB];
}

impl fmt::Display for BloodType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            BloodType::O => "O",
            BloodType::A => "A",
            BloodType::B => "B",
            BloodType::AB => "AB",
        };
        f.write_str(s)
    }
}

/// A patient waiting for a kidney. Blood type and sensitization are only
/// used by the generator and experiment reporting; the solvers ignore them.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Recipient {
    pub id: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub blood: Option<BloodType>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub sensitized: bool,
}

/// A donor. `altruistic` donors enter the pool without a paired recipient.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Donor {
    pub id: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub blood: Option<BloodType>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub altruistic: bool,
}

/// Model classes induced by the donor partitions.
///
/// `Bm` (baseline): no recipient has half-compatible donors. `Sbm` (silver
/// bullet): no recipient has incompatible donors, i.e. a suppressant makes
/// every kidney acceptable. `Gm`: the general case.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ModelClass {
    Bm,
    Sbm,
    Gm,
}

impl fmt::Display for ModelClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ModelClass::Bm => "BM",
            ModelClass::Sbm => "SBM",
            ModelClass::Gm => "GM",
        };
        f.write_str(s)
    }
}

/// A kidney exchange instance.
///
/// `pairs` is a partial bijection between recipient and donor ids: a paired
/// recipient enters the pool together with her donor. Recipients without a
/// paired donor are "single"; donors without a paired recipient are
/// altruistic. `compat[i]` and `half[i]` are the donor sets `C_i` and `H_i`;
/// incompatible donors are implicit (everything in neither set).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KeiInstance {
    recipients: Vec<Recipient>,
    donors: Vec<Donor>,
    pairs: Vec<(usize, usize)>,
    compat: Vec<BTreeSet<usize>>,
    half: Vec<BTreeSet<usize>>,
    donor_of: Vec<Option<usize>>,
    recipient_of: Vec<Option<usize>>,
}

impl KeiInstance {
    /// Assembles an instance from raw parts without judging invariant
    /// violations; call [`KeiInstance::validate`] to obtain those as data.
    /// Out-of-range pair entries are kept for reporting but excluded from the
    /// derived pairing maps.
    pub fn new(
        recipients: Vec<Recipient>,
        donors: Vec<Donor>,
        pairs: Vec<(usize, usize)>,
        mut compat: Vec<BTreeSet<usize>>,
        mut half: Vec<BTreeSet<usize>>,
    ) -> Self {
        compat.resize(recipients.len(), BTreeSet::new());
        half.resize(recipients.len(), BTreeSet::new());
        let mut donor_of = vec![None; recipients.len()];
        let mut recipient_of = vec![None; donors.len()];
        for &(r, d) in &pairs {
            if r < recipients.len() && d < donors.len() {
                donor_of[r] = Some(d);
                recipient_of[d] = Some(r);
            }
        }
        KeiInstance {
            recipients,
            donors,
            pairs,
            compat,
            half,
            donor_of,
            recipient_of,
        }
    }

    pub fn recipients(&self) -> &[Recipient] {
        &self.recipients
    }

    pub fn donors(&self) -> &[Donor] {
        &self.donors
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn n_recipients(&self) -> usize {
        self.recipients.len()
    }

    pub fn n_donors(&self) -> usize {
        self.donors.len()
    }

    /// The paired donor of recipient `r`, if any.
    pub fn paired_donor(&self, r: usize) -> Option<usize> {
        self.donor_of.get(r).copied().flatten()
    }

    /// The paired recipient of donor `d`, if any.
    pub fn paired_recipient(&self, d: usize) -> Option<usize> {
        self.recipient_of.get(d).copied().flatten()
    }

    /// `C_r`: donors compatible with recipient `r`.
    pub fn compat_set(&self, r: usize) -> &BTreeSet<usize> {
        &self.compat[r]
    }

    /// `H_r`: donors half-compatible with recipient `r`.
    pub fn half_set(&self, r: usize) -> &BTreeSet<usize> {
        &self.half[r]
    }

    pub fn is_compatible(&self, r: usize, d: usize) -> bool {
        self.compat[r].contains(&d)
    }

    pub fn is_half_compatible(&self, r: usize, d: usize) -> bool {
        self.half[r].contains(&d)
    }

    /// Recipient ids without a paired donor.
    pub fn single_recipients(&self) -> Vec<usize> {
        (0..self.recipients.len())
            .filter(|&r| self.donor_of[r].is_none())
            .collect()
    }

    /// Donor ids without a paired recipient.
    pub fn altruistic_donors(&self) -> Vec<usize> {
        (0..self.donors.len())
            .filter(|&d| self.recipient_of[d].is_none())
            .collect()
    }

    /// A recipient whose own paired donor is compatible.
    pub fn own_compatible(&self, r: usize) -> bool {
        self.paired_donor(r).is_some_and(|d| self.compat[r].contains(&d))
    }

    /// Checks every structural invariant and reports violations as data.
    pub fn validate(&self) -> ValidationReport {
        let mut violations = Vec::new();
        for (i, r) in self.recipients.iter().enumerate() {
            if r.id != i {
                violations.push(Violation {
                    subject: format!("recipient {}", r.id),
                    rule: format!("id must equal position {i} (contiguous from 0)"),
                });
            }
        }
        for (i, d) in self.donors.iter().enumerate() {
            if d.id != i {
                violations.push(Violation {
                    subject: format!("donor {}", d.id),
                    rule: format!("id must equal position {i} (contiguous from 0)"),
                });
            }
        }
        let mut seen_r = BTreeSet::new();
        let mut seen_d = BTreeSet::new();
        for &(r, d) in &self.pairs {
            if r >= self.recipients.len() || d >= self.donors.len() {
                violations.push(Violation {
                    subject: format!("pair ({r},{d})"),
                    rule: "pair ids out of range".into(),
                });
                continue;
            }
            if !seen_r.insert(r) {
                violations.push(Violation {
                    subject: format!("recipient {r}"),
                    rule: "recipient appears in more than one pair".into(),
                });
            }
            if !seen_d.insert(d) {
                violations.push(Violation {
                    subject: format!("donor {d}"),
                    rule: "donor appears in more than one pair".into(),
                });
            }
        }
        for (d, donor) in self.donors.iter().enumerate() {
            let paired = self.recipient_of[d].is_some();
            if donor.altruistic == paired {
                violations.push(Violation {
                    subject: format!("donor {d}"),
                    rule: "a donor is altruistic iff it has no paired recipient".into(),
                });
            }
        }
        for r in 0..self.recipients.len() {
            for &d in self.compat[r].iter().chain(self.half[r].iter()) {
                if d >= self.donors.len() {
                    violations.push(Violation {
                        subject: format!("recipient {r}"),
                        rule: format!("donor id {d} out of range"),
                    });
                }
            }
            if let Some(&d) = self.compat[r].intersection(&self.half[r]).next() {
                violations.push(Violation {
                    subject: format!("recipient {r}"),
                    rule: format!("C/H overlap at donor {d}"),
                });
            }
        }
        ValidationReport { violations }
    }

    /// Shorthand for `validate` that converts violations into an error.
    pub fn ensure_valid(&self) -> Result<()> {
        let report = self.validate();
        if report.is_ok() {
            Ok(())
        } else {
            Err(KeiError::InvalidInstance(report.to_string()))
        }
    }

    /// Classifies the instance as baseline, silver-bullet, or general.
    pub fn model_class(&self) -> ModelClass {
        if self.half.iter().all(|h| h.is_empty()) {
            ModelClass::Bm
        } else if self.is_silver_bullet() {
            ModelClass::Sbm
        } else {
            ModelClass::Gm
        }
    }

    /// True when no recipient has incompatible donors, i.e. `C_i ∪ H_i`
    /// covers the entire donor set for every recipient. Distinct from
    /// `model_class() == Sbm` because an instance with empty half sets and
    /// full compatible sets satisfies both the baseline and the silver-bullet
    /// condition.
    pub fn is_silver_bullet(&self) -> bool {
        (0..self.recipients.len())
            .all(|r| self.compat[r].len() + self.half[r].len() == self.donors.len())
    }

    /// Returns a copy in which every recipient whose own donor is compatible
    /// loses all half-compatible options. Pools that guarantee compatible
    /// pairs a compatible kidney apply this before solving.
    pub fn with_protected_compatible_pairs(&self) -> KeiInstance {
        let mut out = self.clone();
        for r in 0..out.recipients.len() {
            if out.own_compatible(r) {
                out.half[r].clear();
            }
        }
        out
    }

    /// Computes transplant counts for a feasible allocation.
    pub fn stats(&self, alloc: &Allocation) -> Result<AllocationStats> {
        self.check_allocation(alloc)?;
        let mut co = 0;
        let mut hc = 0;
        for (&r, &d) in &alloc.assignment {
            if self.compat[r].contains(&d) {
                co += 1;
            } else {
                hc += 1;
            }
        }
        Ok(AllocationStats {
            co,
            hc,
            tr: co + hc,
        })
    }

    /// Verifies the allocation invariants: assignments drawn from `C ∪ H`,
    /// injectivity, and suppressant flags matching half-compatible receipts.
    pub fn check_allocation(&self, alloc: &Allocation) -> Result<()> {
        let mut used_donors = BTreeSet::new();
        for (&r, &d) in &alloc.assignment {
            if r >= self.recipients.len() || d >= self.donors.len() {
                return Err(KeiError::InfeasibleAllocation(format!(
                    "assignment ({r} <- {d}) out of range"
                )));
            }
            let compat = self.compat[r].contains(&d);
            let half = self.half[r].contains(&d);
            if !compat && !half {
                return Err(KeiError::InfeasibleAllocation(format!(
                    "recipient {r} assigned incompatible donor {d}"
                )));
            }
            if !used_donors.insert(d) {
                return Err(KeiError::InfeasibleAllocation(format!(
                    "donor {d} assigned to more than one recipient"
                )));
            }
            if half != alloc.suppressed.contains(&r) {
                return Err(KeiError::InfeasibleAllocation(format!(
                    "suppressant flag for recipient {r} does not match assignment kind"
                )));
            }
        }
        for &r in &alloc.suppressed {
            if !alloc.assignment.contains_key(&r) {
                return Err(KeiError::InfeasibleAllocation(format!(
                    "recipient {r} suppressed but unassigned"
                )));
            }
        }
        Ok(())
    }

    /// Strong individual rationality: a paired donor's kidney is used only if
    /// her recipient is assigned one, and a recipient whose own donor is
    /// compatible never trades down to a half-compatible kidney.
    ///
    /// Leaving a pair out entirely is always acceptable; the weaker
    /// [`KeiInstance::check_ir`] additionally demands that own-compatible
    /// recipients are served.
    pub fn check_strong_ir(&self, alloc: &Allocation) -> bool {
        let used: BTreeSet<usize> = alloc.assignment.values().copied().collect();
        for r in 0..self.recipients.len() {
            if let Some(d) = self.paired_donor(r) {
                if used.contains(&d) && !alloc.assignment.contains_key(&r) {
                    return false;
                }
                if self.compat[r].contains(&d) {
                    if let Some(&got) = alloc.assignment.get(&r) {
                        if !self.compat[r].contains(&got) {
                            return false;
                        }
                    }
                }
            }
        }
        true
    }

    /// Individual rationality: every recipient whose own donor is compatible
    /// is assigned a compatible donor.
    pub fn check_ir(&self, alloc: &Allocation) -> bool {
        (0..self.recipients.len()).all(|r| {
            if self.own_compatible(r) {
                alloc
                    .assignment
                    .get(&r)
                    .is_some_and(|d| self.compat[r].contains(d))
            } else {
                true
            }
        })
    }

    /// Builds an allocation from recipient → donor pairs, deriving the
    /// suppressant flags, and validates it against this instance.
    pub fn make_allocation(
        &self,
        assignment: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Allocation> {
        let assignment: BTreeMap<usize, usize> = assignment.into_iter().collect();
        let suppressed = assignment
            .iter()
            .filter(|&(&r, &d)| r < self.half.len() && self.half[r].contains(&d))
            .map(|(&r, _)| r)
            .collect();
        let alloc = Allocation {
            assignment,
            suppressed,
        };
        self.check_allocation(&alloc)?;
        Ok(alloc)
    }

    /// Serializes to the versioned JSON interchange format.
    pub fn to_json(&self) -> Result<String> {
        let file = InstanceFile::from_instance(self);
        Ok(serde_json::to_string_pretty(&file)?)
    }

    /// Parses the versioned JSON interchange format.
    pub fn from_json(text: &str) -> Result<KeiInstance> {
        let file: InstanceFile = serde_json::from_str(text)?;
        file.into_instance()
    }
}

/// One violated instance invariant.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub subject: String,
    pub rule: String,
}

/// Outcome of [`KeiInstance::validate`]. Violations are data, not faults.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_ok() {
            return f.write_str("ok");
        }
        let lines: Vec<String> = self
            .violations
            .iter()
            .map(|v| format!("{}: {}", v.subject, v.rule))
            .collect();
        f.write_str(&lines.join("; "))
    }
}

/// A (partial) assignment of donors to recipients plus the set of recipients
/// receiving suppressants.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Allocation {
    /// recipient id → donor id; injective in donors.
    pub assignment: BTreeMap<usize, usize>,
    /// Recipients receiving a suppressant; exactly those assigned a donor
    /// from their half-compatible set.
    pub suppressed: BTreeSet<usize>,
}

impl Allocation {
    pub fn empty() -> Self {
        Allocation::default()
    }

    pub fn len(&self) -> usize {
        self.assignment.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignment.is_empty()
    }
}

/// Transplant counts of an allocation: compatible, half-compatible, total.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AllocationStats {
    pub co: u32,
    pub hc: u32,
    pub tr: u32,
}

// ---------------------------------------------------------------------------
// JSON interchange format (version 1)
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct InstanceFile {
    version: u32,
    recipients: Vec<Recipient>,
    donors: Vec<Donor>,
    pairs: Vec<[usize; 2]>,
    #[serde(default)]
    compat: BTreeMap<String, Vec<usize>>,
    #[serde(default)]
    half: BTreeMap<String, Vec<usize>>,
}

impl InstanceFile {
    fn from_instance(inst: &KeiInstance) -> InstanceFile {
        let set_map = |sets: &[BTreeSet<usize>]| {
            sets.iter()
                .enumerate()
                .filter(|(_, s)| !s.is_empty())
                .map(|(r, s)| (r.to_string(), s.iter().copied().collect()))
                .collect()
        };
        InstanceFile {
            version: 1,
            recipients: inst.recipients.clone(),
            donors: inst.donors.clone(),
            pairs: inst.pairs.iter().map(|&(r, d)| [r, d]).collect(),
            compat: set_map(&inst.compat),
            half: set_map(&inst.half),
        }
    }

    fn into_instance(self) -> Result<KeiInstance> {
        if self.version != 1 {
            return Err(KeiError::InvalidArgument(format!(
                "unsupported instance format version {}",
                self.version
            )));
        }
        let n = self.recipients.len();
        let parse_sets = |map: BTreeMap<String, Vec<usize>>| -> Result<Vec<BTreeSet<usize>>> {
            let mut sets = vec![BTreeSet::new(); n];
            for (key, donors) in map {
                let r: usize = key.parse().map_err(|_| {
                    KeiError::InvalidArgument(format!("non-integer recipient key {key:?}"))
                })?;
                if r >= n {
                    return Err(KeiError::InvalidArgument(format!(
                        "recipient key {r} out of range"
                    )));
                }
                sets[r] = donors.into_iter().collect();
            }
            Ok(sets)
        };
        let compat = parse_sets(self.compat)?;
        let half = parse_sets(self.half)?;
        Ok(KeiInstance::new(
            self.recipients,
            self.donors,
            self.pairs.into_iter().map(|[r, d]| (r, d)).collect(),
            compat,
            half,
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn empty_instance_is_valid() {
        let inst = KeiInstance::new(vec![], vec![], vec![], vec![], vec![]);
        assert!(inst.validate().is_ok());
        assert_eq!(inst.model_class(), ModelClass::Bm);
    }

    #[test]
    fn three_cycle_fixture_is_valid_and_general() {
        let inst = fixtures::three_cycle();
        assert!(inst.validate().is_ok());
        // d_3 (id 2) is neither compatible nor half-compatible for r_1.
        assert_eq!(inst.model_class(), ModelClass::Gm);
    }

    #[test]
    fn overlap_between_compat_and_half_is_reported() {
        let mut compat = vec![BTreeSet::new()];
        let mut half = vec![BTreeSet::new()];
        compat[0].insert(1);
        half[0].insert(1);
        let inst = KeiInstance::new(
            vec![Recipient {
                id: 0,
                blood: None,
                sensitized: false,
            }],
            (0..2)
                .map(|id| Donor {
                    id,
                    blood: None,
                    altruistic: id == 1,
                })
                .collect(),
            vec![(0, 0)],
            compat,
            half,
        );
        let report = inst.validate();
        assert!(!report.is_ok());
        assert!(report.to_string().contains("C/H overlap"));
    }

    #[test]
    fn altruistic_flag_must_match_pairing() {
        let inst = KeiInstance::new(
            vec![Recipient {
                id: 0,
                blood: None,
                sensitized: false,
            }],
            vec![Donor {
                id: 0,
                blood: None,
                altruistic: true,
            }],
            vec![(0, 0)],
            vec![BTreeSet::new()],
            vec![BTreeSet::new()],
        );
        assert!(!inst.validate().is_ok());
    }

    #[test]
    fn model_class_detection() {
        let bm = fixtures::pairs_instance(3, |_, _| (false, false));
        assert_eq!(bm.model_class(), ModelClass::Bm);

        // Every donor half-compatible with every recipient: silver bullet.
        let sbm = fixtures::pairs_instance(2, |_, _| (false, true));
        assert_eq!(sbm.model_class(), ModelClass::Sbm);

        assert_eq!(fixtures::three_cycle().model_class(), ModelClass::Gm);
    }

    #[test]
    fn stats_on_the_worked_three_cycle() {
        let inst = fixtures::three_cycle();
        let alloc = fixtures::three_cycle_solution(&inst);
        let stats = inst.stats(&alloc).unwrap();
        assert_eq!((stats.co, stats.hc, stats.tr), (1, 2, 3));
        assert_eq!(stats.tr as usize, alloc.len());
    }

    #[test]
    fn stats_empty_allocation() {
        let inst = fixtures::three_cycle();
        let stats = inst.stats(&Allocation::empty()).unwrap();
        assert_eq!((stats.co, stats.hc, stats.tr), (0, 0, 0));
    }

    #[test]
    fn stats_rejects_infeasible_allocation() {
        let inst = fixtures::three_cycle();
        // r_0 is not compatible with donor 0 in any way.
        let mut alloc = Allocation::empty();
        alloc.assignment.insert(0, 0);
        let err = inst.stats(&alloc).unwrap_err();
        assert!(err.to_string().contains("incompatible"));
    }

    #[test]
    fn single_compatible_pair_self_assignment() {
        let inst = fixtures::pairs_instance(1, |r, d| (r == d, false));
        let alloc = inst.make_allocation([(0, 0)]).unwrap();
        let stats = inst.stats(&alloc).unwrap();
        assert_eq!((stats.co, stats.hc, stats.tr), (1, 0, 1));
        assert!(inst.check_strong_ir(&alloc));
        assert!(inst.check_ir(&alloc));
    }

    #[test]
    fn strong_ir_fails_when_donor_used_but_recipient_unserved() {
        let inst = fixtures::three_cycle();
        // r_0 takes d_1's kidney while r_1 gets nothing.
        let alloc = inst.make_allocation([(0, 1)]).unwrap();
        assert!(!inst.check_strong_ir(&alloc));
    }

    #[test]
    fn strong_ir_holds_for_worked_solution_and_empty() {
        let inst = fixtures::three_cycle();
        assert!(inst.check_strong_ir(&fixtures::three_cycle_solution(&inst)));
        assert!(inst.check_strong_ir(&Allocation::empty()));
        assert!(inst.check_ir(&fixtures::three_cycle_solution(&inst)));
    }

    #[test]
    fn ir_requires_own_compatible_recipients_to_be_served() {
        let inst = fixtures::pairs_instance(1, |r, d| (r == d, false));
        assert!(!inst.check_ir(&Allocation::empty()));
        // Strong IR tolerates leaving the pair out entirely.
        assert!(inst.check_strong_ir(&Allocation::empty()));
    }

    #[test]
    fn own_compatible_recipient_must_not_trade_down() {
        // r_0's own donor is compatible, donor 1 is half-compatible.
        let inst = fixtures::pairs_instance(2, |r, d| (r == 0 && d == 0, r == 0 && d == 1));
        let alloc = inst.make_allocation([(0, 1)]).unwrap();
        assert!(!inst.check_strong_ir(&alloc));
    }

    #[test]
    fn protecting_compatible_pairs_clears_their_half_sets() {
        let inst = fixtures::pairs_instance(2, |r, d| (r == 0 && d == 0, d == 1));
        let protected = inst.with_protected_compatible_pairs();
        assert!(protected.half_set(0).is_empty());
        assert_eq!(protected.half_set(1).len(), 1);
    }

    #[test]
    fn json_round_trip_preserves_instance() {
        let inst = fixtures::figure_pool();
        let text = inst.to_json().unwrap();
        let back = KeiInstance::from_json(&text).unwrap();
        assert_eq!(inst, back);
    }

    #[test]
    fn json_rejects_unknown_version() {
        let text = r#"{"version": 2, "recipients": [], "donors": [], "pairs": []}"#;
        assert!(KeiInstance::from_json(text).is_err());
    }

    #[test]
    fn blood_type_rule() {
        use BloodType::*;
        assert!(O.can_donate_to(A));
        assert!(O.can_donate_to(O));
        assert!(A.can_donate_to(AB));
        assert!(!A.can_donate_to(B));
        assert!(!AB.can_donate_to(O));
        assert!(AB.can_donate_to(AB));
        assert!(B.can_donate_to(AB));
        assert!(!B.can_donate_to(A));
    }
}
