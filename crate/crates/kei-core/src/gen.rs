//! Synthetic pool generator.
//!
//! Pools are built in two steps: `generate` draws blood types, sensitization
//! and the fully-compatible edge set from crossmatch trials, and
//! `augment_half_edges` activates a fraction `alpha` of the remaining
//! blood-type-compatible donor-recipient combinations as half-compatible
//! edges (usable only with a suppressant). Both steps are fully determined
//! by their seed.
//!
//! The default parameters approximate a US pool (blood distribution,
//! sensitization rate, crossmatch pass rates); they are synthetic stand-ins,
//! not measurements from any registry.

use std::collections::BTreeSet;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{KeiError, Result};
use crate::instance::{BloodType, Donor, KeiInstance, Recipient};

/// Parameters of the synthetic generator.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct GeneratorConfig {
    /// Total pool vertices: couples plus non-directed donors.
    pub n_vertices: usize,
    /// Fraction of vertices that are non-directed donors (rounded).
    pub ndd_fraction: f64,
    /// Probabilities of blood types O, A, B, AB; must sum to one.
    pub blood_type_distribution: [f64; 4],
    /// Fraction of recipients that are highly sensitized.
    pub sensitized_fraction: f64,
    /// Crossmatch pass probability for blood-compatible combinations.
    pub base_compat_density: f64,
    /// Crossmatch pass probability when the recipient is sensitized.
    pub sensitized_compat_density: f64,
    /// Fraction of eligible unconnected combinations activated as
    /// half-compatible edges.
    pub alpha: f64,
    pub seed: u64,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig {
            n_vertices: 64,
            ndd_fraction: 0.05,
            blood_type_distribution: [0.48, 0.34, 0.14, 0.04],
            sensitized_fraction: 0.2,
            base_compat_density: 0.7,
            sensitized_compat_density: 0.1,
            alpha: 0.2,
            seed: 0,
        }
    }
}

impl GeneratorConfig {
    pub fn validate(&self) -> Result<()> {
        let fraction = |name: &str, v: f64| {
            if (0.0..=1.0).contains(&v) {
                Ok(())
            } else {
                Err(KeiError::InvalidArgument(format!(
                    "{name} must lie in [0, 1], got {v}"
                )))
            }
        };
        fraction("ndd_fraction", self.ndd_fraction)?;
        fraction("sensitized_fraction", self.sensitized_fraction)?;
        fraction("base_compat_density", self.base_compat_density)?;
        fraction("sensitized_compat_density", self.sensitized_compat_density)?;
        fraction("alpha", self.alpha)?;
        for p in self.blood_type_distribution {
            fraction("blood_type_distribution entry", p)?;
        }
        let sum: f64 = self.blood_type_distribution.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(KeiError::InvalidArgument(format!(
                "blood_type_distribution sums to {sum}, expected 1"
            )));
        }
        Ok(())
    }
}

/// How half-edge augmentation treats its candidate set.
#[derive(Debug, Clone, Copy)]
pub struct AugmentOptions {
    /// Let non-directed donors participate in half-compatible edges.
    pub include_ndd_donors: bool,
    /// Draw each candidate independently with probability `alpha` instead
    /// of activating an exact rounded count.
    pub bernoulli: bool,
}

impl Default for AugmentOptions {
    fn default() -> Self {
        AugmentOptions {
            include_ndd_donors: true,
            bernoulli: false,
        }
    }
}

fn draw_blood(rng: &mut ChaCha8Rng, dist: &[f64; 4]) -> BloodType {
    let x: f64 = rng.gen();
    let mut acc = 0.0;
    for (i, &p) in dist.iter().enumerate() {
        acc += p;
        if x < acc {
            return BloodType::ALL[i];
        }
    }
    BloodType::AB
}

/// Draws the base pool: couples and NDDs with blood data, plus the
/// fully-compatible edge set from independent crossmatch trials
/// (blood-compatible combinations only, with a reduced pass rate for
/// sensitized recipients). Deterministic in `config.seed`.
pub fn generate(config: &GeneratorConfig) -> Result<KeiInstance> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let n_ndd = (config.ndd_fraction * config.n_vertices as f64).round() as usize;
    let n_pairs = config.n_vertices.saturating_sub(n_ndd);

    let mut recipients = Vec::with_capacity(n_pairs);
    let mut donors = Vec::with_capacity(n_pairs + n_ndd);
    for id in 0..n_pairs {
        recipients.push(Recipient {
            id,
            blood: Some(draw_blood(&mut rng, &config.blood_type_distribution)),
            sensitized: rng.gen_bool(config.sensitized_fraction),
        });
        donors.push(Donor {
            id,
            blood: Some(draw_blood(&mut rng, &config.blood_type_distribution)),
            altruistic: false,
        });
    }
    for k in 0..n_ndd {
        donors.push(Donor {
            id: n_pairs + k,
            blood: Some(draw_blood(&mut rng, &config.blood_type_distribution)),
            altruistic: true,
        });
    }

    let mut compat = vec![BTreeSet::new(); n_pairs];
    for d in 0..donors.len() {
        let donor_blood = donors[d].blood.unwrap();
        for (r, sets) in compat.iter_mut().enumerate() {
            if !donor_blood.can_donate_to(recipients[r].blood.unwrap()) {
                continue;
            }
            let p = if recipients[r].sensitized {
                config.sensitized_compat_density
            } else {
                config.base_compat_density
            };
            if rng.gen_bool(p) {
                sets.insert(d);
            }
        }
    }

    let pairs = (0..n_pairs).map(|i| (i, i)).collect();
    let inst = KeiInstance::new(
        recipients,
        donors,
        pairs,
        compat,
        vec![BTreeSet::new(); n_pairs],
    );
    inst.ensure_valid()?;
    Ok(inst)
}

/// Eligible half-edge candidates in deterministic (donor, recipient) order:
/// blood-compatible, not already connected, and not the recipient's own
/// donor.
fn half_edge_candidates(inst: &KeiInstance, opts: &AugmentOptions) -> Result<Vec<(usize, usize)>> {
    let mut candidates = Vec::new();
    for d in 0..inst.n_donors() {
        let donor = &inst.donors()[d];
        if donor.altruistic && !opts.include_ndd_donors {
            continue;
        }
        let donor_blood = donor
            .blood
            .ok_or_else(|| KeiError::InvalidArgument(format!("donor {d} lacks a blood type")))?;
        for r in 0..inst.n_recipients() {
            let recipient_blood = inst.recipients()[r].blood.ok_or_else(|| {
                KeiError::InvalidArgument(format!("recipient {r} lacks a blood type"))
            })?;
            if !donor_blood.can_donate_to(recipient_blood) {
                continue;
            }
            if inst.is_compatible(r, d) || inst.is_half_compatible(r, d) {
                continue;
            }
            if inst.paired_donor(r) == Some(d) {
                continue;
            }
            candidates.push((d, r));
        }
    }
    Ok(candidates)
}

/// Activates `round(alpha * |candidates|)` half-compatible edges chosen
/// uniformly without replacement (or each candidate independently with
/// probability `alpha` in Bernoulli mode). Existing compatible edges are
/// untouched; the result never violates blood-type compatibility.
pub fn augment_half_edges_with(
    inst: &KeiInstance,
    alpha: f64,
    seed: u64,
    opts: &AugmentOptions,
) -> Result<KeiInstance> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(KeiError::InvalidArgument(format!(
            "alpha must lie in [0, 1], got {alpha}"
        )));
    }
    let mut candidates = half_edge_candidates(inst, opts)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let chosen: Vec<(usize, usize)> = if opts.bernoulli {
        candidates
            .into_iter()
            .filter(|_| rng.gen_bool(alpha))
            .collect()
    } else {
        let k = (alpha * candidates.len() as f64).round() as usize;
        // Partial Fisher-Yates: the first k entries end up uniform without
        // replacement.
        for i in 0..k {
            let j = rng.gen_range(i..candidates.len());
            candidates.swap(i, j);
        }
        candidates.truncate(k);
        candidates
    };
    let mut half: Vec<BTreeSet<usize>> = (0..inst.n_recipients())
        .map(|r| inst.half_set(r).clone())
        .collect();
    for (d, r) in chosen {
        half[r].insert(d);
    }
    let out = KeiInstance::new(
        inst.recipients().to_vec(),
        inst.donors().to_vec(),
        inst.pairs().to_vec(),
        (0..inst.n_recipients())
            .map(|r| inst.compat_set(r).clone())
            .collect(),
        half,
    );
    out.ensure_valid()?;
    Ok(out)
}

/// [`augment_half_edges_with`] under the default options.
pub fn augment_half_edges(inst: &KeiInstance, alpha: f64, seed: u64) -> Result<KeiInstance> {
    augment_half_edges_with(inst, alpha, seed, &AugmentOptions::default())
}

/// Salt mixed into the base seed to derive the augmentation stream, so both
/// steps stay independently reproducible from one configured seed.
const ALPHA_SEED_SALT: u64 = 0x9e37_79b9_7f4a_7c15;

/// Full pipeline: base pool plus half-edge augmentation at `config.alpha`.
pub fn generate_pool(config: &GeneratorConfig) -> Result<KeiInstance> {
    let base = generate(config)?;
    augment_half_edges(&base, config.alpha, config.seed ^ ALPHA_SEED_SALT)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pool::{DirectedPoolGraph, PoolOptions};
    use crate::scheme::WeightScheme;

    fn config(n: usize, seed: u64) -> GeneratorConfig {
        GeneratorConfig {
            n_vertices: n,
            seed,
            ..GeneratorConfig::default()
        }
    }

    #[test]
    fn empty_pool() {
        let inst = generate(&config(0, 1)).unwrap();
        assert_eq!(inst.n_recipients(), 0);
        assert_eq!(inst.n_donors(), 0);
    }

    #[test]
    fn same_seed_reproduces_the_instance_byte_for_byte() {
        let a = generate_pool(&config(48, 7)).unwrap();
        let b = generate_pool(&config(48, 7)).unwrap();
        assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
        let c = generate_pool(&config(48, 8)).unwrap();
        assert_ne!(a.to_json().unwrap(), c.to_json().unwrap());
    }

    #[test]
    fn generated_pools_validate_and_build() {
        let inst = generate_pool(&config(64, 3)).unwrap();
        assert!(inst.validate().is_ok());
        let g = DirectedPoolGraph::build(&inst, &WeightScheme::MaxTr, &PoolOptions::default());
        assert_eq!(g.pair_count(), inst.n_recipients());
        assert_eq!(g.ndd_vertices().len(), 3); // round(0.05 * 64)
        assert!(g.half_edge_count() > 0);
    }

    #[test]
    fn zero_alpha_changes_nothing() {
        let base = generate(&config(40, 5)).unwrap();
        let same = augment_half_edges(&base, 0.0, 99).unwrap();
        assert_eq!(base, same);
    }

    #[test]
    fn full_alpha_activates_every_candidate() {
        let base = generate(&config(40, 5)).unwrap();
        let opts = AugmentOptions::default();
        let expected = half_edge_candidates(&base, &opts).unwrap().len();
        let full = augment_half_edges(&base, 1.0, 99).unwrap();
        let added: usize = (0..full.n_recipients())
            .map(|r| full.half_set(r).len())
            .sum();
        assert_eq!(added, expected);
    }

    #[test]
    fn fractional_alpha_activates_the_rounded_count() {
        let base = generate(&config(64, 11)).unwrap();
        let opts = AugmentOptions::default();
        let candidates = half_edge_candidates(&base, &opts).unwrap().len();
        let augmented = augment_half_edges(&base, 0.2, 42).unwrap();
        let added: usize = (0..augmented.n_recipients())
            .map(|r| augmented.half_set(r).len())
            .sum();
        assert_eq!(added, (0.2 * candidates as f64).round() as usize);
    }

    #[test]
    fn half_edges_respect_blood_types_and_skip_own_donors() {
        let inst = generate_pool(&config(64, 13)).unwrap();
        for r in 0..inst.n_recipients() {
            let rb = inst.recipients()[r].blood.unwrap();
            for &d in inst.half_set(r) {
                assert!(inst.donors()[d].blood.unwrap().can_donate_to(rb));
                assert_ne!(inst.paired_donor(r), Some(d));
                assert!(!inst.compat_set(r).contains(&d));
            }
        }
    }

    #[test]
    fn ndd_donors_can_be_excluded_from_augmentation() {
        let base = generate(&config(50, 17)).unwrap();
        let no_ndd = augment_half_edges_with(
            &base,
            1.0,
            1,
            &AugmentOptions {
                include_ndd_donors: false,
                ..AugmentOptions::default()
            },
        )
        .unwrap();
        for r in 0..no_ndd.n_recipients() {
            for &d in no_ndd.half_set(r) {
                assert!(!no_ndd.donors()[d].altruistic);
            }
        }
    }

    #[test]
    fn bernoulli_mode_is_deterministic_too() {
        let base = generate(&config(40, 19)).unwrap();
        let opts = AugmentOptions {
            bernoulli: true,
            ..AugmentOptions::default()
        };
        let a = augment_half_edges_with(&base, 0.3, 5, &opts).unwrap();
        let b = augment_half_edges_with(&base, 0.3, 5, &opts).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn missing_blood_types_are_rejected() {
        let inst = crate::fixtures::three_cycle();
        assert!(augment_half_edges(&inst, 0.5, 1).is_err());
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let mut c = config(10, 1);
        c.alpha = 1.5;
        assert!(c.validate().is_err());
        let mut c2 = config(10, 1);
        c2.blood_type_distribution = [0.5, 0.5, 0.5, 0.5];
        assert!(c2.validate().is_err());
    }
}
