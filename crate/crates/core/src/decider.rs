//! The decision procedure: preconditions, ancestor closure, scan bound, factor scan, verdict.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exactlinalg::FrequencyMatrix;
use crate::oracle::{find_abelian_power, PowerOccurrence};
use crate::templates::{self, find_instance_with, InstanceOccurrence, ParentRule, PrefixCounts, Template};
use crate::words::{Letter, Morphism, Word};

/// Scan length guaranteed to contain a shortest instance of some ancestor, if any exists.
///
/// An instance longer than `(k+1) + (N−2) + (k−1)(N−2+mkΔ)` has every block of length at least
/// `N−1`, so it parses into the image of a strictly shorter instance of a parent.
pub fn length_bound(n: usize, k: usize, m: usize, delta: usize) -> usize {
    let short = n.saturating_sub(2);
    (k + 1) + short + (k - 1) * (short + m * k * delta)
}

/// The shorter scan length `N+k−2+(k−2)(N−2+mkΔ)`.
pub fn short_length_bound(n: usize, k: usize, m: usize, delta: usize) -> usize {
    let short = n.saturating_sub(2);
    (n + k).saturating_sub(2) + k.saturating_sub(2) * (short + m * k * delta)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundChoice {
    #[default]
    Derived,
    Short,
    /// Scan factors of exactly this length.
    Explicit(usize),
}

#[derive(Clone, Debug)]
pub struct DecideConfig {
    pub max_closure: usize,
    pub bound: BoundChoice,
    pub rule: ParentRule,
    /// Longest fixed-point prefix searched for a witness.
    pub witness_cap: usize,
}

impl Default for DecideConfig {
    fn default() -> Self {
        DecideConfig {
            max_closure: 1_000_000,
            bound: BoundChoice::Derived,
            rule: ParentRule::Letters,
            witness_cap: 1 << 16,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "reason", rename_all = "kebab-case")]
pub enum PreconditionFailure {
    /// `μ(1)` does not start with 1 or has length below 2.
    NotProlongable,
    ShortImages { letters: Vec<Letter> },
    LettersOutOfRange,
    SingularMatrix,
    /// `MᵀM − I` is not positive definite; carries its leading principal minors.
    NotContracting { minors: Vec<String> },
}

impl std::fmt::Display for PreconditionFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            PreconditionFailure::NotProlongable => write!(f, "mu(1) does not have the form 1x with x nonempty"),
            PreconditionFailure::ShortImages { letters } => {
                let ls: Vec<String> = letters.iter().map(Letter::to_string).collect();
                write!(f, "image length below 2 for letters {}", ls.join(","))
            }
            PreconditionFailure::LettersOutOfRange => write!(f, "image letters outside the alphabet"),
            PreconditionFailure::SingularMatrix => write!(f, "singular frequency matrix"),
            PreconditionFailure::NotContracting { minors } => {
                write!(f, "norm of inverse is not below 1 (minors of M^T M - I: {})", minors.join(","))
            }
        }
    }
}

/// Ancestor instance found during the scan.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AncestorHit {
    pub template: Template,
    pub factor: Word,
    pub occurrence: InstanceOccurrence,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Status {
    Free,
    Contains {
        witness: PowerOccurrence,
        blocks: Vec<Word>,
        hit: AncestorHit,
    },
    PreconditionFailed { reasons: Vec<PreconditionFailure> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Stats {
    pub max_image_length: usize,
    pub det: String,
    pub norm_estimate: f64,
    pub ancestor_count: usize,
    pub generations: Vec<usize>,
    pub delta: usize,
    pub scan_bound: usize,
    pub derived_bound: usize,
    pub short_bound: usize,
    pub factors_scanned: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub status: Status,
    /// Absent when a precondition failed.
    pub stats: Option<Stats>,
    pub elapsed_ms: u128,
}

impl Verdict {
    pub fn is_free(&self) -> bool {
        matches!(self.status, Status::Free)
    }
}

/// Every failed precondition, in a fixed order.
pub fn check_preconditions(mu: &Morphism) -> Vec<PreconditionFailure> {
    let report = mu.validate();
    let mut reasons = Vec::new();
    if !report.prolongable_on_one {
        reasons.push(PreconditionFailure::NotProlongable);
    }
    if !report.short_images.is_empty() {
        reasons.push(PreconditionFailure::ShortImages { letters: report.short_images.clone() });
    }
    if !report.letters_in_range {
        reasons.push(PreconditionFailure::LettersOutOfRange);
        return reasons;
    }
    if mu.m() == 0 {
        return reasons;
    }
    let mat = FrequencyMatrix::of(mu);
    match mat.contraction_certificate() {
        Err(_) => reasons.push(PreconditionFailure::SingularMatrix),
        Ok(cert) if !cert.holds() => reasons.push(PreconditionFailure::NotContracting {
            minors: cert.minors.iter().map(ToString::to_string).collect(),
        }),
        Ok(_) => {}
    }
    reasons
}

/// First instance with a nonempty block, in (factor, template) order, of any template among the
/// given factors.
pub fn scan_factors(factors: &[Word], ts: &[Template]) -> Option<AncestorHit> {
    let m = ts.first()?.m();
    factors.par_iter().find_map_first(|f| {
        let counts = PrefixCounts::new(&f.0, m);
        ts.iter().find_map(|t| {
            find_instance_with(&f.0, &counts, t, true).map(|occurrence| AncestorHit {
                template: t.clone(),
                factor: f.clone(),
                occurrence,
            })
        })
    })
}

/// Decides whether `μ^ω(1)` avoids Abelian `k`-powers.
pub fn decide(mu: &Morphism, k: usize, config: &DecideConfig) -> Result<Verdict> {
    let started = Instant::now();
    if k < 2 {
        return Err(Error::InvalidK(k));
    }
    let reasons = check_preconditions(mu);
    if !reasons.is_empty() {
        return Ok(Verdict {
            status: Status::PreconditionFailed { reasons },
            stats: None,
            elapsed_ms: started.elapsed().as_millis(),
        });
    }
    let mat = FrequencyMatrix::of(mu);
    let ancestors = templates::ancestors(mu, k, config.max_closure, config.rule)?;
    let delta = templates::delta(&ancestors.templates) as usize;
    let n = mu.max_image_length();
    let m = mu.m();
    let derived_bound = length_bound(n, k, m, delta);
    let short_bound = short_length_bound(n, k, m, delta);
    let scan_bound = match config.bound {
        BoundChoice::Derived => derived_bound,
        BoundChoice::Short => short_bound,
        BoundChoice::Explicit(b) => b,
    };
    // every shorter factor of the infinite word lies inside one of these
    let factors: Vec<Word> = mu.factors_of_length(scan_bound).into_iter().collect();
    let ts: Vec<Template> = ancestors.templates.iter().cloned().collect();
    let hit = scan_factors(&factors, &ts);
    let status = match hit {
        None => Status::Free,
        Some(hit) => {
            let (prefix, witness) = extract_witness(mu, k, config.witness_cap)?;
            Status::Contains { blocks: witness.blocks(&prefix), witness, hit }
        }
    };
    Ok(Verdict {
        status,
        stats: Some(Stats {
            max_image_length: n,
            det: mat.det().to_string(),
            norm_estimate: mat.inverse_norm_estimate()?,
            ancestor_count: ancestors.len(),
            generations: ancestors.generations,
            delta,
            scan_bound,
            derived_bound,
            short_bound,
            factors_scanned: factors.len(),
        }),
        elapsed_ms: started.elapsed().as_millis(),
    })
}

/// Locates a concrete Abelian `k`-power in a prefix of `μ^ω(1)`, doubling the prefix length
/// from 1024 up to `cap`. Returns the prefix searched along with the occurrence.
pub fn extract_witness(mu: &Morphism, k: usize, cap: usize) -> Result<(Word, PowerOccurrence)> {
    let mut len = 1usize << 10;
    loop {
        let len_now = len.min(cap);
        let prefix = mu.fixed_point_prefix(len_now);
        if let Some(occ) = find_abelian_power(&prefix, k)? {
            let end = occ.position + occ.len();
            return Ok((prefix.factor(0, end), occ));
        }
        if len_now >= cap {
            return Err(Error::WitnessNotFound { k, cap });
        }
        len *= 2;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dekking() -> Morphism {
        Morphism::from_u32(&[&[1, 1, 2, 3], &[1, 3, 3], &[2, 2, 3]])
    }

    #[test]
    fn length_bound_examples() {
        assert_eq!(length_bound(4, 3, 3, 2), 46);
        assert_eq!(short_length_bound(4, 3, 3, 2), 25);
        assert_eq!(length_bound(2, 2, 2, 0), 3);
        for k in 2..8 {
            assert_eq!(length_bound(2, k, 3, 0), k + 1);
        }
    }

    #[test]
    fn precondition_reasons_are_all_listed() {
        // not prolongable, short image, and singular all at once
        let mu = Morphism::from_u32(&[&[2, 2], &[2]]);
        let reasons = check_preconditions(&mu);
        assert_eq!(
            reasons,
            vec![
                PreconditionFailure::NotProlongable,
                PreconditionFailure::ShortImages { letters: vec![Letter(2)] },
                PreconditionFailure::SingularMatrix,
            ]
        );
        assert!(check_preconditions(&dekking()).is_empty());
    }

    #[test]
    fn thue_morse_is_rejected() {
        let mu = Morphism::from_u32(&[&[1, 2], &[2, 1]]);
        let v = decide(&mu, 2, &DecideConfig::default()).unwrap();
        assert_eq!(v.status, Status::PreconditionFailed { reasons: vec![PreconditionFailure::SingularMatrix] });
        assert!(v.stats.is_none());
    }

    #[test]
    fn dekking_contains_squares() {
        let v = decide(&dekking(), 2, &DecideConfig::default()).unwrap();
        match v.status {
            Status::Contains { witness, blocks, hit } => {
                assert_eq!((witness.position, witness.block_length), (0, 1));
                assert_eq!(blocks, vec![Word::from(vec![1]), Word::from(vec![1])]);
                assert!(hit.occurrence.verify(&hit.factor, &hit.template));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unary_alphabet_contains_every_power() {
        let mu = Morphism::from_u32(&[&[1, 1]]);
        for k in 2..5 {
            let v = decide(&mu, k, &DecideConfig::default()).unwrap();
            assert!(matches!(v.status, Status::Contains { .. }), "k = {k}");
        }
    }

    #[test]
    fn witness_examples() {
        let mu = Morphism::from_u32(&[&[1, 1, 2, 1], &[2, 2, 1]]);
        let (prefix, occ) = extract_witness(&mu, 2, 1 << 12).unwrap();
        assert_eq!((occ.position, occ.block_length), (0, 1));
        assert!(occ.verify(&prefix));
        let (prefix, occ) = extract_witness(&mu, 3, 1 << 12).unwrap();
        assert_eq!((occ.position, occ.block_length), (0, 9));
        assert!(occ.verify(&prefix));
        // this fixed point has no Abelian 4-power at all
        assert_eq!(
            extract_witness(&mu, 4, 1 << 12),
            Err(Error::WitnessNotFound { k: 4, cap: 1 << 12 })
        );
        assert_eq!(
            extract_witness(&dekking(), 3, 1 << 10),
            Err(Error::WitnessNotFound { k: 3, cap: 1 << 10 })
        );
    }

    #[test]
    fn invalid_k() {
        assert_eq!(decide(&dekking(), 1, &DecideConfig::default()), Err(Error::InvalidK(1)));
    }
}
