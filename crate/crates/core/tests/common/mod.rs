#![allow(dead_code)]

use std::collections::{BTreeSet, HashMap};
use std::sync::atomic::{AtomicUsize, Ordering};

use abelfree::exactlinalg::FrequencyMatrix;
use abelfree::{
    ancestors, find_abelian_power, find_block_instance, find_instance, parikh, radius_bound,
    Morphism, ParentFinder, ParentRule, ParikhVector, Template, Word,
};
use num_rational::BigRational;
use num_traits::Zero;
use proptest::prelude::*;
use proptest::test_runner::{Config, RngSeed};

pub const SEED: u64 = 0x5eed_abe1;

pub fn config(cases: u32) -> Config {
    Config {
        cases,
        rng_seed: RngSeed::Fixed(SEED),
        failure_persistence: None,
        ..Config::default()
    }
}

pub fn dekking() -> Morphism {
    Morphism::from_u32(&[&[1, 1, 2, 3], &[1, 3, 3], &[2, 2, 3]])
}

pub fn negative_control() -> Morphism {
    Morphism::from_u32(&[&[1, 1, 2, 1], &[2, 2, 1]])
}

pub fn word(m: u32, max_len: usize) -> impl Strategy<Value = Word> {
    prop::collection::vec(1..=m, 0..=max_len).prop_map(Word::from)
}

/// Prolongable, expanding morphisms on two letters with `|M⁻¹| < 1`.
pub fn contracting_morphism() -> impl Strategy<Value = Morphism> {
    (
        prop::collection::vec(1u32..=2, 1..=4),
        prop::collection::vec(1u32..=2, 2..=5),
    )
        .prop_map(|(tail, img2)| {
            let mut img1 = vec![1];
            img1.extend(tail);
            Morphism::new(vec![Word::from(img1), Word::from(img2)])
        })
        .prop_filter("contracting", |mu| {
            FrequencyMatrix::of(mu).inverse_norm_lt_one().unwrap_or(false)
        })
}

/// Square integer matrices of size 1..=6 with nonzero determinant.
pub fn nonsingular_matrix() -> impl Strategy<Value = FrequencyMatrix> {
    (1usize..=6)
        .prop_flat_map(|n| prop::collection::vec(prop::collection::vec(-6i64..=6, n), n))
        .prop_map(FrequencyMatrix::from_rows)
        .prop_filter("nonsingular", |mat| !mat.det().is_zero())
}

pub fn check_parikh_additive(u: &Word, v: &Word, m: usize) -> Result<(), TestCaseError> {
    let mut uv = u.clone();
    uv.0.extend_from_slice(&v.0);
    let lhs = parikh(&uv, m);
    prop_assert_eq!(&lhs, &(&parikh(u, m) + &parikh(v, m)));
    prop_assert_eq!(lhs.total() as usize, uv.len());
    Ok(())
}

pub fn row_times(v: &ParikhVector, mat: &FrequencyMatrix) -> ParikhVector {
    let n = mat.dim();
    ParikhVector(
        (0..n)
            .map(|j| (0..n).map(|i| v[i] * mat.rows()[i][j]).sum())
            .collect(),
    )
}

pub fn check_matrix_compat(mu: &Morphism, w: &Word) -> Result<(), TestCaseError> {
    let m = mu.m();
    let image = mu.apply(w);
    prop_assert_eq!(parikh(&image, m), row_times(&parikh(w, m), &FrequencyMatrix::of(mu)));
    prop_assert!(2 * w.len() <= image.len());
    Ok(())
}

pub fn check_solve(mat: &FrequencyMatrix, v: &ParikhVector) -> Result<(), TestCaseError> {
    let inv = mat.inverse().unwrap();
    prop_assert!(inv.mul_int(mat).is_identity());
    prop_assert!(inv.int_mul(mat).is_identity());
    match mat.solve_row_integer(v).unwrap() {
        Some(d) => prop_assert_eq!(&row_times(&d, mat), v),
        None => {
            let n = mat.dim();
            let exact: Vec<BigRational> = (0..n)
                .map(|j| {
                    (0..n).fold(BigRational::zero(), |acc, i| {
                        acc + BigRational::from_integer(v[i].into()) * inv.get(i, j)
                    })
                })
                .collect();
            prop_assert!(exact.iter().any(|x| !x.is_integer()));
        }
    }
    Ok(())
}

pub fn check_power_equivalence(w: &Word, k: usize) -> Result<(), TestCaseError> {
    let m = w.0.iter().map(|l| l.0 as usize).max().unwrap_or(1);
    let t = Template::power(k, m).unwrap();
    let by_template = find_instance(w, &t);
    let by_oracle = find_abelian_power(w, k).unwrap();
    prop_assert_eq!(by_template.is_some(), by_oracle.is_some());
    if let (Some(a), Some(b)) = (&by_template, &by_oracle) {
        // both report the least occurrence by (start, block length)
        prop_assert_eq!((a.start, a.blocks[0].1), (b.position, b.block_length));
        prop_assert!(a.verify(w, &t));
        prop_assert!(b.verify(w));
    }
    Ok(())
}

/// An ancestor closure together with the inverse of its parent relation.
pub struct ClosureContext {
    pub mu: Morphism,
    pub templates: Vec<Template>,
    pub set: BTreeSet<Template>,
    /// For each parent, the templates it is a parent of.
    pub children: HashMap<Template, Vec<Template>>,
    pub radius: f64,
    pub realized: AtomicUsize,
}

impl ClosureContext {
    pub fn new(mu: Morphism, k: usize) -> Self {
        let anc = ancestors(&mu, k, 1_000_000, ParentRule::Letters).unwrap();
        let finder = ParentFinder::new(&mu, ParentRule::Letters).unwrap();
        let mut children: HashMap<Template, Vec<Template>> = HashMap::new();
        for t in &anc.templates {
            for p in finder.parents(t) {
                children.entry(p).or_default().push(t.clone());
            }
        }
        let radius = radius_bound(&mu, &FrequencyMatrix::of(&mu)).unwrap();
        ClosureContext {
            templates: anc.templates.iter().cloned().collect(),
            set: anc.templates,
            children,
            radius,
            mu,
            realized: AtomicUsize::new(0),
        }
    }

    /// Parent transfer: an instance of a parent in `w` yields an instance of the child in `μ(w)`.
    pub fn check_parent_transfer(&self, w: &Word) -> Result<(), TestCaseError> {
        let image = self.mu.apply(w);
        for (parent, kids) in &self.children {
            if find_block_instance(w, parent).is_none() {
                continue;
            }
            self.realized.fetch_add(1, Ordering::Relaxed);
            for child in kids {
                prop_assert!(
                    find_block_instance(&image, child).is_some(),
                    "{} realized in {} but {} not realized in {}",
                    parent,
                    w,
                    child,
                    image
                );
            }
        }
        Ok(())
    }

    pub fn check_closed_at(&self, idx: usize) -> Result<(), TestCaseError> {
        let t = &self.templates[idx % self.templates.len()];
        let finder = ParentFinder::new(&self.mu, ParentRule::Letters).unwrap();
        for p in finder.parents(t) {
            prop_assert!(self.set.contains(&p), "parent {} of {} missing", p, t);
        }
        for d in t.diffs() {
            prop_assert!(d.norm() <= self.radius, "{} outside radius {}", d, self.radius);
        }
        Ok(())
    }
}
