//! k-templates, the parent relation and the ancestor closure of the Abelian-power template.
//!
//! A k-template `[a_1, ..., a_{k+1}, d_1, ..., d_{k-1}]` has border letters `a_i` (each possibly
//! empty) and difference vectors `d_i`. A word realizes it when it has a nonempty factor
//! `a_1 X_1 a_2 X_2 ... a_k X_k a_{k+1}` with `ψ(X_{i+1}) − ψ(X_i) = d_i`.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use num_integer::Roots;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exactlinalg::{FrequencyMatrix, RowSolver};
use crate::words::{parikh_of, Letter, Morphism, ParikhVector, Word};

/// A border is either a single letter or the empty word.
pub type Border = Option<Letter>;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Template {
    borders: Vec<Border>,
    diffs: Vec<ParikhVector>,
}

impl Template {
    /// Panics unless there is exactly one more border than diffs plus one, at least two blocks,
    /// and all diffs share one dimension.
    pub fn new(borders: Vec<Border>, diffs: Vec<ParikhVector>) -> Self {
        assert!(borders.len() >= 3, "a template needs k >= 2");
        assert_eq!(borders.len(), diffs.len() + 2, "k+1 borders and k-1 diffs");
        assert!(diffs.windows(2).all(|p| p[0].dim() == p[1].dim()));
        Template { borders, diffs }
    }

    /// `T_k`: empty borders and zero differences. Its instances are exactly the Abelian
    /// k-powers.
    pub fn power(k: usize, m: usize) -> Result<Self> {
        if k < 2 {
            return Err(Error::InvalidK(k));
        }
        Ok(Template {
            borders: vec![None; k + 1],
            diffs: vec![ParikhVector::zero(m); k - 1],
        })
    }

    pub fn k(&self) -> usize {
        self.borders.len() - 1
    }

    pub fn m(&self) -> usize {
        self.diffs[0].dim()
    }

    pub fn borders(&self) -> &[Border] {
        &self.borders
    }

    pub fn diffs(&self) -> &[ParikhVector] {
        &self.diffs
    }

    pub fn is_power(&self) -> bool {
        self.borders.iter().all(Option::is_none) && self.diffs.iter().all(ParikhVector::is_zero)
    }

    /// `⌊max_i |d_i|⌋` for this template alone.
    pub fn delta(&self) -> i64 {
        self.diffs.iter().map(ParikhVector::norm_sq).max().unwrap_or(0).sqrt()
    }
}

impl fmt::Display for Template {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, b) in self.borders.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            match b {
                Some(l) => write!(f, "{l}")?,
                None => write!(f, "ε")?,
            }
        }
        write!(f, ";")?;
        for d in &self.diffs {
            write!(f, " {d}")?;
        }
        write!(f, "]")
    }
}

/// `⌊max |d|⌋` over every diff vector of every template.
pub fn delta<'a>(ts: impl IntoIterator<Item = &'a Template>) -> i64 {
    ts.into_iter()
        .flat_map(|t| t.diffs.iter())
        .map(ParikhVector::norm_sq)
        .max()
        .unwrap_or(0)
        .sqrt()
}

/// Which parent borders `A_i` are enumerated.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ParentRule {
    /// `A_i` ranges over letters only. Under an empty child border every split point of
    /// `μ(A_i)` is tried.
    #[default]
    Letters,
    /// `A_i` may also be empty (forcing `a_i′ = a_i″ = ε`). The trivial self-derivation of
    /// `T_k` is dropped.
    WithEmpty,
}

/// One way of writing `μ(A) = a′ a a″`.
#[derive(Clone, Debug)]
struct Factorization {
    parent: Border,
    prefix: ParikhVector,
    suffix: ParikhVector,
}

/// Computes parents of templates for one morphism.
#[derive(Clone, Debug)]
pub struct ParentFinder<'a> {
    mu: &'a Morphism,
    solver: RowSolver,
    rule: ParentRule,
    factorizations: HashMap<Border, Vec<Factorization>>,
}

impl<'a> ParentFinder<'a> {
    pub fn new(mu: &'a Morphism, rule: ParentRule) -> Result<Self> {
        let solver = RowSolver::new(&FrequencyMatrix::of(mu))?;
        let m = mu.m();
        let mut factorizations = HashMap::new();
        let letters = (1..=m as u32).map(Letter);
        let mut empty = Vec::new();
        if rule == ParentRule::WithEmpty {
            empty.push(Factorization {
                parent: None,
                prefix: ParikhVector::zero(m),
                suffix: ParikhVector::zero(m),
            });
        }
        for b in letters.clone() {
            let img = &mu.image(b).0;
            for split in 0..=img.len() {
                empty.push(Factorization {
                    parent: Some(b),
                    prefix: parikh_of(&img[..split], m),
                    suffix: parikh_of(&img[split..], m),
                });
            }
        }
        factorizations.insert(None, empty);
        for a in letters.clone() {
            let mut opts = Vec::new();
            for b in letters.clone() {
                let img = &mu.image(b).0;
                for (pos, _) in img.iter().enumerate().filter(|(_, &x)| x == a) {
                    opts.push(Factorization {
                        parent: Some(b),
                        prefix: parikh_of(&img[..pos], m),
                        suffix: parikh_of(&img[pos + 1..], m),
                    });
                }
            }
            factorizations.insert(Some(a), opts);
        }
        Ok(ParentFinder { mu, solver, rule, factorizations })
    }

    pub fn morphism(&self) -> &Morphism {
        self.mu
    }

    pub fn rule(&self) -> ParentRule {
        self.rule
    }

    /// All parents of `t`, deduplicated and in canonical order.
    ///
    /// For each choice of factorizations `μ(A_i) = a_i′ a_i a_i″` the parent differences are
    /// `D_i = (d_i + ψ(a_i″ a_{i+1}′) − ψ(a_{i+1}″ a_{i+2}′)) M⁻¹`; choices giving a
    /// non-integral `D_i` are discarded.
    pub fn parents(&self, t: &Template) -> BTreeSet<Template> {
        let options: Vec<&[Factorization]> = t
            .borders
            .iter()
            .map(|b| self.factorizations.get(b).map_or(&[][..], Vec::as_slice))
            .collect();
        let mut out = BTreeSet::new();
        let mut chosen: Vec<&Factorization> = Vec::with_capacity(options.len());
        let mut solved: Vec<ParikhVector> = Vec::with_capacity(t.diffs.len());
        self.search(t, &options, &mut chosen, &mut solved, &mut out);
        if self.rule == ParentRule::WithEmpty && t.is_power() {
            out.remove(t);
        }
        out
    }

    fn search<'f>(
        &self,
        t: &Template,
        options: &[&'f [Factorization]],
        chosen: &mut Vec<&'f Factorization>,
        solved: &mut Vec<ParikhVector>,
        out: &mut BTreeSet<Template>,
    ) {
        let depth = chosen.len();
        if depth == options.len() {
            out.insert(Template {
                borders: chosen.iter().map(|f| f.parent).collect(),
                diffs: solved.clone(),
            });
            return;
        }
        for f in options[depth] {
            chosen.push(f);
            // once A_{i+2} is fixed, D_i is determined
            if depth >= 2 {
                let i = depth - 2;
                let mut v = t.diffs[i].clone();
                v += &chosen[i].suffix;
                v += &chosen[i + 1].prefix;
                v -= &chosen[i + 1].suffix;
                v -= &chosen[i + 2].prefix;
                if let Some(d) = self.solver.solve(&v) {
                    solved.push(d);
                    self.search(t, options, chosen, solved, out);
                    solved.pop();
                }
            } else {
                self.search(t, options, chosen, solved, out);
            }
            chosen.pop();
        }
    }
}

/// Parents of `t` under `mu` with the given enumeration rule.
pub fn parents(t: &Template, mu: &Morphism, rule: ParentRule) -> Result<BTreeSet<Template>> {
    Ok(ParentFinder::new(mu, rule)?.parents(t))
}

/// The ancestor closure of `T_k`.
#[derive(Clone, Debug)]
pub struct Ancestors {
    pub templates: BTreeSet<Template>,
    /// Number of new templates per breadth-first round, starting with `T_k` itself. The last
    /// entry is always 0.
    pub generations: Vec<usize>,
}

impl Ancestors {
    pub fn len(&self) -> usize {
        self.templates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.templates.is_empty()
    }
}

/// Least set containing `T_k` and closed under taking parents, computed breadth-first.
///
/// Requires a nonsingular frequency matrix with `|M⁻¹| < 1`, which guarantees finiteness.
/// Fails with [`Error::ClosureOverflow`] once more than `cap` templates have been found.
pub fn ancestors(mu: &Morphism, k: usize, cap: usize, rule: ParentRule) -> Result<Ancestors> {
    let t_k = Template::power(k, mu.m())?;
    if !FrequencyMatrix::of(mu).inverse_norm_lt_one()? {
        return Err(Error::NotContracting);
    }
    let finder = ParentFinder::new(mu, rule)?;
    let mut templates = BTreeSet::from([t_k.clone()]);
    let mut generations = vec![1];
    if templates.len() > cap {
        return Err(Error::ClosureOverflow { cap });
    }
    let mut frontier = vec![t_k];
    while !frontier.is_empty() {
        let found: Vec<BTreeSet<Template>> =
            frontier.par_iter().map(|t| finder.parents(t)).collect();
        let mut next = Vec::new();
        for set in found {
            for p in set {
                if !templates.contains(&p) {
                    templates.insert(p.clone());
                    next.push(p);
                    if templates.len() > cap {
                        return Err(Error::ClosureOverflow { cap });
                    }
                }
            }
        }
        next.sort();
        generations.push(next.len());
        frontier = next;
    }
    Ok(Ancestors { templates, generations })
}

/// `c* = max |c|` over `c = ψ(s p) − ψ(s̄ p̄)` with `s, s̄` suffixes and `p, p̄` prefixes of images.
pub fn c_star(mu: &Morphism) -> f64 {
    let m = mu.m();
    let mut suffixes = BTreeSet::new();
    let mut prefixes = BTreeSet::new();
    for img in mu.images() {
        for split in 0..=img.len() {
            prefixes.insert(parikh_of(&img.0[..split], m));
            suffixes.insert(parikh_of(&img.0[split..], m));
        }
    }
    let sums: BTreeSet<ParikhVector> = suffixes
        .iter()
        .flat_map(|s| prefixes.iter().map(move |p| s + p))
        .collect();
    let sums: Vec<_> = sums.into_iter().collect();
    let mut best = 0i64;
    for (i, x) in sums.iter().enumerate() {
        for y in &sums[i + 1..] {
            best = best.max((x - y).norm_sq());
        }
    }
    (best as f64).sqrt()
}

/// `r = c* / (1 − |M⁻¹|)`.
pub fn radius_from(c_star: f64, inverse_norm: f64) -> Result<f64> {
    if inverse_norm >= 1.0 {
        return Err(Error::NotContracting);
    }
    Ok(c_star / (1.0 - inverse_norm))
}

/// Radius of the ball containing every diff vector of every ancestor of `T_k`.
///
/// The norm estimate is padded by `1e-6` so that `r` is an upper bound.
pub fn radius_bound(mu: &Morphism, mat: &FrequencyMatrix) -> Result<f64> {
    if !mat.inverse_norm_lt_one()? {
        return Err(Error::NotContracting);
    }
    let norm = mat.inverse_norm_estimate()? + 1e-6;
    radius_from(c_star(mu), norm)
}

/// Where an instance `a_1 X_1 a_2 ... a_k X_k a_{k+1}` sits inside a word.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceOccurrence {
    pub start: usize,
    /// Position of each border letter; `None` for an empty border.
    pub border_positions: Vec<Option<usize>>,
    /// `(start, length)` of each block `X_i`.
    pub blocks: Vec<(usize, usize)>,
    pub len: usize,
}

impl InstanceOccurrence {
    pub fn end(&self) -> usize {
        self.start + self.len
    }

    pub fn block_lengths(&self) -> Vec<usize> {
        self.blocks.iter().map(|b| b.1).collect()
    }

    /// Re-checks the occurrence against `w` and `t` from scratch.
    pub fn verify(&self, w: &Word, t: &Template) -> bool {
        let m = t.m();
        if self.len == 0 || self.end() > w.len() || self.blocks.len() != t.k() {
            return false;
        }
        let borders_ok = t.borders.iter().zip(&self.border_positions).all(|(b, p)| match (b, p) {
            (None, None) => true,
            (Some(l), Some(p)) => w.0.get(*p) == Some(l),
            _ => false,
        });
        let psi: Vec<ParikhVector> = self
            .blocks
            .iter()
            .map(|&(s, l)| parikh_of(&w.0[s..s + l], m))
            .collect();
        borders_ok && psi.windows(2).zip(&t.diffs).all(|(p, d)| &(&p[1] - &p[0]) == d)
    }
}

/// Prefix Parikh sums of a word, laid out row-major.
pub(crate) struct PrefixCounts {
    m: usize,
    sums: Vec<u32>,
}

impl PrefixCounts {
    pub(crate) fn new(w: &[Letter], m: usize) -> Self {
        let mut sums = vec![0u32; (w.len() + 1) * m];
        for (i, l) in w.iter().enumerate() {
            let (head, tail) = sums.split_at_mut((i + 1) * m);
            tail[..m].copy_from_slice(&head[i * m..]);
            tail[l.index()] += 1;
        }
        PrefixCounts { m, sums }
    }

    /// Count of letter index `j` in `w[start..end]`.
    #[inline]
    pub(crate) fn count(&self, start: usize, end: usize, j: usize) -> i64 {
        self.sums[end * self.m + j] as i64 - self.sums[start * self.m + j] as i64
    }
}

/// Least occurrence, by `(start, |X_1|)`, of an instance of `t` in `w`.
///
/// Once the start and `|X_1|` are chosen everything else is forced: `|X_{i+1}| = |X_i| + Σ d_i`
/// and each nonempty border takes one position.
pub fn find_instance(w: &Word, t: &Template) -> Option<InstanceOccurrence> {
    let counts = PrefixCounts::new(&w.0, t.m());
    find_instance_with(&w.0, &counts, t, false)
}

/// Like [`find_instance`], but only instances with at least one nonempty block count.
///
/// Taking images preserves this property (a nonempty block `Y` becomes a block of length at
/// least `2|Y|`), while an instance made of borders alone may map to the empty instance of the
/// child template. The decision scan uses this variant.
pub fn find_block_instance(w: &Word, t: &Template) -> Option<InstanceOccurrence> {
    let counts = PrefixCounts::new(&w.0, t.m());
    find_instance_with(&w.0, &counts, t, true)
}

pub(crate) fn find_instance_with(
    w: &[Letter],
    counts: &PrefixCounts,
    t: &Template,
    require_block: bool,
) -> Option<InstanceOccurrence> {
    let n = w.len();
    let k = t.k();
    let m = t.m();
    let steps: Vec<i64> = t.diffs.iter().map(ParikhVector::total).collect();
    let mut lengths = vec![0i64; k];
    let mut block_starts = vec![0usize; k];
    let mut border_pos = vec![None; k + 1];
    for start in 0..n {
        if let Some(a) = t.borders[0] {
            if w[start] != a {
                continue;
            }
        }
        'len: for first in 0..=(n - start) as i64 {
            lengths[0] = first;
            for i in 1..k {
                lengths[i] = lengths[i - 1] + steps[i - 1];
            }
            if lengths.iter().any(|&l| l < 0) {
                continue;
            }
            if require_block && lengths.iter().all(|&l| l == 0) {
                continue;
            }
            let mut pos = start;
            for i in 0..=k {
                match t.borders[i] {
                    Some(a) => {
                        if pos >= n {
                            break 'len;
                        }
                        if w[pos] != a {
                            continue 'len;
                        }
                        border_pos[i] = Some(pos);
                        pos += 1;
                    }
                    None => border_pos[i] = None,
                }
                if i < k {
                    block_starts[i] = pos;
                    pos += lengths[i] as usize;
                    if pos > n {
                        // every later |X_1| gives a longer instance
                        break 'len;
                    }
                }
            }
            if pos == start {
                continue;
            }
            let diffs_ok = (0..k - 1).all(|i| {
                let (s0, e0) = (block_starts[i], block_starts[i] + lengths[i] as usize);
                let (s1, e1) = (block_starts[i + 1], block_starts[i + 1] + lengths[i + 1] as usize);
                (0..m).all(|j| counts.count(s1, e1, j) - counts.count(s0, e0, j) == t.diffs[i][j])
            });
            if diffs_ok {
                return Some(InstanceOccurrence {
                    start,
                    border_positions: border_pos.clone(),
                    blocks: block_starts
                        .iter()
                        .zip(&lengths)
                        .map(|(&s, &l)| (s, l as usize))
                        .collect(),
                    len: pos - start,
                });
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dekking() -> Morphism {
        Morphism::from_u32(&[&[1, 1, 2, 3], &[1, 3, 3], &[2, 2, 3]])
    }

    fn pv(v: &[i64]) -> ParikhVector {
        ParikhVector(v.to_vec())
    }

    #[test]
    fn power_template_examples() {
        let t = Template::power(3, 3).unwrap();
        assert_eq!(t.borders(), &[None, None, None, None]);
        assert_eq!(t.diffs(), &[pv(&[0, 0, 0]), pv(&[0, 0, 0])]);
        let t = Template::power(2, 3).unwrap();
        assert_eq!(t.borders().len(), 3);
        assert_eq!(t.diffs(), &[pv(&[0, 0, 0])]);
        let t = Template::power(2, 1).unwrap();
        assert_eq!(t.diffs(), &[pv(&[0])]);
        assert_eq!(Template::power(1, 3), Err(Error::InvalidK(1)));
        assert_eq!(t.to_string(), "[ε,ε,ε; (0)]");
    }

    #[test]
    fn delta_examples() {
        assert_eq!(delta([&Template::power(3, 3).unwrap()]), 0);
        let t = Template::new(vec![None, None, None], vec![pv(&[2, -2, 1])]);
        assert_eq!(delta([&t]), 3);
        let t = Template::new(vec![None, None, None], vec![pv(&[2, -2, 0])]);
        assert_eq!(t.delta(), 2);
    }

    #[test]
    fn radius_examples() {
        assert_eq!(radius_from(0.0, 0.5).unwrap(), 0.0);
        assert_eq!(radius_from(5.0, 0.5).unwrap(), 10.0);
        assert_eq!(radius_from(5.0, 1.0), Err(Error::NotContracting));
    }

    #[test]
    fn power_template_parents_dekking() {
        let mu = dekking();
        let t3 = Template::power(3, 3).unwrap();
        let ps = parents(&t3, &mu, ParentRule::Letters).unwrap();
        assert_eq!(ps.len(), 1293);
        assert!(!ps.contains(&t3));
        assert!(ps.iter().all(|p| p.borders().iter().all(Option::is_some)));
    }

    #[test]
    fn with_empty_rule_drops_self_derivation() {
        let mu = dekking();
        let t3 = Template::power(3, 3).unwrap();
        let ps = parents(&t3, &mu, ParentRule::WithEmpty).unwrap();
        assert!(!ps.contains(&t3));
        assert_eq!(ps.len(), 2397);
        // the self-derivation is only dropped for T_k; any other template keeps all candidates
        let letters = parents(&t3, &mu, ParentRule::Letters).unwrap();
        assert!(letters.is_subset(&ps));
    }

    #[test]
    fn non_integral_candidates_have_no_parents() {
        // M = 2I: every D_i = v/2, and an odd entry rules the candidate out
        let mu = Morphism::from_u32(&[&[1, 1], &[2, 2]]);
        let t = Template::new(vec![None, None, None], vec![pv(&[1, 0])]);
        let ps = parents(&t, &mu, ParentRule::Letters).unwrap();
        for p in &ps {
            assert!(p.diffs().iter().all(|d| d.dim() == 2));
        }
        // borders of 2 only ever contribute to the second coordinate
        let odd = Template::new(vec![Some(Letter(2)), Some(Letter(2)), Some(Letter(2))], vec![pv(&[1, 0])]);
        assert!(parents(&odd, &mu, ParentRule::Letters).unwrap().is_empty());
    }

    #[test]
    fn find_instance_examples() {
        let t3 = Template::power(3, 3).unwrap();
        let occ = find_instance(&"111".parse().unwrap(), &t3).unwrap();
        assert_eq!(occ.start, 0);
        assert_eq!(occ.blocks, vec![(0, 1), (1, 1), (2, 1)]);

        let t = Template::new(vec![None, None, None], vec![pv(&[-1, 1, 0])]);
        let w: Word = "12".parse().unwrap();
        let occ = find_instance(&w, &t).unwrap();
        assert_eq!(occ.blocks, vec![(0, 1), (1, 1)]);
        assert!(occ.verify(&w, &t));

        assert_eq!(find_instance(&"1213".parse().unwrap(), &Template::power(2, 3).unwrap()), None);
        assert_eq!(find_instance(&Word::empty(), &t3), None);
    }

    #[test]
    fn find_instance_with_borders() {
        // a_1 = 2, X_1 = ε, a_2 = 1, X_2 = 3, a_3 = ε: "213"
        let t = Template::new(vec![Some(Letter(2)), Some(Letter(1)), None], vec![pv(&[0, 0, 1])]);
        let w: Word = "1213".parse().unwrap();
        let occ = find_instance(&w, &t).unwrap();
        assert_eq!(occ.start, 1);
        assert_eq!(occ.border_positions, vec![Some(1), Some(2), None]);
        assert_eq!(occ.blocks, vec![(2, 0), (3, 1)]);
        assert_eq!(occ.len, 3);
        assert!(occ.verify(&w, &t));
    }

    #[test]
    fn block_instances_need_a_nonempty_block() {
        let t = Template::new(vec![None, None, None, Some(Letter(1))], vec![pv(&[0, 0, 0]), pv(&[0, 0, 0])]);
        let w: Word = "1".parse().unwrap();
        assert_eq!(find_instance(&w, &t).unwrap().block_lengths(), vec![0, 0, 0]);
        assert_eq!(find_block_instance(&w, &t), None);
        let w: Word = "1231".parse().unwrap();
        assert_eq!(find_block_instance(&w, &t), None);
        let w: Word = "1111".parse().unwrap();
        assert_eq!(find_block_instance(&w, &t).unwrap().block_lengths(), vec![1, 1, 1]);
    }

    #[test]
    fn find_instance_least_occurrence() {
        let t2 = Template::power(2, 2).unwrap();
        let w: Word = "1212".parse().unwrap();
        let occ = find_instance(&w, &t2).unwrap();
        assert_eq!((occ.start, occ.blocks[0].1), (0, 2));
    }
}
