//! Letters, words, Parikh vectors and morphisms over the alphabet `{1, ..., m}`.

use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::ops::{Add, AddAssign, Index, Sub, SubAssign};

use serde::{Deserialize, Serialize};

/// A letter of the alphabet `{1, ..., m}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Letter(pub u32);

impl Letter {
    /// Zero-based position of this letter in a Parikh vector.
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize - 1
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A finite word, possibly empty.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Word(pub Vec<Letter>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    /// Returns `true` when every letter lies in `1..=m`.
    pub fn is_over(&self, m: usize) -> bool {
        self.0.iter().all(|l| l.0 >= 1 && (l.0 as usize) <= m)
    }

    pub fn factor(&self, start: usize, len: usize) -> Word {
        Word(self.0[start..start + len].to_vec())
    }
}

impl From<Vec<u32>> for Word {
    fn from(v: Vec<u32>) -> Self {
        Word(v.into_iter().map(Letter).collect())
    }
}

impl From<&[u32]> for Word {
    fn from(v: &[u32]) -> Self {
        Word(v.iter().copied().map(Letter).collect())
    }
}

/// Parses a compact digit string such as `"1123"`; only usable for alphabets of size at most 9.
impl std::str::FromStr for Word {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.chars()
            .map(|c| match c.to_digit(10) {
                Some(d) if d > 0 => Ok(Letter(d)),
                _ => Err(format!("invalid letter {c:?}")),
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Word)
    }
}

impl fmt::Display for Word {
    /// Letters are concatenated when they are all single digits, space separated otherwise.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "ε");
        }
        let compact = self.0.iter().all(|l| l.0 < 10);
        for (i, l) in self.0.iter().enumerate() {
            if i > 0 && !compact {
                write!(f, " ")?;
            }
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

/// Integer row vector of letter counts, or a difference of two such vectors.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ParikhVector(pub Vec<i64>);

impl ParikhVector {
    pub fn zero(m: usize) -> Self {
        ParikhVector(vec![0; m])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&x| x == 0)
    }

    /// Sum of the entries; for a Parikh vector this is the word length.
    pub fn total(&self) -> i64 {
        self.0.iter().sum()
    }

    /// Squared Euclidean norm.
    pub fn norm_sq(&self) -> i64 {
        self.0.iter().map(|x| x * x).sum()
    }

    pub fn norm(&self) -> f64 {
        (self.norm_sq() as f64).sqrt()
    }
}

impl Index<usize> for ParikhVector {
    type Output = i64;
    fn index(&self, i: usize) -> &i64 {
        &self.0[i]
    }
}

impl AddAssign<&ParikhVector> for ParikhVector {
    fn add_assign(&mut self, rhs: &ParikhVector) {
        debug_assert_eq!(self.dim(), rhs.dim());
        for (a, b) in self.0.iter_mut().zip(&rhs.0) {
            *a += b;
        }
    }
}

impl SubAssign<&ParikhVector> for ParikhVector {
    fn sub_assign(&mut self, rhs: &ParikhVector) {
        debug_assert_eq!(self.dim(), rhs.dim());
        for (a, b) in self.0.iter_mut().zip(&rhs.0) {
            *a -= b;
        }
    }
}

impl Add for &ParikhVector {
    type Output = ParikhVector;
    fn add(self, rhs: &ParikhVector) -> ParikhVector {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Sub for &ParikhVector {
    type Output = ParikhVector;
    fn sub(self, rhs: &ParikhVector) -> ParikhVector {
        let mut out = self.clone();
        out -= rhs;
        out
    }
}

impl fmt::Display for ParikhVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, ")")
    }
}

/// Parikh vector of `letters` over an alphabet of size `m`.
pub fn parikh_of(letters: &[Letter], m: usize) -> ParikhVector {
    let mut counts = vec![0i64; m];
    for l in letters {
        counts[l.index()] += 1;
    }
    ParikhVector(counts)
}

/// Parikh vector of `w` over an alphabet of size `m`.
pub fn parikh(w: &Word, m: usize) -> ParikhVector {
    parikh_of(&w.0, m)
}

/// A morphism on `{1, ..., m}`, given by the image of each letter.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Morphism {
    images: Vec<Word>,
}

/// Outcome of the structural checks on a morphism.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    /// `μ(1) = 1x` with `x` nonempty.
    pub prolongable_on_one: bool,
    /// `|μ(a)| ≥ 2` for every letter.
    pub images_expand: bool,
    /// Letters whose image is shorter than 2.
    pub short_images: Vec<Letter>,
    pub letters_in_range: bool,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.prolongable_on_one && self.images_expand && self.letters_in_range
    }
}

impl Morphism {
    /// Builds a morphism from the images of `1, ..., m` (in that order).
    ///
    /// No checks are made here; use [`Morphism::validate`].
    pub fn new(images: Vec<Word>) -> Self {
        Morphism { images }
    }

    /// Convenience constructor from raw letter values.
    pub fn from_u32(images: &[&[u32]]) -> Self {
        Morphism::new(images.iter().map(|img| Word::from(*img)).collect())
    }

    /// Alphabet size.
    pub fn m(&self) -> usize {
        self.images.len()
    }

    pub fn images(&self) -> &[Word] {
        &self.images
    }

    pub fn image(&self, a: Letter) -> &Word {
        &self.images[a.index()]
    }

    pub fn validate(&self) -> ValidationReport {
        let m = self.m();
        let prolongable_on_one = self
            .images
            .first()
            .is_some_and(|img| img.len() >= 2 && img.0[0] == Letter(1));
        let short_images: Vec<Letter> = self
            .images
            .iter()
            .enumerate()
            .filter(|(_, img)| img.len() < 2)
            .map(|(i, _)| Letter(i as u32 + 1))
            .collect();
        ValidationReport {
            prolongable_on_one,
            images_expand: short_images.is_empty() && m > 0,
            short_images,
            letters_in_range: self.images.iter().all(|img| img.is_over(m)),
        }
    }

    /// `N`, the length of the longest image.
    pub fn max_image_length(&self) -> usize {
        self.images.iter().map(Word::len).max().unwrap_or(0)
    }

    pub fn apply(&self, w: &Word) -> Word {
        Word(self.apply_letters(&w.0))
    }

    pub fn apply_letters(&self, w: &[Letter]) -> Vec<Letter> {
        let mut out = Vec::with_capacity(w.len() * self.max_image_length());
        for &a in w {
            out.extend_from_slice(&self.image(a).0);
        }
        out
    }

    /// The first `n` letters of the fixed point `μ^ω(1)`.
    pub fn fixed_point_prefix(&self, n: usize) -> Word {
        let mut cur = vec![Letter(1)];
        while cur.len() < n {
            // μ^i(1) is a prefix of μ^{i+1}(1), so only the letters needed to reach n are expanded.
            let mut next = Vec::with_capacity(n.max(cur.len() * 2));
            for &a in &cur {
                next.extend_from_slice(&self.image(a).0);
                if next.len() >= n {
                    break;
                }
            }
            cur = next;
        }
        cur.truncate(n);
        Word(cur)
    }

    /// Distinct factors of `μ^ω(1)` of length exactly `len`, in canonical order.
    ///
    /// Seeds with the length-`len` factors of the first iterate `μ^n(1)` that is at least `len`
    /// long, then closes under `w ↦ {length-len factors of μ(w)}`. Every length-`len` factor of
    /// `μ^{n+1}(1)` lies inside the image of some length-`len` factor of `μ^n(1)`, because images
    /// have length at least 2.
    pub fn factors_of_length(&self, len: usize) -> BTreeSet<Word> {
        if len == 0 {
            return BTreeSet::from([Word::empty()]);
        }
        let mut seed = vec![Letter(1)];
        while seed.len() < len {
            seed = self.apply_letters(&seed);
        }
        let mut seen: HashSet<Vec<Letter>> = HashSet::new();
        let mut work: Vec<Vec<Letter>> = Vec::new();
        for f in seed.windows(len) {
            if seen.insert(f.to_vec()) {
                work.push(f.to_vec());
            }
        }
        while let Some(w) = work.pop() {
            let img = self.apply_letters(&w);
            for f in img.windows(len) {
                if !seen.contains(f) {
                    seen.insert(f.to_vec());
                    work.push(f.to_vec());
                }
            }
        }
        seen.into_iter().map(Word).collect()
    }

    /// All factors of `μ^ω(1)` of length `1..=max_len`, in canonical order.
    pub fn factor_set(&self, max_len: usize) -> BTreeSet<Word> {
        let mut out = BTreeSet::new();
        for top in self.factors_of_length(max_len) {
            for len in 1..=top.len() {
                for f in top.0.windows(len) {
                    out.insert(Word(f.to_vec()));
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn dekking() -> Morphism {
        Morphism::from_u32(&[&[1, 1, 2, 3], &[1, 3, 3], &[2, 2, 3]])
    }

    fn w(s: &str) -> Word {
        s.parse().unwrap()
    }

    #[test]
    fn parikh_examples() {
        assert_eq!(parikh(&w("1123"), 3), ParikhVector(vec![2, 1, 1]));
        assert_eq!(parikh(&Word::empty(), 3), ParikhVector(vec![0, 0, 0]));
        assert_eq!(parikh(&w("332211"), 3), ParikhVector(vec![2, 2, 2]));
    }

    #[test]
    fn apply_examples() {
        let mu = dekking();
        assert_eq!(mu.apply(&w("12")), w("1123133"));
        assert_eq!(mu.apply(&Word::empty()), Word::empty());
        assert_eq!(mu.apply(&w("31")), w("2231123"));
    }

    #[test]
    fn validate_examples() {
        assert!(dekking().validate().passed());
        let r = Morphism::from_u32(&[&[1, 2], &[1]]).validate();
        assert!(!r.images_expand);
        assert_eq!(r.short_images, vec![Letter(2)]);
        assert!(r.prolongable_on_one);
        let r = Morphism::from_u32(&[&[2, 1], &[1, 2]]).validate();
        assert!(!r.prolongable_on_one);
        assert!(r.images_expand);
        let r = Morphism::from_u32(&[&[1, 3], &[2, 1]]).validate();
        assert!(!r.letters_in_range);
    }

    #[test]
    fn fixed_point_prefix_examples() {
        let mu = dekking();
        assert_eq!(mu.fixed_point_prefix(4), w("1123"));
        assert_eq!(mu.fixed_point_prefix(1), w("1"));
        assert_eq!(mu.fixed_point_prefix(8), w("11231123"));
        assert_eq!(mu.fixed_point_prefix(0), Word::empty());
    }

    #[test]
    fn max_image_length_examples() {
        assert_eq!(dekking().max_image_length(), 4);
        assert_eq!(Morphism::from_u32(&[&[1, 1, 2, 1], &[2, 2, 1]]).max_image_length(), 4);
        assert_eq!(Morphism::from_u32(&[&[1, 2], &[2, 1]]).max_image_length(), 2);
    }

    #[test]
    fn factor_set_examples() {
        let mu = dekking();
        let f1 = mu.factor_set(1);
        assert_eq!(f1, BTreeSet::from([w("1"), w("2"), w("3")]));
        let f2 = mu.factor_set(2);
        assert!(f2.contains(&w("33")));
        assert!(!f2.contains(&w("21")));
    }

    fn prefix_factors(prefix: &Word, max_len: usize) -> BTreeSet<Word> {
        let mut out = BTreeSet::new();
        for len in 1..=max_len {
            for f in prefix.0.windows(len) {
                out.insert(Word(f.to_vec()));
            }
        }
        out
    }

    #[test]
    fn factor_set_matches_long_prefix() {
        let mu = dekking();
        let prefix = mu.fixed_point_prefix(100_000);
        for len in [1, 2, 5, 12] {
            let closure = mu.factor_set(len);
            assert_eq!(closure, prefix_factors(&prefix, len), "length {len}");
        }
    }

    #[test]
    fn factor_set_single_letter_alphabet() {
        let mu = Morphism::from_u32(&[&[1, 1]]);
        assert_eq!(mu.factor_set(3), BTreeSet::from([w("1"), w("11"), w("111")]));
    }
}
