//! Brute-force Abelian power detection, independent of the template machinery.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::words::{parikh_of, Word};

/// `k` consecutive blocks of length `block_length` starting at `position`, pairwise anagrams.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PowerOccurrence {
    pub position: usize,
    pub block_length: usize,
    pub k: usize,
}

impl PowerOccurrence {
    pub fn len(&self) -> usize {
        self.block_length * self.k
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// The blocks `X_1, ..., X_k` as words. Panics if the occurrence does not fit in `w`.
    pub fn blocks(&self, w: &Word) -> Vec<Word> {
        (0..self.k)
            .map(|i| w.factor(self.position + i * self.block_length, self.block_length))
            .collect()
    }

    /// Re-checks the occurrence against `w`.
    pub fn verify(&self, w: &Word) -> bool {
        if self.block_length == 0 || self.k < 2 || self.position + self.len() > w.len() {
            return false;
        }
        let m = w.0.iter().map(|l| l.0 as usize).max().unwrap_or(0);
        let blocks = self.blocks(w);
        let first = parikh_of(&blocks[0].0, m);
        blocks.iter().all(|b| parikh_of(&b.0, m) == first)
    }
}

/// Least Abelian `k`-power in `w`, ordered by position and then block length.
///
/// Tests every `(position, ℓ)` with `position + kℓ ≤ |w|` against prefix Parikh sums.
pub fn find_abelian_power(w: &Word, k: usize) -> Result<Option<PowerOccurrence>> {
    if k < 2 {
        return Err(Error::InvalidK(k));
    }
    let n = w.len();
    let m = w.0.iter().map(|l| l.0 as usize).max().unwrap_or(0);
    // column-major per letter so each comparison scans one contiguous row
    let mut sums = vec![vec![0u32; n + 1]; m];
    for (i, l) in w.0.iter().enumerate() {
        for (j, row) in sums.iter_mut().enumerate() {
            row[i + 1] = row[i] + u32::from(l.index() == j);
        }
    }
    for position in 0..n {
        let max_len = (n - position) / k;
        'len: for block_length in 1..=max_len {
            for row in &sums {
                let first = row[position + block_length] - row[position];
                for i in 1..k {
                    let s = position + i * block_length;
                    if row[s + block_length] - row[s] != first {
                        continue 'len;
                    }
                }
            }
            return Ok(Some(PowerOccurrence { position, block_length, k }));
        }
    }
    Ok(None)
}
