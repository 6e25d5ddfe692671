//! Exact integer and rational matrix computations for the frequency matrix.
//!
//! Everything that gates the decision (determinant, inverse, the contraction test and integral
//! row solves) is computed with arbitrary-precision integers. Only
//! [`FrequencyMatrix::inverse_norm_estimate`] uses floating point, and it is reporting only.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::words::{parikh, Morphism, ParikhVector};

/// Square matrix of letter counts; entry `(i, j)` is `|μ(i)|_j`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrequencyMatrix {
    rows: Vec<Vec<i64>>,
}

/// Square matrix of exact rationals.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RationalMatrix {
    rows: Vec<Vec<BigRational>>,
}

/// Exact certificate for `|M⁻¹| < 1`: the leading principal minors of `MᵀM − I`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ContractionCertificate {
    pub minors: Vec<BigInt>,
}

impl ContractionCertificate {
    /// Sylvester's criterion: positive definite iff every leading minor is positive.
    pub fn holds(&self) -> bool {
        self.minors.iter().all(Signed::is_positive)
    }
}

fn bareiss_det(mut a: Vec<Vec<BigInt>>) -> BigInt {
    let n = a.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if a[k][k].is_zero() {
            match (k + 1..n).find(|&i| !a[i][k].is_zero()) {
                Some(i) => {
                    a.swap(k, i);
                    sign = -sign;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = &a[i][j] * &a[k][k] - &a[i][k] * &a[k][j];
                a[i][j] = v / &prev;
            }
        }
        prev = a[k][k].clone();
    }
    sign * &a[n - 1][n - 1]
}

impl FrequencyMatrix {
    /// Row `i` is the Parikh vector of `μ(i)`.
    pub fn of(mu: &Morphism) -> Self {
        let m = mu.m();
        FrequencyMatrix {
            rows: mu.images().iter().map(|img| parikh(img, m).0).collect(),
        }
    }

    /// Builds a matrix from explicit rows. Panics if the rows are not square.
    pub fn from_rows(rows: Vec<Vec<i64>>) -> Self {
        let n = rows.len();
        assert!(rows.iter().all(|r| r.len() == n), "matrix must be square");
        FrequencyMatrix { rows }
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[Vec<i64>] {
        &self.rows
    }

    fn big(&self) -> Vec<Vec<BigInt>> {
        self.rows
            .iter()
            .map(|r| r.iter().map(|&x| BigInt::from(x)).collect())
            .collect()
    }

    pub fn det(&self) -> BigInt {
        bareiss_det(self.big())
    }

    /// `MᵀM` computed exactly.
    pub fn gram(&self) -> Vec<Vec<BigInt>> {
        let n = self.dim();
        let mut g = vec![vec![BigInt::zero(); n]; n];
        for (i, gi) in g.iter_mut().enumerate() {
            for (j, gij) in gi.iter_mut().enumerate() {
                let mut s = BigInt::zero();
                for r in &self.rows {
                    s += BigInt::from(r[i]) * BigInt::from(r[j]);
                }
                *gij = s;
            }
        }
        g
    }

    /// Leading principal minors of `MᵀM − I`.
    pub fn contraction_certificate(&self) -> Result<ContractionCertificate> {
        if self.det().is_zero() {
            return Err(Error::SingularMatrix);
        }
        let mut g = self.gram();
        for (i, row) in g.iter_mut().enumerate() {
            row[i] -= 1;
        }
        let minors = (1..=self.dim())
            .map(|k| bareiss_det(g[..k].iter().map(|r| r[..k].to_vec()).collect()))
            .collect();
        Ok(ContractionCertificate { minors })
    }

    /// Exact test of `|M⁻¹| < 1` for the induced Euclidean norm.
    ///
    /// `|M⁻¹| < 1` iff the least singular value of `M` exceeds 1 iff `MᵀM − I` is positive
    /// definite. Equality (`σ_min = 1`) is rejected.
    pub fn inverse_norm_lt_one(&self) -> Result<bool> {
        Ok(self.contraction_certificate()?.holds())
    }

    /// Floating estimate of `|M⁻¹| = 1/√λ_min(MᵀM)`.
    ///
    /// `λ_min` is located by bisection on `λ`, using a Cholesky factorization of `MᵀM − λI` as
    /// the positive-definiteness test.
    pub fn inverse_norm_estimate(&self) -> Result<f64> {
        if self.det().is_zero() {
            return Err(Error::SingularMatrix);
        }
        let n = self.dim();
        let g: Vec<Vec<f64>> = self
            .gram()
            .iter()
            .map(|r| r.iter().map(|x| x.to_f64().unwrap_or(f64::INFINITY)).collect())
            .collect();
        let mut lo = 0.0f64;
        // λ_min never exceeds the smallest diagonal entry.
        let mut hi = (0..n).map(|i| g[i][i]).fold(f64::INFINITY, f64::min);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if cholesky_positive(&g, mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(1.0 / (0.5 * (lo + hi)).sqrt())
    }

    /// Exact rational inverse.
    pub fn inverse(&self) -> Result<RationalMatrix> {
        let n = self.dim();
        let mut a: Vec<Vec<BigRational>> = self
            .rows
            .iter()
            .map(|r| r.iter().map(|&x| BigRational::from_integer(x.into())).collect())
            .collect();
        let mut inv: Vec<Vec<BigRational>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| if i == j { BigRational::one() } else { BigRational::zero() })
                    .collect()
            })
            .collect();
        for col in 0..n {
            let pivot = (col..n)
                .find(|&r| !a[r][col].is_zero())
                .ok_or(Error::SingularMatrix)?;
            a.swap(col, pivot);
            inv.swap(col, pivot);
            let p = a[col][col].clone();
            for j in 0..n {
                a[col][j] = &a[col][j] / &p;
                inv[col][j] = &inv[col][j] / &p;
            }
            for r in 0..n {
                if r == col || a[r][col].is_zero() {
                    continue;
                }
                let f = a[r][col].clone();
                for j in 0..n {
                    let da = &f * &a[col][j];
                    a[r][j] -= da;
                    let di = &f * &inv[col][j];
                    inv[r][j] -= di;
                }
            }
        }
        Ok(RationalMatrix { rows: inv })
    }

    /// The unique row `D` with `D·M = v`, if it is integral.
    pub fn solve_row_integer(&self, v: &ParikhVector) -> Result<Option<ParikhVector>> {
        Ok(RowSolver::new(self)?.solve(v))
    }
}

fn cholesky_positive(g: &[Vec<f64>], shift: f64) -> bool {
    let n = g.len();
    let mut l = vec![vec![0.0f64; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = g[i][j] - if i == j { shift } else { 0.0 };
            for k in 0..j {
                s -= l[i][k] * l[j][k];
            }
            if i == j {
                if s <= 0.0 {
                    return false;
                }
                l[i][i] = s.sqrt();
            } else {
                l[i][j] = s / l[j][j];
            }
        }
    }
    true
}

impl fmt::Display for FrequencyMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<String> = self
            .rows
            .iter()
            .map(|r| {
                let cells: Vec<String> = r.iter().map(i64::to_string).collect();
                format!("[{}]", cells.join(","))
            })
            .collect();
        write!(f, "[{}]", rows.join(","))
    }
}

impl RationalMatrix {
    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn get(&self, i: usize, j: usize) -> &BigRational {
        &self.rows[i][j]
    }

    pub fn rows(&self) -> &[Vec<BigRational>] {
        &self.rows
    }

    /// `self · rhs`.
    pub fn mul_int(&self, rhs: &FrequencyMatrix) -> RationalMatrix {
        let n = self.dim();
        let rows = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        (0..n).fold(BigRational::zero(), |acc, k| {
                            acc + &self.rows[i][k] * BigRational::from_integer(rhs.rows[k][j].into())
                        })
                    })
                    .collect()
            })
            .collect();
        RationalMatrix { rows }
    }

    /// `lhs · self`.
    pub fn int_mul(&self, lhs: &FrequencyMatrix) -> RationalMatrix {
        let n = self.dim();
        let rows = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        (0..n).fold(BigRational::zero(), |acc, k| {
                            acc + BigRational::from_integer(lhs.rows[i][k].into()) * &self.rows[k][j]
                        })
                    })
                    .collect()
            })
            .collect();
        RationalMatrix { rows }
    }

    pub fn is_identity(&self) -> bool {
        self.rows.iter().enumerate().all(|(i, r)| {
            r.iter()
                .enumerate()
                .all(|(j, x)| if i == j { x.is_one() } else { x.is_zero() })
        })
    }
}

/// Solves `D·M = v` for many right-hand sides, as `D = v·adj(M) / det(M)`.
///
/// Uses checked `i128` arithmetic when the adjugate fits and falls back to big integers on
/// overflow, so results are exact either way.
#[derive(Clone, Debug)]
pub struct RowSolver {
    det: BigInt,
    adj: Vec<Vec<BigInt>>,
    small: Option<(i128, Vec<Vec<i128>>)>,
}

impl RowSolver {
    pub fn new(mat: &FrequencyMatrix) -> Result<Self> {
        let det = mat.det();
        if det.is_zero() {
            return Err(Error::SingularMatrix);
        }
        let inv = mat.inverse()?;
        let adj: Vec<Vec<BigInt>> = inv
            .rows
            .iter()
            .map(|r| {
                r.iter()
                    .map(|x| {
                        let y = x * BigRational::from_integer(det.clone());
                        debug_assert!(y.is_integer());
                        y.to_integer()
                    })
                    .collect()
            })
            .collect();
        let small = det.to_i128().and_then(|d| {
            adj.iter()
                .map(|r| r.iter().map(ToPrimitive::to_i128).collect::<Option<Vec<_>>>())
                .collect::<Option<Vec<_>>>()
                .map(|a| (d, a))
        });
        Ok(RowSolver { det, adj, small })
    }

    pub fn det(&self) -> &BigInt {
        &self.det
    }

    pub fn solve(&self, v: &ParikhVector) -> Option<ParikhVector> {
        if let Some((det, adj)) = &self.small {
            if let Some(res) = solve_small(*det, adj, v) {
                return res;
            }
        }
        self.solve_big(v)
    }

    fn solve_big(&self, v: &ParikhVector) -> Option<ParikhVector> {
        let n = self.adj.len();
        let mut out = Vec::with_capacity(n);
        for j in 0..n {
            let mut s = BigInt::zero();
            for (i, &vi) in v.0.iter().enumerate() {
                if vi != 0 {
                    s += BigInt::from(vi) * &self.adj[i][j];
                }
            }
            let (q, r) = s.div_rem(&self.det);
            if !r.is_zero() {
                return None;
            }
            out.push(q.to_i64()?);
        }
        Some(ParikhVector(out))
    }
}

/// `None` on overflow; `Some(None)` when the solution is not integral.
fn solve_small(det: i128, adj: &[Vec<i128>], v: &ParikhVector) -> Option<Option<ParikhVector>> {
    let n = adj.len();
    let mut out = Vec::with_capacity(n);
    for j in 0..n {
        let mut s: i128 = 0;
        for (i, &vi) in v.0.iter().enumerate() {
            s = s.checked_add((vi as i128).checked_mul(adj[i][j])?)?;
        }
        if s % det != 0 {
            return Some(None);
        }
        out.push(i64::try_from(s / det).ok()?);
    }
    Some(Some(ParikhVector(out)))
}
