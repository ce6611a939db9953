//! Dense matrices over extended-range scalars.
//!
//! Everything downstream works with small dense matrices (state dimensions
//! are in the single or low double digits) whose entries can span thousands
//! of binades inside a single matrix, e.g. an evolution product with one
//! direction contracting like 2^-n^2 while another grows like 4^n. Entries
//! are therefore `ScaledF64`, and induced sup / one norms are computed
//! directly from rows and columns. The induced two norm needs singular
//! values and lives with the SVD code.

use std::fmt;
use std::ops::Index;
use std::str::FromStr;

use crate::numerics::scaled::ScaledF64;

/// Which vector norm induces the operator norms used in a run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NormKind {
    /// Max absolute entry; induced matrix norm is the max absolute row sum.
    Sup,
    /// Sum of absolute entries; induced matrix norm is the max column sum.
    One,
    /// Euclidean norm; induced matrix norm is the largest singular value.
    Two,
}

impl NormKind {
    pub fn as_str(self) -> &'static str {
        match self {
            NormKind::Sup => "sup",
            NormKind::One => "one",
            NormKind::Two => "two",
        }
    }
}

impl fmt::Display for NormKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for NormKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "sup" | "inf" | "max" => Ok(NormKind::Sup),
            "one" | "1" => Ok(NormKind::One),
            "two" | "2" | "euclid" => Ok(NormKind::Two),
            other => Err(format!("unknown norm {other:?}; expected sup, one, or two")),
        }
    }
}

/// Row-major dense matrix of `ScaledF64` entries.
#[derive(Clone, Debug, PartialEq)]
pub struct ScaledMatrix {
    rows: usize,
    cols: usize,
    data: Vec<ScaledF64>,
}

impl ScaledMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![ScaledF64::ZERO; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, ScaledF64::ONE);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> ScaledF64) -> Self {
        let data = (0..rows * cols).map(|k| f(k / cols, k % cols)).collect();
        Self { rows, cols, data }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        Self::from_fn(r, c, |i, j| ScaledF64::from_f64(rows[i][j]))
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> ScaledF64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: ScaledF64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn col(&self, j: usize) -> Vec<ScaledF64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn set_col(&mut self, j: usize, v: &[ScaledF64]) {
        assert_eq!(v.len(), self.rows);
        for (i, &x) in v.iter().enumerate() {
            self.set(i, j, x);
        }
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i))
    }

    pub fn matmul(&self, rhs: &Self) -> Self {
        assert_eq!(self.cols, rhs.rows, "inner dimensions differ");
        Self::from_fn(self.rows, rhs.cols, |i, j| {
            let mut acc = ScaledF64::ZERO;
            for k in 0..self.cols {
                acc = acc + self.get(i, k) * rhs.get(k, j);
            }
            acc
        })
    }

    pub fn matvec(&self, v: &[ScaledF64]) -> Vec<ScaledF64> {
        assert_eq!(self.cols, v.len(), "vector length differs from columns");
        (0..self.rows)
            .map(|i| {
                let mut acc = ScaledF64::ZERO;
                for k in 0..self.cols {
                    acc = acc + self.get(i, k) * v[k];
                }
                acc
            })
            .collect()
    }

    pub fn add(&self, rhs: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Self::from_fn(self.rows, self.cols, |i, j| self.get(i, j) + rhs.get(i, j))
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Self::from_fn(self.rows, self.cols, |i, j| self.get(i, j) - rhs.get(i, j))
    }

    pub fn scale(&self, s: ScaledF64) -> Self {
        Self::from_fn(self.rows, self.cols, |i, j| self.get(i, j) * s)
    }

    pub fn max_abs_entry(&self) -> ScaledF64 {
        self.data.iter().fold(ScaledF64::ZERO, |m, x| m.max(x.abs()))
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    /// Induced sup norm: max over rows of the absolute row sum.
    pub fn sup_norm(&self) -> ScaledF64 {
        (0..self.rows)
            .map(|i| {
                let mut s = ScaledF64::ZERO;
                for j in 0..self.cols {
                    s = s + self.get(i, j).abs();
                }
                s
            })
            .fold(ScaledF64::ZERO, ScaledF64::max)
    }

    /// Induced one norm: max over columns of the absolute column sum.
    pub fn one_norm(&self) -> ScaledF64 {
        (0..self.cols)
            .map(|j| {
                let mut s = ScaledF64::ZERO;
                for i in 0..self.rows {
                    s = s + self.get(i, j).abs();
                }
                s
            })
            .fold(ScaledF64::ZERO, ScaledF64::max)
    }

    /// Inverse by Gauss-Jordan elimination with partial pivoting, or None
    /// when a pivot vanishes exactly.
    pub fn inverse(&self) -> Option<Self> {
        assert!(self.is_square(), "inverse of a non-square matrix");
        let n = self.rows;
        let mut a = self.clone();
        let mut inv = Self::identity(n);
        for col in 0..n {
            let pivot_row = (col..n)
                .max_by(|&p, &q| a.get(p, col).abs().cmp_value(&a.get(q, col).abs()))
                .unwrap();
            if a.get(pivot_row, col).is_zero() {
                return None;
            }
            if pivot_row != col {
                for j in 0..n {
                    let (x, y) = (a.get(col, j), a.get(pivot_row, j));
                    a.set(col, j, y);
                    a.set(pivot_row, j, x);
                    let (x, y) = (inv.get(col, j), inv.get(pivot_row, j));
                    inv.set(col, j, y);
                    inv.set(pivot_row, j, x);
                }
            }
            let piv = a.get(col, col);
            for j in 0..n {
                a.set(col, j, a.get(col, j) / piv);
                inv.set(col, j, inv.get(col, j) / piv);
            }
            for i in 0..n {
                if i == col {
                    continue;
                }
                let factor = a.get(i, col);
                if factor.is_zero() {
                    continue;
                }
                for j in 0..n {
                    a.set(i, j, a.get(i, j) - factor * a.get(col, j));
                    inv.set(i, j, inv.get(i, j) - factor * inv.get(col, j));
                }
            }
        }
        Some(inv)
    }

    pub fn to_f64_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows).map(|i| (0..self.cols).map(|j| self.get(i, j).to_f64()).collect()).collect()
    }
}

impl Index<(usize, usize)> for ScaledMatrix {
    type Output = ScaledF64;

    fn index(&self, (i, j): (usize, usize)) -> &ScaledF64 {
        &self.data[i * self.cols + j]
    }
}

/// Inner product of two vectors.
pub fn dot(a: &[ScaledF64], b: &[ScaledF64]) -> ScaledF64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).fold(ScaledF64::ZERO, |acc, (&x, &y)| acc + x * y)
}

/// Vector norm of the chosen kind.
pub fn vector_norm(v: &[ScaledF64], kind: NormKind) -> ScaledF64 {
    match kind {
        NormKind::Sup => v.iter().fold(ScaledF64::ZERO, |m, x| m.max(x.abs())),
        NormKind::One => v.iter().fold(ScaledF64::ZERO, |s, &x| s + x.abs()),
        NormKind::Two => dot(v, v).sqrt(),
    }
}
