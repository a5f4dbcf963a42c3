//! Dense rational vectors, matrices and exact linear-span computations.

use std::fmt;
use std::ops::{Index, IndexMut};

use serde::{Deserialize, Serialize};

use super::Rational;

/// A dense vector of rationals. Serializes as a JSON array of `"p/q"` strings.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RationalVector(Vec<Rational>);

impl RationalVector {
    pub fn new(entries: Vec<Rational>) -> Self {
        RationalVector(entries)
    }

    pub fn zeros(dim: usize) -> Self {
        RationalVector(vec![Rational::zero(); dim])
    }

    pub fn from_integers(entries: &[i64]) -> Self {
        RationalVector(entries.iter().map(|&n| Rational::from_integer(n)).collect())
    }

    pub fn unit(dim: usize, axis: usize) -> Self {
        let mut v = Self::zeros(dim);
        v.0[axis] = Rational::one();
        v
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[Rational] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<Rational> {
        self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Rational> {
        self.0.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(Rational::is_zero)
    }

    /// Scalar product. Panics on dimension mismatch.
    pub fn dot(&self, other: &RationalVector) -> Rational {
        assert_eq!(self.dim(), other.dim(), "dimension mismatch in dot product");
        let mut acc = Rational::zero();
        for (a, b) in self.0.iter().zip(&other.0) {
            acc.add_product(a, b);
        }
        acc
    }

    pub fn add(&self, other: &RationalVector) -> RationalVector {
        assert_eq!(self.dim(), other.dim(), "dimension mismatch");
        RationalVector(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &RationalVector) -> RationalVector {
        assert_eq!(self.dim(), other.dim(), "dimension mismatch");
        RationalVector(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn scale(&self, c: &Rational) -> RationalVector {
        RationalVector(self.0.iter().map(|a| a * c).collect())
    }

    /// `self += c * other`
    pub fn axpy(&mut self, c: &Rational, other: &RationalVector) {
        assert_eq!(self.dim(), other.dim(), "dimension mismatch");
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            a.add_product(c, b);
        }
    }

    /// Largest absolute entry; zero for the empty vector.
    pub fn max_norm(&self) -> Rational {
        self.0.iter().map(Rational::abs).max().unwrap_or_else(Rational::zero)
    }
}

impl Index<usize> for RationalVector {
    type Output = Rational;
    fn index(&self, i: usize) -> &Rational {
        &self.0[i]
    }
}

impl IndexMut<usize> for RationalVector {
    fn index_mut(&mut self, i: usize) -> &mut Rational {
        &mut self.0[i]
    }
}

impl From<Vec<Rational>> for RationalVector {
    fn from(v: Vec<Rational>) -> Self {
        RationalVector(v)
    }
}

impl FromIterator<Rational> for RationalVector {
    fn from_iter<I: IntoIterator<Item = Rational>>(iter: I) -> Self {
        RationalVector(iter.into_iter().collect())
    }
}

impl<'a> IntoIterator for &'a RationalVector {
    type Item = &'a Rational;
    type IntoIter = std::slice::Iter<'a, Rational>;
    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

impl fmt::Debug for RationalVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.0.iter()).finish()
    }
}

impl fmt::Display for RationalVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, ")")
    }
}

/// Dense row-major rational matrix.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct RationalMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Rational>,
}

impl RationalMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        RationalMatrix {
            rows,
            cols,
            data: vec![Rational::zero(); rows * cols],
        }
    }

    /// Builds a matrix from rows; `None` if the rows have differing lengths.
    pub fn from_rows(rows: Vec<RationalVector>, cols: usize) -> Option<Self> {
        if rows.iter().any(|r| r.dim() != cols) {
            return None;
        }
        let n = rows.len();
        let data = rows.into_iter().flat_map(RationalVector::into_inner).collect();
        Some(RationalMatrix { rows: n, cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[Rational] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn get(&self, i: usize, j: usize) -> &Rational {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, value: Rational) {
        self.data[i * self.cols + j] = value;
    }

    pub fn mul_vec(&self, x: &RationalVector) -> RationalVector {
        assert_eq!(x.dim(), self.cols, "dimension mismatch");
        (0..self.rows)
            .map(|i| {
                let mut acc = Rational::zero();
                for (a, b) in self.row(i).iter().zip(x.iter()) {
                    acc.add_product(a, b);
                }
                acc
            })
            .collect()
    }

    /// `yᵀ A`.
    pub fn vec_mul(&self, y: &RationalVector) -> RationalVector {
        assert_eq!(y.dim(), self.rows, "dimension mismatch");
        let mut out = RationalVector::zeros(self.cols);
        for (i, yi) in y.iter().enumerate() {
            if yi.is_zero() {
                continue;
            }
            for (j, a) in self.row(i).iter().enumerate() {
                out[j].add_product(yi, a);
            }
        }
        out
    }
}

/// Reduced row echelon form in place; returns pivot columns.
/// Pivots are taken at the leftmost nonzero column, first eligible row.
fn row_reduce(rows: &mut Vec<RationalVector>) -> Vec<usize> {
    let ncols = rows.first().map_or(0, RationalVector::dim);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else {
            continue;
        };
        rows.swap(r, p);
        let inv = rows[r][c].recip();
        rows[r] = rows[r].scale(&inv);
        let pivot_row = rows[r].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i != r && !row[c].is_zero() {
                let factor = -&row[c];
                row.axpy(&factor, &pivot_row);
            }
        }
        pivots.push(c);
        r += 1;
        if r == rows.len() {
            break;
        }
    }
    rows.truncate(r);
    pivots
}

/// A basis of the linear span of `points`.
///
/// The basis is the set of nonzero rows of the reduced row echelon form, so it
/// depends only on the subspace, not on the order or multiplicity of inputs.
pub fn span_basis(points: &[RationalVector]) -> Vec<RationalVector> {
    if points.is_empty() {
        return Vec::new();
    }
    let dim = points[0].dim();
    assert!(points.iter().all(|p| p.dim() == dim), "points must share a dimension");
    let mut rows = points.to_vec();
    row_reduce(&mut rows);
    rows
}

/// Whether `v` is an exact rational combination of `basis`.
pub fn in_span(v: &RationalVector, basis: &[RationalVector]) -> bool {
    if v.is_zero() {
        return true;
    }
    let mut rows = basis.to_vec();
    let before = row_reduce(&mut rows).len();
    rows.push(v.clone());
    row_reduce(&mut rows).len() == before
}

/// Rank of a list of vectors.
pub fn rank(points: &[RationalVector]) -> usize {
    span_basis(points).len()
}
