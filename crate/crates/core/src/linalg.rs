//! Exact linear algebra over ℚ: an incremental row-echelon structure that
//! remembers how each pivot row was built from the inserted columns, and a
//! fraction-free (Bareiss) rank computation used as an independent check.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::algebra::{DiagonalPolynomial, Rational};
use crate::error::{Error, Result};
use crate::index_set::IndexSet;

/// Largest graded piece the coordinate maps agree to materialize.
pub const MAX_GRADED_DIMENSION: usize = 200_000;

/// The exponent vectors of the degree-`d` piece of `ℚ[dᵢ : i ∈ X]`, in a
/// fixed (descending lexicographic) order, with coordinate maps.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GradedBasis {
    /// Index set of the diagonal generators.
    pub x: IndexSet,
    /// Degree of the piece.
    pub degree: u32,
    /// Exponent vectors, one per coordinate.
    pub monomials: Vec<Vec<u32>>,
    #[serde(skip)]
    index: HashMap<Vec<u32>, usize>,
}

/// Number of exponent vectors of length `n` and total degree `d`.
pub fn graded_dimension(n: usize, d: u32) -> u128 {
    if n == 0 {
        return u128::from(d == 0);
    }
    // C(d + n − 1, n − 1)
    let k = (n - 1) as u128;
    let mut acc: u128 = 1;
    for t in 1..=k {
        acc = acc * (u128::from(d) + t) / t;
    }
    acc
}

/// All exponent vectors of length `n` summing to `d`, descending lexicographic.
pub fn exponent_vectors(n: usize, d: u32) -> Vec<Vec<u32>> {
    fn rec(n: usize, d: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if cur.len() + 1 == n {
            cur.push(d);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for e in (0..=d).rev() {
            cur.push(e);
            rec(n, d - e, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if n == 0 {
        if d == 0 {
            out.push(Vec::new());
        }
        return out;
    }
    rec(n, d, &mut Vec::with_capacity(n), &mut out);
    out
}

impl GradedBasis {
    /// The degree-`degree` piece over `x`; fails when larger than
    /// [`MAX_GRADED_DIMENSION`].
    pub fn new(x: IndexSet, degree: u32) -> Result<Self> {
        let dim = graded_dimension(x.len(), degree);
        if dim > MAX_GRADED_DIMENSION as u128 {
            return Err(Error::Dimension(format!(
                "degree-{degree} piece over {x} has dimension {dim}"
            )));
        }
        let monomials = exponent_vectors(x.len(), degree);
        let index = monomials
            .iter()
            .cloned()
            .enumerate()
            .map(|(k, e)| (e, k))
            .collect();
        Ok(GradedBasis {
            x,
            degree,
            monomials,
            index,
        })
    }

    /// Number of coordinates.
    pub fn len(&self) -> usize {
        self.monomials.len()
    }

    /// True for an empty piece (only when `x` is empty and the degree positive).
    pub fn is_empty(&self) -> bool {
        self.monomials.is_empty()
    }

    /// Coordinate of an exponent vector.
    pub fn position(&self, exps: &[u32]) -> Option<usize> {
        self.index.get(exps).copied()
    }

    /// Coordinates of a homogeneous polynomial of this degree over `x`.
    pub fn coordinates(&self, p: &DiagonalPolynomial) -> Result<Vec<Rational>> {
        if p.index_set() != self.x {
            return Err(Error::Malformed(format!(
                "polynomial over {} used with basis over {}",
                p.index_set(),
                self.x
            )));
        }
        let mut v = vec![Rational::zero(); self.len()];
        for (e, c) in p.terms() {
            let k = self.position(e).ok_or_else(|| {
                Error::Malformed(format!(
                    "term of degree {} in degree-{} piece",
                    e.iter().sum::<u32>(),
                    self.degree
                ))
            })?;
            v[k] = c.clone();
        }
        Ok(v)
    }

    /// Coordinates of `μ · p` where `μ` is the exponent vector `shift`.
    pub fn shifted_coordinates(
        &self,
        p: &DiagonalPolynomial,
        shift: &[u32],
    ) -> Result<Vec<Rational>> {
        let mut v = vec![Rational::zero(); self.len()];
        for (e, c) in p.terms() {
            let moved: Vec<u32> = e.iter().zip(shift).map(|(a, b)| a + b).collect();
            let k = self
                .position(&moved)
                .ok_or_else(|| Error::Malformed("shifted term outside the graded piece".into()))?;
            v[k] = c.clone();
        }
        Ok(v)
    }

    /// The polynomial with the given coordinates.
    pub fn polynomial(&self, coords: &[Rational]) -> DiagonalPolynomial {
        let mut p = DiagonalPolynomial::zero(self.x);
        for (e, c) in self.monomials.iter().zip(coords) {
            if !c.is_zero() {
                p.add_term(c.clone(), e.clone());
            }
        }
        p
    }
}

/// One pivot row: `vec` has a one at `pivot` and zeros at every earlier
/// row's pivot; `vec = Σ combo[s] · column_s` over the selected columns.
#[derive(Clone, Debug)]
struct Row {
    pivot: usize,
    vec: Vec<Rational>,
    combo: Vec<Rational>,
}

/// Incremental echelon form of a growing set of column vectors of fixed
/// length. Only independent columns are kept ("selected").
#[derive(Clone, Debug)]
pub struct Echelon {
    dim: usize,
    rows: Vec<Row>,
}

fn axpy(dst: &mut [Rational], f: &Rational, src: &[Rational]) {
    for (d, s) in dst.iter_mut().zip(src) {
        if !s.is_zero() {
            *d -= f * s;
        }
    }
}

impl Echelon {
    /// An empty echelon form for vectors of length `dim`.
    pub fn new(dim: usize) -> Self {
        Echelon {
            dim,
            rows: Vec::new(),
        }
    }

    /// Vector length.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of selected (independent) columns.
    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    /// True once the selected columns span the whole space.
    pub fn is_full(&self) -> bool {
        self.rows.len() == self.dim
    }

    /// Inserts a column; returns `true` (and selects it) when it is
    /// independent of the columns selected so far.
    pub fn insert(&mut self, mut v: Vec<Rational>) -> bool {
        assert_eq!(v.len(), self.dim, "column length mismatch");
        let r = self.rows.len();
        let mut combo = vec![Rational::zero(); r + 1];
        combo[r] = Rational::one();
        for row in &self.rows {
            let f = v[row.pivot].clone();
            if !f.is_zero() {
                axpy(&mut v, &f, &row.vec);
                axpy(&mut combo[..row.combo.len()], &f, &row.combo);
            }
        }
        let Some(pivot) = v.iter().position(|c| !c.is_zero()) else {
            return false;
        };
        let inv = Rational::one() / v[pivot].clone();
        for c in v.iter_mut().chain(combo.iter_mut()) {
            if !c.is_zero() {
                *c *= &inv;
            }
        }
        self.rows.push(Row {
            pivot,
            vec: v,
            combo,
        });
        true
    }

    /// Writes `t = Σ coeffs[s] · column_s + residual` over the selected
    /// columns; `t` lies in their span iff the residual is zero.
    pub fn reduce(&self, t: &[Rational]) -> (Vec<Rational>, Vec<Rational>) {
        assert_eq!(t.len(), self.dim, "target length mismatch");
        let mut res = t.to_vec();
        let mut coeffs = vec![Rational::zero(); self.rows.len()];
        for row in &self.rows {
            let f = res[row.pivot].clone();
            if !f.is_zero() {
                axpy(&mut res, &f, &row.vec);
                for (c, s) in coeffs.iter_mut().zip(&row.combo) {
                    if !s.is_zero() {
                        *c += &f * s;
                    }
                }
            }
        }
        (coeffs, res)
    }
}

/// Scales a rational vector by the least common multiple of its
/// denominators, giving an integer vector with the same span.
pub fn integer_scaled(v: &[Rational]) -> Vec<BigInt> {
    let l = v.iter().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
    v.iter().map(|c| c.numer() * (&l / c.denom())).collect()
}

/// Pivot search strategy for [`bareiss_rank`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PivotOrder {
    /// Walk the rows; in each, take the first usable column.
    RowMajor,
    /// Walk the columns; in each, take the first usable row.
    ColumnMajor,
}

/// Rank of an integer matrix (`rows` × equal-length rows) by fraction-free
/// Gaussian elimination; every division is exact.
pub fn bareiss_rank(mut a: Vec<Vec<BigInt>>, order: PivotOrder) -> usize {
    let nrows = a.len();
    let ncols = a.first().map_or(0, Vec::len);
    let mut col_perm: Vec<usize> = (0..ncols).collect();
    let mut prev = BigInt::one();
    let mut k = 0;
    while k < nrows.min(ncols) {
        let found = match order {
            PivotOrder::RowMajor => (k..nrows).find_map(|r| {
                (k..ncols)
                    .find(|&c| !a[r][col_perm[c]].is_zero())
                    .map(|c| (r, c))
            }),
            PivotOrder::ColumnMajor => (k..ncols).find_map(|c| {
                (k..nrows)
                    .find(|&r| !a[r][col_perm[c]].is_zero())
                    .map(|r| (r, c))
            }),
        };
        let Some((r, c)) = found else { break };
        a.swap(k, r);
        col_perm.swap(k, c);
        let pk = col_perm[k];
        let piv = a[k][pk].clone();
        let (top, rest) = a.split_at_mut(k + 1);
        let pivot_row = &top[k];
        for row in rest.iter_mut() {
            let f = row[pk].clone();
            for &cj in &col_perm[k + 1..] {
                let v = &piv * &row[cj] - &f * &pivot_row[cj];
                row[cj] = v / &prev;
            }
            row[pk] = BigInt::zero();
        }
        prev = piv;
        k += 1;
    }
    k
}
