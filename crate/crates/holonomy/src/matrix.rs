//! Real matrices in SO(2n+1) laid out as n×n grids of 2×2 blocks plus a
//! trailing coordinate, the realification map κ: U(n) → SO(2n+1), torus
//! elements, commutator products and the section formulas.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{HolonomyError, Result};

/// Tolerance for group-theoretic identities after floating-point products.
pub const GROUP_TOL: f64 = 1e-9;

/// Tolerance for structural zeros of exactly constructed matrices.
pub const STRUCTURE_TOL: f64 = 1e-12;

/// Largest absolute entry.
pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0, |a, &x| a.max(x.abs()))
}

/// Largest absolute entry of a complex matrix.
pub fn max_abs_complex(m: &DMatrix<Complex64>) -> f64 {
    m.iter().fold(0.0, |a, x| a.max(x.norm()))
}

/// An element of SO(2n+1), checked on construction.
#[derive(Clone, Debug, PartialEq)]
pub struct OrthMatrix {
    entries: DMatrix<f64>,
}

impl OrthMatrix {
    /// Wraps `m` after checking `‖MᵀM − I‖∞ < 1e−9`, `|det M − 1| < 1e−9`
    /// and odd size.
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        if !m.is_square() || m.nrows().is_multiple_of(2) {
            return Err(HolonomyError::Dimension(format!(
                "{}×{} is not of size 2n+1",
                m.nrows(),
                m.ncols()
            )));
        }
        let id = DMatrix::<f64>::identity(m.nrows(), m.ncols());
        let residual = max_abs(&(m.transpose() * &m - id));
        let det = m.determinant();
        if residual >= GROUP_TOL || (det - 1.0).abs() >= GROUP_TOL {
            return Err(HolonomyError::NotSpecialOrthogonal { residual, det });
        }
        Ok(OrthMatrix { entries: m })
    }

    /// The identity of SO(2n+1).
    pub fn identity(n: usize) -> Self {
        OrthMatrix {
            entries: DMatrix::identity(2 * n + 1, 2 * n + 1),
        }
    }

    /// The rank `n`.
    pub fn rank(&self) -> usize {
        self.entries.nrows() / 2
    }

    /// The entries.
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.entries
    }

    /// Consumes the wrapper.
    pub fn into_matrix(self) -> DMatrix<f64> {
        self.entries
    }

    /// The inverse (the transpose).
    pub fn inverse(&self) -> Self {
        OrthMatrix {
            entries: self.entries.transpose(),
        }
    }

    /// Matrix product; the product of two group elements needs no re-check.
    pub fn mul(&self, other: &OrthMatrix) -> Result<Self> {
        if self.entries.nrows() != other.entries.nrows() {
            return Err(HolonomyError::Dimension(format!(
                "cannot multiply sizes {} and {}",
                self.entries.nrows(),
                other.entries.nrows()
            )));
        }
        Ok(OrthMatrix {
            entries: &self.entries * &other.entries,
        })
    }

    /// Conjugation `S M S⁻¹` by a signed permutation `S` (kept in SO(2n+1)).
    pub fn conjugate_by(&self, s: &DMatrix<f64>) -> Self {
        OrthMatrix {
            entries: s * &self.entries * s.transpose(),
        }
    }

    /// Rows as nested vectors, for reports.
    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.entries
            .row_iter()
            .map(|r| r.iter().copied().collect())
            .collect()
    }

    /// `‖MᵀM − I‖∞`.
    pub fn orthogonality_residual(&self) -> f64 {
        let id = DMatrix::<f64>::identity(self.entries.nrows(), self.entries.ncols());
        max_abs(&(self.entries.transpose() * &self.entries - id))
    }
}

/// A torus element `(θ₁, …, θₙ)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TorusElement {
    /// Angles in radians.
    pub angles: Vec<f64>,
}

impl TorusElement {
    /// The block-rotation matrix `diag(R_θ₁, …, R_θₙ, 1)`.
    pub fn to_matrix(&self) -> OrthMatrix {
        let n = self.angles.len();
        let mut m = DMatrix::<f64>::identity(2 * n + 1, 2 * n + 1);
        for (k, &t) in self.angles.iter().enumerate() {
            let (s, c) = t.sin_cos();
            m[(2 * k, 2 * k)] = c;
            m[(2 * k, 2 * k + 1)] = -s;
            m[(2 * k + 1, 2 * k)] = s;
            m[(2 * k + 1, 2 * k + 1)] = c;
        }
        OrthMatrix { entries: m }
    }
}

/// `‖U*U − I‖∞`.
pub fn unitarity_residual(u: &DMatrix<Complex64>) -> f64 {
    let id = DMatrix::<Complex64>::identity(u.nrows(), u.ncols());
    max_abs_complex(&(u.adjoint() * u - id))
}

/// The realification κ: each entry `a` of `U` becomes the block
/// `(Re a, −Im a; Im a, Re a)`, followed by a trailing 1.
pub fn kappa(u: &DMatrix<Complex64>) -> Result<OrthMatrix> {
    if !u.is_square() {
        return Err(HolonomyError::Dimension(format!(
            "{}×{} is not square",
            u.nrows(),
            u.ncols()
        )));
    }
    let residual = unitarity_residual(u);
    if residual >= GROUP_TOL {
        return Err(HolonomyError::NotUnitary { residual });
    }
    Ok(OrthMatrix {
        entries: realify(u, true),
    })
}

/// The 2n×2n (or, with `trailing`, (2n+1)×(2n+1)) realification of `u`,
/// without any check.
pub fn realify(u: &DMatrix<Complex64>, trailing: bool) -> DMatrix<f64> {
    let n = u.nrows();
    let size = 2 * n + usize::from(trailing);
    let mut m = DMatrix::<f64>::zeros(size, size);
    for i in 0..n {
        for j in 0..n {
            let a = u[(i, j)];
            m[(2 * i, 2 * j)] = a.re;
            m[(2 * i, 2 * j + 1)] = -a.im;
            m[(2 * i + 1, 2 * j)] = a.im;
            m[(2 * i + 1, 2 * j + 1)] = a.re;
        }
    }
    if trailing {
        m[(2 * n, 2 * n)] = 1.0;
    }
    m
}

/// Reads back the complex matrix from the top-left `2n×2n` corner
/// (first column of each block); the left inverse of κ on its image.
pub fn unkappa(m: &DMatrix<f64>) -> DMatrix<Complex64> {
    let n = m.nrows() / 2;
    DMatrix::from_fn(n, n, |i, j| {
        Complex64::new(m[(2 * i, 2 * j)], m[(2 * i + 1, 2 * j)])
    })
}

/// Distance of the top-left `2k×2k` corner of `m` from the image of κ
/// (blocks of the form `(x, −y; y, x)`), over the indices `idx` (0-based).
pub fn complex_structure_defect(m: &DMatrix<f64>, idx: &[usize]) -> f64 {
    let mut worst: f64 = 0.0;
    for &i in idx {
        for &j in idx {
            let (a, b, c, d) = block(m, i, j);
            worst = worst.max((a - d).abs()).max((b + c).abs());
        }
    }
    worst
}

/// The 2×2 block `(a, b; c, d)` at block position `(i, j)` (0-based).
pub fn block(m: &DMatrix<f64>, i: usize, j: usize) -> (f64, f64, f64, f64) {
    (
        m[(2 * i, 2 * j)],
        m[(2 * i, 2 * j + 1)],
        m[(2 * i + 1, 2 * j)],
        m[(2 * i + 1, 2 * j + 1)],
    )
}

/// The signed permutation `E_V = ∏_{k∈V} E_k` swapping coordinates
/// `2k−1, 2k` for each 1-based index `k ∈ V`. It is an involution in O(2n+1).
pub fn swap_matrix(n: usize, v: &[u32]) -> DMatrix<f64> {
    let mut e = DMatrix::<f64>::identity(2 * n + 1, 2 * n + 1);
    for &k in v {
        let k = k as usize - 1;
        e[(2 * k, 2 * k)] = 0.0;
        e[(2 * k + 1, 2 * k + 1)] = 0.0;
        e[(2 * k, 2 * k + 1)] = 1.0;
        e[(2 * k + 1, 2 * k)] = 1.0;
    }
    e
}

/// `∏_{l=1}^{g} A_l B_l A_l⁻¹ B_l⁻¹`.
pub fn commutator_product(a: &[OrthMatrix], b: &[OrthMatrix]) -> Result<OrthMatrix> {
    if a.len() != b.len() || a.is_empty() {
        return Err(HolonomyError::Dimension(format!(
            "{} and {} generators",
            a.len(),
            b.len()
        )));
    }
    let size = a[0].entries.nrows();
    let mut out = DMatrix::<f64>::identity(size, size);
    for (x, y) in a.iter().zip(b) {
        if x.entries.nrows() != size || y.entries.nrows() != size {
            return Err(HolonomyError::Dimension(
                "generators of different sizes".into(),
            ));
        }
        out = out * &x.entries * &y.entries * x.entries.transpose() * y.entries.transpose();
    }
    Ok(OrthMatrix { entries: out })
}

/// The two section values `(s⁺ᵢⱼ, s⁻ᵢⱼ)` at a matrix, for 1-based `i, j`:
/// `M[2i−1,2j−1] ∓ M[2i,2j] + √−1 (M[2i,2j−1] ± M[2i−1,2j])`.
pub fn section_values(m: &DMatrix<f64>, i: u32, j: u32) -> Result<(Complex64, Complex64)> {
    let n = m.nrows() / 2;
    if i == 0 || j == 0 || i as usize > n || j as usize > n {
        return Err(HolonomyError::Dimension(format!(
            "indices ({i}, {j}) outside 1..={n}"
        )));
    }
    let (a, b, c, d) = block(m, i as usize - 1, j as usize - 1);
    Ok((Complex64::new(a - d, c + b), Complex64::new(a + d, c - b)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_sections() {
        let id = OrthMatrix::identity(2);
        let (p, m) = section_values(id.matrix(), 1, 1).unwrap();
        assert_eq!((p, m), (Complex64::new(0.0, 0.0), Complex64::new(2.0, 0.0)));
        let (p, m) = section_values(id.matrix(), 1, 2).unwrap();
        assert_eq!((p.norm(), m.norm()), (0.0, 0.0));
        assert!(section_values(id.matrix(), 3, 1).is_err());
    }

    #[test]
    fn swap_is_an_involution() {
        let e = swap_matrix(3, &[1, 3]);
        assert_eq!(&e * &e, DMatrix::identity(7, 7));
    }
}
