//! Structured matrix forms and their random sampling.
//!
//! Every form is "κ of a unitary on a subset of the indices, conjugated by a
//! coordinate swap": the plus form is κ(U(n)); the minus form for a block
//! `V × Vᶜ` is `E_V κ(U) E_V`; the embedded form puts such a matrix on the
//! coordinates of a subset `X` and an arbitrary rotation on the rest
//! (including the trailing coordinate).

use chern_core::{Block, IndexSet, Sign};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{HolonomyError, Result};
use crate::matrix::{realify, swap_matrix, OrthMatrix};

/// Which structured form to sample.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum FormSpec {
    /// Every 2×2 block is `(x, −y; y, x)`; bordered by `e_{2n+1}`.
    Plusmat,
    /// Blocks on pairs crossing `block` are `(w, z; z, −w)`, all others
    /// `(x, −y; y, x)`; bordered by `e_{2n+1}`.
    Minusmat {
        /// The block over `{1, …, n}`.
        block: Block,
    },
    /// The rank-two plus form (the plus form at `n = 2`).
    So5Plus,
    /// The rank-two mixed form (the minus form at `n = 2` for `{1}×{2}`).
    So5Pm,
    /// A plus or minus form on the coordinates of `x`, block diagonal with an
    /// arbitrary rotation on the remaining coordinates.
    BlockDiagonalEmbed {
        /// The indices carrying the structured part.
        x: IndexSet,
        /// The signing block over `x`, or none for the plus form.
        block: Option<Block>,
    },
}

/// The data every form reduces to.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FormShape {
    /// Rank `n`.
    pub n: usize,
    /// Indices carrying the structured part (1-based, sorted).
    pub structured: Vec<u32>,
    /// Indices whose coordinate pair is swapped (the first side of the block).
    pub swapped: Vec<u32>,
}

impl FormShape {
    /// `ε_V(i)`: `+1` for swapped indices, `−1` otherwise.
    pub fn side_sign(&self, i: u32) -> i8 {
        if self.swapped.contains(&i) {
            1
        } else {
            -1
        }
    }

    /// `ε_B(i, j)`: `+1` when exactly one of `i, j` is swapped.
    pub fn pair_sign(&self, i: u32, j: u32) -> i8 {
        if self.swapped.contains(&i) != self.swapped.contains(&j) {
            1
        } else {
            -1
        }
    }
}

impl FormSpec {
    /// Checks the form against the rank and returns its shape.
    pub fn shape(&self, n: usize) -> Result<FormShape> {
        if n == 0 {
            return Err(HolonomyError::InvalidForm("rank must be positive".into()));
        }
        let all: Vec<u32> = (1..=n as u32).collect();
        let full = |swapped: Vec<u32>| FormShape {
            n,
            structured: all.clone(),
            swapped,
        };
        match self {
            FormSpec::Plusmat => Ok(full(Vec::new())),
            FormSpec::Minusmat { block } => {
                if block.x().to_vec() != all {
                    return Err(HolonomyError::InvalidForm(format!(
                        "block {block} is not over 1..={n}"
                    )));
                }
                Ok(full(block.v().to_vec()))
            }
            FormSpec::So5Plus | FormSpec::So5Pm if n != 2 => Err(HolonomyError::InvalidForm(
                format!("the rank-two forms need n = 2, got {n}"),
            )),
            FormSpec::So5Plus => Ok(full(Vec::new())),
            FormSpec::So5Pm => Ok(full(vec![1])),
            FormSpec::BlockDiagonalEmbed { x, block } => {
                let structured = x.to_vec();
                if structured.is_empty() || structured.iter().any(|&i| i as usize > n) {
                    return Err(HolonomyError::InvalidForm(format!(
                        "{x} is not a nonempty subset of 1..={n}"
                    )));
                }
                let swapped = match block {
                    Some(b) if b.x() != *x => {
                        return Err(HolonomyError::InvalidForm(format!(
                            "block {b} is not over {x}"
                        )));
                    }
                    Some(b) => b.v().to_vec(),
                    None => Vec::new(),
                };
                Ok(FormShape {
                    n,
                    structured,
                    swapped,
                })
            }
        }
    }

    /// A short label for reports.
    pub fn label(&self) -> String {
        match self {
            FormSpec::Plusmat => "plusmat".into(),
            FormSpec::Minusmat { block } => format!("minusmat({block})"),
            FormSpec::So5Plus => "so5-plus".into(),
            FormSpec::So5Pm => "so5-pm".into(),
            FormSpec::BlockDiagonalEmbed { x, block: None } => format!("block-diagonal-embed({x})"),
            FormSpec::BlockDiagonalEmbed { x, block: Some(b) } => {
                format!("block-diagonal-embed({x}, {b})")
            }
        }
    }

    /// The plus form and the minus form for every block over `1..=n`.
    pub fn grid(n: usize) -> Result<Vec<FormSpec>> {
        let x =
            IndexSet::range1(n as u32).map_err(|e| HolonomyError::InvalidForm(e.to_string()))?;
        let mut out = vec![FormSpec::Plusmat];
        out.extend(
            chern_core::blocks::enumerate_blocks(x)
                .into_iter()
                .map(|block| FormSpec::Minusmat { block }),
        );
        Ok(out)
    }

    /// Every form kind available at rank `n`, including each embedding of a
    /// proper subset with each of its signings.
    pub fn all(n: usize) -> Result<Vec<FormSpec>> {
        let mut out = FormSpec::grid(n)?;
        if n == 2 {
            out.push(FormSpec::So5Plus);
            out.push(FormSpec::So5Pm);
        }
        for mask in 1u32..(1 << n) - 1 {
            let v: Vec<u32> = (1..=n as u32)
                .filter(|i| mask & (1 << (i - 1)) != 0)
                .collect();
            let x =
                IndexSet::from_slice(&v).map_err(|e| HolonomyError::InvalidForm(e.to_string()))?;
            out.push(FormSpec::BlockDiagonalEmbed { x, block: None });
            for b in chern_core::blocks::enumerate_blocks(x) {
                out.push(FormSpec::BlockDiagonalEmbed { x, block: Some(b) });
            }
        }
        Ok(out)
    }
}

/// A Haar-distributed `k×k` unitary (QR of a complex Gaussian matrix with the
/// phases of `R`'s diagonal divided out).
pub fn sample_unitary<R: Rng + ?Sized>(k: usize, rng: &mut R) -> DMatrix<Complex64> {
    let z = DMatrix::<Complex64>::from_fn(k, k, |_, _| {
        Complex64::new(
            rng.sample::<f64, _>(StandardNormal),
            rng.sample::<f64, _>(StandardNormal),
        )
    });
    let qr = z.qr();
    let (mut q, r) = (qr.q(), qr.r());
    for j in 0..k {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 {
            d / d.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        for i in 0..k {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// A Haar-distributed element of SO(m).
pub fn sample_rotation<R: Rng + ?Sized>(m: usize, rng: &mut R) -> DMatrix<f64> {
    let z = DMatrix::<f64>::from_fn(m, m, |_, _| rng.sample::<f64, _>(StandardNormal));
    let qr = z.qr();
    let (mut q, r) = (qr.q(), qr.r());
    for j in 0..m {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    if q.determinant() < 0.0 {
        q.column_mut(0).neg_mut();
    }
    q
}

/// Matrix coordinates (0-based) of the 1-based index `i`.
fn coords(i: u32) -> [usize; 2] {
    let k = 2 * (i as usize - 1);
    [k, k + 1]
}

/// A random matrix of the requested form, built from a Haar unitary (and a
/// Haar rotation on the unstructured coordinates).
pub fn sample_form<R: Rng + ?Sized>(spec: &FormSpec, n: usize, rng: &mut R) -> Result<OrthMatrix> {
    let shape = spec.shape(n)?;
    let k = shape.structured.len();
    let inner = realify(&sample_unitary(k, rng), false);
    let size = 2 * n + 1;
    let mut m = DMatrix::<f64>::zeros(size, size);
    let sc: Vec<usize> = shape.structured.iter().flat_map(|&i| coords(i)).collect();
    for (a, &r) in sc.iter().enumerate() {
        for (b, &c) in sc.iter().enumerate() {
            m[(r, c)] = inner[(a, b)];
        }
    }
    let rest: Vec<usize> = (0..size).filter(|c| !sc.contains(c)).collect();
    let outer = sample_rotation(rest.len(), rng);
    for (a, &r) in rest.iter().enumerate() {
        for (b, &c) in rest.iter().enumerate() {
            m[(r, c)] = outer[(a, b)];
        }
    }
    let e = swap_matrix(n, &shape.swapped);
    OrthMatrix::new(&e * m * &e)
}

/// The sections that vanish identically on the form: `s^{−ε(i,j)}ᵢⱼ` for
/// structured pairs, both signs on pairs with exactly one structured index.
/// (`s⁻ᵢᵢ` is not a section and never listed.)
pub fn vanishing_sections(spec: &FormSpec, n: usize) -> Result<Vec<(Sign, u32, u32)>> {
    let shape = spec.shape(n)?;
    let mut out = Vec::new();
    for i in 1..=n as u32 {
        for j in 1..=n as u32 {
            let si = shape.structured.contains(&i);
            let sj = shape.structured.contains(&j);
            if si && sj {
                let sign = Sign::from_unit(-shape.pair_sign(i, j));
                if sign == Sign::Plus || i != j {
                    out.push((sign, i, j));
                }
            } else if si != sj {
                out.push((Sign::Plus, i, j));
                out.push((Sign::Minus, i, j));
            }
        }
    }
    Ok(out)
}
