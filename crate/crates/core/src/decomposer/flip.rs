//! The sign-flip isomorphism attached to a block, and the block
//! decompositions of high-degree polynomials in difference-type symbols.
//!
//! The block decomposition in the plain symbols `y-ij` is computed as an
//! exact graded linear solve: the ring guarantees that
//! `[p] = Σ_B φ_B ∏_{(i,j)∈B} (y-ij)^a` is solvable once
//! `deg p ≥ ½|X|(|X|−1)a − |X| + 2`, and the solve produces the `φ_B`.

use std::collections::HashMap;
use std::rc::Rc;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use super::pigeonhole::block_solve_bound;
use super::signing::{block_power, is_difference_var};
use super::Engine;
use crate::algebra::{
    linear_power, normal_form, DiagonalPolynomial, Polynomial, PowerProduct, Rational, Sign, VarId,
};
use crate::blocks::{enumerate_blocks, Block};
use crate::error::{Error, Result};
use crate::index_set::IndexSet;
use crate::linalg::{exponent_vectors, Echelon, GradedBasis};

/// One summand `cofactor · ∏_{(i,j)∈block} (symbol_{ij})^a` of a block
/// decomposition.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockTerm {
    /// The block.
    pub block: Block,
    /// Its cofactor.
    pub cofactor: Polynomial,
}

/// The isomorphism `f_B` of the free polynomial ring: on `y±ij` it acts by
/// `−y±ij` when `i, j ∈ V`, identity when `i, j ∉ V`, `−y∓ij` when
/// `(i, j) ∈ B` and `y∓ij` when `(i, j) ∈ bar(B)`. It is an involution and
/// descends to the quotient ring as `dᵢ ↦ −dᵢ` for `i ∈ V`.
pub fn flip_iso(p: &Polynomial, b: &Block) -> Polynomial {
    let v = b.v();
    p.substitute(|y| {
        let (ii, jj) = (v.contains(y.i), v.contains(y.j));
        let (sign, neg) = match (ii, jj) {
            (true, true) => (y.sign, true),
            (false, false) => return None,
            (true, false) => (y.sign.flip(), true),
            (false, true) => (y.sign.flip(), false),
        };
        let img = Polynomial::from(VarId::signed(sign, y.i, y.j));
        Some(if neg { img.neg() } else { img })
    })
}

/// Cached graded solve for one `(X, a, degree)`.
#[derive(Debug)]
pub(crate) struct BlockSolver {
    basis: GradedBasis,
    echelon: Echelon,
    /// `(block, multiplier)` for each selected column.
    columns: Vec<(Block, PowerProduct)>,
}

/// The image of a polynomial in the symbols `y-ij` in `ℚ[u_j : j ≠ x₀]`,
/// `u_j = d_{x₀} − d_j`, so that `y-ij ↦ ½(u_j − u_i)` (with `u_{x₀} = 0`).
/// Such polynomials have normal forms in the differences of the `dᵢ`, and
/// this substitution is injective on them, so equality can be decided here in
/// one variable fewer.
fn difference_form(p: &Polynomial, x: IndexSet) -> Result<DiagonalPolynomial> {
    let x0 = x
        .min()
        .ok_or_else(|| Error::Precondition("empty index set".into()))?;
    let ux = IndexSet::range1(x.len() as u32 - 1)?;
    let pos = |k: u32| x.position(k).expect("index in x") - 1;
    let half = Rational::new(1.into(), 2.into());
    let mut cache: HashMap<(VarId, u32), DiagonalPolynomial> = HashMap::new();
    let mut out = DiagonalPolynomial::zero(ux);
    for (pp, c) in p.terms() {
        let mut acc = DiagonalPolynomial::constant(ux, c.clone());
        for &(v, e) in pp.factors() {
            if v.sign != Sign::Minus || !x.contains(v.i) || !x.contains(v.j) {
                return Err(Error::Precondition(format!(
                    "symbol {v} is not a difference symbol over {x}"
                )));
            }
            let img = cache.entry((v, e)).or_insert_with(|| {
                let form = if v.i == x0 {
                    vec![(pos(v.j), half.clone())]
                } else if v.j == x0 {
                    vec![(pos(v.i), -half.clone())]
                } else {
                    vec![(pos(v.i), -half.clone()), (pos(v.j), half.clone())]
                };
                linear_power(&form, e, ux)
            });
            acc = acc.mul(img);
        }
        out.add_scaled(&Rational::one(), &acc);
    }
    Ok(out)
}

impl BlockSolver {
    fn new(x: IndexSet, a: u32, degree: u32) -> Result<Self> {
        let x0 = x
            .min()
            .ok_or_else(|| Error::Precondition("empty index set".into()))?;
        if x.len() < 2 {
            return Err(Error::Precondition(
                "block decompositions need |X| >= 2".into(),
            ));
        }
        let basis = GradedBasis::new(IndexSet::range1(x.len() as u32 - 1)?, degree)?;
        let others: Vec<u32> = x.iter().filter(|&j| j != x0).collect();
        let mut echelon = Echelon::new(basis.len());
        let mut columns = Vec::new();
        for b in enumerate_blocks(x)
            .into_iter()
            .filter(|b| b.v().contains(x0))
        {
            let prod = PowerProduct::from_factors(
                b.pairs().into_iter().map(|(i, j)| (VarId::minus(i, j), a)),
            );
            let Some(k) = degree.checked_sub(prod.degree()) else {
                continue;
            };
            for e in exponent_vectors(others.len(), k) {
                if echelon.is_full() {
                    break;
                }
                let mu = PowerProduct::from_factors(
                    others
                        .iter()
                        .zip(&e)
                        .map(|(&j, &t)| (VarId::minus(x0, j), t)),
                );
                let col = difference_form(&Polynomial::from(mu.mul(&prod)), x)?;
                if col.is_zero() {
                    continue;
                }
                if echelon.insert(basis.coordinates(&col)?) {
                    columns.push((b, mu));
                }
            }
        }
        Ok(BlockSolver {
            basis,
            echelon,
            columns,
        })
    }

    fn solve(&self, p: &Polynomial, x: IndexSet, a: u32) -> Result<Vec<BlockTerm>> {
        let image = difference_form(p, x)?;
        let (coeffs, res) = self.echelon.reduce(&self.basis.coordinates(&image)?);
        if res.iter().any(|c| !c.is_zero()) {
            return Err(Error::TheoremViolation(format!(
                "{p} has no block decomposition with exponent {a} over {x}"
            )));
        }
        let mut out: Vec<BlockTerm> = Vec::new();
        for (c, (b, mu)) in coeffs.iter().zip(&self.columns) {
            if c.is_zero() {
                continue;
            }
            match out.iter_mut().find(|t| t.block == *b) {
                Some(t) => t.cofactor.add_term(c.clone(), mu.clone()),
                None => out.push(BlockTerm {
                    block: *b,
                    cofactor: Polynomial::term(c.clone(), mu.clone()),
                }),
            }
        }
        out.retain(|t| !t.cofactor.is_zero());
        Ok(out)
    }
}

fn check_domain(p: &Polynomial, b: Option<&Block>, x: IndexSet, a: u32) -> Result<()> {
    if a == 0 {
        return Err(Error::Precondition("exponent must be positive".into()));
    }
    if !p.support().is_subset(x) {
        return Err(Error::Malformed(format!("{p} is not over {x}")));
    }
    if let Some(b) = b {
        if b.x() != x {
            return Err(Error::Malformed(format!("block {b} is not over {x}")));
        }
    }
    let bound = block_solve_bound(x.len(), a);
    for (pp, _) in p.terms() {
        if i64::from(pp.degree()) < bound {
            return Err(Error::Precondition(format!(
                "degree {} below {bound}",
                pp.degree()
            )));
        }
        if let Some(v) = pp
            .factors()
            .iter()
            .map(|&(v, _)| v.canonical().0)
            .find(|&v| !is_difference_var(b, v))
        {
            return Err(Error::Precondition(format!(
                "symbol {v} is not a difference-type generator"
            )));
        }
    }
    Ok(())
}

impl Engine {
    fn block_solver(&mut self, x: IndexSet, a: u32, degree: u32) -> Result<Rc<BlockSolver>> {
        let key = (x, a, degree);
        if let Some(s) = self.solvers.get(&key) {
            return Ok(Rc::clone(s));
        }
        let s = Rc::new(BlockSolver::new(x, a, degree)?);
        self.solvers.insert(key, Rc::clone(&s));
        Ok(s)
    }

    /// See [`decompose_su_style`].
    pub fn decompose_su_style(
        &mut self,
        p: &Polynomial,
        x: IndexSet,
        a: u32,
    ) -> Result<Vec<BlockTerm>> {
        check_domain(p, None, x, a)?;
        let mut out: Vec<BlockTerm> = Vec::new();
        let mut by_degree: std::collections::BTreeMap<u32, Polynomial> = Default::default();
        for (pp, c) in p.terms() {
            by_degree
                .entry(pp.degree())
                .or_default()
                .add_term(c.clone(), pp.clone());
        }
        for (deg, part) in by_degree {
            let solver = self.block_solver(x, a, deg)?;
            for t in solver.solve(&part, x, a)? {
                match out.iter_mut().find(|u| u.block == t.block) {
                    Some(u) => u.cofactor = u.cofactor.add(&t.cofactor),
                    None => out.push(t),
                }
            }
        }
        self.check_blocks(p, None, x, a, &out)?;
        Ok(out)
    }

    /// See [`decompose_flipped`].
    pub fn decompose_flipped(
        &mut self,
        p: &Polynomial,
        b: Option<&Block>,
        x: IndexSet,
        a: u32,
    ) -> Result<Vec<BlockTerm>> {
        check_domain(p, b, x, a)?;
        let Some(b) = b else {
            return self.decompose_su_style(p, x, a);
        };
        let flipped = flip_iso(&p.canonical(), b);
        let inner = self.decompose_su_style(&flipped, x, a)?;
        let out: Vec<BlockTerm> = inner
            .into_iter()
            .map(|t| {
                // λ_C = |{(i,j) ∈ C : i ∈ V}|
                let lambda = t.block.v().intersection(b.v()).len() * t.block.vc().len();
                let cof = flip_iso(&t.cofactor, b);
                let odd = (u64::from(a) * lambda as u64) % 2 == 1;
                BlockTerm {
                    block: t.block,
                    cofactor: if odd { cof.neg() } else { cof },
                }
            })
            .collect();
        self.check_blocks(p, Some(b), x, a, &out)?;
        Ok(out)
    }

    fn check_blocks(
        &self,
        p: &Polynomial,
        b: Option<&Block>,
        x: IndexSet,
        a: u32,
        terms: &[BlockTerm],
    ) -> Result<()> {
        if !self.config.check_steps {
            return Ok(());
        }
        let mut sum = Polynomial::zero();
        for t in terms {
            sum = sum.add(&t.cofactor.mul(&block_power(b, &t.block, a)));
        }
        if normal_form(&sum.sub(p), x)?.is_zero() {
            Ok(())
        } else {
            Err(Error::TheoremViolation(format!(
                "block decomposition of {p} does not reproduce it"
            )))
        }
    }
}

/// Writes `[p] = Σ_B φ_B ∏_{(i,j)∈B} (y-ij)^a` for `p` in the symbols
/// `y-ij` over `x` (each term of degree at least `½|X|(|X|−1)a − |X| + 2`).
/// The `φ_B` are polynomials in the symbols `y-_{x₀ j}`, `x₀ = min X`, and
/// only blocks with `x₀ ∈ V` are used.
pub fn decompose_su_style(p: &Polynomial, x: IndexSet, a: u32, g: u32) -> Result<Vec<BlockTerm>> {
    Engine::new(g).decompose_su_style(p, x, a)
}

/// Writes `[p] = Σ_C φ_C ∏_{(i,j)∈C} (y^{ε_B(i,j)}_{ij})^a` for `p` in the
/// difference-type symbols of `b` (the plain `y-ij` when `b` is `None`), by
/// conjugating [`decompose_su_style`] with [`flip_iso`] and applying the
/// signs `(−1)^{a·λ_C}`, `λ_C = |{(i,j) ∈ C : i ∈ V}|`.
pub fn decompose_flipped(
    p: &Polynomial,
    b: Option<&Block>,
    x: IndexSet,
    a: u32,
    g: u32,
) -> Result<Vec<BlockTerm>> {
    Engine::new(g).decompose_flipped(p, b, x, a)
}

/// `true` when `p` uses only the difference-type symbols of `b`.
pub fn in_difference_symbols(p: &Polynomial, b: Option<&Block>) -> bool {
    p.terms().all(|(pp, _)| {
        pp.factors()
            .iter()
            .all(|&(v, _)| is_difference_var(b, v.canonical().0))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{equal_in_r, DiagonalPolynomial};

    #[test]
    fn flip_table_examples() {
        let b = Block::from_sides(&[1], &[2]).unwrap();
        let p = Polynomial::parse("1*y-12").unwrap();
        assert_eq!(flip_iso(&p, &b), Polynomial::parse("-1*y+12").unwrap());
        let q = Polynomial::parse("1*y+22").unwrap();
        assert_eq!(flip_iso(&q, &b), q);
        let r = Polynomial::parse("1*y+11^2*y-21*y+12").unwrap();
        assert_eq!(flip_iso(&flip_iso(&r, &b), &b), r);
    }

    #[test]
    fn flip_negates_flagged_diagonals_in_normal_form() {
        let x = IndexSet::range1(2).unwrap();
        let b = Block::from_sides(&[1], &[2]).unwrap();
        let p = Polynomial::parse("1*y+12^2*y-12 + 3*y+11*y-21^2").unwrap();
        let nf = normal_form(&p, x).unwrap();
        let flipped = normal_form(&flip_iso(&p, &b), x).unwrap();
        let mut expect = DiagonalPolynomial::zero(x);
        for (e, c) in nf.terms() {
            let c = if e[0] % 2 == 1 { -c.clone() } else { c.clone() };
            expect.add_term(c, e.clone());
        }
        assert_eq!(flipped, expect);
    }

    #[test]
    fn su_style_examples() {
        let x2 = IndexSet::range1(2).unwrap();
        let p = Polynomial::parse("1*y-12^3").unwrap();
        let out = decompose_su_style(&p, x2, 2, 1).unwrap();
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].cofactor, Polynomial::parse("1*y-12").unwrap());
        let x3 = IndexSet::range1(3).unwrap();
        let q = Polynomial::parse("1*y-12*y-23*y-13").unwrap();
        let out = decompose_su_style(&q, x3, 1, 1).unwrap();
        let mut sum = Polynomial::zero();
        for t in &out {
            sum = sum.add(&t.cofactor.mul(&block_power(None, &t.block, 1)));
        }
        assert!(equal_in_r(&sum, &q));
        assert!(matches!(
            decompose_su_style(&Polynomial::parse("1*y-12").unwrap(), x3, 1, 1),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn flipped_example_reverifies() {
        let x = IndexSet::range1(2).unwrap();
        let b = Block::from_sides(&[1], &[2]).unwrap();
        let p = Polynomial::parse("1*y+12^2").unwrap();
        let out = decompose_flipped(&p, Some(&b), x, 1, 1).unwrap();
        let mut sum = Polynomial::zero();
        for t in &out {
            sum = sum.add(&t.cofactor.mul(&block_power(Some(&b), &t.block, 1)));
        }
        assert!(equal_in_r(&sum, &p));
        assert!(
            decompose_flipped(&Polynomial::parse("1*y+12").unwrap(), Some(&b), x, 3, 1).is_err()
        );
    }
}
