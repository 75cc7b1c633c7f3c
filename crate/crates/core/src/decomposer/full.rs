//! The complete reduction over `{1, …, n}`: every monomial of degree at least
//! `2gn² + ½(n−1)(n−2)` becomes `Σ θ · α(P)` with `P` a good collection.
//!
//! Paired terms split their cofactor across the two sides of the block and
//! recurse on one side (relabelled to `{1, …, k}`), wrapping the child in a
//! split collection. Signed terms peel `(y+ii)^{2g}` for every `i` (or fall
//! back to a paired term through a block decomposition) and finish with the
//! four-step procedure, whose slot terms are exactly base collections.

use std::collections::{BTreeMap, HashMap};
use std::rc::Rc;

use num_traits::{One, Zero};

use super::pigeonhole::{diagonal_or_difference, square_sides, theorem_bound, Branch};
use super::procedure::{unordered_pairs, ProcedureTerm};
use super::signing::{
    block_power, diagonal_vars, difference_vars, paired_factor, signed_factor, slot_factor,
    vars_within,
};
use super::{
    canonical_monomial, divide_out, require_degree, term, Decomposition, DecompositionTerm, Engine,
    EngineConfig, LemmaTrace, ResultList, StructuredTerm,
};
use crate::algebra::{Monomial, Polynomial, PowerProduct, Rational, VarId};
use crate::blocks::{Block, BlockUnion};
use crate::error::{Error, Result};
use crate::good::{base_collection, split_collection, GoodCollection, GoodMonomial};
use crate::index_set::IndexSet;

/// Renames indices by `map` (order preserving, so canonical stays canonical).
fn relabel_pp(pp: &PowerProduct, map: &BTreeMap<u32, u32>) -> PowerProduct {
    PowerProduct::from_factors(
        pp.factors()
            .iter()
            .map(|&(v, e)| (VarId::signed(v.sign, map[&v.i], map[&v.j]), e)),
    )
}

fn relabel(p: &Polynomial, map: &BTreeMap<u32, u32>) -> Polynomial {
    let mut out = Polynomial::zero();
    for (pp, c) in p.terms() {
        out.add_term(c.clone(), relabel_pp(pp, map));
    }
    out
}

fn pow_var(v: VarId, e: u32) -> PowerProduct {
    if e == 0 {
        PowerProduct::one()
    } else {
        PowerProduct::var(v, e)
    }
}

/// Sums the cofactors of equal good monomials.
fn merge_pieces(pieces: Vec<(Polynomial, GoodCollection)>) -> Vec<(Polynomial, GoodCollection)> {
    let mut out: Vec<(Polynomial, GoodCollection)> = Vec::new();
    let mut index: HashMap<PowerProduct, usize> = HashMap::new();
    for (theta, good) in pieces {
        let key = good.alpha();
        match index.get(&key) {
            Some(&k) => out[k].0.add_assign(&theta),
            None => {
                index.insert(key, out.len());
                out.push((theta, good));
            }
        }
    }
    out.retain(|(t, _)| !t.is_zero());
    out
}

impl Engine {
    /// Decomposition of the canonical power product `pp` over
    /// `x = {1, …, n}` into `(θ, collection)` pairs.
    pub(crate) fn full(&mut self, pp: &PowerProduct, x: IndexSet) -> Result<ResultList> {
        let key = (x, pp.clone());
        if let Some(hit) = self.full_cache.get(&key) {
            return Ok(Rc::clone(hit));
        }
        let g = self.g;
        let n = x.len();
        require_degree(pp, x, theorem_bound(g, n), "decomposition")?;
        let pieces = if n == 1 {
            let i = x.min().expect("nonempty");
            let diag = VarId::plus(i, i);
            let rest = pp
                .checked_div(&PowerProduct::var(diag, 2 * g))
                .ok_or_else(|| {
                    Error::TheoremViolation(format!(
                        "{pp} is not a multiple of the rank-one product"
                    ))
                })?;
            let good = base_collection(x, None, vec![BlockUnion::empty(); 2 * g as usize], g)?;
            vec![(Polynomial::from(rest), good)]
        } else {
            let mut pieces = Vec::new();
            for t in self.structure(pp, x)?.iter() {
                match t {
                    StructuredTerm::Paired { block, cofactor } => {
                        pieces.extend(self.full_paired(x, block, cofactor)?)
                    }
                    StructuredTerm::Signed { block, cofactor } => {
                        pieces.extend(self.full_signed(x, block.as_ref(), cofactor)?)
                    }
                }
            }
            pieces
        };
        let pieces = merge_pieces(pieces);
        self.check_equal(
            "decomposition",
            &Polynomial::from(pp.clone()),
            || {
                pieces.iter().fold(Polynomial::zero(), |a, (t, good)| {
                    a.add(&t.mul_pp(&good.alpha()))
                })
            },
            x,
        )?;
        let rc = Rc::new(pieces);
        self.full_cache.insert(key, Rc::clone(&rc));
        Ok(rc)
    }

    /// Decomposes `k · ∏_{(i,j)∈B}(y+ij y-ij)^{2g}`.
    fn full_paired(
        &mut self,
        x: IndexSet,
        b: &Block,
        k: &Polynomial,
    ) -> Result<Vec<(Polynomial, GoodCollection)>> {
        let g = self.g;
        let n = x.len();
        let (v, vc) = (b.v(), b.vc());
        let mut allowed = diagonal_vars(x);
        allowed.extend(vars_within(v));
        allowed.extend(vars_within(vc));
        let rw = self.rewrite(x, allowed, k)?;
        let mut out = Vec::new();
        for (pp, c) in rw.into_terms() {
            let (ph, pw) = pp.partition(|y| v.contains(y.i) && v.contains(y.j));
            let branch = square_sides(g, n, vc.len(), v.len(), pw.degree(), ph.degree())?;
            let (side, main, other) = match branch {
                Branch::First => (vc, pw, ph),
                Branch::Second => (v, ph, pw),
            };
            self.log(
                "square sides",
                if branch == Branch::First {
                    "complement"
                } else {
                    "block side"
                },
                || format!("B = {b}, degrees {} / {}", main.degree(), other.degree()),
            );
            let labels = side.to_vec();
            let down: BTreeMap<u32, u32> = labels.iter().zip(1..).map(|(&a, t)| (a, t)).collect();
            let up: BTreeMap<u32, u32> = labels.iter().zip(1..).map(|(&a, t)| (t, a)).collect();
            let sub_x = IndexSet::range1(labels.len() as u32)?;
            let children = self.full(&relabel_pp(&main, &down), sub_x)?;
            for (theta, child) in children.iter() {
                let good = split_collection(child, &labels, x.minus(side), g)?;
                let theta = relabel(theta, &up).mul_pp(&other).scale(&c);
                out.push((theta, good));
            }
        }
        Ok(out)
    }

    /// Decomposes `k · ∏ (sum-type symbols)^{2g}` for the signing block `c`.
    fn full_signed(
        &mut self,
        x: IndexSet,
        c: Option<&Block>,
        k: &Polynomial,
    ) -> Result<Vec<(Polynomial, GoodCollection)>> {
        let g = self.g;
        let n = x.len();
        let f2 = signed_factor(c, x, g);
        let mut out = Vec::new();
        let mut current = k.canonical();
        let mut peeled = PowerProduct::one();
        for i in x.iter() {
            let diag = VarId::plus(i, i);
            let mut allowed = difference_vars(c, x);
            allowed.push(diag);
            let rw = self.rewrite(x, allowed, &current)?;
            let mut next = Polynomial::zero();
            for (pp, coef) in rw.into_terms() {
                let e = pp.exponent(diag);
                let r = pp.checked_div(&pow_var(diag, e)).expect("own factor");
                match diagonal_or_difference(g, n, e, r.degree())? {
                    Branch::First => next.add_term(
                        coef,
                        pp.checked_div(&PowerProduct::var(diag, 2 * g))
                            .expect("exponent checked"),
                    ),
                    Branch::Second => {
                        self.log("diagonal or difference", "difference", || {
                            format!("index {i}, deg r = {}", r.degree())
                        });
                        let fixed = peeled.mul(&pow_var(diag, e)).mul(&f2);
                        for bt in
                            self.decompose_flipped(&term(&Rational::one(), &r), c, x, 2 * g)?
                        {
                            let t = bt
                                .cofactor
                                .mul(&block_power(c, &bt.block, 2 * g))
                                .mul_pp(&fixed)
                                .scale(&coef);
                            let kk =
                                divide_out(&t, &paired_factor(&bt.block, g), "diagonal fallback")?;
                            out.extend(self.full_paired(x, &bt.block, &kk)?);
                        }
                    }
                }
            }
            peeled = peeled.mul(&PowerProduct::var(diag, 2 * g));
            current = next;
        }
        if current.is_zero() {
            return Ok(out);
        }
        let fixed = peeled.mul(&f2);
        for t in self.procedure(&current, c, x)? {
            match t {
                ProcedureTerm::Block { block, cofactor } => {
                    let full = cofactor.mul(&block_power(c, &block, 2 * g)).mul_pp(&fixed);
                    let kk = divide_out(&full, &paired_factor(&block, g), "procedure block")?;
                    out.extend(self.full_paired(x, &block, &kk)?);
                }
                ProcedureTerm::Slots { slots, cofactor } => {
                    let slot_part = slots.iter().fold(PowerProduct::one(), |acc, u| {
                        acc.mul(&slot_factor(c, x, &unordered_pairs(u)))
                    });
                    let good = base_collection(x, c.copied(), slots, g)?;
                    let (alpha, negative) = good.alpha().canonical();
                    let full = cofactor.mul_pp(&slot_part.mul(&fixed));
                    let theta = divide_out(&full, &alpha, "base collection")?;
                    out.push((if negative { theta.neg() } else { theta }, good));
                }
            }
        }
        Ok(out)
    }

    /// Decomposes the monomial `p` over `{1, …, n}`.
    pub fn decompose(&mut self, p: &Monomial, n: u32) -> Result<Decomposition> {
        let g = self.g;
        if n == 0 || g == 0 {
            return Err(Error::Precondition("n and g must be positive".into()));
        }
        let x = IndexSet::range1(n)?;
        let (coef, pp) = canonical_monomial(p)?;
        if coef.is_zero() {
            return Ok(Decomposition {
                input: p.clone(),
                n,
                g,
                terms: Vec::new(),
                residual_form: None,
                trace: LemmaTrace::default(),
            });
        }
        require_degree(&pp, x, theorem_bound(g, x.len()), "decomposition")?;
        let residual_form = if self.config.trace && n >= 2 {
            Some(
                self.structure(&pp, x)?
                    .iter()
                    .cloned()
                    .map(|t| scale_structured(t, &coef))
                    .collect(),
            )
        } else {
            None
        };
        let pieces = self.full(&pp, x)?;
        let terms = pieces
            .iter()
            .map(|(theta, good)| DecompositionTerm {
                theta: theta.scale(&coef),
                good: GoodMonomial::new(good.clone()),
            })
            .collect();
        Ok(Decomposition {
            input: p.clone(),
            n,
            g,
            terms,
            residual_form,
            trace: self.take_trace(),
        })
    }
}

fn scale_structured(mut t: StructuredTerm, c: &Rational) -> StructuredTerm {
    match &mut t {
        StructuredTerm::Paired { cofactor, .. } | StructuredTerm::Signed { cofactor, .. } => {
            *cofactor = cofactor.scale(c)
        }
    }
    t
}

/// Decomposes a monomial of degree at least `2gn² + ½(n−1)(n−2)` over
/// `{1, …, n}` into a combination of good monomials.
pub fn decompose_full(p: &Monomial, n: u32, g: u32) -> Result<Decomposition> {
    Engine::new(g).decompose(p, n)
}

/// As [`decompose_full`], with an explicit engine configuration (for
/// example to record the lemma trace).
pub fn decompose_full_with(
    p: &Monomial,
    n: u32,
    g: u32,
    config: EngineConfig,
) -> Result<Decomposition> {
    Engine::with_config(g, config).decompose(p, n)
}
