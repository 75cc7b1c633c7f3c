//! The four-step procedure turning a monomial `θ` over `X` (signed by a
//! block `C` or the empty block) into block terms
//! `φ · ∏_{(i,j)∈B}(y^{ε_C(i,j)}_{ij})^{2g}` and "slot" terms whose fixed
//! factor is the product of `2g` per-slot factors (see
//! [`signing::slot_factor`](super::signing::slot_factor)).
//!
//! The state is `coef · α β γ` together with up to `2g` generator slots,
//! each holding a list of blocks and the unordered pairs they meet: `β`
//! holds one difference-type symbol per recorded pair, `γ` holds sum-type
//! symbols and `α` the remaining difference-type symbols. Termination is
//! watched through the counters `b` (recorded pairs), `d` (total deficit of
//! `d_ij = exp_β(y^{ε}_{ij}) + exp_γ(y^{−ε}_{ij})` below `2g`) and `deg(αβ)`.

use std::collections::BTreeSet;

use num_traits::One;
use serde::{Deserialize, Serialize};

use super::pigeonhole::{block_solve_bound, theorem_bound};
use super::signing::{
    block_power, difference_var, index_sign, is_difference_var, slot_factor, sum_var,
};
use super::{canonical_monomial, divide_out, term, Counters, Engine, TraceStep};
use crate::algebra::{Monomial, Polynomial, PowerProduct, Rational, VarId};
use crate::blocks::{Block, BlockUnion};
use crate::error::{Error, Result};
use crate::index_set::IndexSet;

/// One output term of the procedure.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProcedureTerm {
    /// `cofactor · ∏_{(i,j)∈block} (y^{ε_C(i,j)}_{ij})^{2g}`.
    Block {
        /// The block.
        block: Block,
        /// Cofactor.
        cofactor: Polynomial,
    },
    /// `cofactor · ∏_l slot_factor(D_l)` over the `2g` unions `D_l`.
    Slots {
        /// One block union per generator slot (empty unions pad to `2g`).
        slots: Vec<BlockUnion>,
        /// Cofactor.
        cofactor: Polynomial,
    },
}

impl ProcedureTerm {
    /// The term as a polynomial over `x` for the signing block `c`.
    pub fn expand(&self, c: Option<&Block>, x: IndexSet, g: u32) -> Polynomial {
        match self {
            ProcedureTerm::Block { block, cofactor } => cofactor.mul(&block_power(c, block, 2 * g)),
            ProcedureTerm::Slots { slots, cofactor } => {
                let f = slots.iter().fold(PowerProduct::one(), |acc, u| {
                    acc.mul(&slot_factor(c, x, &unordered_pairs(u)))
                });
                cofactor.mul_pp(&f)
            }
        }
    }
}

/// The unordered pairs `(min, max)` met by a block union.
pub(crate) fn unordered_pairs(u: &BlockUnion) -> BTreeSet<(u32, u32)> {
    u.pairs.iter().map(|&(i, j)| (i.min(j), i.max(j))).collect()
}

fn block_pairs(b: &Block) -> BTreeSet<(u32, u32)> {
    b.pairs()
        .into_iter()
        .map(|(i, j)| (i.min(j), i.max(j)))
        .collect()
}

#[derive(Clone, Debug)]
struct Slot {
    blocks: Vec<Block>,
    pairs: BTreeSet<(u32, u32)>,
}

#[derive(Clone, Debug)]
struct State {
    coef: Rational,
    alpha: PowerProduct,
    beta: PowerProduct,
    gamma: PowerProduct,
    slots: Vec<Slot>,
}

/// Canonical symbol and sign of a literal symbol.
fn canon(v: VarId) -> (VarId, Rational) {
    let (cv, neg) = v.canonical();
    (
        cv,
        if neg {
            -Rational::one()
        } else {
            Rational::one()
        },
    )
}

/// `∏_{(i,j)∈B} y^{ε_C(i,j)}_{ij}` in canonical symbols, with its sign.
fn block_product(c: Option<&Block>, b: &Block) -> (PowerProduct, Rational) {
    let mut sign = Rational::one();
    let mut f = Vec::new();
    for (i, j) in b.pairs() {
        let (v, s) = canon(difference_var(c, i, j));
        sign *= s;
        f.push((v, 1));
    }
    (PowerProduct::from_factors(f), sign)
}

/// The literal pieces of the rewrite of the sum-type symbol of `(k, l)`
/// through the pair `(i, j)`: `(coefficient, literal symbol, is sum-type)`.
fn step_four_pieces(c: Option<&Block>, i: u32, j: u32, k: u32, l: u32) -> Vec<(i8, VarId, bool)> {
    let s = |a: u32| index_sign(c, a);
    let mut out = Vec::new();
    if k != i {
        out.push((1, difference_var(c, k, i), false));
    }
    out.push((s(k) * s(i), sum_var(c, i, j), true));
    if l != j {
        out.push((s(k) * s(l), difference_var(c, l, j), false));
    }
    out
}

/// The identity used to move weight onto a deficient pair `(i, j)`:
/// `[y^{−ε_C(k,l)}_{kl}] = [k≠i]·[y^{ε_C(k,i)}_{ki}] + ε_V(k)ε_V(i)·[y^{−ε_C(i,j)}_{ij}]
/// + [l≠j]·ε_V(k)ε_V(l)·[y^{ε_C(l,j)}_{lj}]` (for `k = l` the left side is
/// `y+kk`). Returns the right-hand side.
pub fn step_four_rewrite(c: Option<&Block>, i: u32, j: u32, k: u32, l: u32) -> Polynomial {
    let mut out = Polynomial::zero();
    for (s, v, _) in step_four_pieces(c, i, j, k, l) {
        out = out.add(&Polynomial::from(v).scale(&Rational::from_integer(s.into())));
    }
    out
}

impl Engine {
    fn counters(&self, c: Option<&Block>, x: IndexSet, st: &State) -> Counters {
        let two_g = 2 * self.g;
        let v = x.to_vec();
        let mut d = 0;
        for (a, &i) in v.iter().enumerate() {
            for &j in &v[a + 1..] {
                d += two_g.saturating_sub(d_pair(c, st, i, j));
            }
        }
        Counters {
            b: st.slots.iter().map(|s| s.pairs.len() as u32).sum(),
            d,
            deg_ab: st.alpha.degree() + st.beta.degree(),
        }
    }

    /// The procedure on `theta` (every term of degree at least
    /// `2gn² + ½(n−1)(n−2) − 2gn − n(n−1)g`) over `x`, signed by `c`.
    pub(crate) fn procedure(
        &mut self,
        theta: &Polynomial,
        c: Option<&Block>,
        x: IndexSet,
    ) -> Result<Vec<ProcedureTerm>> {
        let g = self.g;
        let n = x.len();
        let ni = n as i64;
        let full_bound = ni * (ni - 1) * i64::from(g) - ni + 2;
        let hyp = theorem_bound(g, n) - 2 * i64::from(g) * ni - ni * (ni - 1) * i64::from(g);
        let mut out = Vec::new();
        for (pp, coef) in theta.canonical().into_terms() {
            super::require_degree(&pp, x, hyp, "procedure")?;
            let (pm, pplus) = pp.partition(|v| is_difference_var(c, v));
            if i64::from(pm.degree()) >= full_bound {
                for bt in self.decompose_flipped(&term(&Rational::one(), &pm), c, x, 2 * g)? {
                    out.push(ProcedureTerm::Block {
                        block: bt.block,
                        cofactor: bt.cofactor.mul_pp(&pplus).scale(&coef),
                    });
                }
                continue;
            }
            let mut work = Vec::new();
            match (1..2 * g)
                .rev()
                .find(|&a| i64::from(pm.degree()) >= block_solve_bound(n, a))
            {
                Some(a) => {
                    for bt in self.decompose_flipped(&term(&Rational::one(), &pm), c, x, a)? {
                        let (bp, sign) = block_product(c, &bt.block);
                        let beta = bp.pow(a);
                        let sign = if a % 2 == 1 { sign } else { Rational::one() };
                        let pairs = block_pairs(&bt.block);
                        for (phi, c2) in bt.cofactor.canonical().into_terms() {
                            work.push(State {
                                coef: &coef * &c2 * &sign,
                                alpha: phi,
                                beta: beta.clone(),
                                gamma: pplus.clone(),
                                slots: vec![
                                    Slot {
                                        blocks: vec![bt.block],
                                        pairs: pairs.clone()
                                    };
                                    a as usize
                                ],
                            });
                        }
                    }
                }
                None => work.push(State {
                    coef,
                    alpha: pm,
                    beta: PowerProduct::one(),
                    gamma: pplus,
                    slots: Vec::new(),
                }),
            }
            while let Some(st) = work.pop() {
                self.steps += 1;
                if self.steps > self.config.step_cap {
                    return Err(Error::Watchdog(format!(
                        "procedure exceeded {} steps",
                        self.config.step_cap
                    )));
                }
                let before = self.counters(c, x, &st);
                let children = self.procedure_step(st, c, x, full_bound, &mut out)?;
                for (label, child) in children {
                    let after = self.counters(c, x, &child);
                    if after.b < before.b || after.deg_ab < before.deg_ab || after.d > before.d {
                        return Err(Error::TheoremViolation(format!(
                            "procedure counters regressed in {label}: {before:?} -> {after:?}"
                        )));
                    }
                    if self.config.trace {
                        self.trace.steps.push(TraceStep {
                            lemma: "procedure".into(),
                            branch: label.into(),
                            detail: format!("slots = {}", child.slots.len()),
                            counters: Some((before, after)),
                        });
                    }
                    work.push(child);
                }
            }
        }
        let sum_check = out.clone();
        self.check_equal(
            "procedure",
            theta,
            || {
                sum_check
                    .iter()
                    .fold(Polynomial::zero(), |a, t| a.add(&t.expand(c, x, self.g)))
            },
            x,
        )?;
        Ok(out)
    }

    /// Runs one step on a state: emits finished terms into `out` and returns
    /// the successor states with a label of the step taken.
    fn procedure_step(
        &mut self,
        st: State,
        c: Option<&Block>,
        x: IndexSet,
        full_bound: i64,
        out: &mut Vec<ProcedureTerm>,
    ) -> Result<Vec<(&'static str, State)>> {
        let g = self.g;
        let n = x.len();
        // Step 1: enough difference-type degree for a full block decomposition.
        if i64::from(st.alpha.degree() + st.beta.degree()) >= full_bound {
            let ab = st.alpha.mul(&st.beta);
            for bt in self.decompose_flipped(&term(&Rational::one(), &ab), c, x, 2 * g)? {
                out.push(ProcedureTerm::Block {
                    block: bt.block,
                    cofactor: bt.cofactor.mul_pp(&st.gamma).scale(&st.coef),
                });
            }
            self.log("procedure", "step 1", || {
                format!("deg(αβ) = {}", ab.degree())
            });
            return Ok(Vec::new());
        }
        // Step 2 chooses between steps 3 and 4.
        if i64::from(st.alpha.degree()) >= block_solve_bound(n, 1) {
            return self.procedure_step_three(st, c, x, out);
        }
        self.procedure_step_four(st, c, x, out)
    }

    fn procedure_step_three(
        &mut self,
        st: State,
        c: Option<&Block>,
        x: IndexSet,
        out: &mut Vec<ProcedureTerm>,
    ) -> Result<Vec<(&'static str, State)>> {
        let two_g = 2 * self.g;
        let mut children = Vec::new();
        for bt in self.decompose_flipped(&term(&Rational::one(), &st.alpha), c, x, 1)? {
            let (bp, sign) = block_product(c, &bt.block);
            let pairs = block_pairs(&bt.block);
            for (phi, c2) in bt.cofactor.canonical().into_terms() {
                let coef = &st.coef * &c2 * &sign;
                if (st.slots.len() as u32) < two_g {
                    let mut slots = st.slots.clone();
                    slots.push(Slot {
                        blocks: vec![bt.block],
                        pairs: pairs.clone(),
                    });
                    children.push((
                        "step 3(a)",
                        State {
                            coef,
                            alpha: phi,
                            beta: st.beta.mul(&bp),
                            gamma: st.gamma.clone(),
                            slots,
                        },
                    ));
                    continue;
                }
                match st.slots.iter().position(|s| !pairs.is_subset(&s.pairs)) {
                    None => {
                        let full = phi.mul(&bp).mul(&st.beta).mul(&st.gamma);
                        let cofactor =
                            divide_out(&term(&coef, &full), &bp.pow(two_g), "step 3(b)")?;
                        out.push(ProcedureTerm::Block {
                            block: bt.block,
                            cofactor,
                        });
                        self.log("procedure", "step 3(b) stop", || {
                            format!("block {}", bt.block)
                        });
                    }
                    Some(m) => {
                        let mut slots = st.slots.clone();
                        let mut alpha = phi;
                        let mut beta = st.beta.clone();
                        for &(i, j) in &pairs {
                            let v = difference_var(c, i, j);
                            if slots[m].pairs.insert((i, j)) {
                                beta = beta.mul(&PowerProduct::var(v, 1));
                            } else {
                                alpha = alpha.mul(&PowerProduct::var(v, 1));
                            }
                        }
                        slots[m].blocks.push(bt.block);
                        children.push((
                            "step 3(b)",
                            State {
                                coef,
                                alpha,
                                beta,
                                gamma: st.gamma.clone(),
                                slots,
                            },
                        ));
                    }
                }
            }
        }
        Ok(children)
    }

    fn procedure_step_four(
        &mut self,
        st: State,
        c: Option<&Block>,
        x: IndexSet,
        out: &mut Vec<ProcedureTerm>,
    ) -> Result<Vec<(&'static str, State)>> {
        let two_g = 2 * self.g;
        let v = x.to_vec();
        let mut deficient = None;
        'outer: for (a, &i) in v.iter().enumerate() {
            for &j in &v[a + 1..] {
                if d_pair(c, &st, i, j) < two_g {
                    deficient = Some((i, j));
                    break 'outer;
                }
            }
        }
        let Some((i, j)) = deficient else {
            let mut slots: Vec<BlockUnion> =
                st.slots.iter().map(|s| BlockUnion::of(&s.blocks)).collect();
            slots.resize(two_g as usize, BlockUnion::empty());
            let fixed = slots.iter().fold(PowerProduct::one(), |acc, u| {
                acc.mul(&slot_factor(c, x, &unordered_pairs(u)))
            });
            let full = st.alpha.mul(&st.beta).mul(&st.gamma);
            let cofactor = divide_out(&term(&st.coef, &full), &fixed, "step 4(a)")?;
            out.push(ProcedureTerm::Slots { slots, cofactor });
            self.log("procedure", "step 4(a) stop", || {
                format!("{} slots", st.slots.len())
            });
            return Ok(Vec::new());
        };
        let donor = v
            .iter()
            .enumerate()
            .flat_map(|(a, &k)| v[a..].iter().map(move |&l| (k, l)))
            .find(|&(k, l)| {
                let s = sum_var(c, k, l);
                st.gamma.exponent(s) > 0 && (k == l || d_pair(c, &st, k, l) > two_g)
            });
        let Some((k, l)) = donor else {
            return Err(Error::TheoremViolation(format!(
                "step 4(b): pair ({i},{j}) is deficient but no donor symbol exists"
            )));
        };
        let gamma = st
            .gamma
            .checked_div(&PowerProduct::var(sum_var(c, k, l), 1))
            .expect("donor present");
        let mut children = Vec::new();
        for (s, lit, is_sum) in step_four_pieces(c, i, j, k, l) {
            let (cv, sign) = canon(lit);
            let coef = &st.coef * Rational::from_integer(s.into()) * sign;
            let one = PowerProduct::var(cv, 1);
            let child = if is_sum {
                State {
                    coef,
                    alpha: st.alpha.clone(),
                    beta: st.beta.clone(),
                    gamma: gamma.mul(&one),
                    slots: st.slots.clone(),
                }
            } else {
                State {
                    coef,
                    alpha: st.alpha.mul(&one),
                    beta: st.beta.clone(),
                    gamma: gamma.clone(),
                    slots: st.slots.clone(),
                }
            };
            children.push(("step 4(b)", child));
        }
        self.log("procedure", "step 4(b)", || {
            format!("deficient ({i},{j}), donor ({k},{l})")
        });
        Ok(children)
    }
}

/// `d_ij` of a state.
fn d_pair(c: Option<&Block>, st: &State, i: u32, j: u32) -> u32 {
    st.beta.exponent(difference_var(c, i, j)) + st.gamma.exponent(sum_var(c, i, j))
}

/// Runs the procedure on the monomial `p` over `{1, …, n}` signed by `c`.
pub fn procedure_reduce(
    p: &Monomial,
    c: Option<&Block>,
    n: u32,
    g: u32,
) -> Result<Vec<ProcedureTerm>> {
    let x = IndexSet::range1(n)?;
    if let Some(c) = c {
        if c.x() != x {
            return Err(Error::Malformed(format!("block {c} is not over {x}")));
        }
    }
    if g == 0 {
        return Err(Error::Precondition("g must be positive".into()));
    }
    let (coef, pp) = canonical_monomial(p)?;
    Engine::new(g).procedure(&term(&coef, &pp), c, x)
}
