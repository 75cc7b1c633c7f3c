//! The recursive reduction over an index set `X` (`|X| ≥ 2`): a monomial of
//! degree at least `2g·m(m−1) − m + 1` becomes a sum of
//! [`StructuredTerm::Paired`] and [`StructuredTerm::Signed`] terms.
//!
//! For `|X| = 2` the monomial is rewritten in `y+12, y-12` and each term is
//! sorted by which exponent reaches `2g`. For larger `X` an index `z` is
//! removed, the avoiding part is reduced recursively, and each resulting
//! term over `X ∖ {z}` is extended back to `X`: paired terms by splitting
//! the cofactor across the two sides of their block, signed terms by first
//! peeling `z`-row symbols.

use std::rc::Rc;

use num_traits::One;
use serde::{Deserialize, Serialize};

use super::pigeonhole::{
    reduction_bound, select_z_unchecked, side_or_difference, split_sides, Branch,
};
use super::signing::{
    block_power, diagonal_vars, difference_vars, paired_factor, signed_factor, sum_var, vars_within,
};
use super::{divide_out, merge_structured, require_degree, term, Engine, StructuredTerm};
use crate::algebra::{Polynomial, PowerProduct, Rational, VarId};
use crate::blocks::{combine_two_sides, extend_through_z, restrict_opt, Block};
use crate::error::{Error, Result};
use crate::index_set::IndexSet;

/// Which guarantee a [`ZrowTerm`] satisfies.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ZrowKind {
    /// `q` uses difference-type symbols only and is of degree at least
    /// `m(m−1)g − m + 2`.
    HighDegree,
    /// `r` is `∏_{i≠z} (y^{−ε_V(i)}_{iz})^{2g}`.
    Peeled,
}

/// One term `coefficient · q · r` of the `z`-row reduction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ZrowTerm {
    /// Which guarantee holds.
    pub kind: ZrowKind,
    /// Coefficient.
    pub coefficient: Rational,
    /// The difference-type part (any remaining part for peeled terms).
    pub q: PowerProduct,
    /// The `z`-row part.
    pub r: PowerProduct,
}

impl ZrowTerm {
    /// `coefficient · q · r`.
    pub fn expand(&self) -> Polynomial {
        Polynomial::term(self.coefficient.clone(), self.q.mul(&self.r))
    }
}

/// One term `coefficient · (y+ii)^k · r` with `r` in difference-type symbols.
pub type DiagonalSplit = (Rational, u32, PowerProduct);

fn pow_var(v: VarId, e: u32) -> PowerProduct {
    if e == 0 {
        PowerProduct::one()
    } else {
        PowerProduct::var(v, e)
    }
}

fn z_row_var(b: Option<&Block>, i: u32, z: u32) -> VarId {
    sum_var(b, i, z).canonical().0
}

/// The side of a (possibly empty) block over `s` that contains `z`.
fn z_side(b: Option<&Block>, s: IndexSet, z: u32) -> IndexSet {
    match b {
        None => s,
        Some(b) if b.v().contains(z) => b.v(),
        Some(b) => b.vc(),
    }
}

impl Engine {
    /// Reduction of the canonical power product `pp` over `x`.
    pub(crate) fn structure(
        &mut self,
        pp: &PowerProduct,
        x: IndexSet,
    ) -> Result<Rc<Vec<StructuredTerm>>> {
        let key = (x, pp.clone());
        if let Some(hit) = self.structure_cache.get(&key) {
            return Ok(Rc::clone(hit));
        }
        require_degree(
            pp,
            x,
            reduction_bound(self.g, x.len()),
            "recursive reduction",
        )?;
        let terms = match x.len() {
            0 | 1 => {
                return Err(Error::Precondition(
                    "recursive reduction needs |X| >= 2".into(),
                ))
            }
            2 => self.structure_base(pp, x)?,
            _ => self.structure_step(pp, x)?,
        };
        let terms = merge_structured(terms);
        let g = self.g;
        self.check_equal(
            "recursive reduction",
            &Polynomial::from(pp.clone()),
            || {
                terms
                    .iter()
                    .fold(Polynomial::zero(), |acc, t| acc.add(&t.expand(x, g)))
            },
            x,
        )?;
        let rc = Rc::new(terms);
        self.structure_cache.insert(key, Rc::clone(&rc));
        Ok(rc)
    }

    fn structure_base(&mut self, pp: &PowerProduct, x: IndexSet) -> Result<Vec<StructuredTerm>> {
        let v = x.to_vec();
        let (a, b) = (v[0], v[1]);
        let (yp, ym) = (VarId::plus(a, b), VarId::minus(a, b));
        let two_g = 2 * self.g;
        let rw = self.rewrite(x, vec![yp, ym], &Polynomial::from(pp.clone()))?;
        let block = Block::from_sides(&[a], &[b])?;
        let mut out = Vec::new();
        for (t, c) in rw.into_terms() {
            if t.exponent(yp) >= two_g {
                out.push(StructuredTerm::Signed {
                    block: None,
                    cofactor: term(
                        &c,
                        &t.checked_div(&pow_var(yp, two_g))
                            .expect("exponent checked"),
                    ),
                });
            } else if t.exponent(ym) >= two_g {
                out.push(StructuredTerm::Signed {
                    block: Some(block),
                    cofactor: term(
                        &c,
                        &t.checked_div(&pow_var(ym, two_g))
                            .expect("exponent checked"),
                    ),
                });
            } else {
                return Err(Error::TheoremViolation(format!(
                    "base case: neither exponent of {t} reaches {two_g}"
                )));
            }
        }
        self.log("recursive reduction", "base", || format!("{pp} over {x}"));
        Ok(out)
    }

    fn structure_step(&mut self, pp: &PowerProduct, x: IndexSet) -> Result<Vec<StructuredTerm>> {
        let (z, q, r) = select_z_unchecked(pp, x, self.g)?;
        self.log("index selection", "z", || {
            format!("z = {z}, deg q = {}, deg r = {}", q.degree(), r.degree())
        });
        let sub = self.structure(&q, x.without(z))?;
        let mut out = Vec::new();
        for t in sub.iter() {
            let k = t.cofactor().mul_pp(&r);
            match t {
                StructuredTerm::Paired { block, .. } => {
                    out.extend(self.codim_paired(x, z, block, &k)?)
                }
                StructuredTerm::Signed { block, .. } => {
                    out.extend(self.codim_signed(x, z, *block, &k)?)
                }
            }
        }
        Ok(out)
    }

    /// Extends a block over one side (`H ∪ {z}` when `on_h`) through `z`.
    fn extend_side(cb: &Block, blk: &Block, on_h: bool, z: u32) -> Result<Block> {
        if on_h {
            extend_through_z(&cb.bar(), blk, z)
        } else {
            extend_through_z(cb, blk, z)
        }
    }

    /// Combines (possibly empty) blocks over `H ∪ {z}` and `W ∪ {z}`.
    fn combine_sides(
        cb: &Block,
        dh: Option<&Block>,
        fw: Option<&Block>,
        x: IndexSet,
        z: u32,
    ) -> Result<Option<Block>> {
        if let (Some(d), Some(f)) = (dh, fw) {
            return Ok(Some(combine_two_sides(cb, d, f, z)?.0));
        }
        let v = z_side(dh, cb.v().with(z), z).union(z_side(fw, cb.vc().with(z), z));
        if v == x {
            Ok(None)
        } else {
            Ok(Some(Block::new(v, x)?))
        }
    }

    /// `k · ∏_{(i,j)∈C}(y+ij y-ij)^{2g}` for a block `C = H × W` over
    /// `X ∖ {z}`, as structured terms over `X`.
    pub(crate) fn codim_paired(
        &mut self,
        x: IndexSet,
        z: u32,
        cb: &Block,
        k: &Polynomial,
    ) -> Result<Vec<StructuredTerm>> {
        let g = self.g;
        let m = x.len();
        let (hz, wz) = (cb.v().with(z), cb.vc().with(z));
        let (h, w) = (cb.v().len(), cb.vc().len());
        let zz = VarId::plus(z, z);
        let c_factor = paired_factor(cb, g);
        let mut allowed = diagonal_vars(x);
        allowed.extend(vars_within(hz));
        allowed.extend(vars_within(wz));
        let rw = self.rewrite(x, allowed, k)?;
        let mut out = Vec::new();
        for (pp, c) in rw.into_terms() {
            let (ph, pw) = pp.partition(|v| hz.contains(v.i) && hz.contains(v.j));
            let (on_h, main, other) = match split_sides(g, m, w, h, ph.degree(), pw.degree())? {
                Branch::First => (true, ph, pw),
                Branch::Second => {
                    let e = ph.exponent(zz);
                    let ph2 = ph.checked_div(&pow_var(zz, e)).expect("own factor");
                    let pw2 = pw.mul(&pow_var(zz, e));
                    match split_sides(g, m, w, h, ph2.degree(), pw2.degree())? {
                        Branch::First => (true, ph2, pw2),
                        Branch::Second => (false, pw2, ph2),
                    }
                }
            };
            self.log("split sides", if on_h { "H" } else { "W" }, || {
                format!("C = {cb}, z = {z}")
            });
            let (s1, s2) = if on_h { (hz, wz) } else { (wz, hz) };
            let sub = self.structure(&main, s1)?;
            for t in sub.iter() {
                match t {
                    StructuredTerm::Paired { block: d, cofactor } => {
                        let e = Self::extend_side(cb, d, on_h, z)?;
                        let full = cofactor
                            .mul_pp(&other.mul(&paired_factor(d, g)).mul(&c_factor))
                            .scale(&c);
                        out.push(StructuredTerm::Paired {
                            block: e,
                            cofactor: divide_out(&full, &paired_factor(&e, g), "extension")?,
                        });
                    }
                    StructuredTerm::Signed {
                        block: d,
                        cofactor: chi,
                    } => {
                        let mut allowed = difference_vars(d.as_ref(), s1);
                        allowed.push(zz);
                        let rw2 = self.rewrite(s1, allowed, chi)?;
                        let d_factor = signed_factor(d.as_ref(), s1, g);
                        for (pp2, c2) in rw2.into_terms() {
                            let ez = pp2.exponent(zz);
                            let a1 = pp2.checked_div(&pow_var(zz, ez)).expect("own factor");
                            let a2 = other.mul(&pow_var(zz, ez));
                            let coef = &c * &c2;
                            let base = d_factor.mul(&c_factor);
                            let branch = side_or_difference(
                                g,
                                m,
                                s2.len() - 1,
                                s1.len() - 1,
                                a2.degree(),
                                a1.degree(),
                            )?;
                            self.log(
                                "side or difference",
                                if branch == Branch::First {
                                    "side"
                                } else {
                                    "difference"
                                },
                                || {
                                    format!(
                                        "D = {}",
                                        d.map_or("empty".to_string(), |b| b.to_string())
                                    )
                                },
                            );
                            match branch {
                                Branch::First => {
                                    let sub2 = self.structure(&a2, s2)?;
                                    for t2 in sub2.iter() {
                                        match t2 {
                                            StructuredTerm::Paired {
                                                block: f,
                                                cofactor: th,
                                            } => {
                                                let e = Self::extend_side(cb, f, !on_h, z)?;
                                                let full = th
                                                    .mul_pp(
                                                        &a1.mul(&paired_factor(f, g)).mul(&base),
                                                    )
                                                    .scale(&coef);
                                                out.push(StructuredTerm::Paired {
                                                    block: e,
                                                    cofactor: divide_out(
                                                        &full,
                                                        &paired_factor(&e, g),
                                                        "extension",
                                                    )?,
                                                });
                                            }
                                            StructuredTerm::Signed {
                                                block: f,
                                                cofactor: ph,
                                            } => {
                                                let (dh, fw) = if on_h {
                                                    (d.as_ref(), f.as_ref())
                                                } else {
                                                    (f.as_ref(), d.as_ref())
                                                };
                                                let a = Self::combine_sides(cb, dh, fw, x, z)?;
                                                let full = ph
                                                    .mul_pp(
                                                        &a1.mul(&signed_factor(f.as_ref(), s2, g))
                                                            .mul(&base),
                                                    )
                                                    .scale(&coef);
                                                out.push(StructuredTerm::Signed {
                                                    block: a,
                                                    cofactor: divide_out(
                                                        &full,
                                                        &signed_factor(a.as_ref(), x, g),
                                                        "combination",
                                                    )?,
                                                });
                                            }
                                        }
                                    }
                                }
                                Branch::Second => {
                                    let flips = self.decompose_flipped(
                                        &term(&Rational::one(), &a1),
                                        d.as_ref(),
                                        s1,
                                        2 * g,
                                    )?;
                                    for bt in flips {
                                        let e = Self::extend_side(cb, &bt.block, on_h, z)?;
                                        let full = bt
                                            .cofactor
                                            .mul(&block_power(d.as_ref(), &bt.block, 2 * g))
                                            .mul_pp(&a2.mul(&base))
                                            .scale(&coef);
                                        out.push(StructuredTerm::Paired {
                                            block: e,
                                            cofactor: divide_out(
                                                &full,
                                                &paired_factor(&e, g),
                                                "flipped extension",
                                            )?,
                                        });
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
        Ok(out)
    }

    /// `k · F` where `F` is the signed factor of a (possibly empty) block
    /// over `X ∖ {z}`, as structured terms over `X`.
    pub(crate) fn codim_signed(
        &mut self,
        x: IndexSet,
        z: u32,
        cs: Option<Block>,
        k: &Polynomial,
    ) -> Result<Vec<StructuredTerm>> {
        let g = self.g;
        let ct = cs.map(|b| Block::new(b.v(), x)).transpose()?;
        let zt = self.zrow(k, ct.as_ref(), x, z)?;
        let cs_factor = signed_factor(cs.as_ref(), x.without(z), g);
        let mut out = Vec::new();
        for t in zt {
            match t.kind {
                ZrowKind::Peeled => {
                    let full = term(&t.coefficient, &t.q.mul(&t.r).mul(&cs_factor));
                    out.push(StructuredTerm::Signed {
                        block: ct,
                        cofactor: divide_out(
                            &full,
                            &signed_factor(ct.as_ref(), x, g),
                            "z-row peeling",
                        )?,
                    });
                }
                ZrowKind::HighDegree => {
                    let flips = self.decompose_flipped(
                        &term(&Rational::one(), &t.q),
                        ct.as_ref(),
                        x,
                        2 * g,
                    )?;
                    for bt in flips {
                        let full = bt
                            .cofactor
                            .mul(&block_power(ct.as_ref(), &bt.block, 2 * g))
                            .mul_pp(&t.r.mul(&cs_factor))
                            .scale(&t.coefficient);
                        match restrict_opt(&bt.block, z) {
                            Some(g2) => {
                                self.log("restriction", "block", || {
                                    format!("{} restricts to {g2}", bt.block)
                                });
                                let kk = divide_out(&full, &paired_factor(&g2, g), "restriction")?;
                                out.extend(self.codim_paired(x, z, &g2, &kk)?);
                            }
                            None => {
                                let v = cs.map_or(IndexSet::EMPTY, |b| b.v()).with(z);
                                let cp = Block::new(v, x)?;
                                self.log("restriction", "degenerate", || {
                                    format!("{} isolates {z}; using {cp}", bt.block)
                                });
                                out.push(StructuredTerm::Signed {
                                    block: Some(cp),
                                    cofactor: divide_out(
                                        &full,
                                        &signed_factor(Some(&cp), x, g),
                                        "isolated index",
                                    )?,
                                });
                            }
                        }
                    }
                }
            }
        }
        Ok(out)
    }

    /// The `z`-row reduction (see [`zrow_reduce`]).
    pub(crate) fn zrow(
        &mut self,
        k: &Polynomial,
        ct: Option<&Block>,
        x: IndexSet,
        z: u32,
    ) -> Result<Vec<ZrowTerm>> {
        let g = self.g;
        let m = x.len() as i64;
        let bound = m * (m - 1) * i64::from(g) - m + 2;
        let diffs = difference_vars(ct, x);
        let mut current = k.canonical();
        let full_row = x
            .iter()
            .filter(|&i| i != z)
            .fold(PowerProduct::one(), |acc, i| {
                acc.mul(&pow_var(z_row_var(ct, i, z), 2 * g))
            });
        if current.terms().all(|(pp, _)| pp.is_divisible_by(&full_row)) {
            return Ok(current
                .into_terms()
                .map(|(pp, c)| ZrowTerm {
                    kind: ZrowKind::Peeled,
                    coefficient: c,
                    q: pp.checked_div(&full_row).expect("divisibility checked"),
                    r: full_row.clone(),
                })
                .collect());
        }
        let mut peeled = PowerProduct::one();
        let mut out = Vec::new();
        for i in x.iter().filter(|&i| i != z) {
            let t = z_row_var(ct, i, z);
            let mut allowed = diffs.clone();
            allowed.push(t);
            let rw = self.rewrite(x, allowed, &current)?;
            let mut next = Polynomial::zero();
            for (pp, c) in rw.into_terms() {
                let d = pp.exponent(t);
                let q = pp.checked_div(&pow_var(t, d)).expect("own factor");
                if i64::from(q.degree()) >= bound {
                    out.push(ZrowTerm {
                        kind: ZrowKind::HighDegree,
                        coefficient: c,
                        q,
                        r: peeled.mul(&pow_var(t, d)),
                    });
                } else if d >= 2 * g {
                    next.add_term(
                        c,
                        pp.checked_div(&pow_var(t, 2 * g))
                            .expect("exponent checked"),
                    );
                } else {
                    return Err(Error::TheoremViolation(format!(
                        "z-row reduction: {pp} has neither a large part nor {t}^{}",
                        2 * g
                    )));
                }
            }
            peeled = peeled.mul(&pow_var(t, 2 * g));
            current = next;
        }
        for (pp, c) in current.into_terms() {
            out.push(ZrowTerm {
                kind: ZrowKind::Peeled,
                coefficient: c,
                q: pp,
                r: peeled.clone(),
            });
        }
        self.check_equal(
            "z-row reduction",
            k,
            || {
                out.iter()
                    .fold(Polynomial::zero(), |a, t| a.add(&t.expand()))
            },
            x,
        )?;
        Ok(out)
    }
}

/// The structured reduction of a monomial over `x` (`|X| ≥ 2`, degree at
/// least `2g·|X|(|X|−1) − |X| + 1`).
pub fn structure_reduce(p: &Polynomial, x: IndexSet, g: u32) -> Result<Vec<StructuredTerm>> {
    let mut engine = Engine::new(g);
    let mut out = Vec::new();
    for (pp, c) in p.canonical().into_terms() {
        for t in engine.structure(&pp, x)?.iter() {
            let mut t = t.clone();
            match &mut t {
                StructuredTerm::Paired { cofactor, .. }
                | StructuredTerm::Signed { cofactor, .. } => *cofactor = cofactor.scale(&c),
            }
            out.push(t);
        }
    }
    Ok(merge_structured(out))
}

/// Rewrites `p` (every term of degree at least
/// `2g·m(m−1) − m + 1 − (m−1)(m−2)g`) into terms `q · r` where either `q` is a
/// difference-type monomial for `b` of degree at least `m(m−1)g − m + 2`, or
/// `r = ∏_{i≠z}(y^{−ε_V(i)}_{iz})^{2g}`. Requires `z ∉ V`.
pub fn zrow_reduce(
    p: &Polynomial,
    b: Option<&Block>,
    x: IndexSet,
    z: u32,
    g: u32,
) -> Result<Vec<ZrowTerm>> {
    if let Some(b) = b {
        if b.x() != x {
            return Err(Error::Malformed(format!("block {b} is not over {x}")));
        }
        if b.v().contains(z) {
            return Err(Error::Precondition(format!(
                "{z} must lie in the complement side of {b}"
            )));
        }
    }
    if !x.contains(z) {
        return Err(Error::Malformed(format!("{z} is not in {x}")));
    }
    let m = x.len() as i64;
    let hyp = reduction_bound(g, x.len()) - (m - 1) * (m - 2) * i64::from(g);
    for (pp, _) in p.terms() {
        require_degree(pp, x, hyp, "z-row reduction")?;
    }
    Engine::new(g).zrow(p, b, x, z)
}

/// Rewrites `p` over `x` in the generators `Y⁻_B(X) ∪ {y+ii}` (using
/// `[y^{ε}_{iz} + y^{−ε}_{iz}] = [2y+ii]` and its relatives), returning the
/// terms as `(coefficient, exponent of y+ii, difference-type rest)`.
pub fn change_generators_diag(
    p: &Polynomial,
    b: Option<&Block>,
    x: IndexSet,
    i: u32,
) -> Result<Vec<DiagonalSplit>> {
    if !x.contains(i) || !p.support().is_subset(x) {
        return Err(Error::Malformed(format!(
            "{p} or index {i} is not over {x}"
        )));
    }
    let diag = VarId::plus(i, i);
    let mut allowed = difference_vars(b, x);
    allowed.push(diag);
    let rw = super::Rewriter::new(x, allowed)?.apply(p);
    Ok(rw
        .into_terms()
        .map(|(pp, c)| {
            let e = pp.exponent(diag);
            (c, e, pp.checked_div(&pow_var(diag, e)).expect("own factor"))
        })
        .collect())
}
