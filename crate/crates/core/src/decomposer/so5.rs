//! The explicit reduction in rank two: every monomial over `{1, 2}` of
//! degree at least `8g` is a combination of the named good monomials
//! `z₁, z₂, y+ₘ, y-ₘ`.
//!
//! Writing `a` for the index whose diagonal exponent reaches `2g` and `b`
//! for the other one, the rewrites are
//! `y+aa = 2y+12 − y+bb`, `y+12 = y-ab + y+bb` and `y+bb = y+12 − y-ab`,
//! applied in the order of the case analysis; each finished term is then
//! divided by the first basis monomial (in the order `z1, z2, y+m, y-m`)
//! that divides it.

use serde::{Deserialize, Serialize};

use super::{Decomposition, DecompositionTerm, LemmaTrace};
use crate::algebra::{normal_form, Monomial, Polynomial, PowerProduct, Rational, VarId};
use crate::error::{Error, Result};
use crate::good::{so5_basis, GoodMonomial};
use crate::index_set::IndexSet;

/// One summand `multiplier · good` of the rank-two reduction.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct So5Term {
    /// The multiplier.
    pub multiplier: Polynomial,
    /// `z1`, `z2`, `y+m` or `y-m`.
    pub name: String,
    /// The basis monomial with its construction.
    pub good: GoodMonomial,
}

fn rat(n: i64) -> Rational {
    Rational::from_integer(n.into())
}

/// `(left)^e` expanded, with `left` a linear polynomial.
fn power(left: &Polynomial, e: u32) -> Polynomial {
    left.pow(e)
}

/// Splits `v^e` off a power product when the exponent reaches `k`.
fn peel(pp: &PowerProduct, v: VarId, k: u32) -> Option<(u32, PowerProduct)> {
    let e = pp.exponent(v);
    (e >= k).then(|| {
        (
            e,
            pp.checked_div(&PowerProduct::var(v, e))
                .expect("own factor"),
        )
    })
}

/// Reduces `p` over `{1, 2}` (degree at least `8g`) to the rank-two basis.
pub fn so5_decompose(p: &Monomial, g: u32) -> Result<Vec<So5Term>> {
    if g == 0 {
        return Err(Error::Precondition("g must be positive".into()));
    }
    let x = IndexSet::range1(2)?;
    let pp = &p.exponents;
    if !pp.support().is_subset(x) {
        return Err(Error::Malformed(format!("{p} is not over {{1, 2}}")));
    }
    if pp.degree() < 8 * g {
        return Err(Error::Precondition(format!(
            "degree {} below {}",
            pp.degree(),
            8 * g
        )));
    }
    let tg = 2 * g;
    let basis = so5_basis(g, false)?;
    let canon: Vec<(PowerProduct, bool)> = basis
        .iter()
        .map(|b| b.good.power_product().canonical())
        .collect();
    if p.is_zero() {
        return Ok(Vec::new());
    }
    // A monomial already divisible by a basis element is returned as one
    // term, preferring an exact match.
    let (input, input_neg) = pp.canonical();
    let direct = canon
        .iter()
        .position(|(q, _)| *q == input)
        .or_else(|| canon.iter().position(|(q, _)| input.is_divisible_by(q)));
    if let Some(k) = direct {
        let (q, qneg) = &canon[k];
        let c = if input_neg != *qneg {
            -p.coefficient.clone()
        } else {
            p.coefficient.clone()
        };
        let multiplier = Polynomial::term(c, input.checked_div(q).expect("divisible"));
        return Ok(vec![So5Term {
            multiplier,
            name: basis[k].name.clone(),
            good: basis[k].good.clone(),
        }]);
    }
    let nf = normal_form(&Polynomial::from(p.clone()), x)?;
    let mut finished: Vec<(Rational, PowerProduct)> = Vec::new();
    for (exps, lambda) in nf.terms() {
        let (a, b) = if exps[0] >= tg { (1, 2) } else { (2, 1) };
        let (ea, eb) = (exps[(a - 1) as usize], exps[(b - 1) as usize]);
        if ea < tg {
            return Err(Error::TheoremViolation(
                "neither diagonal exponent reaches 2g".into(),
            ));
        }
        let va = VarId::plus(a, a);
        let vb = VarId::plus(b, b);
        let vp = VarId::plus(1, 2);
        let vm = VarId::minus(a, b);
        let lp = |v: VarId| Polynomial::from(v);
        // y+aa^{ea} = y+aa^{2g} (2y+12 − y+bb)^{ea−2g}
        let first = power(&lp(vp).scale(&rat(2)).sub(&lp(vb)), ea - tg)
            .mul_pp(&PowerProduct::from_factors([(va, tg), (vb, eb)]))
            .scale(lambda);
        // finishing rewrite y+bb^{f} = y+bb^{2g} (y+12 − y-ab)^{f−2g}
        let finish =
            |c: &Rational, rest: &PowerProduct, f: u32, out: &mut Vec<(Rational, PowerProduct)>| {
                let expanded = power(&lp(vp).sub(&lp(vm)), f - tg)
                    .mul_pp(&rest.mul(&PowerProduct::var(vb, tg)))
                    .scale(c);
                out.extend(expanded.into_terms().map(|(q, c)| (c, q)));
            };
        for (t, c) in first.into_terms() {
            if let Some((e, rest)) = peel(&t, vp, tg) {
                // y+12^{e} = y+12^{2g} (y-ab + y+bb)^{e−2g}
                let second = power(&lp(vm).add(&lp(vb)), e - tg)
                    .mul_pp(&rest.mul(&PowerProduct::var(vp, tg)))
                    .scale(&c);
                for (t2, c2) in second.into_terms() {
                    if t2.exponent(vm) >= tg {
                        finished.push((c2, t2));
                    } else if let Some((f, rest2)) = peel(&t2, vb, tg) {
                        finish(&c2, &rest2, f, &mut finished);
                    } else {
                        return Err(Error::TheoremViolation(format!(
                            "rank two: {t2} has no large exponent"
                        )));
                    }
                }
            } else if let Some((f, rest)) = peel(&t, vb, tg) {
                finish(&c, &rest, f, &mut finished);
            } else {
                return Err(Error::TheoremViolation(format!(
                    "rank two: {t} has no large exponent"
                )));
            }
        }
    }
    let mut out: Vec<So5Term> = Vec::new();
    for (c, t) in finished {
        let (t, neg) = t.canonical();
        let c = if neg { -c } else { c };
        let k = canon
            .iter()
            .position(|(q, _)| t.is_divisible_by(q))
            .ok_or_else(|| {
                Error::TheoremViolation(format!("rank two: no basis monomial divides {t}"))
            })?;
        let (q, qneg) = &canon[k];
        let c = if *qneg { -c } else { c };
        let mult = Polynomial::term(c, t.checked_div(q).expect("divisible"));
        match out.iter_mut().find(|o| o.name == basis[k].name) {
            Some(o) => o.multiplier = o.multiplier.add(&mult),
            None => out.push(So5Term {
                multiplier: mult,
                name: basis[k].name.clone(),
                good: basis[k].good.clone(),
            }),
        }
    }
    out.retain(|t| !t.multiplier.is_zero());
    let sum = out.iter().fold(Polynomial::zero(), |s, t| {
        s.add(&t.multiplier.mul(&t.good.monomial))
    });
    if normal_form(&sum, x)? != nf {
        return Err(Error::TheoremViolation(
            "rank-two reduction does not reproduce its input".into(),
        ));
    }
    Ok(out)
}

/// The rank-two reduction packaged as a [`Decomposition`].
pub fn so5_decomposition(p: &Monomial, g: u32) -> Result<Decomposition> {
    let terms = so5_decompose(p, g)?
        .into_iter()
        .map(|t| DecompositionTerm {
            theta: t.multiplier,
            good: t.good,
        })
        .collect();
    Ok(Decomposition {
        input: p.clone(),
        n: 2,
        g,
        terms,
        residual_form: None,
        trace: LemmaTrace::default(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn multiple_of_basis_element_reduces_to_it() {
        let basis = so5_basis(1, false).unwrap();
        let z1 = &basis[0].good;
        let m = Monomial::unit(
            z1.power_product()
                .mul(&PowerProduct::var(VarId::plus(1, 1), 2)),
        );
        let out = so5_decompose(&m, 1).unwrap();
        let total = out.iter().fold(Polynomial::zero(), |s, t| {
            s.add(&t.multiplier.mul(&t.good.monomial))
        });
        assert!(crate::algebra::equal_in_r(&total, &Polynomial::from(m)));
    }
}
