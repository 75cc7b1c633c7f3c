//! Change of generators: rewrite a polynomial so that only a prescribed set
//! of symbols occurs, using linear identities derived from the normal form
//! rather than transcribed by hand.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::Zero;

use crate::algebra::{linear_image, Polynomial, Rational, VarId};
use crate::error::{Error, Result};
use crate::index_set::IndexSet;
use crate::linalg::Echelon;

/// Rewrites polynomials over `X` into polynomials in an allowed set of
/// canonical symbols whose classes span the degree-one part of the ring.
#[derive(Clone, Debug)]
pub struct Rewriter {
    x: IndexSet,
    allowed: BTreeSet<VarId>,
    images: BTreeMap<VarId, Polynomial>,
}

fn linear_form(v: VarId, x: IndexSet) -> Result<Vec<Rational>> {
    let mut out = vec![Rational::zero(); x.len()];
    for (p, c) in linear_image(v, x)? {
        out[p] += c;
    }
    Ok(out)
}

/// Every canonical symbol over `x`.
fn all_vars(x: IndexSet) -> Vec<VarId> {
    super::signing::vars_within(x)
}

impl Rewriter {
    /// Prepares the rewrite; every canonical symbol outside `allowed` gets an
    /// expression in a basis chosen (greedily, in the given order) among the
    /// allowed symbols. Fails when the allowed symbols do not span.
    pub fn new<I: IntoIterator<Item = VarId>>(x: IndexSet, allowed: I) -> Result<Self> {
        let allowed: Vec<VarId> = allowed.into_iter().map(|v| v.canonical().0).collect();
        let mut ech = Echelon::new(x.len());
        let mut basis = Vec::new();
        for &v in &allowed {
            if ech.is_full() {
                break;
            }
            if ech.insert(linear_form(v, x)?) {
                basis.push(v);
            }
        }
        if !ech.is_full() {
            return Err(Error::Precondition(format!(
                "allowed symbols do not span the linear classes over {x}"
            )));
        }
        let allowed: BTreeSet<VarId> = allowed.into_iter().collect();
        let mut images = BTreeMap::new();
        for v in all_vars(x) {
            if allowed.contains(&v) {
                continue;
            }
            let (coeffs, res) = ech.reduce(&linear_form(v, x)?);
            debug_assert!(res.iter().all(Zero::is_zero));
            let mut img = Polynomial::zero();
            for (c, &b) in coeffs.iter().zip(&basis) {
                img.add_term(c.clone(), crate::algebra::PowerProduct::var(b, 1));
            }
            images.insert(v, img);
        }
        Ok(Rewriter { x, allowed, images })
    }

    /// The ambient index set.
    pub fn x(&self) -> IndexSet {
        self.x
    }

    /// True when `v` (canonicalized) is an allowed symbol.
    pub fn is_allowed(&self, v: VarId) -> bool {
        self.allowed.contains(&v.canonical().0)
    }

    /// A polynomial in allowed symbols only, equal to `p` in the ring.
    pub fn apply(&self, p: &Polynomial) -> Polynomial {
        p.canonical().substitute(|v| self.images.get(&v).cloned())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::equal_in_r;

    #[test]
    fn rewriting_into_diagonals_preserves_class() {
        let x = IndexSet::range1(3).unwrap();
        let rw = Rewriter::new(x, super::super::signing::diagonal_vars(x)).unwrap();
        let p = Polynomial::parse("1*y-12^2*y+23*y-31").unwrap();
        let q = rw.apply(&p);
        assert!(equal_in_r(&p, &q));
        assert!(q
            .terms()
            .all(|(pp, _)| pp.factors().iter().all(|(v, _)| v.i == v.j)));
    }

    #[test]
    fn non_spanning_set_is_rejected() {
        let x = IndexSet::range1(2).unwrap();
        assert!(Rewriter::new(x, [VarId::minus(1, 2)]).is_err());
    }
}
