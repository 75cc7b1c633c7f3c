//! Degree-counting ("pigeonhole") lemmas that decide which branch of the
//! reduction applies, and the choice of the distinguished index `z`.
//!
//! Each predicate receives the degrees of the two factors of a product,
//! checks the lemma's hypothesis on their sum, and reports which of the two
//! guaranteed alternatives holds (the first when both do).

use serde::{Deserialize, Serialize};

use crate::algebra::PowerProduct;
use crate::error::{Error, Result};
use crate::index_set::IndexSet;

/// Which alternative of a two-way degree lemma holds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    /// The first alternative.
    First,
    /// The second alternative (only reported when the first fails).
    Second,
}

fn g64(g: u32) -> i64 {
    i64::from(g)
}

/// Lower bound on the degree of a monomial entering the recursive reduction
/// over a set of size `m`: `2g·m(m−1) − m + 1`.
pub fn reduction_bound(g: u32, m: usize) -> i64 {
    let m = m as i64;
    2 * g64(g) * m * (m - 1) - m + 1
}

/// The main degree bound `2g·n² + ½(n−1)(n−2)`.
pub fn theorem_bound(g: u32, n: usize) -> i64 {
    let n = n as i64;
    2 * g64(g) * n * n + (n - 1) * (n - 2) / 2
}

/// Degree from which the difference-type block decomposition with exponent
/// `a` is guaranteed over a set of size `m`: `½m(m−1)a − m + 2`.
pub fn block_solve_bound(m: usize, a: u32) -> i64 {
    let m = m as i64;
    m * (m - 1) * i64::from(a) / 2 - m + 2
}

/// Guaranteed degree of the part avoiding the best index `z`:
/// `2g(m−1)(m−2) − m + 2`.
pub fn avoiding_part_bound(g: u32, m: usize) -> i64 {
    let m = m as i64;
    2 * g64(g) * (m - 1) * (m - 2) - m + 2
}

fn decide(
    name: &str,
    total: i64,
    hyp: i64,
    first: (i64, i64),
    second: (i64, i64),
) -> Result<Branch> {
    if total < hyp {
        return Err(Error::Precondition(format!(
            "{name}: degree {total} below the hypothesis {hyp}"
        )));
    }
    if first.0 >= first.1 {
        Ok(Branch::First)
    } else if second.0 >= second.1 {
        Ok(Branch::Second)
    } else {
        Err(Error::TheoremViolation(format!(
            "{name}: neither {} >= {} nor {} >= {} although the total {total} >= {hyp}",
            first.0, first.1, second.0, second.1
        )))
    }
}

/// Two sides `H, W` of sizes `h, w` with `h + w = m − 1`, a product
/// `p_h p_w` of degree at least `2g·m(m−1) − m + 1 − 4g·wh`: either
/// `deg p_h ≥ 2g·h(h+1) − h` (first) or `deg p_w ≥ 2g·w(w+1) − w`.
pub fn split_sides(g: u32, m: usize, w: usize, h: usize, deg_h: u32, deg_w: u32) -> Result<Branch> {
    let (gi, wi, hi) = (g64(g), w as i64, h as i64);
    let hyp = reduction_bound(g, m) - 4 * gi * wi * hi;
    decide(
        "split_sides",
        i64::from(deg_h) + i64::from(deg_w),
        hyp,
        (i64::from(deg_h), 2 * gi * hi * (hi + 1) - hi),
        (i64::from(deg_w), 2 * gi * wi * (wi + 1) - wi),
    )
}

/// Two sides of sizes `w + h = n` and a product of degree at least
/// `2g·n² + ½(n−1)(n−2) − 4g·wh`: either `deg p_w ≥ 2g·w² + ½(w−1)(w−2)`
/// (first) or `deg p_h ≥ 2g·h² + ½(h−1)(h−2)`.
pub fn square_sides(
    g: u32,
    n: usize,
    w: usize,
    h: usize,
    deg_w: u32,
    deg_h: u32,
) -> Result<Branch> {
    let gi = g64(g);
    let hyp = theorem_bound(g, n) - 4 * gi * (w as i64) * (h as i64);
    decide(
        "square_sides",
        i64::from(deg_w) + i64::from(deg_h),
        hyp,
        (i64::from(deg_w), theorem_bound(g, w)),
        (i64::from(deg_h), theorem_bound(g, h)),
    )
}

/// A product `q r` over a set of size `n` of degree at least
/// `2g·n² + ½(n−1)(n−2) − n(n−1)g − 2g(n−1)`: either `deg q ≥ 2g` (first)
/// or `deg r ≥ n(n−1)g − n + 2`.
pub fn diagonal_or_difference(g: u32, n: usize, deg_q: u32, deg_r: u32) -> Result<Branch> {
    let (gi, ni) = (g64(g), n as i64);
    let hyp = theorem_bound(g, n) - ni * (ni - 1) * gi - 2 * gi * (ni - 1);
    decide(
        "diagonal_or_difference",
        i64::from(deg_q) + i64::from(deg_r),
        hyp,
        (i64::from(deg_q), 2 * gi),
        (i64::from(deg_r), ni * (ni - 1) * gi - ni + 2),
    )
}

/// Sides of sizes `w + h = m − 1` and a product `q r` of degree at least
/// `2g·m(m−1) − m + 1 − 4g·wh − h(h+1)g`: either
/// `deg q ≥ 2g·w(w+1) − w` (first) or `deg r ≥ h(h+1)g − (h+1) + 2`.
pub fn side_or_difference(
    g: u32,
    m: usize,
    w: usize,
    h: usize,
    deg_q: u32,
    deg_r: u32,
) -> Result<Branch> {
    let (gi, wi, hi) = (g64(g), w as i64, h as i64);
    let hyp = reduction_bound(g, m) - 4 * gi * wi * hi - hi * (hi + 1) * gi;
    decide(
        "side_or_difference",
        i64::from(deg_q) + i64::from(deg_r),
        hyp,
        (i64::from(deg_q), 2 * gi * wi * (wi + 1) - wi),
        (i64::from(deg_r), hi * (hi + 1) * gi - (hi + 1) + 2),
    )
}

/// Splits a canonical power product over `x` into the part avoiding `z` and
/// the part touching `z`.
pub fn split_at(p: &PowerProduct, z: u32) -> (PowerProduct, PowerProduct) {
    p.partition(|v| v.i != z && v.j != z)
}

pub(crate) fn select_z_unchecked(
    p: &PowerProduct,
    x: IndexSet,
    g: u32,
) -> Result<(u32, PowerProduct, PowerProduct)> {
    let m = x.len();
    let deg = i64::from(p.degree());
    if deg < reduction_bound(g, m) {
        return Err(Error::Precondition(format!(
            "degree {deg} below {} for |X| = {m}",
            reduction_bound(g, m)
        )));
    }
    let mut best: Option<(u32, PowerProduct, PowerProduct)> = None;
    for z in x.iter() {
        let (q, r) = split_at(p, z);
        if best
            .as_ref()
            .is_none_or(|(_, bq, _)| q.degree() > bq.degree())
        {
            best = Some((z, q, r));
        }
    }
    let (z, q, r) = best.ok_or_else(|| Error::Precondition("empty index set".into()))?;
    if i64::from(q.degree()) < avoiding_part_bound(g, m) {
        return Err(Error::TheoremViolation(format!(
            "no index leaves degree {} after removing it (best {})",
            avoiding_part_bound(g, m),
            q.degree()
        )));
    }
    Ok((z, q, r))
}

/// The index `z ∈ X` whose removal leaves the largest part `q_z` of the
/// (canonical) monomial `p` (smallest such `z` on ties), together with the
/// factorization `p = q_z · r_z`. Requires `|X| > 3` and
/// `deg p ≥ 2g·m(m−1) − m + 1`; then `deg q_z ≥ 2g(m−1)(m−2) − m + 2`.
pub fn select_z(
    p: &PowerProduct,
    x: IndexSet,
    g: u32,
) -> Result<(u32, PowerProduct, PowerProduct)> {
    if x.len() <= 3 {
        return Err(Error::Precondition(format!(
            "index selection needs |X| > 3, got {}",
            x.len()
        )));
    }
    if !p.support().is_subset(x) {
        return Err(Error::Malformed(format!("monomial {p} is not over {x}")));
    }
    select_z_unchecked(p, x, g)
}
