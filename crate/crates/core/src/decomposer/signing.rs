//! Sign conventions attached to a block (or to the empty block) and the
//! recurring products of symbols built from them.
//!
//! For a block `B = V × Vᶜ`, `ε_B(i, j) = +1` exactly when `(i, j)` crosses
//! the block; the empty block has `ε ≡ −1` and `V = ∅`. The "difference
//! type" symbol of a pair is `y^{ε_B(i,j)}_{ij}` and the "sum type" symbol is
//! `y^{−ε_B(i,j)}_{ij}`; with `eᵢ = ε_V(i)·dᵢ` their classes are
//! `½ε_V(i)(eᵢ − eⱼ)` and `½ε_V(i)(eᵢ + eⱼ)`.

use crate::algebra::{Polynomial, PowerProduct, Sign, VarId};
use crate::blocks::Block;
use crate::index_set::IndexSet;

/// `ε_B(i, j)`, with the empty block giving `−1`.
pub fn pair_sign(b: Option<&Block>, i: u32, j: u32) -> i8 {
    b.map_or(-1, |b| b.eps_b(i, j))
}

/// `ε_V(i)`, with the empty block giving `−1` (its `V` is empty).
pub fn index_sign(b: Option<&Block>, i: u32) -> i8 {
    b.map_or(-1, |b| b.eps_v(i))
}

/// The literal difference-type symbol `y^{ε_B(i,j)}_{ij}` (`i ≠ j`).
pub fn difference_var(b: Option<&Block>, i: u32, j: u32) -> VarId {
    VarId::signed(Sign::from_unit(pair_sign(b, i, j)), i, j)
}

/// The literal sum-type symbol `y^{−ε_B(i,j)}_{ij}`; for `i = j` this is `y+ii`.
pub fn sum_var(b: Option<&Block>, i: u32, j: u32) -> VarId {
    if i == j {
        return VarId::plus(i, i);
    }
    VarId::signed(Sign::from_unit(-pair_sign(b, i, j)), i, j)
}

/// The canonical (`i < j`) difference-type symbols over `x`: the generators
/// `Y⁻_B(X)`.
pub fn difference_vars(b: Option<&Block>, x: IndexSet) -> Vec<VarId> {
    let v = x.to_vec();
    let mut out = Vec::new();
    for (k, &i) in v.iter().enumerate() {
        for &j in &v[k + 1..] {
            out.push(difference_var(b, i, j));
        }
    }
    out
}

/// True when the canonical symbol `v` is a difference-type symbol for `b`.
pub fn is_difference_var(b: Option<&Block>, v: VarId) -> bool {
    v.i < v.j && v == difference_var(b, v.i, v.j)
}

/// Every canonical symbol with both indices in `s`.
pub fn vars_within(s: IndexSet) -> Vec<VarId> {
    let v = s.to_vec();
    let mut out = Vec::new();
    for (k, &i) in v.iter().enumerate() {
        out.push(VarId::plus(i, i));
        for &j in &v[k + 1..] {
            out.push(VarId::plus(i, j));
            out.push(VarId::minus(i, j));
        }
    }
    out
}

/// The diagonal symbols `y+ii`, `i ∈ s`.
pub fn diagonal_vars(s: IndexSet) -> Vec<VarId> {
    s.iter().map(|i| VarId::plus(i, i)).collect()
}

/// `∏_{(i,j)∈B} (y+ij y-ij)^{2g}` in canonical symbols (the sign is `+1`
/// because every exponent is even).
pub fn paired_factor(b: &Block, g: u32) -> PowerProduct {
    PowerProduct::from_factors(b.pairs().into_iter().flat_map(|(i, j)| {
        let (a, c) = (i.min(j), i.max(j));
        [(VarId::plus(a, c), 2 * g), (VarId::minus(a, c), 2 * g)]
    }))
}

/// `∏_{(i,j)∈B} (y-ij)^{2g} ∏_{(i,j)∉B∪B̄, i<j} (y+ij)^{2g}` over `x`, i.e.
/// the `2g`-th power of every canonical sum-type symbol off the diagonal.
pub fn signed_factor(b: Option<&Block>, x: IndexSet, g: u32) -> PowerProduct {
    let v = x.to_vec();
    let mut out = Vec::new();
    for (k, &i) in v.iter().enumerate() {
        for &j in &v[k + 1..] {
            out.push((sum_var(b, i, j), 2 * g));
        }
    }
    PowerProduct::from_factors(out)
}

/// The literal product `∏_{(i,j)∈C} (y^{ε_B(i,j)}_{ij})^a`.
pub fn block_power(b: Option<&Block>, c: &Block, a: u32) -> Polynomial {
    Polynomial::from(PowerProduct::from_factors(
        c.pairs()
            .into_iter()
            .map(|(i, j)| (difference_var(b, i, j), a)),
    ))
}

/// One generator slot's share of the procedure's output: for every unordered
/// pair `{i < j}` of `x`, the difference-type symbol when the pair is in
/// `meeting`, and the sum-type symbol otherwise.
pub fn slot_factor(
    b: Option<&Block>,
    x: IndexSet,
    meeting: &std::collections::BTreeSet<(u32, u32)>,
) -> PowerProduct {
    let v = x.to_vec();
    let mut out = Vec::new();
    for (k, &i) in v.iter().enumerate() {
        for &j in &v[k + 1..] {
            let var = if meeting.contains(&(i, j)) {
                difference_var(b, i, j)
            } else {
                sum_var(b, i, j)
            };
            out.push((var, 1));
        }
    }
    PowerProduct::from_factors(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{normal_form, ratio};
    use crate::blocks::enumerate_blocks;

    #[test]
    fn difference_and_sum_types_match_their_classes() {
        let x = IndexSet::range1(4).unwrap();
        let blocks: Vec<Option<Block>> = std::iter::once(None)
            .chain(enumerate_blocks(x).into_iter().map(Some))
            .collect();
        for b in &blocks {
            for i in x.iter() {
                for j in x.iter() {
                    let si = index_sign(b.as_ref(), i);
                    let sj = index_sign(b.as_ref(), j);
                    // e_k = s_k d_k, so ½ s_i (e_i ∓ e_j) = ½ (d_i ∓ s_i s_j d_j)
                    let expect = |sgn: i64| {
                        let mut p = crate::algebra::DiagonalPolynomial::zero(x);
                        let pi = x.position(i).unwrap();
                        let pj = x.position(j).unwrap();
                        let mut e = vec![0; 4];
                        e[pi] = 1;
                        p.add_term(ratio(1, 2), e);
                        let mut e = vec![0; 4];
                        e[pj] = 1;
                        p.add_term(ratio(sgn * i64::from(si) * i64::from(sj), 2), e);
                        p
                    };
                    let s = normal_form(&Polynomial::from(sum_var(b.as_ref(), i, j)), x).unwrap();
                    assert_eq!(s, expect(1));
                    if i != j {
                        let d = normal_form(&Polynomial::from(difference_var(b.as_ref(), i, j)), x)
                            .unwrap();
                        assert_eq!(d, expect(-1));
                    }
                }
            }
        }
    }

    #[test]
    fn factors_have_expected_degrees() {
        let x = IndexSet::range1(3).unwrap();
        let b = Block::from_sides(&[1], &[2, 3]).unwrap();
        assert_eq!(paired_factor(&b, 1).degree(), 8);
        assert_eq!(signed_factor(Some(&b), x, 1).degree(), 6);
        assert_eq!(
            signed_factor(None, x, 2).to_string(),
            signed_factor(None, x, 2).to_string()
        );
        assert_eq!(difference_vars(None, x).len(), 3);
        assert!(difference_vars(Some(&b), x)
            .iter()
            .all(|&v| is_difference_var(Some(&b), v)));
    }
}
