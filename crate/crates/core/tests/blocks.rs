//! Block calculus: worked examples and exhaustive pair-set checks of the
//! combination rules, recomputed here from the literal set definitions.

use std::collections::BTreeSet;

use chern_core::blocks::{
    check_block_lemmas, combine_two_sides, enumerate_blocks, extend_through_z, restrict, sym_diff,
    PairSet, SideCase, SymDiff,
};
use chern_core::{Block, BlockUnion, IndexSet};
use proptest::prelude::*;

fn blk(v: &[u32], w: &[u32]) -> Block {
    Block::from_sides(v, w).unwrap()
}

fn x(n: u32) -> IndexSet {
    IndexSet::range1(n).unwrap()
}

/// `V × Vᶜ ∪ Vᶜ × V`, computed from scratch.
fn crossing(b: &Block) -> PairSet {
    let mut out = PairSet::new();
    for i in b.x().iter() {
        for j in b.x().iter() {
            if b.v().contains(i) != b.v().contains(j) {
                out.insert((i, j));
            }
        }
    }
    out
}

fn side_pairs(b: &Block) -> PairSet {
    b.v()
        .iter()
        .flat_map(|i| b.vc().iter().map(move |j| (i, j)))
        .collect()
}

fn union(sets: &[&PairSet]) -> PairSet {
    sets.iter().flat_map(|s| s.iter().copied()).collect()
}

#[test]
fn enumeration_examples() {
    assert_eq!(
        enumerate_blocks(x(2)),
        vec![blk(&[1], &[2]), blk(&[2], &[1])]
    );
    assert_eq!(enumerate_blocks(x(3)).len(), 6);
    assert!(enumerate_blocks(x(1)).is_empty());
    for n in 2..=6 {
        let all = enumerate_blocks(x(n));
        assert_eq!(all.len(), (1 << n) - 2);
        assert_eq!(all.iter().collect::<BTreeSet<_>>().len(), all.len());
    }
}

#[test]
fn indicator_examples() {
    let b = blk(&[1], &[2, 3]);
    assert_eq!(b.epsilon_b(1, 2).unwrap(), 1);
    assert_eq!(b.epsilon_b(2, 3).unwrap(), -1);
    assert_eq!(b.epsilon_b(1, 1).unwrap(), -1);
    assert_eq!(b.epsilon_v(1).unwrap(), 1);
    assert_eq!(b.epsilon_v(3).unwrap(), -1);
    assert_eq!(blk(&[1, 2], &[3]).epsilon_v(2).unwrap(), 1);
    assert!(b.epsilon_b(1, 4).is_err());
    assert!(b.epsilon_v(7).is_err());
}

#[test]
fn sym_diff_examples() {
    let b = blk(&[1, 2], &[3, 4]);
    let c = blk(&[1, 3], &[2, 4]);
    match sym_diff(&b, &c).unwrap() {
        SymDiff::Block(d) => assert!(d == blk(&[1, 4], &[2, 3]) || d == blk(&[2, 3], &[1, 4])),
        SymDiff::Empty => panic!("distinct blocks"),
    }
    assert_eq!(sym_diff(&b, &b).unwrap(), SymDiff::Empty);
    assert_eq!(sym_diff(&b, &b.bar()).unwrap(), SymDiff::Empty);
    assert!(sym_diff(&b, &blk(&[1], &[2])).is_err());
}

#[test]
fn restrict_examples() {
    assert_eq!(
        restrict(&blk(&[1, 2], &[3, 4]), 4).unwrap(),
        Some(blk(&[1, 2], &[3]))
    );
    assert_eq!(restrict(&blk(&[1], &[2, 3]), 1).unwrap(), None);
    assert_eq!(
        restrict(&blk(&[1, 3], &[2, 4]), 3).unwrap(),
        Some(blk(&[1], &[2, 4]))
    );
    assert!(restrict(&blk(&[1], &[2, 3]), 5).is_err());
}

#[test]
fn extension_examples() {
    // z = 3, B = {1}×{2} over {1, 2}.
    let b = blk(&[1], &[2]);
    let d = extend_through_z(&b, &blk(&[3], &[2]), 3).unwrap();
    assert_eq!(d, blk(&[1, 3], &[2]));
    // With C = {2}×{3} the result must still avoid the pair (1, 3), which
    // lies in none of B, C, bar(C).
    let c = blk(&[2], &[3]);
    let d = extend_through_z(&b, &c, 3).unwrap();
    assert!(side_pairs(&d).is_subset(&union(&[&side_pairs(&b), &crossing(&c)])));
    assert_eq!(d, blk(&[1, 3], &[2]));
}

#[test]
fn two_sided_examples() {
    let b = blk(&[1], &[2]);
    let (a, case) = combine_two_sides(&b, &blk(&[1], &[3]), &blk(&[2], &[3]), 3).unwrap();
    assert_eq!((a, case), (blk(&[1, 2], &[3]), SideCase::E));
    let (a, case) = combine_two_sides(&b, &blk(&[1], &[3]), &blk(&[3], &[2]), 3).unwrap();
    assert_eq!((a, case), (blk(&[1, 2], &[3]), SideCase::BarE));
    let (a, case) = combine_two_sides(&b, &blk(&[3], &[1]), &blk(&[3], &[2]), 3).unwrap();
    assert!(a == blk(&[3], &[1, 2]) || a == blk(&[1, 2], &[3]));
    assert_eq!(case, SideCase::E);
}

#[test]
fn json_shape() {
    let b = blk(&[1, 2], &[3, 4]);
    let v = serde_json::to_value(b).unwrap();
    assert_eq!(v, serde_json::json!({"V": [1, 2], "X": [1, 2, 3, 4]}));
    assert_eq!(serde_json::from_value::<Block>(v).unwrap(), b);
    assert!(
        serde_json::from_value::<Block>(serde_json::json!({"V": [1, 2], "X": [1, 2]})).is_err()
    );
}

#[test]
fn library_scan_passes_up_to_six() {
    let report = check_block_lemmas(6);
    assert!(report.passed(), "{:?}", report.failures);
    assert!(report.sym_diff_instances > 0 && report.combine_instances > 0);
}

/// Every rule, re-checked here literally for every ambient set `{1..m}`, `m ≤ 6`.
#[test]
fn combination_rules_hold_exhaustively() {
    for m in 2..=6 {
        let xs = x(m);
        let blocks = enumerate_blocks(xs);
        for b in &blocks {
            for c in &blocks {
                let lhs: PairSet = crossing(b)
                    .symmetric_difference(&crossing(c))
                    .copied()
                    .collect();
                match sym_diff(b, c).unwrap() {
                    SymDiff::Block(d) => assert_eq!(crossing(&d), lhs),
                    SymDiff::Empty => assert!(lhs.is_empty()),
                }
            }
            if m >= 3 {
                for z in xs.iter() {
                    let rest = xs.without(z);
                    let expect: PairSet = side_pairs(b)
                        .into_iter()
                        .filter(|&(i, j)| rest.contains(i) && rest.contains(j))
                        .collect();
                    match restrict(b, z).unwrap() {
                        Some(r) => assert_eq!(side_pairs(&r), expect),
                        None => assert!(expect.is_empty()),
                    }
                }
            }
        }
        if m < 3 {
            continue;
        }
        for z in xs.iter() {
            for b in enumerate_blocks(xs.without(z)) {
                let bp = side_pairs(&b);
                let bb = side_pairs(&b.bar());
                for c in enumerate_blocks(b.vc().with(z)) {
                    let d = extend_through_z(&b, &c, z).unwrap();
                    assert_eq!(d.x(), xs);
                    assert!(
                        side_pairs(&d).is_subset(&union(&[&bp, &crossing(&c)])),
                        "{b} {c} {z} -> {d}"
                    );
                }
                for c in enumerate_blocks(b.v().with(z)) {
                    for e in enumerate_blocks(b.vc().with(z)) {
                        let (a, case) = combine_two_sides(&b, &c, &e, z).unwrap();
                        let e2 = if case == SideCase::E { e } else { e.bar() };
                        let inner = union(&[&side_pairs(&c), &side_pairs(&e2)]);
                        let outer = union(&[&inner, &bp, &bb]);
                        let ap = side_pairs(&a);
                        assert!(
                            inner.is_subset(&ap) && ap.is_subset(&outer),
                            "{b} {c} {e} {z} -> {a}"
                        );
                    }
                }
            }
        }
    }
}

fn block_strategy() -> impl Strategy<Value = Block> {
    (2u32..=6)
        .prop_flat_map(|n| (Just(n), 1u64..((1u64 << n) - 1)))
        .prop_map(|(n, mask)| {
            let v: Vec<u32> = (1..=n).filter(|i| mask & (1 << (i - 1)) != 0).collect();
            Block::from_slices(&v, &x(n).to_vec()).unwrap()
        })
}

proptest! {
    #[test]
    fn bar_is_an_involution_with_same_pair_indicator(b in block_strategy()) {
        prop_assert_eq!(b.bar().bar(), b);
        prop_assert_ne!(b.bar(), b);
        for i in b.x().iter() {
            prop_assert_eq!(b.epsilon_v(i).unwrap(), -b.bar().epsilon_v(i).unwrap());
            for j in b.x().iter() {
                prop_assert_eq!(b.epsilon_b(i, j).unwrap(), b.bar().epsilon_b(i, j).unwrap());
                prop_assert_eq!(b.epsilon_b(i, j).unwrap(), b.epsilon_b(j, i).unwrap());
            }
        }
    }

    #[test]
    fn unions_are_unions_of_their_blocks(bs in prop::collection::vec(block_strategy(), 0..4)) {
        let same: Vec<Block> = bs.iter().filter(|b| b.x() == bs[0].x()).copied().collect();
        let u = BlockUnion::of(&same);
        let expect = same.iter().fold(PairSet::new(), |acc, b| union(&[&acc, &side_pairs(b)]));
        prop_assert_eq!(u.pairs, expect);
    }
}
