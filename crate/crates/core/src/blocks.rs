//! Blocks `V × Vᶜ` inside `X × X`, their sign indicators, and the four
//! combination rules used by the decomposition engine.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::index_set::IndexSet;

/// A set of ordered index pairs.
pub type PairSet = BTreeSet<(u32, u32)>;

/// The ordered pair `(V, Vᶜ)` of complementary nonempty subsets of an ambient
/// set `X`, viewed as the pair set `V × Vᶜ`. A block and its bar (`Vᶜ × V`)
/// are distinct values.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "RawBlock")]
pub struct Block {
    #[serde(rename = "V")]
    v: IndexSet,
    #[serde(rename = "X")]
    x: IndexSet,
}

#[derive(Deserialize)]
struct RawBlock {
    #[serde(rename = "V")]
    v: IndexSet,
    #[serde(rename = "X")]
    x: IndexSet,
}

impl TryFrom<RawBlock> for Block {
    type Error = Error;

    fn try_from(raw: RawBlock) -> Result<Block> {
        Block::new(raw.v, raw.x)
    }
}

/// Result of [`sym_diff`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SymDiff {
    /// The symmetric difference is `D ∪ bar(D)` for this block.
    Block(Block),
    /// The two blocks have the same crossing pairs: the difference is empty.
    Empty,
}

/// Which of the two alternatives of [`combine_two_sides`] applied.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SideCase {
    /// `C ∪ E ⊆ A ⊆ C ∪ E ∪ B ∪ bar(B)`.
    E,
    /// `C ∪ bar(E) ⊆ A ⊆ C ∪ bar(E) ∪ B ∪ bar(B)`.
    BarE,
}

impl Block {
    /// Builds `V × (X ∖ V)`, requiring `∅ ⊊ V ⊊ X`.
    pub fn new(v: IndexSet, x: IndexSet) -> Result<Block> {
        if v.is_empty() || !v.is_subset(x) || v == x {
            return Err(Error::Malformed(format!(
                "{v} is not a proper nonempty subset of {x}"
            )));
        }
        Ok(Block { v, x })
    }

    /// Convenience constructor from slices.
    pub fn from_slices(v: &[u32], x: &[u32]) -> Result<Block> {
        Block::new(IndexSet::from_slice(v)?, IndexSet::from_slice(x)?)
    }

    /// The block `V × W` over `V ∪ W` (the two sides must be disjoint and nonempty).
    pub fn from_sides(v: &[u32], w: &[u32]) -> Result<Block> {
        let (a, b) = (IndexSet::from_slice(v)?, IndexSet::from_slice(w)?);
        if !a.intersection(b).is_empty() {
            return Err(Error::Malformed(format!("sides {a} and {b} overlap")));
        }
        Block::new(a, a.union(b))
    }

    /// The `V` side.
    pub fn v(&self) -> IndexSet {
        self.v
    }

    /// The `Vᶜ` side.
    pub fn vc(&self) -> IndexSet {
        self.x.minus(self.v)
    }

    /// The ambient set.
    pub fn x(&self) -> IndexSet {
        self.x
    }

    /// `bar(B) = Vᶜ × V`.
    pub fn bar(&self) -> Block {
        Block {
            v: self.vc(),
            x: self.x,
        }
    }

    fn check(&self, i: u32) -> Result<()> {
        if self.x.contains(i) {
            Ok(())
        } else {
            Err(Error::Malformed(format!("index {i} outside {}", self.x)))
        }
    }

    /// `+1` when `(i, j)` lies in `B ∪ bar(B)`, `−1` otherwise.
    pub fn epsilon_b(&self, i: u32, j: u32) -> Result<i8> {
        self.check(i)?;
        self.check(j)?;
        Ok(self.eps_b(i, j))
    }

    /// `+1` when `i ∈ V`.
    pub fn epsilon_v(&self, i: u32) -> Result<i8> {
        self.check(i)?;
        Ok(self.eps_v(i))
    }

    /// Unchecked `ε_B`.
    pub(crate) fn eps_b(&self, i: u32, j: u32) -> i8 {
        if self.v.contains(i) != self.v.contains(j) {
            1
        } else {
            -1
        }
    }

    /// Unchecked `ε_V`.
    pub(crate) fn eps_v(&self, i: u32) -> i8 {
        if self.v.contains(i) {
            1
        } else {
            -1
        }
    }

    /// True when `(i, j) ∈ V × Vᶜ`.
    pub fn contains_pair(&self, i: u32, j: u32) -> bool {
        self.v.contains(i) && self.vc().contains(j)
    }

    /// True when `(i, j)` lies in `B ∪ bar(B)`.
    pub fn crosses(&self, i: u32, j: u32) -> bool {
        self.x.contains(i) && self.x.contains(j) && self.v.contains(i) != self.v.contains(j)
    }

    /// The pairs of `V × Vᶜ`.
    pub fn pairs(&self) -> PairSet {
        let w = self.vc();
        self.v
            .iter()
            .flat_map(|i| w.iter().map(move |j| (i, j)))
            .collect()
    }

    /// The pairs of `B ∪ bar(B)`.
    pub fn crossing_pairs(&self) -> PairSet {
        let mut p = self.pairs();
        p.extend(self.bar().pairs());
        p
    }
}

impl fmt::Display for Block {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}", self.v, self.vc())
    }
}

impl fmt::Debug for Block {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Block({self})")
    }
}

/// A (possibly empty) union of blocks, remembering which blocks formed it.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BlockUnion {
    /// The ordered pairs of the union.
    pub pairs: PairSet,
    /// The blocks whose union this is.
    pub provenance: Vec<Block>,
}

impl BlockUnion {
    /// The empty union.
    pub fn empty() -> Self {
        BlockUnion::default()
    }

    /// The union of the given blocks.
    pub fn of(blocks: &[Block]) -> Self {
        let mut pairs = PairSet::new();
        for b in blocks {
            pairs.extend(b.pairs());
        }
        BlockUnion {
            pairs,
            provenance: blocks.to_vec(),
        }
    }

    /// Membership of an ordered pair.
    pub fn contains(&self, i: u32, j: u32) -> bool {
        self.pairs.contains(&(i, j))
    }

    /// True for the empty union.
    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

/// All `2^|X| − 2` blocks over `X`, ordered by the bit pattern of `V`.
pub fn enumerate_blocks(x: IndexSet) -> Vec<Block> {
    if x.len() < 2 {
        return Vec::new();
    }
    x.subsets()
        .filter(|v| !v.is_empty() && *v != x)
        .map(|v| Block { v, x })
        .collect()
}

/// The block `D` with `(B ∪ bar B) △ (C ∪ bar C) = D ∪ bar D`.
pub fn sym_diff(b: &Block, c: &Block) -> Result<SymDiff> {
    if b.x != c.x {
        return Err(Error::Malformed(format!("blocks over {} and {}", b.x, c.x)));
    }
    // a pair crosses D iff it crosses exactly one of B, C
    let v = b.v.intersection(c.v).union(b.vc().intersection(c.vc()));
    if v.is_empty() || v == b.x {
        Ok(SymDiff::Empty)
    } else {
        Ok(SymDiff::Block(Block { v, x: b.x }))
    }
}

/// `B ∩ ((X∖{z}) × (X∖{z}))` as a block over `X ∖ {z}`, or `None` when `z`
/// was the only element on its side.
pub fn restrict(b: &Block, z: u32) -> Result<Option<Block>> {
    if !b.x.contains(z) {
        return Err(Error::Malformed(format!("index {z} outside {}", b.x)));
    }
    if b.x.len() < 3 {
        return Err(Error::Precondition(format!(
            "restriction needs |X| >= 3, got {}",
            b.x
        )));
    }
    Ok(restrict_opt(b, z))
}

pub(crate) fn restrict_opt(b: &Block, z: u32) -> Option<Block> {
    let x = b.x.without(z);
    let v = b.v.without(z);
    (!v.is_empty() && v != x).then_some(Block { v, x })
}

/// Given `B = H × W` over `X ∖ {z}` and a block `C` over `W ∪ {z}`, a block
/// `D` over `X` contained in `B ∪ C ∪ bar(C)`.
///
/// Orient `C` so that `z` lies in its first side `C'`; then
/// `D = (H ∪ C'.V) × C'.Vᶜ`.
pub fn extend_through_z(b: &Block, c: &Block, z: u32) -> Result<Block> {
    if b.x.contains(z) {
        return Err(Error::Malformed(format!(
            "{z} already lies in the ambient set {} of {b}",
            b.x
        )));
    }
    if c.x != b.vc().with(z) {
        return Err(Error::Malformed(format!(
            "{c} is not a block over {}",
            b.vc().with(z)
        )));
    }
    let c = if c.v.contains(z) { *c } else { c.bar() };
    Ok(Block {
        v: b.v.union(c.v),
        x: b.x.with(z),
    })
}

/// Given `B = H × W` over `X ∖ {z}`, `C` over `H ∪ {z}` and `E` over
/// `W ∪ {z}`, a block `A` over `X` with `C ∪ E' ⊆ A ⊆ C ∪ E' ∪ B ∪ bar(B)`
/// where `E'` is `E` or `bar(E)` as reported.
pub fn combine_two_sides(b: &Block, c: &Block, e: &Block, z: u32) -> Result<(Block, SideCase)> {
    if b.x.contains(z) {
        return Err(Error::Malformed(format!(
            "{z} already lies in the ambient set {} of {b}",
            b.x
        )));
    }
    if c.x != b.v.with(z) {
        return Err(Error::Malformed(format!(
            "{c} is not a block over {}",
            b.v.with(z)
        )));
    }
    if e.x != b.vc().with(z) {
        return Err(Error::Malformed(format!(
            "{e} is not a block over {}",
            b.vc().with(z)
        )));
    }
    let (e2, case) = if c.v.contains(z) == e.v.contains(z) {
        (*e, SideCase::E)
    } else {
        (e.bar(), SideCase::BarE)
    };
    Ok((
        Block {
            v: c.v.union(e2.v),
            x: b.x.with(z),
        },
        case,
    ))
}

/// Counts and failures of the exhaustive block-lemma checks.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockLemmaReport {
    /// Largest ambient size checked.
    pub max_size: usize,
    /// Instances of the symmetric-difference rule.
    pub sym_diff_instances: u64,
    /// Instances of the restriction rule.
    pub restrict_instances: u64,
    /// Instances of the extension rule.
    pub extend_instances: u64,
    /// Instances of the two-sided combination rule.
    pub combine_instances: u64,
    /// Human-readable descriptions of every failed instance.
    pub failures: Vec<String>,
}

impl BlockLemmaReport {
    /// True when no instance failed.
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

fn union_of(sets: &[&PairSet]) -> PairSet {
    sets.iter().flat_map(|s| s.iter().copied()).collect()
}

/// Checks every combination rule literally as pair-set identities for all
/// ambient sets `{1, …, m}` with `m ≤ max_size`.
pub fn check_block_lemmas(max_size: usize) -> BlockLemmaReport {
    let mut r = BlockLemmaReport {
        max_size,
        ..Default::default()
    };
    for m in 1..=max_size.min(20) as u32 {
        let x = IndexSet::range1(m).expect("small range");
        let blocks = enumerate_blocks(x);
        for b in &blocks {
            for c in &blocks {
                r.sym_diff_instances += 1;
                let lhs: PairSet = b
                    .crossing_pairs()
                    .symmetric_difference(&c.crossing_pairs())
                    .copied()
                    .collect();
                let ok = match sym_diff(b, c) {
                    Ok(SymDiff::Block(d)) => d.crossing_pairs() == lhs && !lhs.is_empty(),
                    Ok(SymDiff::Empty) => lhs.is_empty(),
                    Err(_) => false,
                };
                if !ok {
                    r.failures.push(format!("sym_diff({b}, {c})"));
                }
            }
            if m >= 3 {
                for z in x.iter() {
                    r.restrict_instances += 1;
                    let inter: PairSet = b
                        .pairs()
                        .into_iter()
                        .filter(|&(i, j)| i != z && j != z)
                        .collect();
                    let ok = match restrict(b, z) {
                        Ok(Some(d)) => d.pairs() == inter && d.x() == x.without(z),
                        Ok(None) => inter.is_empty(),
                        Err(_) => false,
                    };
                    if !ok {
                        r.failures.push(format!("restrict({b}, {z})"));
                    }
                }
            }
        }
        if m < 3 {
            continue;
        }
        for z in x.iter() {
            let rest = x.without(z);
            for b in enumerate_blocks(rest) {
                let bp = b.crossing_pairs();
                for c in enumerate_blocks(b.vc().with(z)) {
                    r.extend_instances += 1;
                    let ok = match extend_through_z(&b, &c, z) {
                        Ok(d) => {
                            let allowed = union_of(&[&b.pairs(), &c.crossing_pairs()]);
                            d.x() == x && d.pairs().is_subset(&allowed)
                        }
                        Err(_) => false,
                    };
                    if !ok {
                        r.failures.push(format!("extend_through_z({b}, {c}, {z})"));
                    }
                }
                for c in enumerate_blocks(b.v().with(z)) {
                    for e in enumerate_blocks(b.vc().with(z)) {
                        r.combine_instances += 1;
                        let ok = match combine_two_sides(&b, &c, &e, z) {
                            Ok((a, case)) => {
                                let e2 = if case == SideCase::E { e } else { e.bar() };
                                let lower = union_of(&[&c.pairs(), &e2.pairs()]);
                                let upper = union_of(&[&lower, &bp]);
                                a.x() == x
                                    && lower.is_subset(&a.pairs())
                                    && a.pairs().is_subset(&upper)
                            }
                            Err(_) => false,
                        };
                        if !ok {
                            r.failures
                                .push(format!("combine_two_sides({b}, {c}, {e}, {z})"));
                        }
                    }
                }
            }
        }
    }
    r
}
