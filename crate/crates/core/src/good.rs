//! Good section collections: the base collections `Q_n(X, B, D)`, the split
//! construction that builds larger collections from smaller ones, the
//! forgetful map to monomials, and capped enumeration of the resulting good
//! monomials (whose classes vanish).
//!
//! Index pairs in `Q_n` range over ordered pairs `(i, j) ∈ X × X`. A pair
//! meeting a slot's block union `D_l` (in either orientation) contributes the
//! two sections `s+ij, s-ij` once, in the orientation found in `D_l`
//! (preferring `i < j` when both occur); every other ordered pair contributes
//! `s^{-ε_B(i,j)}_{ij}`. Each slot therefore carries `|X|²` sections.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::str::FromStr;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::algebra::{
    normal_form, DiagonalPolynomial, Polynomial, PowerProduct, Rational, Sign, VarId,
};
use crate::blocks::{enumerate_blocks, Block, BlockUnion, PairSet};
use crate::error::{Error, Result};
use crate::index_set::IndexSet;

/// A section `s±ij(x_l)`; `generator` is the slot `l ∈ 1..=2g`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SectionId {
    /// Superscript.
    pub sign: Sign,
    /// First index.
    pub i: u32,
    /// Second index.
    pub j: u32,
    /// Generator slot `l`.
    pub generator: u32,
}

impl SectionId {
    /// The ring symbol this section maps to under the forgetful map.
    pub fn var(&self) -> VarId {
        VarId::signed(self.sign, self.i, self.j)
    }
}

/// How a collection was built.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Provenance {
    /// `Q_n(X, B, D)`; `b = None` is the empty block.
    Base {
        /// Ambient set.
        x: IndexSet,
        /// The signing block (or none).
        b: Option<Block>,
        /// One block union per generator slot.
        d: Vec<BlockUnion>,
    },
    /// `ψ_* P` together with both-sign sections on every pair of `Xsub × Y`.
    Split {
        /// Ambient set `Xsub ⊔ Y`.
        x: IndexSet,
        /// The part carrying the child collection.
        xsub: IndexSet,
        /// The complementary part.
        y: IndexSet,
        /// `psi[t]` is the image of the `t`-th smallest element of the child's ambient set.
        psi: Vec<u32>,
        /// The child collection.
        child: Box<GoodCollection>,
    },
}

/// A collection of sections with no common zeros, with its construction.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoodCollection {
    /// Genus parameter: each collection uses `2g` generator slots.
    pub g: u32,
    /// Construction tree.
    pub provenance: Provenance,
    /// The sections, sorted (a multiset).
    pub sections: Vec<SectionId>,
}

impl GoodCollection {
    /// The ambient index set.
    pub fn x(&self) -> IndexSet {
        match &self.provenance {
            Provenance::Base { x, .. } | Provenance::Split { x, .. } => *x,
        }
    }

    /// The forgetful image of the sections.
    pub fn alpha(&self) -> PowerProduct {
        alpha(&self.sections)
    }

    /// Number of sections (the degree of the monomial).
    pub fn degree(&self) -> usize {
        self.sections.len()
    }

    /// Depth of nested splits.
    pub fn split_depth(&self) -> usize {
        match &self.provenance {
            Provenance::Base { .. } => 0,
            Provenance::Split { child, .. } => 1 + child.split_depth(),
        }
    }

    /// Recomputes the sections from the provenance and compares.
    pub fn is_consistent(&self) -> bool {
        let rebuilt = match &self.provenance {
            Provenance::Base { x, b, d } => q_n(*x, b.as_ref(), d, self.g),
            Provenance::Split { y, psi, child, .. } => {
                if !child.is_consistent() {
                    return false;
                }
                split_collection(child, psi, *y, self.g).map(|c| c.sections)
            }
        };
        matches!(rebuilt, Ok(s) if s == self.sections)
    }
}

/// A good collection together with its monomial.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoodMonomial {
    /// The forgetful image of `provenance`, with coefficient one.
    pub monomial: Polynomial,
    /// The collection.
    pub provenance: GoodCollection,
}

impl GoodMonomial {
    /// Wraps a collection.
    pub fn new(provenance: GoodCollection) -> Self {
        GoodMonomial {
            monomial: Polynomial::from(provenance.alpha()),
            provenance,
        }
    }

    /// The power product of the monomial.
    pub fn power_product(&self) -> PowerProduct {
        self.provenance.alpha()
    }
}

/// Product of the ring symbols of a multiset of sections.
pub fn alpha(sections: &[SectionId]) -> PowerProduct {
    PowerProduct::from_factors(sections.iter().map(|s| (s.var(), 1)))
}

fn check_union(u: &BlockUnion, x: IndexSet) -> Result<()> {
    let mut pairs = PairSet::new();
    for b in &u.provenance {
        if b.x() != x {
            return Err(Error::Malformed(format!("block {b} is not over {x}")));
        }
        pairs.extend(b.pairs());
    }
    if pairs != u.pairs {
        return Err(Error::Malformed(
            "block union pairs disagree with its blocks".into(),
        ));
    }
    Ok(())
}

/// The base collection `Q_n(X, B, D)`.
pub fn q_n(x: IndexSet, b: Option<&Block>, d: &[BlockUnion], g: u32) -> Result<Vec<SectionId>> {
    if x.is_empty() {
        return Err(Error::Malformed("empty ambient set".into()));
    }
    if d.len() != 2 * g as usize {
        return Err(Error::Malformed(format!(
            "expected {} block unions, got {}",
            2 * g,
            d.len()
        )));
    }
    if let Some(b) = b {
        if b.x() != x {
            return Err(Error::Malformed(format!("block {b} is not over {x}")));
        }
    }
    let mut out = Vec::with_capacity(d.len() * x.len() * x.len());
    for (slot, dl) in d.iter().enumerate() {
        check_union(dl, x)?;
        let generator = slot as u32 + 1;
        for i in x.iter() {
            for j in x.iter() {
                if dl.contains(i, j) {
                    out.push(SectionId {
                        sign: Sign::Plus,
                        i,
                        j,
                        generator,
                    });
                    out.push(SectionId {
                        sign: Sign::Minus,
                        i,
                        j,
                        generator,
                    });
                } else if !dl.contains(j, i) {
                    let eps = b.map_or(-1, |b| b.eps_b(i, j));
                    out.push(SectionId {
                        sign: Sign::from_unit(-eps),
                        i,
                        j,
                        generator,
                    });
                }
            }
        }
    }
    out.sort();
    Ok(out)
}

/// The split construction: relabel `child` by `psi` onto `Xsub` and adjoin
/// `s+ij, s-ij` for every `i ∈ Xsub`, `j ∈ Y` and every slot.
pub fn split_collection(
    child: &GoodCollection,
    psi: &[u32],
    y: IndexSet,
    g: u32,
) -> Result<GoodCollection> {
    if child.g != g {
        return Err(Error::Malformed(format!(
            "child uses g = {}, expected {g}",
            child.g
        )));
    }
    let cx = child.x();
    if psi.len() != cx.len() {
        return Err(Error::Malformed(format!(
            "relabelling of length {} for child over {cx}",
            psi.len()
        )));
    }
    let xsub = IndexSet::from_slice(psi)?;
    if y.is_empty() || !xsub.intersection(y).is_empty() {
        return Err(Error::Malformed(format!(
            "{xsub} and {y} do not form a partition with both parts nonempty"
        )));
    }
    let map: BTreeMap<u32, u32> = cx.iter().zip(psi.iter().copied()).collect();
    let mut sections: Vec<SectionId> = child
        .sections
        .iter()
        .map(|s| SectionId {
            i: map[&s.i],
            j: map[&s.j],
            ..*s
        })
        .collect();
    for generator in 1..=2 * g {
        for i in xsub.iter() {
            for j in y.iter() {
                sections.push(SectionId {
                    sign: Sign::Plus,
                    i,
                    j,
                    generator,
                });
                sections.push(SectionId {
                    sign: Sign::Minus,
                    i,
                    j,
                    generator,
                });
            }
        }
    }
    sections.sort();
    Ok(GoodCollection {
        g,
        provenance: Provenance::Split {
            x: xsub.union(y),
            xsub,
            y,
            psi: psi.to_vec(),
            child: Box::new(child.clone()),
        },
        sections,
    })
}

/// A base collection as a [`GoodCollection`].
pub fn base_collection(
    x: IndexSet,
    b: Option<Block>,
    d: Vec<BlockUnion>,
    g: u32,
) -> Result<GoodCollection> {
    let sections = q_n(x, b.as_ref(), &d, g)?;
    Ok(GoodCollection {
        g,
        provenance: Provenance::Base { x, b, d },
        sections,
    })
}

/// Caps bounding the enumeration of the infinite families of good collections.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnumerationCaps {
    /// Maximal number of blocks in the union of one generator slot.
    pub blocks: usize,
    /// Maximal nesting depth of split constructions.
    pub depth: usize,
}

impl Default for EnumerationCaps {
    fn default() -> Self {
        EnumerationCaps {
            blocks: 2,
            depth: 2,
        }
    }
}

impl fmt::Display for EnumerationCaps {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "depth={},blocks={}", self.depth, self.blocks)
    }
}

impl FromStr for EnumerationCaps {
    type Err = Error;

    /// Parses `"depth=2,blocks=2"` (either key may be omitted).
    fn from_str(s: &str) -> Result<Self> {
        let mut caps = EnumerationCaps::default();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (k, v) = part
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("bad cap {part:?}")))?;
            let v: usize = v
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad cap value {part:?}")))?;
            match k.trim() {
                "depth" => caps.depth = v,
                "blocks" => caps.blocks = v,
                other => return Err(Error::Parse(format!("unknown cap {other:?}"))),
            }
        }
        Ok(caps)
    }
}

/// Normal form scaled so that its leading (grlex-largest) coefficient is one.
pub(crate) fn normalized_nf(p: &PowerProduct, x: IndexSet) -> Result<DiagonalPolynomial> {
    let nf = normal_form(&Polynomial::from(p.clone()), x)?;
    let lead = nf.terms_grlex().first().map(|(_, c)| (*c).clone());
    Ok(match lead {
        Some(c) => nf.scale(&(Rational::one() / c)),
        None => nf,
    })
}

/// Distinct slot options over `x`: block unions with at most `k` blocks,
/// deduplicated by the unordered pairs they meet.
fn slot_options(x: IndexSet, k: usize) -> Vec<BlockUnion> {
    let m = x.min();
    let blocks: Vec<Block> = enumerate_blocks(x)
        .into_iter()
        .filter(|b| m.is_some_and(|m| b.v().contains(m)))
        .collect();
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    let mut chosen = Vec::new();
    fn rec(
        start: usize,
        k: usize,
        blocks: &[Block],
        chosen: &mut Vec<Block>,
        seen: &mut HashSet<Vec<(u32, u32)>>,
        out: &mut Vec<BlockUnion>,
    ) {
        let u = BlockUnion::of(chosen);
        let key: Vec<(u32, u32)> = u
            .pairs
            .iter()
            .map(|&(i, j)| (i.min(j), i.max(j)))
            .collect::<std::collections::BTreeSet<_>>()
            .into_iter()
            .collect();
        if seen.insert(key) {
            out.push(u);
        }
        if chosen.len() == k {
            return;
        }
        for t in start..blocks.len() {
            chosen.push(blocks[t]);
            rec(t + 1, k, blocks, chosen, seen, out);
            chosen.pop();
        }
    }
    rec(0, k, &blocks, &mut chosen, &mut seen, &mut out);
    out
}

/// Nondecreasing index sequences of length `len` below `k` (multisets).
fn multisets(k: usize, len: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(len);
    fn rec(k: usize, len: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == len {
            out.push(cur.clone());
            return;
        }
        for t in start..k {
            cur.push(t);
            rec(k, len, t, cur, out);
            cur.pop();
        }
    }
    rec(k, len, 0, &mut cur, &mut out);
    out
}

fn enumerate_range(
    n: u32,
    g: u32,
    caps: EnumerationCaps,
    depth: usize,
    memo: &mut BTreeMap<(u32, usize), Vec<GoodCollection>>,
) -> Result<Vec<GoodCollection>> {
    if let Some(v) = memo.get(&(n, depth)) {
        return Ok(v.clone());
    }
    let x = IndexSet::range1(n)?;
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    let mut push = |c: GoodCollection, out: &mut Vec<GoodCollection>| -> Result<()> {
        let nf = normalized_nf(&c.alpha(), x)?;
        if !nf.is_zero() && seen.insert(nf) {
            out.push(c);
        }
        Ok(())
    };
    let signing: Vec<Option<Block>> = std::iter::once(None)
        .chain(
            enumerate_blocks(x)
                .into_iter()
                .filter(|b| b.v().contains(1))
                .map(Some),
        )
        .collect();
    let options = slot_options(x, caps.blocks);
    let tuples = multisets(options.len(), 2 * g as usize);
    for b in &signing {
        for t in &tuples {
            let d: Vec<BlockUnion> = t.iter().map(|&k| options[k].clone()).collect();
            push(base_collection(x, *b, d, g)?, &mut out)?;
        }
    }
    if depth > 0 && n >= 2 {
        for xsub in x.subsets().filter(|s| !s.is_empty() && *s != x) {
            let children = enumerate_range(xsub.len() as u32, g, caps, depth - 1, memo)?;
            let psi = xsub.to_vec();
            for child in &children {
                push(split_collection(child, &psi, x.minus(xsub), g)?, &mut out)?;
            }
        }
    }
    memo.insert((n, depth), out.clone());
    Ok(out)
}

/// Good monomials over `{1, …, n}` within `caps`, with pairwise distinct
/// normal forms (up to scaling), in a deterministic order.
pub fn enumerate_good(n: u32, g: u32, caps: EnumerationCaps) -> Result<Vec<GoodMonomial>> {
    if n == 0 || g == 0 {
        return Err(Error::Precondition("n and g must be positive".into()));
    }
    let mut memo = BTreeMap::new();
    Ok(enumerate_range(n, g, caps, caps.depth, &mut memo)?
        .into_iter()
        .map(GoodMonomial::new)
        .collect())
}

/// The named good monomials used for rank two.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NamedGood {
    /// `z1`, `z2`, `p`, `q`, `y+m` or `y-m`.
    pub name: String,
    /// The collection and its monomial.
    pub good: GoodMonomial,
}

/// The rank-two basis `z₁, z₂, y+ₘ, y-ₘ (0 ≤ m ≤ 2g)`, and also `p`, `q`
/// when `with_pq` is set, each with its construction.
pub fn so5_basis(g: u32, with_pq: bool) -> Result<Vec<NamedGood>> {
    let x = IndexSet::range1(2)?;
    let one = IndexSet::range1(1)?;
    let b12 = Block::from_sides(&[1], &[2])?;
    let q1 = base_collection(one, None, vec![BlockUnion::empty(); 2 * g as usize], g)?;
    let mut out = vec![
        NamedGood {
            name: "z1".into(),
            good: GoodMonomial::new(split_collection(&q1, &[1], IndexSet::singleton(2), g)?),
        },
        NamedGood {
            name: "z2".into(),
            good: GoodMonomial::new(split_collection(&q1, &[2], IndexSet::singleton(1), g)?),
        },
    ];
    let dtuple = |m: u32| -> Vec<BlockUnion> {
        (0..2 * g)
            .map(|l| {
                if l < 2 * g - m {
                    BlockUnion::of(&[b12])
                } else {
                    BlockUnion::empty()
                }
            })
            .collect()
    };
    if with_pq {
        out.push(NamedGood {
            name: "p".into(),
            good: GoodMonomial::new(base_collection(x, None, dtuple(2 * g), g)?),
        });
        out.push(NamedGood {
            name: "q".into(),
            good: GoodMonomial::new(base_collection(x, Some(b12), dtuple(2 * g), g)?),
        });
    }
    for m in 0..=2 * g {
        out.push(NamedGood {
            name: format!("y+{m}"),
            good: GoodMonomial::new(base_collection(x, None, dtuple(m), g)?),
        });
    }
    for m in 0..=2 * g {
        out.push(NamedGood {
            name: format!("y-{m}"),
            good: GoodMonomial::new(base_collection(x, Some(b12), dtuple(m), g)?),
        });
    }
    Ok(out)
}

/// The rank-two basis element as written with `i < j` symbols only:
/// `(y+11)^a (y+22)^b (y+12)^c (y-12)^e`.
pub fn so5_monomial(a: u32, b: u32, c: u32, e: u32) -> PowerProduct {
    PowerProduct::from_factors([
        (VarId::plus(1, 1), a),
        (VarId::plus(2, 2), b),
        (VarId::plus(1, 2), c),
        (VarId::minus(1, 2), e),
    ])
}

/// Scalar `s` with `[good] = s · [target]` when the two classes are proportional.
pub fn proportionality(
    good: &PowerProduct,
    target: &PowerProduct,
    x: IndexSet,
) -> Result<Option<Rational>> {
    let a = normal_form(&Polynomial::from(good.clone()), x)?;
    let b = normal_form(&Polynomial::from(target.clone()), x)?;
    let Some((e, cb)) = b
        .terms_grlex()
        .first()
        .map(|(e, c)| ((*e).clone(), (*c).clone()))
    else {
        return Ok(a.is_zero().then(Rational::zero));
    };
    let s = a.coefficient(&e) / cb;
    Ok((a == b.scale(&s)).then_some(s))
}
