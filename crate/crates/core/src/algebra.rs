//! Exact polynomial arithmetic over ℚ in the symbols y±ᵢⱼ, the relation ideal
//! among them, and the diagonal normal form that decides equality in the
//! quotient ring.
//!
//! Symbols are stored literally: `y-21` and `y-12` are different variables of
//! the free ring even though they agree up to sign in the quotient. The
//! quotient ring is isomorphic to ℚ[d₁, …, dₙ], where dᵢ is the class of
//! `y+ii`, through the substitution
//!
//! * `y+ij ↦ ½(dᵢ + dⱼ)`
//! * `y-ij ↦ ½(dᵢ − dⱼ)`
//!
//! which kills every generator of the ideal (see [`ideal_reduce_generators`]).

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::binomial;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::index_set::{IndexSet, MAX_INDEX};

/// Exact rational numbers in lowest terms with positive denominator.
pub type Rational = BigRational;

/// The rational number `n`.
pub fn rat(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// The rational number `n / d`.
///
/// # Panics
/// Panics when `d == 0`.
pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Parses `"3"`, `"-7/4"`, ... into a rational.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let num: BigInt = num
        .parse()
        .map_err(|_| Error::Parse(format!("bad rational {s:?}")))?;
    let den: BigInt = den
        .parse()
        .map_err(|_| Error::Parse(format!("bad rational {s:?}")))?;
    if den.is_zero() {
        return Err(Error::Parse(format!("zero denominator in {s:?}")));
    }
    Ok(Rational::new(num, den))
}

/// The superscript of a symbol y±ᵢⱼ.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Sign {
    /// `y+`
    #[serde(rename = "+")]
    Plus,
    /// `y-`
    #[serde(rename = "-")]
    Minus,
}

impl Sign {
    /// The other sign.
    pub fn flip(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }

    /// `Plus` for `+1`, `Minus` for `-1`.
    pub fn from_unit(u: i8) -> Sign {
        if u > 0 {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }

    /// `+1` or `-1`.
    pub fn unit(self) -> i8 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }

    /// `"+"` or `"-"`.
    pub fn symbol(self) -> &'static str {
        match self {
            Sign::Plus => "+",
            Sign::Minus => "-",
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

/// One generator y±ᵢⱼ of the free polynomial ring.
///
/// Ordering is by sign (plus first), then `i`, then `j`; this order fixes the
/// graded lexicographic term order used for serialization.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VarId {
    /// Superscript.
    pub sign: Sign,
    /// First index.
    pub i: u32,
    /// Second index.
    pub j: u32,
}

impl VarId {
    /// Validated constructor: `y-ii` does not exist and indices must be below 64.
    pub fn new(sign: Sign, i: u32, j: u32) -> Result<VarId> {
        if i >= MAX_INDEX || j >= MAX_INDEX {
            return Err(Error::Malformed(format!(
                "index of y{sign}{i},{j} exceeds {}",
                MAX_INDEX - 1
            )));
        }
        if sign == Sign::Minus && i == j {
            return Err(Error::Malformed(format!("symbol y-{i}{i} does not exist")));
        }
        Ok(VarId { sign, i, j })
    }

    /// `y+ij`.
    pub fn plus(i: u32, j: u32) -> VarId {
        debug_assert!(i < MAX_INDEX && j < MAX_INDEX);
        VarId {
            sign: Sign::Plus,
            i,
            j,
        }
    }

    /// `y-ij`.
    ///
    /// # Panics
    /// Panics (in debug builds) when `i == j`.
    pub fn minus(i: u32, j: u32) -> VarId {
        debug_assert!(i != j, "y-{i}{i} does not exist");
        VarId {
            sign: Sign::Minus,
            i,
            j,
        }
    }

    /// `y±ij` with the given sign; `Minus` requires `i != j`.
    pub fn signed(sign: Sign, i: u32, j: u32) -> VarId {
        debug_assert!(sign == Sign::Plus || i != j);
        VarId { sign, i, j }
    }

    /// The equivalent symbol with `i ≤ j`, and whether the class changes sign
    /// (`y-ji = −y-ij`, `y+ji = y+ij`).
    pub fn canonical(self) -> (VarId, bool) {
        if self.i <= self.j {
            (self, false)
        } else {
            let v = VarId {
                sign: self.sign,
                i: self.j,
                j: self.i,
            };
            (v, self.sign == Sign::Minus)
        }
    }

    /// Indices touched by this symbol.
    pub fn support(self) -> IndexSet {
        IndexSet::singleton(self.i).with(self.j)
    }
}

fn fmt_pair(f: &mut fmt::Formatter<'_>, i: u32, j: u32) -> fmt::Result {
    if i < 10 && j < 10 {
        write!(f, "{i}{j}")
    } else {
        write!(f, "[{i}][{j}]")
    }
}

impl fmt::Display for VarId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "y{}", self.sign)?;
        fmt_pair(f, self.i, self.j)
    }
}

/// A coefficient-free monomial: sorted `(variable, exponent)` pairs with
/// positive exponents. Ordered graded-lexicographically.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct PowerProduct(Vec<(VarId, u32)>);

impl PowerProduct {
    /// The unit monomial.
    pub fn one() -> Self {
        PowerProduct(Vec::new())
    }

    /// `v^e` (the unit when `e == 0`).
    pub fn var(v: VarId, e: u32) -> Self {
        if e == 0 {
            PowerProduct::one()
        } else {
            PowerProduct(vec![(v, e)])
        }
    }

    /// Builds a power product from arbitrary factors, merging repeats.
    pub fn from_factors<I: IntoIterator<Item = (VarId, u32)>>(factors: I) -> Self {
        let mut map = BTreeMap::new();
        for (v, e) in factors {
            *map.entry(v).or_insert(0u32) += e;
        }
        PowerProduct(map.into_iter().filter(|&(_, e)| e > 0).collect())
    }

    /// Factors in increasing variable order.
    pub fn factors(&self) -> &[(VarId, u32)] {
        &self.0
    }

    /// Total degree.
    pub fn degree(&self) -> u32 {
        self.0.iter().map(|&(_, e)| e).sum()
    }

    /// True for the unit monomial.
    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    /// Exponent of `v`.
    pub fn exponent(&self, v: VarId) -> u32 {
        match self.0.binary_search_by(|(w, _)| w.cmp(&v)) {
            Ok(k) => self.0[k].1,
            Err(_) => 0,
        }
    }

    /// Product of two power products.
    pub fn mul(&self, other: &PowerProduct) -> PowerProduct {
        let mut out = Vec::with_capacity(self.0.len() + other.0.len());
        let (mut a, mut b) = (self.0.iter().peekable(), other.0.iter().peekable());
        loop {
            match (a.peek(), b.peek()) {
                (Some(&&(v, e)), Some(&&(w, f))) => match v.cmp(&w) {
                    Ordering::Less => {
                        out.push((v, e));
                        a.next();
                    }
                    Ordering::Greater => {
                        out.push((w, f));
                        b.next();
                    }
                    Ordering::Equal => {
                        out.push((v, e + f));
                        a.next();
                        b.next();
                    }
                },
                (Some(&&x), None) => {
                    out.push(x);
                    a.next();
                }
                (None, Some(&&y)) => {
                    out.push(y);
                    b.next();
                }
                (None, None) => break,
            }
        }
        PowerProduct(out)
    }

    /// `self^k`.
    pub fn pow(&self, k: u32) -> PowerProduct {
        if k == 0 {
            return PowerProduct::one();
        }
        PowerProduct(self.0.iter().map(|&(v, e)| (v, e * k)).collect())
    }

    /// True when `other` divides `self`.
    pub fn is_divisible_by(&self, other: &PowerProduct) -> bool {
        other.0.iter().all(|&(v, e)| self.exponent(v) >= e)
    }

    /// `self / other` when `other` divides `self`.
    pub fn checked_div(&self, other: &PowerProduct) -> Option<PowerProduct> {
        if !self.is_divisible_by(other) {
            return None;
        }
        let out = self
            .0
            .iter()
            .filter_map(|&(v, e)| {
                let r = e - other.exponent(v);
                (r > 0).then_some((v, r))
            })
            .collect();
        Some(PowerProduct(out))
    }

    /// Splits into the part whose variables satisfy `keep` and the rest.
    pub fn partition<F: Fn(VarId) -> bool>(&self, keep: F) -> (PowerProduct, PowerProduct) {
        let (a, b): (Vec<_>, Vec<_>) = self.0.iter().partition(|&&(v, _)| keep(v));
        (PowerProduct(a), PowerProduct(b))
    }

    /// Indices touched by any variable.
    pub fn support(&self) -> IndexSet {
        self.0
            .iter()
            .fold(IndexSet::EMPTY, |s, &(v, _)| s.union(v.support()))
    }

    /// Maps every variable to its `i ≤ j` representative; returns the
    /// canonical power product and whether the class picks up a sign.
    pub fn canonical(&self) -> (PowerProduct, bool) {
        let mut neg = false;
        let pp = PowerProduct::from_factors(self.0.iter().map(|&(v, e)| {
            let (c, s) = v.canonical();
            if s && e % 2 == 1 {
                neg = !neg;
            }
            (c, e)
        }));
        (pp, neg)
    }
}

impl Ord for PowerProduct {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree().cmp(&other.degree()).then_with(|| {
            let (mut a, mut b) = (self.0.iter(), other.0.iter());
            loop {
                match (a.next(), b.next()) {
                    (Some(&(v, e)), Some(&(w, f))) => {
                        if v != w {
                            // the side carrying the smaller variable has a larger exponent there
                            return if v < w {
                                Ordering::Greater
                            } else {
                                Ordering::Less
                            };
                        }
                        if e != f {
                            return e.cmp(&f);
                        }
                    }
                    (Some(_), None) => return Ordering::Greater,
                    (None, Some(_)) => return Ordering::Less,
                    (None, None) => return Ordering::Equal,
                }
            }
        })
    }
}

impl PartialOrd for PowerProduct {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for PowerProduct {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("1");
        }
        for (k, &(v, e)) in self.0.iter().enumerate() {
            if k > 0 {
                f.write_str("*")?;
            }
            write!(f, "{v}")?;
            if e != 1 {
                write!(f, "^{e}")?;
            }
        }
        Ok(())
    }
}

/// A single term: rational coefficient times a power product.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Monomial {
    /// Coefficient; zero denotes the zero monomial.
    pub coefficient: Rational,
    /// Exponents (the unit power product when the coefficient is zero).
    pub exponents: PowerProduct,
}

impl Monomial {
    /// Builds a monomial, normalising zero coefficients.
    pub fn new(coefficient: Rational, exponents: PowerProduct) -> Self {
        if coefficient.is_zero() {
            Monomial {
                coefficient,
                exponents: PowerProduct::one(),
            }
        } else {
            Monomial {
                coefficient,
                exponents,
            }
        }
    }

    /// A power product with coefficient one.
    pub fn unit(exponents: PowerProduct) -> Self {
        Monomial {
            coefficient: Rational::one(),
            exponents,
        }
    }

    /// Total degree.
    pub fn degree(&self) -> u32 {
        self.exponents.degree()
    }

    /// True for the zero monomial.
    pub fn is_zero(&self) -> bool {
        self.coefficient.is_zero()
    }

    /// Parses a monomial such as `"y+11^8"` or `"3/2*y-12*y+13^2"`.
    pub fn parse(s: &str) -> Result<Monomial> {
        let p = Polynomial::parse(s)?;
        match p.terms.len() {
            0 => Ok(Monomial::new(Rational::zero(), PowerProduct::one())),
            1 => {
                let (pp, c) = p.terms.into_iter().next().expect("one term");
                Ok(Monomial::new(c, pp))
            }
            _ => Err(Error::Parse(format!("{s:?} is not a single monomial"))),
        }
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", Polynomial::from(self.clone()))
    }
}

/// A polynomial in the free ring ℚ[Y(X)]: no zero coefficients are stored.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Polynomial {
    terms: BTreeMap<PowerProduct, Rational>,
}

impl From<Monomial> for Polynomial {
    fn from(m: Monomial) -> Self {
        Polynomial::term(m.coefficient, m.exponents)
    }
}

impl From<PowerProduct> for Polynomial {
    fn from(pp: PowerProduct) -> Self {
        Polynomial::term(Rational::one(), pp)
    }
}

impl From<VarId> for Polynomial {
    fn from(v: VarId) -> Self {
        Polynomial::from(PowerProduct::var(v, 1))
    }
}

impl Polynomial {
    /// The zero polynomial.
    pub fn zero() -> Self {
        Polynomial::default()
    }

    /// The constant `c`.
    pub fn constant(c: Rational) -> Self {
        Polynomial::term(c, PowerProduct::one())
    }

    /// The constant one.
    pub fn one() -> Self {
        Polynomial::constant(Rational::one())
    }

    /// `c · pp`.
    pub fn term(c: Rational, pp: PowerProduct) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(pp, c);
        }
        Polynomial { terms }
    }

    /// True for the zero polynomial.
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Number of stored terms.
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    /// True when there are no terms.
    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms in increasing graded-lexicographic order.
    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&PowerProduct, &Rational)> {
        self.terms.iter()
    }

    /// Consumes the polynomial into its terms (increasing order).
    pub fn into_terms(self) -> impl Iterator<Item = (PowerProduct, Rational)> {
        self.terms.into_iter()
    }

    /// Coefficient of `pp`.
    pub fn coefficient(&self, pp: &PowerProduct) -> Rational {
        self.terms.get(pp).cloned().unwrap_or_else(Rational::zero)
    }

    /// Adds `c · pp` in place.
    pub fn add_term(&mut self, c: Rational, pp: PowerProduct) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(pp) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    /// Adds `other` in place.
    pub fn add_assign(&mut self, other: &Polynomial) {
        for (pp, d) in &other.terms {
            self.add_term(d.clone(), pp.clone());
        }
    }

    /// Adds `c · other` in place.
    pub fn add_scaled(&mut self, c: &Rational, other: &Polynomial) {
        if c.is_zero() {
            return;
        }
        if c.is_one() {
            return self.add_assign(other);
        }
        for (pp, d) in &other.terms {
            self.add_term(c * d, pp.clone());
        }
    }

    /// `self + other`.
    pub fn add(&self, other: &Polynomial) -> Polynomial {
        let (mut out, other) = if self.len() >= other.len() {
            (self.clone(), other)
        } else {
            (other.clone(), self)
        };
        out.add_assign(other);
        out
    }

    /// `self − other`.
    pub fn sub(&self, other: &Polynomial) -> Polynomial {
        let mut out = self.clone();
        out.add_scaled(&-Rational::one(), other);
        out
    }

    /// `c · self`.
    pub fn scale(&self, c: &Rational) -> Polynomial {
        if c.is_zero() {
            return Polynomial::zero();
        }
        Polynomial {
            terms: self
                .terms
                .iter()
                .map(|(pp, d)| (pp.clone(), d * c))
                .collect(),
        }
    }

    /// `−self`.
    pub fn neg(&self) -> Polynomial {
        self.scale(&-Rational::one())
    }

    /// `self · pp`.
    pub fn mul_pp(&self, pp: &PowerProduct) -> Polynomial {
        Polynomial {
            terms: self
                .terms
                .iter()
                .map(|(q, d)| (q.mul(pp), d.clone()))
                .collect(),
        }
    }

    /// `self · other`.
    pub fn mul(&self, other: &Polynomial) -> Polynomial {
        let mut out = Polynomial::zero();
        for (p, c) in &self.terms {
            for (q, d) in &other.terms {
                out.add_term(c * d, p.mul(q));
            }
        }
        out
    }

    /// `self^k`.
    pub fn pow(&self, k: u32) -> Polynomial {
        let mut out = Polynomial::one();
        let mut base = self.clone();
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                out = out.mul(&base);
            }
            k >>= 1;
            if k > 0 {
                base = base.mul(&base);
            }
        }
        out
    }

    /// Largest total degree of a term (`None` for zero).
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(PowerProduct::degree).max()
    }

    /// True when every term has the same degree (zero counts as homogeneous).
    pub fn is_homogeneous(&self) -> bool {
        let mut degs = self.terms.keys().map(PowerProduct::degree);
        match degs.next() {
            None => true,
            Some(d) => degs.all(|e| e == d),
        }
    }

    /// Indices touched by any variable.
    pub fn support(&self) -> IndexSet {
        self.terms
            .keys()
            .fold(IndexSet::EMPTY, |s, pp| s.union(pp.support()))
    }

    /// Rewrites every variable to its `i ≤ j` representative. The result is
    /// equal in the quotient ring.
    pub fn canonical(&self) -> Polynomial {
        let mut out = Polynomial::zero();
        for (pp, c) in &self.terms {
            let (q, neg) = pp.canonical();
            out.add_term(if neg { -c.clone() } else { c.clone() }, q);
        }
        out
    }

    /// Substitutes variables: `f(v)` returns the image of `v`, or `None` to
    /// keep `v`. Powers of each image are computed once.
    pub fn substitute<F: FnMut(VarId) -> Option<Polynomial>>(&self, mut f: F) -> Polynomial {
        let mut images: BTreeMap<VarId, Option<Vec<Polynomial>>> = BTreeMap::new();
        let mut out = Polynomial::zero();
        for (pp, c) in &self.terms {
            let mut acc = Polynomial::constant(c.clone());
            let mut kept = Vec::new();
            for &(v, e) in pp.factors() {
                let slot = images
                    .entry(v)
                    .or_insert_with(|| f(v).map(|p| vec![Polynomial::one(), p]));
                match slot {
                    None => kept.push((v, e)),
                    Some(powers) => {
                        while powers.len() <= e as usize {
                            let next = powers.last().expect("nonempty").mul(&powers[1]);
                            powers.push(next);
                        }
                        acc = acc.mul(&powers[e as usize]);
                    }
                }
                if acc.is_zero() {
                    break;
                }
            }
            if !acc.is_zero() {
                if kept.is_empty() {
                    out.add_assign(&acc);
                } else {
                    out.add_assign(&acc.mul_pp(&PowerProduct::from_factors(kept)));
                }
            }
        }
        out
    }

    /// Parses the text format (see the module docs of the CLI); `d{i}` is
    /// accepted as a synonym for `y+ii`.
    pub fn parse(s: &str) -> Result<Polynomial> {
        let mut out = Polynomial::zero();
        for (c, factors) in parse_terms(s)? {
            let mut pp = PowerProduct::one();
            for f in factors {
                let (v, e) = match f {
                    Factor::Y(v, e) => (v, e),
                    Factor::D(i, e) => (VarId::plus(i, i), e),
                };
                pp = pp.mul(&PowerProduct::var(v, e));
            }
            out.add_term(c, pp);
        }
        Ok(out)
    }
}

fn fmt_terms<'a, I, T>(f: &mut fmt::Formatter<'_>, terms: I) -> fmt::Result
where
    I: Iterator<Item = (&'a Rational, T)>,
    T: fmt::Display,
{
    let mut first = true;
    for (c, body) in terms {
        let body = body.to_string();
        let neg = c.is_negative();
        if first {
            if neg {
                f.write_str("-")?;
            }
        } else {
            f.write_str(if neg { " - " } else { " + " })?;
        }
        first = false;
        let a = c.abs();
        if body == "1" {
            write!(f, "{a}")?;
        } else {
            write!(f, "{a}*{body}")?;
        }
    }
    if first {
        f.write_str("0")?;
    }
    Ok(())
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_terms(f, self.terms.iter().rev().map(|(pp, c)| (c, pp)))
    }
}

#[derive(Serialize, Deserialize)]
struct VarJson {
    sign: String,
    i: u32,
    j: u32,
    exp: u32,
}

#[derive(Serialize, Deserialize)]
struct TermJson {
    coeff: String,
    vars: Vec<VarJson>,
}

#[derive(Serialize, Deserialize)]
struct PolyJson {
    terms: Vec<TermJson>,
}

impl Serialize for Polynomial {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let terms = self
            .terms
            .iter()
            .rev()
            .map(|(pp, c)| TermJson {
                coeff: c.to_string(),
                vars: pp
                    .factors()
                    .iter()
                    .map(|&(v, e)| VarJson {
                        sign: v.sign.symbol().to_string(),
                        i: v.i,
                        j: v.j,
                        exp: e,
                    })
                    .collect(),
            })
            .collect();
        PolyJson { terms }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Polynomial {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let raw = PolyJson::deserialize(d)?;
        let mut out = Polynomial::zero();
        for t in raw.terms {
            let c = parse_rational(&t.coeff).map_err(D::Error::custom)?;
            let mut factors = Vec::new();
            for v in t.vars {
                let sign = match v.sign.as_str() {
                    "+" => Sign::Plus,
                    "-" => Sign::Minus,
                    other => return Err(D::Error::custom(format!("bad sign {other:?}"))),
                };
                factors.push((VarId::new(sign, v.i, v.j).map_err(D::Error::custom)?, v.exp));
            }
            out.add_term(c, PowerProduct::from_factors(factors));
        }
        Ok(out)
    }
}

impl Serialize for Monomial {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        Polynomial::from(self.clone()).serialize(s)
    }
}

impl<'de> Deserialize<'de> for Monomial {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let p = Polynomial::deserialize(d)?;
        let mut it = p.terms.into_iter();
        match (it.next(), it.next()) {
            (None, _) => Ok(Monomial::new(Rational::zero(), PowerProduct::one())),
            (Some((pp, c)), None) => Ok(Monomial::new(c, pp)),
            _ => Err(D::Error::custom("expected a single term")),
        }
    }
}

/// An element of ℚ[d₁, …, dₙ] over an explicit sorted index list; the
/// exponent vector is dense and aligned with `indices`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DiagonalPolynomial {
    indices: Vec<u32>,
    terms: BTreeMap<Vec<u32>, Rational>,
}

/// Graded lexicographic comparison of dense exponent vectors.
pub fn grlex_cmp(a: &[u32], b: &[u32]) -> Ordering {
    let da: u32 = a.iter().sum();
    let db: u32 = b.iter().sum();
    da.cmp(&db).then_with(|| a.cmp(b))
}

impl DiagonalPolynomial {
    /// The zero polynomial over `x`.
    pub fn zero(x: IndexSet) -> Self {
        DiagonalPolynomial {
            indices: x.to_vec(),
            terms: BTreeMap::new(),
        }
    }

    /// The constant `c` over `x`.
    pub fn constant(x: IndexSet, c: Rational) -> Self {
        let mut p = DiagonalPolynomial::zero(x);
        p.add_term(c, vec![0; x.len()]);
        p
    }

    /// `c · d^exps` over `x` (`exps` aligned with the sorted elements of `x`).
    pub fn monomial(x: IndexSet, c: Rational, exps: Vec<u32>) -> Result<Self> {
        if exps.len() != x.len() {
            return Err(Error::Malformed(format!(
                "exponent vector of length {} over {x}",
                exps.len()
            )));
        }
        let mut p = DiagonalPolynomial::zero(x);
        p.add_term(c, exps);
        Ok(p)
    }

    /// The variable `dᵢ` over `x`.
    pub fn var(x: IndexSet, i: u32) -> Result<Self> {
        let pos = x
            .position(i)
            .ok_or_else(|| Error::Malformed(format!("index {i} outside {x}")))?;
        let mut exps = vec![0; x.len()];
        exps[pos] = 1;
        DiagonalPolynomial::monomial(x, Rational::one(), exps)
    }

    /// The sorted index list the exponent vectors refer to.
    pub fn indices(&self) -> &[u32] {
        &self.indices
    }

    /// The index list as a set.
    pub fn index_set(&self) -> IndexSet {
        IndexSet::from_slice(&self.indices).expect("indices are a valid set")
    }

    /// True for zero.
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Number of terms.
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    /// True when there are no terms.
    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms sorted in decreasing graded-lexicographic order.
    pub fn terms_grlex(&self) -> Vec<(&Vec<u32>, &Rational)> {
        let mut v: Vec<_> = self.terms.iter().collect();
        v.sort_by(|a, b| grlex_cmp(b.0, a.0));
        v
    }

    /// Terms in storage order (plain lexicographic on exponent vectors).
    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &Rational)> {
        self.terms.iter()
    }

    /// Coefficient of `d^exps`.
    pub fn coefficient(&self, exps: &[u32]) -> Rational {
        self.terms.get(exps).cloned().unwrap_or_else(Rational::zero)
    }

    /// Adds `c · d^exps` in place.
    pub fn add_term(&mut self, c: Rational, exps: Vec<u32>) {
        debug_assert_eq!(exps.len(), self.indices.len());
        if c.is_zero() {
            return;
        }
        match self.terms.entry(exps) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    fn check_same(&self, other: &Self) {
        assert_eq!(
            self.indices, other.indices,
            "diagonal polynomials over different index sets"
        );
    }

    /// Adds `c · other` in place.
    ///
    /// # Panics
    /// Panics when the index lists differ.
    pub fn add_scaled(&mut self, c: &Rational, other: &Self) {
        self.check_same(other);
        for (e, d) in &other.terms {
            self.add_term(c * d, e.clone());
        }
    }

    /// `self + other` (same index list required).
    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.add_scaled(&Rational::one(), other);
        out
    }

    /// `self − other` (same index list required).
    pub fn sub(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.add_scaled(&-Rational::one(), other);
        out
    }

    /// `c · self`.
    pub fn scale(&self, c: &Rational) -> Self {
        let mut out = DiagonalPolynomial {
            indices: self.indices.clone(),
            terms: BTreeMap::new(),
        };
        if !c.is_zero() {
            out.terms = self.terms.iter().map(|(e, d)| (e.clone(), d * c)).collect();
        }
        out
    }

    /// `self · other` (same index list required).
    pub fn mul(&self, other: &Self) -> Self {
        self.check_same(other);
        let mut out = DiagonalPolynomial {
            indices: self.indices.clone(),
            terms: BTreeMap::new(),
        };
        for (a, c) in &self.terms {
            for (b, d) in &other.terms {
                let e: Vec<u32> = a.iter().zip(b).map(|(x, y)| x + y).collect();
                out.add_term(c * d, e);
            }
        }
        out
    }

    /// Largest total degree (`None` for zero).
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(|e| e.iter().sum()).max()
    }

    /// True when all terms share one degree (zero counts as homogeneous).
    pub fn is_homogeneous(&self) -> bool {
        let mut degs = self.terms.keys().map(|e| e.iter().sum::<u32>());
        match degs.next() {
            None => true,
            Some(d) => degs.all(|e| e == d),
        }
    }

    /// The retraction `dᵢ ↦ y+ii` back into the free ring.
    pub fn to_polynomial(&self) -> Polynomial {
        let mut out = Polynomial::zero();
        for (e, c) in &self.terms {
            let pp = PowerProduct::from_factors(
                self.indices
                    .iter()
                    .zip(e)
                    .map(|(&i, &k)| (VarId::plus(i, i), k)),
            );
            out.add_term(c.clone(), pp);
        }
        out
    }

    /// Parses text such as `"1/2*d1 + 1/2*d2"` over `x`.
    pub fn parse(s: &str, x: IndexSet) -> Result<Self> {
        let mut out = DiagonalPolynomial::zero(x);
        for (c, factors) in parse_terms(s)? {
            let mut e = vec![0u32; x.len()];
            for f in factors {
                match f {
                    Factor::D(i, k) => {
                        let pos = x
                            .position(i)
                            .ok_or_else(|| Error::Malformed(format!("index {i} outside {x}")))?;
                        e[pos] += k;
                    }
                    Factor::Y(v, _) => {
                        return Err(Error::Parse(format!("symbol {v} in a diagonal polynomial")))
                    }
                }
            }
            out.add_term(c, e);
        }
        Ok(out)
    }
}

struct DiagBody<'a>(&'a [u32], &'a [u32]);

impl fmt::Display for DiagBody<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (&i, &k) in self.0.iter().zip(self.1) {
            if k == 0 {
                continue;
            }
            if !first {
                f.write_str("*")?;
            }
            first = false;
            if i < 10 {
                write!(f, "d{i}")?;
            } else {
                write!(f, "d[{i}]")?;
            }
            if k != 1 {
                write!(f, "^{k}")?;
            }
        }
        if first {
            f.write_str("1")?;
        }
        Ok(())
    }
}

impl fmt::Display for DiagonalPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms = self.terms_grlex();
        fmt_terms(
            f,
            terms
                .into_iter()
                .map(|(e, c)| (c, DiagBody(&self.indices, e))),
        )
    }
}

#[derive(Serialize, Deserialize)]
struct DiagTermJson {
    coeff: String,
    exps: Vec<u32>,
}

#[derive(Serialize, Deserialize)]
struct DiagJson {
    indices: Vec<u32>,
    terms: Vec<DiagTermJson>,
}

impl Serialize for DiagonalPolynomial {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        DiagJson {
            indices: self.indices.clone(),
            terms: self
                .terms_grlex()
                .into_iter()
                .map(|(e, c)| DiagTermJson {
                    coeff: c.to_string(),
                    exps: e.clone(),
                })
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for DiagonalPolynomial {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let raw = DiagJson::deserialize(d)?;
        let x = IndexSet::from_slice(&raw.indices).map_err(D::Error::custom)?;
        if x.to_vec() != raw.indices {
            return Err(D::Error::custom("indices must be strictly increasing"));
        }
        let mut out = DiagonalPolynomial::zero(x);
        for t in raw.terms {
            if t.exps.len() != x.len() {
                return Err(D::Error::custom("exponent vector length mismatch"));
            }
            out.add_term(parse_rational(&t.coeff).map_err(D::Error::custom)?, t.exps);
        }
        Ok(out)
    }
}

/// The image of one symbol in ℚ[d]: at most two `(position, coefficient)` entries.
pub(crate) fn linear_image(v: VarId, x: IndexSet) -> Result<Vec<(usize, Rational)>> {
    let outside = |k: u32| Error::Malformed(format!("index {k} of {v} lies outside {x}"));
    let pi = x.position(v.i).ok_or_else(|| outside(v.i))?;
    let pj = x.position(v.j).ok_or_else(|| outside(v.j))?;
    let half = ratio(1, 2);
    Ok(match (v.sign, pi == pj) {
        (Sign::Plus, true) => vec![(pi, Rational::one())],
        (Sign::Minus, true) => return Err(Error::Malformed(format!("symbol {v} does not exist"))),
        (Sign::Plus, false) => vec![(pi, half.clone()), (pj, half)],
        (Sign::Minus, false) => vec![(pi, half.clone()), (pj, -half)],
    })
}

/// `(Σ cₖ d_{pₖ})^e` as a diagonal polynomial.
pub(crate) fn linear_power(form: &[(usize, Rational)], e: u32, x: IndexSet) -> DiagonalPolynomial {
    let n = x.len();
    let mut out = DiagonalPolynomial::zero(x);
    match form {
        [(p, c)] => {
            let mut exps = vec![0; n];
            exps[*p] = e;
            out.add_term(num_traits::pow(c.clone(), e as usize), exps);
        }
        [(p, a), (q, b)] => {
            for k in 0..=e {
                let mut exps = vec![0; n];
                exps[*p] = k;
                exps[*q] = e - k;
                let coef = Rational::from_integer(binomial(BigInt::from(e), BigInt::from(k)))
                    * num_traits::pow(a.clone(), k as usize)
                    * num_traits::pow(b.clone(), (e - k) as usize);
                out.add_term(coef, exps);
            }
        }
        _ => unreachable!("symbols have one or two diagonal components"),
    }
    out
}

/// The normal form of `p` in ℚ[dᵢ : i ∈ X].
///
/// Two polynomials are equal in the quotient ring exactly when their normal
/// forms coincide.
pub fn normal_form(p: &Polynomial, x: IndexSet) -> Result<DiagonalPolynomial> {
    let mut out = DiagonalPolynomial::zero(x);
    let mut cache: BTreeMap<(VarId, u32), DiagonalPolynomial> = BTreeMap::new();
    for (pp, c) in p.terms() {
        let mut acc = DiagonalPolynomial::constant(x, c.clone());
        for &(v, e) in pp.factors() {
            let key = (v, e);
            if let std::collections::btree_map::Entry::Vacant(slot) = cache.entry(key) {
                let form = linear_image(v, x)?;
                slot.insert(linear_power(&form, e, x));
            }
            acc = acc.mul(&cache[&key]);
        }
        out.add_scaled(&Rational::one(), &acc);
    }
    Ok(out)
}

/// Decides `[p] = [q]` in the quotient ring.
pub fn equal_in_r(p: &Polynomial, q: &Polynomial) -> bool {
    let diff = p.sub(q);
    let x = diff.support();
    normal_form(&diff, x)
        .map(|nf| nf.is_zero())
        .unwrap_or(false)
}

/// All relation polynomials generating the ideal over `X`, for every triple
/// `(i, j, k)` of elements of `X` (repeats allowed) whose symbols all exist:
///
/// * `y-ij + y-ji`
/// * `y+ij − y+ji`
/// * `y-ij + y-jk + y-ki`
/// * `y+ij − y+jk + y-ki`
///
/// Duplicates are dropped; the zero polynomial appears when a relation is
/// trivially zero (such as `y+ii − y+ii`).
pub fn ideal_reduce_generators(x: IndexSet) -> Vec<Polynomial> {
    let p = |i, j| Polynomial::from(VarId::plus(i, j));
    let m = |i, j| Polynomial::from(VarId::minus(i, j));
    let mut out: Vec<Polynomial> = Vec::new();
    let mut push = |q: Polynomial| {
        if !out.contains(&q) {
            out.push(q);
        }
    };
    for i in x.iter() {
        for j in x.iter() {
            for k in x.iter() {
                if i != j {
                    push(m(i, j).add(&m(j, i)));
                }
                push(p(i, j).sub(&p(j, i)));
                if i != j && j != k && k != i {
                    push(m(i, j).add(&m(j, k)).add(&m(k, i)));
                }
                if k != i {
                    push(p(i, j).sub(&p(j, k)).add(&m(k, i)));
                }
            }
        }
    }
    out
}

enum Factor {
    Y(VarId, u32),
    D(u32, u32),
}

struct Cursor<'a> {
    s: &'a [u8],
    pos: usize,
    text: &'a str,
}

impl<'a> Cursor<'a> {
    fn err(&self, what: &str) -> Error {
        Error::Parse(format!("{what} at offset {} in {:?}", self.pos, self.text))
    }

    fn skip_ws(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<u8> {
        self.s.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn digits(&mut self) -> Result<&'a str> {
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err("expected digits"));
        }
        Ok(&self.text[start..self.pos])
    }

    fn uint(&mut self) -> Result<u32> {
        let d = self.digits()?;
        d.parse().map_err(|_| self.err("integer out of range"))
    }

    fn index(&mut self) -> Result<u32> {
        if self.eat(b'[') {
            let i = self.uint()?;
            if !self.eat(b']') {
                return Err(self.err("expected ']'"));
            }
            Ok(i)
        } else {
            match self.peek() {
                Some(c) if c.is_ascii_digit() => {
                    self.pos += 1;
                    Ok(u32::from(c - b'0'))
                }
                _ => Err(self.err("expected an index")),
            }
        }
    }

    fn exponent(&mut self) -> Result<u32> {
        if self.eat(b'^') {
            self.uint()
        } else {
            Ok(1)
        }
    }

    fn factor(&mut self, coeff: &mut Rational, factors: &mut Vec<Factor>) -> Result<()> {
        self.skip_ws();
        match self.peek() {
            Some(b'y') => {
                self.pos += 1;
                let sign = if self.eat(b'+') {
                    Sign::Plus
                } else if self.eat(b'-') {
                    Sign::Minus
                } else {
                    return Err(self.err("expected '+' or '-' after 'y'"));
                };
                let i = self.index()?;
                let j = self.index()?;
                let v = VarId::new(sign, i, j)?;
                factors.push(Factor::Y(v, self.exponent()?));
            }
            Some(b'd') => {
                self.pos += 1;
                let i = self.index()?;
                if i >= MAX_INDEX {
                    return Err(self.err("index too large"));
                }
                factors.push(Factor::D(i, self.exponent()?));
            }
            Some(c) if c.is_ascii_digit() => {
                let num: BigInt = self
                    .digits()?
                    .parse()
                    .map_err(|_| self.err("bad integer"))?;
                let den: BigInt = if self.eat(b'/') {
                    self.digits()?
                        .parse()
                        .map_err(|_| self.err("bad integer"))?
                } else {
                    BigInt::one()
                };
                if den.is_zero() {
                    return Err(self.err("zero denominator"));
                }
                *coeff *= Rational::new(num, den);
            }
            _ => return Err(self.err("expected a factor")),
        }
        Ok(())
    }
}

fn parse_terms(text: &str) -> Result<Vec<(Rational, Vec<Factor>)>> {
    let mut cur = Cursor {
        s: text.as_bytes(),
        pos: 0,
        text,
    };
    let mut out = Vec::new();
    cur.skip_ws();
    if cur.peek().is_none() {
        return Err(cur.err("empty input"));
    }
    let mut negative = cur.eat(b'-');
    if !negative {
        cur.eat(b'+');
    }
    loop {
        let mut coeff = if negative {
            -Rational::one()
        } else {
            Rational::one()
        };
        let mut factors = Vec::new();
        cur.factor(&mut coeff, &mut factors)?;
        loop {
            cur.skip_ws();
            if cur.eat(b'*') {
                cur.factor(&mut coeff, &mut factors)?;
            } else {
                break;
            }
        }
        out.push((coeff, factors));
        cur.skip_ws();
        match cur.peek() {
            None => break,
            Some(b'+') => {
                cur.pos += 1;
                negative = false;
            }
            Some(b'-') => {
                cur.pos += 1;
                negative = true;
            }
            Some(_) => return Err(cur.err("expected '+', '-', '*' or end of input")),
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x(n: u32) -> IndexSet {
        IndexSet::range1(n).unwrap()
    }

    #[test]
    fn plus_symbol_is_the_mean_of_diagonals() {
        let nf = normal_form(&Polynomial::parse("y+12").unwrap(), x(2)).unwrap();
        assert_eq!(nf.to_string(), "1/2*d1 + 1/2*d2");
    }

    #[test]
    fn cyclic_minus_relation_vanishes() {
        let p = Polynomial::parse("y-12 + y-23 + y-31").unwrap();
        assert!(normal_form(&p, x(3)).unwrap().is_zero());
    }

    #[test]
    fn squared_product_matches_hand_expansion() {
        // (y+11 y+12 y-12)^2 = (1/4 d1 (d1^2 - d2^2))^2 = 1/16 (d1^6 - 2 d1^4 d2^2 + d1^2 d2^4)
        let p = Polynomial::parse("y+11^2*y+12^2*y-12^2").unwrap();
        let expect =
            DiagonalPolynomial::parse("1/16*d1^6 - 1/8*d1^4*d2^2 + 1/16*d1^2*d2^4", x(2)).unwrap();
        assert_eq!(normal_form(&p, x(2)).unwrap(), expect);
    }

    #[test]
    fn equality_examples() {
        let q = |s| Polynomial::parse(s).unwrap();
        assert!(equal_in_r(&q("y-12"), &q("-1*y-21")));
        assert!(equal_in_r(&q("y+12"), &q("y+21")));
        assert!(!equal_in_r(&q("y+11"), &q("y+22")));
    }

    #[test]
    fn index_outside_ambient_set_is_rejected() {
        let p = Polynomial::parse("y+13").unwrap();
        assert!(matches!(normal_form(&p, x(2)), Err(Error::Malformed(_))));
    }

    #[test]
    fn generator_lists() {
        let g2 = ideal_reduce_generators(x(2));
        assert!(g2.contains(&Polynomial::parse("y+11 - y+12 + y-21").unwrap()));
        let g1 = ideal_reduce_generators(x(1));
        assert_eq!(g1, vec![Polynomial::zero()]);
        let g3 = ideal_reduce_generators(x(3));
        assert!(g3.contains(&Polynomial::parse("y-12 + y-23 + y-31").unwrap()));
    }

    #[test]
    fn text_round_trip_and_large_indices() {
        let p = Polynomial::parse("3/4*y+[10][2]^3 - 2*y-12*y+11 + 5").unwrap();
        let again = Polynomial::parse(&p.to_string()).unwrap();
        assert_eq!(p, again);
        assert!(p.to_string().contains("y+[10][2]^3"));
        assert_eq!(Polynomial::zero().to_string(), "0");
    }

    #[test]
    fn json_schema_shape() {
        let p = Polynomial::parse("3/4*y+12^3").unwrap();
        let v = serde_json::to_value(&p).unwrap();
        assert_eq!(
            v,
            serde_json::json!({"terms": [{"coeff": "3/4", "vars": [{"sign": "+", "i": 1, "j": 2, "exp": 3}]}]})
        );
        let back: Polynomial = serde_json::from_value(v).unwrap();
        assert_eq!(back, p);
    }

    #[test]
    fn grlex_puts_higher_degree_first() {
        let p = Polynomial::parse("y+11 + y+11^2 + y+22^2 + y+11*y+22").unwrap();
        assert_eq!(p.to_string(), "1*y+11^2 + 1*y+11*y+22 + 1*y+22^2 + 1*y+11");
    }

    #[test]
    fn parse_rejects_garbage() {
        assert!(Polynomial::parse("y*12").is_err());
        assert!(Polynomial::parse("y-11").is_err());
        assert!(Polynomial::parse("").is_err());
        assert!(Monomial::parse("y+12 + y+13").is_err());
    }

    #[test]
    fn canonical_tracks_sign() {
        let p = Polynomial::parse("y-21^3*y+21").unwrap();
        assert_eq!(p.canonical(), Polynomial::parse("-1*y+12*y-12^3").unwrap());
        assert!(equal_in_r(&p, &p.canonical()));
    }
}
