//! The constructive reduction: rewrite any monomial of degree at least
//! `2g·n² + ½(n−1)(n−2)` over `n` indices into an explicit combination
//! `Σ θ · (good monomial)`, each good monomial carrying the construction of
//! its section collection, plus the standalone reduction in rank two.
//!
//! Every identity used along the way is checked against the normal form
//! when [`EngineConfig::check_steps`] is set (the default in debug builds),
//! and every final [`Decomposition`] can be re-verified independently by the
//! oracle.
//!
//! All symbols are handled in canonical form (`i ≤ j`), folding
//! `y+ji = y+ij` and `y-ji = −y-ij` into the coefficients.

mod flip;
mod full;
mod pigeonhole;
mod procedure;
mod rewrite;
pub mod signing;
mod so5;
mod structure;

use std::collections::HashMap;
use std::rc::Rc;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

pub use flip::{decompose_flipped, decompose_su_style, flip_iso, in_difference_symbols, BlockTerm};
pub use full::{decompose_full, decompose_full_with};
pub use pigeonhole::{
    avoiding_part_bound, block_solve_bound, diagonal_or_difference, reduction_bound, select_z,
    side_or_difference, split_sides, square_sides, theorem_bound, Branch,
};
pub use procedure::{procedure_reduce, step_four_rewrite, ProcedureTerm};
pub use rewrite::Rewriter;
pub use so5::{so5_decompose, so5_decomposition, So5Term};
pub use structure::{
    change_generators_diag, structure_reduce, zrow_reduce, DiagonalSplit, ZrowKind, ZrowTerm,
};

use crate::algebra::{normal_form, Monomial, Polynomial, PowerProduct, Rational, VarId};
use crate::blocks::Block;
use crate::error::{Error, Result};
use crate::good::GoodMonomial;
use crate::index_set::IndexSet;
use flip::BlockSolver;
use signing::{paired_factor, signed_factor};

/// Tuning and safety knobs of the [`Engine`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EngineConfig {
    /// Re-check every lemma-level identity against the normal form.
    pub check_steps: bool,
    /// Abort when an intermediate polynomial has more terms than this.
    pub term_cap: usize,
    /// Abort when the procedure loop runs more steps than this.
    pub step_cap: usize,
    /// Record a [`LemmaTrace`].
    pub trace: bool,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            check_steps: cfg!(debug_assertions),
            term_cap: 1_000_000,
            step_cap: 5_000_000,
            trace: false,
        }
    }
}

/// Counters of the procedure's termination argument.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counters {
    /// Total number of unordered pairs recorded in the generator slots.
    pub b: u32,
    /// Total deficit `Σ_{i<j} max(0, 2g − d_ij)`.
    pub d: u32,
    /// `deg(αβ)`.
    pub deg_ab: u32,
}

/// One logged step.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceStep {
    /// The lemma or procedure step.
    pub lemma: String,
    /// Which branch was taken.
    pub branch: String,
    /// Chosen indices or blocks and degree bookkeeping.
    pub detail: String,
    /// Procedure counters before and after the step, when applicable.
    pub counters: Option<(Counters, Counters)>,
}

/// Log of the lemma applications of one decomposition call.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LemmaTrace {
    /// Steps in execution order.
    pub steps: Vec<TraceStep>,
}

impl LemmaTrace {
    /// True when no procedure step decreased `b` or `deg(αβ)` or increased `d`.
    pub fn counters_monotone(&self) -> bool {
        self.steps
            .iter()
            .filter_map(|s| s.counters)
            .all(|(a, b)| b.b >= a.b && b.deg_ab >= a.deg_ab && b.d <= a.d)
    }
}

/// Intermediate output of the recursive reduction over a set `X`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum StructuredTerm {
    /// `cofactor · ∏_{(i,j)∈B} (y+ij y-ij)^{2g}`.
    Paired {
        /// The block `B`.
        block: Block,
        /// Cofactor.
        cofactor: Polynomial,
    },
    /// `cofactor · ∏_{(i,j)∈B} (y-ij)^{2g} ∏_{(i,j)∉B∪B̄, i<j} (y+ij)^{2g}`
    /// (the empty block when `block` is `None`).
    Signed {
        /// The block `B`, or none.
        block: Option<Block>,
        /// Cofactor.
        cofactor: Polynomial,
    },
}

impl StructuredTerm {
    /// The cofactor.
    pub fn cofactor(&self) -> &Polynomial {
        match self {
            StructuredTerm::Paired { cofactor, .. } | StructuredTerm::Signed { cofactor, .. } => {
                cofactor
            }
        }
    }

    /// The fixed factor of the family, over `x`.
    pub fn factor(&self, x: IndexSet, g: u32) -> PowerProduct {
        match self {
            StructuredTerm::Paired { block, .. } => paired_factor(block, g),
            StructuredTerm::Signed { block, .. } => signed_factor(block.as_ref(), x, g),
        }
    }

    /// `cofactor · factor`.
    pub fn expand(&self, x: IndexSet, g: u32) -> Polynomial {
        self.cofactor().mul_pp(&self.factor(x, g))
    }
}

/// One summand `θ · good` of a decomposition.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecompositionTerm {
    /// Cofactor.
    pub theta: Polynomial,
    /// The good monomial and its construction.
    pub good: GoodMonomial,
}

/// A certified expression of a monomial as a combination of good monomials.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Decomposition {
    /// The decomposed monomial.
    pub input: Monomial,
    /// Number of indices.
    pub n: u32,
    /// Genus parameter.
    pub g: u32,
    /// The summands.
    pub terms: Vec<DecompositionTerm>,
    /// The intermediate structured form (recorded together with the trace).
    pub residual_form: Option<Vec<StructuredTerm>>,
    /// Lemma log (empty unless tracing was requested).
    pub trace: LemmaTrace,
}

impl Decomposition {
    /// `Σ θ · good`.
    pub fn reconstruct(&self) -> Polynomial {
        let mut sum = Polynomial::zero();
        for t in &self.terms {
            sum = sum.add(&t.theta.mul(&t.good.monomial));
        }
        sum
    }
}

type SolverKey = (IndexSet, u32, u32);
type ResultList = Rc<Vec<(Polynomial, crate::good::GoodCollection)>>;

/// Per-call state of the reduction: configuration, caches of rewriters,
/// linear solves and sub-results, and the trace. Engines are cheap to
/// create and not shared between threads.
#[derive(Debug)]
pub struct Engine {
    g: u32,
    config: EngineConfig,
    rewriters: HashMap<(IndexSet, Vec<VarId>), Rc<Rewriter>>,
    solvers: HashMap<SolverKey, Rc<BlockSolver>>,
    structure_cache: HashMap<(IndexSet, PowerProduct), Rc<Vec<StructuredTerm>>>,
    full_cache: HashMap<(IndexSet, PowerProduct), ResultList>,
    trace: LemmaTrace,
    steps: usize,
}

impl Engine {
    /// An engine for genus parameter `g` with the default configuration.
    pub fn new(g: u32) -> Self {
        Engine::with_config(g, EngineConfig::default())
    }

    /// An engine with an explicit configuration.
    pub fn with_config(g: u32, config: EngineConfig) -> Self {
        Engine {
            g,
            config,
            rewriters: HashMap::new(),
            solvers: HashMap::new(),
            structure_cache: HashMap::new(),
            full_cache: HashMap::new(),
            trace: LemmaTrace::default(),
            steps: 0,
        }
    }

    /// The genus parameter.
    pub fn g(&self) -> u32 {
        self.g
    }

    /// The configuration.
    pub fn config(&self) -> &EngineConfig {
        &self.config
    }

    /// Takes the accumulated trace, leaving an empty one.
    pub fn take_trace(&mut self) -> LemmaTrace {
        std::mem::take(&mut self.trace)
    }

    pub(crate) fn log(&mut self, lemma: &str, branch: &str, detail: impl FnOnce() -> String) {
        if self.config.trace {
            let detail = detail();
            self.trace.steps.push(TraceStep {
                lemma: lemma.into(),
                branch: branch.into(),
                detail,
                counters: None,
            });
        }
    }

    pub(crate) fn rewriter(&mut self, x: IndexSet, allowed: Vec<VarId>) -> Result<Rc<Rewriter>> {
        let key = (x, allowed);
        if let Some(r) = self.rewriters.get(&key) {
            return Ok(Rc::clone(r));
        }
        let r = Rc::new(Rewriter::new(x, key.1.iter().copied())?);
        self.rewriters.insert(key, Rc::clone(&r));
        Ok(r)
    }

    /// Rewrites and applies the term-count watchdog.
    pub(crate) fn rewrite(
        &mut self,
        x: IndexSet,
        allowed: Vec<VarId>,
        p: &Polynomial,
    ) -> Result<Polynomial> {
        let q = self.rewriter(x, allowed)?.apply(p);
        self.guard(&q)?;
        Ok(q)
    }

    pub(crate) fn guard(&self, p: &Polynomial) -> Result<()> {
        if p.len() > self.config.term_cap {
            return Err(Error::Watchdog(format!(
                "{} terms exceed the cap {}",
                p.len(),
                self.config.term_cap
            )));
        }
        Ok(())
    }

    /// Checks `[lhs] = [rhs]` over `x` when step checking is enabled.
    pub(crate) fn check_equal(
        &self,
        what: &str,
        lhs: &Polynomial,
        rhs: impl FnOnce() -> Polynomial,
        x: IndexSet,
    ) -> Result<()> {
        if !self.config.check_steps {
            return Ok(());
        }
        if normal_form(&lhs.sub(&rhs()), x)?.is_zero() {
            Ok(())
        } else {
            Err(Error::TheoremViolation(format!(
                "{what}: output does not reproduce its input"
            )))
        }
    }
}

/// Divides every term of the canonical form of `p` by the canonical power
/// product `factor`; a term that is not divisible is a broken guarantee.
pub(crate) fn divide_out(p: &Polynomial, factor: &PowerProduct, what: &str) -> Result<Polynomial> {
    let mut out = Polynomial::zero();
    for (pp, c) in p.canonical().into_terms() {
        let q = pp.checked_div(factor).ok_or_else(|| {
            Error::TheoremViolation(format!("{what}: {pp} is not divisible by {factor}"))
        })?;
        out.add_term(c, q);
    }
    Ok(out)
}

/// `c · pp` as a polynomial.
pub(crate) fn term(c: &Rational, pp: &PowerProduct) -> Polynomial {
    Polynomial::term(c.clone(), pp.clone())
}

/// Sums cofactors of structured terms with the same family and block.
pub(crate) fn merge_structured(terms: Vec<StructuredTerm>) -> Vec<StructuredTerm> {
    let mut out: Vec<StructuredTerm> = Vec::new();
    let mut index: HashMap<(bool, Option<Block>), usize> = HashMap::new();
    for t in terms {
        let key = match &t {
            StructuredTerm::Paired { block, .. } => (true, Some(*block)),
            StructuredTerm::Signed { block, .. } => (false, *block),
        };
        match index.get(&key) {
            Some(&k) => match &mut out[k] {
                StructuredTerm::Paired { cofactor, .. }
                | StructuredTerm::Signed { cofactor, .. } => {
                    cofactor.add_assign(t.cofactor());
                }
            },
            None => {
                index.insert(key, out.len());
                out.push(t);
            }
        }
    }
    out.retain(|t| !t.cofactor().is_zero());
    out
}

/// Rejects input not over `x` or below a degree bound.
pub(crate) fn require_degree(p: &PowerProduct, x: IndexSet, bound: i64, what: &str) -> Result<()> {
    if !p.support().is_subset(x) {
        return Err(Error::Malformed(format!("{what}: {p} is not over {x}")));
    }
    if i64::from(p.degree()) < bound {
        return Err(Error::Precondition(format!(
            "{what}: degree {} below {bound}",
            p.degree()
        )));
    }
    Ok(())
}

/// Canonical single term of a monomial: `(coefficient, power product)`.
pub(crate) fn canonical_monomial(m: &Monomial) -> Result<(Rational, PowerProduct)> {
    let p = Polynomial::from(m.clone()).canonical();
    let mut it = p.into_terms();
    match (it.next(), it.next()) {
        (Some((pp, c)), None) => Ok((c, pp)),
        (None, _) => Ok((Rational::zero(), PowerProduct::one())),
        _ => Err(Error::Malformed("not a monomial".into())),
    }
}
