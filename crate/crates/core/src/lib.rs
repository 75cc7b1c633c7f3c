//! Exact algebra for products of Chern classes of root line bundles.
//!
//! The crate models the quotient ring `R = ℚ[Y(X)]/I` generated by symbols
//! y±ᵢⱼ, the combinatorics of blocks `V × Vᶜ` in `X × X`, the recursively
//! defined "good" section collections whose products vanish, a constructive
//! engine rewriting high-degree monomials into combinations of good products,
//! and an independent linear-algebra oracle that certifies membership without
//! trusting that engine.

pub mod algebra;
pub mod blocks;
pub mod decomposer;
pub mod error;
pub mod good;
pub mod index_set;
pub mod linalg;
pub mod oracle;

pub use algebra::{
    equal_in_r, ideal_reduce_generators, normal_form, DiagonalPolynomial, Monomial, Polynomial,
    PowerProduct, Rational, Sign, VarId,
};
pub use blocks::{Block, BlockUnion};
pub use error::{Error, Result};
pub use good::{enumerate_good, EnumerationCaps, GoodCollection, GoodMonomial};
pub use index_set::IndexSet;
