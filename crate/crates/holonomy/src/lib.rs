//! Numeric property tests of the geometric input to the vanishing results:
//! structured SO(2n+1) matrix forms, the realification κ: U(n) → SO(2n+1),
//! products of commutators and genericity of torus elements, and the section
//! formulas whose common zeros are exactly those forms.
//!
//! Tolerances follow a two-tier policy: structural zeros of exactly built
//! matrices are checked at `1e−12`, group identities after floating-point
//! products at `1e−9`.

pub mod error;
pub mod form;
pub mod generic;
pub mod matrix;
pub mod stress;

pub use error::{HolonomyError, Result};
pub use form::{sample_form, vanishing_sections, FormSpec};
pub use generic::{is_generic_torus, torus_angles};
pub use matrix::{commutator_product, kappa, section_values, unkappa, OrthMatrix, TorusElement};
pub use stress::{
    duality_check, kappa_homomorphism, stress_lemma, DualityReport, KappaReport, StressConfig,
    StressReport,
};
