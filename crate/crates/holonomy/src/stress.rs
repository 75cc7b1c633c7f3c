//! Randomised property checks: commutator products of structured matrices
//! are never generic torus elements; κ is a homomorphism; each form zeroes
//! exactly its associated sections.
//!
//! Every trial draws from its own ChaCha stream `(seed, trial)`, so results
//! do not depend on how trials are split across workers.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use chern_core::Sign;

use crate::error::Result;
use crate::form::{sample_form, sample_unitary, vanishing_sections, FormSpec};
use crate::generic::{distance_to_lattice, is_generic_torus, torus_angles};
use crate::matrix::{
    complex_structure_defect, kappa, max_abs, max_abs_complex, section_values, swap_matrix,
    unkappa, OrthMatrix, GROUP_TOL, STRUCTURE_TOL,
};

/// Size of the single-entry perturbation used by the duality check.
pub const PERTURBATION: f64 = 1e-3;

/// Failure reports kept per run.
const MAX_REPORTED: usize = 5;

/// The random stream of one trial.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Parameters of [`stress_lemma`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StressConfig {
    /// Rank.
    pub n: usize,
    /// Number of commutator pairs.
    pub g: usize,
    /// The form of every generator.
    pub form: FormSpec,
    /// Number of sampled tuples.
    pub trials: usize,
    /// Seed of the random streams.
    pub seed: u64,
    /// Genericity and identity tolerance.
    pub tol: f64,
    /// Worker threads (at least one).
    pub jobs: usize,
}

/// One offending sample.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    /// Trial index (its random stream).
    pub trial: u64,
    /// Seed of the run.
    pub seed: u64,
    /// What went wrong.
    pub reason: String,
    /// The product of commutators, row by row.
    pub product: Vec<Vec<f64>>,
}

/// Outcome of [`stress_lemma`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StressReport {
    /// Rank.
    pub n: usize,
    /// Number of commutator pairs.
    pub g: usize,
    /// Form label.
    pub form: String,
    /// Trials run.
    pub trials: usize,
    /// Seed.
    pub seed: u64,
    /// Tolerance.
    pub tol: f64,
    /// Samples whose product was a generic torus element or broke the
    /// determinant argument.
    pub violations: usize,
    /// Products that were (within `tol`) torus elements at all.
    pub torus_products: usize,
    /// Largest `|det N − 1|` for the unitary `N` underlying the product.
    pub max_determinant_residual: f64,
    /// Largest distance of the conjugated product from the image of κ.
    pub max_structure_defect: f64,
    /// Up to a few offending samples.
    pub examples: Vec<Violation>,
}

impl StressReport {
    /// True when no sample violated the lemma.
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

#[derive(Default)]
struct Partial {
    violations: usize,
    torus: usize,
    det: f64,
    defect: f64,
    examples: Vec<Violation>,
}

fn run_trial(cfg: &StressConfig, trial: u64, acc: &mut Partial) -> Result<()> {
    let mut rng = trial_rng(cfg.seed, trial);
    let mut a = Vec::with_capacity(cfg.g);
    let mut b = Vec::with_capacity(cfg.g);
    for _ in 0..cfg.g {
        a.push(sample_form(&cfg.form, cfg.n, &mut rng)?);
        b.push(sample_form(&cfg.form, cfg.n, &mut rng)?);
    }
    let product = crate::matrix::commutator_product(&a, &b)?;
    let shape = cfg.form.shape(cfg.n)?;
    // Undo the swap and read the unitary on the structured coordinates.
    let e = swap_matrix(cfg.n, &shape.swapped);
    let conj = &e * product.matrix() * &e;
    let idx: Vec<usize> = shape
        .structured
        .iter()
        .flat_map(|&i| [2 * (i as usize - 1), 2 * (i as usize - 1) + 1])
        .collect();
    let corner = DMatrix::from_fn(idx.len(), idx.len(), |r, c| conj[(idx[r], idx[c])]);
    let k: Vec<usize> = (0..shape.structured.len()).collect();
    let defect = complex_structure_defect(&corner, &k);
    let det_res = (unkappa(&corner).determinant() - num_complex::Complex64::new(1.0, 0.0)).norm();
    acc.det = acc.det.max(det_res);
    acc.defect = acc.defect.max(defect);
    let mut reasons = Vec::new();
    if is_generic_torus(product.matrix(), cfg.tol) {
        reasons.push("product is a generic torus element".to_string());
    }
    if defect > cfg.tol {
        reasons.push(format!("product left the image of κ by {defect:e}"));
    }
    if det_res > cfg.tol {
        reasons.push(format!("underlying unitary has |det − 1| = {det_res:e}"));
    }
    if let Some(angles) = torus_angles(product.matrix(), cfg.tol) {
        acc.torus += 1;
        let signed: f64 = shape
            .structured
            .iter()
            .map(|&i| f64::from(shape.side_sign(i)) * -angles[i as usize - 1])
            .sum();
        if distance_to_lattice(signed) > cfg.tol {
            reasons.push(format!(
                "torus product with signed angle sum {signed} ∉ 2πℤ"
            ));
        }
    }
    if !reasons.is_empty() {
        acc.violations += 1;
        if acc.examples.len() < MAX_REPORTED {
            acc.examples.push(Violation {
                trial,
                seed: cfg.seed,
                reason: reasons.join("; "),
                product: product.rows(),
            });
        }
    }
    Ok(())
}

/// Samples `trials` tuples of `2g` matrices of the given form and checks
/// that the product of commutators is never a generic torus element, that
/// (after undoing the swap) it is κ of a unitary of determinant one, and
/// that a torus-form product has angle sum in `2πℤ` (with the swapped
/// angles negated).
pub fn stress_lemma(cfg: &StressConfig) -> Result<StressReport> {
    cfg.form.shape(cfg.n)?;
    let jobs = cfg.jobs.max(1).min(cfg.trials.max(1));
    let chunk = cfg.trials.div_ceil(jobs);
    let partials: Vec<Result<Partial>> = std::thread::scope(|s| {
        let handles: Vec<_> = (0..jobs)
            .map(|w| {
                s.spawn(move || {
                    let mut acc = Partial::default();
                    let lo = w * chunk;
                    let hi = ((w + 1) * chunk).min(cfg.trials);
                    for t in lo..hi {
                        run_trial(cfg, t as u64, &mut acc)?;
                    }
                    Ok(acc)
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("worker panicked"))
            .collect()
    });
    let mut report = StressReport {
        n: cfg.n,
        g: cfg.g,
        form: cfg.form.label(),
        trials: cfg.trials,
        seed: cfg.seed,
        tol: cfg.tol,
        violations: 0,
        torus_products: 0,
        max_determinant_residual: 0.0,
        max_structure_defect: 0.0,
        examples: Vec::new(),
    };
    for p in partials {
        let p = p?;
        report.violations += p.violations;
        report.torus_products += p.torus;
        report.max_determinant_residual = report.max_determinant_residual.max(p.det);
        report.max_structure_defect = report.max_structure_defect.max(p.defect);
        report.examples.extend(p.examples);
    }
    report.examples.truncate(MAX_REPORTED);
    Ok(report)
}

/// Outcome of [`kappa_homomorphism`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KappaReport {
    /// Rank.
    pub n: usize,
    /// Random pairs checked.
    pub pairs: usize,
    /// Largest `‖κ(UV) − κ(U)κ(V)‖∞`.
    pub max_homomorphism_residual: f64,
    /// Largest `‖κ⁻¹(κ(U)) − U‖∞`.
    pub max_roundtrip_residual: f64,
    /// Largest orthogonality or determinant defect of `κ(U)`.
    pub max_group_residual: f64,
}

impl KappaReport {
    /// True when every residual is below `1e−9`.
    pub fn passed(&self) -> bool {
        self.max_homomorphism_residual < GROUP_TOL
            && self.max_roundtrip_residual < GROUP_TOL
            && self.max_group_residual < GROUP_TOL
    }
}

/// Checks κ(UV) = κ(U)κ(V), injectivity (via the read-back map) and that κ
/// lands in SO(2n+1), on `pairs` Haar-random pairs.
pub fn kappa_homomorphism(n: usize, pairs: usize, seed: u64) -> Result<KappaReport> {
    let mut report = KappaReport {
        n,
        pairs,
        max_homomorphism_residual: 0.0,
        max_roundtrip_residual: 0.0,
        max_group_residual: 0.0,
    };
    for t in 0..pairs {
        let mut rng = trial_rng(seed, t as u64);
        let u = sample_unitary(n, &mut rng);
        let v = sample_unitary(n, &mut rng);
        let (ku, kv) = (kappa(&u)?, kappa(&v)?);
        let kuv = kappa(&(&u * &v))?;
        let lhs = kuv.matrix();
        report.max_homomorphism_residual = report
            .max_homomorphism_residual
            .max(max_abs(&(lhs - ku.matrix() * kv.matrix())));
        report.max_roundtrip_residual = report
            .max_roundtrip_residual
            .max(max_abs_complex(&(unkappa(ku.matrix()) - &u)));
        let det = ku.matrix().determinant();
        report.max_group_residual = report
            .max_group_residual
            .max(ku.orthogonality_residual())
            .max((det - 1.0).abs());
    }
    Ok(report)
}

/// Outcome of [`duality_check`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DualityReport {
    /// Rank.
    pub n: usize,
    /// Form label.
    pub form: String,
    /// Samples drawn.
    pub samples: usize,
    /// The sections associated with the form, as `("+"|"-", i, j)`.
    pub vanishing: Vec<(Sign, u32, u32)>,
    /// Largest `|s|` over the associated sections (should be ≤ `1e−12`).
    pub max_vanishing_value: f64,
    /// Smallest `|s|` over the other sections (should exceed `1e−12`).
    pub min_other_value: f64,
    /// Perturbations tried (one per sample and associated section).
    pub perturbations: usize,
    /// Perturbations that left the section below `1e−12`.
    pub unbroken: usize,
    /// Smallest `|s|` after perturbing.
    pub min_perturbed_value: f64,
}

impl DualityReport {
    /// True when the form zeroes exactly its sections and every perturbation breaks the zero.
    pub fn passed(&self) -> bool {
        self.max_vanishing_value <= STRUCTURE_TOL
            && self.min_other_value > STRUCTURE_TOL
            && self.unbroken == 0
    }
}

fn section(m: &DMatrix<f64>, sign: Sign, i: u32, j: u32) -> Result<f64> {
    let (p, q) = section_values(m, i, j)?;
    Ok(if sign == Sign::Plus {
        p.norm()
    } else {
        q.norm()
    })
}

/// Samples the form `samples` times; checks that its associated sections
/// vanish to `1e−12`, that no other section does, and that adding `1e−3` to
/// the top-left entry of the relevant 2×2 block makes the section nonzero.
pub fn duality_check(
    form: &FormSpec,
    n: usize,
    samples: usize,
    seed: u64,
) -> Result<DualityReport> {
    let vanishing = vanishing_sections(form, n)?;
    let mut others = Vec::new();
    for i in 1..=n as u32 {
        for j in 1..=n as u32 {
            for sign in [Sign::Plus, Sign::Minus] {
                if (sign == Sign::Plus || i != j) && !vanishing.contains(&(sign, i, j)) {
                    others.push((sign, i, j));
                }
            }
        }
    }
    let mut report = DualityReport {
        n,
        form: form.label(),
        samples,
        vanishing: vanishing.clone(),
        max_vanishing_value: 0.0,
        min_other_value: f64::INFINITY,
        perturbations: 0,
        unbroken: 0,
        min_perturbed_value: f64::INFINITY,
    };
    for t in 0..samples {
        let mut rng = trial_rng(seed, t as u64);
        let m: OrthMatrix = sample_form(form, n, &mut rng)?;
        let m = m.matrix();
        for &(sign, i, j) in &vanishing {
            report.max_vanishing_value = report.max_vanishing_value.max(section(m, sign, i, j)?);
            let mut p = m.clone();
            p[(2 * (i as usize - 1), 2 * (j as usize - 1))] += PERTURBATION;
            let v = section(&p, sign, i, j)?;
            report.perturbations += 1;
            report.min_perturbed_value = report.min_perturbed_value.min(v);
            if v <= STRUCTURE_TOL {
                report.unbroken += 1;
            }
        }
        for &(sign, i, j) in &others {
            report.min_other_value = report.min_other_value.min(section(m, sign, i, j)?);
        }
    }
    Ok(report)
}
