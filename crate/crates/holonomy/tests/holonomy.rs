//! Structured forms, κ, commutator products and the section duality:
//! worked examples, closed-form oracles and randomized invariants.

use std::f64::consts::PI;

use chern_core::{Block, IndexSet, Sign};
use chern_holonomy::form::{sample_rotation, sample_unitary};
use chern_holonomy::generic::{distance_to_lattice, min_relation_defect};
use chern_holonomy::matrix::{max_abs, max_abs_complex, swap_matrix, GROUP_TOL, STRUCTURE_TOL};
use chern_holonomy::stress::trial_rng;
use chern_holonomy::{
    commutator_product, duality_check, is_generic_torus, kappa, kappa_homomorphism, sample_form,
    section_values, stress_lemma, torus_angles, unkappa, vanishing_sections, FormSpec,
    HolonomyError, OrthMatrix, StressConfig, TorusElement,
};
use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::Rng;

fn blk(v: &[u32], w: &[u32]) -> Block {
    Block::from_sides(v, w).unwrap()
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn stress(n: usize, g: usize, form: FormSpec, trials: usize) -> chern_holonomy::StressReport {
    stress_lemma(&StressConfig {
        n,
        g,
        form,
        trials,
        seed: 7,
        tol: GROUP_TOL,
        jobs: 4,
    })
    .unwrap()
}

#[test]
fn kappa_of_identity_is_identity() {
    let k = kappa(&DMatrix::identity(3, 3)).unwrap();
    assert_eq!(k.matrix(), &DMatrix::<f64>::identity(7, 7));
}

#[test]
fn kappa_of_a_diagonal_unitary_is_a_torus_element() {
    let angles = [0.3, -1.1];
    let u = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        2,
        angles.iter().map(|&t| Complex64::from_polar(1.0, t)),
    ));
    let k = kappa(&u).unwrap();
    let t = TorusElement {
        angles: angles.to_vec(),
    }
    .to_matrix();
    assert!(max_abs(&(k.matrix() - t.matrix())) < STRUCTURE_TOL);
    let back = torus_angles(k.matrix(), STRUCTURE_TOL).unwrap();
    assert!(back.iter().zip(angles).all(|(a, b)| (a - b).abs() < 1e-14));
}

#[test]
fn kappa_example_entries() {
    // κ((0, i; i, 0)) has blocks (0, −1; 1, 0) off the diagonal.
    let u = DMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(0.0, 1.0), c(0.0, 1.0), c(0.0, 0.0)]);
    let k = kappa(&u).unwrap();
    let expect = DMatrix::from_row_slice(
        5,
        5,
        &[
            0., 0., 0., -1., 0., //
            0., 0., 1., 0., 0., //
            0., -1., 0., 0., 0., //
            1., 0., 0., 0., 0., //
            0., 0., 0., 0., 1.,
        ],
    );
    assert_eq!(k.matrix(), &expect);
}

#[test]
fn kappa_rejects_non_unitary_input() {
    let u = DMatrix::from_element(2, 2, c(1.0, 0.0));
    assert!(matches!(kappa(&u), Err(HolonomyError::NotUnitary { .. })));
    let m = DMatrix::<f64>::identity(4, 4);
    assert!(matches!(
        OrthMatrix::new(m),
        Err(HolonomyError::Dimension(_))
    ));
    let mut r = DMatrix::<f64>::identity(3, 3);
    r[(0, 0)] = -1.0;
    assert!(matches!(
        OrthMatrix::new(r),
        Err(HolonomyError::NotSpecialOrthogonal { .. })
    ));
}

#[test]
fn kappa_is_an_injective_homomorphism() {
    for n in 1..=3 {
        let report = kappa_homomorphism(n, 1000, 11).unwrap();
        assert!(report.passed(), "{report:?}");
    }
}

#[test]
fn plus_form_fixes_the_last_axis() {
    let mut rng = trial_rng(1, 0);
    for n in 1..=3 {
        let m = sample_form(&FormSpec::Plusmat, n, &mut rng).unwrap();
        let m = m.matrix();
        let last = 2 * n;
        for k in 0..last {
            assert_eq!(m[(k, last)], 0.0);
            assert_eq!(m[(last, k)], 0.0);
        }
        assert_eq!(m[(last, last)], 1.0);
        for i in 0..n {
            for j in 0..n {
                assert!((m[(2 * i, 2 * j)] - m[(2 * i + 1, 2 * j + 1)]).abs() < STRUCTURE_TOL);
                assert!((m[(2 * i, 2 * j + 1)] + m[(2 * i + 1, 2 * j)]).abs() < STRUCTURE_TOL);
            }
        }
    }
}

#[test]
fn minus_form_has_reflection_blocks_exactly_on_crossing_pairs() {
    let b = blk(&[1, 3], &[2]);
    let mut rng = trial_rng(2, 0);
    for _ in 0..20 {
        let m = sample_form(&FormSpec::Minusmat { block: b }, 3, &mut rng).unwrap();
        let m = m.matrix();
        for i in 0..3 {
            for j in 0..3 {
                let (a, bb, cc, d) = (
                    m[(2 * i, 2 * j)],
                    m[(2 * i, 2 * j + 1)],
                    m[(2 * i + 1, 2 * j)],
                    m[(2 * i + 1, 2 * j + 1)],
                );
                let crossing = b.v().contains(i as u32 + 1) != b.v().contains(j as u32 + 1);
                if crossing {
                    assert!((a + d).abs() < STRUCTURE_TOL && (bb - cc).abs() < STRUCTURE_TOL);
                } else {
                    assert!((a - d).abs() < STRUCTURE_TOL && (bb + cc).abs() < STRUCTURE_TOL);
                }
            }
        }
    }
}

#[test]
fn swapping_a_torus_element_negates_the_flagged_angles() {
    let t = TorusElement {
        angles: vec![0.4, 1.3, -2.0],
    }
    .to_matrix();
    let e = swap_matrix(3, &[1, 3]);
    let s = &e * t.matrix() * &e;
    let got = torus_angles(&s, STRUCTURE_TOL).unwrap();
    let expect = [-0.4, 1.3, 2.0];
    assert!(
        got.iter().zip(expect).all(|(a, b)| (a - b).abs() < 1e-14),
        "{got:?}"
    );
    assert_eq!(&e * &e, DMatrix::<f64>::identity(7, 7));
}

#[test]
fn embedded_form_is_block_diagonal() {
    let x = IndexSet::from_slice(&[2]).unwrap();
    let spec = FormSpec::BlockDiagonalEmbed { x, block: None };
    let m = sample_form(&spec, 3, &mut trial_rng(3, 0)).unwrap();
    let m = m.matrix();
    // Coordinates 2, 3 (0-based) carry the structured part; nothing couples them to the rest.
    for r in [2, 3] {
        for col in [0, 1, 4, 5, 6] {
            assert_eq!(m[(r, col)], 0.0);
            assert_eq!(m[(col, r)], 0.0);
        }
    }
}

#[test]
fn genericity_examples() {
    let opposite = TorusElement {
        angles: vec![0.9, -0.9],
    }
    .to_matrix();
    assert!(!is_generic_torus(opposite.matrix(), GROUP_TOL));
    let half_turn = TorusElement { angles: vec![PI] }.to_matrix();
    // θ = π is generic at rank one (π ∉ 2πℤ) but (π, π) is not.
    assert!(is_generic_torus(half_turn.matrix(), GROUP_TOL));
    assert!(!is_generic_torus(
        TorusElement {
            angles: vec![PI, PI]
        }
        .to_matrix()
        .matrix(),
        GROUP_TOL
    ));
    let mut rng = trial_rng(4, 0);
    let mut accepted = 0;
    while accepted < 100 {
        let angles: Vec<f64> = (0..3).map(|_| rng.random_range(-PI..PI)).collect();
        if min_relation_defect(&angles) < 1e-3 {
            continue;
        }
        accepted += 1;
        assert!(is_generic_torus(
            TorusElement { angles }.to_matrix().matrix(),
            GROUP_TOL
        ));
    }
    // The coordinate swap followed by a flip of the last axis: a reflection block, not a rotation.
    let mut flip = DMatrix::<f64>::identity(3, 3);
    flip[(2, 2)] = -1.0;
    let non_torus = OrthMatrix::new(swap_matrix(1, &[1]) * flip).unwrap();
    assert!(!is_generic_torus(non_torus.matrix(), GROUP_TOL));
    let rot = sample_rotation(5, &mut rng);
    assert!(!is_generic_torus(&rot, GROUP_TOL));
    assert!(distance_to_lattice(2.0 * PI) < 1e-15);
}

#[test]
fn commutator_examples() {
    let mut rng = trial_rng(5, 0);
    let t1 = TorusElement {
        angles: vec![0.2, 0.5],
    }
    .to_matrix();
    let t2 = TorusElement {
        angles: vec![1.2, -0.3],
    }
    .to_matrix();
    let id = DMatrix::<f64>::identity(5, 5);
    assert!(
        max_abs(
            &(commutator_product(std::slice::from_ref(&t1), &[t2])
                .unwrap()
                .matrix()
                - &id)
        ) < GROUP_TOL
    );
    let a = sample_form(&FormSpec::Plusmat, 2, &mut rng).unwrap();
    assert!(
        max_abs(
            &(commutator_product(std::slice::from_ref(&a), std::slice::from_ref(&a))
                .unwrap()
                .matrix()
                - &id)
        ) < GROUP_TOL
    );
    let gens: Vec<OrthMatrix> = (0..4)
        .map(|_| sample_form(&FormSpec::Plusmat, 2, &mut rng).unwrap())
        .collect();
    let p = commutator_product(&gens[..2], &gens[2..]).unwrap();
    // Still κ of something, and that something has determinant one.
    let n = unkappa(p.matrix());
    assert!((n.determinant() - c(1.0, 0.0)).norm() < GROUP_TOL);
    assert!(max_abs(&(kappa(&n).unwrap().matrix() - p.matrix())) < GROUP_TOL);
    assert!(commutator_product(&gens[..1], &gens[1..]).is_err());
}

#[test]
fn section_examples() {
    let id = DMatrix::<f64>::identity(5, 5);
    let (plus, minus) = section_values(&id, 1, 1).unwrap();
    assert_eq!((plus, minus), (c(0.0, 0.0), c(2.0, 0.0)));
    let (plus, minus) = section_values(&id, 1, 2).unwrap();
    assert_eq!((plus, minus), (c(0.0, 0.0), c(0.0, 0.0)));
    // Block (1 2; 3 4) at (1, 2): s+ = −3 + 5i, s− = 5 + i.
    let mut m = DMatrix::<f64>::zeros(5, 5);
    m[(0, 2)] = 1.0;
    m[(0, 3)] = 2.0;
    m[(1, 2)] = 3.0;
    m[(1, 3)] = 4.0;
    assert_eq!(
        section_values(&m, 1, 2).unwrap(),
        (c(-3.0, 5.0), c(5.0, 1.0))
    );
    assert!(section_values(&m, 3, 1).is_err());
}

#[test]
fn vanishing_section_lists() {
    assert_eq!(
        vanishing_sections(&FormSpec::Plusmat, 2).unwrap(),
        vec![
            (Sign::Plus, 1, 1),
            (Sign::Plus, 1, 2),
            (Sign::Plus, 2, 1),
            (Sign::Plus, 2, 2)
        ]
    );
    let pm = vanishing_sections(&FormSpec::So5Pm, 2).unwrap();
    assert_eq!(
        pm,
        vec![
            (Sign::Plus, 1, 1),
            (Sign::Minus, 1, 2),
            (Sign::Minus, 2, 1),
            (Sign::Plus, 2, 2)
        ]
    );
    assert_eq!(
        vanishing_sections(
            &FormSpec::Minusmat {
                block: blk(&[1], &[2])
            },
            2
        )
        .unwrap(),
        pm
    );
    let x = IndexSet::from_slice(&[1]).unwrap();
    let embed = vanishing_sections(&FormSpec::BlockDiagonalEmbed { x, block: None }, 2).unwrap();
    assert_eq!(
        embed,
        vec![
            (Sign::Plus, 1, 1),
            (Sign::Plus, 1, 2),
            (Sign::Minus, 1, 2),
            (Sign::Plus, 2, 1),
            (Sign::Minus, 2, 1)
        ]
    );
}

#[test]
fn malformed_forms_are_rejected() {
    assert!(FormSpec::So5Plus.shape(3).is_err());
    assert!(FormSpec::Minusmat {
        block: blk(&[1], &[2])
    }
    .shape(3)
    .is_err());
    let x = IndexSet::from_slice(&[4]).unwrap();
    assert!(FormSpec::BlockDiagonalEmbed { x, block: None }
        .shape(3)
        .is_err());
    assert!(FormSpec::Plusmat.shape(0).is_err());
}

#[test]
fn form_json_round_trip() {
    for spec in FormSpec::all(3).unwrap() {
        let s = serde_json::to_string(&spec).unwrap();
        assert_eq!(serde_json::from_str::<FormSpec>(&s).unwrap(), spec);
    }
    let v = serde_json::to_value(FormSpec::Plusmat).unwrap();
    assert_eq!(v, serde_json::json!({"kind": "plusmat"}));
}

#[test]
fn stress_rank_two_plus_form() {
    let report = stress(2, 2, FormSpec::Plusmat, 10_000);
    assert!(report.passed(), "{:?}", report.examples);
    assert!(report.max_determinant_residual < GROUP_TOL);
}

#[test]
fn stress_minus_forms_and_rank_one() {
    for spec in FormSpec::grid(3).unwrap() {
        let report = stress(3, 1, spec, 500);
        assert!(report.passed(), "{} {:?}", report.form, report.examples);
    }
    // Rank one: every commutator in the torus U(1) is trivial.
    let report = stress(1, 2, FormSpec::Plusmat, 500);
    assert!(report.passed());
    assert_eq!(report.torus_products, 500);
}

#[test]
fn stress_embedded_forms() {
    for spec in FormSpec::all(3).unwrap() {
        let report = stress(3, 1, spec, 200);
        assert!(report.passed(), "{} {:?}", report.form, report.examples);
    }
}

#[test]
fn stress_is_independent_of_the_job_count() {
    let cfg = StressConfig {
        n: 2,
        g: 1,
        form: FormSpec::So5Pm,
        trials: 300,
        seed: 99,
        tol: GROUP_TOL,
        jobs: 1,
    };
    let one = stress_lemma(&cfg).unwrap();
    let many = stress_lemma(&StressConfig { jobs: 7, ..cfg }).unwrap();
    assert_eq!(one, many);
}

#[test]
fn duality_for_every_form() {
    for n in 1..=3 {
        for spec in FormSpec::all(n).unwrap() {
            let report = duality_check(&spec, n, 200, 3).unwrap();
            assert!(report.passed(), "{report:?}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn sampled_forms_are_special_orthogonal(seed in any::<u64>(), n in 1usize..=4) {
        let mut rng = trial_rng(seed, 0);
        for spec in FormSpec::grid(n).unwrap() {
            let m = sample_form(&spec, n, &mut rng).unwrap();
            prop_assert!(m.orthogonality_residual() < GROUP_TOL);
            prop_assert!((m.matrix().determinant() - 1.0).abs() < GROUP_TOL);
        }
    }

    #[test]
    fn forms_zero_their_sections(seed in any::<u64>(), n in 1usize..=3, pick in any::<prop::sample::Index>()) {
        let forms = FormSpec::all(n).unwrap();
        let spec = &forms[pick.index(forms.len())];
        let m = sample_form(spec, n, &mut trial_rng(seed, 1)).unwrap();
        for (sign, i, j) in vanishing_sections(spec, n).unwrap() {
            let (p, q) = section_values(m.matrix(), i, j).unwrap();
            let v = if sign == Sign::Plus { p } else { q };
            prop_assert!(v.norm() < STRUCTURE_TOL);
        }
    }

    #[test]
    fn kappa_round_trips(seed in any::<u64>(), n in 1usize..=4) {
        let u = sample_unitary(n, &mut trial_rng(seed, 2));
        let k = kappa(&u).unwrap();
        prop_assert!(max_abs_complex(&(unkappa(k.matrix()) - &u)) < STRUCTURE_TOL);
    }

    #[test]
    fn plus_commutators_have_unit_determinant(seed in any::<u64>(), n in 1usize..=3, g in 1usize..=3) {
        let mut rng = trial_rng(seed, 3);
        let gens: Vec<OrthMatrix> = (0..2 * g).map(|_| sample_form(&FormSpec::Plusmat, n, &mut rng).unwrap()).collect();
        let p = commutator_product(&gens[..g], &gens[g..]).unwrap();
        prop_assert!((unkappa(p.matrix()).determinant() - c(1.0, 0.0)).norm() < GROUP_TOL);
    }
}
