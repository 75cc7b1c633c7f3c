//! The independent linear-algebra oracle: membership certificates, theorem
//! checks across degrees, decomposition re-verification and the
//! degree-counting scan.

use chern_core::algebra::{rat, DiagonalPolynomial};
use chern_core::decomposer::{decompose_full, Decomposition, Engine};
use chern_core::good::so5_basis;
use chern_core::oracle::{
    check_decomposition, check_pigeonhole_lemmas, good_normal_forms, goods_for, span_membership,
    verify_decomposition, verify_theorem, GoodSource, Membership, MonomialStatus, SpanSolver,
};
use chern_core::{
    enumerate_good, normal_form, EnumerationCaps, Error, GoodMonomial, IndexSet, Monomial,
    Polynomial, PowerProduct, VarId,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn x(n: u32) -> IndexSet {
    IndexSet::range1(n).unwrap()
}

fn named(g: u32) -> Vec<GoodMonomial> {
    so5_basis(g, false)
        .unwrap()
        .into_iter()
        .map(|b| b.good)
        .collect()
}

fn caps(depth: usize, blocks: usize) -> GoodSource {
    GoodSource::Enumerate(EnumerationCaps { depth, blocks })
}

#[test]
fn rank_one_cofactor_is_the_extra_diagonal() {
    let goods = enumerate_good(
        1,
        1,
        EnumerationCaps {
            blocks: 1,
            depth: 0,
        },
    )
    .unwrap();
    let target = DiagonalPolynomial::parse("1*d1^3", x(1)).unwrap();
    let Membership::Certified(cert) = span_membership(&target, &goods, 3).unwrap() else {
        panic!("d1^3 is a multiple of d1^2");
    };
    assert_eq!(cert.combination.len(), 1);
    assert_eq!(
        cert.combination[0].cofactor,
        DiagonalPolynomial::parse("1*d1", x(1)).unwrap()
    );
    assert!(cert.residual.is_zero());
    assert!(cert.is_valid(&good_normal_forms(&goods, x(1)).unwrap()));
}

#[test]
fn rank_two_power_is_certified_by_the_named_family() {
    let target = normal_form(&Polynomial::parse("1*y+11^8").unwrap(), x(2)).unwrap();
    let goods = named(1);
    let membership = span_membership(&target, &goods, 8).unwrap();
    let cert = membership
        .certificate()
        .expect("degree 8 lies above the bound");
    let nfs = good_normal_forms(&goods, x(2)).unwrap();
    assert_eq!(cert.recombine(&nfs).unwrap(), target);
    assert!(cert.size() > 0);
}

#[test]
fn below_the_bound_is_reported_honestly() {
    let goods = named(1);
    let solver = SpanSolver::new(x(2), 7, good_normal_forms(&goods, x(2)).unwrap()).unwrap();
    // Degree 7 in two variables has 8 monomials; the span is a proper subspace.
    assert_eq!(solver.dimension(), 8);
    assert!(solver.rank() < solver.dimension());
    let mut outside = 0;
    for a in 0..=7u32 {
        let t = DiagonalPolynomial::monomial(x(2), rat(1), vec![a, 7 - a]).unwrap();
        match solver.solve(&t).unwrap() {
            Membership::Certified(c) => assert!(c.is_valid(solver.goods())),
            Membership::NotInSpan { residual } => {
                assert!(!residual.is_zero());
                outside += 1;
            }
        }
    }
    assert!(outside > 0);
    assert!(matches!(
        verify_theorem(2, 1, 7, GoodSource::So5Basis),
        Err(Error::Precondition(_))
    ));
}

#[test]
fn theorem_checks_at_the_bound() {
    let r = verify_theorem(1, 1, 2, caps(0, 1)).unwrap();
    assert!(r.passed());
    assert_eq!(r.monomials.len(), 1);
    let r = verify_theorem(2, 1, 8, GoodSource::So5Basis).unwrap();
    assert!(r.passed());
    assert_eq!(r.monomials.len(), 9);
    assert_eq!(r.rank, r.dimension);
    let r = verify_theorem(2, 2, 16, caps(1, 1)).unwrap();
    assert!(r.passed(), "{}/{}", r.certified(), r.monomials.len());
    assert!(matches!(
        verify_theorem(3, 1, 19, GoodSource::So5Basis),
        Err(Error::Precondition(_))
    ));
}

#[test]
fn rank_three_at_the_bound() {
    let r = verify_theorem(3, 1, 19, caps(3, 2)).unwrap();
    assert_eq!(r.monomials.len(), 210);
    assert!(r
        .monomials
        .iter()
        .all(|m| m.status == MonomialStatus::Certified));
    assert!(r.rank_check.agrees(), "{:?}", r.rank_check);
    assert!(r.passed());
}

#[test]
fn passing_degrees_stay_passing_one_degree_up() {
    for g in 1..=2u32 {
        for (n, source) in [(1u32, caps(0, 1)), (2, GoodSource::So5Basis)] {
            let start = 2 * g * n * n + (n - 1) * (n.saturating_sub(2)) / 2;
            for d in start..=8 * g + 2 {
                let r = verify_theorem(n, g, d, source).unwrap();
                assert!(r.passed(), "n = {n}, g = {g}, d = {d}");
                assert!(r.rank_check.agrees());
            }
        }
    }
}

#[test]
fn ranks_agree_across_elimination_orders() {
    for (n, g, d, source) in [
        (2u32, 1u32, 9u32, GoodSource::So5Basis),
        (2, 1, 8, caps(2, 2)),
        (3, 1, 19, caps(1, 1)),
    ] {
        let goods = goods_for(n, g, source).unwrap();
        let solver = SpanSolver::new(x(n), d, good_normal_forms(&goods, x(n)).unwrap()).unwrap();
        let check = solver.rank_check();
        assert!(check.agrees(), "{check:?}");
        assert_eq!(check.echelon, solver.rank());
    }
}

#[test]
fn decompositions_from_the_engine_are_accepted() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let vars: Vec<VarId> = [(1, 1), (1, 2), (2, 2), (1, 3), (2, 3), (3, 3)]
        .into_iter()
        .flat_map(|(i, j)| {
            if i < j {
                vec![VarId::plus(i, j), VarId::minus(i, j)]
            } else {
                vec![VarId::plus(i, j)]
            }
        })
        .collect();
    let mut engine = Engine::new(1);
    for _ in 0..5 {
        let pp =
            PowerProduct::from_factors((0..19).map(|_| (vars[rng.random_range(0..vars.len())], 1)));
        let d = engine.decompose(&Monomial::unit(pp), 3).unwrap();
        let check = check_decomposition(&d).unwrap();
        assert!(check.passed(), "{check:?}");
    }
}

#[test]
fn a_perturbed_coefficient_is_rejected() {
    let d = decompose_full(&Monomial::parse("y+11^5*y-12^3").unwrap(), 2, 1).unwrap();
    assert!(verify_decomposition(&d));
    let mut bad = d.clone();
    let theta = &mut bad.terms[0].theta;
    let (pp, c) = theta
        .terms()
        .next()
        .map(|(p, c)| (p.clone(), c.clone()))
        .unwrap();
    theta.add_term(rat(1), pp.clone());
    assert_ne!(bad.terms[0].theta.coefficient(&pp), c);
    assert!(!verify_decomposition(&bad));
    assert!(!check_decomposition(&bad).unwrap().normal_forms_agree);
    // A good monomial that no longer matches its collection is rejected too.
    let mut bad = d.clone();
    bad.terms[0].good.monomial = bad.terms[0]
        .good
        .monomial
        .mul(&Polynomial::parse("1*y+11").unwrap());
    assert!(
        !check_decomposition(&bad)
            .unwrap()
            .monomials_match_provenance
    );
    assert!(!verify_decomposition(&bad));
}

#[test]
fn the_empty_decomposition_of_zero_is_accepted() {
    let d = Decomposition {
        input: Monomial::new(rat(0), PowerProduct::one()),
        n: 2,
        g: 1,
        terms: Vec::new(),
        residual_form: None,
        trace: Default::default(),
    };
    assert!(verify_decomposition(&d));
}

#[test]
fn degree_counting_lemmas_hold_exhaustively() {
    let report = check_pigeonhole_lemmas(8, 3);
    assert!(
        report.passed(),
        "{:?}",
        report
            .lemmas
            .iter()
            .flat_map(|l| l.failures.iter().take(3))
            .collect::<Vec<_>>()
    );
    assert_eq!(report.lemmas.len(), 5);
    assert!(report.lemmas.iter().all(|l| l.instances > 0));
    assert!(report.lemmas.iter().any(|l| l.vacuous > 0));
}
