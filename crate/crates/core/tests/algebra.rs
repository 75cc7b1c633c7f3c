//! Normal forms and equality in the quotient ring: worked examples, the
//! relation generators, and ring-homomorphism properties on random input.

use chern_core::algebra::{parse_rational, ratio};
use chern_core::{
    equal_in_r, ideal_reduce_generators, normal_form, DiagonalPolynomial, Error, IndexSet,
    Polynomial, PowerProduct, Rational, Sign, VarId,
};
use num_traits::Zero;
use proptest::prelude::*;

fn x(n: u32) -> IndexSet {
    IndexSet::range1(n).unwrap()
}

fn poly(s: &str) -> Polynomial {
    Polynomial::parse(s).unwrap()
}

#[test]
fn plus_symbol_maps_to_mean_of_diagonals() {
    let nf = normal_form(&poly("1*y+12"), x(2)).unwrap();
    assert_eq!(
        nf,
        DiagonalPolynomial::parse("1/2*d1 + 1/2*d2", x(2)).unwrap()
    );
}

#[test]
fn cyclic_minus_relation_vanishes() {
    assert!(normal_form(&poly("1*y-12 + 1*y-23 + 1*y-31"), x(3))
        .unwrap()
        .is_zero());
}

#[test]
fn squared_product_matches_independent_expansion() {
    // (y+11 y+12 y-12)² ↦ (¼ d1 (d1² − d2²))² = 1/16 (d1⁶ − 2 d1⁴ d2² + d1² d2⁴)
    let nf = normal_form(&poly("1*y+11^2*y+12^2*y-12^2"), x(2)).unwrap();
    let expect =
        DiagonalPolynomial::parse("1/16*d1^6 - 1/8*d1^4*d2^2 + 1/16*d1^2*d2^4", x(2)).unwrap();
    assert_eq!(nf, expect);
}

#[test]
fn equality_examples() {
    assert!(equal_in_r(&poly("1*y-12"), &poly("-1*y-21")));
    assert!(equal_in_r(&poly("1*y+12"), &poly("1*y+21")));
    assert!(!equal_in_r(&poly("1*y+11"), &poly("1*y+22")));
}

#[test]
fn symbol_outside_ambient_set_is_malformed() {
    assert!(matches!(
        normal_form(&poly("1*y+13"), x(2)),
        Err(Error::Malformed(_))
    ));
    assert!(matches!(
        VarId::new(Sign::Minus, 2, 2),
        Err(Error::Malformed(_))
    ));
}

#[test]
fn generator_list_examples() {
    let two = ideal_reduce_generators(x(2));
    assert!(two.contains(&poly("1*y+11 - 1*y+12 + 1*y-21")));
    let one = ideal_reduce_generators(x(1));
    assert!(one.iter().all(Polynomial::is_zero));
    let three = ideal_reduce_generators(x(3));
    assert!(three.contains(&poly("1*y-12 + 1*y-23 + 1*y-31")));
}

#[test]
fn generators_vanish_exhaustively_up_to_six_indices() {
    for n in 1..=6 {
        for g in ideal_reduce_generators(x(n)) {
            assert!(normal_form(&g, x(n)).unwrap().is_zero(), "{g} over {n}");
        }
    }
}

#[test]
fn rationals_are_reduced_with_positive_denominator() {
    let r = parse_rational("6/-4").unwrap();
    assert_eq!(r, ratio(-3, 2));
    assert_eq!(*r.denom(), 2.into());
    assert!(parse_rational("1/0").is_err());
}

#[test]
fn large_indices_use_bracketed_text() {
    let v = VarId::plus(10, 2);
    assert_eq!(v.to_string(), "y+[10][2]");
    let p = Polynomial::from(PowerProduct::var(v, 3)).scale(&ratio(3, 4));
    assert_eq!(Polynomial::parse(&p.to_string()).unwrap(), p);
}

#[test]
fn json_schema_uses_terms_with_coefficient_strings() {
    let p = poly("3/4*y+12^3");
    let v = serde_json::to_value(&p).unwrap();
    assert_eq!(v["terms"][0]["coeff"], "3/4");
    assert_eq!(v["terms"][0]["vars"][0]["sign"], "+");
    assert_eq!(v["terms"][0]["vars"][0]["i"], 1);
    assert_eq!(v["terms"][0]["vars"][0]["j"], 2);
    assert_eq!(v["terms"][0]["vars"][0]["exp"], 3);
    let back: Polynomial = serde_json::from_value(v).unwrap();
    assert_eq!(back, p);
}

const N: u32 = 4;

fn var() -> impl Strategy<Value = VarId> {
    (any::<bool>(), 1..=N, 1..=N).prop_filter_map("y-ii does not exist", |(plus, i, j)| {
        VarId::new(if plus { Sign::Plus } else { Sign::Minus }, i, j).ok()
    })
}

fn power_product(max_len: usize) -> impl Strategy<Value = PowerProduct> {
    prop::collection::vec((var(), 1u32..=3), 0..=max_len).prop_map(PowerProduct::from_factors)
}

fn polynomial() -> impl Strategy<Value = Polynomial> {
    prop::collection::vec((-5i64..=5, 1i64..=3, power_product(3)), 0..=4).prop_map(|terms| {
        let mut p = Polynomial::zero();
        for (a, b, pp) in terms {
            p.add_term(ratio(a, b), pp);
        }
        p
    })
}

fn homogeneous(degree: usize) -> impl Strategy<Value = Polynomial> {
    prop::collection::vec((-5i64..=5, prop::collection::vec(var(), degree)), 1..=4).prop_map(
        |terms| {
            let mut p = Polynomial::zero();
            for (a, vars) in terms {
                p.add_term(
                    Rational::from_integer(a.into()),
                    PowerProduct::from_factors(vars.into_iter().map(|v| (v, 1))),
                );
            }
            p
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn normal_form_is_additive(p in polynomial(), q in polynomial()) {
        let nf = |p: &Polynomial| normal_form(p, x(N)).unwrap();
        prop_assert_eq!(nf(&p.add(&q)), nf(&p).add(&nf(&q)));
    }

    #[test]
    fn normal_form_is_multiplicative(p in polynomial(), q in polynomial()) {
        let nf = |p: &Polynomial| normal_form(p, x(N)).unwrap();
        prop_assert_eq!(nf(&p.mul(&q)), nf(&p).mul(&nf(&q)));
    }

    #[test]
    fn normal_form_is_a_retraction(p in polynomial()) {
        let nf = normal_form(&p, x(N)).unwrap();
        prop_assert_eq!(normal_form(&nf.to_polynomial(), x(N)).unwrap(), nf);
    }

    #[test]
    fn normal_form_preserves_degree(d in 0usize..=5, seed in homogeneous(3)) {
        let p = seed.pow(d as u32 / 3 + 1);
        let nf = normal_form(&p, x(N)).unwrap();
        prop_assert!(nf.is_zero() || (nf.is_homogeneous() && nf.degree() == p.degree()));
    }

    #[test]
    fn canonical_form_keeps_the_class(p in polynomial()) {
        let c = p.canonical();
        prop_assert!(c.terms().all(|(pp, _)| pp.factors().iter().all(|(v, _)| v.i <= v.j)));
        prop_assert!(equal_in_r(&c, &p));
    }

    #[test]
    fn ideal_multiples_vanish(p in polynomial(), k in 0usize..40) {
        let gens = ideal_reduce_generators(x(N));
        let g = &gens[k % gens.len()];
        prop_assert!(normal_form(&p.mul(g), x(N)).unwrap().is_zero());
    }

    #[test]
    fn text_round_trip(p in polynomial()) {
        prop_assert_eq!(Polynomial::parse(&p.to_string()).unwrap(), p.clone());
        let json = serde_json::to_string(&p).unwrap();
        prop_assert_eq!(serde_json::from_str::<Polynomial>(&json).unwrap(), p);
    }

    #[test]
    fn rational_arithmetic_is_exact(a in -1000i64..1000, b in 1i64..1000, c in -1000i64..1000, d in 1i64..1000) {
        let (r, s) = (ratio(a, b), ratio(c, d));
        prop_assert_eq!((&r + &s) - &s, r.clone());
        if !s.is_zero() {
            prop_assert_eq!((&r * &s) / &s, r);
        }
    }
}
