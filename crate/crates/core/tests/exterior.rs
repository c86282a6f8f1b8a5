mod common;

use common::{form_strategy, vector_strategy};
use mastruct::exterior::{monomials, space_dim, Form};
use mastruct::json::{exact_form_to_value, form_from_value, float_form_to_value, AnyForm};
use mastruct::{LinearMap, Rational, Scalar, Vector};
use proptest::prelude::*;

fn sign(a: usize, b: usize) -> Rational {
    Rational::from_i64(if (a * b) % 2 == 1 { -1 } else { 1 })
}

fn map_strategy() -> impl Strategy<Value = LinearMap<Rational>> {
    prop::collection::vec(-3i64..=3, 36).prop_map(|c| {
        LinearMap::from_rows(
            c.chunks(6)
                .map(|r| r.iter().map(|&x| Rational::from_i64(x)).collect())
                .collect(),
        )
    })
}

#[test]
fn monomial_counts_are_binomial() {
    let total: usize = (0..=6).map(|k| monomials(k).len()).sum();
    assert_eq!(total, 64);
    for k in 0..=6 {
        assert_eq!(monomials(k).len(), space_dim(k));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn wedge_is_associative(a in form_strategy(1), b in form_strategy(2), c in form_strategy(2)) {
        let l = a.wedge(&b).unwrap().wedge(&c).unwrap();
        let r = a.wedge(&b.wedge(&c).unwrap()).unwrap();
        prop_assert_eq!(l, r);
    }

    #[test]
    fn wedge_is_graded_commutative(a in form_strategy(1), b in form_strategy(3), c in form_strategy(2)) {
        prop_assert_eq!(a.wedge(&b).unwrap(), b.wedge(&a).unwrap().scale(&sign(1, 3)));
        prop_assert_eq!(b.wedge(&c).unwrap(), c.wedge(&b).unwrap().scale(&sign(3, 2)));
        prop_assert!(a.wedge(&a).unwrap().is_zero());
    }

    #[test]
    fn interior_is_an_antiderivation(a in form_strategy(2), b in form_strategy(3), x in vector_strategy()) {
        let lhs = a.wedge(&b).unwrap().interior(&x).unwrap();
        let rhs = a.interior(&x).unwrap().wedge(&b).unwrap()
            + a.wedge(&b.interior(&x).unwrap()).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn interior_squares_to_zero(a in form_strategy(3), x in vector_strategy()) {
        prop_assert!(a.interior(&x).unwrap().interior(&x).unwrap().is_zero());
    }

    #[test]
    fn pullback_respects_wedge_and_composition(
        a in form_strategy(2), b in form_strategy(2), m in map_strategy(), n in map_strategy()
    ) {
        let wedge = a.wedge(&b).unwrap();
        prop_assert_eq!(wedge.pullback(&m), a.pullback(&m).wedge(&b.pullback(&m)).unwrap());
        prop_assert_eq!(a.pullback(&m.compose(&n)), a.pullback(&m).pullback(&n));
    }

    #[test]
    fn pullback_of_top_forms_scales_by_det(c in -5i64..=5, m in map_strategy()) {
        let vol = Form::basis(&[1, 2, 3, 4, 5, 6]).scale(&Rational::from_i64(c));
        prop_assert_eq!(vol.pullback(&m), vol.scale(&m.det()));
    }

    #[test]
    fn evaluation_is_alternating_and_matches_contraction(
        a in form_strategy(3), x in vector_strategy(), y in vector_strategy(), z in vector_strategy()
    ) {
        let v = a.evaluate(&[x.clone(), y.clone(), z.clone()]).unwrap();
        prop_assert_eq!(a.evaluate(&[y.clone(), x.clone(), z.clone()]).unwrap(), -v.clone());
        prop_assert_eq!(a.evaluate(&[x.clone(), x.clone(), z.clone()]).unwrap(), Rational::from_i64(0));
        let c = a.interior(&x).unwrap().interior(&y).unwrap().interior(&z).unwrap();
        prop_assert_eq!(c.coeff(&[]), v);
    }

    #[test]
    fn pullback_evaluates_on_images(a in form_strategy(2), m in map_strategy(), x in vector_strategy(), y in vector_strategy()) {
        let lhs = a.pullback(&m).evaluate(&[x.clone(), y.clone()]).unwrap();
        let rhs = a.evaluate(&[m.apply(&x), m.apply(&y)]).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn exact_json_round_trips(k in 0usize..=6, seed in any::<u64>()) {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let a = common::random_form(&mut rng, k);
        match form_from_value(&exact_form_to_value(&a)).unwrap() {
            AnyForm::Exact(b) => prop_assert_eq!(b, a),
            AnyForm::Float(_) => prop_assert!(false, "mode changed"),
        }
    }

    #[test]
    fn float_json_round_trips(a in form_strategy(3), scale in -1e3f64..1e3) {
        let f = a.to_float().map(|c| c * scale / 7.0);
        match form_from_value(&float_form_to_value(&f)).unwrap() {
            AnyForm::Float(g) => prop_assert_eq!(g, f),
            AnyForm::Exact(_) => prop_assert!(false, "mode changed"),
        }
    }
}

#[test]
fn contraction_with_basis_vectors_reads_coefficients() {
    let a = Form::<Rational>::basis(&[2, 4, 5]);
    let x = Vector::basis(4);
    assert_eq!(a.interior(&x).unwrap(), -Form::basis(&[2, 5]));
}
