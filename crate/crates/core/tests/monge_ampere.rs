mod common;

use common::q;
use mastruct::exterior::Form;
use mastruct::hitchin::{classify, Orbit, Row};
use mastruct::monge_ampere::*;
use mastruct::{Rational, Scalar};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn cs_region() -> Region {
    Region {
        bounds: [[0.1, 2.0]; 3],
        constraints: vec![Constraint {
            quantity: Quantity::SymmetricQuadratic,
            min: 0.25,
        }],
    }
}

#[test]
fn integral_solution_solves_hess_one() {
    let eq = builtin("hess", &q(1)).unwrap();
    let f = ChynowethSewellIntegral { a: 1.0, b: 1.0 };
    let worst = cs_region()
        .sample(100, 1)
        .unwrap()
        .iter()
        .map(|x| residual(&eq, &f, x).abs())
        .fold(0.0, f64::max);
    assert!(worst < 1e-6, "max residual {worst}");
}

#[test]
fn regular_solution_solves_gamma_zero() {
    let eq = builtin("chynoweth-sewell", &q(0)).unwrap();
    let region = Region {
        bounds: [[-2.0, 2.0]; 3],
        constraints: vec![Constraint {
            quantity: Quantity::ParabolicRadius,
            min: 0.1,
        }],
    };
    for x in region.sample(100, 2).unwrap() {
        let r = residual(&eq, &ChynowethSewellRegular, &x);
        assert!(r.abs() < 1e-6, "residual {r} at {x:?}");
    }
}

#[test]
fn generalized_solution_is_lagrangian_and_annihilates_omega() {
    for (b, gamma) in [(1.0, 0.5), (2.0, -1.0), (1.0, 0.0)] {
        let g = Rational::from_ratio((gamma * 2.0) as i64, 2);
        let eq = builtin("chynoweth-sewell", &g).unwrap();
        let l = ChynowethSewellSurface { b, gamma };
        let report = check_generalized(&eq, &l, &cs_region().sample(100, 3).unwrap(), 1e-6);
        assert!(report.passed, "{report:?}");
    }
}

#[test]
fn perturbed_graph_fails_the_lagrangian_check() {
    let eq = builtin("hess", &q(1)).unwrap();
    let f = ChynowethSewellIntegral { a: 1.0, b: 1.0 };
    let samples = cs_region().sample(20, 4).unwrap();
    assert!(check_generalized(&eq, &Graph(&f), &samples, 1e-6).passed);
    let bad = PerturbedGraph { f: &f, eps: 0.1 };
    let report = check_generalized(&eq, &bad, &samples, 1e-6);
    assert!(!report.passed);
    assert!(report.max_symplectic_defect > 1e-3);
}

/// Random symmetric `H` solving `P(H) = 0`: fix all entries but `h₁₁` and
/// solve the resulting equation, which is affine in `h₁₁`.
fn solving_hessian(eq: &MAEquation, rng: &mut ChaCha8Rng) -> Option<M3> {
    let p = eq.pde();
    let mut h = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in i..3 {
            let v = rng.gen_range(-2.0..2.0);
            h[i][j] = v;
            h[j][i] = v;
        }
    }
    let at = |t: f64, h: &M3| {
        let mut k = *h;
        k[0][0] = t;
        p.eval(&k)
    };
    let (p0, p1) = (at(0.0, &h), at(1.0, &h));
    if (p1 - p0).abs() < 1e-3 {
        return None;
    }
    h[0][0] = -p0 / (p1 - p0);
    Some(h)
}

#[test]
fn solving_quadratics_have_zero_residual() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for b in Builtin::ALL {
        let eq = builtin(b.name(), &Rational::from_ratio(3, 2)).unwrap();
        let mut tried = 0;
        while tried < 20 {
            let Some(h) = solving_hessian(&eq, &mut rng) else {
                continue;
            };
            tried += 1;
            let f = Quadratic::new(h);
            for _ in 0..3 {
                let x: P3 = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
                assert!(residual(&eq, &f, &x).abs() < 1e-9);
            }
            // the graph of df is then a generalized solution
            let samples: Vec<P3> = (0..3).map(|k| [k as f64, 0.5, -0.5]).collect();
            assert!(check_generalized(&eq, &Graph(&f), &samples, 1e-9).passed);
        }
    }
}

#[test]
fn symbolic_pde_agrees_with_numeric_pullback() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..50 {
        let w = common::random_effective(&mut rng);
        let p = symbolic_pullback(&w);
        let wf = w.to_float();
        let mut h = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in i..3 {
                let v = rng.gen_range(-2.0..2.0);
                h[i][j] = v;
                h[j][i] = v;
            }
        }
        assert!((p.eval(&h) - residual_of_hessian(&wf, &h)).abs() < 1e-10);
    }
}

#[test]
fn builtin_classifications() {
    let g = Rational::from_ratio(3, 2);
    let orbit = |name: &str| classify(&builtin(name, &g).unwrap().omega, 0.0).unwrap().orbit;
    assert_eq!(orbit("hess"), Orbit::Row(Row::Row1));
    assert_eq!(orbit("special-lagrangian"), Orbit::Row(Row::Row3));
    assert!(matches!(
        orbit("pseudo"),
        Orbit::Row(Row::Row2) | Orbit::SignVariant(Row::Row2)
    ));
    let cs = builtin("chynoweth-sewell", &g).unwrap();
    let pulled = cs.omega.pullback(&chynoweth_sewell_map(&g));
    assert_eq!(
        pulled,
        Form::basis(&[4, 5, 6]) - Form::basis(&[1, 2, 3])
    );
    assert_eq!(classify(&pulled, 0.0).unwrap().orbit, Orbit::Row(Row::Row1));
}

#[test]
fn structure_reports() {
    let sl = geometric_structure(&builtin("special-lagrangian", &q(1)).unwrap()).unwrap();
    assert_eq!(sl.kind, "elliptic");
    assert_eq!(sl.signature_qk, (0, 6, 0));
    let ps = geometric_structure(&builtin("pseudo", &q(1)).unwrap()).unwrap();
    assert_eq!(ps.kind, "elliptic");
    assert!(ps.signature_qk == (4, 2, 0) || ps.signature_qk == (2, 4, 0));
    for r in [&sl, &ps] {
        let [re, im] = r.identities.omega3_over_alpha_alphabar.unwrap();
        assert!(re.abs() < 1e-12 && (im - 6.0).abs() < 1e-12);
        assert!((r.identities.omega_dual_over_theta + 2.0).abs() < 1e-12);
    }
    let h = geometric_structure(&builtin("hess", &q(16)).unwrap()).unwrap();
    assert_eq!(h.kind, "hyperbolic");
    assert_eq!(h.identities.alpha_beta_over_theta, Some(1.0));
    assert_eq!(h.identities.omega_dual_over_theta, -2.0);
}
