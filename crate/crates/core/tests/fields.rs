mod common;

use common::Poly3;
use mastruct::exterior::Form;
use mastruct::fields::*;
use mastruct::hitchin::{representative, Row};
use mastruct::symplectic::random_symplectic;
use mastruct::{LinearMap, Scalar};
use nalgebra::{Matrix3, Matrix6};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `φ(x, y) = Σ_l u_l(x) v_l(y)`; its mixed Hessian is `A = (Du)ᵀ Dv`.
struct Potential {
    u: Vec<Poly3>,
    v: Vec<Poly3>,
    /// Extra non-separable term `κ·(x·y)³`.
    kappa: f64,
}

impl Potential {
    fn random(seed: u64, eps: f64, kappa: f64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Potential {
            u: (0..3).map(|k| Poly3::random_cubic(&mut rng, k, eps)).collect(),
            v: (0..3).map(|k| Poly3::random_cubic(&mut rng, k, eps)).collect(),
            kappa,
        }
    }

    /// `A_ij = ∂²φ/∂x_i∂y_j`.
    fn a(&self, p: &Point) -> Matrix3<f64> {
        let (x, y) = (&p[..3], &p[3..]);
        let s: f64 = (0..3).map(|i| x[i] * y[i]).sum();
        Matrix3::from_fn(|i, j| {
            let sep: f64 = (0..3)
                .map(|l| self.u[l].deriv(i).eval(x) * self.v[l].deriv(j).eval(y))
                .sum();
            // ∂x_i ∂y_j (x·y)³ = 3s²δ_ij + 6s y_i x_j
            let delta = if i == j { 1.0 } else { 0.0 };
            sep + self.kappa * (3.0 * s * s * delta + 6.0 * s * y[i] * x[j])
        })
    }

    /// `∂_k A` for `k < 3`, separable part only.
    fn da_x(&self, p: &Point, k: usize) -> Matrix3<f64> {
        let (x, y) = (&p[..3], &p[3..]);
        Matrix3::from_fn(|i, j| {
            (0..3)
                .map(|l| self.u[l].deriv(i).deriv(k).eval(x) * self.v[l].deriv(j).eval(y))
                .sum()
        })
    }
}

fn sample_points(seed: u64, n: usize, r: f64) -> Vec<Point> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| std::array::from_fn(|_| rng.gen_range(-r..r)))
        .collect()
}

#[test]
fn christoffel_has_block_form_for_potential_metrics() {
    let pot = Potential::random(11, 0.3, 0.0);
    let g = FnMetric::new(|p: &Point| block_metric(&pot.a(p)));
    for x in sample_points(1, 5, 0.4) {
        let gamma = christoffel(&g, &x, DEFAULT_STEP).unwrap();
        let ainv = pot.a(&x).try_inverse().unwrap();
        for a in 0..3 {
            let expected = pot.da_x(&x, a) * ainv;
            for b in 0..3 {
                for d in 0..3 {
                    assert!((gamma[d][a][b] - expected[(b, d)]).abs() < 1e-6);
                    // Γ^{y}_{x x} = 0
                    assert!(gamma[d + 3][a][b].abs() < 1e-6);
                    // mixed blocks vanish
                    assert!(gamma[d][a][b + 3].abs() < 1e-6);
                    assert!(gamma[d + 3][a][b + 3].abs() < 1e-6);
                }
            }
        }
    }
}

#[test]
fn christoffel_symmetric_riemann_antisymmetric_bianchi() {
    let pot = Potential::random(5, 0.3, 0.05);
    let g = FnMetric::new(|p: &Point| block_metric(&pot.a(p)));
    for x in sample_points(2, 3, 0.4) {
        let gamma = christoffel(&g, &x, DEFAULT_STEP).unwrap();
        let r = riemann(&g, &x, CurvatureSteps::default()).unwrap();
        for l in 0..6 {
            for i in 0..6 {
                for j in 0..6 {
                    assert!((gamma[l][i][j] - gamma[l][j][i]).abs() < 1e-9);
                    for k in 0..6 {
                        assert!((r[l][i][j][k] + r[l][j][i][k]).abs() < 1e-9);
                        let cyc = r[l][i][j][k] + r[l][j][k][i] + r[l][k][i][j];
                        assert!(cyc.abs() < 1e-5, "Bianchi defect {cyc}");
                    }
                }
            }
        }
    }
}

#[test]
fn separable_potentials_are_flat_and_nonseparable_are_not() {
    for seed in 0..3 {
        let flat = Potential::random(100 + seed, 0.3, 0.0);
        let bent = Potential::random(100 + seed, 0.3, 0.5);
        let gf = FnMetric::new(|p: &Point| block_metric(&flat.a(p)));
        let gb = FnMetric::new(|p: &Point| block_metric(&bent.a(p)));
        let steps = CurvatureSteps {
            richardson: true,
            ..CurvatureSteps::default()
        };
        for x in sample_points(seed, 4, 0.5) {
            let scale = gf.eval(&x).amax();
            let bound = 1e-4 * scale;
            let rf = riemann_norm(&riemann(&gf, &x, steps).unwrap());
            assert!(rf < bound, "separable curvature {rf} >= {bound}");
            let rb = riemann_norm(&riemann(&gb, &x, steps).unwrap());
            assert!(rb > 10.0 * bound, "non-separable curvature {rb}");
        }
    }
}

#[test]
fn round_sphere_block_is_curved() {
    // stereographic 2-sphere metric on (x1, x2), identity elsewhere
    let g = FnMetric::new(|p: &Point| {
        let c = 4.0 / (1.0 + p[0] * p[0] + p[1] * p[1]).powi(2);
        let mut m = Matrix6::identity();
        m[(0, 0)] = c;
        m[(1, 1)] = c;
        m
    });
    let x = [0.2, -0.1, 0.0, 0.0, 0.0, 0.0];
    let r = riemann(&g, &x, CurvatureSteps::default()).unwrap();
    // Gaussian curvature 1: R^1_{122} = K·g_22
    let c = 4.0 / (1.0 + 0.04 + 0.01_f64).powi(2);
    assert!((r[0][0][1][1] - c).abs() < 1e-4 * c);
    assert!(riemann_norm(&r) > 1.0);
}

/// `A_ij = 2δ_ij + ¼ sin(x_i + y_j)`.
fn trig_a(p: &Point) -> Matrix3<f64> {
    Matrix3::from_fn(|i, j| if i == j { 2.0 } else { 0.0 } + 0.25 * (p[i] + p[j + 3]).sin())
}

fn trig_da(p: &Point, k: usize) -> Matrix3<f64> {
    Matrix3::from_fn(|i, j| {
        if (k < 3 && k == i) || (k >= 3 && k - 3 == j) {
            0.25 * (p[i] + p[j + 3]).cos()
        } else {
            0.0
        }
    })
}

#[test]
fn finite_differences_agree_with_exact_partials_at_second_order() {
    let exact = FnMetric::with_partials(
        |p: &Point| block_metric(&trig_a(p)),
        |p: &Point, k: usize| block_metric(&trig_da(p, k)),
    );
    let fd = FnMetric::new(|p: &Point| block_metric(&trig_a(p)));
    let x = [0.1, 0.2, -0.3, 0.25, -0.15, 0.05];
    let err = |h: f64| {
        let a = christoffel(&exact, &x, h).unwrap();
        let b = christoffel(&fd, &x, h).unwrap();
        a.iter()
            .flatten()
            .flatten()
            .zip(b.iter().flatten().flatten())
            .fold(0.0_f64, |m, (u, v)| m.max((u - v).abs()))
    };
    let (e1, e2) = (err(1e-2), err(5e-3));
    let ratio = e1 / e2;
    assert!((3.5..4.5).contains(&ratio), "ratio {ratio}");
    let constant = e1 / 1e-4;
    println!("measured C = {constant:.4}");
    assert!(constant < 1.0, "C = {constant}");
}

/// `Φ(y) = ψ(My + t)` with `ψ(x, p) = (x, p + ∇S(x))`, a symplectomorphism.
struct Symplectomorphism {
    s: Poly3,
    m: LinearMap<f64>,
    t: Point,
}

impl Symplectomorphism {
    fn jacobian(&self, y: &Point) -> LinearMap<f64> {
        let z = self.m.apply(&mastruct::Vector(*y)).0;
        let z: Point = std::array::from_fn(|i| z[i] + self.t[i]);
        let mut d = LinearMap::identity();
        for i in 0..3 {
            for j in 0..3 {
                d.m[i + 3][j] = self.s.deriv(i).deriv(j).eval(&z[..3]);
            }
        }
        d.compose(&self.m)
    }
}

#[test]
fn pulled_back_constant_structures_are_locally_constant() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    for (row, seed) in [(Row::Row1, 1u64), (Row::Row3, 2), (Row::Row2, 3)] {
        let phi = Symplectomorphism {
            s: Poly3 {
                terms: Poly3::random_cubic(&mut rng, 0, 0.5).terms[1..].to_vec(),
            },
            m: random_symplectic(seed, 3).map(mastruct::scalar::to_float),
            t: std::array::from_fn(|_| rng.gen_range(-0.2..0.2)),
        };
        let w0: Form<f64> = representative(row, &mastruct::Rational::from_i64(1)).to_float();
        let field = FnForm::new(3, |y: &Point| w0.pullback(&phi.jacobian(y)));
        let samples = sample_points(seed, 4, 0.3);
        let report = local_constancy_report(
            &field,
            &samples,
            Tolerances::finite_difference(),
            CurvatureSteps::default(),
        )
        .unwrap();
        assert_eq!(report.verdict, Verdict::LocallyConstant, "{row}: {report:?}");
    }
}

