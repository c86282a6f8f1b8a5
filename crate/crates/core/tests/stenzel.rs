use mastruct::exterior::Vector;
use mastruct::fields::{exterior_derivative, FnForm, Point, Verdict};
use mastruct::stenzel::*;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::time::Instant;

fn ode() -> StenzelOde {
    solve_ode(1.0, 3.0, 1e-3).unwrap()
}

#[test]
fn ode_residual_and_positivity() {
    let ode = ode();
    assert!(ode.residual() < 1e-8, "residual {}", ode.residual());
    assert!(ode.min_g() > 0.0);
    assert_eq!(ode.nodes().last().map(|x| x >= 3.0 - 1e-12), Some(true));
    // g is decreasing: g′(1) = −g(1)/5 and the data stay monotone on [1, 3]
    assert!(ode.g.windows(2).all(|w| w[1] < w[0]));
}

#[test]
fn chart_points_lie_on_the_quadric() {
    for p in sample_chart(50, 1, 0.5) {
        let s: Complex64 = p.full().iter().map(|z| z * z).sum();
        assert!((s - 1.0).norm() < 1e-12);
        let (u, v) = xi(&p);
        let un: f64 = u.iter().map(|a| a * a).sum();
        let uv: f64 = u.iter().zip(&v).map(|(a, b)| a * b).sum();
        assert!((un - 1.0).abs() < 1e-12 && uv.abs() < 1e-12);
        let back = xi_inverse(&u, &v).unwrap();
        for k in 0..3 {
            assert!((back.z[k] - p.z[k]).norm() < 1e-12);
        }
    }
}

#[test]
fn kahler_form_is_real_closed_and_nondegenerate() {
    let ode = ode();
    let field = FnForm::new(2, |c: &Point| kahler_form(&ChartPoint::from_coords(c), &ode).unwrap());
    for p in sample_chart(20, 2, 0.4) {
        let omega = kahler_form_complex(&p, &ode, KAHLER_STEP).unwrap();
        assert!(omega.im().max_abs() < 1e-9);
        let d = exterior_derivative(&field, &p.coords(), 1e-3).unwrap().max_abs();
        assert!(d < 1e-5, "dΩ = {d}");
        let re = omega.re();
        let cube = re.wedge(&re).unwrap().wedge(&re).unwrap().top_coeff();
        assert!(cube.abs() > 1e-3);
    }
}

#[test]
fn kahler_form_converges_at_second_order() {
    let ode = ode();
    let p = sample_chart(1, 9, 0.4)[0];
    let at = |h: f64| kahler_form_complex(&p, &ode, h).unwrap().re();
    let (a, b, c) = (at(2e-2), at(1e-2), at(5e-3));
    let ratio = (&a - &b).max_abs() / (&b - &c).max_abs();
    assert!((3.5..4.5).contains(&ratio), "ratio {ratio}");
}

#[test]
fn chart_volume_agrees_with_determinant() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for p in sample_chart(20, 3, 0.5) {
        let alpha = holomorphic_volume(&p).unwrap();
        let dirs: Vec<[Complex64; 3]> = (0..3)
            .map(|_| std::array::from_fn(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))))
            .collect();
        // real chart vector with dz_k = dx_k + i dy_k
        let real: Vec<Vector<Complex64>> = dirs
            .iter()
            .map(|d| Vector(std::array::from_fn(|i| Complex64::from(if i < 3 { d[i].re } else { d[i - 3].im }))))
            .collect();
        let chart = alpha.evaluate(&real).unwrap();
        let tangents = [tangent_vector(&p, dirs[0]), tangent_vector(&p, dirs[1]), tangent_vector(&p, dirs[2])];
        let det = volume_determinant(&p, &tangents);
        assert!((chart - det).norm() < 1e-9, "{chart} vs {det}");
        let vol = alpha.wedge(&alpha.conj()).unwrap().top_coeff();
        assert!(vol.norm() > 1e-6);
    }
}

#[test]
fn calabi_yau_ratio_is_constant_only_for_stenzel() {
    let samples = sample_chart(50, 5, 0.4);
    let ratios = |pot: &dyn RadialPotential| -> SpreadStats {
        let r: Vec<f64> = samples.iter().map(|p| cy_ratio(p, pot).unwrap()).collect();
        spread_stats(&r)
    };
    let one = ratios(&ode());
    assert!(one.spread < 5e-3, "{one:?}");
    let two = ratios(&solve_ode(2.0, 3.0, 1e-3).unwrap());
    assert!(two.spread < 5e-3, "{two:?}");
    // Ω³ is cubic in f, and f scales like c^{1/3} near the zero section
    assert!((two.median / one.median - 2.0).abs() < 1e-2, "{one:?} {two:?}");
    let wrong = ratios(&LinearPotential);
    assert!(wrong.spread > 1e-2, "{wrong:?}");
}

#[test]
fn darboux_coordinates_are_symplectic() {
    let ode = ode();
    let mut worst = 0.0_f64;
    for p in sample_chart(20, 6, 0.4) {
        let omega = kahler_form(&p, &ode).unwrap();
        let pulled = darboux_symplectic_form(&p.coords(), &ode);
        worst = worst.max((&pulled - &omega).max_abs());
        let (_, v) = xi(&p);
        let v2: f64 = v.iter().map(|a| a * a).sum();
        assert!((p.tau() - 1.0 - 2.0 * v2).abs() < 1e-12);
        assert!((p.tau() - 2.0 - 2.0 * v2).abs() > 0.5);
    }
    assert!(worst < 1e-4, "max |Σdw∧du − Ω| = {worst}");
}

#[test]
fn stenzel_structure_is_closed_but_not_flat() {
    let start = Instant::now();
    let ode = ode();
    let samples = sample_chart(50, 7, 0.4);
    let report = stenzel_report(&samples, &ode).unwrap();
    assert!(report.ode_residual < 1e-8);
    assert!(report.cy_ratio.spread < 5e-3);
    assert!(report.max_lambda < 0.0);
    assert!(report.curvature.max_closedness_defect < 1e-3);
    assert!(report.curvature.max_dual_closedness_defect < 1e-3);
    assert!(report.non_flat);
    assert_eq!(report.curvature.verdict, Verdict::NotLocallyConstant);
    assert!(start.elapsed().as_secs_f64() < 60.0);
}
