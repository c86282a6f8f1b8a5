//! The Stenzel Calabi-Yau structure on `T*S³`, seen as the complex quadric
//! `Q³ = {z ∈ C⁴ : Σ z_k² = 1}`.
//!
//! The Kähler potential is `φ = f(τ)` with `τ = Σ_{k=1}^{4} |z_k|²` and
//! `g = f′` solving `x g³ + g′ g² (x² − 1) = c`. Chart coordinates are
//! `(x₁, x₂, x₃, y₁, y₂, y₃)` with `z_k = x_k + i y_k` and `z₄` the principal
//! square root of `1 − z₁² − z₂² − z₃²`.

use crate::error::{Error, Result};
use crate::exterior::{Form, LinearMap};
use crate::fields::{
    local_constancy_report, normalized_at, riemann, riemann_norm, CurvatureReport, CurvatureSteps,
    FormField, Point, Tolerances, Twisted,
};
use crate::hitchin::{representative, Row};
use crate::scalar::Rational;
use crate::Scalar;
use nalgebra::Matrix6;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

/// Default `|z₄|` margin of the chart.
pub const CHART_MARGIN: f64 = 0.1;
/// Step of the finite-difference Hessian of `φ`.
pub const KAHLER_STEP: f64 = 1e-3;
/// `τ(ξ⁻¹(u, v)) = TAU_OFFSET + 2‖v‖²`.
pub const TAU_OFFSET: f64 = 1.0;
/// The offset printed in the `w_k` formula of the source.
pub const PUBLISHED_TAU_OFFSET: f64 = 2.0;

const SERIES_ORDER: usize = 14;
/// Below `x − 1 = SERIES_RADIUS` the series is used instead of the grid.
const SERIES_RADIUS: f64 = 0.05;
const JACOBIAN_STEP: f64 = 1e-3;

/// `g = f′` on `[1, τmax]` together with `f` (normalized by `f(1) = 0`).
#[derive(Clone, Debug)]
pub struct StenzelOde {
    pub c: f64,
    pub tau_max: f64,
    pub step: f64,
    pub f: Vec<f64>,
    pub g: Vec<f64>,
    /// `g′ = f″` from the right-hand side of the ODE.
    pub dg: Vec<f64>,
    ddg: Vec<f64>,
    /// Coefficients of `g(1 + ε) = Σ a_k ε^k`.
    series: Vec<f64>,
}

/// Power series of `g` at `x = 1`.
///
/// With `x = 1 + ε` the relation is `(1+ε) g³ + g′ g² (2ε + ε²) = c`; the
/// coefficient of `ε^k` is `(3 + 2k) a₀² a_k + R_k` with `R_k` free of `a_k`.
fn series_coefficients(c: f64, order: usize) -> Vec<f64> {
    let mut a = vec![0.0; order + 1];
    a[0] = c.cbrt();
    for k in 1..=order {
        a[k] = 0.0;
        let rk = relation_coefficient(&a, k);
        a[k] = -rk / ((3.0 + 2.0 * k as f64) * a[0] * a[0]);
    }
    a
}

fn mul_trunc(p: &[f64], q: &[f64], n: usize) -> Vec<f64> {
    let mut r = vec![0.0; n + 1];
    for (i, pi) in p.iter().enumerate().take(n + 1) {
        for (j, qj) in q.iter().enumerate().take(n + 1 - i) {
            r[i + j] += pi * qj;
        }
    }
    r
}

fn relation_coefficient(a: &[f64], k: usize) -> f64 {
    let g2 = mul_trunc(a, a, k);
    let g3 = mul_trunc(&g2, a, k);
    let da: Vec<f64> = (0..=k)
        .map(|j| a.get(j + 1).map_or(0.0, |x| (j + 1) as f64 * x))
        .collect();
    let p = mul_trunc(&da, &g2, k);
    let at = |v: &[f64], i: isize| if i < 0 { 0.0 } else { v[i as usize] };
    let k = k as isize;
    at(&g3, k) + at(&g3, k - 1) + 2.0 * at(&p, k - 1) + at(&p, k - 2)
}

fn rhs(c: f64, x: f64, g: f64) -> f64 {
    (c - x * g * g * g) / (g * g * (x * x - 1.0))
}

fn rhs_derivative(x: f64, g: f64, dg: f64) -> f64 {
    let g2 = g * g;
    (-g2 * g - 3.0 * x * g2 * dg - dg * (2.0 * g * dg * (x * x - 1.0) + 2.0 * x * g2))
        / (g2 * (x * x - 1.0))
}

/// Quintic Hermite basis on `[0, 1]`.
fn quintic(t: f64, p: [f64; 2], m: [f64; 2], a: [f64; 2], h: f64) -> f64 {
    let (t2, t3) = (t * t, t * t * t);
    let (t4, t5) = (t3 * t, t3 * t2);
    let h0 = 1.0 - 10.0 * t3 + 15.0 * t4 - 6.0 * t5;
    let h1 = t - 6.0 * t3 + 8.0 * t4 - 3.0 * t5;
    let h2 = 0.5 * t2 - 1.5 * t3 + 1.5 * t4 - 0.5 * t5;
    let h3 = 0.5 * t3 - t4 + 0.5 * t5;
    let h4 = -4.0 * t3 + 7.0 * t4 - 3.0 * t5;
    let h5 = 10.0 * t3 - 15.0 * t4 + 6.0 * t5;
    h0 * p[0] + h1 * h * m[0] + h2 * h * h * a[0] + h3 * h * h * a[1] + h4 * h * m[1] + h5 * p[1]
}

/// Solves the Stenzel ODE on `[1, τmax]` with grid spacing `step`.
///
/// Nodes within `SERIES_RADIUS` of `x = 1` come from the power series at
/// the singular point; the rest from classical RK4 on `(f, g)`.
pub fn solve_ode(c: f64, tau_max: f64, step: f64) -> Result<StenzelOde> {
    if !(c > 0.0) || !(tau_max > 1.0) || !(step > 0.0) || step > tau_max - 1.0 {
        return Err(Error::Precondition(format!(
            "need c > 0, τmax > 1 and 0 < step ≤ τmax − 1 (c = {c}, τmax = {tau_max}, step = {step})"
        )));
    }
    let series = series_coefficients(c, SERIES_ORDER);
    let n = ((tau_max - 1.0) / step).ceil() as usize;
    let mut ode = StenzelOde {
        c,
        tau_max,
        step,
        f: Vec::with_capacity(n + 1),
        g: Vec::with_capacity(n + 1),
        dg: Vec::with_capacity(n + 1),
        ddg: Vec::with_capacity(n + 1),
        series,
    };
    let mut i = 0;
    while i <= n && i as f64 * step <= SERIES_RADIUS {
        let [f, g, dg, ddg] = ode.series_at(i as f64 * step);
        ode.f.push(f);
        ode.g.push(g);
        ode.dg.push(dg);
        ode.ddg.push(ddg);
        i += 1;
    }
    let field = |x: f64, s: [f64; 2]| -> Result<[f64; 2]> {
        if !(s[1] > 0.0) {
            return Err(Error::Ode {
                x,
                reason: format!("g = {} is no longer positive", s[1]),
            });
        }
        Ok([s[1], rhs(c, x, s[1])])
    };
    while i <= n {
        let x = 1.0 + (i - 1) as f64 * step;
        let s = [ode.f[i - 1], ode.g[i - 1]];
        let k1 = field(x, s)?;
        let k2 = field(x + step / 2.0, [s[0] + step / 2.0 * k1[0], s[1] + step / 2.0 * k1[1]])?;
        let k3 = field(x + step / 2.0, [s[0] + step / 2.0 * k2[0], s[1] + step / 2.0 * k2[1]])?;
        let k4 = field(x + step, [s[0] + step * k3[0], s[1] + step * k3[1]])?;
        let next: [f64; 2] = std::array::from_fn(|j| {
            s[j] + step / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j])
        });
        let xn = x + step;
        let [_, dg] = field(xn, next)?;
        if !dg.is_finite() {
            return Err(Error::Ode {
                x: xn,
                reason: "non-finite derivative".into(),
            });
        }
        ode.f.push(next[0]);
        ode.g.push(next[1]);
        ode.dg.push(dg);
        ode.ddg.push(rhs_derivative(xn, next[1], dg));
        i += 1;
    }
    Ok(ode)
}

impl StenzelOde {
    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.g.len()).map(|i| 1.0 + i as f64 * self.step)
    }

    /// `[f, g, g′, g″]` at `x = 1 + eps` from the series.
    fn series_at(&self, eps: f64) -> [f64; 4] {
        let a = &self.series;
        let mut out = [0.0; 4];
        let mut pow = 1.0;
        for (k, ak) in a.iter().enumerate() {
            out[0] += ak * pow * eps / (k + 1) as f64;
            out[1] += ak * pow;
            if k + 1 < a.len() {
                out[2] += (k + 1) as f64 * a[k + 1] * pow;
            }
            if k + 2 < a.len() {
                out[3] += ((k + 1) * (k + 2)) as f64 * a[k + 2] * pow;
            }
            pow *= eps;
        }
        out
    }

    fn locate(&self, tau: f64) -> (usize, f64) {
        let last = self.g.len() - 2;
        let s = (tau - 1.0) / self.step;
        let i = (s.floor().max(0.0) as usize).min(last);
        (i, s - i as f64)
    }

    /// `f(τ)`; C² in τ, extrapolated past the last node.
    pub fn f(&self, tau: f64) -> f64 {
        if tau - 1.0 <= SERIES_RADIUS {
            return self.series_at(tau - 1.0)[0];
        }
        let (i, t) = self.locate(tau);
        quintic(
            t,
            [self.f[i], self.f[i + 1]],
            [self.g[i], self.g[i + 1]],
            [self.dg[i], self.dg[i + 1]],
            self.step,
        )
    }

    /// `g(τ) = f′(τ)`.
    pub fn g(&self, tau: f64) -> f64 {
        if tau - 1.0 <= SERIES_RADIUS {
            return self.series_at(tau - 1.0)[1];
        }
        let (i, t) = self.locate(tau);
        quintic(
            t,
            [self.g[i], self.g[i + 1]],
            [self.dg[i], self.dg[i + 1]],
            [self.ddg[i], self.ddg[i + 1]],
            self.step,
        )
    }

    /// Max over the grid of `|x g³ + g′ g² (x² − 1) − c|`, with `g′` taken
    /// from a fourth-order difference of the grid values.
    pub fn residual(&self) -> f64 {
        let (g, h, n) = (&self.g, self.step, self.g.len());
        if n < 5 {
            return f64::NAN;
        }
        (0..n)
            .map(|i| {
                let d = if i < 2 {
                    let s = &g[0..5];
                    let w: [f64; 5] = if i == 0 {
                        [-25.0, 48.0, -36.0, 16.0, -3.0]
                    } else {
                        [-3.0, -10.0, 18.0, -6.0, 1.0]
                    };
                    s.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() / (12.0 * h)
                } else if i + 2 >= n {
                    let s = &g[n - 5..n];
                    let w: [f64; 5] = if i == n - 1 {
                        [3.0, -16.0, 36.0, -48.0, 25.0]
                    } else {
                        [-1.0, 6.0, -18.0, 10.0, 3.0]
                    };
                    s.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() / (12.0 * h)
                } else {
                    (g[i - 2] - 8.0 * g[i - 1] + 8.0 * g[i + 1] - g[i + 2]) / (12.0 * h)
                };
                let x = 1.0 + i as f64 * h;
                (x * g[i].powi(3) + d * g[i] * g[i] * (x * x - 1.0) - self.c).abs()
            })
            .fold(0.0, f64::max)
    }

    pub fn min_g(&self) -> f64 {
        self.g.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// A radial Kähler potential `f(τ)`.
pub trait RadialPotential: Sync {
    fn f(&self, tau: f64) -> f64;
    fn g(&self, tau: f64) -> f64;
    fn tau_max(&self) -> f64 {
        f64::INFINITY
    }
}

impl RadialPotential for StenzelOde {
    fn f(&self, tau: f64) -> f64 {
        StenzelOde::f(self, tau)
    }

    fn g(&self, tau: f64) -> f64 {
        StenzelOde::g(self, tau)
    }

    fn tau_max(&self) -> f64 {
        self.tau_max
    }
}

/// `f(τ) = τ`: the flat metric of C⁴ restricted to the quadric.
#[derive(Clone, Copy, Debug)]
pub struct LinearPotential;

impl RadialPotential for LinearPotential {
    fn f(&self, tau: f64) -> f64 {
        tau
    }

    fn g(&self, _tau: f64) -> f64 {
        1.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChartPoint {
    pub z: [Complex64; 3],
}

impl ChartPoint {
    pub fn new(z: [Complex64; 3]) -> Self {
        ChartPoint { z }
    }

    pub fn from_coords(c: &Point) -> Self {
        ChartPoint {
            z: std::array::from_fn(|k| Complex64::new(c[k], c[k + 3])),
        }
    }

    pub fn coords(&self) -> Point {
        std::array::from_fn(|i| if i < 3 { self.z[i].re } else { self.z[i - 3].im })
    }

    pub fn z4(&self) -> Complex64 {
        (Complex64::new(1.0, 0.0) - self.z.iter().map(|z| z * z).sum::<Complex64>()).sqrt()
    }

    pub fn full(&self) -> [Complex64; 4] {
        [self.z[0], self.z[1], self.z[2], self.z4()]
    }

    pub fn is_valid(&self, margin: f64) -> bool {
        self.z4().norm() > margin
    }

    /// `Σ_{k=1}^{4} |z_k|²`.
    pub fn tau(&self) -> f64 {
        self.full().iter().map(|z| z.norm_sqr()).sum()
    }

    fn require_valid(&self) -> Result<()> {
        if self.is_valid(CHART_MARGIN) {
            Ok(())
        } else {
            Err(Error::Precondition(format!(
                "|z₄| = {} is within {CHART_MARGIN} of the chart boundary",
                self.z4().norm()
            )))
        }
    }
}

/// Uniform samples of `Re z_k, Im z_k ∈ [−radius, radius]` that are valid.
pub fn sample_chart(n: usize, seed: u64, radius: f64) -> Vec<ChartPoint> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let c: Point = std::array::from_fn(|_| rng.gen_range(-radius..radius));
        let p = ChartPoint::from_coords(&c);
        if p.is_valid(2.0 * CHART_MARGIN) {
            out.push(p);
        }
    }
    out
}

fn hessian(phi: impl Fn(&Point) -> f64, x: &Point, d: f64) -> [[f64; 6]; 6] {
    let at = |i: usize, si: f64, j: usize, sj: f64| {
        let mut y = *x;
        y[i] += si * d;
        y[j] += sj * d;
        phi(&y)
    };
    let mut h = [[0.0; 6]; 6];
    for i in 0..6 {
        for j in i..6 {
            let v = (at(i, 1.0, j, 1.0) - at(i, 1.0, j, -1.0) - at(i, -1.0, j, 1.0)
                + at(i, -1.0, j, -1.0))
                / (4.0 * d * d);
            h[i][j] = v;
            h[j][i] = v;
        }
    }
    h
}

fn dz(k: usize) -> Form<Complex64> {
    let i = Complex64::new(0.0, 1.0);
    Form::<f64>::basis(&[k + 1]).complexify() + Form::<f64>::basis(&[k + 4]).complexify().scale(&i)
}

/// `i∂∂̄φ` as a complex 2-form, from a central-difference Hessian of `φ`.
pub fn kahler_form_complex(
    p: &ChartPoint,
    pot: &dyn RadialPotential,
    step: f64,
) -> Result<Form<Complex64>> {
    p.require_valid()?;
    if p.tau() > pot.tau_max() {
        return Err(Error::Precondition(format!(
            "τ = {} exceeds τmax = {}",
            p.tau(),
            pot.tau_max()
        )));
    }
    let h = hessian(
        |c| pot.f(ChartPoint::from_coords(c).tau()),
        &p.coords(),
        step,
    );
    let i = Complex64::new(0.0, 1.0);
    let mut omega = Form::zero(2);
    for j in 0..3 {
        for k in 0..3 {
            // ∂_{z_j} ∂_{z̄_k} φ
            let hjk = Complex64::new(
                0.25 * (h[j][k] + h[j + 3][k + 3]),
                0.25 * (h[j][k + 3] - h[j + 3][k]),
            );
            omega = omega + dz(j).wedge(&dz(k).conj())?.scale(&(i * hjk));
        }
    }
    Ok(omega)
}

/// The Kähler form `Ω = i∂∂̄ f(τ)` in chart coordinates.
pub fn kahler_form(p: &ChartPoint, pot: &dyn RadialPotential) -> Result<Form<f64>> {
    Ok(kahler_form_complex(p, pot, KAHLER_STEP)?.re())
}

/// `α = −dz₁∧dz₂∧dz₃ / z₄`.
pub fn holomorphic_volume(p: &ChartPoint) -> Result<Form<Complex64>> {
    p.require_valid()?;
    let w = dz(0).wedge(&dz(1))?.wedge(&dz(2))?;
    Ok(w.scale(&(-p.z4().inv())))
}

/// Tangent vector of the quadric over the chart direction `dz`.
pub fn tangent_vector(p: &ChartPoint, dz: [Complex64; 3]) -> [Complex64; 4] {
    let z4 = p.z4();
    let d4 = -(0..3).map(|k| p.z[k] * dz[k]).sum::<Complex64>() / z4;
    [dz[0], dz[1], dz[2], d4]
}

/// `det_C(z, Z₁, Z₂, Z₃)`.
pub fn volume_determinant(p: &ChartPoint, zs: &[[Complex64; 4]; 3]) -> Complex64 {
    let z = p.full();
    let m = nalgebra::Matrix4::from_fn(|r, c| if c == 0 { z[r] } else { zs[c - 1][r] });
    m.determinant()
}

/// `r` with `Ω³ = r · (i α∧ᾱ)`.
pub fn cy_ratio(p: &ChartPoint, pot: &dyn RadialPotential) -> Result<f64> {
    let omega = kahler_form(p, pot)?;
    let cube = omega.wedge(&omega)?.wedge(&omega)?.top_coeff();
    let alpha = holomorphic_volume(p)?;
    let vol = alpha.wedge(&alpha.conj())?.top_coeff() * Complex64::new(0.0, 1.0);
    Ok(cube / vol.re)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SpreadStats {
    pub min: f64,
    pub max: f64,
    pub median: f64,
    /// `(max − min) / |median|`.
    pub spread: f64,
}

pub fn spread_stats(values: &[f64]) -> SpreadStats {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    let median = if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    };
    let (min, max) = (v[0], v[n - 1]);
    SpreadStats {
        min,
        max,
        median,
        spread: (max - min) / median.abs(),
    }
}

/// `ξ(x + iy) = (x/√(1+‖y‖²), y)`, mapping the quadric to `T*S³`.
pub fn xi(p: &ChartPoint) -> ([f64; 4], [f64; 4]) {
    let z = p.full();
    let y: [f64; 4] = std::array::from_fn(|k| z[k].im);
    let s = (1.0 + y.iter().map(|a| a * a).sum::<f64>()).sqrt();
    (std::array::from_fn(|k| z[k].re / s), y)
}

/// Inverse of [`xi`] on the sheet `u₄ > 0` selected by the principal root.
pub fn xi_inverse(u: &[f64; 4], v: &[f64; 4]) -> Result<ChartPoint> {
    if u[3] <= 0.0 {
        return Err(Error::Precondition(format!(
            "u₄ = {} is outside the principal chart",
            u[3]
        )));
    }
    let s = (1.0 + v.iter().map(|a| a * a).sum::<f64>()).sqrt();
    Ok(ChartPoint::new(std::array::from_fn(|k| {
        Complex64::new(u[k] * s, v[k])
    })))
}

fn darboux_unchecked(u: &[f64; 4], v: &[f64; 4], pot: &dyn RadialPotential) -> [f64; 6] {
    let v2: f64 = v.iter().map(|a| a * a).sum();
    let tau = TAU_OFFSET + 2.0 * v2;
    let s = 2.0 * pot.g(tau) * (1.0 + v2).sqrt() / u[3];
    std::array::from_fn(|k| {
        if k < 3 {
            s * (u[k] * v[3] - v[k] * u[3])
        } else {
            u[k - 3]
        }
    })
}

/// `(w₁, w₂, w₃, u₁, u₂, u₃)` with
/// `w_k = 2 f′(τ) √(1+‖v‖²)/u₄ · (u_k v₄ − v_k u₄)` and `τ = 1 + 2‖v‖²`.
pub fn darboux_coords(u: &[f64; 4], v: &[f64; 4], pot: &dyn RadialPotential) -> Result<[f64; 6]> {
    let norm: f64 = u.iter().map(|a| a * a).sum::<f64>().sqrt();
    let dot: f64 = u.iter().zip(v).map(|(a, b)| a * b).sum();
    if (norm - 1.0).abs() > 1e-9 {
        return Err(Error::Precondition(format!("‖u‖ = {norm}, expected 1")));
    }
    if dot.abs() > 1e-9 * (1.0 + v.iter().map(|a| a.abs()).sum::<f64>()) {
        return Err(Error::Precondition(format!("⟨u, v⟩ = {dot}, expected 0")));
    }
    if u[3].abs() < 1e-8 {
        return Err(Error::Precondition("u₄ ≈ 0".into()));
    }
    Ok(darboux_unchecked(u, v, pot))
}

/// Chart coordinates to Darboux coordinates.
pub fn chart_to_darboux(c: &Point, pot: &dyn RadialPotential) -> [f64; 6] {
    let (u, v) = xi(&ChartPoint::from_coords(c));
    darboux_unchecked(&u, &v, pot)
}

/// Jacobian `∂D/∂c` of [`chart_to_darboux`], fourth-order differences.
pub fn darboux_jacobian(c: &Point, pot: &dyn RadialPotential) -> Matrix6<f64> {
    let h = JACOBIAN_STEP;
    let mut j = Matrix6::zeros();
    for col in 0..6 {
        let at = |t: f64| {
            let mut y = *c;
            y[col] += t;
            chart_to_darboux(&y, pot)
        };
        let (p1, m1, p2, m2) = (at(h), at(-h), at(2.0 * h), at(-2.0 * h));
        for row in 0..6 {
            j[(row, col)] = (8.0 * (p1[row] - m1[row]) - (p2[row] - m2[row])) / (12.0 * h);
        }
    }
    j
}

/// Pullback of `Σ dw_k∧du_k` to the chart.
pub fn darboux_symplectic_form(c: &Point, pot: &dyn RadialPotential) -> Form<f64> {
    let j = darboux_jacobian(c, pot);
    let std = crate::symplectic::omega::<f64>();
    std.pullback(&matrix_to_map(&j))
}

fn matrix_to_map(m: &Matrix6<f64>) -> LinearMap<f64> {
    LinearMap::from_rows((0..6).map(|r| (0..6).map(|c| m[(r, c)]).collect()).collect())
}

/// Inverts [`chart_to_darboux`] on the principal sheet.
pub fn darboux_to_chart(d: &Point, pot: &dyn RadialPotential) -> Result<Point> {
    let u3 = [d[3], d[4], d[5]];
    let r2: f64 = u3.iter().map(|a| a * a).sum();
    if r2 >= 1.0 {
        return Err(Error::Precondition(format!("‖(u₁,u₂,u₃)‖² = {r2} ≥ 1")));
    }
    let u = [u3[0], u3[1], u3[2], (1.0 - r2).sqrt()];
    let target = [d[0], d[1], d[2]];
    let lift = |v3: &[f64; 3]| -> [f64; 4] {
        let v4 = -(0..3).map(|k| u[k] * v3[k]).sum::<f64>() / u[3];
        [v3[0], v3[1], v3[2], v4]
    };
    let defect = |v3: &[f64; 3]| -> [f64; 3] {
        let w = darboux_unchecked(&u, &lift(v3), pot);
        std::array::from_fn(|k| w[k] - target[k])
    };
    // w = s·Lv with L = −(u uᵀ/u₄ + u₄ I); start from s frozen at v = 0
    let s0 = 2.0 * pot.g(TAU_OFFSET) / u[3];
    let l = nalgebra::Matrix3::from_fn(|i, j| {
        -(u[i] * u[j] / u[3] + if i == j { u[3] } else { 0.0 })
    });
    let start = l
        .try_inverse()
        .ok_or_else(|| Error::Singular("Darboux linearization".into()))?
        * nalgebra::Vector3::from(target)
        / s0;
    let mut v3 = [start[0], start[1], start[2]];
    for _ in 0..60 {
        let f0 = defect(&v3);
        let eps = 1e-7;
        let jac = nalgebra::Matrix3::from_fn(|r, col| {
            let mut a = v3;
            let mut b = v3;
            a[col] += eps;
            b[col] -= eps;
            (defect(&a)[r] - defect(&b)[r]) / (2.0 * eps)
        });
        let delta = jac
            .try_inverse()
            .ok_or_else(|| Error::Singular("Darboux Newton step".into()))?
            * nalgebra::Vector3::from(f0);
        for k in 0..3 {
            v3[k] -= delta[k];
        }
        if delta.amax() < 1e-15 * (1.0 + v3.iter().map(|a| a.abs()).fold(0.0, f64::max)) {
            break;
        }
    }
    let residual = defect(&v3).iter().map(|a| a.abs()).fold(0.0, f64::max);
    if residual > 1e-11 {
        return Err(Error::Precondition(format!(
            "Darboux inversion did not converge (residual {residual})"
        )));
    }
    Ok(xi_inverse(&u, &lift(&v3))?.coords())
}

/// `Re α` expressed in Darboux coordinates, where `Ω = Σ dw_k∧du_k`.
pub struct DarbouxField<'a> {
    pub pot: &'a dyn RadialPotential,
}

impl DarbouxField<'_> {
    pub fn try_eval(&self, d: &Point) -> Result<Form<f64>> {
        let c = darboux_to_chart(d, self.pot)?;
        let jac = darboux_jacobian(&c, self.pot)
            .try_inverse()
            .ok_or_else(|| Error::Singular(format!("Darboux Jacobian at {c:?}")))?;
        let alpha = holomorphic_volume(&ChartPoint::from_coords(&c))?.re();
        Ok(alpha.pullback(&matrix_to_map(&jac)))
    }
}

impl FormField for DarbouxField<'_> {
    fn degree(&self) -> usize {
        3
    }

    fn eval(&self, x: &Point) -> Form<f64> {
        self.try_eval(x).unwrap_or_else(|_| nan_form())
    }
}

fn nan_form() -> Form<f64> {
    Form::basis(&[1, 2, 3]).scale(&f64::NAN)
}

/// Largest `‖R(q)‖` measured for a flat structure at the same points: the
/// special-Lagrangian representative pulled back by a nonlinear
/// symplectomorphism. Any curvature below this is FD noise.
pub fn flat_noise_floor(samples: &[Point], steps: CurvatureSteps) -> Result<f64> {
    let w0 = representative(Row::Row3, &Rational::from_i64(1)).to_float();
    let field = Twisted {
        base: w0,
        kappa: 1.0,
    };
    let metric = crate::fields::QMetric(&field);
    let norms: Vec<Result<f64>> = samples
        .par_iter()
        .map(|x| Ok(riemann_norm(&riemann(&metric, x, steps)?)))
        .collect();
    norms
        .into_iter()
        .try_fold(0.0, |m, r| Ok(f64::max(m, r?)))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TauCheck {
    /// Largest `|τ(z) − (1 + 2‖v‖²)|` over the samples.
    pub max_defect: f64,
    /// Smallest `|τ(z) − (2 + 2‖v‖²)|` over the samples.
    pub published_min_defect: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StenzelReport {
    pub c: f64,
    pub tau_max: f64,
    pub step: f64,
    pub ode_residual: f64,
    pub min_g: f64,
    pub samples: usize,
    pub cy_ratio: SpreadStats,
    pub max_darboux_defect: f64,
    pub tau: TauCheck,
    pub max_lambda: f64,
    pub flat_noise_floor: f64,
    pub curvature: CurvatureReport,
    pub non_flat: bool,
}

pub fn stenzel_report(samples: &[ChartPoint], ode: &StenzelOde) -> Result<StenzelReport> {
    if samples.is_empty() {
        return Err(Error::Input("no samples".into()));
    }
    let ratios = samples
        .par_iter()
        .map(|p| cy_ratio(p, ode))
        .collect::<Result<Vec<_>>>()?;
    let darboux_defect = samples
        .par_iter()
        .map(|p| {
            let omega = kahler_form(p, ode)?;
            Ok((darboux_symplectic_form(&p.coords(), ode) - omega).max_abs())
        })
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    let mut tau = TauCheck {
        max_defect: 0.0,
        published_min_defect: f64::INFINITY,
    };
    for p in samples {
        let (_, v) = xi(p);
        let v2: f64 = v.iter().map(|a| a * a).sum();
        tau.max_defect = tau.max_defect.max((p.tau() - TAU_OFFSET - 2.0 * v2).abs());
        tau.published_min_defect = tau
            .published_min_defect
            .min((p.tau() - PUBLISHED_TAU_OFFSET - 2.0 * v2).abs());
    }
    let points: Vec<Point> = samples
        .iter()
        .map(|p| chart_to_darboux(&p.coords(), ode))
        .collect();
    let field = DarbouxField { pot: ode };
    let max_lambda = points
        .par_iter()
        .map(|x| {
            field.try_eval(x)?;
            Ok(normalized_at(&field, x).1)
        })
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(f64::NEG_INFINITY, f64::max);
    let steps = CurvatureSteps {
        richardson: true,
        ..CurvatureSteps::default()
    };
    let curvature = local_constancy_report(&field, &points, Tolerances::finite_difference(), steps)?;
    let floor = flat_noise_floor(&points, steps)?;
    let non_flat = curvature.max_riemann_norm > 10.0 * floor;
    Ok(StenzelReport {
        c: ode.c,
        tau_max: ode.tau_max,
        step: ode.step,
        ode_residual: ode.residual(),
        min_g: ode.min_g(),
        samples: samples.len(),
        cy_ratio: spread_stats(&ratios),
        max_darboux_defect: darboux_defect,
        tau,
        max_lambda,
        flat_noise_floor: floor,
        curvature,
        non_flat,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quintic_hermite_reproduces_quintics() {
        let p = |x: f64| 1.0 - 2.0 * x + 0.5 * x.powi(3) + 0.25 * x.powi(5);
        let dp = |x: f64| -2.0 + 1.5 * x * x + 1.25 * x.powi(4);
        let ddp = |x: f64| 3.0 * x + 5.0 * x.powi(3);
        let (a, h) = (0.3, 0.7);
        for t in [0.0, 0.2, 0.5, 0.9, 1.0] {
            let v = quintic(
                t,
                [p(a), p(a + h)],
                [dp(a), dp(a + h)],
                [ddp(a), ddp(a + h)],
                h,
            );
            assert!((v - p(a + t * h)).abs() < 1e-13);
        }
    }

    #[test]
    fn series_solves_the_relation() {
        let a = series_coefficients(2.0, SERIES_ORDER);
        assert!((a[0] - 2.0_f64.cbrt()).abs() < 1e-15);
        // differentiating at x = 1 gives g′(1) = −g(1)/5
        assert!((a[1] + a[0] / 5.0).abs() < 1e-15);
        for k in 1..SERIES_ORDER {
            assert!(relation_coefficient(&a, k).abs() < 1e-13);
        }
    }

    #[test]
    fn ode_starts_at_the_cube_root() {
        let ode = solve_ode(1.0, 3.0, 1e-3).unwrap();
        assert_eq!(ode.g[0], 1.0);
        assert!(ode.min_g() > 0.0);
        assert!(ode.residual() < 1e-8, "{}", ode.residual());
        assert!(solve_ode(-1.0, 3.0, 1e-3).is_err());
        assert!(solve_ode(1.0, 1.0, 1e-3).is_err());
    }

    #[test]
    fn origin_volume_form() {
        let p = ChartPoint::new([Complex64::new(0.0, 0.0); 3]);
        assert_eq!(p.z4(), Complex64::new(1.0, 0.0));
        let alpha = holomorphic_volume(&p).unwrap();
        let expected = dz(0).wedge(&dz(1)).unwrap().wedge(&dz(2)).unwrap();
        assert!((alpha + expected).max_abs() < 1e-15);
    }

    #[test]
    fn darboux_vanishes_on_the_zero_section() {
        let ode = solve_ode(1.0, 3.0, 1e-3).unwrap();
        let u = [0.0, 0.6, 0.0, 0.8];
        let d = darboux_coords(&u, &[0.0; 4], &ode).unwrap();
        assert_eq!(&d[..3], &[0.0, 0.0, 0.0]);
        assert!(darboux_coords(&u, &[0.0, 1.0, 0.0, 0.0], &ode).is_err());
        assert!(darboux_coords(&[1.0, 0.0, 0.0, 0.0], &[0.0; 4], &ode).is_err());
    }

    #[test]
    fn darboux_inversion_round_trips() {
        let ode = solve_ode(1.0, 3.0, 1e-3).unwrap();
        for p in sample_chart(5, 3, 0.4) {
            let d = chart_to_darboux(&p.coords(), &ode);
            let back = darboux_to_chart(&d, &ode).unwrap();
            for k in 0..6 {
                assert!((back[k] - p.coords()[k]).abs() < 1e-12);
            }
        }
    }
}
