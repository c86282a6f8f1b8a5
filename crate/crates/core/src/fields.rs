//! Point-sampled differential geometry on boxes in R⁶.
//!
//! Form fields and metrics are evaluated pointwise; derivatives come from
//! exact callbacks when a field provides them and from central differences
//! otherwise. Curvature differentiates Christoffel symbols a second time
//! with a coarser step.

use nalgebra::Matrix6;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exterior::{Form, LinearMap, DIM};
use crate::hitchin;

pub type Point = [f64; DIM];

/// `Γ[l][j][k] = Γ^l_{jk}`.
pub type Christoffel = [[[f64; DIM]; DIM]; DIM];

/// `R[l][i][j][k] = R^l_{ijk}`.
pub type Riemann = [[[[f64; DIM]; DIM]; DIM]; DIM];

pub const DEFAULT_STEP: f64 = 1e-4;

/// Axis-aligned box `Π [lo_i, hi_i]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Domain {
    pub lo: Point,
    pub hi: Point,
}

impl Domain {
    pub fn cube(half_width: f64) -> Self {
        Domain {
            lo: [-half_width; DIM],
            hi: [half_width; DIM],
        }
    }

    pub fn contains(&self, x: &Point, margin: f64) -> bool {
        (0..DIM).all(|i| x[i] - margin >= self.lo[i] && x[i] + margin <= self.hi[i])
    }

    fn require_interior(&self, x: &Point, margin: f64) -> Result<()> {
        if self.contains(x, margin) {
            Ok(())
        } else {
            Err(Error::NearBoundary {
                point: x.to_vec(),
                margin,
            })
        }
    }
}

/// A differential form with float coefficients on an open set of R⁶.
pub trait FormField: Sync {
    fn degree(&self) -> usize;

    fn eval(&self, x: &Point) -> Form<f64>;

    /// Exact `∂_j` of every coefficient (`j` 0-based), when known.
    fn partial(&self, _x: &Point, _j: usize) -> Option<Form<f64>> {
        None
    }

    fn domain(&self) -> Option<Domain> {
        None
    }
}

/// A symmetric bilinear form field `g(x)`.
pub trait MetricField: Sync {
    fn eval(&self, x: &Point) -> Matrix6<f64>;

    fn partial(&self, _x: &Point, _j: usize) -> Option<Matrix6<f64>> {
        None
    }

    fn domain(&self) -> Option<Domain> {
        None
    }
}

/// A field with constant coefficients; its derivatives are exactly zero.
#[derive(Clone, Debug)]
pub struct ConstantForm(pub Form<f64>);

impl FormField for ConstantForm {
    fn degree(&self) -> usize {
        self.0.degree()
    }

    fn eval(&self, _x: &Point) -> Form<f64> {
        self.0.clone()
    }

    fn partial(&self, _x: &Point, _j: usize) -> Option<Form<f64>> {
        Some(Form::zero(self.0.degree()))
    }
}

/// A form field given by a closure, differentiated numerically.
pub struct FnForm<F> {
    pub degree: usize,
    pub f: F,
    pub domain: Option<Domain>,
}

impl<F: Fn(&Point) -> Form<f64> + Sync> FnForm<F> {
    pub fn new(degree: usize, f: F) -> Self {
        FnForm {
            degree,
            f,
            domain: None,
        }
    }
}

impl<F: Fn(&Point) -> Form<f64> + Sync> FormField for FnForm<F> {
    fn degree(&self) -> usize {
        self.degree
    }

    fn eval(&self, x: &Point) -> Form<f64> {
        (self.f)(x)
    }

    fn domain(&self) -> Option<Domain> {
        self.domain
    }
}

/// A metric given by a closure with optional exact partials.
pub struct FnMetric<G, D> {
    pub g: G,
    pub dg: Option<D>,
    pub domain: Option<Domain>,
}

impl<G> FnMetric<G, fn(&Point, usize) -> Matrix6<f64>>
where
    G: Fn(&Point) -> Matrix6<f64> + Sync,
{
    pub fn new(g: G) -> Self {
        FnMetric {
            g,
            dg: None,
            domain: None,
        }
    }
}

impl<G, D> FnMetric<G, D> {
    pub fn with_partials(g: G, dg: D) -> Self {
        FnMetric {
            g,
            dg: Some(dg),
            domain: None,
        }
    }
}

impl<G, D> MetricField for FnMetric<G, D>
where
    G: Fn(&Point) -> Matrix6<f64> + Sync,
    D: Fn(&Point, usize) -> Matrix6<f64> + Sync,
{
    fn eval(&self, x: &Point) -> Matrix6<f64> {
        (self.g)(x)
    }

    fn partial(&self, x: &Point, j: usize) -> Option<Matrix6<f64>> {
        self.dg.as_ref().map(|d| d(x, j))
    }

    fn domain(&self) -> Option<Domain> {
        self.domain
    }
}

/// `x + t·e_j`.
pub fn shifted(x: &Point, j: usize, t: f64) -> Point {
    let mut y = *x;
    y[j] += t;
    y
}

fn form_partial(f: &dyn FormField, x: &Point, j: usize, h: f64) -> Form<f64> {
    if let Some(d) = f.partial(x, j) {
        return d;
    }
    let plus = f.eval(&shifted(x, j, h));
    let minus = f.eval(&shifted(x, j, -h));
    (plus - minus).scale(&(0.5 / h))
}

/// `dF = Σ_I Σ_j ∂_j c_I dx_j∧dx_I`.
pub fn exterior_derivative(f: &dyn FormField, x: &Point, h: f64) -> Result<Form<f64>> {
    if let Some(dom) = f.domain() {
        dom.require_interior(x, h)?;
    }
    let k = f.degree();
    if k >= DIM {
        return Ok(Form::zero(DIM.min(k + 1)));
    }
    let mut out = Form::zero(k + 1);
    for j in 0..DIM {
        let dj = form_partial(f, x, j, h);
        out = out + Form::basis(&[j + 1]).wedge_unchecked(&dj);
    }
    Ok(out)
}

fn metric_partial(g: &dyn MetricField, x: &Point, j: usize, h: f64) -> Matrix6<f64> {
    if let Some(d) = g.partial(x, j) {
        return d;
    }
    (g.eval(&shifted(x, j, h)) - g.eval(&shifted(x, j, -h))) / (2.0 * h)
}

/// Smallest accepted ratio of extreme singular values of `g`.
const SINGULAR_RCOND: f64 = 1e-12;

/// Levi-Civita symbols `Γ^l_{jk} = ½ g^{lm}(∂_j g_{mk} + ∂_k g_{mj} − ∂_m g_{jk})`.
pub fn christoffel(g: &dyn MetricField, x: &Point, h: f64) -> Result<Christoffel> {
    if let Some(dom) = g.domain() {
        dom.require_interior(x, h)?;
    }
    let gx = g.eval(x);
    let sv = gx.singular_values();
    if !(sv.min() > SINGULAR_RCOND * sv.max()) {
        return Err(Error::Singular(format!("metric at {x:?}")));
    }
    let ginv = gx
        .try_inverse()
        .ok_or_else(|| Error::Singular(format!("metric at {x:?}")))?;
    let dg: Vec<Matrix6<f64>> = (0..DIM).map(|j| metric_partial(g, x, j, h)).collect();
    // first kind: Γ_{mjk} = ½(∂_j g_{mk} + ∂_k g_{mj} − ∂_m g_{jk})
    let mut first = [[[0.0; DIM]; DIM]; DIM];
    for (m, fm) in first.iter_mut().enumerate() {
        for j in 0..DIM {
            for k in 0..DIM {
                fm[j][k] = 0.5 * (dg[j][(m, k)] + dg[k][(m, j)] - dg[m][(j, k)]);
            }
        }
    }
    let mut gamma = [[[0.0; DIM]; DIM]; DIM];
    for (l, gl) in gamma.iter_mut().enumerate() {
        for j in 0..DIM {
            for k in 0..DIM {
                gl[j][k] = (0..DIM).map(|m| ginv[(l, m)] * first[m][j][k]).sum();
            }
        }
    }
    Ok(gamma)
}

/// Finite-difference settings for curvature.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CurvatureSteps {
    /// Step for metric derivatives.
    pub h: f64,
    /// Step for derivatives of Γ; defaults to `10·h`.
    pub outer: f64,
    pub richardson: bool,
}

impl Default for CurvatureSteps {
    fn default() -> Self {
        CurvatureSteps {
            h: DEFAULT_STEP,
            outer: 10.0 * DEFAULT_STEP,
            richardson: false,
        }
    }
}

impl CurvatureSteps {
    pub fn with_step(h: f64) -> Self {
        CurvatureSteps {
            h,
            outer: 10.0 * h,
            richardson: false,
        }
    }
}

fn christoffel_partial(
    g: &dyn MetricField,
    x: &Point,
    i: usize,
    s: f64,
    h: f64,
) -> Result<Christoffel> {
    let plus = christoffel(g, &shifted(x, i, s), h)?;
    let minus = christoffel(g, &shifted(x, i, -s), h)?;
    let mut d = [[[0.0; DIM]; DIM]; DIM];
    for l in 0..DIM {
        for j in 0..DIM {
            for k in 0..DIM {
                d[l][j][k] = (plus[l][j][k] - minus[l][j][k]) / (2.0 * s);
            }
        }
    }
    Ok(d)
}

/// `R^l_{ijk} = ∂_iΓ^l_{jk} − ∂_jΓ^l_{ik} + Γ^l_{im}Γ^m_{jk} − Γ^l_{jm}Γ^m_{ik}`.
pub fn riemann(g: &dyn MetricField, x: &Point, steps: CurvatureSteps) -> Result<Riemann> {
    if let Some(dom) = g.domain() {
        dom.require_interior(x, steps.outer + steps.h)?;
    }
    let gamma = christoffel(g, x, steps.h)?;
    let mut dgamma = Vec::with_capacity(DIM);
    for i in 0..DIM {
        let coarse = christoffel_partial(g, x, i, steps.outer, steps.h)?;
        if steps.richardson {
            let fine = christoffel_partial(g, x, i, steps.outer / 2.0, steps.h)?;
            let mut r = fine;
            for l in 0..DIM {
                for j in 0..DIM {
                    for k in 0..DIM {
                        r[l][j][k] = (4.0 * fine[l][j][k] - coarse[l][j][k]) / 3.0;
                    }
                }
            }
            dgamma.push(r);
        } else {
            dgamma.push(coarse);
        }
    }
    let mut r = [[[[0.0; DIM]; DIM]; DIM]; DIM];
    for l in 0..DIM {
        for i in 0..DIM {
            for j in 0..DIM {
                for k in 0..DIM {
                    let mut v = dgamma[i][l][j][k] - dgamma[j][l][i][k];
                    for m in 0..DIM {
                        v += gamma[l][i][m] * gamma[m][j][k] - gamma[l][j][m] * gamma[m][i][k];
                    }
                    r[l][i][j][k] = v;
                }
            }
        }
    }
    Ok(r)
}

/// Largest absolute component of a curvature tensor.
pub fn riemann_norm(r: &Riemann) -> f64 {
    r.iter().flatten().flatten().flatten().fold(0.0, |a, &b| a.max(b.abs()))
}

/// `ω(x)/|λ(ω(x))|^{1/4}`, together with `λ(ω(x))`.
pub fn normalized_at(field: &dyn FormField, x: &Point) -> (Form<f64>, f64) {
    let w = field.eval(x);
    let lambda = hitchin::pfaffian(&w).unwrap_or(0.0);
    let s = lambda.abs().powf(-0.25);
    (w.scale(&s), lambda)
}

/// The normalized form field of a 3-form field.
pub struct Normalized<'a>(pub &'a dyn FormField);

impl FormField for Normalized<'_> {
    fn degree(&self) -> usize {
        3
    }

    fn eval(&self, x: &Point) -> Form<f64> {
        normalized_at(self.0, x).0
    }

    fn domain(&self) -> Option<Domain> {
        self.0.domain()
    }
}

/// The dual `ω̂` of the normalized field.
pub struct DualField<'a> {
    pub base: &'a dyn FormField,
    pub tol: f64,
}

impl FormField for DualField<'_> {
    fn degree(&self) -> usize {
        3
    }

    fn eval(&self, x: &Point) -> Form<f64> {
        let (w, _) = normalized_at(self.base, x);
        hitchin::dual(&w, self.tol).unwrap_or_else(|_| Form::zero(3))
    }

    fn domain(&self) -> Option<Domain> {
        self.base.domain()
    }
}

/// `qK` of the normalized field, as a metric.
pub struct QMetric<'a>(pub &'a dyn FormField);

pub fn q_matrix(w: &Form<f64>) -> Matrix6<f64> {
    let k = hitchin::k_endomorphism(w).unwrap_or_else(|_| LinearMap::zero());
    let q = hitchin::q_from_k(&k);
    Matrix6::from_fn(|i, j| q[i][j])
}

impl MetricField for QMetric<'_> {
    fn eval(&self, x: &Point) -> Matrix6<f64> {
        let m = q_matrix(&normalized_at(self.0, x).0);
        // symmetrize away rounding noise
        (m + m.transpose()) * 0.5
    }

    fn domain(&self) -> Option<Domain> {
        self.0.domain()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Tolerances {
    pub closedness: f64,
    /// Relative curvature bound; the absolute bound is `curvature·scale²`
    /// with `scale` the largest entry of `q` over the samples.
    pub curvature: f64,
    /// Below this `|λ|` a sample counts as degenerate.
    pub lambda: f64,
}

impl Tolerances {
    /// Tolerances for fields with exact derivative callbacks.
    pub fn exact() -> Self {
        Tolerances {
            closedness: 1e-6,
            curvature: 1e-3,
            lambda: 1e-10,
        }
    }

    /// Tolerances for finite-difference derivatives.
    pub fn finite_difference() -> Self {
        Tolerances {
            closedness: 1e-3,
            curvature: 1e-3,
            lambda: 1e-10,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind")]
pub enum Verdict {
    LocallyConstant,
    NotLocallyConstant,
    Inconclusive { degenerate: Vec<Point> },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CurvatureReport {
    pub samples: Vec<Point>,
    pub max_riemann_norm: f64,
    pub metric_scale: f64,
    pub curvature_bound: f64,
    pub max_closedness_defect: f64,
    pub max_dual_closedness_defect: f64,
    pub min_abs_lambda: f64,
    pub tolerances: Tolerances,
    pub steps: CurvatureSteps,
    pub verdict: Verdict,
    pub note: &'static str,
}

pub const REPORT_NOTE: &str = "sampled necessary-condition check: dω, dω̂ and R(q) measured at the listed \
     points only, within the stated tolerances; not a proof of local constancy";

struct Sample {
    scale: f64,
    d_omega: f64,
    d_dual: f64,
    curvature: f64,
    lambda: f64,
}

/// Measures `dω`, `dω̂` and `R(q_ω)` for the normalized field at each sample.
pub fn local_constancy_report(
    field: &dyn FormField,
    samples: &[Point],
    tol: Tolerances,
    steps: CurvatureSteps,
) -> Result<CurvatureReport> {
    if field.degree() != 3 {
        return Err(Error::WrongDegree {
            expected: 3,
            found: field.degree(),
        });
    }
    let normalized = Normalized(field);
    let dual = DualField {
        base: field,
        tol: tol.lambda,
    };
    let metric = QMetric(field);
    let results: Vec<Result<Sample>> = samples
        .par_iter()
        .map(|x| {
            let (_, lambda) = normalized_at(field, x);
            if lambda.abs() <= tol.lambda {
                return Ok(Sample {
                    scale: f64::NAN,
                    d_omega: f64::NAN,
                    d_dual: f64::NAN,
                    curvature: f64::NAN,
                    lambda,
                });
            }
            Ok(Sample {
                scale: metric.eval(x).amax(),
                d_omega: exterior_derivative(&normalized, x, steps.h)?.max_abs(),
                d_dual: exterior_derivative(&dual, x, steps.h)?.max_abs(),
                curvature: riemann_norm(&riemann(&metric, x, steps)?),
                lambda,
            })
        })
        .collect();
    let mut per_point = Vec::with_capacity(samples.len());
    for r in results {
        per_point.push(r?);
    }
    let degenerate: Vec<Point> = samples
        .iter()
        .zip(&per_point)
        .filter(|(_, s)| s.lambda.abs() <= tol.lambda)
        .map(|(x, _)| *x)
        .collect();
    let fmax = |f: fn(&Sample) -> f64| {
        per_point
            .iter()
            .map(f)
            .filter(|v| !v.is_nan())
            .fold(0.0, f64::max)
    };
    let max_closedness_defect = fmax(|s| s.d_omega);
    let max_dual_closedness_defect = fmax(|s| s.d_dual);
    let max_riemann_norm = fmax(|s| s.curvature);
    let metric_scale = fmax(|s| s.scale);
    let curvature_bound = tol.curvature * metric_scale * metric_scale;
    let min_abs_lambda = per_point
        .iter()
        .map(|s| s.lambda.abs())
        .fold(f64::INFINITY, f64::min);
    let verdict = if !degenerate.is_empty() {
        Verdict::Inconclusive { degenerate }
    } else if max_closedness_defect < tol.closedness
        && max_dual_closedness_defect < tol.closedness
        && max_riemann_norm < curvature_bound
    {
        Verdict::LocallyConstant
    } else {
        Verdict::NotLocallyConstant
    };
    Ok(CurvatureReport {
        samples: samples.to_vec(),
        max_riemann_norm,
        metric_scale,
        curvature_bound,
        max_closedness_defect,
        max_dual_closedness_defect,
        min_abs_lambda,
        tolerances: tol,
        steps,
        verdict,
        note: REPORT_NOTE,
    })
}

/// `ψ*ω₀` for the symplectomorphism `ψ(x, p) = (x, p + ∇S(x))` with
/// `S = κ((x₁³ + x₂³ + x₃³)/6 + x₁x₂x₃/2)`: locally constant, with
/// non-constant coefficients.
#[derive(Clone, Debug)]
pub struct Twisted {
    pub base: Form<f64>,
    pub kappa: f64,
}

/// Jacobian of the map `ψ` of [`Twisted`]; its `p`-rows add `Hess S`.
pub fn twist_jacobian(kappa: f64, y: &Point) -> LinearMap<f64> {
    let mut d = LinearMap::identity();
    for i in 0..3 {
        for j in 0..3 {
            d.m[i + 3][j] = kappa * if i == j { y[i] } else { 0.5 * y[3 - i - j] };
        }
    }
    d
}

impl FormField for Twisted {
    fn degree(&self) -> usize {
        self.base.degree()
    }

    fn eval(&self, x: &Point) -> Form<f64> {
        self.base.pullback(&twist_jacobian(self.kappa, x))
    }
}

/// Block metric `[[0, A], [Aᵀ, 0]]`.
pub fn block_metric(a: &nalgebra::Matrix3<f64>) -> Matrix6<f64> {
    let mut g = Matrix6::zeros();
    g.fixed_view_mut::<3, 3>(0, 3).copy_from(a);
    g.fixed_view_mut::<3, 3>(3, 0).copy_from(&a.transpose());
    g
}
