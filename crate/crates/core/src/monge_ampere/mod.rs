//! Monge-Ampère equations on T*R³ given by effective 3-forms, with
//! coordinates `(x₁, x₂, x₃, p₁, p₂, p₃)` on basis indices 1..6.
//!
//! A function `f` solves the equation of `ω` when `(x, ∇f)*ω = 0`; a
//! generalized solution is a Lagrangian 3-fold on which `ω` vanishes.

pub mod pde;
pub mod solutions;

use num_traits::Zero;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exterior::{Form, LinearMap, Vector};
use crate::hitchin::{self, Decomposition};
use crate::scalar::{to_float, Number, Rational, Scalar};
use crate::symplectic::{self, omega};

pub use pde::{symbolic_pullback, HessPoly};
pub use solutions::*;

pub type P3 = [f64; 3];
pub type M3 = [[f64; 3]; 3];

/// Built-in equations.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Builtin {
    /// `dp₁₂₃ − γ dx₁₂₃`: `hess(f) = γ`.
    Hess,
    /// `Im(dz₁₂₃)`-type form `f₁e₂₃ − f₂e₁₃ + f₃e₁₂ − γf₁₂₃`: `Δf − γ hess(f) = 0`.
    SpecialLagrangian,
    /// `f₁e₂₃ + f₂e₁₃ + f₃e₁₂ + γf₁₂₃`: `□f + γ hess(f) = 0`.
    Pseudo,
    /// `dp∧dq∧dz + dx∧dy∧dh − γ dx∧dy∧dz` in `(x, y, z, p, q, h)`.
    ChynowethSewell,
}

impl Builtin {
    pub const ALL: [Builtin; 4] = [
        Builtin::Hess,
        Builtin::SpecialLagrangian,
        Builtin::Pseudo,
        Builtin::ChynowethSewell,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Builtin::Hess => "hess",
            Builtin::SpecialLagrangian => "special-lagrangian",
            Builtin::Pseudo => "pseudo",
            Builtin::ChynowethSewell => "chynoweth-sewell",
        }
    }

    pub fn parse(name: &str) -> Result<Builtin> {
        Builtin::ALL
            .into_iter()
            .find(|b| b.name() == name)
            .ok_or_else(|| Error::UnknownEquation(name.to_string()))
    }

    fn allows_zero_gamma(self) -> bool {
        matches!(self, Builtin::ChynowethSewell)
    }
}

/// A constant-coefficient Monge-Ampère equation.
#[derive(Clone, Debug, PartialEq)]
pub struct MAEquation {
    pub name: String,
    pub gamma: Option<Rational>,
    pub omega: Form<Rational>,
}

impl MAEquation {
    pub fn from_form(name: &str, omega: Form<Rational>) -> Result<Self> {
        if omega.degree() != 3 {
            return Err(Error::WrongDegree {
                expected: 3,
                found: omega.degree(),
            });
        }
        symplectic::require_effective(&omega)?;
        Ok(MAEquation {
            name: name.to_string(),
            gamma: None,
            omega,
        })
    }

    pub fn float_form(&self) -> Form<f64> {
        self.omega.to_float()
    }

    /// `P(f_ij)` with `(x, ∇f)*ω = P·dx₁∧dx₂∧dx₃`.
    pub fn pde(&self) -> HessPoly {
        symbolic_pullback(&self.omega)
    }
}

pub fn builtin(name: &str, gamma: &Rational) -> Result<MAEquation> {
    let kind = Builtin::parse(name)?;
    if gamma.is_zero() && !kind.allows_zero_gamma() {
        return Err(Error::ZeroGamma(name.to_string()));
    }
    let b = |idx: &[usize]| Form::<Rational>::basis(idx);
    let omega = match kind {
        Builtin::Hess => b(&[4, 5, 6]) - b(&[1, 2, 3]).scale(gamma),
        Builtin::SpecialLagrangian => {
            b(&[4, 2, 3]) - b(&[5, 1, 3]) + b(&[6, 1, 2]) - b(&[4, 5, 6]).scale(gamma)
        }
        Builtin::Pseudo => {
            b(&[4, 2, 3]) + b(&[5, 1, 3]) + b(&[6, 1, 2]) + b(&[4, 5, 6]).scale(gamma)
        }
        Builtin::ChynowethSewell => {
            b(&[4, 5, 3]) + b(&[1, 2, 6]) - b(&[1, 2, 3]).scale(gamma)
        }
    };
    Ok(MAEquation {
        name: kind.name().to_string(),
        gamma: Some(gamma.clone()),
        omega,
    })
}

/// The linear symplectic map `φ(x, y, z, p, q, h) = (x, y, h, p, q, γh − z)`
/// with `φ*ω_CS = dp∧dq∧dh − dx∧dy∧dz`.
pub fn chynoweth_sewell_map(gamma: &Rational) -> LinearMap<Rational> {
    let one = || Rational::from_i64(1);
    let mut m = LinearMap::zero();
    m.m[0][0] = one();
    m.m[1][1] = one();
    m.m[2][5] = one();
    m.m[3][3] = one();
    m.m[4][4] = one();
    m.m[5][5] = gamma.clone();
    m.m[5][2] = -one();
    m
}

/// Columns of the Jacobian `[I; H]` of `x ↦ (x, ∇f(x))`.
fn section_columns(h: &M3) -> [Vector<f64>; 3] {
    std::array::from_fn(|j| {
        let mut v = [0.0; 6];
        v[j] = 1.0;
        for i in 0..3 {
            v[3 + i] = h[i][j];
        }
        Vector(v)
    })
}

/// Coefficient of `dx₁∧dx₂∧dx₃` in `(x, ∇f)*ω` for Hessian `h`.
pub fn residual_of_hessian(w: &Form<f64>, h: &M3) -> f64 {
    w.evaluate(&section_columns(h))
        .expect("3-form evaluated on 3 vectors")
}

pub fn residual(eq: &MAEquation, f: &dyn Solution, x: &P3) -> f64 {
    residual_of_hessian(&eq.float_form(), &hessian_of(f, x))
}

/// Jacobian columns `∂L/∂t_j`, exact or by central differences.
fn surface_columns(l: &dyn ParamSurface, t: &P3) -> [Vector<f64>; 3] {
    if let Some(j) = l.jacobian(t) {
        return std::array::from_fn(|c| Vector(std::array::from_fn(|r| j[r][c])));
    }
    let h = SURFACE_STEP;
    std::array::from_fn(|c| {
        let mut tp = *t;
        let mut tm = *t;
        tp[c] += h;
        tm[c] -= h;
        let (a, b) = (l.point(&tp), l.point(&tm));
        Vector(std::array::from_fn(|r| (a[r] - b[r]) / (2.0 * h)))
    })
}

const SURFACE_STEP: f64 = 1e-5;
const RANK_TOL: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GeneralizedReport {
    pub samples: usize,
    pub max_symplectic_defect: f64,
    pub max_form_defect: f64,
    /// Parameters at which the Jacobian has rank below 3.
    pub rank_deficient: Vec<P3>,
    pub tol: f64,
    pub passed: bool,
}

/// Pulls `Ω` and `ω` back along `L` at each sample.
pub fn check_generalized(
    eq: &MAEquation,
    l: &dyn ParamSurface,
    samples: &[P3],
    tol: f64,
) -> GeneralizedReport {
    let w = eq.float_form();
    let om: Form<f64> = omega();
    let mut max_sym = 0.0_f64;
    let mut max_form = 0.0_f64;
    let mut rank_deficient = Vec::new();
    for t in samples {
        let cols = surface_columns(l, t);
        let rows: Vec<Vec<f64>> = (0..6).map(|r| cols.iter().map(|c| c.0[r]).collect()).collect();
        let scale = rows.iter().flatten().fold(1.0_f64, |m, v| m.max(v.abs()));
        if crate::linalg::rank(&rows, RANK_TOL * scale) < 3 {
            rank_deficient.push(*t);
            continue;
        }
        for (a, b) in [(0, 1), (0, 2), (1, 2)] {
            let v = om.evaluate(&[cols[a].clone(), cols[b].clone()]).unwrap_or(f64::NAN);
            max_sym = max_sym.max(v.abs());
        }
        max_form = max_form.max(w.evaluate(&cols).unwrap_or(f64::NAN).abs());
    }
    GeneralizedReport {
        samples: samples.len(),
        max_symplectic_defect: max_sym,
        max_form_defect: max_form,
        passed: max_sym < tol && max_form < tol && rank_deficient.is_empty(),
        rank_deficient,
        tol,
    }
}

/// A form together with whether its coefficients are exact.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReportedForm {
    pub exact: bool,
    pub terms: Vec<(Vec<usize>, Number)>,
}

impl ReportedForm {
    pub fn exact(w: &Form<Rational>) -> Self {
        ReportedForm {
            exact: true,
            terms: w
                .terms()
                .map(|(m, c)| (crate::exterior::mono_indices(m), Number::Exact(c.clone())))
                .collect(),
        }
    }

    pub fn float(w: &Form<f64>) -> Self {
        ReportedForm {
            exact: false,
            terms: w
                .terms()
                .map(|(m, c)| (crate::exterior::mono_indices(m), Number::Float(*c)))
                .collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ReportedDecomposition {
    Hyperbolic {
        alpha: ReportedForm,
        beta: ReportedForm,
    },
    Elliptic {
        alpha_re: ReportedForm,
        alpha_im: ReportedForm,
    },
}

/// Measured normalization constants of the decomposition.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Identities {
    /// `α∧β/θ` (hyperbolic); expected `1`, from `α∧β = −Ω³/6`.
    pub alpha_beta_over_theta: Option<f64>,
    /// `r` with `Ω³ = r·α∧ᾱ` as `[re, im]` (elliptic); compared with `−3i/4`.
    pub omega3_over_alpha_alphabar: Option<[f64; 2]>,
    /// `ω∧ω̂/θ` for the normalized form.
    pub omega_dual_over_theta: f64,
    pub published_alpha_beta_over_theta: Option<f64>,
    pub published_omega3_over_alpha_alphabar: Option<[f64; 2]>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StructureReport {
    pub equation: String,
    pub gamma: Option<Number>,
    pub pde: String,
    pub lambda: Number,
    pub kind: &'static str,
    pub orbit: String,
    pub signature_qk: (usize, usize, usize),
    pub q_k: Vec<Vec<Number>>,
    pub normalized: ReportedForm,
    pub dual: ReportedForm,
    pub decomposition: ReportedDecomposition,
    pub identities: Identities,
}

const FLOAT_TOL: f64 = 1e-10;

fn identities_of<S: crate::RealScalar>(
    w: &Form<S>,
    d: &Decomposition<S>,
    dual: &Form<S>,
) -> Identities {
    let theta_ratio = |f: &Form<S>| f.top_coeff().to_f64();
    let om = omega::<S>();
    let om3 = om.wedge_unchecked(&om).wedge_unchecked(&om).top_coeff().to_f64();
    let omega_dual_over_theta = theta_ratio(&w.wedge_unchecked(dual));
    match d {
        Decomposition::Hyperbolic { alpha, beta } => Identities {
            alpha_beta_over_theta: Some(theta_ratio(&alpha.wedge_unchecked(beta))),
            omega3_over_alpha_alphabar: None,
            omega_dual_over_theta,
            published_alpha_beta_over_theta: Some(1.0),
            published_omega3_over_alpha_alphabar: None,
        },
        Decomposition::Elliptic { alpha } => {
            let aa = alpha.wedge_unchecked(&alpha.conj()).top_coeff();
            let (re, im) = (aa.re.to_f64(), aa.im.to_f64());
            // Ω³ / (re + i im)
            let n = re * re + im * im;
            Identities {
                alpha_beta_over_theta: None,
                omega3_over_alpha_alphabar: Some([om3 * re / n + 0.0, -om3 * im / n + 0.0]),
                omega_dual_over_theta,
                published_alpha_beta_over_theta: None,
                published_omega3_over_alpha_alphabar: Some([0.0, -0.75]),
            }
        }
    }
}

fn report_decomposition_exact(d: &Decomposition<Rational>) -> ReportedDecomposition {
    match d {
        Decomposition::Hyperbolic { alpha, beta } => ReportedDecomposition::Hyperbolic {
            alpha: ReportedForm::exact(alpha),
            beta: ReportedForm::exact(beta),
        },
        Decomposition::Elliptic { alpha } => ReportedDecomposition::Elliptic {
            alpha_re: ReportedForm::exact(&alpha.re()),
            alpha_im: ReportedForm::exact(&alpha.im()),
        },
    }
}

fn report_decomposition_float(d: &Decomposition<f64>) -> ReportedDecomposition {
    match d {
        Decomposition::Hyperbolic { alpha, beta } => ReportedDecomposition::Hyperbolic {
            alpha: ReportedForm::float(&alpha.chop(FLOAT_TOL)),
            beta: ReportedForm::float(&beta.chop(FLOAT_TOL)),
        },
        Decomposition::Elliptic { alpha } => ReportedDecomposition::Elliptic {
            alpha_re: ReportedForm::float(&alpha.re().chop(FLOAT_TOL)),
            alpha_im: ReportedForm::float(&alpha.im().chop(FLOAT_TOL)),
        },
    }
}

/// Classification, normalization, decomposition and dual of a constant
/// structure. Exact arithmetic is used whenever `|λ|^{1/4}` is rational.
pub fn geometric_structure(eq: &MAEquation) -> Result<StructureReport> {
    let w = &eq.omega;
    symplectic::require_effective(w)?;
    let class = hitchin::classify(w, 0.0)?;
    let lambda = class.lambda.clone();
    if lambda.is_zero() {
        return Err(Error::DegenerateStructure);
    }
    let k = hitchin::k_endomorphism(w)?;
    let q_k = hitchin::q_from_k(&k)
        .into_iter()
        .map(|r| r.into_iter().map(Number::Exact).collect())
        .collect();
    let norm = hitchin::normalize(w, 0.0)?;
    let (normalized, dual, decomposition, identities) = if norm.scaled {
        let n = norm.form;
        let d = hitchin::decompose(&n, 0.0)?;
        let dual = hitchin::dual_of(&d);
        let ids = identities_of(&n, &d, &dual);
        (
            ReportedForm::exact(&n),
            ReportedForm::exact(&dual),
            report_decomposition_exact(&d),
            ids,
        )
    } else {
        let n = w.to_float().scale(&to_float(&norm.factor4).powf(-0.25));
        let d = hitchin::decompose(&n, FLOAT_TOL)?;
        let dual = hitchin::dual_of(&d);
        let ids = identities_of(&n, &d, &dual);
        (
            ReportedForm::float(&n.chop(FLOAT_TOL)),
            ReportedForm::float(&dual.chop(FLOAT_TOL)),
            report_decomposition_float(&d),
            ids,
        )
    };
    Ok(StructureReport {
        equation: eq.name.clone(),
        gamma: eq.gamma.clone().map(Number::Exact),
        pde: eq.pde().to_string(),
        kind: if lambda > Rational::zero() {
            "hyperbolic"
        } else {
            "elliptic"
        },
        lambda: Number::Exact(lambda),
        orbit: class.orbit.to_string(),
        signature_qk: class.invariants.signature,
        q_k,
        normalized,
        dual,
        decomposition,
        identities,
    })
}
