//! Invariants of 3-forms on V: the endomorphism `K_ω`, the pfaffian
//! `λ(ω) = Tr(K_ω²)/6`, the quadratic invariants, the splitting into
//! decomposable summands, the dual form and the symplectic orbit classifier.
//!
//! `K_ω` is fixed by `ξ(K_ω X)·θ = ξ∧i_Xω∧ω` with `θ = −Ω³/6`; with this
//! sign `ω = e₁₂₃ + f₁₂₃` has `K = diag(1,1,1,−1,−1,−1)`.

use std::fmt;

use num_complex::Complex;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exterior::{Form, LinearMap, Vector, DIM};
use crate::linalg;
use crate::scalar::{Rational, RealScalar, Scalar};
use crate::symplectic::{self, bot, omega_matrix};

/// Symmetric 6×6 matrix of a bilinear form on V.
pub type SymMatrix<S> = Vec<Vec<S>>;

#[derive(Clone, Debug, PartialEq)]
pub struct HitchinData<S> {
    pub k: LinearMap<S>,
    pub lambda: S,
    /// `qK(X, Y) = Ω(KX, Y)`.
    pub q_k: SymMatrix<S>,
    /// `qLR(X, Y) = −⅛·⊥²(i_Xω∧i_Yω + i_Yω∧i_Xω)`.
    pub q_lr: SymMatrix<S>,
}

fn require_degree3<S: Scalar>(w: &Form<S>) -> Result<()> {
    if w.degree() != 3 {
        return Err(Error::WrongDegree {
            expected: 3,
            found: w.degree(),
        });
    }
    Ok(())
}

/// The endomorphism `K_ω`, with matrix entry `K[k][j]` read off from
/// `b_k*∧i_{b_j}ω∧ω = K[k][j]·θ`.
pub fn k_endomorphism<S: Scalar>(w: &Form<S>) -> Result<LinearMap<S>> {
    require_degree3(w)?;
    let mut k = LinearMap::zero();
    for j in 0..DIM {
        let five = w.interior_basis(j + 1)?.wedge(w)?;
        for (row, entry) in k.m.iter_mut().enumerate() {
            let top = Form::basis(&[row + 1]).wedge(&five)?;
            entry[j] = top.top_coeff();
        }
    }
    Ok(k)
}

/// Hitchin pfaffian `λ(ω) = Tr(K_ω²)/6`.
pub fn pfaffian<S: Scalar>(w: &Form<S>) -> Result<S> {
    let k = k_endomorphism(w)?;
    Ok(k.compose(&k).trace() / S::from_i64(6))
}

/// `qK = Kᵀ J`, i.e. `qK[i][j] = Ω(K bᵢ, bⱼ)`.
pub fn q_from_k<S: Scalar>(k: &LinearMap<S>) -> SymMatrix<S> {
    k.transpose().compose(&omega_matrix()).to_rows()
}

/// The ⊥² invariant, polarized.
pub fn q_lychagin_roubtsov<S: Scalar>(w: &Form<S>) -> Result<SymMatrix<S>> {
    require_degree3(w)?;
    let contractions: Vec<Form<S>> = (1..=DIM)
        .map(|i| w.interior_basis(i))
        .collect::<Result<_>>()?;
    let eighth = -S::one() / S::from_i64(8);
    let mut q = vec![vec![S::zero(); DIM]; DIM];
    for i in 0..DIM {
        for j in i..DIM {
            let sym = contractions[i].wedge(&contractions[j])?
                + contractions[j].wedge(&contractions[i])?;
            let v = bot(&bot(&sym)).coeff(&[]) * eighth.clone();
            q[i][j] = v.clone();
            q[j][i] = v;
        }
    }
    Ok(q)
}

/// `qK` and `qLR` for an effective 3-form.
pub fn quadratic_invariants<S: Scalar>(w: &Form<S>) -> Result<(SymMatrix<S>, SymMatrix<S>)> {
    require_degree3(w)?;
    symplectic::require_effective(w)?;
    let k = k_endomorphism(w)?;
    Ok((q_from_k(&k), q_lychagin_roubtsov(w)?))
}

pub fn hitchin_data<S: Scalar>(w: &Form<S>) -> Result<HitchinData<S>> {
    let k = k_endomorphism(w)?;
    let lambda = k.compose(&k).trace() / S::from_i64(6);
    let q_k = q_from_k(&k);
    let q_lr = q_lychagin_roubtsov(w)?;
    Ok(HitchinData {
        k,
        lambda,
        q_k,
        q_lr,
    })
}

/// Inertia `(p, n, z)` of a symmetric matrix, computed by congruence.
pub fn signature<S: RealScalar>(q: &[Vec<S>], tol: f64) -> Result<(usize, usize, usize)> {
    linalg::inertia(q, tol)
}

/// Dimension of `{X : i_X a = 0}`.
pub fn annihilator_dim<S: Scalar>(a: &Form<S>, tol: f64) -> usize {
    DIM - linalg::rank(&contraction_matrix(a), tol)
}

/// Basis of `{X : i_X a = 0}`.
pub fn annihilator<S: Scalar>(a: &Form<S>, tol: f64) -> Vec<Vector<S>> {
    linalg::kernel(&contraction_matrix(a), tol)
        .into_iter()
        .map(|v| Vector::from_slice(&v))
        .collect()
}

fn contraction_matrix<S: Scalar>(a: &Form<S>) -> Vec<Vec<S>> {
    if a.degree() == 0 {
        return vec![vec![S::zero(); DIM]];
    }
    let monos = crate::exterior::monomials(a.degree() - 1);
    let cols: Vec<Form<S>> = (1..=DIM)
        .map(|i| a.interior_basis(i).expect("degree >= 1"))
        .collect();
    monos
        .iter()
        .map(|m| cols.iter().map(|c| c.coeff_mono(*m)).collect())
        .collect()
}

/// True when `Ω` vanishes on the span of `vs` (complex-bilinearly for
/// complex vectors).
pub fn is_isotropic<S: Scalar>(vs: &[Vector<S>], tol: f64) -> bool {
    vs.iter().all(|x| {
        vs.iter()
            .all(|y| symplectic::omega_pairing(x, y).is_negligible(tol))
    })
}

/// The splitting of a nondegenerate 3-form into decomposable summands.
#[derive(Clone, Debug, PartialEq)]
pub enum Decomposition<S: RealScalar> {
    /// `ω = α + β`, `α∧β/θ > 0`.
    Hyperbolic { alpha: Form<S>, beta: Form<S> },
    /// `ω = α + ᾱ`, `α∧ᾱ/(iθ) > 0`.
    Elliptic { alpha: Form<Complex<S>> },
}

impl<S: RealScalar> Decomposition<S> {
    pub fn is_hyperbolic(&self) -> bool {
        matches!(self, Decomposition::Hyperbolic { .. })
    }
}

/// `|λ|^{-3/2}` when it exists in the field.
fn inverse_three_halves<S: RealScalar>(lambda: &S) -> Result<S> {
    let abs = lambda.abs_val();
    let root = abs
        .sqrt_checked()
        .ok_or_else(|| Error::Irrational(format!("{lambda:?}")))?;
    Ok(S::one() / (abs * root))
}

fn check_nondegenerate<S: RealScalar>(lambda: &S, tol: f64) -> Result<()> {
    if lambda.is_negligible(tol) {
        Err(Error::Degenerate)
    } else {
        Ok(())
    }
}

/// Splits `ω` using `2α = ω ± |λ|^{-3/2}K*ω` (hyperbolic) or
/// `α = ½(ω + i|λ|^{-3/2}K*ω)` (elliptic), oriented as documented on
/// [`Decomposition`]. Exact forms need `√|λ|` rational.
pub fn decompose<S: RealScalar>(w: &Form<S>, tol: f64) -> Result<Decomposition<S>> {
    let k = k_endomorphism(w)?;
    let lambda = k.compose(&k).trace() / S::from_i64(6);
    check_nondegenerate(&lambda, tol)?;
    let mu = inverse_three_halves(&lambda)?;
    let kw = w.pullback(&k).scale(&mu);
    let half = S::one() / S::from_i64(2);
    if lambda > S::zero() {
        let a = (w + &kw).scale(&half);
        let b = (w - &kw).scale(&half);
        let orient = a.wedge(&b)?.top_coeff();
        if orient < S::zero() {
            Ok(Decomposition::Hyperbolic { alpha: b, beta: a })
        } else {
            Ok(Decomposition::Hyperbolic { alpha: a, beta: b })
        }
    } else {
        let half_c = Complex::new(half, S::zero());
        let alpha = Form::from_parts(w, &kw).scale(&half_c);
        // α∧ᾱ/(iθ) = Im(top coefficient of α∧ᾱ)
        let orient = alpha.wedge(&alpha.conj())?.top_coeff().im;
        if orient < S::zero() {
            Ok(Decomposition::Elliptic {
                alpha: alpha.conj(),
            })
        } else {
            Ok(Decomposition::Elliptic { alpha })
        }
    }
}

/// `ω̂ = α − β` (hyperbolic) or `ω̂ = i(ᾱ − α) = 2 Im α` (elliptic).
pub fn dual<S: RealScalar>(w: &Form<S>, tol: f64) -> Result<Form<S>> {
    Ok(dual_of(&decompose(w, tol)?))
}

pub fn dual_of<S: RealScalar>(d: &Decomposition<S>) -> Form<S> {
    match d {
        Decomposition::Hyperbolic { alpha, beta } => alpha - beta,
        Decomposition::Elliptic { alpha } => alpha.im().scale(&S::from_i64(2)),
    }
}

/// Result of [`normalize`]. When `scaled` is false the fourth root of
/// `factor4 = |λ|` is irrational and `form` is the input, still to be
/// divided by `factor4^{1/4}`.
#[derive(Clone, Debug, PartialEq)]
pub struct Normalized<S> {
    pub form: Form<S>,
    pub factor4: S,
    pub scaled: bool,
}

/// `ω / |λ(ω)|^{1/4}`.
pub fn normalize<S: RealScalar>(w: &Form<S>, tol: f64) -> Result<Normalized<S>> {
    let lambda = pfaffian(w)?;
    check_nondegenerate(&lambda, tol)?;
    let abs = lambda.abs_val();
    match abs.sqrt_checked().and_then(|r| r.sqrt_checked()) {
        Some(root) => Ok(Normalized {
            form: w.scale(&(S::one() / root)),
            factor4: abs,
            scaled: true,
        }),
        None => Ok(Normalized {
            form: w.clone(),
            factor4: abs,
            scaled: false,
        }),
    }
}

/// Float normalization, always scaled.
pub fn normalize_float(w: &Form<f64>, tol: f64) -> Result<Form<f64>> {
    Ok(normalize(w, tol)?.form)
}

/// Rows of the table of symplectic orbits of effective 3-forms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Row {
    Row1,
    Row2,
    Row3,
    Row4,
    Row5,
    Row6,
    Row7,
    Row8,
    Row9,
}

impl Row {
    pub const ALL: [Row; 9] = [
        Row::Row1,
        Row::Row2,
        Row::Row3,
        Row::Row4,
        Row::Row5,
        Row::Row6,
        Row::Row7,
        Row::Row8,
        Row::Row9,
    ];

    pub fn number(self) -> usize {
        self as usize + 1
    }

    pub fn from_number(n: usize) -> Option<Row> {
        Row::ALL.get(n.wrapping_sub(1)).copied()
    }

    pub fn has_parameter(self) -> bool {
        matches!(self, Row::Row1 | Row::Row2 | Row::Row3)
    }

    /// Signature of `qK` on the representative, as computed with the
    /// conventions of this module.
    pub fn q_signature(self) -> (usize, usize, usize) {
        match self {
            Row::Row1 => (3, 3, 0),
            Row::Row2 => (4, 2, 0),
            Row::Row3 => (0, 6, 0),
            Row::Row4 => (2, 1, 3),
            Row::Row5 => (0, 3, 3),
            Row::Row6 => (1, 0, 5),
            Row::Row7 => (0, 1, 5),
            Row::Row8 | Row::Row9 => (0, 0, 6),
        }
    }
}

impl fmt::Display for Row {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Row{}", self.number())
    }
}

/// Representative of a table row; `gamma` is ignored for rows 4–9.
pub fn representative<S: Scalar>(row: Row, gamma: &S) -> Form<S> {
    let b = |idx: &[usize]| Form::<S>::basis(idx);
    let g2 = gamma.clone() * gamma.clone();
    match row {
        Row::Row1 => b(&[1, 2, 3]) + b(&[4, 5, 6]).scale(gamma),
        Row::Row2 => {
            b(&[4, 2, 3]) + b(&[5, 1, 3]) + b(&[6, 1, 2]) + b(&[4, 5, 6]).scale(&g2)
        }
        Row::Row3 => {
            b(&[4, 2, 3]) - b(&[5, 1, 3]) + b(&[6, 1, 2]) - b(&[4, 5, 6]).scale(&g2)
        }
        Row::Row4 => b(&[4, 2, 3]) + b(&[5, 1, 3]) + b(&[6, 1, 2]),
        Row::Row5 => b(&[4, 2, 3]) - b(&[5, 1, 3]) + b(&[6, 1, 2]),
        Row::Row6 => b(&[6, 1, 2]) + b(&[5, 1, 3]),
        Row::Row7 => b(&[6, 1, 2]) - b(&[5, 1, 3]),
        Row::Row8 => b(&[1, 2, 3]),
        Row::Row9 => Form::zero(3),
    }
}

/// Outcome of the classifier.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Orbit {
    Row(Row),
    /// Invariants of a listed row with the `qK` signature mirrored
    /// (`(p, n)` swapped).
    SignVariant(Row),
    Unclassified,
}

impl fmt::Display for Orbit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Orbit::Row(r) => write!(f, "{r}"),
            Orbit::SignVariant(r) => write!(f, "SignVariant({r})"),
            Orbit::Unclassified => write!(f, "Unclassified"),
        }
    }
}

/// Sp(6)-invariants the classifier reads.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OrbitInvariants {
    pub lambda_sign: i32,
    pub signature: (usize, usize, usize),
    pub annihilator_dim: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Classification<S> {
    pub orbit: Orbit,
    pub invariants: OrbitInvariants,
    pub lambda: S,
}

fn match_signature(sig: (usize, usize, usize), rows: &[Row]) -> Option<Orbit> {
    for &r in rows {
        let (p, n, z) = r.q_signature();
        if sig == (p, n, z) {
            return Some(Orbit::Row(r));
        }
    }
    for &r in rows {
        let (p, n, z) = r.q_signature();
        if sig == (n, p, z) {
            return Some(Orbit::SignVariant(r));
        }
    }
    None
}

/// Classifies an effective 3-form by `(sign λ, signature qK, dim ann ω)`.
pub fn classify<S: RealScalar>(w: &Form<S>, tol: f64) -> Result<Classification<S>> {
    require_degree3(w)?;
    symplectic::require_effective(w)?;
    let k = k_endomorphism(w)?;
    let lambda = k.compose(&k).trace() / S::from_i64(6);
    let q = q_from_k(&k);
    let signature = linalg::inertia(&q, tol)?;
    let ann = annihilator_dim(w, tol);
    let lambda_sign = lambda.sign(tol);
    let invariants = OrbitInvariants {
        lambda_sign,
        signature,
        annihilator_dim: ann,
    };
    let orbit = if w.is_negligible(tol) {
        Orbit::Row(Row::Row9)
    } else if ann == 3 && signature == (0, 0, 6) {
        Orbit::Row(Row::Row8)
    } else if lambda_sign > 0 {
        match_signature(signature, &[Row::Row1]).unwrap_or(Orbit::Unclassified)
    } else if lambda_sign < 0 {
        match_signature(signature, &[Row::Row2, Row::Row3]).unwrap_or(Orbit::Unclassified)
    } else {
        match_signature(signature, &[Row::Row4, Row::Row5, Row::Row6, Row::Row7])
            .unwrap_or(Orbit::Unclassified)
    };
    Ok(Classification {
        orbit,
        invariants,
        lambda,
    })
}

/// `q = c·qLR` constant relating the two quadratic invariants.
pub fn proportionality_constant<S: Scalar>(q_k: &[Vec<S>], q_lr: &[Vec<S>]) -> Option<S> {
    let mut c: Option<S> = None;
    for (rk, rl) in q_k.iter().zip(q_lr) {
        for (a, b) in rk.iter().zip(rl) {
            if b.is_zero() {
                if !a.is_zero() {
                    return None;
                }
                continue;
            }
            let r = a.clone() / b.clone();
            match &c {
                None => c = Some(r),
                Some(prev) if *prev != r => return None,
                _ => {}
            }
        }
    }
    c
}

/// Convention constant: `qK = 2·qLR` for every effective 3-form.
pub fn q_constant() -> Rational {
    Rational::from_i64(Q_CONSTANT)
}

pub const Q_CONSTANT: i64 = 2;

#[cfg(test)]
mod tests {
    use super::*;

    type F = Form<Rational>;

    fn q(n: i64) -> Rational {
        Rational::from_i64(n)
    }

    fn e123_f123() -> F {
        F::basis(&[1, 2, 3]) + F::basis(&[4, 5, 6])
    }

    #[test]
    fn k_of_split_form() {
        let k = k_endomorphism(&e123_f123()).unwrap();
        assert_eq!(k, LinearMap::diag([q(1), q(1), q(1), q(-1), q(-1), q(-1)]));
    }

    #[test]
    fn k_of_zero_and_decomposable() {
        assert_eq!(k_endomorphism(&F::zero(3)).unwrap(), LinearMap::zero());
        assert_eq!(
            k_endomorphism(&F::basis(&[1, 2, 3])).unwrap(),
            LinearMap::zero()
        );
        assert!(k_endomorphism(&F::basis(&[1, 2])).is_err());
    }

    #[test]
    fn pfaffian_examples() {
        assert_eq!(pfaffian(&F::zero(3)).unwrap(), q(0));
        assert_eq!(pfaffian(&e123_f123()).unwrap(), q(1));
        assert!(pfaffian(&representative(Row::Row2, &q(1))).unwrap() < q(0));
    }

    #[test]
    fn k_contraction_law() {
        let w = representative(Row::Row3, &q(2)) + F::basis(&[1, 2, 6]);
        let k = k_endomorphism(&w).unwrap();
        let x = Vector::from_slice(&[q(1), q(-2), q(3), q(0), q(1), q(5)]);
        let xi = Vector::from_slice(&[q(2), q(1), q(0), q(-1), q(3), q(1)]);
        let lhs: Rational = xi
            .0
            .iter()
            .zip(k.apply(&x).0.iter())
            .fold(q(0), |acc, (a, b)| acc + a * b);
        let rhs = Form::covector(&xi)
            .wedge(&w.interior(&x).unwrap())
            .unwrap()
            .wedge(&w)
            .unwrap()
            .top_coeff();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn quadratic_invariants_examples() {
        let (qk, qlr) = quadratic_invariants(&F::zero(3)).unwrap();
        assert!(qk.iter().flatten().all(|x| *x == q(0)));
        assert!(qlr.iter().flatten().all(|x| *x == q(0)));
        assert_eq!(
            quadratic_invariants(&F::basis(&[1, 2, 4])),
            Err(Error::NotEffective)
        );
        let gamma = q(3);
        let (qk, qlr) = quadratic_invariants(&representative(Row::Row1, &gamma)).unwrap();
        for i in 0..3 {
            assert_eq!(qk[i][i + 3], gamma);
            assert_eq!(qlr[i][i + 3], gamma.clone() / q(2));
        }
        assert_eq!(signature(&qk, 0.0).unwrap(), (3, 3, 0));
    }

    #[test]
    fn special_lagrangian_is_negative_definite() {
        let w = representative(Row::Row3, &q(1));
        let (qk, _) = quadratic_invariants(&w).unwrap();
        assert_eq!(signature(&qk, 0.0).unwrap(), (0, 6, 0));
    }

    #[test]
    fn decompose_split_forms() {
        let d = decompose(&e123_f123(), 0.0).unwrap();
        assert_eq!(
            d,
            Decomposition::Hyperbolic {
                alpha: F::basis(&[1, 2, 3]),
                beta: F::basis(&[4, 5, 6])
            }
        );
        let w = F::basis(&[1, 2, 3]) + F::basis(&[4, 5, 6]).scale(&q(8));
        let d = decompose(&w, 0.0).unwrap();
        assert_eq!(
            d,
            Decomposition::Hyperbolic {
                alpha: F::basis(&[1, 2, 3]),
                beta: F::basis(&[4, 5, 6]).scale(&q(8))
            }
        );
        assert_eq!(decompose(&F::basis(&[1, 2, 3]), 0.0), Err(Error::Degenerate));
    }

    #[test]
    fn dual_examples() {
        assert_eq!(
            dual(&e123_f123(), 0.0).unwrap(),
            F::basis(&[1, 2, 3]) - F::basis(&[4, 5, 6])
        );
        let w = e123_f123();
        let wd = dual(&w, 0.0).unwrap();
        assert_eq!(
            w.wedge(&wd).unwrap(),
            symplectic::theta::<Rational>().scale(&q(-2))
        );
        assert_eq!(dual(&wd, 0.0).unwrap(), -w);
    }

    #[test]
    fn normalize_examples() {
        // λ(2ω) = 16 λ(ω)
        let w = e123_f123().scale(&q(2));
        assert_eq!(pfaffian(&w).unwrap(), q(16));
        assert_eq!(normalize(&w, 0.0).unwrap().form, e123_f123());
        assert_eq!(normalize(&e123_f123(), 0.0).unwrap().form, e123_f123());
        let irr = representative(Row::Row1, &q(2));
        let n = normalize(&irr, 0.0).unwrap();
        assert!(!n.scaled);
        assert_eq!(n.factor4, q(4));
    }

    #[test]
    fn classify_examples() {
        let c = classify(&representative(Row::Row1, &q(2)), 0.0).unwrap();
        assert_eq!(c.orbit, Orbit::Row(Row::Row1));
        let c = classify(&representative(Row::Row5, &q(1)), 0.0).unwrap();
        assert_eq!(c.orbit, Orbit::Row(Row::Row5));
        assert_eq!(c.invariants.signature, (0, 3, 3));
        let c = classify(&F::basis(&[1, 2, 3]), 0.0).unwrap();
        assert_eq!(c.orbit, Orbit::Row(Row::Row8));
        let c = classify(&F::zero(3), 0.0).unwrap();
        assert_eq!(c.orbit, Orbit::Row(Row::Row9));
        assert!(classify(&F::basis(&[1, 4]), 0.0).is_err());
    }
}

