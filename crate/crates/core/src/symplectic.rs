//! The standard symplectic structure on V and the Lefschetz-type operators
//! `⊤ = ·∧Ω` and `⊥ = i_{X_Ω}`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::exterior::{Form, LinearMap, Vector, DIM};
use crate::scalar::{Rational, Scalar};

/// Index pairs `(eᵢ, fᵢ)` of the bivector `X_Ω = Σ eᵢ∧fᵢ`, all with sign +1.
pub const X_OMEGA: [(usize, usize, i8); 3] = [(1, 4, 1), (2, 5, 1), (3, 6, 1)];

/// Tolerance for effectiveness of float forms.
pub const FLOAT_EFFECTIVE_TOL: f64 = 1e-10;

/// The canonical Darboux frame: `Ω`, the volume `θ = −Ω³/6` and `X_Ω`.
#[derive(Clone, Debug)]
pub struct SymplecticFrame<S> {
    pub omega: Form<S>,
    pub theta: Form<S>,
    pub bivector: [(usize, usize, i8); 3],
}

impl<S: Scalar> SymplecticFrame<S> {
    pub fn standard() -> Self {
        let omega = omega::<S>();
        let cube = omega.wedge_unchecked(&omega).wedge_unchecked(&omega);
        let theta = cube.scale(&(-S::one() / S::from_i64(6)));
        SymplecticFrame {
            omega,
            theta,
            bivector: X_OMEGA,
        }
    }
}

/// `Ω = e₁*∧f₁* + e₂*∧f₂* + e₃*∧f₃*`.
pub fn omega<S: Scalar>() -> Form<S> {
    X_OMEGA
        .iter()
        .fold(Form::zero(2), |acc, &(e, f, _)| acc + Form::basis(&[e, f]))
}

/// The volume form `θ = −Ω³/6`, equal to `e₁*∧e₂*∧e₃*∧f₁*∧f₂*∧f₃*`.
pub fn theta<S: Scalar>() -> Form<S> {
    SymplecticFrame::<S>::standard().theta
}

/// Matrix `J` with `Ω(X, Y) = Xᵀ J Y`.
pub fn omega_matrix<S: Scalar>() -> LinearMap<S> {
    let mut j = LinearMap::zero();
    for i in 0..3 {
        j.m[i][i + 3] = S::one();
        j.m[i + 3][i] = -S::one();
    }
    j
}

/// `Ω(X, Y)`.
pub fn omega_pairing<S: Scalar>(x: &Vector<S>, y: &Vector<S>) -> S {
    (0..3).fold(S::zero(), |acc, i| {
        acc + x.0[i].clone() * y.0[i + 3].clone() - x.0[i + 3].clone() * y.0[i].clone()
    })
}

/// `⊤a = a∧Ω`.
pub fn top<S: Scalar>(a: &Form<S>) -> Result<Form<S>> {
    a.wedge(&omega())
}

/// `⊥a = i_{X_Ω} a` with `i_{X∧Y} = i_Y ∘ i_X`, so that `⊥Ω = 3`.
/// For degrees 0 and 1 the result is the zero scalar.
pub fn bot<S: Scalar>(a: &Form<S>) -> Form<S> {
    if a.degree() < 2 {
        return Form::zero(0);
    }
    let mut out = Form::zero(a.degree() - 2);
    for &(e, f, _) in &X_OMEGA {
        let inner = a.interior_basis(e).expect("degree >= 2");
        out = out + inner.interior_basis(f).expect("degree >= 1");
    }
    out
}

/// `[⊥,⊤]a = ⊥⊤a − ⊤⊥a`, defined for degrees `0..=4`.
pub fn commutator<S: Scalar>(a: &Form<S>) -> Result<Form<S>> {
    let bt = bot(&top(a)?);
    if a.degree() < 2 {
        return Ok(bt);
    }
    Ok(bt - top(&bot(a))?)
}

/// `⊥a = 0`. In degree 3 this is cross-checked against `a∧Ω = 0`.
pub fn is_effective<S: Scalar>(a: &Form<S>) -> bool {
    let tol = if S::EXACT { 0.0 } else { FLOAT_EFFECTIVE_TOL };
    let by_bot = bot(a).is_negligible(tol);
    if a.degree() == 3 {
        let by_wedge = top(a).expect("3 + 2 <= 6").is_negligible(tol * 10.0);
        debug_assert_eq!(by_bot, by_wedge, "⊥ and ∧Ω effectiveness tests disagree");
        return by_bot && by_wedge;
    }
    by_bot
}

/// Decomposition `a = ω₀ + ⊤ω₁ + ⊤²ω₂ + …` into effective components.
///
/// Back-substitution from the top power: for effective `ω` of degree `d`,
/// `⊥⊤ʲω = j(3 − d − j + 1)⊤ʲ⁻¹ω`, so `⊥ᵐ` kills every `⊤ⁱωᵢ` with `i < m`
/// and maps `⊤ᵐωₘ` to `∏ⱼ j(4 − d − j) · ωₘ`. A vanishing product means
/// `⊤ᵐ` annihilates effective forms of that degree and the component is 0.
/// In degree 3 this reduces to `ω₁ = ⊥a/2`, `ω₀ = a − ⊤ω₁`.
///
/// Trailing zero components are trimmed; the result has at least one entry.
pub fn hodge_lepage<S: Scalar>(a: &Form<S>) -> Vec<Form<S>> {
    let k = a.degree();
    let max_m = k / 2;
    let mut rest = a.clone();
    let mut comps: Vec<Form<S>> = (0..=max_m).map(|m| Form::zero(k - 2 * m)).collect();
    for m in (1..=max_m).rev() {
        let d = (k - 2 * m) as i64;
        let coef = (1..=m as i64).fold(1i64, |acc, j| acc * j * (4 - d - j));
        if coef == 0 {
            continue;
        }
        let mut b = rest.clone();
        for _ in 0..m {
            b = bot(&b);
        }
        let wm = b.scale(&(S::one() / S::from_i64(coef)));
        let mut lifted = wm.clone();
        for _ in 0..m {
            lifted = top(&lifted).expect("degree stays <= 6");
        }
        rest = rest - lifted;
        comps[m] = wm;
    }
    comps[0] = rest;
    while comps.len() > 1 && comps.last().is_some_and(|c| c.is_zero()) {
        comps.pop();
    }
    comps
}

/// Sum `Σ ⊤ⁱωᵢ` of a decomposition.
pub fn reassemble<S: Scalar>(comps: &[Form<S>]) -> Form<S> {
    let mut total = comps[0].clone();
    for (i, c) in comps.iter().enumerate().skip(1) {
        let mut lifted = c.clone();
        for _ in 0..i {
            lifted = top(&lifted).expect("degree stays <= 6");
        }
        total = total + lifted;
    }
    total
}

/// `MᵀJM = J`.
pub fn is_symplectic<S: Scalar>(m: &LinearMap<S>, tol: f64) -> bool {
    let j = omega_matrix::<S>();
    let lhs = m.transpose().compose(&j).compose(m);
    lhs.sub(&j).m.iter().flatten().all(|x| x.is_negligible(tol))
}

/// `K ∈ sp(6)`: `Ω(KX, Y) + Ω(X, KY) = 0`, i.e. `KᵀJ + JK = 0`.
pub fn in_sp6<S: Scalar>(k: &LinearMap<S>, tol: f64) -> bool {
    let j = omega_matrix::<S>();
    let a = k.transpose().compose(&j);
    let b = j.compose(k);
    let sum = LinearMap {
        m: std::array::from_fn(|r| std::array::from_fn(|c| a.m[r][c].clone() + b.m[r][c].clone())),
    };
    sum.m.iter().flatten().all(|x| x.is_negligible(tol))
}

/// Inverse of a symplectic matrix, `M⁻¹ = −J Mᵀ J`.
pub fn symplectic_inverse<S: Scalar>(m: &LinearMap<S>) -> LinearMap<S> {
    let j = omega_matrix::<S>();
    j.compose(&m.transpose()).compose(&j).scale(&-S::one())
}

fn small_rational(rng: &mut ChaCha8Rng) -> Rational {
    let mut n = 0;
    while n == 0 {
        n = rng.gen_range(-3i64..=3);
    }
    let d = rng.gen_range(1i64..=3);
    Rational::from_ratio(n, d)
}

/// Random exact symplectic matrix: a product of `depth` elementary factors
/// (symmetric shears in both directions and `diag(A, A⁻ᵀ)` blocks) with
/// small rational parameters. Depth 0 is the identity.
pub fn random_symplectic(seed: u64, depth: usize) -> LinearMap<Rational> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_symplectic_with(&mut rng, depth)
}

pub fn random_symplectic_with(rng: &mut ChaCha8Rng, depth: usize) -> LinearMap<Rational> {
    let mut m = LinearMap::<Rational>::identity();
    for _ in 0..depth {
        let t = small_rational(rng);
        let i = rng.gen_range(0..3usize);
        let j = rng.gen_range(0..3usize);
        let mut g = LinearMap::<Rational>::identity();
        match rng.gen_range(0..4u8) {
            0 => {
                g.m[3 + i][j] = t.clone();
                g.m[3 + j][i] = t;
            }
            1 => {
                g.m[i][3 + j] = t.clone();
                g.m[j][3 + i] = t;
            }
            2 if i != j => {
                // A = I + t E_ij, A⁻ᵀ = I − t E_ji
                g.m[i][j] = t.clone();
                g.m[3 + j][3 + i] = -t;
            }
            _ => {
                let s = t.clone() * t + Rational::from_i64(1);
                g.m[i][i] = s.clone();
                g.m[3 + i][3 + i] = Rational::from_i64(1) / s;
            }
        }
        m = m.compose(&g);
    }
    m
}

/// A basis vector list `b₁..b₆`, convenience for matrix-building loops.
pub fn basis_vectors<S: Scalar>() -> Vec<Vector<S>> {
    (1..=DIM).map(Vector::basis).collect()
}

/// Checks `pullback(M, Ω) = Ω`.
pub fn preserves_omega<S: Scalar>(m: &LinearMap<S>, tol: f64) -> bool {
    (omega::<S>().pullback(m) - omega::<S>()).is_negligible(tol)
}

pub fn require_effective<S: Scalar>(a: &Form<S>) -> Result<()> {
    if is_effective(a) {
        Ok(())
    } else {
        Err(Error::NotEffective)
    }
}
