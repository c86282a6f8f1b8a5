//! Exterior algebra of the fixed 6-dimensional space V.
//!
//! The basis is `(e₁,e₂,e₃,f₁,f₂,f₃)`, numbered `1..=6`. A monomial
//! `b_{i₁}*∧…∧b_{i_k}*` with `i₁ < … < i_k` is stored as the bitmask with
//! bit `i-1` set for every index `i`.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::linalg;
use crate::scalar::{RealScalar, Scalar};

pub const DIM: usize = 6;

/// Bitmask of a sorted index tuple.
pub type Mono = u8;

/// Binomial coefficient C(6, k).
pub fn space_dim(k: usize) -> usize {
    (0..=0x3fu8).filter(|m| m.count_ones() as usize == k).count()
}

/// All monomials of degree `k`, in lexicographic order of their index tuples.
pub fn monomials(k: usize) -> Vec<Mono> {
    let mut v: Vec<Mono> = (0..=0x3fu8)
        .filter(|m| m.count_ones() as usize == k)
        .collect();
    v.sort_by_key(|m| mono_indices(*m));
    v
}

/// 1-based indices of a monomial.
pub fn mono_indices(m: Mono) -> Vec<usize> {
    (0..DIM).filter(|b| m & (1 << b) != 0).map(|b| b + 1).collect()
}

/// Validates a strictly increasing 1-based tuple and converts it to a mask.
pub fn mono_from_indices(idx: &[usize]) -> Result<Mono> {
    let mut m: Mono = 0;
    let mut prev = 0;
    for &i in idx {
        if i <= prev || i > DIM {
            return Err(Error::BadIndex(idx.to_vec()));
        }
        m |= 1 << (i - 1);
        prev = i;
    }
    Ok(m)
}

/// Sign of the shuffle that sorts the concatenation of two disjoint monomials.
fn shuffle_sign(a: Mono, b: Mono) -> bool {
    let mut inversions = 0;
    for j in 0..DIM {
        if b & (1 << j) != 0 {
            inversions += (a >> (j + 1)).count_ones();
        }
    }
    inversions % 2 == 1
}

/// A homogeneous exterior form with coefficients in `S`.
///
/// Zero coefficients are never stored, so structural equality is equality
/// of forms in exact mode.
#[derive(Clone, PartialEq)]
pub struct Form<S> {
    degree: usize,
    terms: BTreeMap<Mono, S>,
}

impl<S: Scalar> Form<S> {
    pub fn zero(degree: usize) -> Self {
        assert!(degree <= DIM, "form degree {degree} > 6");
        Form {
            degree,
            terms: BTreeMap::new(),
        }
    }

    pub fn scalar(c: S) -> Self {
        let mut f = Form::zero(0);
        f.add_term(0, c);
        f
    }

    pub fn one() -> Self {
        Self::scalar(S::one())
    }

    /// The monomial `b_{i₁}*∧…∧b_{i_k}*` for 1-based indices in any order;
    /// repeated indices give the zero form.
    pub fn basis(idx: &[usize]) -> Self {
        let mut f = Form::one();
        for &i in idx {
            assert!((1..=DIM).contains(&i), "basis index {i} out of range");
            f = f.wedge_unchecked(&Form::from_mono(1 << (i - 1), S::one()));
        }
        f
    }

    pub fn from_mono(m: Mono, c: S) -> Self {
        let mut f = Form::zero(m.count_ones() as usize);
        f.add_term(m, c);
        f
    }

    /// Builds a form from `(sorted index tuple, coefficient)` pairs.
    pub fn from_terms<I>(degree: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<usize>, S)>,
    {
        if degree > DIM {
            return Err(Error::DegreeOverflow(degree));
        }
        let mut f = Form::zero(degree);
        for (idx, c) in terms {
            if idx.len() != degree {
                return Err(Error::IndexArity(idx, degree));
            }
            let m = mono_from_indices(&idx)?;
            f.add_term(m, c);
        }
        Ok(f)
    }

    /// A 1-form `Σ cᵢ bᵢ*`.
    pub fn covector(c: &Vector<S>) -> Self {
        let mut f = Form::zero(1);
        for (i, ci) in c.0.iter().enumerate() {
            f.add_term(1 << i, ci.clone());
        }
        f
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (Mono, &S)> + '_ {
        self.terms.iter().map(|(m, c)| (*m, c))
    }

    pub fn coeff_mono(&self, m: Mono) -> S {
        self.terms.get(&m).cloned().unwrap_or_else(S::zero)
    }

    /// Coefficient of a sorted 1-based index tuple.
    pub fn coeff(&self, idx: &[usize]) -> S {
        match mono_from_indices(idx) {
            Ok(m) => self.coeff_mono(m),
            Err(_) => S::zero(),
        }
    }

    /// Coefficient of the top monomial, for 6-forms.
    pub fn top_coeff(&self) -> S {
        self.coeff_mono(0x3f)
    }

    fn add_term(&mut self, m: Mono, c: S) {
        debug_assert_eq!(m.count_ones() as usize, self.degree);
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(v) => {
                let s = v.clone() + c;
                if s.is_zero() {
                    self.terms.remove(&m);
                } else {
                    *v = s;
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
    }

    pub fn scale(&self, c: &S) -> Self {
        let mut f = Form::zero(self.degree);
        for (m, v) in &self.terms {
            f.add_term(*m, v.clone() * c.clone());
        }
        f
    }

    pub fn map<T: Scalar>(&self, mut g: impl FnMut(&S) -> T) -> Form<T> {
        let mut f = Form::zero(self.degree);
        for (m, v) in &self.terms {
            f.add_term(*m, g(v));
        }
        f
    }

    /// Drops coefficients with magnitude `<= tol` (float cleanup).
    pub fn chop(&self, tol: f64) -> Self {
        let mut f = Form::zero(self.degree);
        for (m, v) in &self.terms {
            if !v.is_negligible(tol) {
                f.add_term(*m, v.clone());
            }
        }
        f
    }

    /// Largest coefficient magnitude.
    pub fn max_abs(&self) -> f64 {
        self.terms.values().map(|c| c.magnitude()).fold(0.0, f64::max)
    }

    /// True when every coefficient is negligible at `tol`.
    pub fn is_negligible(&self, tol: f64) -> bool {
        self.terms.values().all(|c| c.is_negligible(tol))
    }

    /// Exterior product.
    pub fn wedge(&self, other: &Self) -> Result<Self> {
        let d = self.degree + other.degree;
        if d > DIM {
            return Err(Error::DegreeOverflow(d));
        }
        Ok(self.wedge_unchecked(other))
    }

    pub(crate) fn wedge_unchecked(&self, other: &Self) -> Self {
        let mut f = Form::zero(self.degree + other.degree);
        for (a, ca) in &self.terms {
            for (b, cb) in &other.terms {
                if a & b != 0 {
                    continue;
                }
                let c = ca.clone() * cb.clone();
                let c = if shuffle_sign(*a, *b) { -c } else { c };
                f.add_term(a | b, c);
            }
        }
        f
    }

    /// Contraction `i_X a`.
    pub fn interior(&self, x: &Vector<S>) -> Result<Self> {
        if self.degree == 0 {
            return Err(Error::ContractScalar);
        }
        let mut f = Form::zero(self.degree - 1);
        for (m, c) in &self.terms {
            let mut pos = 0;
            for b in 0..DIM {
                if m & (1 << b) == 0 {
                    continue;
                }
                if !x.0[b].is_zero() {
                    let v = c.clone() * x.0[b].clone();
                    f.add_term(m & !(1 << b), if pos % 2 == 1 { -v } else { v });
                }
                pos += 1;
            }
        }
        Ok(f)
    }

    /// Contraction with the basis vector of 1-based index `i`.
    pub fn interior_basis(&self, i: usize) -> Result<Self> {
        self.interior(&Vector::basis(i))
    }

    /// Pullback `M*a`, i.e. `(M*a)(X₁,…) = a(MX₁,…)`.
    pub fn pullback(&self, map: &LinearMap<S>) -> Self {
        let rows: Vec<Form<S>> = (0..DIM)
            .map(|i| Form::covector(&Vector(map.m[i].clone())))
            .collect();
        let mut f = Form::zero(self.degree);
        for (m, c) in &self.terms {
            let mut img = Form::scalar(c.clone());
            for b in 0..DIM {
                if m & (1 << b) != 0 {
                    img = img.wedge_unchecked(&rows[b]);
                }
            }
            f = f + img;
        }
        f
    }

    /// Multilinear evaluation on `k = degree` vectors.
    pub fn evaluate(&self, vectors: &[Vector<S>]) -> Result<S> {
        if vectors.len() != self.degree {
            return Err(Error::Arity {
                expected: self.degree,
                found: vectors.len(),
            });
        }
        let mut total = S::zero();
        for (m, c) in &self.terms {
            let rows: Vec<usize> = (0..DIM).filter(|b| m & (1 << b) != 0).collect();
            let sub: Vec<Vec<S>> = rows
                .iter()
                .map(|&r| vectors.iter().map(|v| v.0[r].clone()).collect())
                .collect();
            total = total + c.clone() * linalg::det(&sub);
        }
        Ok(total)
    }
}

impl Form<crate::scalar::Rational> {
    pub fn to_float(&self) -> Form<f64> {
        self.map(crate::scalar::to_float)
    }
}

impl<S: RealScalar> Form<S> {
    pub fn complexify(&self) -> Form<Complex<S>> {
        self.map(|c| Complex::new(c.clone(), S::zero()))
    }
}

impl<S: RealScalar> Form<Complex<S>> {
    pub fn conj(&self) -> Self {
        self.map(|c| c.conj())
    }

    pub fn re(&self) -> Form<S> {
        self.map(|c| c.re.clone())
    }

    pub fn im(&self) -> Form<S> {
        self.map(|c| c.im.clone())
    }

    pub fn from_parts(re: &Form<S>, im: &Form<S>) -> Self {
        assert_eq!(re.degree(), im.degree());
        re.complexify() + im.complexify().scale(&Complex::new(S::zero(), S::one()))
    }
}

impl<S: Scalar> Add for Form<S> {
    type Output = Form<S>;
    fn add(mut self, rhs: Form<S>) -> Form<S> {
        assert_eq!(self.degree, rhs.degree, "adding forms of different degree");
        for (m, c) in rhs.terms {
            self.add_term(m, c);
        }
        self
    }
}

impl<S: Scalar> Add for &Form<S> {
    type Output = Form<S>;
    fn add(self, rhs: &Form<S>) -> Form<S> {
        self.clone() + rhs.clone()
    }
}

impl<S: Scalar> Neg for Form<S> {
    type Output = Form<S>;
    fn neg(self) -> Form<S> {
        self.map(|c| -c.clone())
    }
}

impl<S: Scalar> Neg for &Form<S> {
    type Output = Form<S>;
    fn neg(self) -> Form<S> {
        self.map(|c| -c.clone())
    }
}

impl<S: Scalar> Sub for Form<S> {
    type Output = Form<S>;
    fn sub(self, rhs: Form<S>) -> Form<S> {
        self + (-rhs)
    }
}

impl<S: Scalar> Sub for &Form<S> {
    type Output = Form<S>;
    fn sub(self, rhs: &Form<S>) -> Form<S> {
        self.clone() - rhs.clone()
    }
}

impl<S: Scalar> Mul<&S> for &Form<S> {
    type Output = Form<S>;
    fn mul(self, rhs: &S) -> Form<S> {
        self.scale(rhs)
    }
}

impl<S: fmt::Debug> fmt::Debug for Form<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0[deg {}]", self.degree);
        }
        let mut first = true;
        for (m, c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            let names: Vec<String> = mono_indices(*m)
                .into_iter()
                .map(|i| {
                    if i <= 3 {
                        format!("e{i}")
                    } else {
                        format!("f{}", i - 3)
                    }
                })
                .collect();
            write!(f, "({c:?}){}", names.join("^"))?;
        }
        Ok(())
    }
}

/// A vector of V in the basis `(e₁,e₂,e₃,f₁,f₂,f₃)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Vector<S>(pub [S; DIM]);

impl<S: Scalar> Vector<S> {
    pub fn zero() -> Self {
        Vector(std::array::from_fn(|_| S::zero()))
    }

    /// Basis vector for the 1-based index `i`.
    pub fn basis(i: usize) -> Self {
        let mut v = Self::zero();
        v.0[i - 1] = S::one();
        v
    }

    pub fn from_slice(c: &[S]) -> Self {
        assert_eq!(c.len(), DIM);
        Vector(std::array::from_fn(|i| c[i].clone()))
    }
}

/// A 6×6 matrix acting on column vectors.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearMap<S> {
    pub m: [[S; DIM]; DIM],
}

impl<S: Scalar> LinearMap<S> {
    pub fn zero() -> Self {
        LinearMap {
            m: std::array::from_fn(|_| std::array::from_fn(|_| S::zero())),
        }
    }

    pub fn identity() -> Self {
        let mut a = Self::zero();
        for i in 0..DIM {
            a.m[i][i] = S::one();
        }
        a
    }

    pub fn diag(d: [S; DIM]) -> Self {
        let mut a = Self::zero();
        for (i, v) in d.into_iter().enumerate() {
            a.m[i][i] = v;
        }
        a
    }

    pub fn from_rows(rows: Vec<Vec<S>>) -> Self {
        assert_eq!(rows.len(), DIM);
        LinearMap {
            m: std::array::from_fn(|i| std::array::from_fn(|j| rows[i][j].clone())),
        }
    }

    pub fn to_rows(&self) -> Vec<Vec<S>> {
        self.m.iter().map(|r| r.to_vec()).collect()
    }

    pub fn apply(&self, x: &Vector<S>) -> Vector<S> {
        Vector(std::array::from_fn(|i| {
            (0..DIM).fold(S::zero(), |acc, j| acc + self.m[i][j].clone() * x.0[j].clone())
        }))
    }

    pub fn compose(&self, other: &Self) -> Self {
        LinearMap {
            m: std::array::from_fn(|i| {
                std::array::from_fn(|j| {
                    (0..DIM).fold(S::zero(), |acc, k| {
                        acc + self.m[i][k].clone() * other.m[k][j].clone()
                    })
                })
            }),
        }
    }

    pub fn transpose(&self) -> Self {
        LinearMap {
            m: std::array::from_fn(|i| std::array::from_fn(|j| self.m[j][i].clone())),
        }
    }

    pub fn scale(&self, c: &S) -> Self {
        LinearMap {
            m: std::array::from_fn(|i| std::array::from_fn(|j| self.m[i][j].clone() * c.clone())),
        }
    }

    pub fn trace(&self) -> S {
        (0..DIM).fold(S::zero(), |acc, i| acc + self.m[i][i].clone())
    }

    pub fn det(&self) -> S {
        linalg::det(&self.to_rows())
    }

    pub fn inverse(&self) -> Result<Self> {
        linalg::inverse(&self.to_rows(), 1e-14).map(Self::from_rows)
    }

    pub fn map<T: Scalar>(&self, g: impl Fn(&S) -> T) -> LinearMap<T> {
        LinearMap {
            m: std::array::from_fn(|i| std::array::from_fn(|j| g(&self.m[i][j]))),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.m
            .iter()
            .flatten()
            .map(|c| c.magnitude())
            .fold(0.0, f64::max)
    }

    pub fn sub(&self, other: &Self) -> Self {
        LinearMap {
            m: std::array::from_fn(|i| {
                std::array::from_fn(|j| self.m[i][j].clone() - other.m[i][j].clone())
            }),
        }
    }
}
