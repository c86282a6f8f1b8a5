#![allow(dead_code)]

use mastruct::exterior::{monomials, Form};
use mastruct::symplectic::hodge_lepage;
use mastruct::{Rational, Scalar};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn q(n: i64) -> Rational {
    Rational::from_i64(n)
}

pub fn small_rational(rng: &mut ChaCha8Rng) -> Rational {
    Rational::from_ratio(rng.gen_range(-5..=5), rng.gen_range(1..=3))
}

pub fn random_form(rng: &mut ChaCha8Rng, degree: usize) -> Form<Rational> {
    let mut f = Form::zero(degree);
    for m in monomials(degree) {
        if rng.gen_bool(0.6) {
            f = f + Form::from_mono(m, small_rational(rng));
        }
    }
    f
}

/// Random element of the 14-dimensional space of effective 3-forms.
pub fn random_effective(rng: &mut ChaCha8Rng) -> Form<Rational> {
    hodge_lepage(&random_form(rng, 3)).swap_remove(0)
}

/// Polynomial in three variables, `Σ c·x^a`.
#[derive(Clone, Debug)]
pub struct Poly3 {
    pub terms: Vec<(f64, [u32; 3])>,
}

impl Poly3 {
    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(c, a)| c * x[0].powi(a[0] as i32) * x[1].powi(a[1] as i32) * x[2].powi(a[2] as i32))
            .sum()
    }

    pub fn deriv(&self, i: usize) -> Poly3 {
        Poly3 {
            terms: self
                .terms
                .iter()
                .filter(|(_, a)| a[i] > 0)
                .map(|(c, a)| {
                    let mut b = *a;
                    b[i] -= 1;
                    (c * a[i] as f64, b)
                })
                .collect(),
        }
    }

    /// `x_k` plus random quadratic and cubic terms of size `eps`.
    pub fn random_cubic(rng: &mut ChaCha8Rng, k: usize, eps: f64) -> Poly3 {
        let mut lin = [0; 3];
        lin[k] = 1;
        let mut terms = vec![(1.0, lin)];
        for a in 0..=3u32 {
            for b in 0..=(3 - a) {
                for c in 0..=(3 - a - b) {
                    if a + b + c >= 2 {
                        terms.push((eps * rng.gen_range(-1.0..1.0), [a, b, c]));
                    }
                }
            }
        }
        Poly3 { terms }
    }
}

/// Exact form of the given degree with small rational coefficients.
pub fn form_strategy(degree: usize) -> impl proptest::strategy::Strategy<Value = Form<Rational>> {
    use proptest::prelude::*;
    let n = monomials(degree).len();
    prop::collection::vec((-4i64..=4, 1i64..=3), n).prop_map(move |cs| {
        let mut f = Form::zero(degree);
        for (m, (a, b)) in monomials(degree).into_iter().zip(cs) {
            f = f + Form::from_mono(m, Rational::from_ratio(a, b));
        }
        f
    })
}

pub fn effective_strategy() -> impl proptest::strategy::Strategy<Value = Form<Rational>> {
    use proptest::prelude::*;
    form_strategy(3).prop_map(|f| hodge_lepage(&f).swap_remove(0))
}

pub fn vector_strategy() -> impl proptest::strategy::Strategy<Value = mastruct::Vector<Rational>> {
    use proptest::prelude::*;
    prop::collection::vec((-4i64..=4, 1i64..=3), 6).prop_map(|cs| {
        let c: Vec<Rational> = cs.into_iter().map(|(a, b)| Rational::from_ratio(a, b)).collect();
        mastruct::Vector::from_slice(&c)
    })
}

pub fn symplectic_strategy() -> impl proptest::strategy::Strategy<Value = mastruct::LinearMap<Rational>> {
    use proptest::prelude::*;
    (any::<u64>(), 1usize..8).prop_map(|(seed, depth)| mastruct::symplectic::random_symplectic(seed, depth))
}
