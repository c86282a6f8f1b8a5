//! The PDE attached to a constant 3-form, derived by pulling the form back
//! along `x ↦ (x, ∇f)` with a symbolic symmetric Hessian.

use std::collections::BTreeMap;
use std::fmt;

use crate::exterior::{mono_indices, Form};
use crate::scalar::{rational_to_string, Rational, Scalar};
use num_traits::{One, Signed, Zero};

/// Exponents of `(f₁₁, f₁₂, f₁₃, f₂₂, f₂₃, f₃₃)`.
type Exps = [u8; 6];

const NAMES: [&str; 6] = ["f_11", "f_12", "f_13", "f_22", "f_23", "f_33"];

fn slot(i: usize, j: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    match (i, j) {
        (0, 0) => 0,
        (0, 1) => 1,
        (0, 2) => 2,
        (1, 1) => 3,
        (1, 2) => 4,
        _ => 5,
    }
}

/// Polynomial in the second derivatives of `f`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct HessPoly {
    terms: BTreeMap<Exps, Rational>,
}

impl HessPoly {
    pub fn constant(c: Rational) -> Self {
        let mut p = HessPoly::default();
        p.add_term([0; 6], c);
        p
    }

    /// The entry `f_ij` (0-based).
    pub fn entry(i: usize, j: usize) -> Self {
        let mut e = [0; 6];
        e[slot(i, j)] = 1;
        let mut p = HessPoly::default();
        p.add_term(e, Rational::one());
        p
    }

    fn add_term(&mut self, e: Exps, c: Rational) {
        if c.is_zero() {
            return;
        }
        let v = self.terms.entry(e).or_insert_with(Rational::zero);
        *v += c;
        if v.is_zero() {
            self.terms.remove(&e);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut r = self.clone();
        for (e, c) in &o.terms {
            r.add_term(*e, c.clone());
        }
        r
    }

    pub fn scale(&self, c: &Rational) -> Self {
        let mut r = HessPoly::default();
        for (e, v) in &self.terms {
            r.add_term(*e, v * c);
        }
        r
    }

    pub fn mul(&self, o: &Self) -> Self {
        let mut r = HessPoly::default();
        for (a, ca) in &self.terms {
            for (b, cb) in &o.terms {
                let e = std::array::from_fn(|k| a[k] + b[k]);
                r.add_term(e, ca * cb);
            }
        }
        r
    }

    /// Homogeneous part of total degree `d`.
    pub fn part(&self, d: u8) -> Self {
        HessPoly {
            terms: self
                .terms
                .iter()
                .filter(|(e, _)| e.iter().sum::<u8>() == d)
                .map(|(e, c)| (*e, c.clone()))
                .collect(),
        }
    }

    pub fn eval(&self, h: &[[f64; 3]; 3]) -> f64 {
        let vals = [h[0][0], h[0][1], h[0][2], h[1][1], h[1][2], h[2][2]];
        self.terms
            .iter()
            .map(|(e, c)| {
                let m: f64 = (0..6).map(|k| vals[k].powi(e[k] as i32)).product();
                crate::scalar::to_float(c) * m
            })
            .sum()
    }

    fn det3(m: &[[HessPoly; 3]; 3]) -> Self {
        let mut r = HessPoly::default();
        for (p, sign) in PERMS3 {
            let t = m[0][p[0]].mul(&m[1][p[1]]).mul(&m[2][p[2]]);
            r = r.add(&t.scale(&Rational::from_i64(sign)));
        }
        r
    }

    /// `det(f_ij)`.
    pub fn hess() -> Self {
        let h: [[HessPoly; 3]; 3] =
            std::array::from_fn(|i| std::array::from_fn(|j| HessPoly::entry(i, j)));
        HessPoly::det3(&h)
    }
}

const PERMS3: [([usize; 3], i64); 6] = [
    ([0, 1, 2], 1),
    ([1, 2, 0], 1),
    ([2, 0, 1], 1),
    ([0, 2, 1], -1),
    ([2, 1, 0], -1),
    ([1, 0, 2], -1),
];

/// `(x, ∇f)*ω` as `P(f_ij)·dx₁∧dx₂∧dx₃`: each `dp_i` becomes `Σ_j f_ij dx_j`.
pub fn symbolic_pullback(w: &Form<Rational>) -> HessPoly {
    // Row r of the section's Jacobian: dx_r for r < 3, Σ_j f_{r-3,j} dx_j otherwise.
    let row = |r: usize, j: usize| -> HessPoly {
        if r < 3 {
            if r == j {
                HessPoly::constant(Rational::one())
            } else {
                HessPoly::default()
            }
        } else {
            HessPoly::entry(r - 3, j)
        }
    };
    let mut total = HessPoly::default();
    for (m, c) in w.terms() {
        let idx = mono_indices(m);
        let sub: [[HessPoly; 3]; 3] =
            std::array::from_fn(|a| std::array::from_fn(|j| row(idx[a] - 1, j)));
        total = total.add(&HessPoly::det3(&sub).scale(c));
    }
    total
}

fn signed(c: &Rational, first: bool) -> (String, String) {
    let sign = match (c.is_negative(), first) {
        (true, true) => "-",
        (false, true) => "",
        (true, false) => " - ",
        (false, false) => " + ",
    };
    let mag = c.abs();
    let coeff = if mag.is_one() {
        String::new()
    } else {
        format!("{} ", rational_to_string(&mag))
    };
    (sign.to_string(), coeff)
}

impl fmt::Display for HessPoly {
    /// Writes the cubic part as a multiple of `hess(f)` when it is one.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut pieces: Vec<(Rational, String)> = Vec::new();
        let cubic = self.part(3);
        let hess = HessPoly::hess();
        let hess_multiple = hess
            .terms
            .iter()
            .next()
            .and_then(|(e, c)| cubic.terms.get(e).map(|k| k / c))
            .filter(|k| hess.scale(k) == cubic);
        let mut rest = self.clone();
        if let Some(k) = &hess_multiple {
            rest = rest.add(&cubic.scale(&-Rational::one()));
            pieces.push((k.clone(), "hess(f)".into()));
        }
        for d in (0..=3u8).rev() {
            for (e, c) in rest.part(d).terms.iter().rev() {
                let name = e
                    .iter()
                    .enumerate()
                    .filter(|(_, p)| **p > 0)
                    .map(|(k, p)| {
                        if *p == 1 {
                            NAMES[k].to_string()
                        } else {
                            format!("{}^{}", NAMES[k], p)
                        }
                    })
                    .collect::<Vec<_>>()
                    .join(" ");
                pieces.push((c.clone(), name));
            }
        }
        if pieces.is_empty() {
            return write!(f, "0 = 0");
        }
        for (i, (c, name)) in pieces.iter().enumerate() {
            let (sign, coeff) = signed(c, i == 0);
            if name.is_empty() {
                write!(f, "{sign}{}", rational_to_string(&c.abs()))?;
            } else {
                write!(f, "{sign}{coeff}{name}")?;
            }
        }
        write!(f, " = 0")
    }
}
