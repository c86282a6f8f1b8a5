//! Candidate solutions, parametrized 3-folds and safe-region sampling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{M3, P3};
use crate::error::{Error, Result};

/// A scalar function on R³ with optional exact derivatives.
pub trait Solution: Sync {
    fn value(&self, x: &P3) -> f64;

    fn gradient(&self, _x: &P3) -> Option<P3> {
        None
    }

    fn hessian(&self, _x: &P3) -> Option<M3> {
        None
    }
}

const GRAD_STEP: f64 = 1e-5;
const HESS_STEP: f64 = 1e-4;
const VALUE_HESS_STEP: f64 = 1e-3;

pub fn gradient_of(f: &dyn Solution, x: &P3) -> P3 {
    if let Some(g) = f.gradient(x) {
        return g;
    }
    std::array::from_fn(|i| {
        let (mut a, mut b) = (*x, *x);
        a[i] += GRAD_STEP;
        b[i] -= GRAD_STEP;
        (f.value(&a) - f.value(&b)) / (2.0 * GRAD_STEP)
    })
}

/// Exact Hessian, else central differences of an exact gradient, else
/// second differences of values.
pub fn hessian_of(f: &dyn Solution, x: &P3) -> M3 {
    if let Some(h) = f.hessian(x) {
        return h;
    }
    let mut h = [[0.0; 3]; 3];
    if f.gradient(x).is_some() {
        for j in 0..3 {
            let (mut a, mut b) = (*x, *x);
            a[j] += HESS_STEP;
            b[j] -= HESS_STEP;
            let (ga, gb) = (gradient_of(f, &a), gradient_of(f, &b));
            for i in 0..3 {
                h[i][j] = (ga[i] - gb[i]) / (2.0 * HESS_STEP);
            }
        }
    } else {
        let s = VALUE_HESS_STEP;
        let at = |di: [f64; 3]| f.value(&std::array::from_fn(|k| x[k] + di[k]));
        for i in 0..3 {
            for j in 0..3 {
                let e = |a: usize, t: f64| {
                    let mut d = [0.0; 3];
                    d[a] = t;
                    d
                };
                let add = |u: [f64; 3], v: [f64; 3]| std::array::from_fn(|k| u[k] + v[k]);
                h[i][j] = (at(add(e(i, s), e(j, s))) - at(add(e(i, s), e(j, -s)))
                    - at(add(e(i, -s), e(j, s)))
                    + at(add(e(i, -s), e(j, -s))))
                    / (4.0 * s * s);
            }
        }
    }
    // symmetrize
    for i in 0..3 {
        for j in 0..i {
            let m = 0.5 * (h[i][j] + h[j][i]);
            h[i][j] = m;
            h[j][i] = m;
        }
    }
    h
}

/// `½ xᵀHx`.
#[derive(Clone, Debug, PartialEq)]
pub struct Quadratic {
    pub h: M3,
}

impl Quadratic {
    pub fn new(h: M3) -> Self {
        Quadratic { h }
    }
}

impl Solution for Quadratic {
    fn value(&self, x: &P3) -> f64 {
        let mut v = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                v += 0.5 * self.h[i][j] * x[i] * x[j];
            }
        }
        v
    }

    fn gradient(&self, x: &P3) -> Option<P3> {
        Some(std::array::from_fn(|i| (0..3).map(|j| self.h[i][j] * x[j]).sum()))
    }

    fn hessian(&self, _x: &P3) -> Option<M3> {
        Some(self.h)
    }
}

/// `s = xy + yz + zx` and its gradient.
fn sym_quadratic(x: &P3) -> (f64, P3) {
    let s = x[0] * x[1] + x[1] * x[2] + x[2] * x[0];
    (s, [x[1] + x[2], x[0] + x[2], x[0] + x[1]])
}

/// `f = ∫_a^{√s} (b + 4ξ³)^{1/3} dξ`, `s = xy + yz + zx`, a regular
/// solution of `hess(f) = 1` where `s > 0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChynowethSewellIntegral {
    pub a: f64,
    pub b: f64,
}

impl ChynowethSewellIntegral {
    /// `α(s) = ½(b s^{-3/2} + 4)^{1/3}`, so that `∇f = α ∇s`.
    pub fn alpha(&self, s: f64) -> f64 {
        0.5 * (self.b * s.powf(-1.5) + 4.0).cbrt()
    }

    /// `α'(s)/α(s)`.
    fn log_alpha_prime(&self, s: f64) -> f64 {
        -self.b / (2.0 * s * (self.b + 4.0 * s.powf(1.5)))
    }
}

const QUAD_PANELS: usize = 256;

impl Solution for ChynowethSewellIntegral {
    fn value(&self, x: &P3) -> f64 {
        let (s, _) = sym_quadratic(x);
        let upper = s.sqrt();
        let g = |t: f64| (self.b + 4.0 * t * t * t).cbrt();
        // composite Simpson
        let n = QUAD_PANELS;
        let h = (upper - self.a) / n as f64;
        let mut acc = g(self.a) + g(upper);
        for k in 1..n {
            let w = if k % 2 == 1 { 4.0 } else { 2.0 };
            acc += w * g(self.a + k as f64 * h);
        }
        acc * h / 3.0
    }

    fn gradient(&self, x: &P3) -> Option<P3> {
        let (s, ds) = sym_quadratic(x);
        let a = self.alpha(s);
        Some(ds.map(|d| a * d))
    }

    /// `α'(s)∇s∇sᵀ + α(s)(E − I)`, `E` the all-ones matrix.
    fn hessian(&self, x: &P3) -> Option<M3> {
        let (s, ds) = sym_quadratic(x);
        let a = self.alpha(s);
        let ap = a * self.log_alpha_prime(s);
        Some(std::array::from_fn(|i| {
            std::array::from_fn(|j| ap * ds[i] * ds[j] + if i == j { 0.0 } else { a })
        }))
    }
}

/// `f = (x² + 2y)^{3/2}/3 − z²/2`, a regular solution of the
/// Chynoweth-Sewell equation with `γ = 0` where `x² + 2y > 0`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ChynowethSewellRegular;

impl Solution for ChynowethSewellRegular {
    fn value(&self, x: &P3) -> f64 {
        let u = x[0] * x[0] + 2.0 * x[1];
        u.powf(1.5) / 3.0 - 0.5 * x[2] * x[2]
    }

    fn gradient(&self, x: &P3) -> Option<P3> {
        let r = (x[0] * x[0] + 2.0 * x[1]).sqrt();
        Some([r * x[0], r, -x[2]])
    }

    fn hessian(&self, x: &P3) -> Option<M3> {
        let r = (x[0] * x[0] + 2.0 * x[1]).sqrt();
        Some([
            [r + x[0] * x[0] / r, x[0] / r, 0.0],
            [x[0] / r, 1.0 / r, 0.0],
            [0.0, 0.0, -1.0],
        ])
    }
}

/// A parametrized 3-fold `L: R³ → R⁶`.
pub trait ParamSurface: Sync {
    fn point(&self, t: &P3) -> [f64; 6];

    /// `J[r][c] = ∂L_r/∂t_c`, when known.
    fn jacobian(&self, _t: &P3) -> Option<[[f64; 3]; 6]> {
        None
    }
}

/// The graph `x ↦ (x, ∇f(x))`.
pub struct Graph<'a>(pub &'a dyn Solution);

impl ParamSurface for Graph<'_> {
    fn point(&self, t: &P3) -> [f64; 6] {
        let g = gradient_of(self.0, t);
        [t[0], t[1], t[2], g[0], g[1], g[2]]
    }

    fn jacobian(&self, t: &P3) -> Option<[[f64; 3]; 6]> {
        let h = hessian_of(self.0, t);
        Some(std::array::from_fn(|r| {
            std::array::from_fn(|c| if r < 3 { f64::from(u8::from(r == c)) } else { h[r - 3][c] })
        }))
    }
}

/// `L = (x, y, (x+y)α, (y+z)α, (z+x)α, γ(x+y)α − z)`, the generalized
/// solution of the Chynoweth-Sewell equation, differentiated numerically.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChynowethSewellSurface {
    pub b: f64,
    pub gamma: f64,
}

impl ParamSurface for ChynowethSewellSurface {
    fn point(&self, t: &P3) -> [f64; 6] {
        let [x, y, z] = *t;
        let s = x * y + y * z + z * x;
        let a = ChynowethSewellIntegral { a: 1.0, b: self.b }.alpha(s);
        [
            x,
            y,
            (x + y) * a,
            (y + z) * a,
            (z + x) * a,
            self.gamma * (x + y) * a - z,
        ]
    }
}

/// A graph perturbed by `ε·(0, 0, 0, sin y, sin z, sin x)`, not Lagrangian.
pub struct PerturbedGraph<'a> {
    pub f: &'a dyn Solution,
    pub eps: f64,
}

impl ParamSurface for PerturbedGraph<'_> {
    fn point(&self, t: &P3) -> [f64; 6] {
        let mut p = Graph(self.f).point(t);
        p[3] += self.eps * t[1].sin();
        p[4] += self.eps * t[2].sin();
        p[5] += self.eps * t[0].sin();
        p
    }
}

/// Scalar quantities used to describe safe regions in manifests.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Quantity {
    #[serde(rename = "xy+yz+zx")]
    SymmetricQuadratic,
    #[serde(rename = "x^2+2y")]
    ParabolicRadius,
    #[serde(rename = "x")]
    X,
    #[serde(rename = "y")]
    Y,
    #[serde(rename = "z")]
    Z,
}

impl Quantity {
    pub fn eval(self, p: &P3) -> f64 {
        match self {
            Quantity::SymmetricQuadratic => sym_quadratic(p).0,
            Quantity::ParabolicRadius => p[0] * p[0] + 2.0 * p[1],
            Quantity::X => p[0],
            Quantity::Y => p[1],
            Quantity::Z => p[2],
        }
    }
}

/// `quantity > min`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Constraint {
    pub quantity: Quantity,
    pub min: f64,
}

/// A box in R³ cut down by constraints.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Region {
    #[serde(rename = "box")]
    pub bounds: [[f64; 2]; 3],
    #[serde(default)]
    pub constraints: Vec<Constraint>,
}

const MAX_REJECTIONS: usize = 1000;

impl Region {
    pub fn contains(&self, p: &P3) -> bool {
        (0..3).all(|i| p[i] >= self.bounds[i][0] && p[i] <= self.bounds[i][1])
            && self.constraints.iter().all(|c| c.quantity.eval(p) > c.min)
    }

    /// `n` seeded points by rejection sampling.
    pub fn sample(&self, n: usize, seed: u64) -> Result<Vec<P3>> {
        for (i, b) in self.bounds.iter().enumerate() {
            if !(b[0] < b[1] && (b[1] - b[0]).is_finite()) {
                return Err(Error::Input(format!("empty interval on axis {i}: {b:?}")));
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut out = Vec::with_capacity(n);
        let mut misses = 0;
        while out.len() < n {
            let p: P3 = std::array::from_fn(|i| rng.gen_range(self.bounds[i][0]..self.bounds[i][1]));
            if self.contains(&p) {
                out.push(p);
                misses = 0;
            } else {
                misses += 1;
                if misses > MAX_REJECTIONS * (n + 1) {
                    return Err(Error::Input("region constraints reject every sample".into()));
                }
            }
        }
        Ok(out)
    }
}
