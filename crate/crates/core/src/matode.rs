//! Integration of the zero-curvature system `∂_i G · G⁻¹ = C_i` on a cube
//! around the origin, by the cascade `G = X·Ỹ·Z`:
//!
//! 1. `∂_1 X = C₁ X` with `X(0, x₂, x₃) = Id`;
//! 2. `∂_2 Ỹ = C′₂ Ỹ` with `Ỹ(x₁ = 0, 0, x₃) = Id`, `C′₂ = X⁻¹(C₂X − ∂_2 X)`;
//! 3. `∂_3 Z = C″₃ Z` with `Z(0) = Id`, `C″₃ = Ỹ⁻¹(C′₃Ỹ − ∂_3 Ỹ)`.
//!
//! Zero curvature makes `C′₂` independent of `x₁` and `C″₃` of `(x₁, x₂)`.
//! On the slice `x₁ = 0` we have `X = Id`, so `C′₂ = C₂(0, x₂, x₃)`, and on
//! `x₁ = x₂ = 0` likewise `C″₃ = C₃(0, 0, x₃)`; the stages use those slices.

use crate::error::{Error, Result};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

pub type Mat = DMatrix<f64>;
pub type P3 = [f64; 3];

/// Step of the differences in [`zero_curvature_check`].
pub const CURVATURE_STEP: f64 = 1e-3;
/// Largest condition number tolerated for `G`.
pub const MAX_CONDITION: f64 = 1e12;

/// Coefficients `C₁, C₂, C₃ : R³ → gl(m)`.
pub trait MatrixField: Sync {
    fn size(&self) -> usize;

    /// `C_i(x)`, `i` 0-based.
    fn c(&self, i: usize, x: &P3) -> Mat;
}

pub struct FnMatrixField<F> {
    pub m: usize,
    pub f: F,
}

impl<F: Fn(usize, &P3) -> Mat + Sync> MatrixField for FnMatrixField<F> {
    fn size(&self) -> usize {
        self.m
    }

    fn c(&self, i: usize, x: &P3) -> Mat {
        (self.f)(i, x)
    }
}

/// Constant coefficients.
#[derive(Clone, Debug)]
pub struct ConstantField(pub [Mat; 3]);

impl MatrixField for ConstantField {
    fn size(&self) -> usize {
        self.0[0].nrows()
    }

    fn c(&self, i: usize, _x: &P3) -> Mat {
        self.0[i].clone()
    }
}

/// `C_i = ∂_i H · H⁻¹` for `H = exp(x₁M₁) exp(x₂M₂) exp(x₃M₃)`.
#[derive(Clone, Debug)]
pub struct Manufactured {
    pub m: [Mat; 3],
}

impl Manufactured {
    /// Random `M_i` of size `n` with Frobenius norm at most 1.
    pub fn random(seed: u64, n: usize) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = std::array::from_fn(|_| {
            let a = Mat::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
            let scale = rng.gen_range(0.5..1.0) / a.norm();
            a * scale
        });
        Manufactured { m }
    }

    pub fn h(&self, x: &P3) -> Mat {
        (&self.m[0] * x[0]).exp() * (&self.m[1] * x[1]).exp() * (&self.m[2] * x[2]).exp()
    }
}

impl MatrixField for Manufactured {
    fn size(&self) -> usize {
        self.m[0].nrows()
    }

    fn c(&self, i: usize, x: &P3) -> Mat {
        let mut conj = Mat::identity(self.size(), self.size());
        for k in 0..i {
            conj *= (&self.m[k] * x[k]).exp();
        }
        let inv = conj
            .clone()
            .try_inverse()
            .expect("matrix exponentials are invertible");
        conj * &self.m[i] * inv
    }
}

fn partial(c: &dyn MatrixField, i: usize, j: usize, x: &P3, h: f64) -> Mat {
    let at = |t: f64| {
        let mut y = *x;
        y[j] += t;
        c.c(i, &y)
    };
    (8.0 * (at(h) - at(-h)) - (at(2.0 * h) - at(-2.0 * h))) / (12.0 * h)
}

/// `∂_j C_i − ∂_i C_j + [C_i, C_j]`.
pub fn curvature(c: &dyn MatrixField, i: usize, j: usize, x: &P3, h: f64) -> Mat {
    let (ci, cj) = (c.c(i, x), c.c(j, x));
    partial(c, i, j, x, h) - partial(c, j, i, x, h) + &ci * &cj - &cj * &ci
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ZeroCurvatureReport {
    pub samples: usize,
    pub max_defect: f64,
    pub tol: f64,
    pub passed: bool,
}

/// Largest Frobenius norm of the curvature over `samples` and pairs `i < j`.
pub fn zero_curvature_check(c: &dyn MatrixField, samples: &[P3], tol: f64) -> ZeroCurvatureReport {
    let max_defect = samples
        .par_iter()
        .map(|x| {
            [(0, 1), (0, 2), (1, 2)]
                .iter()
                .map(|&(i, j)| curvature(c, i, j, x, CURVATURE_STEP).norm())
                .fold(0.0, f64::max)
        })
        .collect::<Vec<f64>>()
        .into_iter()
        .fold(0.0, f64::max);
    ZeroCurvatureReport {
        samples: samples.len(),
        max_defect,
        tol,
        passed: max_defect < tol,
    }
}

/// Matrices on the nodes `−a + k·step`, `k = 0..n`, of `[−a, a]³`.
#[derive(Clone, Debug)]
pub struct Grid {
    pub half_width: f64,
    pub step: f64,
    pub n: usize,
    pub values: Vec<Mat>,
}

impl Grid {
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.n + j) * self.n + k
    }

    pub fn coord(&self, i: usize) -> f64 {
        -self.half_width + i as f64 * self.step
    }

    pub fn point(&self, i: usize, j: usize, k: usize) -> P3 {
        [self.coord(i), self.coord(j), self.coord(k)]
    }

    pub fn at(&self, i: usize, j: usize, k: usize) -> &Mat {
        &self.values[self.index(i, j, k)]
    }

    /// Node index of the origin.
    pub fn center(&self) -> usize {
        self.n / 2
    }

    /// Right-multiplies every node by `r`.
    pub fn gauge(&self, r: &Mat) -> Grid {
        Grid {
            values: self.values.iter().map(|g| g * r).collect(),
            ..self.clone()
        }
    }
}

fn rk4_step(c: impl Fn(f64) -> Mat, t: f64, y: &Mat, h: f64) -> Mat {
    let k1 = c(t) * y;
    let k2 = c(t + h / 2.0) * (y + &k1 * (h / 2.0));
    let k3 = c(t + h / 2.0) * (y + &k2 * (h / 2.0));
    let k4 = c(t + h) * (y + &k3 * h);
    y + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0)
}

/// Solves `dY/dt = c(t) Y`, `Y(t_center) = Id`, on the nodes `coord(0..n)`.
fn solve_line(c: impl Fn(f64) -> Mat, m: usize, n: usize, center: usize, coord: impl Fn(usize) -> f64) -> Vec<Mat> {
    let mut out = vec![Mat::identity(m, m); n];
    for k in center + 1..n {
        let (t, h) = (coord(k - 1), coord(k) - coord(k - 1));
        out[k] = rk4_step(&c, t, &out[k - 1], h);
    }
    for k in (0..center).rev() {
        let (t, h) = (coord(k + 1), coord(k) - coord(k + 1));
        out[k] = rk4_step(&c, t, &out[k + 1], h);
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StageResiduals {
    /// `max ‖∂_1X·X⁻¹ − C₁‖`.
    pub x: f64,
    /// `max ‖∂_2Ỹ·Ỹ⁻¹ − C₂(0, ·)‖` on the slice `x₁ = 0`.
    pub y: f64,
    /// `max ‖∂_3Z·Z⁻¹ − C₃(0, 0, ·)‖`.
    pub z: f64,
    /// `max ‖X⁻¹(C₂X − ∂_2X) − C₂(0, x₂, x₃)‖`: the `x₁`-dependence of `C′₂`.
    pub c2_prime_variation: f64,
}

#[derive(Clone, Debug)]
pub struct Integration {
    pub grid: Grid,
    pub zero_curvature: ZeroCurvatureReport,
    pub stages: StageResiduals,
}

/// Nodes of `[−a, a]³` at which the zero-curvature hypothesis is checked.
fn check_points(a: f64) -> Vec<P3> {
    let t = [-0.5 * a, 0.0, 0.5 * a];
    let mut out = Vec::with_capacity(27);
    for x in t {
        for y in t {
            for z in t {
                out.push([x, y, z]);
            }
        }
    }
    out
}

pub fn integrate(c: &dyn MatrixField, half_width: f64, step: f64) -> Result<Integration> {
    let ratio = half_width / step;
    if !(step > 0.0) || !(half_width > 0.0) || (ratio - ratio.round()).abs() > 1e-9 || ratio.round() < 2.0 {
        return Err(Error::Precondition(format!(
            "half-width {half_width} must be a positive multiple (≥ 2) of the step {step}"
        )));
    }
    let m = c.size();
    let checks = check_points(half_width);
    let scale = checks
        .iter()
        .flat_map(|x| (0..3).map(move |i| (i, *x)))
        .map(|(i, x)| c.c(i, &x).norm())
        .fold(1.0, f64::max);
    let zc = zero_curvature_check(c, &checks, 1e-6 * scale * scale);
    if !zc.passed {
        return Err(Error::Precondition(format!(
            "zero-curvature defect {} exceeds {}",
            zc.max_defect, zc.tol
        )));
    }
    let half = ratio.round() as usize;
    let n = 2 * half + 1;
    let coord = |i: usize| -half_width + i as f64 * step;
    let z = solve_line(|t| c.c(2, &[0.0, 0.0, t]), m, n, half, coord);
    let y: Vec<Vec<Mat>> = (0..n)
        .into_par_iter()
        .map(|k| solve_line(|t| c.c(1, &[0.0, t, coord(k)]), m, n, half, coord))
        .collect();
    // x[(j, k)] is the x₁-line through (x₂, x₃) = (coord j, coord k)
    let x: Vec<Vec<Mat>> = (0..n * n)
        .into_par_iter()
        .map(|jk| {
            let (j, k) = (jk / n, jk % n);
            solve_line(|t| c.c(0, &[t, coord(j), coord(k)]), m, n, half, coord)
        })
        .collect();
    let mut values = Vec::with_capacity(n * n * n);
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                values.push(&x[j * n + k][i] * &y[k][j] * &z[k]);
            }
        }
    }
    let grid = Grid {
        half_width,
        step,
        n,
        values,
    };
    for (idx, g) in grid.values.iter().enumerate() {
        let sv = g.singular_values();
        let cond = sv.max() / sv.min();
        if !(cond < MAX_CONDITION) {
            let (i, j, k) = (idx / (n * n), (idx / n) % n, idx % n);
            return Err(Error::Singular(format!(
                "G at {:?} has condition number {cond:e}",
                grid.point(i, j, k)
            )));
        }
    }
    let line_residual = |vals: &[Mat], cf: &dyn Fn(f64) -> Mat| {
        (2..n - 2)
            .map(|i| {
                let d = fd4(&vals[i - 2], &vals[i - 1], &vals[i + 1], &vals[i + 2], step);
                let inv = vals[i].clone().try_inverse().unwrap_or_else(|| Mat::from_element(m, m, f64::NAN));
                (d * inv - cf(coord(i))).norm()
            })
            .fold(0.0, f64::max)
    };
    let xr = (0..n * n)
        .into_par_iter()
        .map(|jk| {
            let (j, k) = (jk / n, jk % n);
            line_residual(&x[jk], &|t| c.c(0, &[t, coord(j), coord(k)]))
        })
        .reduce(|| 0.0, f64::max);
    let yr = (0..n)
        .map(|k| line_residual(&y[k], &|t| c.c(1, &[0.0, t, coord(k)])))
        .fold(0.0, f64::max);
    let zr = line_residual(&z, &|t| c.c(2, &[0.0, 0.0, t]));
    let variation = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut worst: f64 = 0.0;
            for j in 2..n - 2 {
                for k in 0..n {
                    let at = |jj: usize| &x[jj * n + k][i];
                    let d = fd4(at(j - 2), at(j - 1), at(j + 1), at(j + 2), step);
                    let xs = at(j);
                    let Some(inv) = xs.clone().try_inverse() else {
                        return f64::NAN;
                    };
                    let p = [coord(i), coord(j), coord(k)];
                    let c2p = inv * (c.c(1, &p) * xs - d);
                    worst = worst.max((c2p - c.c(1, &[0.0, coord(j), coord(k)])).norm());
                }
            }
            worst
        })
        .reduce(|| 0.0, f64::max);
    Ok(Integration {
        grid,
        zero_curvature: zc,
        stages: StageResiduals {
            x: xr,
            y: yr,
            z: zr,
            c2_prime_variation: variation,
        },
    })
}

fn fd4(m2: &Mat, m1: &Mat, p1: &Mat, p2: &Mat, h: f64) -> Mat {
    ((p1 - m1) * 8.0 - (p2 - m2)) / (12.0 * h)
}

/// `max ‖∂_iG·G⁻¹ − C_i‖` over interior nodes, with fourth-order grid
/// differences.
pub fn residual(grid: &Grid, c: &dyn MatrixField) -> f64 {
    let n = grid.n;
    if n < 5 {
        return f64::NAN;
    }
    (2..n - 2)
        .into_par_iter()
        .map(|i| {
            let mut worst: f64 = 0.0;
            for j in 2..n - 2 {
                for k in 2..n - 2 {
                    let g = grid.at(i, j, k);
                    let Some(inv) = g.clone().try_inverse() else {
                        return f64::NAN;
                    };
                    let x = grid.point(i, j, k);
                    for dir in 0..3 {
                        let nb = |s: isize| {
                            let mut idx = [i as isize, j as isize, k as isize];
                            idx[dir] += s;
                            grid.at(idx[0] as usize, idx[1] as usize, idx[2] as usize)
                        };
                        let d = fd4(nb(-2), nb(-1), nb(1), nb(2), grid.step);
                        worst = worst.max((d * &inv - c.c(dir, &x)).norm());
                    }
                }
            }
            worst
        })
        .reduce(|| 0.0, |a, b| if a.is_nan() || b.is_nan() { f64::NAN } else { a.max(b) })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_field_gives_identity() {
        let c = ConstantField(std::array::from_fn(|_| Mat::zeros(3, 3)));
        let out = integrate(&c, 0.25, 0.0625).unwrap();
        assert!(out.grid.values.iter().all(|g| *g == Mat::identity(3, 3)));
        assert!(residual(&out.grid, &c) < 1e-12);
        assert_eq!(zero_curvature_check(&c, &[[0.1, 0.2, 0.3]], 1e-12).max_defect, 0.0);
    }

    #[test]
    fn noncommuting_constants_have_commutator_curvature() {
        let a = Mat::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]);
        let b = Mat::from_row_slice(2, 2, &[0.0, 0.0, 1.0, 0.0]);
        let c = ConstantField([a.clone(), b.clone(), Mat::zeros(2, 2)]);
        let report = zero_curvature_check(&c, &[[0.0; 3]], 1e-6);
        assert!((report.max_defect - (&a * &b - &b * &a).norm()).abs() < 1e-12);
        assert!(!report.passed);
        assert!(integrate(&c, 0.25, 0.0625).is_err());
    }

    #[test]
    fn bad_grid_is_rejected() {
        let c = ConstantField(std::array::from_fn(|_| Mat::zeros(2, 2)));
        assert!(integrate(&c, 0.3, 0.25).is_err());
        assert!(integrate(&c, 0.5, 0.0).is_err());
    }
}
