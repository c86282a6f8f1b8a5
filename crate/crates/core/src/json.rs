//! JSON interchange: forms, sample grids and solution manifests.
//!
//! Forms use `{"degree": k, "mode": "exact"|"float", "terms": [{"idx": [..],
//! "c": ..}]}` with 1-based strictly increasing indices. Exact coefficients
//! are `"p/q"` strings (integers and finite decimals are accepted too).

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::exterior::{mono_from_indices, mono_indices, Form, DIM};
use crate::fields::Point;
use crate::monge_ampere::{ChynowethSewellIntegral, ChynowethSewellSurface, Region, M3, P3};
use crate::scalar::{parse_rational, rational_to_string, Rational};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Upper bound on the number of points a manifest may request.
pub const MAX_POINTS: usize = 1_000_000;

/// A parsed form in either scalar mode.
#[derive(Clone, Debug, PartialEq)]
pub enum AnyForm {
    Exact(Form<Rational>),
    Float(Form<f64>),
}

impl AnyForm {
    pub fn degree(&self) -> usize {
        match self {
            AnyForm::Exact(w) => w.degree(),
            AnyForm::Float(w) => w.degree(),
        }
    }

    pub fn to_float(&self) -> Form<f64> {
        match self {
            AnyForm::Exact(w) => w.to_float(),
            AnyForm::Float(w) => w.clone(),
        }
    }

    pub fn mode(&self) -> &'static str {
        match self {
            AnyForm::Exact(_) => "exact",
            AnyForm::Float(_) => "float",
        }
    }
}

fn syntax(e: serde_json::Error) -> Error {
    Error::Input(format!("{e} (line {}, column {})", e.line(), e.column()))
}

fn parse_value(text: &str) -> Result<Value> {
    serde_json::from_str(text).map_err(syntax)
}

fn at(path: &str, msg: impl std::fmt::Display) -> Error {
    Error::Input(format!("{path}: {msg}"))
}

fn exact_coefficient(v: &Value, path: &str) -> Result<Rational> {
    let text = match v {
        Value::String(s) => s.clone(),
        Value::Number(n) => n.to_string(),
        _ => return Err(at(path, "coefficient must be a string or a number")),
    };
    parse_rational(&text)
        .ok_or_else(|| at(path, format!("`{text}` is not an exact rational (use \"p/q\")")))
}

fn float_coefficient(v: &Value, path: &str) -> Result<f64> {
    let x = match v {
        Value::Number(n) => n.as_f64(),
        Value::String(s) => parse_rational(s).map(|q| crate::scalar::to_float(&q)),
        _ => None,
    }
    .ok_or_else(|| at(path, "coefficient must be a number or \"p/q\""))?;
    if x.is_finite() {
        Ok(x)
    } else {
        Err(at(path, "coefficient is not finite"))
    }
}

/// Parses the form JSON format.
pub fn parse_form(text: &str) -> Result<AnyForm> {
    form_from_value(&parse_value(text)?)
}

pub fn form_from_value(v: &Value) -> Result<AnyForm> {
    let obj = v.as_object().ok_or_else(|| at("$", "expected an object"))?;
    for key in obj.keys() {
        if !matches!(key.as_str(), "degree" | "mode" | "terms") {
            return Err(at("$", format!("unknown field `{key}`")));
        }
    }
    let degree = obj
        .get("degree")
        .and_then(Value::as_u64)
        .ok_or_else(|| at("$.degree", "expected a non-negative integer"))?;
    if degree > DIM as u64 {
        return Err(Error::DegreeOverflow(degree as usize));
    }
    let degree = degree as usize;
    let exact = match obj.get("mode").and_then(Value::as_str) {
        Some("exact") => true,
        Some("float") => false,
        _ => return Err(at("$.mode", "expected \"exact\" or \"float\"")),
    };
    let terms = obj
        .get("terms")
        .and_then(Value::as_array)
        .ok_or_else(|| at("$.terms", "expected an array"))?;
    let mut exact_terms = Vec::new();
    let mut float_terms = Vec::new();
    let mut seen = std::collections::BTreeSet::new();
    for (n, t) in terms.iter().enumerate() {
        let path = format!("$.terms[{n}]");
        let t = t.as_object().ok_or_else(|| at(&path, "expected an object"))?;
        for key in t.keys() {
            if !matches!(key.as_str(), "idx" | "c") {
                return Err(at(&path, format!("unknown field `{key}`")));
            }
        }
        let idx = t
            .get("idx")
            .and_then(Value::as_array)
            .ok_or_else(|| at(&format!("{path}.idx"), "expected an array"))?;
        let idx: Vec<usize> = idx
            .iter()
            .map(|i| {
                i.as_u64()
                    .filter(|&i| i <= DIM as u64)
                    .map(|i| i as usize)
                    .ok_or_else(|| at(&format!("{path}.idx"), "indices must be integers in 1..=6"))
            })
            .collect::<Result<_>>()?;
        if idx.len() != degree {
            return Err(Error::IndexArity(idx, degree));
        }
        let mono = mono_from_indices(&idx)?;
        if !seen.insert(mono) {
            return Err(at(&format!("{path}.idx"), format!("duplicate index tuple {idx:?}")));
        }
        let c = t
            .get("c")
            .ok_or_else(|| at(&format!("{path}.c"), "missing coefficient"))?;
        if exact {
            exact_terms.push((idx, exact_coefficient(c, &format!("{path}.c"))?));
        } else {
            float_terms.push((idx, float_coefficient(c, &format!("{path}.c"))?));
        }
    }
    Ok(if exact {
        AnyForm::Exact(Form::from_terms(degree, exact_terms)?)
    } else {
        AnyForm::Float(Form::from_terms(degree, float_terms)?)
    })
}

/// Canonical JSON: terms in monomial order, zero coefficients omitted.
pub fn form_to_value(w: &AnyForm) -> Value {
    let terms: Vec<Value> = match w {
        AnyForm::Exact(f) => f
            .terms()
            .map(|(m, c)| json!({"idx": mono_indices(m), "c": rational_to_string(c)}))
            .collect(),
        AnyForm::Float(f) => f
            .terms()
            .map(|(m, c)| json!({"idx": mono_indices(m), "c": c}))
            .collect(),
    };
    json!({"degree": w.degree(), "mode": w.mode(), "terms": terms})
}

pub fn exact_form_to_value(w: &Form<Rational>) -> Value {
    form_to_value(&AnyForm::Exact(w.clone()))
}

pub fn float_form_to_value(w: &Form<f64>) -> Value {
    form_to_value(&AnyForm::Float(w.clone()))
}

/// Either a tensor grid with `n` points per axis or `random` seeded points.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleSpec {
    #[serde(rename = "box")]
    pub bounds: [[f64; 2]; 6],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub random: Option<usize>,
    #[serde(default)]
    pub seed: u64,
}

pub fn parse_sample_spec(text: &str) -> Result<SampleSpec> {
    let spec: SampleSpec = serde_json::from_str(text).map_err(syntax)?;
    spec.validate()?;
    Ok(spec)
}

impl SampleSpec {
    pub fn validate(&self) -> Result<()> {
        for (i, b) in self.bounds.iter().enumerate() {
            if !(b[0].is_finite() && b[1].is_finite() && b[0] <= b[1] && (b[1] - b[0]).is_finite()) {
                return Err(at(&format!("$.box[{i}]"), format!("invalid interval {b:?}")));
            }
        }
        match (self.n, self.random) {
            (Some(n), None) => {
                let total = (1..=DIM).try_fold(1usize, |acc, _| acc.checked_mul(n));
                if n == 0 || total.is_none_or(|t| t > MAX_POINTS) {
                    return Err(at("$.n", format!("n⁶ must lie in 1..={MAX_POINTS}")));
                }
            }
            (None, Some(count)) => {
                if count == 0 || count > MAX_POINTS {
                    return Err(at("$.random", format!("count must lie in 1..={MAX_POINTS}")));
                }
            }
            _ => return Err(at("$", "exactly one of `n` and `random` is required")),
        }
        Ok(())
    }

    pub fn points(&self) -> Vec<Point> {
        if let Some(count) = self.random {
            let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
            return (0..count)
                .map(|_| std::array::from_fn(|i| draw(&mut rng, self.bounds[i])))
                .collect();
        }
        let n = self.n.unwrap_or(1);
        let axis = |i: usize, k: usize| {
            let [lo, hi] = self.bounds[i];
            if n == 1 {
                0.5 * (lo + hi)
            } else {
                lo + (hi - lo) * k as f64 / (n - 1) as f64
            }
        };
        let total = n.pow(DIM as u32);
        (0..total)
            .map(|mut flat| {
                let mut p = [0.0; DIM];
                for i in (0..DIM).rev() {
                    p[i] = axis(i, flat % n);
                    flat /= n;
                }
                p
            })
            .collect()
    }
}

fn draw(rng: &mut ChaCha8Rng, [lo, hi]: [f64; 2]) -> f64 {
    if lo < hi {
        rng.gen_range(lo..hi)
    } else {
        lo
    }
}

/// A candidate solution of a Monge-Ampère equation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "builtin", rename_all = "kebab-case", deny_unknown_fields)]
pub enum BuiltinSolution {
    /// `∫_a^{√(xy+yz+zx)} (b + 4ξ³)^{1/3} dξ`.
    ChynowethSewellIntegral { a: f64, b: f64 },
    /// `√(x²+2y)³/3 − z²/2`.
    ChynowethSewellRegular,
    Quadratic { hessian: M3 },
}

impl BuiltinSolution {
    pub fn integral(&self) -> Option<ChynowethSewellIntegral> {
        match *self {
            BuiltinSolution::ChynowethSewellIntegral { a, b } => Some(ChynowethSewellIntegral { a, b }),
            _ => None,
        }
    }
}

/// One row of a user table: point, value, gradient and Hessian.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableEntry {
    pub x: P3,
    #[serde(default)]
    pub value: Option<f64>,
    #[serde(default)]
    pub gradient: Option<P3>,
    pub hessian: M3,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SolutionSpec {
    Builtin(BuiltinSolution),
    Table { table: Vec<TableEntry> },
}

/// `{"solution": .., "region": ..}`; the region is required for built-ins.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolutionManifest {
    pub solution: SolutionSpec,
    #[serde(default)]
    pub region: Option<Region>,
}

pub fn parse_solution_manifest(text: &str) -> Result<SolutionManifest> {
    let m: SolutionManifest = serde_json::from_str(text).map_err(syntax)?;
    m.validate()?;
    Ok(m)
}

fn finite(xs: impl IntoIterator<Item = f64>) -> bool {
    xs.into_iter().all(f64::is_finite)
}

fn validate_region(r: &Region) -> Result<()> {
    for (i, b) in r.bounds.iter().enumerate() {
        if !(finite(*b) && b[0] < b[1] && (b[1] - b[0]).is_finite()) {
            return Err(at(&format!("$.region.box[{i}]"), format!("invalid interval {b:?}")));
        }
    }
    if !r.constraints.iter().all(|c| c.min.is_finite()) {
        return Err(at("$.region.constraints", "bounds must be finite"));
    }
    Ok(())
}

impl SolutionManifest {
    pub fn validate(&self) -> Result<()> {
        match &self.solution {
            SolutionSpec::Builtin(b) => {
                let ok = match b {
                    BuiltinSolution::ChynowethSewellIntegral { a, b } => finite([*a, *b]),
                    BuiltinSolution::ChynowethSewellRegular => true,
                    BuiltinSolution::Quadratic { hessian } => finite(hessian.iter().flatten().copied()),
                };
                if !ok {
                    return Err(at("$.solution", "parameters must be finite"));
                }
                let region = self
                    .region
                    .as_ref()
                    .ok_or_else(|| at("$.region", "built-in solutions need a sampling region"))?;
                validate_region(region)?;
            }
            SolutionSpec::Table { table } => {
                if table.is_empty() || table.len() > MAX_POINTS {
                    return Err(at("$.solution.table", "expected 1 to 10⁶ entries"));
                }
                for (n, e) in table.iter().enumerate() {
                    let nums = e
                        .x
                        .iter()
                        .chain(e.hessian.iter().flatten())
                        .chain(e.gradient.iter().flatten())
                        .chain(e.value.iter())
                        .copied();
                    if !finite(nums) {
                        return Err(at(&format!("$.solution.table[{n}]"), "entries must be finite"));
                    }
                }
                if let Some(r) = &self.region {
                    validate_region(r)?;
                }
            }
        }
        Ok(())
    }
}

/// A parametrized candidate for `verify-generalized`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "builtin", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SurfaceSpec {
    /// The generalized solution `L` of the Chynoweth-Sewell equation.
    ChynowethSewell { b: f64, gamma: f64 },
    /// Graph of `df` for a built-in solution.
    Graph { solution: BuiltinSolution },
    /// Such a graph perturbed off the Lagrangian condition.
    PerturbedGraph { solution: BuiltinSolution, eps: f64 },
}

impl SurfaceSpec {
    pub fn chynoweth_sewell(&self) -> Option<ChynowethSewellSurface> {
        match *self {
            SurfaceSpec::ChynowethSewell { b, gamma } => Some(ChynowethSewellSurface { b, gamma }),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurfaceManifest {
    pub surface: SurfaceSpec,
    pub region: Region,
}

pub fn parse_surface_manifest(text: &str) -> Result<SurfaceManifest> {
    let m: SurfaceManifest = serde_json::from_str(text).map_err(syntax)?;
    let ok = match &m.surface {
        SurfaceSpec::ChynowethSewell { b, gamma } => finite([*b, *gamma]),
        SurfaceSpec::Graph { .. } => true,
        SurfaceSpec::PerturbedGraph { eps, .. } => eps.is_finite(),
    };
    if !ok {
        return Err(at("$.surface", "parameters must be finite"));
    }
    validate_region(&m.region)?;
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Scalar;

    #[test]
    fn parses_exact_and_float_forms() {
        let text = r#"{"degree": 3, "mode": "exact", "terms": [
            {"idx": [1, 2, 3], "c": "1/2"}, {"idx": [4, 5, 6], "c": -3}]}"#;
        let AnyForm::Exact(w) = parse_form(text).unwrap() else {
            panic!("expected exact mode");
        };
        assert_eq!(w.coeff(&[1, 2, 3]), Rational::from_ratio(1, 2));
        assert_eq!(w.coeff(&[4, 5, 6]), Rational::from_i64(-3));
        let f = parse_form(r#"{"degree":1,"mode":"float","terms":[{"idx":[2],"c":0.25}]}"#).unwrap();
        assert_eq!(f.to_float().coeff(&[2]), 0.25);
    }

    #[test]
    fn rejects_malformed_forms_with_positions() {
        let err = parse_form("{\"degree\": 3,\n \"mode\": }").unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
        for bad in [
            r#"{"degree": 3, "mode": "exact", "terms": [{"idx": [2, 1, 3], "c": "1"}]}"#,
            r#"{"degree": 3, "mode": "exact", "terms": [{"idx": [1, 2], "c": "1"}]}"#,
            r#"{"degree": 3, "mode": "exact", "terms": [{"idx": [1, 2, 7], "c": "1"}]}"#,
            r#"{"degree": 3, "mode": "exact", "terms": [{"idx": [1, 2, 3], "c": "1/0"}]}"#,
            r#"{"degree": 3, "mode": "exact", "terms": [{"idx": [1, 2, 3], "c": true}]}"#,
            r#"{"degree": 7, "mode": "exact", "terms": []}"#,
            r#"{"degree": 3, "mode": "exotic", "terms": []}"#,
            r#"{"degree": 1, "mode": "float", "terms": [{"idx": [1], "c": 1}, {"idx": [1], "c": 2}]}"#,
        ] {
            assert!(parse_form(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn round_trip_is_exact() {
        let text = r#"{"degree":2,"mode":"float","terms":[{"idx":[1,4],"c":0.1},{"idx":[2,5],"c":-1e-300}]}"#;
        let w = parse_form(text).unwrap();
        let again = parse_form(&form_to_value(&w).to_string()).unwrap();
        assert_eq!(w, again);
    }

    #[test]
    fn grid_and_random_samples() {
        let grid = parse_sample_spec(r#"{"box": [[0,1],[0,1],[0,1],[0,1],[0,1],[0,1]], "n": 2}"#).unwrap();
        let pts = grid.points();
        assert_eq!(pts.len(), 64);
        assert_eq!(pts[1], [0.0, 0.0, 0.0, 0.0, 0.0, 1.0]);
        let random = parse_sample_spec(
            r#"{"box": [[-1,1],[-1,1],[-1,1],[-1,1],[-1,1],[-1,1]], "random": 5, "seed": 3}"#,
        )
        .unwrap();
        assert_eq!(random.points(), random.points());
        assert!(parse_sample_spec(r#"{"box": [[0,1],[0,1],[0,1],[0,1],[0,1],[0,1]], "n": 100}"#).is_err());
        assert!(parse_sample_spec(r#"{"box": [[0,1],[0,1],[0,1],[0,1],[0,1],[0,1]]}"#).is_err());
    }

    #[test]
    fn manifests() {
        let m = parse_solution_manifest(
            r#"{"solution": {"builtin": "chynoweth-sewell-integral", "a": 1, "b": 1},
                "region": {"box": [[0.1,2],[0.1,2],[0.1,2]],
                           "constraints": [{"quantity": "xy+yz+zx", "min": 0.25}]}}"#,
        )
        .unwrap();
        assert!(m.solution == SolutionSpec::Builtin(BuiltinSolution::ChynowethSewellIntegral { a: 1.0, b: 1.0 }));
        assert!(parse_solution_manifest(r#"{"solution": {"builtin": "chynoweth-sewell-regular"}}"#).is_err());
        let t = parse_solution_manifest(
            r#"{"solution": {"table": [{"x": [0,0,0], "hessian": [[1,0,0],[0,1,0],[0,0,1]]}]}}"#,
        )
        .unwrap();
        assert!(matches!(t.solution, SolutionSpec::Table { .. }));
        let s = parse_surface_manifest(
            r#"{"surface": {"builtin": "chynoweth-sewell", "b": 1, "gamma": 0.5},
                "region": {"box": [[0.1,2],[0.1,2],[0.1,2]]}}"#,
        )
        .unwrap();
        assert!(s.surface.chynoweth_sewell().is_some());
    }
}
