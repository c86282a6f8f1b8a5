//! `mastruct`: command-line front end with JSON reports.
//!
//! Exit codes: 0 when the check passes or the input is classified, 1 when a
//! check fails, 2 on input errors. A report is written in every case.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use mastruct::exterior::Form;
use mastruct::fields::{
    local_constancy_report, ConstantForm, CurvatureSteps, FormField, Tolerances, Twisted, Verdict,
};
use mastruct::hitchin::{self, Decomposition, Orbit};
use mastruct::json::{self, AnyForm, BuiltinSolution, SolutionSpec, SurfaceSpec};
use mastruct::monge_ampere::{
    self, check_generalized, residual, residual_of_hessian, ChynowethSewellRegular, Graph,
    MAEquation, PerturbedGraph, Quadratic, ReportedForm, Solution,
};
use mastruct::scalar::{parse_rational, rational_to_string, Number};
use mastruct::{matode, stenzel, Rational, RealScalar};
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "mastruct", version, about = "Monge-Ampère structures on 6-dimensional symplectic space")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Output {
    /// Write the report to PATH instead of stdout.
    #[arg(long, value_name = "PATH")]
    json: Option<PathBuf>,
}

#[derive(Args)]
struct FormInput {
    /// Form JSON file.
    form: PathBuf,
    /// Zero threshold for float forms (exact forms always use 0).
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
}

#[derive(Args)]
struct Equation {
    /// Built-in equation: hess, special-lagrangian, pseudo, chynoweth-sewell.
    #[arg(long)]
    eq: Option<String>,
    /// Parameter γ as "p/q" or a decimal.
    #[arg(long, default_value = "1")]
    gamma: String,
    /// Custom effective 3-form (exact mode) instead of a built-in.
    #[arg(long, value_name = "PATH", conflicts_with = "eq")]
    form: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Orbit of an effective 3-form among the nine normal forms.
    Classify {
        #[command(flatten)]
        input: FormInput,
        #[command(flatten)]
        out: Output,
    },
    /// Hitchin splitting ω = α + β or ω = α + ᾱ, and the dual ω̂.
    Decompose {
        #[command(flatten)]
        input: FormInput,
        /// Use float arithmetic even for exact input.
        #[arg(long)]
        float: bool,
        #[command(flatten)]
        out: Output,
    },
    /// K_ω, λ, q_K and q_LR.
    Invariants {
        #[command(flatten)]
        input: FormInput,
        #[command(flatten)]
        out: Output,
    },
    /// Residual of a candidate solution at sampled points.
    VerifySolution {
        #[command(flatten)]
        equation: Equation,
        /// Solution manifest.
        #[arg(long)]
        solution: PathBuf,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        #[command(flatten)]
        out: Output,
    },
    /// Lagrangian and ω-annihilation check for a parametrized 3-fold.
    VerifyGeneralized {
        #[command(flatten)]
        equation: Equation,
        /// Surface manifest.
        #[arg(long)]
        surface: PathBuf,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        #[command(flatten)]
        out: Output,
    },
    /// Elliptic/hyperbolic structure of a constant-coefficient equation.
    Structure {
        #[command(flatten)]
        equation: Equation,
        #[command(flatten)]
        out: Output,
    },
    /// dω, dω̂ and R(q_ω) for a constant structure, optionally twisted by a
    /// nonlinear symplectomorphism.
    LocalConstancy {
        #[command(flatten)]
        equation: Equation,
        /// Sample grid JSON; defaults to 8 random points in [−0.5, 0.5]⁶.
        #[arg(long, value_name = "PATH")]
        grid: Option<PathBuf>,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// Strength of the cubic generating function of the twist.
        #[arg(long, default_value_t = 0.0)]
        twist: f64,
        #[arg(long, default_value_t = mastruct::fields::DEFAULT_STEP)]
        step: f64,
        #[arg(long)]
        richardson: bool,
        #[arg(long)]
        closedness_tol: Option<f64>,
        #[arg(long)]
        curvature_tol: Option<f64>,
        #[command(flatten)]
        out: Output,
    },
    /// The Stenzel Calabi-Yau structure on T*S³.
    Stenzel {
        #[arg(long, default_value_t = 1.0)]
        c: f64,
        #[arg(long, default_value_t = 3.0)]
        tau_max: f64,
        #[arg(long, default_value_t = 1e-3)]
        step: f64,
        #[arg(long, default_value_t = 50)]
        samples: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// Half-width of the sampled box in each chart coordinate.
        #[arg(long, default_value_t = 0.4)]
        radius: f64,
        #[command(flatten)]
        out: Output,
    },
    /// Cascade integration of ∂ᵢG·G⁻¹ = Cᵢ for a manufactured flat Cᵢ.
    Matode {
        #[arg(long = "box", default_value_t = 0.5)]
        half_width: f64,
        #[arg(long, default_value_t = 0.015625)]
        step: f64,
        #[arg(long, default_value_t = 3)]
        manufactured_seed: u64,
        #[arg(long, default_value_t = 3)]
        size: usize,
        #[arg(long, default_value_t = 1e-5)]
        tol: f64,
        #[command(flatten)]
        out: Output,
    },
}

/// Input problems, reported with exit code 2.
struct InputError(String);

impl<E: std::fmt::Display> From<E> for InputError {
    fn from(e: E) -> Self {
        InputError(e.to_string())
    }
}

type Run = Result<(Value, bool), InputError>;

fn conventions() -> Value {
    json!({
        "basis": "indices 1-3 are e (x), 4-6 are f (p)",
        "omega": "e1^e4 + e2^e5 + e3^e6",
        "theta": "e123456 = -omega^3/6",
        "lambda": "Tr(K^2)/6",
        "qK_over_qLR": hitchin::Q_CONSTANT.to_string(),
        "normal_form_lambda": {
            "Row1": "gamma^2", "Row2": "-4 gamma^2", "Row3": "-4 gamma^2",
            "Row4": "0", "Row5": "0", "Row6": "0", "Row7": "0", "Row8": "0", "Row9": "0"
        },
        "omega_wedge_dual_over_theta": "-2",
        "stenzel_tau": "tau = 1 + 2|v|^2 under xi",
    })
}

fn read(path: &Path) -> Result<String, InputError> {
    std::fs::read_to_string(path).map_err(|e| InputError(format!("{}: {e}", path.display())))
}

fn read_form(path: &Path) -> Result<AnyForm, InputError> {
    json::parse_form(&read(path)?).map_err(|e| InputError(format!("{}: {e}", path.display())))
}

fn require_degree3(w: &AnyForm) -> Result<(), InputError> {
    if w.degree() == 3 {
        Ok(())
    } else {
        Err(InputError(format!("expected a 3-form, got degree {}", w.degree())))
    }
}

/// Scalar-mode specific reporting.
trait Mode: RealScalar {
    fn number(&self) -> Number;
    fn reported(w: &Form<Self>) -> ReportedForm;
}

impl Mode for Rational {
    fn number(&self) -> Number {
        Number::Exact(self.clone())
    }

    fn reported(w: &Form<Self>) -> ReportedForm {
        ReportedForm::exact(w)
    }
}

impl Mode for f64 {
    fn number(&self) -> Number {
        Number::Float(*self + 0.0)
    }

    fn reported(w: &Form<Self>) -> ReportedForm {
        ReportedForm::float(w)
    }
}

fn matrix<S: Mode>(m: &[Vec<S>]) -> Vec<Vec<Number>> {
    m.iter().map(|r| r.iter().map(Mode::number).collect()).collect()
}

fn classify_form<S: Mode>(w: &Form<S>, tol: f64) -> Run {
    if !mastruct::symplectic::is_effective(w) {
        return Ok((json!({"effective": false}), false));
    }
    let c = hitchin::classify(w, tol)?;
    let (p, n, z) = c.invariants.signature;
    let report = json!({
        "effective": true,
        "orbit": c.orbit.to_string(),
        "signatureQK": [p, n, z],
        "lambda": c.lambda.number(),
        "lambda_sign": c.invariants.lambda_sign,
        "annihilator_dim": c.invariants.annihilator_dim,
    });
    Ok((report, c.orbit != Orbit::Unclassified))
}

fn classify(input: &FormInput) -> Run {
    let w = read_form(&input.form)?;
    require_degree3(&w)?;
    let (mut report, ok) = match &w {
        AnyForm::Exact(w) => classify_form(w, 0.0)?,
        AnyForm::Float(w) => classify_form(w, input.tol)?,
    };
    report["mode"] = json!(w.mode());
    report["tol"] = json!(if matches!(w, AnyForm::Exact(_)) { 0.0 } else { input.tol });
    Ok((report, ok))
}

fn decompose_form<S: Mode>(w: &Form<S>, tol: f64) -> Result<Value, mastruct::Error> {
    let d = hitchin::decompose(w, tol)?;
    let dual = hitchin::dual_of(&d);
    let (kind, pieces, sum) = match &d {
        Decomposition::Hyperbolic { alpha, beta } => (
            "hyperbolic",
            json!({"alpha": S::reported(alpha), "beta": S::reported(beta)}),
            alpha + beta,
        ),
        Decomposition::Elliptic { alpha } => (
            "elliptic",
            json!({"alpha_re": S::reported(&alpha.re()), "alpha_im": S::reported(&alpha.im())}),
            alpha.re().scale(&S::from_i64(2)),
        ),
    };
    Ok(json!({
        "kind": kind,
        "lambda": hitchin::pfaffian(w)?.number(),
        "decomposition": pieces,
        "dual": S::reported(&dual),
        "sum_defect": (&sum - w).max_abs(),
    }))
}

fn decompose(input: &FormInput, force_float: bool) -> Run {
    let w = read_form(&input.form)?;
    require_degree3(&w)?;
    if !mastruct::symplectic::is_effective(&w.to_float()) {
        return Ok((json!({"effective": false}), false));
    }
    let float = |note: Option<&str>| -> Run {
        let mut r = match decompose_form(&w.to_float(), input.tol) {
            Ok(r) => r,
            Err(e) => return Ok((json!({"effective": true, "error": e.to_string()}), false)),
        };
        r["mode"] = json!("float");
        r["tol"] = json!(input.tol);
        if let Some(n) = note {
            r["note"] = json!(n);
        }
        Ok((r, true))
    };
    match (&w, force_float) {
        (AnyForm::Exact(e), false) => match decompose_form(e, 0.0) {
            Ok(mut r) => {
                r["mode"] = json!("exact");
                Ok((r, true))
            }
            Err(mastruct::Error::Irrational(_)) => {
                float(Some("sqrt|lambda| is irrational; float mode used"))
            }
            Err(e) => Ok((json!({"effective": true, "error": e.to_string()}), false)),
        },
        _ => float(None),
    }
}

fn invariants_form<S: Mode>(w: &Form<S>) -> Result<Value, mastruct::Error> {
    let data = hitchin::hitchin_data(w)?;
    let tol = if S::EXACT { 0.0 } else { 1e-9 };
    let sig = |q: &[Vec<S>]| -> Result<[usize; 3], mastruct::Error> {
        let (p, n, z) = hitchin::signature(q, tol)?;
        Ok([p, n, z])
    };
    let c = hitchin::proportionality_constant(&data.q_k, &data.q_lr);
    Ok(json!({
        "effective": true,
        "lambda": data.lambda.number(),
        "k": matrix(&data.k.m.iter().map(|r| r.to_vec()).collect::<Vec<_>>()),
        "q_k": matrix(&data.q_k),
        "q_lr": matrix(&data.q_lr),
        "signatureQK": sig(&data.q_k)?,
        "signatureQLR": sig(&data.q_lr)?,
        "qk_over_qlr": c.map(|c| c.number()),
    }))
}

fn invariants(input: &FormInput) -> Run {
    let w = read_form(&input.form)?;
    require_degree3(&w)?;
    if !mastruct::symplectic::is_effective(&w.to_float()) {
        return Ok((json!({"effective": false}), false));
    }
    let mut r = match &w {
        AnyForm::Exact(w) => invariants_form(w)?,
        AnyForm::Float(w) => invariants_form(w)?,
    };
    r["mode"] = json!(w.mode());
    Ok((r, true))
}

fn equation(e: &Equation) -> Result<MAEquation, InputError> {
    if let Some(path) = &e.form {
        let AnyForm::Exact(w) = read_form(path)? else {
            return Err(InputError("custom equations need an exact form".into()));
        };
        return Ok(MAEquation::from_form(&path.display().to_string(), w)?);
    }
    let name = e
        .eq
        .as_deref()
        .ok_or_else(|| InputError("one of --eq and --form is required".into()))?;
    let gamma = parse_rational(&e.gamma)
        .ok_or_else(|| InputError(format!("--gamma `{}` is not a rational", e.gamma)))?;
    Ok(monge_ampere::builtin(name, &gamma)?)
}

fn equation_value(eq: &MAEquation) -> Value {
    json!({
        "name": eq.name,
        "gamma": eq.gamma.as_ref().map(rational_to_string),
        "pde": eq.pde().to_string(),
    })
}

fn builtin_solution(b: &BuiltinSolution) -> Box<dyn Solution> {
    match b {
        BuiltinSolution::ChynowethSewellIntegral { a, b } => {
            Box::new(monge_ampere::ChynowethSewellIntegral { a: *a, b: *b })
        }
        BuiltinSolution::ChynowethSewellRegular => Box::new(ChynowethSewellRegular),
        BuiltinSolution::Quadratic { hessian } => Box::new(Quadratic::new(*hessian)),
    }
}

fn verify_solution(e: &Equation, path: &Path, samples: usize, seed: u64, tol: f64) -> Run {
    let eq = equation(e)?;
    let manifest = json::parse_solution_manifest(&read(path)?)?;
    let residuals: Vec<([f64; 3], f64)> = match &manifest.solution {
        SolutionSpec::Builtin(b) => {
            let region = manifest.region.as_ref().expect("validated manifest has a region");
            let f = builtin_solution(b);
            region
                .sample(samples, seed)?
                .into_iter()
                .map(|x| (x, residual(&eq, f.as_ref(), &x)))
                .collect()
        }
        SolutionSpec::Table { table } => {
            let w = eq.float_form();
            table
                .iter()
                .map(|t| (t.x, residual_of_hessian(&w, &t.hessian)))
                .collect()
        }
    };
    let (worst_at, max_residual) = residuals
        .iter()
        .fold(([0.0; 3], 0.0_f64), |(p, m), (x, r)| {
            if r.abs() > m || r.is_nan() {
                (*x, r.abs())
            } else {
                (p, m)
            }
        });
    let passed = max_residual < tol;
    Ok((
        json!({
            "equation": equation_value(&eq),
            "solution": manifest.solution,
            "samples": residuals.len(),
            "seed": seed,
            "mode": "float",
            "tol": tol,
            "max_residual": max_residual,
            "worst_point": worst_at,
            "passed": passed,
        }),
        passed,
    ))
}

fn verify_generalized(e: &Equation, path: &Path, samples: usize, seed: u64, tol: f64) -> Run {
    let eq = equation(e)?;
    let manifest = json::parse_surface_manifest(&read(path)?)?;
    let points = manifest.region.sample(samples, seed)?;
    let report = match &manifest.surface {
        SurfaceSpec::ChynowethSewell { .. } => {
            let l = manifest.surface.chynoweth_sewell().expect("matched variant");
            check_generalized(&eq, &l, &points, tol)
        }
        SurfaceSpec::Graph { solution } => {
            let f = builtin_solution(solution);
            check_generalized(&eq, &Graph(f.as_ref()), &points, tol)
        }
        SurfaceSpec::PerturbedGraph { solution, eps } => {
            let f = builtin_solution(solution);
            let l = PerturbedGraph { f: f.as_ref(), eps: *eps };
            check_generalized(&eq, &l, &points, tol)
        }
    };
    let passed = report.passed;
    Ok((
        json!({
            "equation": equation_value(&eq),
            "surface": manifest.surface,
            "seed": seed,
            "mode": "float",
            "report": report,
            "passed": passed,
        }),
        passed,
    ))
}

fn structure(e: &Equation) -> Run {
    let eq = equation(e)?;
    match monge_ampere::geometric_structure(&eq) {
        Ok(r) => Ok((serde_json::to_value(r)?, true)),
        Err(mastruct::Error::DegenerateStructure) => Ok((
            json!({"equation": equation_value(&eq), "error": "degenerate structure (λ = 0)"}),
            false,
        )),
        Err(err) => Err(err.into()),
    }
}

#[allow(clippy::too_many_arguments)]
fn local_constancy(
    e: &Equation,
    grid: Option<&Path>,
    seed: u64,
    twist: f64,
    step: f64,
    richardson: bool,
    closedness: Option<f64>,
    curvature: Option<f64>,
) -> Run {
    let eq = equation(e)?;
    let spec = match grid {
        Some(p) => json::parse_sample_spec(&read(p)?)?,
        None => json::SampleSpec {
            bounds: [[-0.5, 0.5]; 6],
            n: None,
            random: Some(8),
            seed,
        },
    };
    if !(step > 0.0) {
        return Err(InputError("--step must be positive".into()));
    }
    let points = spec.points();
    let base = eq.float_form();
    let constant = ConstantForm(base.clone());
    let twisted = Twisted { base, kappa: twist };
    let (field, mut tol): (&dyn FormField, Tolerances) = if twist == 0.0 {
        (&constant, Tolerances::exact())
    } else {
        (&twisted, Tolerances::finite_difference())
    };
    if let Some(c) = closedness {
        tol.closedness = c;
    }
    if let Some(c) = curvature {
        tol.curvature = c;
    }
    let steps = CurvatureSteps {
        richardson,
        ..CurvatureSteps::with_step(step)
    };
    let report = local_constancy_report(field, &points, tol, steps)?;
    let passed = report.verdict == Verdict::LocallyConstant;
    Ok((
        json!({
            "equation": equation_value(&eq),
            "twist": twist,
            "grid": spec,
            "mode": "float",
            "report": report,
        }),
        passed,
    ))
}

fn stenzel(c: f64, tau_max: f64, step: f64, samples: usize, seed: u64, radius: f64) -> Run {
    if samples == 0 || !(radius > 0.0 && radius <= 0.5) {
        return Err(InputError("need --samples ≥ 1 and 0 < --radius ≤ 0.5".into()));
    }
    let ode = stenzel::solve_ode(c, tau_max, step)?;
    let points = stenzel::sample_chart(samples, seed, radius);
    let too_far = points.iter().map(|p| p.tau()).fold(0.0, f64::max);
    if too_far > tau_max {
        return Err(InputError(format!("samples reach τ = {too_far} > τmax = {tau_max}")));
    }
    let report = stenzel::stenzel_report(&points, &ode)?;
    let checks = json!({
        "ode_residual_below_1e-8": report.ode_residual < 1e-8,
        "cy_ratio_spread_below_0.5%": report.cy_ratio.spread < 5e-3,
        "elliptic_everywhere": report.max_lambda < 0.0,
        "closed": report.curvature.max_closedness_defect < 1e-3
            && report.curvature.max_dual_closedness_defect < 1e-3,
        "curvature_above_10x_flat_floor": report.non_flat,
        "verdict_not_locally_constant": report.curvature.verdict == Verdict::NotLocallyConstant,
    });
    let passed = checks.as_object().expect("object").values().all(|v| v == &json!(true));
    Ok((
        json!({"seed": seed, "radius": radius, "mode": "float", "report": report, "checks": checks, "passed": passed}),
        passed,
    ))
}

fn run_matode(half_width: f64, step: f64, seed: u64, size: usize, tol: f64) -> Run {
    if size == 0 || size > 16 {
        return Err(InputError("--size must lie in 1..=16".into()));
    }
    let nodes = half_width / step;
    if !(nodes.is_finite() && nodes <= 512.0) {
        return Err(InputError("at most 512 steps per half-axis".into()));
    }
    let c = matode::Manufactured::random(seed, size);
    let out = matode::integrate(&c, half_width, step)?;
    let r = matode::residual(&out.grid, &c);
    let passed = r < tol;
    Ok((
        json!({
            "box": half_width,
            "step": step,
            "manufactured_seed": seed,
            "size": size,
            "nodes_per_axis": out.grid.n,
            "mode": "float",
            "zero_curvature": out.zero_curvature,
            "stages": out.stages,
            "residual": r,
            "tol": tol,
            "passed": passed,
        }),
        passed,
    ))
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Classify { .. } => "classify",
        Command::Decompose { .. } => "decompose",
        Command::Invariants { .. } => "invariants",
        Command::VerifySolution { .. } => "verify-solution",
        Command::VerifyGeneralized { .. } => "verify-generalized",
        Command::Structure { .. } => "structure",
        Command::LocalConstancy { .. } => "local-constancy",
        Command::Stenzel { .. } => "stenzel",
        Command::Matode { .. } => "matode",
    }
}

fn output(c: &Command) -> &Output {
    match c {
        Command::Classify { out, .. }
        | Command::Decompose { out, .. }
        | Command::Invariants { out, .. }
        | Command::VerifySolution { out, .. }
        | Command::VerifyGeneralized { out, .. }
        | Command::Structure { out, .. }
        | Command::LocalConstancy { out, .. }
        | Command::Stenzel { out, .. }
        | Command::Matode { out, .. } => out,
    }
}

fn dispatch(c: &Command) -> Run {
    match c {
        Command::Classify { input, .. } => classify(input),
        Command::Decompose { input, float, .. } => decompose(input, *float),
        Command::Invariants { input, .. } => invariants(input),
        Command::VerifySolution {
            equation,
            solution,
            samples,
            seed,
            tol,
            ..
        } => verify_solution(equation, solution, *samples, *seed, *tol),
        Command::VerifyGeneralized {
            equation,
            surface,
            samples,
            seed,
            tol,
            ..
        } => verify_generalized(equation, surface, *samples, *seed, *tol),
        Command::Structure { equation, .. } => structure(equation),
        Command::LocalConstancy {
            equation,
            grid,
            seed,
            twist,
            step,
            richardson,
            closedness_tol,
            curvature_tol,
            ..
        } => local_constancy(
            equation,
            grid.as_deref(),
            *seed,
            *twist,
            *step,
            *richardson,
            *closedness_tol,
            *curvature_tol,
        ),
        Command::Stenzel {
            c,
            tau_max,
            step,
            samples,
            seed,
            radius,
            ..
        } => stenzel(*c, *tau_max, *step, *samples, *seed, *radius),
        Command::Matode {
            half_width,
            step,
            manufactured_seed,
            size,
            tol,
            ..
        } => run_matode(*half_width, *step, *manufactured_seed, *size, *tol),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (mut report, code) = match dispatch(&cli.command) {
        Ok((r, true)) => (r, 0),
        Ok((r, false)) => (r, 1),
        Err(InputError(msg)) => (json!({"error": msg}), 2),
    };
    let obj = report.as_object_mut().expect("reports are objects");
    obj.insert("command".into(), json!(command_name(&cli.command)));
    obj.insert("status".into(), json!(["ok", "check-failed", "input-error"][code as usize]));
    obj.insert("conventions".into(), conventions());
    let text = serde_json::to_string_pretty(&report).expect("reports serialize") + "\n";
    match &output(&cli.command).json {
        Some(path) => {
            if let Err(e) = std::fs::write(path, &text) {
                eprintln!("cannot write {}: {e}", path.display());
                return ExitCode::from(2);
            }
        }
        None => print!("{text}"),
    }
    if code == 2 {
        if let Some(msg) = report.get("error").and_then(Value::as_str) {
            eprintln!("error: {msg}");
        }
    }
    ExitCode::from(code)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
