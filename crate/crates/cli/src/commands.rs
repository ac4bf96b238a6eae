//! The five verification commands.

use std::path::Path;
use std::sync::Arc;

use fracdirac::clifford::CliffordRep;
use fracdirac::extension::{
    closed_form_mode, dtn_extract, energy_convergence, mode_energy, sobolev_gap, solve_mode_ode, GradedGrid,
    ModeProblem, Perturbation, PerturbationShape, DEFAULT_GRADE, DEFAULT_POINTS, DEFAULT_TMAX_SCALE,
};
use fracdirac::flat::{
    bubble, default_bubble_spinor, geometric_fractional_dirac, interior_residual, sphere_first_eigenvalue,
    yamabe_residual, SpinorField, TorusGrid,
};
use fracdirac::sphere::{
    mu, q_multiplier, q_multiplier_fd, q_operator_sphere, scattering_fit, sphere_multiplier, FitWindow,
    RadialKind, SphereSpectrum,
};
use fracdirac::specfun::d_lambda;
use fracdirac::yamabe::{el_residual, functional, minimize, state_at, MinimizeOptions, Pairing};
use fracdirac::Sign;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Deserialize;
use serde_json::{json, Value};

use crate::report::CaseList;
use crate::{CliError, Command, Config, Outcome, PairingArg, Table};

/// DtN tolerance for λ < 1/2.
const DTN_TOL: f64 = 1e-4;
/// DtN tolerance for λ > 1/2 (after subtracting the first-order term).
const DTN_TOL_SUBTRACTED: f64 = 1e-3;
const KUMMER_TOL: f64 = 1e-7;
const PROFILE_TOL: f64 = 1e-6;
const ENERGY_TOL: f64 = 1e-3;
const MIN_ORDER: f64 = 1.0;
const QUADRATIC_SLACK: f64 = 0.1;
const Q_TOL: f64 = 1e-6;
const Q_EPS: f64 = 1e-5;
const BUBBLE_TOL: f64 = 5e-2;
const RANDOM_CONTROL_MIN: f64 = 0.3;
const STATIONARITY_TOL: f64 = 1e-4;
const POSITIVITY_FLOOR: f64 = 1e-8;
const XIS: [f64; 3] = [0.5, 1.0, 2.0];

pub fn dispatch(config: &Config) -> Result<Outcome, CliError> {
    let echo = serde_json::to_value(config).expect("config serializes");
    let (cases, extra, tables) = match config.cmd {
        Command::VerifyMultiplier => verify_multiplier(config)?,
        Command::Bubble => bubble_sweep(config)?,
        Command::Energy => energy(config)?,
        Command::QOperator => q_operator(config)?,
        Command::Optimize => optimize(config)?,
    };
    let name = serde_json::to_value(config.cmd).expect("command serializes");
    Ok(Outcome {
        report: cases.finish(name.as_str().unwrap_or("unknown"), echo, extra, 0.0),
        tables,
    })
}

type Suite = (CaseList, Value, Vec<Table>);

fn sci(x: f64) -> String {
    format!("{x:.16e}")
}

fn mode_grid(config: &Config, xi: f64) -> GradedGrid {
    GradedGrid {
        t_max: config.t_max.unwrap_or(DEFAULT_TMAX_SCALE) / xi,
        points: config.points.unwrap_or(DEFAULT_POINTS),
        grade: config.grade.unwrap_or(DEFAULT_GRADE),
    }
}

fn mode_problem(config: &Config, n: usize, lambda: f64, xi: f64, s: Sign) -> fracdirac::Result<ModeProblem> {
    ModeProblem::new(n, lambda, xi, s)?.with_grid(mode_grid(config, xi))
}

fn mode_inputs(p: &ModeProblem) -> Value {
    json!({"n": p.n, "lambda": p.lambda, "xi": p.xi, "s": p.s.value()})
}

#[derive(Debug, Deserialize)]
struct ModeRow {
    n: usize,
    lambda: f64,
    xi: f64,
    s: String,
}

fn read_modes(path: &Path, config: &Config) -> Result<Vec<ModeProblem>, CliError> {
    let mut rdr = csv::Reader::from_path(path)?;
    let mut out = Vec::new();
    for row in rdr.deserialize() {
        let row: ModeRow = row?;
        let s = match row.s.trim() {
            "+" | "1" | "+1" => Sign::Plus,
            "-" | "-1" => Sign::Minus,
            other => return Err(CliError::Config(format!("branch sign must be + or -, got '{other}'"))),
        };
        out.push(mode_problem(config, row.n, row.lambda, row.xi, s)?);
    }
    if out.is_empty() {
        return Err(CliError::Config(format!("{} lists no modes", path.display())));
    }
    Ok(out)
}

/// Max relative profile difference between ODE and closed form on `t ∈ [0.01, 5]`.
fn ode_vs_kummer(p: &ModeProblem) -> fracdirac::Result<f64> {
    let ode = solve_mode_ode(p)?;
    let exact = closed_form_mode(p)?;
    Ok(ode
        .t
        .iter()
        .zip(ode.profile.iter().zip(&exact.profile))
        .filter(|(t, _)| (0.01..=5.0).contains(*t))
        .map(|(_, (a, b))| ((a - b) / b).abs())
        .fold(0.0, f64::max))
}

fn verify_multiplier(config: &Config) -> Result<Suite, CliError> {
    let explicit_lambda = config.lambda;
    if let Some(l) = explicit_lambda {
        d_lambda(l)?;
        ModeProblem::new(config.n.unwrap_or(1), l, 1.0, Sign::Plus)?;
    }
    let problems = match &config.modes_file {
        Some(path) => read_modes(path, config)?,
        None => {
            let ns = config.n.map(|n| vec![n]).unwrap_or(vec![1, 2, 3]);
            let lambdas = explicit_lambda.map(|l| vec![l]).unwrap_or(vec![0.1, 0.3, 0.7]);
            let mut v = Vec::new();
            for &n in &ns {
                for &l in &lambdas {
                    for xi in XIS {
                        for s in Sign::both() {
                            v.push(mode_problem(config, n, l, xi, s)?);
                        }
                    }
                }
            }
            v
        }
    };

    struct Flat {
        dtn: fracdirac::Result<f64>,
        kummer: fracdirac::Result<f64>,
        energy: Option<fracdirac::Result<(f64, f64)>>,
    }
    let flat: Vec<Flat> = problems
        .par_iter()
        .map(|p| {
            let sol = solve_mode_ode(p);
            let dtn = sol.as_ref().map_err(Clone::clone).and_then(dtn_extract);
            let energy = (p.lambda < 0.5).then(|| sol.as_ref().map_err(Clone::clone).and_then(mode_energy));
            Flat {
                dtn,
                kummer: ode_vs_kummer(p),
                energy,
            }
        })
        .collect();

    let mut cases = CaseList::default();
    let mut batch = Vec::new();
    for (p, r) in problems.iter().zip(&flat) {
        let tol = if p.lambda < 0.5 { DTN_TOL } else { DTN_TOL_SUBTRACTED };
        let label = format!("flat dtn n={} lambda={} xi={} s={}", p.n, p.lambda, p.xi, p.s.symbol());
        let exact = p.multiplier();
        match &r.dtn {
            Ok(v) => cases.compare(label, mode_inputs(p), *v, exact, tol),
            Err(e) => cases.failed(label, mode_inputs(p), tol, e.to_string()),
        }
        let label = format!("ode vs kummer n={} lambda={} xi={} s={}", p.n, p.lambda, p.xi, p.s.symbol());
        match &r.kummer {
            Ok(v) => cases.check(label, mode_inputs(p), *v, KUMMER_TOL, *v <= KUMMER_TOL),
            Err(e) => cases.failed(label, mode_inputs(p), KUMMER_TOL, e.to_string()),
        }
        let (lhs, rhs) = match &r.energy {
            Some(Ok((l, r))) => (sci(*l), sci(*r)),
            _ => (String::new(), String::new()),
        };
        let (dtn, err) = match &r.dtn {
            Ok(v) => (sci(*v), sci(((v - exact) / exact).abs())),
            Err(_) => (String::new(), String::new()),
        };
        batch.push(vec![
            p.n.to_string(),
            sci(p.lambda),
            sci(p.xi),
            p.s.symbol().to_string(),
            dtn,
            sci(exact),
            err,
            lhs,
            rhs,
        ]);
    }

    if config.modes_file.is_none() {
        let ns = config.n.map(|n| vec![n]).unwrap_or(vec![2, 3]);
        let lambdas: Vec<f64> = match explicit_lambda {
            Some(l) if l < 0.5 => vec![l],
            Some(_) => vec![],
            None => vec![0.1, 0.25, 0.3, 0.4],
        };
        let mut sphere_cases = Vec::new();
        for &n in &ns {
            for &l in &lambdas {
                for k in 1..=5 {
                    for kind in [RadialKind::F, RadialKind::G] {
                        sphere_cases.push((n, l, k, kind));
                    }
                }
            }
        }
        let results: Vec<_> = sphere_cases
            .par_iter()
            .map(|&(n, l, k, kind)| {
                let fit = scattering_fit(n, k, l, kind, FitWindow::default()).map(|f| f.multiplier);
                let exact = mu(n, k).and_then(|m| sphere_multiplier(l, m, kind.sign()));
                (fit, exact)
            })
            .collect();
        for (&(n, l, k, kind), (fit, exact)) in sphere_cases.iter().zip(results) {
            let label = format!("sphere profile n={n} k={k} lambda={l} branch={}", kind.sign().symbol());
            let inputs = json!({"n": n, "k": k, "lambda": l, "s": kind.sign().value()});
            match (fit, exact) {
                (Ok(f), Ok(e)) => cases.compare(label, inputs, f, e, PROFILE_TOL),
                (Err(e), _) | (_, Err(e)) => cases.failed(label, inputs, PROFILE_TOL, e.to_string()),
            }
        }
    }

    let table = Table {
        suffix: "_batch",
        header: [
            "n",
            "lambda",
            "xi",
            "s",
            "dtn_numeric",
            "dtn_closed",
            "rel_err",
            "energy_lhs",
            "energy_rhs",
        ]
        .map(String::from)
        .to_vec(),
        rows: batch,
    };
    Ok((cases, Value::Null, vec![table]))
}

fn flat_params(config: &Config) -> Result<(usize, f64, f64, usize), CliError> {
    let n = config.n.unwrap_or(2);
    let lambda = config.lambda.unwrap_or(0.3);
    let l = config.box_side.unwrap_or(40.0);
    let m = config.m.unwrap_or(256);
    TorusGrid::new(n, l, m)?;
    if !(lambda > 0.0 && lambda < n as f64 / 2.0) {
        return Err(CliError::Config(format!(
            "flat experiments need 0 < lambda < n/2 = {}, got {lambda}",
            n as f64 / 2.0
        )));
    }
    Ok((n, lambda, l, m))
}

fn random_field(grid: TorusGrid, rep: Arc<CliffordRep>, rng: &mut ChaCha8Rng) -> fracdirac::Result<SpinorField> {
    let len = grid.points() * rep.spinor_dim();
    let values = (0..len)
        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    Ok(SpinorField::from_values(grid, rep, values)?.without_mean())
}

fn bubble_sweep(config: &Config) -> Result<Suite, CliError> {
    let (n, lambda, l, m) = flat_params(config)?;
    let rep = Arc::new(CliffordRep::new(n)?);
    let phi0 = default_bubble_spinor(rep.spinor_dim());
    let mu1 = sphere_first_eigenvalue(n, lambda)?;
    let sizes = [(0.5 * l, (m / 2).max(2)), (l, m), (2.0 * l, 2 * m)];
    let grids = sizes
        .iter()
        .map(|&(side, pts)| TorusGrid::new(n, side, pts))
        .collect::<fracdirac::Result<Vec<_>>>()?;
    let mut cases = CaseList::default();
    let mut sweep = Vec::new();
    let mut residuals = Vec::new();
    for g in &grids {
        let psi = bubble(*g, rep.clone(), lambda, &phi0)?;
        let r = yamabe_residual(&psi, lambda, mu1)?;
        let inner = interior_residual(&psi, lambda, mu1, g.side() / 4.0)?;
        residuals.push(r);
        sweep.push(json!({"L": g.side(), "m": g.m(), "residual": r, "interior_residual": inner}));
    }
    let main = grids[1];
    let inputs = json!({"n": n, "lambda": lambda, "L": l, "m": m, "mu": mu1});
    cases.check(
        format!("bubble residual L={l} m={m}"),
        inputs.clone(),
        residuals[1],
        BUBBLE_TOL,
        residuals[1] <= BUBBLE_TOL,
    );
    let worst_ratio = residuals.windows(2).map(|w| w[1] / w[0]).fold(0.0, f64::max);
    cases.check(
        "bubble residual strictly decreasing in L (max successive ratio)",
        json!({"L": sizes.iter().map(|s| s.0).collect::<Vec<_>>()}),
        worst_ratio,
        1.0,
        worst_ratio < 1.0,
    );
    let psi = bubble(main, rep.clone(), lambda, &phi0)?;
    let control = yamabe_residual(&psi, lambda, 0.0)?;
    cases.check("control mu=0 (|residual - 1|)", inputs.clone(), (control - 1.0).abs(), 1e-12, (control - 1.0).abs() <= 1e-12);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let noise = random_field(main, rep.clone(), &mut rng)?;
    let random = yamabe_residual(&noise, lambda, mu1)?;
    cases.check(
        "control random field residual (must exceed)",
        inputs.clone(),
        random,
        RANDOM_CONTROL_MIN,
        random > RANDOM_CONTROL_MIN,
    );
    let half = (n as f64 - 2.0 * lambda) / 2.0;
    let norm_err = psi
        .pointwise_norms()
        .iter()
        .enumerate()
        .map(|(p, a)| {
            let r2: f64 = main.position(p).iter().map(|x| x * x).sum();
            let expect = (2.0 / (1.0 + r2)).powf(half);
            ((a - expect) / expect).abs()
        })
        .fold(0.0, f64::max);
    cases.check("bubble pointwise norm identity", inputs, norm_err, 1e-12, norm_err <= 1e-12);
    let table = Table {
        suffix: "_sweep",
        header: ["L", "m", "residual", "interior_residual"].map(String::from).to_vec(),
        rows: sweep
            .iter()
            .map(|e| {
                vec![
                    sci(e["L"].as_f64().unwrap()),
                    e["m"].to_string(),
                    sci(e["residual"].as_f64().unwrap()),
                    sci(e["interior_residual"].as_f64().unwrap()),
                ]
            })
            .collect(),
    };
    Ok((cases, json!({"sweep": sweep}), vec![table]))
}

/// Least-squares slope of `ln y` against `ln x`.
fn log_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let k = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / k;
    let my = ly.iter().sum::<f64>() / k;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

fn energy(config: &Config) -> Result<Suite, CliError> {
    let n = config.n.unwrap_or(2);
    let lambdas = match config.lambda {
        Some(l) if l > 0.0 && l < 0.5 => vec![l],
        Some(l) => {
            return Err(CliError::Config(format!(
                "the energy identity is stated for lambda in (0, 1/2), got {l}"
            )))
        }
        None => vec![0.1, 0.3, 0.4],
    };
    let mut problems = Vec::new();
    for &l in &lambdas {
        for xi in XIS {
            for s in Sign::both() {
                problems.push(mode_problem(config, n, l, xi, s)?);
            }
        }
    }
    let sols: Vec<_> = problems.par_iter().map(solve_mode_ode).collect();
    let mut cases = CaseList::default();
    for (p, sol) in problems.iter().zip(&sols) {
        let label = format!("energy identity lambda={} xi={} s={}", p.lambda, p.xi, p.s.symbol());
        match sol.as_ref().map_err(Clone::clone).and_then(mode_energy) {
            Ok((lhs, rhs)) => cases.compare(label, mode_inputs(p), lhs, rhs, ENERGY_TOL),
            Err(e) => cases.failed(label, mode_inputs(p), ENERGY_TOL, e.to_string()),
        }
    }

    let top = config.points.unwrap_or(DEFAULT_POINTS);
    let ladder = [top / 8, top / 4, top / 2, top];
    let mut convergence = Vec::new();
    for &l in &lambdas {
        let p = mode_problem(config, n, l, 1.0, Sign::Plus)?;
        let label = format!("energy refinement order lambda={l}");
        match energy_convergence(&p, &ladder) {
            Ok(c) => {
                let worst = c.orders.iter().copied().fold(f64::INFINITY, f64::min);
                cases.check(label, mode_inputs(&p), worst, MIN_ORDER, worst >= MIN_ORDER);
                convergence.push(json!(c));
            }
            Err(e) => cases.failed(label, mode_inputs(&p), MIN_ORDER, e.to_string()),
        }
    }

    // Sobolev gaps over random zero-trace perturbations.
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut uniform = || rng.gen::<f64>();
    let mut sobolev_rows = Vec::new();
    let mut worst = f64::INFINITY;
    let mut sobolev_error = None;
    for i in 0..100 {
        let idx = i % sols.len();
        let count = 1 + (uniform() * 3.0) as usize;
        let shapes: Vec<PerturbationShape> = (0..count).map(|_| PerturbationShape::draw(&mut uniform)).collect();
        let Ok(sol) = &sols[idx] else { continue };
        let eta = Perturbation::from_shapes(&sol.t, sol.problem.xi, &shapes);
        let rhs = 2.0 * sol.problem.lambda / d_lambda(sol.problem.lambda)? * sol.problem.multiplier();
        match sobolev_gap(sol, &eta) {
            Ok(g) => {
                let rel = g / rhs.abs();
                worst = worst.min(rel);
                sobolev_rows.push(vec![
                    i.to_string(),
                    sci(sol.problem.lambda),
                    sci(sol.problem.xi),
                    sol.problem.s.symbol().to_string(),
                    sci(rel),
                ]);
            }
            Err(e) => sobolev_error = Some(e.to_string()),
        }
    }
    let label = "sobolev gap over 100 random zero-trace perturbations (min relative gap)";
    match sobolev_error {
        Some(e) => cases.failed(label, json!({"seed": config.seed}), ENERGY_TOL, e),
        None => cases.check(label, json!({"seed": config.seed}), worst, ENERGY_TOL, worst >= -ENERGY_TOL),
    }

    let eps = [0.025, 0.05, 0.1, 0.2, 0.4];
    let shapes = [
        PerturbationShape::Bump {
            center: 1.0,
            width: 0.6,
            amplitude: 0.8,
        },
        PerturbationShape::Ramp {
            amplitude: -0.5,
            rise: 2.0,
            decay: 1.0,
        },
    ];
    for (p, sol) in problems.iter().zip(&sols) {
        if p.xi != 1.0 || p.s != Sign::Plus {
            continue;
        }
        let Ok(sol) = sol else { continue };
        let rhs = 2.0 * p.lambda / d_lambda(p.lambda)? * p.multiplier();
        let base = sobolev_gap(sol, &Perturbation::zero(sol.t.len()))?;
        cases.check(
            format!("sobolev gap at zero perturbation lambda={}", p.lambda),
            mode_inputs(p),
            (base / rhs).abs(),
            ENERGY_TOL,
            (base / rhs).abs() <= ENERGY_TOL,
        );
        let eta = Perturbation::from_shapes(&sol.t, p.xi, &shapes);
        let growth = eps
            .iter()
            .map(|&e| sobolev_gap(sol, &eta.scaled(e)).map(|g| g - base))
            .collect::<fracdirac::Result<Vec<_>>>()?;
        let slope = log_slope(&eps, &growth);
        cases.check(
            format!("sobolev gap growth exponent lambda={}", p.lambda),
            mode_inputs(p),
            slope,
            QUADRATIC_SLACK,
            (slope - 2.0).abs() <= QUADRATIC_SLACK,
        );
    }
    let table = Table {
        suffix: "_sobolev",
        header: ["sample", "lambda", "xi", "s", "relative_gap"].map(String::from).to_vec(),
        rows: sobolev_rows,
    };
    Ok((cases, json!({"convergence": convergence}), vec![table]))
}

fn q_operator(config: &Config) -> Result<Suite, CliError> {
    let ns = match config.n {
        Some(n) if (1..=8).contains(&n) => vec![n],
        Some(n) => return Err(CliError::Config(format!("sphere dimension must be in 1..=8, got {n}"))),
        None => vec![2, 3, 4, 5],
    };
    let mut cases = CaseList::default();
    for &n in &ns {
        for k in 1..=20 {
            let m = mu(n, k)?;
            for s in Sign::both() {
                let label = format!("q multiplier n={n} k={k} s={}", s.symbol());
                let inputs = json!({"n": n, "k": k, "s": s.value()});
                match (q_multiplier(n, m, s), q_multiplier_fd(n, m, s, Q_EPS)) {
                    (Ok(a), Ok(f)) => cases.compare(label, inputs, a, f, Q_TOL),
                    (Err(e), _) | (_, Err(e)) => cases.failed(label, inputs, Q_TOL, e.to_string()),
                }
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ n as u64);
        let mut draw = || -> Vec<[Complex64; 2]> {
            (0..20)
                .map(|_| {
                    [
                        Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
                        Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
                    ]
                })
                .collect()
        };
        let a = SphereSpectrum::from_coeffs(n, draw())?;
        let b = SphereSpectrum::from_coeffs(n, draw())?;
        let (ca, cb) = (Complex64::new(0.7, -1.3), Complex64::new(-2.1, 0.4));
        let lhs = q_operator_sphere(&a.linear_combination(ca, &b, cb)?)?;
        let rhs = q_operator_sphere(&a)?.linear_combination(ca, &q_operator_sphere(&b)?, cb)?;
        let err = lhs.max_abs_diff(&rhs)? / rhs.max_abs();
        cases.check(format!("q operator linearity n={n}"), json!({"n": n}), err, 1e-12, err <= 1e-12);
    }
    Ok((cases, Value::Null, Vec::new()))
}

fn optimize(config: &Config) -> Result<Suite, CliError> {
    let (n, lambda, l, m) = flat_params(config)?;
    let iters = config.iters.unwrap_or(50);
    let pairing = match config.pairing.unwrap_or(PairingArg::Absolute) {
        PairingArg::Absolute => Pairing::Absolute,
        PairingArg::Signed => Pairing::Signed,
    };
    let grid = TorusGrid::new(n, l, m)?;
    let rep = Arc::new(CliffordRep::new(n)?);
    let opts = MinimizeOptions {
        max_iters: iters,
        tol: 0.0,
        pairing,
    };
    let inputs = json!({"n": n, "lambda": lambda, "L": l, "m": m, "iterations": iters});
    let mut cases = CaseList::default();

    let psi = bubble(grid, rep.clone(), lambda, &default_bubble_spinor(rep.spinor_dim()))?;
    let phi = geometric_fractional_dirac(&psi, lambda)?;
    let start_el = el_residual(&state_at(&phi, lambda, pairing)?)?;
    cases.check("bubble start: Euler-Lagrange residual", inputs.clone(), start_el, BUBBLE_TOL, start_el <= BUBBLE_TOL);
    let mut extra = Value::Null;
    let mut trace_rows = Vec::new();
    match minimize(&phi, lambda, opts) {
        Ok(state) => {
            let monotone = state.j_trace.windows(2).all(|w| w[1] <= w[0]);
            cases.check("bubble start: monotone J", inputs.clone(), state.value, 0.0, monotone);
            let drop = 1.0 - state.value / state.j_trace[0];
            cases.check(
                format!("bubble start: relative J decrease over {iters} iterations"),
                inputs.clone(),
                drop,
                STATIONARITY_TOL,
                drop < STATIONARITY_TOL,
            );
            let final_el = el_residual(&state).ok();
            for (i, (j, g)) in state.j_trace.iter().zip(&state.grad_trace).enumerate() {
                trace_rows.push(vec![i.to_string(), sci(*j), sci(*g)]);
            }
            extra = json!({
                "lambda": lambda,
                "n": n,
                "grid": {"L": l, "m": m},
                "pairing": format!("{pairing:?}").to_lowercase(),
                "iterations": state.iterations,
                "J_trace": state.j_trace,
                "final_J": state.value,
                "el_residual": final_el,
            });
        }
        Err(e) => cases.failed("bubble start: minimize", inputs.clone(), 0.0, e.to_string()),
    }

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let noise = random_field(grid, rep.clone(), &mut rng)?;
    let noise_el = el_residual(&state_at(&noise, lambda, pairing)?)?;
    cases.check(
        "random start: Euler-Lagrange residual (must exceed)",
        inputs.clone(),
        noise_el,
        RANDOM_CONTROL_MIN,
        noise_el > RANDOM_CONTROL_MIN,
    );
    match minimize(&noise, lambda, opts) {
        Ok(state) => {
            let monotone = state.j_trace.windows(2).all(|w| w[1] <= w[0]);
            cases.check("random start: monotone J", inputs.clone(), state.value, 0.0, monotone);
        }
        Err(e) => cases.failed("random start: minimize", inputs.clone(), 0.0, e.to_string()),
    }

    let small = TorusGrid::new(n, l, 16.min(m))?;
    let mut worst = f64::INFINITY;
    for _ in 0..1000 {
        let f = random_field(small, rep.clone(), &mut rng)?;
        worst = worst.min(functional(&f, lambda, pairing)?);
    }
    cases.check(
        "positivity: min J over 1000 random fields",
        json!({"n": n, "lambda": lambda, "L": l, "m": small.m()}),
        worst,
        POSITIVITY_FLOOR,
        worst >= POSITIVITY_FLOOR,
    );
    let table = Table {
        suffix: "_trace",
        header: ["iteration", "J", "relative_gradient"].map(String::from).to_vec(),
        rows: trace_rows,
    };
    Ok((cases, extra, vec![table]))
}
