//! Flat-space extension problem, one Fourier mode at a time.
//!
//! For a boundary mode `e^{iξ·x}u` with `M(ξ)u = s|ξ|u` the extension
//! `Ψ(x,t) = Ψ̂(t) e^{iξ·x} u` solves the weighted radial ODE
//!
//! `t Ψ̂'' + (1 − 2λ) Ψ̂' + (−|ξ|² t + B) Ψ̂ = 0`, `B = −s|ξ|`,
//!
//! with `Ψ̂(0) = 1` and decay at infinity. Near `t = 0`,
//! `Ψ̂ = 1 + α t + c₂ t^{2λ} + …` with `α = s|ξ|/(1−2λ)`, and the
//! Dirichlet-to-Neumann value (outward normal `−∂_t`) is
//! `−(d_λ/2λ) lim t^{1−2λ} Ψ̂'(t) = −d_λ c₂ = s|ξ|^{2λ}`.
//!
//! Two independent routes produce a [`ModeSolution`]: numerical inward
//! integration of the ODE ([`solve_mode_ode`]) and the Kummer closed form
//! ([`closed_form_mode`]).

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

use crate::ode::Dopri5;
use crate::specfun::{d_lambda, kummer_v, lgamma_signed};
use crate::{Error, Result, Sign};

pub const DEFAULT_POINTS: usize = 4096;
pub const DEFAULT_GRADE: f64 = 3.0;
/// `T_max = DEFAULT_TMAX_SCALE / |ξ|`.
pub const DEFAULT_TMAX_SCALE: f64 = 40.0;

/// The potential term `E_λ` of the general extension operator. It is built
/// from `|∇x|`, `Δx` and the scalar curvature, all trivial for the flat half
/// space, so it vanishes identically here.
pub const FLAT_POTENTIAL: f64 = 0.0;

const ODE_RTOL: f64 = 1e-12;
const CONTAMINATION_TOL: f64 = 1e-6;
/// Matching point for the Frobenius normalization, in units of `1/|ξ|`.
const MATCH_POINT: f64 = 0.25;
/// Smallest Richardson node for the DtN limit, in units of `1/|ξ|`.
const DTN_BASE: f64 = 1e-5;
/// Smallest Richardson node when a finite-difference derivative is needed.
const FD_BASE: f64 = 2e-4;
const RICHARDSON_DEPTH: usize = 3;
const EXTRAPOLATION_TOL: f64 = 1e-5;

/// Graded grid `t_i = T_max (i/M)^grade`, `i = 1..=M`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GradedGrid {
    pub t_max: f64,
    pub points: usize,
    pub grade: f64,
}

impl GradedGrid {
    pub fn nodes(&self) -> Vec<f64> {
        let m = self.points as f64;
        (1..=self.points)
            .map(|i| self.t_max * (i as f64 / m).powf(self.grade))
            .collect()
    }

    fn validate(&self) -> Result<()> {
        if !(self.t_max > 0.0) || !self.t_max.is_finite() {
            return Err(Error::Parameter(format!("T_max must be positive, got {}", self.t_max)));
        }
        if self.points < 64 {
            return Err(Error::Parameter(format!(
                "graded grid needs at least 64 points, got {}",
                self.points
            )));
        }
        if !(self.grade >= 1.0) || !self.grade.is_finite() {
            return Err(Error::Parameter(format!("grade exponent must be >= 1, got {}", self.grade)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModeProblem {
    pub n: usize,
    pub lambda: f64,
    pub xi: f64,
    pub s: Sign,
    pub grid: GradedGrid,
}

impl ModeProblem {
    /// Problem on the default grid (`M = 4096`, grade 3, `T_max = 40/|ξ|`).
    pub fn new(n: usize, lambda: f64, xi: f64, s: Sign) -> Result<Self> {
        let p = Self {
            n,
            lambda,
            xi,
            s,
            grid: GradedGrid {
                t_max: DEFAULT_TMAX_SCALE / xi,
                points: DEFAULT_POINTS,
                grade: DEFAULT_GRADE,
            },
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_grid(mut self, grid: GradedGrid) -> Result<Self> {
        self.grid = grid;
        self.validate()?;
        Ok(self)
    }

    pub fn with_points(self, points: usize) -> Result<Self> {
        let grid = GradedGrid { points, ..self.grid };
        self.with_grid(grid)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.n > crate::clifford::MAX_DIM {
            return Err(Error::Size {
                what: "boundary dimension n",
                value: self.n,
                range: "1..=8",
            });
        }
        if !(self.lambda > 0.0 && self.lambda < 1.0) || self.lambda == 0.5 {
            return Err(Error::Parameter(format!(
                "extension needs lambda in (0,1) without 1/2, got {}",
                self.lambda
            )));
        }
        if !(self.xi > 0.0) || !self.xi.is_finite() {
            return Err(Error::Parameter(format!("|xi| must be positive, got {}", self.xi)));
        }
        self.grid.validate()
    }

    /// `B = −s|ξ|`.
    pub fn b_coefficient(&self) -> f64 {
        -self.s.value() * self.xi
    }

    /// First-order Taylor coefficient `α = s|ξ|/(1−2λ)` of the regular part.
    pub fn first_order_coefficient(&self) -> f64 {
        self.s.value() * self.xi / (1.0 - 2.0 * self.lambda)
    }

    /// Kummer parameter `a = −B/(2|ξ|) + 1/2 + λ = s/2 + 1/2 + λ`.
    pub fn kummer_a(&self) -> f64 {
        0.5 * self.s.value() + 0.5 + self.lambda
    }

    /// Exact DtN value `s|ξ|^{2λ}`.
    pub fn multiplier(&self) -> f64 {
        self.s.value() * self.xi.powf(2.0 * self.lambda)
    }

    /// Frobenius solutions `φ₁ = Σ a_j t^j` and `φ₂ = t^{2λ} Σ b_j t^j` at `t`,
    /// returned as `[(φ₁, tφ₁'), (φ₂, tφ₂')]`.
    fn frobenius(&self, t: f64) -> [(f64, f64); 2] {
        let k2 = self.xi * self.xi;
        let b = self.b_coefficient();
        let two_l = 2.0 * self.lambda;
        let mut out = [(0.0, 0.0); 2];
        for (slot, r) in [0.0, two_l].into_iter().enumerate() {
            let (mut cm2, mut cm1) = (0.0, 1.0);
            let (mut val, mut tder) = (1.0, r);
            let mut tp = 1.0;
            for j in 1..400 {
                let jf = j as f64;
                let c = (k2 * cm2 - b * cm1) / ((jf + r) * (jf + r - two_l));
                tp *= t;
                let term = c * tp;
                val += term;
                tder += (jf + r) * term;
                cm2 = cm1;
                cm1 = c;
                if term.abs() < 1e-18 * val.abs() && j > 4 {
                    break;
                }
            }
            let pre = t.powf(r);
            out[slot] = (pre * val, pre * tder);
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SolutionMethod {
    Ode,
    ClosedForm,
}

#[derive(Debug, Clone, Serialize)]
pub struct ModeDiagnostics {
    pub method: SolutionMethod,
    /// Coefficient `c₂` of `t^{2λ}` in the small-t expansion.
    pub secondary_coefficient: f64,
    /// `|Ψ̂(t₁) − c₂ t₁^{2λ} − 1|` at the smallest grid point.
    pub normalization_defect: f64,
    /// Relative drift against a re-integration from `1.5 T_max`.
    pub contamination_drift: Option<f64>,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
}

/// Sampled profile `Ψ̂` and derivative `Ψ̂'` on the problem's graded grid.
#[derive(Debug, Clone, Serialize)]
pub struct ModeSolution {
    pub problem: ModeProblem,
    pub t: Vec<f64>,
    pub profile: Vec<f64>,
    pub derivative: Vec<f64>,
    pub diagnostics: ModeDiagnostics,
}

impl ModeSolution {
    /// Linear interpolation of the profile (for comparisons off-grid).
    pub fn profile_at(&self, t: f64) -> f64 {
        let idx = self.t.partition_point(|&x| x < t);
        if idx == 0 {
            return self.profile[0];
        }
        if idx >= self.t.len() {
            return *self.profile.last().unwrap();
        }
        let (t0, t1) = (self.t[idx - 1], self.t[idx]);
        let w = (t - t0) / (t1 - t0);
        self.profile[idx - 1] * (1.0 - w) + self.profile[idx] * w
    }
}

/// Closed form `Ψ̂(t) = Γ(a)/Γ(2λ) (2|ξ|)^{2λ} t^{2λ} e^{−|ξ|t} V(a, 2λ+1, 2|ξ|t)`.
pub fn closed_form_mode(p: &ModeProblem) -> Result<ModeSolution> {
    p.validate()?;
    let k = p.xi;
    let lam = p.lambda;
    let a = p.kummer_a();
    let b = 2.0 * lam + 1.0;
    let (lga, sga) = lgamma_signed(a)?;
    let (lg2l, sg2l) = lgamma_signed(2.0 * lam)?;
    let log_c = lga - lg2l + 2.0 * lam * (2.0 * k).ln();
    let sign_c = sga * sg2l;
    let t = p.grid.nodes();
    let mut profile = Vec::with_capacity(t.len());
    let mut derivative = Vec::with_capacity(t.len());
    for &ti in &t {
        let x = 2.0 * k * ti;
        let pre = sign_c * (log_c + 2.0 * lam * ti.ln() - k * ti).exp();
        let v = kummer_v(a, b, x)?;
        // V'(a,b,x) = −a V(a+1,b+1,x)
        let vp = -a * kummer_v(a + 1.0, b + 1.0, x)?;
        let value = pre * v;
        profile.push(value);
        derivative.push(value * (2.0 * lam / ti - k) + pre * 2.0 * k * vp);
    }
    // c₂ = Γ(a)Γ(−2λ)(2k)^{2λ} / (Γ(2λ)Γ(a−2λ))
    let (lgm, sgm) = lgamma_signed(-2.0 * lam)?;
    let (lgd, sgd) = lgamma_signed(a - 2.0 * lam)?;
    let c2 = sga * sgm * sg2l * sgd * (lga + lgm + 2.0 * lam * (2.0 * k).ln() - lg2l - lgd).exp();
    let defect = (profile[0] - c2 * t[0].powf(2.0 * lam) - 1.0).abs();
    Ok(ModeSolution {
        problem: *p,
        t,
        profile,
        derivative,
        diagnostics: ModeDiagnostics {
            method: SolutionMethod::ClosedForm,
            secondary_coefficient: c2,
            normalization_defect: defect,
            contamination_drift: None,
            accepted_steps: 0,
            rejected_steps: 0,
        },
    })
}

struct RawProfile {
    /// `Ψ` up to a common normalization, at every grid node with `t ≤ T_max`.
    values: Vec<f64>,
    derivs: Vec<f64>,
    accepted: usize,
    rejected: usize,
}

/// Asymptotic decaying solution `e^{−kt} t^ρ Σ d_j t^{−j}` with `ρ = λ − (1+s)/2`,
/// returned as `(ln scale, [Ψ, tΨ'] / scale)`.
fn decaying_seed(p: &ModeProblem, t: f64) -> (f64, [f64; 2]) {
    let k = p.xi;
    let lam = p.lambda;
    let rho = lam - 0.5 * (1.0 + p.s.value());
    let mut d: f64 = 1.0;
    let mut sum: f64 = 1.0;
    let mut dsum = rho / t - k;
    for j in 1..30 {
        let jf = j as f64;
        let next = -d * (rho - jf + 1.0) * (rho - jf + 1.0 - 2.0 * lam) / (2.0 * k * jf);
        let term = next * t.powf(-jf);
        if term.abs() > (d * t.powf(1.0 - jf)).abs() || term.abs() < 1e-17 * sum.abs() {
            break;
        }
        d = next;
        sum += term;
        dsum += term * ((rho - jf) / t - k);
    }
    let log_scale = -k * t + rho * t.ln();
    (log_scale, [sum, t * dsum])
}

/// Integrate inward in `σ = ln t` from `start` (≥ T_max) down through the
/// grid nodes. State `[Ψ, tΨ']`, renormalized after every node.
fn integrate_inward(p: &ModeProblem, nodes: &[f64], start: f64) -> Result<RawProfile> {
    let k = p.xi;
    let lam = p.lambda;
    let s = p.s.value();
    let rhs = move |sigma: f64, y: &[f64; 2]| -> [f64; 2] {
        let t = sigma.exp();
        [y[1], 2.0 * lam * y[1] + (k * k * t * t + s * k * t) * y[0]]
    };
    let mut ode = Dopri5::new(rhs, ODE_RTOL, 1e-3);
    let (mut log_scale, mut y) = decaying_seed(p, start);
    let mut sigma = start.ln();
    let mut values = vec![0.0; nodes.len()];
    let mut derivs = vec![0.0; nodes.len()];
    let mut logs = vec![0.0; nodes.len()];
    for i in (0..nodes.len()).rev() {
        let target = nodes[i].ln();
        if target < sigma {
            y = ode.advance(sigma, y, target)?;
            sigma = target;
        }
        let norm = y[0].abs().max(y[1].abs());
        y = [y[0] / norm, y[1] / norm];
        log_scale += norm.ln();
        values[i] = y[0];
        derivs[i] = y[1] / nodes[i];
        logs[i] = log_scale;
    }
    // Express everything relative to the smallest node's scale.
    let base = logs[0];
    for i in 0..nodes.len() {
        let f = (logs[i] - base).exp();
        values[i] *= f;
        derivs[i] *= f;
    }
    Ok(RawProfile {
        values,
        derivs,
        accepted: ode.stats.accepted,
        rejected: ode.stats.rejected,
    })
}

/// Normalize a raw inward solution so that its regular part starts at 1;
/// returns `(A, c₂)` with `Ψ_raw = A (φ₁ + c₂ φ₂)`.
fn frobenius_match(p: &ModeProblem, nodes: &[f64], raw: &RawProfile) -> Result<(f64, f64)> {
    let target = MATCH_POINT / p.xi;
    let idx = nodes.partition_point(|&t| t < target).min(nodes.len() - 1);
    let t0 = nodes[idx];
    let [(f1, tf1), (f2, tf2)] = p.frobenius(t0);
    let (psi, tpsi) = (raw.values[idx], t0 * raw.derivs[idx]);
    let det = f1 * tf2 - f2 * tf1;
    if det.abs() < 1e-300 {
        return Err(Error::Conditioning(format!("Frobenius matching singular at t = {t0}")));
    }
    let a = (psi * tf2 - f2 * tpsi) / det;
    let c = (f1 * tpsi - psi * tf1) / det;
    if !(a.abs() > 0.0) || !a.is_finite() {
        return Err(Error::Integration("inward solution has no regular component".into()));
    }
    Ok((a, c / a))
}

/// Numerical solution of the mode ODE, independent of the Kummer closed form.
pub fn solve_mode_ode(p: &ModeProblem) -> Result<ModeSolution> {
    p.validate()?;
    let nodes = p.grid.nodes();
    let raw = integrate_inward(p, &nodes, p.grid.t_max)?;
    let (a, c2) = frobenius_match(p, &nodes, &raw)?;
    let profile: Vec<f64> = raw.values.iter().map(|v| v / a).collect();
    let derivative: Vec<f64> = raw.derivs.iter().map(|v| v / a).collect();

    let check = integrate_inward(p, &nodes, 1.5 * p.grid.t_max)?;
    let (a_check, _) = frobenius_match(p, &nodes, &check)?;
    let half = 0.5 * p.grid.t_max;
    let mut drift: f64 = 0.0;
    for (i, &t) in nodes.iter().enumerate() {
        if t > half {
            break;
        }
        let other = check.values[i] / a_check;
        drift = drift.max((other - profile[i]).abs() / profile[i].abs());
    }
    if !(drift <= CONTAMINATION_TOL) {
        return Err(Error::Contamination { drift });
    }

    let lam2 = 2.0 * p.lambda;
    let defect = (profile[0] - c2 * nodes[0].powf(lam2) - 1.0).abs();
    Ok(ModeSolution {
        problem: *p,
        t: nodes,
        profile,
        derivative,
        diagnostics: ModeDiagnostics {
            method: SolutionMethod::Ode,
            secondary_coefficient: c2,
            normalization_defect: defect,
            contamination_drift: Some(drift),
            accepted_steps: raw.accepted + check.accepted,
            rejected_steps: raw.rejected + check.rejected,
        },
    })
}

/// Solve many modes in parallel; results keep the input order.
pub fn solve_modes(problems: &[ModeProblem]) -> Vec<Result<ModeSolution>> {
    problems.par_iter().map(solve_mode_ode).collect()
}

/// Correction exponents of `t^{K+1−2λ} ∂^{K+1}Ψ̂` (after removing the
/// `t^{1−2λ}` term when `skip_first_fractional`): `{j − 2λ}` and positive
/// integers, ascending.
fn correction_exponents(lambda: f64, first_fractional: usize, count: usize) -> Vec<f64> {
    let mut e: Vec<f64> = (first_fractional..first_fractional + count)
        .map(|j| j as f64 - 2.0 * lambda)
        .filter(|&x| x > 0.0)
        .chain((1..=count).map(|j| j as f64))
        .collect();
    e.sort_by(|a, b| a.partial_cmp(b).unwrap());
    e.truncate(count);
    e
}

/// Fit `g(t) = L + Σ c_i t^{e_i}` through the given nodes and return `L`.
fn richardson(nodes: &[(f64, f64)], exponents: &[f64]) -> Result<f64> {
    let m = nodes.len();
    debug_assert_eq!(m, exponents.len() + 1);
    let a = DMatrix::from_fn(m, m, |i, j| if j == 0 { 1.0 } else { nodes[i].0.powf(exponents[j - 1]) });
    let b = DVector::from_iterator(m, nodes.iter().map(|n| n.1));
    let sol = a
        .lu()
        .solve(&b)
        .ok_or_else(|| Error::Conditioning("Richardson system singular".into()))?;
    Ok(sol[0])
}

/// Two extrapolations from node sets starting at `base` and `2·base`; they must
/// agree to declare the limit converged.
fn extrapolate_limit(
    sol: &ModeSolution,
    base: f64,
    exponents: &[f64],
    g: impl Fn(usize) -> Result<f64>,
) -> Result<f64> {
    let mut estimates = Vec::new();
    let mut samples = Vec::new();
    for shift in 0..2 {
        let mut nodes = Vec::new();
        for j in 0..=RICHARDSON_DEPTH {
            let target = base * 2f64.powi((j + shift) as i32);
            let idx = sol.t.partition_point(|&t| t < target).min(sol.t.len() - 3).max(2);
            let value = g(idx)?;
            nodes.push((sol.t[idx], value));
            if shift == 0 {
                samples.push(value);
            }
        }
        if sol.t[0] > base {
            return Err(Error::Precision {
                message: format!("grid does not resolve t = {base:e} (smallest node {:e})", sol.t[0]),
                sequence: samples,
            });
        }
        estimates.push(richardson(&nodes, exponents)?);
    }
    let (v0, v1) = (estimates[0], estimates[1]);
    if !((v0 - v1).abs() <= EXTRAPOLATION_TOL * v0.abs().max(1e-300)) {
        samples.extend(estimates);
        return Err(Error::Precision {
            message: "Richardson extrapolation of the boundary limit did not settle".into(),
            sequence: samples,
        });
    }
    Ok(v0)
}

/// Dirichlet-to-Neumann value `−(d_λ/2λ) lim_{t→0} t^{1−2λ}(Ψ̂'(t) − α·[λ>1/2])`.
pub fn dtn_extract(sol: &ModeSolution) -> Result<f64> {
    let p = &sol.problem;
    let lam = p.lambda;
    let subtract = if lam > 0.5 { p.first_order_coefficient() } else { 0.0 };
    let first_fractional = if lam > 0.5 { 2 } else { 1 };
    let exponents = correction_exponents(lam, first_fractional, RICHARDSON_DEPTH);
    let limit = extrapolate_limit(sol, DTN_BASE / p.xi, &exponents, |i| {
        Ok(sol.t[i].powf(1.0 - 2.0 * lam) * (sol.derivative[i] - subtract))
    })?;
    Ok(-d_lambda(lam)? / (2.0 * lam) * limit)
}

/// Fornberg weights for the first derivative at `x0` from the given nodes.
fn first_derivative_weights(x0: f64, xs: &[f64]) -> Vec<f64> {
    let n = xs.len();
    let mut c = vec![vec![0.0; 2]; n];
    let mut c1 = 1.0;
    let mut c4 = xs[0] - x0;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(1);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = xs[i] - x0;
        for j in 0..i {
            let c3 = xs[i] - xs[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (k as f64 * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - k as f64 * c[j][k - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    c.into_iter().map(|w| w[1]).collect()
}

/// Alternative boundary formula
/// `−(d_λ / (2λ(2λ−1)⋯(2λ−K))) lim t^{1+K−2λ} ∂^{K+1} Ψ̂`, `K = ⌊2λ⌋`.
/// For `K = 1` the second derivative is a 5-point finite difference of the
/// sampled `Ψ̂'`.
pub fn higher_derivative_dtn(sol: &ModeSolution) -> Result<f64> {
    let p = &sol.problem;
    let lam = p.lambda;
    let kk = (2.0 * lam).floor() as usize;
    let m0 = 1.0 + kk as f64 - 2.0 * lam;
    let mut falling = 2.0 * lam;
    for j in 1..=kk {
        falling *= 2.0 * lam - j as f64;
    }
    let exponents = correction_exponents(lam, kk + 1, RICHARDSON_DEPTH);
    let limit = match kk {
        0 => extrapolate_limit(sol, DTN_BASE / p.xi, &exponents, |i| {
            Ok(sol.t[i].powf(m0) * sol.derivative[i])
        })?,
        1 => extrapolate_limit(sol, FD_BASE / p.xi, &exponents, |i| {
            let xs = &sol.t[i - 2..=i + 2];
            let w = first_derivative_weights(sol.t[i], xs);
            let second: f64 = w.iter().zip(&sol.derivative[i - 2..=i + 2]).map(|(w, d)| w * d).sum();
            Ok(sol.t[i].powf(m0) * second)
        })?,
        _ => unreachable!("lambda < 1"),
    };
    Ok(-d_lambda(lam)? / falling * limit)
}

/// `∫_a^b t^β (g_a + (g_b − g_a)(t − a)/(b − a)) dt` for `β > −1`.
fn product_cell(a: f64, b: f64, beta: f64, ga: f64, gb: f64) -> f64 {
    let h = b - a;
    if a == 0.0 {
        let i0 = b.powf(beta + 1.0) / (beta + 1.0);
        let i1 = b.powf(beta + 2.0) / (beta + 2.0);
        return ga * i0 + (gb - ga) / h * i1;
    }
    // Moments about `a` in the ratio r = h/a, free of cancellation when r is small.
    let r = h / a;
    let i0 = a.powf(beta + 1.0) * ((beta + 1.0) * r.ln_1p()).exp_m1() / (beta + 1.0);
    let m1 = if r < 0.5 {
        // ∫_0^r x(1+x)^β dx = Σ_m C(β, m) r^{m+2}/(m+2)
        let mut coef = 1.0;
        let mut pow = r * r;
        let mut sum = 0.0;
        for m in 0..80 {
            let term = coef * pow / (m as f64 + 2.0);
            sum += term;
            if term.abs() <= 1e-17 * sum.abs() {
                break;
            }
            coef *= (beta - m as f64) / (m as f64 + 1.0);
            pow *= r;
        }
        sum
    } else {
        let q = 1.0 + r;
        (q.powf(beta + 2.0) - 1.0) / (beta + 2.0) - (q.powf(beta + 1.0) - 1.0) / (beta + 1.0)
    };
    let i1 = a.powf(beta + 2.0) * m1;
    ga * i0 + (gb - ga) / h * i1
}

/// Weighted per-mode energy
/// `∫₀^∞ t^{1−2λ} (Φ'² + |ξ|²Φ² + s|ξ| t^{−1} Φ²) dt` of sampled `(Φ, Φ')`.
///
/// Product integration on the graded grid: each term is written as
/// `t^β g(t)` with its leading power (`β = 2λ−1`, `1−2λ`, `−2λ`) taken out and
/// `g` interpolated linearly, the first cell holds `g` constant, and the
/// exponential tail beyond `T_max` adds `h(T)/(2|ξ|)`.
pub fn weighted_energy(p: &ModeProblem, t: &[f64], values: &[f64], derivs: &[f64]) -> Result<f64> {
    if t.len() != values.len() || t.len() != derivs.len() || t.len() < 2 {
        return Err(Error::Shape("energy samples must share the grid".into()));
    }
    let lam = p.lambda;
    let k = p.xi;
    let s = p.s.value();
    let betas = [2.0 * lam - 1.0, 1.0 - 2.0 * lam, -2.0 * lam];
    let smooth = |i: usize| -> [f64; 3] {
        let d = t[i].powf(1.0 - 2.0 * lam) * derivs[i];
        let v2 = values[i] * values[i];
        [d * d, k * k * v2, s * k * v2]
    };
    let mut sum = 0.0;
    let mut prev = smooth(0);
    for (&beta, &g) in betas.iter().zip(&prev) {
        sum += product_cell(0.0, t[0], beta, g, g);
    }
    for i in 1..t.len() {
        let cur = smooth(i);
        for j in 0..3 {
            sum += product_cell(t[i - 1], t[i], betas[j], prev[j], cur[j]);
        }
        prev = cur;
    }
    let last = *t.last().unwrap();
    let tail: f64 = (0..3).map(|j| last.powf(betas[j]) * prev[j]).sum();
    sum += tail / (2.0 * k);
    Ok(sum)
}

/// Both sides of the per-mode energy identity:
/// `lhs = ∫ t^{1−2λ}(Ψ̂'² + |ξ|²Ψ̂² + s|ξ|t^{−1}Ψ̂²)`, `rhs = (2λ/d_λ) s|ξ|^{2λ}`.
pub fn mode_energy(sol: &ModeSolution) -> Result<(f64, f64)> {
    let p = &sol.problem;
    if !(p.lambda < 0.5) {
        return Err(Error::Parameter(format!(
            "energy identity needs lambda in (0, 1/2), got {}",
            p.lambda
        )));
    }
    let lhs = weighted_energy(p, &sol.t, &sol.profile, &sol.derivative)?;
    let rhs = 2.0 * p.lambda / d_lambda(p.lambda)? * p.multiplier();
    // Half-resolution re-quadrature as a sanity check on the quadrature.
    let idx: Vec<usize> = (0..sol.t.len()).filter(|i| i % 2 == 1).collect();
    let pick = |v: &[f64]| idx.iter().map(|&i| v[i]).collect::<Vec<_>>();
    let coarse = weighted_energy(p, &pick(&sol.t), &pick(&sol.profile), &pick(&sol.derivative))?;
    if !((coarse - lhs).abs() <= 1e-2 * lhs.abs()) {
        return Err(Error::Precision {
            message: "energy quadrature not converged under grid halving".into(),
            sequence: vec![coarse, lhs],
        });
    }
    Ok((lhs, rhs))
}

/// Relative energy gaps on successively doubled grids and the observed orders
/// `log₂(gap_{i}/gap_{i+1})`.
#[derive(Debug, Clone, Serialize)]
pub struct EnergyConvergence {
    pub points: Vec<usize>,
    pub relative_gaps: Vec<f64>,
    pub orders: Vec<f64>,
}

pub fn energy_convergence(p: &ModeProblem, points: &[usize]) -> Result<EnergyConvergence> {
    let mut gaps = Vec::with_capacity(points.len());
    for &m in points {
        let q = p.with_points(m)?;
        let sol = solve_mode_ode(&q)?;
        let lhs = weighted_energy(&q, &sol.t, &sol.profile, &sol.derivative)?;
        let rhs = 2.0 * q.lambda / d_lambda(q.lambda)? * q.multiplier();
        gaps.push(((lhs - rhs) / rhs).abs());
    }
    let orders = gaps.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    Ok(EnergyConvergence {
        points: points.to_vec(),
        relative_gaps: gaps,
        orders,
    })
}

/// A zero-trace perturbation `η` sampled on a solution grid.
#[derive(Debug, Clone)]
pub struct Perturbation {
    pub values: Vec<f64>,
    pub derivs: Vec<f64>,
    /// `η(0)`.
    pub trace: f64,
}

impl Perturbation {
    /// Sample `f(t) = (η(t), η'(t))` on `t`; the trace is `f(0).0`.
    pub fn sample(t: &[f64], f: impl Fn(f64) -> (f64, f64)) -> Self {
        let (values, derivs) = t.iter().map(|&x| f(x)).unzip();
        Self {
            values,
            derivs,
            trace: f(0.0).0,
        }
    }

    /// Smooth bump `A exp(−1/(1−x²))`, `x = (t−c)/w`, supported on `(c−w, c+w)`.
    pub fn bump(t: &[f64], center: f64, width: f64, amplitude: f64) -> Self {
        Self::sample(t, |s| {
            let x = (s - center) / width;
            if x.abs() >= 1.0 {
                return (0.0, 0.0);
            }
            let q = 1.0 - x * x;
            let v = amplitude * (-1.0 / q).exp();
            (v, v * (-2.0 * x / (q * q)) / width)
        })
    }

    pub fn scaled(&self, eps: f64) -> Self {
        Self {
            values: self.values.iter().map(|v| v * eps).collect(),
            derivs: self.derivs.iter().map(|v| v * eps).collect(),
            trace: self.trace * eps,
        }
    }

    pub fn zero(len: usize) -> Self {
        Self {
            values: vec![0.0; len],
            derivs: vec![0.0; len],
            trace: 0.0,
        }
    }
}

/// Building blocks for zero-trace perturbations, in units where `|ξ| = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum PerturbationShape {
    /// Compactly supported bump on `(center − width, center + width)`.
    Bump { center: f64, width: f64, amplitude: f64 },
    /// `A(1 − e^{−bt})e^{−ct}`: vanishes at 0, nonzero slope there.
    Ramp { amplitude: f64, rise: f64, decay: f64 },
}

impl PerturbationShape {
    /// Draws a shape from a source of uniform `[0, 1)` numbers.
    pub fn draw(uniform: &mut impl FnMut() -> f64) -> Self {
        if uniform() < 0.5 {
            let center = 0.1 + 4.9 * uniform();
            let width = (0.05 + 0.95 * uniform()) * center.min(2.0);
            Self::Bump {
                center,
                width,
                amplitude: 2.0 * uniform() - 1.0,
            }
        } else {
            Self::Ramp {
                amplitude: 2.0 * uniform() - 1.0,
                rise: 0.2 + 4.8 * uniform(),
                decay: 0.5 + 2.5 * uniform(),
            }
        }
    }

    /// `(η(t), η'(t))` for a mode of frequency `|ξ|`.
    fn eval(&self, t: f64, xi: f64) -> (f64, f64) {
        let u = xi * t;
        let (v, d) = match *self {
            Self::Bump { center, width, amplitude } => {
                let x = (u - center) / width;
                if x.abs() >= 1.0 {
                    (0.0, 0.0)
                } else {
                    let q = 1.0 - x * x;
                    let v = amplitude * (-1.0 / q).exp();
                    (v, v * (-2.0 * x / (q * q)) / width)
                }
            }
            Self::Ramp { amplitude, rise, decay } => {
                let e = (-decay * u).exp();
                let r = -(-rise * u).exp_m1();
                (amplitude * r * e, amplitude * e * (rise * (1.0 - r) - decay * r))
            }
        };
        (v, d * xi)
    }
}

impl Perturbation {
    /// Sum of shapes for the mode `|ξ|`, sampled on `t`.
    pub fn from_shapes(t: &[f64], xi: f64, shapes: &[PerturbationShape]) -> Self {
        Self::sample(t, |x| {
            shapes.iter().fold((0.0, 0.0), |(v, d), s| {
                let (sv, sd) = s.eval(x, xi);
                (v + sv, d + sd)
            })
        })
    }
}

/// `energy(Ψ̂ + η) − (2λ/d_λ) s|ξ|^{2λ}`; nonnegative, zero iff `η = 0`.
pub fn sobolev_gap(sol: &ModeSolution, eta: &Perturbation) -> Result<f64> {
    let p = &sol.problem;
    if eta.values.len() != sol.t.len() || eta.derivs.len() != sol.t.len() {
        return Err(Error::Shape("perturbation must be sampled on the solution grid".into()));
    }
    if eta.trace != 0.0 {
        return Err(Error::Parameter(format!(
            "perturbation must have zero trace, got eta(0) = {}",
            eta.trace
        )));
    }
    if !(p.lambda < 0.5) {
        return Err(Error::Parameter(format!(
            "energy inequality needs lambda in (0, 1/2), got {}",
            p.lambda
        )));
    }
    let values: Vec<f64> = sol.profile.iter().zip(&eta.values).map(|(a, b)| a + b).collect();
    let derivs: Vec<f64> = sol.derivative.iter().zip(&eta.derivs).map(|(a, b)| a + b).collect();
    let lhs = weighted_energy(p, &sol.t, &values, &derivs)?;
    let rhs = 2.0 * p.lambda / d_lambda(p.lambda)? * p.multiplier();
    Ok(lhs - rhs)
}
