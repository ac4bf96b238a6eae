//! The fractional spinorial Yamabe quotient on the flat torus.
//!
//! `J(φ) = (Σ_x |φ|^p Δx)^{2/p} / |Re Σ_x ⟨Kφ, φ⟩ Δx|` with
//! `p = 2n/(n+2λ)` and `K` a pseudo-inverse of the operator (zero on the
//! constant mode). Minimization is plain normalized gradient descent with
//! backtracking.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::flat::{abs_inverse, geometric_inverse, yamabe_residual, SpinorField};
use crate::{Error, Result};

/// Denominators below this are treated as degenerate.
pub const DEGENERATE_PAIRING: f64 = 1e-14;
const ARMIJO: f64 = 1e-4;
const MAX_BACKTRACKS: usize = 60;

/// Which inverse enters the denominator pairing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Pairing {
    /// `|D̄^{2λ}|^{−1}`: symbol `|ξ|^{−2λ}`.
    #[default]
    Absolute,
    /// `(D̄^{2λ})^{−1}`: symbol `−γ_{n+1}M(ξ)|ξ|^{−2λ−1}`.
    Signed,
}

impl Pairing {
    pub fn apply(self, phi: &SpinorField, lambda: f64) -> Result<SpinorField> {
        match self {
            Pairing::Absolute => abs_inverse(phi, lambda),
            Pairing::Signed => geometric_inverse(phi, lambda),
        }
    }
}

/// Exponent `p = 2n/(n+2λ)` of the numerator norm.
pub fn exponent(n: usize, lambda: f64) -> f64 {
    2.0 * n as f64 / (n as f64 + 2.0 * lambda)
}

fn check_lambda(n: usize, lambda: f64) -> Result<()> {
    if !(lambda > 0.0 && lambda < n as f64 / 2.0) {
        return Err(Error::Parameter(format!(
            "Yamabe quotient needs 0 < lambda < n/2 = {}, got {lambda}",
            n as f64 / 2.0
        )));
    }
    Ok(())
}

/// Numerator and denominator pieces of `J` at `φ`.
#[derive(Debug, Clone)]
pub struct QuotientParts {
    /// `Σ_x |φ|^p Δx`.
    pub norm_p: f64,
    /// `Re Σ_x ⟨φ, Kφ⟩ Δx`.
    pub pairing: f64,
    /// `Kφ`.
    pub k_phi: SpinorField,
    pub value: f64,
}

pub fn quotient_parts(phi: &SpinorField, lambda: f64, pairing: Pairing) -> Result<QuotientParts> {
    let n = phi.grid().n();
    check_lambda(n, lambda)?;
    let p = exponent(n, lambda);
    let dx = phi.grid().cell_volume();
    let norm_p: f64 = phi.pointwise_norms().iter().map(|a| a.powf(p)).sum::<f64>() * dx;
    let k_phi = pairing.apply(phi, lambda)?;
    let q = phi.dot(&k_phi)?.re * dx;
    if !(q.abs() >= DEGENERATE_PAIRING) {
        return Err(Error::Degenerate(format!(
            "pairing {q:e} below {DEGENERATE_PAIRING:e} (field on the kernel?)"
        )));
    }
    Ok(QuotientParts {
        norm_p,
        pairing: q,
        value: norm_p.powf(2.0 / p) / q.abs(),
        k_phi,
    })
}

/// `J(φ)`.
pub fn functional(phi: &SpinorField, lambda: f64, pairing: Pairing) -> Result<f64> {
    Ok(quotient_parts(phi, lambda, pairing)?.value)
}

/// `(J, ∇J)` with the gradient taken in the real inner product `Re Σ_x ⟨·,·⟩ Δx`:
/// `∇J = 2N^{2/p−1}|φ|^{p−2}φ/|Q| − 2 N^{2/p} sign(Q) Kφ/Q²`.
pub fn gradient(phi: &SpinorField, lambda: f64, pairing: Pairing) -> Result<(f64, SpinorField)> {
    let parts = quotient_parts(phi, lambda, pairing)?;
    let p = exponent(phi.grid().n(), lambda);
    let (nm, q) = (parts.norm_p, parts.pairing);
    let w: Vec<f64> = phi
        .pointwise_norms()
        .into_iter()
        .map(|a| if a > 0.0 { a.powf(p - 2.0) } else { 0.0 })
        .collect();
    let a = 2.0 * nm.powf(2.0 / p - 1.0) / q.abs();
    let b = -2.0 * nm.powf(2.0 / p) * q.signum() / (q * q);
    let g = phi
        .weighted(&w)?
        .combine(Complex64::new(a, 0.0), &parts.k_phi, Complex64::new(b, 0.0))?;
    Ok((parts.value, g))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MinimizeOptions {
    pub max_iters: usize,
    /// Stop when `‖∇J‖·‖φ‖/J ≤ tol` (norms with the `Δx` weight).
    pub tol: f64,
    pub pairing: Pairing,
}

impl Default for MinimizeOptions {
    fn default() -> Self {
        Self {
            max_iters: 200,
            tol: 1e-6,
            pairing: Pairing::default(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct YamabeState {
    pub phi: SpinorField,
    pub lambda: f64,
    pub n: usize,
    pub pairing: Pairing,
    pub value: f64,
    pub iterations: usize,
    /// `J` before the first step and after every accepted step.
    pub j_trace: Vec<f64>,
    /// Relative gradient norm at each recorded iterate.
    pub grad_trace: Vec<f64>,
    pub converged: bool,
}

fn weighted_norm(f: &SpinorField) -> f64 {
    f.norm() * f.grid().cell_volume().sqrt()
}

/// Normalized gradient descent with Armijo backtracking, started from the
/// initial field projected off the constant mode.
pub fn minimize(initial: &SpinorField, lambda: f64, opts: MinimizeOptions) -> Result<YamabeState> {
    let n = initial.grid().n();
    check_lambda(n, lambda)?;
    let start = initial.without_mean();
    let mut phi = start.scaled(Complex64::new(1.0 / weighted_norm(&start).max(f64::MIN_POSITIVE), 0.0));
    let (mut j, mut g) = gradient(&phi, lambda, opts.pairing)?;
    let mut j_trace = vec![j];
    let mut grad_trace = Vec::new();
    let mut step = 0.1;
    let mut iterations = 0;
    let mut converged = false;
    loop {
        let gnorm = weighted_norm(&g);
        let rel = gnorm * weighted_norm(&phi) / j;
        grad_trace.push(rel);
        if rel <= opts.tol {
            converged = true;
            break;
        }
        if iterations == opts.max_iters {
            break;
        }
        // Unit-length descent direction relative to the current |φ| = 1.
        let dir = g.scaled(Complex64::new(-1.0 / gnorm, 0.0));
        let mut accepted = None;
        let mut alpha = step;
        for _ in 0..MAX_BACKTRACKS {
            let trial = phi.combine(Complex64::new(1.0, 0.0), &dir, Complex64::new(alpha, 0.0))?;
            if let Ok(jt) = functional(&trial, lambda, opts.pairing) {
                if jt <= j - ARMIJO * alpha * gnorm {
                    accepted = Some((trial, jt));
                    break;
                }
            }
            alpha *= 0.5;
        }
        let Some((trial, _)) = accepted else {
            return Err(Error::Optimization {
                message: format!("line search failed at iteration {iterations} (relative gradient {rel:e})"),
                trace: j_trace,
            });
        };
        step = (2.0 * alpha).min(1.0);
        phi = trial.scaled(Complex64::new(1.0 / weighted_norm(&trial), 0.0));
        (j, g) = gradient(&phi, lambda, opts.pairing)?;
        j_trace.push(j);
        iterations += 1;
    }
    Ok(YamabeState {
        phi,
        lambda,
        n,
        pairing: opts.pairing,
        value: j,
        iterations,
        j_trace,
        grad_trace,
        converged,
    })
}

/// Euler–Lagrange multiplier `μ = sign(Q)(N/|Q|)^{(n+2λ)/(n−2λ)}` and
/// `ψ = (D̄^{2λ})^{−1}φ`, both with the signed pairing.
///
/// At a critical point `ψ = (Q/N)|φ|^{p−2}φ`, which inverts to
/// `D̄^{2λ}ψ = μ|ψ|^{4λ/(n−2λ)}ψ`.
pub fn euler_lagrange_data(phi: &SpinorField, lambda: f64) -> Result<(SpinorField, f64)> {
    let n = phi.grid().n() as f64;
    let parts = quotient_parts(phi, lambda, Pairing::Signed)?;
    let power = (n + 2.0 * lambda) / (n - 2.0 * lambda);
    let mu = parts.pairing.signum() * (parts.norm_p / parts.pairing.abs()).powf(power);
    Ok((parts.k_phi, mu))
}

/// Relative residual of `D̄^{2λ}ψ = μ|ψ|^{4λ/(n−2λ)}ψ` at the state.
pub fn el_residual(state: &YamabeState) -> Result<f64> {
    let (psi, mu) = euler_lagrange_data(&state.phi, state.lambda)?;
    if psi.norm() == 0.0 {
        return Err(Error::Degenerate("ψ vanishes".into()));
    }
    yamabe_residual(&psi, state.lambda, mu)
}

/// [`el_residual`] with `μ` forced to a given value.
pub fn el_residual_with_mu(state: &YamabeState, mu: f64) -> Result<f64> {
    let (psi, _) = euler_lagrange_data(&state.phi, state.lambda)?;
    yamabe_residual(&psi, state.lambda, mu)
}

/// State wrapping a field without optimizing.
pub fn state_at(phi: &SpinorField, lambda: f64, pairing: Pairing) -> Result<YamabeState> {
    let j = functional(phi, lambda, pairing)?;
    Ok(YamabeState {
        phi: phi.clone(),
        lambda,
        n: phi.grid().n(),
        pairing,
        value: j,
        iterations: 0,
        j_trace: vec![j],
        grad_trace: Vec::new(),
        converged: false,
    })
}
