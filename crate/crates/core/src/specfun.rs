//! Special functions: Gamma and friends, Gauss `₂F₁` on the negative real
//! axis, Kummer's `M` and `V = U`, and the scattering constants `d_λ`, `c_λ`.
//!
//! Gamma values come from the Lanczos approximation in `statrs` on `[1/2, 2)`,
//! the recurrence above it and the reflection formula with an exactly reduced
//! `sin(πx)` below; poles are reported as errors.

use std::f64::consts::PI;

use statrs::function::gamma as lanczos;

use crate::{Error, Result};

const SERIES_TOL: f64 = 1e-17;
const MAX_SERIES_TERMS: usize = 200_000;
/// Largest argument for which `Γ` is divided directly; `Γ(170)` is finite and
/// the reflected side stays far from underflow.
const DIRECT_RATIO_LIMIT: f64 = 170.0;

/// True at the poles `0, −1, −2, …` of the Gamma function.
pub fn is_gamma_pole(x: f64) -> bool {
    x <= 0.0 && x == x.round()
}

fn is_integer(x: f64) -> bool {
    x == x.round()
}

/// `sin(πx)` with the argument reduced before multiplying by π.
fn sin_pi(x: f64) -> f64 {
    let n = x.round();
    let r = x - n;
    let s = (PI * r).sin();
    if (n as i64) % 2 == 0 {
        s
    } else {
        -s
    }
}

/// `cot(πx)` with exact argument reduction (period 1).
fn cot_pi(x: f64) -> f64 {
    let r = x - x.round();
    1.0 / (PI * r).tan()
}

pub fn gamma(x: f64) -> Result<f64> {
    if x.is_nan() {
        return Err(Error::Parameter("gamma of NaN".into()));
    }
    if is_gamma_pole(x) {
        return Err(Error::Pole {
            function: "gamma",
            argument: x,
        });
    }
    if x > 171.6 {
        return Err(Error::Parameter(format!("gamma({x}) overflows f64")));
    }
    if x >= 0.5 {
        Ok(gamma_reduced(x))
    } else {
        Ok(PI / (sin_pi(x) * gamma_reduced(1.0 - x)))
    }
}

/// `Γ(x)` for `x ≥ 1/2`: Lanczos on `[1/2, 2)` and the exact downward shifts
/// `Γ(x) = (x−1)Γ(x−1)` above, which keeps the error near `x/2` ulps instead
/// of the growth of the Lanczos power term.
fn gamma_reduced(x: f64) -> f64 {
    let mut y = x;
    let mut prod = 1.0;
    while y >= 2.0 {
        y -= 1.0;
        prod *= y;
    }
    prod * lanczos::gamma(y)
}

/// `(ln|Γ(x)|, sign Γ(x))`.
pub fn lgamma_signed(x: f64) -> Result<(f64, f64)> {
    if x.is_nan() {
        return Err(Error::Parameter("lgamma of NaN".into()));
    }
    if is_gamma_pole(x) {
        return Err(Error::Pole {
            function: "lgamma",
            argument: x,
        });
    }
    if x >= 0.5 {
        Ok((lanczos::ln_gamma(x), 1.0))
    } else {
        let s = sin_pi(x);
        let lg = PI.ln() - s.abs().ln() - lanczos::ln_gamma(1.0 - x);
        Ok((lg, s.signum()))
    }
}

/// `1/Γ(x)`, which is entire: zero at the poles of Γ.
pub fn rgamma(x: f64) -> f64 {
    if is_gamma_pole(x) {
        return 0.0;
    }
    let (lg, s) = lgamma_signed(x).expect("non-pole");
    s * (-lg).exp()
}

/// `Γ(a)/Γ(b)`: a direct quotient while both factors are representable,
/// log space beyond.
pub fn gamma_ratio(a: f64, b: f64) -> Result<f64> {
    if a == b && !is_gamma_pole(a) {
        return Ok(1.0);
    }
    if a.abs() <= DIRECT_RATIO_LIMIT && b.abs() <= DIRECT_RATIO_LIMIT {
        return Ok(gamma(a)? / gamma(b)?);
    }
    let (la, sa) = lgamma_signed(a)?;
    let (lb, sb) = lgamma_signed(b)?;
    Ok(sa * sb * (la - lb).exp())
}

/// Digamma `ψ(x) = Γ'(x)/Γ(x)`.
pub fn digamma(x: f64) -> Result<f64> {
    if x.is_nan() {
        return Err(Error::Parameter("digamma of NaN".into()));
    }
    if is_gamma_pole(x) {
        return Err(Error::Pole {
            function: "digamma",
            argument: x,
        });
    }
    if x < 0.5 {
        return Ok(digamma(1.0 - x)? - PI * cot_pi(x));
    }
    let mut acc = 0.0;
    let mut y = x;
    while y < 10.0 {
        acc -= 1.0 / y;
        y += 1.0;
    }
    // Bernoulli numbers B_2k / (2k), k = 1..8
    const C: [f64; 8] = [
        1.0 / 12.0,
        -1.0 / 120.0,
        1.0 / 252.0,
        -1.0 / 240.0,
        1.0 / 132.0,
        -691.0 / 32760.0,
        1.0 / 12.0,
        -3617.0 / 8160.0,
    ];
    let inv2 = 1.0 / (y * y);
    let mut tail = 0.0;
    let mut p = inv2;
    for c in C {
        tail += c * p;
        p *= inv2;
    }
    Ok(acc + y.ln() - 0.5 / y - tail)
}

/// `d_λ = 2^{2λ} Γ(1/2+λ)/Γ(1/2−λ)`.
pub fn d_lambda(lambda: f64) -> Result<f64> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::Parameter(format!("d_lambda needs lambda > 0, got {lambda}")));
    }
    if is_gamma_pole(0.5 - lambda) {
        return Err(Error::Pole {
            function: "d_lambda (Gamma(1/2 - lambda))",
            argument: lambda,
        });
    }
    Ok(4f64.powf(lambda) * gamma_ratio(0.5 + lambda, 0.5 - lambda)?)
}

/// `c_λ = 2^{2λ} Γ(λ)/Γ(−λ)`.
pub fn c_lambda(lambda: f64) -> Result<f64> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::Parameter(format!("c_lambda needs lambda > 0, got {lambda}")));
    }
    if is_gamma_pole(-lambda) {
        return Err(Error::Pole {
            function: "c_lambda (Gamma(-lambda))",
            argument: lambda,
        });
    }
    Ok(4f64.powf(lambda) * gamma_ratio(lambda, -lambda)?)
}

struct SeriesSum {
    value: f64,
    /// Largest |term| / |sum|; a measure of cancellation.
    cancellation: f64,
}

/// Plain Gauss series, valid for |z| < 1.
fn hyp2f1_series(a: f64, b: f64, c: f64, z: f64) -> Result<SeriesSum> {
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut biggest: f64 = 1.0;
    let mut quiet = 0;
    for j in 0..MAX_SERIES_TERMS {
        let jf = j as f64;
        term *= (a + jf) * (b + jf) / ((c + jf) * (jf + 1.0)) * z;
        sum += term;
        biggest = biggest.max(term.abs());
        if term == 0.0 {
            return Ok(SeriesSum {
                value: sum,
                cancellation: biggest / sum.abs(),
            });
        }
        if term.abs() <= SERIES_TOL * sum.abs() {
            quiet += 1;
            if quiet >= 2 {
                return Ok(SeriesSum {
                    value: sum,
                    cancellation: biggest / sum.abs(),
                });
            }
        } else {
            quiet = 0;
        }
    }
    Err(Error::NonConvergence {
        what: "hypergeometric 2F1 series",
        iterations: MAX_SERIES_TERMS,
        last: term,
    })
}

/// Pfaff transformation `₂F₁(a,b;c;z) = (1−z)^{−a} ₂F₁(a, c−b; c; z/(z−1))`,
/// which maps `z < 0` into `(0, 1)`.
fn hyp2f1_pfaff(a: f64, b: f64, c: f64, z: f64) -> Result<f64> {
    let w = z / (z - 1.0);
    let inner = hyp2f1_series(a, c - b, c, w)?;
    Ok((1.0 - z).powf(-a) * inner.value)
}

/// Series or Pfaff evaluation for `−1.12 ≤ z ≤ 0`.
fn hyp2f1_near(a: f64, b: f64, c: f64, z: f64) -> Result<f64> {
    if z > -0.5 {
        let s = hyp2f1_series(a, b, c, z)?;
        if s.cancellation < 1e4 {
            return Ok(s.value);
        }
    }
    hyp2f1_pfaff(a, b, c, z)
}

fn check_hyp_params(a: f64, b: f64, c: f64, z: f64) -> Result<()> {
    if [a, b, c, z].iter().any(|v| !v.is_finite()) {
        return Err(Error::Parameter("non-finite 2F1 argument".into()));
    }
    if is_gamma_pole(c) {
        return Err(Error::Pole {
            function: "2F1 (lower parameter c)",
            argument: c,
        });
    }
    Ok(())
}

/// Gauss hypergeometric function `₂F₁(a, b; c; z)` for `z ≤ 0`.
///
/// Direct series for `−0.5 < z ≤ 0`, the Pfaff transform for `−0.9 < z ≤ −0.5`
/// (and whenever the direct series shows heavy cancellation), the `1/z`
/// inversion for `z ≤ −0.9`, and the Pfaff route for `z ≤ −0.9` when `a − b`
/// is an integer.
pub fn hyp2f1(a: f64, b: f64, c: f64, z: f64) -> Result<f64> {
    check_hyp_params(a, b, c, z)?;
    if z > 0.0 {
        return Err(Error::Parameter(format!("2F1 implemented for z <= 0, got {z}")));
    }
    if z == 0.0 {
        return Ok(1.0);
    }
    if z > -0.9 {
        return hyp2f1_near(a, b, c, z);
    }
    if is_integer(a - b) {
        return hyp2f1_pfaff(a, b, c, z);
    }
    hyp2f1_inversion(a, b, c, z)
}

/// Two-term `1/z` inversion:
///
/// `₂F₁(a,b;c;z) = Γ(c)Γ(b−a)/(Γ(b)Γ(c−a)) (−z)^{−a} ₂F₁(a, a−c+1; a−b+1; 1/z)
///               + Γ(c)Γ(a−b)/(Γ(a)Γ(c−b)) (−z)^{−b} ₂F₁(b, b−c+1; b−a+1; 1/z)`.
pub fn hyp2f1_inversion(a: f64, b: f64, c: f64, z: f64) -> Result<f64> {
    check_hyp_params(a, b, c, z)?;
    if !(z < 0.0) {
        return Err(Error::Parameter(format!("2F1 inversion needs z < 0, got {z}")));
    }
    if is_integer(a - b) {
        return Err(Error::Degenerate(format!(
            "2F1 inversion needs a - b outside the integers (a = {a}, b = {b})"
        )));
    }
    let lnmz = (-z).ln();
    let term = |p: f64, q: f64| -> Result<f64> {
        // Γ(c)Γ(q−p)/(Γ(q)Γ(c−p)) (−z)^{−p} ₂F₁(p, p−c+1; p−q+1; 1/z)
        if is_gamma_pole(q) || is_gamma_pole(c - p) {
            return Ok(0.0);
        }
        let (lc, sc) = lgamma_signed(c)?;
        let (lqp, sqp) = lgamma_signed(q - p)?;
        let (lq, sq) = lgamma_signed(q)?;
        let (lcp, scp) = lgamma_signed(c - p)?;
        let coeff = sc * sqp * sq * scp * (lc + lqp - lq - lcp - p * lnmz).exp();
        let x = 1.0 / z;
        let inner = if x >= -1.12 {
            hyp2f1_near(p, p - c + 1.0, p - q + 1.0, x)?
        } else {
            hyp2f1(p, p - c + 1.0, p - q + 1.0, x)?
        };
        Ok(coeff * inner)
    };
    Ok(term(a, b)? + term(b, a)?)
}

/// Kummer's function `M(a, b, t) = ₁F₁(a; b; t)` by its power series.
pub fn kummer_m(a: f64, b: f64, t: f64) -> Result<f64> {
    if [a, b, t].iter().any(|v| !v.is_finite()) {
        return Err(Error::Parameter("non-finite Kummer argument".into()));
    }
    if is_gamma_pole(b) {
        return Err(Error::Pole {
            function: "Kummer M (parameter b)",
            argument: b,
        });
    }
    if t < 0.0 {
        // Kummer transformation keeps the series free of cancellation.
        return Ok(t.exp() * kummer_m(b - a, b, -t)?);
    }
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut quiet = 0;
    for j in 0..MAX_SERIES_TERMS {
        let jf = j as f64;
        term *= (a + jf) / ((b + jf) * (jf + 1.0)) * t;
        sum += term;
        if term == 0.0 {
            return Ok(sum);
        }
        if term.abs() <= SERIES_TOL * sum.abs() {
            quiet += 1;
            if quiet >= 2 {
                return Ok(sum);
            }
        } else {
            quiet = 0;
        }
    }
    Err(Error::NonConvergence {
        what: "Kummer M series",
        iterations: MAX_SERIES_TERMS,
        last: term,
    })
}

/// Beyond this argument the connection formula loses too many digits to
/// cancellation and the integral representation takes over.
const KUMMER_V_SWITCH: f64 = 8.0;

/// Connection-formula results whose two terms cancel by more than this factor
/// are recomputed from the integral representation.
const KUMMER_V_MAX_CANCELLATION: f64 = 100.0;

/// Kummer's second solution `V(a, b, t)` (Tricomi `U`), `a ≥ 0`, `b`
/// non-integer, `t > 0`:
///
/// `V = π/sin(πb) [ M(a,b,t)/(Γ(1+a−b)Γ(b)) − t^{1−b} M(1+a−b,2−b,t)/(Γ(a)Γ(2−b)) ]`.
pub fn kummer_v(a: f64, b: f64, t: f64) -> Result<f64> {
    if [a, b, t].iter().any(|v| !v.is_finite()) {
        return Err(Error::Parameter("non-finite Kummer argument".into()));
    }
    if is_integer(b) {
        return Err(Error::Pole {
            function: "Kummer V connection formula (integer b)",
            argument: b,
        });
    }
    if a < 0.0 {
        return Err(Error::Parameter(format!("Kummer V implemented for a >= 0, got a = {a}")));
    }
    if !(t > 0.0) {
        return Err(Error::Parameter(format!("Kummer V needs t > 0, got {t}")));
    }
    if a == 0.0 {
        return Ok(1.0);
    }
    if t > KUMMER_V_SWITCH {
        return kummer_v_integral(a, b, t);
    }
    let first = kummer_m(a, b, t)? * rgamma(1.0 + a - b) * rgamma(b);
    let second = t.powf(1.0 - b) * kummer_m(1.0 + a - b, 2.0 - b, t)? * rgamma(a) * rgamma(2.0 - b);
    let v = PI / sin_pi(b) * (first - second);
    if (first.abs() + second.abs()) > KUMMER_V_MAX_CANCELLATION * (first - second).abs() {
        return kummer_v_integral(a, b, t);
    }
    Ok(v)
}

/// `U(a,b,t) = Γ(a)^{−1} ∫₀^∞ e^{−ts} s^{a−1} (1+s)^{b−a−1} ds`, `a > 0`, by
/// exp-sinh quadrature `s = exp(π/2 · sinh u)`.
fn kummer_v_integral(a: f64, b: f64, t: f64) -> Result<f64> {
    let log_integrand = |u: f64| -> f64 {
        let ls = 0.5 * PI * u.sinh();
        let s = ls.exp();
        -t * s + a * ls + (b - a - 1.0) * s.ln_1p() + (0.5 * PI * u.cosh()).ln()
    };
    // Trapezoid sum over u = j·h; stops in each direction once terms are
    // negligible relative to the running total.
    let trapezoid = |h: f64| -> f64 {
        let mut sum = log_integrand(0.0).exp();
        for dir in [1.0, -1.0] {
            let mut j = 1;
            loop {
                let v = log_integrand(dir * j as f64 * h).exp();
                sum += v;
                if (v < 1e-19 * sum && j as f64 * h > 1.0) || j as f64 * h > 16.0 {
                    break;
                }
                j += 1;
            }
        }
        sum * h
    };
    let mut prev = trapezoid(0.5);
    let mut h = 0.25;
    for _ in 0..8 {
        let cur = trapezoid(h);
        // Double-exponential quadrature roughly squares its error per halving.
        if (cur - prev).abs() <= 1e-12 * cur.abs() {
            return Ok(cur * rgamma(a));
        }
        prev = cur;
        h *= 0.5;
    }
    Err(Error::NonConvergence {
        what: "Kummer V integral representation",
        iterations: 8,
        last: prev,
    })
}
