//! The round sphere in the eigenbasis of `ν·D`.
//!
//! `ν·D` has eigenvalues `±μ_k`, `μ_k = n/2 + k − 1`, and the fractional
//! operator acts diagonally with multiplier `s·Γ(μ+1/2+λ)/Γ(μ+1/2−λ)`. The
//! spectral `Q` operator is minus the `λ`-derivative of that multiplier at
//! `λ = n/2`. The hypergeometric radial profiles of the hyperbolic extension
//! give an independent route to the same multipliers through a small-`r` fit.

use std::io::{Read, Write};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::specfun::{d_lambda, digamma, gamma_ratio, hyp2f1};
use crate::{Error, Result, Sign};

/// `μ_k = n/2 + k − 1`.
pub fn mu(n: usize, k: usize) -> Result<f64> {
    if k == 0 {
        return Err(Error::Index {
            what: "eigenvalue ladder index k",
            index: k,
            max: usize::MAX,
        });
    }
    if n == 0 {
        return Err(Error::Size {
            what: "sphere dimension n",
            value: n,
            range: "n >= 1",
        });
    }
    Ok(n as f64 / 2.0 + k as f64 - 1.0)
}

/// `F(λ, μ) = Γ(μ+1/2+λ)/Γ(μ+1/2−λ)`.
pub fn gamma_multiplier(lambda: f64, mu: f64) -> Result<f64> {
    gamma_ratio(mu + 0.5 + lambda, mu + 0.5 - lambda)
}

/// Multiplier `s·F(λ, μ)` of the fractional operator on the `(μ, s)` eigenspace.
pub fn sphere_multiplier(lambda: f64, mu: f64, s: Sign) -> Result<f64> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::Parameter(format!("sphere multiplier needs lambda > 0, got {lambda}")));
    }
    Ok(s.value() * gamma_multiplier(lambda, mu)?)
}

/// `|F(λ+1,μ) − (μ² − (λ+1/2)²)F(λ,μ)| / |F(λ+1,μ)|`.
pub fn recursion_gap(lambda: f64, mu: f64) -> Result<f64> {
    let lifted = gamma_multiplier(lambda + 1.0, mu)?;
    let base = gamma_multiplier(lambda, mu)?;
    let factor = mu * mu - (lambda + 0.5) * (lambda + 0.5);
    Ok((lifted - factor * base).abs() / lifted.abs())
}

/// `Q` multiplier `−s·F(n/2, μ)·[ψ(μ+1/2+n/2) + ψ(μ+1/2−n/2)]`.
pub fn q_multiplier(n: usize, mu: f64, s: Sign) -> Result<f64> {
    let half = n as f64 / 2.0;
    let f = gamma_multiplier(half, mu)?;
    let psi = digamma(mu + 0.5 + half)? + digamma(mu + 0.5 - half)?;
    Ok(-s.value() * f * psi)
}

/// Central difference `−s·(F(n/2+ε, μ) − F(n/2−ε, μ))/(2ε)`.
pub fn q_multiplier_fd(n: usize, mu: f64, s: Sign, eps: f64) -> Result<f64> {
    let half = n as f64 / 2.0;
    let up = gamma_multiplier(half + eps, mu)?;
    let down = gamma_multiplier(half - eps, mu)?;
    Ok(-s.value() * (up - down) / (2.0 * eps))
}

/// Coefficients `c_{k,s}` on the eigenbasis `φ̂_{k,±}`, `k = 1..K`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SphereSpectrum {
    n: usize,
    /// `coeffs[k−1] = [c_{k,+}, c_{k,−}]`.
    coeffs: Vec<[Complex64; 2]>,
}

#[derive(Debug, Serialize, Deserialize)]
struct SpectrumRow {
    k: usize,
    s: char,
    re: f64,
    im: f64,
}

fn slot(s: Sign) -> usize {
    match s {
        Sign::Plus => 0,
        Sign::Minus => 1,
    }
}

impl SphereSpectrum {
    pub fn zeros(n: usize, k_max: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Size {
                what: "sphere dimension n",
                value: n,
                range: "n >= 1",
            });
        }
        if k_max == 0 {
            return Err(Error::Size {
                what: "truncation K",
                value: k_max,
                range: "K >= 1",
            });
        }
        Ok(Self {
            n,
            coeffs: vec![[Complex64::new(0.0, 0.0); 2]; k_max],
        })
    }

    pub fn from_coeffs(n: usize, coeffs: Vec<[Complex64; 2]>) -> Result<Self> {
        let mut spec = Self::zeros(n, coeffs.len())?;
        if coeffs.iter().flatten().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::Shape("non-finite spectral coefficient".into()));
        }
        spec.coeffs = coeffs;
        Ok(spec)
    }

    /// Unit coefficient at `(k, s)`, zero elsewhere.
    pub fn delta(n: usize, k_max: usize, k: usize, s: Sign) -> Result<Self> {
        let mut spec = Self::zeros(n, k_max)?;
        spec.set(k, s, Complex64::new(1.0, 0.0))?;
        Ok(spec)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k_max(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[[Complex64; 2]] {
        &self.coeffs
    }

    fn check_k(&self, k: usize) -> Result<()> {
        if k == 0 || k > self.k_max() {
            return Err(Error::Index {
                what: "mode k",
                index: k,
                max: self.k_max(),
            });
        }
        Ok(())
    }

    pub fn get(&self, k: usize, s: Sign) -> Result<Complex64> {
        self.check_k(k)?;
        Ok(self.coeffs[k - 1][slot(s)])
    }

    pub fn set(&mut self, k: usize, s: Sign, c: Complex64) -> Result<()> {
        self.check_k(k)?;
        if !c.re.is_finite() || !c.im.is_finite() {
            return Err(Error::Shape("non-finite spectral coefficient".into()));
        }
        self.coeffs[k - 1][slot(s)] = c;
        Ok(())
    }

    /// Applies a per-mode real multiplier `m(μ_k, s)`, tagging failures with `(k, s)`.
    pub fn map_diagonal(&self, m: impl Fn(f64, Sign) -> Result<f64>) -> Result<Self> {
        let mut out = self.clone();
        for (i, pair) in out.coeffs.iter_mut().enumerate() {
            let k = i + 1;
            let mu_k = mu(self.n, k)?;
            for s in Sign::both() {
                let factor = m(mu_k, s).map_err(|e| Error::Mode {
                    k,
                    sign: s.symbol(),
                    source: Box::new(e),
                })?;
                pair[slot(s)] *= factor;
            }
        }
        Ok(out)
    }

    /// `sup |c_{k,s}|`.
    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().flatten().fold(0.0, |m, c| m.max(c.norm()))
    }

    /// `sup |a − b|` over matching truncations.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        if self.n != other.n || self.k_max() != other.k_max() {
            return Err(Error::Shape("spectra differ in n or truncation".into()));
        }
        Ok(self
            .coeffs
            .iter()
            .flatten()
            .zip(other.coeffs.iter().flatten())
            .fold(0.0, |m, (a, b)| m.max((a - b).norm())))
    }

    pub fn linear_combination(&self, a: Complex64, other: &Self, b: Complex64) -> Result<Self> {
        if self.n != other.n || self.k_max() != other.k_max() {
            return Err(Error::Shape("spectra differ in n or truncation".into()));
        }
        let mut out = self.clone();
        for (x, y) in out.coeffs.iter_mut().zip(&other.coeffs) {
            x[0] = a * x[0] + b * y[0];
            x[1] = a * x[1] + b * y[1];
        }
        Ok(out)
    }

    /// CSV with header `k,s,re,im`, one row per `(k, s)`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        for (i, pair) in self.coeffs.iter().enumerate() {
            for s in Sign::both() {
                let c = pair[slot(s)];
                wtr.serialize(SpectrumRow {
                    k: i + 1,
                    s: s.symbol(),
                    re: c.re,
                    im: c.im,
                })?;
            }
        }
        wtr.flush()?;
        Ok(())
    }

    /// Reads the format of [`SphereSpectrum::write_csv`]; missing modes are zero.
    pub fn read_csv<R: Read>(n: usize, r: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(r);
        let rows: Vec<SpectrumRow> = rdr.deserialize().collect::<std::result::Result<_, _>>()?;
        let k_max = rows.iter().map(|row| row.k).max().unwrap_or(0);
        let mut spec = Self::zeros(n, k_max)?;
        for row in rows {
            let s = match row.s {
                '+' => Sign::Plus,
                '-' => Sign::Minus,
                other => return Err(Error::Shape(format!("unknown branch sign '{other}'"))),
            };
            spec.set(row.k, s, Complex64::new(row.re, row.im))?;
        }
        Ok(spec)
    }
}

/// `c_{k,s} ↦ s·F(λ, μ_k)·c_{k,s}`.
pub fn apply_fractional_dirac_sphere(spec: &SphereSpectrum, lambda: f64) -> Result<SphereSpectrum> {
    spec.map_diagonal(|m, s| sphere_multiplier(lambda, m, s))
}

/// `c_{k,s} ↦ Q(μ_k, s)·c_{k,s}` at the critical order `λ = n/2`.
pub fn q_operator_sphere(spec: &SphereSpectrum) -> Result<SphereSpectrum> {
    let n = spec.n();
    spec.map_diagonal(|m, s| q_multiplier(n, m, s))
}

/// Smallest eigenvalue magnitude of the truncated operator and the `k` attaining it.
pub fn first_eigenvalue(n: usize, k_max: usize, lambda: f64) -> Result<(f64, usize)> {
    let mut best = (f64::INFINITY, 0);
    for k in 1..=k_max {
        let v = gamma_multiplier(lambda, mu(n, k)?)?.abs();
        if v < best.0 {
            best = (v, k);
        }
    }
    Ok(best)
}

/// Which radial component of the extension: `f_k` on `φ̂_{k,+}` or `g_k` on `φ̂_{k,−}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RadialKind {
    F,
    G,
}

impl RadialKind {
    /// Branch of `ν·D` the profile lives on.
    pub fn sign(self) -> Sign {
        match self {
            RadialKind::F => Sign::Plus,
            RadialKind::G => Sign::Minus,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialProfile {
    pub n: usize,
    pub k: usize,
    pub lambda: f64,
    pub kind: RadialKind,
    pub y: Vec<f64>,
    pub values: Vec<f64>,
}

/// `f_k(y) = sinh^{k−1}(y/2) cosh^k(y/2) ₂F₁(μ+1/2−λ, μ+1/2+λ; μ+1/2; −sinh²(y/2))`,
/// or `g_k(y) = sinh^k(y/2) cosh^{k−1}(y/2) ₂F₁(…; μ+3/2; …)`.
pub fn profile_value(n: usize, k: usize, lambda: f64, kind: RadialKind, y: f64) -> Result<f64> {
    if !(y > 0.0) || !y.is_finite() {
        return Err(Error::Parameter(format!("radial profile needs y > 0, got {y}")));
    }
    let m = mu(n, k)?;
    let sh = (0.5 * y).sinh();
    let ch = (0.5 * y).cosh();
    let (ps, pc, c) = match kind {
        RadialKind::F => (k as i32 - 1, k as i32, m + 0.5),
        RadialKind::G => (k as i32, k as i32 - 1, m + 1.5),
    };
    let h = hyp2f1(m + 0.5 - lambda, m + 0.5 + lambda, c, -sh * sh).map_err(|e| Error::Mode {
        k,
        sign: kind.sign().symbol(),
        source: Box::new(e),
    })?;
    Ok(sh.powi(ps) * ch.powi(pc) * h)
}

pub fn radial_profile(n: usize, k: usize, lambda: f64, kind: RadialKind, y_grid: &[f64]) -> Result<RadialProfile> {
    let values = y_grid
        .iter()
        .map(|&y| profile_value(n, k, lambda, kind, y))
        .collect::<Result<Vec<_>>>()?;
    Ok(RadialProfile {
        n,
        k,
        lambda,
        kind,
        y: y_grid.to_vec(),
        values,
    })
}

/// Relative residual of the mode equation
/// `(∂_y + (n/2)coth y)²σ − μ²σ/sinh²y + sμ cosh y σ/sinh²y − λ²σ = 0`
/// at `y`, with derivatives from 5-point differences of step `h`.
pub fn radial_ode_residual(n: usize, k: usize, lambda: f64, kind: RadialKind, y: f64, h: f64) -> Result<f64> {
    if !(y > 2.0 * h) {
        return Err(Error::Parameter(format!("stencil at y = {y} with step {h} leaves y > 0")));
    }
    let f = |x: f64| profile_value(n, k, lambda, kind, x);
    let (fm2, fm1, f0, fp1, fp2) = (f(y - 2.0 * h)?, f(y - h)?, f(y)?, f(y + h)?, f(y + 2.0 * h)?);
    let d1 = (fm2 - 8.0 * fm1 + 8.0 * fp1 - fp2) / (12.0 * h);
    let d2 = (-fm2 + 16.0 * fm1 - 30.0 * f0 + 16.0 * fp1 - fp2) / (12.0 * h * h);
    let m = mu(n, k)?;
    let a = n as f64 / 2.0;
    let coth = 1.0 / y.tanh();
    let csch2 = 1.0 / (y.sinh() * y.sinh());
    let s = kind.sign().value();
    let terms = [
        d2,
        2.0 * a * coth * d1,
        a * (a * coth * coth - csch2) * f0,
        -m * m * csch2 * f0,
        s * m * y.cosh() * csch2 * f0,
        -lambda * lambda * f0,
    ];
    let scale = terms.iter().fold(0.0f64, |acc, t| acc.max(t.abs()));
    Ok(terms.iter().sum::<f64>().abs() / scale)
}

/// Small-`r` window and model order for [`scattering_fit`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitWindow {
    pub r_min: f64,
    pub r_max: f64,
    pub points: usize,
    /// Highest integer power `J` in the two series `Σ_{j≤J} a_j r^j`, `Σ_{j≤J} b_j r^{j+2λ}`.
    pub order: usize,
}

impl Default for FitWindow {
    fn default() -> Self {
        Self {
            r_min: 1e-4,
            r_max: 1e-2,
            points: 64,
            order: 4,
        }
    }
}

impl FitWindow {
    pub fn nodes(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![self.r_min];
        }
        let (a, b) = (self.r_min.ln(), self.r_max.ln());
        (0..self.points)
            .map(|i| (a + (b - a) * i as f64 / (self.points - 1) as f64).exp())
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScatteringFit {
    /// `d_λ · c₂/c₁`.
    pub multiplier: f64,
    /// Coefficient of `r^{n/2−λ}`.
    pub c1: f64,
    /// Coefficient of `r^{n/2+λ}`.
    pub c2: f64,
    /// Condition number of the column-scaled design matrix.
    pub condition: f64,
    pub window: FitWindow,
}

const MAX_FIT_CONDITION: f64 = 1e13;

/// Reads the multiplier off the expansion at the conformal boundary.
///
/// With `y = −ln(r/2)` the profile behaves as
/// `r^{n/2−λ}(c₁ + O(r)) + r^{n/2+λ}(c₂ + O(r))`. After dividing by
/// `r^{n/2−λ}` the data are fitted by least squares to `r^j` and `r^{j+2λ}`,
/// `j ≤ J`; the ratio `d_λ c₂/c₁` is the multiplier on the profile's branch.
pub fn scattering_fit(n: usize, k: usize, lambda: f64, kind: RadialKind, window: FitWindow) -> Result<ScatteringFit> {
    if !(lambda > 0.0 && lambda < 0.5) {
        return Err(Error::Parameter(format!(
            "profile extraction needs lambda in (0, 1/2), got {lambda}"
        )));
    }
    if !(window.r_min > 0.0 && window.r_max >= window.r_min && window.r_max < 2.0) {
        return Err(Error::Parameter(format!(
            "fit window [{}, {}] must lie in (0, 2)",
            window.r_min, window.r_max
        )));
    }
    let cols = 2 * (window.order + 1);
    let rs = window.nodes();
    if rs.len() < cols || window.r_max <= window.r_min {
        return Err(Error::Conditioning(format!(
            "{} samples on [{:e}, {:e}] cannot determine {cols} coefficients",
            rs.len(),
            window.r_min,
            window.r_max
        )));
    }
    let p = n as f64 / 2.0 - lambda;
    let rhs = rs
        .iter()
        .map(|&r| Ok(profile_value(n, k, lambda, kind, -(0.5 * r).ln())? / r.powf(p)))
        .collect::<Result<Vec<_>>>()?;
    let mut a = DMatrix::from_fn(rs.len(), cols, |i, j| {
        let x = rs[i] / window.r_max;
        let power = (j / 2) as f64 + if j % 2 == 1 { 2.0 * lambda } else { 0.0 };
        x.powf(power)
    });
    let scales: Vec<f64> = a.column_iter().map(|c| c.norm()).collect();
    for (j, sc) in scales.iter().enumerate() {
        a.column_mut(j).scale_mut(1.0 / sc);
    }
    let svd = a.svd(true, true);
    let sv = &svd.singular_values;
    let condition = sv.max() / sv.min();
    if !condition.is_finite() || condition > MAX_FIT_CONDITION {
        return Err(Error::Conditioning(format!(
            "design matrix condition {condition:e} on window [{:e}, {:e}]",
            window.r_min, window.r_max
        )));
    }
    let coef = svd
        .solve(&DVector::from_vec(rhs), 0.0)
        .map_err(|e| Error::Conditioning(e.to_string()))?;
    let c1 = coef[0] / scales[0];
    let c2 = coef[1] / scales[1] / window.r_max.powf(2.0 * lambda);
    if c1 == 0.0 || !c1.is_finite() || !c2.is_finite() {
        return Err(Error::Conditioning("leading coefficient vanished".into()));
    }
    Ok(ScatteringFit {
        multiplier: d_lambda(lambda)? * c2 / c1,
        c1,
        c2,
        condition,
        window,
    })
}

/// Multiplier on `φ̂_{k,+}` extracted from `f_k` with the default window.
pub fn scattering_from_profile(n: usize, k: usize, lambda: f64) -> Result<f64> {
    Ok(scattering_fit(n, k, lambda, RadialKind::F, FitWindow::default())?.multiplier)
}
