//! The flat operator `|D|^{2λ−1} ν·D` as a Fourier multiplier on a periodic box.
//!
//! Fields live on the torus `[−L/2, L/2)^n` sampled at `m` points per axis,
//! `x_j = −L/2 + j·L/m`. Frequencies follow the standard FFT ordering
//! `ξ = (2π/L)·(0, 1, …, m/2−1, −m/2, …, −1)` per axis. Every multiplier is
//! set to zero on the constant mode, where `|ξ|^{2λ−1}` is singular for
//! `λ < 1/2` and `ν·D` vanishes anyway.

use std::f64::consts::PI;
use std::io::{Read, Write};
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::clifford::CliffordRep;
use crate::sphere::gamma_multiplier;
use crate::{Error, Result};

/// Upper bound on `m^n`.
pub const MAX_POINTS: usize = 1 << 24;
/// Largest supported flat dimension.
pub const MAX_FLAT_DIM: usize = 4;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);
const MAGIC: &[u8; 8] = b"FDSPINOR";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TorusGrid {
    n: usize,
    l: f64,
    m: usize,
}

impl TorusGrid {
    /// Box `[−L/2, L/2)^n` with `m` points per axis, `m` a power of two.
    pub fn new(n: usize, l: f64, m: usize) -> Result<Self> {
        if n == 0 || n > MAX_FLAT_DIM {
            return Err(Error::Size {
                what: "flat dimension n",
                value: n,
                range: "1..=4",
            });
        }
        if !(l > 0.0) || !l.is_finite() {
            return Err(Error::Parameter(format!("box side must be positive, got {l}")));
        }
        if m < 2 || !m.is_power_of_two() {
            return Err(Error::Size {
                what: "points per axis m",
                value: m,
                range: "powers of two >= 2",
            });
        }
        match m.checked_pow(n as u32) {
            Some(total) if total <= MAX_POINTS => {}
            _ => {
                return Err(Error::Size {
                    what: "total grid points m^n",
                    value: m.saturating_pow(n as u32),
                    range: "<= 2^24",
                })
            }
        }
        Ok(Self { n, l, m })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn side(&self) -> f64 {
        self.l
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn spacing(&self) -> f64 {
        self.l / self.m as f64
    }

    /// Volume element `h^n`.
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.n as i32)
    }

    pub fn points(&self) -> usize {
        self.m.pow(self.n as u32)
    }

    /// Row-major multi-index of a flat point index (first axis slowest).
    pub fn multi_index(&self, mut p: usize) -> Vec<usize> {
        let mut idx = vec![0; self.n];
        for d in (0..self.n).rev() {
            idx[d] = p % self.m;
            p /= self.m;
        }
        idx
    }

    pub fn coordinate(&self, i: usize) -> f64 {
        -0.5 * self.l + i as f64 * self.spacing()
    }

    pub fn position(&self, p: usize) -> Vec<f64> {
        self.multi_index(p).into_iter().map(|i| self.coordinate(i)).collect()
    }

    /// Angular frequency of FFT bin `i`.
    pub fn frequency(&self, i: usize) -> f64 {
        let k = if i < self.m / 2 {
            i as f64
        } else {
            i as f64 - self.m as f64
        };
        2.0 * PI / self.l * k
    }

    pub fn wavevector(&self, p: usize) -> Vec<f64> {
        self.multi_index(p).into_iter().map(|i| self.frequency(i)).collect()
    }
}

/// `m^n` spinors of dimension `N`, stored point-major.
#[derive(Debug, Clone)]
pub struct SpinorField {
    grid: TorusGrid,
    rep: Arc<CliffordRep>,
    values: Vec<Complex64>,
}

impl SpinorField {
    pub fn zeros(grid: TorusGrid, rep: Arc<CliffordRep>) -> Result<Self> {
        check_rep(&grid, &rep)?;
        let len = grid.points() * rep.spinor_dim();
        Ok(Self {
            grid,
            rep,
            values: vec![ZERO; len],
        })
    }

    pub fn from_values(grid: TorusGrid, rep: Arc<CliffordRep>, values: Vec<Complex64>) -> Result<Self> {
        check_rep(&grid, &rep)?;
        let len = grid.points() * rep.spinor_dim();
        if values.len() != len {
            return Err(Error::Shape(format!("field has {} entries, expected {len}", values.len())));
        }
        if values.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Shape("non-finite field entry".into()));
        }
        Ok(Self { grid, rep, values })
    }

    /// Samples `f(x)` at every grid point; `f` returns the `N` components.
    pub fn from_fn(
        grid: TorusGrid,
        rep: Arc<CliffordRep>,
        f: impl Fn(&[f64]) -> Vec<Complex64> + Sync,
    ) -> Result<Self> {
        let nn = rep.spinor_dim();
        let values: Vec<Complex64> = (0..grid.points())
            .into_par_iter()
            .flat_map_iter(|p| {
                let v = f(&grid.position(p));
                assert_eq!(v.len(), nn, "sampler must return N components");
                v
            })
            .collect();
        Self::from_values(grid, rep, values)
    }

    /// Plane wave `e^{iξ·x}u` with `ξ` the wavevector of the given FFT bins.
    pub fn plane_wave(grid: TorusGrid, rep: Arc<CliffordRep>, bins: &[usize], u: &[Complex64]) -> Result<Self> {
        if bins.len() != grid.n() || bins.iter().any(|&b| b >= grid.m()) {
            return Err(Error::Shape("plane wave needs one in-range bin per axis".into()));
        }
        if u.len() != rep.spinor_dim() {
            return Err(Error::Shape("polarization has wrong length".into()));
        }
        let xi: Vec<f64> = bins.iter().map(|&b| grid.frequency(b)).collect();
        Self::from_fn(grid, rep, |x| {
            let phase: f64 = xi.iter().zip(x).map(|(k, y)| k * y).sum();
            let e = Complex64::from_polar(1.0, phase);
            u.iter().map(|c| e * c).collect()
        })
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    pub fn rep(&self) -> &Arc<CliffordRep> {
        &self.rep
    }

    pub fn spinor_dim(&self) -> usize {
        self.rep.spinor_dim()
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn point(&self, p: usize) -> &[Complex64] {
        let nn = self.spinor_dim();
        &self.values[p * nn..(p + 1) * nn]
    }

    fn same_shape(&self, other: &Self) -> Result<()> {
        if self.grid != other.grid || self.spinor_dim() != other.spinor_dim() {
            return Err(Error::Shape("fields live on different grids".into()));
        }
        Ok(())
    }

    fn with_values(&self, values: Vec<Complex64>) -> Self {
        Self {
            grid: self.grid,
            rep: self.rep.clone(),
            values,
        }
    }

    /// Pointwise `|ψ(x)|`.
    pub fn pointwise_norms(&self) -> Vec<f64> {
        self.values
            .par_chunks(self.spinor_dim())
            .map(|v| v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt())
            .collect()
    }

    /// Unweighted `Σ_x ⟨a(x), b(x)⟩` (conjugate-linear in `a`).
    pub fn dot(&self, other: &Self) -> Result<Complex64> {
        self.same_shape(other)?;
        Ok(self
            .values
            .par_iter()
            .zip(&other.values)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// Unweighted `(Σ_x |ψ(x)|²)^{1/2}`.
    pub fn norm(&self) -> f64 {
        self.values.par_iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        self.with_values(self.values.par_iter().map(|z| z * c).collect())
    }

    /// `a·self + b·other`.
    pub fn combine(&self, a: Complex64, other: &Self, b: Complex64) -> Result<Self> {
        self.same_shape(other)?;
        Ok(self.with_values(
            self.values
                .par_iter()
                .zip(&other.values)
                .map(|(x, y)| a * x + b * y)
                .collect(),
        ))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.combine(Complex64::new(1.0, 0.0), other, Complex64::new(-1.0, 0.0))
    }

    /// Pointwise `ψ(x) ↦ w(x)ψ(x)`.
    pub fn weighted(&self, w: &[f64]) -> Result<Self> {
        if w.len() != self.grid.points() {
            return Err(Error::Shape("weight length differs from grid".into()));
        }
        let nn = self.spinor_dim();
        let mut out = self.values.clone();
        out.par_chunks_mut(nn).zip(w).for_each(|(v, &s)| {
            for z in v {
                *z *= s;
            }
        });
        Ok(self.with_values(out))
    }

    /// Pointwise left multiplication by a constant `N×N` matrix.
    pub fn apply_matrix(&self, a: &crate::clifford::CMatrix) -> Result<Self> {
        let nn = self.spinor_dim();
        if a.shape() != (nn, nn) {
            return Err(Error::Shape("matrix does not match spinor dimension".into()));
        }
        let mut out = self.values.clone();
        out.par_chunks_mut(nn).zip(self.values.par_chunks(nn)).for_each(|(o, v)| {
            for (i, oi) in o.iter_mut().enumerate() {
                *oi = (0..nn).map(|j| a[(i, j)] * v[j]).sum();
            }
        });
        Ok(self.with_values(out))
    }

    /// Grid average of each component.
    pub fn mean(&self) -> Vec<Complex64> {
        let nn = self.spinor_dim();
        let mut acc = vec![ZERO; nn];
        for v in self.values.chunks(nn) {
            for (a, z) in acc.iter_mut().zip(v) {
                *a += z;
            }
        }
        let count = self.grid.points() as f64;
        acc.iter().map(|a| a / count).collect()
    }

    /// Projection off the constant (zero-frequency) mode.
    pub fn without_mean(&self) -> Self {
        let mean = self.mean();
        let nn = self.spinor_dim();
        let mut out = self.values.clone();
        out.par_chunks_mut(nn).for_each(|v| {
            for (z, m) in v.iter_mut().zip(&mean) {
                *z -= m;
            }
        });
        self.with_values(out)
    }

    /// Binary snapshot: magic, `n`, `L`, `m`, `N` (little-endian `u64`/`f64`),
    /// then point-major `(re, im)` doubles.
    pub fn write_binary<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(MAGIC)?;
        w.write_all(&(self.grid.n as u64).to_le_bytes())?;
        w.write_all(&self.grid.l.to_le_bytes())?;
        w.write_all(&(self.grid.m as u64).to_le_bytes())?;
        w.write_all(&(self.spinor_dim() as u64).to_le_bytes())?;
        let mut buf = Vec::with_capacity(self.values.len() * 16);
        for z in &self.values {
            buf.extend_from_slice(&z.re.to_le_bytes());
            buf.extend_from_slice(&z.im.to_le_bytes());
        }
        w.write_all(&buf)?;
        Ok(())
    }

    pub fn read_binary<R: Read>(mut r: R) -> Result<Self> {
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(Error::Io("not a spinor field snapshot".into()));
        }
        let mut word = [0u8; 8];
        let mut next = |r: &mut R| -> Result<[u8; 8]> {
            r.read_exact(&mut word)?;
            Ok(word)
        };
        let n = u64::from_le_bytes(next(&mut r)?) as usize;
        let l = f64::from_le_bytes(next(&mut r)?);
        let m = u64::from_le_bytes(next(&mut r)?) as usize;
        let nn = u64::from_le_bytes(next(&mut r)?) as usize;
        let grid = TorusGrid::new(n, l, m)?;
        let rep = Arc::new(CliffordRep::new(n)?);
        if rep.spinor_dim() != nn {
            return Err(Error::Shape(format!("snapshot spinor dimension {nn} does not match n = {n}")));
        }
        let mut body = vec![0u8; grid.points() * nn * 16];
        r.read_exact(&mut body)?;
        let values = body
            .chunks_exact(16)
            .map(|c| {
                Complex64::new(
                    f64::from_le_bytes(c[..8].try_into().unwrap()),
                    f64::from_le_bytes(c[8..].try_into().unwrap()),
                )
            })
            .collect();
        Self::from_values(grid, rep, values)
    }

    /// CSV line through the box centre along `axis`: `x, |ψ|, re_0, im_0, …`.
    pub fn write_csv_slice<W: Write>(&self, axis: usize, w: W) -> Result<()> {
        let n = self.grid.n;
        if axis >= n {
            return Err(Error::Index {
                what: "slice axis",
                index: axis,
                max: n.saturating_sub(1),
            });
        }
        let m = self.grid.m;
        let nn = self.spinor_dim();
        let mut wtr = csv::Writer::from_writer(w);
        let mut header = vec!["x".to_string(), "abs".to_string()];
        for a in 0..nn {
            header.push(format!("re_{a}"));
            header.push(format!("im_{a}"));
        }
        wtr.write_record(&header)?;
        let norms = self.pointwise_norms();
        for i in 0..m {
            let p = (0..n).fold(0, |acc, d| acc * m + if d == axis { i } else { m / 2 });
            let mut row = vec![self.grid.coordinate(i).to_string(), norms[p].to_string()];
            for z in self.point(p) {
                row.push(z.re.to_string());
                row.push(z.im.to_string());
            }
            wtr.write_record(&row)?;
        }
        wtr.flush()?;
        Ok(())
    }
}

fn check_rep(grid: &TorusGrid, rep: &CliffordRep) -> Result<()> {
    if rep.n() != grid.n() {
        return Err(Error::Shape(format!(
            "Clifford representation for n = {} on a grid with n = {}",
            rep.n(),
            grid.n()
        )));
    }
    Ok(())
}

/// In-place n-dimensional FFT of one component-major array.
fn fft_nd(data: &mut [Complex64], grid: &TorusGrid, fft: &Arc<dyn Fft<f64>>) {
    let m = grid.m;
    let n = grid.n;
    for d in 0..n {
        let inner = m.pow((n - 1 - d) as u32);
        let block = m * inner;
        data.par_chunks_mut(block).for_each(|chunk| {
            if inner == 1 {
                fft.process(chunk);
                return;
            }
            let mut buf = vec![ZERO; block];
            for j in 0..m {
                for i in 0..inner {
                    buf[i * m + j] = chunk[j * inner + i];
                }
            }
            fft.process(&mut buf);
            for j in 0..m {
                for i in 0..inner {
                    chunk[j * inner + i] = buf[i * m + j];
                }
            }
        });
    }
}

/// Forward or inverse (normalized) transform of every spinor component.
fn transform(values: &[Complex64], grid: &TorusGrid, nn: usize, inverse: bool) -> Vec<Complex64> {
    let pts = grid.points();
    let mut planner = FftPlanner::new();
    let fft = if inverse {
        planner.plan_fft_inverse(grid.m)
    } else {
        planner.plan_fft_forward(grid.m)
    };
    let mut comps: Vec<Vec<Complex64>> = (0..nn)
        .map(|a| (0..pts).map(|p| values[p * nn + a]).collect())
        .collect();
    comps.par_iter_mut().for_each(|c| fft_nd(c, grid, &fft));
    let scale = if inverse { 1.0 / pts as f64 } else { 1.0 };
    let mut out = vec![ZERO; pts * nn];
    out.par_chunks_mut(nn).enumerate().for_each(|(p, v)| {
        for (a, z) in v.iter_mut().enumerate() {
            *z = comps[a][p] * scale;
        }
    });
    out
}

/// Matrix part of a Fourier multiplier; the scalar part depends on `|ξ|`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SymbolKind {
    /// `I`.
    Scalar,
    /// `M(ξ) = i Σ ξ_j γ_j`, the symbol of `ν·D`.
    Dirac,
    /// `−γ_{n+1} M(ξ)`, the symbol of `−ν·(ν·D)`.
    Geometric,
}

/// Applies `ψ̂(ξ) ↦ a(|ξ|)·S(ξ)ψ̂(ξ)` with `a(0) := 0` on the constant mode.
pub fn apply_multiplier(
    field: &SpinorField,
    kind: SymbolKind,
    scalar: impl Fn(f64) -> f64 + Sync,
) -> Result<SpinorField> {
    let grid = field.grid;
    let nn = field.spinor_dim();
    let n = grid.n;
    let dense: Vec<Vec<Complex64>> = field
        .rep
        .gammas()
        .iter()
        .map(|g| (0..nn * nn).map(|k| g[(k / nn, k % nn)]).collect())
        .collect();
    let mut hat = transform(&field.values, &grid, nn, false);
    hat.par_chunks_mut(nn).enumerate().for_each(|(p, v)| {
        let xi = grid.wavevector(p);
        let r = xi.iter().map(|x| x * x).sum::<f64>().sqrt();
        if r == 0.0 {
            v.iter_mut().for_each(|z| *z = ZERO);
            return;
        }
        let a = scalar(r);
        match kind {
            SymbolKind::Scalar => v.iter_mut().for_each(|z| *z *= a),
            SymbolKind::Dirac | SymbolKind::Geometric => {
                let mut mv = vec![ZERO; nn];
                for (j, &x) in xi.iter().enumerate() {
                    let g = &dense[j];
                    for (i, out) in mv.iter_mut().enumerate() {
                        let row = &g[i * nn..(i + 1) * nn];
                        let s: Complex64 = row.iter().zip(v.iter()).map(|(gij, vj)| gij * vj).sum();
                        *out += I * x * s;
                    }
                }
                if kind == SymbolKind::Geometric {
                    let g = &dense[n];
                    for (i, out) in v.iter_mut().enumerate() {
                        let row = &g[i * nn..(i + 1) * nn];
                        *out = -a * row.iter().zip(&mv).map(|(gij, mj)| gij * mj).sum::<Complex64>();
                    }
                } else {
                    for (out, m) in v.iter_mut().zip(&mv) {
                        *out = a * m;
                    }
                }
            }
        }
    });
    let values = transform(&hat, &grid, nn, true);
    Ok(field.with_values(values))
}

fn check_order(lambda: f64) -> Result<()> {
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(Error::Parameter(format!("order lambda must be finite and >= 0, got {lambda}")));
    }
    Ok(())
}

/// `D^{2λ} = |D|^{2λ−1} ν·D`: symbol `|ξ|^{2λ−1} M(ξ)`.
pub fn fractional_dirac_flat(field: &SpinorField, lambda: f64) -> Result<SpinorField> {
    check_order(lambda)?;
    apply_multiplier(field, SymbolKind::Dirac, |r| r.powf(2.0 * lambda - 1.0))
}

/// First-order `ν·D`: symbol `M(ξ)`.
pub fn classical_dirac_flat(field: &SpinorField) -> Result<SpinorField> {
    apply_multiplier(field, SymbolKind::Dirac, |_| 1.0)
}

/// `D̄^{2λ} = −ν·D^{2λ}`: symbol `−γ_{n+1}|ξ|^{2λ−1}M(ξ)`.
pub fn geometric_fractional_dirac(field: &SpinorField, lambda: f64) -> Result<SpinorField> {
    check_order(lambda)?;
    apply_multiplier(field, SymbolKind::Geometric, |r| r.powf(2.0 * lambda - 1.0))
}

/// Pseudo-inverse of `D̄^{2λ}`: symbol `−γ_{n+1}M(ξ)|ξ|^{−2λ−1}`.
pub fn geometric_inverse(field: &SpinorField, lambda: f64) -> Result<SpinorField> {
    check_order(lambda)?;
    apply_multiplier(field, SymbolKind::Geometric, |r| r.powf(-2.0 * lambda - 1.0))
}

/// Pseudo-inverse of `|D̄^{2λ}|`: symbol `|ξ|^{−2λ}`.
pub fn abs_inverse(field: &SpinorField, lambda: f64) -> Result<SpinorField> {
    check_order(lambda)?;
    apply_multiplier(field, SymbolKind::Scalar, |r| r.powf(-2.0 * lambda))
}

/// `|ξ|^{power}` on every component.
pub fn radial_multiplier(field: &SpinorField, power: f64) -> Result<SpinorField> {
    apply_multiplier(field, SymbolKind::Scalar, |r| r.powf(power))
}

/// First eigenvalue `Γ(n/2+1/2+λ)/Γ(n/2+1/2−λ)` of the fractional operator on `Sⁿ`.
pub fn sphere_first_eigenvalue(n: usize, lambda: f64) -> Result<f64> {
    gamma_multiplier(lambda, n as f64 / 2.0)
}

/// Constant spinor `e_1/√2`, for which the bubble has `|ψ| = f^{(n−2λ)/2}`.
pub fn default_bubble_spinor(spinor_dim: usize) -> Vec<Complex64> {
    let mut phi = vec![ZERO; spinor_dim];
    phi[0] = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    phi
}

/// `ψ(x) = f(x)^{(n+1−2λ)/2}(I − Σ_j x_j ē_j)Φ₀` with `f = 2/(1+|x|²)`.
pub fn bubble(grid: TorusGrid, rep: Arc<CliffordRep>, lambda: f64, phi0: &[Complex64]) -> Result<SpinorField> {
    let n = grid.n();
    if !(lambda > 0.0 && lambda < n as f64 / 2.0) {
        return Err(Error::Parameter(format!(
            "bubble needs 0 < lambda < n/2 = {}, got {lambda}",
            n as f64 / 2.0
        )));
    }
    if phi0.len() != rep.spinor_dim() {
        return Err(Error::Shape("constant spinor has wrong length".into()));
    }
    let ebar = (1..=n).map(|j| rep.boundary_mult(j)).collect::<Result<Vec<_>>>()?;
    let e_phi: Vec<Vec<Complex64>> = ebar
        .iter()
        .map(|e| (0..phi0.len()).map(|i| (0..phi0.len()).map(|j| e[(i, j)] * phi0[j]).sum()).collect())
        .collect();
    let power = (n as f64 + 1.0 - 2.0 * lambda) / 2.0;
    SpinorField::from_fn(grid, rep, |x| {
        let r2: f64 = x.iter().map(|v| v * v).sum();
        let amp = (2.0 / (1.0 + r2)).powf(power);
        (0..phi0.len())
            .map(|i| {
                let tilt: Complex64 = x.iter().zip(&e_phi).map(|(xj, ej)| xj * ej[i]).sum();
                amp * (phi0[i] - tilt)
            })
            .collect()
    })
}

/// `|ψ|^{4λ/(n−2λ)}ψ`, zero where `ψ = 0`.
pub fn nonlinear_term(psi: &SpinorField, lambda: f64) -> Result<SpinorField> {
    let n = psi.grid().n() as f64;
    if !(lambda > 0.0 && lambda < n / 2.0) {
        return Err(Error::Parameter(format!("nonlinearity needs 0 < lambda < n/2, got {lambda}")));
    }
    let q = 4.0 * lambda / (n - 2.0 * lambda);
    let w: Vec<f64> = psi
        .pointwise_norms()
        .into_iter()
        .map(|a| if a > 0.0 { a.powf(q) } else { 0.0 })
        .collect();
    psi.weighted(&w)
}

/// Residual field `D̄^{2λ}ψ − μ|ψ|^{4λ/(n−2λ)}ψ` together with `D̄^{2λ}ψ`.
fn residual_parts(psi: &SpinorField, lambda: f64, mu: f64) -> Result<(SpinorField, SpinorField)> {
    if !mu.is_finite() {
        return Err(Error::Parameter(format!("eigenvalue mu must be finite, got {mu}")));
    }
    let lhs = geometric_fractional_dirac(psi, lambda)?;
    let rhs = nonlinear_term(psi, lambda)?;
    let res = lhs.combine(Complex64::new(1.0, 0.0), &rhs, Complex64::new(-mu, 0.0))?;
    Ok((res, lhs))
}

/// `‖D̄^{2λ}ψ − μ|ψ|^{4λ/(n−2λ)}ψ‖₂ / ‖D̄^{2λ}ψ‖₂` over the whole grid.
pub fn yamabe_residual(psi: &SpinorField, lambda: f64, mu: f64) -> Result<f64> {
    let (res, lhs) = residual_parts(psi, lambda, mu)?;
    let denom = lhs.norm();
    if denom == 0.0 {
        return Err(Error::Degenerate("D̄^{2λ}ψ vanishes on the grid".into()));
    }
    Ok(res.norm() / denom)
}

/// The same ratio restricted to the ball `|x| ≤ radius`, away from the
/// periodization seam.
pub fn interior_residual(psi: &SpinorField, lambda: f64, mu: f64, radius: f64) -> Result<f64> {
    let (res, lhs) = residual_parts(psi, lambda, mu)?;
    let grid = *psi.grid();
    let mask: Vec<f64> = (0..grid.points())
        .map(|p| {
            let r2: f64 = grid.position(p).iter().map(|x| x * x).sum();
            if r2 <= radius * radius {
                1.0
            } else {
                0.0
            }
        })
        .collect();
    let denom = lhs.weighted(&mask)?.norm();
    if denom == 0.0 {
        return Err(Error::Degenerate("no grid points inside the interior ball".into()));
    }
    Ok(res.weighted(&mask)?.norm() / denom)
}
