//! Conformal fractional Dirac operators on the two model spin geometries.
//!
//! * [`clifford`]: gamma matrices, boundary Clifford multiplication, the
//!   boundary symbol `M(ξ) = i Σ ξ_j γ_j` and the chirality projectors.
//! * [`specfun`]: Gamma ratios, digamma, Gauss `₂F₁` and Kummer `M`, `V`.
//! * [`flat`]: the flat operator as an FFT multiplier on a periodic box,
//!   the explicit bubble spinor and its Euler–Lagrange residual.
//! * [`sphere`]: Gamma-ratio multipliers on the round sphere, the
//!   hypergeometric radial profiles and the spectral Q operator.
//! * [`extension`]: per-Fourier-mode extension ODEs, Dirichlet-to-Neumann
//!   extraction, weighted energies.
//! * [`yamabe`]: the fractional spinorial Yamabe quotient and its minimizer.

pub mod clifford;
pub mod error;
pub mod extension;
pub mod flat;
pub mod specfun;
pub mod sphere;
pub mod yamabe;

mod ode;

pub use error::{Error, Result};

/// Branch of the boundary symbol: eigenvalue `s|ξ|` of `M(ξ)` or `s μ_k` of
/// `ν·D` on the sphere.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn from_value(s: f64) -> Result<Sign> {
        if s == 1.0 {
            Ok(Sign::Plus)
        } else if s == -1.0 {
            Ok(Sign::Minus)
        } else {
            Err(Error::Parameter(format!("branch sign must be +1 or -1, got {s}")))
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Sign::Plus => '+',
            Sign::Minus => '-',
        }
    }

    pub fn both() -> [Sign; 2] {
        [Sign::Plus, Sign::Minus]
    }
}
