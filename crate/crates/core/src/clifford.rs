//! Complex matrix representations of the Clifford algebra `Cl(n+1)`.
//!
//! Generators are built from Pauli strings (Jordan–Wigner ordering): for
//! `p = 0, 1, ...` the Hermitian pair `Z^{⊗p} ⊗ X ⊗ I…` and `Z^{⊗p} ⊗ Y ⊗ I…`.
//! The first `n+1` of them, multiplied by `i`, give skew-Hermitian `γ_j` with
//! `γ_iγ_j + γ_jγ_i = −2δ_ij`. The last one, `γ_{n+1}`, plays the role of
//! Clifford multiplication by the normal `ν`.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;

pub const MAX_DIM: usize = 8;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone)]
pub struct CliffordRep {
    n: usize,
    dim: usize,
    gammas: Vec<CMatrix>,
}

fn pauli(which: char) -> CMatrix {
    let m = match which {
        'I' => [ONE, ZERO, ZERO, ONE],
        'X' => [ZERO, ONE, ONE, ZERO],
        'Y' => [ZERO, -I, I, ZERO],
        'Z' => [ONE, ZERO, ZERO, -ONE],
        _ => unreachable!(),
    };
    DMatrix::from_row_slice(2, 2, &m)
}

fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    DMatrix::from_fn(ar * br, ac * bc, |i, j| a[(i / br, j / bc)] * b[(i % br, j % bc)])
}

fn pauli_string(word: &[char]) -> CMatrix {
    word.iter()
        .skip(1)
        .fold(pauli(word[0]), |acc, &c| kron(&acc, &pauli(c)))
}

impl CliffordRep {
    /// Representation for boundary dimension `n`, `1 ≤ n ≤ 8`.
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 || n > MAX_DIM {
            return Err(Error::Size {
                what: "boundary dimension n",
                value: n,
                range: "1..=8",
            });
        }
        let generators = n + 1;
        let qubits = generators.div_ceil(2);
        let mut gammas = Vec::with_capacity(generators);
        'outer: for p in 0..qubits {
            for middle in ['X', 'Y'] {
                if gammas.len() == generators {
                    break 'outer;
                }
                let word: Vec<char> = (0..qubits)
                    .map(|q| match q.cmp(&p) {
                        std::cmp::Ordering::Less => 'Z',
                        std::cmp::Ordering::Equal => middle,
                        std::cmp::Ordering::Greater => 'I',
                    })
                    .collect();
                gammas.push(pauli_string(&word) * I);
            }
        }
        Ok(Self {
            n,
            dim: 1 << qubits,
            gammas,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Complex dimension `N = 2^⌈(n+1)/2⌉` of the spinor space.
    pub fn spinor_dim(&self) -> usize {
        self.dim
    }

    /// All generators `γ_1 … γ_{n+1}` (zero-based in the slice).
    pub fn gammas(&self) -> &[CMatrix] {
        &self.gammas
    }

    /// `γ_j` for `1 ≤ j ≤ n+1`.
    pub fn gamma(&self, j: usize) -> Result<&CMatrix> {
        if j == 0 || j > self.n + 1 {
            return Err(Error::Index {
                what: "generator",
                index: j,
                max: self.n + 1,
            });
        }
        Ok(&self.gammas[j - 1])
    }

    /// Index of the normal generator, `n + 1`.
    pub fn nu_index(&self) -> usize {
        self.n + 1
    }

    /// Normal Clifford multiplication `ν· = γ_{n+1}`.
    pub fn normal(&self) -> &CMatrix {
        &self.gammas[self.n]
    }

    /// Boundary Clifford multiplication `ē_j = γ_j γ_{n+1}`, `1 ≤ j ≤ n`.
    pub fn boundary_mult(&self, j: usize) -> Result<CMatrix> {
        if j == 0 || j > self.n {
            return Err(Error::Index {
                what: "boundary direction",
                index: j,
                max: self.n,
            });
        }
        Ok(&self.gammas[j - 1] * self.normal())
    }

    /// Hermitian symbol `M(ξ) = i Σ_j ξ_j γ_j` of the boundary operator `ν·D`.
    pub fn nu_dirac_symbol(&self, xi: &[f64]) -> Result<CMatrix> {
        self.check_xi(xi)?;
        let mut m = CMatrix::zeros(self.dim, self.dim);
        for (g, &x) in self.gammas.iter().zip(xi) {
            m += g * Complex64::new(0.0, x);
        }
        Ok(m)
    }

    /// Projectors `P± = (I ± iγ_{n+1})/2` onto `ker(ν· ± i)`.
    pub fn projectors_pm(&self) -> (CMatrix, CMatrix) {
        let id = CMatrix::identity(self.dim, self.dim);
        let inu = self.normal() * I;
        let half = Complex64::new(0.5, 0.0);
        ((&id + &inu) * half, (&id - &inu) * half)
    }

    pub(crate) fn check_xi(&self, xi: &[f64]) -> Result<()> {
        if xi.len() != self.n {
            return Err(Error::Shape(format!(
                "frequency vector has length {}, expected {}",
                xi.len(),
                self.n
            )));
        }
        if xi.iter().any(|x| !x.is_finite()) {
            return Err(Error::Shape("non-finite frequency".into()));
        }
        Ok(())
    }
}

/// Spectral (largest singular value) norm.
pub fn op_norm(m: &CMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone().singular_values().max()
}

/// Numerical rank with relative threshold `tol`.
pub fn numeric_rank(m: &CMatrix, tol: f64) -> usize {
    let sv = m.clone().singular_values();
    let top = sv.max();
    sv.iter().filter(|&&s| s > tol * top.max(f64::MIN_POSITIVE)).count()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn id(n: usize) -> CMatrix {
        CMatrix::identity(n, n)
    }

    #[test]
    fn smallest_case() {
        let rep = CliffordRep::new(1).unwrap();
        assert_eq!(rep.spinor_dim(), 2);
        assert_eq!(rep.gammas().len(), 2);
        for g in rep.gammas() {
            assert!(op_norm(&(g * g + id(2))) < 1e-15);
        }
    }

    #[test]
    fn dimensions() {
        let expected = [2, 4, 4, 8, 8, 16, 16, 32];
        for n in 1..=8 {
            let rep = CliffordRep::new(n).unwrap();
            assert_eq!(rep.spinor_dim(), expected[n - 1], "n = {n}");
            assert_eq!(rep.nu_index(), n + 1);
        }
    }

    #[test]
    fn out_of_range_dimension() {
        assert!(matches!(CliffordRep::new(0), Err(Error::Size { .. })));
        assert!(matches!(CliffordRep::new(9), Err(Error::Size { .. })));
    }

    #[test]
    fn boundary_mult_index_checked() {
        let rep = CliffordRep::new(2).unwrap();
        assert!(matches!(rep.boundary_mult(0), Err(Error::Index { .. })));
        assert!(matches!(rep.boundary_mult(3), Err(Error::Index { .. })));
        assert!(rep.gamma(3).is_ok());
        assert!(rep.gamma(4).is_err());
    }

    #[test]
    fn boundary_mult_squares_to_minus_one() {
        let rep = CliffordRep::new(2).unwrap();
        let e1 = rep.boundary_mult(1).unwrap();
        assert!(op_norm(&(&e1 * &e1 + id(4))) < 1e-14);
    }

    #[test]
    fn boundary_mult_anticommutes_with_normal() {
        let rep = CliffordRep::new(2).unwrap();
        for j in 1..=2 {
            let e = rep.boundary_mult(j).unwrap();
            let nu = rep.normal();
            assert!(op_norm(&(nu * &e + &e * nu)) < 1e-14);
        }
    }

    #[test]
    fn symbol_at_zero() {
        let rep = CliffordRep::new(3).unwrap();
        let m = rep.nu_dirac_symbol(&[0.0; 3]).unwrap();
        assert_eq!(op_norm(&m), 0.0);
    }

    #[test]
    fn symbol_shape_checked() {
        let rep = CliffordRep::new(3).unwrap();
        assert!(matches!(rep.nu_dirac_symbol(&[1.0, 2.0]), Err(Error::Shape(_))));
        assert!(rep.nu_dirac_symbol(&[1.0, f64::NAN, 0.0]).is_err());
    }

    #[test]
    fn projector_ranks() {
        for n in 1..=8 {
            let rep = CliffordRep::new(n).unwrap();
            let (pp, pm) = rep.projectors_pm();
            let half = rep.spinor_dim() / 2;
            assert_eq!(numeric_rank(&pp, 1e-12), half);
            assert_eq!(numeric_rank(&pm, 1e-12), half);
        }
    }

    #[test]
    fn normal_on_plus_projector() {
        let rep = CliffordRep::new(4).unwrap();
        let (pp, _) = rep.projectors_pm();
        let lhs = rep.normal() * &pp;
        assert!(op_norm(&(lhs + &pp * I)) < 1e-14);
    }
}
