use fracdirac::clifford::{numeric_rank, op_norm, CMatrix, CliffordRep, MAX_DIM};
use num_complex::Complex64;
use proptest::prelude::*;

fn id(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

#[test]
fn generators_anticommute() {
    for n in 1..=MAX_DIM {
        let rep = CliffordRep::new(n).unwrap();
        let dim = rep.spinor_dim();
        for (i, a) in rep.gammas().iter().enumerate() {
            for (j, b) in rep.gammas().iter().enumerate() {
                let expect = if i == j { id(dim) * Complex64::new(-2.0, 0.0) } else { CMatrix::zeros(dim, dim) };
                assert!(op_norm(&(a * b + b * a - expect)) <= 1e-13, "n={n} i={i} j={j}");
            }
        }
    }
}

#[test]
fn generators_are_skew_hermitian() {
    for n in 1..=MAX_DIM {
        let rep = CliffordRep::new(n).unwrap();
        for g in rep.gammas() {
            assert!(op_norm(&(g.adjoint() + g)) <= 1e-13);
        }
    }
}

#[test]
fn boundary_multiplication_generates_a_clifford_algebra() {
    for n in 1..=MAX_DIM {
        let rep = CliffordRep::new(n).unwrap();
        let dim = rep.spinor_dim();
        for i in 1..=n {
            for j in 1..=n {
                let a = rep.boundary_mult(i).unwrap();
                let b = rep.boundary_mult(j).unwrap();
                let expect = if i == j { id(dim) * Complex64::new(-2.0, 0.0) } else { CMatrix::zeros(dim, dim) };
                assert!(op_norm(&(&a * &b + &b * &a - expect)) <= 1e-13);
            }
        }
    }
}

#[test]
fn projectors_are_complementary_idempotents() {
    for n in 1..=MAX_DIM {
        let rep = CliffordRep::new(n).unwrap();
        let dim = rep.spinor_dim();
        let (pp, pm) = rep.projectors_pm();
        assert!(op_norm(&(&pp * &pp - &pp)) <= 1e-13);
        assert!(op_norm(&(&pm * &pm - &pm)) <= 1e-13);
        assert!(op_norm(&(&pp * &pm)) <= 1e-13);
        assert!(op_norm(&(&pp + &pm - id(dim))) <= 1e-13);
        assert_eq!(numeric_rank(&pp, 1e-12), dim / 2);
    }
}

#[test]
fn normal_acts_by_minus_i_and_plus_i() {
    let rep = CliffordRep::new(3).unwrap();
    let (pp, pm) = rep.projectors_pm();
    let i = Complex64::new(0.0, 1.0);
    assert!(op_norm(&(rep.normal() * &pp + &pp * i)) <= 1e-13);
    assert!(op_norm(&(rep.normal() * &pm - &pm * i)) <= 1e-13);
}

fn xi_strategy(n: usize) -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(-5.0f64..5.0, n)
}

proptest! {
    #[test]
    fn symbol_squares_to_frequency_norm(n in 1usize..=MAX_DIM, seed in xi_strategy(MAX_DIM)) {
        let rep = CliffordRep::new(n).unwrap();
        let xi = &seed[..n];
        let m = rep.nu_dirac_symbol(xi).unwrap();
        let r2: f64 = xi.iter().map(|x| x * x).sum();
        let dim = rep.spinor_dim();
        prop_assert!(op_norm(&(&m * &m - id(dim) * Complex64::new(r2, 0.0))) <= 1e-13 * r2.max(1.0));
        prop_assert!(op_norm(&(m.adjoint() - &m)) <= 1e-13 * r2.sqrt().max(1.0));
    }

    #[test]
    fn symbol_swaps_the_chiral_halves(n in 1usize..=MAX_DIM, seed in xi_strategy(MAX_DIM)) {
        let rep = CliffordRep::new(n).unwrap();
        let m = rep.nu_dirac_symbol(&seed[..n]).unwrap();
        let (pp, pm) = rep.projectors_pm();
        let scale = op_norm(&m).max(1.0);
        prop_assert!(op_norm(&(&pp * &m - &m * &pm)) <= 1e-13 * scale);
        prop_assert!(op_norm(&(&pm * &m - &m * &pp)) <= 1e-13 * scale);
    }

    #[test]
    fn symbol_eigenvalues_are_plus_minus_norm(n in 1usize..=4, seed in xi_strategy(4)) {
        let rep = CliffordRep::new(n).unwrap();
        let xi = &seed[..n];
        let r = xi.iter().map(|x| x * x).sum::<f64>().sqrt();
        let m = rep.nu_dirac_symbol(xi).unwrap();
        let eig = m.symmetric_eigenvalues();
        let plus = eig.iter().filter(|&&e| (e - r).abs() < 1e-10).count();
        let minus = eig.iter().filter(|&&e| (e + r).abs() < 1e-10).count();
        prop_assume!(r > 1e-6);
        prop_assert_eq!(plus, rep.spinor_dim() / 2);
        prop_assert_eq!(minus, rep.spinor_dim() / 2);
    }
}
