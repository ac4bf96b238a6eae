use std::sync::Arc;

use fracdirac::clifford::CliffordRep;
use fracdirac::flat::{bubble, default_bubble_spinor, SpinorField, TorusGrid};
use fracdirac::yamabe::*;
use fracdirac::Error;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn setup(n: usize, l: f64, m: usize) -> (TorusGrid, Arc<CliffordRep>) {
    (TorusGrid::new(n, l, m).unwrap(), Arc::new(CliffordRep::new(n).unwrap()))
}

fn random_field(n: usize, l: f64, m: usize, rng: &mut ChaCha8Rng) -> SpinorField {
    let (g, rep) = setup(n, l, m);
    let len = g.points() * rep.spinor_dim();
    let values = (0..len)
        .map(|_| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
        .collect();
    SpinorField::from_values(g, rep, values).unwrap()
}

const PAIRINGS: [Pairing; 2] = [Pairing::Absolute, Pairing::Signed];

#[test]
fn quotient_is_scale_invariant() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let f = random_field(2, 10.0, 16, &mut rng);
    for pairing in PAIRINGS {
        let j = functional(&f, 0.3, pairing).unwrap();
        for c in [Complex64::new(3.7, 0.0), Complex64::new(-0.02, 0.5), Complex64::new(0.0, 1e3)] {
            let js = functional(&f.scaled(c), 0.3, pairing).unwrap();
            assert!((js / j - 1.0).abs() <= 1e-12, "{pairing:?} {c}");
        }
    }
}

#[test]
fn opposite_eigenmodes_have_equal_quotients() {
    let (g, rep) = setup(2, 8.0, 16);
    let bins = [2, 13];
    let xi: Vec<f64> = bins.iter().map(|&b| g.frequency(b)).collect();
    let r = xi.iter().map(|x| x * x).sum::<f64>().sqrt();
    // Eigenvectors of the geometric symbol −γ₃M(ξ), whose square is |ξ|².
    let sym = rep.nu_dirac_symbol(&xi).unwrap();
    let geo = -(rep.gamma(3).unwrap() * sym);
    let eig = |sign: f64| -> Vec<Complex64> {
        (0..4)
            .map(|i| if i == 1 { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) } + geo[(i, 1)] * sign / r)
            .collect()
    };
    let plus = SpinorField::plane_wave(g, rep.clone(), &bins, &eig(1.0)).unwrap();
    let minus = SpinorField::plane_wave(g, rep, &bins, &eig(-1.0)).unwrap();
    for pairing in PAIRINGS {
        let a = quotient_parts(&plus, 0.3, pairing).unwrap();
        let b = quotient_parts(&minus, 0.3, pairing).unwrap();
        assert!((a.value / b.value - 1.0).abs() < 1e-12, "{pairing:?}");
        if pairing == Pairing::Signed {
            assert!(a.pairing > 0.0 && b.pairing < 0.0);
        }
    }
}

#[test]
fn gradient_matches_central_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let phi = random_field(2, 6.0, 8, &mut rng).without_mean();
    let dx = phi.grid().cell_volume();
    for pairing in PAIRINGS {
        let (_, g) = gradient(&phi, 0.3, pairing).unwrap();
        for _ in 0..20 {
            let h = random_field(2, 6.0, 8, &mut rng).without_mean();
            let exact = g.dot(&h).unwrap().re * dx;
            let eps = 1e-5;
            let up = functional(&phi.combine(Complex64::new(1.0, 0.0), &h, Complex64::new(eps, 0.0)).unwrap(), 0.3, pairing);
            let down = functional(&phi.combine(Complex64::new(1.0, 0.0), &h, Complex64::new(-eps, 0.0)).unwrap(), 0.3, pairing);
            let fd = (up.unwrap() - down.unwrap()) / (2.0 * eps);
            let scale = g.norm() * h.norm() * dx;
            assert!((fd - exact).abs() <= 1e-5 * scale, "{pairing:?}: fd {fd} vs {exact}");
        }
    }
}

#[test]
fn quotient_is_positive_on_random_fields() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..1000 {
        let f = random_field(2, 4.0, 8, &mut rng);
        assert!(functional(&f, 0.3, Pairing::Absolute).unwrap() > 0.0);
    }
}

#[test]
fn constant_field_is_degenerate() {
    let (g, rep) = setup(2, 4.0, 8);
    let f = SpinorField::from_fn(g, rep, |_| vec![Complex64::new(1.0, 0.0); 4]).unwrap();
    assert!(matches!(functional(&f, 0.3, Pairing::Absolute), Err(Error::Degenerate(_))));
    assert!(functional(&f, 1.2, Pairing::Absolute).is_err());
}

#[test]
fn descent_is_monotone_and_reproducible() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let start = random_field(2, 8.0, 16, &mut rng);
    let opts = MinimizeOptions {
        max_iters: 40,
        ..MinimizeOptions::default()
    };
    let a = minimize(&start, 0.3, opts).unwrap();
    assert!(a.j_trace.windows(2).all(|w| w[1] <= w[0]));
    assert!(a.value < a.j_trace[0]);
    assert_eq!(a.j_trace.len(), a.iterations + 1);
    let b = minimize(&start, 0.3, opts).unwrap();
    assert_eq!(a.j_trace, b.j_trace);
}

#[test]
fn random_starts_settle_near_each_other() {
    let opts = MinimizeOptions {
        max_iters: 150,
        ..MinimizeOptions::default()
    };
    let finals: Vec<f64> = [11, 12]
        .into_iter()
        .map(|seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            minimize(&random_field(2, 8.0, 8, &mut rng), 0.3, opts).unwrap().value
        })
        .collect();
    assert!((finals[0] / finals[1] - 1.0).abs() < 0.05, "{finals:?}");
}

#[test]
fn euler_lagrange_controls() {
    let (g, rep) = setup(2, 20.0, 64);
    let lambda = 0.3;
    let phi = bubble(g, rep, lambda, &default_bubble_spinor(4)).unwrap();
    let state = state_at(&phi, lambda, Pairing::Signed).unwrap();
    assert!((el_residual_with_mu(&state, 0.0).unwrap() - 1.0).abs() < 1e-14);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let noise = state_at(&random_field(2, 20.0, 64, &mut rng).without_mean(), lambda, Pairing::Signed).unwrap();
    assert!(el_residual(&noise).unwrap() > 0.3);
    assert!(el_residual(&state).unwrap() < el_residual(&noise).unwrap());
}

#[test]
fn multiplier_on_an_exact_eigenmode() {
    // A constant-modulus eigenmode of the signed symbol solves the equation exactly,
    // with μ fixed by |ξ|^{2λ} and the modulus of ψ.
    let (g, rep) = setup(1, 1.0, 16);
    let bins = [3];
    let xi = g.frequency(3);
    let sym = rep.nu_dirac_symbol(&[xi]).unwrap();
    let geo = -(rep.gamma(2).unwrap() * sym);
    let u: Vec<Complex64> = (0..2)
        .map(|i| if i == 0 { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) } + geo[(i, 0)] / xi.abs())
        .collect();
    let norm = u.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let u: Vec<Complex64> = u.iter().map(|z| z / norm).collect();
    let phi = SpinorField::plane_wave(g, rep, &bins, &u).unwrap();
    let (psi, mu) = euler_lagrange_data(&phi, 0.2).unwrap();
    let state = state_at(&phi, 0.2, Pairing::Signed).unwrap();
    assert!(el_residual(&state).unwrap() < 1e-12);
    let modulus = psi.pointwise_norms()[0];
    let expect = xi.abs().powf(0.4) * modulus.powf(-4.0 * 0.2 / (1.0 - 0.4));
    assert!((mu / expect - 1.0).abs() < 1e-12);
}
