use fracdirac::flat::sphere_first_eigenvalue;
use fracdirac::specfun::is_gamma_pole;
use fracdirac::sphere::*;
use fracdirac::{Error, Sign};
use num_complex::Complex64;
use proptest::prelude::*;

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

#[test]
fn pinned_multipliers() {
    // Γ(100.8)/Γ(100.2): n = 2, k = 100, λ = 0.3.
    let m = mu(2, 100).unwrap();
    assert!(rel(gamma_multiplier(0.3, m).unwrap(), 15.848957282547216362) <= 1e-11);
    // Q multiplier on φ̂_{1,+} for n = 3.
    assert!(rel(q_multiplier(3, 1.5, Sign::Plus).unwrap(), 1.6131625975803380479) < 1e-13);
}

#[test]
fn ladder_values() {
    assert_eq!(mu(3, 1).unwrap(), 1.5);
    assert_eq!(mu(4, 7).unwrap(), 8.0);
    assert!(mu(3, 0).is_err());
    assert!(mu(0, 1).is_err());
}

#[test]
fn half_order_recovers_the_dirac_spectrum() {
    for n in 1..=6 {
        for k in 1..=30 {
            let m = mu(n, k).unwrap();
            assert!(rel(sphere_multiplier(0.5, m, Sign::Plus).unwrap(), m) < 1e-13);
            assert!(rel(sphere_multiplier(0.5, m, Sign::Minus).unwrap(), -m) < 1e-13);
        }
    }
}

#[test]
fn first_eigenvalue_sits_on_the_lowest_mode() {
    for n in 2..=5 {
        for lambda in [0.1, 0.3, 0.45, 0.8] {
            if lambda >= n as f64 / 2.0 {
                continue;
            }
            let (v, k) = first_eigenvalue(n, 20, lambda).unwrap();
            assert_eq!(k, 1, "n={n} lambda={lambda}");
            assert_eq!(v, sphere_first_eigenvalue(n, lambda).unwrap());
        }
    }
}

#[test]
fn order_recursion_on_the_test_grid() {
    let mut checked = 0;
    let mut poles = 0;
    for i in 1..=14 {
        let lambda = i as f64 / 10.0;
        if i == 5 {
            continue;
        }
        for n in 2..=4 {
            for k in 1..=40 {
                let m = mu(n, k).unwrap();
                let gap = recursion_gap(lambda, m);
                if is_gamma_pole(m - lambda - 0.5) {
                    // F(λ+1, μ) vanishes identically there; the relative gap is undefined.
                    assert!(gap.is_err(), "lambda={lambda} mu={m}");
                    poles += 1;
                } else {
                    let gap = gap.unwrap();
                    assert!(gap <= 1e-11, "lambda={lambda} n={n} k={k} gap={gap:e}");
                    checked += 1;
                }
            }
        }
    }
    assert!(poles > 0 && checked > 1500);
}

#[test]
fn q_operator_matches_the_order_derivative() {
    for n in 2..=5 {
        for k in 1..=20 {
            let m = mu(n, k).unwrap();
            for s in Sign::both() {
                let q = q_multiplier(n, m, s).unwrap();
                let fd = q_multiplier_fd(n, m, s, 1e-5).unwrap();
                assert!(rel(fd, q) <= 1e-6, "n={n} k={k}");
            }
        }
    }
}

proptest! {
    #[test]
    fn multiplier_is_odd_in_the_branch(lambda in 0.01f64..3.0, k in 1usize..200, n in 1usize..9) {
        let m = mu(n, k).unwrap();
        prop_assume!(!is_gamma_pole(m + 0.5 - lambda));
        let p = sphere_multiplier(lambda, m, Sign::Plus).unwrap();
        let q = sphere_multiplier(lambda, m, Sign::Minus).unwrap();
        prop_assert_eq!(p, -q);
    }

    #[test]
    fn diagonal_operators_commute(lambda in 0.05f64..1.5, sigma in 0.05f64..1.5, seed in proptest::collection::vec(-1.0f64..1.0, 40)) {
        let coeffs: Vec<[Complex64; 2]> = seed
            .chunks(4)
            .map(|c| [Complex64::new(c[0], c[1]), Complex64::new(c[2], c[3])])
            .collect();
        let spec = SphereSpectrum::from_coeffs(3, coeffs).unwrap();
        let ab = apply_fractional_dirac_sphere(&apply_fractional_dirac_sphere(&spec, lambda).unwrap(), sigma).unwrap();
        let ba = apply_fractional_dirac_sphere(&apply_fractional_dirac_sphere(&spec, sigma).unwrap(), lambda).unwrap();
        prop_assert!(ab.max_abs_diff(&ba).unwrap() <= 1e-12 * ab.max_abs().max(1.0));
        let qa = q_operator_sphere(&apply_fractional_dirac_sphere(&spec, lambda).unwrap()).unwrap();
        let aq = apply_fractional_dirac_sphere(&q_operator_sphere(&spec).unwrap(), lambda).unwrap();
        prop_assert!(qa.max_abs_diff(&aq).unwrap() <= 1e-12 * qa.max_abs().max(1.0));
    }

    #[test]
    fn q_operator_is_linear(a in -3.0f64..3.0, b in -3.0f64..3.0, k in 1usize..15) {
        let x = SphereSpectrum::delta(4, 15, k, Sign::Plus).unwrap();
        let y = SphereSpectrum::delta(4, 15, 16 - k, Sign::Minus).unwrap();
        let (ca, cb) = (Complex64::new(a, 0.0), Complex64::new(0.0, b));
        let lhs = q_operator_sphere(&x.linear_combination(ca, &y, cb).unwrap()).unwrap();
        let rhs = q_operator_sphere(&x)
            .unwrap()
            .linear_combination(ca, &q_operator_sphere(&y).unwrap(), cb)
            .unwrap();
        prop_assert!(lhs.max_abs_diff(&rhs).unwrap() <= 1e-12 * lhs.max_abs().max(1.0));
    }
}

#[test]
fn delta_is_an_eigenvector() {
    let d = SphereSpectrum::delta(3, 10, 4, Sign::Minus).unwrap();
    let out = apply_fractional_dirac_sphere(&d, 0.3).unwrap();
    let expect = sphere_multiplier(0.3, mu(3, 4).unwrap(), Sign::Minus).unwrap();
    assert_eq!(out.get(4, Sign::Minus).unwrap(), Complex64::new(expect, 0.0));
    assert_eq!(out.max_abs(), expect.abs());
    assert!(SphereSpectrum::delta(3, 10, 11, Sign::Plus).is_err());
}

#[test]
fn spectrum_csv_roundtrip() {
    let mut spec = SphereSpectrum::zeros(2, 6).unwrap();
    spec.set(2, Sign::Plus, Complex64::new(0.1, -3.5e-7)).unwrap();
    spec.set(6, Sign::Minus, Complex64::new(-1.0 / 3.0, 2.0)).unwrap();
    let mut buf = Vec::new();
    spec.write_csv(&mut buf).unwrap();
    let back = SphereSpectrum::read_csv(2, buf.as_slice()).unwrap();
    assert_eq!(back, spec);
}

#[test]
fn profiles_solve_the_mode_equation() {
    for n in [2, 3] {
        for lambda in [0.1, 0.25, 0.4] {
            for k in 1..=5 {
                for kind in [RadialKind::F, RadialKind::G] {
                    for y in [0.3, 1.0, 2.5] {
                        let r = radial_ode_residual(n, k, lambda, kind, y, 1e-3).unwrap();
                        assert!(r <= 1e-6, "n={n} lambda={lambda} k={k} {kind:?} y={y}: {r:e}");
                    }
                }
            }
        }
    }
}

#[test]
fn profiles_start_as_powers_of_the_radius() {
    let y = 1e-4;
    for k in 1..=5 {
        let f = profile_value(3, k, 0.3, RadialKind::F, y).unwrap();
        let g = profile_value(3, k, 0.3, RadialKind::G, y).unwrap();
        assert!(rel(f, (y / 2.0).powi(k as i32 - 1)) < 1e-6, "k={k}");
        assert!(rel(g, (y / 2.0).powi(k as i32)) < 1e-6, "k={k}");
    }
    let p = radial_profile(2, 2, 0.2, RadialKind::F, &[0.5, 1.0]).unwrap();
    assert_eq!(p.values.len(), 2);
    assert!(profile_value(2, 1, 0.2, RadialKind::F, 0.0).is_err());
}

#[test]
fn boundary_fit_recovers_both_branches() {
    for n in [2, 3] {
        for lambda in [0.1, 0.25, 0.3, 0.4] {
            for k in 1..=5 {
                for kind in [RadialKind::F, RadialKind::G] {
                    let fit = scattering_fit(n, k, lambda, kind, FitWindow::default()).unwrap();
                    let exact = sphere_multiplier(lambda, mu(n, k).unwrap(), kind.sign()).unwrap();
                    assert!(rel(fit.multiplier, exact) <= 1e-6, "n={n} lambda={lambda} k={k} {kind:?}");
                }
            }
        }
    }
    assert!(rel(
        scattering_from_profile(3, 2, 0.3).unwrap(),
        sphere_multiplier(0.3, 2.5, Sign::Plus).unwrap()
    ) < 1e-6);
}

#[test]
fn degenerate_windows_are_rejected() {
    let narrow = FitWindow {
        r_min: 1e-3,
        r_max: 1.0001e-3,
        points: 64,
        order: 4,
    };
    assert!(matches!(
        scattering_fit(3, 1, 0.3, RadialKind::F, narrow),
        Err(Error::Conditioning(_))
    ));
    let sparse = FitWindow {
        points: 6,
        ..FitWindow::default()
    };
    assert!(matches!(
        scattering_fit(3, 1, 0.3, RadialKind::F, sparse),
        Err(Error::Conditioning(_))
    ));
    assert!(matches!(
        scattering_fit(3, 1, 0.7, RadialKind::F, FitWindow::default()),
        Err(Error::Parameter(_))
    ));
}
