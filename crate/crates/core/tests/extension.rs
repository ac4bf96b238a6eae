use fracdirac::extension::*;
use fracdirac::specfun::{c_lambda, d_lambda};
use fracdirac::{Error, Sign};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

fn problems(ns: &[usize], lambdas: &[f64]) -> Vec<ModeProblem> {
    let mut v = Vec::new();
    for &n in ns {
        for &l in lambdas {
            for xi in [0.5, 1.0, 2.0] {
                for s in Sign::both() {
                    v.push(ModeProblem::new(n, l, xi, s).unwrap());
                }
            }
        }
    }
    v
}

#[test]
fn boundary_limit_reproduces_the_multiplier() {
    for (lambdas, tol) in [(&[0.1, 0.3][..], 1e-4), (&[0.7][..], 1e-3)] {
        let ps = problems(&[1, 2, 3], lambdas);
        let errs: Vec<f64> = ps
            .par_iter()
            .map(|p| rel(dtn_extract(&solve_mode_ode(p).unwrap()).unwrap(), p.multiplier()))
            .collect();
        for (p, e) in ps.iter().zip(errs) {
            assert!(e <= tol, "{p:?}: {e:e}");
        }
    }
}

#[test]
fn negative_branch_pin() {
    // −2^{0.6}: λ = 0.3, |ξ| = 2 on the negative branch.
    let p = ModeProblem::new(2, 0.3, 2.0, Sign::Minus).unwrap();
    let pin = -1.5157165665103980823;
    assert!(rel(p.multiplier(), pin) < 1e-15);
    let sol = solve_mode_ode(&p).unwrap();
    assert!(rel(dtn_extract(&sol).unwrap(), pin) <= 1e-4);
    assert!(rel(dtn_extract(&closed_form_mode(&p).unwrap()).unwrap(), pin) <= 1e-4);
}

#[test]
fn integrated_profile_matches_the_closed_form() {
    let ps = problems(&[2], &[0.1, 0.3, 0.7]);
    ps.par_iter().for_each(|p| {
        let ode = solve_mode_ode(p).unwrap();
        let exact = closed_form_mode(p).unwrap();
        assert_eq!(ode.t, exact.t);
        for ((t, a), b) in ode.t.iter().zip(&ode.profile).zip(&exact.profile) {
            if (0.01..=5.0).contains(t) {
                assert!(rel(*a, *b) <= 1e-7, "{p:?} t={t}");
            }
        }
    });
}

#[test]
fn secondary_coefficient_fixes_the_multiplier() {
    // Ψ̂ = 1 + c₂t^{2λ} + … with −d_λ c₂ = s|ξ|^{2λ}.
    for s in Sign::both() {
        let p = ModeProblem::new(3, 0.25, 1.5, s).unwrap();
        let sol = closed_form_mode(&p).unwrap();
        let c2 = sol.diagnostics.secondary_coefficient;
        assert!(rel(-d_lambda(0.25).unwrap() * c2, p.multiplier()) < 1e-10);
    }
}

#[test]
fn scattering_constants_are_related() {
    // c_λ/d_λ = Γ(λ)Γ(1/2−λ)/(Γ(−λ)Γ(1/2+λ)), negative on (0, 1/2).
    for lambda in [0.1, 0.25, 0.3, 0.45] {
        let ratio = c_lambda(lambda).unwrap() / d_lambda(lambda).unwrap();
        let direct = fracdirac::specfun::gamma(lambda).unwrap() * fracdirac::specfun::gamma(0.5 - lambda).unwrap()
            / (fracdirac::specfun::gamma(-lambda).unwrap() * fracdirac::specfun::gamma(0.5 + lambda).unwrap());
        assert!(rel(ratio, direct) < 1e-13);
        assert!(ratio < 0.0);
    }
    assert!(matches!(c_lambda(2.0), Err(Error::Pole { .. })));
}

#[test]
fn higher_derivative_formula_agrees() {
    for lambda in [0.2, 0.3, 0.7, 0.8] {
        for s in Sign::both() {
            let p = ModeProblem::new(2, lambda, 1.0, s).unwrap();
            let sol = closed_form_mode(&p).unwrap();
            let alt = higher_derivative_dtn(&sol).unwrap();
            assert!(rel(alt, p.multiplier()) <= 1e-3, "lambda={lambda} s={s:?}: {alt}");
        }
    }
}

#[test]
fn batch_solver_preserves_order() {
    let ps = problems(&[1], &[0.3]);
    let sols = solve_modes(&ps);
    for (p, sol) in ps.iter().zip(sols) {
        assert_eq!(sol.unwrap().problem, *p);
    }
}

#[test]
fn energy_identity_and_refinement() {
    let ps = problems(&[2], &[0.1, 0.3, 0.4]);
    ps.par_iter().for_each(|p| {
        let (lhs, rhs) = mode_energy(&solve_mode_ode(p).unwrap()).unwrap();
        assert!(rel(lhs, rhs) <= 1e-3, "{p:?}");
    });
    for lambda in [0.1, 0.3, 0.4] {
        let p = ModeProblem::new(2, lambda, 1.0, Sign::Plus).unwrap();
        let c = energy_convergence(&p, &[512, 1024, 2048, 4096]).unwrap();
        assert!(c.orders.iter().all(|&o| o >= 1.0), "{c:?}");
        assert!(c.relative_gaps.windows(2).all(|w| w[1] < w[0]));
    }
    let wide = ModeProblem::new(2, 0.7, 1.0, Sign::Plus).unwrap();
    assert!(mode_energy(&solve_mode_ode(&wide).unwrap()).is_err());
}

#[test]
fn zero_trace_perturbations_raise_the_energy() {
    let ps = problems(&[2], &[0.1, 0.3, 0.4]);
    let sols: Vec<ModeSolution> = ps.par_iter().map(|p| solve_mode_ode(p).unwrap()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let mut uniform = || rng.gen::<f64>();
    for i in 0..100 {
        let sol = &sols[i % sols.len()];
        let p = &sol.problem;
        let count = 1 + (uniform() * 3.0) as usize;
        let shapes: Vec<PerturbationShape> = (0..count).map(|_| PerturbationShape::draw(&mut uniform)).collect();
        let eta = Perturbation::from_shapes(&sol.t, p.xi, &shapes);
        let rhs = 2.0 * p.lambda / d_lambda(p.lambda).unwrap() * p.multiplier();
        let gap = sobolev_gap(sol, &eta).unwrap() / rhs.abs();
        assert!(gap >= -1e-3, "sample {i}: {gap:e}");
    }
}

#[test]
fn gap_grows_quadratically_from_zero() {
    let p = ModeProblem::new(2, 0.3, 1.0, Sign::Plus).unwrap();
    let sol = solve_mode_ode(&p).unwrap();
    let rhs = 2.0 * p.lambda / d_lambda(p.lambda).unwrap() * p.multiplier();
    let base = sobolev_gap(&sol, &Perturbation::zero(sol.t.len())).unwrap();
    assert!((base / rhs).abs() <= 1e-3);
    let eta = Perturbation::bump(&sol.t, 1.0, 0.6, 0.8);
    let g1 = sobolev_gap(&sol, &eta.scaled(0.1)).unwrap() - base;
    let g2 = sobolev_gap(&sol, &eta.scaled(0.2)).unwrap() - base;
    assert!(g1 > 0.0);
    assert!(((g2 / g1).log2() - 2.0).abs() < 0.1);
}

#[test]
fn nonzero_trace_is_rejected() {
    let p = ModeProblem::new(2, 0.3, 1.0, Sign::Plus).unwrap();
    let sol = closed_form_mode(&p).unwrap();
    let eta = Perturbation::sample(&sol.t, |t| ((-t).exp(), -(-t).exp()));
    assert!(matches!(sobolev_gap(&sol, &eta), Err(Error::Parameter(_))));
    assert!(matches!(sobolev_gap(&sol, &Perturbation::zero(3)), Err(Error::Shape(_))));
}

#[test]
fn invalid_problems_are_rejected() {
    assert!(ModeProblem::new(2, 0.5, 1.0, Sign::Plus).is_err());
    assert!(ModeProblem::new(2, 0.3, -1.0, Sign::Plus).is_err());
    assert!(ModeProblem::new(9, 0.3, 1.0, Sign::Plus).is_err());
    let p = ModeProblem::new(2, 0.3, 1.0, Sign::Plus).unwrap();
    assert!(p.with_points(10).is_err());
    let bad = GradedGrid {
        t_max: 40.0,
        points: 128,
        grade: 0.5,
    };
    assert!(p.with_grid(bad).is_err());
}
