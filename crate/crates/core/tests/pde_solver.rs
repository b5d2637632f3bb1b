use cylas_core::io::{field_from_csv, field_to_csv};
use cylas_core::ode::{integrate_with, IntegrateOptions, PhaseState};
use cylas_core::pde::{
    initial_guess, newton_solve, spherical_average, symmetry_rate, CylGrid, CylinderField,
    FarCondition, NewtonOptions, SymmetryConfig, SymmetryOutcome,
};
use cylas_core::CylinderParams;

const CP: CylinderParams = CylinderParams { a: -1.0, b: 2.0, p: 3.0, n: 3 };

fn solve(m: usize, nt: usize, t_max: f64, g: impl Fn(f64) -> f64) -> CylinderField {
    let far = FarCondition::for_params(&CP).unwrap();
    let grid = CylGrid::new(m, nt, t_max, CP.n).unwrap();
    let guess = initial_guess(&grid, &CP, g, &far);
    let (f, rep) = newton_solve(guess, &far, &NewtonOptions::default()).unwrap();
    assert!(rep.converged && rep.residual <= 1e-10, "{rep:?}");
    f
}

#[test]
fn radial_data_matches_ode() {
    for g in [0.8, 1.1] {
        radial_closure(g);
    }
}

fn radial_closure(g: f64) {
    let f = solve(24, 400, 10.0, |_| g);
    assert!(f.column_spread() <= 1e-10);
    let prof = spherical_average(&f);
    let h = f.grid.h_t();
    let u = &prof.ubar;
    let du0 = (-3.0 * u[0] + 4.0 * u[1] - u[2]) / (2.0 * h);
    let opts = IntegrateOptions { sample_dt: Some(h), ..IntegrateOptions::with_tol(1e-11) };
    let tr = integrate_with(PhaseState::new(u[0], du0).unwrap(), (0.0, 5.0), &opts, &CP).unwrap();
    let mut worst: f64 = 0.0;
    for (t, s) in tr.times.iter().zip(&tr.states) {
        let j = (t / h).round() as usize;
        if ((j as f64) * h - t).abs() < 1e-9 {
            worst = worst.max((s.psi - u[j]).abs());
        }
    }
    assert!(worst < 5e-3, "{worst}");
}

#[test]
fn perturbations_symmetrize() {
    for g in [
        (|th: f64| 1.0 + 0.1 * th.cos()) as fn(f64) -> f64,
        |th: f64| 1.0 + 0.1 * (2.0 * th).cos(),
    ] {
        let f = solve(32, 200, 10.0, g);
        assert!(f.min_value() > 0.0);
        let prof = spherical_average(&f);
        match symmetry_rate(&prof, &SymmetryConfig::default()).unwrap() {
            SymmetryOutcome::Rate(fit) => assert!(fit.gamma >= 0.9 && fit.r2 >= 0.98, "{fit:?}"),
            other => panic!("{other:?}"),
        }
    }
}

#[test]
fn radial_data_is_exactly_symmetric() {
    let f = solve(16, 100, 5.0, |_| 0.8);
    let out = symmetry_rate(&spherical_average(&f), &SymmetryConfig::default()).unwrap();
    assert_eq!(out, SymmetryOutcome::ExactlySymmetric);
}

#[test]
fn solved_field_round_trips_through_csv() {
    let f = solve(16, 64, 4.0, |th| 1.0 + 0.2 * th.cos());
    let back = field_from_csv(&field_to_csv(&f)).unwrap();
    assert_eq!(back.values, f.values);
    assert_eq!(back.grid, f.grid);
}
