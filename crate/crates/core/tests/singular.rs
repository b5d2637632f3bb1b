use cylas_core::fitter::{classify_asymptotics, FitConfig};
use cylas_core::ode::{homoclinic_state, integrate_with, IntegrateOptions, PhaseState};
use cylas_core::params::to_ball;
use cylas_core::singularity::{
    bubble, check_symmetry_condition, classify_singularity, kelvin, KelvinSpec, VerdictClass,
};
use cylas_core::{BallParams, CylinderParams};
use proptest::prelude::*;

proptest! {
    #[test]
    fn kelvin_is_an_involution(
        c in prop::array::uniform3(-2.0..2.0f64),
        x in prop::array::uniform3(-5.0..5.0f64),
        lambda in 0.1..3.0f64,
    ) {
        let spec = KelvinSpec::new(c.to_vec(), lambda).unwrap();
        let d = ((x[0]-c[0]).powi(2) + (x[1]-c[1]).powi(2) + (x[2]-c[2]).powi(2)).sqrt();
        prop_assume!(d > 1e-2);
        let w = |y: &[f64]| bubble(y, 3).unwrap();
        let twice = kelvin(|y: &[f64]| kelvin(w, &spec, y).unwrap(), &spec, &x).unwrap();
        prop_assert!((twice / w(&x) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn bubble_is_kelvin_invariant_on_unit_sphere(x in prop::array::uniform3(-5.0..5.0f64)) {
        // the n = 3 bubble is fixed by inversion in the sphere of radius √(n(n−2)) at 0
        let spec = KelvinSpec::new(vec![0.0; 3], 3f64.sqrt()).unwrap();
        prop_assume!(x.iter().map(|v| v * v).sum::<f64>() > 1e-4);
        let w = |y: &[f64]| bubble(y, 3).unwrap();
        prop_assert!((kelvin(w, &spec, &x).unwrap() / w(&x) - 1.0).abs() < 1e-12);
    }
}

#[test]
fn symmetry_condition_on_admissible_charts() {
    for (c, sigma, p, n) in [(0.0, 0.0, 5.0, 3), (0.1, 0.5, 2.0, 4), (0.2, 1.5, 1.3, 5), (0.24, 0.0, 3.0, 3)] {
        let bp = BallParams { c, sigma, p, n };
        assert!(bp.admissible());
        let chk = check_symmetry_condition(&bp, 10_000, 7);
        assert!(chk.pass(), "{bp:?}: {:?}", chk.witness);
        assert!(chk.worst_ratio <= 1.0 + 1e-12);
    }
}

#[test]
fn verdict_from_fitted_homoclinic_tail() {
    // b = 0, a = −1, n = 5: c = (9 − 4)/4 ∈ (0, 9/4)
    let cp = CylinderParams { a: -1.0, b: 0.0, p: 1.5, n: 5 };
    let s0 = homoclinic_state(10.0, 1.0, &cp).unwrap();
    let opts = IntegrateOptions { atol: Some(1e-30), ..IntegrateOptions::with_tol(1e-12) };
    // a separatrix: longer runs drift off through the unstable direction
    let tr = integrate_with(s0, (0.0, 12.0), &opts, &cp).unwrap();
    let cls = classify_asymptotics(&tr, &cp, &FitConfig::default()).unwrap();
    let v = classify_singularity(&cp, &cls).unwrap();
    assert_eq!(v.class, VerdictClass::H1Unbounded);
    // (n+b−2)/2 − fitted rate reproduces the verdict exponent
    let q = cp.transform_exponent() - cls.rate().unwrap();
    assert!((q - v.exponent).abs() < 0.02 * v.exponent, "{q} {}", v.exponent);
    assert!(to_ball(&cp).c > 0.0);
}

#[test]
fn verdict_from_constant_limit() {
    let cp = CylinderParams { a: -1.0, b: 1.0, p: 1.5, n: 5 };
    let opts = IntegrateOptions { atol: Some(1e-16), ..IntegrateOptions::with_tol(1e-13) };
    let tr = integrate_with(PhaseState::new(1.2, 0.0).unwrap(), (0.0, 60.0), &opts, &cp).unwrap();
    let cls = classify_asymptotics(&tr, &cp, &FitConfig::default()).unwrap();
    let v = classify_singularity(&cp, &cls).unwrap();
    assert_eq!(v.class, VerdictClass::NonRemovableRate, "{cls:?}");
    assert!((v.exponent - cp.transform_exponent()).abs() < 1e-14);
}
