//! The radial ODE `ψ'' + bψ' + aψ + ψ^p = 0`.
//!
//! Integration with event detection, the energy `H(ψ', ψ)` and its level
//! sets, periods of the closed orbits, and the linearized analysis about the
//! equilibria live in the submodules; this module holds the shared types.

pub mod energy;
pub mod integrator;
pub mod linear;
pub mod manifold;

pub use energy::{
    classify_level, energy_along, h_min, hamiltonian, homoclinic_profile, homoclinic_state,
    orbit_period, return_period, turning_points, LevelClass, PeriodicOrbit,
};
pub use integrator::{Event, EventKind, Termination};
pub use linear::{
    char_roots, linearized_roots_at_c0, predicted_decay, variation_of_parameters, DecayBranch,
    DecayPrediction, LinearizedRoots, XiSample,
};
pub use manifold::stable_manifold_state;

use crate::error::{Error, Result};
use crate::params::CylinderParams;
use integrator::{SolverOptions, State};

pub const MIN_TOL: f64 = 1e-13;
pub const MAX_TOL: f64 = 1e-3;
pub const DEFAULT_TOL: f64 = 1e-10;

/// A point `(ψ, ψ')` of the phase plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseState {
    pub psi: f64,
    pub dpsi: f64,
}

impl PhaseState {
    pub fn new(psi: f64, dpsi: f64) -> Result<Self> {
        if !(psi.is_finite() && dpsi.is_finite()) {
            return Err(Error::OutOfRange("non-finite phase state".into()));
        }
        if psi < 0.0 {
            return Err(Error::OutOfRange(format!("psi = {psi} is negative")));
        }
        Ok(Self { psi, dpsi })
    }

    fn from_raw(y: State) -> Self {
        Self {
            psi: y[0].max(0.0),
            dpsi: y[1],
        }
    }

    fn raw(&self) -> State {
        [self.psi, self.dpsi]
    }
}

/// Vector field `(ψ', −bψ' − aψ − ψ^p)`.
pub fn rhs(s: &PhaseState, cp: &CylinderParams) -> (f64, f64) {
    let f = field(cp);
    let d = f(0.0, &s.raw());
    (d[0], d[1])
}

/// The vector field as a closure. Negative `ψ` inside a Runge-Kutta stage is
/// handled by the odd extension `sign(ψ)|ψ|^p`; trajectories are stopped at
/// `ψ = 0` anyway.
pub(crate) fn field(cp: &CylinderParams) -> impl Fn(f64, &State) -> State {
    let (a, b, p) = (cp.a, cp.b, cp.p);
    move |_t, y| {
        let psi = y[0];
        let pw = if psi >= 0.0 {
            psi.powf(p)
        } else {
            -(-psi).powf(p)
        };
        [y[1], -b * y[1] - a * psi - pw]
    }
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<PhaseState>,
    pub params: CylinderParams,
    pub termination: Termination,
    /// Turning points (`ψ' = 0`) and the terminal `ψ = 0` event, in time order.
    pub events: Vec<Event>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn t_end(&self) -> f64 {
        *self.times.last().unwrap_or(&f64::NAN)
    }

    pub fn last(&self) -> Option<&PhaseState> {
        self.states.last()
    }

    /// Samples with `t ≥ t0`, shifted to start at zero.
    pub fn tail_from(&self, t0: f64) -> Trajectory {
        let start = self.times.partition_point(|&t| t < t0);
        Trajectory {
            times: self.times[start..].iter().map(|t| t - t0).collect(),
            states: self.states[start..].to_vec(),
            params: self.params,
            termination: self.termination,
            events: self
                .events
                .iter()
                .filter(|e| e.t >= t0)
                .map(|e| Event { t: e.t - t0, ..*e })
                .collect(),
        }
    }

    pub fn psi(&self) -> Vec<(f64, f64)> {
        self.times
            .iter()
            .zip(&self.states)
            .map(|(&t, s)| (t, s.psi))
            .collect()
    }
}

/// Integration settings beyond the tolerance.
#[derive(Debug, Clone)]
pub struct IntegrateOptions {
    pub tol: f64,
    /// Absolute tolerance; defaults to `tol`. Tail-rate work uses a tiny value
    /// so that the error control stays relative while `ψ → 0`.
    pub atol: Option<f64>,
    pub sample_dt: Option<f64>,
    pub blowup: f64,
}

impl Default for IntegrateOptions {
    fn default() -> Self {
        Self {
            tol: DEFAULT_TOL,
            atol: None,
            sample_dt: None,
            blowup: 1e12,
        }
    }
}

impl IntegrateOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self {
            tol,
            ..Default::default()
        }
    }
}

pub fn check_tol(tol: f64) -> Result<()> {
    if !(MIN_TOL..=MAX_TOL).contains(&tol) {
        return Err(Error::InvalidTolerance(tol));
    }
    Ok(())
}

/// Integrates the ODE over `t_span` with the default options at tolerance `tol`.
pub fn integrate(s0: PhaseState, t_span: (f64, f64), tol: f64, cp: &CylinderParams) -> Result<Trajectory> {
    integrate_with(s0, t_span, &IntegrateOptions::with_tol(tol), cp)
}

pub fn integrate_with(
    s0: PhaseState,
    t_span: (f64, f64),
    opts: &IntegrateOptions,
    cp: &CylinderParams,
) -> Result<Trajectory> {
    cp.validate()?;
    check_tol(opts.tol)?;
    let solver = SolverOptions {
        rtol: opts.tol,
        atol: opts.atol.unwrap_or(opts.tol),
        sample_dt: opts.sample_dt,
        blowup: opts.blowup,
        ..Default::default()
    };
    let f = field(cp);
    let sol = integrator::solve(&f, t_span.0, s0.raw(), t_span.1, &solver)?;
    Ok(Trajectory {
        times: sol.times,
        states: sol.states.into_iter().map(PhaseState::from_raw).collect(),
        params: *cp,
        termination: sol.termination,
        events: sol
            .events
            .into_iter()
            .map(|mut e| {
                e.state[0] = e.state[0].max(0.0);
                e
            })
            .collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cyl(a: f64, b: f64, p: f64) -> CylinderParams {
        CylinderParams { a, b, p, n: 3 }
    }

    #[test]
    fn rhs_examples() {
        let cp = cyl(-1.0, 0.0, 3.0);
        assert_eq!(rhs(&PhaseState { psi: 1.0, dpsi: 0.0 }, &cp), (0.0, 0.0));
        let cp = cyl(-1.0, 2.0, 3.0);
        assert_eq!(rhs(&PhaseState { psi: 2.0, dpsi: 1.0 }, &cp), (1.0, -8.0));
        let cp = cyl(-2.5, 0.7, 2.5);
        let c0 = cp.c0().unwrap();
        let (d0, d1) = rhs(&PhaseState { psi: c0, dpsi: 0.0 }, &cp);
        assert_eq!(d0, 0.0);
        assert!(d1.abs() < 1e-14);
    }

    #[test]
    fn negative_state_rejected() {
        assert!(PhaseState::new(-1e-3, 0.0).is_err());
        assert!(PhaseState::new(f64::NAN, 0.0).is_err());
    }

    #[test]
    fn tolerance_range() {
        let cp = cyl(-1.0, 0.0, 3.0);
        let s0 = PhaseState::new(1.0, 0.0).unwrap();
        assert!(matches!(
            integrate(s0, (0.0, 1.0), 1e-14, &cp),
            Err(Error::InvalidTolerance(_))
        ));
        assert!(integrate(s0, (0.0, 1.0), 1e-2, &cp).is_err());
        assert!(integrate(s0, (0.0, 1.0), 1e-13, &cp).is_ok());
    }

    #[test]
    fn equilibrium_stays_put() {
        for (a, b, p) in [(-1.0, 0.0, 3.0), (-2.0, 1.0, 2.0), (-0.5, 0.3, 1.5)] {
            let cp = cyl(a, b, p);
            let c0 = cp.c0().unwrap();
            let tr = integrate(PhaseState::new(c0, 0.0).unwrap(), (0.0, 100.0), 1e-10, &cp).unwrap();
            assert_eq!(tr.termination, Termination::ReachedEnd);
            for s in &tr.states {
                assert!((s.psi - c0).abs() < 1e-10);
            }
            assert!(tr.events.is_empty());
        }
    }

    #[test]
    fn sech_solution() {
        // ψ = √2 sech t solves ψ'' − ψ + ψ³ = 0
        let cp = cyl(-1.0, 0.0, 3.0);
        let s0 = PhaseState::new(2f64.sqrt(), 0.0).unwrap();
        let tr = integrate(s0, (0.0, 10.0), 1e-12, &cp).unwrap();
        for (t, s) in tr.times.iter().zip(&tr.states) {
            let exact = 2f64.sqrt() / t.cosh();
            assert!((s.psi - exact).abs() < 1e-6, "t={t}");
        }
    }

    #[test]
    fn positive_energy_leaves_cone() {
        let cp = cyl(-1.0, 0.0, 3.0);
        let s0 = PhaseState::new(0.5, -1.0).unwrap();
        assert!(hamiltonian(&s0, &cp) > 0.0);
        let tr = integrate(s0, (0.0, 50.0), 1e-10, &cp).unwrap();
        assert_eq!(tr.termination, Termination::PsiHitZero);
        assert_eq!(tr.last().unwrap().psi, 0.0);
        assert_eq!(tr.events.last().unwrap().kind, EventKind::Zero);
    }
}
