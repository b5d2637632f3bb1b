//! Points on the stable manifold of the origin, found by shooting on the slope.

use super::{char_roots, integrate_with, EventKind, IntegrateOptions, PhaseState, Termination};
use crate::error::{Error, Result};
use crate::params::CylinderParams;

/// Outcome of one shot.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Shot {
    /// `ψ` reaches zero: slope too steep.
    Steep,
    /// `ψ'` vanishes first: slope too shallow.
    Shallow,
}

fn shoot(psi0: f64, slope: f64, horizon: f64, l1: f64, cp: &CylinderParams) -> Result<Shot> {
    let opts = IntegrateOptions {
        tol: 1e-12,
        atol: Some(1e-30),
        ..Default::default()
    };
    let tr = integrate_with(PhaseState::new(psi0, slope)?, (0.0, horizon), &opts, cp)?;
    let first = tr.events.iter().find(|e| e.t > 0.0);
    Ok(match first.map(|e| e.kind) {
        Some(EventKind::Zero) => Shot::Steep,
        Some(EventKind::Min) | Some(EventKind::Max) => Shot::Shallow,
        None if tr.termination == Termination::PsiHitZero => Shot::Steep,
        // still close to the origin: sign of the unstable component
        None => {
            let s = tr.last().expect("nonempty trajectory");
            if s.dpsi - l1 * s.psi > 0.0 {
                Shot::Shallow
            } else {
                Shot::Steep
            }
        }
    })
}

/// The state `(ψ₀, ψ'₀)` whose forward orbit decays monotonically to 0.
///
/// Requires `a < 0`, where the origin is a saddle. The slope is bisected to
/// adjacent floating point numbers between orbits that hit zero and orbits
/// that turn around.
pub fn stable_manifold_state(psi0: f64, cp: &CylinderParams) -> Result<PhaseState> {
    cp.validate()?;
    if cp.a >= 0.0 {
        return Err(Error::Unsupported("the origin is a saddle only for a < 0".into()));
    }
    if !(psi0 > 0.0 && psi0.is_finite()) {
        return Err(Error::OutOfRange(format!("psi0 = {psi0} must be positive")));
    }
    let roots = char_roots(cp);
    let l1 = roots.mu1;
    let horizon = 40.0 / (roots.mu2 - l1);
    let mut hi = psi0 * (1.0 + roots.mu2);
    let mut lo = -10.0 * (1.0 + l1.abs()) * (psi0 + 1.0);
    if shoot(psi0, lo, horizon, l1, cp)? != Shot::Steep {
        return Err(Error::Unsupported(format!("no steep bracket at psi0 = {psi0}")));
    }
    if shoot(psi0, hi, horizon, l1, cp)? != Shot::Shallow {
        return Err(Error::Unsupported(format!("no shallow bracket at psi0 = {psi0}")));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        match shoot(psi0, mid, horizon, l1, cp)? {
            Shot::Steep => lo = mid,
            Shot::Shallow => hi = mid,
        }
    }
    PhaseState::new(psi0, 0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ode::homoclinic_state;

    #[test]
    fn matches_homoclinic_slope() {
        let cp = CylinderParams { a: -1.0, b: 0.0, p: 3.0, n: 3 };
        let exact = homoclinic_state(2.0, 1.0, &cp).unwrap();
        let s = stable_manifold_state(exact.psi, &cp).unwrap();
        assert!((s.dpsi - exact.dpsi).abs() < 1e-10 * exact.dpsi.abs());
    }

    #[test]
    fn tangent_to_stable_direction_near_origin() {
        let cp = CylinderParams { a: -1.0, b: 1.0, p: 3.0, n: 3 };
        let l1 = char_roots(&cp).mu1;
        let psi0 = 1e-6;
        let s = stable_manifold_state(psi0, &cp).unwrap();
        assert!((s.dpsi / psi0 - l1).abs() < 1e-6, "{} {}", s.dpsi / psi0, l1);
    }

    #[test]
    fn rejects_nonnegative_a() {
        let cp = CylinderParams { a: 0.5, b: 1.0, p: 3.0, n: 3 };
        assert!(stable_manifold_state(0.5, &cp).is_err());
    }
}
