//! Energy `H(α, β) = α² + aβ² + 2β^{p+1}/(p+1)` and the level-set geometry of
//! the conservative case `b = 0, a < 0`.

use super::{integrate_with, EventKind, IntegrateOptions, PhaseState, Trajectory};
use crate::error::{Error, Result};
use crate::params::{classify_regime, CylinderParams, Regime};

/// Potential part `aβ² + 2β^{p+1}/(p+1)`.
pub fn potential(beta: f64, cp: &CylinderParams) -> f64 {
    cp.a * beta * beta + 2.0 / (cp.p + 1.0) * beta.powf(cp.p + 1.0)
}

pub fn hamiltonian(s: &PhaseState, cp: &CylinderParams) -> f64 {
    s.dpsi * s.dpsi + potential(s.psi, cp)
}

/// `(t, H)` at every sample of the trajectory.
pub fn energy_along(traj: &Trajectory) -> Vec<(f64, f64)> {
    traj.times
        .iter()
        .zip(&traj.states)
        .map(|(&t, s)| (t, hamiltonian(s, &traj.params)))
        .collect()
}

/// Trapezoid approximation of `∫ ψ'² dt` over the trajectory samples.
pub fn kinetic_integral(traj: &Trajectory) -> f64 {
    traj.times
        .windows(2)
        .zip(traj.states.windows(2))
        .map(|(t, s)| 0.5 * (t[1] - t[0]) * (s[0].dpsi.powi(2) + s[1].dpsi.powi(2)))
        .sum()
}

/// Comparison of the energy drop with `2b ∫ψ'²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dissipation {
    pub drop: f64,
    pub predicted: f64,
    /// Largest increase of `H` between consecutive samples.
    pub max_increase: f64,
}

impl Dissipation {
    pub fn relative_gap(&self) -> f64 {
        (self.drop - self.predicted).abs() / self.predicted.abs().max(f64::MIN_POSITIVE)
    }
}

pub fn dissipation(traj: &Trajectory) -> Dissipation {
    let h = energy_along(traj);
    let drop = h.first().map(|x| x.1).unwrap_or(0.0) - h.last().map(|x| x.1).unwrap_or(0.0);
    let max_increase = h
        .windows(2)
        .map(|w| w[1].1 - w[0].1)
        .fold(f64::NEG_INFINITY, f64::max);
    Dissipation {
        drop,
        predicted: 2.0 * traj.params.b * kinetic_integral(traj),
        max_increase,
    }
}

/// `inf H = −((p−1)/(p+1))·(−a)^{(p+1)/(p−1)}`, attained at `(0, c₀)`.
pub fn h_min(cp: &CylinderParams) -> Result<f64> {
    cp.validate()?;
    if cp.a >= 0.0 {
        return Err(Error::OutOfRange(format!("h_min needs a < 0, got a = {}", cp.a)));
    }
    let p = cp.p;
    Ok(-(p - 1.0) / (p + 1.0) * (-cp.a).powf((p + 1.0) / (p - 1.0)))
}

fn require_regime_i(cp: &CylinderParams) -> Result<()> {
    match classify_regime(cp)? {
        Regime::I => Ok(()),
        r => Err(Error::Unsupported(format!(
            "level sets are classified in regime I only (got regime {r})"
        ))),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LevelClass {
    Equilibrium,
    Homoclinic,
    Periodic,
    LeavesPositiveCone,
}

impl LevelClass {
    pub fn as_str(&self) -> &'static str {
        match self {
            LevelClass::Equilibrium => "equilibrium",
            LevelClass::Homoclinic => "homoclinic",
            LevelClass::Periodic => "periodic",
            LevelClass::LeavesPositiveCone => "leaves-positive-cone",
        }
    }
}

pub const LEVEL_TOL: f64 = 1e-12;

pub fn classify_level(h0: f64, cp: &CylinderParams) -> Result<LevelClass> {
    require_regime_i(cp)?;
    let hm = h_min(cp)?;
    let tol = LEVEL_TOL * hm.abs().max(1.0);
    if h0 < hm - tol {
        return Err(Error::OutOfRange(format!("h0 = {h0} is below h_min = {hm}")));
    }
    Ok(if (h0 - hm).abs() <= tol {
        LevelClass::Equilibrium
    } else if h0.abs() <= LEVEL_TOL {
        LevelClass::Homoclinic
    } else if h0 < 0.0 {
        LevelClass::Periodic
    } else {
        LevelClass::LeavesPositiveCone
    })
}

/// State `(ψ, ψ')` of the zero-energy orbit
/// `ψ(t) = [(e^{−(p−1)√(−a)t} + λ²)e^{(p−1)√(−a)t/2} / (λ√(−2a(p+1)))]^{−2/(p−1)}`.
///
/// The bracket is evaluated as `(λ⁻¹e^{−q} + λe^{q})/√(−2a(p+1))` with
/// `q = (p−1)√(−a)t/2`, in log form.
pub fn homoclinic_state(t: f64, lambda: f64, cp: &CylinderParams) -> Result<PhaseState> {
    require_regime_i(cp)?;
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::OutOfRange(format!("lambda = {lambda} must be positive")));
    }
    let p = cp.p;
    let s = (-cp.a).sqrt();
    let rate = 0.5 * (p - 1.0) * s;
    let q = rate * t;
    let shift = q + lambda.ln();
    // ln(λ⁻¹e^{−q} + λe^{q}) = |shift| + ln(1 + e^{−2|shift|})
    let log_sum = shift.abs() + (-2.0 * shift.abs()).exp().ln_1p();
    let log_x = log_sum - (-2.0 * cp.a * (p + 1.0)).sqrt().ln();
    let m = 2.0 / (p - 1.0);
    let psi = (-m * log_x).exp();
    let dpsi = -m * rate * psi * shift.tanh();
    Ok(PhaseState { psi, dpsi })
}

pub fn homoclinic_profile(t: f64, lambda: f64, cp: &CylinderParams) -> Result<f64> {
    Ok(homoclinic_state(t, lambda, cp)?.psi)
}

/// The two positive roots `β₋ < c₀ < β₊` of `aβ² + 2β^{p+1}/(p+1) = h0`.
pub fn turning_points(h0: f64, cp: &CylinderParams) -> Result<(f64, f64)> {
    require_regime_i(cp)?;
    let hm = h_min(cp)?;
    if !(h0 > hm && h0 < 0.0) {
        return Err(Error::OutOfRange(format!(
            "h0 = {h0} outside the periodic band ({hm}, 0)"
        )));
    }
    let c0 = cp.c0().expect("a < 0");
    let top = ((cp.p + 1.0) / 2.0 * (-cp.a)).powf(1.0 / (cp.p - 1.0));
    let g = |beta: f64| potential(beta, cp) - h0;
    // g > 0 on the outer ends, g < 0 at c₀
    let lo = bisect(&g, 0.0, c0);
    let hi = bisect(&g, c0, top);
    Ok((lo, hi))
}

/// Root of `g` in `[lo, hi]` given a sign change, bisected to adjacent floats.
fn bisect<G: Fn(f64) -> f64>(g: &G, mut lo: f64, mut hi: f64) -> f64 {
    let glo = g(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let gm = g(mid);
        if gm == 0.0 {
            return mid;
        }
        if gm.signum() == glo.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeriodicOrbit {
    pub h0: f64,
    pub beta_minus: f64,
    pub beta_plus: f64,
    pub period: f64,
}

/// `(y+d)^q − y^q` divided by `d`, without cancellation.
fn divided_power(y: f64, d: f64, q: f64) -> f64 {
    let e = d / y;
    if e == 0.0 {
        return q * y.powf(q - 1.0);
    }
    y.powf(q - 1.0) * (q * e.ln_1p()).exp_m1() / e
}

pub const PERIOD_QUAD_TOL: f64 = 1e-12;
const PERIOD_MAX_NODES: usize = 1 << 21;

/// Minimal period of the closed orbit at level `h0`,
/// `T = 2∫ dβ/√(h0 − aβ² − 2β^{p+1}/(p+1))` between the turning points.
///
/// The substitution `β = β₋ + (β₊−β₋)sin²s` turns the integrand into a smooth
/// even function of `s`, which the trapezoid rule integrates spectrally.
pub fn orbit_period(h0: f64, cp: &CylinderParams) -> Result<PeriodicOrbit> {
    let (bm, bp) = turning_points(h0, cp)?;
    let delta = bp - bm;
    let (a, q) = (cp.a, cp.p + 1.0);
    let k = 2.0 / q;
    // h0 − V(β) = (β−β₋)(β₊−β)·R(β)
    let inv_sqrt_r = |s: f64| -> f64 {
        let (sn, cs) = s.sin_cos();
        let d1 = delta * sn * sn;
        let d2 = delta * cs * cs;
        let r = if d1 <= d2 {
            let beta = bm + d1;
            -(a * (beta + bm) + k * divided_power(bm, d1, q)) / d2
        } else {
            let beta = bp - d2;
            (a * (beta + bp) + k * divided_power(beta, d2, q)) / d1
        };
        1.0 / r.sqrt()
    };
    let half_pi = std::f64::consts::FRAC_PI_2;
    // trapezoid on [0, π/2] with nested refinement
    let mut nodes = 16usize;
    let mut sum = 0.5 * (inv_sqrt_r(0.0) + inv_sqrt_r(half_pi));
    for i in 1..nodes {
        sum += inv_sqrt_r(half_pi * i as f64 / nodes as f64);
    }
    let mut estimate = 4.0 * sum * half_pi / nodes as f64;
    loop {
        if nodes >= PERIOD_MAX_NODES {
            return Err(Error::QuadratureDivergence(format!(
                "period at h0 = {h0} not resolved with {nodes} nodes (homoclinic limit)"
            )));
        }
        for i in 0..nodes {
            sum += inv_sqrt_r(half_pi * (2 * i + 1) as f64 / (2 * nodes) as f64);
        }
        nodes *= 2;
        let next = 4.0 * sum * half_pi / nodes as f64;
        if !next.is_finite() {
            return Err(Error::QuadratureDivergence(format!("non-finite period at h0 = {h0}")));
        }
        let done = (next - estimate).abs() <= PERIOD_QUAD_TOL * next.abs();
        estimate = next;
        if done {
            break;
        }
    }
    Ok(PeriodicOrbit {
        h0,
        beta_minus: bm,
        beta_plus: bp,
        period: estimate,
    })
}

/// Period measured as the return time to the minimum `(β₋, 0)` by integration.
pub fn return_period(h0: f64, cp: &CylinderParams, tol: f64) -> Result<f64> {
    let (bm, _) = turning_points(h0, cp)?;
    let s0 = PhaseState::new(bm, 0.0)?;
    let mut horizon = 20.0;
    for _ in 0..8 {
        let tr = integrate_with(s0, (0.0, horizon), &IntegrateOptions::with_tol(tol), cp)?;
        if let Some(e) = tr.events.iter().find(|e| e.kind == EventKind::Min) {
            return Ok(e.t);
        }
        horizon *= 4.0;
    }
    Err(Error::QuadratureDivergence(format!(
        "no return to the minimum at h0 = {h0}"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn cyl(a: f64, b: f64, p: f64) -> CylinderParams {
        CylinderParams { a, b, p, n: 3 }
    }

    #[test]
    fn hamiltonian_examples() {
        let cp = cyl(-1.0, 0.0, 3.0);
        assert_eq!(hamiltonian(&PhaseState { psi: 0.0, dpsi: 0.0 }, &cp), 0.0);
        assert_eq!(hamiltonian(&PhaseState { psi: 1.0, dpsi: 0.0 }, &cp), -0.5);
        assert_eq!(hamiltonian(&PhaseState { psi: 0.0, dpsi: 1.0 }, &cp), 1.0);
        assert_eq!(h_min(&cp).unwrap(), -0.5);
    }

    #[test]
    fn h_min_examples() {
        assert!((h_min(&cyl(-4.0, 0.0, 2.0)).unwrap() + 64.0 / 3.0).abs() < 1e-12);
        assert!(h_min(&cyl(0.0, 0.0, 2.0)).is_err());
        assert!(h_min(&cyl(1.0, 0.0, 2.0)).is_err());
    }

    #[test]
    fn level_classes() {
        let cp = cyl(-1.0, 0.0, 3.0);
        assert_eq!(classify_level(-0.5, &cp).unwrap(), LevelClass::Equilibrium);
        assert_eq!(classify_level(0.0, &cp).unwrap(), LevelClass::Homoclinic);
        assert_eq!(classify_level(-0.25, &cp).unwrap(), LevelClass::Periodic);
        assert_eq!(classify_level(0.25, &cp).unwrap(), LevelClass::LeavesPositiveCone);
        assert!(classify_level(-0.6, &cp).is_err());
        assert!(classify_level(-0.25, &cyl(-1.0, 1.0, 3.0)).is_err());
    }

    #[test]
    fn sech_profile() {
        let cp = cyl(-1.0, 0.0, 3.0);
        assert!((homoclinic_profile(0.0, 1.0, &cp).unwrap() - 2f64.sqrt()).abs() < 1e-15);
        for i in -100..=100 {
            let t = i as f64 * 0.1;
            let s = homoclinic_state(t, 1.0, &cp).unwrap();
            let exact = 2f64.sqrt() / t.cosh();
            assert!((s.psi - exact).abs() < 1e-12 * exact.max(1e-300) + 1e-15);
            let dexact = -exact * t.tanh();
            assert!((s.dpsi - dexact).abs() < 1e-12);
            assert!(hamiltonian(&s, &cp).abs() < 1e-9);
        }
    }

    #[test]
    fn homoclinic_tail_constant() {
        let cp = cyl(-2.0, 0.0, 2.5);
        let lambda = 0.7;
        let s = (-cp.a).sqrt();
        let t = 30.0;
        let scaled = homoclinic_profile(t, lambda, &cp).unwrap() * (s * t).exp();
        // the bracket tends to λe^{q}/√(−2a(p+1)), so ψe^{√(−a)t} → (√(−2a(p+1))/λ)^{2/(p−1)}
        let limit = ((-2.0 * cp.a * (cp.p + 1.0)).sqrt() / lambda).powf(2.0 / (cp.p - 1.0));
        assert!((scaled / limit - 1.0).abs() < 1e-8, "{scaled} vs {limit}");
    }

    #[test]
    fn turning_points_quartic() {
        let cp = cyl(-1.0, 0.0, 3.0);
        let (lo, hi) = turning_points(-0.25, &cp).unwrap();
        let r = 0.5f64.sqrt();
        assert!((lo * lo - (1.0 - r)).abs() < 1e-12);
        assert!((hi * hi - (1.0 + r)).abs() < 1e-12);
        for b in [lo, hi] {
            assert!((hamiltonian(&PhaseState { psi: b, dpsi: 0.0 }, &cp) + 0.25).abs() < 1e-12);
        }
        let (lo, hi) = turning_points(-1e-12, &cp).unwrap();
        assert!(lo < 1e-5 && (hi - 2f64.sqrt()).abs() < 1e-6);
        let (lo, hi) = turning_points(-0.5 + 1e-12, &cp).unwrap();
        assert!((lo - 1.0).abs() < 1e-5 && (hi - 1.0).abs() < 1e-5);
        assert!(turning_points(0.1, &cp).is_err());
        assert!(turning_points(-0.6, &cp).is_err());
    }

    #[test]
    fn small_amplitude_period() {
        let cp = cyl(-1.0, 0.0, 3.0);
        let orbit = orbit_period(-0.5 + 1e-8, &cp).unwrap();
        let lin = 2.0 * PI / 2f64.sqrt();
        assert!((orbit.period / lin - 1.0).abs() < 1e-4);
    }

    #[test]
    fn period_diverges_at_homoclinic_level() {
        let cp = cyl(-1.0, 0.0, 3.0);
        let near = orbit_period(-1e-6, &cp).unwrap().period;
        let nearer = orbit_period(-1e-10, &cp).unwrap().period;
        assert!(nearer > near);
        assert!(matches!(
            orbit_period(-1e-300, &cp),
            Err(Error::QuadratureDivergence(_))
        ));
    }

    #[test]
    fn quadrature_matches_return_time() {
        let cp = cyl(-1.0, 0.0, 3.0);
        let quad = orbit_period(-0.4, &cp).unwrap().period;
        let ret = return_period(-0.4, &cp, 1e-12).unwrap();
        assert!((quad - ret).abs() / quad < 1e-6, "{quad} vs {ret}");
    }
}
