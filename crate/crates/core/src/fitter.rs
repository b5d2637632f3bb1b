//! Tail-rate fits and the asymptotic classification of trajectories.

use crate::error::{Error, Result};
use crate::ode::{
    predicted_decay, DecayBranch, DecayPrediction, EventKind, Termination, Trajectory,
};
use crate::params::{classify_regime, CylinderParams, Regime};

pub const MIN_FIT_POINTS: usize = 10;
const MIN_ENVELOPE_PEAKS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateFit {
    /// Rate `γ` in `C e^{−γt}`.
    pub gamma: f64,
    pub c: f64,
    pub r2: f64,
    pub window: (f64, f64),
    pub points: usize,
    /// The residual changed sign and the fit used its local maxima.
    pub envelope: bool,
}

/// Least-squares fit of `ln|v − target| = ln c − γt` over all samples.
///
/// When `v − target` changes sign the fit runs over the local maxima of
/// `|v − target|`, each refined by a parabola through its neighbours.
pub fn fit_rate(samples: &[(f64, f64)], target: f64) -> Result<RateFit> {
    let pts: Vec<(f64, f64)> = samples
        .iter()
        .map(|&(t, v)| (t, v - target))
        .filter(|(t, r)| t.is_finite() && r.is_finite())
        .collect();
    let window = match (pts.first(), pts.last()) {
        (Some(a), Some(b)) => (a.0, b.0),
        _ => return Err(Error::DegenerateWindow("no samples".into())),
    };
    let nonzero = pts.iter().filter(|p| p.1 != 0.0).count();
    if nonzero < MIN_FIT_POINTS {
        return Err(Error::DegenerateWindow(format!(
            "{nonzero} samples differ from the target, need {MIN_FIT_POINTS}"
        )));
    }
    let pos = pts.iter().any(|p| p.1 > 0.0);
    let neg = pts.iter().any(|p| p.1 < 0.0);
    let (data, envelope) = if pos && neg {
        let peaks = envelope_peaks(&pts);
        if peaks.len() < MIN_ENVELOPE_PEAKS {
            return Err(Error::DegenerateWindow(format!(
                "oscillating residual with only {} peaks",
                peaks.len()
            )));
        }
        (peaks, true)
    } else {
        let d: Vec<(f64, f64)> = pts
            .iter()
            .filter(|p| p.1 != 0.0)
            .map(|&(t, r)| (t, r.abs().ln()))
            .collect();
        (d, false)
    };
    let (slope, intercept, r2) = linear_regression(&data);
    Ok(RateFit {
        gamma: -slope,
        c: intercept.exp(),
        r2,
        window,
        points: data.len(),
        envelope,
    })
}

/// `(t, ln|r|)` at the interior local maxima of `|r|`.
fn envelope_peaks(pts: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    for i in 1..pts.len().saturating_sub(1) {
        let (y0, y1, y2) = (pts[i - 1].1.abs(), pts[i].1.abs(), pts[i + 1].1.abs());
        if !(y1 > y0 && y1 >= y2) {
            continue;
        }
        let (t0, t1, t2) = (pts[i - 1].0, pts[i].0, pts[i + 1].0);
        // vertex of the parabola through the three points
        let d01 = (y1 - y0) / (t1 - t0);
        let d12 = (y2 - y1) / (t2 - t1);
        let curv = (d12 - d01) / (t2 - t0);
        let (tv, yv) = if curv < 0.0 {
            let tv = 0.5 * (t0 + t1) - d01 / (2.0 * curv);
            let tv = tv.clamp(t0, t2);
            (tv, y0 + d01 * (tv - t0) + curv * (tv - t0) * (tv - t1))
        } else {
            (t1, y1)
        };
        if yv > 0.0 {
            out.push((tv, yv.ln()));
        }
    }
    out
}

/// `(slope, intercept, r²)` of the ordinary least-squares line.
fn linear_regression(data: &[(f64, f64)]) -> (f64, f64, f64) {
    let n = data.len() as f64;
    let tm = data.iter().map(|d| d.0).sum::<f64>() / n;
    let ym = data.iter().map(|d| d.1).sum::<f64>() / n;
    let stt: f64 = data.iter().map(|d| (d.0 - tm).powi(2)).sum();
    let sty: f64 = data.iter().map(|d| (d.0 - tm) * (d.1 - ym)).sum();
    let slope = sty / stt;
    let intercept = ym - slope * tm;
    let ss_res: f64 = data
        .iter()
        .map(|d| (d.1 - intercept - slope * d.0).powi(2))
        .sum();
    let ss_tot: f64 = data.iter().map(|d| (d.1 - ym).powi(2)).sum();
    let r2 = if ss_tot > 0.0 {
        1.0 - ss_res / ss_tot
    } else if ss_res == 0.0 {
        1.0
    } else {
        0.0
    };
    (slope, intercept, r2)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectedPeriod {
    pub period: f64,
    pub beta_minus: f64,
    pub beta_plus: f64,
    /// Time of the last minimum, the alignment point of the phase.
    pub last_min: f64,
}

pub const PERIOD_AGREEMENT: f64 = 1e-6;
pub const EXTREMA_AGREEMENT: f64 = 1e-8;

/// Period from the gaps between alternate turning points of `ψ`.
pub fn detect_period(traj: &Trajectory) -> Option<DetectedPeriod> {
    let turns: Vec<_> = traj
        .events
        .iter()
        .filter(|e| matches!(e.kind, EventKind::Min | EventKind::Max))
        .collect();
    if turns.len() < 4 {
        return None;
    }
    let gaps: Vec<f64> = turns.windows(3).map(|w| w[2].t - w[0].t).collect();
    let mean = gaps.iter().sum::<f64>() / gaps.len() as f64;
    if !(mean > 0.0) || gaps.iter().any(|g| (g - mean).abs() > PERIOD_AGREEMENT * mean) {
        return None;
    }
    let values = |kind: EventKind| -> Vec<f64> {
        turns
            .iter()
            .filter(|e| e.kind == kind)
            .map(|e| e.state[0])
            .collect()
    };
    let (mins, maxs) = (values(EventKind::Min), values(EventKind::Max));
    let spread = |v: &[f64]| {
        let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        (lo, hi)
    };
    let (min_lo, min_hi) = spread(&mins);
    let (max_lo, max_hi) = spread(&maxs);
    let scale = max_hi.abs().max(1.0);
    if min_hi - min_lo > EXTREMA_AGREEMENT * scale || max_hi - max_lo > EXTREMA_AGREEMENT * scale {
        return None;
    }
    let last_min = turns.iter().rev().find(|e| e.kind == EventKind::Min)?.t;
    Some(DetectedPeriod {
        period: mean,
        beta_minus: mins.iter().sum::<f64>() / mins.len() as f64,
        beta_plus: maxs.iter().sum::<f64>() / maxs.len() as f64,
        last_min,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitConfig {
    pub floor: f64,
    pub constancy: f64,
    /// Fraction of the run, counted from its end, used for fits and period detection.
    pub window_fraction: f64,
    /// Minimum length of the run; shorter trajectories are rejected.
    pub horizon: Option<f64>,
    /// Relative slack of the regime III bracket check.
    pub bracket_slack: f64,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            floor: 1e-8,
            constancy: 1e-6,
            window_fraction: 0.4,
            horizon: None,
            bracket_slack: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum AsymptoticClass {
    FastDecay {
        fit: RateFit,
        predicted: Option<DecayPrediction>,
    },
    PeriodicLimit {
        period: f64,
        beta_minus: f64,
        beta_plus: f64,
        phase_shift: f64,
    },
    ConstantLimit {
        c0: f64,
        fit: Option<RateFit>,
        predicted: Option<DecayPrediction>,
    },
    RegimeIIIDecay {
        fit: RateFit,
        bracket: (f64, f64),
        contained: bool,
    },
    Undetermined {
        reason: String,
    },
}

impl AsymptoticClass {
    pub fn tag(&self) -> &'static str {
        match self {
            AsymptoticClass::FastDecay { .. } => "FastDecay",
            AsymptoticClass::PeriodicLimit { .. } => "PeriodicLimit",
            AsymptoticClass::ConstantLimit { .. } => "ConstantLimit",
            AsymptoticClass::RegimeIIIDecay { .. } => "RegimeIIIDecay",
            AsymptoticClass::Undetermined { .. } => "Undetermined",
        }
    }

    /// The fitted rate, when the class carries one.
    pub fn rate(&self) -> Option<f64> {
        match self {
            AsymptoticClass::FastDecay { fit, .. } | AsymptoticClass::RegimeIIIDecay { fit, .. } => {
                Some(fit.gamma)
            }
            AsymptoticClass::ConstantLimit { fit, .. } => fit.map(|f| f.gamma),
            _ => None,
        }
    }
}

/// Window `[t_end − fraction·(t_end − t_start), t_end]` of the trajectory.
fn tail(traj: &Trajectory, fraction: f64) -> Trajectory {
    let (t0, t1) = (traj.times[0], traj.t_end());
    let start = t1 - fraction * (t1 - t0);
    let mut w = traj.tail_from(start);
    for t in &mut w.times {
        *t += start;
    }
    for e in &mut w.events {
        e.t += start;
    }
    w
}

pub fn classify_asymptotics(
    traj: &Trajectory,
    cp: &CylinderParams,
    cfg: &FitConfig,
) -> Result<AsymptoticClass> {
    let regime = classify_regime(cp)?;
    if traj.len() < 2 {
        return Err(Error::DegenerateWindow("trajectory has fewer than two samples".into()));
    }
    if let Some(h) = cfg.horizon {
        let span = traj.t_end() - traj.times[0];
        if span < h * (1.0 - 1e-12) {
            return Err(Error::OutOfRange(format!(
                "trajectory covers {span}, horizon is {h}"
            )));
        }
    }
    let undetermined = |reason: &str| {
        Ok(AsymptoticClass::Undetermined {
            reason: reason.to_string(),
        })
    };
    match traj.termination {
        Termination::ReachedEnd => {}
        Termination::PsiHitZero => return undetermined("left the positive cone"),
        Termination::BlowUp => return undetermined("blow-up"),
        Termination::StepUnderflow => return undetermined("step underflow"),
    }
    let window = tail(traj, cfg.window_fraction);
    let psi = window.psi();
    let last = traj.last().expect("nonempty").psi;

    if regime == Regime::III {
        let fit = fit_rate(&psi, 0.0)?;
        let bracket = predicted_decay(DecayBranch::III, cp)?
            .bracket
            .expect("regime III bracket");
        let (lo, hi) = bracket;
        let contained = fit.gamma >= lo * (1.0 - cfg.bracket_slack)
            && fit.gamma <= hi * (1.0 + cfg.bracket_slack);
        return Ok(AsymptoticClass::RegimeIIIDecay {
            fit,
            bracket,
            contained,
        });
    }

    if last.abs() < cfg.floor {
        let fit = fit_rate(&psi, 0.0)?;
        let branch = match regime {
            Regime::I => DecayBranch::IDecay,
            _ => DecayBranch::IIDecay,
        };
        return Ok(AsymptoticClass::FastDecay {
            fit,
            predicted: predicted_decay(branch, cp).ok(),
        });
    }

    if let Some(p) = detect_period(&window) {
        return Ok(AsymptoticClass::PeriodicLimit {
            period: p.period,
            beta_minus: p.beta_minus,
            beta_plus: p.beta_plus,
            phase_shift: p.last_min.rem_euclid(p.period),
        });
    }

    if let Some(c0) = cp.c0() {
        if (last - c0).abs() <= cfg.constancy {
            let fit = fit_rate(&psi, c0).ok();
            let predicted = if regime == Regime::II {
                predicted_decay(DecayBranch::IIConverge, cp).ok()
            } else {
                None
            };
            return Ok(AsymptoticClass::ConstantLimit { c0, fit, predicted });
        }
    }
    undetermined("no criterion matched")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ode::{integrate, integrate_with, orbit_period, turning_points, IntegrateOptions, PhaseState};

    fn grid(t0: f64, t1: f64, n: usize, f: impl Fn(f64) -> f64) -> Vec<(f64, f64)> {
        (0..=n)
            .map(|i| {
                let t = t0 + (t1 - t0) * i as f64 / n as f64;
                (t, f(t))
            })
            .collect()
    }

    #[test]
    fn exact_exponential() {
        let fit = fit_rate(&grid(0.0, 10.0, 100, |t| 3.0 * (-2.0 * t).exp()), 0.0).unwrap();
        assert!((fit.gamma - 2.0).abs() < 1e-12);
        assert!((fit.c - 3.0).abs() < 1e-12);
        assert!((fit.r2 - 1.0).abs() < 1e-12);
        assert!(!fit.envelope);
    }

    #[test]
    fn oscillating_envelope() {
        let c0 = 1.0;
        let s = grid(5.0, 25.0, 2000, |t| c0 + (-t).exp() * t.cos());
        let fit = fit_rate(&s, c0).unwrap();
        assert!(fit.envelope);
        assert!((fit.gamma - 1.0).abs() < 0.05);
    }

    #[test]
    fn constant_samples_rejected() {
        let s = grid(0.0, 1.0, 50, |_| 2.0);
        assert!(matches!(fit_rate(&s, 2.0), Err(Error::DegenerateWindow(_))));
        assert!(fit_rate(&s[..5], 0.0).is_err());
    }

    #[test]
    fn perturbed_exponential() {
        for gamma in [0.1, 0.7, 2.0, 5.0] {
            let s = grid(0.0, 20.0 / gamma, 400, |t| 2.0 * (-gamma * t).exp() * (1.0 + 1e-3 * (3.0 * t).sin()));
            let fit = fit_rate(&s, 0.0).unwrap();
            assert!((fit.gamma / gamma - 1.0).abs() < 0.01);
        }
    }

    #[test]
    fn period_of_regime_one_orbit() {
        let cp = CylinderParams { a: -1.0, b: 0.0, p: 3.0, n: 3 };
        let (bm, bp) = turning_points(-0.4, &cp).unwrap();
        let tr = integrate(PhaseState::new(bm, 0.0).unwrap(), (0.0, 30.0), 1e-12, &cp).unwrap();
        let p = detect_period(&tr).unwrap();
        let q = orbit_period(-0.4, &cp).unwrap().period;
        assert!((p.period - q).abs() < 1e-6 * q);
        assert!((p.beta_minus - bm).abs() < 1e-8 && (p.beta_plus - bp).abs() < 1e-8);
    }

    #[test]
    fn no_period_for_equilibrium_or_damping() {
        let cp = CylinderParams { a: -1.0, b: 0.0, p: 3.0, n: 3 };
        let tr = integrate(PhaseState::new(1.0, 0.0).unwrap(), (0.0, 30.0), 1e-10, &cp).unwrap();
        assert!(detect_period(&tr).is_none());
        let cp = CylinderParams { a: -1.0, b: 0.3, p: 3.0, n: 3 };
        let tr = integrate(PhaseState::new(0.4, 0.0).unwrap(), (0.0, 40.0), 1e-10, &cp).unwrap();
        assert!(detect_period(&tr).is_none());
    }

    #[test]
    fn converges_to_c0() {
        let cp = CylinderParams { a: -1.0, b: 2.0, p: 3.0, n: 3 };
        let opts = IntegrateOptions { tol: 1e-13, atol: Some(1e-16), ..Default::default() };
        let tr = integrate_with(PhaseState::new(1.2, 0.0).unwrap(), (0.0, 24.0), &opts, &cp).unwrap();
        let class = classify_asymptotics(&tr, &cp, &FitConfig::default()).unwrap();
        match class {
            AsymptoticClass::ConstantLimit { c0, fit, predicted } => {
                assert_eq!(c0, 1.0);
                let alpha0 = predicted.unwrap().rate;
                assert!((fit.unwrap().gamma / alpha0 - 1.0).abs() < 0.05);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn periodic_limit_and_translation() {
        let cp = CylinderParams { a: -1.0, b: 0.0, p: 3.0, n: 3 };
        let (bm, _) = turning_points(-0.3, &cp).unwrap();
        let tr = integrate(PhaseState::new(bm, 0.0).unwrap(), (0.0, 60.0), 1e-12, &cp).unwrap();
        let c1 = classify_asymptotics(&tr, &cp, &FitConfig::default()).unwrap();
        assert_eq!(c1.tag(), "PeriodicLimit");
        let c2 = classify_asymptotics(&tr.tail_from(7.3), &cp, &FitConfig::default()).unwrap();
        assert_eq!(c2.tag(), "PeriodicLimit");
    }

    #[test]
    fn hitting_zero_is_undetermined() {
        let cp_i = CylinderParams { a: -1.0, b: 0.0, p: 3.0, n: 3 };
        let tr = integrate(PhaseState::new(0.5, -1.0).unwrap(), (0.0, 50.0), 1e-10, &cp_i).unwrap();
        let c = classify_asymptotics(&tr, &cp_i, &FitConfig::default()).unwrap();
        assert_eq!(c.tag(), "Undetermined");
    }
}
