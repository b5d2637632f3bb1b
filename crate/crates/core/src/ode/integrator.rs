//! Dormand-Prince 5(4) integrator for planar systems with event location.
//!
//! Step control is a PI controller on the embedded error estimate. Two kinds of
//! events are located by bisection on re-taken steps: sign changes of the
//! second component (turning points of the first) and a terminal zero crossing
//! of the first component.

use crate::error::{Error, Result};

pub type State = [f64; 2];

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

// difference between the 5th and 4th order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    ReachedEnd,
    PsiHitZero,
    BlowUp,
    StepUnderflow,
}

impl Termination {
    pub fn as_str(&self) -> &'static str {
        match self {
            Termination::ReachedEnd => "reached_t_end",
            Termination::PsiHitZero => "psi_hit_zero",
            Termination::BlowUp => "blow_up",
            Termination::StepUnderflow => "step_underflow",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventKind {
    /// Second component crosses zero upwards.
    Min,
    /// Second component crosses zero downwards.
    Max,
    /// First component reaches zero (terminal).
    Zero,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Event {
    pub t: f64,
    pub state: State,
    pub kind: EventKind,
}

#[derive(Debug, Clone)]
pub struct SolverOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Record states on this uniform grid instead of at every accepted step.
    pub sample_dt: Option<f64>,
    pub max_steps: usize,
    pub blowup: f64,
    pub min_step: f64,
    pub stop_at_zero: bool,
    pub detect_turns: bool,
    pub event_tol: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-10,
            sample_dt: None,
            max_steps: 50_000_000,
            blowup: 1e12,
            min_step: 1e-14,
            stop_at_zero: true,
            detect_turns: true,
            event_tol: 1e-12,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct Stats {
    pub rhs_evals: u64,
    pub accepted: u64,
    pub rejected: u64,
}

#[derive(Debug, Clone)]
pub struct Solution {
    pub times: Vec<f64>,
    pub states: Vec<State>,
    pub events: Vec<Event>,
    pub termination: Termination,
    pub stats: Stats,
}

struct Stepper<'a, F> {
    f: &'a F,
    evals: u64,
}

impl<F: Fn(f64, &State) -> State> Stepper<'_, F> {
    fn eval(&mut self, t: f64, y: &State) -> State {
        self.evals += 1;
        (self.f)(t, y)
    }

    /// One Dormand-Prince step from `(t, y)` with derivative `k1`.
    /// Returns the 5th-order solution, its derivative and the error vector.
    fn step(&mut self, t: f64, y: &State, k1: &State, h: f64) -> (State, State, State) {
        let comb = |c: &[(f64, &State)]| -> State {
            let mut out = *y;
            for i in 0..2 {
                let mut s = 0.0;
                for (w, k) in c {
                    s += w * k[i];
                }
                out[i] += h * s;
            }
            out
        };
        let k2 = self.eval(t + C2 * h, &comb(&[(A21, k1)]));
        let k3 = self.eval(t + C3 * h, &comb(&[(A31, k1), (A32, &k2)]));
        let k4 = self.eval(t + C4 * h, &comb(&[(A41, k1), (A42, &k2), (A43, &k3)]));
        let k5 = self.eval(
            t + C5 * h,
            &comb(&[(A51, k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
        );
        let k6 = self.eval(
            t + h,
            &comb(&[(A61, k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
        );
        let y5 = comb(&[(A71, k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
        let k7 = self.eval(t + h, &y5);
        let mut err = [0.0; 2];
        for i in 0..2 {
            err[i] = h
                * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
        }
        (y5, k7, err)
    }

    /// Solution at `t + s` obtained by re-taking the step with size `s`.
    fn point(&mut self, t: f64, y: &State, k1: &State, s: f64) -> State {
        if s == 0.0 {
            return *y;
        }
        self.step(t, y, k1, s).0
    }

    /// Bisection for a sign change of component `comp` inside `(0, h)`.
    fn locate(&mut self, t: f64, y: &State, k1: &State, h: f64, comp: usize, tol: f64) -> (f64, State) {
        let sign0 = y[comp].signum();
        let (mut lo, mut hi) = (0.0, h);
        let mut y_hi = self.point(t, y, k1, h);
        while hi - lo > tol {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            let ym = self.point(t, y, k1, mid);
            if ym[comp] == 0.0 {
                return (mid, ym);
            }
            if ym[comp].signum() == sign0 {
                lo = mid;
            } else {
                hi = mid;
                y_hi = ym;
            }
        }
        (hi, y_hi)
    }
}

fn error_norm(err: &State, y0: &State, y1: &State, rtol: f64, atol: f64) -> f64 {
    let mut m: f64 = 0.0;
    for i in 0..2 {
        let sc = atol + rtol * y0[i].abs().max(y1[i].abs());
        m = m.max(err[i].abs() / sc);
    }
    m
}

/// Integrates `y' = f(t, y)` from `t0` to `t1 > t0`.
pub fn solve<F>(f: &F, t0: f64, y0: State, t1: f64, opts: &SolverOptions) -> Result<Solution>
where
    F: Fn(f64, &State) -> State,
{
    if !(opts.rtol > 0.0 && opts.atol > 0.0) {
        return Err(Error::InvalidTolerance(opts.rtol.min(opts.atol)));
    }
    if !(t0.is_finite() && t1.is_finite()) || t1 <= t0 {
        return Err(Error::OutOfRange(format!("time span [{t0}, {t1}]")));
    }
    if let Some(dt) = opts.sample_dt {
        if !(dt > 0.0) {
            return Err(Error::OutOfRange(format!("sample_dt = {dt}")));
        }
    }
    let mut st = Stepper { f, evals: 0 };
    let mut stats = Stats::default();
    let mut t = t0;
    let mut y = y0;
    let mut k1 = st.eval(t, &y);
    let mut times = vec![t0];
    let mut states = vec![y0];
    let mut events = Vec::new();

    let mut next_sample = opts.sample_dt.map(|dt| (1usize, dt));
    let sample_time = |i: usize, dt: f64| -> f64 { (t0 + i as f64 * dt).min(t1) };

    // initial step from the derivative scale
    let span = t1 - t0;
    let scale = y[0].abs().max(y[1].abs()).max(1e-6);
    let dscale = k1[0].abs().max(k1[1].abs()).max(1e-12);
    let mut h = (0.01 * scale / dscale).clamp(1e-8, 0.1).min(span);
    let mut err_prev: f64 = 1e-4;
    let mut termination = Termination::ReachedEnd;
    let mut steps = 0usize;

    while t < t1 {
        steps += 1;
        if steps > opts.max_steps {
            termination = Termination::StepUnderflow;
            break;
        }
        let mut target = t1;
        if let Some((i, dt)) = next_sample {
            target = sample_time(i, dt);
        }
        let h_try = h.min(target - t);
        let hits_target = h_try >= target - t;
        if h_try < opts.min_step * t.abs().max(1.0) && !hits_target {
            termination = Termination::StepUnderflow;
            break;
        }
        let (y_new, k_new, err) = st.step(t, &y, &k1, h_try);
        if !(y_new[0].is_finite() && y_new[1].is_finite()) {
            stats.rejected += 1;
            h = h_try * 0.2;
            if h < opts.min_step * t.abs().max(1.0) {
                termination = Termination::BlowUp;
                break;
            }
            continue;
        }
        let en = error_norm(&err, &y, &y_new, opts.rtol, opts.atol);
        if en > 1.0 {
            stats.rejected += 1;
            let fac = (0.9 * en.powf(-0.2)).clamp(0.1, 0.9);
            h = h_try * fac;
            if h < opts.min_step * t.abs().max(1.0) {
                termination = Termination::StepUnderflow;
                break;
            }
            continue;
        }
        stats.accepted += 1;

        // terminal zero crossing of the first component
        if opts.stop_at_zero && y[0] > 0.0 && y_new[0] <= 0.0 {
            let (s, mut ye) = if y_new[0] == 0.0 {
                (h_try, y_new)
            } else {
                st.locate(t, &y, &k1, h_try, 0, opts.event_tol)
            };
            if opts.detect_turns {
                record_turn(&mut st, &mut events, t, &y, &k1, s, &ye, opts.event_tol);
            }
            ye[0] = 0.0;
            let te = t + s;
            events.push(Event { t: te, state: ye, kind: EventKind::Zero });
            times.push(te);
            states.push(ye);
            termination = Termination::PsiHitZero;
            break;
        }
        if opts.detect_turns {
            record_turn(&mut st, &mut events, t, &y, &k1, h_try, &y_new, opts.event_tol);
        }

        let t_new = if hits_target { target } else { t + h_try };
        t = t_new;
        y = y_new;
        k1 = k_new;
        if let Some((i, _)) = next_sample.as_mut() {
            if hits_target {
                times.push(t);
                states.push(y);
                *i += 1;
            }
        } else {
            times.push(t);
            states.push(y);
        }
        if y[0].abs() > opts.blowup || y[1].abs() > opts.blowup {
            termination = Termination::BlowUp;
            if next_sample.is_some() && !hits_target {
                times.push(t);
                states.push(y);
            }
            break;
        }

        // PI step-size control; a shortened landing on a sample point keeps the
        // controller's step
        if !(hits_target && h_try < h) {
            let en = en.max(1e-10);
            let fac = (0.9 * en.powf(-0.17) * err_prev.powf(0.04)).clamp(0.2, 10.0);
            err_prev = en;
            h = h_try * fac;
        }
    }
    stats.rhs_evals = st.evals;
    Ok(Solution {
        times,
        states,
        events,
        termination,
        stats,
    })
}

#[allow(clippy::too_many_arguments)]
fn record_turn<F: Fn(f64, &State) -> State>(
    st: &mut Stepper<'_, F>,
    events: &mut Vec<Event>,
    t: f64,
    y: &State,
    k1: &State,
    h: f64,
    y_new: &State,
    tol: f64,
) {
    let before = y[1];
    let after = y_new[1];
    if before == 0.0 {
        return;
    }
    if after == 0.0 || before.signum() != after.signum() {
        let (s, ye) = if after == 0.0 {
            (h, *y_new)
        } else {
            st.locate(t, y, k1, h, 1, tol)
        };
        let kind = if before < 0.0 { EventKind::Min } else { EventKind::Max };
        events.push(Event { t: t + s, state: ye, kind });
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_oscillator() {
        let f = |_t: f64, y: &State| [y[1], -y[0]];
        let opts = SolverOptions {
            stop_at_zero: false,
            rtol: 1e-12,
            atol: 1e-12,
            ..Default::default()
        };
        let sol = solve(&f, 0.0, [1.0, 0.0], 10.0, &opts).unwrap();
        let y = sol.states.last().unwrap();
        assert!((y[0] - 10f64.cos()).abs() < 1e-9);
        assert!((y[1] + 10f64.sin()).abs() < 1e-9);
        // turning points of cos at kπ
        let turns: Vec<_> = sol.events.iter().map(|e| e.t).collect();
        assert_eq!(turns.len(), 3);
        for (k, t) in turns.iter().enumerate() {
            assert!((t - (k + 1) as f64 * std::f64::consts::PI).abs() < 1e-10);
        }
        assert_eq!(sol.events[0].kind, EventKind::Min);
    }

    #[test]
    fn zero_crossing_is_terminal() {
        let f = |_t: f64, y: &State| [y[1], -y[0]];
        let sol = solve(&f, 0.0, [1.0, 0.0], 10.0, &SolverOptions::default()).unwrap();
        assert_eq!(sol.termination, Termination::PsiHitZero);
        let t = *sol.times.last().unwrap();
        assert!((t - std::f64::consts::FRAC_PI_2).abs() < 1e-10);
        assert_eq!(sol.states.last().unwrap()[0], 0.0);
    }

    #[test]
    fn sampling_grid() {
        let f = |_t: f64, y: &State| [-y[0], 0.0];
        let opts = SolverOptions {
            sample_dt: Some(0.25),
            ..Default::default()
        };
        let sol = solve(&f, 0.0, [1.0, 1.0], 2.0, &opts).unwrap();
        assert_eq!(sol.times.len(), 9);
        for (i, t) in sol.times.iter().enumerate() {
            assert!((t - 0.25 * i as f64).abs() < 1e-15);
            assert!((sol.states[i][0] - (-t).exp()).abs() < 1e-9);
        }
    }

    #[test]
    fn blow_up_detected() {
        // y' = y², y(0) = 1 blows up at t = 1
        let f = |_t: f64, y: &State| [y[0] * y[0], 0.0];
        let sol = solve(&f, 0.0, [1.0, 0.0], 2.0, &SolverOptions::default()).unwrap();
        assert!(matches!(
            sol.termination,
            Termination::BlowUp | Termination::StepUnderflow
        ));
        assert!(*sol.times.last().unwrap() < 1.0);
    }
}
