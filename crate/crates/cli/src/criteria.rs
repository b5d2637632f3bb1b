//! The acceptance criteria run by `cylas verify` and the `acceptance` test target.

use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use anyhow::{bail, Result};
use cylas_core::fitter::{classify_asymptotics, AsymptoticClass, FitConfig, RateFit};
use cylas_core::ode::energy::dissipation;
use cylas_core::ode::{
    energy_along, h_min, homoclinic_state, integrate_with, linearized_roots_at_c0, orbit_period,
    predicted_decay, return_period, stable_manifold_state, turning_points, DecayBranch,
    IntegrateOptions, PhaseState, Termination, Trajectory,
};
use cylas_core::params::{check_admissible, to_ball, to_cylinder};
use cylas_core::pde::{
    averaged_residual, cross_residual, initial_guess, laplace_beltrami_axisym, newton_solve,
    spherical_average, symmetry_rate, CylGrid, FarCondition, NewtonOptions, SymmetryConfig,
    SymmetryOutcome,
};
use cylas_core::singularity::{
    bubble, bubble_residual, check_symmetry_condition, classify_singularity,
    exponent_identity_gap, kelvin, KelvinSpec, VerdictClass,
};
use cylas_core::{BallParams, CylinderParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::{usage, RunConfig};

pub const COUNT: u32 = 12;

#[derive(Debug, Clone)]
pub struct VerifyConfig {
    pub seed: u64,
    /// Overrides the ODE tolerance of every criterion that integrates.
    pub tol: Option<f64>,
    /// Scratch space for the determinism check.
    pub scratch: PathBuf,
}

impl VerifyConfig {
    pub fn new(scratch: impl Into<PathBuf>) -> Self {
        Self { seed: 1, tol: None, scratch: scratch.into() }
    }

    fn tol(&self, default: f64) -> f64 {
        self.tol.unwrap_or(default)
    }

    fn rng(&self, id: u32) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed.wrapping_mul(1000).wrapping_add(id as u64))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bound {
    AtMost(f64),
    AtLeast(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub value: f64,
    pub bound: Bound,
}

impl Check {
    pub fn at_most(name: &'static str, value: f64, limit: f64) -> Self {
        Self { name, value, bound: Bound::AtMost(limit) }
    }

    pub fn at_least(name: &'static str, value: f64, limit: f64) -> Self {
        Self { name, value, bound: Bound::AtLeast(limit) }
    }

    pub fn pass(&self) -> bool {
        match self.bound {
            Bound::AtMost(l) => self.value <= l,
            Bound::AtLeast(l) => self.value >= l,
        }
    }

    pub fn threshold(&self) -> f64 {
        match self.bound {
            Bound::AtMost(l) | Bound::AtLeast(l) => l,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub id: u32,
    pub name: &'static str,
    pub checks: Vec<Check>,
    /// Set when the criterion could not be evaluated.
    pub error: Option<String>,
    pub elapsed: Duration,
    pub budget: Duration,
}

impl Outcome {
    pub fn checks_pass(&self) -> bool {
        self.error.is_none() && !self.checks.is_empty() && self.checks.iter().all(Check::pass)
    }

    pub fn within_budget(&self) -> bool {
        self.elapsed <= self.budget
    }

    pub fn pass(&self) -> bool {
        self.checks_pass() && self.within_budget()
    }

    pub fn line(&self) -> String {
        let mut s = format!(
            "criterion {:>2} {:<22} {}  ({:.2} s, budget {} s)",
            self.id,
            self.name,
            if self.pass() { "PASS" } else { "FAIL" },
            self.elapsed.as_secs_f64(),
            self.budget.as_secs()
        );
        if let Some(e) = &self.error {
            s.push_str(&format!("  error: {e}"));
        }
        for c in &self.checks {
            let (op, l) = match c.bound {
                Bound::AtMost(l) => ("<=", l),
                Bound::AtLeast(l) => (">=", l),
            };
            let mark = if c.pass() { "" } else { " !" };
            s.push_str(&format!("  {}={:.4e} {op} {:.1e}{mark}", c.name, c.value, l));
        }
        s
    }
}

pub fn name(id: u32) -> &'static str {
    match id {
        1 => "chart-equivalence",
        2 => "energy-structure",
        3 => "closed-form-homoclinic",
        4 => "period-duality",
        5 => "decay-taxonomy",
        6 => "orbit-stability",
        7 => "pde-symmetrization",
        8 => "laplace-beltrami-eigen",
        9 => "bubble-and-kelvin",
        10 => "exponent-identity",
        11 => "symmetry-condition",
        12 => "determinism",
        _ => "unknown",
    }
}

pub fn budget(id: u32) -> Duration {
    Duration::from_secs(match id {
        1 | 3 | 8 | 9 | 10 => 1,
        6 | 11 => 5,
        2 | 4 => 10,
        5 => 30,
        7 => 60,
        _ => 120,
    })
}

/// Criterion numbers selected by `--only`: numbers or module names.
pub fn select(only: Option<&str>) -> Result<Vec<u32>> {
    let Some(list) = only else {
        return Ok((1..=COUNT).collect());
    };
    let mut ids = Vec::new();
    for tok in list.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        let add: &[u32] = match tok {
            "params" => &[1],
            "ode" => &[2, 3, 4, 5, 6],
            "fitter" => &[5],
            "pde" => &[7, 8],
            "singularity" => &[9, 10, 11],
            "cli" => &[12],
            _ => match tok.parse::<u32>() {
                Ok(k) if (1..=COUNT).contains(&k) => {
                    ids.push(k);
                    &[]
                }
                _ => return usage(format!("--only: unknown criterion {tok:?}")),
            },
        };
        ids.extend_from_slice(add);
    }
    ids.sort_unstable();
    ids.dedup();
    Ok(ids)
}

pub fn run(id: u32, cfg: &VerifyConfig) -> Outcome {
    let start = Instant::now();
    let res = match id {
        1 => chart_equivalence(cfg),
        2 => energy_structure(cfg),
        3 => closed_form_homoclinic(cfg),
        4 => period_duality(cfg),
        5 => decay_taxonomy(cfg),
        6 => stability(cfg),
        7 => pde_symmetrization(cfg),
        8 => eigen_check(cfg),
        9 => bubble_and_kelvin(cfg),
        10 => exponent_identity(cfg),
        11 => symmetry_condition(cfg),
        12 => determinism(cfg),
        _ => Err(anyhow::anyhow!("no criterion {id}")),
    };
    let (checks, error) = match res {
        Ok(c) => (c, None),
        Err(e) => (Vec::new(), Some(format!("{e:#}"))),
    };
    Outcome {
        id,
        name: name(id),
        checks,
        error,
        elapsed: start.elapsed(),
        budget: budget(id),
    }
}

fn rel(x: f64, y: f64) -> f64 {
    (x - y).abs() / y.abs().max(1.0)
}

/// Random parameter tuple with `b ≥ 0` and `p − 1 ≥ (p* − 1)/10`; roughly
/// half of the draws violate one of the quantitative clauses.
fn draw_params(rng: &mut ChaCha8Rng) -> CylinderParams {
    let n = rng.gen_range(3..=8u32);
    let m = n as f64 - 2.0;
    let b = rng.gen_range(0.0..3.0);
    let a_lo = (b * b - m * m) / 4.0;
    let a = rng.gen_range(a_lo - 0.5..a_lo + 3.0);
    let span = 4.0 / (n as f64 + b - 2.0);
    let p = 1.0 + span * rng.gen_range(0.1..1.2);
    CylinderParams { a, b, p, n }
}

fn draw_admissible(rng: &mut ChaCha8Rng) -> CylinderParams {
    loop {
        let cp = draw_params(rng);
        if check_admissible(&cp).pass() {
            return cp;
        }
    }
}

fn chart_equivalence(cfg: &VerifyConfig) -> Result<Vec<Check>> {
    let mut rng = cfg.rng(1);
    let (mut mismatches, mut admissible) = (0usize, 0usize);
    let mut worst: f64 = 0.0;
    while admissible < 10_000 {
        let cp = draw_params(&mut rng);
        let rep = check_admissible(&cp);
        if rep.pass() != rep.ball_pass() {
            mismatches += 1;
        }
        if rep.pass() {
            admissible += 1;
            let back = to_cylinder(&to_ball(&cp));
            worst = worst.max(rel(back.a, cp.a)).max(rel(back.b, cp.b)).max(rel(back.p, cp.p));
        }
    }
    Ok(vec![
        Check::at_most("clause_mismatches", mismatches as f64, 0.0),
        Check::at_most("round_trip_rel", worst, 1e-14),
    ])
}

fn opts(tol: f64, atol: Option<f64>, sample_dt: Option<f64>) -> IntegrateOptions {
    IntegrateOptions { atol, sample_dt, ..IntegrateOptions::with_tol(tol) }
}

fn energy_structure(cfg: &VerifyConfig) -> Result<Vec<Check>> {
    let mut rng = cfg.rng(2);
    let tol = cfg.tol(1e-10);
    let mut drift: f64 = 0.0;
    for _ in 0..50 {
        let cp = CylinderParams { a: rng.gen_range(-2.0..-0.2), b: 0.0, p: rng.gen_range(1.5..5.0), n: 3 };
        let h0 = rng.gen_range(0.05..0.95) * h_min(&cp)?;
        let (lo, _) = turning_points(h0, &cp)?;
        let tr = integrate_with(PhaseState::new(lo, 0.0)?, (0.0, 100.0), &opts(tol, Some(tol * 1e-4), None), &cp)?;
        if tr.termination != Termination::ReachedEnd {
            bail!("regime I orbit ended with {}", tr.termination.as_str());
        }
        let h = energy_along(&tr);
        drift = h.iter().map(|x| (x.1 - h[0].1).abs()).fold(drift, f64::max);
    }
    let (mut increase, mut gap): (f64, f64) = (f64::NEG_INFINITY, 0.0);
    for _ in 0..50 {
        let cp = CylinderParams {
            a: rng.gen_range(-2.0..-0.2),
            b: rng.gen_range(0.2..2.0),
            p: rng.gen_range(1.5..5.0),
            n: 3,
        };
        let s0 = PhaseState::new(rng.gen_range(0.1..2.0), rng.gen_range(-0.5..0.5))?;
        let tr = integrate_with(s0, (0.0, 20.0), &opts(tol, Some(tol * 1e-4), Some(5e-4)), &cp)?;
        let d = dissipation(&tr);
        increase = increase.max(d.max_increase);
        gap = gap.max(d.relative_gap());
    }
    Ok(vec![
        Check::at_most("regime_I_sup_dH", drift, 1e-8),
        Check::at_most("regime_II_max_increase", increase, 1e-10),
        Check::at_most("regime_II_dissipation_gap", gap, 1e-6),
    ])
}

fn closed_form_homoclinic(cfg: &VerifyConfig) -> Result<Vec<Check>> {
    let mut rng = cfg.rng(3);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let cp = CylinderParams { a: rng.gen_range(-3.0..-0.1), b: 0.0, p: rng.gen_range(1.2..6.0), n: 3 };
        let lambda = rng.gen_range(0.2..5.0);
        let rate = 0.5 * (cp.p - 1.0) * (-cp.a).sqrt();
        let m = 2.0 / (cp.p - 1.0);
        for k in 0..=400 {
            let t = -10.0 + 20.0 * k as f64 / 400.0;
            let s = homoclinic_state(t, lambda, &cp)?;
            // ψ' = −m·rate·ψ·tanh(shift) differentiated once more
            let shift = rate * t + lambda.ln();
            let th = shift.tanh();
            let d2 = -m * rate * (s.dpsi * th + s.psi * rate * (1.0 - th * th));
            let res = d2 + cp.a * s.psi + s.psi.powf(cp.p);
            let scale = (cp.a * s.psi).abs().max(s.psi.powf(cp.p)).max(1.0);
            worst = worst.max(res.abs() / scale);
        }
    }
    let cp = CylinderParams { a: -1.0, b: 0.0, p: 3.0, n: 3 };
    let mut sech: f64 = 0.0;
    for k in 0..=400 {
        let t = -10.0 + 20.0 * k as f64 / 400.0;
        let psi = homoclinic_state(t, 1.0, &cp)?.psi;
        sech = sech.max((psi - 2f64.sqrt() / t.cosh()).abs());
    }
    Ok(vec![
        Check::at_most("ode_residual", worst, 1e-9),
        Check::at_most("sqrt2_sech_error", sech, 1e-12),
    ])
}

fn period_duality(cfg: &VerifyConfig) -> Result<Vec<Check>> {
    let mut rng = cfg.rng(4);
    let tol = cfg.tol(1e-12);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let cp = CylinderParams { a: rng.gen_range(-2.0..-0.5), b: 0.0, p: rng.gen_range(2.0..4.0), n: 3 };
        let h0 = rng.gen_range(0.05..0.95) * h_min(&cp)?;
        let q = orbit_period(h0, &cp)?.period;
        let r = return_period(h0, &cp, tol)?;
        worst = worst.max((q - r).abs() / q);
    }
    let cp = CylinderParams { a: -1.0, b: 0.0, p: 3.0, n: 3 };
    let near = orbit_period(h_min(&cp)? * (1.0 - 1e-6), &cp)?.period;
    let small = 2.0 * std::f64::consts::PI / ((-cp.a) * (cp.p - 1.0)).sqrt();
    Ok(vec![
        Check::at_most("quadrature_vs_return", worst, 1e-6),
        Check::at_most("small_oscillation_rel", (near - small).abs() / small, 0.01),
    ])
}

fn tail(cp: &CylinderParams, s0: PhaseState, horizon: f64, tol: f64, atol: f64) -> Result<(Trajectory, AsymptoticClass)> {
    let tr = integrate_with(s0, (0.0, horizon), &opts(tol, Some(atol), None), cp)?;
    let cls = classify_asymptotics(&tr, cp, &FitConfig::default())?;
    Ok((tr, cls))
}

fn fitted(cls: &AsymptoticClass, want: &str) -> Result<RateFit> {
    let fit = match cls {
        AsymptoticClass::FastDecay { fit, .. } if want == "FastDecay" => Some(*fit),
        AsymptoticClass::ConstantLimit { fit, .. } if want == "ConstantLimit" => *fit,
        _ => None,
    };
    fit.ok_or_else(|| anyhow::anyhow!("expected {want}, got {}", cls.tag()))
}

fn decay_taxonomy(cfg: &VerifyConfig) -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    // case I: along the homoclinic orbit
    let cp = CylinderParams { a: -1.0, b: 0.0, p: 3.0, n: 3 };
    let (_, cls) = tail(&cp, homoclinic_state(8.0, 1.0, &cp)?, 12.0, cfg.tol(1e-12), 1e-30)?;
    let want = predicted_decay(DecayBranch::IDecay, &cp)?.rate;
    checks.push(Check::at_most("I_decay_rel", (fitted(&cls, "FastDecay")?.gamma / want - 1.0).abs(), 0.02));
    // case II, decay to 0 along the stable manifold
    let cp = CylinderParams { a: -1.0, b: 1.0, p: 3.0, n: 3 };
    let (_, cls) = tail(&cp, stable_manifold_state(0.5, &cp)?, 12.0, cfg.tol(1e-12), 1e-30)?;
    let want = predicted_decay(DecayBranch::IIDecay, &cp)?.rate;
    checks.push(Check::at_most("II_decay_rel", (fitted(&cls, "FastDecay")?.gamma / want - 1.0).abs(), 0.02));
    // case II, oscillatory convergence to c₀
    let (_, cls) = tail(&cp, PhaseState::new(1.2, 0.0)?, 40.0, cfg.tol(1e-13), 1e-16)?;
    let want = predicted_decay(DecayBranch::IIConverge, &cp)?.rate;
    checks.push(Check::at_most("II_converge_rel", (fitted(&cls, "ConstantLimit")?.gamma / want - 1.0).abs(), 0.05));
    // μ₂ = −1 configuration
    let cp = CylinderParams { a: -1.0, b: 3.0, p: 3.0, n: 3 };
    let roots = linearized_roots_at_c0(&cp)?;
    let pred = predicted_decay(DecayBranch::IIConverge, &cp)?;
    checks.push(Check::at_most("mu2_plus_one", (roots.mu2 + 1.0).abs(), 1e-12));
    checks.push(Check::at_least("resonant_t_power", pred.t_power as f64, 1.0));
    let (_, cls) = tail(&cp, PhaseState::new(1.2, 0.0)?, 24.0, cfg.tol(1e-13), 1e-16)?;
    checks.push(Check::at_most("resonant_rate_rel", (fitted(&cls, "ConstantLimit")?.gamma / pred.rate - 1.0).abs(), 0.05));
    Ok(checks)
}

fn stability(cfg: &VerifyConfig) -> Result<Vec<Check>> {
    let mut rng = cfg.rng(6);
    let tol = cfg.tol(1e-12);
    let (eps, horizon, dt) = (1e-8, 5.0, 0.01);
    let mut worst: f64 = 0.0;
    let (mut done, mut tries) = (0, 0);
    while done < 20 {
        tries += 1;
        if tries > 500 {
            bail!("could not draw 20 orbits that stay positive on [0, {horizon}]");
        }
        let b = if done % 2 == 0 { 0.0 } else { rng.gen_range(0.2..2.0) };
        let cp = CylinderParams { a: rng.gen_range(-2.0..-0.2), b, p: rng.gen_range(1.5..4.0), n: 3 };
        let (psi, dpsi) = (rng.gen_range(0.2..1.5), rng.gen_range(-0.3..0.3));
        let o = opts(tol, Some(1e-20), Some(dt));
        let t1 = integrate_with(PhaseState::new(psi, dpsi)?, (0.0, horizon), &o, &cp)?;
        let t2 = integrate_with(PhaseState::new(psi + eps, dpsi)?, (0.0, horizon), &o, &cp)?;
        if t1.termination != Termination::ReachedEnd || t2.termination != Termination::ReachedEnd || t1.len() != t2.len() {
            continue;
        }
        // C₀ bounds the matrix of the difference system [[0, 1], [−a−A(t), −b]]
        let q = cp.p - 1.0;
        let mut c0: f64 = 0.0;
        for (s1, s2) in t1.states.iter().zip(&t2.states) {
            for v in [s1.psi, s2.psi] {
                c0 = c0.max((-cp.a - cp.p * v.powf(q)).abs());
            }
        }
        let c0 = c0 + 1.0 + cp.b;
        let sep0 = (t2.states[0].psi - t1.states[0].psi).hypot(t2.states[0].dpsi - t1.states[0].dpsi);
        for ((t, s1), s2) in t1.times.iter().zip(&t1.states).zip(&t2.states).skip(1) {
            let sep = (s1.psi - s2.psi).hypot(s1.dpsi - s2.dpsi);
            worst = worst.max(sep / (sep0 * (c0 * t).exp()));
        }
        done += 1;
    }
    Ok(vec![Check::at_most("separation_over_bound", worst, 1.0)])
}

pub const PDE_GRID: (usize, usize) = (64, 400);

fn pde_symmetrization(_cfg: &VerifyConfig) -> Result<Vec<Check>> {
    let cp = CylinderParams { a: -1.0, b: 2.0, p: 3.0, n: 3 };
    let c0 = cp.c0().expect("a < 0");
    let boundary = |th: f64| c0 * (1.0 + 0.1 * th.cos());
    let far = FarCondition::for_params(&cp)?;
    let grid = CylGrid::new(PDE_GRID.0, PDE_GRID.1, 20.0, cp.n)?;
    let newton = NewtonOptions { tol: 1e-10, ..Default::default() };
    let (field, rep) = newton_solve(initial_guess(&grid, &cp, boundary, &far), &far, &newton)?;
    let prof = spherical_average(&field);
    let fit = match symmetry_rate(&prof, &SymmetryConfig::default())? {
        SymmetryOutcome::Rate(f) => f,
        SymmetryOutcome::ExactlySymmetric => bail!("non-radial data reported as exactly symmetric"),
    };
    let identity = averaged_residual(&prof, &field)
        .iter()
        .map(|r| (r.lhs - r.rhs).abs())
        .fold(0.0, f64::max);
    let coarse = cross_residual(&field, &far)?;
    let mut fine_guess = field.refine()?;
    fine_guess.set_boundary(boundary);
    let (fine, _) = newton_solve(fine_guess, &far, &newton)?;
    let ratio = coarse / cross_residual(&fine, &far)?;
    Ok(vec![
        Check::at_most("newton_residual", if rep.converged { rep.residual } else { f64::INFINITY }, 1e-9),
        Check::at_most("newton_iterations", rep.iterations as f64, 15.0),
        Check::at_least("defect_rate", fit.gamma, 0.9),
        Check::at_least("defect_r2", fit.r2, 0.98),
        // ten times the Newton tolerance
        Check::at_most("averaged_identity", identity, 1e-8),
        Check::at_least("cross_residual_ratio", ratio, 3.5),
    ])
}

/// Rayleigh quotient of the discrete operator on `cos θ`.
fn first_eigenvalue(m: usize, n: u32) -> Result<f64> {
    let g = CylGrid::new(m, 64, 1.0, n)?;
    let u: Vec<f64> = g.theta().iter().map(|t| t.cos()).collect();
    let lu = laplace_beltrami_axisym(&u, &g);
    let num: f64 = u.iter().zip(&lu).zip(g.weights()).map(|((a, b), w)| a * b * w).sum();
    let den: f64 = u.iter().zip(g.weights()).map(|(a, w)| a * a * w).sum();
    Ok(num / den)
}

fn eigen_check(_cfg: &VerifyConfig) -> Result<Vec<Check>> {
    let (mut err, mut order) = (0.0f64, f64::INFINITY);
    for n in [3, 4, 5] {
        let ev = -(n as f64 - 1.0);
        let e: Vec<f64> = [33, 65, 129]
            .iter()
            .map(|&m| first_eigenvalue(m, n).map(|l| (l - ev).abs()))
            .collect::<Result<_>>()?;
        err = err.max(e[1]);
        order = order.min((e[0] / e[1]).log2()).min((e[1] / e[2]).log2());
    }
    Ok(vec![
        Check::at_most("eigenvalue_error_65", err, 1e-2),
        Check::at_least("convergence_order", order, 1.8),
    ])
}

fn bubble_and_kelvin(cfg: &VerifyConfig) -> Result<Vec<Check>> {
    let (mut e1, mut order) = (0.0f64, f64::INFINITY);
    for n in [3, 4, 5] {
        let worst = |h: f64| {
            (0..100)
                .map(|k| 0.1 + 9.9 * k as f64 / 99.0)
                .map(|r| bubble_residual(r, h, n).abs())
                .fold(0.0, f64::max)
        };
        let (a, b) = (worst(1e-3), worst(5e-4));
        e1 = e1.max(a);
        order = order.min((a / b).log2());
    }
    let mut rng = cfg.rng(9);
    let mut inv: f64 = 0.0;
    for _ in 0..1000 {
        let n = rng.gen_range(3..=5usize);
        let center: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let spec = KelvinSpec::new(center.clone(), rng.gen_range(0.2..2.0))?;
        let x: Vec<f64> = loop {
            let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-4.0..4.0)).collect();
            let d: f64 = x.iter().zip(&center).map(|(a, b)| (a - b) * (a - b)).sum();
            if d > 1e-4 {
                break x;
            }
        };
        let w = |y: &[f64]| bubble(y, n as u32).expect("n >= 3") * (1.0 + 0.1 * y[0].sin());
        let twice = kelvin(|y: &[f64]| kelvin(w, &spec, y).expect("y != x0"), &spec, &x)?;
        inv = inv.max((twice / w(&x) - 1.0).abs());
    }
    Ok(vec![
        Check::at_most("bubble_residual_h1e-3", e1, 1e-4),
        Check::at_least("bubble_fd_order", order, 1.8),
        Check::at_most("kelvin_involution_rel", inv, 1e-12),
    ])
}

fn exponent_identity(cfg: &VerifyConfig) -> Result<Vec<Check>> {
    let mut rng = cfg.rng(10);
    let mut worst: f64 = 0.0;
    for _ in 0..10_000 {
        worst = worst.max(exponent_identity_gap(&draw_admissible(&mut rng)).abs());
    }
    let fast = AsymptoticClass::FastDecay {
        fit: RateFit { gamma: 1.0, c: 1.0, r2: 1.0, window: (0.0, 1.0), points: 10, envelope: false },
        predicted: None,
    };
    let constant = AsymptoticClass::ConstantLimit { c0: 1.0, fit: None, predicted: None };
    let mut wrong = 0.0;
    // c = 0: removable
    let v = classify_singularity(&CylinderParams { a: -0.25, b: 0.0, p: 5.0, n: 3 }, &fast)?;
    if v.class != VerdictClass::RemovableSmooth {
        wrong += 1.0;
    }
    // 0 < c < (n−2)²/4: H1-unbounded
    let cp = CylinderParams { a: -1.0, b: 0.0, p: 1.3, n: 5 };
    let v = classify_singularity(&cp, &fast)?;
    let q = (3.0 - (-4.0 * cp.a).sqrt()) / 2.0;
    if v.class != VerdictClass::H1Unbounded || (v.exponent - q).abs() > 1e-14 || !v.h1loc {
        wrong += 1.0;
    }
    // constant limit: exponent (2−σ)/(p−1)
    let cp = CylinderParams { a: -1.0, b: 1.0, p: 1.5, n: 5 };
    let v = classify_singularity(&cp, &constant)?;
    let bp = to_ball(&cp);
    if v.class != VerdictClass::NonRemovableRate || (v.exponent - (2.0 - bp.sigma) / (cp.p - 1.0)).abs() > 1e-14 {
        wrong += 1.0;
    }
    Ok(vec![
        Check::at_most("identity_gap", worst, 1e-12),
        Check::at_most("wrong_verdicts", wrong, 0.0),
    ])
}

fn symmetry_condition(cfg: &VerifyConfig) -> Result<Vec<Check>> {
    let mut rng = cfg.rng(11);
    let (mut failures, mut worst) = (0.0, 0.0f64);
    for k in 0..100 {
        let n = rng.gen_range(3..=7u32);
        let m = n as f64 - 2.0;
        let sigma = rng.gen_range(0.0..1.99);
        let bound = (n as f64 + 2.0 - 2.0 * sigma) / m;
        let bp = BallParams {
            c: rng.gen_range(0.0..1.5 * m * m / 4.0),
            sigma,
            p: 1.0 + (bound - 1.0) * rng.gen_range(0.01..=1.0),
            n,
        };
        let chk = check_symmetry_condition(&bp, 100, cfg.seed.wrapping_add(k));
        if !chk.admissible {
            bail!("drew inadmissible {bp:?}");
        }
        if !chk.pass() {
            failures += 1.0;
        }
        worst = worst.max(chk.worst_ratio);
    }
    Ok(vec![
        Check::at_most("failing_parameter_sets", failures, 0.0),
        Check::at_most("worst_lhs_over_rhs", worst, 1.0 + 1e-12),
    ])
}

/// Commands whose CSV outputs are compared across two runs.
fn determinism_runs(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let input = dir.join("decay-input.csv");
    let mut t = cylas_core::io::Table::new(["t", "v"]);
    for k in 0..200 {
        let x = 0.05 * k as f64;
        t.push(vec![x, 3.0 * (-2.0 * x).exp()]);
    }
    std::fs::write(&input, t.to_csv())?;
    let out = dir.display().to_string();
    let input = input.display().to_string();
    let runs: Vec<(&str, Vec<(&str, &str)>)> = vec![
        ("integrate", vec![("a", "-1"), ("b", "1"), ("p", "3"), ("n", "3"), ("t_max", "20")]),
        ("period", vec![("a", "-1"), ("b", "0"), ("p", "3"), ("n", "3"), ("h0", "-0.4,-0.2")]),
        ("portrait", vec![("a", "-1"), ("p", "3"), ("n", "3"), ("levels", "-0.5,-0.25,0,0.25")]),
        ("fit", vec![("input", input.as_str())]),
        ("pde", vec![("a", "-1"), ("b", "2"), ("p", "3"), ("n", "3"), ("n_theta", "24"), ("n_t", "100"), ("t_max", "8")]),
        ("singularity", vec![("a", "-1"), ("b", "0"), ("p", "1.5"), ("n", "5"), ("samples", "500")]),
    ];
    for (cmd, pairs) in runs {
        let mut rc = RunConfig::from_pairs(pairs);
        rc.set("out", out.clone());
        let code = crate::quietly(|| crate::dispatch(cmd, &rc))?;
        if code != 0 {
            bail!("{cmd} exited with {code}");
        }
    }
    Ok(())
}

fn csv_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for entry in std::fs::read_dir(dir)? {
        let p = entry?.path();
        if p.is_dir() {
            out.extend(csv_files(&p)?);
        } else if p.extension().is_some_and(|e| e == "csv") {
            out.push(p);
        }
    }
    out.sort();
    Ok(out)
}

/// Paths of CSV files that differ between two output trees.
pub fn compare_csv_trees(a: &Path, b: &Path) -> Result<(usize, Vec<PathBuf>)> {
    let fa = csv_files(a)?;
    let mut differ = Vec::new();
    for p in &fa {
        let rel = p.strip_prefix(a)?;
        let q = b.join(rel);
        if !q.exists() || std::fs::read(p)? != std::fs::read(&q)? {
            differ.push(rel.to_path_buf());
        }
    }
    if csv_files(b)?.len() != fa.len() {
        differ.push(PathBuf::from("<file count>"));
    }
    Ok((fa.len(), differ))
}

fn determinism(cfg: &VerifyConfig) -> Result<Vec<Check>> {
    let root = cfg.scratch.join("determinism");
    let (r1, r2) = (root.join("run1"), root.join("run2"));
    for r in [&r1, &r2] {
        if r.exists() {
            std::fs::remove_dir_all(r)?;
        }
        determinism_runs(r)?;
    }
    let (count, differ) = compare_csv_trees(&r1, &r2)?;
    if count == 0 {
        bail!("no CSV outputs produced");
    }
    Ok(vec![
        Check::at_least("csv_files", count as f64, 1.0),
        Check::at_most("differing_csv_files", differ.len() as f64, 0.0),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn selection() {
        assert_eq!(select(None).unwrap().len(), 12);
        assert_eq!(select(Some("ode")).unwrap(), vec![2, 3, 4, 5, 6]);
        assert_eq!(select(Some("7, pde,1")).unwrap(), vec![1, 7, 8]);
        assert!(select(Some("13")).is_err());
        assert!(select(Some("physics")).is_err());
    }

    #[test]
    fn checks_and_lines() {
        let o = Outcome {
            id: 3,
            name: name(3),
            checks: vec![Check::at_most("x", 0.5, 1.0), Check::at_least("y", 2.0, 1.0)],
            error: None,
            elapsed: Duration::from_millis(10),
            budget: budget(3),
        };
        assert!(o.pass());
        assert!(o.line().contains("PASS"));
        let bad = Outcome { checks: vec![Check::at_most("x", 2.0, 1.0)], ..o.clone() };
        assert!(!bad.pass() && bad.line().contains("FAIL"));
        let slow = Outcome { elapsed: Duration::from_secs(5), ..o };
        assert!(slow.checks_pass() && !slow.pass());
    }

    #[test]
    fn invalid_tolerance_fails_integrating_criteria() {
        let cfg = VerifyConfig { tol: Some(1e-14), ..VerifyConfig::new(std::env::temp_dir()) };
        let o = run(3, &cfg);
        assert!(o.pass(), "closed-form criterion does not integrate");
        let o = run(4, &cfg);
        assert!(!o.pass());
        assert!(o.error.unwrap().contains("tolerance"));
    }
}
