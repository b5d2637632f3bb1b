use std::fmt::Write;

use anyhow::{Context, Result};
use cylas_core::fitter::{classify_asymptotics, fit_rate, AsymptoticClass, FitConfig};
use cylas_core::io::{fmt_real, Table};
use cylas_core::ode::{
    hamiltonian, integrate_with, orbit_period, return_period, EventKind, IntegrateOptions,
    PhaseState,
};

use super::Run;
use crate::config::{usage, RunConfig};
use crate::output::kv_csv;
use crate::svg::{Plot, Series, Shape};

pub const PERIOD_AGREEMENT: f64 = 1e-6;

pub(crate) fn describe_class(cls: &AsymptoticClass) -> String {
    match cls {
        AsymptoticClass::FastDecay { fit, predicted } => format!(
            "FastDecay: fitted rate {} (r2 {}), predicted {}",
            fit.gamma,
            fit.r2,
            predicted.map_or("n/a".into(), |p| p.rate.to_string())
        ),
        AsymptoticClass::PeriodicLimit { period, beta_minus, beta_plus, phase_shift } => format!(
            "PeriodicLimit: period {period}, range [{beta_minus}, {beta_plus}], phase {phase_shift}"
        ),
        AsymptoticClass::ConstantLimit { c0, fit, predicted } => format!(
            "ConstantLimit: c0 = {c0}, fitted rate {}, predicted {}",
            fit.map_or("n/a".into(), |f| f.gamma.to_string()),
            predicted.map_or("n/a".into(), |p| format!("{} (t^{})", p.rate, p.t_power))
        ),
        AsymptoticClass::RegimeIIIDecay { fit, bracket, contained } => format!(
            "RegimeIIIDecay: fitted rate {}, bracket [{}, {}], contained {contained}",
            fit.gamma, bracket.0, bracket.1
        ),
        AsymptoticClass::Undetermined { reason } => format!("Undetermined: {reason}"),
    }
}

pub fn cmd_integrate(cfg: &RunConfig) -> Result<i32> {
    let cp = cfg.ode_params()?;
    let tol = cfg.tol(1e-10)?;
    let psi0 = cfg.f64_or("psi0", cp.c0().map_or(0.5, |c| 1.2 * c))?;
    let dpsi0 = cfg.f64_or("dpsi0", 0.0)?;
    let t_max = cfg.f64_or("t_max", 40.0)?;
    if !(t_max > 0.0) {
        return usage(format!("t_max = {t_max} must be positive"));
    }
    let Ok(s0) = PhaseState::new(psi0, dpsi0) else {
        return usage(format!("initial state ({psi0}, {dpsi0}) must have psi >= 0"));
    };
    let opts = IntegrateOptions { atol: Some(tol * 1e-20), ..IntegrateOptions::with_tol(tol) };
    let tr = integrate_with(s0, (0.0, t_max), &opts, &cp)?;
    let mut run = Run::new("integrate", cfg)?;

    let mut table = Table::new(["t", "psi", "dpsi", "H"]);
    for (t, s) in tr.times.iter().zip(&tr.states) {
        table.push(vec![*t, s.psi, s.dpsi, hamiltonian(s, &cp)]);
    }
    run.out.write("trajectory.csv", &table.to_csv())?;
    let mut ev = String::from("t,psi,dpsi,kind\n");
    for e in &tr.events {
        let kind = match e.kind {
            EventKind::Min => "min",
            EventKind::Max => "max",
            EventKind::Zero => "zero",
        };
        let _ = writeln!(ev, "{},{},{},{kind}", fmt_real(e.t), fmt_real(e.state[0]), fmt_real(e.state[1]));
    }
    run.out.write("events.csv", &ev)?;

    let cls = classify_asymptotics(&tr, &cp, &FitConfig::default())
        .unwrap_or_else(|e| AsymptoticClass::Undetermined { reason: e.to_string() });
    let mut report = format!(
        "termination: {}\nt_end: {}\nsamples: {}\nclass: {}\n",
        tr.termination.as_str(),
        tr.t_end(),
        tr.len(),
        describe_class(&cls)
    );
    if let Some(r) = cls.rate() {
        let _ = writeln!(report, "rate: {r}");
    }
    out!("{report}");
    run.out.write("report.txt", &report)?;
    let decaying = matches!(cls, AsymptoticClass::FastDecay { .. } | AsymptoticClass::RegimeIIIDecay { .. });
    let plot = Plot {
        title: format!("psi(t), {}", cls.tag()),
        x_label: "t".into(),
        y_label: "psi".into(),
        log_y: decaying,
        series: vec![Series::line("psi", tr.psi())],
        metadata: cfg.echo(),
    };
    run.out.write("trajectory.svg", &plot.render())?;
    run.finish(None)?;
    Ok(0)
}

pub fn cmd_period(cfg: &RunConfig) -> Result<i32> {
    let cp = cfg.ode_params()?;
    let tol = cfg.tol(1e-12)?;
    let levels = match cfg.list("h0")? {
        Some(l) if !l.is_empty() => l,
        _ => return usage("period needs --h0"),
    };
    let mut run = Run::new("period", cfg)?;
    let mut table = Table::new([
        "h0", "beta_minus", "beta_plus", "period_quadrature", "period_return", "relative_gap",
    ]);
    let mut worst: f64 = 0.0;
    for h0 in levels {
        let orbit = orbit_period(h0, &cp)?;
        let ret = return_period(h0, &cp, tol)?;
        let gap = (orbit.period - ret).abs() / orbit.period;
        worst = worst.max(gap);
        outln!(
            "h0 = {h0}: quadrature {}, return map {}, relative gap {gap:e}",
            orbit.period, ret
        );
        table.push(vec![h0, orbit.beta_minus, orbit.beta_plus, orbit.period, ret, gap]);
    }
    run.out.write("period.csv", &table.to_csv())?;
    run.finish(None)?;
    Ok(if worst <= PERIOD_AGREEMENT { 0 } else { 1 })
}

pub fn cmd_fit(cfg: &RunConfig) -> Result<i32> {
    let Some(path) = cfg.get("input") else {
        return usage("fit needs --input <csv>");
    };
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {path}"))?;
    let table = Table::from_csv(&text)?;
    if table.columns.len() < 2 {
        return usage("input needs a time column and a value column");
    }
    let t = table.column("t").unwrap_or_else(|| table.rows.iter().map(|r| r[0]).collect());
    let vals = match cfg.get("column") {
        Some(c) => match table.column(c) {
            Some(v) => v,
            None => return usage(format!("input has no column {c:?}")),
        },
        None => table.rows.iter().map(|r| r[1]).collect(),
    };
    let target = cfg.f64_or("target", 0.0)?;
    let samples: Vec<(f64, f64)> = t.into_iter().zip(vals).collect();
    let fit = fit_rate(&samples, target)?;
    outln!("gamma = {}\nc = {}\nr2 = {}", fit.gamma, fit.c, fit.r2);
    let mut run = Run::new("fit", cfg)?;
    run.out.write(
        "fit.csv",
        &kv_csv(&[
            ("gamma", fit.gamma.into()),
            ("c", fit.c.into()),
            ("r2", fit.r2.into()),
            ("window_start", fit.window.0.into()),
            ("window_end", fit.window.1.into()),
            ("points", fit.points.into()),
            ("envelope", fit.envelope.into()),
            ("target", target.into()),
        ]),
    )?;
    let dev: Vec<(f64, f64)> = samples.iter().map(|&(t, v)| (t, (v - target).abs())).collect();
    let model: Vec<(f64, f64)> = dev.iter().map(|&(t, _)| (t, fit.c * (-fit.gamma * t).exp())).collect();
    let plot = Plot {
        title: format!("fitted rate {:.6}", fit.gamma),
        x_label: "t".into(),
        y_label: "|v - target|".into(),
        log_y: true,
        series: vec![
            Series { label: "data".into(), shape: Shape::Points(dev) },
            Series::line("fit", model),
        ],
        metadata: cfg.echo(),
    };
    run.out.write("fit.svg", &plot.render())?;
    run.finish(None)?;
    Ok(0)
}
