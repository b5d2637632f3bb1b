use std::fmt::Write;

use anyhow::Result;
use cylas_core::fitter::{classify_asymptotics, FitConfig};
use cylas_core::ode::{homoclinic_state, integrate_with, IntegrateOptions, PhaseState};
use cylas_core::params::{classify_regime, to_ball};
use cylas_core::singularity::{check_symmetry_condition, classify_singularity};
use cylas_core::Regime;

use super::ode::describe_class;
use super::Run;
use crate::config::{usage, RunConfig};
use crate::output::{kv_csv, Val};

pub fn cmd_singularity(cfg: &RunConfig) -> Result<i32> {
    let cp = cfg.params()?;
    let regime = match classify_regime(&cp) {
        Ok(r) => r,
        Err(e) => return usage(e.to_string()),
    };
    // default orbit: the homoclinic tail, or a start above c₀
    let (s0, horizon) = match (regime, cfg.f64("psi0")?) {
        (_, Some(psi0)) => (PhaseState::new(psi0, cfg.f64_or("dpsi0", 0.0)?)?, cfg.f64_or("t_max", 24.0)?),
        (Regime::I, None) => (homoclinic_state(10.0, 1.0, &cp)?, cfg.f64_or("t_max", 12.0)?),
        (Regime::II, None) => (PhaseState::new(1.2 * cp.c0().expect("a < 0"), 0.0)?, cfg.f64_or("t_max", 24.0)?),
        (Regime::III, None) => (PhaseState::new(0.5, 0.0)?, cfg.f64_or("t_max", 24.0)?),
    };
    let opts = IntegrateOptions { atol: Some(1e-30), ..IntegrateOptions::with_tol(cfg.tol(1e-12)?) };
    let tr = integrate_with(s0, (0.0, horizon), &opts, &cp)?;
    let cls = classify_asymptotics(&tr, &cp, &FitConfig::default())?;
    let bp = to_ball(&cp);
    let samples = cfg.usize_or("samples", 10_000)?;
    let seed = cfg.u64_or("seed", 1)?;
    let chk = check_symmetry_condition(&bp, samples, seed);

    let mut run = Run::new("singularity", cfg)?;
    let mut report = format!(
        "regime: {regime}\nball chart: c = {}, sigma = {}\nclass: {}\n",
        bp.c,
        bp.sigma,
        describe_class(&cls)
    );
    let mut code = 0;
    match classify_singularity(&cp, &cls) {
        Ok(v) => {
            let _ = writeln!(
                report,
                "verdict: {}\nexponent: {}\nh1loc: {}\ntwo_sided: {}",
                v.class.as_str(),
                v.exponent,
                v.h1loc,
                v.two_sided
            );
            run.out.write(
                "verdict.csv",
                &kv_csv(&[
                    ("class", v.class.as_str().into()),
                    ("exponent", v.exponent.into()),
                    ("h1loc", v.h1loc.into()),
                    ("two_sided", v.two_sided.into()),
                ]),
            )?;
        }
        Err(e) => {
            let _ = writeln!(report, "verdict: unsupported ({e})");
            code = 1;
        }
    }
    let _ = writeln!(
        report,
        "symmetry condition: {} over {samples} samples (seed {seed}), worst ratio {}{}",
        if chk.pass() { "pass" } else { "fail" },
        chk.worst_ratio,
        if chk.admissible { "" } else { ", parameters inadmissible (exploratory)" }
    );
    let mut rows: Vec<(&str, Val)> = vec![
        ("samples", samples.into()),
        ("seed", (seed as usize).into()),
        ("admissible", chk.admissible.into()),
        ("pass", chk.pass().into()),
        ("worst_ratio", chk.worst_ratio.into()),
    ];
    if let Some(w) = &chk.witness {
        let _ = writeln!(report, "witness: x = {:?}, z = {:?}, lambda = {}, a = {}, b = {}, lhs = {}, rhs = {}", w.x, w.z, w.lambda, w.a, w.b, w.lhs, w.rhs);
        rows.extend([
            ("witness_lambda", w.lambda.into()),
            ("witness_a", w.a.into()),
            ("witness_b", w.b.into()),
            ("witness_lhs", w.lhs.into()),
            ("witness_rhs", w.rhs.into()),
        ]);
        if chk.admissible {
            code = 1;
        }
    }
    run.out.write("condition.csv", &kv_csv(&rows))?;
    out!("{report}");
    run.out.write("report.txt", &report)?;
    run.finish(Some(seed))?;
    Ok(code)
}
