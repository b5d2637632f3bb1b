use std::fmt::Write;

use anyhow::Result;
use cylas_core::io::{field_to_csv, Table};
use cylas_core::pde::{
    averaged_residual, initial_guess, newton_solve, spherical_average, symmetry_rate, CylGrid,
    FarCondition, NewtonOptions, SymmetryConfig, SymmetryOutcome,
};

use super::Run;
use crate::config::RunConfig;
use crate::svg::{Plot, Series};

pub fn cmd_pde(cfg: &RunConfig) -> Result<i32> {
    let cp = cfg.params()?;
    let n_theta = cfg.usize_or("n_theta", 64)?;
    let n_t = cfg.usize_or("n_t", 400)?;
    let t_max = cfg.f64_or("t_max", cylas_core::pde::DEFAULT_T_MAX)?;
    let perturb = cfg.f64_or("perturb", 0.1)?;
    let k = cfg.usize_or("harmonic", 1)? as f64;
    let tol = cfg.tol(1e-10)?;
    let base = cp.c0().unwrap_or(1.0);
    let boundary = |th: f64| base * (1.0 + perturb * (k * th).cos());

    let grid = CylGrid::new(n_theta, n_t, t_max, cp.n)?;
    let far = FarCondition::for_params(&cp)?;
    let guess = initial_guess(&grid, &cp, boundary, &far);
    let (field, rep) = newton_solve(guess, &far, &NewtonOptions { tol, ..Default::default() })?;

    let mut run = Run::new("pde", cfg)?;
    let mut hist = Table::new(["iteration", "residual", "damping"]);
    for (i, r) in rep.residual_history.iter().enumerate() {
        let d = if i == 0 { 0.0 } else { rep.damping[i - 1] };
        hist.push(vec![i as f64, *r, d]);
    }
    run.out.write("newton.csv", &hist.to_csv())?;
    let mut report = format!(
        "grid: {n_theta} x {n_t}, T = {t_max}\nfar condition: rho = {}, target = {}\nnewton iterations: {}\nresidual: {:e}\nconverged: {}\n",
        far.rho, far.target, rep.iterations, rep.residual, rep.converged
    );
    if !rep.converged {
        out!("{report}");
        run.out.write("report.txt", &report)?;
        run.finish(None)?;
        return Ok(1);
    }
    run.out.write("field.csv", &field_to_csv(&field))?;

    let prof = spherical_average(&field);
    let mut defect = Table::new(["t", "ubar", "defect"]);
    for j in 0..prof.t.len() {
        defect.push(vec![prof.t[j], prof.ubar[j], prof.defect[j]]);
    }
    run.out.write("defect.csv", &defect.to_csv())?;
    let avg = averaged_residual(&prof, &field);
    let mut avg_table = Table::new(["t", "lhs", "rhs", "bound"]);
    for r in &avg {
        avg_table.push(vec![r.t, r.lhs, r.rhs, r.bound]);
    }
    run.out.write("averaged.csv", &avg_table.to_csv())?;
    let gap = avg.iter().map(|r| (r.lhs - r.rhs).abs()).fold(0.0, f64::max);
    let _ = writeln!(report, "min u: {}", field.min_value());
    let _ = writeln!(report, "averaged identity max |lhs - rhs|: {gap:e}");
    match symmetry_rate(&prof, &SymmetryConfig::default())? {
        SymmetryOutcome::ExactlySymmetric => report.push_str("symmetry: exactly symmetric\n"),
        SymmetryOutcome::Rate(fit) => {
            let _ = writeln!(report, "symmetry rate: {}\nsymmetry r2: {}", fit.gamma, fit.r2);
        }
    }
    out!("{report}");
    run.out.write("report.txt", &report)?;
    let plot = Plot {
        title: "defect max |u/ubar - 1|".into(),
        x_label: "t".into(),
        y_label: "defect".into(),
        log_y: true,
        series: vec![Series::line("defect", prof.t.iter().copied().zip(prof.defect.iter().copied()).collect())],
        metadata: cfg.echo(),
    };
    run.out.write("defect.svg", &plot.render())?;
    run.finish(None)?;
    Ok(0)
}
