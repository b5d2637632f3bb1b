use anyhow::Result;
use cylas_core::io::Table;
use cylas_core::ode::energy::potential;
use cylas_core::ode::{
    h_min, homoclinic_state, integrate_with, orbit_period, IntegrateOptions, PhaseState,
};
use cylas_core::CylinderParams;

use super::Run;
use crate::config::{usage, RunConfig};
use crate::contour::{march, Grid};
use crate::svg::{Plot, Series, Shape};

const GRID: usize = 161;
const ORBIT_DT: f64 = 0.02;

/// Largest `β` with `V(β) = h`, where `V` increases past its minimum.
fn outer_root(h: f64, cp: &CylinderParams) -> f64 {
    let mut lo = cp.c0().unwrap_or(0.0);
    let mut hi = lo.max(1.0);
    while potential(hi, cp) < h {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if potential(mid, cp) < h {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Samples `(t, ψ, ψ')` of the undamped orbit on the level `h`.
fn orbit(h: f64, hm: Option<f64>, cp: &CylinderParams) -> Result<Vec<(f64, f64, f64)>> {
    let opts = IntegrateOptions { sample_dt: Some(ORBIT_DT), ..IntegrateOptions::with_tol(1e-10) };
    let tol = 1e-12 * hm.map_or(1.0, |m| m.abs().max(1.0));
    if let Some(hm) = hm {
        if (h - hm).abs() <= tol {
            return Ok(vec![(0.0, cp.c0().expect("a < 0"), 0.0)]);
        }
        if h.abs() <= tol {
            return Ok((-400..=400)
                .map(|k| {
                    let t = k as f64 * ORBIT_DT;
                    let s = homoclinic_state(t, 1.0, cp).expect("regime I");
                    (t, s.psi, s.dpsi)
                })
                .collect());
        }
        if h < 0.0 {
            let period = orbit_period(h, cp)?.period;
            let s0 = PhaseState::new(outer_root(h, cp), 0.0)?;
            let tr = integrate_with(s0, (0.0, period), &opts, cp)?;
            return Ok(tr.times.iter().zip(&tr.states).map(|(t, s)| (*t, s.psi, s.dpsi)).collect());
        }
    }
    // open level: forward from the top turning point until ψ = 0, mirrored in time
    let s0 = PhaseState::new(outer_root(h, cp), 0.0)?;
    let tr = integrate_with(s0, (0.0, 50.0), &opts, cp)?;
    let fwd: Vec<(f64, f64, f64)> = tr.times.iter().zip(&tr.states).map(|(t, s)| (*t, s.psi, s.dpsi)).collect();
    let mut all: Vec<(f64, f64, f64)> = fwd.iter().skip(1).rev().map(|&(t, p, d)| (-t, p, -d)).collect();
    all.extend(fwd);
    Ok(all)
}

pub fn cmd_portrait(cfg: &RunConfig) -> Result<i32> {
    let cp = CylinderParams { b: 0.0, ..cfg.ode_params()? };
    let hm = h_min(&cp).ok();
    let levels = match cfg.list("levels")? {
        Some(l) if !l.is_empty() => l,
        _ => match hm {
            Some(m) => vec![m, m / 2.0, 0.0],
            None => vec![0.25, 0.5, 1.0],
        },
    };
    let floor = hm.unwrap_or(0.0);
    for &h in &levels {
        let below = match hm {
            Some(m) => h < m - 1e-12 * m.abs().max(1.0),
            None => h <= 0.0,
        };
        if below {
            return usage(format!("level {h} is empty: H >= {floor} on psi >= 0 for a = {}", cp.a));
        }
    }
    let h_top = levels.iter().copied().fold(floor, f64::max);
    let y_max = 1.25 * outer_root(h_top.max(floor / 2.0).max(1e-3), &cp).max(cp.c0().unwrap_or(0.0));
    let x_max = 1.2 * (h_top - floor).max(1e-3).sqrt();
    let xs: Vec<f64> = (0..GRID).map(|i| -x_max + 2.0 * x_max * i as f64 / (GRID - 1) as f64).collect();
    let ys: Vec<f64> = (0..GRID).map(|j| y_max * j as f64 / (GRID - 1) as f64).collect();
    let z: Vec<Vec<f64>> = ys
        .iter()
        .map(|&y| xs.iter().map(|&x| x * x + potential(y, &cp)).collect())
        .collect();

    let mut run = Run::new("portrait", cfg)?;
    let mut grid_table = Table::new(["dpsi", "psi", "H"]);
    for (j, &y) in ys.iter().enumerate() {
        for (i, &x) in xs.iter().enumerate() {
            grid_table.push(vec![x, y, z[j][i]]);
        }
    }
    run.out.write("levels.csv", &grid_table.to_csv())?;

    let mut orbits = Table::new(["level", "t", "psi", "dpsi"]);
    let mut series = Vec::new();
    let grid = Grid { xs: &xs, ys: &ys, z: &z };
    for &h in &levels {
        for (t, p, d) in orbit(h, hm, &cp)? {
            orbits.push(vec![h, t, p, d]);
        }
        let segs = march(&grid, h);
        let label = format!("H = {h:.6}");
        outln!("level {h}: {} contour segments", segs.len());
        if segs.is_empty() {
            let pt = hm.filter(|m| (h - m).abs() <= 1e-12 * m.abs().max(1.0)).and(cp.c0());
            if let Some(c0) = pt {
                series.push(Series { label, shape: Shape::Points(vec![(0.0, c0)]) });
            }
        } else {
            series.push(Series { label, shape: Shape::Segments(segs) });
        }
    }
    run.out.write("orbits.csv", &orbits.to_csv())?;
    let plot = Plot {
        title: format!("level sets of H, a = {}, p = {}", cp.a, cp.p),
        x_label: "psi'".into(),
        y_label: "psi".into(),
        log_y: false,
        series,
        metadata: cfg.echo(),
    };
    run.out.write("portrait.svg", &plot.render())?;
    run.finish(None)?;
    Ok(0)
}
