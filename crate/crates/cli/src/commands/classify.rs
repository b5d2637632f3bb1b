use anyhow::Result;
use cylas_core::ode::{char_roots, linearized_roots_at_c0, predicted_decay, DecayBranch};
use cylas_core::params::{check_admissible, classify_regime, Clause};
use cylas_core::Regime;
use std::fmt::Write;

use super::Run;
use crate::config::{usage, RunConfig};

fn clause_lines(s: &mut String, clauses: &[Clause]) {
    for c in clauses {
        let _ = writeln!(s, "  [{}] {}: {}", if c.pass { "ok" } else { "FAIL" }, c.name, c.detail);
    }
}

pub fn cmd_classify(cfg: &RunConfig) -> Result<i32> {
    let cp = cfg.params()?;
    let regime = match classify_regime(&cp) {
        Ok(r) => r,
        Err(e) => return usage(e.to_string()),
    };
    let rep = check_admissible(&cp);
    let bp = rep.ball_params;
    let mut s = String::new();
    let _ = writeln!(s, "regime: {regime}");
    let _ = writeln!(s, "cylinder chart: a = {}, b = {}, p = {}, n = {}", cp.a, cp.b, cp.p, cp.n);
    let _ = writeln!(s, "ball chart: c = {}, sigma = {}, p = {}, n = {}", bp.c, bp.sigma, bp.p, bp.n);
    let _ = writeln!(s, "admissibility (cylinder):");
    clause_lines(&mut s, &rep.cylinder);
    let _ = writeln!(s, "admissibility (ball):");
    clause_lines(&mut s, &rep.ball);
    let _ = writeln!(s, "transform exponent (n+b-2)/2 = {}", cp.transform_exponent());
    if let Some(c0) = cp.c0() {
        let _ = writeln!(s, "c0 = {c0}");
    }
    let r0 = char_roots(&cp);
    let _ = writeln!(s, "roots at 0: {}, {}", r0.lambda1, r0.lambda2);
    if let Ok(rc) = linearized_roots_at_c0(&cp) {
        let _ = writeln!(s, "roots at c0: {}, {} (alpha0 = {})", rc.lambda1, rc.lambda2, rc.alpha0);
    }
    let branches: &[DecayBranch] = match regime {
        Regime::I => &[DecayBranch::IDecay],
        Regime::II => &[DecayBranch::IIDecay, DecayBranch::IIConverge],
        Regime::III => &[DecayBranch::III],
    };
    let _ = writeln!(s, "predicted decay:");
    for &br in branches {
        let d = predicted_decay(br, &cp)?;
        let _ = write!(s, "  {}: rate {} with t^{}", br.as_str(), d.rate, d.t_power);
        if let Some((lo, hi)) = d.bracket {
            let _ = write!(s, ", bracket [{lo}, {hi}]");
        }
        s.push('\n');
    }
    out!("{s}");
    let mut run = Run::new("classify", cfg)?;
    run.out.write("report.txt", &s)?;
    run.finish(None)?;
    if !rep.pass() {
        let names: Vec<_> = rep.failed().iter().map(|c| c.name).collect();
        return usage(format!("parameters not admissible: {}", names.join(", ")));
    }
    Ok(0)
}
