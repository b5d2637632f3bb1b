use anyhow::Result;

use super::Run;
use crate::config::RunConfig;
use crate::criteria::{self, Bound, VerifyConfig};

pub fn cmd_verify(cfg: &RunConfig) -> Result<i32> {
    let ids = criteria::select(cfg.get("only"))?;
    let mut run = Run::new("verify", cfg)?;
    let vc = VerifyConfig {
        seed: cfg.u64_or("seed", 1)?,
        tol: cfg.f64("tol")?,
        scratch: run.out.path.clone(),
    };
    // no timings here, so reruns compare byte for byte
    let mut csv = String::from("criterion,name,check,value,bound,threshold,pass\n");
    let mut failed = 0;
    for id in ids {
        let o = criteria::run(id, &vc);
        outln!("{}", o.line());
        if !o.pass() {
            failed += 1;
        }
        if o.error.is_some() {
            csv.push_str(&format!("{id},{},error,,,,false\n", o.name));
        }
        for c in &o.checks {
            let bound = match c.bound {
                Bound::AtMost(_) => "at_most",
                Bound::AtLeast(_) => "at_least",
            };
            csv.push_str(&format!(
                "{id},{},{},{},{bound},{},{}\n",
                o.name,
                c.name,
                cylas_core::io::fmt_real(c.value),
                cylas_core::io::fmt_real(c.threshold()),
                c.pass()
            ));
        }
    }
    run.out.write("criteria.csv", &csv)?;
    outln!("{}", if failed == 0 { "all criteria passed".to_string() } else { format!("{failed} criteria failed") });
    run.finish(Some(vc.seed))?;
    Ok(if failed == 0 { 0 } else { 1 })
}
