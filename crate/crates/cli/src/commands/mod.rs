//! Subcommand implementations. Each returns the process exit code.

mod classify;
mod ode;
mod pde;
mod portrait;
mod singularity;
mod verify;

pub use classify::cmd_classify;
pub use ode::{cmd_fit, cmd_integrate, cmd_period};
pub use pde::cmd_pde;
pub use portrait::cmd_portrait;
pub use singularity::cmd_singularity;
pub use verify::cmd_verify;

use std::time::Instant;

use anyhow::Result;

use crate::config::RunConfig;
use crate::output::OutDir;

/// Output directory of one command run, with its start time for the manifest.
pub(crate) struct Run<'a> {
    pub name: &'static str,
    pub cfg: &'a RunConfig,
    pub out: OutDir,
    start: Instant,
}

impl<'a> Run<'a> {
    pub fn new(name: &'static str, cfg: &'a RunConfig) -> Result<Self> {
        Ok(Self {
            name,
            cfg,
            out: OutDir::create(&cfg.out_root(), name)?,
            start: Instant::now(),
        })
    }

    pub fn finish(mut self, seed: Option<u64>) -> Result<()> {
        let wall = self.start.elapsed();
        self.out.manifest(self.name, self.cfg, seed, wall)?;
        outln!("outputs: {}", self.out.path.display());
        Ok(())
    }
}
