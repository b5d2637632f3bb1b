//! Output directories, key-value CSVs and run manifests.

use std::path::{Path, PathBuf};
use std::time::Duration;

use anyhow::{Context, Result};
use cylas_core::io::fmt_real;

use crate::config::RunConfig;

pub struct OutDir {
    pub path: PathBuf,
    files: Vec<String>,
}

impl OutDir {
    pub fn create(root: &Path, command: &str) -> Result<Self> {
        let path = root.join(command);
        std::fs::create_dir_all(&path).with_context(|| format!("creating {}", path.display()))?;
        Ok(Self { path, files: Vec::new() })
    }

    pub fn write(&mut self, name: &str, content: &str) -> Result<PathBuf> {
        let p = self.path.join(name);
        std::fs::write(&p, content).with_context(|| format!("writing {}", p.display()))?;
        self.files.push(name.to_string());
        Ok(p)
    }

    /// `manifest.txt`: command, version, seed, configuration echo, files and wall time.
    pub fn manifest(&mut self, command: &str, cfg: &RunConfig, seed: Option<u64>, wall: Duration) -> Result<()> {
        let mut s = format!(
            "command = {command}\nversion = cylas {}\n",
            env!("CARGO_PKG_VERSION")
        );
        if let Some(seed) = seed {
            s.push_str(&format!("seed = {seed}\n"));
        }
        s.push_str("[config]\n");
        s.push_str(&cfg.echo());
        s.push_str("[files]\n");
        for f in &self.files {
            s.push_str(f);
            s.push('\n');
        }
        s.push_str(&format!("wall_time_s = {:.3}\n", wall.as_secs_f64()));
        self.write("manifest.txt", &s)?;
        Ok(())
    }
}

/// Value cell of a key-value CSV.
pub enum Val {
    Num(f64),
    Int(i64),
    Text(String),
}

impl From<f64> for Val {
    fn from(x: f64) -> Self {
        Val::Num(x)
    }
}

impl From<usize> for Val {
    fn from(x: usize) -> Self {
        Val::Int(x as i64)
    }
}

impl From<bool> for Val {
    fn from(x: bool) -> Self {
        Val::Text(x.to_string())
    }
}

impl From<&str> for Val {
    fn from(x: &str) -> Self {
        Val::Text(x.to_string())
    }
}

impl From<String> for Val {
    fn from(x: String) -> Self {
        Val::Text(x)
    }
}

impl Val {
    pub fn render(&self) -> String {
        match self {
            Val::Num(x) => fmt_real(*x),
            Val::Int(k) => k.to_string(),
            Val::Text(t) if t.contains([',', '"', '\n']) => format!("\"{}\"", t.replace('"', "\"\"")),
            Val::Text(t) => t.clone(),
        }
    }
}

/// Two-column `key,value` table.
pub fn kv_csv(rows: &[(&str, Val)]) -> String {
    let mut s = String::from("key,value\n");
    for (k, v) in rows {
        s.push_str(k);
        s.push(',');
        s.push_str(&v.render());
        s.push('\n');
    }
    s
}
