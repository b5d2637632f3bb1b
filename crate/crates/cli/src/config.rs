//! Flat `key = value` configuration merged with command line flags.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::Args;
use cylas_core::params::to_cylinder;
use cylas_core::{BallParams, CylinderParams};

/// Errors that map to exit code 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

pub fn usage<T>(msg: impl Into<String>) -> Result<T> {
    Err(UsageError(msg.into()).into())
}

pub const KEYS: &[&str] = &[
    "a", "b", "p", "n", "c", "sigma", "tol", "t_max", "psi0", "dpsi0", "h0", "levels", "lambda",
    "target", "perturb", "harmonic", "n_theta", "n_t", "seed", "samples", "input", "column",
    "out", "only",
];

#[derive(Debug, Clone, Default, Args)]
pub struct Opts {
    /// Key-value configuration file; flags override its entries.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, allow_negative_numbers = true)]
    pub a: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub b: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub p: Option<f64>,
    #[arg(long)]
    pub n: Option<u32>,
    #[arg(long, allow_negative_numbers = true)]
    pub c: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub sigma: Option<f64>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub t_max: Option<f64>,
    #[arg(long)]
    pub psi0: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub dpsi0: Option<f64>,
    /// Energy level, or a comma separated list of levels.
    #[arg(long, allow_hyphen_values = true)]
    pub h0: Option<String>,
    /// Contour levels for `portrait`, comma separated.
    #[arg(long, allow_hyphen_values = true)]
    pub levels: Option<String>,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub target: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub perturb: Option<f64>,
    #[arg(long)]
    pub harmonic: Option<u32>,
    #[arg(long)]
    pub n_theta: Option<usize>,
    #[arg(long)]
    pub n_t: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub samples: Option<usize>,
    /// Input CSV for `fit`.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Column of the input CSV holding the values; defaults to the second.
    #[arg(long)]
    pub column: Option<String>,
    /// Output root; overrides `CYLAS_OUT`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Criteria for `verify`: numbers or module names, comma separated.
    #[arg(long)]
    pub only: Option<String>,
}

impl Opts {
    fn flag_entries(&self) -> Vec<(&'static str, String)> {
        let mut v = Vec::new();
        let mut put = |k: &'static str, s: Option<String>| {
            if let Some(s) = s {
                v.push((k, s));
            }
        };
        let num = |x: Option<f64>| x.map(|x| x.to_string());
        put("a", num(self.a));
        put("b", num(self.b));
        put("p", num(self.p));
        put("n", self.n.map(|x| x.to_string()));
        put("c", num(self.c));
        put("sigma", num(self.sigma));
        put("tol", num(self.tol));
        put("t_max", num(self.t_max));
        put("psi0", num(self.psi0));
        put("dpsi0", num(self.dpsi0));
        put("h0", self.h0.clone());
        put("levels", self.levels.clone());
        put("lambda", num(self.lambda));
        put("target", num(self.target));
        put("perturb", num(self.perturb));
        put("harmonic", self.harmonic.map(|x| x.to_string()));
        put("n_theta", self.n_theta.map(|x| x.to_string()));
        put("n_t", self.n_t.map(|x| x.to_string()));
        put("seed", self.seed.map(|x| x.to_string()));
        put("samples", self.samples.map(|x| x.to_string()));
        put("input", self.input.as_ref().map(|p| p.display().to_string()));
        put("column", self.column.clone());
        put("out", self.out.as_ref().map(|p| p.display().to_string()));
        put("only", self.only.clone());
        v
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunConfig {
    pub entries: BTreeMap<String, String>,
}

pub fn parse_config_text(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (k, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return usage(format!("config line {}: expected key = value", k + 1));
        };
        let key = key.trim().replace('-', "_");
        if !KEYS.contains(&key.as_str()) {
            return usage(format!("config line {}: unknown key {key:?}", k + 1));
        }
        map.insert(key, value.trim().to_string());
    }
    Ok(map)
}

impl RunConfig {
    pub fn from_opts(opts: &Opts) -> Result<Self> {
        let mut entries = match &opts.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .with_context(|| format!("reading {}", path.display()))
                    .map_err(|e| UsageError(format!("{e:#}")))?;
                parse_config_text(&text)?
            }
            None => BTreeMap::new(),
        };
        for (k, v) in opts.flag_entries() {
            entries.insert(k.to_string(), v);
        }
        Ok(Self { entries })
    }

    pub fn from_pairs<'a>(pairs: impl IntoIterator<Item = (&'a str, &'a str)>) -> Self {
        Self {
            entries: pairs
                .into_iter()
                .map(|(k, v)| (k.to_string(), v.to_string()))
                .collect(),
        }
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        self.entries.insert(key.to_string(), value.into());
    }

    pub fn f64(&self, key: &str) -> Result<Option<f64>> {
        self.get(key)
            .map(|s| {
                s.parse::<f64>()
                    .map_err(|_| UsageError(format!("{key} = {s:?} is not a number")).into())
            })
            .transpose()
    }

    pub fn f64_or(&self, key: &str, default: f64) -> Result<f64> {
        Ok(self.f64(key)?.unwrap_or(default))
    }

    pub fn usize_or(&self, key: &str, default: usize) -> Result<usize> {
        match self.get(key) {
            None => Ok(default),
            Some(s) => s
                .parse()
                .map_err(|_| UsageError(format!("{key} = {s:?} is not a count")).into()),
        }
    }

    pub fn u64_or(&self, key: &str, default: u64) -> Result<u64> {
        Ok(self.usize_or(key, default as usize)? as u64)
    }

    pub fn list(&self, key: &str) -> Result<Option<Vec<f64>>> {
        let Some(s) = self.get(key) else {
            return Ok(None);
        };
        s.split(',')
            .map(str::trim)
            .filter(|t| !t.is_empty())
            .map(|t| {
                t.parse::<f64>()
                    .map_err(|_| UsageError(format!("{key}: {t:?} is not a number")).into())
            })
            .collect::<Result<Vec<_>>>()
            .map(Some)
    }

    pub fn tol(&self, default: f64) -> Result<f64> {
        self.f64_or("tol", default)
    }

    /// The cylinder parameters, from exactly one of the two charts.
    pub fn params(&self) -> Result<CylinderParams> {
        let cyl = ["a", "b"].iter().any(|k| self.get(k).is_some());
        let ball = ["c", "sigma"].iter().any(|k| self.get(k).is_some());
        let need = |k: &str| -> Result<f64> {
            match self.f64(k)? {
                Some(v) => Ok(v),
                None => usage(format!("missing parameter {k}")),
            }
        };
        let p = need("p")?;
        let n = match self.get("n") {
            Some(s) => s
                .parse::<u32>()
                .map_err(|_| UsageError(format!("n = {s:?} is not a dimension")))?,
            None => return usage("missing parameter n"),
        };
        let cp = match (cyl, ball) {
            (true, true) => return usage("give either a, b or c, sigma, not both"),
            (false, false) => return usage("missing parameters: give a, b or c, sigma"),
            (true, false) => CylinderParams {
                a: need("a")?,
                b: self.f64_or("b", 0.0)?,
                p,
                n,
            },
            (false, true) => to_cylinder(&BallParams {
                c: need("c")?,
                sigma: need("sigma")?,
                p,
                n,
            }),
        };
        cp.validate().map_err(|e| UsageError(e.to_string()))?;
        Ok(cp)
    }

    /// Parameters for commands that only integrate the ODE, where `n` does
    /// not enter; it defaults to 3.
    pub fn ode_params(&self) -> Result<CylinderParams> {
        if self.get("n").is_some() || self.get("c").is_some() || self.get("sigma").is_some() {
            return self.params();
        }
        let mut with_n = self.clone();
        with_n.set("n", "3");
        with_n.params()
    }

    /// Output root: the `out` key, then `CYLAS_OUT`, then `cylas-out`.
    pub fn out_root(&self) -> PathBuf {
        if let Some(o) = self.get("out") {
            return PathBuf::from(o);
        }
        std::env::var_os("CYLAS_OUT")
            .map(PathBuf::from)
            .unwrap_or_else(|| Path::new("cylas-out").to_path_buf())
    }

    /// `key = value` lines, sorted by key; the output location is left out.
    pub fn echo(&self) -> String {
        self.entries
            .iter()
            .filter(|(k, _)| k.as_str() != "out")
            .map(|(k, v)| format!("{k} = {v}\n"))
            .collect()
    }
}
