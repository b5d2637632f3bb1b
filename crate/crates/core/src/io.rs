//! CSV tables and the field file format.
//!
//! Reals are printed with 17 significant digits so that parsing the text
//! gives back the same `f64`.

use crate::error::{Error, Result};
use crate::params::CylinderParams;
use crate::pde::{CylGrid, CylinderField};

pub fn fmt_real(x: f64) -> String {
    format!("{x:.16e}")
}

fn parse_real(s: &str) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .map_err(|e| Error::Parse(format!("{s:?}: {e}")))
}

fn csv_err(e: csv::Error) -> Error {
    Error::Parse(e.to_string())
}

/// A numeric table with named columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Self {
            columns: columns.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        assert_eq!(row.len(), self.columns.len(), "row width");
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[k]).collect())
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::WriterBuilder::new().from_writer(Vec::new());
        w.write_record(&self.columns).expect("in-memory write");
        for row in &self.rows {
            w.write_record(row.iter().map(|v| fmt_real(*v)))
                .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("flush")).expect("utf8")
    }

    /// Parses a header row followed by numeric rows; `#` lines are skipped.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut r = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let columns: Vec<String> = r.headers().map_err(csv_err)?.iter().map(String::from).collect();
        let mut rows = Vec::new();
        for rec in r.records() {
            let rec = rec.map_err(csv_err)?;
            rows.push(rec.iter().map(parse_real).collect::<Result<Vec<_>>>()?);
        }
        Ok(Self { columns, rows })
    }
}

fn header_fields(line: &str, tag: &str) -> Result<Vec<(String, String)>> {
    let rest = line
        .strip_prefix('#')
        .map(str::trim)
        .and_then(|l| l.strip_prefix(tag))
        .ok_or_else(|| Error::Parse(format!("expected `# {tag}` header, got {line:?}")))?;
    rest.split_whitespace()
        .map(|kv| {
            kv.split_once('=')
                .map(|(k, v)| (k.to_string(), v.to_string()))
                .ok_or_else(|| Error::Parse(format!("bad header entry {kv:?}")))
        })
        .collect()
}

fn lookup<'a>(fields: &'a [(String, String)], key: &str) -> Result<&'a str> {
    fields
        .iter()
        .find(|(k, _)| k == key)
        .map(|(_, v)| v.as_str())
        .ok_or_else(|| Error::Parse(format!("header lacks {key}")))
}

fn parse_usize(s: &str) -> Result<usize> {
    s.parse().map_err(|e| Error::Parse(format!("{s:?}: {e}")))
}

/// Field file: `# grid ...` line, `# params ...` line, then one row per `t` node
/// with one column per `θ` node.
pub fn field_to_csv(f: &CylinderField) -> String {
    let g = &f.grid;
    let cp = &f.params;
    let mut out = format!(
        "# grid n_theta={} n_t={} t_max={} n={}\n# params a={} b={} p={} n={}\n",
        g.n_theta,
        g.n_t,
        fmt_real(g.t_max),
        g.n,
        fmt_real(cp.a),
        fmt_real(cp.b),
        fmt_real(cp.p),
        cp.n
    );
    let mut w = csv::WriterBuilder::new().from_writer(Vec::new());
    for j in 0..g.n_t {
        w.write_record(f.row(j).iter().map(|v| fmt_real(*v)))
            .expect("in-memory write");
    }
    out.push_str(std::str::from_utf8(&w.into_inner().expect("flush")).expect("utf8"));
    out
}

pub fn field_from_csv(text: &str) -> Result<CylinderField> {
    let mut lines = text.splitn(3, '\n');
    let grid_line = lines.next().unwrap_or("");
    let params_line = lines.next().unwrap_or("");
    let body = lines.next().unwrap_or("");
    let gh = header_fields(grid_line, "grid")?;
    let ph = header_fields(params_line, "params")?;
    let n_theta = parse_usize(lookup(&gh, "n_theta")?)?;
    let n_t = parse_usize(lookup(&gh, "n_t")?)?;
    let t_max = parse_real(lookup(&gh, "t_max")?)?;
    let n = parse_usize(lookup(&gh, "n")?)? as u32;
    let cp = CylinderParams {
        a: parse_real(lookup(&ph, "a")?)?,
        b: parse_real(lookup(&ph, "b")?)?,
        p: parse_real(lookup(&ph, "p")?)?,
        n: parse_usize(lookup(&ph, "n")?)? as u32,
    };
    if cp.n != n {
        return Err(Error::Parse(format!("grid n = {n} but params n = {}", cp.n)));
    }
    let grid = CylGrid::new(n_theta, n_t, t_max, n)?;
    let mut r = csv::ReaderBuilder::new()
        .has_headers(false)
        .from_reader(body.as_bytes());
    let mut values = Vec::with_capacity(n_theta * n_t);
    for rec in r.records() {
        let rec = rec.map_err(csv_err)?;
        if rec.len() != n_theta {
            return Err(Error::Parse(format!("row of width {} != {n_theta}", rec.len())));
        }
        for v in rec.iter() {
            values.push(parse_real(v)?);
        }
    }
    if values.len() != n_theta * n_t {
        return Err(Error::Parse(format!(
            "{} values for a {n_theta}×{n_t} grid",
            values.len()
        )));
    }
    Ok(CylinderField {
        grid,
        params: cp,
        values,
    })
}
