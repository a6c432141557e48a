//! Delimited text artifacts. Every file opens with `#`-prefixed header
//! lines carrying the resolved scenario and seed, followed by one CSV
//! column-name row and the data rows.

use std::fmt::Write as _;
use std::path::Path;

use crate::channel::ChannelRealization;
use crate::config::ScenarioParams;
use crate::error::{Error, Result};
use crate::stats::{CdfCurve, CorrelationCurve};

/// Header block: free-form `key: value` pairs, then the full scenario as
/// commented TOML.
pub fn header(meta: &[(&str, String)], params: Option<&ScenarioParams>) -> String {
    let mut out = String::new();
    for (k, v) in meta {
        let _ = writeln!(out, "# {k}: {v}");
    }
    if let Some(p) = params {
        let _ = writeln!(out, "# scenario:");
        for line in p.to_toml_string().lines() {
            let _ = writeln!(out, "#   {line}");
        }
    }
    out
}

pub fn realization_csv(r: &ChannelRealization) -> String {
    let mut out = String::from("t,q,p,tag,cluster,delay_s,re,im\n");
    for (ti, t) in r.times.iter().enumerate() {
        for q in 0..r.n_rx {
            for p in 0..r.n_tx {
                for path in r.cell(ti, q, p) {
                    let cluster = path.cluster.map(|c| c.to_string()).unwrap_or_default();
                    let _ = writeln!(
                        out,
                        "{t:e},{q},{p},{},{cluster},{:e},{:e},{:e}",
                        path.kind.tag(),
                        path.delay,
                        path.coefficient.re,
                        path.coefficient.im
                    );
                }
            }
        }
    }
    out
}

pub fn cdf_csv(c: &CdfCurve) -> String {
    let mut out = String::from("value,cdf\n");
    for (x, p) in c.values.iter().zip(&c.probs) {
        let _ = writeln!(out, "{x:e},{p:e}");
    }
    out
}

/// Long-format CDF table for several labelled curves.
pub fn labelled_cdfs_csv(curves: &[(String, CdfCurve)]) -> String {
    let mut out = String::from("label,value,cdf\n");
    for (label, c) in curves {
        for (x, p) in c.values.iter().zip(&c.probs) {
            let _ = writeln!(out, "{label},{x:e},{p:e}");
        }
    }
    out
}

/// Long-format correlation table; the lag column is `dt` or `df` per curve.
pub fn correlation_csv(curves: &[(String, CorrelationCurve)]) -> String {
    let mut out = String::from("label,dt_s,df_hz,re,im,abs\n");
    for (label, c) in curves {
        for (lag, v) in c.lags.iter().zip(&c.values) {
            let _ = writeln!(out, "{label},{:e},{:e},{:e},{:e},{:e}", lag.dt, lag.df, v.re, v.im, v.norm());
        }
    }
    out
}

fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

/// Parse a CDF file: optional header comments, a column row containing
/// `value` and `cdf`, then numeric rows. A `label` column, if present, must
/// hold a single label (or pass `label` to select one).
pub fn parse_cdf(text: &str, label: Option<&str>) -> Result<CdfCurve> {
    let mut lines = data_lines(text);
    let (_, head) = lines.next().ok_or(Error::Parse("no column row".into()))?;
    let cols: Vec<&str> = head.split(',').map(str::trim).collect();
    let find = |name: &str| cols.iter().position(|c| *c == name);
    let vi = find("value").ok_or(Error::Parse("missing `value` column".into()))?;
    let pi = find("cdf").ok_or(Error::Parse("missing `cdf` column".into()))?;
    let li = find("label");
    let mut values = Vec::new();
    let mut probs = Vec::new();
    let mut seen_label: Option<String> = None;
    for (n, line) in lines {
        let f: Vec<&str> = line.split(',').map(str::trim).collect();
        if f.len() != cols.len() {
            return Err(Error::Parse(format!("line {n}: expected {} fields", cols.len())));
        }
        if let Some(li) = li {
            match (label, &seen_label) {
                (Some(want), _) if f[li] != want => continue,
                (None, Some(prev)) if prev != f[li] => {
                    return Err(Error::Parse(format!("line {n}: several labels; choose one")));
                }
                _ => seen_label = Some(f[li].to_string()),
            }
        }
        let num = |s: &str| s.parse::<f64>().map_err(|e| Error::Parse(format!("line {n}: {e}")));
        values.push(num(f[vi])?);
        probs.push(num(f[pi])?);
    }
    CdfCurve::from_points(values, probs)
}

pub fn read_cdf(path: impl AsRef<Path>, label: Option<&str>) -> Result<CdfCurve> {
    parse_cdf(&std::fs::read_to_string(path)?, label)
}
