//! Trajectory CSV: a `# dim=<d>` header, then one comma-separated state per line.

use std::fmt::Write;

use crate::error::{Error, Result};
use crate::maps::Trajectory;

pub fn to_csv(t: &Trajectory) -> String {
    let mut s = format!("# dim={}\n", t.dim());
    for state in t.states() {
        for (k, v) in state.iter().enumerate() {
            if k > 0 {
                s.push(',');
            }
            write!(s, "{v}").unwrap();
        }
        s.push('\n');
    }
    s
}

pub fn from_csv(text: &str) -> Result<Trajectory> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let err = |line: usize, message: String| Error::LineParse { line, message };
    let (_, header) = lines.next().ok_or_else(|| err(1, "empty trajectory file".into()))?;
    let dim: usize = header
        .trim()
        .strip_prefix('#')
        .map(str::trim)
        .and_then(|h| h.strip_prefix("dim="))
        .and_then(|d| d.trim().parse().ok())
        .filter(|&d| d > 0)
        .ok_or_else(|| err(1, "expected header `# dim=<d>`".into()))?;
    let mut data = Vec::new();
    for (i, line) in lines {
        let ln = i + 1;
        let before = data.len();
        for field in line.split(',') {
            let v: f64 = field
                .trim()
                .parse()
                .map_err(|_| err(ln, format!("invalid number `{}`", field.trim())))?;
            if !v.is_finite() {
                return Err(err(ln, "non-finite value".into()));
            }
            data.push(v);
        }
        if data.len() - before != dim {
            return Err(err(ln, format!("expected {dim} values, found {}", data.len() - before)));
        }
    }
    if data.is_empty() {
        return Err(err(2, "trajectory has no states".into()));
    }
    Trajectory::from_states(dim, data)
}
