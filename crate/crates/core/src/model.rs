//! Text model format.
//!
//! ```text
//! # map dim=2 vars=x,y
//! x' = 1 - 1.4*x^2 + 1*y
//! y' = 0.3*x
//! ```
//!
//! Every term carries its coefficient explicitly and coefficients use the
//! shortest decimal string that round-trips, so `parse_model(&to_model_string(m))`
//! reproduces `m` bit for bit.

use std::fmt::Write;

use crate::error::{Error, Result};
use crate::maps::{default_var_names, Basis, Factor, MapSpec, Term, Var};

pub fn to_model_string(map: &MapSpec) -> String {
    let names = default_var_names(map.dim());
    let mut s = format!("# map dim={} vars={}\n", map.dim(), names.join(","));
    for (c, terms) in map.coords().iter().enumerate() {
        write!(s, "{}' =", names[c]).unwrap();
        for (k, t) in terms.iter().enumerate() {
            let neg = t.coefficient.is_sign_negative();
            let mag = t.coefficient.abs();
            match (k, neg) {
                (0, false) => write!(s, " {mag}"),
                (0, true) => write!(s, " -{mag}"),
                (_, false) => write!(s, " + {mag}"),
                (_, true) => write!(s, " - {mag}"),
            }
            .unwrap();
            if !t.basis.is_constant() {
                s.push('*');
                t.basis.write_factors(&names, &mut s).unwrap();
            }
        }
        s.push('\n');
    }
    s
}

pub fn parse_model(text: &str) -> Result<MapSpec> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty());
    let (hl, header) = lines.next().ok_or(Error::LineParse {
        line: 1,
        message: "empty model".into(),
    })?;
    let (dim, names) = parse_header(header).map_err(|message| Error::LineParse { line: hl, message })?;

    let mut coords: Vec<Option<Vec<Term>>> = vec![None; dim];
    for (ln, line) in lines {
        let err = |message: String| Error::LineParse { line: ln, message };
        let (lhs, rhs) = line
            .split_once('=')
            .ok_or_else(|| err("expected `<var>' = <terms>`".into()))?;
        let lhs = lhs.trim();
        let var = lhs
            .strip_suffix('\'')
            .and_then(|v| names.iter().position(|n| n == v))
            .ok_or_else(|| err(format!("unknown left-hand side `{lhs}`")))?;
        if coords[var].is_some() {
            return Err(err(format!("duplicate equation for `{lhs}`")));
        }
        let terms = parse_terms(rhs, &names).map_err(err)?;
        coords[var] = Some(terms);
    }
    let coords = coords
        .into_iter()
        .enumerate()
        .map(|(c, t)| {
            t.ok_or_else(|| Error::LineParse {
                line: 0,
                message: format!("missing equation for `{}'`", names[c]),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    MapSpec::new(coords)
}

fn parse_header(header: &str) -> std::result::Result<(usize, Vec<String>), String> {
    let rest = header
        .strip_prefix('#')
        .map(str::trim)
        .and_then(|h| h.strip_prefix("map"))
        .ok_or("header must start with `# map`")?;
    let mut dim = None;
    let mut names = None;
    for field in rest.split_whitespace() {
        if let Some(d) = field.strip_prefix("dim=") {
            dim = Some(d.parse::<usize>().map_err(|e| format!("bad dim: {e}"))?);
        } else if let Some(v) = field.strip_prefix("vars=") {
            names = Some(v.split(',').map(str::to_string).collect::<Vec<_>>());
        } else {
            return Err(format!("unexpected header field `{field}`"));
        }
    }
    let dim = dim.ok_or("header lacks dim=")?;
    let names = names.unwrap_or_else(|| default_var_names(dim));
    if dim == 0 || names.len() != dim {
        return Err(format!("dim={dim} does not match {} variable names", names.len()));
    }
    for (i, n) in names.iter().enumerate() {
        if n.is_empty() || !n.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
            return Err(format!("invalid variable name `{n}`"));
        }
        if names[..i].contains(n) {
            return Err(format!("duplicate variable name `{n}`"));
        }
    }
    Ok((dim, names))
}

fn parse_terms(rhs: &str, names: &[String]) -> std::result::Result<Vec<Term>, String> {
    let tokens: Vec<&str> = rhs.split_whitespace().collect();
    if tokens.is_empty() {
        return Err("empty right-hand side".into());
    }
    let mut terms = vec![parse_term(tokens[0], false, names)?];
    let mut rest = tokens[1..].chunks(2);
    for pair in &mut rest {
        let [op, term] = pair else {
            return Err("dangling operator".into());
        };
        let negate = match *op {
            "+" => false,
            "-" => true,
            other => return Err(format!("expected `+` or `-`, found `{other}`")),
        };
        if term.starts_with(['+', '-']) {
            return Err(format!("unexpected sign in `{term}`"));
        }
        terms.push(parse_term(term, negate, names)?);
    }
    Ok(terms)
}

fn parse_term(tok: &str, negate: bool, names: &[String]) -> std::result::Result<Term, String> {
    let mut parts = tok.split('*');
    let coeff_str = parts.next().unwrap_or_default();
    let mut coefficient: f64 = coeff_str
        .parse()
        .map_err(|_| format!("invalid coefficient `{coeff_str}`"))?;
    if !coefficient.is_finite() {
        return Err(format!("non-finite coefficient `{coeff_str}`"));
    }
    if negate {
        coefficient = -coefficient;
    }
    let factors = parts
        .map(|p| parse_factor(p, names))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    let basis = Basis::new(factors).map_err(|e| e.to_string())?;
    Ok(Term::new(coefficient, basis))
}

fn parse_factor(s: &str, names: &[String]) -> std::result::Result<Factor, String> {
    let (base, exponent) = match s.split_once('^') {
        Some((b, e)) => {
            let e: u32 = e.parse().map_err(|_| format!("invalid exponent in `{s}`"))?;
            if e == 0 {
                return Err(format!("zero exponent in `{s}`"));
            }
            (b, e)
        }
        None => (s, 1),
    };
    let (name, abs) = match base.strip_prefix('|').and_then(|b| b.strip_suffix('|')) {
        Some(inner) => (inner, true),
        None => (base, false),
    };
    let idx = names
        .iter()
        .position(|n| n == name)
        .ok_or_else(|| format!("unknown variable `{name}`"))?;
    Ok(Factor {
        var: Var::Current(idx),
        abs,
        exponent,
    })
}

/// Rounds to `digits` significant decimal digits.
pub fn round_significant(v: f64, digits: usize) -> f64 {
    if v == 0.0 || !v.is_finite() {
        return v;
    }
    format!("{:.*e}", digits.saturating_sub(1), v).parse().unwrap()
}

/// Human-readable equations such as `x' = 1 - 1.4*x^2 + y`. Unit coefficients
/// are elided. With `Some(d)`, coefficients are shown rounded to `d`
/// significant digits; the map itself is never modified.
pub fn format_equations(map: &MapSpec, digits: Option<usize>) -> Vec<String> {
    let names = default_var_names(map.dim());
    map.coords()
        .iter()
        .enumerate()
        .map(|(c, terms)| {
            let mut s = format!("{}' =", names[c]);
            for (k, t) in terms.iter().enumerate() {
                let coef = digits.map_or(t.coefficient, |d| round_significant(t.coefficient, d));
                let mag = coef.abs();
                let sign = match (k, coef.is_sign_negative()) {
                    (0, false) => " ",
                    (0, true) => " -",
                    (_, false) => " + ",
                    (_, true) => " - ",
                };
                s.push_str(sign);
                if t.basis.is_constant() {
                    write!(s, "{mag}").unwrap();
                } else {
                    if mag != 1.0 {
                        write!(s, "{mag}*").unwrap();
                    }
                    t.basis.write_factors(&names, &mut s).unwrap();
                }
            }
            s
        })
        .collect()
}
