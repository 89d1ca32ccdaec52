//! Symbolic discrete maps, their evaluation and iteration.

use std::cmp::Ordering;
use std::fmt;

use crate::error::{Error, Result};
use crate::rng::Gaussian;

/// States whose coordinates exceed this magnitude are treated as divergent.
pub const DIVERGENCE_BOUND: f64 = 1e12;

/// A variable reference: a current-state coordinate `v_i` or a next-state
/// coordinate `v_i'`. Current-state variables order before next-state ones.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Var {
    Current(usize),
    Next(usize),
}

impl Var {
    pub fn index(self) -> usize {
        match self {
            Var::Current(i) | Var::Next(i) => i,
        }
    }
}

/// One factor `v^k` or `|v|^k` of a basis function.
///
/// Field order matters: the derived ordering is by `(var, abs, exponent)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Factor {
    pub var: Var,
    pub abs: bool,
    pub exponent: u32,
}

impl Factor {
    pub fn new(var: Var, exponent: u32) -> Self {
        Self {
            var,
            abs: false,
            exponent,
        }
    }

    pub fn abs(var: Var, exponent: u32) -> Self {
        Self {
            var,
            abs: true,
            exponent,
        }
    }
}

/// A basis function: a product of factors in canonical order. The empty
/// product is the constant function.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Basis {
    factors: Vec<Factor>,
}

impl Basis {
    pub fn constant() -> Self {
        Self::default()
    }

    /// Canonicalizes: factors sorted by `(var, abs)`, repeated factors merged by
    /// adding exponents.
    pub fn new(factors: impl IntoIterator<Item = Factor>) -> Result<Self> {
        let mut fs: Vec<Factor> = factors.into_iter().collect();
        if fs.iter().any(|f| f.exponent == 0) {
            return Err(Error::invalid("factor exponents must be >= 1"));
        }
        fs.sort_by_key(|f| (f.var, f.abs));
        let mut merged: Vec<Factor> = Vec::with_capacity(fs.len());
        for f in fs {
            match merged.last_mut() {
                Some(last) if last.var == f.var && last.abs == f.abs => last.exponent += f.exponent,
                _ => merged.push(f),
            }
        }
        Ok(Self { factors: merged })
    }

    /// Convenience: the monomial `prod v_i^{exps[i]}` over current-state variables.
    pub fn monomial(exps: &[u32]) -> Self {
        let factors = exps
            .iter()
            .enumerate()
            .filter(|(_, &e)| e > 0)
            .map(|(i, &e)| Factor::new(Var::Current(i), e));
        Self::new(factors).expect("positive exponents")
    }

    pub fn var(i: usize) -> Self {
        Self {
            factors: vec![Factor::new(Var::Current(i), 1)],
        }
    }

    pub fn abs_var(i: usize) -> Self {
        Self {
            factors: vec![Factor::abs(Var::Current(i), 1)],
        }
    }

    pub fn next_var(i: usize) -> Self {
        Self {
            factors: vec![Factor::new(Var::Next(i), 1)],
        }
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    pub fn is_constant(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.factors.iter().map(|f| f.exponent).sum()
    }

    pub fn mul(&self, other: &Basis) -> Basis {
        Basis::new(self.factors.iter().chain(&other.factors).copied()).expect("valid factors")
    }

    /// `self / divisor` when every factor of the divisor divides a factor of
    /// `self` with the same variable and abs flag.
    pub fn checked_div(&self, divisor: &Basis) -> Option<Basis> {
        let mut out = self.factors.clone();
        for d in &divisor.factors {
            let pos = out.iter().position(|f| f.var == d.var && f.abs == d.abs)?;
            match out[pos].exponent.cmp(&d.exponent) {
                Ordering::Less => return None,
                Ordering::Equal => {
                    out.remove(pos);
                }
                Ordering::Greater => out[pos].exponent -= d.exponent,
            }
        }
        Some(Basis { factors: out })
    }

    pub fn uses_next_state(&self) -> bool {
        self.factors.iter().any(|f| matches!(f.var, Var::Next(_)))
    }

    /// Evaluates the product left-to-right by repeated multiplication.
    /// `next` may be omitted when the basis only uses current-state variables.
    pub fn eval(&self, current: &[f64], next: Option<&[f64]>) -> f64 {
        let mut acc = 1.0;
        for f in &self.factors {
            let mut v = match f.var {
                Var::Current(i) => current[i],
                Var::Next(i) => next.expect("next state required")[i],
            };
            if f.abs {
                v = v.abs();
            }
            for _ in 0..f.exponent {
                acc *= v;
            }
        }
        acc
    }

    pub(crate) fn max_var_index(&self) -> Option<usize> {
        self.factors.iter().map(|f| f.var.index()).max()
    }

    /// Writes the factors joined by `*` using the given variable names.
    pub fn write_factors(&self, names: &[String], out: &mut impl fmt::Write) -> fmt::Result {
        for (k, f) in self.factors.iter().enumerate() {
            if k > 0 {
                out.write_char('*')?;
            }
            let name = &names[f.var.index()];
            let prime = if matches!(f.var, Var::Next(_)) { "'" } else { "" };
            if f.abs {
                write!(out, "|{name}{prime}|")?;
            } else {
                write!(out, "{name}{prime}")?;
            }
            if f.exponent > 1 {
                write!(out, "^{}", f.exponent)?;
            }
        }
        Ok(())
    }

    pub fn display(&self, names: &[String]) -> String {
        if self.is_constant() {
            return "1".to_string();
        }
        let mut s = String::new();
        self.write_factors(names, &mut s).unwrap();
        s
    }
}

/// A coefficient attached to a basis function.
#[derive(Debug, Clone, PartialEq)]
pub struct Term {
    pub coefficient: f64,
    pub basis: Basis,
}

impl Term {
    pub fn new(coefficient: f64, basis: Basis) -> Self {
        Self { coefficient, basis }
    }

    pub fn constant(c: f64) -> Self {
        Self::new(c, Basis::constant())
    }
}

/// Default variable names: `x, y, z` up to three dimensions, `x1..xd` beyond.
pub fn default_var_names(dim: usize) -> Vec<String> {
    if dim <= 3 {
        ["x", "y", "z"][..dim].iter().map(|s| s.to_string()).collect()
    } else {
        (1..=dim).map(|i| format!("x{i}")).collect()
    }
}

/// An explicit discrete map: each next-state coordinate is a sum of terms over
/// current-state variables.
#[derive(Debug, Clone, PartialEq)]
pub struct MapSpec {
    dim: usize,
    coords: Vec<Vec<Term>>,
}

impl MapSpec {
    /// Builds a map, sorting terms canonically and merging duplicate bases.
    pub fn new(coords: Vec<Vec<Term>>) -> Result<Self> {
        let dim = coords.len();
        if dim == 0 {
            return Err(Error::invalid("map dimension must be positive"));
        }
        let mut out = Vec::with_capacity(dim);
        for (c, terms) in coords.into_iter().enumerate() {
            if terms.is_empty() {
                return Err(Error::invalid(format!("coordinate {c} has no terms")));
            }
            let mut terms = terms;
            for t in &terms {
                if !t.coefficient.is_finite() {
                    return Err(Error::invalid(format!("non-finite coefficient in coordinate {c}")));
                }
                if t.basis.uses_next_state() {
                    return Err(Error::invalid("map terms may only use current-state variables"));
                }
                if t.basis.max_var_index().is_some_and(|i| i >= dim) {
                    return Err(Error::invalid(format!(
                        "coordinate {c} references a variable outside dimension {dim}"
                    )));
                }
            }
            terms.sort_by(|a, b| a.basis.cmp(&b.basis));
            let mut merged: Vec<Term> = Vec::with_capacity(terms.len());
            for t in terms {
                match merged.last_mut() {
                    Some(last) if last.basis == t.basis => last.coefficient += t.coefficient,
                    _ => merged.push(t),
                }
            }
            out.push(merged);
        }
        Ok(Self { dim, coords: out })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn coords(&self) -> &[Vec<Term>] {
        &self.coords
    }

    /// Coefficient of `basis` in coordinate `coord`, zero when absent.
    pub fn coefficient(&self, coord: usize, basis: &Basis) -> f64 {
        self.coords[coord]
            .binary_search_by(|t| t.basis.cmp(basis))
            .map(|k| self.coords[coord][k].coefficient)
            .unwrap_or(0.0)
    }

    /// Computes the next state into `out` without any divergence check.
    pub fn evaluate_into(&self, state: &[f64], out: &mut [f64]) {
        for (o, terms) in out.iter_mut().zip(&self.coords) {
            let mut sum = 0.0;
            for t in terms {
                sum += t.coefficient * t.basis.eval(state, None);
            }
            *o = sum;
        }
    }

    pub fn evaluate(&self, state: &[f64]) -> Result<Vec<f64>> {
        self.check_state(state)?;
        let mut out = vec![0.0; self.dim];
        self.evaluate_into(state, &mut out);
        check_bounded(&out, 1)?;
        Ok(out)
    }

    fn check_state(&self, state: &[f64]) -> Result<()> {
        if state.len() != self.dim {
            return Err(Error::invalid(format!(
                "state has {} coordinates, map has {}",
                state.len(),
                self.dim
            )));
        }
        if state.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("state contains non-finite values"));
        }
        Ok(())
    }

    /// Iterates from `x0`, discards `burn_in` iterates, and returns the next `n`.
    /// The initial state itself is never emitted; emission starts at `x_{burn_in+1}`.
    pub fn iterate(&self, x0: &[f64], n: usize, burn_in: usize) -> Result<Trajectory> {
        if n == 0 {
            return Err(Error::invalid("trajectory length must be at least 1"));
        }
        let mut data = Vec::with_capacity(n * self.dim);
        self.for_each_state(x0, n + burn_in, |step, s| {
            if step > burn_in {
                data.extend_from_slice(s);
            }
        })?;
        Ok(Trajectory { dim: self.dim, data })
    }

    /// Streams `steps` successive iterates to `f(step, state)`, with steps
    /// counted from 1. Stops with a divergence error at the first unbounded state.
    pub fn for_each_state(&self, x0: &[f64], steps: usize, mut f: impl FnMut(usize, &[f64])) -> Result<()> {
        self.check_state(x0)?;
        let mut cur = x0.to_vec();
        let mut next = vec![0.0; self.dim];
        for step in 1..=steps {
            self.evaluate_into(&cur, &mut next);
            check_bounded(&next, step)?;
            std::mem::swap(&mut cur, &mut next);
            f(step, &cur);
        }
        Ok(())
    }

    /// Renders the map with full-precision coefficients, one coordinate per line.
    pub fn equations(&self) -> Vec<String> {
        crate::model::format_equations(self, None)
    }
}

fn check_bounded(state: &[f64], step: usize) -> Result<()> {
    if state.iter().any(|v| !v.is_finite() || v.abs() > DIVERGENCE_BOUND) {
        return Err(Error::Divergence {
            step,
            state: state.to_vec(),
        });
    }
    Ok(())
}

fn check_param(name: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("parameter {name} must be finite, got {v}")))
    }
}

/// Hénon map: `x' = 1 + y - a x²`, `y' = b x`.
pub fn henon(a: f64, b: f64) -> Result<MapSpec> {
    check_param("a", a)?;
    check_param("b", b)?;
    MapSpec::new(vec![
        vec![
            Term::constant(1.0),
            Term::new(1.0, Basis::var(1)),
            Term::new(-a, Basis::monomial(&[2, 0])),
        ],
        vec![Term::new(b, Basis::var(0))],
    ])
}

/// Lozi map: `x' = 1 - a|x| + y`, `y' = b x`.
pub fn lozi(a: f64, b: f64) -> Result<MapSpec> {
    check_param("a", a)?;
    check_param("b", b)?;
    MapSpec::new(vec![
        vec![
            Term::constant(1.0),
            Term::new(-a, Basis::abs_var(0)),
            Term::new(1.0, Basis::var(1)),
        ],
        vec![Term::new(b, Basis::var(0))],
    ])
}

/// The three-dimensional logistic-type map, expanded to monomials:
///
/// ```text
/// x' = 3.8 x (1 - x) + 0.01 y² x + 0.01 z³
/// y' = 3.8 y (1 - x) + 0.01 z² y + 0.01 x³
/// z' = 3.8 z (1 - z) + 0.01 x² z + 0.01 y³
/// ```
///
/// The `y'` row couples to `x` in its logistic factor.
pub fn logistic3d() -> MapSpec {
    let m = Basis::monomial;
    MapSpec::new(vec![
        vec![
            Term::new(3.8, m(&[1, 0, 0])),
            Term::new(-3.8, m(&[2, 0, 0])),
            Term::new(0.01, m(&[1, 2, 0])),
            Term::new(0.01, m(&[0, 0, 3])),
        ],
        vec![
            Term::new(3.8, m(&[0, 1, 0])),
            Term::new(-3.8, m(&[1, 1, 0])),
            Term::new(0.01, m(&[0, 1, 2])),
            Term::new(0.01, m(&[3, 0, 0])),
        ],
        vec![
            Term::new(3.8, m(&[0, 0, 1])),
            Term::new(-3.8, m(&[0, 0, 2])),
            Term::new(0.01, m(&[2, 0, 1])),
            Term::new(0.01, m(&[0, 3, 0])),
        ],
    ])
    .expect("static map")
}

/// An ordered sequence of states, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    dim: usize,
    data: Vec<f64>,
}

impl Trajectory {
    pub fn from_states(dim: usize, data: Vec<f64>) -> Result<Self> {
        if dim == 0 || !data.len().is_multiple_of(dim) {
            return Err(Error::invalid("trajectory data is not a whole number of states"));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("trajectory contains non-finite values"));
        }
        Ok(Self { dim, data })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn state(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn states(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.dim)
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.data
    }

    /// Per-coordinate `(min, max)`.
    pub fn bounds(&self) -> Vec<(f64, f64)> {
        (0..self.dim)
            .map(|c| {
                self.states().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), s| {
                    (lo.min(s[c]), hi.max(s[c]))
                })
            })
            .collect()
    }

    /// Adds `sigma * N(0,1)` to every entry. Deviates are drawn coordinate by
    /// coordinate (all states of coordinate 0 first), so the realization for a
    /// given seed does not depend on how states are grouped.
    pub fn add_gaussian_noise(&self, sigma: f64, seed: u64) -> Result<Trajectory> {
        if sigma.is_nan() || sigma < 0.0 || sigma.is_infinite() {
            return Err(Error::invalid(format!("noise sigma must be >= 0, got {sigma}")));
        }
        let mut out = self.clone();
        if sigma == 0.0 {
            return Ok(out);
        }
        let mut g = Gaussian::new(seed);
        let n = self.len();
        for c in 0..self.dim {
            for i in 0..n {
                out.data[i * self.dim + c] += sigma * g.sample();
            }
        }
        Ok(out)
    }
}
