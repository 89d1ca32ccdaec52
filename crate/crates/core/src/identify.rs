//! Sparse identification of discrete maps from trajectory data.
//!
//! Each candidate left-hand side `θ_j(x_n, x_{n+1})` (by default the bare
//! next-state variables) is regressed against a library of current-state
//! basis functions with sequential thresholded least squares. Candidates are
//! scored, the best one per next-state coordinate is solved explicitly for
//! that coordinate, and the surviving terms form the identified map.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{lstsq, norm};
use crate::maps::{default_var_names, Basis, Factor, MapSpec, Term, Trajectory, Var};

/// Largest polynomial degree accepted by [`build_library`].
pub const MAX_LIBRARY_DEGREE: u32 = 5;

/// Weight of the support-size tie-breaker in candidate scores.
pub const SPARSITY_WEIGHT: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq)]
pub struct CandidateLibrary {
    dim: usize,
    max_degree: u32,
    include_abs: bool,
    rhs: Vec<Basis>,
    lhs: Vec<Basis>,
}

/// All exponent vectors over `dim` variables with total degree `<= max_degree`.
fn exponent_vectors(dim: usize, max_degree: u32) -> Vec<Vec<u32>> {
    fn rec(dim: usize, left: u32, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if prefix.len() == dim {
            out.push(prefix.clone());
            return;
        }
        for e in 0..=left {
            prefix.push(e);
            rec(dim, left - e, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(dim, max_degree, &mut Vec::new(), &mut out);
    out
}

/// Polynomial library up to `max_degree`, optionally extended with `|v_i|`
/// times every monomial of degree `<= max_degree - 1`.
pub fn build_library(dim: usize, max_degree: u32, include_abs: bool) -> Result<CandidateLibrary> {
    if dim == 0 {
        return Err(Error::invalid("library dimension must be positive"));
    }
    if !(1..=MAX_LIBRARY_DEGREE).contains(&max_degree) {
        return Err(Error::invalid(format!(
            "max_degree must be in 1..={MAX_LIBRARY_DEGREE}, got {max_degree}"
        )));
    }
    let mut rhs: Vec<Basis> = exponent_vectors(dim, max_degree)
        .iter()
        .map(|e| Basis::monomial(e))
        .collect();
    if include_abs {
        let lower = exponent_vectors(dim, max_degree - 1);
        for i in 0..dim {
            for e in &lower {
                rhs.push(Basis::abs_var(i).mul(&Basis::monomial(e)));
            }
        }
    }
    rhs.sort();
    rhs.dedup();
    let lhs = (0..dim).map(Basis::next_var).collect();
    Ok(CandidateLibrary {
        dim,
        max_degree,
        include_abs,
        rhs,
        lhs,
    })
}

impl CandidateLibrary {
    /// Adds implicit left-hand sides `v_i' * v_j` for every pair of coordinates.
    pub fn with_composite_lhs(mut self) -> Self {
        for i in 0..self.dim {
            for j in 0..self.dim {
                self.lhs.push(Basis::next_var(i).mul(&Basis::var(j)));
            }
        }
        self
    }

    /// Replaces the left-hand candidates. Each must be linear in exactly one
    /// next-state variable.
    pub fn with_lhs(mut self, lhs: Vec<Basis>) -> Result<Self> {
        for b in &lhs {
            let next: Vec<&Factor> = b.factors().iter().filter(|f| matches!(f.var, Var::Next(_))).collect();
            if next.len() != 1 || next[0].exponent != 1 || next[0].abs {
                return Err(Error::invalid(
                    "left-hand candidates must be linear in exactly one next-state variable",
                ));
            }
            if b.max_var_index().is_some_and(|i| i >= self.dim) {
                return Err(Error::invalid("left-hand candidate outside library dimension"));
            }
        }
        self.lhs = lhs;
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rhs(&self) -> &[Basis] {
        &self.rhs
    }

    pub fn lhs(&self) -> &[Basis] {
        &self.lhs
    }

    pub fn width(&self) -> usize {
        self.rhs.len()
    }

    pub fn describe(&self) -> String {
        format!(
            "dim={} degree<={} abs={} rhs={} lhs={}",
            self.dim,
            self.max_degree,
            self.include_abs,
            self.rhs.len(),
            self.lhs.len()
        )
    }
}

/// Library columns evaluated on consecutive state pairs.
#[derive(Debug, Clone)]
pub struct DesignMatrix {
    pub rows: usize,
    /// One column per right-hand basis, evaluated at `x_i`.
    pub rhs: Vec<Vec<f64>>,
    /// One column per left-hand candidate, evaluated at `(x_i, x_{i+1})`.
    pub lhs: Vec<Vec<f64>>,
}

pub fn evaluate_library(lib: &CandidateLibrary, t: &Trajectory) -> Result<DesignMatrix> {
    if t.dim() != lib.dim {
        return Err(Error::invalid(format!(
            "trajectory dimension {} differs from library dimension {}",
            t.dim(),
            lib.dim
        )));
    }
    if t.len() < lib.width() + 1 {
        return Err(Error::Underdetermined {
            rows: t.len().saturating_sub(1),
            columns: lib.width(),
        });
    }
    let rows = t.len() - 1;
    let pairs = || (0..rows).map(|i| (t.state(i), t.state(i + 1)));
    let rhs: Vec<Vec<f64>> = lib
        .rhs
        .iter()
        .map(|b| pairs().map(|(x, _)| b.eval(x, None)).collect())
        .collect();
    let lhs: Vec<Vec<f64>> = lib
        .lhs
        .iter()
        .map(|b| pairs().map(|(x, y)| b.eval(x, Some(y))).collect())
        .collect();
    if rhs.iter().chain(&lhs).flatten().any(|v| !v.is_finite()) {
        return Err(Error::invalid("library evaluation produced non-finite values"));
    }
    Ok(DesignMatrix { rows, rhs, lhs })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SparseFit {
    /// One coefficient per library column; inactive columns are exactly zero.
    pub coefficients: Vec<f64>,
    /// `‖b - A ξ‖₂ / ‖b‖₂`.
    pub residual: f64,
    pub support_size: usize,
    pub iterations: usize,
}

impl SparseFit {
    pub fn support(&self) -> Vec<usize> {
        self.coefficients
            .iter()
            .enumerate()
            .filter(|(_, c)| **c != 0.0)
            .map(|(i, _)| i)
            .collect()
    }
}

/// Sequential thresholded least squares.
///
/// Starting from the full column set: solve least squares on the active
/// columns, drop every coefficient with magnitude below `lambda`, and repeat
/// until the active set stops changing or `max_iter` solves have been done.
pub fn stlsq(columns: &[Vec<f64>], b: &[f64], lambda: f64, max_iter: usize) -> Result<SparseFit> {
    if lambda.is_nan() || lambda <= 0.0 || lambda.is_infinite() {
        return Err(Error::invalid(format!("lambda must be positive, got {lambda}")));
    }
    if max_iter == 0 {
        return Err(Error::invalid("max_iter must be at least 1"));
    }
    let n = columns.len();
    let bnorm = norm(b);
    let mut active: Vec<usize> = (0..n).collect();
    let mut coefficients = vec![0.0; n];
    let mut iterations = 0;
    let mut converged = false;

    while iterations < max_iter {
        if active.is_empty() {
            return Err(Error::EmptyModel);
        }
        iterations += 1;
        let cols: Vec<&[f64]> = active.iter().map(|&k| columns[k].as_slice()).collect();
        let sol = lstsq(&cols, b).map_err(|e| match e {
            Error::DegenerateRegression { columns } => Error::DegenerateRegression {
                columns: columns.iter().map(|&c| active[c]).collect(),
            },
            other => other,
        })?;
        coefficients.iter_mut().for_each(|c| *c = 0.0);
        for (&k, &c) in active.iter().zip(&sol.coefficients) {
            coefficients[k] = c;
        }
        let next: Vec<usize> = active
            .iter()
            .copied()
            .filter(|&k| coefficients[k].abs() >= lambda)
            .collect();
        if next == active {
            converged = true;
            break;
        }
        active = next;
    }
    if !converged {
        // out of iterations: keep the last solve, thresholded
        for c in coefficients.iter_mut() {
            if c.abs() < lambda {
                *c = 0.0;
            }
        }
    }
    let support_size = coefficients.iter().filter(|c| **c != 0.0).count();
    if support_size == 0 {
        return Err(Error::EmptyModel);
    }
    let mut r = b.to_vec();
    for (col, &c) in columns.iter().zip(&coefficients) {
        if c != 0.0 {
            for (ri, ci) in r.iter_mut().zip(col) {
                *ri -= c * ci;
            }
        }
    }
    let residual = if bnorm > 0.0 { norm(&r) / bnorm } else { 0.0 };
    Ok(SparseFit {
        coefficients,
        residual,
        support_size,
        iterations,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FitOptions {
    /// STLSQ pruning threshold.
    pub lambda: f64,
    /// Final coefficients below this magnitude are discarded.
    pub significance: f64,
    pub max_iter: usize,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            lambda: 1e-3,
            significance: 1e-4,
            max_iter: 20,
        }
    }
}

#[derive(Debug, Clone)]
pub struct CandidateScore {
    pub lhs: Basis,
    /// Next-state coordinate this candidate can be solved for.
    pub coordinate: usize,
    pub fit: Result<SparseFit>,
    /// `residual + SPARSITY_WEIGHT * support / width`, absent when the fit
    /// failed or the relation cannot be solved explicitly.
    pub score: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Provenance {
    pub samples: usize,
    pub noise_sigma: Option<f64>,
    pub noise_seed: Option<u64>,
    pub lambda: f64,
    pub significance: f64,
    pub max_iter: usize,
}

#[derive(Debug, Clone)]
pub struct IdentificationResult {
    /// Full-precision identified map.
    pub map: MapSpec,
    /// Selected fit per coordinate (over the library columns, before the
    /// final significance pruning).
    pub fits: Vec<SparseFit>,
    pub selected_lhs: Vec<Basis>,
    pub candidates: Vec<CandidateScore>,
    pub library: String,
    pub provenance: Provenance,
}

fn next_coordinate(lhs: &Basis) -> (usize, Basis) {
    let mut cofactor = Vec::new();
    let mut coord = 0;
    for f in lhs.factors() {
        match f.var {
            Var::Next(i) => coord = i,
            Var::Current(_) => cofactor.push(*f),
        }
    }
    (coord, Basis::new(cofactor).expect("valid factors"))
}

/// Fits every left-hand candidate, keeps the best-scoring one per coordinate,
/// and assembles the explicit map.
pub fn sindy_pi_fit(t: &Trajectory, lib: &CandidateLibrary, opts: &FitOptions) -> Result<IdentificationResult> {
    if opts.significance.is_nan() || opts.significance < 0.0 {
        return Err(Error::invalid("significance must be non-negative"));
    }
    let design = evaluate_library(lib, t)?;
    let width = lib.width() as f64;

    let candidates: Vec<CandidateScore> = lib
        .lhs
        .par_iter()
        .zip(design.lhs.par_iter())
        .map(|(lhs, column)| {
            let (coordinate, cofactor) = next_coordinate(lhs);
            let fit = stlsq(&design.rhs, column, opts.lambda, opts.max_iter);
            let score = fit.as_ref().ok().and_then(|f| {
                let solvable = f.support().iter().all(|&k| lib.rhs[k].checked_div(&cofactor).is_some());
                solvable.then(|| f.residual + SPARSITY_WEIGHT * f.support_size as f64 / width)
            });
            CandidateScore {
                lhs: lhs.clone(),
                coordinate,
                fit,
                score,
            }
        })
        .collect();

    let mut coords = Vec::with_capacity(lib.dim);
    let mut fits = Vec::with_capacity(lib.dim);
    let mut selected = Vec::with_capacity(lib.dim);
    for coord in 0..lib.dim {
        let best = candidates
            .iter()
            .filter(|c| c.coordinate == coord)
            .filter_map(|c| c.score.map(|s| (s, c)))
            .fold(None::<(f64, &CandidateScore)>, |acc, cur| match acc {
                Some(a) if a.0 <= cur.0 => Some(a),
                _ => Some(cur),
            });
        let Some((_, cand)) = best else {
            let reason = candidates
                .iter()
                .filter(|c| c.coordinate == coord)
                .find_map(|c| c.fit.as_ref().err().map(|e| e.to_string()))
                .unwrap_or_else(|| "no explicitly solvable candidate".into());
            return Err(Error::IdentificationFailure {
                coordinate: coord,
                reason,
            });
        };
        let fit = cand.fit.as_ref().expect("scored candidates have fits");
        let (_, cofactor) = next_coordinate(&cand.lhs);
        let terms: Vec<Term> = fit
            .support()
            .into_iter()
            .filter(|&k| fit.coefficients[k].abs() >= opts.significance)
            .map(|k| {
                let basis = lib.rhs[k].checked_div(&cofactor).expect("checked when scoring");
                Term::new(fit.coefficients[k], basis)
            })
            .collect();
        if terms.is_empty() {
            return Err(Error::IdentificationFailure {
                coordinate: coord,
                reason: "every coefficient fell below the significance threshold".into(),
            });
        }
        coords.push(terms);
        fits.push(fit.clone());
        selected.push(cand.lhs.clone());
    }

    Ok(IdentificationResult {
        map: MapSpec::new(coords)?,
        fits,
        selected_lhs: selected,
        candidates,
        library: lib.describe(),
        provenance: Provenance {
            samples: t.len(),
            noise_sigma: None,
            noise_seed: None,
            lambda: opts.lambda,
            significance: opts.significance,
            max_iter: opts.max_iter,
        },
    })
}

/// Walks the union of bases of two coordinate term lists (both sorted),
/// yielding `(basis, a_coefficient, b_coefficient)` with zeros for gaps.
fn aligned<'a>(a: &'a [Term], b: &'a [Term]) -> Vec<(&'a Basis, f64, f64)> {
    let (mut i, mut j) = (0, 0);
    let mut out = Vec::with_capacity(a.len().max(b.len()));
    while i < a.len() || j < b.len() {
        match (a.get(i), b.get(j)) {
            (Some(x), Some(y)) if x.basis == y.basis => {
                out.push((&x.basis, x.coefficient, y.coefficient));
                i += 1;
                j += 1;
            }
            (Some(x), Some(y)) if x.basis < y.basis => {
                out.push((&x.basis, x.coefficient, 0.0));
                i += 1;
            }
            (Some(x), None) => {
                out.push((&x.basis, x.coefficient, 0.0));
                i += 1;
            }
            (_, Some(y)) => {
                out.push((&y.basis, 0.0, y.coefficient));
                j += 1;
            }
            (None, None) => unreachable!(),
        }
    }
    out
}

/// Euclidean distance between coefficient sets, aligned by basis function;
/// terms missing on either side count as zero.
pub fn model_error(learned: &MapSpec, truth: &MapSpec) -> Result<f64> {
    if learned.dim() != truth.dim() {
        return Err(Error::invalid(format!(
            "dimension mismatch: {} vs {}",
            learned.dim(),
            truth.dim()
        )));
    }
    let mut sum = 0.0;
    for (l, t) in learned.coords().iter().zip(truth.coords()) {
        for (_, a, b) in aligned(l, t) {
            sum += (b - a) * (b - a);
        }
    }
    Ok(sum.sqrt())
}

/// Fits noise-free data of each size generated from `x0` and reports the
/// model error against `truth`, in input order.
pub fn data_size_sweep(
    truth: &MapSpec,
    x0: &[f64],
    sizes: &[usize],
    lib: &CandidateLibrary,
    opts: &FitOptions,
) -> Result<Vec<(usize, f64)>> {
    if sizes.is_empty() {
        return Err(Error::invalid("size list is empty"));
    }
    sizes
        .par_iter()
        .map(|&size| {
            let tag = |e: Error| Error::AtSize {
                size,
                source: Box::new(e),
            };
            let t = truth.iterate(x0, size, 0).map_err(tag)?;
            let fit = sindy_pi_fit(&t, lib, opts).map_err(tag)?;
            Ok((size, model_error(&fit.map, truth)?))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TermDeviation {
    pub coordinate: usize,
    pub term: String,
    pub truth: f64,
    pub learned: f64,
    pub deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpuriousTerm {
    pub coordinate: usize,
    pub term: String,
    pub coefficient: f64,
}

#[derive(Debug, Clone)]
pub struct NoiseOutcome {
    pub map: MapSpec,
    /// One entry per term of the true map.
    pub deviations: Vec<TermDeviation>,
    /// Identified terms absent from the true map.
    pub spurious: Vec<SpuriousTerm>,
    /// Sum of absolute deviations over the true terms.
    pub aggregate_deviation: f64,
}

impl NoiseOutcome {
    pub fn spurious_magnitude(&self, coordinate: usize, term: &str) -> f64 {
        self.spurious
            .iter()
            .find(|s| s.coordinate == coordinate && s.term == term)
            .map_or(0.0, |s| s.coefficient.abs())
    }
}

#[derive(Debug, Clone)]
pub struct NoisePoint {
    pub sigma: f64,
    pub outcome: Result<NoiseOutcome>,
}

pub fn compare_to_truth(learned: &MapSpec, truth: &MapSpec) -> Result<(Vec<TermDeviation>, Vec<SpuriousTerm>)> {
    if learned.dim() != truth.dim() {
        return Err(Error::invalid("dimension mismatch"));
    }
    let names = default_var_names(truth.dim());
    let mut dev = Vec::new();
    let mut spur = Vec::new();
    for (c, (l, t)) in learned.coords().iter().zip(truth.coords()).enumerate() {
        let true_bases: Vec<&Basis> = t.iter().map(|x| &x.basis).collect();
        for (basis, lc, tc) in aligned(l, t) {
            if true_bases.contains(&basis) {
                dev.push(TermDeviation {
                    coordinate: c,
                    term: basis.display(&names),
                    truth: tc,
                    learned: lc,
                    deviation: (lc - tc).abs(),
                });
            } else {
                spur.push(SpuriousTerm {
                    coordinate: c,
                    term: basis.display(&names),
                    coefficient: lc,
                });
            }
        }
    }
    Ok((dev, spur))
}

/// Fits `n` states from `x0` perturbed with each noise level (same seed for
/// every level) and compares the result with `truth`. Fit failures are
/// recorded per level; the sweep itself continues.
#[allow(clippy::too_many_arguments)]
pub fn noise_sweep(
    truth: &MapSpec,
    x0: &[f64],
    n: usize,
    sigmas: &[f64],
    seed: u64,
    lib: &CandidateLibrary,
    opts: &FitOptions,
) -> Result<Vec<NoisePoint>> {
    if sigmas.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::invalid("noise levels must be sorted ascending"));
    }
    let clean = truth.iterate(x0, n, 0)?;
    Ok(sigmas
        .par_iter()
        .map(|&sigma| {
            let outcome = (|| {
                let noisy = clean.add_gaussian_noise(sigma, seed)?;
                let fit = sindy_pi_fit(&noisy, lib, opts)?;
                let (deviations, spurious) = compare_to_truth(&fit.map, truth)?;
                let aggregate_deviation = deviations.iter().map(|d| d.deviation).sum();
                Ok(NoiseOutcome {
                    map: fit.map,
                    deviations,
                    spurious,
                    aggregate_deviation,
                })
            })();
            NoisePoint { sigma, outcome }
        })
        .collect())
}

/// Identification from `x0` with optional measurement noise, recording the
/// noise parameters in the provenance.
pub fn identify_from_map(
    truth: &MapSpec,
    x0: &[f64],
    n: usize,
    noise: Option<(f64, u64)>,
    lib: &CandidateLibrary,
    opts: &FitOptions,
) -> Result<IdentificationResult> {
    let mut t = truth.iterate(x0, n, 0)?;
    if let Some((sigma, seed)) = noise {
        t = t.add_gaussian_noise(sigma, seed)?;
    }
    let mut res = sindy_pi_fit(&t, lib, opts)?;
    if let Some((sigma, seed)) = noise {
        res.provenance.noise_sigma = Some(sigma);
        res.provenance.noise_seed = Some(seed);
    }
    Ok(res)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maps::henon;

    fn names(lib: &CandidateLibrary) -> Vec<String> {
        let n = default_var_names(lib.dim());
        lib.rhs().iter().map(|b| b.display(&n)).collect()
    }

    #[test]
    fn library_sizes() {
        let lib = build_library(2, 2, false).unwrap();
        assert_eq!(lib.width(), 6);
        let mut got = names(&lib);
        got.sort();
        let mut want = vec!["1", "x", "y", "x^2", "x*y", "y^2"];
        want.sort();
        assert_eq!(got, want);
        assert_eq!(build_library(2, 3, false).unwrap().width(), 10);
        assert_eq!(build_library(3, 3, false).unwrap().width(), 20);
        assert!(build_library(2, 0, false).is_err());
        assert!(build_library(2, 6, false).is_err());
    }

    #[test]
    fn abs_library_contains_lozi_term() {
        let lib = build_library(2, 2, true).unwrap();
        let n = names(&lib);
        for t in ["|x|", "|y|", "x*|x|", "x*|y|", "|x|*y", "y*|y|"] {
            assert!(n.contains(&t.to_string()), "{t} missing from {n:?}");
        }
        assert_eq!(lib.width(), 6 + 2 * 3);
    }

    #[test]
    fn lhs_defaults_and_composite() {
        let lib = build_library(2, 2, false).unwrap();
        assert_eq!(lib.lhs(), &[Basis::next_var(0), Basis::next_var(1)]);
        assert_eq!(lib.clone().with_composite_lhs().lhs().len(), 6);
        assert!(lib.clone().with_lhs(vec![Basis::var(0)]).is_err());
        let sq = Basis::next_var(0).mul(&Basis::next_var(0));
        assert!(lib.with_lhs(vec![sq]).is_err());
    }

    #[test]
    fn design_matrix_shape_and_columns() {
        let t = henon(1.4, 0.3).unwrap().iterate(&[0.1, 0.1], 50, 0).unwrap();
        let lib = build_library(2, 2, false).unwrap();
        let d = evaluate_library(&lib, &t).unwrap();
        assert_eq!(d.rows, 49);
        let k1 = lib.rhs().iter().position(Basis::is_constant).unwrap();
        assert!(d.rhs[k1].iter().all(|&v| v == 1.0));
        let kx = lib.rhs().iter().position(|b| *b == Basis::var(0)).unwrap();
        for (y, x) in d.lhs[1].iter().zip(&d.rhs[kx]) {
            assert_eq!(*y, 0.3 * x);
        }
    }

    #[test]
    fn too_few_samples() {
        let t = henon(1.4, 0.3).unwrap().iterate(&[0.1, 0.1], 6, 0).unwrap();
        let lib = build_library(2, 2, false).unwrap();
        assert!(matches!(evaluate_library(&lib, &t), Err(Error::Underdetermined { .. })));
    }

    #[test]
    fn stlsq_exact_representation() {
        let x: Vec<f64> = (0..30).map(|i| (i as f64 * 0.37).sin()).collect();
        let cols = vec![vec![1.0; 30], x.clone(), x.iter().map(|v| v * v).collect::<Vec<_>>()];
        let b: Vec<f64> = x.iter().map(|v| 2.0 * v).collect();
        let fit = stlsq(&cols, &b, 0.1, 20).unwrap();
        assert_eq!(fit.support(), vec![1]);
        assert!((fit.coefficients[1] - 2.0).abs() < 1e-12);
        assert!(fit.residual < 1e-12);
    }

    #[test]
    fn stlsq_recovers_henon_x() {
        let t = henon(1.4, 0.3).unwrap().iterate(&[0.1, 0.1], 10_000, 0).unwrap();
        let lib = build_library(2, 3, false).unwrap();
        let d = evaluate_library(&lib, &t).unwrap();
        let fit = stlsq(&d.rhs, &d.lhs[0], 0.01, 20).unwrap();
        assert_eq!(fit.support_size, 3);
        let c = |b: Basis| fit.coefficients[lib.rhs().iter().position(|x| *x == b).unwrap()];
        assert!((c(Basis::constant()) - 1.0).abs() < 1e-6);
        assert!((c(Basis::var(1)) - 1.0).abs() < 1e-6);
        assert!((c(Basis::monomial(&[2, 0])) + 1.4).abs() < 1e-6);
    }

    #[test]
    fn stlsq_zero_target_is_empty_model() {
        let cols = vec![vec![1.0, 2.0, 3.0]];
        assert_eq!(stlsq(&cols, &[0.0; 3], 0.1, 5), Err(Error::EmptyModel));
        assert!(stlsq(&cols, &[1.0; 3], 0.0, 5).is_err());
    }

    #[test]
    fn stlsq_degenerate_names_columns() {
        let a = vec![1.0, 2.0, 3.0, 4.0];
        let cols = vec![a.clone(), vec![1.0, 0.0, 1.0, 0.0], a.iter().map(|v| 2.0 * v).collect()];
        match stlsq(&cols, &[1.0, 2.0, 0.5, 1.0], 0.01, 5) {
            Err(Error::DegenerateRegression { columns }) => {
                assert!(columns == vec![0] || columns == vec![2])
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn fit_henon_exactly() {
        let t = henon(1.4, 0.3).unwrap().iterate(&[0.1, 0.1], 10_000, 0).unwrap();
        let lib = build_library(2, 3, false).unwrap();
        let res = sindy_pi_fit(&t, &lib, &FitOptions::default()).unwrap();
        let truth = henon(1.4, 0.3).unwrap();
        assert!(model_error(&res.map, &truth).unwrap() < 1e-9);
        assert_eq!(res.map.coords()[0].len(), 3);
        assert_eq!(res.map.coords()[1].len(), 1);
        assert_eq!(
            crate::model::format_equations(&res.map, Some(4)),
            vec!["x' = 1 - 1.4*x^2 + y", "y' = 0.3*x"]
        );
    }

    #[test]
    fn recovers_lozi_and_logistic3d() {
        let opts = FitOptions::default();
        let lozi = crate::maps::lozi(1.7, 0.5).unwrap();
        let lib = build_library(2, 2, true).unwrap();
        let fit = identify_from_map(&lozi, &[0.1, 0.1], 10_000, None, &lib, &opts).unwrap();
        let err = model_error(&fit.map, &lozi).unwrap();
        assert!(err < 1e-4, "lozi error {err}");

        let log3 = crate::maps::logistic3d();
        let t = log3.iterate(&[0.1, 0.2, 0.3], 10_000, 500).unwrap();
        let fit = sindy_pi_fit(&t, &build_library(3, 3, false).unwrap(), &opts).unwrap();
        let err = model_error(&fit.map, &log3).unwrap();
        assert!(err < 1e-4, "logistic error {err}");
    }

    #[test]
    fn composite_lhs_still_recovers_henon() {
        let t = henon(1.4, 0.3).unwrap().iterate(&[0.1, 0.1], 4_000, 0).unwrap();
        let lib = build_library(2, 3, false).unwrap().with_composite_lhs();
        let res = sindy_pi_fit(&t, &lib, &FitOptions::default()).unwrap();
        assert!(model_error(&res.map, &henon(1.4, 0.3).unwrap()).unwrap() < 1e-6);
    }

    #[test]
    fn model_error_examples() {
        let truth = henon(1.4, 0.3).unwrap();
        assert_eq!(model_error(&truth, &truth).unwrap(), 0.0);
        let mut coords: Vec<Vec<Term>> = henon(1.3, 0.3).unwrap().coords().to_vec();
        coords[0].push(Term::new(0.1, Basis::monomial(&[1, 1])));
        let learned = MapSpec::new(coords).unwrap();
        let e = model_error(&learned, &truth).unwrap();
        assert!((e - 0.02f64.sqrt()).abs() < 1e-12);
        assert!(model_error(&crate::maps::logistic3d(), &truth).is_err());
    }

    #[test]
    fn size_sweep_errors() {
        let truth = henon(1.4, 0.3).unwrap();
        let lib = build_library(2, 3, false).unwrap();
        assert!(data_size_sweep(&truth, &[0.1, 0.1], &[], &lib, &FitOptions::default()).is_err());
        match data_size_sweep(&truth, &[0.1, 0.1], &[5], &lib, &FitOptions::default()) {
            Err(Error::AtSize { size: 5, .. }) => {}
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn size_sweep_single_matches_direct_fit() {
        let truth = henon(1.4, 0.3).unwrap();
        let lib = build_library(2, 3, false).unwrap();
        let opts = FitOptions::default();
        let sweep = data_size_sweep(&truth, &[0.1, 0.1], &[3000], &lib, &opts).unwrap();
        let direct = identify_from_map(&truth, &[0.1, 0.1], 3000, None, &lib, &opts).unwrap();
        assert_eq!(sweep, vec![(3000, model_error(&direct.map, &truth).unwrap())]);
    }

    #[test]
    fn noise_sweep_zero_and_small() {
        let truth = henon(1.4, 0.3).unwrap();
        let lib = build_library(2, 3, false).unwrap();
        let pts = noise_sweep(
            &truth,
            &[0.1, 0.1],
            10_000,
            &[0.0, 1e-4],
            7,
            &lib,
            &FitOptions::default(),
        )
        .unwrap();
        let zero = pts[0].outcome.as_ref().unwrap();
        assert!(zero.deviations.iter().all(|d| d.deviation < 1e-9));
        assert!(zero.spurious.is_empty());
        let small = pts[1].outcome.as_ref().unwrap();
        assert!(small.deviations.iter().all(|d| d.deviation < 1e-2));
        assert!(small.spurious.is_empty(), "{:?}", small.spurious);
        assert!(noise_sweep(&truth, &[0.1, 0.1], 100, &[1e-3, 1e-4], 7, &lib, &FitOptions::default()).is_err());
    }

    #[test]
    fn raising_significance_never_adds_terms() {
        let t = henon(1.4, 0.3)
            .unwrap()
            .iterate(&[0.1, 0.1], 10_000, 0)
            .unwrap()
            .add_gaussian_noise(1e-3, 11)
            .unwrap();
        let lib = build_library(2, 3, false).unwrap();
        let mut prev = usize::MAX;
        for sig in [0.0, 1e-4, 1e-3, 5e-3, 2e-2, 0.2] {
            let opts = FitOptions {
                significance: sig,
                ..FitOptions::default()
            };
            let n: usize = sindy_pi_fit(&t, &lib, &opts)
                .map(|r| r.map.coords().iter().map(Vec::len).sum())
                .unwrap();
            assert!(n <= prev);
            prev = n;
        }
    }
}
