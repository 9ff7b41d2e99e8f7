//! Comparative errors against nested fine-grid references and convergence
//! studies.
//!
//! No closed-form solution is available for the nonlinear problems, so the
//! error of a run is measured against a second run on a mesh refined by an
//! integer factor, with the time step refined by the same factor. Reference
//! values are read at coincident nodes and time levels, never interpolated.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fem::UniformMesh;
use crate::problem::{CorrectionLevel, ProblemSpec};
use crate::timestep::{integrate_level, SolutionHistory, SolverOptions, TimeGrid};

/// Relative tolerance for matching coarse and reference time levels.
const TIME_MATCH_TOLERANCE: f64 = 1e-12;
const NODE_MATCH_TOLERANCE: f64 = 1e-14;

/// `|u_coarse - u_ref|` at the coarse nodes and time levels.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorField {
    pub mesh: UniformMesh,
    pub times: Vec<f64>,
    pub e: Vec<Vec<f64>>,
}

impl ErrorField {
    /// Largest entry over all nodes and times, with its `(k, j)` position.
    pub fn peak(&self) -> (f64, usize, usize) {
        let mut best = (0.0, 0, 0);
        for (k, row) in self.e.iter().enumerate() {
            for (j, &x) in row.iter().enumerate() {
                if x > best.0 {
                    best = (x, k, j);
                }
            }
        }
        best
    }
}

pub fn comparative_error(coarse: &SolutionHistory, reference: &SolutionHistory) -> Result<ErrorField> {
    let nc = coarse.mesh.n_segments();
    let nr = reference.mesh.n_segments();
    if !nr.is_multiple_of(nc) {
        return Err(Error::IncompatibleGrids(format!("reference mesh N = {nr} is not a multiple of N = {nc}")));
    }
    let space_ratio = nr / nc;
    for j in 0..=nc {
        if (coarse.mesh.node(j) - reference.mesh.node(j * space_ratio)).abs() > NODE_MATCH_TOLERANCE {
            return Err(Error::IncompatibleGrids(format!("node {j} does not coincide with the reference node")));
        }
    }
    let kc = coarse.n_times() - 1;
    let kr = reference.n_times() - 1;
    if kc == 0 || !kr.is_multiple_of(kc) {
        return Err(Error::IncompatibleGrids(format!(
            "reference has {kr} steps, not a multiple of the {kc} coarse steps"
        )));
    }
    let time_ratio = kr / kc;
    let mut e = Vec::with_capacity(kc + 1);
    for k in 0..=kc {
        let t = coarse.times[k];
        let tr = reference.times[k * time_ratio];
        if (t - tr).abs() > TIME_MATCH_TOLERANCE * t.abs().max(1.0) {
            return Err(Error::IncompatibleGrids(format!("time level {t} has no reference counterpart (found {tr})")));
        }
        let row = &reference.u[k * time_ratio];
        e.push(
            coarse.u[k]
                .iter()
                .enumerate()
                .map(|(j, uc)| (uc - row[j * space_ratio]).abs())
                .collect(),
        );
    }
    Ok(ErrorField { mesh: coarse.mesh, times: coarse.times.clone(), e })
}

/// `(t_k, max_j e[k][j])` for every stored time.
pub fn max_error_evolution(e: &ErrorField) -> Vec<(f64, f64)> {
    e.times
        .iter()
        .zip(&e.e)
        .map(|(&t, row)| (t, row.iter().copied().fold(0.0, f64::max)))
        .collect()
}

/// Least-squares slope of `log err` against `log dx`.
pub fn fit_order(dx: &[f64], err: &[f64]) -> f64 {
    assert_eq!(dx.len(), err.len());
    let n = dx.len() as f64;
    let xs: Vec<f64> = dx.iter().map(|d| d.ln()).collect();
    let ys: Vec<f64> = err.iter().map(|e| e.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// Which correction the fine reference run uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReferencePolicy {
    /// Same correction as the run under test (self-convergence).
    Same,
    /// One fixed correction for every run.
    Pinned(CorrectionLevel),
}

impl ReferencePolicy {
    pub fn level_for(&self, level: CorrectionLevel) -> CorrectionLevel {
        match self {
            ReferencePolicy::Same => level,
            ReferencePolicy::Pinned(l) => *l,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyOptions {
    pub n_ref: usize,
    /// `dt = dt_factor * dx`, rounded to a whole number of steps.
    pub dt_factor: f64,
    pub solver: SolverOptions,
    pub reference: ReferencePolicy,
}

impl Default for StudyOptions {
    fn default() -> Self {
        Self { n_ref: 1024, dt_factor: 0.25, solver: SolverOptions::default(), reference: ReferencePolicy::Same }
    }
}

/// Coarse run, its reference, and their comparative error.
#[derive(Debug, Clone)]
pub struct ComparedRun {
    pub coarse: SolutionHistory,
    pub reference: SolutionHistory,
    pub error: ErrorField,
}

impl ComparedRun {
    pub fn max_over_time(&self) -> f64 {
        self.error.peak().0
    }
}

/// Time grid for mesh `n`: `dt = dt_factor / n`, rounded to whole steps.
pub fn grid_for(spec: &ProblemSpec, n: usize, dt_factor: f64) -> Result<TimeGrid> {
    TimeGrid::new(dt_factor / n as f64, spec.t_final())
}

pub fn compare_run(spec: &ProblemSpec, level: CorrectionLevel, n: usize, opts: &StudyOptions) -> Result<ComparedRun> {
    if n == 0 || !opts.n_ref.is_multiple_of(n) {
        return Err(Error::IncompatibleGrids(format!("N = {n} does not divide N_ref = {}", opts.n_ref)));
    }
    let mesh = UniformMesh::new(n)?;
    let grid = grid_for(spec, n, opts.dt_factor)?;
    let ratio = opts.n_ref / n;
    let ref_mesh = UniformMesh::new(opts.n_ref)?;
    let ref_grid = grid.refined(ratio)?;
    let ref_level = opts.reference.level_for(level);
    let (coarse, reference) = rayon::join(
        || integrate_level(spec, level, &mesh, &grid, &opts.solver),
        || integrate_level(spec, ref_level, &ref_mesh, &ref_grid, &opts.solver),
    );
    let (coarse, reference) = (coarse?, reference?);
    let error = comparative_error(&coarse, &reference)?;
    Ok(ComparedRun { coarse, reference, error })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub n: usize,
    pub dx: f64,
    /// Max nodal error at the first time step `t = dt`.
    pub err_initial_step: f64,
    /// Max nodal error at `t = T`.
    pub err_final_time: f64,
    /// Max nodal error over all time levels.
    pub err_max_over_time: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceTable {
    pub level: CorrectionLevel,
    pub rows: Vec<ConvergenceRow>,
    pub order_initial_step: f64,
    pub order_final_time: f64,
}

/// Runs every mesh in `n_list` against its nested reference and fits the
/// observed orders. Runs execute in parallel; `reporter` sees the rows in
/// `n_list` order once all runs have finished.
pub fn convergence_study(
    spec: &ProblemSpec,
    level: CorrectionLevel,
    n_list: &[usize],
    opts: &StudyOptions,
    reporter: &mut dyn FnMut(&ConvergenceRow),
) -> Result<ConvergenceTable> {
    if n_list.len() < 3 {
        return Err(Error::InvalidData(format!("convergence study needs at least 3 meshes, got {}", n_list.len())));
    }
    if n_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidData("mesh sizes must be strictly increasing".into()));
    }
    for &n in n_list {
        if !opts.n_ref.is_multiple_of(n) {
            return Err(Error::IncompatibleGrids(format!("N = {n} does not divide N_ref = {}", opts.n_ref)));
        }
    }
    let results: Vec<Result<ConvergenceRow>> = n_list
        .par_iter()
        .map(|&n| {
            let run = compare_run(spec, level, n, opts)?;
            let series = max_error_evolution(&run.error);
            Ok(ConvergenceRow {
                n,
                dx: 1.0 / n as f64,
                err_initial_step: series[1].1,
                err_final_time: series.last().unwrap().1,
                err_max_over_time: series.iter().map(|s| s.1).fold(0.0, f64::max),
            })
        })
        .collect();
    let mut rows = Vec::with_capacity(results.len());
    for r in results {
        let row = r?;
        reporter(&row);
        rows.push(row);
    }
    let dx: Vec<f64> = rows.iter().map(|r| r.dx).collect();
    let e0: Vec<f64> = rows.iter().map(|r| r.err_initial_step).collect();
    let et: Vec<f64> = rows.iter().map(|r| r.err_final_time).collect();
    Ok(ConvergenceTable { level, order_initial_step: fit_order(&dx, &e0), order_final_time: fit_order(&dx, &et), rows })
}
