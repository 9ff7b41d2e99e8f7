//! Command implementations behind the `cornerfem` binary.
//!
//! Every command takes a parsed [`ExperimentConfig`]. Output files are CSV
//! with a header row and shortest round-trip float formatting, so identical
//! configurations produce byte-identical files.

pub mod config;

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

pub use config::{parse_config, ConfigError, ExperimentConfig};

use crate::analysis::{self, ComparedRun, ConvergenceRow, ConvergenceTable};
use crate::problem::{alpha0, alpha1, ProblemSpec, DEFECT_TOLERANCE};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(#[from] ConfigError),

    #[error("cannot read {path}: {source}")]
    ReadConfig { path: PathBuf, source: std::io::Error },

    #[error("numerical failure: {0}")]
    Numerical(#[from] crate::Error),

    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: std::io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::ReadConfig { .. } => EXIT_CONFIG,
            CliError::Numerical(_) => EXIT_NUMERICAL,
            CliError::Write { .. } => EXIT_IO,
        }
    }
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig, CliError> {
    let text = fs::read_to_string(path).map_err(|source| CliError::ReadConfig { path: path.to_path_buf(), source })?;
    Ok(parse_config(&text)?)
}

/// Defects at one corner and whether they break compatibility.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CornerDefects {
    pub alpha0: f64,
    pub alpha1: f64,
}

impl CornerDefects {
    fn of(spec: &ProblemSpec) -> Self {
        Self { alpha0: alpha0(spec), alpha1: alpha1(spec) }
    }

    pub fn zeroth_order_violated(&self) -> bool {
        self.alpha0.abs() > DEFECT_TOLERANCE
    }

    pub fn first_order_violated(&self) -> bool {
        self.alpha1.abs() > DEFECT_TOLERANCE
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompatReport {
    pub left: CornerDefects,
    pub right: CornerDefects,
}

impl fmt::Display for CompatReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let flag = |violated: bool| if violated { "violated" } else { "ok" };
        writeln!(f, "corner,alpha0,alpha1,zeroth_order,first_order")?;
        for (name, d) in [("left", self.left), ("right", self.right)] {
            writeln!(
                f,
                "{name},{:?},{:?},{},{}",
                d.alpha0,
                d.alpha1,
                flag(d.zeroth_order_violated()),
                flag(d.first_order_violated())
            )?;
        }
        Ok(())
    }
}

pub fn cmd_compat(config: &ExperimentConfig) -> CompatReport {
    CompatReport { left: CornerDefects::of(&config.spec), right: CornerDefects::of(&config.spec.mirrored()) }
}

fn write_file(path: PathBuf, bytes: &[u8]) -> Result<PathBuf, CliError> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|source| CliError::Write { path: dir.to_path_buf(), source })?;
    }
    fs::write(&path, bytes).map_err(|source| CliError::Write { path: path.clone(), source })?;
    Ok(path)
}

fn csv_bytes<R: serde::Serialize>(header: &[&str], rows: impl IntoIterator<Item = R>) -> Vec<u8> {
    let mut wtr = csv::Writer::from_writer(Vec::new());
    wtr.write_record(header).expect("in-memory write");
    for row in rows {
        wtr.serialize(row).expect("in-memory write");
    }
    wtr.into_inner().expect("in-memory flush")
}

#[derive(Debug, Clone)]
pub struct SolveOutput {
    pub run: ComparedRun,
    pub files: Vec<PathBuf>,
}

/// Solves at mesh `N` and against the reference, then writes
/// `solution.csv`, `error_field.csv` and `max_error.csv`.
pub fn cmd_solve(config: &ExperimentConfig) -> Result<SolveOutput, CliError> {
    let run = analysis::compare_run(&config.spec, config.level, config.n, &config.study)?;
    let h = &run.coarse;
    let nodes = h.mesh.nodes();

    let solution = h.times.iter().enumerate().flat_map(|(k, &t)| {
        nodes.iter().enumerate().map(move |(j, &x)| [t, x, h.v[k][j], h.u[k][j]])
    });
    let solution = csv_bytes(&["t", "x", "v", "u"], solution);

    let e = &run.error;
    let field = e.times.iter().zip(&e.e).flat_map(|(&t, row)| nodes.iter().zip(row).map(move |(&x, &ej)| [t, x, ej]));
    let field = csv_bytes(&["t", "x", "e"], field);

    let series = analysis::max_error_evolution(e).into_iter().map(|(t, m)| [t, m]);
    let series = csv_bytes(&["t", "max_e"], series);

    let files = vec![
        write_file(config.out_dir.join("solution.csv"), &solution)?,
        write_file(config.out_dir.join("error_field.csv"), &field)?,
        write_file(config.out_dir.join("max_error.csv"), &series)?,
    ];
    Ok(SolveOutput { run, files })
}

/// Convergence table for the configured level over `N_list`, written to
/// `convergence.csv` with the fitted orders as trailing `#` rows.
pub fn cmd_convergence(
    config: &ExperimentConfig,
    reporter: &mut dyn FnMut(&ConvergenceRow),
) -> Result<(ConvergenceTable, PathBuf), CliError> {
    let table = analysis::convergence_study(&config.spec, config.level, &config.n_list, &config.study, reporter)?;
    let rows = table.rows.iter().map(|r| (r.n, r.dx, r.err_initial_step, r.err_final_time));
    let mut bytes = csv_bytes(&["N", "dx", "err_t0", "err_T"], rows);
    bytes.extend_from_slice(format!("# order_t0,{:?}\n# order_T,{:?}\n", table.order_initial_step, table.order_final_time).as_bytes());
    let path = write_file(config.out_dir.join("convergence.csv"), &bytes)?;
    Ok((table, path))
}
