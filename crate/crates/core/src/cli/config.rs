//! Experiment configuration files.
//!
//! One `key = value` pair per line, `#` starts a comment. Keys are
//! case-sensitive and unknown keys are rejected. A problem is given either
//! as `preset = <name>` or through the explicit fields `kind`, `nu`, `T`,
//! `h`, `g1`, `g2` and `p`, never both.
//!
//! | key | default | meaning |
//! |---|---|---|
//! | `preset` | | `burgers_paper`, `rd_cubic_paper` or `heat_sine` |
//! | `kind` | | `burgers` or `reaction_diffusion` |
//! | `nu` | | diffusivity |
//! | `T` | | final time |
//! | `h` | | `a, b, c` for `h(x) = a sin(b pi x + c pi)` |
//! | `g1`, `g2` | `0` | coefficients of a polynomial in `t`, lowest first |
//! | `p` | | reaction coefficients, lowest first |
//! | `level` | `none` | `none`, `c1` or `c2` |
//! | `N` | `128` | mesh for `solve` |
//! | `N_list` | `32, 64, 128, 256` | meshes for `convergence` |
//! | `N_ref` | `1024` | reference mesh |
//! | `dt_factor` | `0.25` | `dt = dt_factor * dx` |
//! | `theta` | | use the theta scheme instead of BDF2 |
//! | `quad_points` | `5` | Gauss points per element |
//! | `convection` | `group` | `group` or `consistent` |
//! | `reference_correction` | `same` | `same`, or `pinned` to compare against C2 |
//! | `t_off` | | switch the correction off from this time on |
//! | `out_dir` | `.` | output directory |

use std::collections::BTreeMap;
use std::path::PathBuf;

use thiserror::Error;

use crate::analysis::{ReferencePolicy, StudyOptions};
use crate::problem::{
    presets, BoundarySignal, CorrectionLevel, EquationKind, ProblemSpec, ReactionPolynomial, SmoothProfile,
};
use crate::special::Diffusivity;
use crate::timestep::{ConvectionForm, SolverOptions, TimeScheme};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid value for `{key}`: {message}")]
    Invalid { key: String, message: String },
}

const KEYS: [&str; 19] = [
    "preset",
    "kind",
    "nu",
    "T",
    "h",
    "g1",
    "g2",
    "p",
    "level",
    "N",
    "N_list",
    "N_ref",
    "dt_factor",
    "theta",
    "quad_points",
    "convection",
    "reference_correction",
    "t_off",
    "out_dir",
];

const PROBLEM_KEYS: [&str; 7] = ["kind", "nu", "T", "h", "g1", "g2", "p"];

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub spec: ProblemSpec,
    /// Name of the preset, when one was used.
    pub preset: Option<String>,
    pub level: CorrectionLevel,
    pub n: usize,
    pub n_list: Vec<usize>,
    pub study: StudyOptions,
    pub out_dir: PathBuf,
}

fn invalid(key: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid { key: key.to_string(), message: message.into() }
}

struct Entries {
    values: BTreeMap<String, String>,
}

impl Entries {
    fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    fn require(&self, key: &str) -> Result<&str, ConfigError> {
        self.get(key).ok_or_else(|| invalid(key, "required"))
    }

    fn float(&self, key: &str) -> Result<Option<f64>, ConfigError> {
        self.get(key).map(|v| parse_float(key, v)).transpose()
    }

    fn positive_float(&self, key: &str) -> Result<Option<f64>, ConfigError> {
        match self.float(key)? {
            Some(x) if !(x > 0.0) => Err(invalid(key, format!("must be positive, got {x}"))),
            other => Ok(other),
        }
    }

    fn count(&self, key: &str) -> Result<Option<usize>, ConfigError> {
        self.get(key).map(|v| parse_count(key, v)).transpose()
    }
}

fn parse_float(key: &str, text: &str) -> Result<f64, ConfigError> {
    let x: f64 = text.parse().map_err(|_| invalid(key, format!("`{text}` is not a number")))?;
    if !x.is_finite() {
        return Err(invalid(key, format!("`{text}` is not finite")));
    }
    Ok(x)
}

fn parse_count(key: &str, text: &str) -> Result<usize, ConfigError> {
    match text.parse::<i64>() {
        Ok(n) if n > 0 => Ok(n as usize),
        Ok(n) => Err(invalid(key, format!("must be a positive integer, got {n}"))),
        Err(_) => Err(invalid(key, format!("`{text}` is not an integer"))),
    }
}

fn float_list(key: &str, text: &str) -> Result<Vec<f64>, ConfigError> {
    text.split(',').map(|s| parse_float(key, s.trim())).collect()
}

fn tokenize(text: &str) -> Result<Entries, ConfigError> {
    let mut values = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            return Err(ConfigError::Parse { line, message: format!("expected `key = value`, found `{content}`") });
        };
        let (key, value) = (key.trim(), value.trim());
        if key.is_empty() {
            return Err(ConfigError::Parse { line, message: "missing key".into() });
        }
        if !KEYS.contains(&key) {
            return Err(ConfigError::Parse { line, message: format!("unknown key `{key}`") });
        }
        if value.is_empty() {
            return Err(ConfigError::Parse { line, message: format!("missing value for `{key}`") });
        }
        if values.insert(key.to_string(), value.to_string()).is_some() {
            return Err(ConfigError::Parse { line, message: format!("duplicate key `{key}`") });
        }
    }
    Ok(Entries { values })
}

fn explicit_problem(entries: &Entries) -> Result<ProblemSpec, ConfigError> {
    let kind = match entries.require("kind")? {
        "burgers" => EquationKind::Burgers,
        "reaction_diffusion" => EquationKind::ReactionDiffusion,
        other => return Err(invalid("kind", format!("expected `burgers` or `reaction_diffusion`, got `{other}`"))),
    };
    let nu = parse_float("nu", entries.require("nu")?)?;
    let nu = Diffusivity::new(nu).map_err(|e| invalid("nu", e.to_string()))?;
    let t_final = parse_float("T", entries.require("T")?)?;
    if !(t_final > 0.0) {
        return Err(invalid("T", format!("must be positive, got {t_final}")));
    }
    let h = float_list("h", entries.require("h")?)?;
    let [a, b, c] = h[..] else {
        return Err(invalid("h", format!("expected `a, b, c`, got {} values", h.len())));
    };
    let h = SmoothProfile::sine(a, b, c).map_err(|e| invalid("h", e.to_string()))?;
    let signal = |key: &str| -> Result<BoundarySignal, ConfigError> {
        match entries.get(key) {
            Some(text) => Ok(BoundarySignal::polynomial(&float_list(key, text)?)),
            None => Ok(BoundarySignal::zero()),
        }
    };
    let (g1, g2) = (signal("g1")?, signal("g2")?);
    let reaction = match (kind, entries.get("p")) {
        (EquationKind::Burgers, Some(_)) => return Err(invalid("p", "not allowed for a Burgers problem")),
        (EquationKind::Burgers, None) => None,
        (EquationKind::ReactionDiffusion, Some(text)) => {
            Some(ReactionPolynomial::new(&float_list("p", text)?).map_err(|e| invalid("p", e.to_string()))?)
        }
        (EquationKind::ReactionDiffusion, None) => return Err(invalid("p", "required for reaction_diffusion")),
    };
    ProblemSpec::new(kind, nu, g1, g2, h, reaction, t_final).map_err(|e| invalid("kind", e.to_string()))
}

pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let entries = tokenize(text)?;

    let explicit: Vec<&str> = PROBLEM_KEYS.iter().copied().filter(|k| entries.get(k).is_some()).collect();
    let (spec, preset) = match (entries.get("preset"), explicit.first()) {
        (Some(_), Some(key)) => return Err(invalid(key, "cannot be combined with `preset`")),
        (Some(name), None) => {
            let spec = presets::by_name(name).ok_or_else(|| {
                invalid("preset", format!("unknown preset `{name}`, expected one of {}", presets::NAMES.join(", ")))
            })?;
            (spec, Some(name.to_string()))
        }
        (None, _) => (explicit_problem(&entries)?, None),
    };

    let level = match entries.get("level") {
        Some(text) => text.parse().map_err(|e: String| invalid("level", e))?,
        None => CorrectionLevel::None,
    };
    let n = entries.count("N")?.unwrap_or(128);
    let n_list = match entries.get("N_list") {
        Some(text) => text.split(',').map(|s| parse_count("N_list", s.trim())).collect::<Result<Vec<_>, _>>()?,
        None => vec![32, 64, 128, 256],
    };
    if n_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(invalid("N_list", "mesh sizes must be strictly increasing"));
    }
    let defaults = StudyOptions::default();
    let n_ref = entries.count("N_ref")?.unwrap_or(defaults.n_ref);
    if let Some(bad) = std::iter::once(n).chain(n_list.iter().copied()).find(|m| n_ref % m != 0) {
        return Err(invalid("N_ref", format!("{n_ref} is not a multiple of N = {bad}")));
    }
    let dt_factor = entries.positive_float("dt_factor")?.unwrap_or(defaults.dt_factor);
    let scheme = match entries.float("theta")? {
        Some(theta) if !(theta > 0.0 && theta <= 1.0) => {
            return Err(invalid("theta", format!("must lie in (0, 1], got {theta}")))
        }
        Some(theta) => TimeScheme::Theta(theta),
        None => defaults.solver.scheme,
    };
    let quad_points = entries.count("quad_points")?.unwrap_or(defaults.solver.quad_points);
    if quad_points < 2 {
        return Err(invalid("quad_points", "at least 2 points are needed"));
    }
    let convection = match entries.get("convection") {
        None | Some("group") => ConvectionForm::Group,
        Some("consistent") => ConvectionForm::Consistent,
        Some(other) => return Err(invalid("convection", format!("expected `group` or `consistent`, got `{other}`"))),
    };
    let reference = match entries.get("reference_correction") {
        None | Some("same") => ReferencePolicy::Same,
        Some("pinned") => ReferencePolicy::Pinned(CorrectionLevel::C2),
        Some(other) => {
            return Err(invalid("reference_correction", format!("expected `same` or `pinned`, got `{other}`")))
        }
    };
    let t_off = entries.positive_float("t_off")?;
    let out_dir = PathBuf::from(entries.get("out_dir").unwrap_or("."));

    Ok(ExperimentConfig {
        spec,
        preset,
        level,
        n,
        n_list,
        study: StudyOptions {
            n_ref,
            dt_factor,
            solver: SolverOptions { scheme, quad_points, convection, t_off, ..defaults.solver },
            reference,
        },
        out_dir,
    })
}
