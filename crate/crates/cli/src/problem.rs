//! Problem-file schema and parsing.
//!
//! A problem file is a JSON document declaring the plant matrices in
//! row-major order with explicit dimensions, the uncertain entries of A,
//! the decentralized block sizes, and (optionally) solver parameters:
//!
//! ```json
//! {
//!   "name": "optional label",
//!   "a":  {"rows": 3, "cols": 3, "data": [ ... ]},
//!   "b1": {"rows": 3, "cols": 3, "data": [ ... ]},
//!   "b2": {"rows": 3, "cols": 2, "data": [ ... ]},
//!   "c":  {"rows": 3, "cols": 3, "data": [ ... ]},
//!   "d":  {"rows": 3, "cols": 2, "data": [ ... ]},
//!   "uncertainty": [{"row": 0, "col": 0, "relative_magnitude": 0.05}],
//!   "block_sizes": [2, 1],
//!   "solver": {"sigma": 1.0, "tau": 0.618, "epsilon": 1e-3}
//! }
//! ```
//!
//! Unknown keys are rejected everywhere so typos cannot silently change an
//! experiment. Omitted solver fields fall back to σ = 1, τ = 0.618,
//! ε = 1e-3 and the library's iteration/logging defaults.

use std::fmt;
use std::path::Path;

use nalgebra::DMatrix;
use serde::Deserialize;

use rdh2_core::model::{validate_plant, BlockStructure, PlantModel, UncertainEntry, UncertaintySpec};
use rdh2_core::solver::SolverConfig;

/// Everything the subcommands need, parsed and validated.
#[derive(Debug, Clone)]
pub struct ParsedProblem {
    pub name: Option<String>,
    pub plant: PlantModel<f64>,
    pub uncertainty: UncertaintySpec<f64>,
    pub structure: BlockStructure,
    pub solver: SolverOverrides,
}

/// Solver parameters from the problem file, before command-line flags are
/// applied on top.
#[derive(Debug, Clone, Copy, Default)]
pub struct SolverOverrides {
    pub sigma: Option<f64>,
    pub tau: Option<f64>,
    pub epsilon: Option<f64>,
    pub max_iterations: Option<usize>,
    pub log_every: Option<usize>,
}

impl SolverOverrides {
    /// Layer these overrides on top of another set; `self` wins.
    pub fn over(self, base: SolverOverrides) -> SolverOverrides {
        SolverOverrides {
            sigma: self.sigma.or(base.sigma),
            tau: self.tau.or(base.tau),
            epsilon: self.epsilon.or(base.epsilon),
            max_iterations: self.max_iterations.or(base.max_iterations),
            log_every: self.log_every.or(base.log_every),
        }
    }

    /// Resolve to a concrete configuration, filling gaps with the defaults.
    pub fn resolve(self) -> Result<SolverConfig<f64>, CliError> {
        let defaults = SolverConfig::<f64>::default();
        let config = SolverConfig::new(
            self.sigma.unwrap_or_else(|| defaults.sigma()),
            self.tau.unwrap_or_else(|| defaults.tau()),
            self.epsilon.unwrap_or_else(|| defaults.epsilon()),
        )
        .map_err(CliError::validation)?
        .with_max_iterations(self.max_iterations.unwrap_or_else(|| defaults.max_iterations()))
        .with_log_every(self.log_every.unwrap_or_else(|| defaults.log_every()));
        Ok(config)
    }
}

/// Errors surfaced to the command line; every variant exits with code 1.
#[derive(Debug)]
pub enum CliError {
    /// File could not be read or written.
    Io { path: String, message: String },
    /// File content is not valid JSON or violates the schema; the message
    /// carries serde's line/column and field context.
    Parse { path: String, message: String },
    /// The file parsed but describes an inconsistent problem.
    Validation { message: String },
    /// Invalid flag combination or value.
    Usage { message: String },
}

impl CliError {
    pub fn io(path: &Path, err: std::io::Error) -> Self {
        CliError::Io { path: path.display().to_string(), message: err.to_string() }
    }

    pub fn validation(err: impl fmt::Display) -> Self {
        CliError::Validation { message: err.to_string() }
    }

    pub fn usage(message: impl Into<String>) -> Self {
        CliError::Usage { message: message.into() }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Io { path, message } => write!(f, "{path}: {message}"),
            CliError::Parse { path, message } => write!(f, "{path}: {message}"),
            CliError::Validation { message } => write!(f, "invalid problem: {message}"),
            CliError::Usage { message } => write!(f, "{message}"),
        }
    }
}

impl std::error::Error for CliError {}

/// A dense matrix in row-major order with declared dimensions.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixFile {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl MatrixFile {
    /// Reject ragged declarations, then build the dense matrix.
    pub fn to_matrix(&self, field: &str) -> Result<DMatrix<f64>, CliError> {
        if self.rows * self.cols != self.data.len() {
            return Err(CliError::Validation {
                message: format!(
                    "matrix `{field}` declares {}x{} = {} entries but carries {}",
                    self.rows,
                    self.cols,
                    self.rows * self.cols,
                    self.data.len()
                ),
            });
        }
        Ok(DMatrix::from_row_slice(self.rows, self.cols, &self.data))
    }

    pub fn from_matrix(matrix: &DMatrix<f64>) -> Self {
        let mut data = Vec::with_capacity(matrix.nrows() * matrix.ncols());
        for r in 0..matrix.nrows() {
            for c in 0..matrix.ncols() {
                data.push(matrix[(r, c)]);
            }
        }
        MatrixFile { rows: matrix.nrows(), cols: matrix.ncols(), data }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct EntryFile {
    row: usize,
    col: usize,
    relative_magnitude: f64,
}

#[derive(Debug, Clone, Copy, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct SolverBlock {
    sigma: Option<f64>,
    tau: Option<f64>,
    epsilon: Option<f64>,
    max_iterations: Option<usize>,
    log_every: Option<usize>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProblemFile {
    #[serde(default)]
    name: Option<String>,
    a: MatrixFile,
    b1: MatrixFile,
    b2: MatrixFile,
    c: MatrixFile,
    d: MatrixFile,
    #[serde(default)]
    uncertainty: Vec<EntryFile>,
    block_sizes: Vec<usize>,
    #[serde(default)]
    solver: Option<SolverBlock>,
}

/// Read, schema-check, and validate a problem file.
pub fn parse_problem(path: &Path) -> Result<ParsedProblem, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let file: ProblemFile = serde_json::from_str(&text).map_err(|e| CliError::Parse {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;

    let plant = PlantModel::new(
        file.a.to_matrix("a")?,
        file.b1.to_matrix("b1")?,
        file.b2.to_matrix("b2")?,
        file.c.to_matrix("c")?,
        file.d.to_matrix("d")?,
    );
    let plant = validate_plant(plant).map_err(CliError::validation)?;

    let n = plant.n();
    let mut entries = Vec::with_capacity(file.uncertainty.len());
    for (k, e) in file.uncertainty.iter().enumerate() {
        if e.row >= n || e.col >= n {
            return Err(CliError::Validation {
                message: format!(
                    "uncertainty entry {k} points at A[{},{}] but A is {n}x{n}",
                    e.row, e.col
                ),
            });
        }
        if !(e.relative_magnitude.is_finite() && e.relative_magnitude >= 0.0) {
            return Err(CliError::Validation {
                message: format!(
                    "uncertainty entry {k} has relative magnitude {}, need a finite value >= 0",
                    e.relative_magnitude
                ),
            });
        }
        entries.push(UncertainEntry {
            row: e.row,
            col: e.col,
            relative_magnitude: e.relative_magnitude,
        });
    }

    let structure = BlockStructure::new(file.block_sizes).map_err(CliError::validation)?;
    if structure.n() != plant.n() {
        return Err(CliError::Validation {
            message: format!(
                "block sizes sum to {} but the plant has {} states",
                structure.n(),
                plant.n()
            ),
        });
    }
    if structure.m() != plant.m() {
        return Err(CliError::Validation {
            message: format!(
                "{} blocks declared but the plant has {} inputs",
                structure.m(),
                plant.m()
            ),
        });
    }

    let solver = file
        .solver
        .map(|s| SolverOverrides {
            sigma: s.sigma,
            tau: s.tau,
            epsilon: s.epsilon,
            max_iterations: s.max_iterations,
            log_every: s.log_every,
        })
        .unwrap_or_default();

    Ok(ParsedProblem {
        name: file.name,
        plant,
        uncertainty: UncertaintySpec::new(entries),
        structure,
        solver,
    })
}
