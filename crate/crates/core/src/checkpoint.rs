//! Versioned JSON records exchanged between pipeline stages.

use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::adapt::{AdaptConfig, AdaptResult, AdaptStep, StopReason};
use crate::energyderiv::{HessianMeta, HessianResult};
use crate::error::{Error, Result};
use crate::normalmodes::ModeResult;
use crate::simulator::{Circuit, Excitation};
use crate::tailgate::{ScreeningReport, TailgatedCircuit};

pub const CHECKPOINT_SCHEMA: &str = "tailgating.checkpoint/1";
pub const HESSIAN_SCHEMA: &str = "tailgating.hessian/1";
pub const MODES_SCHEMA: &str = "tailgating.modes/1";
pub const SELECTION_SCHEMA: &str = "tailgating.selection/1";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdaptSummary {
    pub config: AdaptConfig,
    pub reference_energy: f64,
    pub converged: bool,
    pub stop: StopReason,
    pub final_max_gradient: f64,
    pub grad_norm: f64,
    pub history: Vec<AdaptStep>,
}

/// Optimized circuit, optionally with a zero-angle tail.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub schema: String,
    pub molecule: String,
    pub grid_hash: Option<String>,
    pub circuit: Circuit,
    pub theta: Vec<f64>,
    pub energy: f64,
    #[serde(default)]
    pub tail: Vec<Excitation>,
    #[serde(default)]
    pub epsilon: Option<f64>,
    #[serde(default)]
    pub order: Option<usize>,
    #[serde(default)]
    pub exact_energy: Option<f64>,
    #[serde(default)]
    pub fidelity: Option<f64>,
    #[serde(default)]
    pub adapt: Option<AdaptSummary>,
    /// Seconds since the Unix epoch; the only field that varies between
    /// identical runs.
    #[serde(default)]
    pub timestamp: u64,
}

fn now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs())
}

impl Checkpoint {
    pub fn from_adapt(molecule: &str, grid_hash: Option<String>, result: &AdaptResult, config: &AdaptConfig) -> Self {
        Self {
            schema: CHECKPOINT_SCHEMA.into(),
            molecule: molecule.into(),
            grid_hash,
            circuit: result.circuit.clone(),
            theta: result.theta.clone(),
            energy: result.energy,
            tail: Vec::new(),
            epsilon: None,
            order: None,
            exact_energy: None,
            fidelity: None,
            adapt: Some(AdaptSummary {
                config: *config,
                reference_energy: result.reference_energy,
                converged: result.converged,
                stop: result.stop,
                final_max_gradient: result.final_max_gradient,
                grad_norm: result.grad_norm,
                history: result.history.clone(),
            }),
            timestamp: now(),
        }
    }

    /// The stored head and tail; the screening report is not carried.
    pub fn tailgated(&self) -> TailgatedCircuit {
        TailgatedCircuit {
            head: self.circuit.clone(),
            head_theta: self.theta.clone(),
            tail: self.tail.clone(),
            report: None,
        }
    }

    pub fn with_tail(&self, tc: &TailgatedCircuit, order: usize) -> Self {
        let mut c = self.clone();
        c.tail = tc.tail.clone();
        c.epsilon = tc.report.as_ref().map(|r| r.epsilon);
        c.order = Some(order);
        c.timestamp = now();
        c
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let c: Self = read_json(path.as_ref())?;
        check_schema(path.as_ref(), &c.schema, CHECKPOINT_SCHEMA)?;
        if c.theta.len() != c.circuit.gates.len() {
            return Err(Error::ParameterLength {
                expected: c.circuit.gates.len(),
                found: c.theta.len(),
            });
        }
        Ok(c)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelectionRecord {
    pub schema: String,
    pub order: usize,
    pub derivative_set: Vec<Vec<usize>>,
    pub report: ScreeningReport,
}

impl SelectionRecord {
    pub fn new(order: usize, derivative_set: Vec<Vec<usize>>, report: ScreeningReport) -> Self {
        Self {
            schema: SELECTION_SCHEMA.into(),
            order,
            derivative_set,
            report,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HessianRecord {
    pub schema: String,
    pub units: String,
    pub n: usize,
    /// Row-major.
    pub matrix: Vec<f64>,
    pub asymmetry: f64,
    pub warning: bool,
    pub gradient: Vec<f64>,
    pub energy: f64,
    pub meta: HessianMeta,
}

impl HessianRecord {
    pub fn new(h: &HessianResult) -> Self {
        let n = h.matrix.nrows();
        Self {
            schema: HESSIAN_SCHEMA.into(),
            units: "hartree/bohr^2".into(),
            n,
            matrix: (0..n)
                .flat_map(|i| (0..n).map(move |j| (i, j)))
                .map(|ij| h.matrix[ij])
                .collect(),
            asymmetry: h.asymmetry,
            warning: h.warning(),
            gradient: h.gradient.clone(),
            energy: h.energy,
            meta: h.meta.clone(),
        }
    }

    pub fn matrix(&self) -> nalgebra::DMatrix<f64> {
        nalgebra::DMatrix::from_row_slice(self.n, self.n, &self.matrix)
    }

    /// One whitespace-separated row per line.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for row in self.matrix.chunks(self.n.max(1)) {
            let cells: Vec<String> = row.iter().map(|x| format!("{x:.12e}")).collect();
            s.push_str(&cells.join(" "));
            s.push('\n');
        }
        s
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let r: Self = read_json(path.as_ref())?;
        check_schema(path.as_ref(), &r.schema, HESSIAN_SCHEMA)?;
        if r.matrix.len() != r.n * r.n {
            return Err(Error::Dimension(format!(
                "{} entries for a {}×{} matrix",
                r.matrix.len(),
                r.n,
                r.n
            )));
        }
        Ok(r)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModesRecord {
    pub schema: String,
    pub units: String,
    pub modes: ModeResult,
}

impl ModesRecord {
    pub fn new(modes: ModeResult) -> Self {
        Self {
            schema: MODES_SCHEMA.into(),
            units: "cm^-1".into(),
            modes,
        }
    }
}

fn check_schema(path: &Path, found: &str, expected: &str) -> Result<()> {
    if found == expected {
        Ok(())
    } else {
        Err(Error::Manifest {
            path: path.to_path_buf(),
            message: format!("schema {found:?}, expected {expected:?}"),
        })
    }
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_str(&text)?)
}

/// Pretty JSON with a trailing newline.
pub fn write_json<T: Serialize>(path: impl AsRef<Path>, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_text(path, &text)
}

pub fn write_text(path: impl AsRef<Path>, text: &str) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}
