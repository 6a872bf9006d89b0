//! Input and report documents.

use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::exact::Entry;
use crate::amoeba::{AmoebaReport, AnalysisConfig, ScanBox};
use crate::exposum::{ExponentialSum, Term, VERTEX_TOLERANCE};
use crate::lattice::{IntMatrix, LatticeIso};
use crate::ronkin::{GRADIENT_STEP, ORDER_TOLERANCE};
use crate::{Error, Result};

pub const INPUT_SCHEMA: &str = "expamoeba/input/v1";
pub const REPORT_SCHEMA: &str = "expamoeba/report/v1";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermEntry {
    pub exponent: Vec<i64>,
    /// `[re, im]`
    pub coeff: [f64; 2],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputDocument {
    pub schema: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub n: usize,
    /// `m` rows of length `n`; row `j` is the generator `g_j ∈ ℝⁿ`.
    pub generators: Vec<Vec<Entry>>,
    pub terms: Vec<TermEntry>,
    /// Optional lattice basis (rows in generator coordinates) pinning `γ`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub basis: Option<Vec<Vec<i64>>>,
}

impl InputDocument {
    pub fn parse(text: &str) -> Result<Self> {
        let doc: InputDocument =
            serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        if doc.schema != INPUT_SCHEMA {
            return Err(Error::Parse(format!(
                "unsupported schema {:?}, expected {INPUT_SCHEMA:?}",
                doc.schema
            )));
        }
        doc.to_sum()?;
        Ok(doc)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Parse(format!("cannot read {}: {e}", path.display())))?;
        InputDocument::parse(&text).map_err(|e| e.context(path.display().to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("input documents serialize") + "\n"
    }

    pub fn to_sum(&self) -> Result<ExponentialSum> {
        for (j, row) in self.generators.iter().enumerate() {
            if row.len() != self.n {
                return Err(Error::Parse(format!(
                    "generator {j} has {} entries, expected n = {}",
                    row.len(),
                    self.n
                )));
            }
        }
        let generators = self
            .generators
            .iter()
            .map(|row| row.iter().map(Entry::value).collect())
            .collect();
        let terms = self
            .terms
            .iter()
            .map(|t| Term {
                exponent: t.exponent.clone(),
                coeff: Complex64::new(t.coeff[0], t.coeff[1]),
            })
            .collect();
        ExponentialSum::new(generators, terms).map_err(|e| e.context("input"))
    }

    /// The isomorphism `γ`: from `basis` when given, canonical otherwise.
    pub fn lattice_iso(&self, f: &ExponentialSum) -> Result<LatticeIso> {
        match &self.basis {
            None => f.lattice_iso(),
            Some(rows) => {
                let m = f.generator_count();
                let b = IntMatrix::from_i64_rows(rows, m)?;
                LatticeIso::with_basis(&f.exponent_matrix(), b, f.generators())
            }
        }
        .map_err(|e| e.context("lattice"))
    }

    pub fn display_name(&self) -> String {
        self.name.clone().unwrap_or_else(|| "input".to_string())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Provenance {
    pub tool: &'static str,
    pub version: &'static str,
    pub resolution: usize,
    pub theta_grid: usize,
    pub membership_threshold: f64,
    pub quadrature_nodes: usize,
    pub gradient_step: f64,
    pub order_tolerance: f64,
    pub vertex_tolerance: f64,
    pub scan_box: ScanBox,
    /// Generator entries as written in the input.
    pub generators: Vec<Vec<String>>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReportDocument {
    pub schema: &'static str,
    pub name: String,
    pub provenance: Provenance,
    pub report: AmoebaReport,
}

impl ReportDocument {
    pub fn new(input: &InputDocument, config: &AnalysisConfig, report: AmoebaReport) -> Self {
        ReportDocument {
            schema: REPORT_SCHEMA,
            name: input.display_name(),
            provenance: Provenance {
                tool: env!("CARGO_PKG_NAME"),
                version: env!("CARGO_PKG_VERSION"),
                resolution: config.scan.resolution,
                theta_grid: config.scan.theta_grid,
                membership_threshold: config.scan.threshold,
                quadrature_nodes: config.scan.quadrature_nodes,
                gradient_step: GRADIENT_STEP,
                order_tolerance: ORDER_TOLERANCE,
                vertex_tolerance: VERTEX_TOLERANCE,
                scan_box: report.components.scan_box.clone(),
                generators: input
                    .generators
                    .iter()
                    .map(|row| row.iter().map(|e| e.to_string()).collect())
                    .collect(),
            },
            report,
        }
    }

    /// Serializes after re-checking the bound chain and that every number is
    /// finite (non-finite floats would surface as `null`).
    pub fn to_json(&self) -> Result<String> {
        self.report.check_bound_chain()?;
        let value = serde_json::to_value(self).map_err(|e| Error::Parse(e.to_string()))?;
        if let Some(path) = find_null(&value, String::new()) {
            return Err(Error::InvalidSum(format!("non-finite value at {path}")));
        }
        Ok(serde_json::to_string_pretty(&value).expect("value serializes") + "\n")
    }
}

fn find_null(v: &serde_json::Value, path: String) -> Option<String> {
    match v {
        serde_json::Value::Null => Some(path),
        serde_json::Value::Array(a) => a
            .iter()
            .enumerate()
            .find_map(|(i, x)| find_null(x, format!("{path}[{i}]"))),
        serde_json::Value::Object(o) => o
            .iter()
            .find_map(|(k, x)| find_null(x, format!("{path}.{k}"))),
        _ => None,
    }
}
