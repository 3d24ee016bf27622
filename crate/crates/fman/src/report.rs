//! Structured verification reports: one entry per check with the maximum
//! residual over sample points, the tolerance, and the witness point of the
//! maximum. The machine-readable document serializes deterministically for
//! fixed input and seed.

use serde::Serialize;
use std::fmt;

#[derive(Clone, Debug, Serialize)]
pub struct CheckEntry {
    pub name: String,
    pub max_residual: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub witness: Option<Vec<f64>>,
}

/// Accumulates the max residual over sample points for one named check.
#[derive(Clone, Debug)]
pub struct ResidualTracker {
    name: String,
    tolerance: f64,
    max: f64,
    witness: Option<Vec<f64>>,
}

impl ResidualTracker {
    pub fn new(name: impl Into<String>, tolerance: f64) -> Self {
        ResidualTracker {
            name: name.into(),
            tolerance,
            max: 0.0,
            witness: None,
        }
    }

    pub fn update(&mut self, residual: f64, point: &[f64]) {
        if residual > self.max || self.witness.is_none() {
            self.max = self.max.max(residual);
            if residual >= self.max {
                self.witness = Some(point.to_vec());
            }
        }
    }

    pub fn max(&self) -> f64 {
        self.max
    }

    pub fn entry(self) -> CheckEntry {
        CheckEntry {
            pass: self.max <= self.tolerance,
            name: self.name,
            max_residual: self.max,
            tolerance: self.tolerance,
            witness: self.witness,
        }
    }
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct VerificationReport {
    pub checks: Vec<CheckEntry>,
    pub labels: Vec<String>,
    pub notes: Vec<String>,
}

impl VerificationReport {
    pub fn push(&mut self, entry: CheckEntry) {
        self.checks.push(entry);
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn entry(&self, name: &str) -> Option<&CheckEntry> {
        self.checks.iter().find(|c| c.name == name)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct FunctionStats {
    pub name: String,
    pub min: f64,
    pub mean: f64,
    pub max: f64,
}

impl FunctionStats {
    pub fn from_values(name: impl Into<String>, values: &[f64]) -> Self {
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mean = values.iter().sum::<f64>() / values.len().max(1) as f64;
        FunctionStats {
            name: name.into(),
            min,
            mean,
            max,
        }
    }
}

/// Summary of characteristic-function extraction over the sample set.
#[derive(Clone, Debug, Serialize)]
pub struct ExtractionSummary {
    /// Pointwise least-squares values, one stats row per alpha_i/beta_i.
    pub functions: Vec<FunctionStats>,
    /// Max componentwise disagreement between the three extraction routes.
    pub max_route_disagreement: f64,
    /// Max normalized least-squares residual over samples.
    pub max_fit_residual: f64,
    /// Max condition number of the least-squares systems.
    pub max_condition_number: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ToleranceEntry {
    pub name: String,
    pub value: f64,
}

/// The machine-readable report document. Field order is fixed by the struct,
/// so serialization is byte-identical for identical inputs and seed.
#[derive(Clone, Debug, Serialize)]
pub struct ReportDocument {
    pub tool_version: String,
    pub command: String,
    pub input: String,
    pub seed: u64,
    pub point_count: usize,
    pub tolerances: Vec<ToleranceEntry>,
    pub checks: Vec<CheckEntry>,
    pub labels: Vec<String>,
    pub extracted: Option<ExtractionSummary>,
    pub notes: Vec<String>,
}

impl ReportDocument {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail")
    }
}

fn fmt_point(p: &[f64]) -> String {
    let comps: Vec<String> = p.iter().map(|x| format!("{x:.4}")).collect();
    format!("({})", comps.join(", "))
}

impl fmt::Display for ReportDocument {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "input: {}  (seed {}, {} points)",
            self.input, self.seed, self.point_count
        )?;
        if !self.labels.is_empty() {
            writeln!(f, "labels: {}", self.labels.join(", "))?;
        }
        writeln!(
            f,
            "{:<58} {:>12} {:>10}  result",
            "check", "max residual", "tolerance"
        )?;
        for c in &self.checks {
            writeln!(
                f,
                "{:<58} {:>12.3e} {:>10.1e}  {}",
                c.name,
                c.max_residual,
                c.tolerance,
                if c.pass { "pass" } else { "FAIL" }
            )?;
            if !c.pass {
                if let Some(w) = &c.witness {
                    writeln!(f, "    worst at {}", fmt_point(w))?;
                }
            }
        }
        if let Some(ex) = &self.extracted {
            writeln!(f, "extracted characteristic functions (pointwise fit):")?;
            for func in &ex.functions {
                writeln!(
                    f,
                    "  {:<10} min {:>12.6} mean {:>12.6} max {:>12.6}",
                    func.name, func.min, func.mean, func.max
                )?;
            }
            writeln!(
                f,
                "  route disagreement {:.3e}, fit residual {:.3e}, condition {:.3e}",
                ex.max_route_disagreement, ex.max_fit_residual, ex.max_condition_number
            )?;
        }
        for note in &self.notes {
            writeln!(f, "note: {note}")?;
        }
        Ok(())
    }
}
