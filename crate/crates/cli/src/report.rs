//! Run reports: every solve writes one TOML report carrying the full set of
//! diagnostics, timings, and an echo of the configuration it ran with.

use serde::{Deserialize, Serialize};

use crate::config::{ComplexSpec, RunConfig};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DiagnosticsReport {
    /// Recovered piecewise constant, one value per boundary component.
    pub h: Vec<f64>,
    pub h_dispersion: f64,
    pub h_raw_deviation: f64,
    pub boundary_modulus_error: f64,
    pub condition_estimate: f64,
    pub solve_residual: f64,
    /// Normalization constant `c = ω′(a)`.
    pub c: f64,
    /// Argument-principle count of zeros; should equal the connectivity.
    pub zero_count: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SearchReport {
    pub converged: bool,
    pub iterations: usize,
    pub evaluations: usize,
    /// h-uniformity objective at the returned zeros.
    pub objective: f64,
    pub zeros: Vec<ComplexSpec>,
    pub initial: Vec<ComplexSpec>,
    /// Rows `[stage, iteration, best objective of that stage]`.
    pub trace: Vec<(u8, usize, f64)>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub n: usize,
    pub boundary_modulus_error: f64,
    pub h_raw_deviation: f64,
    pub h_dispersion: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub map_error: Option<f64>,
}

/// The full report written as `report.toml`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunReport {
    pub version: String,
    pub command: String,
    pub elapsed_ms: f64,
    /// Zeros the final solve used (base point excluded).
    pub zeros_used: Vec<ComplexSpec>,
    pub aux_used: Vec<ComplexSpec>,
    pub diagnostics: DiagnosticsReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub search: Option<SearchReport>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub convergence: Vec<ConvergenceRow>,
    /// Verbatim echo of the effective configuration.
    pub config: RunConfig,
}

impl RunReport {
    pub fn render(&self) -> anyhow::Result<String> {
        Ok(toml::to_string_pretty(self)?)
    }

    pub fn parse(text: &str) -> anyhow::Result<Self> {
        Ok(toml::from_str(text)?)
    }
}
