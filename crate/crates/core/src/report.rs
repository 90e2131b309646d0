//! Text and JSON rendering of regression tables and run reports.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::mlm::{percent_change, ModelFit};
use crate::panel::{display_name, significance_stars, CorrelationReport};

/// Star thresholds of the regression table: `**` p<0.01, `*` p<0.1.
pub const REGRESSION_STAR_LEVELS: [f64; 2] = [0.01, 0.1];

/// One model column of a regression table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegressionColumn {
    pub title: String,
    /// (variable, estimate, stars) with the intercept first.
    pub coefficients: Vec<(String, f64, String)>,
    pub variance_level2: f64,
    pub variance_level1: f64,
    pub icc_percent: Option<f64>,
    pub change_level2_percent: Option<f64>,
    pub change_level1_percent: Option<f64>,
    pub n_obs: usize,
    pub n_groups: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegressionTable {
    pub columns: Vec<RegressionColumn>,
}

impl RegressionTable {
    /// Builds a table from fitted models. The first model without covariates
    /// is the reference for ICC and variance changes.
    pub fn from_fits(fits: &[ModelFit]) -> Self {
        let null = fits.iter().find(|f| f.coefficients.len() == 1);
        let columns = fits
            .iter()
            .map(|fit| {
                let is_null = fit.coefficients.len() == 1;
                let reference = null.filter(|_| !is_null);
                RegressionColumn {
                    title: fit.model.clone(),
                    coefficients: fit
                        .coefficients
                        .iter()
                        .map(|c| {
                            (
                                c.name.clone(),
                                c.estimate,
                                significance_stars(c.p_value, &REGRESSION_STAR_LEVELS).to_string(),
                            )
                        })
                        .collect(),
                    variance_level2: fit.variance_level2,
                    variance_level1: fit.variance_level1,
                    icc_percent: is_null.then_some(100.0 * fit.icc),
                    change_level2_percent: reference
                        .and_then(|n| percent_change(fit.variance_level2, n.variance_level2)),
                    change_level1_percent: reference
                        .and_then(|n| percent_change(fit.variance_level1, n.variance_level1)),
                    n_obs: fit.n_obs,
                    n_groups: fit.n_groups,
                }
            })
            .collect();
        Self { columns }
    }

    /// Variables in order of first appearance across columns.
    pub fn variables(&self) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        for col in &self.columns {
            for (name, _, _) in &col.coefficients {
                if !out.contains(&name.as_str()) {
                    out.push(name);
                }
            }
        }
        out
    }

    /// Aligned plain-text table: coefficients, variance components, ICC,
    /// variance changes, N and group count.
    pub fn render(&self) -> String {
        let mut lines: Vec<(String, Vec<String>)> = Vec::new();
        for var in self.variables() {
            let cells = self
                .columns
                .iter()
                .map(|c| {
                    c.coefficients
                        .iter()
                        .find(|(n, _, _)| n == var)
                        .map(|(_, v, s)| format!("{v:.3}{s}"))
                        .unwrap_or_default()
                })
                .collect();
            lines.push((display_name(var), cells));
        }
        let row = |label: &str, f: &dyn Fn(&RegressionColumn) -> String| {
            (label.to_string(), self.columns.iter().map(f).collect::<Vec<_>>())
        };
        let pct = |v: Option<f64>| v.map(|x| format!("{x:.2}%")).unwrap_or_default();
        lines.push(row("Variance Level 2", &|c| format!("{:.3}", c.variance_level2)));
        lines.push(row("Variance Level 1", &|c| format!("{:.3}", c.variance_level1)));
        lines.push(row("ICC", &|c| pct(c.icc_percent)));
        lines.push(row("Change in variance Lev. 2", &|c| pct(c.change_level2_percent)));
        lines.push(row("Change in variance Lev. 1", &|c| pct(c.change_level1_percent)));
        lines.push(row("N", &|c| c.n_obs.to_string()));
        lines.push(row("Groups", &|c| c.n_groups.to_string()));

        let label_w = lines
            .iter()
            .map(|(l, _)| l.chars().count())
            .chain(std::iter::once("Variable".len()))
            .max()
            .unwrap_or(0);
        let widths: Vec<usize> = self
            .columns
            .iter()
            .enumerate()
            .map(|(j, c)| {
                lines
                    .iter()
                    .map(|(_, cells)| cells[j].chars().count())
                    .chain(std::iter::once(c.title.chars().count()))
                    .max()
                    .unwrap_or(0)
            })
            .collect();

        let mut out = String::new();
        let _ = write!(out, "{:<label_w$}", "Variable");
        for (c, w) in self.columns.iter().zip(&widths) {
            let _ = write!(out, "  {:>w$}", c.title);
        }
        out.push('\n');
        for (label, cells) in &lines {
            let _ = write!(out, "{label:<label_w$}");
            for (cell, w) in cells.iter().zip(&widths) {
                let _ = write!(out, "  {cell:>w$}");
            }
            // Keep lines free of trailing blanks.
            while out.ends_with(' ') {
                out.pop();
            }
            out.push('\n');
        }
        out.push_str("**p<0.01; *p<0.1.\n");
        out
    }
}

/// Provenance block embedded in every report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunMetadata {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub flags: BTreeMap<String, String>,
    pub seed: Option<u64>,
    /// Input file name → SHA-256 of its bytes.
    pub inputs: BTreeMap<String, String>,
}

impl RunMetadata {
    pub fn new(command: &str) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            flags: BTreeMap::new(),
            seed: None,
            inputs: BTreeMap::new(),
        }
    }

    pub fn flag(mut self, name: &str, value: impl ToString) -> Self {
        self.flags.insert(name.to_string(), value.to_string());
        self
    }

    pub fn input(mut self, name: &str, bytes: &[u8]) -> Self {
        self.inputs.insert(name.to_string(), sha256_hex(bytes));
        self
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "tool: {} {}", self.tool, self.version);
        let _ = writeln!(out, "command: {}", self.command);
        for (k, v) in &self.flags {
            let _ = writeln!(out, "flag {k}: {v}");
        }
        if let Some(seed) = self.seed {
            let _ = writeln!(out, "seed: {seed}");
        }
        for (k, v) in &self.inputs {
            let _ = writeln!(out, "input {k}: sha256 {v}");
        }
        out
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// Full text report: correlation table, optional regression table, metadata.
pub fn render_report(
    correlations: &CorrelationReport,
    regression: Option<&RegressionTable>,
    metadata: &RunMetadata,
) -> String {
    let mut out = String::new();
    out.push_str("Correlation coefficients\n\n");
    out.push_str(&correlations.render());
    if let Some(table) = regression {
        out.push_str("\nMultilevel regression (random intercepts)\n\n");
        out.push_str(&table.render());
    }
    out.push_str("\nRun metadata\n\n");
    out.push_str(&metadata.render());
    out
}
