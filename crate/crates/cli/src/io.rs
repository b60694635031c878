//! On-disk documents: the system config and the solve result.

use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use dlsched::analysis::compute_cost;
use dlsched::{
    AppliedPermutations, CostReport, Diagnostics, Mode, ModelWarning, ProcessorSpec, Schedule,
    SolveResult, SolverOptions, SourceSpec, SystemConfig,
};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub job: f64,
    /// Optional; each command falls back to its own default model.
    #[serde(default)]
    pub mode: Option<Mode>,
    pub sources: Vec<SourceSpec>,
    pub processors: Vec<ProcessorSpec>,
    #[serde(default)]
    pub options: ConfigOptions,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigOptions {
    #[serde(default = "yes")]
    pub enforce_source_utilization: bool,
    #[serde(default)]
    pub gradient_threshold: Option<f64>,
}

fn yes() -> bool {
    true
}

impl Default for ConfigOptions {
    fn default() -> Self {
        ConfigOptions {
            enforce_source_utilization: true,
            gradient_threshold: None,
        }
    }
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    /// Builds a validated system config; `mode` precedence is the command
    /// line, then the file, then `default`.
    pub fn system(&self, mode: Option<Mode>, default: Mode) -> Result<SystemConfig, dlsched::Error> {
        let mut cfg = SystemConfig::new(
            self.sources.clone(),
            self.processors.clone(),
            self.job,
            mode.or(self.mode).unwrap_or(default),
        );
        cfg.options = SolverOptions {
            enforce_source_utilization: self.options.enforce_source_utilization,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

/// A solve result in the caller's node order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultFile {
    pub mode: Mode,
    pub t_f: f64,
    pub beta: Vec<Vec<f64>>,
    pub alpha: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schedule: Option<Schedule>,
    pub cost: CostReport,
    pub diagnostics: Diagnostics,
    pub applied_permutations: AppliedPermutations,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<ModelWarning>,
}

impl ResultFile {
    /// `result` is in sorted order as returned by the solver.
    pub fn from_solve(cfg: &SystemConfig, result: SolveResult) -> Result<Self, dlsched::Error> {
        let result = result.into_original_order();
        let cost = compute_cost(cfg, &result.allocation)?;
        Ok(ResultFile {
            mode: cfg.mode,
            t_f: result.t_f,
            beta: result.allocation.beta,
            alpha: result.allocation.alpha,
            // Front-end timing is reconstructed on replay.
            schedule: match cfg.mode {
                Mode::StoreForward => result.schedule,
                Mode::FrontEnd => None,
            },
            cost,
            diagnostics: result.diagnostics,
            applied_permutations: result.permutations,
            warnings: result.warnings,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("reading result {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing result {}", path.display()))
    }

    /// Back to the solver's sorted order. Fails on a malformed permutation
    /// record or allocation shape.
    pub fn into_solve_result(self) -> Result<SolveResult, dlsched::Error> {
        let (n, m) = (self.beta.len(), self.beta.first().map_or(0, Vec::len));
        self.applied_permutations.validate(n, m)?;
        let allocation = dlsched::Allocation {
            beta: self.beta,
            alpha: self.alpha,
        };
        allocation.check_dims(n, m)?;
        if let Some(s) = &self.schedule {
            s.check_dims(n, m)?;
        }
        Ok(SolveResult {
            allocation,
            t_f: self.t_f,
            schedule: self.schedule,
            permutations: self.applied_permutations,
            diagnostics: self.diagnostics,
            warnings: self.warnings,
        }
        .into_sorted_order())
    }
}
