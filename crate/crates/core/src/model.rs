//! Domain types shared by every solver.
//!
//! Loads are measured in absolute load units (fractions sum to the total
//! job `J`), times in time units, and costs in cost units. Speeds are
//! stored inverted: `g` is time per unit load on a source link and `a` is
//! time per unit load on a processor, so smaller means faster.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linprog::LpStatus;

/// A data source with its own outgoing link.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SourceSpec {
    /// Inverse communication speed.
    pub g: f64,
    /// Release time: earliest instant the source may start transmitting.
    pub r: f64,
}

/// A worker processor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProcessorSpec {
    /// Inverse computation speed.
    pub a: f64,
    /// Monetary cost per unit of compute time.
    #[serde(default)]
    pub c: f64,
}

/// Whether processors can compute while still receiving.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Processors have a communication co-processor and may compute while
    /// receiving.
    FrontEnd,
    /// Processors start computing only after all of their load has arrived.
    StoreForward,
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Mode::FrontEnd => "front_end",
            Mode::StoreForward => "store_forward",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    /// Require each source to keep transmitting until the next source is
    /// released (store-and-forward model only).
    pub enforce_source_utilization: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            enforce_source_utilization: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemConfig {
    pub sources: Vec<SourceSpec>,
    pub processors: Vec<ProcessorSpec>,
    pub job: f64,
    pub mode: Mode,
    #[serde(default)]
    pub options: SolverOptions,
}

/// Maps sorted positions back to the caller's indices: `order[k]` is the
/// original index of the node now at position `k`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Permutation(pub Vec<usize>);

impl Permutation {
    pub fn identity(n: usize) -> Self {
        Permutation((0..n).collect())
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().enumerate().all(|(k, &i)| k == i)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Original index of sorted position `k`.
    pub fn original(&self, k: usize) -> usize {
        self.0[k]
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0; self.0.len()];
        for (k, &i) in self.0.iter().enumerate() {
            inv[i] = k;
        }
        Permutation(inv)
    }

    /// `self` applied after `first`: the result maps positions of a list
    /// sorted twice back to the indices of the list before `first`.
    pub fn compose(&self, first: &Permutation) -> Permutation {
        Permutation(self.0.iter().map(|&k| first.0[k]).collect())
    }

    /// Rearranges sorted-order items into original order.
    pub fn to_original<T: Clone>(&self, sorted: &[T]) -> Vec<T> {
        let mut out = sorted.to_vec();
        for (k, item) in sorted.iter().enumerate() {
            out[self.0[k]] = item.clone();
        }
        out
    }

    /// Rearranges original-order items into sorted order.
    pub fn to_sorted<T: Clone>(&self, original: &[T]) -> Vec<T> {
        self.0.iter().map(|&i| original[i].clone()).collect()
    }

    fn check(&self, n: usize) -> bool {
        let mut seen = vec![false; n];
        self.0.len() == n
            && self.0.iter().all(|&i| {
                i < n && !std::mem::replace(&mut seen[i], true)
            })
    }
}

/// Reordering applied to sources and processors during normalization.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AppliedPermutations {
    pub sources: Permutation,
    pub processors: Permutation,
}

impl AppliedPermutations {
    pub fn identity(n: usize, m: usize) -> Self {
        AppliedPermutations {
            sources: Permutation::identity(n),
            processors: Permutation::identity(m),
        }
    }

    /// Checks that both permutations are bijections over `n` and `m` items.
    pub fn validate(&self, n: usize, m: usize) -> Result<()> {
        if !self.sources.check(n) {
            return Err(Error::dims("source permutation", n, format!("{:?}", self.sources.0)));
        }
        if !self.processors.check(m) {
            return Err(Error::dims(
                "processor permutation",
                m,
                format!("{:?}", self.processors.0),
            ));
        }
        Ok(())
    }
}

fn check_finite(field: String, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::config(field, format!("must be finite, got {v}")))
    }
}

impl SystemConfig {
    pub fn new(
        sources: Vec<SourceSpec>,
        processors: Vec<ProcessorSpec>,
        job: f64,
        mode: Mode,
    ) -> Self {
        SystemConfig {
            sources,
            processors,
            job,
            mode,
            options: SolverOptions::default(),
        }
    }

    pub fn n_sources(&self) -> usize {
        self.sources.len()
    }

    pub fn n_processors(&self) -> usize {
        self.processors.len()
    }

    pub fn with_mode(mut self, mode: Mode) -> Self {
        self.mode = mode;
        self
    }

    pub fn with_job(mut self, job: f64) -> Self {
        self.job = job;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.sources.is_empty() {
            return Err(Error::config("sources", "at least one source is required"));
        }
        if self.processors.is_empty() {
            return Err(Error::config("processors", "at least one processor is required"));
        }
        check_finite("job".into(), self.job)?;
        if self.job <= 0.0 {
            return Err(Error::config("job", format!("must be positive, got {}", self.job)));
        }
        for (i, s) in self.sources.iter().enumerate() {
            check_finite(format!("sources[{i}].g"), s.g)?;
            check_finite(format!("sources[{i}].r"), s.r)?;
            if s.g <= 0.0 {
                return Err(Error::config(format!("sources[{i}].g"), format!("must be positive, got {}", s.g)));
            }
            if s.r < 0.0 {
                return Err(Error::config(format!("sources[{i}].r"), format!("must be non-negative, got {}", s.r)));
            }
        }
        for (j, p) in self.processors.iter().enumerate() {
            check_finite(format!("processors[{j}].a"), p.a)?;
            check_finite(format!("processors[{j}].c"), p.c)?;
            if p.a <= 0.0 {
                return Err(Error::config(format!("processors[{j}].a"), format!("must be positive, got {}", p.a)));
            }
            if p.c < 0.0 {
                return Err(Error::config(format!("processors[{j}].c"), format!("must be non-negative, got {}", p.c)));
            }
        }
        Ok(())
    }

    /// True when sources are ordered by link speed and processors by compute
    /// speed, fastest first.
    pub fn is_sorted(&self) -> bool {
        self.sources.windows(2).all(|w| source_order(&w[0], &w[1]) != Ordering::Greater)
            && self
                .processors
                .windows(2)
                .all(|w| processor_order(&w[0], &w[1]) != Ordering::Greater)
    }

    /// Validates the configuration and sorts sources by ascending `g` (ties:
    /// ascending `r`, then original index) and processors by ascending `a`
    /// (ties: ascending `c`, then original index).
    pub fn validate_and_normalize(&self) -> Result<(SystemConfig, AppliedPermutations)> {
        self.validate()?;
        let sources = sorted_order(&self.sources, source_order);
        let processors = sorted_order(&self.processors, processor_order);
        let cfg = SystemConfig {
            sources: sources.to_sorted(&self.sources),
            processors: processors.to_sorted(&self.processors),
            job: self.job,
            mode: self.mode,
            options: self.options,
        };
        Ok((cfg, AppliedPermutations { sources, processors }))
    }

    /// The first `n` sources and `m` processors of this (sorted) pool.
    pub fn prefix(&self, n: usize, m: usize) -> Result<SystemConfig> {
        if n == 0 || n > self.sources.len() {
            return Err(Error::config(
                "sources",
                format!("requested {n} sources from a pool of {}", self.sources.len()),
            ));
        }
        if m == 0 || m > self.processors.len() {
            return Err(Error::config(
                "processors",
                format!("requested {m} processors from a pool of {}", self.processors.len()),
            ));
        }
        Ok(SystemConfig {
            sources: self.sources[..n].to_vec(),
            processors: self.processors[..m].to_vec(),
            ..self.clone()
        })
    }
}

fn source_order(x: &SourceSpec, y: &SourceSpec) -> Ordering {
    x.g.total_cmp(&y.g).then(x.r.total_cmp(&y.r))
}

fn processor_order(x: &ProcessorSpec, y: &ProcessorSpec) -> Ordering {
    x.a.total_cmp(&y.a).then(x.c.total_cmp(&y.c))
}

fn sorted_order<T>(items: &[T], cmp: fn(&T, &T) -> Ordering) -> Permutation {
    let mut idx: Vec<usize> = (0..items.len()).collect();
    // Stable sort keeps the original index as the final tie-break.
    idx.sort_by(|&i, &k| cmp(&items[i], &items[k]));
    Permutation(idx)
}

/// Load fractions `beta[i][j]` sent from source `i` to processor `j`, plus
/// per-source totals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Allocation {
    pub beta: Vec<Vec<f64>>,
    pub alpha: Vec<f64>,
}

impl Allocation {
    pub fn from_beta(beta: Vec<Vec<f64>>) -> Self {
        let alpha = beta.iter().map(|row| row.iter().sum()).collect();
        Allocation { beta, alpha }
    }

    pub fn zeros(n: usize, m: usize) -> Self {
        Allocation::from_beta(vec![vec![0.0; m]; n])
    }

    pub fn n_sources(&self) -> usize {
        self.beta.len()
    }

    pub fn n_processors(&self) -> usize {
        self.beta.first().map_or(0, Vec::len)
    }

    pub fn total(&self) -> f64 {
        self.alpha.iter().sum()
    }

    /// Load processed by processor `j` summed over all sources.
    pub fn processor_load(&self, j: usize) -> f64 {
        self.beta.iter().map(|row| row[j]).sum()
    }

    pub fn processor_loads(&self) -> Vec<f64> {
        (0..self.n_processors()).map(|j| self.processor_load(j)).collect()
    }

    pub fn check_dims(&self, n: usize, m: usize) -> Result<()> {
        if self.beta.len() != n || self.alpha.len() != n {
            return Err(Error::dims("allocation rows", n, self.beta.len()));
        }
        if let Some(row) = self.beta.iter().find(|row| row.len() != m) {
            return Err(Error::dims("allocation columns", m, row.len()));
        }
        Ok(())
    }

    fn permuted(&self, perms: &AppliedPermutations, to_original: bool) -> Allocation {
        let reorder = |p: &Permutation, v: &[f64]| {
            if to_original { p.to_original(v) } else { p.to_sorted(v) }
        };
        let rows: Vec<Vec<f64>> = self.beta.iter().map(|r| reorder(&perms.processors, r)).collect();
        let beta = if to_original {
            perms.sources.to_original(&rows)
        } else {
            perms.sources.to_sorted(&rows)
        };
        Allocation::from_beta(beta)
    }
}

/// Transmission and compute intervals of a concrete schedule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub ts: Vec<Vec<f64>>,
    pub tf: Vec<Vec<f64>>,
    pub compute_start: Vec<f64>,
    pub compute_end: Vec<f64>,
}

impl Schedule {
    pub fn check_dims(&self, n: usize, m: usize) -> Result<()> {
        for (what, mat) in [("schedule ts", &self.ts), ("schedule tf", &self.tf)] {
            if mat.len() != n {
                return Err(Error::dims(what, n, mat.len()));
            }
            if let Some(row) = mat.iter().find(|row| row.len() != m) {
                return Err(Error::dims(what, m, row.len()));
            }
        }
        if self.compute_start.len() != m {
            return Err(Error::dims("schedule compute_start", m, self.compute_start.len()));
        }
        if self.compute_end.len() != m {
            return Err(Error::dims("schedule compute_end", m, self.compute_end.len()));
        }
        Ok(())
    }

    fn permuted(&self, perms: &AppliedPermutations, to_original: bool) -> Schedule {
        let reorder_row = |v: &[f64]| {
            if to_original {
                perms.processors.to_original(v)
            } else {
                perms.processors.to_sorted(v)
            }
        };
        let reorder_mat = |mat: &[Vec<f64>]| {
            let rows: Vec<Vec<f64>> = mat.iter().map(|r| reorder_row(r)).collect();
            if to_original {
                perms.sources.to_original(&rows)
            } else {
                perms.sources.to_sorted(&rows)
            }
        };
        Schedule {
            ts: reorder_mat(&self.ts),
            tf: reorder_mat(&self.tf),
            compute_start: reorder_row(&self.compute_start),
            compute_end: reorder_row(&self.compute_end),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub status: LpStatus,
    pub iterations: usize,
    /// Largest constraint violation found by re-substituting the solution.
    pub max_residual: f64,
}

/// A solution that is valid but breaks a modelling assumption.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ModelWarning {
    /// A fraction is sent over a link slower than the receiving processor
    /// computes, so the processor can outrun its input.
    LinkSlowerThanCompute { source: usize, processor: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveResult {
    pub allocation: Allocation,
    pub t_f: f64,
    pub schedule: Option<Schedule>,
    pub permutations: AppliedPermutations,
    pub diagnostics: Diagnostics,
    #[serde(default)]
    pub warnings: Vec<ModelWarning>,
}

impl SolveResult {
    /// Re-expresses the allocation and schedule in the caller's original
    /// node order. The permutation record is kept so that
    /// [`SolveResult::into_sorted_order`] can undo this exactly.
    pub fn into_original_order(self) -> SolveResult {
        let perms = &self.permutations;
        let map_warning = |w: &ModelWarning| match *w {
            ModelWarning::LinkSlowerThanCompute { source, processor } => {
                ModelWarning::LinkSlowerThanCompute {
                    source: perms.sources.original(source),
                    processor: perms.processors.original(processor),
                }
            }
        };
        SolveResult {
            allocation: self.allocation.permuted(perms, true),
            schedule: self.schedule.as_ref().map(|s| s.permuted(perms, true)),
            warnings: self.warnings.iter().map(map_warning).collect(),
            ..self.clone()
        }
    }

    /// Inverse of [`SolveResult::into_original_order`].
    pub fn into_sorted_order(self) -> SolveResult {
        let perms = &self.permutations;
        let inv_s = perms.sources.inverse();
        let inv_p = perms.processors.inverse();
        let map_warning = |w: &ModelWarning| match *w {
            ModelWarning::LinkSlowerThanCompute { source, processor } => {
                ModelWarning::LinkSlowerThanCompute {
                    source: inv_s.original(source),
                    processor: inv_p.original(processor),
                }
            }
        };
        SolveResult {
            allocation: self.allocation.permuted(perms, false),
            schedule: self.schedule.as_ref().map(|s| s.permuted(perms, false)),
            warnings: self.warnings.iter().map(map_warning).collect(),
            ..self.clone()
        }
    }
}
