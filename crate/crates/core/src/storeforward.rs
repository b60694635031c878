//! Multi-source scheduling for processors without front ends.
//!
//! A processor starts computing only once every fraction addressed to it has
//! arrived. Besides the fractions the program carries explicit transmission
//! windows `[TS_{i,j}, TF_{i,j}]`, so the solution is a complete timetable.

use crate::error::{Error, Result};
use crate::linprog::LinearProgram;
use crate::model::{Allocation, Diagnostics, Mode, Schedule, SolveResult, SystemConfig};

/// Variable indexing: `β`, then `TS`, then `TF` (each source-major), then `T_f`.
#[derive(Debug, Clone, Copy)]
pub struct StoreForwardLayout {
    pub n: usize,
    pub m: usize,
}

impl StoreForwardLayout {
    pub fn beta(&self, i: usize, j: usize) -> usize {
        i * self.m + j
    }

    pub fn ts(&self, i: usize, j: usize) -> usize {
        self.n * self.m + i * self.m + j
    }

    pub fn tf(&self, i: usize, j: usize) -> usize {
        2 * self.n * self.m + i * self.m + j
    }

    pub fn t_f(&self) -> usize {
        3 * self.n * self.m
    }

    pub fn n_vars(&self) -> usize {
        3 * self.n * self.m + 1
    }
}

/// Builds the store-and-forward program for a normalized config.
///
/// Emitted families:
/// transmission length `TF − TS = β·G_i`;
/// a processor hears sources in order, `TF_{i,j} ≤ TS_{i+1,j}`;
/// a source serves processors in order, `TF_{i,j} ≤ TS_{i,j+1}`;
/// `TS_{1,1} = R_1` and `TS_{i,1} ≥ R_i`;
/// optionally `TF_{i−1,1} ≥ R_i` (source `i−1` stays busy until `i` is released);
/// `T_f ≥ TF_{N,j} + A_j·Σ_i β_{i,j}`;
/// and `Σ β = J`.
pub fn build_storeforward_lp(cfg: &SystemConfig) -> LinearProgram {
    let lay = StoreForwardLayout {
        n: cfg.n_sources(),
        m: cfg.n_processors(),
    };
    let (src, prc) = (&cfg.sources, &cfg.processors);
    let mut objective = vec![0.0; lay.n_vars()];
    objective[lay.t_f()] = 1.0;
    let mut lp = LinearProgram::new(objective);
    let row = || vec![0.0; lay.n_vars()];

    for i in 0..lay.n {
        for j in 0..lay.m {
            let mut c = row();
            c[lay.tf(i, j)] = 1.0;
            c[lay.ts(i, j)] = -1.0;
            c[lay.beta(i, j)] = -src[i].g;
            lp.add_eq(c, 0.0);
        }
    }

    for i in 0..lay.n - 1 {
        for j in 0..lay.m {
            let mut c = row();
            c[lay.tf(i, j)] = 1.0;
            c[lay.ts(i + 1, j)] = -1.0;
            lp.add_le(c, 0.0);
        }
    }

    for i in 0..lay.n {
        for j in 0..lay.m - 1 {
            let mut c = row();
            c[lay.tf(i, j)] = 1.0;
            c[lay.ts(i, j + 1)] = -1.0;
            lp.add_le(c, 0.0);
        }
    }

    let mut c = row();
    c[lay.ts(0, 0)] = 1.0;
    lp.add_eq(c, src[0].r);

    for i in 1..lay.n {
        let mut c = row();
        c[lay.ts(i, 0)] = 1.0;
        lp.add_ge(c, src[i].r);
    }

    if cfg.options.enforce_source_utilization {
        for i in 1..lay.n {
            let mut c = row();
            c[lay.tf(i - 1, 0)] = 1.0;
            lp.add_ge(c, src[i].r);
        }
    }

    for j in 0..lay.m {
        let mut c = row();
        c[lay.tf(lay.n - 1, j)] = 1.0;
        for i in 0..lay.n {
            c[lay.beta(i, j)] = prc[j].a;
        }
        c[lay.t_f()] = -1.0;
        lp.add_le(c, 0.0);
    }

    let mut c = row();
    c[..lay.n * lay.m].fill(1.0);
    lp.add_eq(c, cfg.job);
    lp
}

/// Solves the store-and-forward model and returns the full timetable, in
/// sorted node order.
pub fn solve_storeforward(cfg: &SystemConfig) -> Result<SolveResult> {
    let (cfg, permutations) = cfg.validate_and_normalize()?;
    if cfg.mode != Mode::StoreForward {
        return Err(Error::config("mode", "store-and-forward solver requires mode store_forward"));
    }
    let lp = build_storeforward_lp(&cfg);
    let lay = StoreForwardLayout {
        n: cfg.n_sources(),
        m: cfg.n_processors(),
    };
    let sol = crate::expect_optimal(&lp, || {
        if cfg.options.enforce_source_utilization {
            "source utilization (each source busy until the next release) cannot be met \
             together with the remaining constraints"
                .to_string()
        } else {
            "transmission ordering and release constraints cannot all hold".to_string()
        }
    })?;
    let x = &sol.x;

    let mat = |f: &dyn Fn(usize, usize) -> usize| -> Vec<Vec<f64>> {
        (0..lay.n).map(|i| (0..lay.m).map(|j| x[f(i, j)]).collect()).collect()
    };
    let beta = mat(&|i, j| lay.beta(i, j));
    let ts = mat(&|i, j| lay.ts(i, j));
    let tf = mat(&|i, j| lay.tf(i, j));
    let allocation = Allocation::from_beta(beta);
    let compute_start: Vec<f64> = (0..lay.m).map(|j| tf[lay.n - 1][j]).collect();
    let compute_end = compute_start
        .iter()
        .enumerate()
        .map(|(j, s)| s + allocation.processor_load(j) * cfg.processors[j].a)
        .collect();

    Ok(SolveResult {
        allocation,
        t_f: x[lay.t_f()],
        schedule: Some(Schedule {
            ts,
            tf,
            compute_start,
            compute_end,
        }),
        permutations,
        diagnostics: Diagnostics {
            status: sol.status,
            iterations: sol.iterations,
            max_residual: lp.max_violation(x),
        },
        warnings: Vec::new(),
    })
}
