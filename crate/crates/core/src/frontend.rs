//! Multi-source scheduling for processors with front ends.
//!
//! A processor may compute while it is still receiving, so the model only
//! tracks the load fractions `β_{i,j}` and the finish time. Variables are laid
//! out as `β` in row-major order (source-major) followed by `T_f`.

use crate::error::{Error, Result};
use crate::linprog::LinearProgram;
use crate::model::{Allocation, Diagnostics, Mode, ModelWarning, SolveResult, SystemConfig};

/// Variable indexing for the front-end program.
#[derive(Debug, Clone, Copy)]
pub struct FrontendLayout {
    pub n: usize,
    pub m: usize,
}

impl FrontendLayout {
    pub fn beta(&self, i: usize, j: usize) -> usize {
        i * self.m + j
    }

    pub fn t_f(&self) -> usize {
        self.n * self.m
    }

    pub fn n_vars(&self) -> usize {
        self.n * self.m + 1
    }
}

/// Builds the finish-time minimization program for a normalized config.
///
/// Constraint families, in the order they are emitted:
///
/// 1. release chaining, `β_{i,1}·A_1 ≥ R_{i+1} − R_i`: source `i` must keep
///    the first processor busy until source `i+1` is released;
/// 2. continuous processing, `β_{i,j}·A_j + β_{i+1,j}·G_{i+1} ≤ β_{i,j}·G_i +
///    β_{i,j+1}·A_{j+1}`;
/// 3. finish time, `T_f ≥ R_1 + G_1·Σ_{k<j} β_{1,k} + A_j·Σ_i β_{i,j}`: the
///    first source reaches `P_j` after serving `P_1..P_{j−1}`, after which
///    `P_j` computes its whole share;
/// 4. normalization, `Σ β = J`.
pub fn build_frontend_lp(cfg: &SystemConfig) -> LinearProgram {
    let lay = FrontendLayout {
        n: cfg.n_sources(),
        m: cfg.n_processors(),
    };
    let (src, prc) = (&cfg.sources, &cfg.processors);
    let mut objective = vec![0.0; lay.n_vars()];
    objective[lay.t_f()] = 1.0;
    let mut lp = LinearProgram::new(objective);
    let row = || vec![0.0; lay.n_vars()];

    for i in 0..lay.n.saturating_sub(1) {
        let mut c = row();
        c[lay.beta(i, 0)] = prc[0].a;
        lp.add_ge(c, src[i + 1].r - src[i].r);
    }

    for i in 0..lay.n.saturating_sub(1) {
        for j in 0..lay.m - 1 {
            let mut c = row();
            c[lay.beta(i, j)] += prc[j].a - src[i].g;
            c[lay.beta(i + 1, j)] += src[i + 1].g;
            c[lay.beta(i, j + 1)] -= prc[j + 1].a;
            lp.add_le(c, 0.0);
        }
    }

    for j in 0..lay.m {
        let mut c = row();
        for k in 0..j {
            c[lay.beta(0, k)] += src[0].g;
        }
        for k in 0..lay.n {
            c[lay.beta(k, j)] += prc[j].a;
        }
        c[lay.t_f()] = -1.0;
        lp.add_le(c, -src[0].r);
    }

    let mut c = row();
    c[..lay.n * lay.m].fill(1.0);
    lp.add_eq(c, cfg.job);
    lp
}

/// Solves the front-end model. The config need not be sorted; the applied
/// ordering is recorded in the result, whose matrices are in sorted order.
pub fn solve_frontend(cfg: &SystemConfig) -> Result<SolveResult> {
    let (cfg, permutations) = cfg.validate_and_normalize()?;
    if cfg.mode != Mode::FrontEnd {
        return Err(Error::config("mode", "front-end solver requires mode front_end"));
    }
    let lp = build_frontend_lp(&cfg);
    let lay = FrontendLayout {
        n: cfg.n_sources(),
        m: cfg.n_processors(),
    };
    let sol = crate::expect_optimal(&lp, || release_conflict_hint(&cfg))?;

    let beta: Vec<Vec<f64>> = (0..lay.n)
        .map(|i| (0..lay.m).map(|j| sol.x[lay.beta(i, j)]).collect())
        .collect();

    let mut warnings = Vec::new();
    for (i, row) in beta.iter().enumerate() {
        for (j, &b) in row.iter().enumerate() {
            if b > 0.0 && cfg.sources[i].g > cfg.processors[j].a {
                warnings.push(ModelWarning::LinkSlowerThanCompute { source: i, processor: j });
            }
        }
    }

    Ok(SolveResult {
        allocation: Allocation::from_beta(beta),
        t_f: sol.x[lay.t_f()],
        schedule: None,
        permutations,
        diagnostics: Diagnostics {
            status: sol.status,
            iterations: sol.iterations,
            max_residual: lp.max_violation(&sol.x),
        },
        warnings,
    })
}

fn release_conflict_hint(cfg: &SystemConfig) -> String {
    let a1 = cfg.processors[0].a;
    let required: f64 = cfg
        .sources
        .windows(2)
        .map(|w| (w[1].r - w[0].r).max(0.0) / a1)
        .sum();
    if required > cfg.job {
        format!(
            "release gaps require at least {required} load units on the first processor \
             (to keep it busy until each later source is released) but the job is only {}",
            cfg.job
        )
    } else {
        "release-time, continuity and normalization constraints cannot all hold".to_string()
    }
}
