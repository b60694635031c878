//! Makespan-optimal divisible load scheduling for systems where several
//! data sources feed a pool of worker processors.
//!
//! Sources transmit sequentially (one processor at a time) and processors
//! receive sequentially (one source at a time). Two processor models are
//! supported: with a front end, a processor computes while it receives;
//! without one, it computes only once all of its load has arrived
//! (store-and-forward). Each model is posed as a linear program over the
//! load fractions and solved with the bundled dense simplex.
//!
//! ```
//! use dlsched::{solve, Mode, ProcessorSpec, SourceSpec, SystemConfig};
//!
//! let cfg = SystemConfig::new(
//!     vec![SourceSpec { g: 0.2, r: 0.0 }, SourceSpec { g: 0.2, r: 5.0 }],
//!     vec![
//!         ProcessorSpec { a: 2.0, c: 1.0 },
//!         ProcessorSpec { a: 3.0, c: 1.0 },
//!         ProcessorSpec { a: 4.0, c: 1.0 },
//!     ],
//!     100.0,
//!     Mode::StoreForward,
//! );
//! let result = solve(&cfg).unwrap();
//! let report = dlsched::simulate::simulate(&cfg, &result).unwrap();
//! assert!(report.is_clean());
//! assert!(report.achieved_finish <= result.t_f + 1e-6);
//! ```

pub mod analysis;
pub mod closed_form;
pub mod error;
pub mod frontend;
pub mod linprog;
pub mod model;
pub mod simulate;
pub mod storeforward;

pub use analysis::{
    compute_cost, finish_time_gradient, speedup_curve, sweep, tradeoff, CostReport, Gradient,
    Recommendation, SpeedupPoint, SweepPoint, TradeoffQuery, TradeoffReport,
};
pub use closed_form::solve_single_source;
pub use error::{Error, Result};
pub use frontend::{build_frontend_lp, solve_frontend};
pub use linprog::{solve_lp, LinearProgram, LpSolution, LpStatus};
pub use model::{
    Allocation, AppliedPermutations, Diagnostics, Mode, ModelWarning, Permutation, ProcessorSpec,
    Schedule, SolveResult, SolverOptions, SourceSpec, SystemConfig,
};
pub use simulate::{SimulationReport, Violation, ViolationKind};
pub use storeforward::{build_storeforward_lp, solve_storeforward};

/// Solves `cfg` with the model selected by `cfg.mode`.
pub fn solve(cfg: &SystemConfig) -> Result<SolveResult> {
    match cfg.mode {
        Mode::FrontEnd => solve_frontend(cfg),
        Mode::StoreForward => solve_storeforward(cfg),
    }
}

/// Runs the simplex and maps non-optimal outcomes onto scheduling errors.
pub(crate) fn expect_optimal(
    lp: &LinearProgram,
    infeasible_reason: impl FnOnce() -> String,
) -> Result<LpSolution> {
    let sol = solve_lp(lp)?;
    match sol.status {
        LpStatus::Optimal => Ok(sol),
        LpStatus::Infeasible => Err(Error::InfeasibleSchedule(infeasible_reason())),
        LpStatus::Unbounded => Err(Error::Unbounded),
    }
}
