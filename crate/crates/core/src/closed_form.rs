//! Single source feeding `M` processors without front ends.
//!
//! The source transmits to `P_1, ..., P_M` back to back and each processor
//! computes once its fraction has arrived. At the optimum every processor
//! finishes at the same instant, so for each `j`
//!
//! ```text
//! T_f = g·(β_1 + ... + β_j) + a_j·β_j
//! ```
//!
//! Equating consecutive finish times gives `β_{j+1} = β_j·a_j / (g + a_{j+1})`,
//! which fixes every fraction relative to `β_1`; scaling so the fractions sum
//! to the job gives the unique solution.

use crate::error::{Error, Result};
use crate::linprog::LpStatus;
use crate::model::{
    Allocation, AppliedPermutations, Diagnostics, ProcessorSpec, Schedule, SolveResult,
};

/// Solves the single-source system with release time zero.
///
/// `processors` are used in the given order; callers wanting the optimal
/// sequence should pass them sorted fastest first. `g == 0` models an
/// instantaneous link.
pub fn solve_single_source(g: f64, processors: &[ProcessorSpec], job: f64) -> Result<SolveResult> {
    if processors.is_empty() {
        return Err(Error::config("processors", "at least one processor is required"));
    }
    if !(g.is_finite() && g >= 0.0) {
        return Err(Error::config("g", format!("must be finite and non-negative, got {g}")));
    }
    if !(job.is_finite() && job > 0.0) {
        return Err(Error::config("job", format!("must be positive, got {job}")));
    }
    if let Some(j) = processors.iter().position(|p| !(p.a.is_finite() && p.a > 0.0)) {
        return Err(Error::config(format!("processors[{j}].a"), "must be finite and positive"));
    }

    let mut shares = Vec::with_capacity(processors.len());
    let mut share = 1.0;
    shares.push(share);
    for w in processors.windows(2) {
        share *= w[0].a / (g + w[1].a);
        shares.push(share);
    }
    let total: f64 = shares.iter().sum();
    let beta: Vec<f64> = shares.iter().map(|s| job * s / total).collect();
    let t_f = beta[0] * (g + processors[0].a);

    let m = processors.len();
    let mut ts = Vec::with_capacity(m);
    let mut tf = Vec::with_capacity(m);
    let mut compute_end = Vec::with_capacity(m);
    let mut clock = 0.0;
    for (b, p) in beta.iter().zip(processors) {
        ts.push(clock);
        clock += b * g;
        tf.push(clock);
        compute_end.push(clock + b * p.a);
    }
    let max_residual = compute_end.iter().map(|e| (e - t_f).abs()).fold(0.0, f64::max);

    Ok(SolveResult {
        allocation: Allocation::from_beta(vec![beta]),
        t_f,
        schedule: Some(Schedule {
            ts: vec![ts],
            compute_start: tf.clone(),
            tf: vec![tf],
            compute_end,
        }),
        permutations: AppliedPermutations::identity(1, m),
        diagnostics: Diagnostics {
            status: LpStatus::Optimal,
            iterations: 0,
            max_residual,
        },
        warnings: Vec::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn procs(a: &[f64]) -> Vec<ProcessorSpec> {
        a.iter().map(|&a| ProcessorSpec { a, c: 0.0 }).collect()
    }

    #[test]
    fn single_processor() {
        let res = solve_single_source(1.0, &procs(&[2.0]), 1.0).unwrap();
        assert_relative_eq!(res.allocation.beta[0][0], 1.0);
        assert_relative_eq!(res.t_f, 3.0);
    }

    #[test]
    fn instant_link_splits_evenly() {
        let res = solve_single_source(0.0, &procs(&[1.0, 1.0]), 1.0).unwrap();
        assert_relative_eq!(res.allocation.beta[0][0], 0.5);
        assert_relative_eq!(res.allocation.beta[0][1], 0.5);
        assert_relative_eq!(res.t_f, 0.5);
    }

    #[test]
    fn two_processors_unit_link() {
        // Hand solution of T = β1(g+a1) = g(β1+β2) + a2β2, β1+β2 = 1.
        let res = solve_single_source(1.0, &procs(&[1.0, 1.0]), 1.0).unwrap();
        assert_relative_eq!(res.allocation.beta[0][0], 2.0 / 3.0, epsilon = 1e-15);
        assert_relative_eq!(res.allocation.beta[0][1], 1.0 / 3.0, epsilon = 1e-15);
        assert_relative_eq!(res.t_f, 4.0 / 3.0, epsilon = 1e-15);
    }

    #[test]
    fn schedule_is_back_to_back() {
        let res = solve_single_source(0.5, &procs(&[1.0, 2.0, 3.0]), 10.0).unwrap();
        let s = res.schedule.unwrap();
        assert_eq!(s.ts[0][0], 0.0);
        for j in 1..3 {
            assert_eq!(s.ts[0][j], s.tf[0][j - 1]);
        }
        for e in &s.compute_end {
            assert_relative_eq!(*e, res.t_f, epsilon = 1e-12);
        }
    }

    #[test]
    fn rejects_empty_and_bad_inputs() {
        assert!(matches!(solve_single_source(1.0, &[], 1.0), Err(Error::Config { .. })));
        assert!(solve_single_source(-1.0, &procs(&[1.0]), 1.0).is_err());
        assert!(solve_single_source(1.0, &procs(&[1.0]), 0.0).is_err());
        assert!(solve_single_source(1.0, &procs(&[0.0]), 1.0).is_err());
    }
}
