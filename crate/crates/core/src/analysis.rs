//! Cost, speedup and finish-time trade-off studies built on repeated solves.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linprog::LpStatus;
use crate::model::{Allocation, Mode, SystemConfig};

/// Model used for trade-off studies unless the caller overrides it.
pub const DEFAULT_TRADEOFF_MODE: Mode = Mode::FrontEnd;
/// Model used for speedup studies unless the caller overrides it.
pub const DEFAULT_SPEEDUP_MODE: Mode = Mode::StoreForward;
pub const DEFAULT_GRADIENT_THRESHOLD: f64 = 0.06;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostReport {
    pub total: f64,
    pub per_processor: Vec<f64>,
}

/// Processor charges: `P_j` bills `C_j` per unit time for `A_j·Σ_i β_{i,j}`
/// time units of compute.
pub fn compute_cost(cfg: &SystemConfig, allocation: &Allocation) -> Result<CostReport> {
    allocation.check_dims(cfg.n_sources(), cfg.n_processors())?;
    let per_processor: Vec<f64> = cfg
        .processors
        .iter()
        .enumerate()
        .map(|(j, p)| allocation.processor_load(j) * p.a * p.c)
        .collect();
    Ok(CostReport {
        total: per_processor.iter().sum(),
        per_processor,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub n_sources: usize,
    pub m_processors: usize,
    pub job: f64,
    /// `None` unless `status` is optimal.
    pub t_f: Option<f64>,
    pub cost: Option<f64>,
    pub status: LpStatus,
}

fn check_counts(what: &'static str, counts: &[usize], pool: usize) -> Result<()> {
    if counts.is_empty() {
        return Err(Error::config(what, "at least one count is required"));
    }
    if let Some(&bad) = counts.iter().find(|&&c| c == 0 || c > pool) {
        return Err(Error::config(what, format!("count {bad} outside 1..={pool}")));
    }
    Ok(())
}

fn solve_point(pool: &SystemConfig, n: usize, m: usize, job: f64) -> Result<SweepPoint> {
    let cfg = pool.prefix(n, m)?.with_job(job);
    let point = |t_f, cost, status| SweepPoint {
        n_sources: n,
        m_processors: m,
        job,
        t_f,
        cost,
        status,
    };
    match crate::solve(&cfg) {
        Ok(res) => {
            let cost = compute_cost(&cfg, &res.allocation)?.total;
            Ok(point(Some(res.t_f), Some(cost), LpStatus::Optimal))
        }
        Err(Error::InfeasibleSchedule(_)) => Ok(point(None, None, LpStatus::Infeasible)),
        Err(Error::Unbounded) => Ok(point(None, None, LpStatus::Unbounded)),
        Err(e) => Err(e),
    }
}

/// Solves every `(sources, processors, job)` combination, taking prefixes of
/// the template's sorted pools (fastest nodes first). Output is ordered by
/// `(n, m, job)`. Combinations run in parallel.
pub fn sweep(
    template: &SystemConfig,
    source_counts: &[usize],
    processor_counts: &[usize],
    jobs: &[f64],
) -> Result<Vec<SweepPoint>> {
    let (pool, _) = template.validate_and_normalize()?;
    check_counts("sources", source_counts, pool.n_sources())?;
    check_counts("processors", processor_counts, pool.n_processors())?;
    if jobs.is_empty() {
        return Err(Error::config("jobs", "at least one job size is required"));
    }
    if let Some(bad) = jobs.iter().find(|j| !(j.is_finite() && **j > 0.0)) {
        return Err(Error::config("jobs", format!("job size must be positive, got {bad}")));
    }

    let mut combos = Vec::new();
    for &n in source_counts {
        for &m in processor_counts {
            for &job in jobs {
                combos.push((n, m, job));
            }
        }
    }
    let mut points = combos
        .into_par_iter()
        .map(|(n, m, job)| solve_point(&pool, n, m, job))
        .collect::<Result<Vec<_>>>()?;
    points.sort_by(|x, y| {
        (x.n_sources, x.m_processors)
            .cmp(&(y.n_sources, y.m_processors))
            .then(x.job.total_cmp(&y.job))
    });
    points.dedup_by(|x, y| {
        x.n_sources == y.n_sources && x.m_processors == y.m_processors && x.job == y.job
    });
    Ok(points)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpeedupPoint {
    pub p_sources: usize,
    pub n_processors: usize,
    /// Finish time with only the first source.
    pub t_baseline: f64,
    pub t_multi: f64,
    pub speedup: f64,
}

/// Ratio of the single-source finish time to the `p`-source finish time,
/// for every `p` in `source_counts` and `1..=max_processors` processors.
pub fn speedup_curve(
    template: &SystemConfig,
    source_counts: &[usize],
    max_processors: usize,
) -> Result<Vec<SpeedupPoint>> {
    let (pool, _) = template.validate_and_normalize()?;
    check_counts("sources", source_counts, pool.n_sources())?;
    check_counts("max_processors", &[max_processors], pool.n_processors())?;

    let mut counts: Vec<usize> = source_counts.to_vec();
    counts.push(1);
    counts.sort_unstable();
    counts.dedup();

    let grid: Vec<(usize, usize)> = counts
        .iter()
        .flat_map(|&p| (1..=max_processors).map(move |n| (p, n)))
        .collect();
    let times = grid
        .par_iter()
        .map(|&(p, n)| crate::solve(&pool.prefix(p, n)?).map(|r| ((p, n), r.t_f)))
        .collect::<Result<std::collections::HashMap<_, _>>>()?;

    let mut wanted: Vec<usize> = source_counts.to_vec();
    wanted.sort_unstable();
    wanted.dedup();
    Ok(wanted
        .iter()
        .flat_map(|&p| (1..=max_processors).map(move |n| (p, n)))
        .map(|(p, n)| {
            let t_baseline = times[&(1, n)];
            let t_multi = times[&(p, n)];
            SpeedupPoint {
                p_sources: p,
                n_processors: n,
                t_baseline,
                t_multi,
                speedup: t_baseline / t_multi,
            }
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Gradient {
    /// Processor count after the step `m − 1 → m`.
    pub m: usize,
    /// Relative finish-time reduction `(T_{m−1} − T_m) / T_{m−1}`.
    pub value: f64,
}

/// Relative finish-time reduction from each added processor.
///
/// Reported as a positive fraction when the finish time drops (the plain
/// difference quotient `(T_m − T_{m−1}) / T_{m−1}` has the opposite sign).
/// Steps touching a non-optimal point are skipped.
pub fn finish_time_gradient(points: &[SweepPoint]) -> Result<Vec<Gradient>> {
    if points.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "gradient needs at least two points, got {}",
            points.len()
        )));
    }
    let head = &points[0];
    for w in points.windows(2) {
        if w[1].n_sources != head.n_sources || w[1].job != head.job {
            return Err(Error::config("points", "gradient series must share source count and job"));
        }
        if w[1].m_processors != w[0].m_processors + 1 {
            return Err(Error::config("points", "gradient series must have consecutive processor counts"));
        }
    }
    Ok(points
        .windows(2)
        .filter_map(|w| match (w[0].t_f, w[1].t_f) {
            (Some(prev), Some(cur)) => Some(Gradient {
                m: w[1].m_processors,
                value: (prev - cur) / prev,
            }),
            _ => None,
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TradeoffQuery {
    pub cost_budget: Option<f64>,
    pub time_budget: Option<f64>,
    pub gradient_threshold: f64,
}

impl TradeoffQuery {
    pub fn new(cost_budget: Option<f64>, time_budget: Option<f64>) -> Self {
        TradeoffQuery {
            cost_budget,
            time_budget,
            gradient_threshold: DEFAULT_GRADIENT_THRESHOLD,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.cost_budget.is_none() && self.time_budget.is_none() {
            return Err(Error::config("budget", "a cost budget, a time budget, or both is required"));
        }
        for (field, v) in [("cost_budget", self.cost_budget), ("time_budget", self.time_budget)] {
            if let Some(v) = v {
                if !v.is_finite() {
                    return Err(Error::config(field, format!("must be finite, got {v}")));
                }
            }
        }
        if !(self.gradient_threshold.is_finite() && self.gradient_threshold >= 0.0) {
            return Err(Error::config(
                "gradient_threshold",
                format!("must be a non-negative fraction, got {}", self.gradient_threshold),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Recommendation {
    Processors { m: usize },
    NoSolution { reason: String },
}

impl Recommendation {
    pub fn processors(&self) -> Option<usize> {
        match self {
            Recommendation::Processors { m } => Some(*m),
            Recommendation::NoSolution { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TradeoffReport {
    pub mode: Mode,
    pub n_sources: usize,
    pub points: Vec<SweepPoint>,
    pub gradients: Vec<Gradient>,
    /// Processor counts within the cost budget; `None` without a cost budget.
    pub cost_feasible_set: Option<Vec<usize>>,
    pub time_feasible_set: Option<Vec<usize>>,
    /// Intersection of the sets that are present.
    pub joint_feasible_set: Vec<usize>,
    pub recommendation: Recommendation,
    /// Observations that do not invalidate the report, such as total cost
    /// dropping when a processor is added.
    pub notes: Vec<String>,
}

/// Processor counts where the total cost is lower than with one fewer
/// processor.
pub fn cost_decreases(points: &[SweepPoint]) -> Vec<usize> {
    points
        .windows(2)
        .filter_map(|w| match (w[0].cost, w[1].cost) {
            (Some(a), Some(b)) if b < a => Some(w[1].m_processors),
            _ => None,
        })
        .collect()
}

/// Picks a processor count for the template's full source pool and
/// `1..=max_processors` processors.
///
/// * Cost budget only: grow `m` while each added processor still cuts the
///   finish time by at least `gradient_threshold`, then take the largest
///   count within budget that does not pass that point.
/// * Time budget only: the fewest processors meeting the deadline.
/// * Both: the fewest processors meeting both budgets.
pub fn tradeoff(template: &SystemConfig, query: &TradeoffQuery, max_processors: usize) -> Result<TradeoffReport> {
    query.validate()?;
    let n = template.n_sources();
    let counts: Vec<usize> = (1..=max_processors).collect();
    let points = sweep(template, &[n], &counts, &[template.job])?;
    let gradients = if points.len() >= 2 {
        finish_time_gradient(&points)?
    } else {
        Vec::new()
    };

    let within = |value: fn(&SweepPoint) -> Option<f64>, budget: f64| -> Vec<usize> {
        points
            .iter()
            .filter(|p| p.status == LpStatus::Optimal && value(p).is_some_and(|v| v <= budget))
            .map(|p| p.m_processors)
            .collect()
    };
    let cost_feasible_set = query.cost_budget.map(|b| within(|p| p.cost, b));
    let time_feasible_set = query.time_budget.map(|b| within(|p| p.t_f, b));

    let feasible: Vec<usize> = points
        .iter()
        .filter(|p| p.status == LpStatus::Optimal)
        .map(|p| p.m_processors)
        .collect();
    let joint_feasible_set: Vec<usize> = feasible
        .iter()
        .copied()
        .filter(|m| cost_feasible_set.as_ref().is_none_or(|s| s.contains(m)))
        .filter(|m| time_feasible_set.as_ref().is_none_or(|s| s.contains(m)))
        .collect();

    let recommendation = match (&cost_feasible_set, &time_feasible_set) {
        (Some(cost_set), None) => {
            let knee = diminishing_returns_knee(&points, &gradients, query.gradient_threshold);
            let pick = cost_set
                .iter()
                .copied()
                .filter(|&m| knee.is_some_and(|k| m <= k))
                .max()
                .or_else(|| cost_set.first().copied());
            match pick {
                Some(m) => Recommendation::Processors { m },
                None => Recommendation::NoSolution {
                    reason: format!(
                        "no configuration with 1..={max_processors} processors fits the cost budget {}",
                        query.cost_budget.unwrap_or_default()
                    ),
                },
            }
        }
        (None, Some(time_set)) => match time_set.first() {
            Some(&m) => Recommendation::Processors { m },
            None => Recommendation::NoSolution {
                reason: format!(
                    "even {max_processors} processors cannot finish within the time budget {}; \
                     allow a longer finish time",
                    query.time_budget.unwrap_or_default()
                ),
            },
        },
        _ => match joint_feasible_set.first() {
            Some(&m) => Recommendation::Processors { m },
            None => Recommendation::NoSolution {
                reason: "no processor count meets both budgets; increase the cost budget \
                         or accept a longer finish time"
                    .to_string(),
            },
        },
    };

    let notes = cost_decreases(&points)
        .into_iter()
        .map(|m| format!("total cost decreases from {} to {m} processors", m - 1))
        .collect();

    Ok(TradeoffReport {
        mode: template.mode,
        n_sources: n,
        points,
        gradients,
        cost_feasible_set,
        time_feasible_set,
        joint_feasible_set,
        recommendation,
        notes,
    })
}

/// Largest `m` such that every step up to `m` cut the finish time by at
/// least `threshold`.
fn diminishing_returns_knee(points: &[SweepPoint], gradients: &[Gradient], threshold: f64) -> Option<usize> {
    let first = points.iter().find(|p| p.status == LpStatus::Optimal)?.m_processors;
    let mut knee = first;
    for g in gradients.iter().filter(|g| g.m > first) {
        if g.m != knee + 1 || g.value < threshold {
            break;
        }
        knee = g.m;
    }
    Some(knee)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ProcessorSpec, SourceSpec};
    use approx::assert_relative_eq;

    fn point(m: usize, t_f: f64) -> SweepPoint {
        SweepPoint {
            n_sources: 1,
            m_processors: m,
            job: 1.0,
            t_f: Some(t_f),
            cost: Some(0.0),
            status: LpStatus::Optimal,
        }
    }

    fn small_cfg(mode: Mode) -> SystemConfig {
        SystemConfig::new(
            vec![SourceSpec { g: 0.5, r: 0.0 }, SourceSpec { g: 0.5, r: 0.0 }],
            (1..=4).map(|k| ProcessorSpec { a: k as f64, c: 10.0 - k as f64 }).collect(),
            10.0,
            mode,
        )
    }

    #[test]
    fn cost_of_simple_allocations() {
        let cfg = SystemConfig::new(
            vec![SourceSpec { g: 1.0, r: 0.0 }],
            vec![ProcessorSpec { a: 2.0, c: 3.0 }, ProcessorSpec { a: 5.0, c: 1.0 }],
            1.0,
            Mode::FrontEnd,
        );
        let all_first = Allocation::from_beta(vec![vec![1.0, 0.0]]);
        assert_relative_eq!(compute_cost(&cfg, &all_first).unwrap().total, 6.0);
        assert_eq!(compute_cost(&cfg, &Allocation::zeros(1, 2)).unwrap().total, 0.0);
        assert!(matches!(
            compute_cost(&cfg, &Allocation::zeros(2, 2)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn gradients() {
        let flat: Vec<_> = (1..=4).map(|m| point(m, 7.0)).collect();
        assert!(finish_time_gradient(&flat).unwrap().iter().all(|g| g.value == 0.0));

        let halving: Vec<_> = (1..=5).map(|m| point(m, 64.0 / 2f64.powi(m as i32))).collect();
        let g = finish_time_gradient(&halving).unwrap();
        assert_eq!(g.len(), 4);
        assert!(g.iter().all(|g| (g.value - 0.5).abs() < 1e-15));
        assert_eq!(g[0].m, 2);

        assert!(matches!(finish_time_gradient(&flat[..1]), Err(Error::InsufficientData(_))));
        let gap = vec![point(1, 2.0), point(3, 1.0)];
        assert!(finish_time_gradient(&gap).is_err());
    }

    #[test]
    fn infeasible_points_are_skipped() {
        let mut pts: Vec<_> = (1..=4).map(|m| point(m, 10.0 - m as f64)).collect();
        pts[1].t_f = None;
        pts[1].status = LpStatus::Infeasible;
        let g = finish_time_gradient(&pts).unwrap();
        assert_eq!(g.iter().map(|g| g.m).collect::<Vec<_>>(), vec![4]);
    }

    #[test]
    fn sweep_matches_direct_solve() {
        let cfg = small_cfg(Mode::StoreForward);
        let pts = sweep(&cfg, &[2], &[3], &[10.0]).unwrap();
        assert_eq!(pts.len(), 1);
        let direct = crate::solve(&cfg.prefix(2, 3).unwrap()).unwrap();
        assert_eq!(pts[0].t_f, Some(direct.t_f));
    }

    #[test]
    fn sweep_rejects_oversized_counts() {
        let cfg = small_cfg(Mode::FrontEnd);
        assert!(matches!(sweep(&cfg, &[3], &[1], &[1.0]), Err(Error::Config { .. })));
        assert!(matches!(sweep(&cfg, &[], &[1], &[1.0]), Err(Error::Config { .. })));
        assert!(matches!(sweep(&cfg, &[1], &[1], &[]), Err(Error::Config { .. })));
    }

    #[test]
    fn speedup_with_one_source_is_one() {
        let cfg = small_cfg(Mode::StoreForward);
        let pts = speedup_curve(&cfg, &[1, 2], 4).unwrap();
        assert_eq!(pts.len(), 8);
        for p in pts.iter().filter(|p| p.p_sources == 1) {
            assert_eq!(p.speedup, 1.0);
        }
        for p in pts.iter().filter(|p| p.p_sources == 2) {
            assert!(p.speedup >= 1.0 - 1e-9);
        }
    }

    #[test]
    fn query_needs_a_budget() {
        let q = TradeoffQuery::new(None, None);
        assert!(matches!(q.validate(), Err(Error::Config { .. })));
        let cfg = small_cfg(Mode::FrontEnd);
        assert!(tradeoff(&cfg, &q, 4).is_err());
    }

    #[test]
    fn impossible_budgets() {
        let cfg = small_cfg(Mode::FrontEnd);
        let q = TradeoffQuery::new(Some(-1.0), Some(0.001));
        let rep = tradeoff(&cfg, &q, 4).unwrap();
        assert!(rep.joint_feasible_set.is_empty());
        assert!(matches!(rep.recommendation, Recommendation::NoSolution { .. }));
    }

    #[test]
    fn joint_set_is_intersection() {
        let cfg = small_cfg(Mode::FrontEnd);
        let base = tradeoff(&cfg, &TradeoffQuery::new(None, Some(f64::MAX)), 4).unwrap();
        let costs: Vec<f64> = base.points.iter().map(|p| p.cost.unwrap()).collect();
        let times: Vec<f64> = base.points.iter().map(|p| p.t_f.unwrap()).collect();
        let q = TradeoffQuery::new(Some(costs[2]), Some(times[1]));
        let rep = tradeoff(&cfg, &q, 4).unwrap();
        let c = rep.cost_feasible_set.clone().unwrap();
        let t = rep.time_feasible_set.clone().unwrap();
        let expected: Vec<usize> = c.iter().copied().filter(|m| t.contains(m)).collect();
        assert_eq!(rep.joint_feasible_set, expected);
        assert_eq!(rep.recommendation.processors(), expected.first().copied());
    }
}
