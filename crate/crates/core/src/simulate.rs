//! Event-replay verification of schedules.
//!
//! Nothing here consults the linear programs: a schedule is replayed on its
//! own terms (link exclusivity, release times, data availability) and the
//! finish time it actually achieves is recomputed from scratch.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Allocation, Schedule, SolveResult, SystemConfig};

/// Absolute tolerance for every simulator check, in time or load units.
pub const SIM_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    LinkOverlapSource,
    LinkOverlapProcessor,
    ReleaseViolated,
    ComputeStarved,
    LengthMismatch,
    FinishMismatch,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub source: Option<usize>,
    pub processor: Option<usize>,
    pub magnitude: f64,
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:?}", self.kind)?;
        if let Some(i) = self.source {
            write!(f, " source={i}")?;
        }
        if let Some(j) = self.processor {
            write!(f, " processor={j}")?;
        }
        write!(f, " magnitude={:e}", self.magnitude)
    }
}

/// Piecewise-linear curve given by breakpoints `(t, value)` with
/// non-decreasing `t`. Constant before the first and after the last point.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Curve {
    pub points: Vec<(f64, f64)>,
}

impl Curve {
    pub fn eval(&self, t: f64) -> f64 {
        let pts = &self.points;
        match pts.first() {
            None => 0.0,
            Some(&(t0, v0)) if t <= t0 => v0,
            _ => {
                // Last breakpoint at or before t.
                let k = pts.partition_point(|&(pt, _)| pt <= t) - 1;
                match pts.get(k + 1) {
                    None => pts[k].1,
                    Some(&(t1, v1)) => {
                        let (t0, v0) = pts[k];
                        if t1 > t0 {
                            v0 + (v1 - v0) * (t - t0) / (t1 - t0)
                        } else {
                            v1
                        }
                    }
                }
            }
        }
    }
}

/// Cumulative load received and computed by one processor over time.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ProcessorTimeline {
    pub received: Curve,
    pub computed: Curve,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub achieved_finish: f64,
    pub violations: Vec<Violation>,
    pub per_processor_timeline: Vec<ProcessorTimeline>,
}

impl SimulationReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn count(&self, kind: ViolationKind) -> usize {
        self.violations.iter().filter(|v| v.kind == kind).count()
    }
}

fn check_result_dims(cfg: &SystemConfig, alloc: &Allocation) -> Result<()> {
    alloc.check_dims(cfg.n_sources(), cfg.n_processors())
}

fn received_curve(alloc: &Allocation, sched: &Schedule, j: usize) -> Curve {
    let mut windows: Vec<(f64, f64, f64)> = (0..alloc.n_sources())
        .filter(|&i| alloc.beta[i][j] > 0.0)
        .map(|i| (sched.ts[i][j], sched.tf[i][j], alloc.beta[i][j]))
        .collect();
    windows.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut points = Vec::with_capacity(2 * windows.len() + 1);
    let mut total = 0.0;
    for (start, end, load) in windows {
        points.push((start, total));
        total += load;
        points.push((end.max(start), total));
    }
    if points.is_empty() {
        points.push((0.0, 0.0));
    }
    Curve { points }
}

fn computed_curve(start: f64, duration: f64, load: f64) -> Curve {
    Curve {
        points: vec![(start, 0.0), (start + duration, load)],
    }
}

/// Flags pairwise overlap among `(start, end)` windows, `index` naming the
/// other axis of each window.
fn overlaps(windows: &[(usize, f64, f64)]) -> Vec<(usize, usize, f64)> {
    let mut out = Vec::new();
    for (a, &(ia, sa, ea)) in windows.iter().enumerate() {
        for &(ib, sb, eb) in &windows[a + 1..] {
            let overlap = ea.min(eb) - sa.max(sb);
            if overlap > SIM_TOL {
                out.push((ia, ib, overlap));
            }
        }
    }
    out
}

fn link_checks(cfg: &SystemConfig, alloc: &Allocation, sched: &Schedule, out: &mut Vec<Violation>) {
    let (n, m) = (cfg.n_sources(), cfg.n_processors());
    for i in 0..n {
        let windows: Vec<_> = (0..m).map(|j| (j, sched.ts[i][j], sched.tf[i][j])).collect();
        for (j, _, overlap) in overlaps(&windows) {
            out.push(Violation {
                kind: ViolationKind::LinkOverlapSource,
                source: Some(i),
                processor: Some(j),
                magnitude: overlap,
            });
        }
    }
    for j in 0..m {
        let windows: Vec<_> = (0..n).map(|i| (i, sched.ts[i][j], sched.tf[i][j])).collect();
        for (i, _, overlap) in overlaps(&windows) {
            out.push(Violation {
                kind: ViolationKind::LinkOverlapProcessor,
                source: Some(i),
                processor: Some(j),
                magnitude: overlap,
            });
        }
    }
    for i in 0..n {
        for j in 0..m {
            let expected = alloc.beta[i][j] * cfg.sources[i].g;
            let diff = (sched.tf[i][j] - sched.ts[i][j] - expected).abs();
            if diff > SIM_TOL {
                out.push(Violation {
                    kind: ViolationKind::LengthMismatch,
                    source: Some(i),
                    processor: Some(j),
                    magnitude: diff,
                });
            }
        }
    }
}

fn release(i: usize, j: Option<usize>, magnitude: f64) -> Violation {
    Violation {
        kind: ViolationKind::ReleaseViolated,
        source: Some(i),
        processor: j,
        magnitude,
    }
}

/// Replays a store-and-forward solution.
///
/// Checks transmission lengths, link exclusivity on both ends, release
/// times (including the first-source anchor and, when enabled, source
/// utilization), that each processor computes only after its last fraction
/// arrives and for exactly its workload, and that the achieved finish is
/// no later than the claimed `T_f`. `result` must be in sorted node order.
pub fn simulate_storeforward(cfg: &SystemConfig, result: &SolveResult) -> Result<SimulationReport> {
    check_result_dims(cfg, &result.allocation)?;
    let sched = result.schedule.as_ref().ok_or(Error::MissingSchedule)?;
    let (n, m) = (cfg.n_sources(), cfg.n_processors());
    sched.check_dims(n, m)?;
    let alloc = &result.allocation;
    let mut violations = Vec::new();

    link_checks(cfg, alloc, sched, &mut violations);

    let r1 = cfg.sources[0].r;
    let anchor = (sched.ts[0][0] - r1).abs();
    if anchor > SIM_TOL {
        violations.push(release(0, Some(0), anchor));
    }
    for i in 0..n {
        let r = cfg.sources[i].r;
        for j in (0..m).filter(|&j| (i, j) != (0, 0)) {
            let early = r - sched.ts[i][j];
            if early > SIM_TOL {
                violations.push(release(i, Some(j), early));
            }
        }
        if i > 0 && cfg.options.enforce_source_utilization {
            let idle = r - sched.tf[i - 1][0];
            if idle > SIM_TOL {
                violations.push(release(i - 1, None, idle));
            }
        }
    }

    let mut achieved: f64 = f64::NEG_INFINITY;
    let mut timelines = Vec::with_capacity(m);
    for j in 0..m {
        let load = alloc.processor_load(j);
        let work = load * cfg.processors[j].a;
        let start = sched.compute_start[j];
        let last_arrival = (0..n)
            .filter(|&i| alloc.beta[i][j] > 0.0)
            .map(|i| sched.tf[i][j])
            .fold(f64::NEG_INFINITY, f64::max);
        if last_arrival - start > SIM_TOL {
            violations.push(Violation {
                kind: ViolationKind::ComputeStarved,
                source: None,
                processor: Some(j),
                magnitude: last_arrival - start,
            });
        }
        let duration_err = (sched.compute_end[j] - start - work).abs();
        if duration_err > SIM_TOL {
            violations.push(Violation {
                kind: ViolationKind::LengthMismatch,
                source: None,
                processor: Some(j),
                magnitude: duration_err,
            });
        }
        achieved = achieved.max(start + work);
        timelines.push(ProcessorTimeline {
            received: received_curve(alloc, sched, j),
            computed: computed_curve(start, work, load),
        });
    }

    if achieved - result.t_f > SIM_TOL {
        violations.push(Violation {
            kind: ViolationKind::FinishMismatch,
            source: None,
            processor: None,
            magnitude: achieved - result.t_f,
        });
    }

    Ok(SimulationReport {
        achieved_finish: achieved,
        violations,
        per_processor_timeline: timelines,
    })
}

/// Earliest-start timetable for a front-end allocation.
///
/// Sources serve processors in index order and processors hear sources in
/// index order; each transmission starts as soon as its source is released,
/// the source has finished its previous fraction and the processor has
/// finished hearing the previous source. Each processor starts computing
/// when its first non-empty fraction starts arriving; a processor with no
/// load, or with load from the first source, starts when the first source
/// reaches it.
pub fn reconstruct_frontend_schedule(cfg: &SystemConfig, allocation: &Allocation) -> Result<Schedule> {
    let (n, m) = (cfg.n_sources(), cfg.n_processors());
    allocation.check_dims(n, m)?;
    let mut ts = vec![vec![0.0; m]; n];
    let mut tf = vec![vec![0.0; m]; n];
    for i in 0..n {
        let r = cfg.sources[i].r;
        for j in 0..m {
            let source_free = if j == 0 { r } else { tf[i][j - 1] };
            let link_free = if i == 0 { 0.0 } else { tf[i - 1][j] };
            let start = source_free.max(link_free).max(r);
            ts[i][j] = start;
            tf[i][j] = start + allocation.beta[i][j] * cfg.sources[i].g;
        }
    }
    let compute_start: Vec<f64> = (0..m)
        .map(|j| {
            let first = (0..n).find(|&i| allocation.beta[i][j] > 0.0).unwrap_or(0);
            ts[first][j]
        })
        .collect();
    let compute_end = compute_start
        .iter()
        .enumerate()
        .map(|(j, s)| s + cfg.processors[j].a * allocation.processor_load(j))
        .collect();
    Ok(Schedule {
        ts,
        tf,
        compute_start,
        compute_end,
    })
}

/// Replays a front-end solution on its earliest-start timetable.
///
/// Each processor computes continuously from `compute_start` until its
/// workload is done; it is starved wherever the computed-load curve runs
/// ahead of the received-load curve. Both are piecewise linear, so checking
/// the union of their breakpoints is exact. At most one `ComputeStarved`
/// entry is reported per processor, carrying the worst shortfall.
pub fn simulate_frontend(cfg: &SystemConfig, result: &SolveResult) -> Result<SimulationReport> {
    check_result_dims(cfg, &result.allocation)?;
    let alloc = &result.allocation;
    let sched = reconstruct_frontend_schedule(cfg, alloc)?;
    let mut violations = Vec::new();
    link_checks(cfg, alloc, &sched, &mut violations);

    let mut achieved: f64 = f64::NEG_INFINITY;
    let mut timelines = Vec::with_capacity(cfg.n_processors());
    for j in 0..cfg.n_processors() {
        let load = alloc.processor_load(j);
        let work = load * cfg.processors[j].a;
        let start = sched.compute_start[j];
        let received = received_curve(alloc, &sched, j);
        let computed = computed_curve(start, work, load);

        let shortfall = received
            .points
            .iter()
            .chain(&computed.points)
            .map(|&(t, _)| computed.eval(t) - received.eval(t))
            .fold(0.0, f64::max);
        if shortfall > SIM_TOL {
            violations.push(Violation {
                kind: ViolationKind::ComputeStarved,
                source: None,
                processor: Some(j),
                magnitude: shortfall,
            });
        }
        achieved = achieved.max(start + work);
        timelines.push(ProcessorTimeline { received, computed });
    }

    if achieved - result.t_f > SIM_TOL {
        violations.push(Violation {
            kind: ViolationKind::FinishMismatch,
            source: None,
            processor: None,
            magnitude: achieved - result.t_f,
        });
    }

    Ok(SimulationReport {
        achieved_finish: achieved,
        violations,
        per_processor_timeline: timelines,
    })
}

/// Replays `result` against `cfg` in the caller's node order.
///
/// `result` must be in sorted order, as returned by [`crate::solve`]; its
/// permutation record has to match the one `cfg` normalizes to.
pub fn simulate(cfg: &SystemConfig, result: &SolveResult) -> Result<SimulationReport> {
    let (sorted, perms) = cfg.validate_and_normalize()?;
    if perms != result.permutations {
        return Err(Error::config(
            "applied_permutations",
            "result was produced for a different node ordering than this config",
        ));
    }
    match sorted.mode {
        crate::model::Mode::FrontEnd => simulate_frontend(&sorted, result),
        crate::model::Mode::StoreForward => simulate_storeforward(&sorted, result),
    }
}
