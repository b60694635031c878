#![allow(dead_code)]

use dlsched::linprog::{Constraint, LinearProgram};
use dlsched::{Mode, ProcessorSpec, SourceSpec, SystemConfig};
use rand::Rng;

/// Inverse speeds 1.1, 1.2, ..., 3.0 (20 processors).
pub fn graded_speeds() -> Vec<f64> {
    (0..20).map(|k| (11 + k) as f64 / 10.0).collect()
}

pub fn config(g: &[f64], r: &[f64], a: &[f64], c: &[f64], job: f64, mode: Mode) -> SystemConfig {
    SystemConfig::new(
        g.iter().zip(r).map(|(&g, &r)| SourceSpec { g, r }).collect(),
        a.iter()
            .enumerate()
            .map(|(j, &a)| ProcessorSpec {
                a,
                c: c.get(j).copied().unwrap_or(0.0),
            })
            .collect(),
        job,
        mode,
    )
}

/// Two sources, five processors, widely spaced releases.
pub fn two_source_five_proc() -> SystemConfig {
    config(&[0.2, 0.4], &[10.0, 50.0], &[2.0, 3.0, 4.0, 5.0, 6.0], &[], 100.0, Mode::FrontEnd)
}

/// Two equal sources, three processors, store-and-forward.
pub fn two_source_three_proc() -> SystemConfig {
    config(&[0.2, 0.2], &[0.0, 5.0], &[2.0, 3.0, 4.0], &[], 100.0, Mode::StoreForward)
}

/// Three sources and twenty graded processors, store-and-forward.
pub fn three_source_pool() -> SystemConfig {
    config(&[0.5, 0.6, 0.7], &[2.0, 3.0, 4.0], &graded_speeds(), &[], 100.0, Mode::StoreForward)
}

/// Ten identical sources and eighteen identical processors.
pub fn homogeneous_pool() -> SystemConfig {
    config(&[0.5; 10], &[0.0; 10], &[2.0; 18], &[], 100.0, Mode::StoreForward)
}

/// Two sources and twenty priced processors; faster processors cost more.
pub fn priced_pool() -> SystemConfig {
    let cost: Vec<f64> = (0..20).map(|k| (29 - k) as f64).collect();
    config(&[0.5, 0.6], &[2.0, 3.0], &graded_speeds(), &cost, 100.0, Mode::FrontEnd)
}

pub fn random_config<R: Rng>(rng: &mut R, max_n: usize, max_m: usize, mode: Mode) -> SystemConfig {
    let n = rng.gen_range(1..=max_n);
    let m = rng.gen_range(1..=max_m);
    let g: Vec<f64> = (0..n).map(|_| rng.gen_range(0.1..1.0)).collect();
    let r: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..5.0)).collect();
    let a: Vec<f64> = (0..m).map(|_| rng.gen_range(1.0..5.0)).collect();
    let c: Vec<f64> = (0..m).map(|_| rng.gen_range(0.0..30.0)).collect();
    let job = rng.gen_range(10.0..200.0);
    config(&g, &r, &a, &c, job, mode)
}

pub fn random_single_source<R: Rng>(rng: &mut R, max_m: usize) -> SystemConfig {
    let m = rng.gen_range(1..=max_m);
    let g = rng.gen_range(0.05..1.0);
    let mut a: Vec<f64> = (0..m).map(|_| rng.gen_range(0.5..5.0)).collect();
    a.sort_by(f64::total_cmp);
    let job = rng.gen_range(1.0..500.0);
    config(&[g], &[0.0], &a, &[], job, Mode::StoreForward)
}

/// Random bounded LP: every variable is boxed to `[-BOX, BOX]` (free) or
/// `[0, BOX]` (nonnegative), so any feasible instance has a vertex optimum.
pub const BOX: f64 = 10.0;

pub fn random_lp<R: Rng>(rng: &mut R) -> LinearProgram {
    let n = rng.gen_range(1..=4);
    let coeff = |rng: &mut R| rng.gen_range(-5..=5) as f64;
    let objective = (0..n).map(|_| coeff(rng)).collect();
    let mut lp = LinearProgram::new(objective);
    lp.nonneg_mask = (0..n).map(|_| rng.gen_bool(0.8)).collect();
    let rows = rng.gen_range(1..=6);
    for _ in 0..rows {
        let a: Vec<f64> = (0..n).map(|_| coeff(rng)).collect();
        let b = rng.gen_range(-5..=10) as f64;
        if rng.gen_bool(0.2) {
            lp.add_eq(a, b);
        } else {
            lp.add_le(a, b);
        }
    }
    for k in 0..n {
        let mut e = vec![0.0; n];
        e[k] = 1.0;
        lp.add_le(e.clone(), BOX);
        if !lp.nonneg_mask[k] {
            e[k] = -1.0;
            lp.add_le(e, BOX);
        }
    }
    lp
}

/// Solves a square system by Gaussian elimination with partial pivoting.
fn solve_square(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs()))?;
        if a[piv][col].abs() < 1e-10 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in 0..n {
            if r != col {
                let f = a[r][col] / a[col][col];
                for k in col..n {
                    a[r][k] -= f * a[col][k];
                }
                b[r] -= f * b[col];
            }
        }
    }
    Some((0..n).map(|k| b[k] / a[k][k]).collect())
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// Brute-force optimum over all vertices of a bounded LP; `None` when no
/// vertex is feasible.
pub fn vertex_enumeration(lp: &LinearProgram) -> Option<f64> {
    let n = lp.n_vars();
    let mut rows: Vec<Constraint> = lp.eq_constraints.clone();
    rows.extend(lp.le_constraints.iter().cloned());
    for k in 0..n {
        if lp.nonneg_mask[k] {
            let mut e = vec![0.0; n];
            e[k] = -1.0;
            rows.push(Constraint::new(e, 0.0));
        }
    }
    let feasible = |x: &[f64]| {
        lp.eq_constraints.iter().all(|c| (c.eval(x) - c.rhs).abs() <= 1e-9)
            && lp.le_constraints.iter().all(|c| c.eval(x) <= c.rhs + 1e-9)
            && x.iter().zip(&lp.nonneg_mask).all(|(v, &nn)| !nn || *v >= -1e-9)
    };
    combinations(rows.len(), n)
        .into_iter()
        .filter_map(|idx| {
            let a = idx.iter().map(|&r| rows[r].coeffs.clone()).collect();
            let b = idx.iter().map(|&r| rows[r].rhs).collect();
            solve_square(a, b)
        })
        .filter(|x| feasible(x))
        .map(|x| lp.objective.iter().zip(&x).map(|(c, v)| c * v).sum::<f64>())
        .min_by(f64::total_cmp)
}
