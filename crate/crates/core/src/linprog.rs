//! Dense two-phase tableau simplex.
//!
//! Problems are stated as
//!
//! ```text
//! minimize    c·x
//! subject to  A_eq x  = b_eq
//!             A_le x <= b_le
//!             x_k >= 0  for every k with nonneg[k]
//! ```
//!
//! Free variables are split into a difference of two nonnegative columns.
//! Pricing uses the most negative reduced cost and falls back to Bland's
//! smallest-index rule after a run of degenerate pivots, which rules out
//! cycling; ratio-test ties always go to the smallest basic index.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Relative feasibility tolerance, scaled by `max(1, |rhs|)`.
pub const FEASIBILITY_TOL: f64 = 1e-7;

const PIVOT_TOL: f64 = 1e-9;
const COST_TOL: f64 = 1e-9;
/// Degenerate pivots tolerated before switching to Bland's rule.
const DEGENERATE_STREAK: usize = 32;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Constraint {
    pub coeffs: Vec<f64>,
    pub rhs: f64,
}

impl Constraint {
    pub fn new(coeffs: Vec<f64>, rhs: f64) -> Self {
        Constraint { coeffs, rhs }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.coeffs.iter().zip(x).map(|(a, b)| a * b).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearProgram {
    pub objective: Vec<f64>,
    pub eq_constraints: Vec<Constraint>,
    pub le_constraints: Vec<Constraint>,
    pub nonneg_mask: Vec<bool>,
}

impl LinearProgram {
    /// An empty program over `n` nonnegative variables.
    pub fn new(objective: Vec<f64>) -> Self {
        let n = objective.len();
        LinearProgram {
            objective,
            eq_constraints: Vec::new(),
            le_constraints: Vec::new(),
            nonneg_mask: vec![true; n],
        }
    }

    pub fn n_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn n_constraints(&self) -> usize {
        self.eq_constraints.len() + self.le_constraints.len()
    }

    pub fn add_eq(&mut self, coeffs: Vec<f64>, rhs: f64) {
        self.eq_constraints.push(Constraint::new(coeffs, rhs));
    }

    pub fn add_le(&mut self, coeffs: Vec<f64>, rhs: f64) {
        self.le_constraints.push(Constraint::new(coeffs, rhs));
    }

    /// Adds `coeffs·x >= rhs` as `-coeffs·x <= -rhs`.
    pub fn add_ge(&mut self, coeffs: Vec<f64>, rhs: f64) {
        let neg = coeffs.into_iter().map(|v| -v).collect();
        self.le_constraints.push(Constraint::new(neg, -rhs));
    }

    fn check(&self) -> Result<(), LpError> {
        let n = self.n_vars();
        if self.nonneg_mask.len() != n {
            return Err(LpError::Malformed(format!(
                "nonneg mask has {} entries for {n} variables",
                self.nonneg_mask.len()
            )));
        }
        for (kind, rows) in [("equality", &self.eq_constraints), ("inequality", &self.le_constraints)] {
            for (r, c) in rows.iter().enumerate() {
                if c.coeffs.len() != n {
                    return Err(LpError::Malformed(format!(
                        "{kind} row {r} has {} coefficients for {n} variables",
                        c.coeffs.len()
                    )));
                }
                if !c.rhs.is_finite() || c.coeffs.iter().any(|v| !v.is_finite()) {
                    return Err(LpError::Malformed(format!("{kind} row {r} has non-finite data")));
                }
            }
        }
        if self.objective.iter().any(|v| !v.is_finite()) {
            return Err(LpError::Malformed("non-finite objective coefficient".into()));
        }
        Ok(())
    }

    /// Largest absolute violation of any constraint or sign restriction at `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let eq = self.eq_constraints.iter().map(|c| (c.eval(x) - c.rhs).abs());
        let le = self.le_constraints.iter().map(|c| (c.eval(x) - c.rhs).max(0.0));
        let sign = x
            .iter()
            .zip(&self.nonneg_mask)
            .filter(|(_, &nn)| nn)
            .map(|(v, _)| (-v).max(0.0));
        eq.chain(le).chain(sign).fold(0.0, f64::max)
    }

    /// Largest violation of any constraint or sign restriction at `x`, each
    /// scaled by `max(1, |rhs|)`.
    pub fn max_scaled_violation(&self, x: &[f64]) -> f64 {
        let eq = self
            .eq_constraints
            .iter()
            .map(|c| (c.eval(x) - c.rhs).abs() / c.rhs.abs().max(1.0));
        let le = self
            .le_constraints
            .iter()
            .map(|c| (c.eval(x) - c.rhs).max(0.0) / c.rhs.abs().max(1.0));
        let sign = x
            .iter()
            .zip(&self.nonneg_mask)
            .filter(|(_, &nn)| nn)
            .map(|(v, _)| (-v).max(0.0));
        eq.chain(le).chain(sign).fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpSolution {
    /// Empty unless `status` is `Optimal`.
    pub x: Vec<f64>,
    pub objective_value: f64,
    pub status: LpStatus,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LpError {
    #[error("malformed linear program: {0}")]
    Malformed(String),
    #[error("simplex failed to converge within {iterations} pivots")]
    IterationLimit { iterations: usize },
    #[error("numerical failure: optimal basis violates constraints by {violation:e}")]
    Inaccurate { violation: f64 },
}

impl LpError {
    pub fn is_numerical_failure(&self) -> bool {
        !matches!(self, LpError::Malformed(_))
    }
}

/// Solves `lp` to optimality or reports infeasibility/unboundedness.
pub fn solve_lp(lp: &LinearProgram) -> Result<LpSolution, LpError> {
    lp.check()?;
    let mut tab = Tableau::build(lp);
    let cap = 50 * (tab.width + tab.rows);

    let mut iterations = 0;
    if tab.n_art > 0 {
        tab.set_phase_one_costs();
        match tab.run(tab.width, cap, &mut iterations)? {
            Outcome::Optimal => {}
            // Phase one is bounded below by zero.
            Outcome::Unbounded => unreachable!("phase one cannot be unbounded"),
        }
        let infeasibility = -tab.obj_value;
        if infeasibility > FEASIBILITY_TOL * tab.rhs_scale {
            return Ok(LpSolution {
                x: Vec::new(),
                objective_value: f64::NAN,
                status: LpStatus::Infeasible,
                iterations,
            });
        }
        tab.evict_artificials();
    }

    let width = tab.n_real();
    tab.set_phase_two_costs();
    let status = match tab.run(width, cap, &mut iterations)? {
        Outcome::Optimal => LpStatus::Optimal,
        Outcome::Unbounded => {
            return Ok(LpSolution {
                x: Vec::new(),
                objective_value: f64::NEG_INFINITY,
                status: LpStatus::Unbounded,
                iterations,
            })
        }
    };

    let x = tab.primal(lp);
    let violation = lp.max_scaled_violation(&x);
    if violation > FEASIBILITY_TOL {
        return Err(LpError::Inaccurate { violation });
    }
    let objective_value = lp.objective.iter().zip(&x).map(|(c, v)| c * v).sum();
    Ok(LpSolution {
        x,
        objective_value,
        status,
        iterations,
    })
}

enum Outcome {
    Optimal,
    Unbounded,
}

/// How an original variable maps onto tableau columns.
#[derive(Clone, Copy)]
enum ColumnMap {
    Single(usize),
    Split(usize, usize),
}

struct Tableau {
    rows: usize,
    /// Total columns: structural, then slack, then artificial.
    width: usize,
    n_struct: usize,
    n_slack: usize,
    n_art: usize,
    /// Row-major `rows × width`.
    a: Vec<f64>,
    b: Vec<f64>,
    /// Reduced costs over all columns.
    d: Vec<f64>,
    /// Negated objective value of the current basis.
    obj_value: f64,
    basis: Vec<usize>,
    costs: Vec<f64>,
    columns: Vec<ColumnMap>,
    rhs_scale: f64,
}

impl Tableau {
    fn build(lp: &LinearProgram) -> Tableau {
        let mut columns = Vec::with_capacity(lp.n_vars());
        let mut n_struct = 0;
        for &nn in &lp.nonneg_mask {
            if nn {
                columns.push(ColumnMap::Single(n_struct));
                n_struct += 1;
            } else {
                columns.push(ColumnMap::Split(n_struct, n_struct + 1));
                n_struct += 2;
            }
        }

        let n_slack = lp.le_constraints.len();
        let rows = lp.eq_constraints.len() + n_slack;

        // Rows whose natural basic variable is not usable (equalities and
        // inequalities with negative rhs) get an artificial column.
        let needs_art: Vec<bool> = lp
            .eq_constraints
            .iter()
            .map(|_| true)
            .chain(lp.le_constraints.iter().map(|c| c.rhs < 0.0))
            .collect();
        let n_art = needs_art.iter().filter(|&&x| x).count();
        let width = n_struct + n_slack + n_art;

        let mut a = vec![0.0; rows * width];
        let mut b = vec![0.0; rows];
        let mut basis = vec![0; rows];
        let mut next_art = n_struct + n_slack;

        let all_rows = lp.eq_constraints.iter().chain(&lp.le_constraints);
        for (r, con) in all_rows.enumerate() {
            let sign = if con.rhs < 0.0 { -1.0 } else { 1.0 };
            let row = &mut a[r * width..(r + 1) * width];
            for (k, &v) in con.coeffs.iter().enumerate() {
                match columns[k] {
                    ColumnMap::Single(c) => row[c] = sign * v,
                    ColumnMap::Split(p, q) => {
                        row[p] = sign * v;
                        row[q] = -sign * v;
                    }
                }
            }
            b[r] = sign * con.rhs;
            let slack = r.checked_sub(lp.eq_constraints.len()).map(|s| n_struct + s);
            if let Some(s) = slack {
                row[s] = sign;
            }
            if needs_art[r] {
                row[next_art] = 1.0;
                basis[r] = next_art;
                next_art += 1;
            } else {
                basis[r] = slack.expect("only inequality rows skip the artificial");
            }
        }

        let mut costs = vec![0.0; width];
        for (k, &c) in lp.objective.iter().enumerate() {
            match columns[k] {
                ColumnMap::Single(j) => costs[j] = c,
                ColumnMap::Split(p, q) => {
                    costs[p] = c;
                    costs[q] = -c;
                }
            }
        }

        let rhs_scale = b.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
        Tableau {
            rows,
            width,
            n_struct,
            n_slack,
            n_art,
            a,
            b,
            d: vec![0.0; width],
            obj_value: 0.0,
            basis,
            costs,
            columns,
            rhs_scale,
        }
    }

    fn n_real(&self) -> usize {
        self.n_struct + self.n_slack
    }

    fn is_artificial(&self, col: usize) -> bool {
        col >= self.n_real()
    }

    fn row(&self, r: usize) -> &[f64] {
        &self.a[r * self.width..(r + 1) * self.width]
    }

    /// Recomputes reduced costs `d = c - c_B B⁻¹A` for cost vector `c`.
    fn price(&mut self, c: &[f64]) {
        self.d.copy_from_slice(c);
        self.obj_value = 0.0;
        for r in 0..self.rows {
            let cb = c[self.basis[r]];
            if cb == 0.0 {
                continue;
            }
            let row = &self.a[r * self.width..(r + 1) * self.width];
            for (d, &v) in self.d.iter_mut().zip(row) {
                *d -= cb * v;
            }
            self.obj_value -= cb * self.b[r];
        }
    }

    fn set_phase_one_costs(&mut self) {
        let c: Vec<f64> = (0..self.width)
            .map(|j| if self.is_artificial(j) { 1.0 } else { 0.0 })
            .collect();
        self.price(&c);
    }

    fn set_phase_two_costs(&mut self) {
        let c = self.costs.clone();
        self.price(&c);
    }

    fn run(&mut self, width: usize, cap: usize, iterations: &mut usize) -> Result<Outcome, LpError> {
        let mut degenerate = 0;
        loop {
            let bland = degenerate >= DEGENERATE_STREAK;
            let Some(enter) = self.choose_entering(width, bland) else {
                return Ok(Outcome::Optimal);
            };
            let Some(leave) = self.choose_leaving(enter) else {
                return Ok(Outcome::Unbounded);
            };
            if *iterations >= cap {
                return Err(LpError::IterationLimit { iterations: *iterations });
            }
            let step = self.b[leave] / self.a[leave * self.width + enter];
            if step.abs() <= PIVOT_TOL * self.rhs_scale {
                degenerate += 1;
            } else {
                degenerate = 0;
            }
            self.pivot(leave, enter);
            *iterations += 1;
        }
    }

    fn choose_entering(&self, width: usize, bland: bool) -> Option<usize> {
        let candidates = self.d[..width].iter().enumerate().filter(|(_, &d)| d < -COST_TOL);
        if bland {
            candidates.map(|(j, _)| j).next()
        } else {
            candidates
                .min_by(|x, y| x.1.total_cmp(y.1))
                .map(|(j, _)| j)
        }
    }

    fn choose_leaving(&self, enter: usize) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for r in 0..self.rows {
            let v = self.a[r * self.width + enter];
            if v <= PIVOT_TOL {
                continue;
            }
            let ratio = self.b[r].max(0.0) / v;
            best = match best {
                None => Some((r, ratio)),
                Some((br, bratio)) => {
                    let tie = (ratio - bratio).abs() <= 1e-12 * bratio.abs().max(1.0);
                    if ratio < bratio && !tie || tie && self.basis[r] < self.basis[br] {
                        Some((r, ratio))
                    } else {
                        Some((br, bratio))
                    }
                }
            };
        }
        best.map(|(r, _)| r)
    }

    fn pivot(&mut self, leave: usize, enter: usize) {
        let w = self.width;
        let p = self.a[leave * w + enter];
        {
            let row = &mut self.a[leave * w..(leave + 1) * w];
            for v in row.iter_mut() {
                *v /= p;
            }
            row[enter] = 1.0;
        }
        self.b[leave] /= p;

        let pivot_row: Vec<f64> = self.row(leave).to_vec();
        let nz: Vec<usize> = (0..w).filter(|&j| pivot_row[j] != 0.0).collect();
        let pb = self.b[leave];

        for r in 0..self.rows {
            if r == leave {
                continue;
            }
            let f = self.a[r * w + enter];
            if f == 0.0 {
                continue;
            }
            let row = &mut self.a[r * w..(r + 1) * w];
            for &j in &nz {
                row[j] -= f * pivot_row[j];
            }
            row[enter] = 0.0;
            self.b[r] -= f * pb;
            if self.b[r] < 0.0 && self.b[r] > -PIVOT_TOL * self.rhs_scale {
                self.b[r] = 0.0;
            }
        }

        let f = self.d[enter];
        if f != 0.0 {
            for &j in &nz {
                self.d[j] -= f * pivot_row[j];
            }
            self.d[enter] = 0.0;
            self.obj_value -= f * pb;
        }
        self.basis[leave] = enter;
    }

    /// After phase one, pivots zero-valued artificials out of the basis and
    /// drops rows that turn out to be linearly dependent.
    fn evict_artificials(&mut self) {
        let n_real = self.n_real();
        let mut r = 0;
        while r < self.rows {
            if !self.is_artificial(self.basis[r]) {
                r += 1;
                continue;
            }
            let row = self.row(r);
            let col = (0..n_real)
                .filter(|&j| row[j].abs() > PIVOT_TOL)
                .max_by(|&x, &y| row[x].abs().total_cmp(&row[y].abs()));
            match col {
                Some(j) => {
                    self.pivot(r, j);
                    r += 1;
                }
                None => self.drop_row(r),
            }
        }
    }

    fn drop_row(&mut self, r: usize) {
        let w = self.width;
        self.a.drain(r * w..(r + 1) * w);
        self.b.remove(r);
        self.basis.remove(r);
        self.rows -= 1;
    }

    fn primal(&self, lp: &LinearProgram) -> Vec<f64> {
        let mut col_value = vec![0.0; self.width];
        for (r, &j) in self.basis.iter().enumerate() {
            col_value[j] = self.b[r];
        }
        (0..lp.n_vars())
            .map(|k| match self.columns[k] {
                ColumnMap::Single(j) => col_value[j].max(0.0),
                ColumnMap::Split(p, q) => col_value[p] - col_value[q],
            })
            .collect()
    }
}
