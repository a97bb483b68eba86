//! Dense bounded-variable simplex tableau.
//!
//! Every row `i` of the model is stored as `a_i·x + s_i = b_i` where the
//! slack `s_i` carries the row relation through its bounds (`[0, ∞)` for
//! `≤`, `(-∞, 0]` for `≥`, `[0, 0]` for `=`). The tableau holds
//! `B⁻¹[A | I]`, so the slack block of the tableau is `B⁻¹` itself.
//!
//! Two drivers share the tableau: a composite primal simplex (phase 1
//! minimises the sum of bound infeasibilities of the basic variables) and a
//! dual simplex used for re-optimisation after bound changes. Both use
//! Dantzig pricing with a Harris ratio test and fall back to Bland's rule
//! after a run of degenerate pivots.

use crate::error::{Error, Result};

pub(crate) const FEAS_TOL: f64 = 1e-7;
pub(crate) const OPT_TOL: f64 = 1e-9;
const PIVOT_TOL: f64 = 1e-9;
const DUAL_FEAS_TOL: f64 = 1e-7;
const DROP_TOL: f64 = 1e-13;
const REFRESH_EVERY: usize = 100;
const DEGENERATE_RUN: usize = 40;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Pos {
    Basic,
    Lower,
    Upper,
    /// Free nonbasic variable parked at zero.
    Zero,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    /// Dual simplex stopped because the objective passed the cutoff.
    Cutoff,
}

/// One input row in structural-variable indices.
pub(crate) struct Row<'a> {
    pub terms: &'a [(usize, f64)],
    pub slack_lower: f64,
    pub slack_upper: f64,
    pub rhs: f64,
}

pub(crate) struct Tableau {
    m: usize,
    n: usize,
    n_struct: usize,
    t: Vec<f64>,
    beta: Vec<f64>,
    d: Vec<f64>,
    cost: Vec<f64>,
    lb: Vec<f64>,
    ub: Vec<f64>,
    x: Vec<f64>,
    head: Vec<usize>,
    pos: Vec<Pos>,
    row_of: Vec<usize>,
    rows: Vec<Vec<(usize, f64)>>,
    rhs: Vec<f64>,
    scratch: Vec<f64>,
    nz: Vec<usize>,
    since_refresh: usize,
    /// Set when a refactorization had to swap columns out of the basis.
    repaired: bool,
    pub pivots: usize,
    pub max_iter: usize,
}

impl Tableau {
    pub fn new(n_struct: usize, cost: &[f64], lb: &[f64], ub: &[f64], input: &[Row<'_>]) -> Self {
        let m = input.len();
        let n = n_struct + m;
        let mut t = vec![0.0; m * n];
        let mut full_lb = lb.to_vec();
        let mut full_ub = ub.to_vec();
        let mut full_cost = cost.to_vec();
        full_cost.resize(n, 0.0);
        let mut rows = Vec::with_capacity(m);
        let mut rhs = Vec::with_capacity(m);
        for (i, row) in input.iter().enumerate() {
            for &(j, a) in row.terms {
                t[i * n + j] += a;
            }
            t[i * n + n_struct + i] = 1.0;
            full_lb.push(row.slack_lower);
            full_ub.push(row.slack_upper);
            rows.push(row.terms.to_vec());
            rhs.push(row.rhs);
        }
        let mut pos = vec![Pos::Lower; n];
        let mut x = vec![0.0; n];
        for j in 0..n_struct {
            let (l, u, c) = (full_lb[j], full_ub[j], full_cost[j]);
            let (p, v) = if c > 0.0 && l.is_finite() {
                (Pos::Lower, l)
            } else if c < 0.0 && u.is_finite() {
                (Pos::Upper, u)
            } else if l.is_finite() {
                (Pos::Lower, l)
            } else if u.is_finite() {
                (Pos::Upper, u)
            } else {
                (Pos::Zero, 0.0)
            };
            pos[j] = p;
            x[j] = v;
        }
        let mut head = Vec::with_capacity(m);
        let mut row_of = vec![usize::MAX; n];
        for i in 0..m {
            let s = n_struct + i;
            pos[s] = Pos::Basic;
            head.push(s);
            row_of[s] = i;
        }
        let mut tab = Tableau {
            m,
            n,
            n_struct,
            t,
            beta: vec![0.0; m],
            d: full_cost.clone(),
            cost: full_cost,
            lb: full_lb,
            ub: full_ub,
            x,
            head,
            pos,
            row_of,
            rows,
            rhs,
            scratch: vec![0.0; n],
            nz: Vec::with_capacity(n),
            since_refresh: 0,
            repaired: false,
            pivots: 0,
            max_iter: 50_000 + 20 * (m + n),
        };
        tab.recompute_beta();
        tab
    }

    fn value(&self, j: usize) -> f64 {
        match self.pos[j] {
            Pos::Basic => self.beta[self.row_of[j]],
            _ => self.x[j],
        }
    }

    /// Values of the structural variables.
    pub fn solution(&self) -> Vec<f64> {
        (0..self.n_struct).map(|j| self.value(j)).collect()
    }

    pub fn objective(&self) -> f64 {
        (0..self.n)
            .filter(|&j| self.cost[j] != 0.0)
            .map(|j| self.cost[j] * self.value(j))
            .sum()
    }

    fn infeasibility(&self, i: usize) -> f64 {
        let j = self.head[i];
        let b = self.beta[i];
        if b < self.lb[j] - FEAS_TOL {
            self.lb[j] - b
        } else if b > self.ub[j] + FEAS_TOL {
            b - self.ub[j]
        } else {
            0.0
        }
    }

    pub fn is_dual_feasible(&self) -> bool {
        (0..self.n).all(|j| self.dual_violation(j) <= DUAL_FEAS_TOL)
    }

    fn dual_violation(&self, j: usize) -> f64 {
        if self.lb[j] == self.ub[j] {
            return 0.0;
        }
        match self.pos[j] {
            Pos::Basic => 0.0,
            Pos::Lower => (-self.d[j]).max(0.0),
            Pos::Upper => self.d[j].max(0.0),
            Pos::Zero => self.d[j].abs(),
        }
    }

    /// Changes the bounds of structural variable `j`, moving it if it is
    /// nonbasic. The new position follows the reduced-cost sign so the
    /// basis stays dual feasible whenever the bounds are finite.
    pub fn set_bounds(&mut self, j: usize, lower: f64, upper: f64) {
        self.lb[j] = lower;
        self.ub[j] = upper;
        if self.pos[j] == Pos::Basic {
            return;
        }
        let dj = self.d[j];
        let (p, v) = if lower == upper {
            (Pos::Lower, lower)
        } else if dj > 0.0 && lower.is_finite() {
            (Pos::Lower, lower)
        } else if dj < 0.0 && upper.is_finite() {
            (Pos::Upper, upper)
        } else if self.pos[j] == Pos::Upper && upper.is_finite() {
            (Pos::Upper, upper)
        } else if lower.is_finite() {
            (Pos::Lower, lower)
        } else if upper.is_finite() {
            (Pos::Upper, upper)
        } else {
            (Pos::Zero, 0.0)
        };
        let delta = v - self.x[j];
        self.pos[j] = p;
        self.x[j] = v;
        if delta != 0.0 {
            self.shift_nonbasic(j, delta);
        }
    }

    fn shift_nonbasic(&mut self, j: usize, delta: f64) {
        let n = self.n;
        for i in 0..self.m {
            let a = self.t[i * n + j];
            if a != 0.0 {
                self.beta[i] -= delta * a;
            }
        }
    }

    /// `beta = B⁻¹ (b − N x_N)`, read off the slack block of the tableau.
    fn recompute_beta(&mut self) {
        let mut r = self.rhs.clone();
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, a) in row {
                if self.pos[j] != Pos::Basic {
                    r[i] -= a * self.x[j];
                }
            }
            let s = self.n_struct + i;
            if self.pos[s] != Pos::Basic {
                r[i] -= self.x[s];
            }
        }
        let n = self.n;
        for i in 0..self.m {
            let binv = &self.t[i * n + self.n_struct..(i + 1) * n];
            self.beta[i] = binv.iter().zip(&r).map(|(a, b)| a * b).sum();
        }
    }

    fn recompute_reduced_costs(&mut self) {
        let n = self.n;
        self.d.copy_from_slice(&self.cost);
        for i in 0..self.m {
            let cb = self.cost[self.head[i]];
            if cb == 0.0 {
                continue;
            }
            let row = &self.t[i * n..(i + 1) * n];
            for (dj, a) in self.d.iter_mut().zip(row) {
                *dj -= cb * a;
            }
        }
        for &h in &self.head {
            self.d[h] = 0.0;
        }
    }

    fn max_residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (i, row) in self.rows.iter().enumerate() {
            let lhs: f64 = row.iter().map(|&(j, a)| a * self.value(j)).sum::<f64>()
                + self.value(self.n_struct + i);
            worst = worst.max((lhs - self.rhs[i]).abs() / (1.0 + self.rhs[i].abs()));
        }
        worst
    }

    /// Recomputes basic values and reduced costs from the original rows and
    /// rebuilds the whole tableau when the residual has drifted.
    pub fn refresh(&mut self) -> Result<()> {
        self.since_refresh = 0;
        self.recompute_beta();
        self.recompute_reduced_costs();
        if self.max_residual() > 1e-8 {
            log::debug!("simplex: residual drift, refactoring {}x{}", self.m, self.n);
            self.refactor()?;
        }
        Ok(())
    }

    /// Rebuilds `B⁻¹[A | I]` for the current basis by Gauss-Jordan
    /// elimination on the original rows.
    fn refactor(&mut self) -> Result<()> {
        let n = self.n;
        self.t.iter_mut().for_each(|v| *v = 0.0);
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, a) in row {
                self.t[i * n + j] += a;
            }
            self.t[i * n + self.n_struct + i] = 1.0;
        }
        let basics = self.head.clone();
        let mut assigned = vec![false; self.m];
        let mut new_head = vec![usize::MAX; self.m];
        for &j in &basics {
            let mut best = usize::MAX;
            let mut best_abs = 1e-9;
            for i in 0..self.m {
                if !assigned[i] {
                    let a = self.t[i * n + j].abs();
                    if a > best_abs {
                        best_abs = a;
                        best = i;
                    }
                }
            }
            if best == usize::MAX {
                self.park(j);
                continue;
            }
            assigned[best] = true;
            new_head[best] = j;
            self.eliminate(best, j);
        }
        for i in 0..self.m {
            if !assigned[i] {
                let s = self.n_struct + i;
                log::debug!("simplex: basis repair, slack {i} replaces a dependent column");
                self.repaired = true;
                self.pos[s] = Pos::Basic;
                new_head[i] = s;
                self.eliminate(i, s);
            }
        }
        self.head = new_head;
        for (i, &j) in self.head.iter().enumerate() {
            self.row_of[j] = i;
        }
        self.recompute_beta();
        self.recompute_reduced_costs();
        Ok(())
    }

    /// Makes a basic column nonbasic at the bound nearest its value.
    fn park(&mut self, j: usize) {
        let v = self.value(j);
        let (l, u) = (self.lb[j], self.ub[j]);
        let (p, x) = match (l.is_finite(), u.is_finite()) {
            (true, true) if (v - l).abs() <= (u - v).abs() => (Pos::Lower, l),
            (true, true) => (Pos::Upper, u),
            (true, false) => (Pos::Lower, l),
            (false, true) => (Pos::Upper, u),
            (false, false) => (Pos::Zero, 0.0),
        };
        self.pos[j] = p;
        self.x[j] = x;
        self.row_of[j] = usize::MAX;
    }

    /// Row operations making column `q` the unit vector `e_r`.
    fn eliminate(&mut self, r: usize, q: usize) {
        let n = self.n;
        let inv = 1.0 / self.t[r * n + q];
        self.nz.clear();
        for j in 0..n {
            let v = self.t[r * n + j] * inv;
            let v = if v.abs() < DROP_TOL { 0.0 } else { v };
            self.t[r * n + j] = v;
            self.scratch[j] = v;
            if v != 0.0 {
                self.nz.push(j);
            }
        }
        self.t[r * n + q] = 1.0;
        self.scratch[q] = 1.0;
        for i in 0..self.m {
            if i == r {
                continue;
            }
            let f = self.t[i * n + q];
            if f == 0.0 {
                continue;
            }
            let row = &mut self.t[i * n..(i + 1) * n];
            for &j in &self.nz {
                let v = row[j] - f * self.scratch[j];
                row[j] = if v.abs() < DROP_TOL { 0.0 } else { v };
            }
            row[q] = 0.0;
        }
    }

    fn pivot(&mut self, r: usize, q: usize) {
        self.eliminate(r, q);
        let f = self.d[q];
        if f != 0.0 {
            for &j in &self.nz {
                self.d[j] -= f * self.scratch[j];
            }
        }
        self.d[q] = 0.0;
        let leaving = self.head[r];
        self.row_of[leaving] = usize::MAX;
        self.head[r] = q;
        self.row_of[q] = r;
        self.pos[q] = Pos::Basic;
        self.pivots += 1;
        self.since_refresh += 1;
    }

    fn maybe_refresh(&mut self) -> Result<()> {
        if self.since_refresh >= REFRESH_EVERY {
            self.refresh()?;
        }
        Ok(())
    }

    /// Picks the primal algorithm or the dual one depending on which
    /// feasibility the current basis has.
    pub fn solve(&mut self, cutoff: f64) -> Result<LpStatus> {
        if self.is_dual_feasible() {
            if let Some(status) = self.dual(cutoff)? {
                if status != LpStatus::Optimal || self.is_dual_feasible() {
                    return Ok(status);
                }
            }
        }
        let status = self.primal()?;
        if status == LpStatus::Optimal && self.objective() > cutoff {
            return Ok(LpStatus::Cutoff);
        }
        Ok(status)
    }

    /// Composite primal simplex from the current basis.
    pub fn primal(&mut self) -> Result<LpStatus> {
        let n = self.n;
        let mut bland = false;
        let mut degenerate = 0usize;
        let mut price = vec![0.0; n];
        for _ in 0..self.max_iter {
            self.maybe_refresh()?;
            let mut infeasible: Vec<(usize, f64)> = Vec::new();
            for i in 0..self.m {
                let j = self.head[i];
                let b = self.beta[i];
                if b < self.lb[j] - FEAS_TOL {
                    infeasible.push((i, -1.0));
                } else if b > self.ub[j] + FEAS_TOL {
                    infeasible.push((i, 1.0));
                }
            }
            let phase1 = !infeasible.is_empty();
            if phase1 {
                price.iter_mut().for_each(|v| *v = 0.0);
                for &(i, w) in &infeasible {
                    let row = &self.t[i * n..(i + 1) * n];
                    for (p, a) in price.iter_mut().zip(row) {
                        *p -= w * a;
                    }
                }
            } else {
                price.copy_from_slice(&self.d);
            }

            let mut entering = None;
            let mut best = OPT_TOL;
            for j in 0..n {
                if self.pos[j] == Pos::Basic || self.lb[j] == self.ub[j] {
                    continue;
                }
                let dj = price[j];
                let dir = match self.pos[j] {
                    Pos::Lower if dj < -OPT_TOL => 1.0,
                    Pos::Upper if dj > OPT_TOL => -1.0,
                    Pos::Zero if dj.abs() > OPT_TOL => -dj.signum(),
                    _ => continue,
                };
                if bland {
                    entering = Some((j, dir));
                    break;
                }
                if dj.abs() > best {
                    best = dj.abs();
                    entering = Some((j, dir));
                }
            }
            let Some((q, dir)) = entering else {
                return Ok(if phase1 { LpStatus::Infeasible } else { LpStatus::Optimal });
            };

            // Ratio test. alpha_i is the rate of change of beta_i per unit step.
            let flip = self.ub[q] - self.lb[q];
            let limit_of = |i: usize, alpha: f64, tol: f64| -> Option<(f64, f64)> {
                let j = self.head[i];
                let (b, l, u) = (self.beta[i], self.lb[j], self.ub[j]);
                if alpha > 0.0 {
                    if phase1 && b < l - FEAS_TOL {
                        Some(((l - b + tol) / alpha, l))
                    } else if b > u + FEAS_TOL || !u.is_finite() {
                        None
                    } else {
                        Some((((u - b).max(0.0) + tol) / alpha, u))
                    }
                } else if phase1 && b > u + FEAS_TOL {
                    Some(((b - u + tol) / -alpha, u))
                } else if b < l - FEAS_TOL || !l.is_finite() {
                    None
                } else {
                    Some((((b - l).max(0.0) + tol) / -alpha, l))
                }
            };
            let mut theta_max = f64::INFINITY;
            for i in 0..self.m {
                let alpha = -dir * self.t[i * n + q];
                if alpha.abs() <= PIVOT_TOL {
                    continue;
                }
                if let Some((lim, _)) = limit_of(i, alpha, if bland { 0.0 } else { FEAS_TOL }) {
                    theta_max = theta_max.min(lim);
                }
            }
            let mut leave: Option<(usize, f64, f64)> = None;
            let mut leave_key = 0.0;
            for i in 0..self.m {
                let alpha = -dir * self.t[i * n + q];
                if alpha.abs() <= PIVOT_TOL {
                    continue;
                }
                if let Some((lim, target)) = limit_of(i, alpha, 0.0) {
                    if lim <= theta_max {
                        let key = if bland { -(self.head[i] as f64) } else { alpha.abs() };
                        if leave.is_none() || key > leave_key {
                            leave_key = key;
                            leave = Some((i, lim.max(0.0), target));
                        }
                    }
                }
            }

            match leave {
                Some((_, theta, _)) if flip.is_finite() && flip <= theta => self.bound_flip(q, dir),
                None if flip.is_finite() => self.bound_flip(q, dir),
                None => {
                    if phase1 {
                        return Err(Error::NumericFailure("phase 1 ray without limit".into()));
                    }
                    return Ok(LpStatus::Unbounded);
                }
                Some((r, theta, target)) => {
                    if theta < 1e-12 {
                        degenerate += 1;
                    } else {
                        degenerate = 0;
                    }
                    bland = degenerate > DEGENERATE_RUN;
                    let step = dir * theta;
                    let entering_value = self.x[q] + step;
                    for i in 0..self.m {
                        let a = self.t[i * n + q];
                        if a != 0.0 {
                            self.beta[i] -= step * a;
                        }
                    }
                    let leaving = self.head[r];
                    self.x[leaving] = target;
                    self.pos[leaving] = if target == self.lb[leaving] { Pos::Lower } else { Pos::Upper };
                    self.beta[r] = entering_value;
                    self.pivot(r, q);
                }
            }
        }
        Err(Error::NumericFailure(format!("primal simplex exceeded {} iterations", self.max_iter)))
    }

    fn bound_flip(&mut self, q: usize, dir: f64) {
        let (v, p) = if dir > 0.0 { (self.ub[q], Pos::Upper) } else { (self.lb[q], Pos::Lower) };
        let delta = v - self.x[q];
        self.x[q] = v;
        self.pos[q] = p;
        self.shift_nonbasic(q, delta);
    }

    /// Dual simplex from a dual feasible basis. Returns `Cutoff` as soon as
    /// the (monotone) dual objective exceeds `cutoff`.
    /// `None` when a basis repair destroyed dual feasibility.
    fn dual(&mut self, cutoff: f64) -> Result<Option<LpStatus>> {
        self.repaired = false;
        let n = self.n;
        let mut bland = false;
        let mut stall = 0usize;
        let mut last_obj = f64::NEG_INFINITY;
        for _ in 0..self.max_iter {
            self.maybe_refresh()?;
            if self.repaired {
                self.repaired = false;
                if !self.is_dual_feasible() {
                    return Ok(None);
                }
            }
            let obj = self.objective();
            if obj > cutoff {
                return Ok(Some(LpStatus::Cutoff));
            }
            if obj > last_obj + 1e-12 {
                stall = 0;
                last_obj = obj;
            } else {
                stall += 1;
            }
            bland = bland || stall > DEGENERATE_RUN;

            let mut leave = None;
            let mut worst = 0.0;
            for i in 0..self.m {
                let inf = self.infeasibility(i);
                if inf <= 0.0 {
                    continue;
                }
                if bland {
                    let better = match leave {
                        None => true,
                        Some(k) => self.head[i] < self.head[k],
                    };
                    if better {
                        leave = Some(i);
                    }
                } else if inf > worst {
                    worst = inf;
                    leave = Some(i);
                }
            }
            let Some(r) = leave else {
                return Ok(Some(LpStatus::Optimal));
            };
            let p = self.head[r];
            let below = self.beta[r] < self.lb[p];
            let target = if below { self.lb[p] } else { self.ub[p] };

            let eligible = |j: usize, a: f64| -> bool {
                let s = if below { -a } else { a };
                match self.pos[j] {
                    Pos::Basic => false,
                    _ if self.lb[j] == self.ub[j] => false,
                    Pos::Lower => s > 0.0,
                    Pos::Upper => s < 0.0,
                    Pos::Zero => true,
                }
            };
            let row = &self.t[r * n..(r + 1) * n];
            let mut theta_max = f64::INFINITY;
            for (j, &a) in row.iter().enumerate() {
                if a.abs() <= PIVOT_TOL || !eligible(j, a) {
                    continue;
                }
                let slack = if bland { 0.0 } else { OPT_TOL };
                let dj = self.reduced_cost_magnitude(j);
                theta_max = theta_max.min((dj + slack) / a.abs());
            }
            let mut entering = None;
            let mut key = f64::NEG_INFINITY;
            for (j, &a) in row.iter().enumerate() {
                if a.abs() <= PIVOT_TOL || !eligible(j, a) {
                    continue;
                }
                let ratio = self.reduced_cost_magnitude(j) / a.abs();
                if ratio <= theta_max {
                    let k = if bland { -(j as f64) } else { a.abs() };
                    if k > key {
                        key = k;
                        entering = Some(j);
                    }
                }
            }
            let Some(q) = entering else {
                return Ok(Some(LpStatus::Infeasible));
            };
            let tq = self.t[r * n + q];
            let step = (self.beta[r] - target) / tq;
            let entering_value = self.value(q) + step;
            for i in 0..self.m {
                let a = self.t[i * n + q];
                if a != 0.0 {
                    self.beta[i] -= step * a;
                }
            }
            self.x[p] = target;
            self.pos[p] = if below { Pos::Lower } else { Pos::Upper };
            self.beta[r] = entering_value;
            self.pivot(r, q);
        }
        Err(Error::NumericFailure(format!("dual simplex exceeded {} iterations", self.max_iter)))
    }

    fn reduced_cost_magnitude(&self, j: usize) -> f64 {
        match self.pos[j] {
            Pos::Lower => self.d[j].max(0.0),
            Pos::Upper => (-self.d[j]).max(0.0),
            _ => self.d[j].abs(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn le(terms: &[(usize, f64)], rhs: f64) -> Row<'_> {
        Row {
            terms,
            slack_lower: 0.0,
            slack_upper: f64::INFINITY,
            rhs,
        }
    }

    #[test]
    fn textbook_two_variable_lp() {
        // max 3x + 5y, x <= 4, 2y <= 12, 3x + 2y <= 18  ->  x = 2, y = 6, value 36
        let r1 = [(0, 1.0)];
        let r2 = [(1, 2.0)];
        let r3 = [(0, 3.0), (1, 2.0)];
        let rows = [le(&r1, 4.0), le(&r2, 12.0), le(&r3, 18.0)];
        let inf = f64::INFINITY;
        let mut tab = Tableau::new(2, &[-3.0, -5.0], &[0.0, 0.0], &[inf, inf], &rows);
        assert_eq!(tab.primal().unwrap(), LpStatus::Optimal);
        let x = tab.solution();
        assert!((x[0] - 2.0).abs() < 1e-9 && (x[1] - 6.0).abs() < 1e-9);
        assert!((tab.objective() + 36.0).abs() < 1e-9);
    }

    #[test]
    fn dual_reoptimises_after_bound_change() {
        let r1 = [(0, 1.0), (1, 1.0)];
        let rows = [Row {
            terms: &r1,
            slack_lower: f64::NEG_INFINITY,
            slack_upper: 0.0,
            rhs: 1.0,
        }];
        let mut tab = Tableau::new(2, &[1.0, 2.0], &[0.0, 0.0], &[1.0, 1.0], &rows);
        assert_eq!(tab.solve(f64::INFINITY).unwrap(), LpStatus::Optimal);
        assert!((tab.objective() - 1.0).abs() < 1e-12);
        tab.set_bounds(0, 0.0, 0.0);
        assert_eq!(tab.solve(f64::INFINITY).unwrap(), LpStatus::Optimal);
        assert!((tab.objective() - 2.0).abs() < 1e-12);
        tab.set_bounds(1, 0.0, 0.5);
        assert_eq!(tab.solve(f64::INFINITY).unwrap(), LpStatus::Infeasible);
    }

    #[test]
    fn unbounded_ray_is_reported() {
        let r1 = [(0, 1.0), (1, -1.0)];
        let rows = [le(&r1, 1.0)];
        let inf = f64::INFINITY;
        let mut tab = Tableau::new(2, &[0.0, -1.0], &[0.0, 0.0], &[inf, inf], &rows);
        assert_eq!(tab.primal().unwrap(), LpStatus::Unbounded);
    }
}
