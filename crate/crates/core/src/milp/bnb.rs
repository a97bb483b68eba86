//! Best-bound branch-and-bound over a single warm-started tableau.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use super::lp::build_tableau;
use super::model::MilpModel;
use super::propagate::{is_redundant, propagate, strengthen};
use super::simplex::{LpStatus, Tableau};
use crate::error::{Error, Result};

pub const INTEGRALITY_TOL: f64 = 1e-6;
const FEASIBILITY_CHECK: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveStatus {
    Optimal,
    FeasibleWithinGap,
    Infeasible,
    NodeLimit,
    TimeLimit,
}

impl SolveStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::FeasibleWithinGap => "feasible-within-gap",
            SolveStatus::Infeasible => "infeasible",
            SolveStatus::NodeLimit => "node-limit",
            SolveStatus::TimeLimit => "time-limit",
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolveOutcome {
    pub status: SolveStatus,
    /// Objective of the incumbent, `+∞` when there is none.
    pub objective: f64,
    /// Incumbent assignment, empty when there is none.
    pub values: Vec<f64>,
    /// Global lower bound when the search stopped.
    pub best_bound: f64,
    pub nodes: usize,
    pub wall_time: Duration,
}

impl SolveOutcome {
    pub fn has_solution(&self) -> bool {
        !self.values.is_empty()
    }

    pub(crate) fn infeasible(nodes: usize, start: Instant) -> Self {
        SolveOutcome {
            status: SolveStatus::Infeasible,
            objective: f64::INFINITY,
            values: Vec::new(),
            best_bound: f64::INFINITY,
            nodes,
            wall_time: start.elapsed(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolveOptions {
    /// Absolute gap between incumbent and bound at which the search stops.
    pub gap: f64,
    pub node_limit: usize,
    pub time_limit: Option<Duration>,
    /// A diving heuristic runs at the root and then every this many nodes.
    pub dive_interval: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            gap: 0.0,
            node_limit: 1_000_000,
            time_limit: None,
            dive_interval: 100,
        }
    }
}

struct Node {
    bound: f64,
    seq: u64,
    fixings: Vec<(u32, bool)>,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Node {}

impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Node {
    // Max-heap order: smaller bound first, then older node first.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .bound
            .total_cmp(&self.bound)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

pub fn branch_and_bound(model: &MilpModel, gap: f64, node_limit: usize) -> Result<SolveOutcome> {
    solve_milp(
        model,
        &SolveOptions {
            gap,
            node_limit,
            ..SolveOptions::default()
        },
    )
}

/// Result of the root presolve: tightened bounds and the rows kept in
/// the tableau.
pub(crate) struct Presolved {
    /// The model with strengthened rows; same integer-feasible set.
    pub model: MilpModel,
    pub lb: Vec<f64>,
    pub ub: Vec<f64>,
    pub keep: Vec<usize>,
}

/// Rounds binary bounds, propagates row activities and drops rows implied
/// by the resulting bounds. `None` means infeasibility was proven.
pub(crate) fn presolve(model: &MilpModel) -> Option<Presolved> {
    let mut lb: Vec<f64> = Vec::with_capacity(model.num_vars());
    let mut ub: Vec<f64> = Vec::with_capacity(model.num_vars());
    for v in &model.variables {
        match v.kind {
            super::model::VarKind::Binary => {
                lb.push((v.lower - INTEGRALITY_TOL).ceil());
                ub.push((v.upper + INTEGRALITY_TOL).floor());
            }
            super::model::VarKind::Continuous => {
                lb.push(v.lower);
                ub.push(v.upper);
            }
        }
    }
    if lb.iter().zip(&ub).any(|(l, u)| l > u) {
        return None;
    }
    if !propagate(model, &mut lb, &mut ub, 200) {
        return None;
    }
    let (model, changed) = strengthen(model, &lb, &ub);
    if changed > 0 {
        log::debug!("presolve strengthened {changed} coefficients");
    }
    let keep = (0..model.constraints.len())
        .filter(|&r| !is_redundant(&model.constraints[r], &lb, &ub))
        .collect();
    Some(Presolved { model, lb, ub, keep })
}

/// Root-only feasibility test: presolve then the LP relaxation.
pub fn root_feasible(model: &MilpModel) -> Result<bool> {
    model.validate()?;
    let Some(pre) = presolve(model) else {
        return Ok(false);
    };
    let mut tab = build_tableau(&pre.model, &pre.lb, &pre.ub, &pre.keep);
    Ok(match tab.solve(f64::INFINITY)? {
        LpStatus::Optimal | LpStatus::Unbounded => true,
        LpStatus::Infeasible => false,
        LpStatus::Cutoff => true,
    })
}

struct Limits {
    gap: f64,
    node_limit: usize,
    time_limit: Option<Duration>,
    dive_interval: usize,
}

struct Search<'a> {
    model: &'a MilpModel,
    tab: Tableau,
    bins: Vec<usize>,
    root_bounds: Vec<(f64, f64)>,
    current: Vec<(f64, f64)>,
    incumbent: f64,
    best: Vec<f64>,
}

impl Search<'_> {
    /// Best-bound search below `base`. Returns the stopping status (`None`
    /// when the tree was exhausted), the bound at stop and the node count.
    fn run(&mut self, base: &[(f64, f64)], lim: &Limits, start: Instant) -> Result<(Option<SolveStatus>, f64, usize)> {
        let mut heap = BinaryHeap::new();
        let mut seq = 0u64;
        heap.push(Node {
            bound: f64::NEG_INFINITY,
            seq,
            fixings: Vec::new(),
        });
        let mut nodes = 0usize;
        let mut status = None;
        let mut best_bound = f64::INFINITY;

        while let Some(node) = heap.pop() {
            if node.bound >= self.incumbent {
                best_bound = self.incumbent;
                heap.clear();
                break;
            }
            if self.incumbent.is_finite() && self.incumbent - node.bound <= lim.gap {
                best_bound = node.bound;
                status = Some(if self.incumbent - node.bound <= 1e-9 {
                    SolveStatus::Optimal
                } else {
                    SolveStatus::FeasibleWithinGap
                });
                break;
            }
            if nodes >= lim.node_limit {
                best_bound = node.bound;
                status = Some(SolveStatus::NodeLimit);
                break;
            }
            if lim.time_limit.is_some_and(|limit| start.elapsed() >= limit) {
                best_bound = node.bound;
                status = Some(SolveStatus::TimeLimit);
                break;
            }
            nodes += 1;
            let target = self.target_for(base, &node.fixings);
            self.apply(&target);
            match self.tab.solve(self.incumbent)? {
                LpStatus::Optimal => {}
                LpStatus::Infeasible | LpStatus::Cutoff => continue,
                LpStatus::Unbounded => {
                    return Err(Error::InvalidInput("linear relaxation is unbounded".into()));
                }
            }
            let obj = self.tab.objective().max(node.bound);
            if obj >= self.incumbent {
                continue;
            }
            let x = self.tab.solution();
            let Some(k) = self.most_fractional(&x) else {
                self.offer(&x)?;
                continue;
            };
            if nodes == 1 || nodes % lim.dive_interval == 0 {
                self.dive(&target, &x, DiveRule::Fractional)?;
                self.dive(&target, &x, DiveRule::Up)?;
            }
            for up in [false, true] {
                seq += 1;
                let mut fixings = node.fixings.clone();
                fixings.push((k as u32, up));
                heap.push(Node { bound: obj, seq, fixings });
            }
        }
        Ok((status, best_bound, nodes))
    }

    fn apply(&mut self, target: &[(f64, f64)]) {
        for (k, &(lo, hi)) in target.iter().enumerate() {
            if self.current[k] != (lo, hi) {
                self.tab.set_bounds(self.bins[k], lo, hi);
                self.current[k] = (lo, hi);
            }
        }
    }

    fn target_for(&self, base: &[(f64, f64)], fixings: &[(u32, bool)]) -> Vec<(f64, f64)> {
        let mut t = base.to_vec();
        for &(k, up) in fixings {
            let v = if up { 1.0 } else { 0.0 };
            t[k as usize] = (v, v);
        }
        t
    }

    fn most_fractional(&self, x: &[f64]) -> Option<usize> {
        let mut best = None;
        let mut score = INTEGRALITY_TOL;
        for (k, &j) in self.bins.iter().enumerate() {
            let f = x[j] - x[j].floor();
            let s = f.min(1.0 - f);
            if s > score {
                score = s;
                best = Some(k);
            }
        }
        best
    }

    fn least_fractional(&self, x: &[f64]) -> Option<usize> {
        let mut best = None;
        let mut score = f64::INFINITY;
        for (k, &j) in self.bins.iter().enumerate() {
            let f = x[j] - x[j].floor();
            let s = f.min(1.0 - f);
            if s > INTEGRALITY_TOL && s < score {
                score = s;
                best = Some(k);
            }
        }
        best
    }

    /// Accepts `x` (integral on the binaries) as incumbent after an
    /// independent row-by-row check, re-solving with binaries fixed when the
    /// rounded point is not accurate enough.
    fn offer(&mut self, x: &[f64]) -> Result<()> {
        let mut y = x.to_vec();
        for &j in &self.bins {
            y[j] = y[j].round();
        }
        if self.model.max_violation(&y) > FEASIBILITY_CHECK {
            let fixed: Vec<(f64, f64)> = self.bins.iter().map(|&j| (y[j], y[j])).collect();
            self.apply(&fixed);
            if self.tab.solve(f64::INFINITY)? != LpStatus::Optimal {
                return Ok(());
            }
            self.tab.refresh()?;
            y = self.tab.solution();
            for &j in &self.bins {
                y[j] = y[j].round();
            }
            if self.model.max_violation(&y) > FEASIBILITY_CHECK {
                log::debug!("rejected candidate incumbent, violation {:e}", self.model.max_violation(&y));
                return Ok(());
            }
        }
        let obj = self.model.objective_value(&y);
        if obj < self.incumbent {
            log::debug!("new incumbent {obj:.6}");
            self.incumbent = obj;
            self.best = y;
        }
        Ok(())
    }

    /// Fractional binary with the largest value, ties to the lowest index.
    fn largest_fractional(&self, x: &[f64]) -> Option<usize> {
        let mut best = None;
        let mut score = f64::NEG_INFINITY;
        for (k, &j) in self.bins.iter().enumerate() {
            let f = x[j] - x[j].floor();
            if f.min(1.0 - f) > INTEGRALITY_TOL && x[j] > score {
                score = x[j];
                best = Some(k);
            }
        }
        best
    }

    /// Diving from the current node: repeatedly fixes one fractional binary,
    /// flipping once on failure. `Fractional` rounds the least fractional
    /// binary; `Up` sets the largest one to 1.
    fn dive(&mut self, start: &[(f64, f64)], x: &[f64], rule: DiveRule) -> Result<()> {
        let mut bounds = start.to_vec();
        let mut x = x.to_vec();
        for _ in 0..self.bins.len() {
            let pick = match rule {
                DiveRule::Fractional => self.least_fractional(&x),
                DiveRule::Up => self.largest_fractional(&x),
            };
            let Some(k) = pick else {
                return self.offer(&x);
            };
            let v = match rule {
                DiveRule::Fractional if x[self.bins[k]] < 0.5 => 0.0,
                _ => 1.0,
            };
            let mut ok = false;
            for value in [v, 1.0 - v] {
                bounds[k] = (value, value);
                self.apply(&bounds);
                if self.tab.solve(self.incumbent)? == LpStatus::Optimal {
                    ok = true;
                    break;
                }
            }
            if !ok {
                return Ok(());
            }
            x = self.tab.solution();
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy)]
enum DiveRule {
    Fractional,
    Up,
}

pub fn solve_milp(model: &MilpModel, opts: &SolveOptions) -> Result<SolveOutcome> {
    let start = Instant::now();
    model.validate()?;
    let Some(pre) = presolve(model) else {
        log::debug!("root propagation proved infeasibility");
        return Ok(SolveOutcome::infeasible(1, start));
    };
    log::debug!(
        "presolve kept {} of {} rows, {} binaries",
        pre.keep.len(),
        model.constraints.len(),
        model.num_binaries()
    );
    let bins: Vec<usize> = model.binary_ids().into_iter().map(|v| v.0).collect();
    let root_bounds: Vec<(f64, f64)> = bins.iter().map(|&j| (pre.lb[j], pre.ub[j])).collect();
    let tab = build_tableau(&pre.model, &pre.lb, &pre.ub, &pre.keep);
    let mut s = Search {
        model,
        tab,
        current: root_bounds.clone(),
        root_bounds,
        bins,
        incumbent: f64::INFINITY,
        best: Vec::new(),
    };

    let root = s.root_bounds.clone();
    let limits = Limits {
        gap: opts.gap,
        node_limit: opts.node_limit,
        time_limit: opts.time_limit,
        dive_interval: opts.dive_interval.max(1),
    };
    let (status, mut best_bound, nodes) = s.run(&root, &limits, start)?;
    let status = match status {
        Some(st) => st,
        None if s.best.is_empty() => SolveStatus::Infeasible,
        None => {
            best_bound = s.incumbent;
            SolveStatus::Optimal
        }
    };
    log::debug!(
        "branch-and-bound: {} after {} nodes, incumbent {}, bound {}",
        status.as_str(),
        nodes,
        s.incumbent,
        best_bound
    );
    Ok(SolveOutcome {
        status,
        objective: s.incumbent,
        values: s.best,
        best_bound: if status == SolveStatus::Infeasible { f64::INFINITY } else { best_bound },
        nodes,
        wall_time: start.elapsed(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::milp::model::Relation;

    #[test]
    fn small_knapsack() {
        // max 5a + 4b + 3c, 2a + 3b + c <= 5 over binaries -> a = b = 1, value 9
        let mut m = MilpModel::new();
        let v: Vec<_> = (0..3).map(|k| m.add_binary(format!("b{k}"))).collect();
        for (&x, c) in v.iter().zip([5.0, 4.0, 3.0]) {
            m.add_objective_term(x, -c);
        }
        m.add_constraint(vec![(v[0], 2.0), (v[1], 3.0), (v[2], 1.0)], Relation::Le, 5.0);
        let out = branch_and_bound(&m, 0.0, 1000).unwrap();
        assert_eq!(out.status, SolveStatus::Optimal);
        assert!((out.objective + 9.0).abs() < 1e-9, "{}", out.objective);
    }

    #[test]
    fn pure_lp_uses_one_node() {
        let mut m = MilpModel::new();
        let x = m.add_continuous("x", 0.0, 10.0);
        m.add_objective_term(x, 1.0);
        m.add_constraint(vec![(x, 1.0)], Relation::Ge, 3.0);
        let out = branch_and_bound(&m, 0.0, 10).unwrap();
        assert_eq!(out.nodes, 1);
        assert!((out.objective - 3.0).abs() < 1e-9);
    }

    #[test]
    fn parity_infeasibility_is_found_by_tree() {
        let mut m = MilpModel::new();
        let v: Vec<_> = (0..3).map(|k| m.add_binary(format!("b{k}"))).collect();
        m.add_constraint(v.iter().map(|&x| (x, 2.0)).collect(), Relation::Eq, 3.0);
        let out = branch_and_bound(&m, 0.0, 1000).unwrap();
        assert_eq!(out.status, SolveStatus::Infeasible);
    }
}
