//! Builds the trajectory MILPs and reads trajectories back out of solutions.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{intersects, norm, sample_directions, support_min, Polytope};
use crate::milp::{MilpModel, Relation, SolveOutcome, VarId};
use crate::pairs::{all_pairs, RelevantPairs};
use crate::region_graph::SequencePlan;
use crate::scenario::Scenario;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Paamp,
    Naive,
}

impl ModelKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Paamp => "paamp",
            ModelKind::Naive => "naive",
        }
    }
}

/// Where each family of variables and rows lives inside a built model.
/// Agents are indexed by their position in the scenario.
#[derive(Debug, Clone)]
pub struct VariableIndex {
    pub kind: ModelKind,
    pub steps: usize,
    pub agent_ids: Vec<usize>,
    /// `states[i][k]` holds the two coordinates of agent `i` at state `k`.
    pub states: Vec<Vec<[VarId; 2]>>,
    /// Absolute step lengths per segment and coordinate.
    pub step_abs: Vec<Vec<[VarId; 2]>>,
    /// Absolute second differences, `accel[i][k - 1]` for `k = 1..T−1`.
    pub accel: Vec<Vec<[VarId; 2]>>,
    /// Direction selectors per `(i, j, t)`.
    pub deltas: BTreeMap<(usize, usize, usize), Vec<VarId>>,
    /// Facet selectors per `(agent, obstacle, t)`.
    pub gammas: BTreeMap<(usize, usize, usize), Vec<VarId>>,
    /// Row index of the "at least one direction" row per `(i, j, t)`.
    pub cover_rows: BTreeMap<(usize, usize, usize), usize>,
    pub starts: Vec<[f64; 2]>,
    pub goals: Vec<[f64; 2]>,
    pub v_max: f64,
}

impl VariableIndex {
    pub fn collision_binaries(&self) -> usize {
        self.deltas.values().map(Vec::len).sum()
    }

    pub fn obstacle_binaries(&self) -> usize {
        self.gammas.values().map(Vec::len).sum()
    }

    pub fn binaries(&self) -> usize {
        self.collision_binaries() + self.obstacle_binaries()
    }

    /// Cover rows of all pairs at state `t`.
    pub fn cover_rows_at(&self, t: usize) -> Vec<usize> {
        self.cover_rows
            .iter()
            .filter(|(&(_, _, tt), _)| tt == t)
            .map(|(_, &r)| r)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    #[serde(rename = "id")]
    pub agent: usize,
    pub states: Vec<[f64; 2]>,
}

/// How one region keeps its states clear of one obstacle.
#[derive(Debug, Clone, PartialEq)]
enum ObstacleRule {
    Clear,
    /// Single row `a·x (relation) rhs`.
    Halfspace { a: [f64; 2], relation: Relation, rhs: f64 },
    /// Facet disjunction with selector binaries.
    Disjunction,
}

fn obstacle_rule(region: &Polytope, obstacle: &Polytope, eps: f64) -> Result<ObstacleRule> {
    let inflated = obstacle.inflate(eps);
    if !intersects(region, &inflated)? {
        return Ok(ObstacleRule::Clear);
    }
    for (a, &b) in obstacle.a().iter().zip(obstacle.b()) {
        if support_min(region, a)? >= b - 1e-9 {
            return Ok(ObstacleRule::Halfspace {
                a: [a[0], a[1]],
                relation: Relation::Ge,
                rhs: b + eps * norm(a),
            });
        }
    }
    for (a, &b) in region.a().iter().zip(region.b()) {
        if support_min(obstacle, a)? >= b - 1e-9 {
            return Ok(ObstacleRule::Halfspace {
                a: [a[0], a[1]],
                relation: Relation::Le,
                rhs: b - eps * norm(a),
            });
        }
    }
    Ok(ObstacleRule::Disjunction)
}

struct Builder<'a> {
    scenario: &'a Scenario,
    model: MilpModel,
    index: VariableIndex,
}

impl<'a> Builder<'a> {
    /// State variables plus boundary, velocity and objective rows.
    fn new(scenario: &'a Scenario, kind: ModelKind) -> Result<Self> {
        let p = &scenario.params;
        let steps = p.steps;
        let (lo, hi) = scenario.workspace.bounding_box()?;
        let mut model = MilpModel::new();
        let n = scenario.agents.len();
        let mut states = Vec::with_capacity(n);
        let mut step_abs = Vec::with_capacity(n);
        let mut accel = Vec::with_capacity(n);
        for (i, agent) in scenario.agents.iter().enumerate() {
            let xs: Vec<[VarId; 2]> = (0..=steps)
                .map(|k| {
                    [0, 1].map(|c| model.add_continuous(format!("x_{i}_{k}_{c}"), lo[c], hi[c]))
                })
                .collect();
            for c in 0..2 {
                model.add_named_constraint(format!("bs_{i}_{c}"), vec![(xs[0][c], 1.0)], Relation::Eq, agent.start[c]);
                model.add_named_constraint(format!("bg_{i}_{c}"), vec![(xs[steps][c], 1.0)], Relation::Eq, agent.goal[c]);
            }
            let mut s = Vec::with_capacity(steps);
            for k in 0..steps {
                let sk = [0, 1].map(|c| model.add_continuous(format!("s_{i}_{k}_{c}"), 0.0, f64::INFINITY));
                for c in 0..2 {
                    let (next, cur) = (xs[k + 1][c], xs[k][c]);
                    model.add_named_constraint(format!("vu_{i}_{k}_{c}"), vec![(next, 1.0), (cur, -1.0)], Relation::Le, p.v_max);
                    model.add_named_constraint(format!("vl_{i}_{k}_{c}"), vec![(next, 1.0), (cur, -1.0)], Relation::Ge, -p.v_max);
                    model.add_named_constraint(format!("sp_{i}_{k}_{c}"), vec![(sk[c], 1.0), (next, -1.0), (cur, 1.0)], Relation::Ge, 0.0);
                    model.add_named_constraint(format!("sn_{i}_{k}_{c}"), vec![(sk[c], 1.0), (next, 1.0), (cur, -1.0)], Relation::Ge, 0.0);
                    model.add_objective_term(sk[c], 1.0);
                }
                s.push(sk);
            }
            let mut acc = Vec::new();
            if p.alpha > 0.0 {
                for k in 1..steps {
                    let ak = [0, 1].map(|c| model.add_continuous(format!("a_{i}_{k}_{c}"), 0.0, f64::INFINITY));
                    for c in 0..2 {
                        let (prev, cur, next) = (xs[k - 1][c], xs[k][c], xs[k + 1][c]);
                        model.add_named_constraint(
                            format!("ap_{i}_{k}_{c}"),
                            vec![(ak[c], 1.0), (next, -1.0), (cur, 2.0), (prev, -1.0)],
                            Relation::Ge,
                            0.0,
                        );
                        model.add_named_constraint(
                            format!("an_{i}_{k}_{c}"),
                            vec![(ak[c], 1.0), (next, 1.0), (cur, -2.0), (prev, 1.0)],
                            Relation::Ge,
                            0.0,
                        );
                        model.add_objective_term(ak[c], p.alpha);
                    }
                    acc.push(ak);
                }
            }
            states.push(xs);
            step_abs.push(s);
            accel.push(acc);
        }
        Ok(Builder {
            scenario,
            model,
            index: VariableIndex {
                kind,
                steps,
                agent_ids: scenario.agents.iter().map(|a| a.id).collect(),
                states,
                step_abs,
                accel,
                deltas: BTreeMap::new(),
                gammas: BTreeMap::new(),
                cover_rows: BTreeMap::new(),
                starts: scenario.agents.iter().map(|a| a.start).collect(),
                goals: scenario.agents.iter().map(|a| a.goal).collect(),
                v_max: p.v_max,
            },
        })
    }

    fn membership(&mut self, prefix: &str, i: usize, t: usize, tag: usize, poly: &Polytope) {
        let x = self.index.states[i][t];
        for (f, (a, &b)) in poly.a().iter().zip(poly.b()).enumerate() {
            self.model.add_named_constraint(
                format!("{prefix}_{i}_{t}_{tag}_{f}"),
                vec![(x[0], a[0]), (x[1], a[1])],
                Relation::Le,
                b,
            );
        }
    }

    fn collisions(&mut self, pairs: &RelevantPairs) -> Result<()> {
        let p = &self.scenario.params;
        let dirs = sample_directions(p.num_directions, p.d_sep())?;
        let m = p.big_m;
        for t in 0..=self.index.steps {
            for &(i, j) in pairs.at(t) {
                let (xi, xj) = (self.index.states[i][t], self.index.states[j][t]);
                let mut deltas = Vec::with_capacity(dirs.len());
                for (l, (c, &d)) in dirs.directions.iter().zip(&dirs.thresholds).enumerate() {
                    let delta = self.model.add_binary(format!("d_{i}_{j}_{t}_{l}"));
                    self.model.add_named_constraint(
                        format!("col_{i}_{j}_{t}_{l}"),
                        vec![
                            (xj[0], c[0]),
                            (xj[1], c[1]),
                            (xi[0], -c[0]),
                            (xi[1], -c[1]),
                            (delta, -m),
                        ],
                        Relation::Ge,
                        d - m,
                    );
                    deltas.push(delta);
                }
                let row = self.model.add_named_constraint(
                    format!("cov_{i}_{j}_{t}"),
                    deltas.iter().map(|&v| (v, 1.0)).collect(),
                    Relation::Ge,
                    1.0,
                );
                self.index.deltas.insert((i, j, t), deltas);
                self.index.cover_rows.insert((i, j, t), row);
            }
        }
        Ok(())
    }

    fn obstacle_disjunction(&mut self, i: usize, t: usize, o: usize) {
        if self.index.gammas.contains_key(&(i, o, t)) {
            return;
        }
        let p = &self.scenario.params;
        let obstacle = &self.scenario.obstacles[o];
        let x = self.index.states[i][t];
        let mut gammas = Vec::with_capacity(obstacle.num_facets());
        for (q, (a, &b)) in obstacle.a().iter().zip(obstacle.b()).enumerate() {
            let g = self.model.add_binary(format!("g_{i}_{o}_{t}_{q}"));
            self.model.add_named_constraint(
                format!("og_{i}_{o}_{t}_{q}"),
                vec![(x[0], a[0]), (x[1], a[1]), (g, -p.big_m)],
                Relation::Ge,
                b + p.epsilon * norm(a) - p.big_m,
            );
            gammas.push(g);
        }
        self.model.add_named_constraint(
            format!("oc_{i}_{o}_{t}"),
            gammas.iter().map(|&g| (g, 1.0)).collect(),
            Relation::Ge,
            1.0,
        );
        self.index.gammas.insert((i, o, t), gammas);
    }
}

fn check_plans(scenario: &Scenario, plans: &[SequencePlan], pairs: &RelevantPairs) -> Result<()> {
    if plans.len() != scenario.agents.len() {
        return Err(Error::InvalidInput(format!(
            "{} plans for {} agents",
            plans.len(),
            scenario.agents.len()
        )));
    }
    for (plan, agent) in plans.iter().zip(&scenario.agents) {
        if plan.agent != agent.id {
            return Err(Error::InvalidInput(format!(
                "plan for agent {} where agent {} was expected",
                plan.agent, agent.id
            )));
        }
        if plan.steps() != scenario.params.steps {
            return Err(Error::InvalidInput(format!(
                "plan for agent {} has {} segments, expected {}",
                plan.agent,
                plan.steps(),
                scenario.params.steps
            )));
        }
        if plan.segments.iter().any(|&r| r >= scenario.regions.len()) {
            return Err(Error::InvalidInput(format!("plan for agent {} names an unknown region", plan.agent)));
        }
    }
    if pairs.steps() != scenario.params.steps {
        return Err(Error::InvalidInput(format!(
            "relevant pairs cover {} steps, expected {}",
            pairs.steps(),
            scenario.params.steps
        )));
    }
    if pairs.per_step.iter().flatten().any(|&(i, j)| i >= j || j >= plans.len()) {
        return Err(Error::InvalidInput("relevant pair with invalid agent indices".into()));
    }
    Ok(())
}

/// The sequence-constrained model: region membership for every state,
/// collision rows only for relevant pairs, and obstacle rows only where a
/// region comes within `ε` of an obstacle.
pub fn build_paamp_model(
    scenario: &Scenario,
    plans: &[SequencePlan],
    pairs: &RelevantPairs,
) -> Result<(MilpModel, VariableIndex)> {
    check_plans(scenario, plans, pairs)?;
    let mut b = Builder::new(scenario, ModelKind::Paamp)?;
    let eps = scenario.params.epsilon;
    let mut rules: BTreeMap<(usize, usize), ObstacleRule> = BTreeMap::new();
    let used: BTreeSet<usize> = plans.iter().flat_map(|p| p.segments.iter().copied()).collect();
    for &r in &used {
        for (o, obstacle) in scenario.obstacles.iter().enumerate() {
            rules.insert((r, o), obstacle_rule(&scenario.regions[r], obstacle, eps)?);
        }
    }
    for (i, plan) in plans.iter().enumerate() {
        for t in 0..=scenario.params.steps {
            for r in plan.regions_at_state(t) {
                b.membership("reg", i, t, r, &scenario.regions[r]);
                for o in 0..scenario.obstacles.len() {
                    match rules[&(r, o)] {
                        ObstacleRule::Clear => {}
                        ObstacleRule::Halfspace { a, relation, rhs } => {
                            let x = b.index.states[i][t];
                            b.model.add_named_constraint(
                                format!("ob_{i}_{t}_{r}_{o}"),
                                vec![(x[0], a[0]), (x[1], a[1])],
                                relation,
                                rhs,
                            );
                        }
                        ObstacleRule::Disjunction => b.obstacle_disjunction(i, t, o),
                    }
                }
            }
        }
    }
    if scenario.params.all_pairs {
        b.collisions(&all_pairs(plans.len(), scenario.params.steps))?;
    } else {
        b.collisions(pairs)?;
    }
    Ok((b.model, b.index))
}

/// The baseline: no region sequence, every pair at every state, and a
/// facet disjunction against every obstacle at every state.
pub fn build_naive_model(scenario: &Scenario) -> Result<(MilpModel, VariableIndex)> {
    let mut b = Builder::new(scenario, ModelKind::Naive)?;
    let steps = scenario.params.steps;
    let n = scenario.agents.len();
    if scenario.workspace.as_box().is_none() {
        for i in 0..n {
            for t in 0..=steps {
                b.membership("ws", i, t, 0, &scenario.workspace);
            }
        }
    }
    for i in 0..n {
        for t in 0..=steps {
            for o in 0..scenario.obstacles.len() {
                b.obstacle_disjunction(i, t, o);
            }
        }
    }
    b.collisions(&all_pairs(n, steps))?;
    Ok((b.model, b.index))
}

/// Reads the `T + 1` states of every agent from a solved model.
pub fn decode(outcome: &SolveOutcome, index: &VariableIndex) -> Result<Vec<Trajectory>> {
    let values = &outcome.values;
    let needed = index
        .states
        .iter()
        .flatten()
        .flat_map(|x| x.iter())
        .map(|v| v.0)
        .max()
        .unwrap_or(0);
    if values.len() <= needed {
        return Err(Error::InternalConsistency(format!(
            "assignment has {} values, state variables reach index {}",
            values.len(),
            needed
        )));
    }
    let mut out = Vec::with_capacity(index.states.len());
    for (i, xs) in index.states.iter().enumerate() {
        let states: Vec<[f64; 2]> = xs.iter().map(|x| [values[x[0].0], values[x[1].0]]).collect();
        let close = |p: [f64; 2], q: [f64; 2]| (p[0] - q[0]).abs() <= 1e-6 && (p[1] - q[1]).abs() <= 1e-6;
        if !close(states[0], index.starts[i]) || !close(states[index.steps], index.goals[i]) {
            return Err(Error::InternalConsistency(format!(
                "agent {} boundary states do not match start and goal",
                index.agent_ids[i]
            )));
        }
        for w in states.windows(2) {
            let step = (w[1][0] - w[0][0]).abs().max((w[1][1] - w[0][1]).abs());
            if step > index.v_max + 1e-6 {
                return Err(Error::InternalConsistency(format!(
                    "agent {} moves {step} in one step",
                    index.agent_ids[i]
                )));
            }
        }
        out.push(Trajectory {
            agent: index.agent_ids[i],
            states,
        });
    }
    Ok(out)
}

/// Directions whose selector is 1 for each `(i, j, t)`.
pub fn active_separators(outcome: &SolveOutcome, index: &VariableIndex) -> BTreeMap<(usize, usize, usize), Vec<usize>> {
    index
        .deltas
        .iter()
        .map(|(&k, vars)| {
            let on = vars
                .iter()
                .enumerate()
                .filter(|(_, v)| outcome.values.get(v.0).is_some_and(|&x| x > 0.5))
                .map(|(l, _)| l)
                .collect();
            (k, on)
        })
        .collect()
}
