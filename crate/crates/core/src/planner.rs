//! The sequence-then-solve loop with refine-on-conflict.

use std::collections::{BTreeMap, BTreeSet};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::analysis::validate;
use crate::error::{Error, Result};
use crate::milp::{root_feasible, solve_milp, MilpModel, SolveOptions, SolveOutcome, SolveStatus};
use crate::pairs::{pair_ratio, relevant_pairs, RelevantPairs};
use crate::region_graph::{build_graph, generate_candidates, BannedTransition, Blacklist, Candidate, RegionGraph, SequencePlan};
use crate::scenario::Scenario;
use crate::transcription::{build_naive_model, build_paamp_model, decode, Trajectory, VariableIndex};

/// Node budget of each branch-and-bound run used while localizing a
/// conflict.
pub const PROBE_NODE_LIMIT: usize = 5000;

/// States per window in the improvement pass after a solve.
pub const POLISH_WINDOW: usize = 3;
const POLISH_PASSES: usize = 1;
const POLISH_NODES: usize = 2000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PlanStatus {
    Success,
    Exhausted,
    Timeout,
}

impl PlanStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            PlanStatus::Success => "success",
            PlanStatus::Exhausted => "exhausted",
            PlanStatus::Timeout => "timeout",
        }
    }
}

/// One pass of the loop.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub plans: Vec<SequencePlan>,
    pub binaries: usize,
    pub collision_binaries: usize,
    pub rho: Option<f64>,
    pub status: SolveStatus,
    pub nodes: usize,
    #[serde(skip)]
    pub solve_time: Duration,
    pub conflict: Option<BannedTransition>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub records: Vec<IterationRecord>,
    pub total_nodes: usize,
    /// Solver objective of the accepted model.
    pub objective: f64,
    /// Relevant pairs of the accepted model.
    pub pairs: Option<RelevantPairs>,
    /// Why the loop stopped when it did not succeed.
    pub reason: Option<String>,
    #[serde(skip)]
    pub solve_time: Duration,
    #[serde(skip)]
    pub wall_time: Duration,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanResult {
    pub status: PlanStatus,
    pub trajectories: Vec<Trajectory>,
    pub plans: Vec<SequencePlan>,
    pub iterations: usize,
    pub blacklist: Blacklist,
    pub diagnostics: Diagnostics,
}

fn single_agent(scenario: &Scenario, i: usize) -> Scenario {
    let mut s = scenario.clone();
    s.agents = vec![scenario.agents[i].clone()];
    s
}

/// Drops candidates whose single-agent model is already infeasible at
/// the root. The test is sound: a dropped candidate has no trajectory even
/// without other agents.
fn screen(scenario: &Scenario, i: usize, candidates: Vec<Candidate>, cache: &mut BTreeMap<(usize, Vec<usize>), bool>) -> Result<Vec<Candidate>> {
    let solo = single_agent(scenario, i);
    let empty = RelevantPairs {
        per_step: vec![Vec::new(); scenario.params.steps + 1],
    };
    let mut out = Vec::new();
    for c in candidates {
        let key = (i, c.plan.segments.clone());
        let ok = match cache.get(&key) {
            Some(&ok) => ok,
            None => {
                let mut params = solo.params.clone();
                params.all_pairs = false;
                let solo = Scenario { params, ..solo.clone() };
                let (model, _) = build_paamp_model(&solo, std::slice::from_ref(&c.plan), &empty)?;
                let ok = root_feasible(&model)?;
                cache.insert(key, ok);
                ok
            }
        };
        if ok {
            out.push(c);
        } else {
            log::debug!("agent {} candidate {:?} fails screening", c.plan.agent, c.plan.segments);
        }
    }
    Ok(out)
}

/// Index tuples into the per-agent lists, by increasing total cost, ties
/// lexicographic.
fn joint_order(lists: &[Vec<Candidate>]) -> Vec<Vec<usize>> {
    let mut combos: Vec<(f64, Vec<usize>)> = vec![(0.0, Vec::new())];
    for list in lists {
        let mut next = Vec::with_capacity(combos.len() * list.len());
        for (cost, idx) in &combos {
            for (k, c) in list.iter().enumerate() {
                let mut v = idx.clone();
                v.push(k);
                next.push((cost + c.cost, v));
            }
        }
        combos = next;
    }
    let key = |c: f64| (c * 1e9).round();
    combos.sort_by(|a, b| key(a.0).total_cmp(&key(b.0)).then_with(|| a.1.cmp(&b.1)));
    combos.into_iter().map(|(_, v)| v).collect()
}

fn screened_candidates(
    scenario: &Scenario,
    graph: &RegionGraph,
    blacklist: &Blacklist,
    cache: &mut BTreeMap<(usize, Vec<usize>), bool>,
) -> Result<Option<Vec<Vec<Candidate>>>> {
    let mut lists = Vec::with_capacity(scenario.agents.len());
    for (i, agent) in scenario.agents.iter().enumerate() {
        let cands = generate_candidates(graph, scenario, agent, blacklist, scenario.params.k_candidates)?;
        let cands = screen(scenario, i, cands, cache)?;
        if cands.is_empty() {
            return Ok(None);
        }
        lists.push(cands);
    }
    Ok(Some(lists))
}

/// The joint sequence the loop tries first, or `None` when some agent has
/// no usable candidate.
pub fn initial_joint_plans(scenario: &Scenario, graph: &RegionGraph) -> Result<Option<Vec<SequencePlan>>> {
    let mut cache = BTreeMap::new();
    let Some(lists) = screened_candidates(scenario, graph, &Blacklist::new(), &mut cache)? else {
        return Ok(None);
    };
    let first = &joint_order(&lists)[0];
    Ok(Some(first.iter().zip(&lists).map(|(&k, l)| l[k].plan.clone()).collect()))
}

fn rho_of(pairs: &RelevantPairs, n: usize) -> Result<Option<f64>> {
    Ok(if n >= 2 { Some(pair_ratio(pairs, n)?) } else { None })
}

pub fn plan(scenario: &Scenario) -> Result<PlanResult> {
    scenario.validate()?;
    let start = Instant::now();
    let params = &scenario.params;
    let deadline = Duration::from_secs_f64(params.timeout_s);
    let graph = build_graph(scenario)?;
    let n = scenario.agents.len();
    let mut blacklist = Blacklist::new();
    let mut tried: BTreeSet<Vec<Vec<usize>>> = BTreeSet::new();
    let mut cache = BTreeMap::new();
    let mut diag = Diagnostics::default();
    let finish = |status: PlanStatus, reason: &str, blacklist: Blacklist, mut diag: Diagnostics, iterations: usize| {
        diag.reason = Some(reason.to_string());
        diag.wall_time = start.elapsed();
        log::info!("planning stopped: {reason}");
        PlanResult {
            status,
            trajectories: Vec::new(),
            plans: Vec::new(),
            iterations,
            blacklist,
            diagnostics: diag,
        }
    };

    for iteration in 0..params.k_max {
        if start.elapsed() >= deadline {
            return Ok(finish(PlanStatus::Timeout, "wall-clock limit reached", blacklist, diag, iteration));
        }
        let Some(lists) = screened_candidates(scenario, &graph, &blacklist, &mut cache)? else {
            return Ok(finish(PlanStatus::Exhausted, "an agent has no admissible sequence", blacklist, diag, iteration));
        };
        let joint = joint_order(&lists).into_iter().find_map(|idx| {
            let plans: Vec<SequencePlan> = idx.iter().zip(&lists).map(|(&k, l)| l[k].plan.clone()).collect();
            let key: Vec<Vec<usize>> = plans.iter().map(|p| p.segments.clone()).collect();
            (!tried.contains(&key)).then_some((key, plans))
        });
        let Some((key, plans)) = joint else {
            return Ok(finish(PlanStatus::Exhausted, "every joint sequence was tried", blacklist, diag, iteration));
        };
        tried.insert(key);

        let pairs = relevant_pairs(&plans, &graph)?;
        let (model, index) = build_paamp_model(scenario, &plans, &pairs)?;
        let remaining = deadline.saturating_sub(start.elapsed());
        let out = solve_milp(
            &model,
            &SolveOptions {
                gap: params.gap,
                time_limit: Some(remaining),
                ..SolveOptions::default()
            },
        )?;
        log::info!(
            "iteration {iteration}: {} binaries, status {}, {} nodes, {:.1} ms",
            model.num_binaries(),
            out.status.as_str(),
            out.nodes,
            out.wall_time.as_secs_f64() * 1000.0
        );
        let mut record = IterationRecord {
            plans: plans.clone(),
            binaries: model.num_binaries(),
            collision_binaries: index.collision_binaries(),
            rho: rho_of(&pairs, n)?,
            status: out.status,
            nodes: out.nodes,
            solve_time: out.wall_time,
            conflict: None,
        };

        if out.has_solution() {
            let mut out = out;
            let before = out.objective;
            let remaining = deadline.saturating_sub(start.elapsed());
            let gained = polish(&model, &index, &mut out, remaining)?;
            if gained > 0 {
                log::info!("polishing improved the objective from {before:.6} to {:.6}", out.objective);
            }
            diag.total_nodes += out.nodes;
            diag.solve_time += out.wall_time;
            let trajectories = decode(&out, &index)?;
            let report = validate(scenario, &plans, &trajectories);
            if !report.passed() {
                return Err(Error::InternalConsistency(format!(
                    "solver output fails validation: {:?}",
                    report.violations[0]
                )));
            }
            diag.records.push(record);
            diag.objective = out.objective;
            diag.pairs = Some(pairs);
            diag.wall_time = start.elapsed();
            return Ok(PlanResult {
                status: PlanStatus::Success,
                trajectories,
                plans,
                iterations: iteration + 1,
                blacklist,
                diagnostics: diag,
            });
        }
        diag.total_nodes += out.nodes;
        diag.solve_time += out.wall_time;
        if out.status == SolveStatus::TimeLimit {
            diag.records.push(record);
            return Ok(finish(PlanStatus::Timeout, "wall-clock limit reached", blacklist, diag, iteration + 1));
        }
        match localize_conflict(&model, &index, &plans)? {
            Some(entry) => {
                log::info!("banning {entry:?}");
                record.conflict = Some(entry);
                blacklist = blacklist.with(entry);
            }
            None => log::info!("no transition to ban"),
        }
        diag.records.push(record);
    }
    Ok(finish(PlanStatus::Exhausted, "iteration limit reached", blacklist, diag, params.k_max))
}

/// Re-optimizes the binaries of `POLISH_WINDOW` consecutive states at a
/// time, holding every other binary at its incumbent value, and keeps each
/// improvement. Node counts and time are added to `outcome`. Returns the
/// number of improving windows.
pub fn polish(model: &MilpModel, index: &VariableIndex, outcome: &mut SolveOutcome, budget: Duration) -> Result<usize> {
    let start = Instant::now();
    let mut by_state: Vec<(usize, usize)> = index
        .deltas
        .iter()
        .map(|(&(_, _, t), v)| (t, v))
        .chain(index.gammas.iter().map(|(&(_, _, t), v)| (t, v)))
        .flat_map(|(t, vars)| vars.iter().map(move |v| (t, v.0)))
        .collect();
    by_state.sort_unstable();
    if by_state.is_empty() || !outcome.has_solution() {
        return Ok(0);
    }
    let mut gained = 0;
    for _ in 0..POLISH_PASSES {
        let mut improved = false;
        for t0 in 0..=index.steps.saturating_sub(POLISH_WINDOW - 1) {
            let Some(left) = budget.checked_sub(start.elapsed()) else {
                return Ok(gained);
            };
            let window = t0..t0 + POLISH_WINDOW;
            let mut sub = model.clone();
            for &(t, j) in &by_state {
                if !window.contains(&t) {
                    let v = outcome.values[j].round();
                    sub.variables[j].lower = v;
                    sub.variables[j].upper = v;
                }
            }
            let res = solve_milp(
                &sub,
                &SolveOptions {
                    gap: 1e-6,
                    node_limit: POLISH_NODES,
                    time_limit: Some(left),
                    ..SolveOptions::default()
                },
            )?;
            outcome.nodes += res.nodes;
            outcome.wall_time += res.wall_time;
            if res.has_solution() && res.objective < outcome.objective - 1e-6 && model.max_violation(&res.values) <= 1e-6 {
                outcome.objective = res.objective;
                outcome.values = res.values;
                improved = true;
                gained += 1;
            }
        }
        if !improved {
            break;
        }
    }
    Ok(gained)
}

/// Solves the naive model once, without sequences or refinement.
pub fn plan_naive(scenario: &Scenario) -> Result<PlanResult> {
    scenario.validate()?;
    let start = Instant::now();
    let params = &scenario.params;
    let (model, index) = build_naive_model(scenario)?;
    let out = solve_milp(
        &model,
        &SolveOptions {
            gap: params.gap,
            time_limit: Some(Duration::from_secs_f64(params.timeout_s)),
            ..SolveOptions::default()
        },
    )?;
    let n = scenario.agents.len();
    let mut diag = Diagnostics {
        total_nodes: out.nodes,
        solve_time: out.wall_time,
        ..Diagnostics::default()
    };
    diag.records.push(IterationRecord {
        plans: Vec::new(),
        binaries: model.num_binaries(),
        collision_binaries: index.collision_binaries(),
        rho: (n >= 2).then_some(1.0),
        status: out.status,
        nodes: out.nodes,
        solve_time: out.wall_time,
        conflict: None,
    });
    let (status, trajectories) = if out.has_solution() {
        let trajectories = decode(&out, &index)?;
        let report = validate(scenario, &[], &trajectories);
        if !report.passed() {
            return Err(Error::InternalConsistency(format!(
                "solver output fails validation: {:?}",
                report.violations[0]
            )));
        }
        diag.objective = out.objective;
        (PlanStatus::Success, trajectories)
    } else if out.status == SolveStatus::TimeLimit {
        diag.reason = Some("wall-clock limit reached".into());
        (PlanStatus::Timeout, Vec::new())
    } else {
        diag.reason = Some(format!("naive model: {}", out.status.as_str()));
        (PlanStatus::Exhausted, Vec::new())
    };
    diag.wall_time = start.elapsed();
    Ok(PlanResult {
        status,
        trajectories,
        plans: Vec::new(),
        iterations: 1,
        blacklist: Blacklist::new(),
        diagnostics: diag,
    })
}

fn without_rows(model: &MilpModel, rows: &[usize]) -> MilpModel {
    let drop: BTreeSet<usize> = rows.iter().copied().collect();
    let mut m = model.clone();
    m.constraints = model
        .constraints
        .iter()
        .enumerate()
        .filter(|(r, _)| !drop.contains(r))
        .map(|(_, c)| c.clone())
        .collect();
    m
}

fn has_solution_within(model: &MilpModel, nodes: usize) -> Result<Option<bool>> {
    let out = solve_milp(
        model,
        &SolveOptions {
            gap: f64::INFINITY,
            node_limit: nodes,
            ..SolveOptions::default()
        },
    )?;
    Ok(match out.status {
        SolveStatus::Infeasible => Some(false),
        _ if out.has_solution() => Some(true),
        _ => None,
    })
}

/// Transition of `agent` into the block containing segment `seg`.
fn entry_transition(plan: &SequencePlan, seg: usize) -> Option<BannedTransition> {
    let segs = &plan.segments;
    let r = segs[seg];
    let mut b = seg;
    while b > 0 && segs[b - 1] == r {
        b -= 1;
    }
    (b > 0).then(|| BannedTransition {
        agent: plan.agent,
        t: b,
        from: segs[b - 1],
        to: r,
    })
}

/// Transition of `agent` out of the block containing segment `seg`.
fn exit_transition(plan: &SequencePlan, seg: usize) -> Option<BannedTransition> {
    let segs = &plan.segments;
    let r = segs[seg];
    let e = (seg..segs.len()).find(|&k| segs[k] != r)?;
    Some(BannedTransition {
        agent: plan.agent,
        t: e,
        from: r,
        to: segs[e],
    })
}

/// Deletion probe over state indices: the first `t` whose collision cover
/// rows can be removed to restore feasibility names the conflict. Returns
/// the transition to ban, or `None` when no agent has any transition.
///
/// Feasibility is judged by the root relaxation when that alone proves the
/// model infeasible, and by a node-limited branch-and-bound otherwise.
pub fn localize_conflict(model: &MilpModel, index: &VariableIndex, plans: &[SequencePlan]) -> Result<Option<BannedTransition>> {
    if plans.len() != index.states.len() {
        return Err(Error::InvalidInput(format!("{} plans for {} agents", plans.len(), index.states.len())));
    }
    let lp_proves = !root_feasible(model)?;
    if !lp_proves {
        match has_solution_within(model, PROBE_NODE_LIMIT)? {
            Some(true) => return Err(Error::Contract("conflict localization called on a feasible model".into())),
            Some(false) | None => {}
        }
    }
    let steps = index.steps;
    for t in 0..=steps {
        let rows = index.cover_rows_at(t);
        if rows.is_empty() {
            continue;
        }
        let reduced = without_rows(model, &rows);
        let feasible = if lp_proves {
            root_feasible(&reduced)?
        } else {
            has_solution_within(&reduced, PROBE_NODE_LIMIT)? == Some(true)
        };
        if !feasible {
            continue;
        }
        let (i, j) = index
            .cover_rows
            .keys()
            .filter(|k| k.2 == t)
            .map(|k| (k.0, k.1))
            .min()
            .expect("cover rows at t");
        let seg = t.min(steps - 1);
        let pick = entry_transition(&plans[i], seg)
            .or_else(|| entry_transition(&plans[j], seg))
            .or_else(|| exit_transition(&plans[i], seg))
            .or_else(|| exit_transition(&plans[j], seg));
        if pick.is_some() {
            log::debug!("conflict at state {t} between plan positions {i} and {j}");
            return Ok(pick);
        }
    }
    Ok(fallback_transition(plans))
}

/// Transition nearest the middle segment of the agent with the longest
/// region path.
fn fallback_transition(plans: &[SequencePlan]) -> Option<BannedTransition> {
    let mut order: Vec<usize> = (0..plans.len()).collect();
    order.sort_by(|&a, &b| plans[b].region_path().len().cmp(&plans[a].region_path().len()).then(a.cmp(&b)));
    for i in order {
        let p = &plans[i];
        let mid = p.steps() / 2;
        if let Some(&t) = p.transitions().iter().min_by_key(|&&t| (t.abs_diff(mid), t)) {
            return Some(BannedTransition {
                agent: p.agent,
                t,
                from: p.segments[t - 1],
                to: p.segments[t],
            });
        }
    }
    None
}
