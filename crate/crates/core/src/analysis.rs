//! Solver-independent checks, trajectory metrics, SVG plots and the
//! PAAMP-versus-naive benchmark.

use std::fmt::Write as _;
use std::path::Path;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::geometry::{contains, norm, Polytope};
use crate::milp::{format_number, solve_milp, SolveOptions, SolveStatus};
use crate::pairs::pair_ratio;
use crate::planner::{initial_joint_plans, plan, PlanResult, PlanStatus};
use crate::region_graph::{build_graph, BannedTransition, SequencePlan};
use crate::scenario::Scenario;
use crate::transcription::{build_naive_model, build_paamp_model, Trajectory};

const TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ViolationKind {
    Shape,
    Boundary,
    Velocity,
    Separation,
    Region,
    Obstacle,
}

/// One failed check. `margin` is the amount by which the requirement is
/// missed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub agents: Vec<usize>,
    pub step: usize,
    pub margin: f64,
    pub detail: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn count(&self, kind: ViolationKind) -> usize {
        self.violations.iter().filter(|v| v.kind == kind).count()
    }
}

/// Euclidean distance from `x` to the obstacle, or minus the depth when
/// inside. Exact for the facet-separated case used by the models.
fn facet_clearance(obstacle: &Polytope, x: [f64; 2]) -> f64 {
    obstacle
        .a()
        .iter()
        .zip(obstacle.b())
        .map(|(a, &b)| (a[0] * x[0] + a[1] * x[1] - b) / norm(a))
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Audits trajectories against the scenario using geometry only. Region
/// membership is checked only when `plans` is non-empty.
pub fn validate(scenario: &Scenario, plans: &[SequencePlan], trajectories: &[Trajectory]) -> ValidationReport {
    let p = &scenario.params;
    let steps = p.steps;
    let mut out = Vec::new();
    let shape = |detail: String, agents: Vec<usize>| Violation {
        kind: ViolationKind::Shape,
        agents,
        step: 0,
        margin: 0.0,
        detail,
    };
    if trajectories.len() != scenario.agents.len() {
        out.push(shape(
            format!("{} trajectories for {} agents", trajectories.len(), scenario.agents.len()),
            Vec::new(),
        ));
        return ValidationReport { violations: out };
    }
    for (tr, agent) in trajectories.iter().zip(&scenario.agents) {
        if tr.agent != agent.id || tr.states.len() != steps + 1 {
            out.push(shape(
                format!("trajectory for agent {} has {} states, expected agent {} with {}", tr.agent, tr.states.len(), agent.id, steps + 1),
                vec![tr.agent],
            ));
        }
    }
    if !plans.is_empty() && (plans.len() != trajectories.len() || plans.iter().zip(trajectories).any(|(pl, tr)| pl.agent != tr.agent || pl.steps() != steps)) {
        out.push(shape("plans do not match trajectories".into(), Vec::new()));
    }
    if !out.is_empty() {
        return ValidationReport { violations: out };
    }

    for (tr, agent) in trajectories.iter().zip(&scenario.agents) {
        for (k, target) in [(0, agent.start), (steps, agent.goal)] {
            let x = tr.states[k];
            let miss = (x[0] - target[0]).abs().max((x[1] - target[1]).abs());
            if miss > TOL {
                out.push(Violation {
                    kind: ViolationKind::Boundary,
                    agents: vec![agent.id],
                    step: k,
                    margin: miss,
                    detail: format!("state {k} is {miss} away from its boundary value"),
                });
            }
        }
        for k in 0..steps {
            let (x, y) = (tr.states[k], tr.states[k + 1]);
            let step = (y[0] - x[0]).abs().max((y[1] - x[1]).abs());
            if step > p.v_max + TOL {
                out.push(Violation {
                    kind: ViolationKind::Velocity,
                    agents: vec![agent.id],
                    step: k,
                    margin: step - p.v_max,
                    detail: format!("step {k} moves {step} in the infinity norm"),
                });
            }
        }
        for k in 0..=steps {
            let x = tr.states[k];
            for (o, obstacle) in scenario.obstacles.iter().enumerate() {
                let clear = facet_clearance(obstacle, x);
                if clear < p.epsilon - TOL {
                    out.push(Violation {
                        kind: ViolationKind::Obstacle,
                        agents: vec![agent.id],
                        step: k,
                        margin: p.epsilon - clear,
                        detail: format!("state {k} is {clear} from obstacle {o}"),
                    });
                }
            }
        }
    }

    let d = p.d_sep();
    for k in 0..=steps {
        for i in 0..trajectories.len() {
            for j in i + 1..trajectories.len() {
                let (a, b) = (trajectories[i].states[k], trajectories[j].states[k]);
                let dist = ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt();
                if dist < d - TOL {
                    out.push(Violation {
                        kind: ViolationKind::Separation,
                        agents: vec![trajectories[i].agent, trajectories[j].agent],
                        step: k,
                        margin: d - dist,
                        detail: format!("distance {dist} at state {k}"),
                    });
                }
            }
        }
    }

    for (pl, tr) in plans.iter().zip(trajectories) {
        for (k, &r) in pl.segments.iter().enumerate() {
            for t in [k, k + 1] {
                let inside = contains(&scenario.regions[r], &tr.states[t], TOL).unwrap_or(false);
                if !inside {
                    let reg = &scenario.regions[r];
                    let x = tr.states[t];
                    let excess = reg
                        .a()
                        .iter()
                        .zip(reg.b())
                        .map(|(a, &b)| a[0] * x[0] + a[1] * x[1] - b)
                        .fold(0.0, f64::max);
                    out.push(Violation {
                        kind: ViolationKind::Region,
                        agents: vec![tr.agent],
                        step: t,
                        margin: excess,
                        detail: format!("state {t} outside region {r} of segment {k}"),
                    });
                }
            }
        }
    }
    ValidationReport { violations: out }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentMetrics {
    pub agent: usize,
    pub manhattan: f64,
    pub max_acceleration: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryMetrics {
    pub agents: Vec<AgentMetrics>,
    /// Path length plus `α` times the L1 norm of the second differences.
    pub objective: f64,
    /// False when some trajectory has fewer than two segments.
    pub acceleration_defined: bool,
}

pub fn metrics(trajectories: &[Trajectory], alpha: f64) -> TrajectoryMetrics {
    let mut agents = Vec::with_capacity(trajectories.len());
    let mut objective = 0.0;
    let mut defined = true;
    for tr in trajectories {
        let s = &tr.states;
        let manhattan: f64 = s
            .windows(2)
            .map(|w| (w[1][0] - w[0][0]).abs() + (w[1][1] - w[0][1]).abs())
            .sum();
        if s.len() < 3 {
            defined = false;
        }
        let second: Vec<[f64; 2]> = s
            .windows(3)
            .map(|w| [w[2][0] - 2.0 * w[1][0] + w[0][0], w[2][1] - 2.0 * w[1][1] + w[0][1]])
            .collect();
        let max_acceleration = second.iter().map(|a| a[0].hypot(a[1])).fold(0.0, f64::max);
        let acc_l1: f64 = second.iter().map(|a| a[0].abs() + a[1].abs()).sum();
        objective += manhattan + alpha * acc_l1;
        agents.push(AgentMetrics {
            agent: tr.agent,
            manhattan,
            max_acceleration,
        });
    }
    TrajectoryMetrics {
        agents,
        objective,
        acceleration_defined: defined,
    }
}

const COLORS: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf"];

fn points(pts: &[[f64; 2]]) -> String {
    pts.iter()
        .map(|p| format!("{},{}", format_number(p[0]), format_number(p[1])))
        .collect::<Vec<_>>()
        .join(" ")
}

/// SVG text of the scenario with trajectories drawn on top.
pub fn svg_string(scenario: &Scenario, trajectories: &[Trajectory]) -> Result<String> {
    let (lo, hi) = scenario.workspace.bounding_box()?;
    let (w, h) = (hi[0] - lo[0], hi[1] - lo[1]);
    let unit = w.max(h) / 200.0;
    let f = format_number;
    let mut s = String::new();
    writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"{} {} {} {}\" width=\"600\" height=\"{}\">",
        f(lo[0]),
        f(lo[1]),
        f(w),
        f(h),
        f((600.0 * h / w).round())
    )
    .unwrap();
    writeln!(s, "<g transform=\"translate(0 {}) scale(1 -1)\">", f(lo[1] + hi[1])).unwrap();
    for region in &scenario.regions {
        writeln!(
            s,
            "<polygon points=\"{}\" fill=\"#d3d3d3\" fill-opacity=\"0.5\" stroke=\"#a9a9a9\" stroke-width=\"{}\"/>",
            points(&region.vertices_2d()),
            f(unit * 0.5)
        )
        .unwrap();
    }
    for obstacle in &scenario.obstacles {
        match obstacle.as_box() {
            Some((a, b)) => writeln!(
                s,
                "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"black\"/>",
                f(a[0]),
                f(a[1]),
                f(b[0] - a[0]),
                f(b[1] - a[1])
            )
            .unwrap(),
            None => writeln!(s, "<polygon points=\"{}\" fill=\"black\"/>", points(&obstacle.vertices_2d())).unwrap(),
        }
    }
    for (k, tr) in trajectories.iter().enumerate() {
        writeln!(
            s,
            "<polyline points=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"{}\"/>",
            points(&tr.states),
            COLORS[k % COLORS.len()],
            f(unit)
        )
        .unwrap();
    }
    let r = unit * 3.0;
    for (k, agent) in scenario.agents.iter().enumerate() {
        let color = COLORS[k % COLORS.len()];
        let [x, y] = agent.start;
        writeln!(
            s,
            "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"{}\"/>",
            f(x - r),
            f(y - r),
            f(2.0 * r),
            f(2.0 * r),
            f(unit * 0.8)
        )
        .unwrap();
        let star: Vec<[f64; 2]> = (0..10)
            .map(|i| {
                let ang = std::f64::consts::FRAC_PI_2 + i as f64 * std::f64::consts::PI / 5.0;
                let rad = if i % 2 == 0 { 1.4 * r } else { 0.6 * r };
                [agent.goal[0] + rad * ang.cos(), agent.goal[1] + rad * ang.sin()]
            })
            .collect();
        writeln!(s, "<polygon points=\"{}\" fill=\"{color}\"/>", points(&star)).unwrap();
    }
    s.push_str("</g>\n</svg>\n");
    Ok(s)
}

pub fn render_svg(scenario: &Scenario, trajectories: &[Trajectory], path: &Path) -> Result<()> {
    let text = svg_string(scenario, trajectories)?;
    std::fs::write(path, text)?;
    Ok(())
}

#[derive(Debug, Clone)]
pub struct BenchmarkOptions {
    pub t_values: Vec<usize>,
    /// Per-cell wall-clock cap.
    pub cell_limit: Duration,
    /// Separation used by the infeasibility probe; `None` skips the probe.
    pub probe_d_min: Option<f64>,
}

impl Default for BenchmarkOptions {
    fn default() -> Self {
        BenchmarkOptions {
            t_values: vec![12, 20],
            cell_limit: Duration::from_secs(300),
            probe_d_min: Some(6.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkRow {
    #[serde(rename = "T")]
    pub steps: usize,
    pub method: String,
    pub status: String,
    pub objective: Option<f64>,
    pub binaries: usize,
    pub nodes: usize,
    pub wall_ms: f64,
    pub rho: Option<f64>,
    /// True when the cell hit its wall-clock cap.
    pub timed_out: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkTable {
    pub rows: Vec<BenchmarkRow>,
    pub limit_s: f64,
}

impl BenchmarkTable {
    pub fn row(&self, steps: usize, method: &str) -> Option<&BenchmarkRow> {
        self.rows.iter().find(|r| r.steps == steps && r.method == method)
    }

    fn wall_text(&self, r: &BenchmarkRow) -> String {
        if r.timed_out {
            format!(">{}", format_number(self.limit_s * 1000.0))
        } else {
            format!("{:.1}", r.wall_ms)
        }
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("T,method,status,objective,binaries,nodes,wall_ms,rho\n");
        for r in &self.rows {
            writeln!(
                s,
                "{},{},{},{},{},{},{},{}",
                r.steps,
                r.method,
                r.status,
                r.objective.map(|v| format!("{v:.6}")).unwrap_or_default(),
                r.binaries,
                r.nodes,
                self.wall_text(r),
                r.rho.map(|v| format!("{v:.4}")).unwrap_or_default()
            )
            .unwrap();
        }
        s
    }

    pub fn to_text(&self) -> String {
        let mut s = format!(
            "{:>4}  {:<12} {:<14} {:>12} {:>9} {:>8} {:>12} {:>7}\n",
            "T", "method", "status", "objective", "binaries", "nodes", "wall_ms", "rho"
        );
        for r in &self.rows {
            writeln!(
                s,
                "{:>4}  {:<12} {:<14} {:>12} {:>9} {:>8} {:>12} {:>7}",
                r.steps,
                r.method,
                r.status,
                r.objective.map(|v| format!("{v:.3}")).unwrap_or_else(|| "-".into()),
                r.binaries,
                r.nodes,
                self.wall_text(r),
                r.rho.map(|v| format!("{v:.3}")).unwrap_or_else(|| "-".into())
            )
            .unwrap();
        }
        s
    }
}

fn ms(d: Duration) -> f64 {
    d.as_secs_f64() * 1000.0
}

/// Runs, for each `T`: the full PAAMP planner, the naive MILP, and the
/// infeasibility probe on the first joint sequence at the inflated
/// separation.
pub fn benchmark(scenario: &Scenario, opts: &BenchmarkOptions) -> Result<BenchmarkTable> {
    scenario.validate()?;
    let limit = opts.cell_limit;
    let mut rows = Vec::new();
    for &steps in &opts.t_values {
        let mut sc = scenario.clone();
        sc.params.steps = steps;
        sc.params.timeout_s = limit.as_secs_f64();
        sc.validate()?;

        let start = Instant::now();
        let res = plan(&sc)?;
        let wall = start.elapsed();
        let last = res.diagnostics.records.last();
        rows.push(BenchmarkRow {
            steps,
            method: "paamp".into(),
            status: res.status.as_str().into(),
            objective: (res.status == PlanStatus::Success).then_some(res.diagnostics.objective),
            binaries: last.map_or(0, |r| r.binaries),
            nodes: res.diagnostics.total_nodes,
            wall_ms: ms(wall),
            rho: last.and_then(|r| r.rho),
            timed_out: res.status == PlanStatus::Timeout,
        });

        let start = Instant::now();
        let (model, _) = build_naive_model(&sc)?;
        let out = solve_milp(
            &model,
            &SolveOptions {
                gap: sc.params.gap,
                time_limit: Some(limit),
                ..SolveOptions::default()
            },
        )?;
        let wall = start.elapsed();
        rows.push(BenchmarkRow {
            steps,
            method: "naive".into(),
            status: out.status.as_str().into(),
            objective: out.has_solution().then_some(out.objective),
            binaries: model.num_binaries(),
            nodes: out.nodes,
            wall_ms: ms(wall),
            rho: (sc.agents.len() >= 2).then_some(1.0),
            timed_out: out.status == SolveStatus::TimeLimit,
        });

        if let Some(d) = opts.probe_d_min {
            let mut probe = sc.clone();
            probe.params.d_min = d;
            probe.params.d_sep = None;
            let start = Instant::now();
            let graph = build_graph(&probe)?;
            let row = match initial_joint_plans(&probe, &graph)? {
                Some(plans) => {
                    let pairs = crate::pairs::relevant_pairs(&plans, &graph)?;
                    let (model, _) = build_paamp_model(&probe, &plans, &pairs)?;
                    let out = solve_milp(
                        &model,
                        &SolveOptions {
                            gap: probe.params.gap,
                            time_limit: Some(limit),
                            ..SolveOptions::default()
                        },
                    )?;
                    let rho = if probe.agents.len() >= 2 { Some(pair_ratio(&pairs, probe.agents.len())?) } else { None };
                    BenchmarkRow {
                        steps,
                        method: "paamp-probe".into(),
                        status: out.status.as_str().into(),
                        objective: out.has_solution().then_some(out.objective),
                        binaries: model.num_binaries(),
                        nodes: out.nodes,
                        wall_ms: ms(start.elapsed()),
                        rho,
                        timed_out: out.status == SolveStatus::TimeLimit,
                    }
                }
                None => BenchmarkRow {
                    steps,
                    method: "paamp-probe".into(),
                    status: "no-sequence".into(),
                    objective: None,
                    binaries: 0,
                    nodes: 0,
                    wall_ms: ms(start.elapsed()),
                    rho: None,
                    timed_out: false,
                },
            };
            rows.push(row);
        }
    }
    Ok(BenchmarkTable {
        rows,
        limit_s: limit.as_secs_f64(),
    })
}

/// Summary numbers written next to a plan. Timings are left out so the
/// file depends only on the inputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanSummary {
    pub mode: String,
    pub iterations: usize,
    pub objective: Option<f64>,
    pub nodes: usize,
    pub binaries: usize,
    pub collision_binaries: usize,
    pub rho: Option<f64>,
    pub relevant_pairs_total: Option<usize>,
    pub mean_pairs_per_state: Option<f64>,
    pub contacts_per_agent: Option<Vec<usize>>,
    pub contacts_per_agent_per_step: Option<Vec<f64>>,
    pub blacklist: Vec<BannedTransition>,
    pub reason: Option<String>,
}

/// The plan file: trajectories plus metrics and diagnostics. `validate`
/// reads back `agents` and `plans`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanDocument {
    pub status: PlanStatus,
    pub agents: Vec<Trajectory>,
    #[serde(default)]
    pub plans: Vec<SequencePlan>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metrics: Option<TrajectoryMetrics>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diagnostics: Option<PlanSummary>,
}

impl PlanDocument {
    pub fn from_result(scenario: &Scenario, result: &PlanResult, mode: &str) -> PlanDocument {
        let d = &result.diagnostics;
        let n = scenario.agents.len();
        let last = d.records.last();
        let success = result.status == PlanStatus::Success;
        let pairs = d.pairs.as_ref();
        PlanDocument {
            status: result.status,
            agents: result.trajectories.clone(),
            plans: result.plans.clone(),
            metrics: success.then(|| metrics(&result.trajectories, scenario.params.alpha)),
            diagnostics: Some(PlanSummary {
                mode: mode.to_string(),
                iterations: result.iterations,
                objective: success.then_some(d.objective),
                nodes: d.total_nodes,
                binaries: last.map_or(0, |r| r.binaries),
                collision_binaries: last.map_or(0, |r| r.collision_binaries),
                rho: last.and_then(|r| r.rho),
                relevant_pairs_total: pairs.map(|p| p.total()),
                mean_pairs_per_state: pairs.map(|p| p.mean_per_state()),
                contacts_per_agent: pairs.map(|p| p.contacts_per_agent(n)),
                contacts_per_agent_per_step: pairs.map(|p| p.contacts_per_agent_per_step(n)),
                blacklist: result.blacklist.iter().copied().collect(),
                reason: d.reason.clone(),
            }),
        }
    }

    pub fn to_json_string(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("plan document serializes");
        s.push('\n');
        s
    }

    pub fn from_json_str(text: &str, origin: &Path) -> Result<PlanDocument> {
        serde_json::from_str(text).map_err(|e| crate::error::Error::Parse {
            path: origin.to_path_buf(),
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })
    }
}
