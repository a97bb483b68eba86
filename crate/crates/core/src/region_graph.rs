//! Region-adjacency graph, k-shortest region paths and their expansion into
//! per-segment region assignments.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{chebyshev_center, contains, intersects};
use crate::scenario::{AgentSpec, Scenario};

#[derive(Debug, Clone, PartialEq)]
pub struct RegionGraph {
    num_regions: usize,
    edges: BTreeSet<(usize, usize)>,
    costs: BTreeMap<(usize, usize), f64>,
    centers: Vec<[f64; 2]>,
    /// Chebyshev center of `R_a ∩ R_b` for every edge.
    waypoints: BTreeMap<(usize, usize), [f64; 2]>,
}

fn key(a: usize, b: usize) -> (usize, usize) {
    (a.min(b), a.max(b))
}

fn dist(p: [f64; 2], q: [f64; 2]) -> f64 {
    ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt()
}

fn point(v: Vec<f64>) -> [f64; 2] {
    [v[0], v[1]]
}

impl RegionGraph {
    pub fn num_regions(&self) -> usize {
        self.num_regions
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn adjacent(&self, a: usize, b: usize) -> bool {
        a != b && self.edges.contains(&key(a, b))
    }

    /// Regions that are equal or adjacent.
    pub fn related(&self, a: usize, b: usize) -> bool {
        a == b || self.adjacent(a, b)
    }

    pub fn edge_cost(&self, a: usize, b: usize) -> Option<f64> {
        self.costs.get(&key(a, b)).copied()
    }

    pub fn neighbors(&self, a: usize) -> Vec<usize> {
        (0..self.num_regions).filter(|&b| self.adjacent(a, b)).collect()
    }

    pub fn center(&self, region: usize) -> [f64; 2] {
        self.centers[region]
    }

    pub fn waypoint(&self, a: usize, b: usize) -> Option<[f64; 2]> {
        self.waypoints.get(&key(a, b)).copied()
    }

    /// Graph with one extra edge, used to probe monotonicity properties.
    pub fn with_edge(&self, a: usize, b: usize) -> RegionGraph {
        let mut g = self.clone();
        if a != b {
            let k = key(a, b);
            g.edges.insert(k);
            g.costs.entry(k).or_insert_with(|| dist(self.centers[a], self.centers[b]));
            g.waypoints
                .entry(k)
                .or_insert_with(|| midpoint(self.centers[a], self.centers[b]));
        }
        g
    }

    /// Straight-line distance travelled inside each region of `path` when
    /// going start → shared-face waypoints → goal.
    pub fn leg_lengths(&self, path: &[usize], start: [f64; 2], goal: [f64; 2]) -> Vec<f64> {
        let mut pts = vec![start];
        for w in path.windows(2) {
            pts.push(
                self.waypoint(w[0], w[1])
                    .unwrap_or_else(|| midpoint(self.centers[w[0]], self.centers[w[1]])),
            );
        }
        pts.push(goal);
        pts.windows(2).map(|w| dist(w[0], w[1])).collect()
    }
}

fn midpoint(p: [f64; 2], q: [f64; 2]) -> [f64; 2] {
    [0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1])]
}

/// Tests every region pair for intersection; edge cost is the distance
/// between Chebyshev centers.
pub fn build_graph(scenario: &Scenario) -> Result<RegionGraph> {
    let regions = &scenario.regions;
    let centers: Vec<[f64; 2]> = regions
        .iter()
        .map(|r| chebyshev_center(r).map(point))
        .collect::<Result<_>>()?;
    let mut edges = BTreeSet::new();
    let mut costs = BTreeMap::new();
    let mut waypoints = BTreeMap::new();
    for a in 0..regions.len() {
        for b in a + 1..regions.len() {
            if intersects(&regions[a], &regions[b])? {
                edges.insert((a, b));
                costs.insert((a, b), dist(centers[a], centers[b]));
                let shared = regions[a].intersection(&regions[b])?;
                let w = chebyshev_center(&shared).map(point).unwrap_or_else(|_| midpoint(centers[a], centers[b]));
                waypoints.insert((a, b), w);
            }
        }
    }
    log::debug!("region graph: {} regions, {} edges", regions.len(), edges.len());
    Ok(RegionGraph {
        num_regions: regions.len(),
        edges,
        costs,
        centers,
        waypoints,
    })
}

/// Per-segment region assignment of one agent.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SequencePlan {
    pub agent: usize,
    pub segments: Vec<usize>,
}

impl SequencePlan {
    /// Consecutive duplicates collapsed.
    pub fn region_path(&self) -> Vec<usize> {
        let mut p = self.segments.clone();
        p.dedup();
        p
    }

    pub fn steps(&self) -> usize {
        self.segments.len()
    }

    /// Regions of the segments touching state `t` (one or two entries).
    pub fn regions_at_state(&self, t: usize) -> Vec<usize> {
        let n = self.segments.len();
        let mut out = Vec::with_capacity(2);
        if t > 0 && t <= n {
            out.push(self.segments[t - 1]);
        }
        if t < n && !out.contains(&self.segments[t]) {
            out.push(self.segments[t]);
        }
        out
    }

    /// State indices `t ∈ [1, T−1]` where the region changes.
    pub fn transitions(&self) -> Vec<usize> {
        (1..self.segments.len())
            .filter(|&t| self.segments[t - 1] != self.segments[t])
            .collect()
    }
}

/// A banned time-indexed transition: `agent` may not have segment `t − 1`
/// in `from` and segment `t` in `to`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BannedTransition {
    pub agent: usize,
    pub t: usize,
    pub from: usize,
    pub to: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Blacklist {
    entries: BTreeSet<BannedTransition>,
}

impl Blacklist {
    pub fn new() -> Self {
        Self::default()
    }

    /// Copy extended with `entry`.
    pub fn with(&self, entry: BannedTransition) -> Blacklist {
        let mut b = self.clone();
        b.entries.insert(entry);
        b
    }

    pub fn contains(&self, entry: &BannedTransition) -> bool {
        self.entries.contains(entry)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &BannedTransition> {
        self.entries.iter()
    }

    /// First banned boundary used by `segments`.
    fn first_violation(&self, agent: usize, segments: &[usize]) -> Option<usize> {
        (1..segments.len()).find(|&t| {
            self.entries.contains(&BannedTransition {
                agent,
                t,
                from: segments[t - 1],
                to: segments[t],
            })
        })
    }
}

/// Splits `steps` segments over the regions of `path`, one contiguous block
/// each, proportionally to `legs` with largest-remainder rounding and at
/// least one segment per region.
pub fn time_expand(path: &[usize], legs: &[f64], steps: usize) -> Result<Vec<usize>> {
    if path.is_empty() {
        return Err(Error::InvalidInput("empty region path".into()));
    }
    if path.len() > steps {
        return Err(Error::SequenceTooLong { len: path.len(), steps });
    }
    if legs.len() != path.len() {
        return Err(Error::InvalidInput(format!(
            "{} leg lengths for a path of {} regions",
            legs.len(),
            path.len()
        )));
    }
    let blocks = block_lengths(legs, steps);
    Ok(path
        .iter()
        .zip(&blocks)
        .flat_map(|(&r, &n)| std::iter::repeat(r).take(n))
        .collect())
}

fn block_lengths(legs: &[f64], steps: usize) -> Vec<usize> {
    let p = legs.len();
    let spare = steps - p;
    let total: f64 = legs.iter().map(|l| l.max(0.0)).sum();
    let weights: Vec<f64> = if total > 1e-12 {
        legs.iter().map(|l| l.max(0.0) / total).collect()
    } else {
        vec![1.0 / p as f64; p]
    };
    let quotas: Vec<f64> = weights.iter().map(|w| w * spare as f64).collect();
    let mut blocks: Vec<usize> = quotas.iter().map(|q| 1 + (q + 1e-9).floor() as usize).collect();
    let assigned: usize = blocks.iter().sum();
    let mut order: Vec<usize> = (0..p).collect();
    let frac = |i: usize| quotas[i] - (quotas[i] + 1e-9).floor();
    order.sort_by(|&i, &j| frac(j).total_cmp(&frac(i)).then(i.cmp(&j)));
    for &i in order.iter().take((steps).saturating_sub(assigned)) {
        blocks[i] += 1;
    }
    blocks
}

const REPAIR_VISIT_LIMIT: usize = 200_000;

/// Up to `limit` block splits closest to `base` (L1 distance, then
/// lexicographic) whose expansions of `path` use no banned transition for
/// `agent`.
fn nearest_allowed(path: &[usize], base: &[usize], blacklist: &Blacklist, agent: usize, limit: usize) -> Vec<Vec<usize>> {
    struct Search<'a> {
        path: &'a [usize],
        base: &'a [usize],
        blacklist: &'a Blacklist,
        agent: usize,
        blocks: Vec<usize>,
        best: Vec<(usize, Vec<usize>)>,
        limit: usize,
        visits: usize,
    }
    impl Search<'_> {
        fn worse_than_kept(&self, d: usize) -> bool {
            self.best.len() == self.limit && self.best.last().is_some_and(|b| d >= b.0)
        }

        fn go(&mut self, k: usize, used: usize, dist: usize) {
            let steps: usize = self.base.iter().sum();
            if self.visits >= REPAIR_VISIT_LIMIT || self.worse_than_kept(dist) {
                return;
            }
            self.visits += 1;
            let banned = k > 0
                && self.blacklist.contains(&BannedTransition {
                    agent: self.agent,
                    t: used,
                    from: self.path[k - 1],
                    to: self.path[k],
                });
            if banned {
                return;
            }
            let left = self.path.len() - k;
            if left == 1 {
                let n = steps - used;
                let d = dist + n.abs_diff(self.base[k]);
                if !self.worse_than_kept(d) {
                    self.blocks.push(n);
                    let at = self.best.partition_point(|b| b.0 <= d);
                    self.best.insert(at, (d, self.blocks.clone()));
                    self.best.truncate(self.limit);
                    self.blocks.pop();
                }
                return;
            }
            for n in 1..=steps - used - (left - 1) {
                self.blocks.push(n);
                self.go(k + 1, used + n, dist + n.abs_diff(self.base[k]));
                self.blocks.pop();
            }
        }
    }
    let mut s = Search {
        path,
        base,
        blacklist,
        agent,
        blocks: Vec::new(),
        best: Vec::new(),
        limit,
        visits: 0,
    };
    if limit > 0 {
        s.go(0, 0, 0);
    }
    s.best
        .into_iter()
        .map(|(_, blocks)| {
            path.iter()
                .zip(&blocks)
                .flat_map(|(&r, &n)| std::iter::repeat(r).take(n))
                .collect()
        })
        .collect()
}

/// Rounds a cost so that sums taken in different orders compare equal.
fn cost_key(c: f64) -> i64 {
    (c * 1e9).round() as i64
}

type Adjacency = Vec<Vec<(usize, f64)>>;

fn shortest_path(
    adj: &Adjacency,
    src: usize,
    dst: usize,
    banned_nodes: &[bool],
    banned_edges: &HashSet<(usize, usize)>,
) -> Option<(f64, Vec<usize>)> {
    let mut heap = BinaryHeap::new();
    let mut settled = vec![false; adj.len()];
    heap.push(Reverse((cost_key(0.0), vec![src], 0.0f64.to_bits())));
    while let Some(Reverse((_, path, bits))) = heap.pop() {
        let cost = f64::from_bits(bits);
        let u = *path.last().expect("nonempty path");
        if settled[u] {
            continue;
        }
        settled[u] = true;
        if u == dst {
            return Some((cost, path));
        }
        for &(v, w) in &adj[u] {
            if settled[v] || banned_nodes[v] || banned_edges.contains(&(u, v)) {
                continue;
            }
            let mut p = path.clone();
            p.push(v);
            let c = cost + w;
            heap.push(Reverse((cost_key(c), p, c.to_bits())));
        }
    }
    None
}

fn path_cost(adj: &Adjacency, path: &[usize]) -> f64 {
    path.windows(2)
        .map(|w| {
            adj[w[0]]
                .iter()
                .find(|&&(v, _)| v == w[1])
                .map(|&(_, c)| c)
                .expect("path follows edges")
        })
        .sum()
}

/// Yen's loopless k-shortest paths; ties broken by lexicographic node order.
fn yen(adj: &Adjacency, src: usize, dst: usize, k: usize) -> Vec<(f64, Vec<usize>)> {
    let n = adj.len();
    let mut found: Vec<(f64, Vec<usize>)> = Vec::new();
    let Some(first) = shortest_path(adj, src, dst, &vec![false; n], &HashSet::new()) else {
        return found;
    };
    found.push(first);
    let mut candidates: BTreeSet<(i64, Vec<usize>)> = BTreeSet::new();
    let mut candidate_cost: BTreeMap<Vec<usize>, f64> = BTreeMap::new();
    while found.len() < k {
        let prev = found.last().expect("nonempty").1.clone();
        for i in 0..prev.len() - 1 {
            let root = &prev[..=i];
            let spur = prev[i];
            let mut banned_edges = HashSet::new();
            for (_, p) in &found {
                if p.len() > i && &p[..=i] == root {
                    banned_edges.insert((p[i], p[i + 1]));
                }
            }
            let mut banned_nodes = vec![false; n];
            for &v in &root[..i] {
                banned_nodes[v] = true;
            }
            if let Some((_, spur_path)) = shortest_path(adj, spur, dst, &banned_nodes, &banned_edges) {
                let mut total = root[..i].to_vec();
                total.extend(spur_path);
                if found.iter().any(|(_, p)| *p == total) || candidate_cost.contains_key(&total) {
                    continue;
                }
                let c = path_cost(adj, &total);
                candidates.insert((cost_key(c), total.clone()));
                candidate_cost.insert(total, c);
            }
        }
        let Some(next) = candidates.pop_first() else {
            break;
        };
        let c = candidate_cost.remove(&next.1).expect("candidate cost");
        found.push((c, next.1));
    }
    found
}

/// A candidate sequence with the cost of its region path.
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub plan: SequencePlan,
    pub cost: f64,
}

/// Up to `k` admissible candidates for `agent`, in order of region-path
/// cost, avoiding every banned transition.
pub fn generate_candidates(
    graph: &RegionGraph,
    scenario: &Scenario,
    agent: &AgentSpec,
    blacklist: &Blacklist,
    k: usize,
) -> Result<Vec<Candidate>> {
    if k == 0 {
        return Ok(Vec::new());
    }
    let steps = scenario.params.steps;
    let m = graph.num_regions();
    let (src, dst) = (m, m + 1);
    let mut adj: Adjacency = vec![Vec::new(); m + 2];
    for (a, b) in graph.edges() {
        let c = graph.edge_cost(a, b).expect("edge cost");
        adj[a].push((b, c));
        adj[b].push((a, c));
    }
    for r in scenario.regions_containing(agent.start) {
        adj[src].push((r, 0.0));
    }
    for r in scenario.regions_containing(agent.goal) {
        adj[r].push((dst, 0.0));
    }
    for list in &mut adj {
        list.sort_by_key(|&(v, _)| v);
    }
    let limit = 4 * k + 8;
    let mut out = Vec::new();
    for (cost, full) in yen(&adj, src, dst, limit) {
        let path = &full[1..full.len() - 1];
        if path.len() > steps {
            continue;
        }
        let legs = graph.leg_lengths(path, agent.start, agent.goal);
        let base = time_expand(path, &legs, steps)?;
        let expansions = if blacklist.first_violation(agent.id, &base).is_some() {
            nearest_allowed(path, &block_lengths(&legs, steps), blacklist, agent.id, k - out.len())
        } else {
            vec![base]
        };
        for segments in expansions {
            let plan = SequencePlan {
                agent: agent.id,
                segments,
            };
            debug_assert!(is_admissible(&plan, graph, scenario));
            out.push(Candidate { plan, cost });
        }
        if out.len() >= k {
            break;
        }
    }
    Ok(out)
}

pub fn generate_sequences(
    graph: &RegionGraph,
    scenario: &Scenario,
    agent: &AgentSpec,
    blacklist: &Blacklist,
    k: usize,
) -> Result<Vec<SequencePlan>> {
    Ok(generate_candidates(graph, scenario, agent, blacklist, k)?
        .into_iter()
        .map(|c| c.plan)
        .collect())
}

/// Start in the first region, goal in the last, consecutive regions equal
/// or adjacent, and exactly `T` segments.
pub fn is_admissible(plan: &SequencePlan, graph: &RegionGraph, scenario: &Scenario) -> bool {
    let Some(agent) = scenario.agents.iter().find(|a| a.id == plan.agent) else {
        return false;
    };
    let segs = &plan.segments;
    if segs.len() != scenario.params.steps || segs.iter().any(|&r| r >= graph.num_regions()) {
        return false;
    }
    let inside = |r: usize, x: [f64; 2]| contains(&scenario.regions[r], &x, 1e-9).unwrap_or(false);
    inside(segs[0], agent.start)
        && inside(segs[segs.len() - 1], agent.goal)
        && segs.windows(2).all(|w| graph.related(w[0], w[1]))
}
