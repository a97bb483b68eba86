//! Agent pairs that need collision constraints at each state index.
//!
//! Agents are referred to by their position in the plan list, which follows
//! the scenario's agent order.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::region_graph::{RegionGraph, SequencePlan};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelevantPairs {
    /// `per_step[t]` lists pairs `(i, j)`, `i < j`, relevant at state `t`.
    pub per_step: Vec<Vec<(usize, usize)>>,
}

impl RelevantPairs {
    /// Number of segments `T` (there are `T + 1` states).
    pub fn steps(&self) -> usize {
        self.per_step.len().saturating_sub(1)
    }

    pub fn at(&self, t: usize) -> &[(usize, usize)] {
        &self.per_step[t]
    }

    pub fn contains(&self, t: usize, i: usize, j: usize) -> bool {
        self.per_step[t].contains(&(i.min(j), i.max(j)))
    }

    /// `Σ_t |P^(t)|`.
    pub fn total(&self) -> usize {
        self.per_step.iter().map(Vec::len).sum()
    }

    /// Mean of `|P^(t)|` over the `T + 1` states.
    pub fn mean_per_state(&self) -> f64 {
        self.total() as f64 / self.per_step.len() as f64
    }

    /// For each agent, the number of `(state, partner)` contacts.
    pub fn contacts_per_agent(&self, n_agents: usize) -> Vec<usize> {
        let mut c = vec![0; n_agents];
        for pairs in &self.per_step {
            for &(i, j) in pairs {
                c[i] += 1;
                c[j] += 1;
            }
        }
        c
    }

    /// Per-agent contacts divided by the number of time steps `T`.
    pub fn contacts_per_agent_per_step(&self, n_agents: usize) -> Vec<f64> {
        let steps = self.steps().max(1) as f64;
        self.contacts_per_agent(n_agents)
            .into_iter()
            .map(|c| c as f64 / steps)
            .collect()
    }
}

/// Pair `(i, j)` is relevant at state `t` when some region of a segment
/// touching `t` for agent `i` equals or is adjacent to one for agent `j`.
pub fn relevant_pairs(plans: &[SequencePlan], graph: &RegionGraph) -> Result<RelevantPairs> {
    let Some(first) = plans.first() else {
        return Ok(RelevantPairs { per_step: vec![Vec::new()] });
    };
    let steps = first.steps();
    if plans.iter().any(|p| p.steps() != steps) {
        return Err(Error::InvalidInput("plans have different numbers of segments".into()));
    }
    let mut ids: Vec<usize> = plans.iter().map(|p| p.agent).collect();
    ids.sort_unstable();
    if ids.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::InvalidInput("duplicate agent id among plans".into()));
    }
    let mut per_step = Vec::with_capacity(steps + 1);
    for t in 0..=steps {
        let regions: Vec<Vec<usize>> = plans.iter().map(|p| p.regions_at_state(t)).collect();
        let mut pairs = Vec::new();
        for i in 0..plans.len() {
            for j in i + 1..plans.len() {
                if regions[i]
                    .iter()
                    .any(|&a| regions[j].iter().any(|&b| graph.related(a, b)))
                {
                    pairs.push((i, j));
                }
            }
        }
        per_step.push(pairs);
    }
    Ok(RelevantPairs { per_step })
}

/// Every pair at every state.
pub fn all_pairs(n_agents: usize, steps: usize) -> RelevantPairs {
    let pairs: Vec<(usize, usize)> = (0..n_agents)
        .flat_map(|i| (i + 1..n_agents).map(move |j| (i, j)))
        .collect();
    RelevantPairs {
        per_step: vec![pairs; steps + 1],
    }
}

/// Mean over states of `|P^(t)| / C(N, 2)`.
pub fn pair_ratio(pairs: &RelevantPairs, n_agents: usize) -> Result<f64> {
    if n_agents < 2 {
        return Err(Error::InvalidInput(format!("pair ratio needs at least 2 agents, got {n_agents}")));
    }
    let combos = (n_agents * (n_agents - 1) / 2) as f64;
    Ok(pairs.mean_per_state() / combos)
}
