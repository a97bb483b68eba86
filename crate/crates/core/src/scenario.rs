//! Scenario data model and the JSON scenario file format.
//!
//! ```json
//! {
//!   "workspace": {"box": [0, 10, 0, 10]},
//!   "regions": [{"box": [0, 2.66, 0, 10], "name": "R0"}],
//!   "obstacles": [{"halfspaces": [[-1, 0, -2.66], [1, 0, 3.66], [0, -1, -2.66], [0, 1, 3.66]]}],
//!   "agents": [{"id": 0, "start": [1, 1], "goal": [1, 9]}],
//!   "params": {"T": 12}
//! }
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{contains, Polytope};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentSpec {
    pub id: usize,
    pub start: [f64; 2],
    pub goal: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlanningParams {
    /// Number of trajectory segments; states are indexed `0..=T`.
    #[serde(rename = "T")]
    pub steps: usize,
    pub v_max: f64,
    pub d_min: f64,
    /// Number of candidate separating directions.
    #[serde(rename = "L")]
    pub num_directions: usize,
    /// Separation threshold per direction; follows `d_min` when unset.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d_sep: Option<f64>,
    pub big_m: f64,
    pub alpha: f64,
    pub epsilon: f64,
    /// Absolute gap at which branch-and-bound stops.
    pub gap: f64,
    pub k_max: usize,
    pub k_candidates: usize,
    pub timeout_s: f64,
    /// Emit collision rows for every pair at every step instead of only
    /// the relevant ones.
    pub all_pairs: bool,
}

impl Default for PlanningParams {
    fn default() -> Self {
        PlanningParams {
            steps: 12,
            v_max: 1.0,
            d_min: 1.0,
            num_directions: 8,
            d_sep: None,
            big_m: 100.0,
            alpha: 0.5,
            epsilon: 0.02,
            gap: 5.0,
            k_max: 20,
            k_candidates: 5,
            timeout_s: 300.0,
            all_pairs: false,
        }
    }
}

impl PlanningParams {
    pub fn d_sep(&self) -> f64 {
        self.d_sep.unwrap_or(self.d_min)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("v_max", self.v_max),
            ("d_min", self.d_min),
            ("d_sep", self.d_sep()),
            ("big_m", self.big_m),
            ("timeout_s", self.timeout_s),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::Validation(format!("{name} must be positive and finite, got {v}")));
            }
        }
        for (name, v) in [("alpha", self.alpha), ("epsilon", self.epsilon), ("gap", self.gap)] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::Validation(format!("{name} must be nonnegative, got {v}")));
            }
        }
        if self.steps == 0 {
            return Err(Error::Validation("T must be at least 1".into()));
        }
        if self.num_directions < 3 {
            return Err(Error::Validation(format!("L must be at least 3, got {}", self.num_directions)));
        }
        if self.k_max == 0 || self.k_candidates == 0 {
            return Err(Error::Validation("k_max and k_candidates must be positive".into()));
        }
        if self.d_sep() > self.d_min {
            return Err(Error::Validation(format!(
                "d_sep {} exceeds d_min {}",
                self.d_sep(),
                self.d_min
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub workspace: Polytope,
    pub regions: Vec<Polytope>,
    pub obstacles: Vec<Polytope>,
    pub agents: Vec<AgentSpec>,
    pub params: PlanningParams,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PolytopeSpec {
    #[serde(rename = "box", default, skip_serializing_if = "Option::is_none")]
    bx: Option<[f64; 4]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    halfspaces: Option<Vec<[f64; 3]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    name: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    workspace: PolytopeSpec,
    regions: Vec<PolytopeSpec>,
    #[serde(default)]
    obstacles: Vec<PolytopeSpec>,
    agents: Vec<AgentSpec>,
    #[serde(default)]
    params: PlanningParams,
}

fn boxed(x0: f64, x1: f64, y0: f64, y1: f64, name: &str) -> Polytope {
    Polytope::from_box(&[x0, y0], &[x1, y1], Some(name.to_string())).expect("literal box")
}

impl PolytopeSpec {
    fn build(&self, what: &str) -> Result<Polytope> {
        let p = match (&self.bx, &self.halfspaces) {
            (Some(b), None) => Polytope::from_box(&[b[0], b[2]], &[b[1], b[3]], self.name.clone()),
            (None, Some(h)) => Polytope::unchecked(
                h.iter().map(|r| vec![r[0], r[1]]).collect(),
                h.iter().map(|r| r[2]).collect(),
                self.name.clone(),
            ),
            _ => {
                return Err(Error::Validation(format!(
                    "{what}: give exactly one of `box` or `halfspaces`"
                )))
            }
        }
        .map_err(|e| Error::Validation(format!("{what}: {e}")))?;
        Polytope::new(p.a().to_vec(), p.b().to_vec(), p.name().map(str::to_string))
            .map_err(|e| Error::Validation(format!("{what}: {e}")))
    }

    fn from_polytope(p: &Polytope) -> Self {
        let name = p.name().map(str::to_string);
        if let Some((lo, hi)) = p.as_box() {
            if let Ok(q) = Polytope::from_box(&lo, &hi, None) {
                if q.a() == p.a() && q.b() == p.b() {
                    return PolytopeSpec {
                        bx: Some([lo[0], hi[0], lo[1], hi[1]]),
                        halfspaces: None,
                        name,
                    };
                }
            }
        }
        PolytopeSpec {
            bx: None,
            halfspaces: Some(p.a().iter().zip(p.b()).map(|(r, &b)| [r[0], r[1], b]).collect()),
            name,
        }
    }
}

impl Scenario {
    /// Parses and validates scenario text; `origin` is used in error messages.
    pub fn from_json_str(text: &str, origin: &Path) -> Result<Scenario> {
        let file: ScenarioFile = serde_json::from_str(text).map_err(|e| Error::Parse {
            path: origin.to_path_buf(),
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        let scenario = Scenario {
            workspace: file.workspace.build("workspace")?,
            regions: file
                .regions
                .iter()
                .enumerate()
                .map(|(k, r)| r.build(&format!("region {k}")))
                .collect::<Result<_>>()?,
            obstacles: file
                .obstacles
                .iter()
                .enumerate()
                .map(|(k, r)| r.build(&format!("obstacle {k}")))
                .collect::<Result<_>>()?,
            agents: file.agents,
            params: file.params,
        };
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn to_json_string(&self) -> String {
        let file = ScenarioFile {
            workspace: PolytopeSpec::from_polytope(&self.workspace),
            regions: self.regions.iter().map(PolytopeSpec::from_polytope).collect(),
            obstacles: self.obstacles.iter().map(PolytopeSpec::from_polytope).collect(),
            agents: self.agents.clone(),
            params: self.params.clone(),
        };
        let mut s = serde_json::to_string_pretty(&file).expect("scenario serializes");
        s.push('\n');
        s
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json_string())?;
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if self.regions.is_empty() {
            return Err(Error::Validation("scenario has no regions".into()));
        }
        for p in std::iter::once(&self.workspace).chain(&self.regions).chain(&self.obstacles) {
            if p.dim() != 2 {
                return Err(Error::Validation(format!("polytope of dimension {} (only 2 is supported)", p.dim())));
            }
        }
        for (k, o) in self.obstacles.iter().enumerate() {
            for v in o.vertices_2d() {
                if !contains(&self.workspace, &v, 1e-9)? {
                    return Err(Error::Validation(format!("obstacle {k} extends outside the workspace")));
                }
            }
        }
        if self.agents.is_empty() {
            return Err(Error::Validation("scenario has no agents".into()));
        }
        let mut ids: Vec<usize> = self.agents.iter().map(|a| a.id).collect();
        ids.sort_unstable();
        if ids.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Validation("agent ids are not unique".into()));
        }
        for agent in &self.agents {
            for (what, x) in [("start", agent.start), ("goal", agent.goal)] {
                if !contains(&self.workspace, &x, 1e-9)? {
                    return Err(Error::Validation(format!(
                        "agent {} {what} ({}, {}) lies outside the workspace",
                        agent.id, x[0], x[1]
                    )));
                }
                if self.regions_containing(x).is_empty() {
                    return Err(Error::Validation(format!(
                        "agent {} {what} ({}, {}) lies in no region",
                        agent.id, x[0], x[1]
                    )));
                }
            }
        }
        let diameter = {
            let v = self.workspace.vertices_2d();
            let mut d: f64 = 0.0;
            for p in &v {
                for q in &v {
                    d = d.max(((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt());
                }
            }
            d
        };
        if self.params.big_m <= self.params.d_sep() + diameter {
            log::warn!(
                "big_m {} does not exceed d_sep + workspace diameter {:.3}; collision rows may cut off separated states",
                self.params.big_m,
                self.params.d_sep() + diameter
            );
        }
        Ok(())
    }

    /// Indices of regions containing `x` (closed, tolerance 1e-9).
    pub fn regions_containing(&self, x: [f64; 2]) -> Vec<usize> {
        self.regions
            .iter()
            .enumerate()
            .filter(|(_, r)| contains(r, &x, 1e-9).unwrap_or(false))
            .map(|(k, _)| k)
            .collect()
    }

    pub fn agent_index(&self, id: usize) -> Option<usize> {
        self.agents.iter().position(|a| a.id == id)
    }
}

pub fn load_scenario(path: &Path) -> Result<Scenario> {
    let text = std::fs::read_to_string(path)?;
    Scenario::from_json_str(&text, path)
}

/// Four agents crossing diagonally through a 3×3 grid of bands with four
/// square obstacles in the gaps.
pub fn builtin_crossing_scenario() -> Scenario {
    let (g1, g2) = ((2.66, 3.66), (6.33, 7.33));
    Scenario {
        workspace: boxed(0.0, 10.0, 0.0, 10.0, "workspace"),
        regions: vec![
            boxed(0.0, 2.66, 0.0, 10.0, "R0"),
            boxed(3.66, 6.33, 0.0, 10.0, "R1"),
            boxed(7.33, 10.0, 0.0, 10.0, "R2"),
            boxed(0.0, 10.0, 0.0, 2.66, "R3"),
            boxed(0.0, 10.0, 3.66, 6.33, "R4"),
            boxed(0.0, 10.0, 7.33, 10.0, "R5"),
        ],
        obstacles: vec![
            boxed(g1.0, g1.1, g1.0, g1.1, "O0"),
            boxed(g2.0, g2.1, g1.0, g1.1, "O1"),
            boxed(g1.0, g1.1, g2.0, g2.1, "O2"),
            boxed(g2.0, g2.1, g2.0, g2.1, "O3"),
        ],
        agents: vec![
            AgentSpec { id: 0, start: [1.0, 1.0], goal: [9.0, 9.0] },
            AgentSpec { id: 1, start: [9.0, 1.0], goal: [1.0, 9.0] },
            AgentSpec { id: 2, start: [1.0, 9.0], goal: [9.0, 1.0] },
            AgentSpec { id: 3, start: [9.0, 9.0], goal: [1.0, 1.0] },
        ],
        params: PlanningParams::default(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_passes_validation() {
        let s = builtin_crossing_scenario();
        s.validate().unwrap();
        assert_eq!(s.regions.len(), 6);
        assert_eq!(s.obstacles.len(), 4);
        assert_eq!(s.agents[3].start, [9.0, 9.0]);
        assert_eq!(s.agents[3].goal, [1.0, 1.0]);
        assert_eq!(s.params.d_sep(), 1.0);
    }

    #[test]
    fn round_trip_is_exact() {
        let s = builtin_crossing_scenario();
        let text = s.to_json_string();
        let back = Scenario::from_json_str(&text, Path::new("mem")).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn parse_error_has_position() {
        let err = Scenario::from_json_str("{\n  \"workspace\": [1,\n", Path::new("bad.scn")).unwrap_err();
        match err {
            Error::Parse { line, column, .. } => assert!(line >= 2 && column > 0),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn d_sep_may_not_exceed_d_min() {
        let mut s = builtin_crossing_scenario();
        s.params.d_sep = Some(2.0);
        assert!(matches!(s.validate(), Err(Error::Validation(_))));
    }
}
