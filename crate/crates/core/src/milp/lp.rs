use super::model::{MilpModel, Relation};
use super::simplex::{LpStatus, Row, Tableau};
use crate::error::Result;

/// Outcome of a linear relaxation.
#[derive(Debug, Clone, PartialEq)]
pub enum LpResult {
    Optimal { objective: f64, values: Vec<f64> },
    Infeasible,
    Unbounded,
}

impl LpResult {
    pub fn objective(&self) -> Option<f64> {
        match self {
            LpResult::Optimal { objective, .. } => Some(*objective),
            _ => None,
        }
    }
}

pub(crate) fn slack_bounds(relation: Relation) -> (f64, f64) {
    match relation {
        Relation::Le => (0.0, f64::INFINITY),
        Relation::Ge => (f64::NEG_INFINITY, 0.0),
        Relation::Eq => (0.0, 0.0),
    }
}

/// Tableau over the rows listed in `keep`, with the given variable bounds.
pub(crate) fn build_tableau(model: &MilpModel, lb: &[f64], ub: &[f64], keep: &[usize]) -> Tableau {
    let terms: Vec<Vec<(usize, f64)>> = keep
        .iter()
        .map(|&r| model.constraints[r].terms.iter().map(|&(v, a)| (v.0, a)).collect())
        .collect();
    let rows: Vec<Row<'_>> = keep
        .iter()
        .zip(&terms)
        .map(|(&r, t)| {
            let c = &model.constraints[r];
            let (slack_lower, slack_upper) = slack_bounds(c.relation);
            Row {
                terms: t,
                slack_lower,
                slack_upper,
                rhs: c.rhs,
            }
        })
        .collect();
    Tableau::new(model.num_vars(), &model.cost_vector(), lb, ub, &rows)
}

/// Solves the continuous relaxation of `model` (binaries range over
/// `[0, 1]`) with the bounded-variable primal simplex.
pub fn solve_lp(model: &MilpModel) -> Result<LpResult> {
    model.validate()?;
    let lb: Vec<f64> = model.variables.iter().map(|v| v.lower).collect();
    let ub: Vec<f64> = model.variables.iter().map(|v| v.upper).collect();
    let keep: Vec<usize> = (0..model.constraints.len()).collect();
    let mut tab = build_tableau(model, &lb, &ub, &keep);
    Ok(match tab.primal()? {
        LpStatus::Optimal => {
            tab.refresh()?;
            let values = tab.solution();
            LpResult::Optimal {
                objective: model.objective_value(&values),
                values,
            }
        }
        LpStatus::Infeasible => LpResult::Infeasible,
        LpStatus::Unbounded => LpResult::Unbounded,
        LpStatus::Cutoff => unreachable!("primal simplex has no cutoff"),
    })
}
