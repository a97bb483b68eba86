use std::time::Instant;

use super::bnb::{SolveOutcome, SolveStatus};
use super::lp::{solve_lp, LpResult};
use super::model::{MilpModel, VarKind};
use crate::error::{Error, Result};

pub const BRUTE_FORCE_LIMIT: usize = 20;

/// Exhaustive reference solver: one LP per assignment of the binaries.
/// Ties keep the first assignment in counting order.
pub fn brute_force_solve(model: &MilpModel) -> Result<SolveOutcome> {
    let start = Instant::now();
    model.validate()?;
    let bins = model.binary_ids();
    if bins.len() > BRUTE_FORCE_LIMIT {
        return Err(Error::OracleScaleExceeded {
            binaries: bins.len(),
            limit: BRUTE_FORCE_LIMIT,
        });
    }
    let mut fixed = model.clone();
    for &b in &bins {
        fixed.variables[b.0].kind = VarKind::Continuous;
    }
    let mut best: Option<(f64, Vec<f64>)> = None;
    let total = 1usize << bins.len();
    for mask in 0..total {
        let mut admissible = true;
        for (k, &b) in bins.iter().enumerate() {
            let v = ((mask >> k) & 1) as f64;
            let var = &model.variables[b.0];
            if v < var.lower || v > var.upper {
                admissible = false;
                break;
            }
            fixed.variables[b.0].lower = v;
            fixed.variables[b.0].upper = v;
        }
        if !admissible {
            continue;
        }
        match solve_lp(&fixed)? {
            LpResult::Optimal { objective, values } => {
                if best.as_ref().map_or(true, |(o, _)| objective < *o - 1e-12) {
                    best = Some((objective, values));
                }
            }
            LpResult::Infeasible => {}
            LpResult::Unbounded => {
                return Err(Error::InvalidInput("linear relaxation is unbounded".into()));
            }
        }
    }
    Ok(match best {
        Some((objective, values)) => SolveOutcome {
            status: SolveStatus::Optimal,
            objective,
            values,
            best_bound: objective,
            nodes: total,
            wall_time: start.elapsed(),
        },
        None => {
            let mut out = SolveOutcome::infeasible(total, start);
            out.wall_time = start.elapsed();
            out
        }
    })
}
