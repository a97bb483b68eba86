//! Activity-based bound tightening over the rows of a model.

use super::model::{Constraint, MilpModel, Relation, VarKind};

const INT_TOL: f64 = 1e-6;
const HUGE: f64 = 1e10;

/// Row activity range under the given bounds: finite parts plus the number
/// of terms contributing an infinite amount on each side.
struct Activity {
    min: f64,
    max: f64,
    min_inf: usize,
    max_inf: usize,
}

fn activity(terms: &[(usize, f64)], sign: f64, lb: &[f64], ub: &[f64]) -> Activity {
    let mut act = Activity {
        min: 0.0,
        max: 0.0,
        min_inf: 0,
        max_inf: 0,
    };
    for &(j, a) in terms {
        let a = a * sign;
        let (lo, hi) = if a > 0.0 { (lb[j], ub[j]) } else { (ub[j], lb[j]) };
        if lo.is_finite() {
            act.min += a * lo;
        } else {
            act.min_inf += 1;
        }
        if hi.is_finite() {
            act.max += a * hi;
        } else {
            act.max_inf += 1;
        }
    }
    act
}

fn as_le_forms(c: &Constraint) -> &'static [f64] {
    match c.relation {
        Relation::Le => &[1.0],
        Relation::Ge => &[-1.0],
        Relation::Eq => &[1.0, -1.0],
    }
}

/// Tightens `lb`/`ub` in place until a fixpoint or `max_passes` sweeps.
/// Integer bounds are rounded. Returns `false` when some row or bound is
/// proven infeasible.
pub(crate) fn propagate(model: &MilpModel, lb: &mut [f64], ub: &mut [f64], max_passes: usize) -> bool {
    let is_int: Vec<bool> = model.variables.iter().map(|v| v.kind == VarKind::Binary).collect();
    let rows: Vec<Vec<(usize, f64)>> = model
        .constraints
        .iter()
        .map(|c| c.terms.iter().map(|&(v, a)| (v.0, a)).collect())
        .collect();
    for pass in 0..max_passes {
        let mut changed = false;
        for (c, terms) in model.constraints.iter().zip(&rows) {
            for &sign in as_le_forms(c) {
                let rhs = sign * c.rhs;
                let act = activity(terms, sign, lb, ub);
                if act.min_inf == 0 && act.min > rhs + 1e-6 * (1.0 + rhs.abs()) {
                    return false;
                }
                if act.min_inf > 1 {
                    continue;
                }
                for &(j, a) in terms {
                    let a = a * sign;
                    let own = if a > 0.0 { lb[j] } else { ub[j] };
                    let rest = if !own.is_finite() {
                        act.min
                    } else if act.min_inf == 0 {
                        act.min - a * own
                    } else {
                        continue;
                    };
                    let bound = (rhs - rest) / a;
                    if !bound.is_finite() || bound.abs() > HUGE {
                        continue;
                    }
                    if a > 0.0 {
                        let new = if is_int[j] {
                            (bound + INT_TOL).floor()
                        } else {
                            bound + 1e-10 * (1.0 + bound.abs())
                        };
                        if new < ub[j] - 1e-7 * (1.0 + ub[j].abs().min(HUGE)) || (is_int[j] && new < ub[j]) {
                            ub[j] = new;
                            changed = true;
                        }
                    } else {
                        let new = if is_int[j] {
                            (bound - INT_TOL).ceil()
                        } else {
                            bound - 1e-10 * (1.0 + bound.abs())
                        };
                        if new > lb[j] + 1e-7 * (1.0 + lb[j].abs().min(HUGE)) || (is_int[j] && new > lb[j]) {
                            lb[j] = new;
                            changed = true;
                        }
                    }
                    if lb[j] > ub[j] {
                        if lb[j] > ub[j] + 1e-7 * (1.0 + lb[j].abs()) || is_int[j] {
                            return false;
                        }
                        let mid = 0.5 * (lb[j] + ub[j]);
                        lb[j] = mid;
                        ub[j] = mid;
                    }
                }
            }
        }
        if !changed {
            log::trace!("propagation reached a fixpoint after {} passes", pass + 1);
            break;
        }
    }
    true
}

/// Copy of `model` whose inequality rows have binary coefficients shrunk
/// as far as the bounds allow. A row that is implied by the bounds for one
/// value of a binary gets that binary's coefficient (and the right-hand
/// side, when needed) moved until the implied side is tight. Rows keep the
/// same set of integer-feasible points within the bounds.
pub(crate) fn strengthen(model: &MilpModel, lb: &[f64], ub: &[f64]) -> (MilpModel, usize) {
    let mut out = model.clone();
    let mut changed = 0;
    for c in &mut out.constraints {
        let sign = match c.relation {
            Relation::Le => 1.0,
            Relation::Ge => -1.0,
            Relation::Eq => continue,
        };
        for k in 0..c.terms.len() {
            let (v, a) = c.terms[k];
            let j = v.0;
            if model.variables[j].kind != VarKind::Binary || lb[j] != 0.0 || ub[j] != 1.0 {
                continue;
            }
            let terms: Vec<(usize, f64)> = c.terms.iter().map(|&(v, a)| (v.0, a)).collect();
            let act = activity(&terms, sign, lb, ub);
            if act.max_inf > 0 {
                continue;
            }
            let (a_le, b_le) = (sign * a, sign * c.rhs);
            let margin = 1e-9 * (1.0 + b_le.abs());
            if a_le > 0.0 {
                // Redundant at z = 0.
                let d = b_le - (act.max - a_le) - margin;
                if d > margin {
                    let d = d.min(a_le);
                    c.terms[k].1 = sign * (a_le - d);
                    c.rhs = sign * (b_le - d);
                    changed += 1;
                }
            } else if a_le < 0.0 {
                // Redundant at z = 1.
                let d = b_le - (act.max + a_le) - margin;
                if d > margin {
                    let d = d.min(-a_le);
                    c.terms[k].1 = sign * (a_le + d);
                    changed += 1;
                }
            }
        }
        c.terms.retain(|&(_, a)| a != 0.0);
    }
    (out, changed)
}

/// True when every point inside the bounds satisfies the row.
pub(crate) fn is_redundant(c: &Constraint, lb: &[f64], ub: &[f64]) -> bool {
    let terms: Vec<(usize, f64)> = c.terms.iter().map(|&(v, a)| (v.0, a)).collect();
    let tol = 1e-9 * (1.0 + c.rhs.abs());
    as_le_forms(c).iter().all(|&sign| {
        let act = activity(&terms, sign, lb, ub);
        act.max_inf == 0 && act.max <= sign * c.rhs + tol
    })
}
