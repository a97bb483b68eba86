#![allow(dead_code)]

use paamp::milp::{MilpModel, Relation, VarId};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, PartialEq)]
pub enum Oracle {
    Optimal(f64),
    Infeasible,
    Unbounded,
}

/// Textbook two-phase dense simplex with Bland's rule. Variables must have
/// a finite lower bound. Binaries are treated as continuous on their bounds.
pub fn textbook_lp(model: &MilpModel) -> Oracle {
    let n = model.num_vars();
    let lower: Vec<f64> = model.variables.iter().map(|v| v.lower).collect();
    assert!(lower.iter().all(|l| l.is_finite()), "oracle needs finite lower bounds");

    // Rows over shifted variables y = x - lower, all with rhs >= 0.
    let mut rows: Vec<(Vec<f64>, Relation, f64)> = Vec::new();
    for c in &model.constraints {
        let mut a = vec![0.0; n];
        let mut rhs = c.rhs;
        for &(v, coef) in &c.terms {
            a[v.0] += coef;
            rhs -= coef * lower[v.0];
        }
        rows.push((a, c.relation, rhs));
    }
    for (j, v) in model.variables.iter().enumerate() {
        if v.upper.is_finite() {
            let mut a = vec![0.0; n];
            a[j] = 1.0;
            rows.push((a, Relation::Le, v.upper - v.lower));
        }
    }
    for row in &mut rows {
        if row.2 < 0.0 {
            row.0.iter_mut().for_each(|x| *x = -*x);
            row.2 = -row.2;
            row.1 = match row.1 {
                Relation::Le => Relation::Ge,
                Relation::Ge => Relation::Le,
                Relation::Eq => Relation::Eq,
            };
        }
    }
    let m = rows.len();
    let n_slack = rows.iter().filter(|r| r.1 != Relation::Eq).count();
    let n_art = rows.iter().filter(|r| r.1 != Relation::Le).count();
    let width = n + n_slack + n_art;
    let art_start = n + n_slack;
    let mut t = vec![vec![0.0; width + 1]; m];
    let mut basis = vec![0usize; m];
    let (mut s, mut a) = (n, art_start);
    for (i, (coefs, rel, rhs)) in rows.iter().enumerate() {
        t[i][..n].copy_from_slice(coefs);
        t[i][width] = *rhs;
        match rel {
            Relation::Le => {
                t[i][s] = 1.0;
                basis[i] = s;
                s += 1;
            }
            Relation::Ge => {
                t[i][s] = -1.0;
                s += 1;
                t[i][a] = 1.0;
                basis[i] = a;
                a += 1;
            }
            Relation::Eq => {
                t[i][a] = 1.0;
                basis[i] = a;
                a += 1;
            }
        }
    }

    let mut phase1 = vec![0.0; width];
    for v in phase1.iter_mut().skip(art_start) {
        *v = 1.0;
    }
    if run(&mut t, &mut basis, &phase1, width, |_| true).is_none() {
        unreachable!("phase 1 is bounded");
    }
    let infeas: f64 = (0..m).filter(|&i| basis[i] >= art_start).map(|i| t[i][width]).sum();
    if infeas > 1e-7 {
        return Oracle::Infeasible;
    }
    // Drive zero-valued artificials out of the basis, dropping redundant rows.
    let mut i = 0;
    while i < t.len() {
        if basis[i] >= art_start {
            match (0..art_start).find(|&j| t[i][j].abs() > 1e-9) {
                Some(j) => pivot(&mut t, &mut basis, i, j),
                None => {
                    t.remove(i);
                    basis.remove(i);
                    continue;
                }
            }
        }
        i += 1;
    }
    let mut cost = vec![0.0; width];
    for &(v, c) in &model.objective {
        cost[v.0] += c;
    }
    match run(&mut t, &mut basis, &cost, width, |j| j < art_start) {
        None => Oracle::Unbounded,
        Some(z) => {
            let shift: f64 = model.objective.iter().map(|&(v, c)| c * lower[v.0]).sum();
            Oracle::Optimal(z + shift)
        }
    }
}

fn pivot(t: &mut [Vec<f64>], basis: &mut [usize], r: usize, q: usize) {
    let p = t[r][q];
    t[r].iter_mut().for_each(|x| *x /= p);
    let prow = t[r].clone();
    for (i, row) in t.iter_mut().enumerate() {
        if i != r && row[q] != 0.0 {
            let f = row[q];
            for (x, y) in row.iter_mut().zip(&prow) {
                *x -= f * y;
            }
        }
    }
    basis[r] = q;
}

/// Minimises `cost` from the current feasible basis. Returns the optimum or
/// `None` when unbounded.
fn run(t: &mut [Vec<f64>], basis: &mut [usize], cost: &[f64], width: usize, allowed: impl Fn(usize) -> bool) -> Option<f64> {
    for _ in 0..100_000 {
        let reduced = |j: usize| -> f64 {
            cost[j] - t.iter().zip(basis.iter()).map(|(row, &b)| cost[b] * row[j]).sum::<f64>()
        };
        let entering = (0..width).find(|&j| allowed(j) && !basis.contains(&j) && reduced(j) < -1e-9);
        let Some(q) = entering else {
            return Some(t.iter().zip(basis.iter()).map(|(row, &b)| cost[b] * row[width]).sum());
        };
        let mut leave: Option<(usize, f64)> = None;
        for (i, row) in t.iter().enumerate() {
            if row[q] > 1e-9 {
                let ratio = row[width] / row[q];
                let better = match leave {
                    None => true,
                    Some((k, r)) => ratio < r - 1e-12 || (ratio <= r + 1e-12 && basis[i] < basis[k]),
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
        }
        let (r, _) = leave?;
        pivot(t, basis, r, q);
    }
    panic!("textbook simplex did not terminate");
}

/// Random LP with `n` variables in boxes and `m` mixed-relation rows. Most
/// rows are made to hold at a hidden witness point so that feasible and
/// infeasible instances both occur.
pub fn random_lp(rng: &mut ChaCha8Rng, n: usize, m: usize) -> MilpModel {
    let mut model = MilpModel::new();
    let mut witness = Vec::new();
    let vars: Vec<VarId> = (0..n)
        .map(|j| {
            let lo = rng.gen_range(-5..=0) as f64;
            let hi = if rng.gen_bool(0.1) { f64::INFINITY } else { lo + rng.gen_range(1..=10) as f64 };
            witness.push(lo + rng.gen_range(0.0..(hi - lo).min(10.0)));
            model.add_continuous(format!("x{j}"), lo, hi)
        })
        .collect();
    for &v in &vars {
        model.add_objective_term(v, rng.gen_range(-10..=10) as f64 / 2.0);
    }
    for _ in 0..m {
        add_random_row(rng, &mut model, &vars, &witness);
    }
    model
}

pub fn add_random_row(rng: &mut ChaCha8Rng, model: &mut MilpModel, vars: &[VarId], witness: &[f64]) {
    let mut terms: Vec<(VarId, f64)> = Vec::new();
    for &v in vars {
        if rng.gen_bool(0.4) {
            terms.push((v, rng.gen_range(-6..=6) as f64 / 2.0));
        }
    }
    let at_witness: f64 = terms.iter().map(|&(v, a)| a * witness[v.0]).sum();
    let relation = match rng.gen_range(0..10) {
        0 => Relation::Eq,
        1..=5 => Relation::Le,
        _ => Relation::Ge,
    };
    let rhs = if rng.gen_bool(0.93) {
        let slack = rng.gen_range(0..=6) as f64 / 2.0;
        match relation {
            Relation::Le => (at_witness + slack).ceil(),
            Relation::Ge => (at_witness - slack).floor(),
            Relation::Eq => at_witness,
        }
    } else {
        rng.gen_range(-20..=20) as f64 / 2.0
    };
    model.add_constraint(terms, relation, rhs);
}

/// Random MILP with `nb` binaries and `nc` bounded continuous variables.
pub fn random_milp(rng: &mut ChaCha8Rng, nb: usize, nc: usize, m: usize) -> MilpModel {
    let mut model = MilpModel::new();
    let mut vars = Vec::new();
    let mut witness = Vec::new();
    for j in 0..nb {
        vars.push(model.add_binary(format!("b{j}")));
        witness.push(if rng.gen_bool(0.5) { 1.0 } else { 0.0 });
    }
    for j in 0..nc {
        let lo = rng.gen_range(-4..=0) as f64;
        let width = rng.gen_range(1..=8) as f64;
        vars.push(model.add_continuous(format!("x{j}"), lo, lo + width));
        witness.push(lo + rng.gen_range(0.0..width));
    }
    for &v in &vars {
        model.add_objective_term(v, rng.gen_range(-10..=10) as f64 / 2.0);
    }
    for _ in 0..m {
        add_random_row(rng, &mut model, &vars, &witness);
    }
    model
}
