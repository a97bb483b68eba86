//! Convex polytopes `{x | A x ≤ b}` and the LP-backed queries the planner
//! needs: containment, intersection, Chebyshev centers and boundedness.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::milp::{solve_lp, LpResult, MilpModel, Relation, VarId};

/// Slack granted to every facet when deciding whether two closed polytopes
/// meet.
pub const ADJACENCY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polytope {
    a: Vec<Vec<f64>>,
    b: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    name: Option<String>,
}

impl Polytope {
    /// Builds a polytope and checks that it is nonempty and bounded.
    pub fn new(a: Vec<Vec<f64>>, b: Vec<f64>, name: Option<String>) -> Result<Self> {
        let p = Self::unchecked(a, b, name)?;
        if !p.is_nonempty()? {
            return Err(Error::InfeasibleGeometry(format!("polytope {} is empty", p.label())));
        }
        p.bounding_box()?;
        Ok(p)
    }

    /// Shape checks only; the set may be empty or unbounded.
    pub fn unchecked(a: Vec<Vec<f64>>, b: Vec<f64>, name: Option<String>) -> Result<Self> {
        if a.is_empty() || a.len() != b.len() {
            return Err(Error::InvalidInput(format!(
                "polytope needs matching nonempty A ({} rows) and b ({} entries)",
                a.len(),
                b.len()
            )));
        }
        let dim = a[0].len();
        for (row, &rhs) in a.iter().zip(&b) {
            if row.len() != dim || dim == 0 {
                return Err(Error::InvalidInput("facet rows have inconsistent dimension".into()));
            }
            if row.iter().all(|&v| v == 0.0) {
                return Err(Error::InvalidInput("facet row with all-zero normal".into()));
            }
            if row.iter().chain(std::iter::once(&rhs)).any(|v| !v.is_finite()) {
                return Err(Error::InvalidInput("non-finite facet coefficient".into()));
            }
        }
        Ok(Polytope { a, b, name })
    }

    /// Axis-aligned box `[lo_0, hi_0] × [lo_1, hi_1] × …`.
    pub fn from_box(lo: &[f64], hi: &[f64], name: Option<String>) -> Result<Self> {
        if lo.len() != hi.len() || lo.is_empty() {
            return Err(Error::InvalidInput("box bounds differ in dimension".into()));
        }
        let d = lo.len();
        let mut a = Vec::with_capacity(2 * d);
        let mut b = Vec::with_capacity(2 * d);
        for i in 0..d {
            if !(lo[i] <= hi[i]) {
                return Err(Error::InfeasibleGeometry(format!(
                    "box side {i} has lower {} above upper {}",
                    lo[i], hi[i]
                )));
            }
            let mut e = vec![0.0; d];
            e[i] = -1.0;
            a.push(e.clone());
            b.push(-lo[i]);
            e[i] = 1.0;
            a.push(e);
            b.push(hi[i]);
        }
        Self::unchecked(a, b, name)
    }

    pub fn dim(&self) -> usize {
        self.a[0].len()
    }

    pub fn num_facets(&self) -> usize {
        self.a.len()
    }

    pub fn a(&self) -> &[Vec<f64>] {
        &self.a
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    fn label(&self) -> String {
        self.name.clone().unwrap_or_else(|| "<unnamed>".into())
    }

    /// Recognises the two-facets-per-axis form produced by [`Polytope::from_box`]
    /// and returns `(lo, hi)`.
    pub fn as_box(&self) -> Option<(Vec<f64>, Vec<f64>)> {
        let d = self.dim();
        let mut lo = vec![f64::NEG_INFINITY; d];
        let mut hi = vec![f64::INFINITY; d];
        for (row, &rhs) in self.a.iter().zip(&self.b) {
            let nz: Vec<usize> = (0..d).filter(|&i| row[i] != 0.0).collect();
            if nz.len() != 1 {
                return None;
            }
            let i = nz[0];
            if row[i] > 0.0 {
                hi[i] = hi[i].min(rhs / row[i]);
            } else {
                lo[i] = lo[i].max(rhs / row[i]);
            }
        }
        if lo.iter().chain(&hi).all(|v| v.is_finite()) {
            Some((lo, hi))
        } else {
            None
        }
    }

    /// Stacks the facets of both polytopes.
    pub fn intersection(&self, other: &Polytope) -> Result<Polytope> {
        check_dims(self, other)?;
        let mut a = self.a.clone();
        a.extend(other.a.iter().cloned());
        let mut b = self.b.clone();
        b.extend(other.b.iter().copied());
        Polytope::unchecked(a, b, None)
    }

    /// Moves every facet outward by `eps` in Euclidean distance.
    pub fn inflate(&self, eps: f64) -> Polytope {
        let b = self
            .a
            .iter()
            .zip(&self.b)
            .map(|(row, &rhs)| rhs + eps * norm(row))
            .collect();
        Polytope {
            a: self.a.clone(),
            b,
            name: self.name.clone(),
        }
    }

    fn is_nonempty(&self) -> Result<bool> {
        Ok(!matches!(optimize(&[self], &vec![0.0; self.dim()], 0.0)?, LpResult::Infeasible))
    }

    /// Per-coordinate `(min, max)` found by LP; fails on unbounded sets.
    pub fn bounding_box(&self) -> Result<(Vec<f64>, Vec<f64>)> {
        bounding_box_of(&[self], 0.0, &self.label())
    }

    /// Vertices of a 2-D polytope in counter-clockwise order.
    pub fn vertices_2d(&self) -> Vec<[f64; 2]> {
        if self.dim() != 2 {
            return Vec::new();
        }
        let mut pts: Vec<[f64; 2]> = Vec::new();
        for i in 0..self.a.len() {
            for j in i + 1..self.a.len() {
                let (a1, a2) = (&self.a[i], &self.a[j]);
                let det = a1[0] * a2[1] - a1[1] * a2[0];
                if det.abs() < 1e-12 {
                    continue;
                }
                let x = (self.b[i] * a2[1] - a1[1] * self.b[j]) / det;
                let y = (a1[0] * self.b[j] - self.b[i] * a2[0]) / det;
                if contains_unchecked(self, &[x, y], 1e-9)
                    && !pts.iter().any(|p| (p[0] - x).abs() < 1e-9 && (p[1] - y).abs() < 1e-9)
                {
                    pts.push([x, y]);
                }
            }
        }
        if pts.is_empty() {
            return pts;
        }
        let cx = pts.iter().map(|p| p[0]).sum::<f64>() / pts.len() as f64;
        let cy = pts.iter().map(|p| p[1]).sum::<f64>() / pts.len() as f64;
        pts.sort_by(|p, q| (p[1] - cy).atan2(p[0] - cx).total_cmp(&(q[1] - cy).atan2(q[0] - cx)));
        pts
    }
}

pub(crate) fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn check_dims(p: &Polytope, q: &Polytope) -> Result<()> {
    if p.dim() != q.dim() {
        return Err(Error::InvalidInput(format!(
            "dimension mismatch: {} vs {}",
            p.dim(),
            q.dim()
        )));
    }
    Ok(())
}

fn contains_unchecked(p: &Polytope, x: &[f64], tol: f64) -> bool {
    p.a.iter()
        .zip(&p.b)
        .all(|(row, &rhs)| row.iter().zip(x).map(|(a, v)| a * v).sum::<f64>() <= rhs + tol)
}

/// Minimises `c·x` over the intersection of `sets`, each facet relaxed by `tol`.
fn optimize(sets: &[&Polytope], c: &[f64], tol: f64) -> Result<LpResult> {
    let d = c.len();
    let mut m = MilpModel::new();
    let xs: Vec<VarId> = (0..d)
        .map(|i| m.add_continuous(format!("x{i}"), f64::NEG_INFINITY, f64::INFINITY))
        .collect();
    for (&x, &ci) in xs.iter().zip(c) {
        if ci != 0.0 {
            m.add_objective_term(x, ci);
        }
    }
    for p in sets {
        for (row, &rhs) in p.a.iter().zip(&p.b) {
            m.add_constraint(xs.iter().copied().zip(row.iter().copied()).collect(), Relation::Le, rhs + tol);
        }
    }
    solve_lp(&m)
}

fn bounding_box_of(sets: &[&Polytope], tol: f64, label: &str) -> Result<(Vec<f64>, Vec<f64>)> {
    let d = sets[0].dim();
    let mut lo = vec![0.0; d];
    let mut hi = vec![0.0; d];
    for i in 0..d {
        for (sign, out) in [(1.0, &mut lo), (-1.0, &mut hi)] {
            let mut c = vec![0.0; d];
            c[i] = sign;
            match optimize(sets, &c, tol)? {
                LpResult::Optimal { values, .. } => out[i] = values[i],
                LpResult::Unbounded => {
                    return Err(Error::InvalidInput(format!("polytope {label} is unbounded along axis {i}")));
                }
                LpResult::Infeasible => {
                    return Err(Error::InfeasibleGeometry(format!("polytope {label} is empty")));
                }
            }
        }
    }
    Ok((lo, hi))
}

/// True iff `A x ≤ b + tol` holds row-wise.
pub fn contains(p: &Polytope, x: &[f64], tol: f64) -> Result<bool> {
    if x.len() != p.dim() {
        return Err(Error::InvalidInput(format!(
            "point has dimension {}, polytope {}",
            x.len(),
            p.dim()
        )));
    }
    Ok(contains_unchecked(p, x, tol))
}

/// Minimum of `c·x` over `p`.
pub fn support_min(p: &Polytope, c: &[f64]) -> Result<f64> {
    if c.len() != p.dim() {
        return Err(Error::InvalidInput("direction dimension mismatch".into()));
    }
    match optimize(&[p], c, 0.0)? {
        LpResult::Optimal { objective, .. } => Ok(objective),
        LpResult::Infeasible => Err(Error::InfeasibleGeometry(format!("polytope {} is empty", p.label()))),
        LpResult::Unbounded => Err(Error::InvalidInput(format!("polytope {} is unbounded", p.label()))),
    }
}

/// Whether the closed polytopes share a point, decided by a phase-1 LP.
pub fn intersects(p: &Polytope, q: &Polytope) -> Result<bool> {
    check_dims(p, q)?;
    Ok(!matches!(optimize(&[p, q], &vec![0.0; p.dim()], ADJACENCY_TOL)?, LpResult::Infeasible))
}

/// Center and radius of the largest inscribed ball. When the center is not
/// unique the midpoint of the bounding box of all optimal centers is taken.
pub fn chebyshev_ball(p: &Polytope) -> Result<(Vec<f64>, f64)> {
    let d = p.dim();
    let mut m = MilpModel::new();
    let xs: Vec<VarId> = (0..d)
        .map(|i| m.add_continuous(format!("x{i}"), f64::NEG_INFINITY, f64::INFINITY))
        .collect();
    let r = m.add_continuous("r", 0.0, f64::INFINITY);
    m.add_objective_term(r, -1.0);
    for (row, &rhs) in p.a.iter().zip(&p.b) {
        let mut terms: Vec<(VarId, f64)> = xs.iter().copied().zip(row.iter().copied()).collect();
        terms.push((r, norm(row)));
        m.add_constraint(terms, Relation::Le, rhs);
    }
    let radius = match solve_lp(&m)? {
        LpResult::Optimal { values, .. } => values[r.0].max(0.0),
        LpResult::Infeasible => {
            return Err(Error::InfeasibleGeometry(format!("polytope {} is empty", p.label())));
        }
        LpResult::Unbounded => {
            return Err(Error::InvalidInput(format!("polytope {} is unbounded", p.label())));
        }
    };
    let shrunk = Polytope {
        a: p.a.clone(),
        b: p.a.iter().zip(&p.b).map(|(row, &rhs)| rhs - radius * norm(row)).collect(),
        name: None,
    };
    let (lo, hi) = bounding_box_of(&[&shrunk], 1e-9, &p.label())?;
    let center = lo.iter().zip(&hi).map(|(l, h)| 0.5 * (l + h)).collect();
    Ok((center, radius))
}

pub fn chebyshev_center(p: &Polytope) -> Result<Vec<f64>> {
    Ok(chebyshev_ball(p)?.0)
}

/// `L` unit directions with the same separation threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirectionSet {
    pub directions: Vec<[f64; 2]>,
    pub thresholds: Vec<f64>,
}

impl DirectionSet {
    pub fn len(&self) -> usize {
        self.directions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.directions.is_empty()
    }
}

/// Directions at angles `2πl/L`, `l = 0..L`, each with threshold `d_sep`.
pub fn sample_directions(l: usize, d_sep: f64) -> Result<DirectionSet> {
    if l < 3 {
        return Err(Error::InvalidInput(format!("need at least 3 directions, got {l}")));
    }
    if !(d_sep > 0.0) || !d_sep.is_finite() {
        return Err(Error::InvalidInput(format!("separation threshold {d_sep} must be positive")));
    }
    let clean = |v: f64| if v.abs() < 1e-12 { 0.0 } else { v };
    let directions = (0..l)
        .map(|k| {
            let theta = 2.0 * PI * k as f64 / l as f64;
            [clean(theta.cos()), clean(theta.sin())]
        })
        .collect();
    Ok(DirectionSet {
        directions,
        thresholds: vec![d_sep; l],
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bx(x0: f64, x1: f64, y0: f64, y1: f64) -> Polytope {
        Polytope::from_box(&[x0, y0], &[x1, y1], None).unwrap()
    }

    #[test]
    fn containment_on_band_regions() {
        let r0 = bx(0.0, 2.66, 0.0, 10.0);
        assert!(contains(&r0, &[1.0, 1.0], 0.0).unwrap());
        assert!(!contains(&r0, &[3.0, 1.0], 0.0).unwrap());
        let r1 = bx(3.66, 6.33, 0.0, 10.0);
        assert!(contains(&r1, &[3.66, 0.0], 0.0).unwrap());
        assert!(contains(&r1, &[1.0], 0.0).is_err());
    }

    #[test]
    fn band_intersections() {
        let r0 = bx(0.0, 2.66, 0.0, 10.0);
        let r1 = bx(3.66, 6.33, 0.0, 10.0);
        let r3 = bx(0.0, 10.0, 0.0, 2.66);
        assert!(intersects(&r0, &r3).unwrap());
        assert!(!intersects(&r0, &r1).unwrap());
        assert!(intersects(&r0, &r0).unwrap());
    }

    #[test]
    fn touching_boxes_are_adjacent() {
        assert!(intersects(&bx(0.0, 1.0, 0.0, 1.0), &bx(1.0, 2.0, 0.0, 1.0)).unwrap());
        assert!(!intersects(&bx(0.0, 1.0, 0.0, 1.0), &bx(1.0 + 1e-6, 2.0, 0.0, 1.0)).unwrap());
    }

    #[test]
    fn chebyshev_centers() {
        let c = chebyshev_center(&bx(0.0, 1.0, 0.0, 1.0)).unwrap();
        assert!((c[0] - 0.5).abs() < 1e-9 && (c[1] - 0.5).abs() < 1e-9);
        let c = chebyshev_center(&bx(0.0, 2.66, 0.0, 10.0)).unwrap();
        assert!((c[0] - 1.33).abs() < 1e-6 && (c[1] - 5.0).abs() < 1e-6);
        let (c, r) = chebyshev_ball(&bx(0.0, 0.0, 0.0, 1.0)).unwrap();
        assert_eq!(r, 0.0);
        assert!(c[0].abs() < 1e-9 && (c[1] - 0.5).abs() < 1e-6);
    }

    #[test]
    fn rejects_unbounded_and_empty() {
        let half = Polytope::new(vec![vec![1.0, 0.0]], vec![1.0], None);
        assert!(half.is_err());
        let empty = Polytope::new(vec![vec![1.0, 0.0], vec![-1.0, 0.0]], vec![0.0, -1.0], None);
        assert!(matches!(empty, Err(Error::InfeasibleGeometry(_))));
        assert!(Polytope::new(vec![vec![0.0, 0.0]], vec![1.0], None).is_err());
    }

    #[test]
    fn support_of_a_box() {
        let p = bx(1.0, 2.0, 3.0, 5.0);
        assert!((support_min(&p, &[1.0, 1.0]).unwrap() - 4.0).abs() < 1e-12);
        assert!((support_min(&p, &[0.0, -1.0]).unwrap() + 5.0).abs() < 1e-12);
    }

    #[test]
    fn eight_directions() {
        let d = sample_directions(8, 1.0).unwrap();
        assert_eq!(d.directions[0], [1.0, 0.0]);
        assert_eq!(d.directions[2], [0.0, 1.0]);
        let s = 2f64.sqrt() / 2.0;
        assert!((d.directions[1][0] - s).abs() < 1e-15 && (d.directions[1][1] - s).abs() < 1e-15);
        let d4 = sample_directions(4, 1.0).unwrap();
        assert_eq!(d4.directions, vec![[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0], [0.0, -1.0]]);
        assert!(sample_directions(2, 1.0).is_err());
    }

    #[test]
    fn box_vertices_are_counter_clockwise() {
        let v = bx(0.0, 2.0, 0.0, 1.0).vertices_2d();
        assert_eq!(v, vec![[0.0, 0.0], [2.0, 0.0], [2.0, 1.0], [0.0, 1.0]]);
        assert_eq!(bx(0.0, 2.0, 0.0, 1.0).as_box(), Some((vec![0.0, 0.0], vec![2.0, 1.0])));
    }
}
