//! Sparse MILP container shared by the LP engine, the branch-and-bound
//! driver, the brute-force oracle and the LP-file writer.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Index of a variable inside a [`MilpModel`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct VarId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum VarKind {
    Continuous,
    Binary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Variable {
    pub name: String,
    pub kind: VarKind,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

impl Relation {
    pub fn symbol(self) -> &'static str {
        match self {
            Relation::Le => "<=",
            Relation::Ge => ">=",
            Relation::Eq => "=",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Constraint {
    pub name: String,
    pub terms: Vec<(VarId, f64)>,
    pub relation: Relation,
    pub rhs: f64,
}

impl Constraint {
    pub fn activity(&self, values: &[f64]) -> f64 {
        self.terms.iter().map(|&(v, a)| a * values[v.0]).sum()
    }

    /// Amount by which `values` violates this row (0 when satisfied).
    pub fn violation(&self, values: &[f64]) -> f64 {
        let lhs = self.activity(values);
        match self.relation {
            Relation::Le => (lhs - self.rhs).max(0.0),
            Relation::Ge => (self.rhs - lhs).max(0.0),
            Relation::Eq => (lhs - self.rhs).abs(),
        }
    }
}

/// A minimisation problem `min c·x` subject to sparse linear rows and
/// variable bounds, with a subset of variables restricted to {0, 1}.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MilpModel {
    pub variables: Vec<Variable>,
    pub constraints: Vec<Constraint>,
    pub objective: Vec<(VarId, f64)>,
}

impl MilpModel {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_var(&mut self, name: impl Into<String>, kind: VarKind, lower: f64, upper: f64) -> VarId {
        let id = VarId(self.variables.len());
        self.variables.push(Variable {
            name: name.into(),
            kind,
            lower,
            upper,
        });
        id
    }

    pub fn add_continuous(&mut self, name: impl Into<String>, lower: f64, upper: f64) -> VarId {
        self.add_var(name, VarKind::Continuous, lower, upper)
    }

    pub fn add_binary(&mut self, name: impl Into<String>) -> VarId {
        self.add_var(name, VarKind::Binary, 0.0, 1.0)
    }

    /// Adds a row named `c<index>`. Zero coefficients are dropped and
    /// repeated variables are merged.
    pub fn add_constraint(&mut self, terms: Vec<(VarId, f64)>, relation: Relation, rhs: f64) -> usize {
        let name = format!("c{}", self.constraints.len());
        self.add_named_constraint(name, terms, relation, rhs)
    }

    pub fn add_named_constraint(
        &mut self,
        name: impl Into<String>,
        terms: Vec<(VarId, f64)>,
        relation: Relation,
        rhs: f64,
    ) -> usize {
        let mut merged: Vec<(VarId, f64)> = Vec::with_capacity(terms.len());
        for (v, a) in terms {
            match merged.iter_mut().find(|(w, _)| *w == v) {
                Some(slot) => slot.1 += a,
                None => merged.push((v, a)),
            }
        }
        merged.retain(|&(_, a)| a != 0.0);
        self.constraints.push(Constraint {
            name: name.into(),
            terms: merged,
            relation,
            rhs,
        });
        self.constraints.len() - 1
    }

    pub fn add_objective_term(&mut self, var: VarId, coef: f64) {
        match self.objective.iter_mut().find(|(v, _)| *v == var) {
            Some(slot) => slot.1 += coef,
            None => self.objective.push((var, coef)),
        }
    }

    pub fn num_vars(&self) -> usize {
        self.variables.len()
    }

    pub fn num_binaries(&self) -> usize {
        self.variables.iter().filter(|v| v.kind == VarKind::Binary).count()
    }

    pub fn binary_ids(&self) -> Vec<VarId> {
        self.variables
            .iter()
            .enumerate()
            .filter(|(_, v)| v.kind == VarKind::Binary)
            .map(|(i, _)| VarId(i))
            .collect()
    }

    /// Dense objective vector.
    pub fn cost_vector(&self) -> Vec<f64> {
        let mut c = vec![0.0; self.variables.len()];
        for &(v, a) in &self.objective {
            c[v.0] += a;
        }
        c
    }

    pub fn objective_value(&self, values: &[f64]) -> f64 {
        self.objective.iter().map(|&(v, a)| a * values[v.0]).sum()
    }

    /// Largest row or bound violation of `values`, recomputed row by row.
    pub fn max_violation(&self, values: &[f64]) -> f64 {
        let rows = self
            .constraints
            .iter()
            .map(|c| c.violation(values))
            .fold(0.0, f64::max);
        let bounds = self
            .variables
            .iter()
            .zip(values)
            .map(|(v, &x)| (v.lower - x).max(x - v.upper).max(0.0))
            .fold(0.0, f64::max);
        rows.max(bounds)
    }

    /// Checks the structural invariants: binary bounds inside [0, 1],
    /// valid indices, finite coefficients, consistent bounds.
    pub fn validate(&self) -> Result<()> {
        let n = self.variables.len();
        for v in &self.variables {
            if v.lower.is_nan() || v.upper.is_nan() || v.lower > v.upper {
                return Err(Error::InvalidInput(format!(
                    "variable {} has bounds [{}, {}]",
                    v.name, v.lower, v.upper
                )));
            }
            if v.kind == VarKind::Binary && (v.lower < 0.0 || v.upper > 1.0) {
                return Err(Error::InvalidInput(format!(
                    "binary {} has bounds [{}, {}] outside [0, 1]",
                    v.name, v.lower, v.upper
                )));
            }
        }
        for c in &self.constraints {
            if !c.rhs.is_finite() {
                return Err(Error::InvalidInput(format!("row {} has rhs {}", c.name, c.rhs)));
            }
            for &(v, a) in &c.terms {
                if v.0 >= n {
                    return Err(Error::InvalidInput(format!("row {} references x{}", c.name, v.0)));
                }
                if !a.is_finite() {
                    return Err(Error::InvalidInput(format!("row {} has coefficient {}", c.name, a)));
                }
            }
        }
        for &(v, a) in &self.objective {
            if v.0 >= n || !a.is_finite() {
                return Err(Error::InvalidInput(format!("objective term x{} * {}", v.0, a)));
            }
        }
        Ok(())
    }

    /// Copy with every binary relaxed to a continuous variable on the same bounds.
    pub fn relaxed(&self) -> MilpModel {
        let mut m = self.clone();
        for v in &mut m.variables {
            v.kind = VarKind::Continuous;
        }
        m
    }
}
