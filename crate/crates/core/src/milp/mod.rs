//! Mixed-integer linear programming: model container, simplex, branch-and-bound,
//! a brute-force reference solver and an LP-file writer.

mod bnb;
mod brute;
mod lp;
mod lp_format;
mod model;
mod propagate;
mod simplex;

pub use bnb::{branch_and_bound, root_feasible, solve_milp, SolveOptions, SolveOutcome, SolveStatus, INTEGRALITY_TOL};
pub use brute::{brute_force_solve, BRUTE_FORCE_LIMIT};
pub use lp::{solve_lp, LpResult};
pub use lp_format::{export_lp, format_number, to_lp_string};
pub use model::{Constraint, MilpModel, Relation, VarId, VarKind, Variable};
