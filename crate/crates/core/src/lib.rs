pub mod analysis;
pub mod error;
pub mod geometry;
pub mod milp;
pub mod pairs;
pub mod planner;
pub mod region_graph;
pub mod scenario;
pub mod transcription;

pub use error::{Error, Result};

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/introduction.md")]
mod book_introduction {}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/geometry.md")]
mod book_geometry {}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/scenarios.md")]
mod book_scenarios {}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/sequences.md")]
mod book_sequences {}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/pairs.md")]
mod book_pairs {}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/milp.md")]
mod book_milp {}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/models.md")]
mod book_models {}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/planning.md")]
mod book_planning {}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/analysis.md")]
mod book_analysis {}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/cli.md")]
mod book_cli {}
