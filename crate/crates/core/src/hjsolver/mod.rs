//! Grid-based reach-avoid solver for the safety game.

pub mod game;
pub mod grid;
pub mod solver;
pub mod table_io;

pub use game::{
    control_search, gust_sensitivity, h_fn, hamiltonian, l_fn, optimal_control, optimal_disturbance, ControlGrid,
    ControlGridSpec, Game, GameConfig, SafetyGame, SafetyNode,
};
pub use grid::{brs_query, costate_at, Axis, ControlTable, Costate, Grid7, GriddedValueFunction, NDIM};
pub use table_io::{load_controls, load_value, save_controls, save_value};
pub use solver::{lf_bounds, qvi_step, solve_brs, terminal_value, BrsSolution, LfBounds, SolverConfig};

use crate::plant::PlantError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SolveError {
    #[error("invalid grid: {0}")]
    Grid(String),
    #[error("{axis} = {value} lies outside the grid")]
    OutOfBounds { axis: &'static str, value: f64 },
    #[error("model evaluation failed at node {index}: {source}")]
    Node { index: usize, source: PlantError },
    #[error("time step {dt} exceeds the CFL limit {limit}")]
    Cfl { dt: f64, limit: f64 },
    #[error("value function diverged at step {step}")]
    Divergence { step: usize },
    #[error("table format: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl SolveError {
    /// Attach a node index to a model evaluation error.
    pub fn at(self, index: usize) -> Self {
        match self {
            SolveError::Node { source, .. } => SolveError::Node { index, source },
            e => e,
        }
    }
}
