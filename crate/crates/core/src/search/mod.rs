//! Discrete phase optimization: objectives, local search and the filled-function global search.

mod global;
mod local;
mod objective;

pub use global::{
    complexity_bound, filled_from_distance, filled_shape, filled_value, global_search, optimize_distributed, OptResult,
    SearchBudget, TracePoint,
};
pub use local::{descent_cost, local_search, neighbors, Descent};
pub use objective::{check_config, Counting, FnObjective, GainObjective, Metric, Objective, TableObjective};
