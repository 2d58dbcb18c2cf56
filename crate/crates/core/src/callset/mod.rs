//! Call graph, call-set approximation, rigid type graphs and critical paths.

mod absint;
mod graph;
mod typegraph;

pub use absint::{approximate_call_set, AbsVal, CallPattern, Domain};
pub use graph::{build_call_graph, CallGraph};
pub use typegraph::{
    critical_paths, pattern_to_type_graph, CriticalPath, GraphArc, NodeLabel, RigidTypeGraph,
};
