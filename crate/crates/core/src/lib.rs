//! Random-Facet and Random-Facet* for single-target shortest paths.
//!
//! Both algorithms remove a facet (a non-tree edge) from the active edge set,
//! solve the smaller problem recursively, and pivot the removed edge in if it
//! improves the returned tree. Random-Facet picks the facet uniformly at
//! random at every call; Random-Facet* picks the first available facet of a
//! single random permutation. The crate runs both, computes their exact
//! expected pivot counts, and shows on a three-vertex instance that the two
//! expectations differ in both directions.

pub mod exact;
pub mod facet;
pub mod graph;
pub mod instances;
pub mod montecarlo;

pub use exact::{
    comptree, expected_pivots_rf, expected_pivots_rf_star, fraction, CompTree, ExactError, Rational, Rule,
};
pub use facet::{run_random_facet, run_random_facet_star, Permutation, RunResult};
pub use graph::{
    improves, optimal_tree, pivot, tree_distances, validate_instance, DistanceMap, EdgeId, EdgeSubset,
    GraphError, Instance, RawInstance, TreePolicy,
};
pub use instances::{derive_errata_instance, errata_fixture, InstanceError};
pub use montecarlo::{estimate_expected_pivots, Estimate};
