//! Runs the counterexample search and writes the result in the instance
//! file format, e.g.
//!
//!     cargo run --release -p random-facet --example derive_fixture -- crates/core/fixtures/errata-cube.instance

use std::time::Instant;

use random_facet::instances::errata::{search_errata_instance, SEARCH_MAX_COST};
use random_facet::instances::{save_instance, serialize_instance};

fn main() {
    let started = Instant::now();
    let found = search_errata_instance(SEARCH_MAX_COST).expect("search failed");
    eprintln!(
        "found after {} candidates in {:.2?}",
        found.examined,
        started.elapsed()
    );
    match std::env::args().nth(1) {
        Some(path) => save_instance(&found.instance, &path).expect("write failed"),
        None => print!("{}", serialize_instance(&found.instance)),
    }
}
