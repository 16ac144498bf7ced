//! The three-vertex cube instance on which Random-Facet and Random-Facet*
//! have different expected pivot counts, in both directions.
//!
//! Only the qualitative shape of the instance is fixed up front: vertices
//! `x, y, z` each have a `0` edge of cost 0 and a `1` edge of positive cost.
//! Heads and costs are found by exhaustive search for the first candidate
//! that is generic, has optimum `000`, has exactly three improving paths
//! from `001` and from `111` to `000`, and has the four target expectations
//! `f(001) = 7/3`, `f*(001) = 29/12`, `f(111) = 11/3`, `f*(111) = 43/12`.
//!
//! Search order: head assignments first, then costs, both ascending. Each of
//! the six edges `x0, x1, y0, y1, z0, z1` picks its head from `t, x, y, z`
//! minus its own tail (3 options, `x0` most significant), and the costs
//! `(c(x1), c(y1), c(z1))` run lexicographically over `1..=8`. Head
//! assignments whose graph has a cycle are not cube shaped and are skipped.

use num_rational::BigRational;

use super::{genericity_check, orientation_view, InstanceError};
use crate::exact::{expected_pivots_rf, expected_pivots_rf_star, Rational};
use crate::graph::{Instance, RawInstance};

pub const ERRATA_FIXTURE: &str = include_str!("../../fixtures/errata-cube.instance");

pub const SEARCH_MAX_COST: i64 = 8;

const AXES: [&str; 3] = ["x", "y", "z"];
const VERTICES: [&str; 4] = ["t", "x", "y", "z"];

/// A fraction as `(numerator, denominator)`.
pub type Ratio = (i64, i64);

/// Expected pivot counts the instance must reproduce, keyed by start tree:
/// `(start, f, f*)`.
pub const TARGET_VALUES: [(&str, Ratio, Ratio); 2] = [("001", (7, 3), (29, 12)), ("111", (11, 3), (43, 12))];

pub fn rational(pair: Ratio) -> Rational {
    BigRational::new(pair.0.into(), pair.1.into())
}

pub fn errata_fixture() -> Result<Instance, InstanceError> {
    super::read_instance(ERRATA_FIXTURE)
}

#[derive(Debug, Clone)]
pub struct ErrataSearch {
    pub instance: Instance,
    /// Candidates visited, including the returned one.
    pub examined: usize,
}

pub fn derive_errata_instance() -> Result<Instance, InstanceError> {
    search_errata_instance(SEARCH_MAX_COST).map(|s| s.instance)
}

pub fn search_errata_instance(max_cost: i64) -> Result<ErrataSearch, InstanceError> {
    let mut examined = 0;
    for code in 0..3usize.pow(6) {
        let heads = decode_heads(code);
        for c0 in 1..=max_cost {
            for c1 in 1..=max_cost {
                for c2 in 1..=max_cost {
                    examined += 1;
                    let raw = candidate(heads, [c0, c1, c2]);
                    if let Some(instance) = accept(raw)? {
                        return Ok(ErrataSearch { instance, examined });
                    }
                }
            }
        }
    }
    Err(InstanceError::SearchExhausted(examined))
}

/// Head vertex index (into `t, x, y, z`) of each of the six edges.
fn decode_heads(mut code: usize) -> [usize; 6] {
    let mut heads = [0; 6];
    for slot in (0..6).rev() {
        let tail = slot / 2 + 1;
        let options: Vec<usize> = (0..4).filter(|&v| v != tail).collect();
        heads[slot] = options[code % 3];
        code /= 3;
    }
    heads
}

pub fn candidate(heads: [usize; 6], costs: [i64; 3]) -> RawInstance {
    let mut raw = RawInstance::new("t");
    for (axis, name) in AXES.iter().enumerate() {
        raw = raw.edge(*name, VERTICES[heads[2 * axis]], 0).edge(
            *name,
            VERTICES[heads[2 * axis + 1]],
            costs[axis],
        );
    }
    raw
}

/// Checks the errata properties, cheapest first. `Ok(None)` means the
/// candidate does not qualify.
pub fn accept(raw: RawInstance) -> Result<Option<Instance>, InstanceError> {
    let Ok(inst) = Instance::validate(raw) else {
        return Ok(None);
    };
    let Ok(view) = orientation_view(&inst) else {
        return Ok(None);
    };
    let enc = &view.encoding;
    let sink = enc.parse("000").unwrap();
    if view.sink() != Some(sink) || !view.is_acyclic() {
        return Ok(None);
    }
    for (start, _, _) in TARGET_VALUES {
        if view.paths(enc.parse(start).unwrap(), sink).len() != 3 {
            return Ok(None);
        }
    }
    if !genericity_check(&inst)? {
        return Ok(None);
    }
    let full = inst.full_subset();
    for (start, f, _) in TARGET_VALUES {
        let b = enc.decode(&inst, start).unwrap();
        if expected_pivots_rf(&inst, &full, &b)? != rational(f) {
            return Ok(None);
        }
    }
    for (start, _, f_star) in TARGET_VALUES {
        let b = enc.decode(&inst, start).unwrap();
        if expected_pivots_rf_star(&inst, &full, &b)? != rational(f_star) {
            return Ok(None);
        }
    }
    Ok(Some(inst))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::serialize_instance;

    #[test]
    fn head_codes_cover_every_assignment_once() {
        let mut seen = std::collections::HashSet::new();
        for code in 0..729 {
            let heads = decode_heads(code);
            for (slot, &h) in heads.iter().enumerate() {
                assert_ne!(h, slot / 2 + 1);
            }
            assert!(seen.insert(heads));
        }
        assert_eq!(decode_heads(0), [0, 0, 0, 0, 0, 0]);
    }

    #[test]
    fn fixture_parses_and_is_accepted() {
        let inst = errata_fixture().unwrap();
        assert!(accept(inst.to_raw()).unwrap().is_some());
    }

    #[test]
    fn search_reproduces_fixture() {
        let found = derive_errata_instance().unwrap();
        let fixture = errata_fixture().unwrap();
        assert_eq!(serialize_instance(&found), serialize_instance(&fixture));
    }
}
