//! Counting total orders that extend a set of precedence constraints.

use num_bigint::BigInt;
use num_rational::BigRational;

use super::ExactError;

/// Largest universe accepted by the enumerating counter.
pub const MAX_ENUM_UNIVERSE: usize = 12;
/// Largest universe accepted by the subset dynamic program.
pub const MAX_DP_UNIVERSE: usize = 20;

/// Pairs `(a, b)` over `0..universe`, each meaning `a` precedes `b`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ConstraintSet {
    pairs: Vec<(usize, usize)>,
}

impl ConstraintSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (usize, usize)>) -> Self {
        ConstraintSet {
            pairs: pairs.into_iter().collect(),
        }
    }

    pub fn push(&mut self, before: usize, after: usize) {
        self.pairs.push((before, after));
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn truncate(&mut self, len: usize) {
        self.pairs.truncate(len);
    }

    pub fn union(&self, other: &ConstraintSet) -> ConstraintSet {
        let mut pairs = self.pairs.clone();
        pairs.extend_from_slice(&other.pairs);
        ConstraintSet { pairs }
    }

    /// False when the relation has a cycle, so no total order extends it.
    pub fn is_consistent(&self, universe: usize) -> bool {
        match self.predecessor_masks(universe) {
            Ok(preds) => {
                let mut placed = 0u32;
                for _ in 0..universe {
                    match (0..universe).find(|&x| placed & (1 << x) == 0 && preds[x] & !placed == 0) {
                        Some(x) => placed |= 1 << x,
                        None => return false,
                    }
                }
                true
            }
            Err(_) => false,
        }
    }

    fn predecessor_masks(&self, universe: usize) -> Result<Vec<u32>, ExactError> {
        let mut preds = vec![0u32; universe];
        for &(a, b) in &self.pairs {
            let bad = a.max(b);
            if bad >= universe {
                return Err(ExactError::ElementOutOfRange {
                    element: bad,
                    universe,
                });
            }
            preds[b] |= 1 << a;
        }
        Ok(preds)
    }
}

/// Counts linear extensions by enumerating them one at a time.
pub fn count_linear_extensions(universe: usize, constraints: &ConstraintSet) -> Result<u64, ExactError> {
    count_linear_extensions_bounded(universe, constraints, MAX_ENUM_UNIVERSE)
}

pub fn count_linear_extensions_bounded(
    universe: usize,
    constraints: &ConstraintSet,
    bound: usize,
) -> Result<u64, ExactError> {
    // masks are u32
    let bound = bound.min(31);
    if universe > bound {
        return Err(ExactError::UniverseTooLarge { universe, bound });
    }
    let preds = constraints.predecessor_masks(universe)?;
    let full = if universe == 0 {
        0
    } else {
        u32::MAX >> (32 - universe)
    };
    fn extend(placed: u32, full: u32, preds: &[u32]) -> u64 {
        if placed == full {
            return 1;
        }
        let mut count = 0;
        for (x, &p) in preds.iter().enumerate() {
            if placed & (1 << x) == 0 && p & !placed == 0 {
                count += extend(placed | (1 << x), full, preds);
            }
        }
        count
    }
    Ok(extend(0, full, &preds))
}

/// Counts linear extensions with a dynamic program over placed prefixes.
pub fn count_linear_extensions_dp(universe: usize, constraints: &ConstraintSet) -> Result<u64, ExactError> {
    if universe > MAX_DP_UNIVERSE {
        return Err(ExactError::UniverseTooLarge {
            universe,
            bound: MAX_DP_UNIVERSE,
        });
    }
    let preds = constraints.predecessor_masks(universe)?;
    let mut ways = vec![0u64; 1 << universe];
    ways[0] = 1;
    for mask in 0..ways.len() {
        let w = ways[mask];
        if w == 0 {
            continue;
        }
        for (x, &p) in preds.iter().enumerate() {
            if mask & (1 << x) == 0 && (p as usize) & !mask == 0 {
                ways[mask | (1 << x)] += w;
            }
        }
    }
    Ok(ways[ways.len() - 1])
}

/// Probability that a uniformly random order satisfying `given` also
/// satisfies `query`.
pub fn conditional_order_probability(
    universe: usize,
    given: &ConstraintSet,
    query: &ConstraintSet,
) -> Result<BigRational, ExactError> {
    let total = count_linear_extensions(universe, given)?;
    if total == 0 {
        return Err(ExactError::ConditioningOnEmptySet);
    }
    let hits = count_linear_extensions(universe, &given.union(query))?;
    Ok(BigRational::new(BigInt::from(hits), BigInt::from(total)))
}
