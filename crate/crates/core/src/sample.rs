//! Seeded random instances for property checks and the CLI.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::lattice::{box_ball, HalfInt, LatticePoint, Parity, SparseFunction};
use crate::rearrange::{slot, LineFunction};

/// A random function on `Z^dim` with `support` points drawn without
/// replacement from the box of radius `radius`, values in `[0.1, 10)`.
///
/// With `distinct = false` values are drawn from a short list so that ties
/// are frequent.
pub fn random_function<R: Rng>(
    rng: &mut R,
    dim: usize,
    support: usize,
    radius: usize,
    distinct: bool,
) -> SparseFunction {
    let mut cells: Vec<LatticePoint> = box_ball(radius, dim).into_iter().collect();
    assert!(
        support <= cells.len(),
        "box too small for the requested support"
    );
    cells.shuffle(rng);
    let entries = cells.into_iter().take(support).map(|x| {
        let v = if distinct {
            rng.random_range(0.1..10.0)
        } else {
            [0.5, 1.0, 2.0, 3.0][rng.random_range(0..4)]
        };
        (x, v)
    });
    SparseFunction::from_entries(dim, entries).expect("distinct points, positive values")
}

/// `u` together with a random `v <= u` pointwise.
pub fn random_nested_pair<R: Rng>(
    rng: &mut R,
    dim: usize,
    support: usize,
    radius: usize,
) -> (SparseFunction, SparseFunction) {
    let distinct = rng.random_bool(0.5);
    let u = random_function(rng, dim, support, radius, distinct);
    let v = SparseFunction::from_nonnegative(
        dim,
        u.iter().map(|(x, ux)| {
            let keep = rng.random_range(0.0..1.0);
            let v = if keep < 0.2 {
                0.0
            } else if keep < 0.4 {
                ux
            } else {
                ux * keep
            };
            (x.clone(), v)
        }),
    )
    .expect("nonnegative");
    (v, u)
}

/// A random 1-D function with at most `max_support` points inside
/// `[-span, span]`.
pub fn random_line_function<R: Rng>(
    rng: &mut R,
    parity: Parity,
    max_support: usize,
    span: i64,
) -> LineFunction {
    let n = rng.random_range(0..=max_support);
    let offset = match parity {
        Parity::Integer => 0,
        Parity::HalfOdd => 1,
    };
    let mut positions: Vec<i64> = (-span..=span).map(|k| 2 * k + offset).collect();
    positions.shuffle(rng);
    let mut entries = BTreeMap::new();
    for p in positions.into_iter().take(n) {
        let v = if rng.random_bool(0.3) {
            rng.random_range(1..4) as f64
        } else {
            rng.random_range(0.1..10.0)
        };
        entries.insert(HalfInt(p), v);
    }
    LineFunction::from_entries(parity, entries).expect("valid line function")
}

/// A Schwarz-symmetric function on `Z` with the given values (sorted
/// non-increasing internally).
pub fn symmetric_line_function(parity: Parity, values: &[f64]) -> LineFunction {
    let mut v = values.to_vec();
    v.sort_by(|a, b| b.total_cmp(a));
    LineFunction::from_entries(
        parity,
        v.iter().enumerate().map(|(k, &x)| (slot(parity, k), x)),
    )
    .expect("valid line function")
}
