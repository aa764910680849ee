//! Rearrangement operators: the 1-D rearrangement on `Z` and `Z + 1/2`,
//! polarization, one-step rearrangements along a direction and the iterated
//! Schwarz rearrangement on `Z^d`.

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lattice::{
    direction_set, line_of, point_on_line, Direction, HalfInt, LatticePoint, LineKey, Parity,
    SparseFunction,
};

/// Lines are rearranged in parallel only when there are at least this many.
const PARALLEL_LINES: usize = 512;

/// A finitely supported positive function on `Z` or on `Z + 1/2`.
#[derive(Clone, PartialEq, Debug)]
pub struct LineFunction {
    parity: Parity,
    entries: BTreeMap<HalfInt, f64>,
}

impl LineFunction {
    pub fn new(parity: Parity) -> Self {
        LineFunction {
            parity,
            entries: BTreeMap::new(),
        }
    }

    /// Builds from `(position, value)` pairs; zero values are dropped.
    pub fn from_entries<I>(parity: Parity, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (HalfInt, f64)>,
    {
        let mut f = LineFunction::new(parity);
        for (pos, v) in entries {
            if pos.parity() != parity {
                return Err(Error::InvalidParameter(format!(
                    "position {pos} does not have parity {parity:?}"
                )));
            }
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::NonPositiveValue(v));
            }
            if v > 0.0 && f.entries.insert(pos, v).is_some() {
                return Err(Error::DuplicatePoint(pos.to_string()));
            }
        }
        Ok(f)
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    pub fn get(&self, pos: HalfInt) -> f64 {
        self.entries.get(&pos).copied().unwrap_or(0.0)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (HalfInt, f64)> + '_ {
        self.entries.iter().map(|(&p, &v)| (p, v))
    }

    /// Values sorted non-increasing.
    pub fn sorted_values(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.entries.values().copied().collect();
        v.sort_by(|a, b| b.total_cmp(a));
        v
    }
}

/// Position of the `k`-th largest value (0-based) after 1-D rearrangement.
///
/// On `Z` the order is `0, 1, -1, 2, -2, ...`; on `Z + 1/2` it is
/// `1/2, -1/2, 3/2, -3/2, ...`.
pub fn slot(parity: Parity, k: usize) -> HalfInt {
    let k = k as i64;
    match parity {
        Parity::Integer => {
            if k % 2 == 1 {
                HalfInt::from_int((k + 1) / 2)
            } else {
                HalfInt::from_int(-k / 2)
            }
        }
        Parity::HalfOdd => {
            if k % 2 == 0 {
                HalfInt(k + 1)
            } else {
                HalfInt(-k)
            }
        }
    }
}

fn place_sorted(parity: Parity, values: &[f64]) -> impl Iterator<Item = (HalfInt, f64)> + '_ {
    values
        .iter()
        .enumerate()
        .map(move |(k, &v)| (slot(parity, k), v))
}

/// The 1-D Schwarz rearrangement.
pub fn rearrange_line(f: &LineFunction) -> LineFunction {
    LineFunction {
        parity: f.parity,
        entries: place_sorted(f.parity, &f.sorted_values()).collect(),
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Side {
    Left,
    Right,
}

/// The open half-line `(a/2, ∞)` or `(-∞, a/2)` for an integer `a`.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct HalfLine {
    /// Twice the boundary point.
    pub boundary: i64,
    pub side: Side,
}

impl HalfLine {
    /// `(0, ∞)`.
    pub const POSITIVE: HalfLine = HalfLine {
        boundary: 0,
        side: Side::Right,
    };
    /// `(-∞, 1/2)`.
    pub const BELOW_HALF: HalfLine = HalfLine {
        boundary: 1,
        side: Side::Left,
    };

    /// Reflection `x -> a - x` through the boundary.
    pub fn reflect(&self, pos: HalfInt) -> HalfInt {
        HalfInt(2 * self.boundary - pos.0)
    }

    pub fn contains(&self, pos: HalfInt) -> bool {
        match self.side {
            Side::Right => pos.0 > self.boundary,
            Side::Left => pos.0 < self.boundary,
        }
    }
}

/// Polarization with respect to `h`: the larger value of each reflection
/// pair goes into `h`, the smaller one outside (including the boundary).
///
/// The reflection `x -> a - x` has an integer `a`, so it always preserves the
/// position lattice of `f`.
pub fn polarize(f: &LineFunction, h: HalfLine) -> LineFunction {
    let mut entries = BTreeMap::new();
    for pos in f.entries.keys().flat_map(|&p| [p, h.reflect(p)]) {
        if entries.contains_key(&pos) {
            continue;
        }
        let (a, b) = (f.get(pos), f.get(h.reflect(pos)));
        let v = if h.contains(pos) { a.max(b) } else { a.min(b) };
        if v > 0.0 {
            entries.insert(pos, v);
        }
    }
    LineFunction {
        parity: f.parity,
        entries,
    }
}

/// `T f = (f^{H_-})^{H_+}` with `H_- = (-∞, 1/2)` and `H_+ = (0, ∞)`.
pub fn two_point_t(f: &LineFunction) -> LineFunction {
    polarize(&polarize(f, HalfLine::BELOW_HALF), HalfLine::POSITIVE)
}

/// Restrictions of `u` to the lines parallel to `e`, in key order.
pub fn lines(u: &SparseFunction, e: Direction) -> Result<BTreeMap<LineKey, LineFunction>> {
    let mut out: BTreeMap<LineKey, LineFunction> = BTreeMap::new();
    for (x, v) in u.iter() {
        let (key, pos) = line_of(x, e)?;
        let parity = key.parity;
        out.entry(key)
            .or_insert_with(|| LineFunction::new(parity))
            .entries
            .insert(pos, v);
    }
    Ok(out)
}

fn rearranged_line_points(key: &LineKey, f: &LineFunction) -> Vec<(LatticePoint, f64)> {
    place_sorted(key.parity, &f.sorted_values())
        .map(|(pos, v)| (point_on_line(key, pos).expect("slot has line parity"), v))
        .collect()
}

/// `R_e u`: the 1-D rearrangement applied on every line parallel to `e`.
pub fn one_step(u: &SparseFunction, e: Direction) -> Result<SparseFunction> {
    e.validate(u.dim())?;
    let by_line = lines(u, e)?;
    let entries: BTreeMap<LatticePoint, f64> = if by_line.len() >= PARALLEL_LINES {
        let items: Vec<_> = by_line.iter().collect();
        items
            .par_iter()
            .map(|(k, f)| rearranged_line_points(k, f))
            .collect::<Vec<_>>()
            .into_iter()
            .flatten()
            .collect()
    } else {
        by_line
            .iter()
            .flat_map(|(k, f)| rearranged_line_points(k, f))
            .collect()
    };
    Ok(SparseFunction::from_map_unchecked(u.dim(), entries))
}

/// Default cycle budget `10 (|supp u| + d^2)`.
pub fn default_max_cycles(u: &SparseFunction) -> usize {
    10 * (u.len() + u.dim() * u.dim())
}

/// Result of the iterated rearrangement.
#[derive(Clone, Debug)]
pub struct Rearranged {
    pub function: SparseFunction,
    /// Full cycles applied, including the final one that changed nothing.
    pub cycles: usize,
}

/// Iterates full cycles of one-step rearrangements in the order `cycle`
/// until a whole cycle leaves the function unchanged.
///
/// `observer` is called after every one-step rearrangement with the running
/// step count (from 1), the direction and the current iterate.
pub fn schwarz_iterate<F>(
    u: &SparseFunction,
    cycle: &[Direction],
    max_cycles: usize,
    mut observer: F,
) -> Result<Rearranged>
where
    F: FnMut(usize, Direction, &SparseFunction),
{
    check_cycle(cycle, u.dim())?;
    let mut cur = u.clone();
    let mut step = 0;
    for c in 1..=max_cycles {
        let start = cur.clone();
        for &e in cycle {
            cur = one_step(&cur, e)?;
            step += 1;
            observer(step, e, &cur);
        }
        if cur == start {
            return Ok(Rearranged {
                function: cur,
                cycles: c,
            });
        }
    }
    Err(Error::MaxCyclesExceeded {
        cycles: max_cycles,
        last: Box::new(cur),
    })
}

fn check_cycle(cycle: &[Direction], dim: usize) -> Result<()> {
    let mut want = direction_set(dim)?;
    let mut got = cycle.to_vec();
    want.sort();
    got.sort();
    if want != got {
        return Err(Error::NotAPermutation(dim));
    }
    Ok(())
}

/// The Schwarz rearrangement `u*` with the canonical direction order.
pub fn schwarz_rearrange(u: &SparseFunction, max_cycles: usize) -> Result<SparseFunction> {
    let cycle = direction_set(u.dim())?;
    Ok(schwarz_iterate(u, &cycle, max_cycles, |_, _, _| {})?.function)
}

/// [`schwarz_rearrange`] with the default cycle budget.
pub fn rearranged(u: &SparseFunction) -> Result<SparseFunction> {
    schwarz_rearrange(u, default_max_cycles(u))
}

/// The same iteration with a user-supplied order, which must be a
/// permutation of the direction set.
pub fn schwarz_rearrange_alt_order(
    u: &SparseFunction,
    cycle: &[Direction],
    max_cycles: usize,
) -> Result<SparseFunction> {
    Ok(schwarz_iterate(u, cycle, max_cycles, |_, _, _| {})?.function)
}

/// Whether `R_e u = u` for every direction `e`.
pub fn is_schwarz_symmetric(u: &SparseFunction) -> bool {
    direction_set(u.dim())
        .expect("function dimension is positive")
        .into_iter()
        .all(|e| {
            lines(u, e).expect("valid direction").iter().all(|(k, f)| {
                f.sorted_values()
                    .iter()
                    .enumerate()
                    .all(|(i, &v)| f.get(slot(k.parity, i)) == v)
            })
        })
}

/// Radii `(L1, L2)` with `V◇_{L1} ⊆ supp u* ⊆ V□_{L2}` for `|supp u| = n` on
/// `Z^2`: `L1 = ⌊(√n - 5)/2⌋`, `L2 = ⌈√(n/2)⌉ + 2`. Computed in exact
/// integer arithmetic; `L1` is negative for `n < 25`.
pub fn support_sandwich_bounds(n: u64) -> (i64, i64) {
    let r = n.isqrt() as i64;
    let inner = (r - 5).div_euclid(2);
    let mut m = (n / 2).isqrt();
    while 2 * m * m < n {
        m += 1;
    }
    (inner, m as i64 + 2)
}
