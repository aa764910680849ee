//! Lattice geometry of `Z^d` and finitely supported nonnegative functions on it.
//!
//! Points are integer vectors, the graph structure is the nearest-neighbour
//! one (`x ~ y` iff `|x - y|_1 = 1`). Positions along lattice lines are kept
//! as doubled integers ([`HalfInt`]) so that both `Z` and `Z + 1/2` are exact.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use itertools::Itertools;
use smallvec::SmallVec;

use crate::error::{Error, Result};

pub(crate) type Coords = SmallVec<[i64; 4]>;

/// A vertex of the lattice graph `Z^d`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LatticePoint(Coords);

impl LatticePoint {
    pub fn new(coords: &[i64]) -> Self {
        LatticePoint(Coords::from_slice(coords))
    }

    pub fn origin(dim: usize) -> Self {
        LatticePoint(smallvec::smallvec![0; dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[i64] {
        &self.0
    }

    pub fn l1_norm(&self) -> i64 {
        self.0.iter().map(|c| c.abs()).sum()
    }

    pub fn linf_norm(&self) -> i64 {
        self.0.iter().map(|c| c.abs()).max().unwrap_or(0)
    }

    /// Euclidean norm `|x|`.
    pub fn euclidean_norm(&self) -> f64 {
        (self.0.iter().map(|&c| (c * c) as f64).sum::<f64>()).sqrt()
    }

    /// `self + k e_axis`.
    pub fn shifted(&self, axis: usize, k: i64) -> Self {
        let mut c = self.0.clone();
        c[axis] += k;
        LatticePoint(c)
    }

    pub fn translated(&self, offset: &[i64]) -> Self {
        LatticePoint(self.0.iter().zip(offset).map(|(a, b)| a + b).collect())
    }

    /// The `2d` lattice neighbours, ordered `+e_1, -e_1, +e_2, ...`.
    pub fn neighbors(&self) -> impl Iterator<Item = LatticePoint> + '_ {
        (0..self.dim()).flat_map(move |i| [self.shifted(i, 1), self.shifted(i, -1)])
    }
}

impl From<Vec<i64>> for LatticePoint {
    fn from(v: Vec<i64>) -> Self {
        LatticePoint(Coords::from_vec(v))
    }
}

impl<const N: usize> From<[i64; N]> for LatticePoint {
    fn from(v: [i64; N]) -> Self {
        LatticePoint::new(&v)
    }
}

impl fmt::Debug for LatticePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for LatticePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})", self.0.iter().join(","))
    }
}

fn check_dims(x: &LatticePoint, y: &LatticePoint) -> Result<()> {
    if x.dim() != y.dim() {
        return Err(Error::DimensionMismatch {
            expected: x.dim(),
            found: y.dim(),
        });
    }
    Ok(())
}

/// Combinatorial distance, i.e. the `l^1` distance `sum_i |x^i - y^i|`.
pub fn graph_distance(x: &LatticePoint, y: &LatticePoint) -> Result<i64> {
    check_dims(x, y)?;
    Ok(l1_distance(x, y))
}

pub(crate) fn l1_distance(x: &LatticePoint, y: &LatticePoint) -> i64 {
    x.0.iter().zip(&y.0).map(|(a, b)| (a - b).abs()).sum()
}

/// The diamond `{y : |y|_1 <= l}`.
pub fn diamond_ball(l: usize, dim: usize) -> BTreeSet<LatticePoint> {
    assert!(dim >= 1, "dimension must be positive");
    let mut out = BTreeSet::new();
    let mut cur = vec![0i64; dim];
    fill_diamond(&mut cur, 0, l as i64, &mut out);
    out
}

fn fill_diamond(cur: &mut Vec<i64>, axis: usize, budget: i64, out: &mut BTreeSet<LatticePoint>) {
    if axis == cur.len() {
        out.insert(LatticePoint::new(cur));
        return;
    }
    for c in -budget..=budget {
        cur[axis] = c;
        fill_diamond(cur, axis + 1, budget - c.abs(), out);
    }
    cur[axis] = 0;
}

/// The box `{y : |y|_inf <= l}`.
pub fn box_ball(l: usize, dim: usize) -> BTreeSet<LatticePoint> {
    assert!(dim >= 1, "dimension must be positive");
    let l = l as i64;
    (0..dim)
        .map(|_| -l..=l)
        .multi_cartesian_product()
        .map(LatticePoint::from)
        .collect()
}

/// A signed coordinate permutation `x -> (s_1 x^{p_1}, ..., s_d x^{p_d})`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SignedPermutation {
    perm: Vec<usize>,
    signs: Vec<i64>,
}

impl SignedPermutation {
    pub fn apply(&self, x: &LatticePoint) -> LatticePoint {
        LatticePoint(
            self.perm
                .iter()
                .zip(&self.signs)
                .map(|(&p, &s)| s * x.0[p])
                .collect(),
        )
    }
}

/// All `2^d d!` signed coordinate permutations of `Z^d`.
pub fn signed_permutations(dim: usize) -> Vec<SignedPermutation> {
    let mut out = Vec::new();
    for perm in (0..dim).permutations(dim) {
        for mask in 0..(1u32 << dim) {
            let signs = (0..dim)
                .map(|i| if mask & (1 << i) != 0 { -1 } else { 1 })
                .collect();
            out.push(SignedPermutation {
                perm: perm.clone(),
                signs,
            });
        }
    }
    out
}

/// The orbit `V(x)` of `x` under signed coordinate permutations.
pub fn orbit(x: &LatticePoint) -> BTreeSet<LatticePoint> {
    signed_permutations(x.dim())
        .iter()
        .map(|g| g.apply(x))
        .collect()
}

/// Lattice points of the convex hull of `V(x)`.
///
/// `y` lies in the hull iff `|y|` is weakly submajorized by `|x|`: for every
/// `k` the `k` largest absolute coordinates of `y` sum to at most those of `x`.
pub fn orbit_hull(x: &LatticePoint) -> BTreeSet<LatticePoint> {
    let bound = sorted_abs_prefix_sums(x);
    box_ball(x.linf_norm() as usize, x.dim())
        .into_iter()
        .filter(|y| {
            sorted_abs_prefix_sums(y)
                .iter()
                .zip(&bound)
                .all(|(a, b)| a <= b)
        })
        .collect()
}

fn sorted_abs_prefix_sums(x: &LatticePoint) -> Vec<i64> {
    let mut abs: Vec<i64> = x.0.iter().map(|c| c.abs()).collect();
    abs.sort_unstable_by(|a, b| b.cmp(a));
    abs.iter()
        .scan(0, |acc, &a| {
            *acc += a;
            Some(*acc)
        })
        .collect()
}

/// A position on a lattice line, stored doubled: `HalfInt(k)` means `k / 2`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct HalfInt(pub i64);

impl HalfInt {
    pub fn from_int(k: i64) -> Self {
        HalfInt(2 * k)
    }

    pub fn doubled(self) -> i64 {
        self.0
    }

    pub fn parity(self) -> Parity {
        if self.0.rem_euclid(2) == 0 {
            Parity::Integer
        } else {
            Parity::HalfOdd
        }
    }

    pub fn to_f64(self) -> f64 {
        self.0 as f64 / 2.0
    }
}

impl fmt::Display for HalfInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0 % 2 == 0 {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}/2", self.0)
        }
    }
}

/// Whether positions on a line range over `Z` or over `Z + 1/2`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum Parity {
    Integer,
    HalfOdd,
}

/// An element of the direction set: `e_i`, `(e_i + e_j)/2` or `(e_i - e_j)/2`.
///
/// Indices are zero-based (`Axis(0)` is `e_1`); diagonals require `i < j`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum Direction {
    Axis(usize),
    DiagPlus(usize, usize),
    DiagMinus(usize, usize),
}

impl Direction {
    pub fn validate(&self, dim: usize) -> Result<()> {
        let ok = match *self {
            Direction::Axis(i) => i < dim,
            Direction::DiagPlus(i, j) | Direction::DiagMinus(i, j) => i < j && j < dim,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!(
                "direction {self} is not valid in dimension {dim}"
            )))
        }
    }

    /// Twice the geometric direction vector, so that it is integral.
    pub fn doubled_vector(&self, dim: usize) -> Vec<i64> {
        let mut v = vec![0; dim];
        match *self {
            Direction::Axis(i) => v[i] = 2,
            Direction::DiagPlus(i, j) => {
                v[i] = 1;
                v[j] = 1;
            }
            Direction::DiagMinus(i, j) => {
                v[i] = 1;
                v[j] = -1;
            }
        }
        v
    }

    /// Squared Euclidean length of the geometric vector (1 or 1/2).
    pub fn squared_length(&self) -> f64 {
        match self {
            Direction::Axis(_) => 1.0,
            _ => 0.5,
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Direction::Axis(i) => write!(f, "e{}", i + 1),
            Direction::DiagPlus(i, j) => write!(f, "e{}+e{}", i + 1, j + 1),
            Direction::DiagMinus(i, j) => write!(f, "e{}-e{}", i + 1, j + 1),
        }
    }
}

impl FromStr for Direction {
    type Err = Error;

    /// Parses `e1`, `e1+e2` or `e1-e2` (diagonals are implicitly halved).
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidParameter(format!("cannot parse direction {s:?}"));
        let index = |t: &str| -> Result<usize> {
            let n: usize = t
                .trim()
                .strip_prefix('e')
                .ok_or_else(bad)?
                .parse()
                .map_err(|_| bad())?;
            n.checked_sub(1).ok_or_else(bad)
        };
        let s = s.trim();
        if let Some((a, b)) = s.split_once('+') {
            let (i, j) = (index(a)?, index(b)?);
            if i >= j {
                return Err(bad());
            }
            Ok(Direction::DiagPlus(i, j))
        } else if let Some((a, b)) = s.split_once('-') {
            let (i, j) = (index(a)?, index(b)?);
            if i >= j {
                return Err(bad());
            }
            Ok(Direction::DiagMinus(i, j))
        } else {
            Ok(Direction::Axis(index(s)?))
        }
    }
}

/// Canonical cycle order: all axes, then for each `i < j` the `+` diagonal
/// followed by the `-` diagonal.
pub fn direction_set(dim: usize) -> Result<Vec<Direction>> {
    if dim < 1 {
        return Err(Error::InvalidDimension(dim));
    }
    let mut out: Vec<Direction> = (0..dim).map(Direction::Axis).collect();
    for (i, j) in (0..dim).tuple_combinations() {
        out.push(Direction::DiagPlus(i, j));
        out.push(Direction::DiagMinus(i, j));
    }
    Ok(out)
}

/// Identifies the lattice line `V_e^alpha` through a point.
///
/// For an axis `e_i`, `alpha` lists every coordinate except `i`. For a
/// diagonal `(e_i +- e_j)/2` it lists the invariant `x^i -+ x^j` followed by
/// every coordinate except `i` and `j`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct LineKey {
    pub direction: Direction,
    pub alpha: Coords,
    pub parity: Parity,
}

impl LineKey {
    pub fn dim(&self) -> usize {
        self.alpha.len() + 1
    }
}

/// The line through `x` along `e` and the position `<e, x>` on it.
pub fn line_of(x: &LatticePoint, e: Direction) -> Result<(LineKey, HalfInt)> {
    e.validate(x.dim())?;
    let c = x.coords();
    let (alpha, pos) = match e {
        Direction::Axis(i) => {
            let alpha: Coords = c
                .iter()
                .enumerate()
                .filter(|&(k, _)| k != i)
                .map(|(_, &v)| v)
                .collect();
            (alpha, HalfInt(2 * c[i]))
        }
        Direction::DiagPlus(i, j) | Direction::DiagMinus(i, j) => {
            let plus = matches!(e, Direction::DiagPlus(..));
            let (inv, pos) = if plus {
                (c[i] - c[j], c[i] + c[j])
            } else {
                (c[i] + c[j], c[i] - c[j])
            };
            let mut alpha: Coords = smallvec::smallvec![inv];
            alpha.extend(
                c.iter()
                    .enumerate()
                    .filter(|&(k, _)| k != i && k != j)
                    .map(|(_, &v)| v),
            );
            (alpha, HalfInt(pos))
        }
    };
    let parity = pos.parity();
    Ok((
        LineKey {
            direction: e,
            alpha,
            parity,
        },
        pos,
    ))
}

/// Inverse of [`line_of`].
pub fn point_on_line(key: &LineKey, pos: HalfInt) -> Result<LatticePoint> {
    if pos.parity() != key.parity {
        return Err(Error::InvalidParameter(format!(
            "position {pos} does not lie on a {:?} line",
            key.parity
        )));
    }
    let dim = key.dim();
    let mut c: Coords = smallvec::smallvec![0; dim];
    match key.direction {
        Direction::Axis(i) => {
            let mut rest = key.alpha.iter();
            for (k, slot) in c.iter_mut().enumerate() {
                *slot = if k == i {
                    pos.0 / 2
                } else {
                    *rest.next().unwrap()
                };
            }
        }
        Direction::DiagPlus(i, j) | Direction::DiagMinus(i, j) => {
            let inv = key.alpha[0];
            let mut rest = key.alpha[1..].iter();
            for (k, slot) in c.iter_mut().enumerate() {
                if k != i && k != j {
                    *slot = *rest.next().unwrap();
                }
            }
            if matches!(key.direction, Direction::DiagPlus(..)) {
                // x^i + x^j = pos, x^i - x^j = inv
                c[i] = (pos.0 + inv) / 2;
                c[j] = (pos.0 - inv) / 2;
            } else {
                // x^i - x^j = pos, x^i + x^j = inv
                c[i] = (inv + pos.0) / 2;
                c[j] = (inv - pos.0) / 2;
            }
        }
    }
    Ok(LatticePoint(c))
}

/// A finitely supported nonnegative function on `Z^d`.
///
/// Only strictly positive values are stored; absent points have value 0.
#[derive(Clone, PartialEq, Debug)]
pub struct SparseFunction {
    dim: usize,
    entries: BTreeMap<LatticePoint, f64>,
}

impl SparseFunction {
    pub fn zero(dim: usize) -> Result<Self> {
        if dim < 1 {
            return Err(Error::InvalidDimension(dim));
        }
        Ok(SparseFunction {
            dim,
            entries: BTreeMap::new(),
        })
    }

    /// Builds a function from `(point, value)` pairs; duplicates are an error.
    pub fn from_entries<I>(dim: usize, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (LatticePoint, f64)>,
    {
        let mut u = SparseFunction::zero(dim)?;
        for (x, v) in entries {
            u.check_point(&x)?;
            check_value(v)?;
            if u.entries.insert(x.clone(), v).is_some() {
                return Err(Error::DuplicatePoint(x.to_string()));
            }
        }
        Ok(u)
    }

    /// Like [`SparseFunction::from_entries`] but silently drops zero values.
    pub fn from_nonnegative<I>(dim: usize, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (LatticePoint, f64)>,
    {
        SparseFunction::from_entries(dim, entries.into_iter().filter(|&(_, v)| v != 0.0))
    }

    /// `value * 1_points`.
    pub fn indicator<'a, I>(dim: usize, points: I, value: f64) -> Result<Self>
    where
        I: IntoIterator<Item = &'a LatticePoint>,
    {
        SparseFunction::from_entries(dim, points.into_iter().map(|x| (x.clone(), value)))
    }

    fn check_point(&self, x: &LatticePoint) -> Result<()> {
        if x.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: x.dim(),
            });
        }
        Ok(())
    }

    /// Sets `u(x) = v`; a zero value removes `x` from the support.
    pub fn set(&mut self, x: LatticePoint, v: f64) -> Result<()> {
        self.check_point(&x)?;
        if v == 0.0 {
            self.entries.remove(&x);
            return Ok(());
        }
        check_value(v)?;
        self.entries.insert(x, v);
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, x: &LatticePoint) -> f64 {
        self.entries.get(x).copied().unwrap_or(0.0)
    }

    pub fn contains(&self, x: &LatticePoint) -> bool {
        self.entries.contains_key(x)
    }

    /// Entries in lexicographic point order.
    pub fn iter(&self) -> impl Iterator<Item = (&LatticePoint, f64)> + '_ {
        self.entries.iter().map(|(x, &v)| (x, v))
    }

    pub fn support(&self) -> BTreeSet<LatticePoint> {
        self.entries.keys().cloned().collect()
    }

    pub fn max_linf(&self) -> i64 {
        self.entries
            .keys()
            .map(|x| x.linf_norm())
            .max()
            .unwrap_or(0)
    }

    /// Pointwise `u <= v`.
    pub fn le_pointwise(&self, other: &SparseFunction) -> bool {
        self.iter().all(|(x, v)| v <= other.get(x))
    }

    pub fn scaled(&self, factor: f64) -> Result<Self> {
        SparseFunction::from_nonnegative(
            self.dim,
            self.iter().map(|(x, v)| (x.clone(), v * factor)),
        )
    }

    pub(crate) fn from_map_unchecked(dim: usize, entries: BTreeMap<LatticePoint, f64>) -> Self {
        SparseFunction { dim, entries }
    }
}

fn check_value(v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::NonPositiveValue(v))
    }
}

/// The multiset of positive values, sorted non-increasing.
#[derive(Clone, PartialEq, Debug, Default)]
pub struct ValueMultiset(Vec<f64>);

impl ValueMultiset {
    pub fn new(mut values: Vec<f64>) -> Result<Self> {
        for &v in &values {
            check_value(v)?;
        }
        values.sort_by(|a, b| b.total_cmp(a));
        Ok(ValueMultiset(values))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `true` when all values are pairwise distinct.
    pub fn is_strict(&self) -> bool {
        self.0.windows(2).all(|w| w[0] > w[1])
    }
}

/// `ran(u)`: the sorted value multiset.
pub fn values_multiset(u: &SparseFunction) -> ValueMultiset {
    let mut values: Vec<f64> = u.iter().map(|(_, v)| v).collect();
    values.sort_by(|a, b| b.total_cmp(a));
    ValueMultiset(values)
}

/// Order used for cut-offs: larger value first, ties by lexicographic point.
pub(crate) fn value_order(a: (&LatticePoint, f64), b: (&LatticePoint, f64)) -> Ordering {
    b.1.total_cmp(&a.1).then_with(|| a.0.cmp(b.0))
}

/// The `n`-th cut-off: keeps the `n` largest values. Equal values are taken
/// in lexicographic point order.
pub fn cutoff(u: &SparseFunction, n: usize) -> SparseFunction {
    let mut entries: Vec<(&LatticePoint, f64)> = u.iter().collect();
    entries.sort_by(|a, b| value_order(*a, *b));
    SparseFunction::from_map_unchecked(
        u.dim(),
        entries
            .into_iter()
            .take(n)
            .map(|(x, v)| (x.clone(), v))
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(c: &[i64]) -> LatticePoint {
        LatticePoint::new(c)
    }

    #[test]
    fn distance_examples() {
        assert_eq!(graph_distance(&p(&[0, 0]), &p(&[0, 0])).unwrap(), 0);
        assert_eq!(graph_distance(&p(&[0, 0]), &p(&[2, 3])).unwrap(), 5);
        assert_eq!(graph_distance(&p(&[1, -1, 2]), &p(&[0, 0, 0])).unwrap(), 4);
        assert!(matches!(
            graph_distance(&p(&[0, 0]), &p(&[0, 0, 0])),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn ball_sizes() {
        assert_eq!(diamond_ball(3, 2).len(), 25);
        assert_eq!(diamond_ball(0, 2), BTreeSet::from([p(&[0, 0])]));
        assert_eq!(box_ball(3, 2).len(), 49);
        assert_eq!(box_ball(0, 5), BTreeSet::from([LatticePoint::origin(5)]));
        assert_eq!(box_ball(1, 3).len(), 27);
    }

    #[test]
    fn diamond_in_three_dimensions_matches_enumeration() {
        let brute = (-2..=2i64)
            .flat_map(|a| (-2..=2i64).flat_map(move |b| (-2..=2i64).map(move |c| [a, b, c])))
            .filter(|x| x.iter().map(|v| v.abs()).sum::<i64>() <= 2)
            .count();
        assert_eq!(brute, 25);
        assert_eq!(diamond_ball(2, 3).len(), brute);
    }

    #[test]
    fn direction_sets() {
        assert_eq!(direction_set(1).unwrap(), vec![Direction::Axis(0)]);
        assert_eq!(
            direction_set(2).unwrap(),
            vec![
                Direction::Axis(0),
                Direction::Axis(1),
                Direction::DiagPlus(0, 1),
                Direction::DiagMinus(0, 1)
            ]
        );
        assert_eq!(direction_set(3).unwrap().len(), 9);
        assert!(matches!(direction_set(0), Err(Error::InvalidDimension(0))));
    }

    #[test]
    fn direction_parse_round_trip() {
        for d in 1..=4 {
            for e in direction_set(d).unwrap() {
                assert_eq!(e.to_string().parse::<Direction>().unwrap(), e);
            }
        }
        assert!("e2+e1".parse::<Direction>().is_err());
        assert!("e0".parse::<Direction>().is_err());
        assert!("x1".parse::<Direction>().is_err());
    }

    #[test]
    fn line_examples() {
        let (k, pos) = line_of(&p(&[3, 1]), Direction::Axis(0)).unwrap();
        assert_eq!(k.alpha.as_slice(), &[1]);
        assert_eq!(pos, HalfInt::from_int(3));
        assert_eq!(k.parity, Parity::Integer);

        let (k, pos) = line_of(&p(&[2, 1]), Direction::DiagPlus(0, 1)).unwrap();
        assert_eq!(k.alpha.as_slice(), &[1]);
        assert_eq!(pos, HalfInt(3));
        assert_eq!(k.parity, Parity::HalfOdd);

        let (k, pos) = line_of(&p(&[2, 2]), Direction::DiagPlus(0, 1)).unwrap();
        assert_eq!(k.alpha.as_slice(), &[0]);
        assert_eq!(pos, HalfInt::from_int(2));
        assert_eq!(k.parity, Parity::Integer);
    }

    #[test]
    fn line_reconstruction_is_exact() {
        for d in 1..=4 {
            for e in direction_set(d).unwrap() {
                for x in box_ball(2, d) {
                    let (k, pos) = line_of(&x, e).unwrap();
                    assert_eq!(point_on_line(&k, pos).unwrap(), x);
                }
            }
        }
    }

    #[test]
    fn same_line_iff_difference_parallel() {
        let pts: Vec<_> = box_ball(2, 3).into_iter().collect();
        for e in direction_set(3).unwrap() {
            let v = e.doubled_vector(3);
            for x in &pts {
                let kx = line_of(x, e).unwrap().0;
                for y in &pts {
                    let diff: Vec<i64> = x
                        .coords()
                        .iter()
                        .zip(y.coords())
                        .map(|(a, b)| a - b)
                        .collect();
                    // diff parallel to v  <=>  all 2x2 minors vanish
                    let parallel = (0..3).all(|a| (0..3).all(|b| diff[a] * v[b] == diff[b] * v[a]));
                    assert_eq!(kx == line_of(y, e).unwrap().0, parallel, "{x} {y} {e}");
                }
            }
        }
    }

    #[test]
    fn point_on_line_rejects_wrong_parity() {
        let (k, _) = line_of(&p(&[1, 0]), Direction::DiagPlus(0, 1)).unwrap();
        assert!(point_on_line(&k, HalfInt(2)).is_err());
    }

    #[test]
    fn multiset_and_cutoff() {
        let u = SparseFunction::zero(2).unwrap();
        assert!(values_multiset(&u).is_empty());

        let u = SparseFunction::from_entries(
            2,
            [(p(&[0, 0]), 1.0), (p(&[5, 5]), 3.0), (p(&[1, 0]), 3.0)],
        )
        .unwrap();
        assert_eq!(values_multiset(&u).as_slice(), &[3.0, 3.0, 1.0]);

        let ind = SparseFunction::indicator(2, &diamond_ball(1, 2), 1.0).unwrap();
        assert_eq!(values_multiset(&ind).as_slice(), &[1.0; 5]);

        assert!(cutoff(&u, 0).is_empty());
        assert_eq!(cutoff(&u, 3), u);
        assert_eq!(cutoff(&u, 10), u);

        let (a, b, c) = (p(&[0, 0]), p(&[1, 0]), p(&[2, 0]));
        let w = SparseFunction::from_entries(2, [(a.clone(), 3.0), (b.clone(), 2.0), (c, 1.0)])
            .unwrap();
        let want = SparseFunction::from_entries(2, [(a, 3.0), (b, 2.0)]).unwrap();
        assert_eq!(cutoff(&w, 2), want);
    }

    #[test]
    fn cutoff_breaks_ties_lexicographically() {
        let u = SparseFunction::from_entries(1, [(p(&[4]), 1.0), (p(&[-3]), 1.0), (p(&[0]), 1.0)])
            .unwrap();
        let c = cutoff(&u, 2);
        assert!(c.contains(&p(&[-3])) && c.contains(&p(&[0])));
    }

    #[test]
    fn sparse_function_validation() {
        assert!(matches!(
            SparseFunction::from_entries(1, [(p(&[0]), 0.0)]),
            Err(Error::NonPositiveValue(_))
        ));
        assert!(matches!(
            SparseFunction::from_entries(1, [(p(&[0]), -1.0)]),
            Err(Error::NonPositiveValue(_))
        ));
        assert!(matches!(
            SparseFunction::from_entries(1, [(p(&[0]), 1.0), (p(&[0]), 2.0)]),
            Err(Error::DuplicatePoint(_))
        ));
        assert!(matches!(
            SparseFunction::from_entries(2, [(p(&[0]), 1.0)]),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(SparseFunction::zero(0).is_err());
    }

    #[test]
    fn orbit_hull_in_the_plane_is_an_octagon() {
        for a in 0..5i64 {
            for b in 0..5i64 {
                let x = p(&[a, b]);
                let m = a.max(b);
                let s = a + b;
                let want: BTreeSet<_> = box_ball(m as usize, 2)
                    .into_iter()
                    .filter(|y| y.l1_norm() <= s)
                    .collect();
                assert_eq!(orbit_hull(&x), want, "x = {x}");
                assert!(orbit(&x).is_subset(&want));
            }
        }
        assert_eq!(orbit_hull(&p(&[3, 0])), diamond_ball(3, 2));
        assert_eq!(orbit_hull(&p(&[2, 2])), box_ball(2, 2));
    }

    #[test]
    fn signed_permutation_count() {
        assert_eq!(signed_permutations(2).len(), 8);
        assert_eq!(signed_permutations(3).len(), 48);
    }
}
