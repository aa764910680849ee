//! Supports up to lattice-graph automorphism (translations and signed
//! coordinate permutations).

use std::collections::BTreeSet;
use std::fmt;

use itertools::Itertools;

use crate::error::{Error, Result};
use crate::lattice::{signed_permutations, LatticePoint};

/// Canonical representative of a finite support under translations and
/// signed coordinate permutations.
///
/// The representative is the lexicographically smallest sorted point list
/// among all images, each translated so that its componentwise minimum is 0.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct ShapeClass {
    points: Vec<LatticePoint>,
}

impl ShapeClass {
    pub fn points(&self) -> &[LatticePoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.points[0].dim()
    }

    /// The five-cell plus `{0} ∪ {±e_1, ±e_2}`.
    pub fn plus() -> Self {
        canonical_shape(&crate::lattice::diamond_ball(1, 2)).expect("nonempty")
    }

    /// The P-pentomino `{(0,0),(0,1),(1,0),(0,-1),(1,1)}`.
    pub fn p_pentomino() -> Self {
        let pts: Vec<LatticePoint> = [[0, 0], [0, 1], [1, 0], [0, -1], [1, 1]]
            .into_iter()
            .map(LatticePoint::from)
            .collect();
        canonical_shape(&pts).expect("nonempty")
    }

    /// Whether every cell can be reached from every other through cells of
    /// the shape.
    pub fn is_connected(&self) -> bool {
        let set: BTreeSet<&LatticePoint> = self.points.iter().collect();
        let mut seen = BTreeSet::new();
        let mut stack = vec![self.points[0].clone()];
        while let Some(x) = stack.pop() {
            if !seen.insert(x.clone()) {
                continue;
            }
            for y in x.neighbors() {
                if set.contains(&y) && !seen.contains(&y) {
                    stack.push(y);
                }
            }
        }
        seen.len() == self.points.len()
    }
}

impl fmt::Display for ShapeClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}", self.points.iter().join(" "))
    }
}

/// Canonical form of `support` under translations and signed permutations.
pub fn canonical_shape<'a, I>(support: I) -> Result<ShapeClass>
where
    I: IntoIterator<Item = &'a LatticePoint>,
{
    let pts: Vec<&LatticePoint> = support.into_iter().collect();
    let dim = pts.first().ok_or(Error::EmptySupport)?.dim();
    if let Some(bad) = pts.iter().find(|p| p.dim() != dim) {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: bad.dim(),
        });
    }
    let best = signed_permutations(dim)
        .iter()
        .map(|g| normalized(pts.iter().map(|p| g.apply(p)).collect()))
        .min()
        .expect("group is nonempty");
    Ok(ShapeClass { points: best })
}

fn normalized(mut pts: Vec<LatticePoint>) -> Vec<LatticePoint> {
    let dim = pts[0].dim();
    let min: Vec<i64> = (0..dim)
        .map(|i| pts.iter().map(|p| p.coords()[i]).min().unwrap())
        .collect();
    let neg: Vec<i64> = min.iter().map(|m| -m).collect();
    for p in pts.iter_mut() {
        *p = p.translated(&neg);
    }
    pts.sort();
    pts.dedup();
    pts
}
