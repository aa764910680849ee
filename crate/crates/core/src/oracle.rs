//! Brute-force ground truth on tiny instances: free polyominoes, optimal
//! value placements, the five-cell obstruction to total-order rearrangements
//! on `Z^2`, and exhaustive 1-D Riesz maximization.

use std::collections::{BTreeMap, BTreeSet};

use itertools::Itertools;
use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::functionals::{Bivariate, Kernel};
use crate::lattice::{
    signed_permutations, values_multiset, LatticePoint, SparseFunction, ValueMultiset,
};
use crate::shape::{canonical_shape, ShapeClass};

/// Largest polyomino size accepted by the enumerations.
pub const MAX_SHAPE_SIZE: usize = 8;
/// Largest value count for the search over all connected supports.
pub const MAX_MINIMIZER_VALUES: usize = 6;
/// Relative tolerance for treating two energies as tied.
pub const TIE_RTOL: f64 = 1e-12;

fn tied(a: f64, b: f64) -> bool {
    (a - b).abs() <= TIE_RTOL * a.abs().max(b.abs())
}

/// All free polyominoes with `n` cells, in canonical order.
pub fn enumerate_connected_supports(n: usize) -> Result<Vec<ShapeClass>> {
    if n == 0 {
        return Err(Error::InvalidParameter(
            "shape size must be positive".into(),
        ));
    }
    if n > MAX_SHAPE_SIZE {
        return Err(Error::BudgetExceeded {
            what: "polyomino size",
            limit: MAX_SHAPE_SIZE,
        });
    }
    let mut current: BTreeSet<ShapeClass> =
        BTreeSet::from([canonical_shape(&[LatticePoint::origin(2)])?]);
    for _ in 1..n {
        let grown: Vec<BTreeSet<ShapeClass>> = current
            .par_iter()
            .map(|shape| {
                let cells: BTreeSet<&LatticePoint> = shape.points().iter().collect();
                let mut out = BTreeSet::new();
                for c in shape.points() {
                    for y in c.neighbors() {
                        if cells.contains(&y) {
                            continue;
                        }
                        let mut pts: Vec<LatticePoint> = shape.points().to_vec();
                        pts.push(y);
                        out.insert(canonical_shape(&pts).expect("nonempty"));
                    }
                }
                out
            })
            .collect();
        current = grown.into_iter().flatten().collect();
    }
    Ok(current.into_iter().collect())
}

/// An optimal placement of a value multiset on a shape.
#[derive(Clone, Debug, PartialEq)]
pub struct AssignmentResult {
    /// `||∇u||_2` of the placement.
    pub energy: f64,
    pub placement: SparseFunction,
    pub shape: ShapeClass,
}

/// Squared gradient norms of placements on a fixed shape.
struct ShapeEnergy {
    edges: Vec<(usize, usize)>,
    boundary: Vec<f64>,
}

impl ShapeEnergy {
    fn new(cells: &[LatticePoint]) -> Self {
        let index: BTreeMap<&LatticePoint, usize> =
            cells.iter().enumerate().map(|(i, x)| (x, i)).collect();
        let mut edges = Vec::new();
        let mut boundary = vec![0.0; cells.len()];
        for (i, x) in cells.iter().enumerate() {
            for y in x.neighbors() {
                match index.get(&y) {
                    Some(&j) if i < j => edges.push((i, j)),
                    Some(_) => {}
                    None => boundary[i] += 1.0,
                }
            }
        }
        ShapeEnergy { edges, boundary }
    }

    fn energy_sq(&self, vals: &[f64]) -> f64 {
        let inner: f64 = self
            .edges
            .iter()
            .map(|&(i, j)| (vals[i] - vals[j]).powi(2))
            .sum();
        let outer: f64 = self.boundary.iter().zip(vals).map(|(b, v)| b * v * v).sum();
        inner + outer
    }
}

/// Every distinct arrangement of `labels` (a multiset of small integers),
/// in lexicographic order starting from the sorted one.
fn multiset_permutations(labels: &[usize], mut visit: impl FnMut(&[usize])) {
    let mut p = labels.to_vec();
    p.sort_unstable();
    loop {
        visit(&p);
        // next lexicographic permutation
        let Some(i) = (0..p.len().saturating_sub(1))
            .rev()
            .find(|&i| p[i] < p[i + 1])
        else {
            return;
        };
        let j = (i + 1..p.len())
            .rev()
            .find(|&j| p[j] > p[i])
            .expect("exists");
        p.swap(i, j);
        p[i + 1..].reverse();
    }
}

/// Distinct values (descending) and, per entry of `values`, its label.
fn label_values(values: &ValueMultiset) -> (Vec<f64>, Vec<usize>) {
    let mut distinct: Vec<f64> = Vec::new();
    let mut labels = Vec::new();
    for &v in values.as_slice() {
        if distinct.last() != Some(&v) {
            distinct.push(v);
        }
        labels.push(distinct.len() - 1);
    }
    (distinct, labels)
}

/// Minimizes `||∇u||_2` over bijective placements of `values` on the cells
/// of `shape`. Among tied placements the first in lexicographic label order
/// (largest value first, cells in canonical order) is kept.
pub fn min_energy_assignment(
    values: &ValueMultiset,
    shape: &ShapeClass,
) -> Result<AssignmentResult> {
    let all = optimal_placements(values, shape)?;
    Ok(all.into_iter().next().expect("at least one placement"))
}

/// All placements attaining the minimal energy, up to [`TIE_RTOL`].
pub fn optimal_placements(
    values: &ValueMultiset,
    shape: &ShapeClass,
) -> Result<Vec<AssignmentResult>> {
    if values.len() != shape.len() {
        return Err(Error::SizeMismatch {
            values: values.len(),
            cells: shape.len(),
        });
    }
    if shape.len() > MAX_SHAPE_SIZE {
        return Err(Error::BudgetExceeded {
            what: "shape size",
            limit: MAX_SHAPE_SIZE,
        });
    }
    let cells = shape.points();
    let energy = ShapeEnergy::new(cells);
    let (distinct, labels) = label_values(values);
    let mut best_sq = f64::INFINITY;
    let mut best: Vec<Vec<f64>> = Vec::new();
    let mut vals = vec![0.0; cells.len()];
    multiset_permutations(&labels, |perm| {
        for (v, &l) in vals.iter_mut().zip(perm) {
            *v = distinct[l];
        }
        let e = energy.energy_sq(&vals);
        if best_sq.is_finite() && tied(e, best_sq) {
            best.push(vals.clone());
        } else if e < best_sq {
            best_sq = e;
            best.clear();
            best.push(vals.clone());
        }
    });
    best.into_iter()
        .map(|vals| {
            Ok(AssignmentResult {
                energy: energy.energy_sq(&vals).sqrt(),
                placement: SparseFunction::from_entries(2, cells.iter().cloned().zip(vals))?,
                shape: shape.clone(),
            })
        })
        .collect()
}

/// Shapes whose optimal placement attains the least energy over all
/// connected supports.
#[derive(Clone, Debug)]
pub struct Minimizers {
    pub energy: f64,
    pub shapes: Vec<ShapeClass>,
    pub assignments: Vec<AssignmentResult>,
}

/// Minimal `||∇u||_2` over all `u` on `Z^2` with value multiset `values` and
/// connected support. Disconnected supports are never optimal: translating a
/// component until it touches another removes boundary edges.
pub fn equimeasurable_minimizers(values: &ValueMultiset) -> Result<Minimizers> {
    if values.len() > MAX_MINIMIZER_VALUES {
        return Err(Error::BudgetExceeded {
            what: "value count",
            limit: MAX_MINIMIZER_VALUES,
        });
    }
    let shapes = enumerate_connected_supports(values.len())?;
    let per_shape: Vec<AssignmentResult> = shapes
        .par_iter()
        .map(|s| min_energy_assignment(values, s))
        .collect::<Result<_>>()?;
    let min = per_shape
        .iter()
        .map(|a| a.energy)
        .fold(f64::INFINITY, f64::min);
    let assignments: Vec<AssignmentResult> = per_shape
        .into_iter()
        .filter(|a| tied(a.energy, min))
        .collect();
    Ok(Minimizers {
        energy: min,
        shapes: assignments.iter().map(|a| a.shape.clone()).collect(),
        assignments,
    })
}

/// First Dirichlet eigenpair of `-Δ` on a finite set of cells in `Z^d`:
/// the matrix has `2d` on the diagonal and `-1` for each internal edge.
///
/// The eigenvector is positive, has unit `l^2` norm and is averaged over the
/// signed permutations fixing the set, so symmetric cells get bit-identical
/// values.
pub fn dirichlet_ground_state(cells: &[LatticePoint]) -> Result<(f64, SparseFunction)> {
    let dim = cells.first().ok_or(Error::EmptySupport)?.dim();
    let n = cells.len();
    let index: BTreeMap<&LatticePoint, usize> =
        cells.iter().enumerate().map(|(i, x)| (x, i)).collect();
    let mut m = DMatrix::<f64>::zeros(n, n);
    for (i, x) in cells.iter().enumerate() {
        m[(i, i)] = 2.0 * dim as f64;
        for y in x.neighbors() {
            if let Some(&j) = index.get(&y) {
                m[(i, j)] = -1.0;
            }
        }
    }
    let eig = SymmetricEigen::new(m);
    let k = eig.eigenvalues.imin();
    let lambda = eig.eigenvalues[k];
    let mut vec: Vec<f64> = eig.eigenvectors.column(k).iter().copied().collect();
    if vec.iter().sum::<f64>() < 0.0 {
        vec.iter_mut().for_each(|v| *v = -*v);
    }
    let set: BTreeSet<&LatticePoint> = cells.iter().collect();
    let symmetries: Vec<_> = signed_permutations(dim)
        .into_iter()
        .filter(|g| cells.iter().all(|x| set.contains(&g.apply(x))))
        .collect();
    let averaged: Vec<f64> = cells
        .iter()
        .map(|x| {
            let mut orbit: Vec<f64> = symmetries.iter().map(|g| vec[index[&g.apply(x)]]).collect();
            orbit.sort_by(f64::total_cmp);
            orbit.iter().sum::<f64>() / orbit.len() as f64
        })
        .collect();
    let norm = averaged.iter().map(|v| v * v).sum::<f64>().sqrt();
    let u = SparseFunction::from_entries(
        dim,
        cells.iter().cloned().zip(averaged.iter().map(|v| v / norm)),
    )?;
    Ok((lambda, u))
}

/// Ground state of the Dirichlet Laplacian on the plus `V◇_1 ⊂ Z^2`.
pub fn plus_eigenvector() -> SparseFunction {
    let cells: Vec<LatticePoint> = crate::lattice::diamond_ball(1, 2).into_iter().collect();
    dirichlet_ground_state(&cells).expect("nonempty").1
}

/// Certificate that no total order on `Z^2` makes "place the `k`-th largest
/// value at the `k`-th point" energy-minimizing.
#[derive(Clone, Debug)]
pub struct ObstructionReport {
    pub multiset1: ValueMultiset,
    pub shape1: ShapeClass,
    pub multiset2: ValueMultiset,
    pub shape2: ShapeClass,
    /// Candidates examined until `multiset1` (resp. `multiset2`) was found.
    pub searched1: usize,
    pub searched2: usize,
    /// Minimizing shapes for the values of [`plus_eigenvector`].
    pub plus_eigenvector_minimizers: Vec<ShapeClass>,
    /// Five-point sets containing the origin on which some optimal placement
    /// of `multiset1` puts its maximum at the origin.
    pub first_five1: Vec<Vec<LatticePoint>>,
    /// The same for `multiset2`.
    pub first_five2: Vec<Vec<LatticePoint>>,
    /// Every set in `first_five2` contains a diagonal neighbour `(±1, ±1)`.
    pub diagonal_in_shape2: bool,
    /// No five-point set serves both multisets.
    pub contradiction: bool,
}

/// Sets `F ∋ 0` congruent to `minimizer` on which an optimal placement of
/// `values` puts the largest value at the origin.
fn first_five_sets(
    values: &ValueMultiset,
    minimizer: &ShapeClass,
) -> Result<Vec<Vec<LatticePoint>>> {
    let top = values.as_slice()[0];
    let mut out = BTreeSet::new();
    for placement in optimal_placements(values, minimizer)? {
        for g in signed_permutations(2) {
            for (c, v) in placement.placement.iter() {
                if v != top {
                    continue;
                }
                let shift: Vec<i64> = g.apply(c).coords().iter().map(|a| -a).collect();
                let mut set: Vec<LatticePoint> = placement
                    .placement
                    .iter()
                    .map(|(x, _)| g.apply(x).translated(&shift))
                    .collect();
                set.sort();
                out.insert(set);
            }
        }
    }
    Ok(out.into_iter().collect())
}

/// Candidate value multisets for the obstruction: the plus eigenvector's
/// values, then all non-increasing 5-tuples over `{1, ..., 4}` and over
/// `{1/2, 1, ..., 3}`.
pub fn obstruction_candidates() -> Vec<ValueMultiset> {
    let mut out = vec![values_multiset(&plus_eigenvector())];
    for grid in [
        vec![1.0, 2.0, 3.0, 4.0],
        (1..=6).map(|k| k as f64 / 2.0).collect(),
    ] {
        for combo in grid.iter().copied().combinations_with_replacement(5) {
            out.push(ValueMultiset::new(combo).expect("positive values"));
        }
    }
    out
}

/// First candidate whose unique minimizing shape is `target`, with the
/// number of candidates examined.
pub fn search_unique_minimizer(
    target: &ShapeClass,
    candidates: &[ValueMultiset],
) -> Result<(ValueMultiset, usize)> {
    for (i, values) in candidates.iter().enumerate() {
        if equimeasurable_minimizers(values)?.shapes == std::slice::from_ref(target) {
            return Ok((values.clone(), i + 1));
        }
    }
    Err(Error::SearchExhausted(
        "no candidate multiset has the requested unique minimizer",
    ))
}

/// Builds the obstruction: one multiset is minimized only by the plus,
/// another only by the P-pentomino, and the two shapes are incompatible as
/// the first five points of a single total order.
pub fn pruss_obstruction() -> Result<ObstructionReport> {
    let plus = ShapeClass::plus();
    let p_shape = ShapeClass::p_pentomino();
    let candidates = obstruction_candidates();
    let plus_eigenvector_minimizers = equimeasurable_minimizers(&candidates[0])?.shapes;
    let (multiset1, searched1) = search_unique_minimizer(&plus, &candidates)?;
    let (multiset2, searched2) = search_unique_minimizer(&p_shape, &candidates)?;
    let first_five1 = first_five_sets(&multiset1, &plus)?;
    let first_five2 = first_five_sets(&multiset2, &p_shape)?;
    let diagonal = |x: &LatticePoint| x.coords().iter().all(|c| c.abs() == 1);
    let diagonal_in_shape2 = first_five2.iter().all(|s| s.iter().any(diagonal));
    let set1: BTreeSet<_> = first_five1.iter().collect();
    let contradiction = first_five2.iter().all(|s| !set1.contains(s));
    Ok(ObstructionReport {
        multiset1,
        shape1: plus,
        multiset2,
        shape2: p_shape,
        searched1,
        searched2,
        plus_eigenvector_minimizers,
        first_five1,
        first_five2,
        diagonal_in_shape2,
        contradiction,
    })
}

/// The `n`-cell region of `Z^2` with the least first Dirichlet eigenvalue,
/// with its eigenvalue and ground state.
pub fn dirichlet_optimal_region(n: usize) -> Result<(ShapeClass, f64, SparseFunction)> {
    let mut best: Option<(ShapeClass, f64, SparseFunction)> = None;
    for shape in enumerate_connected_supports(n)? {
        let (lambda, u) = dirichlet_ground_state(shape.points())?;
        if best.as_ref().is_none_or(|b| lambda < b.1) {
            best = Some((shape, lambda, u));
        }
    }
    Ok(best.expect("at least one shape"))
}

/// Largest number of values per function for [`brute_force_riesz_max`].
pub const MAX_RIESZ_VALUES: usize = 3;
/// Largest window radius for [`brute_force_riesz_max`].
pub const MAX_RIESZ_WINDOW: i64 = 7;

/// Exhaustive 1-D maximum of the Riesz double sum.
#[derive(Clone, Debug)]
pub struct RieszMax {
    pub value: f64,
    pub u: SparseFunction,
    pub v: SparseFunction,
}

/// Maximizes `Σ_{x,y} G(u(x), v(y)) H(|x - y|)` over all injective
/// placements of the two multisets in `{-window, ..., window}`.
///
/// The sum is split as `Σ G~(u(x), v(y)) H + M_H (Σ G(u,0) + Σ G(0,v))` with
/// `G~` the zero-margin reduction and `M_H = Σ_z H(|z|)`; the second part
/// does not depend on the placement. Ties keep the first placement in
/// lexicographic order of positions.
pub fn brute_force_riesz_max(
    values_u: &ValueMultiset,
    values_v: &ValueMultiset,
    window: i64,
    g: &Bivariate,
    h: &Kernel,
) -> Result<RieszMax> {
    if values_u.len() > MAX_RIESZ_VALUES || values_v.len() > MAX_RIESZ_VALUES {
        return Err(Error::BudgetExceeded {
            what: "value count",
            limit: MAX_RIESZ_VALUES,
        });
    }
    if window > MAX_RIESZ_WINDOW {
        return Err(Error::BudgetExceeded {
            what: "window radius",
            limit: MAX_RIESZ_WINDOW as usize,
        });
    }
    let slots = (2 * window + 1).max(0) as usize;
    if values_u.len().max(values_v.len()) > slots {
        return Err(Error::WindowTooSmall { window });
    }
    let constant = if g.zero_margins() {
        0.0
    } else {
        if !g.zero_zero() {
            return Err(Error::Divergent(format!("{}: G(0,0) != 0", g.name())));
        }
        let mass = h
            .mass(1)
            .ok_or_else(|| Error::Divergent("kernel does not vanish at infinity".into()))?;
        let margins: f64 = values_u
            .as_slice()
            .iter()
            .map(|&s| g.eval(s, 0.0))
            .sum::<f64>()
            + values_v
                .as_slice()
                .iter()
                .map(|&t| g.eval(0.0, t))
                .sum::<f64>();
        mass * margins
    };
    let reduced = crate::functionals::reduce_to_tilde(g)?;
    let positions: Vec<i64> = (-window..=window).collect();
    let a = values_u.as_slice();
    let b = values_v.as_slice();
    let placements_u: Vec<Vec<i64>> = positions.iter().copied().permutations(a.len()).collect();
    let placements_v: Vec<Vec<i64>> = positions.iter().copied().permutations(b.len()).collect();
    let pair: Vec<Vec<f64>> = a
        .iter()
        .map(|&s| b.iter().map(|&t| reduced.eval(s, t)).collect())
        .collect();
    let mut best = f64::NEG_INFINITY;
    let mut arg = (0, 0);
    for (i, pu) in placements_u.iter().enumerate() {
        for (j, pv) in placements_v.iter().enumerate() {
            let mut s = 0.0;
            for (k, &x) in pu.iter().enumerate() {
                for (l, &y) in pv.iter().enumerate() {
                    s += pair[k][l] * h.eval((x - y).abs());
                }
            }
            if s > best {
                best = s;
                arg = (i, j);
            }
        }
    }
    let build = |pos: &[i64], vals: &[f64]| {
        SparseFunction::from_entries(
            1,
            pos.iter()
                .zip(vals)
                .map(|(&x, &v)| (LatticePoint::new(&[x]), v)),
        )
    };
    Ok(RieszMax {
        value: best + constant,
        u: build(&placements_u[arg.0], a)?,
        v: build(&placements_v[arg.1], b)?,
    })
}
