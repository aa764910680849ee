//! Norms, energies and the functionals that are monotone or invariant under
//! Schwarz rearrangement.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lattice::{box_ball, diamond_ball, l1_distance, LatticePoint, SparseFunction};
use crate::rearrange::rearranged;

/// Relative tolerance used when asserting rearrangement inequalities.
pub const INEQUALITY_RTOL: f64 = 1e-9;

/// Outer loops longer than this are split across threads. Partial sums are
/// always combined in index order, so the result does not depend on it.
const PARALLEL_TERMS: usize = 256;

/// `lhs <= rhs` up to a relative tolerance `rtol * max(|lhs|, |rhs|)`.
pub fn le_rel(lhs: f64, rhs: f64, rtol: f64) -> bool {
    lhs <= rhs + rtol * lhs.abs().max(rhs.abs())
}

fn check_exponent(p: f64) -> Result<()> {
    if p >= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidExponent(p))
    }
}

fn check_same_dim(u: &SparseFunction, v: &SparseFunction) -> Result<()> {
    if u.dim() != v.dim() {
        return Err(Error::DimensionMismatch {
            expected: u.dim(),
            found: v.dim(),
        });
    }
    Ok(())
}

/// `||u||_p`; `p = f64::INFINITY` gives the maximum.
pub fn lp_norm(u: &SparseFunction, p: f64) -> Result<f64> {
    check_exponent(p)?;
    if p.is_infinite() {
        return Ok(u.iter().map(|(_, v)| v).fold(0.0, f64::max));
    }
    Ok(u.iter().map(|(_, v)| v.powf(p)).sum::<f64>().powf(1.0 / p))
}

/// `||∇u||_p^p`: the sum of `|u(x) - u(y)|^p` over lattice edges, each edge
/// counted once.
pub fn sobolev_energy(u: &SparseFunction, p: f64) -> Result<f64> {
    check_exponent(p)?;
    let mut total = 0.0;
    for (x, ux) in u.iter() {
        for i in 0..u.dim() {
            let up = x.shifted(i, 1);
            total += (ux - u.get(&up)).abs().powf(p);
            let down = x.shifted(i, -1);
            if !u.contains(&down) {
                total += ux.powf(p);
            }
        }
    }
    Ok(total)
}

/// `||∇u||_p`.
pub fn gradient_norm(u: &SparseFunction, p: f64) -> Result<f64> {
    Ok(sobolev_energy(u, p)?.powf(1.0 / p))
}

/// `Σ_x f(u(x))` for `f(0) = 0`.
pub fn cavalieri_sum<F: Fn(f64) -> f64>(u: &SparseFunction, f: F) -> Result<f64> {
    let f0 = f(0.0);
    if f0 != 0.0 {
        return Err(Error::NonZeroAtOrigin(f0));
    }
    Ok(u.iter().map(|(_, v)| f(v)).sum())
}

/// A non-increasing, nonnegative radial kernel on graph distances.
///
/// `H(t)` is `samples[t]` for `t <= cutoff` and `tail` beyond.
#[derive(Clone, PartialEq, Debug)]
pub struct Kernel {
    samples: Vec<f64>,
    tail: f64,
}

impl Kernel {
    pub fn new(samples: Vec<f64>, tail: f64) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::InvalidKernel("no samples".into()));
        }
        if samples
            .iter()
            .chain([&tail])
            .any(|h| !(h.is_finite() && *h >= 0.0))
        {
            return Err(Error::InvalidKernel(
                "values must be finite and nonnegative".into(),
            ));
        }
        let mut all = samples.clone();
        all.push(tail);
        if all.windows(2).any(|w| w[1] > w[0]) {
            return Err(Error::InvalidKernel("values must be non-increasing".into()));
        }
        Ok(Kernel { samples, tail })
    }

    /// `H = 1_{t = 0}`.
    pub fn delta0() -> Self {
        Kernel {
            samples: vec![1.0],
            tail: 0.0,
        }
    }

    /// `H(t) = base^{-t}` for `t <= cutoff`, zero beyond.
    pub fn geometric(base: f64, cutoff: usize) -> Result<Self> {
        if !(base >= 1.0 && base.is_finite()) {
            return Err(Error::InvalidKernel(format!(
                "base {base} must be at least 1"
            )));
        }
        Kernel::new((0..=cutoff).map(|t| base.powi(-(t as i32))).collect(), 0.0)
    }

    /// `H = 1_{t <= radius}`.
    pub fn step(radius: usize) -> Self {
        Kernel {
            samples: vec![1.0; radius + 1],
            tail: 0.0,
        }
    }

    pub fn eval(&self, t: i64) -> f64 {
        usize::try_from(t)
            .ok()
            .and_then(|t| self.samples.get(t).copied())
            .unwrap_or(self.tail)
    }

    pub fn tail(&self) -> f64 {
        self.tail
    }

    /// Largest sampled distance.
    pub fn cutoff(&self) -> usize {
        self.samples.len() - 1
    }

    /// Radius of the support, when `H` vanishes far away.
    pub fn support_radius(&self) -> Option<usize> {
        if self.tail != 0.0 {
            return None;
        }
        Some(self.samples.iter().rposition(|&h| h > 0.0).unwrap_or(0))
    }

    /// `Σ_{z ∈ Z^d} H(|z|_1)`, for kernels of finite support.
    pub fn mass(&self, dim: usize) -> Option<f64> {
        let r = self.support_radius()?;
        Some(
            diamond_ball(r, dim)
                .iter()
                .map(|z| self.eval(z.l1_norm()))
                .sum(),
        )
    }
}

impl fmt::Display for Kernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "kernel{:?}+tail({})", self.samples, self.tail)
    }
}

impl FromStr for Kernel {
    type Err = Error;

    /// `delta0`, `geometric:BASE:CUTOFF` or `step:RADIUS`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidKernel(format!("cannot parse {s:?}"));
        let parts: Vec<&str> = s.trim().split(':').collect();
        match parts.as_slice() {
            ["delta0"] => Ok(Kernel::delta0()),
            ["geometric", base, cutoff] => Kernel::geometric(
                base.parse().map_err(|_| bad())?,
                cutoff.parse().map_err(|_| bad())?,
            ),
            ["step", radius] => Ok(Kernel::step(radius.parse().map_err(|_| bad())?)),
            _ => Err(bad()),
        }
    }
}

type Fn2 = dyn Fn(f64, f64) -> f64 + Send + Sync;

/// A real function of two nonnegative arguments.
#[derive(Clone)]
pub struct Bivariate {
    name: String,
    f: Arc<Fn2>,
    zero_zero: bool,
    zero_margins: bool,
}

/// Sample points used to check margin claims.
const MARGIN_SAMPLES: [f64; 8] = [0.0, 0.1, 0.25, 0.5, 1.0, 2.0, 5.0, 17.0];

impl Bivariate {
    /// Wraps `f`, verifying the claims `G(0,0) = 0` (exactly) and
    /// `G(s,0) = G(0,t) = 0` (on a sample grid).
    pub fn new<F>(
        name: impl Into<String>,
        f: F,
        zero_zero: bool,
        zero_margins: bool,
    ) -> Result<Self>
    where
        F: Fn(f64, f64) -> f64 + Send + Sync + 'static,
    {
        let name = name.into();
        if zero_zero && f(0.0, 0.0) != 0.0 {
            return Err(Error::InvalidBivariate(format!("{name}: G(0,0) != 0")));
        }
        if zero_margins
            && MARGIN_SAMPLES
                .iter()
                .any(|&s| f(s, 0.0) != 0.0 || f(0.0, s) != 0.0)
        {
            return Err(Error::InvalidBivariate(format!(
                "{name}: margins do not vanish"
            )));
        }
        Ok(Bivariate {
            name,
            f: Arc::new(f),
            zero_zero: zero_zero || zero_margins,
            zero_margins,
        })
    }

    /// `G(s,t) = st`.
    pub fn product() -> Self {
        Bivariate::new("product", |s, t| s * t, true, true).expect("valid")
    }

    /// `G(s,t) = -st`; not supermodular.
    pub fn neg_product() -> Self {
        Bivariate::new("negproduct", |s, t| -s * t, true, true).expect("valid")
    }

    /// `G(s,t) = -|s - t|^p`.
    pub fn neg_abs_diff(p: f64) -> Result<Self> {
        check_exponent(p)?;
        Bivariate::new(
            format!("negabsdiff:{p}"),
            move |s, t| -(s - t).abs().powf(p),
            true,
            false,
        )
    }

    pub fn eval(&self, s: f64, t: f64) -> f64 {
        (self.f)(s, t)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn zero_zero(&self) -> bool {
        self.zero_zero
    }

    pub fn zero_margins(&self) -> bool {
        self.zero_margins
    }
}

impl fmt::Debug for Bivariate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Bivariate")
            .field("name", &self.name)
            .field("zero_zero", &self.zero_zero)
            .field("zero_margins", &self.zero_margins)
            .finish()
    }
}

impl FromStr for Bivariate {
    type Err = Error;

    /// `product` or `negabsdiff:P`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidBivariate(format!("cannot parse {s:?}"));
        match s.trim().split_once(':') {
            None if s.trim() == "product" => Ok(Bivariate::product()),
            Some(("negabsdiff", p)) => Bivariate::neg_abs_diff(p.parse().map_err(|_| bad())?),
            _ => Err(bad()),
        }
    }
}

/// `G~(s,t) = G(s,t) - G(s,0) - G(0,t)`, which has zero margins.
pub fn reduce_to_tilde(g: &Bivariate) -> Result<Bivariate> {
    let g0 = g.eval(0.0, 0.0);
    if g0 != 0.0 {
        return Err(Error::InvalidBivariate(format!(
            "{}: G(0,0) = {g0}",
            g.name
        )));
    }
    if g.zero_margins {
        return Ok(g.clone());
    }
    let inner = g.f.clone();
    Bivariate::new(
        format!("tilde({})", g.name),
        move |s, t| inner(s, t) - inner(s, 0.0) - inner(0.0, t),
        true,
        true,
    )
}

/// Sums `term(i)` for `i < n` in index order, splitting the work across
/// threads for large `n` without changing the rounding.
fn ordered_sum<F: Fn(usize) -> f64 + Sync>(n: usize, term: F) -> f64 {
    if n >= PARALLEL_TERMS {
        let parts: Vec<f64> = (0..n).into_par_iter().map(&term).collect();
        parts.into_iter().sum()
    } else {
        (0..n).map(term).sum()
    }
}

/// `Σ_{x,y} G(u(x), v(y)) H(d(x,y))`.
///
/// Finite whenever `G` has zero margins, or `G(0,0) = 0` and `H` has finite
/// support; any other configuration is reported as divergent.
pub fn riesz_sum(u: &SparseFunction, v: &SparseFunction, g: &Bivariate, h: &Kernel) -> Result<f64> {
    check_same_dim(u, v)?;
    let us: Vec<(&LatticePoint, f64)> = u.iter().collect();
    let vs: Vec<(&LatticePoint, f64)> = v.iter().collect();
    if g.zero_margins {
        return Ok(ordered_sum(us.len(), |i| {
            let (x, ux) = us[i];
            vs.iter()
                .map(|&(y, vy)| g.eval(ux, vy) * h.eval(l1_distance(x, y)))
                .sum()
        }));
    }
    let radius = match (g.zero_zero, h.support_radius()) {
        (true, Some(r)) => r,
        _ => {
            return Err(Error::Divergent(format!(
                "{} lacks zero margins and the kernel does not vanish at infinity",
                g.name
            )))
        }
    };
    let offsets: Vec<(LatticePoint, f64)> = diamond_ball(radius, u.dim())
        .into_iter()
        .map(|z| {
            let w = h.eval(z.l1_norm());
            (z, w)
        })
        .filter(|&(_, w)| w != 0.0)
        .collect();
    // pairs with x in supp u (y anywhere) ...
    let with_u = ordered_sum(us.len(), |i| {
        let (x, ux) = us[i];
        offsets
            .iter()
            .map(|(z, w)| g.eval(ux, v.get(&x.translated(z.coords()))) * w)
            .sum()
    });
    // ... plus pairs with x outside supp u and y in supp v
    let without_u = ordered_sum(vs.len(), |j| {
        let (y, vy) = vs[j];
        let g0 = g.eval(0.0, vy);
        offsets
            .iter()
            .filter(|(z, _)| !u.contains(&y.translated(z.coords())))
            .map(|(_, w)| g0 * w)
            .sum()
    });
    Ok(with_u + without_u)
}

type FnN = dyn Fn(&[f64]) -> f64 + Send + Sync;

/// A real function of `m` nonnegative arguments.
#[derive(Clone)]
pub struct Multivariate {
    arity: usize,
    f: Arc<FnN>,
    zero_margins: bool,
}

impl Multivariate {
    /// `zero_margins` claims that `G` vanishes as soon as one argument is 0.
    /// The claim is checked on a sample grid; `G(0,...,0) = 0` is required.
    pub fn new<F>(arity: usize, f: F, zero_margins: bool) -> Result<Self>
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        if arity == 0 {
            return Err(Error::InvalidParameter(
                "G needs at least one argument".into(),
            ));
        }
        if f(&vec![0.0; arity]) != 0.0 {
            return Err(Error::InvalidBivariate("G(0,...,0) != 0".into()));
        }
        if zero_margins {
            for i in 0..arity {
                for &s in &MARGIN_SAMPLES {
                    let mut args = vec![s + 1.0; arity];
                    args[i] = 0.0;
                    if f(&args) != 0.0 {
                        return Err(Error::InvalidBivariate("margins do not vanish".into()));
                    }
                }
            }
        }
        Ok(Multivariate {
            arity,
            f: Arc::new(f),
            zero_margins,
        })
    }

    /// `G(s_1, ..., s_m) = s_1 s_2 ... s_m`.
    pub fn product(arity: usize) -> Self {
        Multivariate::new(arity, |a| a.iter().product(), true).expect("valid")
    }

    pub fn from_bivariate(g: &Bivariate) -> Result<Self> {
        let inner = g.f.clone();
        Multivariate::new(2, move |a| inner(a[0], a[1]), g.zero_margins)
    }

    pub fn eval(&self, args: &[f64]) -> f64 {
        (self.f)(args)
    }
}

/// Largest number of functions accepted by [`extended_riesz_sum`].
pub const MAX_EXTENDED_ARITY: usize = 3;

/// `Σ_{x_1..x_m} G(u_1(x_1), ..., u_m(x_m)) Π_{i<j} H_ij(d(x_i, x_j))`.
///
/// `kernels` is an `m × m` matrix of which only the entries above the
/// diagonal are used.
pub fn extended_riesz_sum(
    us: &[SparseFunction],
    g: &Multivariate,
    kernels: &[Vec<Kernel>],
) -> Result<f64> {
    let m = us.len();
    if m == 0 || m > MAX_EXTENDED_ARITY {
        return Err(Error::BudgetExceeded {
            what: "number of functions",
            limit: MAX_EXTENDED_ARITY,
        });
    }
    if g.arity != m {
        return Err(Error::InvalidParameter(format!(
            "G takes {} arguments, got {m} functions",
            g.arity
        )));
    }
    if kernels.len() != m || kernels.iter().any(|row| row.len() != m) {
        return Err(Error::InvalidParameter(format!(
            "kernel matrix must be {m}x{m}"
        )));
    }
    for u in &us[1..] {
        check_same_dim(&us[0], u)?;
    }
    let dim = us[0].dim();
    let candidates: Vec<Vec<LatticePoint>> = if g.zero_margins {
        us.iter()
            .map(|u| u.support().into_iter().collect())
            .collect()
    } else {
        let mut radii = vec![vec![0usize; m]; m];
        for i in 0..m {
            for j in (i + 1)..m {
                let r = kernels[i][j].support_radius().ok_or_else(|| {
                    Error::Divergent(
                        "G lacks zero margins and a kernel does not vanish at infinity".into(),
                    )
                })?;
                radii[i][j] = r;
                radii[j][i] = r;
            }
        }
        (0..m)
            .map(|j| {
                let mut set = us[j].support();
                for k in (0..m).filter(|&k| k != j) {
                    let ball = diamond_ball(radii[j][k], dim);
                    for x in us[k].support() {
                        set.extend(ball.iter().map(|z| x.translated(z.coords())));
                    }
                }
                set.into_iter().collect()
            })
            .collect()
    };
    let mut total = 0.0;
    let mut chosen: Vec<&LatticePoint> = Vec::with_capacity(m);
    accumulate(us, g, kernels, &candidates, &mut chosen, 1.0, &mut total);
    Ok(total)
}

fn accumulate<'a>(
    us: &[SparseFunction],
    g: &Multivariate,
    kernels: &[Vec<Kernel>],
    candidates: &'a [Vec<LatticePoint>],
    chosen: &mut Vec<&'a LatticePoint>,
    weight: f64,
    total: &mut f64,
) {
    let j = chosen.len();
    if j == us.len() {
        let args: Vec<f64> = chosen.iter().zip(us).map(|(x, u)| u.get(x)).collect();
        *total += g.eval(&args) * weight;
        return;
    }
    for x in &candidates[j] {
        let w = chosen
            .iter()
            .enumerate()
            .map(|(i, y)| kernels[i][j].eval(l1_distance(y, x)))
            .product::<f64>();
        if w == 0.0 {
            continue;
        }
        chosen.push(x);
        accumulate(us, g, kernels, candidates, chosen, weight * w, total);
        chosen.pop();
    }
}

/// `Σ_x u(x) v(x)`.
pub fn hardy_littlewood_sum(u: &SparseFunction, v: &SparseFunction) -> Result<f64> {
    check_same_dim(u, v)?;
    Ok(u.iter().map(|(x, ux)| ux * v.get(x)).sum())
}

/// `||u - v||_p^p`.
pub fn lp_distance_pow(u: &SparseFunction, v: &SparseFunction, p: f64) -> Result<f64> {
    check_exponent(p)?;
    check_same_dim(u, v)?;
    let mut total: f64 = u.iter().map(|(x, ux)| (ux - v.get(x)).abs().powf(p)).sum();
    total += v
        .iter()
        .filter(|(y, _)| !u.contains(y))
        .map(|(_, vy)| vy.powf(p))
        .sum::<f64>();
    Ok(total)
}

/// `||u - v||_p^p - ||u* - v*||_p^p`, nonnegative by the contraction property.
pub fn lp_contraction_gap(u: &SparseFunction, v: &SparseFunction, p: f64) -> Result<f64> {
    let before = lp_distance_pow(u, v, p)?;
    let after = lp_distance_pow(&rearranged(u)?, &rearranged(v)?, p)?;
    Ok(before - after)
}

/// `Σ_{|x|_∞ <= window} F(|x|, u(x))` with `|x|` the Euclidean norm.
pub fn f_weighted_sum<F: Fn(f64, f64) -> f64>(
    u: &SparseFunction,
    f: F,
    window: i64,
) -> Result<f64> {
    if window < 0 || u.max_linf() > window {
        return Err(Error::WindowTooSmall { window });
    }
    Ok(box_ball(window as usize, u.dim())
        .iter()
        .map(|x| f(x.euclidean_norm(), u.get(x)))
        .sum())
}

/// Outcome of a supermodularity check on a finite grid.
#[derive(Clone, Debug, PartialEq)]
pub struct SupermodularVerdict {
    pub pass: bool,
    /// First `(s, t, s0, t0)` violating the inequality, in grid order.
    pub witness: Option<[f64; 4]>,
    pub checked: usize,
}

/// Tests `G(s+s0, t+t0) + G(s,t) >= G(s, t+t0) + G(s+s0, t)` on every
/// quadruple of `grid`. In strict mode the inequality must be strict
/// whenever `s0, t0 > 0`. Sampling can only falsify, never prove.
pub fn check_supermodular(g: &Bivariate, grid: &[[f64; 4]], strict: bool) -> SupermodularVerdict {
    for (n, &[s, t, s0, t0]) in grid.iter().enumerate() {
        let lhs = g.eval(s + s0, t + t0) + g.eval(s, t);
        let rhs = g.eval(s, t + t0) + g.eval(s + s0, t);
        let tol = 1e-12 * lhs.abs().max(rhs.abs()).max(1.0);
        let ok = if strict && s0 > 0.0 && t0 > 0.0 {
            lhs > rhs + tol
        } else {
            lhs >= rhs - tol
        };
        if !ok {
            return SupermodularVerdict {
                pass: false,
                witness: Some([s, t, s0, t0]),
                checked: n + 1,
            };
        }
    }
    SupermodularVerdict {
        pass: true,
        witness: None,
        checked: grid.len(),
    }
}

/// Axis values of the default grid.
pub const SUPERMODULAR_GRID_AXIS: [f64; 6] = [0.0, 0.25, 0.5, 1.0, 2.0, 5.0];

/// The full product `SUPERMODULAR_GRID_AXIS^4` followed by 100 random
/// quadruples in `[0, 5)^4` drawn from `seed`.
pub fn default_supermodular_grid(seed: u64) -> Vec<[f64; 4]> {
    let a = SUPERMODULAR_GRID_AXIS;
    let mut grid = Vec::with_capacity(a.len().pow(4) + 100);
    for &s in &a {
        for &t in &a {
            for &s0 in &a {
                for &t0 in &a {
                    grid.push([s, t, s0, t0]);
                }
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..100 {
        grid.push(std::array::from_fn(|_| rng.random_range(0.0..5.0)));
    }
    grid
}
