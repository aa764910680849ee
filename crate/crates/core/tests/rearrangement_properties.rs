use std::collections::BTreeSet;

use latsym::lattice::{orbit, orbit_hull};
use latsym::rearrange::{
    default_max_cycles, lines, one_step, polarize, rearrange_line, rearranged, schwarz_rearrange,
    support_sandwich_bounds, two_point_t, HalfLine, LineFunction,
};
use latsym::sample::{random_function, random_line_function, random_nested_pair};
use latsym::{
    box_ball, cutoff, diamond_ball, direction_set, line_of, point_on_line, values_multiset,
    Direction, LatticePoint, Parity, SparseFunction,
};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn small_function(seed: u64, dim: usize) -> SparseFunction {
    let mut r = rng(seed);
    let n = r.random_range(0..=25);
    let distinct = r.random_bool(0.5);
    let radius = if dim == 1 { 20 } else { 4 };
    random_function(&mut r, dim, n, radius, distinct)
}

fn line_multiset(f: &LineFunction) -> Vec<u64> {
    let mut v: Vec<u64> = f.iter().map(|(_, x)| x.to_bits()).collect();
    v.sort_unstable();
    v
}

proptest! {
    #![proptest_config(ProptestConfig {
        cases: 64,
        failure_persistence: None,
        ..ProptestConfig::default()
    })]

    #[test]
    fn lines_partition_and_reconstruct(seed: u64, dim in 1usize..=3) {
        let u = small_function(seed, dim);
        for e in direction_set(dim).unwrap() {
            let mut seen = BTreeSet::new();
            for (x, _) in u.iter() {
                let (key, pos) = line_of(x, e).unwrap();
                prop_assert_eq!(&point_on_line(&key, pos).unwrap(), x);
                prop_assert!(seen.insert((key, pos)));
            }
            let split = lines(&u, e).unwrap();
            prop_assert_eq!(split.values().map(|f| f.len()).sum::<usize>(), u.len());
        }
    }

    #[test]
    fn operators_preserve_values(seed: u64, dim in 1usize..=3) {
        let u = small_function(seed, dim);
        let want = values_multiset(&u);
        for e in direction_set(dim).unwrap() {
            prop_assert_eq!(&values_multiset(&one_step(&u, e).unwrap()), &want);
        }
        prop_assert_eq!(&values_multiset(&rearranged(&u).unwrap()), &want);
    }

    #[test]
    fn polarizations_preserve_line_values(seed: u64, odd: bool) {
        let parity = if odd { Parity::HalfOdd } else { Parity::Integer };
        let f = random_line_function(&mut rng(seed), parity, 20, 15);
        let want = line_multiset(&f);
        for h in [HalfLine::POSITIVE, HalfLine::BELOW_HALF] {
            prop_assert_eq!(line_multiset(&polarize(&f, h)), want.clone());
        }
        prop_assert_eq!(line_multiset(&two_point_t(&f)), want.clone());
        prop_assert_eq!(line_multiset(&rearrange_line(&f)), want);
    }

    #[test]
    fn two_point_iteration_reaches_line_rearrangement(seed: u64, odd: bool) {
        let parity = if odd { Parity::HalfOdd } else { Parity::Integer };
        let f = random_line_function(&mut rng(seed), parity, 20, 15);
        let mut cur = f.clone();
        for _ in 0..10_000 {
            let next = two_point_t(&cur);
            if next == cur {
                break;
            }
            cur = next;
        }
        prop_assert_eq!(two_point_t(&cur), cur.clone());
        prop_assert_eq!(cur, rearrange_line(&f));
    }

    #[test]
    fn rearrangement_is_idempotent(seed: u64, dim in 1usize..=3) {
        let u = small_function(seed, dim);
        let once = rearranged(&u).unwrap();
        prop_assert_eq!(rearranged(&once).unwrap(), once);
    }

    #[test]
    fn rearrangement_is_monotone(seed: u64, dim in 2usize..=3) {
        let mut r = rng(seed);
        let n = r.random_range(1..=30);
        let (v, u) = random_nested_pair(&mut r, dim, n, 4);
        prop_assert!(v.le_pointwise(&u));
        prop_assert!(rearranged(&v).unwrap().le_pointwise(&rearranged(&u).unwrap()));
    }

    #[test]
    fn result_does_not_depend_on_insertion_order(seed: u64) {
        let u = small_function(seed, 2);
        let mut entries: Vec<(LatticePoint, f64)> =
            u.iter().map(|(x, v)| (x.clone(), v)).collect();
        entries.shuffle(&mut rng(seed ^ 0x5eed));
        let shuffled = SparseFunction::from_entries(2, entries).unwrap();
        prop_assert_eq!(rearranged(&shuffled).unwrap(), rearranged(&u).unwrap());
    }

    #[test]
    fn cutoff_commutes_with_rearrangement(seed: u64, dim in 2usize..=3) {
        let mut r = rng(seed);
        let len = r.random_range(2..=30);
        let u = random_function(&mut r, dim, len, 4, true);
        let star = rearranged(&u).unwrap();
        for n in 1..len {
            prop_assert_eq!(cutoff(&star, n), rearranged(&cutoff(&u, n)).unwrap());
        }
    }

    #[test]
    fn orbit_closure(seed: u64, dim in 2usize..=3) {
        let u = small_function(seed, dim);
        let star = rearranged(&u).unwrap();
        let supp = star.support();
        for x in &supp {
            if orbit(x).is_subset(&supp) {
                prop_assert!(orbit_hull(x).is_subset(&supp), "hull of {x} leaves the support");
            }
        }
    }
}

#[test]
fn support_sandwich() {
    let mut r = rng(17);
    for n in [25u64, 49, 100] {
        let (inner, outer) = support_sandwich_bounds(n);
        for _ in 0..20 {
            let distinct = r.random_bool(0.5);
            let u = random_function(&mut r, 2, n as usize, 8, distinct);
            let supp = rearranged(&u).unwrap().support();
            if inner >= 0 {
                assert!(diamond_ball(inner as usize, 2).is_subset(&supp));
            }
            assert!(supp.is_subset(&box_ball(outer as usize, 2)));
        }
    }
}

#[test]
fn default_budget_suffices_in_three_dimensions() {
    let mut r = rng(5);
    for _ in 0..20 {
        let u = random_function(&mut r, 3, 40, 3, true);
        schwarz_rearrange(&u, default_max_cycles(&u)).unwrap();
    }
}

/// `w · e > 0` for every direction certifies that no nontrivial nonnegative
/// combination of directions vanishes.
#[test]
fn directions_admit_no_vanishing_positive_combination() {
    for dim in [2usize, 3] {
        let dirs = direction_set(dim).unwrap();
        let w: Vec<i64> = (0..dim).map(|i| 1 << (dim - 1 - i)).collect();
        for e in &dirs {
            let v = e.doubled_vector(dim);
            assert!(v.iter().zip(&w).map(|(a, b)| a * b).sum::<i64>() > 0, "{e}");
        }
        // exhaustive over coefficients {0, 1/2, 1, 3/2, 2} (doubled to integers)
        let k = dirs.len() as u32;
        for code in 1..5u64.pow(k) {
            let mut c = code;
            let mut total = vec![0i64; dim];
            for e in &dirs {
                let coef = (c % 5) as i64;
                c /= 5;
                for (t, x) in total.iter_mut().zip(e.doubled_vector(dim)) {
                    *t += coef * x;
                }
            }
            assert!(total.iter().any(|&t| t != 0));
        }
    }
}

#[test]
fn diagonal_directions_use_both_parities() {
    let u = SparseFunction::indicator(2, &box_ball(1, 2), 1.0).unwrap();
    let keys = lines(&u, Direction::DiagPlus(0, 1)).unwrap();
    let parities: BTreeSet<_> = keys.keys().map(|k| k.parity).collect();
    assert_eq!(parities.len(), 2);
}
