//! Deterministic instance generators shared by the test suites and the
//! self-test command.
//!
//! Random coefficient values are dyadic rationals (k/2^20), so identities
//! that hold in exact arithmetic also hold bitwise in f64: the transform
//! and direct weight routes can be compared without tolerance games, and
//! telescoping checks come out exact.

use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use crate::lattice::{CoefficientArray, Rect, Region};
use crate::rng::Stream;

/// Point filter (a = delta at the origin) over the square {0..n-1}^2.
///
/// The sum S is then a plain i.i.d. sum of n^2 innovations: the weight
/// array is identically 1 on a square, sigma = n and rho = 1/n exactly.
pub fn iid_delta(n: i64) -> (CoefficientArray, Region) {
    assert!(n >= 1);
    (
        CoefficientArray::delta((0, 0)),
        Region::rect(0, n - 1, 0, n - 1).unwrap(),
    )
}

/// Point filter over two disjoint congruent squares: {0..n-1}^2 together
/// with its translate {n+7..2n+6} x {0..n-1}. A minimal genuine rectangle
/// union (2 rectangles, 2n^2 cells): sigma = n*sqrt(2), rho = 1/(n*sqrt(2)).
pub fn two_rect(n: i64) -> (CoefficientArray, Region) {
    assert!(n >= 1);
    let rects = alloc::vec![
        Rect::new(0, n - 1, 0, n - 1).unwrap(),
        Rect::new(n + 7, 2 * n + 6, 0, n - 1).unwrap(),
    ];
    (
        CoefficientArray::delta((0, 0)),
        Region::rect_union(rects).unwrap(),
    )
}

/// Random coefficient array with dyadic values k/2^20 for k in
/// (-2^20, 2^20), side lengths in 1..=max_side, origin in [-8,8]^2.
/// At least one entry is forced nonzero so the array is always valid.
pub fn random_dyadic_array(s: &mut Stream, max_side: usize) -> CoefficientArray {
    let rows = 1 + s.next_below(max_side as u64) as usize;
    let cols = 1 + s.next_below(max_side as u64) as usize;
    let origin = (s.next_range_i64(-8, 8), s.next_range_i64(-8, 8));
    let mut values: Vec<f64> = (0..rows * cols)
        .map(|_| s.next_range_i64(-(1 << 20), 1 << 20) as f64 / (1u64 << 20) as f64)
        .collect();
    if values.iter().all(|&v| v == 0.0) {
        values[0] = 1.0;
    }
    CoefficientArray::new(origin, rows, cols, values).unwrap()
}

/// Random region near the origin: either a union of up to 4 disjoint
/// rectangles with sides at most 8, or a set of up to 64 distinct points.
/// Cardinality stays at or below 256.
pub fn random_region(s: &mut Stream) -> Region {
    if s.next_u64() & 1 == 0 {
        // Up to 4 disjoint rectangles, retried until disjoint.
        for _ in 0..100 {
            let count = 1 + s.next_below(4) as usize;
            let rects: Vec<Rect> = (0..count)
                .map(|_| {
                    let m = s.next_range_i64(-16, 12);
                    let n = s.next_range_i64(-16, 12);
                    let dm = s.next_range_i64(0, 7);
                    let dn = s.next_range_i64(0, 7);
                    Rect::new(m, m + dm, n, n + dn).unwrap()
                })
                .collect();
            if let Ok(region) = Region::rect_union(rects) {
                return region;
            }
        }
        Region::rect(0, 3, 0, 3).unwrap()
    } else {
        let count = 1 + s.next_below(64) as usize;
        let mut pts = BTreeSet::new();
        while pts.len() < count {
            pts.insert((s.next_range_i64(-16, 16), s.next_range_i64(-16, 16)));
        }
        Region::point_set(pts.into_iter().collect()).unwrap()
    }
}

/// Random region drawn from rectangle unions only, for exercising bounds
/// that reject point sets.
pub fn random_rect_union(s: &mut Stream) -> Region {
    loop {
        let region = random_region(s);
        if region.is_rect_union() {
            return region;
        }
    }
}

/// Random (coefficients, region) pair for randomized sweeps.
pub fn random_instance(s: &mut Stream, max_side: usize) -> (CoefficientArray, Region) {
    (random_dyadic_array(s, max_side), random_region(s))
}
