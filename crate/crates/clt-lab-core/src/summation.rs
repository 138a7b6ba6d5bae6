//! Summation weights of a rectangular sum of a linear random field.
//!
//! For a coefficient array `a` and region `Gamma`, the sum of the field
//! over `Gamma` collapses to a single weighted sum of innovations, with
//! weight array
//!
//! ```text
//! b[r, s] = sum over (j, k) in Gamma of a[j + r, k + s]
//! ```
//!
//! the cross-correlation of `a` with the indicator of `Gamma`. The variance
//! of the sum is `sigma^2 = sum b^2`, and the critical ratio
//! `rho = max |b| / sigma` controls every distance bound downstream.
//!
//! Two routes compute `b`: [`weights_direct`], the definitional double loop
//! kept as the reference oracle, and [`weights_fast`], inclusion-exclusion
//! on a summed-area table of `a`, which evaluates each cell with four table
//! lookups per rectangle. The two follow different arithmetic and their
//! agreement is a standing acceptance check.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::lattice::{CoefficientArray, Grid, Region, DEFAULT_CELL_CAP};
use crate::numeric::pairwise_sum_by;

/// Weight array together with its variance, critical ratio, and argmax.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightArray {
    grid: Grid,
    sigma: f64,
    rho: f64,
    argmax: (i64, i64),
}

impl WeightArray {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// Standard deviation `sigma = sqrt(sum b^2)` of the rectangular sum.
    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// Critical ratio `max |b| / sigma`, always in (0, 1].
    pub fn rho(&self) -> f64 {
        self.rho
    }

    /// Lexicographically smallest coordinates attaining `max |b|`.
    pub fn argmax(&self) -> (i64, i64) {
        self.argmax
    }

    /// Builds a weight array from an explicit grid of weights, running the
    /// same validation and summary pass as the two computation routes.
    pub fn from_grid_values(
        origin: (i64, i64),
        rows: usize,
        cols: usize,
        values: Vec<f64>,
    ) -> Result<Self> {
        let grid = Grid::new_checked(origin, rows, cols, values, DEFAULT_CELL_CAP)?;
        finalize(grid)
    }

    /// Nonzero cells as `(linear index, value)` pairs in row-major order.
    pub fn nonzero_cells(&self) -> Vec<(u64, f64)> {
        self.grid
            .values()
            .iter()
            .enumerate()
            .filter(|(_, &v)| v != 0.0)
            .map(|(i, &v)| (i as u64, v))
            .collect()
    }
}

/// Shape of the weight support: the Minkowski difference of the coefficient
/// support and the region bounding box. Fails if the shape would exceed the
/// cell cap or the i64 coordinate range.
fn support_shape(
    a: &CoefficientArray,
    gamma: &Region,
    cap: u64,
) -> Result<((i64, i64), usize, usize)> {
    let (a_rlo, a_rhi, a_slo, a_shi) = a.grid().bounds();
    let (g_mlo, g_mhi, g_nlo, g_nhi) = gamma.bounding_box();
    // All coordinate combinations the computation will form must fit i64.
    let combos = [
        a_rlo as i128 - g_mhi as i128,
        a_rhi as i128 - g_mlo as i128,
        a_slo as i128 - g_nhi as i128,
        a_shi as i128 - g_nlo as i128,
        a_rhi as i128 + (g_mhi as i128 - g_mlo as i128),
        a_shi as i128 + (g_nhi as i128 - g_nlo as i128),
        a_rlo as i128 - (g_mhi as i128 - g_mlo as i128),
        a_slo as i128 - (g_nhi as i128 - g_nlo as i128),
    ];
    if combos
        .iter()
        .any(|&c| c < i64::MIN as i128 || c > i64::MAX as i128)
    {
        return Err(Error::InvalidParameter(
            "weight support exceeds the i64 coordinate range".into(),
        ));
    }
    let origin = (a_rlo - g_mhi, a_slo - g_nhi);
    let rows = a.grid().rows() as u128 + (g_mhi as i128 - g_mlo as i128) as u128;
    let cols = a.grid().cols() as u128 + (g_nhi as i128 - g_nlo as i128) as u128;
    let cells = rows * cols;
    if cells > cap as u128 {
        return Err(Error::CapacityExceeded {
            needed: cells.min(u64::MAX as u128) as u64,
            cap,
        });
    }
    Ok((origin, rows as usize, cols as usize))
}

fn finalize(grid: Grid) -> Result<WeightArray> {
    let values = grid.values();
    let sigma_sq = pairwise_sum_by(values.len(), &|i| values[i] * values[i]);
    if !sigma_sq.is_finite() {
        return Err(Error::NonFinite("variance of the rectangular sum".into()));
    }
    if sigma_sq == 0.0 {
        return Err(Error::DegenerateVariance);
    }
    let sigma = libm::sqrt(sigma_sq);
    let mut max_abs = 0.0f64;
    let mut arg = 0usize;
    for (i, &v) in values.iter().enumerate() {
        // Strict comparison keeps the first, lexicographically smallest,
        // coordinate pair on ties.
        if libm::fabs(v) > max_abs {
            max_abs = libm::fabs(v);
            arg = i;
        }
    }
    // rho <= 1 holds exactly in real arithmetic (b_max^2 <= sigma^2); the
    // clamp only absorbs the final rounding of the square root.
    let rho = (max_abs / sigma).min(1.0);
    let argmax = grid.coords(arg);
    Ok(WeightArray { grid, sigma, rho, argmax })
}

/// Reference route: the definitional double loop over `Gamma x supp(b)`.
pub fn weights_direct(a: &CoefficientArray, gamma: &Region) -> Result<WeightArray> {
    weights_direct_with_cap(a, gamma, DEFAULT_CELL_CAP)
}

/// [`weights_direct`] under an explicit cell cap.
pub fn weights_direct_with_cap(
    a: &CoefficientArray,
    gamma: &Region,
    cap: u64,
) -> Result<WeightArray> {
    let (origin, rows, cols) = support_shape(a, gamma, cap)?;
    let ag = a.grid();
    let mut values = vec![0.0f64; rows * cols];
    for (idx, slot) in values.iter_mut().enumerate() {
        let r = origin.0 + (idx / cols) as i64;
        let s = origin.1 + (idx % cols) as i64;
        let mut acc = 0.0;
        gamma.for_each_point(|j, k| {
            acc += ag.get(j + r, k + s);
        });
        *slot = acc;
    }
    finalize(Grid::new_checked(origin, rows, cols, values, cap)?)
}

/// Fast route: summed-area table of `a`, then four-corner window sums per
/// rectangle (point sets are handled as unit rectangles).
pub fn weights_fast(a: &CoefficientArray, gamma: &Region) -> Result<WeightArray> {
    weights_fast_with_cap(a, gamma, DEFAULT_CELL_CAP)
}

/// [`weights_fast`] under an explicit cell cap.
pub fn weights_fast_with_cap(
    a: &CoefficientArray,
    gamma: &Region,
    cap: u64,
) -> Result<WeightArray> {
    let (origin, rows, cols) = support_shape(a, gamma, cap)?;
    let ag = a.grid();
    let (a_rlo, a_rhi, a_slo, a_shi) = ag.bounds();
    let (ar, ac) = (ag.rows(), ag.cols());
    let prefix_cells = (ar as u64 + 1) * (ac as u64 + 1);
    if prefix_cells > cap {
        return Err(Error::CapacityExceeded { needed: prefix_cells, cap });
    }

    // prefix[(i, j)] = sum of a over the block [0, i) x [0, j) in local
    // coordinates; one extra row and column of zeros on the low side.
    let pc = ac + 1;
    let mut prefix = vec![0.0f64; (ar + 1) * pc];
    let av = ag.values();
    for i in 0..ar {
        for j in 0..ac {
            prefix[(i + 1) * pc + (j + 1)] =
                av[i * ac + j] + prefix[i * pc + (j + 1)] + prefix[(i + 1) * pc + j]
                    - prefix[i * pc + j];
        }
    }
    let window = |x_lo: i64, x_hi: i64, y_lo: i64, y_hi: i64| -> f64 {
        let x_lo = x_lo.max(a_rlo);
        let x_hi = x_hi.min(a_rhi);
        let y_lo = y_lo.max(a_slo);
        let y_hi = y_hi.min(a_shi);
        if x_lo > x_hi || y_lo > y_hi {
            return 0.0;
        }
        let i0 = (x_lo - a_rlo) as usize;
        let i1 = (x_hi - a_rlo) as usize + 1;
        let j0 = (y_lo - a_slo) as usize;
        let j1 = (y_hi - a_slo) as usize + 1;
        prefix[i1 * pc + j1] - prefix[i0 * pc + j1] - prefix[i1 * pc + j0] + prefix[i0 * pc + j0]
    };

    let mut values = vec![0.0f64; rows * cols];
    for (idx, slot) in values.iter_mut().enumerate() {
        let r = origin.0 + (idx / cols) as i64;
        let s = origin.1 + (idx % cols) as i64;
        let mut acc = 0.0;
        if let Some(rects) = gamma.rects() {
            for rect in rects {
                acc += window(rect.m_lo + r, rect.m_hi + r, rect.n_lo + s, rect.n_hi + s);
            }
        } else if let Some(points) = gamma.points() {
            for &(j, k) in points {
                acc += window(j + r, j + r, k + s, k + s);
            }
        }
        *slot = acc;
    }
    finalize(Grid::new_checked(origin, rows, cols, values, cap)?)
}

/// Second difference of the weight array, extended by one cell past the
/// support on the high side:
///
/// ```text
/// d[u, v] = b[u, v] - b[u, v-1] - b[u-1, v] + b[u-1, v-1]
/// ```
#[derive(Debug, Clone, PartialEq)]
pub struct SecondDifferenceArray {
    grid: Grid,
}

impl SecondDifferenceArray {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }
}

/// Computes the second-difference array of `b`.
pub fn second_difference(b: &WeightArray) -> SecondDifferenceArray {
    let bg = b.grid();
    let origin = bg.origin();
    let rows = bg.rows() + 1;
    let cols = bg.cols() + 1;
    let mut values = vec![0.0f64; rows * cols];
    for (idx, slot) in values.iter_mut().enumerate() {
        let u = origin.0 + (idx / cols) as i64;
        let v = origin.1 + (idx % cols) as i64;
        *slot = bg.get(u, v) - bg.get(u, v - 1) - bg.get(u - 1, v) + bg.get(u - 1, v - 1);
    }
    SecondDifferenceArray {
        grid: Grid::new_checked(origin, rows, cols, values, u64::MAX).unwrap(),
    }
}

/// Weighted window sum of absolute second differences:
///
/// ```text
/// Q[m, n] = sum over i in 1..=m, j in 1..=n of
///           i * j * |d[base.0 + i, base.1 + j]|
/// ```
///
/// Cells outside the stored support contribute nothing, so the cost is
/// bounded by the support size no matter how large `m` and `n` are.
pub fn q_mn(d: &SecondDifferenceArray, base: (i64, i64), m: u64, n: u64) -> f64 {
    assert!(m >= 1 && n >= 1, "window extents must be positive");
    let g = d.grid();
    let (r_lo, r_hi, s_lo, s_hi) = g.bounds();
    let i_lo = (r_lo as i128 - base.0 as i128).max(1);
    let i_hi = (r_hi as i128 - base.0 as i128).min(m as i128);
    let j_lo = (s_lo as i128 - base.1 as i128).max(1);
    let j_hi = (s_hi as i128 - base.1 as i128).min(n as i128);
    if i_lo > i_hi || j_lo > j_hi {
        return 0.0;
    }
    let (i_lo, i_hi, j_lo, j_hi) = (i_lo as i64, i_hi as i64, j_lo as i64, j_hi as i64);
    let w = (j_hi - j_lo + 1) as usize;
    let h = (i_hi - i_lo + 1) as usize;
    pairwise_sum_by(h * w, &|t| {
        let i = i_lo + (t / w) as i64;
        let j = j_lo + (t % w) as i64;
        (i as f64) * (j as f64) * libm::fabs(g.get(base.0 + i, base.1 + j))
    })
}

/// Windowed bound on the critical ratio:
///
/// ```text
/// 2/sqrt(m) + 2/sqrt(n) + Q[m, n] / (m * n * sigma)
/// ```
///
/// anchored at the weight argmax. The bound's derivation has a known defect
/// (see the audit artifacts): its value can fall below `rho`, so callers
/// record it rather than assert against it.
pub fn rho_window_bound(b: &WeightArray, m: u64, n: u64) -> f64 {
    let d = second_difference(b);
    rho_window_bound_with(&d, b.sigma(), b.argmax(), m, n)
}

/// [`rho_window_bound`] with a precomputed second-difference array.
pub fn rho_window_bound_with(
    d: &SecondDifferenceArray,
    sigma: f64,
    base: (i64, i64),
    m: u64,
    n: u64,
) -> f64 {
    let q = q_mn(d, base, m, n);
    2.0 / libm::sqrt(m as f64) + 2.0 / libm::sqrt(n as f64) + q / (m as f64 * n as f64 * sigma)
}
