//! Lattice-indexed dense grids and summation regions.
//!
//! A [`Grid`] stores a finite block of a function on the integer lattice
//! Z^2, addressed by absolute coordinates `(r, s)` with an explicit origin.
//! [`CoefficientArray`] is a validated grid of filter coefficients, and
//! [`Region`] describes the index set the field is summed over, either a
//! union of pairwise-disjoint axis-aligned rectangles or an explicit point
//! set. All invariants are checked eagerly at construction.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Default cap on dense cell counts (grids and derived enumerations).
pub const DEFAULT_CELL_CAP: u64 = 1 << 30;

/// Dense rectangular block of `f64` values on Z^2.
///
/// Storage is row-major in the first coordinate: the value at `(r, s)` is
/// `values[(r - origin.0) * cols + (s - origin.1)]`. Lookups outside the
/// stored block read as 0, matching the finitely supported functions the
/// grid represents.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    origin: (i64, i64),
    rows: usize,
    cols: usize,
    values: Vec<f64>,
}

impl Grid {
    pub(crate) fn new_checked(
        origin: (i64, i64),
        rows: usize,
        cols: usize,
        values: Vec<f64>,
        cap: u64,
    ) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidParameter(format!(
                "grid extent must be positive, got {rows} x {cols}"
            )));
        }
        let cells = (rows as u64)
            .checked_mul(cols as u64)
            .ok_or(Error::CapacityExceeded { needed: u64::MAX, cap })?;
        if cells > cap {
            return Err(Error::CapacityExceeded { needed: cells, cap });
        }
        if values.len() as u64 != cells {
            return Err(Error::InvalidParameter(format!(
                "value buffer holds {} cells but extent is {rows} x {cols}",
                values.len()
            )));
        }
        // The far corner must stay addressable in i64 arithmetic.
        if origin.0.checked_add(rows as i64 - 1).is_none()
            || origin.1.checked_add(cols as i64 - 1).is_none()
        {
            return Err(Error::InvalidParameter(
                "grid extends past the i64 coordinate range".into(),
            ));
        }
        Ok(Grid { origin, rows, cols, values })
    }

    pub fn origin(&self) -> (i64, i64) {
        self.origin
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn cell_count(&self) -> usize {
        self.rows * self.cols
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Inclusive coordinate bounds `(r_lo, r_hi, s_lo, s_hi)`.
    pub fn bounds(&self) -> (i64, i64, i64, i64) {
        (
            self.origin.0,
            self.origin.0 + self.rows as i64 - 1,
            self.origin.1,
            self.origin.1 + self.cols as i64 - 1,
        )
    }

    /// Value at absolute coordinates, 0 outside the stored block.
    #[inline]
    pub fn get(&self, r: i64, s: i64) -> f64 {
        // Wrapping subtraction followed by an unsigned compare rejects any
        // out-of-block coordinate, including ones that would overflow.
        let i = r.wrapping_sub(self.origin.0) as u64;
        let j = s.wrapping_sub(self.origin.1) as u64;
        if i < self.rows as u64 && j < self.cols as u64 {
            self.values[i as usize * self.cols + j as usize]
        } else {
            0.0
        }
    }

    /// Absolute coordinates of linear index `idx`.
    #[inline]
    pub fn coords(&self, idx: usize) -> (i64, i64) {
        debug_assert!(idx < self.values.len());
        (
            self.origin.0 + (idx / self.cols) as i64,
            self.origin.1 + (idx % self.cols) as i64,
        )
    }
}

/// Validated filter-coefficient array: finite values, not identically zero.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientArray {
    grid: Grid,
}

impl CoefficientArray {
    /// Builds a coefficient array under the default cell cap.
    pub fn new(origin: (i64, i64), rows: usize, cols: usize, values: Vec<f64>) -> Result<Self> {
        Self::with_cap(origin, rows, cols, values, DEFAULT_CELL_CAP)
    }

    /// Builds a coefficient array under an explicit cell cap.
    pub fn with_cap(
        origin: (i64, i64),
        rows: usize,
        cols: usize,
        values: Vec<f64>,
        cap: u64,
    ) -> Result<Self> {
        let grid = Grid::new_checked(origin, rows, cols, values, cap)?;
        if grid.values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(
                "coefficient values must be finite".into(),
            ));
        }
        if grid.values.iter().all(|&v| v == 0.0) {
            return Err(Error::InvalidParameter(
                "coefficient array must have at least one nonzero value".into(),
            ));
        }
        Ok(CoefficientArray { grid })
    }

    /// Single unit impulse at `at`: the identity filter.
    pub fn delta(at: (i64, i64)) -> Self {
        CoefficientArray {
            grid: Grid::new_checked(at, 1, 1, alloc::vec![1.0], DEFAULT_CELL_CAP).unwrap(),
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }
}

/// Closed axis-aligned rectangle of lattice points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Rect {
    pub m_lo: i64,
    pub m_hi: i64,
    pub n_lo: i64,
    pub n_hi: i64,
}

impl Rect {
    pub fn new(m_lo: i64, m_hi: i64, n_lo: i64, n_hi: i64) -> Result<Self> {
        if m_lo > m_hi || n_lo > n_hi {
            return Err(Error::InvalidRegion(format!(
                "rectangle bounds out of order: [{m_lo}, {m_hi}] x [{n_lo}, {n_hi}]"
            )));
        }
        Ok(Rect { m_lo, m_hi, n_lo, n_hi })
    }

    fn cardinality(&self) -> Result<u64> {
        let w = (self.m_hi as i128 - self.m_lo as i128 + 1) as u128;
        let h = (self.n_hi as i128 - self.n_lo as i128 + 1) as u128;
        let area = w.checked_mul(h).ok_or_else(overflow_region)?;
        u64::try_from(area).map_err(|_| overflow_region())
    }

    fn intersects(&self, other: &Rect) -> bool {
        self.m_lo <= other.m_hi
            && other.m_lo <= self.m_hi
            && self.n_lo <= other.n_hi
            && other.n_lo <= self.n_hi
    }
}

fn overflow_region() -> Error {
    Error::InvalidRegion("region cardinality overflows u64".into())
}

#[derive(Debug, Clone, PartialEq)]
enum Repr {
    Rects(Vec<Rect>),
    Points(Vec<(i64, i64)>),
}

/// Summation region: pairwise-disjoint rectangles or an explicit point set.
///
/// Both representations are canonicalized (sorted) at construction, so
/// iteration order, and with it every floating-point accumulation order
/// downstream, is independent of how the caller listed components.
#[derive(Debug, Clone, PartialEq)]
pub struct Region {
    repr: Repr,
}

impl Region {
    /// Union of pairwise-disjoint rectangles. Overlaps are rejected by an
    /// interval sweep over the first coordinate.
    pub fn rect_union(mut rects: Vec<Rect>) -> Result<Self> {
        if rects.is_empty() {
            return Err(Error::InvalidRegion("region must be nonempty".into()));
        }
        rects.sort_unstable();
        for i in 0..rects.len() {
            for j in i + 1..rects.len() {
                // Sorted by m_lo: once a later rectangle starts past the end
                // of rectangle i, nothing further can intersect it.
                if rects[j].m_lo > rects[i].m_hi {
                    break;
                }
                if rects[i].intersects(&rects[j]) {
                    return Err(Error::InvalidRegion(format!(
                        "rectangles overlap: {:?} and {:?}",
                        rects[i], rects[j]
                    )));
                }
            }
        }
        Ok(Region { repr: Repr::Rects(rects) })
    }

    /// Single rectangle.
    pub fn rect(m_lo: i64, m_hi: i64, n_lo: i64, n_hi: i64) -> Result<Self> {
        Self::rect_union(alloc::vec![Rect::new(m_lo, m_hi, n_lo, n_hi)?])
    }

    /// Explicit duplicate-free point set.
    pub fn point_set(mut points: Vec<(i64, i64)>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidRegion("region must be nonempty".into()));
        }
        points.sort_unstable();
        for w in points.windows(2) {
            if w[0] == w[1] {
                return Err(Error::InvalidRegion(format!(
                    "duplicate point {:?}",
                    w[0]
                )));
            }
        }
        Ok(Region { repr: Repr::Points(points) })
    }

    pub fn is_rect_union(&self) -> bool {
        matches!(self.repr, Repr::Rects(_))
    }

    /// Component rectangles, if this is a rectangle union.
    pub fn rects(&self) -> Option<&[Rect]> {
        match &self.repr {
            Repr::Rects(r) => Some(r),
            Repr::Points(_) => None,
        }
    }

    /// Explicit points, if this is a point set.
    pub fn points(&self) -> Option<&[(i64, i64)]> {
        match &self.repr {
            Repr::Points(p) => Some(p),
            Repr::Rects(_) => None,
        }
    }

    /// Number of lattice points covered.
    pub fn cardinality(&self) -> Result<u64> {
        match &self.repr {
            Repr::Rects(rects) => {
                let mut total: u64 = 0;
                for r in rects {
                    total = total
                        .checked_add(r.cardinality()?)
                        .ok_or_else(overflow_region)?;
                }
                Ok(total)
            }
            Repr::Points(points) => Ok(points.len() as u64),
        }
    }

    /// Inclusive bounding box `(m_lo, m_hi, n_lo, n_hi)`.
    pub fn bounding_box(&self) -> (i64, i64, i64, i64) {
        match &self.repr {
            Repr::Rects(rects) => {
                let mut b = (i64::MAX, i64::MIN, i64::MAX, i64::MIN);
                for r in rects {
                    b.0 = b.0.min(r.m_lo);
                    b.1 = b.1.max(r.m_hi);
                    b.2 = b.2.min(r.n_lo);
                    b.3 = b.3.max(r.n_hi);
                }
                b
            }
            Repr::Points(points) => {
                let mut b = (i64::MAX, i64::MIN, i64::MAX, i64::MIN);
                for &(j, k) in points {
                    b.0 = b.0.min(j);
                    b.1 = b.1.max(j);
                    b.2 = b.2.min(k);
                    b.3 = b.3.max(k);
                }
                b
            }
        }
    }

    /// Region shifted by `(dj, dk)`; fails on coordinate overflow.
    pub fn translate(&self, dj: i64, dk: i64) -> Result<Self> {
        let shift = |x: i64, d: i64| -> Result<i64> {
            x.checked_add(d).ok_or_else(|| {
                Error::InvalidRegion("translation overflows the coordinate range".into())
            })
        };
        match &self.repr {
            Repr::Rects(rects) => {
                let mut out = Vec::with_capacity(rects.len());
                for r in rects {
                    out.push(Rect {
                        m_lo: shift(r.m_lo, dj)?,
                        m_hi: shift(r.m_hi, dj)?,
                        n_lo: shift(r.n_lo, dk)?,
                        n_hi: shift(r.n_hi, dk)?,
                    });
                }
                Ok(Region { repr: Repr::Rects(out) })
            }
            Repr::Points(points) => {
                let mut out = Vec::with_capacity(points.len());
                for &(j, k) in points {
                    out.push((shift(j, dj)?, shift(k, dk)?));
                }
                Ok(Region { repr: Repr::Points(out) })
            }
        }
    }

    /// Visits every covered lattice point in canonical order.
    pub fn for_each_point(&self, mut f: impl FnMut(i64, i64)) {
        match &self.repr {
            Repr::Rects(rects) => {
                for r in rects {
                    for j in r.m_lo..=r.m_hi {
                        for k in r.n_lo..=r.n_hi {
                            f(j, k);
                        }
                    }
                }
            }
            Repr::Points(points) => {
                for &(j, k) in points {
                    f(j, k);
                }
            }
        }
    }
}
