//! Instance files: the on-disk description of a coefficient array and a
//! summation region, plus a canonical content hash.
//!
//! The same schema is accepted on input and produced inside the weights
//! report, so an analysis output can be fed straight back in as an
//! instance (unknown keys are ignored on read).

use clt_lab_core::{CoefficientArray, Rect, Region};
use serde::Deserialize;
use sha2::{Digest, Sha256};

use crate::error::{LabError, Result};

#[derive(Debug, Deserialize)]
pub struct InstanceFile {
    pub a: CoefficientSpec,
    pub gamma: RegionSpec,
}

#[derive(Debug, Deserialize)]
pub struct CoefficientSpec {
    /// Lattice position of `values[0][0]`.
    #[serde(default)]
    pub origin: (i64, i64),
    /// Row-major, equal-length rows.
    pub values: Vec<Vec<f64>>,
}

/// Exactly one of `rects` / `points` must be present.
#[derive(Debug, Deserialize)]
pub struct RegionSpec {
    /// Each entry is [m_lo, m_hi, n_lo, n_hi], inclusive.
    #[serde(default)]
    pub rects: Option<Vec<[i64; 4]>>,
    #[serde(default)]
    pub points: Option<Vec<(i64, i64)>>,
}

impl InstanceFile {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn coefficients(&self) -> Result<CoefficientArray> {
        let rows = self.a.values.len();
        if rows == 0 {
            return Err(LabError::Invalid("a.values has no rows".into()));
        }
        let cols = self.a.values[0].len();
        if cols == 0 {
            return Err(LabError::Invalid("a.values has empty rows".into()));
        }
        if self.a.values.iter().any(|row| row.len() != cols) {
            return Err(LabError::Invalid("a.values rows differ in length".into()));
        }
        let flat: Vec<f64> = self.a.values.iter().flatten().copied().collect();
        Ok(CoefficientArray::new(self.a.origin, rows, cols, flat)?)
    }

    pub fn region(&self) -> Result<Region> {
        match (&self.gamma.rects, &self.gamma.points) {
            (Some(rects), None) => {
                if rects.is_empty() {
                    return Err(LabError::Invalid("gamma.rects is empty".into()));
                }
                let rects = rects
                    .iter()
                    .map(|&[m_lo, m_hi, n_lo, n_hi]| Ok(Rect::new(m_lo, m_hi, n_lo, n_hi)?))
                    .collect::<Result<Vec<_>>>()?;
                Ok(Region::rect_union(rects)?)
            }
            (None, Some(points)) => Ok(Region::point_set(points.clone())?),
            (Some(_), Some(_)) => Err(LabError::Invalid(
                "gamma must give rects or points, not both".into(),
            )),
            (None, None) => Err(LabError::Invalid("gamma gives neither rects nor points".into())),
        }
    }

    /// Canonical SHA-256 of the instance content. Hashes the exact bit
    /// patterns of the coefficients and the canonical region description,
    /// so equal instances hash equal regardless of JSON formatting.
    pub fn content_hash(&self) -> Result<String> {
        let a = self.coefficients()?;
        let gamma = self.region()?;
        Ok(instance_hash(&a, &gamma))
    }
}

/// See [`InstanceFile::content_hash`].
pub fn instance_hash(a: &CoefficientArray, gamma: &Region) -> String {
    let mut h = Sha256::new();
    let (r_lo, r_hi, s_lo, s_hi) = a.grid().bounds();
    let mut canon = format!("a:{r_lo},{r_hi},{s_lo},{s_hi};");
    for r in r_lo..=r_hi {
        for s in s_lo..=s_hi {
            // Bit pattern, not decimal text: the hash must not depend on a
            // formatting choice.
            canon.push_str(&format!("{:016x},", a.grid().get(r, s).to_bits()));
        }
    }
    canon.push_str("gamma:");
    if let Some(rects) = gamma.rects() {
        for r in rects {
            canon.push_str(&format!("R{},{},{},{};", r.m_lo, r.m_hi, r.n_lo, r.n_hi));
        }
    } else if let Some(points) = gamma.points() {
        for &(m, n) in points {
            canon.push_str(&format!("P{m},{n};"));
        }
    }
    h.update(canon.as_bytes());
    let digest = h.finalize();
    let mut out = String::with_capacity(64);
    for byte in digest {
        out.push_str(&format!("{byte:02x}"));
    }
    out
}
