//! Reproducible Monte Carlo estimation of the law of S/sigma.
//!
//! Each replicate of S draws one innovation per nonzero weight cell from a
//! counter-based stream keyed by (seed, replicate, cell). No generator
//! state crosses replicates or cells, so any execution order, any worker
//! count, and any batching produce bit-identical samples; parallel drivers
//! only need to write results at their replicate's index.
//!
//! Zero-weight cells are skipped: their innovations are multiplied by 0
//! and cannot affect S, so the sum runs over supp(b) alone.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::innovations::InnovationModel;
use crate::numeric::normal_cdf;
use crate::rng::Stream;
use crate::summation::WeightArray;

/// Atom count cap for the exact i.i.d. sign-law oracle.
const EXACT_KS_MAX_SUMMANDS: u64 = 1_000_000;

/// Immutable sampling context: the nonzero weight cells (dense index and
/// value, in row-major support order) and sigma.
#[derive(Debug, Clone)]
pub struct SampleContext {
    cells: Vec<(u64, f64)>,
    sigma: f64,
}

impl SampleContext {
    pub fn new(b: &WeightArray) -> Self {
        SampleContext {
            cells: b.nonzero_cells(),
            sigma: b.sigma(),
        }
    }

    /// Number of innovations drawn per replicate.
    pub fn cell_count(&self) -> usize {
        self.cells.len()
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// One replicate of S/sigma. The accumulation order is the fixed
    /// row-major cell order; it is part of the determinism contract.
    pub fn sample_one(&self, law: &InnovationModel, seed: u64, replicate: u64) -> f64 {
        let mut acc = 0.0;
        for &(cell, w) in &self.cells {
            let mut stream = Stream::keyed(seed, replicate, cell);
            acc += w * law.sample(&mut stream);
        }
        acc / self.sigma
    }

    /// Replicates 0..n, sequentially. Parallel drivers replicate this by
    /// mapping `sample_one` over the same index range.
    pub fn sample_batch(&self, law: &InnovationModel, seed: u64, n: u64) -> Vec<f64> {
        (0..n).map(|i| self.sample_one(law, seed, i)).collect()
    }
}

/// Draws n replicates of S/sigma for a weight array.
pub fn sample_s(b: &WeightArray, law: &InnovationModel, n: u64, seed: u64) -> Vec<f64> {
    SampleContext::new(b).sample_batch(law, seed, n)
}

/// Exact sup-distance between the empirical CDF of the samples and the
/// standard normal CDF:
///
/// ```text
/// D_N = max_i max( i/N - Phi(x_(i)), Phi(x_(i)) - (i-1)/N )
/// ```
///
/// over the sorted samples x_(1) <= ... <= x_(N). The empirical CDF is a
/// step function, so the supremum over all z is attained at a sample point
/// from one side or the other; both one-sided gaps are checked.
pub fn empirical_ks(samples: &[f64]) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::InvalidSample("no samples".into()));
    }
    let mut sorted = Vec::with_capacity(samples.len());
    for &x in samples {
        if !x.is_finite() {
            return Err(Error::InvalidSample(alloc::format!(
                "non-finite sample {x}"
            )));
        }
        sorted.push(x);
    }
    sorted.sort_unstable_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in sorted.iter().enumerate() {
        let phi = normal_cdf(x);
        d = d.max((i + 1) as f64 / n - phi).max(phi - i as f64 / n);
    }
    Ok(d)
}

/// Distribution-free confidence margin for the empirical CDF at level
/// alpha: sqrt(ln(2/alpha) / (2N)). With probability at least 1 - alpha,
/// D_N differs from the true sup-distance by less than this margin, which
/// separates Monte Carlo noise from certified bounds.
pub fn dkw_margin(n: u64, alpha: f64) -> f64 {
    debug_assert!(n >= 1 && alpha > 0.0 && alpha < 1.0);
    libm::sqrt(libm::log(2.0 / alpha) / (2.0 * n as f64))
}

/// Exact Kolmogorov distance for the i.i.d. sign-law square: a = delta,
/// region = n x n, sign innovations. S is then a sum of M = n^2 signs, so
/// S/sigma has M+1 atoms at (2j - M)/n with binomial(M, 1/2) masses; the
/// sup-distance to the normal CDF is scanned over all atom edges.
///
/// Masses come from log-factorials and the cumulative sums use
/// compensated accumulation on the lower half, mirrored across the
/// symmetry cum_j = 1 - cum_{M-j-1}, so the CDF stays accurate to a few
/// ulps out to M = 10^6.
pub fn exact_ks_iid_rademacher(n: u64) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidParameter("side must be at least 1".into()));
    }
    let m = n
        .checked_mul(n)
        .filter(|&m| m <= EXACT_KS_MAX_SUMMANDS)
        .ok_or(Error::CapacityExceeded {
            needed: n.saturating_mul(n),
            cap: EXACT_KS_MAX_SUMMANDS,
        })?;
    let mf = m as f64;
    let ln_total = libm::lgamma(mf + 1.0);
    let ln_half = libm::log(0.5);
    let pmf = |j: u64| {
        let jf = j as f64;
        libm::exp(ln_total - libm::lgamma(jf + 1.0) - libm::lgamma(mf - jf + 1.0) + mf * ln_half)
    };

    let count = (m + 1) as usize;
    let mut cum = alloc::vec![0.0f64; count];
    // Kahan running sum over the lower half (2j < m), mirror the rest.
    let mut sum = 0.0;
    let mut comp = 0.0;
    for j in 0..count as u64 {
        if 2 * j < m {
            let y = pmf(j) - comp;
            let t = sum + y;
            comp = (t - sum) - y;
            sum = t;
            cum[j as usize] = sum;
        } else if j == m {
            cum[j as usize] = 1.0;
        } else {
            cum[j as usize] = 1.0 - cum[(m - j - 1) as usize];
        }
    }

    let sigma = n as f64;
    let mut d: f64 = 0.0;
    let mut prev = 0.0;
    for (j, &c) in cum.iter().enumerate() {
        let z = (2.0 * j as f64 - mf) / sigma;
        let phi = normal_cdf(z);
        d = d.max(c - phi).max(phi - prev);
        prev = c;
    }
    Ok(d)
}

pub const HISTOGRAM_BINS: usize = 201;
pub const HISTOGRAM_LO: f64 = -5.0;
pub const HISTOGRAM_HI: f64 = 5.0;

/// Fixed-range sample histogram: 201 equal bins on [-5,5] plus one
/// underflow and one overflow bin. Purely for reporting.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Histogram {
    underflow: u64,
    bins: Vec<u64>,
    overflow: u64,
}

impl Histogram {
    pub fn from_samples(samples: &[f64]) -> Self {
        let width = (HISTOGRAM_HI - HISTOGRAM_LO) / HISTOGRAM_BINS as f64;
        let mut h = Histogram {
            underflow: 0,
            bins: alloc::vec![0; HISTOGRAM_BINS],
            overflow: 0,
        };
        for &x in samples {
            if x < HISTOGRAM_LO {
                h.underflow += 1;
            } else if x >= HISTOGRAM_HI {
                h.overflow += 1;
            } else {
                let idx = (libm::floor((x - HISTOGRAM_LO) / width) as usize)
                    .min(HISTOGRAM_BINS - 1);
                h.bins[idx] += 1;
            }
        }
        h
    }

    pub fn underflow(&self) -> u64 {
        self.underflow
    }

    pub fn overflow(&self) -> u64 {
        self.overflow
    }

    pub fn bins(&self) -> &[u64] {
        &self.bins
    }

    pub fn total(&self) -> u64 {
        self.underflow + self.overflow + self.bins.iter().sum::<u64>()
    }

    /// Center of bin i.
    pub fn bin_center(i: usize) -> f64 {
        let width = (HISTOGRAM_HI - HISTOGRAM_LO) / HISTOGRAM_BINS as f64;
        HISTOGRAM_LO + (i as f64 + 0.5) * width
    }
}

/// Sample mean.
pub fn mean(samples: &[f64]) -> f64 {
    crate::numeric::pairwise_sum(samples) / samples.len() as f64
}

/// Biased (1/N) sample variance about the sample mean; at desk-scale N
/// the 1/N vs 1/(N-1) distinction is far below the Monte Carlo noise.
pub fn variance(samples: &[f64]) -> f64 {
    let mu = mean(samples);
    crate::numeric::pairwise_sum_by(samples.len(), &|i| {
        let d = samples[i] - mu;
        d * d
    }) / samples.len() as f64
}

/// Standard error gauge for the sample variance of S/sigma: the fourth
/// moment of S/sigma is 3 + (mu4 - 3) sum b^4 / sigma^4 for innovation
/// fourth moment mu4, and Var(sample second moment) = (mu4' - 1)/N.
pub fn variance_tolerance(b: &WeightArray, law: &InnovationModel, n: u64) -> f64 {
    let vals = b.grid().values();
    let s4 = crate::numeric::pairwise_sum_by(vals.len(), &|i| {
        let v = vals[i];
        v * v * v * v
    });
    let sigma2 = b.sigma() * b.sigma();
    let mu4_s = 3.0 + (law.fourth_moment() - 3.0) * s4 / (sigma2 * sigma2);
    4.0 * libm::sqrt((mu4_s - 1.0).max(0.0) / n as f64)
}
