//! Worker-count control for replicate sampling.
//!
//! CLT_LAB_THREADS caps the rayon pool. The results are identical for any
//! worker count: each replicate draws from streams keyed by (seed,
//! replicate, cell), and rows are collected in replicate order.

use clt_lab_core::{InnovationModel, SampleContext};
use rayon::prelude::*;

use crate::error::{LabError, Result};

pub const THREADS_ENV: &str = "CLT_LAB_THREADS";

/// Worker count from the environment; 0 means "let the pool decide".
pub fn thread_count() -> Result<usize> {
    match std::env::var(THREADS_ENV) {
        Err(std::env::VarError::NotPresent) => Ok(0),
        Err(e) => Err(LabError::Invalid(format!("{THREADS_ENV}: {e}"))),
        Ok(s) => s.trim().parse().map_err(|_| {
            LabError::Invalid(format!(
                "{THREADS_ENV} must be a non-negative integer, got {s:?}"
            ))
        }),
    }
}

/// Draws replicates 0..n of S/sigma, in index order.
pub fn sample_batch_parallel(
    ctx: &SampleContext,
    law: &InnovationModel,
    seed: u64,
    n: u64,
) -> Result<Vec<f64>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(thread_count()?)
        .build()
        .map_err(|e| LabError::Invalid(format!("thread pool: {e}")))?;
    let n = usize::try_from(n)
        .map_err(|_| LabError::Invalid(format!("sample count {n} exceeds address space")))?;
    Ok(pool.install(|| {
        (0..n)
            .into_par_iter()
            .map(|rep| ctx.sample_one(law, seed, rep as u64))
            .collect()
    }))
}
