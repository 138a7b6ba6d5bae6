//! Numerical verification kit for the normal approximation of rectangular
//! sums of two-dimensional linear random fields.
//!
//! A moving-average field X over the integer lattice is driven by i.i.d.
//! innovations through a finite coefficient array a. Summing X over a
//! finite region Gamma collapses, by exchanging summation order, to a
//! single weighted sum of innovations
//!
//! ```text
//! S = sum over (r,s) of b_{r,s} xi_{-r,-s},
//! b_{r,s} = sum over (j,k) in Gamma of a_{j+r, k+s},
//! ```
//!
//! so everything about the law of S/sigma is a statement about the weight
//! array b. This crate computes b by two independent routes, the variance
//! sigma^2 and the critical ratio rho = max|b|/sigma, evaluates explicit
//! upper bounds on rho and on the Kolmogorov distance between S/sigma and
//! the standard normal, builds epsilon-delta certificates from innovation
//! classes, and estimates the distance by reproducible Monte Carlo.
//!
//! The crate is `no_std` (with `alloc`): all numerics go through `libm`,
//! and nothing here does IO. The companion binary crate supplies file
//! formats, parallel drivers, and the command-line surface.

#![cfg_attr(not(test), no_std)]
#![deny(unsafe_code)]
// Frozen oracle constants keep their full published decimal expansions,
// and guards spelled !(x > 0.0) are deliberate: they catch NaN where
// x <= 0.0 would let it through.
#![allow(clippy::excessive_precision, clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod bounds;
pub mod error;
pub mod fixtures;
pub mod innovations;
pub mod lattice;
pub mod montecarlo;
pub mod numeric;
pub mod rng;
pub mod summation;

pub use bounds::{
    crude_bound, epsilon_delta_certificate, ks_upper_bound, lp_norm, rectangle_bound, Certificate,
    GroupedWeights, HClass, KsUpperBound, RectangleBound,
};
pub use error::{Error, Result};
pub use innovations::{DiscreteLaw, InnovationModel};
pub use lattice::{CoefficientArray, Grid, Rect, Region};
pub use montecarlo::{
    dkw_margin, empirical_ks, exact_ks_iid_rademacher, sample_s, Histogram, SampleContext,
};
pub use rng::Stream;
pub use summation::{weights_direct, weights_fast, SecondDifferenceArray, WeightArray};

/// Crate version, embedded in report manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
