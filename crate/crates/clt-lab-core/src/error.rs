use alloc::string::String;
use core::fmt;

/// Errors reported by the construction and evaluation routines.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A region descriptor violates its invariants (empty, overlapping
    /// rectangles, duplicate points, or coordinate overflow).
    InvalidRegion(String),
    /// A numeric argument is outside its documented domain.
    InvalidParameter(String),
    /// The weight array is identically zero, so the standardized sum is
    /// undefined.
    DegenerateVariance,
    /// A dense allocation or enumeration would exceed the configured cap.
    CapacityExceeded { needed: u64, cap: u64 },
    /// The operation is defined for rectangle-union regions only.
    NotRectUnion,
    /// A sample value is not finite.
    InvalidSample(String),
    /// An intermediate aggregate overflowed to infinity or NaN.
    NonFinite(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidRegion(msg) => write!(f, "invalid region: {msg}"),
            Error::InvalidParameter(msg) => write!(f, "invalid parameter: {msg}"),
            Error::DegenerateVariance => {
                write!(f, "degenerate variance: all summation weights are zero")
            }
            Error::CapacityExceeded { needed, cap } => {
                write!(f, "capacity exceeded: {needed} cells needed, cap is {cap}")
            }
            Error::NotRectUnion => {
                write!(f, "operation requires a rectangle-union region")
            }
            Error::InvalidSample(msg) => write!(f, "invalid sample: {msg}"),
            Error::NonFinite(msg) => write!(f, "non-finite aggregate: {msg}"),
        }
    }
}

impl core::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;
