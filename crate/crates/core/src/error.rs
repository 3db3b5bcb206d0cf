use alloc::string::String;
use core::fmt;

/// Crate-wide result alias.
pub type Result<T> = core::result::Result<T, Error>;

/// Which bounded quantity an [`Error::InfeasibleQuantity`] refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuantityKind {
    Contract,
    Supply,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Two per-supplier vectors (or a vector and a model) disagree in length.
    DimensionMismatch { expected: usize, got: usize },
    /// Joint enumeration or the contract grid would exceed the configured cap.
    CapacityExceeded { required: u128, cap: usize },
    /// Prices violate q > 0 or the non-triviality condition |lambda| < p < q.
    InvalidPrices { q: f64, lambda: f64, p: f64 },
    /// A contract or supply entry is negative, non-finite, or above capacity.
    InfeasibleQuantity {
        kind: QuantityKind,
        supplier: usize,
        value: f64,
        max: f64,
    },
    /// A marginal or joint distribution failed validation.
    InvalidDistribution(String),
    /// The contract grid step must be finite and positive.
    InvalidGridStep(f64),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::DimensionMismatch { expected, got } => {
                write!(
                    f,
                    "dimension mismatch: expected {expected} suppliers, got {got}"
                )
            }
            Error::CapacityExceeded { required, cap } => write!(
                f,
                "enumeration of {required} states exceeds the cap of {cap}; \
                 use an explicit sparse joint table or a coarser model/grid"
            ),
            Error::InvalidPrices { q, lambda, p } => write!(
                f,
                "prices (q={q}, lambda={lambda}, p={p}) violate q > 0 and |lambda| < p < q"
            ),
            Error::InfeasibleQuantity {
                kind,
                supplier,
                value,
                max,
            } => {
                let what = match kind {
                    QuantityKind::Contract => "contract",
                    QuantityKind::Supply => "supply",
                };
                write!(
                    f,
                    "{what} {value} for supplier {supplier} outside the feasible range [0, {max}]"
                )
            }
            Error::InvalidDistribution(msg) => write!(f, "invalid distribution: {msg}"),
            Error::InvalidGridStep(h) => write!(f, "grid step {h} must be finite and positive"),
        }
    }
}

impl core::error::Error for Error {}
