//! Market primitives: imbalance prices, contract/supply/deviation profiles,
//! the system cost function and the aggregate's expected payoff.

use alloc::vec::Vec;

use crate::error::{Error, QuantityKind, Result};
use crate::prob::DiscreteSupplyModel;

/// Absolute band inside which a deviation counts as zero wherever a formula
/// branches on the sign of `d`. Keeps the case split at `d = 0` numerically
/// stable; positive parts themselves are computed exactly.
pub const SIGN_TOLERANCE: f64 = 1e-12;

/// `[x]+ = max(0, x)`, exact (no tolerance).
#[inline]
pub fn pos_part(x: f64) -> f64 {
    x.max(0.0)
}

/// Expected imbalance prices θ = (q, λ) together with the market clearing
/// price p.
///
/// `q > 0` is the penalty per unit of aggregate shortfall; `λ` prices the
/// aggregate surplus (penalty when negative, bonus when nonnegative). The
/// non-triviality condition `|λ| < p < q` is enforced by [`new`]; use
/// [`new_unchecked`] to explore regimes outside it.
///
/// [`new`]: ImbalancePrices::new
/// [`new_unchecked`]: ImbalancePrices::new_unchecked
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImbalancePrices {
    q: f64,
    lambda: f64,
    p: f64,
}

impl ImbalancePrices {
    pub fn new(q: f64, lambda: f64, p: f64) -> Result<Self> {
        let ok = q.is_finite()
            && lambda.is_finite()
            && p.is_finite()
            && q > 0.0
            && lambda.abs() < p
            && p < q;
        if ok {
            Ok(Self { q, lambda, p })
        } else {
            Err(Error::InvalidPrices { q, lambda, p })
        }
    }

    /// Builds prices without the non-triviality check. Finiteness is still
    /// required; everything downstream assumes real numbers.
    pub fn new_unchecked(q: f64, lambda: f64, p: f64) -> Self {
        debug_assert!(q.is_finite() && lambda.is_finite() && p.is_finite());
        Self { q, lambda, p }
    }

    /// Penalty per unit of shortfall.
    #[inline]
    pub fn q(&self) -> f64 {
        self.q
    }

    /// Price per unit of surplus (negative = penalty, nonnegative = bonus).
    #[inline]
    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Market clearing price.
    #[inline]
    pub fn p(&self) -> f64 {
        self.p
    }
}

/// Per-supplier forward contracts, one entry per supplier.
#[derive(Debug, Clone, PartialEq)]
pub struct ContractProfile(Vec<f64>);

impl ContractProfile {
    /// Entries must be finite and nonnegative; the per-supplier upper bound
    /// `c_max` is checked against a model via
    /// [`DiscreteSupplyModel::require_feasible_contract`].
    pub fn new(contracts: Vec<f64>) -> Result<Self> {
        for (i, &c) in contracts.iter().enumerate() {
            if !c.is_finite() || c < 0.0 {
                return Err(Error::InfeasibleQuantity {
                    kind: QuantityKind::Contract,
                    supplier: i,
                    value: c,
                    max: f64::INFINITY,
                });
            }
        }
        Ok(Self(contracts))
    }

    #[inline]
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.0.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Aggregate contract c = Σ c_i.
    pub fn total(&self) -> f64 {
        self.0.iter().sum()
    }
}

/// Per-supplier realized productions.
#[derive(Debug, Clone, PartialEq)]
pub struct SupplyProfile(Vec<f64>);

impl SupplyProfile {
    pub fn new(supplies: Vec<f64>) -> Result<Self> {
        for (i, &w) in supplies.iter().enumerate() {
            if !w.is_finite() || w < 0.0 {
                return Err(Error::InfeasibleQuantity {
                    kind: QuantityKind::Supply,
                    supplier: i,
                    value: w,
                    max: f64::INFINITY,
                });
            }
        }
        Ok(Self(supplies))
    }

    #[inline]
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.0.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    // Reuse one buffer while streaming joint outcomes.
    #[inline]
    pub(crate) fn copy_from(&mut self, values: &[f64]) {
        self.0.clear();
        self.0.extend_from_slice(values);
    }
}

/// Signed per-supplier deviations d_i = c_i − w_i plus their exact sum.
#[derive(Debug, Clone, PartialEq)]
pub struct DeviationProfile {
    entries: Vec<f64>,
    aggregate: f64,
}

impl DeviationProfile {
    /// Wraps raw deviations; the aggregate is the exact sum of the entries.
    pub fn new(entries: Vec<f64>) -> Self {
        let aggregate = entries.iter().sum();
        Self { entries, aggregate }
    }

    #[inline]
    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    #[inline]
    pub fn aggregate(&self) -> f64 {
        self.aggregate
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Elementwise deviation d_i = c_i − w_i of a contract profile from a supply
/// profile.
pub fn deviations(c: &ContractProfile, w: &SupplyProfile) -> Result<DeviationProfile> {
    if c.len() != w.len() {
        return Err(Error::DimensionMismatch {
            expected: c.len(),
            got: w.len(),
        });
    }
    let entries: Vec<f64> = c
        .as_slice()
        .iter()
        .zip(w.as_slice())
        .map(|(&ci, &wi)| ci - wi)
        .collect();
    Ok(DeviationProfile::new(entries))
}

/// Cost charged by the system operator for an aggregate deviation `d`:
///
/// `S(d, θ) = q·[d]+ − λ·[−d]+`
///
/// Positive values are a cost to the aggregate, negative values a bonus.
#[inline]
pub fn system_cost(aggregate_deviation: f64, prices: &ImbalancePrices) -> f64 {
    prices.q() * pos_part(aggregate_deviation) - prices.lambda() * pos_part(-aggregate_deviation)
}

/// Expected payoff of the whole aggregate for contract profile `c`:
/// `p·Σc_i − E[S(d, θ)]`, the expectation taken over the joint supply
/// distribution.
pub fn aggregate_expected_payoff(
    c: &ContractProfile,
    model: &DiscreteSupplyModel,
    prices: &ImbalancePrices,
) -> Result<f64> {
    model.require_feasible_contract(c)?;
    let expected_cost = model.expectation(|w| {
        let d: f64 = c
            .as_slice()
            .iter()
            .zip(w.as_slice())
            .map(|(&ci, &wi)| ci - wi)
            .sum();
        system_cost(d, prices)
    })?;
    Ok(prices.p() * c.total() - expected_cost)
}
