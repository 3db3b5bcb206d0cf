//! Discrete production models and the exact expectation machinery behind
//! payoffs and equilibrium search.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, QuantityKind, Result};
use crate::market::{ContractProfile, SupplyProfile};

/// Probability mass must sum to one within this absolute tolerance.
pub const PROBABILITY_TOLERANCE: f64 = 1e-9;

/// Default cap on the number of joint outcomes enumerated from a product
/// model.
pub const DEFAULT_ENUMERATION_CAP: usize = 10_000_000;

/// Discrete marginal distribution of one supplier's production: a list of
/// `(value, probability)` pairs with strictly increasing values and strictly
/// positive probabilities summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteMarginal {
    support: Vec<(f64, f64)>,
}

impl DiscreteMarginal {
    pub fn new(support: Vec<(f64, f64)>) -> Result<Self> {
        if support.is_empty() {
            return Err(Error::InvalidDistribution("empty marginal support".into()));
        }
        let mut total = 0.0;
        for (k, &(value, prob)) in support.iter().enumerate() {
            if !value.is_finite() || value < 0.0 {
                return Err(Error::InvalidDistribution(format!(
                    "support value {value} at position {k} must be finite and nonnegative"
                )));
            }
            if !prob.is_finite() || prob <= 0.0 {
                return Err(Error::InvalidDistribution(format!(
                    "probability {prob} at position {k} must be strictly positive"
                )));
            }
            if k > 0 && value <= support[k - 1].0 {
                return Err(Error::InvalidDistribution(format!(
                    "support values must be strictly increasing (position {k})"
                )));
            }
            total += prob;
        }
        if (total - 1.0).abs() > PROBABILITY_TOLERANCE {
            return Err(Error::InvalidDistribution(format!(
                "probabilities sum to {total}, expected 1 within {PROBABILITY_TOLERANCE}"
            )));
        }
        Ok(Self { support })
    }

    /// Degenerate distribution putting all mass on `value`.
    pub fn point_mass(value: f64) -> Result<Self> {
        Self::new(vec![(value, 1.0)])
    }

    #[inline]
    pub fn support(&self) -> &[(f64, f64)] {
        &self.support
    }

    pub fn mean(&self) -> f64 {
        self.support.iter().map(|&(v, p)| v * p).sum()
    }

    pub fn max_value(&self) -> f64 {
        self.support.last().map(|&(v, _)| v).unwrap_or(0.0)
    }
}

/// One supplier: display name, nameplate capacity and production marginal.
#[derive(Debug, Clone, PartialEq)]
pub struct Supplier {
    pub name: String,
    pub c_max: f64,
    pub marginal: DiscreteMarginal,
}

impl Supplier {
    pub fn new(name: impl Into<String>, c_max: f64, marginal: DiscreteMarginal) -> Self {
        Self {
            name: name.into(),
            c_max,
            marginal,
        }
    }
}

/// One row of an explicit joint table.
#[derive(Debug, Clone, PartialEq)]
pub struct JointOutcome {
    pub supply: Vec<f64>,
    pub probability: f64,
}

/// How the per-supplier marginals combine into a joint distribution.
#[derive(Debug, Clone, PartialEq)]
pub enum JointModel {
    /// Independent suppliers: the joint is the product of the marginals.
    Product,
    /// Full table of joint outcomes. Must be consistent with the declared
    /// marginals; supports correlated (e.g. negatively correlated) fleets.
    Explicit(Vec<JointOutcome>),
}

/// Joint production model over all suppliers in the aggregate.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteSupplyModel {
    suppliers: Vec<Supplier>,
    joint: JointModel,
}

impl DiscreteSupplyModel {
    pub fn new(suppliers: Vec<Supplier>, joint: JointModel) -> Result<Self> {
        if suppliers.is_empty() {
            return Err(Error::InvalidDistribution(
                "model needs at least one supplier".into(),
            ));
        }
        for (i, s) in suppliers.iter().enumerate() {
            if !s.c_max.is_finite() || s.c_max <= 0.0 {
                return Err(Error::InvalidDistribution(format!(
                    "supplier {i} ({}) has non-positive capacity {}",
                    s.name, s.c_max
                )));
            }
            if s.marginal.max_value() > s.c_max {
                return Err(Error::InvalidDistribution(format!(
                    "supplier {i} ({}) has support value {} above capacity {}",
                    s.name,
                    s.marginal.max_value(),
                    s.c_max
                )));
            }
        }
        let model = Self { suppliers, joint };
        if let JointModel::Explicit(_) = model.joint {
            model.validate_explicit()?;
        }
        Ok(model)
    }

    /// Convenience constructor for independent suppliers.
    pub fn independent(suppliers: Vec<Supplier>) -> Result<Self> {
        Self::new(suppliers, JointModel::Product)
    }

    fn validate_explicit(&self) -> Result<()> {
        let JointModel::Explicit(table) = &self.joint else {
            return Ok(());
        };
        if table.is_empty() {
            return Err(Error::InvalidDistribution(
                "empty explicit joint table".into(),
            ));
        }
        let n = self.suppliers.len();
        // Accumulated marginal mass per (supplier, support index).
        let mut acc: Vec<Vec<f64>> = self
            .suppliers
            .iter()
            .map(|s| vec![0.0; s.marginal.support().len()])
            .collect();
        let mut total = 0.0;
        for (row, outcome) in table.iter().enumerate() {
            if outcome.supply.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: outcome.supply.len(),
                });
            }
            if !outcome.probability.is_finite() || outcome.probability <= 0.0 {
                return Err(Error::InvalidDistribution(format!(
                    "joint row {row} has non-positive probability {}",
                    outcome.probability
                )));
            }
            total += outcome.probability;
            for (i, &wi) in outcome.supply.iter().enumerate() {
                if !wi.is_finite() || wi < 0.0 {
                    return Err(Error::InvalidDistribution(format!(
                        "joint row {row}: value {wi} for supplier {i} must be finite and nonnegative"
                    )));
                }
                let support = self.suppliers[i].marginal.support();
                let Some(slot) = support
                    .iter()
                    .position(|&(v, _)| (v - wi).abs() <= PROBABILITY_TOLERANCE)
                else {
                    return Err(Error::InvalidDistribution(format!(
                        "joint row {row}: value {wi} for supplier {i} is not in its marginal support"
                    )));
                };
                acc[i][slot] += outcome.probability;
            }
        }
        if (total - 1.0).abs() > PROBABILITY_TOLERANCE {
            return Err(Error::InvalidDistribution(format!(
                "joint probabilities sum to {total}, expected 1 within {PROBABILITY_TOLERANCE}"
            )));
        }
        for (i, supplier) in self.suppliers.iter().enumerate() {
            for (slot, &(value, declared)) in supplier.marginal.support().iter().enumerate() {
                if (acc[i][slot] - declared).abs() > PROBABILITY_TOLERANCE {
                    return Err(Error::InvalidDistribution(format!(
                        "joint table implies marginal {} for supplier {i} at value {value}, \
                         declared {declared}",
                        acc[i][slot]
                    )));
                }
            }
        }
        Ok(())
    }

    #[inline]
    pub fn supplier_count(&self) -> usize {
        self.suppliers.len()
    }

    #[inline]
    pub fn suppliers(&self) -> &[Supplier] {
        &self.suppliers
    }

    #[inline]
    pub fn supplier(&self, i: usize) -> &Supplier {
        &self.suppliers[i]
    }

    #[inline]
    pub fn joint(&self) -> &JointModel {
        &self.joint
    }

    /// Checks that a contract profile matches this model in length and stays
    /// within every supplier's feasible set `[0, c_max]`.
    pub fn require_feasible_contract(&self, c: &ContractProfile) -> Result<()> {
        if c.len() != self.suppliers.len() {
            return Err(Error::DimensionMismatch {
                expected: self.suppliers.len(),
                got: c.len(),
            });
        }
        for (i, (&ci, s)) in c.as_slice().iter().zip(&self.suppliers).enumerate() {
            if ci > s.c_max {
                return Err(Error::InfeasibleQuantity {
                    kind: QuantityKind::Contract,
                    supplier: i,
                    value: ci,
                    max: s.c_max,
                });
            }
        }
        Ok(())
    }

    /// Number of joint outcomes a product enumeration would produce.
    fn product_size(&self) -> u128 {
        self.suppliers
            .iter()
            .map(|s| s.marginal.support().len() as u128)
            .product()
    }

    /// Streams every joint outcome `(w, prob)` into `visit`, in lexicographic
    /// support order for product joints and table order for explicit ones.
    fn for_each_outcome(&self, cap: usize, mut visit: impl FnMut(&[f64], f64)) -> Result<()> {
        match &self.joint {
            JointModel::Explicit(table) => {
                for outcome in table {
                    visit(&outcome.supply, outcome.probability);
                }
                Ok(())
            }
            JointModel::Product => {
                let required = self.product_size();
                if required > cap as u128 {
                    return Err(Error::CapacityExceeded { required, cap });
                }
                let n = self.suppliers.len();
                let mut idx = vec![0usize; n];
                let mut w = vec![0.0f64; n];
                loop {
                    let mut prob = 1.0;
                    for i in 0..n {
                        let (value, p) = self.suppliers[i].marginal.support()[idx[i]];
                        w[i] = value;
                        prob *= p;
                    }
                    visit(&w, prob);
                    // odometer: last supplier varies fastest
                    let mut i = n;
                    loop {
                        if i == 0 {
                            return Ok(());
                        }
                        i -= 1;
                        idx[i] += 1;
                        if idx[i] < self.suppliers[i].marginal.support().len() {
                            break;
                        }
                        idx[i] = 0;
                    }
                }
            }
        }
    }

    /// Exhaustive list of joint outcomes with probabilities.
    pub fn enumerate_joint(&self) -> Result<Vec<(SupplyProfile, f64)>> {
        self.enumerate_joint_capped(DEFAULT_ENUMERATION_CAP)
    }

    pub fn enumerate_joint_capped(&self, cap: usize) -> Result<Vec<(SupplyProfile, f64)>> {
        let mut out = Vec::new();
        self.for_each_outcome(cap, |w, prob| {
            out.push((
                SupplyProfile::new(w.to_vec()).expect("validated support"),
                prob,
            ));
        })?;
        Ok(out)
    }

    /// `E[f(w)] = Σ p(w)·f(w)` over the enumerated joint distribution.
    pub fn expectation(&self, f: impl FnMut(&SupplyProfile) -> f64) -> Result<f64> {
        self.expectation_capped(DEFAULT_ENUMERATION_CAP, f)
    }

    pub fn expectation_capped(
        &self,
        cap: usize,
        mut f: impl FnMut(&SupplyProfile) -> f64,
    ) -> Result<f64> {
        let mut total = 0.0;
        let mut scratch = SupplyProfile::new(vec![0.0; self.suppliers.len()])?;
        self.for_each_outcome(cap, |w, prob| {
            scratch.copy_from(w);
            total += prob * f(&scratch);
        })?;
        Ok(total)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn wind_pair() -> DiscreteSupplyModel {
        crate::market::tests::wind_pair()
    }

    #[test]
    fn marginal_validation() {
        assert!(DiscreteMarginal::new(vec![]).is_err());
        assert!(DiscreteMarginal::new(vec![(1.0, 0.5), (2.0, 0.4)]).is_err()); // sums to 0.9
        assert!(DiscreteMarginal::new(vec![(2.0, 0.5), (1.0, 0.5)]).is_err()); // not increasing
        assert!(DiscreteMarginal::new(vec![(1.0, 0.0), (2.0, 1.0)]).is_err()); // zero prob
        assert!(DiscreteMarginal::new(vec![(-1.0, 1.0)]).is_err()); // negative value
        let m = DiscreteMarginal::new(vec![(1.0, 0.7), (2.0, 0.3)]).unwrap();
        assert!((m.mean() - 1.3).abs() < 1e-12);
    }

    #[test]
    fn model_rejects_support_above_capacity() {
        let m = DiscreteMarginal::new(vec![(1.0, 0.5), (3.0, 0.5)]).unwrap();
        assert!(DiscreteSupplyModel::independent(vec![Supplier::new("a", 2.0, m)]).is_err());
    }

    #[test]
    fn enumerate_wind_pair() {
        let model = wind_pair();
        let joint = model.enumerate_joint().unwrap();
        let expected = [
            (vec![1.0, 1.0], 0.7 * 0.3),
            (vec![1.0, 2.0], 0.7 * 0.7),
            (vec![2.0, 1.0], 0.3 * 0.3),
            (vec![2.0, 2.0], 0.3 * 0.7),
        ];
        assert_eq!(joint.len(), 4);
        for ((w, p), (ew, ep)) in joint.iter().zip(&expected) {
            assert_eq!(w.as_slice(), ew.as_slice());
            assert!((p - ep).abs() < 1e-15);
        }
        let total: f64 = joint.iter().map(|&(_, p)| p).sum();
        assert!((total - 1.0).abs() < 1e-9);
    }

    #[test]
    fn enumerate_point_mass() {
        let m = DiscreteMarginal::point_mass(1.0).unwrap();
        let model = DiscreteSupplyModel::independent(vec![Supplier::new("a", 1.5, m)]).unwrap();
        let joint = model.enumerate_joint().unwrap();
        assert_eq!(joint.len(), 1);
        assert_eq!(joint[0].0.as_slice(), &[1.0]);
        assert_eq!(joint[0].1, 1.0);
    }

    #[test]
    fn explicit_passthrough_and_validation() {
        let product = wind_pair();
        let table: Vec<JointOutcome> = product
            .enumerate_joint()
            .unwrap()
            .into_iter()
            .map(|(w, p)| JointOutcome {
                supply: w.as_slice().to_vec(),
                probability: p,
            })
            .collect();
        let explicit = DiscreteSupplyModel::new(
            product.suppliers().to_vec(),
            JointModel::Explicit(table.clone()),
        )
        .unwrap();
        let joint = explicit.enumerate_joint().unwrap();
        assert_eq!(joint.len(), table.len());
        for ((w, p), row) in joint.iter().zip(&table) {
            assert_eq!(w.as_slice(), row.supply.as_slice());
            assert_eq!(*p, row.probability);
        }

        // Explicit joint whose implied marginals disagree with the declared
        // ones is rejected.
        let mut bad = table;
        bad[0].probability = 0.3;
        bad[1].probability = 0.4; // still sums to 1.0 but marginals shift
        bad[2].probability = 0.09;
        bad[3].probability = 0.21;
        assert!(
            DiscreteSupplyModel::new(product.suppliers().to_vec(), JointModel::Explicit(bad))
                .is_err()
        );
    }

    #[test]
    fn explicit_joint_bad_sum_rejected() {
        let m = DiscreteMarginal::new(vec![(0.0, 0.5), (1.0, 0.5)]).unwrap();
        let suppliers = vec![Supplier::new("a", 1.0, m)];
        let table = vec![
            JointOutcome {
                supply: vec![0.0],
                probability: 0.5,
            },
            JointOutcome {
                supply: vec![1.0],
                probability: 0.4,
            },
        ];
        assert!(DiscreteSupplyModel::new(suppliers, JointModel::Explicit(table)).is_err());
    }

    #[test]
    fn enumeration_cap() {
        let m = DiscreteMarginal::new(vec![(0.0, 0.25), (1.0, 0.25), (2.0, 0.25), (3.0, 0.25)])
            .unwrap();
        let suppliers: Vec<Supplier> = (0..4)
            .map(|i| Supplier::new(format!("s{i}"), 3.0, m.clone()))
            .collect();
        let model = DiscreteSupplyModel::independent(suppliers).unwrap();
        // 4^4 = 256 outcomes
        assert_eq!(model.enumerate_joint().unwrap().len(), 256);
        match model.enumerate_joint_capped(255) {
            Err(Error::CapacityExceeded { required, cap }) => {
                assert_eq!(required, 256);
                assert_eq!(cap, 255);
            }
            other => panic!("expected capacity error, got {other:?}"),
        }
    }

    #[test]
    fn expectation_examples() {
        let model = wind_pair();
        let k = model.expectation(|_| 4.25).unwrap();
        assert!((k - 4.25).abs() < 1e-12);
        let mean1 = model.expectation(|w| w.as_slice()[0]).unwrap();
        assert!((mean1 - 1.3).abs() < 1e-12);
        let mean_sum = model
            .expectation(|w| w.as_slice()[0] + w.as_slice()[1])
            .unwrap();
        assert!((mean_sum - 3.0).abs() < 1e-12);
    }

    #[test]
    fn product_and_explicit_from_product_agree() {
        let product = wind_pair();
        let table: Vec<JointOutcome> = product
            .enumerate_joint()
            .unwrap()
            .into_iter()
            .map(|(w, p)| JointOutcome {
                supply: w.as_slice().to_vec(),
                probability: p,
            })
            .collect();
        let explicit =
            DiscreteSupplyModel::new(product.suppliers().to_vec(), JointModel::Explicit(table))
                .unwrap();
        for f in [
            |w: &SupplyProfile| w.as_slice()[0] * 2.0 - w.as_slice()[1],
            |w: &SupplyProfile| (w.as_slice()[0] - 1.3) * (w.as_slice()[1] - 1.7),
        ] {
            let a = product.expectation(f).unwrap();
            let b = explicit.expectation(f).unwrap();
            assert!((a - b).abs() < 1e-12);
        }
    }
}
