//! The contract game G(N, C, π): each supplier picks a forward contract on
//! her grid to maximize the expected payoff `π_i = p·c_i − E[φ_i]`.
//!
//! Strategy sets are discretized to a step `h`: supplier i plays on
//! `{0, h, 2h, …} ∩ [0, c_max_i]` with both endpoints always included.
//! [`GameSpec::find_pure_nash`] certifies ε-Nash profiles exhaustively — a
//! profile is reported iff no supplier can gain more than ε by moving to any
//! other point of her own grid line. Expected payoffs are exact enumerations
//! over the joint supply distribution (no sampling), so certificates are
//! deterministic.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::market::{deviations, pos_part, ContractProfile, ImbalancePrices};
use crate::mechanism::{share_from_sums, shares, MechanismKind, ShareSums};
use crate::prob::DiscreteSupplyModel;

/// Default cap on the number of joint contract-grid profiles.
pub const DEFAULT_PROFILE_CAP: usize = 10_000_000;

/// Default ε for Nash certification, in currency units.
pub const DEFAULT_EPSILON: f64 = 1e-6;

/// Grid points within this tolerance of the best payoff count as ties.
pub const TIE_TOLERANCE: f64 = 1e-9;

/// Slack for the payoff-shape classification.
pub const SHAPE_TOLERANCE: f64 = 1e-9;

/// Grid points this close to the capacity snap onto it.
const GRID_SNAP: f64 = 1e-9;

/// A discretized contract game.
#[derive(Debug, Clone)]
pub struct GameSpec {
    model: DiscreteSupplyModel,
    prices: ImbalancePrices,
    kind: MechanismKind,
    grid_step: f64,
    profile_cap: usize,
}

/// One certified ε-Nash profile.
#[derive(Debug, Clone, PartialEq)]
pub struct Equilibrium {
    pub contracts: ContractProfile,
    pub payoffs: Vec<f64>,
    /// The certificate: the largest payoff any supplier could still gain by
    /// a unilateral move on her own grid line (≤ ε).
    pub gap: f64,
}

/// Result of an exhaustive ε-Nash scan, sorted lexicographically by
/// contracts.
#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumReport {
    pub epsilon: f64,
    pub equilibria: Vec<Equilibrium>,
    pub profiles_scanned: usize,
    /// Smallest best-response gap among rejected profiles; how close the
    /// nearest non-equilibrium came.
    pub min_rejected_gap: Option<f64>,
}

impl EquilibriumReport {
    /// Looks up a certified profile by contract values.
    pub fn equilibrium_at(&self, contracts: &[f64], tol: f64) -> Option<&Equilibrium> {
        self.equilibria.iter().find(|e| {
            e.contracts.len() == contracts.len()
                && e.contracts
                    .as_slice()
                    .iter()
                    .zip(contracts)
                    .all(|(a, b)| (a - b).abs() <= tol)
        })
    }
}

/// Argmax set (ties kept) of one supplier's payoff over her own grid.
#[derive(Debug, Clone, PartialEq)]
pub struct BestResponse {
    pub contracts: Vec<f64>,
    pub payoff: f64,
}

/// Shape of a sampled payoff slice.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShapeClass {
    Concave,
    QuasiConcave,
    Neither,
}

impl ShapeClass {
    pub fn name(&self) -> &'static str {
        match self {
            ShapeClass::Concave => "concave",
            ShapeClass::QuasiConcave => "quasi-concave",
            ShapeClass::Neither => "neither",
        }
    }
}

/// Payoff samples along one supplier's grid with the opponents held fixed.
#[derive(Debug, Clone, PartialEq)]
pub struct ShapeScan {
    pub axis: usize,
    pub fixed_others: Vec<f64>,
    /// `(contract, expected payoff)` pairs on the supplier's grid.
    pub samples: Vec<(f64, f64)>,
    pub classification: ShapeClass,
    /// Contract range of the payoff plateau (argmax within tolerance): the
    /// empirical boundary between the rising and falling regions.
    pub peak_start: f64,
    pub peak_end: f64,
}

impl GameSpec {
    pub fn new(
        model: DiscreteSupplyModel,
        prices: ImbalancePrices,
        kind: MechanismKind,
        grid_step: f64,
    ) -> Result<Self> {
        if !grid_step.is_finite() || grid_step <= 0.0 {
            return Err(Error::InvalidGridStep(grid_step));
        }
        Ok(Self {
            model,
            prices,
            kind,
            grid_step,
            profile_cap: DEFAULT_PROFILE_CAP,
        })
    }

    pub fn with_profile_cap(mut self, cap: usize) -> Self {
        self.profile_cap = cap;
        self
    }

    #[inline]
    pub fn model(&self) -> &DiscreteSupplyModel {
        &self.model
    }

    #[inline]
    pub fn prices(&self) -> &ImbalancePrices {
        &self.prices
    }

    #[inline]
    pub fn kind(&self) -> MechanismKind {
        self.kind
    }

    #[inline]
    pub fn grid_step(&self) -> f64 {
        self.grid_step
    }

    /// Supplier i's strategy grid `{0, h, 2h, …} ∩ [0, c_max]`, both
    /// endpoints included (the last step snaps onto `c_max`).
    pub fn grid(&self, supplier: usize) -> Vec<f64> {
        let c_max = self.model.supplier(supplier).c_max;
        let mut grid = Vec::new();
        let mut k = 0u64;
        loop {
            let v = k as f64 * self.grid_step;
            if v > c_max - GRID_SNAP {
                break;
            }
            grid.push(v);
            k += 1;
        }
        grid.push(c_max);
        grid
    }

    /// Estimated grid length without materializing it; used to reject
    /// oversized scans before allocating. The cast truncates and saturates,
    /// which is exactly the bound needed here.
    fn grid_len_estimate(&self, supplier: usize) -> u128 {
        let c_max = self.model.supplier(supplier).c_max;
        let interior = ((c_max - GRID_SNAP) / self.grid_step) as u128;
        interior.saturating_add(2)
    }

    /// Expected payoff of one supplier: `π_i = p·c_i − E[φ_i(d(c,w), θ, J)]`.
    pub fn expected_payoff(&self, supplier: usize, c: &ContractProfile) -> Result<f64> {
        self.model.require_feasible_contract(c)?;
        assert!(
            supplier < self.model.supplier_count(),
            "supplier index {supplier} out of range"
        );
        let prices = self.prices;
        let kind = self.kind;
        let expected_share = self.model.expectation(|w| {
            let d = deviations(c, w).expect("dimension checked");
            shares(&d, &prices, kind).shares[supplier]
        })?;
        Ok(self.prices.p() * c.as_slice()[supplier] - expected_share)
    }

    /// Expected payoffs of every supplier at profile `c`.
    pub fn payoffs(&self, c: &ContractProfile) -> Result<Vec<f64>> {
        (0..self.model.supplier_count())
            .map(|i| self.expected_payoff(i, c))
            .collect()
    }

    /// Exhaustive scan of supplier i's own grid with the opponents fixed at
    /// `c_others` (in supplier order, skipping i). Ties within
    /// [`TIE_TOLERANCE`] of the maximum are all kept.
    pub fn best_response(&self, supplier: usize, c_others: &[f64]) -> Result<BestResponse> {
        let samples = self.line_samples(supplier, c_others)?;
        let payoff = samples
            .iter()
            .map(|&(_, y)| y)
            .fold(f64::NEG_INFINITY, f64::max);
        let contracts = samples
            .iter()
            .filter(|&&(_, y)| y >= payoff - TIE_TOLERANCE)
            .map(|&(x, _)| x)
            .collect();
        Ok(BestResponse { contracts, payoff })
    }

    /// Samples `π_i` along supplier i's grid and classifies the curve:
    /// concave if no generalized second difference exceeds the tolerance,
    /// else quasi-concave if the sequence is single-peaked (non-decreasing
    /// then non-increasing, with slack), else neither.
    pub fn shape_scan(&self, supplier: usize, c_others: &[f64]) -> Result<ShapeScan> {
        let samples = self.line_samples(supplier, c_others)?;
        let classification = classify_shape(&samples);
        let peak = samples
            .iter()
            .map(|&(_, y)| y)
            .fold(f64::NEG_INFINITY, f64::max);
        let peak_start = samples
            .iter()
            .find(|&&(_, y)| y >= peak - SHAPE_TOLERANCE)
            .map(|&(x, _)| x)
            .unwrap_or(0.0);
        let peak_end = samples
            .iter()
            .rev()
            .find(|&&(_, y)| y >= peak - SHAPE_TOLERANCE)
            .map(|&(x, _)| x)
            .unwrap_or(0.0);
        Ok(ShapeScan {
            axis: supplier,
            fixed_others: c_others.to_vec(),
            samples,
            classification,
            peak_start,
            peak_end,
        })
    }

    fn line_samples(&self, supplier: usize, c_others: &[f64]) -> Result<Vec<(f64, f64)>> {
        let n = self.model.supplier_count();
        assert!(supplier < n, "supplier index {supplier} out of range");
        if c_others.len() != n - 1 {
            return Err(Error::DimensionMismatch {
                expected: n - 1,
                got: c_others.len(),
            });
        }
        let mut full = Vec::with_capacity(n);
        let mut rest = c_others.iter();
        for j in 0..n {
            if j == supplier {
                full.push(0.0);
            } else {
                full.push(*rest.next().expect("length checked"));
            }
        }
        let grid = self.grid(supplier);
        let mut samples = Vec::with_capacity(grid.len());
        for &v in &grid {
            full[supplier] = v;
            let c = ContractProfile::new(full.clone())?;
            samples.push((v, self.expected_payoff(supplier, &c)?));
        }
        Ok(samples)
    }

    /// Enumerates every joint grid profile and reports each one where no
    /// supplier can gain more than `epsilon` on her own grid line, sorted
    /// lexicographically by contracts.
    ///
    /// Per supplier, payoffs are swept line by line with the opponents'
    /// deviation sums precomputed per outcome, so each grid point costs
    /// O(outcomes) instead of O(outcomes·n).
    pub fn find_pure_nash(&self, epsilon: f64) -> Result<EquilibriumReport> {
        let n = self.model.supplier_count();
        let estimate: u128 = (0..n).map(|i| self.grid_len_estimate(i)).product();
        if estimate > self.profile_cap as u128 {
            return Err(Error::CapacityExceeded {
                required: estimate,
                cap: self.profile_cap,
            });
        }
        let grids: Vec<Vec<f64>> = (0..n).map(|i| self.grid(i)).collect();
        let sizes: Vec<usize> = grids.iter().map(Vec::len).collect();
        let total_wide: u128 = sizes.iter().map(|&s| s as u128).product();
        if total_wide > self.profile_cap as u128 {
            return Err(Error::CapacityExceeded {
                required: total_wide,
                cap: self.profile_cap,
            });
        }
        let total = total_wide as usize;

        // flat index = Σ idx_i · stride_i, supplier 0 most significant
        let mut stride = vec![1usize; n];
        for i in (0..n.saturating_sub(1)).rev() {
            stride[i] = stride[i + 1] * sizes[i + 1];
        }

        let outcomes = self.model.enumerate_joint()?;
        let m = outcomes.len();
        let p = self.prices.p();

        // Largest unilateral improvement seen so far for each profile.
        let mut gap = vec![0.0f64; total];

        for i in 0..n {
            let own = &grids[i];
            let others: Vec<usize> = (0..n).filter(|&j| j != i).collect();
            let rest_total = total / sizes[i];
            let mut other_idx = vec![0usize; others.len()];
            let mut rest_agg = vec![0.0f64; m];
            let mut rest_plus = vec![0.0f64; m];
            let mut rest_minus = vec![0.0f64; m];
            let mut line = vec![0.0f64; own.len()];

            for _ in 0..rest_total {
                let mut base = 0usize;
                for (slot, &j) in others.iter().enumerate() {
                    base += other_idx[slot] * stride[j];
                }
                for (o, (w, _)) in outcomes.iter().enumerate() {
                    let ws = w.as_slice();
                    let mut agg = 0.0;
                    let mut plus = 0.0;
                    let mut minus = 0.0;
                    for (slot, &j) in others.iter().enumerate() {
                        let dj = grids[j][other_idx[slot]] - ws[j];
                        agg += dj;
                        plus += pos_part(dj);
                        minus += pos_part(-dj);
                    }
                    rest_agg[o] = agg;
                    rest_plus[o] = plus;
                    rest_minus[o] = minus;
                }
                let mut line_max = f64::NEG_INFINITY;
                for (k, &ci) in own.iter().enumerate() {
                    let mut expected_share = 0.0;
                    for (o, (w, prob)) in outcomes.iter().enumerate() {
                        let di = ci - w.as_slice()[i];
                        let sums = ShareSums {
                            plus: rest_plus[o] + pos_part(di),
                            minus: rest_minus[o] + pos_part(-di),
                            aggregate: rest_agg[o] + di,
                        };
                        expected_share +=
                            prob * share_from_sums(di, &sums, &self.prices, self.kind);
                    }
                    let payoff = p * ci - expected_share;
                    line[k] = payoff;
                    if payoff > line_max {
                        line_max = payoff;
                    }
                }
                for (k, &payoff) in line.iter().enumerate() {
                    let g = line_max - payoff;
                    let cell = &mut gap[base + k * stride[i]];
                    if g > *cell {
                        *cell = g;
                    }
                }
                // odometer over the opponents, last one fastest
                let mut slot = others.len();
                while slot > 0 {
                    slot -= 1;
                    other_idx[slot] += 1;
                    if other_idx[slot] < sizes[others[slot]] {
                        break;
                    }
                    other_idx[slot] = 0;
                }
            }
        }

        let mut equilibria = Vec::new();
        let mut min_rejected: Option<f64> = None;
        let mut idx = vec![0usize; n];
        for &g in gap.iter() {
            if g <= epsilon {
                let contracts: Vec<f64> = (0..n).map(|i| grids[i][idx[i]]).collect();
                let c = ContractProfile::new(contracts)?;
                let payoffs = self.payoffs(&c)?;
                equilibria.push(Equilibrium {
                    contracts: c,
                    payoffs,
                    gap: g,
                });
            } else {
                min_rejected = Some(min_rejected.map_or(g, |mr: f64| mr.min(g)));
            }
            let mut i = n;
            while i > 0 {
                i -= 1;
                idx[i] += 1;
                if idx[i] < sizes[i] {
                    break;
                }
                idx[i] = 0;
            }
        }

        Ok(EquilibriumReport {
            epsilon,
            equilibria,
            profiles_scanned: total,
            min_rejected_gap: min_rejected,
        })
    }
}

fn classify_shape(samples: &[(f64, f64)]) -> ShapeClass {
    if samples.len() < 3 {
        return ShapeClass::Concave;
    }
    // Generalized second differences: on a uniform grid this reduces to
    // y[k+2] − 2·y[k+1] + y[k] ≤ tol; the snapped last interval is handled
    // through the slopes.
    let mut concave = true;
    for win in samples.windows(3) {
        let [(x0, y0), (x1, y1), (x2, y2)] = [win[0], win[1], win[2]];
        let s1 = (y1 - y0) / (x1 - x0);
        let s2 = (y2 - y1) / (x2 - x1);
        if (s2 - s1) * (x2 - x0) * 0.5 > SHAPE_TOLERANCE {
            concave = false;
            break;
        }
    }
    if concave {
        return ShapeClass::Concave;
    }
    // Single peak: non-decreasing, then non-increasing, with slack.
    let mut falling = false;
    for win in samples.windows(2) {
        let (y0, y1) = (win[0].1, win[1].1);
        if !falling {
            if y1 < y0 - SHAPE_TOLERANCE {
                falling = true;
            }
        } else if y1 > y0 + SHAPE_TOLERANCE {
            return ShapeClass::Neither;
        }
    }
    ShapeClass::QuasiConcave
}
