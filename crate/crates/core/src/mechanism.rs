//! The two candidate cost functions, the proportional share rule, and
//! executable checkers for the mechanism axioms.
//!
//! The share of supplier i in the system charge is
//!
//! `φ_i(d, θ, J) = J(d, θ) / Σ_j J(d_j, θ) · J(d_i, θ)`
//!
//! for a per-supplier cost function J. Two candidates are implemented:
//!
//! * [`MechanismKind::Tilde`] — J̃ mirrors the system cost per supplier,
//!   `J̃(d_i, θ) = q[d_i]+ − λ[−d_i]+`. Sound only without a surplus bonus:
//!   for λ > 0 the scaling α can exceed 1 and charge a supplier more than
//!   her standalone cost (see [`find_ir_violation`]).
//! * [`MechanismKind::Star`] — J* gates each supplier by the aggregate
//!   regime: shortfall suppliers split q·d when the aggregate is short,
//!   surplus suppliers split λ·d when it is long, everyone else pays (and
//!   receives) nothing. Satisfies all five axioms for either sign of λ.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::market::{pos_part, system_cost, DeviationProfile, ImbalancePrices, SIGN_TOLERANCE};

/// Absolute tolerance for currency comparisons in the axiom checkers.
pub const AXIOM_TOLERANCE: f64 = 1e-9;

/// Selects which per-supplier cost function drives the share rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MechanismKind {
    /// Per-supplier mirror of the system cost (valid only for λ ≤ 0).
    Tilde,
    /// Regime-gated cost function (valid for either sign of λ).
    Star,
}

/// `J̃(d_i, θ) = q[d_i]+ − λ[−d_i]+` — the system cost applied to a single
/// deviation.
#[inline]
pub fn cost_tilde(deviation: f64, prices: &ImbalancePrices) -> f64 {
    system_cost(deviation, prices)
}

/// `J*(d_i, θ) = 1(d ≥ 0)·q[d_i]+ − 1(d < 0)·λ[−d_i]+` where `d` is the
/// aggregate deviation. Zero whenever the supplier's deviation sign opposes
/// the aggregate regime.
#[inline]
pub fn cost_star(deviation: f64, aggregate: f64, prices: &ImbalancePrices) -> f64 {
    if aggregate >= -SIGN_TOLERANCE {
        prices.q() * pos_part(deviation)
    } else {
        -prices.lambda() * pos_part(-deviation)
    }
}

/// Positive/negative part sums of a deviation profile plus its aggregate.
/// The single source for share arithmetic: [`shares`] and the game module's
/// incremental payoff sweep both evaluate through [`share_from_sums`].
#[derive(Debug, Clone, Copy)]
pub(crate) struct ShareSums {
    pub plus: f64,
    pub minus: f64,
    pub aggregate: f64,
}

impl ShareSums {
    pub(crate) fn of(entries: &[f64], aggregate: f64) -> Self {
        let mut plus = 0.0;
        let mut minus = 0.0;
        for &x in entries {
            plus += pos_part(x);
            minus += pos_part(-x);
        }
        Self {
            plus,
            minus,
            aggregate,
        }
    }
}

pub(crate) fn share_from_sums(
    d_i: f64,
    sums: &ShareSums,
    prices: &ImbalancePrices,
    kind: MechanismKind,
) -> f64 {
    match kind {
        MechanismKind::Tilde => {
            let denom = prices.q() * sums.plus - prices.lambda() * sums.minus;
            if denom.abs() <= SIGN_TOLERANCE {
                // All-zero profile, or the λ > 0 singular point; both get
                // all-zero shares (the latter is flagged by `shares`).
                return 0.0;
            }
            (system_cost(sums.aggregate, prices) / denom) * cost_tilde(d_i, prices)
        }
        MechanismKind::Star => {
            if sums.aggregate > SIGN_TOLERANCE {
                if d_i > SIGN_TOLERANCE {
                    (sums.aggregate / sums.plus) * (prices.q() * d_i)
                } else {
                    0.0
                }
            } else if sums.aggregate < -SIGN_TOLERANCE {
                if d_i < -SIGN_TOLERANCE {
                    (-sums.aggregate / sums.minus) * (prices.lambda() * d_i)
                } else {
                    0.0
                }
            } else {
                // Internally balanced aggregate: the β+ numerator is zero.
                0.0
            }
        }
    }
}

/// The realized scaling coefficient of a share computation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Scaling {
    /// α = S(d,θ) / Σ_j J̃(d_j,θ) for the mirror-cost mechanism.
    Alpha(f64),
    /// β+ = d / Σ_j [d_j]+ under an aggregate shortfall (or balance).
    BetaPlus(f64),
    /// β− = −d / Σ_j [−d_j]+ under an aggregate surplus.
    BetaMinus(f64),
}

/// Per-supplier cost shares for one deviation profile.
#[derive(Debug, Clone, PartialEq)]
pub struct ShareOutcome {
    pub shares: Vec<f64>,
    /// True when the J̃ denominator vanishes while the system charge does
    /// not (possible only with a surplus bonus). Shares are all zero and
    /// budget balance is necessarily violated; the checker reports it.
    pub singular: bool,
    pub scaling: Scaling,
}

impl ShareOutcome {
    pub fn total(&self) -> f64 {
        self.shares.iter().sum()
    }
}

/// Splits the system charge S(d,θ) among suppliers in proportion to the
/// chosen cost function.
pub fn shares(d: &DeviationProfile, prices: &ImbalancePrices, kind: MechanismKind) -> ShareOutcome {
    let sums = ShareSums::of(d.entries(), d.aggregate());
    let shares: Vec<f64> = d
        .entries()
        .iter()
        .map(|&di| share_from_sums(di, &sums, prices, kind))
        .collect();
    let (singular, scaling) = match kind {
        MechanismKind::Tilde => {
            let denom = prices.q() * sums.plus - prices.lambda() * sums.minus;
            let cost = system_cost(sums.aggregate, prices);
            if denom.abs() <= SIGN_TOLERANCE {
                (cost.abs() > SIGN_TOLERANCE, Scaling::Alpha(0.0))
            } else {
                (false, Scaling::Alpha(cost / denom))
            }
        }
        MechanismKind::Star => {
            if sums.aggregate > SIGN_TOLERANCE {
                (false, Scaling::BetaPlus(sums.aggregate / sums.plus))
            } else if sums.aggregate < -SIGN_TOLERANCE {
                (false, Scaling::BetaMinus(-sums.aggregate / sums.minus))
            } else {
                (false, Scaling::BetaPlus(0.0))
            }
        }
    };
    ShareOutcome {
        shares,
        singular,
        scaling,
    }
}

/// The five axioms a proportional cost sharing mechanism must satisfy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axiom {
    BudgetBalance,
    ExPostIr,
    NoExploitation,
    Fairness,
    Monotonicity,
}

impl Axiom {
    pub const ALL: [Axiom; 5] = [
        Axiom::BudgetBalance,
        Axiom::ExPostIr,
        Axiom::NoExploitation,
        Axiom::Fairness,
        Axiom::Monotonicity,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Axiom::BudgetBalance => "budget_balance",
            Axiom::ExPostIr => "expost_ir",
            Axiom::NoExploitation => "no_exploitation",
            Axiom::Fairness => "fairness",
            Axiom::Monotonicity => "monotonicity",
        }
    }
}

/// Evidence for a failed axiom check. `indices` are the offending suppliers
/// (pairs for fairness/monotonicity); `values` carry the compared
/// quantities in the same order (shares, or share/standalone-cost pairs for
/// ex-post IR, or total/expected for budget balance).
#[derive(Debug, Clone, PartialEq)]
pub struct AxiomWitness {
    pub deviations: DeviationProfile,
    pub prices: ImbalancePrices,
    pub indices: Vec<usize>,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AxiomReport {
    pub axiom: Axiom,
    pub passed: bool,
    pub witness: Option<AxiomWitness>,
}

impl AxiomReport {
    fn pass(axiom: Axiom) -> Self {
        Self {
            axiom,
            passed: true,
            witness: None,
        }
    }

    fn fail(
        axiom: Axiom,
        d: &DeviationProfile,
        prices: &ImbalancePrices,
        indices: Vec<usize>,
        values: Vec<f64>,
    ) -> Self {
        Self {
            axiom,
            passed: false,
            witness: Some(AxiomWitness {
                deviations: d.clone(),
                prices: *prices,
                indices,
                values,
            }),
        }
    }
}

/// Σ φ_i must equal the system charge S(d,θ) within tolerance. Singular
/// mirror-cost outcomes are reported as failures.
pub fn check_budget_balance(
    d: &DeviationProfile,
    prices: &ImbalancePrices,
    kind: MechanismKind,
) -> AxiomReport {
    let outcome = shares(d, prices, kind);
    let total = outcome.total();
    let expected = system_cost(d.aggregate(), prices);
    if !outcome.singular && (total - expected).abs() <= AXIOM_TOLERANCE {
        AxiomReport::pass(Axiom::BudgetBalance)
    } else {
        AxiomReport::fail(
            Axiom::BudgetBalance,
            d,
            prices,
            Vec::new(),
            [total, expected].into(),
        )
    }
}

/// No supplier whose standalone charge S(d_i,θ) is nonnegative may pay more
/// than that charge inside the aggregate.
pub fn check_expost_ir(
    d: &DeviationProfile,
    prices: &ImbalancePrices,
    kind: MechanismKind,
) -> AxiomReport {
    let outcome = shares(d, prices, kind);
    let mut indices = Vec::new();
    let mut values = Vec::new();
    for (i, (&di, &phi)) in d.entries().iter().zip(&outcome.shares).enumerate() {
        let standalone = system_cost(di, prices);
        if standalone >= 0.0 && phi > standalone + AXIOM_TOLERANCE {
            indices.push(i);
            values.push(phi);
            values.push(standalone);
        }
    }
    if indices.is_empty() {
        AxiomReport::pass(Axiom::ExPostIr)
    } else {
        AxiomReport::fail(Axiom::ExPostIr, d, prices, indices, values)
    }
}

/// Suppliers with zero deviation pay and receive nothing.
pub fn check_no_exploitation(
    d: &DeviationProfile,
    prices: &ImbalancePrices,
    kind: MechanismKind,
) -> AxiomReport {
    let outcome = shares(d, prices, kind);
    let mut indices = Vec::new();
    let mut values = Vec::new();
    for (i, (&di, &phi)) in d.entries().iter().zip(&outcome.shares).enumerate() {
        if di.abs() <= SIGN_TOLERANCE && phi.abs() > AXIOM_TOLERANCE {
            indices.push(i);
            values.push(phi);
        }
    }
    if indices.is_empty() {
        AxiomReport::pass(Axiom::NoExploitation)
    } else {
        AxiomReport::fail(Axiom::NoExploitation, d, prices, indices, values)
    }
}

/// Equal deviations earn equal shares.
pub fn check_fairness(
    d: &DeviationProfile,
    prices: &ImbalancePrices,
    kind: MechanismKind,
) -> AxiomReport {
    let outcome = shares(d, prices, kind);
    let entries = d.entries();
    for i in 0..entries.len() {
        for j in i + 1..entries.len() {
            if (entries[i] - entries[j]).abs() <= SIGN_TOLERANCE
                && (outcome.shares[i] - outcome.shares[j]).abs() > AXIOM_TOLERANCE
            {
                return AxiomReport::fail(
                    Axiom::Fairness,
                    d,
                    prices,
                    [i, j].into(),
                    [outcome.shares[i], outcome.shares[j]].into(),
                );
            }
        }
    }
    AxiomReport::pass(Axiom::Fairness)
}

/// Within the shortfall set a larger deviation never pays less. Within the
/// surplus set: with a bonus (λ > 0) more surplus earns at least as much
/// bonus, i.e. a weakly smaller (more negative) share; with a penalty
/// (λ ≤ 0) a larger |d_i| never pays less. Zero-deviation suppliers belong
/// to the surplus set.
pub fn check_monotonicity(
    d: &DeviationProfile,
    prices: &ImbalancePrices,
    kind: MechanismKind,
) -> AxiomReport {
    let outcome = shares(d, prices, kind);
    let entries = d.entries();
    let phi = &outcome.shares;
    let n = entries.len();
    let bonus = prices.lambda() > 0.0;
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let (di, dj) = (entries[i], entries[j]);
            let violated = if di > SIGN_TOLERANCE && dj > SIGN_TOLERANCE {
                di >= dj && phi[i] < phi[j] - AXIOM_TOLERANCE
            } else if di <= SIGN_TOLERANCE && dj <= SIGN_TOLERANCE {
                if bonus {
                    di <= dj && phi[i] > phi[j] + AXIOM_TOLERANCE
                } else {
                    di.abs() >= dj.abs() && phi[i] < phi[j] - AXIOM_TOLERANCE
                }
            } else {
                false
            };
            if violated {
                return AxiomReport::fail(
                    Axiom::Monotonicity,
                    d,
                    prices,
                    [i, j].into(),
                    [phi[i], phi[j]].into(),
                );
            }
        }
    }
    AxiomReport::pass(Axiom::Monotonicity)
}

/// Runs all five checkers, in [`Axiom::ALL`] order.
pub fn check_all(
    d: &DeviationProfile,
    prices: &ImbalancePrices,
    kind: MechanismKind,
) -> Vec<AxiomReport> {
    [
        check_budget_balance(d, prices, kind),
        check_expost_ir(d, prices, kind),
        check_no_exploitation(d, prices, kind),
        check_fairness(d, prices, kind),
        check_monotonicity(d, prices, kind),
    ]
    .into()
}

/// A deviation profile on which ex-post individual rationality fails.
#[derive(Debug, Clone, PartialEq)]
pub struct IrViolation {
    pub deviations: DeviationProfile,
    pub supplier: usize,
    pub share: f64,
    pub standalone_cost: f64,
}

fn ir_violation_at(
    entries: Vec<f64>,
    prices: &ImbalancePrices,
    kind: MechanismKind,
) -> Option<IrViolation> {
    let d = DeviationProfile::new(entries);
    let report = check_expost_ir(&d, prices, kind);
    let witness = report.witness?;
    Some(IrViolation {
        supplier: witness.indices[0],
        share: witness.values[0],
        standalone_cost: witness.values[1],
        deviations: witness.deviations,
    })
}

/// Searches deviation profiles for an ex-post IR violation.
///
/// Tries a structured family first — one shortfall `a > 0` paired with a
/// surplus `b` chosen so that λ·|b| slightly exceeds q·a, which drives the
/// mirror-cost denominator just below zero and inflates α above one — then
/// falls back to seeded random profiles. Each candidate counts against
/// `budget`. Returns the first failing profile, or `None` (guaranteed for
/// J* under valid prices, and for J̃ with λ ≤ 0).
pub fn find_ir_violation(
    prices: &ImbalancePrices,
    kind: MechanismKind,
    budget: usize,
    seed: u64,
) -> Option<IrViolation> {
    let mut remaining = budget;
    if kind == MechanismKind::Tilde && prices.lambda() > 0.0 {
        for a in [1.0, 0.5, 2.0, 5.0, 0.1] {
            for frac in [0.1, 0.01, 0.5, 1.0] {
                if remaining == 0 {
                    return None;
                }
                remaining -= 1;
                let delta = frac * prices.q() * a;
                let b = -(prices.q() * a + delta) / prices.lambda();
                if let Some(v) = ir_violation_at([a, b].into(), prices, kind) {
                    return Some(v);
                }
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    while remaining > 0 {
        remaining -= 1;
        let n = rng.random_range(2..=5);
        let entries: Vec<f64> = (0..n).map(|_| rng.random_range(-10.0..=10.0)).collect();
        if let Some(v) = ir_violation_at(entries, prices, kind) {
            return Some(v);
        }
    }
    None
}

/// Seeded stream of random deviation profiles with `d_i` drawn uniformly
/// from `[-bound_i, bound_i]`. Deterministic for a given seed.
#[derive(Debug, Clone)]
pub struct DeviationSampler {
    rng: ChaCha8Rng,
    bounds: Vec<f64>,
}

impl DeviationSampler {
    pub fn new(seed: u64, bounds: Vec<f64>) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
            bounds,
        }
    }
}

impl Iterator for DeviationSampler {
    type Item = DeviationProfile;

    fn next(&mut self) -> Option<DeviationProfile> {
        let rng = &mut self.rng;
        let entries: Vec<f64> = self
            .bounds
            .iter()
            .map(|&b| rng.random_range(-b..=b))
            .collect();
        Some(DeviationProfile::new(entries))
    }
}
