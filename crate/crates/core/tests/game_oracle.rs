//! Cross-checks of the equilibrium scan against an independent brute-force
//! verification of the Nash definition, plus empirical existence and shape
//! checks on randomized small games.

use aggshare_core::{
    ContractProfile, DiscreteMarginal, DiscreteSupplyModel, GameSpec, ImbalancePrices,
    MechanismKind, ShapeClass, Supplier,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const EPSILON: f64 = 1e-6;

/// Seeded random spec: n ≤ 3 suppliers, supports ≤ 3 values, with support
/// values and capacities on exact grid multiples so payoff kinks land on
/// grid points.
fn random_spec(rng: &mut ChaCha8Rng, n: usize, bonus: bool) -> GameSpec {
    let base = [0.1, 0.2, 0.25, 0.5][rng.random_range(0..4)];
    let mut suppliers = Vec::new();
    for i in 0..n {
        let support_len = rng.random_range(1..=3);
        let mut ticks = 0u32;
        let mut support = Vec::with_capacity(support_len);
        let mut weights = Vec::with_capacity(support_len);
        for _ in 0..support_len {
            ticks += rng.random_range(1..=5);
            support.push(ticks as f64 * base);
            weights.push(rng.random_range(0.1..1.0f64));
        }
        let wsum: f64 = weights.iter().sum();
        let marginal = DiscreteMarginal::new(
            support
                .iter()
                .zip(&weights)
                .map(|(&v, &w)| (v, w / wsum))
                .collect(),
        )
        .unwrap();
        let c_max = (ticks + rng.random_range(1..=3)) as f64 * base;
        suppliers.push(Supplier::new(format!("s{i}"), c_max, marginal));
    }
    let model = DiscreteSupplyModel::independent(suppliers).unwrap();

    let q = rng.random_range(1.0..2.5);
    let p = q * rng.random_range(0.2..0.8);
    let lambda = if bonus {
        p * rng.random_range(0.05..0.95)
    } else {
        -p * rng.random_range(0.0..0.95)
    };
    let prices = ImbalancePrices::new(q, lambda, p).unwrap();

    let step = base / rng.random_range(1..=2) as f64;
    GameSpec::new(model, prices, MechanismKind::Star, step).unwrap()
}

/// Independent oracle: enumerate the joint grid with nested loops and apply
/// the Nash definition directly through `expected_payoff`.
fn brute_force_nash_2p(spec: &GameSpec, epsilon: f64) -> Vec<Vec<f64>> {
    let g0 = spec.grid(0);
    let g1 = spec.grid(1);
    let mut found = Vec::new();
    for &c0 in &g0 {
        for &c1 in &g1 {
            let here = ContractProfile::new(vec![c0, c1]).unwrap();
            let pi0 = spec.expected_payoff(0, &here).unwrap();
            let pi1 = spec.expected_payoff(1, &here).unwrap();
            let best0 = g0
                .iter()
                .map(|&alt| {
                    let c = ContractProfile::new(vec![alt, c1]).unwrap();
                    spec.expected_payoff(0, &c).unwrap()
                })
                .fold(f64::NEG_INFINITY, f64::max);
            let best1 = g1
                .iter()
                .map(|&alt| {
                    let c = ContractProfile::new(vec![c0, alt]).unwrap();
                    spec.expected_payoff(1, &c).unwrap()
                })
                .fold(f64::NEG_INFINITY, f64::max);
            if best0 - pi0 <= epsilon && best1 - pi1 <= epsilon {
                found.push(vec![c0, c1]);
            }
        }
    }
    found
}

#[test]
fn scan_matches_brute_force_on_two_supplier_games() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xA11CE);
    for case in 0..8 {
        let spec = random_spec(&mut rng, 2, case % 2 == 0);
        let report = spec.find_pure_nash(EPSILON).unwrap();
        let oracle = brute_force_nash_2p(&spec, EPSILON);
        assert_eq!(
            report.equilibria.len(),
            oracle.len(),
            "case {case}: scan found {} profiles, oracle {}",
            report.equilibria.len(),
            oracle.len()
        );
        for (eq, expect) in report.equilibria.iter().zip(&oracle) {
            assert_eq!(eq.contracts.as_slice(), expect.as_slice(), "case {case}");
        }
    }
}

#[test]
fn random_small_games_have_grid_equilibria() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xB0B);
    for case in 0..24 {
        let n = rng.random_range(1..=3);
        let bonus = case % 2 == 0;
        let spec = random_spec(&mut rng, n, bonus);
        // Quasi-concave (bonus) payoffs peak between grid points in
        // general; certify those at the payoff resolution of one grid
        // step, (q + p)·h. Concave (penalty) games certify tight.
        let eps = if bonus {
            EPSILON.max((spec.prices().q() + spec.prices().p()) * spec.grid_step())
        } else {
            EPSILON
        };
        let report = spec.find_pure_nash(eps).unwrap();
        assert!(
            !report.equilibria.is_empty(),
            "case {case} (n={n}) has no certified profile; closest gap {:?}",
            report.min_rejected_gap
        );
    }
}

fn midpoints(spec: &GameSpec, skip: usize) -> Vec<f64> {
    (0..spec.model().supplier_count())
        .filter(|&j| j != skip)
        .map(|j| {
            let g = spec.grid(j);
            g[g.len() / 2]
        })
        .collect()
}

#[test]
fn penalty_regime_slices_are_concave() {
    // Without a bonus the per-outcome share is convex in the own contract
    // and expectation preserves convexity, so every slice of the expected
    // payoff must classify as concave.
    let mut rng = ChaCha8Rng::seed_from_u64(0xC0FFEE);
    for case in 0..24 {
        let n = rng.random_range(1..=3);
        let spec = random_spec(&mut rng, n, false);
        for i in 0..n {
            let scan = spec.shape_scan(i, &midpoints(&spec, i)).unwrap();
            assert_eq!(
                scan.classification,
                ShapeClass::Concave,
                "case {case} supplier {i}: {:?}",
                scan.samples
            );
        }
    }
}

#[test]
fn per_outcome_slices_are_single_peaked_in_both_regimes() {
    // The rising/rising/concave region structure holds per realized supply
    // profile: conditioning on any single outcome must never classify as
    // shapeless, for either sign of lambda.
    let mut rng = ChaCha8Rng::seed_from_u64(0xC0FFEE);
    for case in 0..24 {
        let n = rng.random_range(1..=3);
        let spec = random_spec(&mut rng, n, case % 2 == 0);
        for (w, _) in spec.model().enumerate_joint().unwrap() {
            let conditioned = DiscreteSupplyModel::independent(
                spec.model()
                    .suppliers()
                    .iter()
                    .zip(w.as_slice())
                    .map(|(s, &wi)| {
                        Supplier::new(
                            s.name.clone(),
                            s.c_max,
                            DiscreteMarginal::point_mass(wi).unwrap(),
                        )
                    })
                    .collect(),
            )
            .unwrap();
            let cond_spec = GameSpec::new(
                conditioned,
                *spec.prices(),
                MechanismKind::Star,
                spec.grid_step(),
            )
            .unwrap();
            for i in 0..n {
                let scan = cond_spec.shape_scan(i, &midpoints(&spec, i)).unwrap();
                assert_ne!(
                    scan.classification,
                    ShapeClass::Neither,
                    "case {case} supplier {i} at w={:?}: {:?}",
                    w.as_slice(),
                    scan.samples
                );
            }
        }
    }
}

#[test]
fn bonus_mixture_slice_can_be_double_peaked() {
    // A mixture of single-peaked per-outcome payoffs with different peak
    // locations need not be single-peaked itself. Pinned example: every
    // conditional slice below is quasi-concave (peaks at 0.625, 1.125,
    // 1.625 and 2.125) yet the expectation dips between 1.125 and 1.625.
    let m0 =
        DiscreteMarginal::new(vec![(0.5, 0.2780762586182971), (1.5, 0.7219237413817029)]).unwrap();
    let m1 = DiscreteMarginal::point_mass(1.0).unwrap();
    let m2 = DiscreteMarginal::new(vec![
        (1.25, 0.09881744441502008),
        (1.75, 0.9011825555849798),
    ])
    .unwrap();
    let model = DiscreteSupplyModel::independent(vec![
        Supplier::new("a", 2.25, m0),
        Supplier::new("b", 1.75, m1),
        Supplier::new("c", 2.5, m2),
    ])
    .unwrap();
    let prices =
        ImbalancePrices::new(2.267114045632386, 1.4562972293289451, 1.6277324374845192).unwrap();
    let spec = GameSpec::new(model, prices, MechanismKind::Star, 0.125).unwrap();
    let scan = spec.shape_scan(0, &[0.875, 1.25]).unwrap();
    assert_eq!(scan.classification, ShapeClass::Neither);
}
