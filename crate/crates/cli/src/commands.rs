//! The four batch commands. Each returns a [`Report`]; exit-code decisions
//! stay in `main`.

use aggshare_core::{
    check_all, find_ir_violation, shares, system_cost, AxiomWitness, ContractProfile,
    DeviationProfile, DeviationSampler, GameSpec, Scaling, DEFAULT_PROFILE_CAP,
};

use crate::report::{format_sig9, Cell, Report, Section};
use crate::scenario::LoadedScenario;
use crate::AppError;

fn game_spec(loaded: &LoadedScenario) -> Result<GameSpec, AppError> {
    GameSpec::new(
        loaded.model.clone(),
        loaded.prices,
        loaded.kind,
        loaded.grid_step,
    )
    .map_err(AppError::from_core)
}

fn base_report(command: &str, loaded: &LoadedScenario, echo: &str) -> Report {
    let mut report = Report::new(command, loaded.digest.clone());
    report.meta("invocation", echo);
    report.meta("scenario", loaded.path.clone());
    report.meta(
        "mechanism",
        crate::scenario::MechanismField::from_kind(loaded.kind).to_string(),
    );
    report.meta("q", loaded.prices.q());
    report.meta("lambda", loaded.prices.lambda());
    report.meta("p", loaded.prices.p());
    report
}

fn witness_detail(witness: &AxiomWitness) -> String {
    let indices: Vec<String> = witness.indices.iter().map(usize::to_string).collect();
    let values: Vec<String> = witness.values.iter().map(|&v| format_sig9(v)).collect();
    let deviations: Vec<String> = witness
        .deviations
        .entries()
        .iter()
        .map(|&v| format_sig9(v))
        .collect();
    format!(
        "d=[{}] suppliers=[{}] values=[{}]",
        deviations.join(","),
        indices.join(","),
        values.join(",")
    )
}

/// Shares, scaling coefficient, system cost and all five axiom verdicts for
/// one deviation profile.
pub fn cmd_share(
    loaded: &LoadedScenario,
    deviations: &[f64],
    echo: &str,
) -> Result<Report, AppError> {
    let n = loaded.model.supplier_count();
    if deviations.len() != n {
        return Err(AppError::Usage(format!(
            "--deviation needs {n} entries (one per supplier), got {}",
            deviations.len()
        )));
    }
    let d = DeviationProfile::new(deviations.to_vec());
    let outcome = shares(&d, &loaded.prices, loaded.kind);
    let cost = system_cost(d.aggregate(), &loaded.prices);

    let mut report = base_report("share", loaded, echo);
    report.meta("aggregate_deviation", d.aggregate());
    report.meta("system_cost", cost);
    let (coeff_name, coeff_value) = match outcome.scaling {
        Scaling::Alpha(a) => ("alpha", a),
        Scaling::BetaPlus(b) => ("beta_plus", b),
        Scaling::BetaMinus(b) => ("beta_minus", b),
    };
    report.meta("scaling", coeff_name);
    report.meta("scaling_value", coeff_value);
    report.meta("singular", outcome.singular);

    let mut table = Section::new("shares", &["index", "name", "deviation", "share"]);
    for (i, (&di, &phi)) in d.entries().iter().zip(&outcome.shares).enumerate() {
        table.row(vec![
            i.into(),
            loaded.model.supplier(i).name.as_str().into(),
            di.into(),
            phi.into(),
        ]);
    }
    report.push(table);

    let mut axioms = Section::new("axioms", &["axiom", "passed", "witness"]);
    for check in check_all(&d, &loaded.prices, loaded.kind) {
        let detail = check
            .witness
            .as_ref()
            .map(witness_detail)
            .unwrap_or_default();
        axioms.row(vec![
            check.axiom.name().into(),
            check.passed.into(),
            detail.into(),
        ]);
    }
    report.push(axioms);
    Ok(report)
}

/// Exhaustive ε-Nash certification. Returns the report and the number of
/// certified profiles (zero → exit code 4).
pub fn cmd_nash(loaded: &LoadedScenario, echo: &str) -> Result<(Report, usize), AppError> {
    let spec = game_spec(loaded)?;
    let result = spec
        .find_pure_nash(loaded.epsilon)
        .map_err(AppError::from_core)?;

    let mut report = base_report("nash", loaded, echo);
    report.meta("grid_step", loaded.grid_step);
    report.meta("epsilon", loaded.epsilon);
    report.meta("profiles_scanned", result.profiles_scanned);
    report.meta("equilibria", result.equilibria.len());
    match result.min_rejected_gap {
        Some(g) => report.meta("min_rejected_gap", g),
        None => report.meta("min_rejected_gap", "none"),
    }

    let names: Vec<&str> = loaded
        .model
        .suppliers()
        .iter()
        .map(|s| s.name.as_str())
        .collect();
    let mut columns: Vec<String> = names.iter().map(|n| format!("c_{n}")).collect();
    columns.extend(names.iter().map(|n| format!("payoff_{n}")));
    columns.push("gap".into());
    let column_refs: Vec<&str> = columns.iter().map(String::as_str).collect();
    let mut table = Section::new("equilibria", &column_refs);
    for eq in &result.equilibria {
        let mut row: Vec<Cell> = eq.contracts.as_slice().iter().map(|&c| c.into()).collect();
        row.extend(eq.payoffs.iter().map(|&p| Cell::from(p)));
        row.push(eq.gap.into());
        table.row(row);
    }
    report.push(table);
    Ok((report, result.equilibria.len()))
}

/// Payoff surface for two-supplier scenarios, or per-axis slices: plot-ready
/// `(contracts, payoffs)` rows plus shape classifications.
pub fn cmd_surface(
    loaded: &LoadedScenario,
    axis: Option<usize>,
    fixed: Option<&[f64]>,
    echo: &str,
) -> Result<Report, AppError> {
    let spec = game_spec(loaded)?;
    let n = loaded.model.supplier_count();
    let mut report = base_report("surface", loaded, echo);
    report.meta("grid_step", loaded.grid_step);

    let slice = |report: &mut Report, supplier: usize, fixed: Vec<f64>| -> Result<(), AppError> {
        let scan = spec
            .shape_scan(supplier, &fixed)
            .map_err(AppError::from_core)?;
        let name = &loaded.model.supplier(supplier).name;
        report.meta(
            &format!("classification_{name}"),
            scan.classification.name(),
        );
        report.meta(&format!("peak_start_{name}"), scan.peak_start);
        report.meta(&format!("peak_end_{name}"), scan.peak_end);
        let fixed_echo: Vec<String> = fixed.iter().map(|&v| format_sig9(v)).collect();
        report.meta(&format!("fixed_others_{name}"), fixed_echo.join(","));
        let c_col = format!("c_{name}");
        let p_col = format!("payoff_{name}");
        let mut table = Section::new(&format!("slice_{name}"), &[c_col.as_str(), p_col.as_str()]);
        for &(c, payoff) in &scan.samples {
            table.row(vec![c.into(), payoff.into()]);
        }
        report.push(table);
        Ok(())
    };

    if let Some(axis) = axis {
        if axis == 0 || axis > n {
            return Err(AppError::Usage(format!(
                "--axis must be between 1 and {n}, got {axis}"
            )));
        }
        let supplier = axis - 1;
        let fixed: Vec<f64> = match fixed {
            Some(values) => {
                if values.len() != n - 1 {
                    return Err(AppError::Usage(format!(
                        "--fixed needs {} entries (opponents of supplier {axis}), got {}",
                        n - 1,
                        values.len()
                    )));
                }
                values.to_vec()
            }
            None => grid_midpoints(&spec, n, supplier),
        };
        slice(&mut report, supplier, fixed)?;
        return Ok(report);
    }

    if n == 2 {
        let g0 = spec.grid(0);
        let g1 = spec.grid(1);
        if (g0.len() as u128) * (g1.len() as u128) > DEFAULT_PROFILE_CAP as u128 {
            return Err(AppError::Capacity(format!(
                "surface of {}x{} points exceeds the cap of {DEFAULT_PROFILE_CAP}; increase --grid-step",
                g0.len(),
                g1.len()
            )));
        }
        let names: Vec<&str> = loaded
            .model
            .suppliers()
            .iter()
            .map(|s| s.name.as_str())
            .collect();
        let columns = [
            format!("c_{}", names[0]),
            format!("c_{}", names[1]),
            format!("payoff_{}", names[0]),
            format!("payoff_{}", names[1]),
        ];
        let column_refs: Vec<&str> = columns.iter().map(String::as_str).collect();
        let mut table = Section::new("surface", &column_refs);
        for &c0 in &g0 {
            for &c1 in &g1 {
                let c = ContractProfile::new(vec![c0, c1]).map_err(AppError::from_core)?;
                let payoffs = spec.payoffs(&c).map_err(AppError::from_core)?;
                table.row(vec![
                    c0.into(),
                    c1.into(),
                    payoffs[0].into(),
                    payoffs[1].into(),
                ]);
            }
        }
        report.push(table);
    } else {
        // one slice per supplier, opponents parked at their grid midpoints
        for supplier in 0..n {
            let fixed = grid_midpoints(&spec, n, supplier);
            slice(&mut report, supplier, fixed)?;
        }
    }
    Ok(report)
}

fn grid_midpoints(spec: &GameSpec, n: usize, supplier: usize) -> Vec<f64> {
    (0..n)
        .filter(|&j| j != supplier)
        .map(|j| {
            let grid = spec.grid(j);
            grid[grid.len() / 2]
        })
        .collect()
}

/// Seeded randomized audit of all five axioms plus the structured IR
/// violation search.
pub fn cmd_audit(
    loaded: &LoadedScenario,
    trials: usize,
    seed: u64,
    echo: &str,
) -> Result<Report, AppError> {
    if trials == 0 {
        return Err(AppError::Usage("--trials must be at least 1".into()));
    }
    let bounds: Vec<f64> = loaded.model.suppliers().iter().map(|s| s.c_max).collect();
    let sampler = DeviationSampler::new(seed, bounds);

    let mut failures = [0usize; 5];
    let mut first_witness: [Option<String>; 5] = Default::default();
    for d in sampler.take(trials) {
        for (slot, check) in check_all(&d, &loaded.prices, loaded.kind)
            .iter()
            .enumerate()
        {
            if !check.passed {
                failures[slot] += 1;
                if first_witness[slot].is_none() {
                    first_witness[slot] = check.witness.as_ref().map(witness_detail);
                }
            }
        }
    }

    let ir = find_ir_violation(&loaded.prices, loaded.kind, trials, seed.wrapping_add(1));

    let mut report = base_report("audit", loaded, echo);
    report.meta("trials", trials);
    report.meta("seed", seed.to_string());

    let mut summary = Section::new("axioms", &["axiom", "checked", "failures", "first_witness"]);
    for (slot, axiom) in aggshare_core::Axiom::ALL.iter().enumerate() {
        summary.row(vec![
            axiom.name().into(),
            trials.into(),
            failures[slot].into(),
            first_witness[slot].clone().unwrap_or_default().into(),
        ]);
    }
    report.push(summary);

    let mut search = Section::new(
        "ir_search",
        &[
            "found",
            "supplier",
            "share",
            "standalone_cost",
            "deviations",
        ],
    );
    match &ir {
        Some(v) => {
            let deviations: Vec<String> = v
                .deviations
                .entries()
                .iter()
                .map(|&x| format_sig9(x))
                .collect();
            search.row(vec![
                true.into(),
                v.supplier.into(),
                v.share.into(),
                v.standalone_cost.into(),
                deviations.join(",").into(),
            ]);
        }
        None => search.row(vec![
            false.into(),
            "".into(),
            "".into(),
            "".into(),
            "".into(),
        ]),
    }
    report.push(search);
    Ok(report)
}
