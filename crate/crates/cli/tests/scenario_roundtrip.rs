//! Scenario format: round-trip stability and field-addressed diagnostics.

use std::path::PathBuf;

use aggshare_cli::scenario::{self, Overrides, ScenarioError};

fn scenario_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join(format!("../../scenarios/{name}"))
}

#[test]
fn fixtures_round_trip_to_identical_values() {
    for name in [
        "wind_pair_penalty.toml",
        "wind_pair_bonus.toml",
        "wind_pair_bonus_line.toml",
        "negatively_correlated.toml",
        "bonus_no_grid_equilibrium.toml",
    ] {
        let loaded = scenario::load(&scenario_path(name), &Overrides::default())
            .unwrap_or_else(|e| panic!("{name}: {e}"));
        let serialized = scenario::to_toml(&loaded.file);
        let reloaded = scenario::from_str(&serialized, &Overrides::default())
            .unwrap_or_else(|e| panic!("{name} reloaded: {e}"));
        assert_eq!(loaded.file, reloaded.file, "{name}: raw file drifted");
        assert_eq!(loaded.model, reloaded.model, "{name}: model drifted");
        assert_eq!(loaded.prices, reloaded.prices, "{name}: prices drifted");
        assert_eq!(loaded.grid_step, reloaded.grid_step);
        assert_eq!(loaded.epsilon, reloaded.epsilon);
    }
}

#[test]
fn overrides_replace_file_values() {
    let overrides = Overrides {
        mechanism: Some(aggshare_core::MechanismKind::Tilde),
        grid_step: Some(0.5),
        epsilon: Some(1e-3),
    };
    let loaded = scenario::load(&scenario_path("wind_pair_penalty.toml"), &overrides).unwrap();
    assert_eq!(loaded.kind, aggshare_core::MechanismKind::Tilde);
    assert_eq!(loaded.grid_step, 0.5);
    assert_eq!(loaded.epsilon, 1e-3);
}

fn expect_invalid(text: &str, field_fragment: &str) {
    match scenario::from_str(text, &Overrides::default()) {
        Err(ScenarioError::Invalid { field, .. }) => {
            assert!(
                field.contains(field_fragment),
                "expected field {field_fragment}, got {field}"
            );
        }
        other => panic!("expected Invalid({field_fragment}), got {other:?}"),
    }
}

const VALID: &str = r#"
mechanism = "star"
joint = "product"
grid_step = 0.5
epsilon = 1e-6

[market]
p = 0.5
q = 1.5
lambda = -0.4

[[suppliers]]
name = "a"
c_max = 2.0
marginal = [ { value = 1.0, prob = 0.7 }, { value = 2.0, prob = 0.3 } ]

[[suppliers]]
name = "b"
c_max = 2.0
marginal = [ { value = 1.0, prob = 0.3 }, { value = 2.0, prob = 0.7 } ]
"#;

#[test]
fn diagnostics_name_the_offending_field() {
    assert!(scenario::from_str(VALID, &Overrides::default()).is_ok());

    // non-triviality violated
    expect_invalid(&VALID.replace("q = 1.5", "q = 0.4"), "market");
    // probabilities do not sum to one
    expect_invalid(
        &VALID.replace("prob = 0.3 }", "prob = 0.2 }"),
        "suppliers[0].marginal",
    );
    // unknown joint name
    expect_invalid(&VALID.replace("\"product\"", "\"copula\""), "joint");
    // zero grid step
    expect_invalid(
        &VALID.replace("grid_step = 0.5", "grid_step = 0.0"),
        "grid_step",
    );
    // negative epsilon
    expect_invalid(
        &VALID.replace("epsilon = 1e-6", "epsilon = -1.0"),
        "epsilon",
    );
    // support value above capacity
    expect_invalid(
        &VALID.replace(
            "c_max = 2.0\nmarginal = [ { value = 1.0, prob = 0.7 }",
            "c_max = 1.5\nmarginal = [ { value = 1.0, prob = 0.7 }",
        ),
        "suppliers",
    );
}

#[test]
fn unknown_keys_are_parse_errors() {
    let text = VALID.replace("grid_step = 0.5", "grid_step = 0.5\nwind_speed = 12");
    match scenario::from_str(&text, &Overrides::default()) {
        Err(ScenarioError::Parse { message, .. }) => {
            assert!(message.contains("wind_speed"), "message: {message}");
        }
        other => panic!("expected parse error, got {other:?}"),
    }
}

#[test]
fn explicit_joint_inconsistent_with_marginals_is_rejected() {
    let text = r#"
mechanism = "star"
grid_step = 0.5
epsilon = 1e-6

[[joint.explicit]]
w = [0.0, 1.0]
prob = 0.6

[[joint.explicit]]
w = [1.0, 0.0]
prob = 0.4

[market]
p = 0.5
q = 1.5
lambda = -0.2

[[suppliers]]
name = "a"
c_max = 1.0
marginal = [ { value = 0.0, prob = 0.5 }, { value = 1.0, prob = 0.5 } ]

[[suppliers]]
name = "b"
c_max = 1.0
marginal = [ { value = 0.0, prob = 0.5 }, { value = 1.0, prob = 0.5 } ]
"#;
    expect_invalid(text, "joint");
}
