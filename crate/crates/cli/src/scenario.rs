//! The scenario file: one self-describing TOML document holding the market,
//! the supplier fleet, the joint model and the solver parameters.
//!
//! ```toml
//! mechanism = "star"          # or "tilde"
//! joint = "product"           # or [[joint.explicit]] rows with w/prob
//! grid_step = 0.05
//! epsilon = 1e-6
//!
//! [market]
//! p = 0.5
//! q = 1.5
//! lambda = -0.4
//!
//! [[suppliers]]
//! name = "north"
//! c_max = 2.0
//! marginal = [ { value = 1.0, prob = 0.7 }, { value = 2.0, prob = 0.3 } ]
//! ```

use std::fmt;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use aggshare_core::{
    DiscreteMarginal, DiscreteSupplyModel, ImbalancePrices, JointModel, JointOutcome,
    MechanismKind, Supplier,
};

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Parse { path: String, message: String },
    #[error("{path}: {field}: {message}")]
    Invalid {
        path: String,
        field: String,
        message: String,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub mechanism: MechanismField,
    pub joint: JointField,
    pub grid_step: f64,
    pub epsilon: f64,
    pub market: MarketSection,
    pub suppliers: Vec<SupplierSection>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MechanismField {
    Tilde,
    Star,
}

impl MechanismField {
    pub fn kind(self) -> MechanismKind {
        match self {
            MechanismField::Tilde => MechanismKind::Tilde,
            MechanismField::Star => MechanismKind::Star,
        }
    }

    pub fn from_kind(kind: MechanismKind) -> Self {
        match kind {
            MechanismKind::Tilde => MechanismField::Tilde,
            MechanismKind::Star => MechanismField::Star,
        }
    }
}

impl fmt::Display for MechanismField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MechanismField::Tilde => "tilde",
            MechanismField::Star => "star",
        })
    }
}

/// Either the string `"product"` or an explicit table of joint outcomes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum JointField {
    Name(String),
    Explicit { explicit: Vec<ExplicitRow> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExplicitRow {
    pub w: Vec<f64>,
    pub prob: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarketSection {
    pub p: f64,
    pub q: f64,
    pub lambda: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SupplierSection {
    pub name: String,
    pub c_max: f64,
    pub marginal: Vec<MarginalRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarginalRow {
    pub value: f64,
    pub prob: f64,
}

/// CLI overrides applied on top of the file's values.
#[derive(Debug, Clone, Copy, Default)]
pub struct Overrides {
    pub mechanism: Option<MechanismKind>,
    pub grid_step: Option<f64>,
    pub epsilon: Option<f64>,
}

/// A scenario validated into engine types.
#[derive(Debug, Clone)]
pub struct LoadedScenario {
    pub file: ScenarioFile,
    pub model: DiscreteSupplyModel,
    pub prices: ImbalancePrices,
    pub kind: MechanismKind,
    pub grid_step: f64,
    pub epsilon: f64,
    /// SHA-256 of the scenario file bytes, hex-encoded.
    pub digest: String,
    pub path: String,
}

pub fn load(path: &Path, overrides: &Overrides) -> Result<LoadedScenario, ScenarioError> {
    let shown = path.display().to_string();
    let bytes = fs::read(path).map_err(|source| ScenarioError::Io {
        path: shown.clone(),
        source,
    })?;
    let text = String::from_utf8_lossy(&bytes);
    let file: ScenarioFile = toml::from_str(&text).map_err(|e| ScenarioError::Parse {
        path: shown.clone(),
        message: e.to_string(),
    })?;
    let digest = hex_digest(&bytes);
    build(file, overrides, shown, digest)
}

/// Parses a scenario from a string (used by the round-trip tests).
pub fn from_str(text: &str, overrides: &Overrides) -> Result<LoadedScenario, ScenarioError> {
    let file: ScenarioFile = toml::from_str(text).map_err(|e| ScenarioError::Parse {
        path: "<inline>".into(),
        message: e.to_string(),
    })?;
    let digest = hex_digest(text.as_bytes());
    build(file, overrides, "<inline>".into(), digest)
}

pub fn to_toml(file: &ScenarioFile) -> String {
    toml::to_string_pretty(file).expect("scenario serializes")
}

fn hex_digest(bytes: &[u8]) -> String {
    let hash = Sha256::digest(bytes);
    let mut out = String::with_capacity(64);
    for byte in hash {
        out.push_str(&format!("{byte:02x}"));
    }
    out
}

fn build(
    file: ScenarioFile,
    overrides: &Overrides,
    path: String,
    digest: String,
) -> Result<LoadedScenario, ScenarioError> {
    let invalid = |field: &str, message: String| ScenarioError::Invalid {
        path: path.clone(),
        field: field.into(),
        message,
    };

    let prices = ImbalancePrices::new(file.market.q, file.market.lambda, file.market.p)
        .map_err(|e| invalid("market", e.to_string()))?;

    let mut suppliers = Vec::with_capacity(file.suppliers.len());
    for (i, s) in file.suppliers.iter().enumerate() {
        let support: Vec<(f64, f64)> = s.marginal.iter().map(|r| (r.value, r.prob)).collect();
        let marginal = DiscreteMarginal::new(support)
            .map_err(|e| invalid(&format!("suppliers[{i}].marginal"), e.to_string()))?;
        suppliers.push(Supplier::new(s.name.clone(), s.c_max, marginal));
    }

    let joint = match &file.joint {
        JointField::Name(name) if name == "product" => JointModel::Product,
        JointField::Name(other) => {
            return Err(invalid(
                "joint",
                format!("expected \"product\" or an explicit table, got \"{other}\""),
            ))
        }
        JointField::Explicit { explicit } => JointModel::Explicit(
            explicit
                .iter()
                .map(|row| JointOutcome {
                    supply: row.w.clone(),
                    probability: row.prob,
                })
                .collect(),
        ),
    };

    let model = DiscreteSupplyModel::new(suppliers, joint)
        .map_err(|e| invalid("suppliers/joint", e.to_string()))?;

    let grid_step = overrides.grid_step.unwrap_or(file.grid_step);
    if !grid_step.is_finite() || grid_step <= 0.0 {
        return Err(invalid(
            "grid_step",
            format!("{grid_step} must be positive"),
        ));
    }
    let epsilon = overrides.epsilon.unwrap_or(file.epsilon);
    if !epsilon.is_finite() || epsilon < 0.0 {
        return Err(invalid("epsilon", format!("{epsilon} must be nonnegative")));
    }
    let kind = overrides.mechanism.unwrap_or(file.mechanism.kind());

    Ok(LoadedScenario {
        file,
        model,
        prices,
        kind,
        grid_step,
        epsilon,
        digest,
        path,
    })
}
