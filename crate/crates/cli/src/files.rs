//! JSON problem and design files.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use gdtraj::gd::{GammaMode, GammaSpec, GdDesign};
use gdtraj::heavyball::HeavyBallDesign;
use gdtraj::lqr::{LqrDesign, LqrWeights};
use gdtraj::{Matrix, SystemModel};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const TOOL_VERSION: &str = concat!("gdtraj ", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub system: SystemModel,
    #[serde(default)]
    pub spec: SpecEntry,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lqr: Option<LqrWeights>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sim: Option<SimEntry>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecEntry {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(default)]
    pub gamma: GammaEntry,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delay_weight: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ModeName {
    #[default]
    Scalar,
    Fixed,
    Free,
    Bounded,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GammaEntry {
    #[serde(default)]
    pub mode: ModeName,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<Matrix>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bound: Option<Matrix>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pd_floor: Option<f64>,
}

impl GammaEntry {
    pub fn to_spec(&self) -> Result<GammaSpec, CliError> {
        let mode = match self.mode {
            ModeName::Scalar => GammaMode::Scalar,
            ModeName::Free => GammaMode::Free,
            ModeName::Fixed => GammaMode::Fixed {
                value: self
                    .value
                    .clone()
                    .ok_or_else(|| CliError::Usage("fixed Γ mode needs spec.gamma.value or --gamma-value".into()))?,
            },
            ModeName::Bounded => GammaMode::Bounded {
                bound: self
                    .bound
                    .clone()
                    .ok_or_else(|| CliError::Usage("bounded Γ mode needs spec.gamma.bound or --gamma-bound".into()))?,
            },
        };
        Ok(GammaSpec {
            mode,
            pd_floor: self.pd_floor.unwrap_or(0.0),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimEntry {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x0: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub levels: Option<Vec<f64>>,
}

/// Tool version plus the figures of merit recorded at design time.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Provenance {
    pub tool: String,
    #[serde(default)]
    pub margins: BTreeMap<String, f64>,
    #[serde(default)]
    pub residuals: BTreeMap<String, f64>,
}

impl Provenance {
    pub fn new() -> Self {
        Self {
            tool: TOOL_VERSION.to_string(),
            ..Self::default()
        }
    }

    pub fn margin(mut self, name: &str, v: f64) -> Self {
        self.margins.insert(name.to_string(), v);
        self
    }

    pub fn residual(mut self, name: &str, v: f64) -> Self {
        self.residuals.insert(name.to_string(), v);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "policy", rename_all = "kebab-case")]
pub enum DesignFile {
    Gd(GdEntry),
    HeavyBall(HbEntry),
    Lqr(LqrEntry),
}

fn default_lambda() -> f64 {
    1.0
}

fn default_delay_weight() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GdEntry {
    #[serde(rename = "Gamma")]
    pub gamma: Matrix,
    #[serde(rename = "P")]
    pub p: Matrix,
    #[serde(rename = "K")]
    pub k: Matrix,
    #[serde(rename = "Y", default, skip_serializing_if = "Option::is_none")]
    pub y: Option<Matrix>,
    #[serde(rename = "F", default, skip_serializing_if = "Option::is_none")]
    pub f: Option<Matrix>,
    #[serde(default = "default_lambda")]
    pub lambda: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<Provenance>,
}

impl GdEntry {
    pub fn from_design(d: &GdDesign, provenance: Provenance) -> Self {
        Self {
            gamma: d.gamma.clone(),
            p: d.p.clone(),
            k: d.k.clone(),
            y: Some(d.y.clone()),
            f: Some(d.f.clone()),
            lambda: d.lambda,
            provenance: Some(provenance),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HbEntry {
    #[serde(rename = "Gamma")]
    pub gamma: Matrix,
    #[serde(rename = "P")]
    pub p: Matrix,
    #[serde(rename = "Delta")]
    pub delta: Matrix,
    #[serde(rename = "K1")]
    pub k1: Matrix,
    #[serde(rename = "K2")]
    pub k2: Matrix,
    #[serde(rename = "Y", default, skip_serializing_if = "Option::is_none")]
    pub y: Option<Matrix>,
    #[serde(rename = "F1", default, skip_serializing_if = "Option::is_none")]
    pub f1: Option<Matrix>,
    #[serde(rename = "F2", default, skip_serializing_if = "Option::is_none")]
    pub f2: Option<Matrix>,
    #[serde(rename = "W", default, skip_serializing_if = "Option::is_none")]
    pub w: Option<Matrix>,
    #[serde(default = "default_lambda")]
    pub lambda: f64,
    #[serde(default = "default_delay_weight")]
    pub delay_weight: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<Provenance>,
}

impl HbEntry {
    pub fn from_design(d: &HeavyBallDesign, provenance: Provenance) -> Self {
        Self {
            gamma: d.gamma.clone(),
            p: d.p.clone(),
            delta: d.delta.clone(),
            k1: d.k1.clone(),
            k2: d.k2.clone(),
            y: Some(d.y.clone()),
            f1: Some(d.f1.clone()),
            f2: Some(d.f2.clone()),
            w: Some(d.w.clone()),
            lambda: d.lambda,
            delay_weight: d.delay_weight,
            provenance: Some(provenance),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LqrEntry {
    #[serde(rename = "Q")]
    pub q: Matrix,
    #[serde(rename = "R")]
    pub r: Matrix,
    #[serde(rename = "P_bar")]
    pub p: Matrix,
    #[serde(rename = "K_bar")]
    pub k: Matrix,
    #[serde(rename = "Gamma_bar")]
    pub gamma: Matrix,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x0: Option<Vec<f64>>,
    /// `x₀ᵀ P̄ x₀`, the optimal cost from `x0`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cost: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub iterations: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<Provenance>,
}

impl LqrEntry {
    pub fn from_design(d: &LqrDesign, x0: Option<Vec<f64>>, provenance: Provenance) -> Self {
        let cost = x0.as_ref().map(|x| d.p.quad_form(x));
        Self {
            q: d.weights.q().clone(),
            r: d.weights.r().clone(),
            p: d.p.clone(),
            k: d.k.clone(),
            gamma: d.gamma.clone(),
            x0,
            cost,
            iterations: Some(d.iterations),
            provenance: Some(provenance),
        }
    }
}

/// A matrix given either bare or as the `Gamma` / `Gamma_bar` entry of a
/// design file.
#[derive(Deserialize)]
#[serde(untagged)]
enum MatrixSource {
    Bare(Matrix),
    Gd {
        #[serde(rename = "Gamma")]
        gamma: Matrix,
    },
    Lqr {
        #[serde(rename = "Gamma_bar")]
        gamma: Matrix,
    },
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

pub fn read_matrix(path: &Path) -> Result<Matrix, CliError> {
    Ok(match read_json::<MatrixSource>(path)? {
        MatrixSource::Bare(m) => m,
        MatrixSource::Gd { gamma } | MatrixSource::Lqr { gamma } => gamma,
    })
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

pub fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}
