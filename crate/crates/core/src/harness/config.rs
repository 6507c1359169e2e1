use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::bounds::{min_elements_centralized, min_elements_distributed, BoundOptions, BoundResult, SymmetricScenario};
use crate::error::{Error, Result};

use super::{preset, RadioSpec, Scenario};

/// A preset name or the path of a TOML scenario file.
pub fn load_scenario(name_or_path: &str) -> Result<Scenario> {
    if super::PRESET_NAMES.contains(&name_or_path) {
        return preset(name_or_path);
    }
    let path = Path::new(name_or_path);
    if !path.exists() {
        // report the preset list for names that are not files either
        return preset(name_or_path);
    }
    scenario_from_toml(&std::fs::read_to_string(path)?)
}

/// Parses a scenario. A top-level `preset = "<name>"` starts from that
/// preset and overrides any keys given; nested tables merge key by key and
/// arrays are replaced.
pub fn scenario_from_toml(text: &str) -> Result<Scenario> {
    let mut table: toml::Table = text.parse().map_err(|e| Error::Config(format!("invalid TOML: {e}")))?;
    let scenario: Scenario = match table.remove("preset") {
        Some(toml::Value::String(name)) => {
            let base = preset(&name)?;
            let mut merged =
                toml::Table::try_from(&base).map_err(|e| Error::Config(format!("cannot serialize preset: {e}")))?;
            merge(&mut merged, table);
            merged.try_into()
        }
        Some(other) => return Err(Error::Config(format!("preset must be a string, got {other}"))),
        None => table.try_into(),
    }
    .map_err(|e: toml::de::Error| Error::Config(format!("invalid scenario: {e}")))?;
    scenario.validate()?;
    Ok(scenario)
}

fn merge(base: &mut toml::Table, overrides: toml::Table) {
    for (key, value) in overrides {
        match (base.get_mut(&key), value) {
            (Some(toml::Value::Table(b)), toml::Value::Table(o)) if !is_tagged(b, &o) => merge(b, o),
            (_, v) => {
                base.insert(key, v);
            }
        }
    }
}

// a tagged enum switching its variant is replaced, not merged
fn is_tagged(base: &toml::Table, over: &toml::Table) -> bool {
    matches!((base.get("kind"), over.get("kind")), (Some(a), Some(b)) if a != b)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundMode {
    Centralized,
    Distributed,
}

/// Inputs of the minimum-element bound for a symmetric network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BoundConfig {
    pub users: usize,
    pub resolution: u32,
    pub power_dbm: f64,
    pub radio: RadioSpec,
    pub d_direct: f64,
    pub d_tx_ris: f64,
    pub d_ris_rx: f64,
    /// Linear SINR (centralized) or score (distributed) target.
    pub target: f64,
    /// Per-element cascaded variance override, e.g. for distributed surfaces.
    pub nu_prime: Option<f64>,
    pub options: BoundOptions,
}

impl Default for BoundConfig {
    fn default() -> Self {
        let radio = RadioSpec { alpha_direct: 3.9, alpha_tx_ris: 3.9, alpha_ris_rx: 3.9, ..RadioSpec::default() };
        Self {
            users: 3,
            resolution: 8,
            power_dbm: 20.0,
            radio,
            d_direct: 25.0,
            d_tx_ris: 2f64.sqrt(),
            d_ris_rx: 24.02,
            target: 10.0,
            nu_prime: None,
            options: BoundOptions::default(),
        }
    }
}

impl BoundConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(format!("invalid bound config: {e}")))
    }

    pub fn scenario(&self) -> Result<SymmetricScenario> {
        let radio = self.radio.params(self.users, self.power_dbm);
        let s = SymmetricScenario::from_distances(
            self.users,
            self.resolution,
            &radio,
            self.d_direct,
            self.d_tx_ris,
            self.d_ris_rx,
        )?;
        match self.nu_prime {
            Some(v) => s.with_nu_prime(v),
            None => Ok(s),
        }
    }

    /// Bound for `mode`; `target` overrides the configured target.
    pub fn solve(&self, mode: BoundMode, target: Option<f64>) -> Result<BoundResult> {
        let s = self.scenario()?;
        let t = target.unwrap_or(self.target);
        match mode {
            BoundMode::Centralized => min_elements_centralized(&s, t, &self.options),
            BoundMode::Distributed => min_elements_distributed(&s, t, &self.options),
        }
    }
}
