//! Scenario configuration: TOML files plus `key=value` overrides.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::architectures::Architecture;
use crate::channel::Propagation;
use crate::geometry::Plane;
use crate::metrics::PowerModel;
use crate::{Error, Result};

/// Directory searched for relative config paths that do not exist as given.
pub const CONFIG_DIR_ENV: &str = "THZ_HYBRID_CONFIG_DIR";

const REQUIRED: [&str; 5] = [
    "channel.distance",
    "channel.height",
    "channel.carrier_frequency",
    "geometry.n_x",
    "geometry.n_y",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub geometry: GeometryConfig,
    pub channel: ChannelConfig,
    #[serde(default)]
    pub radio: RadioConfig,
    #[serde(default)]
    pub power_model: PowerModel,
    #[serde(default)]
    pub algorithm: AlgorithmConfig,
    #[serde(default)]
    pub sweep: SweepConfig,
    #[serde(default)]
    pub daosa: DaosaConfig,
    #[serde(default)]
    pub array_gain: ArrayGainConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometryConfig {
    /// Elements per side of each end's full array.
    pub n_x: usize,
    pub n_y: usize,
    /// Element spacing in carrier wavelengths.
    #[serde(default = "half")]
    pub spacing: f64,
    /// Subarrays of a WSMS end; each is `n_x/k × n_y`.
    #[serde(default = "two")]
    pub wsms_subarrays: usize,
    /// Distance (m) between neighbouring WSMS subarrays. Defaults to
    /// `sqrt(λ·D/k)`, which keeps the subarray responses orthogonal.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub separation: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelConfig {
    /// Horizontal Tx–Rx distance (m).
    pub distance: f64,
    /// Height of both ends above the reflecting ground (m).
    pub height: f64,
    pub carrier_frequency: f64,
    #[serde(default = "default_bandwidth")]
    pub bandwidth: f64,
    #[serde(default = "one")]
    pub subcarriers: usize,
    #[serde(default = "default_reflection_loss")]
    pub reflection_loss_db: f64,
    /// Forces one propagation model for every architecture. When absent,
    /// WSMS uses spherical propagation and the rest planar.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub propagation: Option<Propagation>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RadioConfig {
    pub transmit_power_dbm: f64,
    pub noise_figure_db: f64,
    pub rf_chains: usize,
    /// Stream cap; defaults to the RF chain count.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_streams: Option<usize>,
}

impl Default for RadioConfig {
    fn default() -> Self {
        RadioConfig { transmit_power_dbm: 20.0, noise_figure_db: 10.0, rf_chains: 8, max_streams: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AosaSolver {
    #[default]
    Sic,
    Altmin,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AlgorithmConfig {
    pub max_iterations: usize,
    pub tolerance: f64,
    pub aosa_solver: AosaSolver,
    pub seed: u64,
}

impl Default for AlgorithmConfig {
    fn default() -> Self {
        AlgorithmConfig { max_iterations: 500, tolerance: 1e-6, aosa_solver: AosaSolver::Sic, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    /// Transmit powers (dBm) for the rate sweep.
    pub power_dbm: Vec<f64>,
    pub architectures: Vec<Architecture>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            power_dbm: (0..=15).map(|i| 2.0 * i as f64).collect(),
            architectures: vec![Architecture::Fc, Architecture::Aosa, Architecture::Wsms],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DaosaConfig {
    pub rf_chains: usize,
    pub subarrays: usize,
}

impl Default for DaosaConfig {
    fn default() -> Self {
        DaosaConfig { rf_chains: 4, subarrays: 4 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ArrayGainConfig {
    pub azimuth_deg: f64,
    pub elevation_deg: f64,
    /// Plane of the array lattice in the local frame.
    pub plane: Plane,
    /// Ends of the link with identical arrays; their losses add in dB.
    pub link_ends: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ttd_bits: Option<u32>,
}

impl Default for ArrayGainConfig {
    fn default() -> Self {
        ArrayGainConfig { azimuth_deg: 60.0, elevation_deg: 10.0, plane: Plane::Xz, link_ends: 2, ttd_bits: None }
    }
}

fn half() -> f64 {
    0.5
}

fn two() -> usize {
    2
}

fn one() -> usize {
    1
}

fn default_bandwidth() -> f64 {
    5e9
}

fn default_reflection_loss() -> f64 {
    15.0
}

impl ScenarioConfig {
    /// Parses TOML text, applies overrides and validates.
    pub fn from_toml_str(text: &str, overrides: &[String]) -> Result<Self> {
        let mut table: toml::Table = text.parse().map_err(|e: toml::de::Error| Error::ConfigParse(e.to_string()))?;
        for ov in overrides {
            apply_override(&mut table, ov)?;
        }
        for key in REQUIRED {
            if lookup(&table, key).is_none() {
                return Err(Error::config(key, "missing required key"));
            }
        }
        let cfg: ScenarioConfig = toml::Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| Error::ConfigParse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let g = &self.geometry;
        let c = &self.channel;
        positive("geometry.n_x", g.n_x as f64)?;
        positive("geometry.n_y", g.n_y as f64)?;
        positive("geometry.spacing", g.spacing)?;
        positive("geometry.wsms_subarrays", g.wsms_subarrays as f64)?;
        if !g.n_x.is_multiple_of(g.wsms_subarrays) {
            return Err(Error::config("geometry.wsms_subarrays", "must divide geometry.n_x"));
        }
        if let Some(s) = g.separation {
            positive("geometry.separation", s)?;
        }
        positive("channel.distance", c.distance)?;
        positive("channel.height", c.height)?;
        positive("channel.carrier_frequency", c.carrier_frequency)?;
        if !(c.bandwidth >= 0.0) || c.bandwidth >= 2.0 * c.carrier_frequency {
            return Err(Error::config("channel.bandwidth", "must lie in [0, 2·carrier_frequency)"));
        }
        positive("channel.subcarriers", c.subcarriers as f64)?;
        if !(c.reflection_loss_db >= 0.0) {
            return Err(Error::config("channel.reflection_loss_db", "must be non-negative"));
        }
        let r = &self.radio;
        finite("radio.transmit_power_dbm", r.transmit_power_dbm)?;
        finite("radio.noise_figure_db", r.noise_figure_db)?;
        positive("radio.rf_chains", r.rf_chains as f64)?;
        if let Some(m) = r.max_streams {
            positive("radio.max_streams", m as f64)?;
        }
        self.power_model.validate()?;
        positive("algorithm.max_iterations", self.algorithm.max_iterations as f64)?;
        if !(self.algorithm.tolerance >= 0.0) {
            return Err(Error::config("algorithm.tolerance", "must be non-negative"));
        }
        for p in &self.sweep.power_dbm {
            finite("sweep.power_dbm", *p)?;
        }
        if self.sweep.architectures.contains(&Architecture::Daosa) {
            return Err(Error::config("sweep.architectures", "daosa has its own trade-off run"));
        }
        positive("daosa.rf_chains", self.daosa.rf_chains as f64)?;
        positive("daosa.subarrays", self.daosa.subarrays as f64)?;
        if self.daosa.rf_chains > self.daosa.subarrays {
            return Err(Error::config("daosa.rf_chains", "cannot exceed daosa.subarrays"));
        }
        finite("array_gain.azimuth_deg", self.array_gain.azimuth_deg)?;
        finite("array_gain.elevation_deg", self.array_gain.elevation_deg)?;
        positive("array_gain.link_ends", self.array_gain.link_ends as f64)?;
        Ok(())
    }

    /// Canonical TOML rendering of the validated config.
    pub fn canonical(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// First 16 hex digits of the SHA-256 of [`Self::canonical`].
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.canonical().as_bytes());
        hex::encode(digest)[..16].to_string()
    }

    pub fn transmit_power_watts(&self) -> f64 {
        dbm_to_watts(self.radio.transmit_power_dbm)
    }
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf(dbm / 10.0) * 1e-3
}

fn positive(key: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::config(key, format!("must be positive, got {v}")))
    }
}

fn finite(key: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::config(key, "must be finite"))
    }
}

fn lookup<'a>(table: &'a toml::Table, dotted: &str) -> Option<&'a toml::Value> {
    let mut parts = dotted.split('.');
    let mut cur = table.get(parts.next()?)?;
    for p in parts {
        cur = cur.as_table()?.get(p)?;
    }
    Some(cur)
}

/// Applies `a.b.c=value`. The value is read as a TOML literal when it parses
/// as one and as a bare string otherwise.
pub fn apply_override(table: &mut toml::Table, assignment: &str) -> Result<()> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| Error::config(assignment, "override must look like key=value"))?;
    let key = key.trim();
    let raw = raw.trim();
    if key.is_empty() || key.split('.').any(str::is_empty) {
        return Err(Error::config(key, "empty key segment"));
    }
    let value = format!("v = {raw}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()));
    let mut segments: Vec<&str> = key.split('.').collect();
    let last = segments.pop().expect("non-empty key");
    let mut cur = table;
    for seg in segments {
        let entry = cur.entry(seg.to_string()).or_insert_with(|| toml::Value::Table(toml::Table::new()));
        cur = entry
            .as_table_mut()
            .ok_or_else(|| Error::config(key, format!("`{seg}` is not a table")))?;
    }
    cur.insert(last.to_string(), value);
    Ok(())
}

/// Resolves a config path: as given if it exists, otherwise relative to
/// `$THZ_HYBRID_CONFIG_DIR`.
pub fn resolve_config_path(path: &Path) -> PathBuf {
    if path.exists() || path.is_absolute() {
        return path.to_path_buf();
    }
    match std::env::var_os(CONFIG_DIR_ENV) {
        Some(dir) => Path::new(&dir).join(path),
        None => path.to_path_buf(),
    }
}

pub fn load_config(path: &Path) -> Result<ScenarioConfig> {
    load_config_with(path, &[])
}

pub fn load_config_with(path: &Path, overrides: &[String]) -> Result<ScenarioConfig> {
    let resolved = resolve_config_path(path);
    let text = std::fs::read_to_string(&resolved)?;
    ScenarioConfig::from_toml_str(&text, overrides)
}

/// The backhaul scenario: 100 m link, 30 m masts, 32×32 arrays at 0.3 THz.
pub const BACKHAUL_TOML: &str = include_str!("../../configs/backhaul.toml");

pub fn backhaul() -> ScenarioConfig {
    ScenarioConfig::from_toml_str(BACKHAUL_TOML, &[]).expect("bundled config is valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn backhaul_config_echoes_scenario() {
        let c = backhaul();
        assert_eq!(c.channel.distance, 100.0);
        assert_eq!(c.channel.height, 30.0);
        assert_eq!(c.geometry.n_x * c.geometry.n_y, 1024);
        assert_eq!(c.channel.carrier_frequency, 0.3e12);
    }

    #[test]
    fn missing_key_is_named() {
        let err = ScenarioConfig::from_toml_str("[geometry]\nn_x = 4\nn_y = 4\n[channel]\ndistance = 1.0\nheight = 1.0\n", &[])
            .unwrap_err();
        assert!(err.to_string().contains("channel.carrier_frequency"), "{err}");
    }

    #[test]
    fn negative_distance_rejected() {
        let err = ScenarioConfig::from_toml_str(BACKHAUL_TOML, &["channel.distance=-5".into()]).unwrap_err();
        assert!(err.to_string().contains("channel.distance"), "{err}");
    }

    #[test]
    fn unknown_key_rejected() {
        let err = ScenarioConfig::from_toml_str(BACKHAUL_TOML, &["channel.colour=3".into()]).unwrap_err();
        assert!(err.to_string().contains("colour"), "{err}");
    }

    #[test]
    fn overrides_parse_literals_and_strings() {
        let c = ScenarioConfig::from_toml_str(
            BACKHAUL_TOML,
            &["radio.noise_figure_db=0".into(), "array_gain.plane=yz".into(), "sweep.power_dbm=[0, 10]".into()],
        )
        .unwrap();
        assert_eq!(c.radio.noise_figure_db, 0.0);
        assert_eq!(c.array_gain.plane, Plane::Yz);
        assert_eq!(c.sweep.power_dbm, vec![0.0, 10.0]);
        assert_ne!(c.hash(), backhaul().hash());
    }
}
