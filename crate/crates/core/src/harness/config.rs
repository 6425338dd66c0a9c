use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::channel::{ArrayGeometry, FadingMode};

/// A configuration problem, located by its dotted field path.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("config error at `{path}`: {message}")]
pub struct ConfigError {
    pub path: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(path: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            path: path.into(),
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// Eb/N0 grid in dB; 200 stands in for a noiseless point.
    pub ebn0_db: Vec<f64>,
    #[serde(default)]
    pub stopping: StoppingConfig,
    pub code: CodeConfig,
    pub channel: ChannelConfig,
    #[serde(default)]
    pub frame: FrameConfig,
    #[serde(default)]
    pub csi: CsiMode,
    #[serde(default)]
    pub pilot: PilotConfig,
    #[serde(default)]
    pub decoder: DecoderConfig,
    pub out: Option<PathBuf>,
}

fn default_seed() -> u64 {
    1
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StoppingConfig {
    /// Stop a grid point once this many frame errors are seen (0 disables).
    #[serde(default = "default_min_errors")]
    pub min_frame_errors: u64,
    #[serde(default = "default_max_frames")]
    pub max_frames: u64,
}

fn default_min_errors() -> u64 {
    200
}

fn default_max_frames() -> u64 {
    100_000
}

impl Default for StoppingConfig {
    fn default() -> Self {
        Self {
            min_frame_errors: default_min_errors(),
            max_frames: default_max_frames(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CodeKind {
    Alamouti,
    Golden,
    SpatialMultiplex,
    Trellis,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CodeConfig {
    pub kind: CodeKind,
    #[serde(default = "default_constellation")]
    pub constellation: String,
    /// Transmit antennas, spatial multiplexing only.
    pub lt: Option<usize>,
    /// Channel uses per codeword, spatial multiplexing only.
    pub uses: Option<usize>,
    /// Built-in trellis name or path to a trellis file (relative to the config).
    pub trellis: Option<String>,
}

fn default_constellation() -> String {
    "QPSK".into()
}

/// Array geometry given either as a preset name or explicit coordinates.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum GeometrySpec {
    Preset(String),
    Positions(Vec<[f64; 2]>),
}

impl Default for GeometrySpec {
    fn default() -> Self {
        Self::Preset("white".into())
    }
}

impl GeometrySpec {
    pub fn resolve(&self, n: usize, path: &str) -> Result<ArrayGeometry, ConfigError> {
        match self {
            Self::Preset(name) => ArrayGeometry::preset(name, n).map_err(|e| ConfigError::new(path, e.to_string())),
            Self::Positions(p) => {
                if p.len() != n {
                    return Err(ConfigError::new(path, format!("{} positions given for {n} antennas", p.len())));
                }
                ArrayGeometry::new(p.clone()).map_err(|e| ConfigError::new(path, e.to_string()))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelConfig {
    pub lr: usize,
    pub mode: FadingMode,
    #[serde(default)]
    pub fdt: f64,
    #[serde(default)]
    pub tx_geometry: GeometrySpec,
    #[serde(default)]
    pub rx_geometry: GeometrySpec,
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrameConfig {
    /// Channel uses per frame, pilots and tail included.
    #[serde(default = "default_frame_length")]
    pub length: usize,
}

fn default_frame_length() -> usize {
    300
}

impl Default for FrameConfig {
    fn default() -> Self {
        Self {
            length: default_frame_length(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CsiMode {
    #[default]
    Perfect,
    Pilot,
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PilotConfig {
    #[serde(default = "default_pilot_count")]
    pub count: usize,
    #[serde(default = "default_taps")]
    pub taps: usize,
    #[serde(default = "default_design_fdt")]
    pub design_fdt: f64,
    /// Eb/N0 (dB) the interpolator is optimised for.
    #[serde(default = "default_design_snr")]
    pub design_snr_db: f64,
}

fn default_pilot_count() -> usize {
    72
}

fn default_taps() -> usize {
    20
}

fn default_design_fdt() -> f64 {
    0.01
}

fn default_design_snr() -> f64 {
    30.0
}

impl Default for PilotConfig {
    fn default() -> Self {
        Self {
            count: default_pilot_count(),
            taps: default_taps(),
            design_fdt: default_design_fdt(),
            design_snr_db: default_design_snr(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecoderMethod {
    /// Viterbi for trellis codes, the combiner for Alamouti on block-static
    /// channels, the sphere decoder where the lattice model fits, otherwise
    /// exhaustive search.
    #[default]
    Auto,
    Exhaustive,
    Sphere,
    Alamouti,
    Viterbi,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecoderConfig {
    #[serde(default)]
    pub method: DecoderMethod,
    /// Let the Alamouti combiner average a channel that varies within a block.
    #[serde(default)]
    pub alamouti_allow_varying: bool,
}

impl SweepConfig {
    /// Parses TOML text. Relative trellis paths are resolved against `base_dir`.
    pub fn from_toml_str(text: &str, base_dir: Option<&Path>) -> Result<Self, ConfigError> {
        let de = toml::Deserializer::new(text);
        let mut cfg: Self = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            ConfigError::new(if path.is_empty() { ".".into() } else { path }, e.into_inner().message().trim().to_string())
        })?;
        if let (Some(dir), Some(t)) = (base_dir, cfg.code.trellis.as_mut()) {
            if t.contains('/') || t.ends_with(".trellis") {
                let p = Path::new(t.as_str());
                if p.is_relative() {
                    *t = dir.join(p).to_string_lossy().into_owned();
                }
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::new(".", format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text, path.parent())
    }

    /// Checks the semantic constraints the type system does not.
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.ebn0_db.is_empty() {
            return Err(ConfigError::new("ebn0_db", "grid must not be empty"));
        }
        if let Some(i) = self.ebn0_db.iter().position(|v| !v.is_finite()) {
            return Err(ConfigError::new(format!("ebn0_db[{i}]"), "must be finite (use 200 for noiseless)"));
        }
        if let Some(i) = self.ebn0_db.windows(2).position(|w| w[1] <= w[0]) {
            return Err(ConfigError::new(format!("ebn0_db[{}]", i + 1), "grid must be strictly increasing"));
        }
        if !(1..=4).contains(&self.channel.lr) {
            return Err(ConfigError::new("channel.lr", "receive antennas must be between 1 and 4"));
        }
        if !(self.channel.fdt >= 0.0 && self.channel.fdt.is_finite()) {
            return Err(ConfigError::new("channel.fdt", "must be finite and ≥ 0"));
        }
        if self.frame.length == 0 {
            return Err(ConfigError::new("frame.length", "must be positive"));
        }
        if !(self.pilot.design_fdt >= 0.0) {
            return Err(ConfigError::new("pilot.design_fdt", "must be ≥ 0"));
        }
        if self.pilot.design_snr_db.is_nan() {
            return Err(ConfigError::new("pilot.design_snr_db", "must be a number"));
        }
        match self.code.kind {
            CodeKind::SpatialMultiplex => {
                if self.code.lt.is_none_or(|v| v == 0) {
                    return Err(ConfigError::new("code.lt", "spatial multiplexing needs lt ≥ 1"));
                }
                if self.code.uses == Some(0) {
                    return Err(ConfigError::new("code.uses", "must be ≥ 1"));
                }
            }
            CodeKind::Trellis => {
                if self.code.trellis.is_none() {
                    return Err(ConfigError::new("code.trellis", "trellis codes need a trellis name or file"));
                }
            }
            CodeKind::Alamouti | CodeKind::Golden => {
                if let Some(lt) = self.code.lt {
                    if lt != 2 {
                        return Err(ConfigError::new("code.lt", "this code has two transmit antennas"));
                    }
                }
            }
        }
        Ok(())
    }
}
