use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::codec::{CodeConfig, Construction, CrcConfig};
use crate::fa_runtime::{Conversion, FaOptions};
use crate::{Error, Result};

pub const DEFAULT_MIN_BLOCK_ERRORS: u64 = 100;
pub const DEFAULT_MAX_FRAMES: u64 = 200_000;

/// Decoder family under test.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum DecoderKind {
    #[serde(rename = "llr-sc")]
    LlrSc,
    #[serde(rename = "llr-scl")]
    LlrScl,
    #[serde(rename = "fa-sc")]
    FaSc,
    #[serde(rename = "fa-scl")]
    FaScl,
}

impl DecoderKind {
    pub fn name(self) -> &'static str {
        match self {
            DecoderKind::LlrSc => "llr-sc",
            DecoderKind::LlrScl => "llr-scl",
            DecoderKind::FaSc => "fa-sc",
            DecoderKind::FaScl => "fa-scl",
        }
    }

    pub fn is_finite_alphabet(self) -> bool {
        matches!(self, DecoderKind::FaSc | DecoderKind::FaScl)
    }

    pub fn is_list(self) -> bool {
        matches!(self, DecoderKind::LlrScl | DecoderKind::FaScl)
    }
}

impl fmt::Display for DecoderKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DecoderKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [
            DecoderKind::LlrSc,
            DecoderKind::LlrScl,
            DecoderKind::FaSc,
            DecoderKind::FaScl,
        ]
        .into_iter()
        .find(|k| k.name() == s)
        .ok_or_else(|| Error::Config(format!("unknown decoder kind {s:?}")))
    }
}

/// How channel observations reach a finite-alphabet decoder.
///
/// `Sample` keeps the quantizer thresholds fixed in the received-sample
/// domain, as a receiver with a fixed ADC would: LLRs are formed with the
/// design noise level. `Llr` applies the LLR thresholds to LLRs computed with
/// the true noise level.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FrontEnd {
    #[default]
    Sample,
    Llr,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CodeSection {
    #[serde(rename = "N")]
    pub len: usize,
    #[serde(rename = "K")]
    pub k: usize,
    #[serde(default = "default_construction")]
    pub construction: Construction,
}

fn default_construction() -> Construction {
    Construction::Nr5g
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecoderSection {
    pub kind: DecoderKind,
    /// Decoder spec file; relative paths resolve against the config file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spec: Option<PathBuf>,
    #[serde(default)]
    pub conversion: Conversion,
    #[serde(default)]
    pub alt_sign_invert: bool,
    #[serde(default)]
    pub channel_front_end: FrontEnd,
    /// Label written to result files; derived from the decoder when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
}

impl DecoderSection {
    pub fn options(&self) -> FaOptions {
        FaOptions {
            conversion: self.conversion,
            alt_sign_invert: self.alt_sign_invert,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CrcSection {
    pub enabled: bool,
    /// Generator without its leading term; width follows from `width`.
    #[serde(default = "default_poly")]
    pub polynomial: u64,
    #[serde(default = "default_crc_width")]
    pub width: u32,
}

fn default_poly() -> u64 {
    0x1021
}

fn default_crc_width() -> u32 {
    16
}

impl Default for CrcSection {
    fn default() -> Self {
        CrcSection {
            enabled: false,
            polynomial: default_poly(),
            width: default_crc_width(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StoppingSection {
    #[serde(default = "default_min_errors")]
    pub min_block_errors: u64,
    #[serde(default = "default_max_frames")]
    pub max_frames: u64,
}

fn default_min_errors() -> u64 {
    DEFAULT_MIN_BLOCK_ERRORS
}

fn default_max_frames() -> u64 {
    DEFAULT_MAX_FRAMES
}

impl Default for StoppingSection {
    fn default() -> Self {
        StoppingSection {
            min_block_errors: DEFAULT_MIN_BLOCK_ERRORS,
            max_frames: DEFAULT_MAX_FRAMES,
        }
    }
}

fn default_list_size() -> usize {
    1
}

/// One Monte-Carlo experiment: a code, a decoder and an `E_b/N_0` sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    /// Worker threads; `POLARQUANT_WORKERS` takes precedence.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
    pub ebn0_db: Vec<f64>,
    #[serde(rename = "N_L", default = "default_list_size")]
    pub list_size: usize,
    /// Transmit the all-zero payload instead of random data.
    #[serde(default)]
    pub zero_payload: bool,
    pub code: CodeSection,
    pub decoder: DecoderSection,
    #[serde(default)]
    pub crc: CrcSection,
    #[serde(default)]
    pub stopping: StoppingSection,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let config: ExperimentConfig = toml::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    /// Reads a config; a relative spec path is taken relative to the file.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let mut config = ExperimentConfig::from_toml(&std::fs::read_to_string(path)?)?;
        if let (Some(spec), Some(dir)) = (&config.decoder.spec, path.parent()) {
            if spec.is_relative() {
                config.decoder.spec = Some(dir.join(spec));
            }
        }
        Ok(config)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.ebn0_db.is_empty() {
            return bad("ebn0_db sweep is empty".into());
        }
        if self.ebn0_db.iter().any(|e| !e.is_finite()) {
            return bad("ebn0_db values must be finite".into());
        }
        if self.stopping.min_block_errors == 0 || self.stopping.max_frames == 0 {
            return bad("min_block_errors and max_frames must be at least 1".into());
        }
        if self.list_size == 0 {
            return bad("N_L must be at least 1".into());
        }
        if self.workers == Some(0) {
            return bad("workers must be at least 1".into());
        }
        if !self.code.len.is_power_of_two() || self.code.len < 2 {
            return bad(format!("N = {} is not a power of two >= 2", self.code.len));
        }
        let info = self.code.k + self.crc_width();
        if self.code.k == 0 || info > self.code.len {
            return bad(format!(
                "need 0 < K and K + CRC bits <= N, got K = {} with {} CRC bits for N = {}",
                self.code.k,
                self.crc_width(),
                self.code.len
            ));
        }
        if self.decoder.kind.is_finite_alphabet() && self.decoder.spec.is_none() {
            return bad(format!("decoder {} needs a spec file", self.decoder.kind));
        }
        if let Some(id) = &self.decoder.id {
            if id.is_empty() || id.contains([',', '"', '\n', '\r']) {
                return bad(format!("decoder id {id:?} is not a plain label"));
            }
        }
        self.crc_config()?;
        Ok(())
    }

    fn crc_width(&self) -> usize {
        if self.crc.enabled {
            self.crc.width as usize
        } else {
            0
        }
    }

    pub fn crc_config(&self) -> Result<Option<CrcConfig>> {
        if !self.crc.enabled {
            return Ok(None);
        }
        CrcConfig::new(self.crc.width, self.crc.polynomial, 0).map(Some)
    }

    /// Code carrying the payload and its CRC.
    pub fn code_config(&self) -> Result<CodeConfig> {
        CodeConfig::construct(
            self.code.len,
            self.code.k + self.crc_width(),
            self.code.construction,
        )
    }

    /// Payload rate `K/N` used for the noise level.
    pub fn rate(&self) -> f64 {
        self.code.k as f64 / self.code.len as f64
    }

    /// Effective worker count: environment, then config, then all cores.
    pub fn worker_count(&self) -> usize {
        std::env::var("POLARQUANT_WORKERS")
            .ok()
            .and_then(|v| v.trim().parse::<usize>().ok())
            .filter(|&n| n > 0)
            .or(self.workers)
            .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
    }
}
