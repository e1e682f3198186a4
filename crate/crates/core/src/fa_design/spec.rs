//! Serializable decoder parameters.
//!
//! The on-disk form is pretty-printed JSON. Integers are written in decimal
//! and every float with 17 significant digits, so a parse followed by a
//! serialize reproduces the file byte for byte.

use std::fmt;
use std::io;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::fa_runtime::{message_count, FiniteMessage};
use crate::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

/// Decoder family: upper update / lower update.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Variant {
    /// Lookup tables for both updates.
    #[serde(rename = "ib-ib")]
    IbIb,
    /// Min-sum upper, lookup-table lower.
    #[serde(rename = "ms-ib")]
    MsIb,
    /// Min-sum upper, computational domain with optimal thresholds.
    #[serde(rename = "ms-cd-nonuniform")]
    MsCdNonuniform,
    /// Min-sum upper, computational domain with clip-and-shift quantization.
    #[serde(rename = "ms-cd-uniform")]
    MsCdUniform,
}

impl Variant {
    pub const ALL: [Variant; 4] = [
        Variant::IbIb,
        Variant::MsIb,
        Variant::MsCdNonuniform,
        Variant::MsCdUniform,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Variant::IbIb => "ib-ib",
            Variant::MsIb => "ms-ib",
            Variant::MsCdNonuniform => "ms-cd-nonuniform",
            Variant::MsCdUniform => "ms-cd-uniform",
        }
    }

    pub fn lower_kind(self) -> LowerKind {
        match self {
            Variant::IbIb | Variant::MsIb => LowerKind::Lut,
            Variant::MsCdNonuniform => LowerKind::CdNonuniform,
            Variant::MsCdUniform => LowerKind::CdUniform,
        }
    }

    pub fn lut_upper(self) -> bool {
        self == Variant::IbIb
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Variant::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown variant {s:?}")))
    }
}

/// Lower-update realization, without parameters.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum LowerKind {
    Lut,
    CdNonuniform,
    CdUniform,
}

impl LowerKind {
    pub const ALL: [LowerKind; 3] = [
        LowerKind::Lut,
        LowerKind::CdNonuniform,
        LowerKind::CdUniform,
    ];

    pub fn name(self) -> &'static str {
        match self {
            LowerKind::Lut => "lut",
            LowerKind::CdNonuniform => "cd_nonuniform",
            LowerKind::CdUniform => "cd_uniform",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum UpperParams {
    Minsum,
    /// `2^{2w}` outputs indexed by `pack_upper_index`.
    Lut {
        table: Vec<i8>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LowerParams {
    /// `2^{2w+1}` outputs indexed by `pack_lower_index`.
    Lut { table: Vec<i8> },
    CdNonuniform {
        scale: f64,
        /// Integer LLR magnitude of `|t| = 1 ..= 2^(w−1)`.
        phi_a: Vec<u32>,
        phi_b: Vec<u32>,
        /// Integer-domain thresholds on `|y|`.
        thresholds: Vec<i32>,
    },
    CdUniform {
        scale: f64,
        phi_a: Vec<u32>,
        phi_b: Vec<u32>,
        shift: u32,
    },
}

impl LowerParams {
    pub fn kind(&self) -> LowerKind {
        match self {
            LowerParams::Lut { .. } => LowerKind::Lut,
            LowerParams::CdNonuniform { .. } => LowerKind::CdNonuniform,
            LowerParams::CdUniform { .. } => LowerKind::CdUniform,
        }
    }
}

/// LLR magnitudes of the two leaf messages below a last-level node.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecisionLlr {
    /// Indexed by `|t| − 1` for the upper (left) leaf.
    pub upper: Vec<f64>,
    /// Indexed by `|t| − 1` for the lower (right) leaf.
    pub lower: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NodeParams {
    /// `[depth, index]`.
    pub node_id: [usize; 2],
    pub upper: UpperParams,
    pub lower: LowerParams,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decision_llr: Option<DecisionLlr>,
}

/// Channel quantizer in the LLR domain.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelQuantizer {
    /// Thresholds on `|LLR|`, `2^(w−1) − 1` values.
    pub thresholds: Vec<f64>,
    /// LLR of every message, ascending message order.
    pub llr_levels: Vec<f64>,
}

/// Everything a finite-alphabet decoder needs at run time.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecoderSpec {
    pub schema_version: u32,
    #[serde(rename = "N")]
    pub len: usize,
    pub w: u32,
    pub w_internal: u32,
    pub design_ebn0_db: f64,
    /// Code rate the design SNR refers to.
    pub rate: f64,
    pub variant: Variant,
    pub channel_quantizer: ChannelQuantizer,
    /// `N − 1` nodes in heap order.
    pub nodes: Vec<NodeParams>,
}

/// Pretty printer writing floats with 17 significant digits.
struct SpecFormatter(PrettyFormatter<'static>);

macro_rules! delegate {
    ($($name:ident($($arg:ident: $ty:ty),*)),* $(,)?) => {
        $(fn $name<W: ?Sized + io::Write>(&mut self, writer: &mut W $(, $arg: $ty)*) -> io::Result<()> {
            self.0.$name(writer $(, $arg)*)
        })*
    };
}

impl Formatter for SpecFormatter {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    delegate!(
        begin_array(),
        end_array(),
        begin_array_value(first: bool),
        end_array_value(),
        begin_object(),
        end_object(),
        begin_object_key(first: bool),
        begin_object_value(),
        end_object_value(),
    );
}

impl DecoderSpec {
    /// Tree depth `n`.
    pub fn depth(&self) -> u32 {
        self.len.trailing_zeros()
    }

    /// Integer clip `ι = 2^(w′−1) − 1`.
    pub fn clip(&self) -> u32 {
        (1 << (self.w_internal - 1)) - 1
    }

    pub fn to_json(&self) -> Result<String> {
        self.validate()?;
        if !self.all_floats_finite() {
            return Err(Error::SpecFormat("non-finite float in spec".into()));
        }
        let mut out = Vec::new();
        let mut ser =
            serde_json::Serializer::with_formatter(&mut out, SpecFormatter(PrettyFormatter::new()));
        self.serialize(&mut ser)?;
        out.push(b'\n');
        Ok(String::from_utf8(out).expect("serializer emits UTF-8"))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: DecoderSpec = serde_json::from_str(text)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        DecoderSpec::from_json(&std::fs::read_to_string(path)?)
    }

    fn all_floats_finite(&self) -> bool {
        let mut all = vec![self.design_ebn0_db, self.rate];
        all.extend(&self.channel_quantizer.thresholds);
        all.extend(&self.channel_quantizer.llr_levels);
        for node in &self.nodes {
            match &node.lower {
                LowerParams::CdNonuniform { scale, .. } | LowerParams::CdUniform { scale, .. } => {
                    all.push(*scale)
                }
                LowerParams::Lut { .. } => {}
            }
            if let Some(d) = &node.decision_llr {
                all.extend(&d.upper);
                all.extend(&d.lower);
            }
        }
        all.iter().all(|x| x.is_finite())
    }

    /// Checks every structural invariant of the spec.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::SpecFormat(msg));
        if self.schema_version != SCHEMA_VERSION {
            return bad(format!(
                "unsupported schema version {}",
                self.schema_version
            ));
        }
        if self.len < 2 || !self.len.is_power_of_two() {
            return bad(format!("N = {} is not a power of two >= 2", self.len));
        }
        if !(1..=7).contains(&self.w) {
            return bad(format!("w = {} out of range", self.w));
        }
        if self.w_internal < 2 || self.w_internal > 16 {
            return bad(format!("w_internal = {} out of range", self.w_internal));
        }
        if !(self.rate > 0.0 && self.rate <= 1.0) {
            return bad(format!("rate {} out of range", self.rate));
        }
        let levels = 1usize << (self.w - 1);
        let w = self.w;
        let valid_table = |t: &[i8], len: usize| {
            t.len() == len && t.iter().all(|&v| FiniteMessage::new(v, w).is_ok())
        };

        let cq = &self.channel_quantizer;
        if cq.thresholds.len() != levels - 1 || cq.thresholds.windows(2).any(|p| p[0] >= p[1]) {
            return bad("channel thresholds must be 2^(w-1) - 1 strictly increasing values".into());
        }
        if cq.llr_levels.len() != message_count(w) {
            return bad("channel LLR levels must cover every message".into());
        }

        if self.nodes.len() != self.len - 1 {
            return bad(format!(
                "expected {} nodes, found {}",
                self.len - 1,
                self.nodes.len()
            ));
        }
        let depth = self.depth() as usize;
        let clip = self.clip();
        for (id, node) in self.nodes.iter().enumerate() {
            let d = (id + 1).ilog2() as usize;
            let k = id + 1 - (1 << d);
            if node.node_id != [d, k] {
                return bad(format!(
                    "node {id} is labelled {:?}, expected [{d}, {k}]",
                    node.node_id
                ));
            }
            if let UpperParams::Lut { table } = &node.upper {
                if !valid_table(table, 1 << (2 * w)) {
                    return bad(format!("node {id}: invalid upper table"));
                }
            }
            match &node.lower {
                LowerParams::Lut { table } => {
                    if !valid_table(table, 1 << (2 * w + 1)) {
                        return bad(format!("node {id}: invalid lower table"));
                    }
                }
                LowerParams::CdNonuniform {
                    scale,
                    phi_a,
                    phi_b,
                    thresholds,
                } => {
                    check_translation(id, *scale, phi_a, phi_b, levels, clip)?;
                    if thresholds.len() != levels - 1 || thresholds.windows(2).any(|p| p[0] >= p[1])
                    {
                        return bad(format!("node {id}: thresholds must be strictly increasing"));
                    }
                    if thresholds.iter().any(|&t| t > 2 * clip as i32) {
                        return bad(format!("node {id}: threshold beyond the adder range"));
                    }
                }
                LowerParams::CdUniform {
                    scale,
                    phi_a,
                    phi_b,
                    shift,
                } => {
                    check_translation(id, *scale, phi_a, phi_b, levels, clip)?;
                    if *shift > self.w_internal {
                        return bad(format!("node {id}: shift {shift} exceeds the datapath"));
                    }
                }
            }
            match (&node.decision_llr, d + 1 == depth) {
                (Some(dl), true) => {
                    if dl.upper.len() != levels || dl.lower.len() != levels {
                        return bad(format!("node {id}: decision tables need {levels} entries"));
                    }
                }
                (None, false) => {}
                (Some(_), false) => {
                    return bad(format!(
                        "node {id}: decision LLRs only belong to the last level"
                    ))
                }
                (None, true) => return bad(format!("node {id}: missing decision LLRs")),
            }
        }
        Ok(())
    }
}

fn check_translation(
    id: usize,
    scale: f64,
    phi_a: &[u32],
    phi_b: &[u32],
    levels: usize,
    clip: u32,
) -> Result<()> {
    if !(scale.is_finite() && scale > 0.0) {
        return Err(Error::SpecFormat(format!(
            "node {id}: scale must be positive"
        )));
    }
    for phi in [phi_a, phi_b] {
        if phi.len() != levels
            || phi.windows(2).any(|p| p[0] > p[1])
            || phi.iter().any(|&v| v > clip)
        {
            return Err(Error::SpecFormat(format!(
                "node {id}: translation tables need {levels} non-decreasing magnitudes <= {clip}"
            )));
        }
    }
    Ok(())
}
