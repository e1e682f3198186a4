//! Offline design of finite-alphabet decoders by quantized density evolution.
//!
//! Every message distribution is kept in folded form: for each magnitude
//! `m = |t|` the probability that the sign agrees with the transmitted bit
//! (`correct`) and that it disagrees (`wrong`). The joint `p(x, t)` follows as
//! `p(0, +m) = p(1, −m) = correct/2`, `p(0, −m) = p(1, +m) = wrong/2`, which
//! makes odd symmetry hold by construction.
//!
//! Lower updates are designed for a correct `û₀ = 0`; the `û₀ = 1` half of a
//! lookup table is its mirror `lut(t_a, t_b, 1) = lut(−t_a, t_b, 0)`.

mod spec;

pub use spec::{
    ChannelQuantizer, DecisionLlr, DecoderSpec, LowerKind, LowerParams, NodeParams, UpperParams,
    Variant, SCHEMA_VERSION,
};

use std::collections::HashMap;

use rayon::prelude::*;

use crate::channel::{discretize_channel, NoiseConfig, FINE_BINS, FINE_CLIP};
use crate::codec::CodeConfig;
use crate::fa_runtime::{
    message_count, message_from_index, message_index, nonuniform_magnitude, uniform_magnitude,
};
use crate::infoquant::{
    cluster_information, default_scale_grid, llr_of, optimal_symmetric_quantization,
    symmetric_joint, uniform_grid_search, BinaryJoint, FoldedChannel,
};
use crate::llr_decoder::boxplus;
use crate::{Error, Result};

const MASS_TOL: f64 = 1e-9;

/// Odd-symmetric distribution of a bit and a `w`-bit message.
#[derive(Clone, Debug, PartialEq)]
pub struct MessageDistribution {
    w: u32,
    correct: Vec<f64>,
    wrong: Vec<f64>,
}

impl MessageDistribution {
    /// Builds the distribution from folded masses indexed by `|t| − 1`.
    pub fn from_folded(correct: Vec<f64>, wrong: Vec<f64>) -> Result<Self> {
        let levels = correct.len();
        if levels == 0 || !levels.is_power_of_two() || wrong.len() != levels {
            return Err(Error::InvalidParameter(
                "folded masses need 2^(w-1) entries each".into(),
            ));
        }
        if correct.iter().chain(&wrong).any(|&p| p.is_nan() || p < 0.0) {
            return Err(Error::InvalidParameter("negative mass".into()));
        }
        let total: f64 = correct.iter().chain(&wrong).sum();
        if (total - 1.0).abs() > MASS_TOL {
            return Err(Error::Unnormalized(total));
        }
        Ok(MessageDistribution {
            w: levels.trailing_zeros() + 1,
            correct,
            wrong,
        })
    }

    /// All mass on `±2^(w−1)` with the correct sign.
    pub fn noiseless(w: u32) -> Self {
        let levels = 1 << (w - 1);
        let mut correct = vec![0.0; levels];
        correct[levels - 1] = 1.0;
        MessageDistribution {
            w,
            correct,
            wrong: vec![0.0; levels],
        }
    }

    pub fn w(&self) -> u32 {
        self.w
    }

    pub fn correct(&self) -> &[f64] {
        &self.correct
    }

    pub fn wrong(&self) -> &[f64] {
        &self.wrong
    }

    /// `p(x, t)`.
    pub fn p(&self, x: u8, t: i8) -> f64 {
        let m = t.unsigned_abs() as usize - 1;
        if (t > 0) == (x == 0) {
            self.correct[m] / 2.0
        } else {
            self.wrong[m] / 2.0
        }
    }

    /// Joint over the messages in ascending order.
    pub fn joint(&self) -> BinaryJoint {
        symmetric_joint(&self.correct, &self.wrong).expect("validated masses")
    }

    pub fn total(&self) -> f64 {
        self.correct.iter().chain(&self.wrong).sum()
    }

    /// `I(X;T)` in bits.
    pub fn mutual_information(&self) -> f64 {
        self.correct
            .iter()
            .zip(&self.wrong)
            .map(|(&c, &w)| cluster_information(c, w))
            .sum()
    }

    /// LLR magnitude carried by `|t| = 1 ..= 2^(w−1)`.
    ///
    /// Magnitudes without mass inherit the level below; the sequence is made
    /// non-decreasing and non-negative so that it can drive translations.
    pub fn magnitudes(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.correct.len());
        let mut last = 0.0f64;
        for (&c, &w) in self.correct.iter().zip(&self.wrong) {
            if c + w > 0.0 {
                last = last.max(llr_of(c, w));
            }
            out.push(last);
        }
        out
    }

    /// Signed LLR of every message, ascending message order.
    pub fn llr_levels(&self) -> Vec<f64> {
        let mags = self.magnitudes();
        (0..message_count(self.w))
            .map(|i| level_of(&mags, message_from_index(i, self.w)))
            .collect()
    }

    /// Largest `|p(0, t) − p(1, −t)|` over the alphabet.
    pub fn symmetry_error(&self) -> f64 {
        let j = self.joint();
        let n = j.len();
        (0..n)
            .map(|i| (j.p0()[i] - j.p1()[n - 1 - i]).abs())
            .fold(0.0, f64::max)
    }

    /// True when `p(0, t) = p(1, −t)` holds to `tol` for every message.
    pub fn is_odd_symmetric(&self, tol: f64) -> bool {
        self.symmetry_error() <= tol
    }

    fn messages(&self) -> impl Iterator<Item = i8> + '_ {
        (0..message_count(self.w)).map(|i| message_from_index(i, self.w))
    }
}

fn level_of(mags: &[f64], t: i8) -> f64 {
    let l = mags[t.unsigned_abs() as usize - 1];
    if t < 0 {
        -l
    } else {
        l
    }
}

fn same_alphabet(a: &MessageDistribution, b: &MessageDistribution) -> Result<()> {
    if a.w != b.w {
        return Err(Error::InvalidParameter(format!(
            "alphabet mismatch: {} vs {} bits",
            a.w, b.w
        )));
    }
    Ok(())
}

fn from_level_masses(correct: Vec<f64>, wrong: Vec<f64>) -> MessageDistribution {
    // Renormalize away the rounding accumulated by long sums.
    let total: f64 = correct.iter().chain(&wrong).sum();
    MessageDistribution::from_folded(
        correct.iter().map(|c| c / total).collect(),
        wrong.iter().map(|w| w / total).collect(),
    )
    .expect("masses from a normalized distribution")
}

/// Channel quantizer maximizing `I(X;T)` for the fine-binned AWGN channel.
pub fn design_channel_quantizer(
    noise: &NoiseConfig,
    w: u32,
) -> Result<(ChannelQuantizer, MessageDistribution)> {
    let fine = discretize_channel(noise, FINE_BINS, FINE_CLIP)?;
    let bins = fine.bin_count();
    let j = fine.joint();
    // Key by bin position so that mirrored bins merge exactly.
    let items = (0..bins).map(|i| ((2 * i + 1) as f64 - bins as f64, j.p0()[i], j.p1()[i]));
    let (folded, _) = FoldedChannel::fold(items);
    let q = optimal_symmetric_quantization(&folded, w);
    let width = fine.bin_width();
    let thresholds = q
        .quantizer
        .thresholds()
        .iter()
        .map(|&k| (k + 1.0) / 2.0 * width)
        .collect();
    let dist = from_level_masses(q.correct, q.wrong);
    Ok((
        ChannelQuantizer {
            thresholds,
            llr_levels: dist.llr_levels(),
        },
        dist,
    ))
}

/// Exact output of the min-sum upper update.
pub fn evolve_upper_minsum(
    pa: &MessageDistribution,
    pb: &MessageDistribution,
) -> Result<MessageDistribution> {
    same_alphabet(pa, pb)?;
    let levels = pa.correct.len();
    let mut correct = vec![0.0; levels];
    let mut wrong = vec![0.0; levels];
    // The output sign agrees with u₀ = x_a ⊕ x_b iff both or neither input agrees.
    for i in 0..levels {
        for j in 0..levels {
            let m = i.min(j);
            correct[m] += pa.correct[i] * pb.correct[j] + pa.wrong[i] * pb.wrong[j];
            wrong[m] += pa.correct[i] * pb.wrong[j] + pa.wrong[i] * pb.correct[j];
        }
    }
    Ok(from_level_masses(correct, wrong))
}

/// Signed-pair items `(key, p(bit=0, t_a, t_b), p(bit=1, t_a, t_b))` in
/// `pack_upper_index` order.
fn upper_pairs(pa: &MessageDistribution, pb: &MessageDistribution) -> Vec<(f64, f64, f64)> {
    let (la, lb) = (pa.magnitudes(), pb.magnitudes());
    let mut items = Vec::with_capacity(message_count(pa.w) * message_count(pb.w));
    for ta in pa.messages() {
        for tb in pb.messages() {
            let key = boxplus(level_of(&la, ta), level_of(&lb, tb));
            let p0 = pa.p(0, ta) * pb.p(0, tb) + pa.p(1, ta) * pb.p(1, tb);
            let p1 = pa.p(0, ta) * pb.p(1, tb) + pa.p(1, ta) * pb.p(0, tb);
            items.push((key, p0, p1));
        }
    }
    items
}

/// Lower-update pairs for `û₀ = u₀ = 0`.
fn lower_pairs(pa: &MessageDistribution, pb: &MessageDistribution) -> Vec<(f64, f64, f64)> {
    let (la, lb) = (pa.magnitudes(), pb.magnitudes());
    let mut items = Vec::with_capacity(message_count(pa.w) * message_count(pb.w));
    for ta in pa.messages() {
        for tb in pb.messages() {
            let key = level_of(&la, ta) + level_of(&lb, tb);
            items.push((
                key,
                2.0 * pa.p(0, ta) * pb.p(0, tb),
                2.0 * pa.p(1, ta) * pb.p(1, tb),
            ));
        }
    }
    items
}

/// Upper lookup table designed by optimal quantization of the input pair.
pub fn evolve_upper_lut(
    pa: &MessageDistribution,
    pb: &MessageDistribution,
) -> Result<(Vec<i8>, MessageDistribution)> {
    same_alphabet(pa, pb)?;
    let w = pa.w;
    let items = upper_pairs(pa, pb);
    let (folded, index) = FoldedChannel::fold(items.iter().copied());
    let q = optimal_symmetric_quantization(&folded, w);
    let table = items
        .iter()
        .enumerate()
        .map(|(i, &(key, _, _))| {
            let m = q.item_level[index[i]] as i8;
            let (ta, tb) = (
                message_from_index(i >> w, w),
                message_from_index(i & ((1 << w) - 1), w),
            );
            // Zero keys only come from uninformative inputs; keep the sign rule of min-sum.
            let negative = if key == 0.0 {
                (ta < 0) != (tb < 0)
            } else {
                key < 0.0
            };
            if negative {
                -m
            } else {
                m
            }
        })
        .collect();
    Ok((table, from_level_masses(q.correct, q.wrong)))
}

/// Result of designing one lower update.
#[derive(Clone, Debug, PartialEq)]
pub struct LowerDesign {
    pub params: LowerParams,
    pub output: MessageDistribution,
    /// Every translation saturates at the integer clip.
    pub degenerate: bool,
}

/// Integer translation `min(⌊s·l + 0.5⌋, ι)` of LLR magnitudes.
pub fn translate(magnitudes: &[f64], s: f64, clip: u32) -> Vec<u32> {
    magnitudes
        .iter()
        .map(|&l| ((s * l + 0.5).floor() as u64).min(u64::from(clip)) as u32)
        .collect()
}

/// Distribution of `y = φ_a(t_a) + φ_b(t_b)` (signed translations) for
/// `û₀ = u₀ = 0`, as `(y, p(u₁=0, y), p(u₁=1, y))` over `y ∈ [−2ι, 2ι]`.
pub fn integer_sum_distribution(
    pa: &MessageDistribution,
    pb: &MessageDistribution,
    phi_a: &[u32],
    phi_b: &[u32],
    clip: u32,
) -> Vec<(i32, f64, f64)> {
    let c = 2 * clip as i32;
    let mut p0 = vec![0.0; (2 * c + 1) as usize];
    let mut p1 = vec![0.0; (2 * c + 1) as usize];
    let signed = |phi: &[u32], t: i8| {
        let v = phi[t.unsigned_abs() as usize - 1] as i32;
        if t < 0 {
            -v
        } else {
            v
        }
    };
    for ta in pa.messages() {
        for tb in pb.messages() {
            let y = (signed(phi_a, ta) + signed(phi_b, tb) + c) as usize;
            p0[y] += 2.0 * pa.p(0, ta) * pb.p(0, tb);
            p1[y] += 2.0 * pa.p(1, ta) * pb.p(1, tb);
        }
    }
    (0..p0.len())
        .map(|i| (i as i32 - c, p0[i], p1[i]))
        .collect()
}

fn fold_sum(sum: &[(i32, f64, f64)]) -> FoldedChannel {
    FoldedChannel::fold(
        sum.iter()
            .filter(|&&(_, a, b)| a + b > 0.0)
            .map(|&(y, a, b)| (f64::from(y), a, b)),
    )
    .0
}

/// Folded level masses when each folded `|y|` item is mapped by `level`.
fn level_masses(
    f: &FoldedChannel,
    levels: usize,
    level: impl Fn(u32) -> u32,
) -> (Vec<f64>, Vec<f64>) {
    let mut correct = vec![0.0; levels];
    let mut wrong = vec![0.0; levels];
    for i in 0..f.len() {
        let m = level(f.keys()[i] as u32) as usize - 1;
        correct[m] += f.correct()[i];
        wrong[m] += f.wrong()[i];
    }
    (correct, wrong)
}

fn masses_mi(correct: &[f64], wrong: &[f64]) -> f64 {
    correct
        .iter()
        .zip(wrong)
        .map(|(&c, &w)| cluster_information(c, w))
        .sum()
}

fn check_widths(w: u32, w_internal: u32) -> Result<()> {
    if !(1..=7).contains(&w) {
        return Err(Error::InvalidParameter(format!("w = {w} out of range")));
    }
    if w_internal < w.max(2) || w_internal > 16 {
        return Err(Error::InvalidParameter(format!(
            "internal width {w_internal} must be in {}..=16",
            w.max(2)
        )));
    }
    Ok(())
}

/// Designs a lower update of the requested kind.
///
/// `scales` is the search grid for the translation scaling `s`; the shift of
/// the uniform quantizer ranges over `0 ..= w′ − w`.
pub fn evolve_lower(
    pa: &MessageDistribution,
    pb: &MessageDistribution,
    kind: LowerKind,
    w_internal: u32,
    scales: &[f64],
) -> Result<LowerDesign> {
    same_alphabet(pa, pb)?;
    let w = pa.w;
    check_widths(w, w_internal)?;
    let levels = 1usize << (w - 1);
    let clip = (1u32 << (w_internal - 1)) - 1;
    if scales.is_empty() || scales.iter().any(|&s| !(s.is_finite() && s > 0.0)) {
        return Err(Error::InvalidParameter(
            "scale grid must be non-empty and positive".into(),
        ));
    }

    match kind {
        LowerKind::Lut => {
            let items = lower_pairs(pa, pb);
            let (folded, index) = FoldedChannel::fold(items.iter().copied());
            let q = optimal_symmetric_quantization(&folded, w);
            let half: Vec<i8> = items
                .iter()
                .enumerate()
                .map(|(i, &(key, _, _))| {
                    let m = q.item_level[index[i]] as i8;
                    if key < 0.0 {
                        -m
                    } else {
                        m
                    }
                })
                .collect();
            let mut table = half.clone();
            let mask = (1usize << w) - 1;
            for i in 0..half.len() {
                let (ta, tb) = (message_from_index(i >> w, w), i & mask);
                table.push(half[(message_index(-ta, w) << w) | tb]);
            }
            Ok(LowerDesign {
                params: LowerParams::Lut { table },
                output: from_level_masses(q.correct, q.wrong),
                degenerate: false,
            })
        }
        LowerKind::CdUniform => {
            let (la, lb) = (pa.magnitudes(), pb.magnitudes());
            let score = |s: f64, r: u32| {
                let sum = integer_sum_distribution(
                    pa,
                    pb,
                    &translate(&la, s, clip),
                    &translate(&lb, s, clip),
                    clip,
                );
                let (c, wr) = level_masses(&fold_sum(&sum), levels, |m| uniform_magnitude(m, r, w));
                masses_mi(&c, &wr)
            };
            let (s, r, _) = uniform_grid_search(scales, 0..=w_internal - w, score)?;
            let (phi_a, phi_b) = (translate(&la, s, clip), translate(&lb, s, clip));
            let sum = integer_sum_distribution(pa, pb, &phi_a, &phi_b, clip);
            let (c, wr) = level_masses(&fold_sum(&sum), levels, |m| uniform_magnitude(m, r, w));
            let degenerate = saturated(&phi_a, &phi_b, clip);
            Ok(LowerDesign {
                params: LowerParams::CdUniform {
                    scale: s,
                    phi_a,
                    phi_b,
                    shift: r,
                },
                output: from_level_masses(c, wr),
                degenerate,
            })
        }
        LowerKind::CdNonuniform => {
            let (la, lb) = (pa.magnitudes(), pb.magnitudes());
            // Many scales round to the same translations; score each table once.
            let mut cache: HashMap<(Vec<u32>, Vec<u32>), f64> = HashMap::new();
            let mut by_scale = Vec::with_capacity(scales.len());
            for &s in scales {
                let key = (translate(&la, s, clip), translate(&lb, s, clip));
                let mi = *cache.entry(key.clone()).or_insert_with(|| {
                    let sum = integer_sum_distribution(pa, pb, &key.0, &key.1, clip);
                    optimal_symmetric_quantization(&fold_sum(&sum), w).mi
                });
                by_scale.push((s, mi));
            }
            let lookup: HashMap<u64, f64> =
                by_scale.iter().map(|&(s, mi)| (s.to_bits(), mi)).collect();
            let (s, _, _) = uniform_grid_search(scales, 0..=0, |s, _| lookup[&s.to_bits()])?;
            let (phi_a, phi_b) = (translate(&la, s, clip), translate(&lb, s, clip));
            let sum = integer_sum_distribution(pa, pb, &phi_a, &phi_b, clip);
            let folded = fold_sum(&sum);
            let q = optimal_symmetric_quantization(&folded, w);
            let thresholds: Vec<i32> = q.quantizer.thresholds().iter().map(|&t| t as i32).collect();
            let (c, wr) = level_masses(&folded, levels, |m| {
                nonuniform_magnitude(i64::from(m), &thresholds, w)
            });
            let degenerate = saturated(&phi_a, &phi_b, clip);
            Ok(LowerDesign {
                params: LowerParams::CdNonuniform {
                    scale: s,
                    phi_a,
                    phi_b,
                    thresholds,
                },
                output: from_level_masses(c, wr),
                degenerate,
            })
        }
    }
}

fn saturated(phi_a: &[u32], phi_b: &[u32], clip: u32) -> bool {
    phi_a.iter().chain(phi_b).all(|&v| v == clip)
}

/// Lower-branch memory in bits per node.
pub fn memory_footprint(kind: LowerKind, w: u32, w_internal: u32) -> u64 {
    let half = 1u64 << (w - 1);
    let wi = u64::from(w_internal);
    match kind {
        LowerKind::Lut => u64::from(w) << (2 * w + 1),
        LowerKind::CdNonuniform => (2 * (wi - 1) + wi) * half,
        LowerKind::CdUniform => 2 * (wi - 1) * half,
    }
}

/// Additions or comparisons per lower-branch update.
pub fn operations_per_update(kind: LowerKind, w: u32) -> u32 {
    match kind {
        LowerKind::Lut => 0,
        LowerKind::CdNonuniform => w,
        LowerKind::CdUniform => 1,
    }
}

/// Inputs of a decoder design.
#[derive(Clone, Debug, PartialEq)]
pub struct DesignParams {
    pub len: usize,
    pub rate: f64,
    pub w: u32,
    pub w_internal: u32,
    pub design_ebn0_db: f64,
    pub variant: Variant,
    /// Search grid for translation scales.
    pub scales: Vec<f64>,
}

impl DesignParams {
    pub fn new(
        len: usize,
        rate: f64,
        w: u32,
        w_internal: u32,
        design_ebn0_db: f64,
        variant: Variant,
    ) -> Self {
        DesignParams {
            len,
            rate,
            w,
            w_internal,
            design_ebn0_db,
            variant,
            scales: default_scale_grid(),
        }
    }
}

/// Preserved MI of every candidate update at one node, all on the same input.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NodeReport {
    pub node_id: [usize; 2],
    pub input_mi: f64,
    pub upper_minsum_mi: f64,
    pub upper_lut_mi: f64,
    pub lower_lut_mi: f64,
    pub lower_cd_nonuniform_mi: f64,
    pub lower_cd_uniform_mi: f64,
    /// MI of the two children actually used by the design.
    pub upper_out_mi: f64,
    pub lower_out_mi: f64,
    /// Worst `|Σp − 1|` and odd-symmetry error over all evolved candidates.
    pub mass_error: f64,
    pub symmetry_error: f64,
}

/// Diagnostics gathered while designing.
#[derive(Clone, Debug, PartialEq)]
pub struct DesignReport {
    pub channel_mi: f64,
    pub nodes: Vec<NodeReport>,
    /// Leaf MI in `u` index order.
    pub leaf_mi: Vec<f64>,
    pub warnings: Vec<String>,
}

struct NodeDesign {
    params: NodeParams,
    upper_out: MessageDistribution,
    lower_out: MessageDistribution,
    report: NodeReport,
    warning: Option<String>,
    distributions_ok: bool,
}

fn design_node(
    p: &MessageDistribution,
    id: [usize; 2],
    params: &DesignParams,
) -> Result<NodeDesign> {
    let minsum = evolve_upper_minsum(p, p)?;
    let (upper_table, upper_lut) = evolve_upper_lut(p, p)?;
    let lut = evolve_lower(p, p, LowerKind::Lut, params.w_internal, &params.scales)?;
    let nonuniform = evolve_lower(
        p,
        p,
        LowerKind::CdNonuniform,
        params.w_internal,
        &params.scales,
    )?;
    let uniform = evolve_lower(
        p,
        p,
        LowerKind::CdUniform,
        params.w_internal,
        &params.scales,
    )?;

    let report = NodeReport {
        node_id: id,
        input_mi: p.mutual_information(),
        upper_minsum_mi: minsum.mutual_information(),
        upper_lut_mi: upper_lut.mutual_information(),
        lower_lut_mi: lut.output.mutual_information(),
        lower_cd_nonuniform_mi: nonuniform.output.mutual_information(),
        lower_cd_uniform_mi: uniform.output.mutual_information(),
        upper_out_mi: 0.0,
        lower_out_mi: 0.0,
        mass_error: 0.0,
        symmetry_error: 0.0,
    };
    let evolved = [
        &minsum,
        &upper_lut,
        &lut.output,
        &nonuniform.output,
        &uniform.output,
    ];
    let mass_error = evolved
        .iter()
        .map(|d| (d.total() - 1.0).abs())
        .fold(0.0, f64::max);
    let symmetry_error = evolved
        .iter()
        .map(|d| d.symmetry_error())
        .fold(0.0, f64::max);
    let distributions_ok = mass_error <= MASS_TOL && symmetry_error <= 1e-12;

    let (upper, upper_out) = if params.variant.lut_upper() {
        (UpperParams::Lut { table: upper_table }, upper_lut)
    } else {
        (UpperParams::Minsum, minsum)
    };
    let lower = match params.variant.lower_kind() {
        LowerKind::Lut => lut,
        LowerKind::CdNonuniform => nonuniform,
        LowerKind::CdUniform => uniform,
    };
    let warning = lower
        .degenerate
        .then(|| format!("node {id:?}: every translation saturates at the integer clip"));
    let report = NodeReport {
        upper_out_mi: upper_out.mutual_information(),
        lower_out_mi: lower.output.mutual_information(),
        mass_error,
        symmetry_error,
        ..report
    };
    Ok(NodeDesign {
        params: NodeParams {
            node_id: id,
            upper,
            lower: lower.params,
            decision_llr: None,
        },
        upper_out,
        lower_out: lower.output,
        report,
        warning,
        distributions_ok,
    })
}

/// Runs density evolution level by level and assembles the decoder spec.
pub fn design(params: &DesignParams) -> Result<(DecoderSpec, DesignReport)> {
    if params.len < 2 || !params.len.is_power_of_two() {
        return Err(Error::InvalidParameter(format!(
            "N = {} is not a power of two >= 2",
            params.len
        )));
    }
    check_widths(params.w, params.w_internal)?;
    let noise = NoiseConfig::new(params.design_ebn0_db, params.rate)?;
    let (channel_quantizer, channel) = design_channel_quantizer(&noise, params.w)?;
    let depth = params.len.trailing_zeros() as usize;

    let mut nodes = Vec::with_capacity(params.len - 1);
    let mut reports = Vec::with_capacity(params.len - 1);
    let mut warnings = Vec::new();
    let mut level = vec![channel.clone()];
    for d in 0..depth {
        let designed: Vec<NodeDesign> = level
            .par_iter()
            .enumerate()
            .map(|(k, p)| design_node(p, [d, k], params))
            .collect::<Result<_>>()?;
        let mut next = Vec::with_capacity(2 * level.len());
        for mut nd in designed {
            if !nd.distributions_ok {
                return Err(Error::InvalidParameter(format!(
                    "node {:?}: evolved distribution lost normalization or symmetry",
                    nd.params.node_id
                )));
            }
            if d + 1 == depth {
                nd.params.decision_llr = Some(DecisionLlr {
                    upper: nd.upper_out.magnitudes(),
                    lower: nd.lower_out.magnitudes(),
                });
            }
            if let Some(wn) = nd.warning.take() {
                log::warn!("{wn}");
                warnings.push(wn);
            }
            nodes.push(nd.params);
            reports.push(nd.report);
            next.push(nd.upper_out);
            next.push(nd.lower_out);
        }
        level = next;
    }

    let spec = DecoderSpec {
        schema_version: SCHEMA_VERSION,
        len: params.len,
        w: params.w,
        w_internal: params.w_internal,
        design_ebn0_db: params.design_ebn0_db,
        rate: params.rate,
        variant: params.variant,
        channel_quantizer,
        nodes,
    };
    spec.validate()?;
    let report = DesignReport {
        channel_mi: channel.mutual_information(),
        nodes: reports,
        leaf_mi: level
            .iter()
            .map(MessageDistribution::mutual_information)
            .collect(),
        warnings,
    };
    Ok((spec, report))
}

/// Designs a decoder for `cfg` at rate `K/N`.
pub fn design_decoder(
    cfg: &CodeConfig,
    w: u32,
    w_internal: u32,
    design_ebn0_db: f64,
    variant: Variant,
) -> Result<DecoderSpec> {
    let rate = cfg.k() as f64 / cfg.len() as f64;
    Ok(design(&DesignParams::new(
        cfg.len(),
        rate,
        w,
        w_internal,
        design_ebn0_db,
        variant,
    ))?
    .0)
}
