//! Mutual information and mutual-information-maximizing quantization of
//! binary-input channels.
//!
//! Quantizers here are symmetric: the sign of the input is kept and only its
//! magnitude is clustered. The search works on a [`FoldedChannel`], i.e. the
//! input reduced to `(magnitude key, P[sign agrees with x], P[sign disagrees])`
//! items sorted by key. For a channel with odd-symmetric LLRs the mutual
//! information of any symmetric quantizer is
//! `I(X;T) = Σ_clusters q_c (1 − h₂(ε_c))`, so clusters can be placed by a
//! contiguous-partition dynamic program.

use std::ops::RangeInclusive;

use rayon::prelude::*;

use crate::{Error, Result};

/// Magnitude assigned to LLRs that are infinite or belong to zero-mass labels.
pub const LLR_CLIP: f64 = 64.0;

const NORMALIZATION_TOL: f64 = 1e-9;
const SYMMETRY_TOL: f64 = 1e-12;

/// Joint distribution `p(x, y)` of a uniform bit `x` and a finite observation.
#[derive(Clone, Debug, PartialEq)]
pub struct BinaryJoint {
    labels: Vec<f64>,
    p0: Vec<f64>,
    p1: Vec<f64>,
    odd_symmetric: bool,
}

impl BinaryJoint {
    /// `labels[i]` names observation `i`; `p0[i] = p(x=0, y=i)`,
    /// `p1[i] = p(x=1, y=i)`.
    pub fn new(labels: Vec<f64>, p0: Vec<f64>, p1: Vec<f64>) -> Result<Self> {
        if labels.len() != p0.len() || p0.len() != p1.len() {
            return Err(Error::LengthMismatch {
                expected: labels.len(),
                actual: p0.len().min(p1.len()),
            });
        }
        if labels.is_empty() {
            return Err(Error::InvalidParameter("empty observation alphabet".into()));
        }
        if p0.iter().chain(&p1).any(|&p| !(p.is_finite() && p >= 0.0)) {
            return Err(Error::InvalidParameter(
                "probabilities must be finite and non-negative".into(),
            ));
        }
        let total: f64 = p0.iter().chain(&p1).sum();
        if (total - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::Unnormalized(total));
        }
        Ok(BinaryJoint {
            labels,
            p0,
            p1,
            odd_symmetric: false,
        })
    }

    /// Asserts `p(0, y_i) = p(1, y_mirror(i))` with `mirror(i) = len − 1 − i`.
    pub fn with_odd_symmetry(mut self) -> Result<Self> {
        let n = self.len();
        for i in 0..n {
            if (self.p0[i] - self.p1[n - 1 - i]).abs() > SYMMETRY_TOL {
                return Err(Error::InvalidParameter(format!(
                    "joint is not odd-symmetric at label {i}"
                )));
            }
        }
        self.odd_symmetric = true;
        Ok(self)
    }

    pub fn is_odd_symmetric(&self) -> bool {
        self.odd_symmetric
    }

    pub fn labels(&self) -> &[f64] {
        &self.labels
    }

    pub fn p0(&self) -> &[f64] {
        &self.p0
    }

    pub fn p1(&self) -> &[f64] {
        &self.p1
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// True when the LLR levels are non-decreasing over the label order.
    pub fn is_llr_monotone(&self) -> bool {
        llr_levels(self).windows(2).all(|w| w[0] <= w[1])
    }
}

/// `h₂(p)` in bits with `0 log 0 = 0`.
pub fn binary_entropy(p: f64) -> f64 {
    let term = |q: f64| if q > 0.0 { -q * q.log2() } else { 0.0 };
    term(p) + term(1.0 - p)
}

/// `I(X;Y)` in bits.
pub fn mutual_information(j: &BinaryJoint) -> f64 {
    let px0: f64 = j.p0.iter().sum();
    let px1: f64 = j.p1.iter().sum();
    let mut mi = 0.0;
    for (&a, &b) in j.p0.iter().zip(&j.p1) {
        let py = a + b;
        if a > 0.0 {
            mi += a * (a / (px0 * py)).log2();
        }
        if b > 0.0 {
            mi += b * (b / (px1 * py)).log2();
        }
    }
    mi.clamp(0.0, 1.0)
}

/// `log(p0/p1)` clipped to `±LLR_CLIP`; a label without mass maps to `+LLR_CLIP`.
pub fn llr_of(p0: f64, p1: f64) -> f64 {
    match (p0 > 0.0, p1 > 0.0) {
        (true, true) => (p0 / p1).ln().clamp(-LLR_CLIP, LLR_CLIP),
        (true, false) | (false, false) => LLR_CLIP,
        (false, true) => -LLR_CLIP,
    }
}

/// Per-label LLR `log p(y|0)/p(y|1)`.
///
/// With the odd-symmetry flag set, the upper half is computed and mirrored so
/// that `L(mirror(y)) = −L(y)` holds bit-exactly.
pub fn llr_levels(j: &BinaryJoint) -> Vec<f64> {
    let px0: f64 = j.p0.iter().sum();
    let px1: f64 = j.p1.iter().sum();
    let level = |i: usize| llr_of(j.p0[i] / px0, j.p1[i] / px1);
    let n = j.len();
    if !j.odd_symmetric {
        return (0..n).map(level).collect();
    }
    let mut out = vec![0.0; n];
    for i in n / 2..n {
        out[i] = level(i);
        out[n - 1 - i] = -out[i];
    }
    if n % 2 == 1 {
        out[n / 2] = 0.0;
    }
    out
}

/// Observation reduced to sign-agreement masses per magnitude, sorted by key.
#[derive(Clone, Debug, PartialEq)]
pub struct FoldedChannel {
    keys: Vec<f64>,
    correct: Vec<f64>,
    wrong: Vec<f64>,
}

impl FoldedChannel {
    /// Folds `(signed key, p(x=0, ·), p(x=1, ·))` items.
    ///
    /// A positive key votes for `x = 0`; zero keys count as positive. Items
    /// with bit-identical `|key|` are merged. Returns the folded channel and
    /// the folded index of every input item.
    pub fn fold<I>(items: I) -> (FoldedChannel, Vec<usize>)
    where
        I: IntoIterator<Item = (f64, f64, f64)>,
    {
        let items: Vec<(f64, f64, f64)> = items.into_iter().collect();
        let mut order: Vec<usize> = (0..items.len()).collect();
        order.sort_by(|&a, &b| items[a].0.abs().total_cmp(&items[b].0.abs()));

        let mut folded = FoldedChannel {
            keys: Vec::new(),
            correct: Vec::new(),
            wrong: Vec::new(),
        };
        let mut index = vec![0; items.len()];
        for &i in &order {
            let (key, p0, p1) = items[i];
            let (c, w) = if key < 0.0 { (p1, p0) } else { (p0, p1) };
            let mag = key.abs();
            if folded.keys.last() != Some(&mag) {
                folded.keys.push(mag);
                folded.correct.push(0.0);
                folded.wrong.push(0.0);
            }
            let last = folded.keys.len() - 1;
            folded.correct[last] += c;
            folded.wrong[last] += w;
            index[i] = last;
        }
        (folded, index)
    }

    /// Folds a joint by the LLR of each label.
    pub fn from_joint(j: &BinaryJoint) -> FoldedChannel {
        let levels = llr_levels(j);
        FoldedChannel::fold((0..j.len()).map(|i| (levels[i], j.p0[i], j.p1[i]))).0
    }

    pub fn keys(&self) -> &[f64] {
        &self.keys
    }

    pub fn correct(&self) -> &[f64] {
        &self.correct
    }

    pub fn wrong(&self) -> &[f64] {
        &self.wrong
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    /// MI of the unquantized symmetric channel.
    pub fn mutual_information(&self) -> f64 {
        self.correct
            .iter()
            .zip(&self.wrong)
            .map(|(&c, &w)| cluster_information(c, w))
            .sum()
    }
}

/// Contribution `q (1 − h₂(w/q))` of one magnitude cluster.
pub fn cluster_information(correct: f64, wrong: f64) -> f64 {
    let (c, w) = (correct.max(0.0), wrong.max(0.0));
    let q = c + w;
    if q <= 0.0 {
        return 0.0;
    }
    q * (1.0 - binary_entropy(w / q))
}

/// Sign-preserving threshold quantizer onto the alphabet `±1 … ±2^(w−1)`.
///
/// Output magnitude `i` is produced for `τ_{i−2} < |y| ≤ τ_{i−1}`, with
/// `|y| ≤ τ_0 → 1` and `|y| > τ_last → 2^(w−1)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SymmetricQuantizer {
    w: u32,
    thresholds: Vec<f64>,
}

impl SymmetricQuantizer {
    pub fn new(w: u32, thresholds: Vec<f64>) -> Result<Self> {
        if w == 0 || w > 8 {
            return Err(Error::InvalidParameter(format!(
                "bit width {w} out of range"
            )));
        }
        let expected = (1usize << (w - 1)) - 1;
        if thresholds.len() != expected {
            return Err(Error::LengthMismatch {
                expected,
                actual: thresholds.len(),
            });
        }
        if thresholds.windows(2).any(|t| t[0] >= t[1]) {
            return Err(Error::InvalidParameter(
                "thresholds must be strictly increasing".into(),
            ));
        }
        Ok(SymmetricQuantizer { w, thresholds })
    }

    pub fn w(&self) -> u32 {
        self.w
    }

    pub fn thresholds(&self) -> &[f64] {
        &self.thresholds
    }

    pub fn magnitude(&self, abs: f64) -> u32 {
        1 + self.thresholds.partition_point(|&t| t < abs) as u32
    }

    /// Signed output; zero maps to the positive side.
    pub fn quantize(&self, y: f64) -> i32 {
        let m = self.magnitude(y.abs()) as i32;
        if y < 0.0 {
            -m
        } else {
            m
        }
    }
}

/// Result of quantizing a folded channel.
#[derive(Clone, Debug, PartialEq)]
pub struct Quantization {
    pub quantizer: SymmetricQuantizer,
    /// 1-based output magnitude of every folded item.
    pub item_level: Vec<u32>,
    /// Folded output masses per magnitude `1 ..= 2^(w−1)`.
    pub correct: Vec<f64>,
    pub wrong: Vec<f64>,
    /// Preserved `I(X;T)` in bits.
    pub mi: f64,
    /// Fewer distinct magnitudes than output levels; the identity was used.
    pub identity: bool,
}

/// Optimal symmetric quantizer of a folded channel onto `2^w` messages.
///
/// Magnitudes are split into `2^(w−1)` contiguous clusters by dynamic
/// programming. Among equally good partitions the one with the smaller
/// boundary indices wins. With fewer items than clusters each item keeps its
/// own level and the items occupy the top levels.
#[allow(clippy::needless_range_loop)]
pub fn optimal_symmetric_quantization(f: &FoldedChannel, w: u32) -> Quantization {
    assert!((1..=8).contains(&w), "bit width {w} out of range");
    assert!(!f.is_empty(), "cannot quantize an empty channel");
    let levels = 1usize << (w - 1);
    let m = f.len();

    // ends[l] = exclusive end item of the cluster at level l (0-based).
    let mut ends = Vec::with_capacity(levels);
    let identity = m <= levels;
    if identity {
        if m < levels {
            log::debug!("only {m} distinct magnitudes for {levels} output levels; using identity clustering");
        }
        ends.extend(1..=m);
    } else {
        ends = contiguous_partition(f, levels);
    }
    let offset = levels - ends.len();

    let mut item_level = vec![0u32; m];
    let mut correct = vec![0.0; levels];
    let mut wrong = vec![0.0; levels];
    let mut start = 0;
    for (c, &end) in ends.iter().enumerate() {
        let level = offset + c;
        for i in start..end {
            item_level[i] = level as u32 + 1;
            correct[level] += f.correct[i];
            wrong[level] += f.wrong[i];
        }
        start = end;
    }

    let mut thresholds = Vec::with_capacity(levels - 1);
    for l in 0..levels - 1 {
        if l < offset {
            thresholds.push(f.keys[0] - (offset - l) as f64);
        } else {
            thresholds.push(f.keys[ends[l - offset] - 1]);
        }
    }
    let mi = correct
        .iter()
        .zip(&wrong)
        .map(|(&c, &w)| cluster_information(c, w))
        .sum();
    Quantization {
        quantizer: SymmetricQuantizer { w, thresholds },
        item_level,
        correct,
        wrong,
        mi,
        identity,
    }
}

/// Exclusive cluster ends of the MI-maximizing partition into `k` parts.
#[allow(clippy::needless_range_loop)]
fn contiguous_partition(f: &FoldedChannel, k: usize) -> Vec<usize> {
    let m = f.len();
    let mut cum_c = vec![0.0; m + 1];
    let mut cum_w = vec![0.0; m + 1];
    for i in 0..m {
        cum_c[i + 1] = cum_c[i] + f.correct[i];
        cum_w[i + 1] = cum_w[i] + f.wrong[i];
    }
    let value = |i: usize, j: usize| cluster_information(cum_c[j] - cum_c[i], cum_w[j] - cum_w[i]);

    // best[j]: best MI covering items 0..j with the current number of clusters.
    let mut best: Vec<f64> = (0..=m)
        .map(|j| {
            if j > 0 {
                value(0, j)
            } else {
                f64::NEG_INFINITY
            }
        })
        .collect();
    let mut split = vec![vec![0usize; m + 1]; k];
    for c in 1..k {
        let mut next = vec![f64::NEG_INFINITY; m + 1];
        // c + 1 clusters cover at least c + 1 items and leave k − c − 1 for later.
        for j in c + 1..=m - (k - c - 1) {
            let mut arg = c;
            let mut top = f64::NEG_INFINITY;
            for i in c..j {
                let v = best[i] + value(i, j);
                if v > top {
                    top = v;
                    arg = i;
                }
            }
            next[j] = top;
            split[c][j] = arg;
        }
        best = next;
    }

    let mut ends = vec![0; k];
    let mut j = m;
    for c in (0..k).rev() {
        ends[c] = j;
        if c > 0 {
            j = split[c][j];
        }
    }
    ends
}

/// Optimal symmetric quantizer of an odd-symmetric joint sorted by LLR.
///
/// Returns the quantizer (thresholds on `|LLR|`), the output joint over the
/// labels `−2^(w−1) … −1, +1 … +2^(w−1)` and the preserved MI.
pub fn optimal_symmetric_quantizer(
    j: &BinaryJoint,
    w: u32,
) -> Result<(SymmetricQuantizer, BinaryJoint, f64)> {
    if w == 0 || w > 8 {
        return Err(Error::InvalidParameter(format!(
            "bit width {w} out of range"
        )));
    }
    if j.len() < 1 << w {
        return Err(Error::InvalidParameter(format!(
            "{} labels cannot feed a {w}-bit quantizer",
            j.len()
        )));
    }
    if !j.is_odd_symmetric() {
        return Err(Error::InvalidParameter(
            "input joint must be odd-symmetric".into(),
        ));
    }
    if !j.is_llr_monotone() {
        return Err(Error::InvalidParameter(
            "labels must be sorted by LLR".into(),
        ));
    }
    let q = optimal_symmetric_quantization(&FoldedChannel::from_joint(j), w);
    let out = symmetric_joint(&q.correct, &q.wrong)?;
    Ok((q.quantizer, out, q.mi))
}

/// Builds the odd-symmetric joint over `±1 … ±K` from folded level masses.
pub fn symmetric_joint(correct: &[f64], wrong: &[f64]) -> Result<BinaryJoint> {
    let k = correct.len();
    let mut labels = Vec::with_capacity(2 * k);
    let mut p0 = Vec::with_capacity(2 * k);
    let mut p1 = Vec::with_capacity(2 * k);
    for m in (1..=k).rev() {
        labels.push(-(m as f64));
        p0.push(wrong[m - 1] / 2.0);
        p1.push(correct[m - 1] / 2.0);
    }
    for m in 1..=k {
        labels.push(m as f64);
        p0.push(correct[m - 1] / 2.0);
        p1.push(wrong[m - 1] / 2.0);
    }
    BinaryJoint::new(labels, p0, p1)?.with_odd_symmetry()
}

/// Parameters of a clip-and-shift quantizer behind scaled integer translations.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UniformQuantizerParams {
    /// LLR scaling; the integer resolution is `Δ = 1/s`.
    pub s: f64,
    /// Right shift; thresholds are spaced `Δ·2^r` apart.
    pub r: u32,
    pub w: u32,
    pub w_internal: u32,
}

impl UniformQuantizerParams {
    /// Integer clip `ι = 2^(w′−1) − 1`.
    pub fn clip(&self) -> i32 {
        (1 << (self.w_internal - 1)) - 1
    }

    pub fn spacing(&self) -> f64 {
        f64::from(1u32 << self.r) / self.s
    }
}

/// 64 scales whose resolutions `1/s` are log-spaced over `[2^−6, 2]`.
pub fn default_scale_grid() -> Vec<f64> {
    (0..64)
        .map(|k| 2f64.powf(-1.0 + 7.0 * f64::from(k) / 63.0))
        .collect()
}

/// Scores every `(s, r)` candidate and returns the best with its score.
///
/// Candidates are evaluated in parallel; the winner is the first maximum in
/// the order `r` ascending, then `s` ascending, so the result does not depend
/// on scheduling.
pub fn uniform_grid_search<F>(
    s_grid: &[f64],
    r_range: RangeInclusive<u32>,
    score: F,
) -> Result<(f64, u32, f64)>
where
    F: Fn(f64, u32) -> f64 + Sync,
{
    let mut s_sorted = s_grid.to_vec();
    s_sorted.sort_by(f64::total_cmp);
    let candidates: Vec<(f64, u32)> = r_range
        .flat_map(|r| s_sorted.iter().map(move |&s| (s, r)))
        .collect();
    if candidates.is_empty() {
        return Err(Error::InvalidParameter("empty (s, r) grid".into()));
    }
    let scores: Vec<f64> = candidates.par_iter().map(|&(s, r)| score(s, r)).collect();
    let mut best = 0;
    for (i, &v) in scores.iter().enumerate() {
        if v > scores[best] {
            best = i;
        }
    }
    Ok((candidates[best].0, candidates[best].1, scores[best]))
}
