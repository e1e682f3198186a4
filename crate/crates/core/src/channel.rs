//! BPSK over AWGN: noise parameters, LLR generation and the fine
//! discretization used as the starting point of quantizer design.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use statrs::function::erf::erfc;

use crate::codec::BitBlock;
use crate::infoquant::BinaryJoint;
use crate::{Error, Result};

/// Default number of fine bins.
pub const FINE_BINS: usize = 2000;
/// Default LLR clip of the fine discretization.
pub const FINE_CLIP: f64 = 24.0;

/// AWGN noise level for a given SNR per information bit and code rate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NoiseConfig {
    ebn0_db: f64,
    rate: f64,
    sigma: f64,
}

impl NoiseConfig {
    pub fn new(ebn0_db: f64, rate: f64) -> Result<Self> {
        let sigma = ebn0_to_sigma(ebn0_db, rate)?;
        Ok(NoiseConfig {
            ebn0_db,
            rate,
            sigma,
        })
    }

    /// Noise given directly by its standard deviation (rate 1 bookkeeping).
    pub fn from_sigma(sigma: f64) -> Result<Self> {
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "sigma must be positive, got {sigma}"
            )));
        }
        let ebn0_db = 10.0 * (1.0 / (2.0 * sigma * sigma)).log10();
        Ok(NoiseConfig {
            ebn0_db,
            rate: 1.0,
            sigma,
        })
    }

    pub fn ebn0_db(&self) -> f64 {
        self.ebn0_db
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// Channel LLR of a received sample: `2y/σ²`.
    pub fn llr(&self, y: f64) -> f64 {
        2.0 * y / (self.sigma * self.sigma)
    }
}

/// `σ = 1/√(2R·10^(Eb/N0/10))`.
pub fn ebn0_to_sigma(ebn0_db: f64, rate: f64) -> Result<f64> {
    if !(rate > 0.0 && rate <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "rate must be in (0, 1], got {rate}"
        )));
    }
    if !ebn0_db.is_finite() {
        return Err(Error::InvalidParameter("Eb/N0 must be finite".into()));
    }
    Ok((2.0 * rate * 10f64.powf(ebn0_db / 10.0)).recip().sqrt())
}

/// Sends `x` as `1 − 2x` plus Gaussian noise and returns the channel LLRs.
pub fn transmit<R: Rng + ?Sized>(x: &BitBlock, noise: &NoiseConfig, rng: &mut R) -> Vec<f64> {
    let mut out = vec![0.0; x.len()];
    transmit_into(x.as_slice(), noise, rng, &mut out);
    out
}

/// Allocation-free [`transmit`].
pub fn transmit_into<R: Rng + ?Sized>(x: &[u8], noise: &NoiseConfig, rng: &mut R, out: &mut [f64]) {
    assert_eq!(x.len(), out.len());
    let normal = Normal::new(0.0, noise.sigma).expect("sigma is positive");
    for (o, &b) in out.iter_mut().zip(x) {
        let s = 1.0 - 2.0 * f64::from(b);
        *o = noise.llr(s + normal.sample(rng));
    }
}

/// Binary-input AWGN channel discretized into uniform LLR bins.
#[derive(Clone, Debug, PartialEq)]
pub struct FineChannel {
    joint: BinaryJoint,
    clip: f64,
}

impl FineChannel {
    /// Bin centers, ascending.
    pub fn support(&self) -> &[f64] {
        self.joint.labels()
    }

    pub fn joint(&self) -> &BinaryJoint {
        &self.joint
    }

    pub fn bin_count(&self) -> usize {
        self.joint.len()
    }

    pub fn clip(&self) -> f64 {
        self.clip
    }

    pub fn bin_width(&self) -> f64 {
        2.0 * self.clip / self.bin_count() as f64
    }
}

/// Upper-tail probability of the standard normal.
fn gaussian_tail(z: f64) -> f64 {
    0.5 * erfc(z / std::f64::consts::SQRT_2)
}

/// Discretizes the channel LLR into `bin_count` uniform bins over
/// `[−clip, clip]`; mass beyond the clip lands in the edge bins.
///
/// Only `p(x=0, ·)` is integrated; `p(x=1, ·)` is its mirror image, which
/// makes the result exactly symmetric.
pub fn discretize_channel(
    noise: &NoiseConfig,
    bin_count: usize,
    clip_llr: f64,
) -> Result<FineChannel> {
    if bin_count < 64 {
        return Err(Error::InvalidParameter(format!(
            "need at least 64 bins, got {bin_count}"
        )));
    }
    if !(clip_llr.is_finite() && clip_llr > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "clip must be positive, got {clip_llr}"
        )));
    }
    let s2 = noise.sigma * noise.sigma;
    // Given x = 0 the LLR is Gaussian with mean 2/σ² and deviation 2/σ.
    let mean = 2.0 / s2;
    let dev = 2.0 / noise.sigma;
    let width = 2.0 * clip_llr / bin_count as f64;
    let edge = |i: usize| -clip_llr + width * i as f64;

    // Integrate each bin on the side of the mean where its mass is a tail,
    // so far-out bins keep full relative precision.
    let z = |i: usize| match i {
        0 => f64::NEG_INFINITY,
        i if i == bin_count => f64::INFINITY,
        i => (edge(i) - mean) / dev,
    };
    let mass: Vec<f64> = (0..bin_count)
        .map(|i| {
            let (lo, hi) = (z(i), z(i + 1));
            let m = if lo >= 0.0 {
                gaussian_tail(lo) - gaussian_tail(hi)
            } else if hi <= 0.0 {
                gaussian_tail(-hi) - gaussian_tail(-lo)
            } else {
                1.0 - gaussian_tail(-lo) - gaussian_tail(hi)
            };
            m.max(0.0)
        })
        .collect();
    let total: f64 = mass.iter().sum();

    let p0: Vec<f64> = mass.iter().map(|m| m / total / 2.0).collect();
    let p1: Vec<f64> = p0.iter().rev().copied().collect();
    let labels: Vec<f64> = (0..bin_count).map(|i| edge(i) + width / 2.0).collect();
    let joint = BinaryJoint::new(labels, p0, p1)?.with_odd_symmetry()?;
    Ok(FineChannel {
        joint,
        clip: clip_llr,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::infoquant::mutual_information;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// `1 − E[log₂(1 + e^{−L})]` for `L ~ N(2/σ², 4/σ²)` by Simpson's rule.
    fn biawgn_capacity(sigma: f64) -> f64 {
        let mean = 2.0 / (sigma * sigma);
        let dev = 2.0 / sigma;
        let (lo, hi) = (mean - 14.0 * dev, mean + 14.0 * dev);
        let n = 200_000;
        let h = (hi - lo) / n as f64;
        let f = |l: f64| {
            let z = (l - mean) / dev;
            let pdf = (-0.5 * z * z).exp() / (dev * (2.0 * std::f64::consts::PI).sqrt());
            let loss = if l > 0.0 {
                (-l).exp().ln_1p()
            } else {
                -l + l.exp().ln_1p()
            };
            pdf * loss / std::f64::consts::LN_2
        };
        let mut acc = f(lo) + f(hi);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            acc += w * f(lo + h * i as f64);
        }
        1.0 - acc * h / 3.0
    }

    #[test]
    fn sigma_examples() {
        assert_abs_diff_eq!(ebn0_to_sigma(0.0, 0.5).unwrap(), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(
            ebn0_to_sigma(10.0 * 2f64.log10(), 0.25).unwrap(),
            1.0,
            epsilon = 1e-14
        );
        assert_abs_diff_eq!(
            ebn0_to_sigma(2.5, 0.5).unwrap(),
            1.0 / 10f64.powf(0.25).sqrt(),
            epsilon = 1e-15
        );
        assert!(ebn0_to_sigma(1.0, 0.0).is_err());
        assert!(ebn0_to_sigma(1.0, -0.5).is_err());
    }

    #[test]
    fn near_noiseless_llrs_keep_their_sign() {
        let noise = NoiseConfig::from_sigma(0.01).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let llr = transmit(&BitBlock::zeros(10_000), &noise, &mut rng);
        assert!(llr.iter().all(|&l| l > 0.0));
    }

    #[test]
    fn mean_llr_matches_gaussian_moments() {
        let noise = NoiseConfig::from_sigma(0.8).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let n = 200_000;
        let llr = transmit(&BitBlock::zeros(n), &noise, &mut rng);
        let mean = llr.iter().sum::<f64>() / n as f64;
        let expected = 2.0 / 0.64;
        let std_err = (2.0 / 0.8) / (n as f64).sqrt();
        assert!(
            (mean - expected).abs() < 5.0 * std_err,
            "{mean} vs {expected}"
        );
    }

    #[test]
    fn fixed_seed_is_reproducible() {
        let noise = NoiseConfig::new(2.0, 0.5).unwrap();
        let x = BitBlock::from_bits((0..64).map(|i| (i % 3 == 0) as u8).collect()).unwrap();
        let a = transmit(&x, &noise, &mut ChaCha8Rng::seed_from_u64(1));
        let b = transmit(&x, &noise, &mut ChaCha8Rng::seed_from_u64(1));
        assert_eq!(a, b);
    }

    #[test]
    fn flipping_the_bit_flips_the_llr() {
        let noise = NoiseConfig::new(1.0, 0.5).unwrap();
        let zeros = transmit(
            &BitBlock::zeros(256),
            &noise,
            &mut ChaCha8Rng::seed_from_u64(3),
        );
        let ones = transmit(
            &BitBlock::from_bits(vec![1; 256]).unwrap(),
            &noise,
            &mut ChaCha8Rng::seed_from_u64(3),
        );
        // Same noise n: L(0) = 2(1+n)/σ², L(1) = 2(−1+n)/σ², so L(0) − L(1) = 4/σ².
        let gap = 4.0 / noise.sigma().powi(2);
        for (a, b) in zeros.iter().zip(&ones) {
            assert_abs_diff_eq!(a - b, gap, epsilon = 1e-9);
        }
    }

    #[test]
    fn fine_channel_is_normalized_and_symmetric() {
        let ch =
            discretize_channel(&NoiseConfig::new(0.5, 0.5).unwrap(), FINE_BINS, FINE_CLIP).unwrap();
        let j = ch.joint();
        let total: f64 = j.p0().iter().chain(j.p1()).sum();
        assert_abs_diff_eq!(total, 1.0, epsilon = 1e-12);
        let n = j.len();
        for i in 0..n {
            assert_eq!(j.p0()[i], j.p1()[n - 1 - i]);
        }
        assert!(j.is_llr_monotone());
        assert!(ch.support().windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn fine_mi_approaches_capacity() {
        let noise = NoiseConfig::from_sigma(1.0).unwrap();
        let ch = discretize_channel(&noise, 2000, 16.0).unwrap();
        let mi = mutual_information(ch.joint());
        let cap = biawgn_capacity(1.0);
        assert!((mi - cap).abs() < 1e-4, "{mi} vs {cap}");
        assert!(mi <= cap + 1e-9);
    }

    #[test]
    fn finer_nested_bins_never_lose_information() {
        let noise = NoiseConfig::new(1.0, 0.5).unwrap();
        let mut last = 0.0;
        for bins in [64, 128, 256, 512, 1024] {
            let mi = mutual_information(discretize_channel(&noise, bins, 20.0).unwrap().joint());
            assert!(mi >= last - 1e-12, "{bins}: {mi} < {last}");
            last = mi;
        }
    }

    #[test]
    fn rejects_degenerate_binning() {
        let noise = NoiseConfig::new(1.0, 0.5).unwrap();
        assert!(discretize_channel(&noise, 10, 20.0).is_err());
        assert!(discretize_channel(&noise, 100, 0.0).is_err());
    }
}
