//! Monte-Carlo block-error-rate experiments.
//!
//! Every frame draws its payload and noise from its own ChaCha stream keyed by
//! `(seed, sweep index, frame index)`. Frames run in parallel batches and the
//! outcomes are then scanned in frame order, so the stopping point and all
//! counts are independent of the worker count.

mod config;
mod output;

pub use config::{
    CodeSection, CrcSection, DecoderKind, DecoderSection, ExperimentConfig, FrontEnd,
    StoppingSection, DEFAULT_MAX_FRAMES, DEFAULT_MIN_BLOCK_ERRORS,
};
pub use output::{format_plotdata, read_csv, write_csv, write_plotdata, BlerRecord};

use std::fmt;
use std::path::Path;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::channel::{transmit_into, NoiseConfig};
use crate::codec::{
    build_message, crc_attach, extract_payload, polar_encode, BitBlock, CodeConfig, CrcConfig,
};
use crate::fa_design::{memory_footprint, operations_per_update, DecoderSpec, LowerKind};
use crate::fa_runtime::{Conversion, FaDecoder};
use crate::llr_decoder::{sc_decode, scl_decode, strip_crc};
use crate::{Error, Result};

/// Random source of one frame.
pub fn frame_rng(seed: u64, ebn0_index: usize, frame: u64) -> ChaCha8Rng {
    assert!(frame < 1 << 48 && ebn0_index < 1 << 16);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((ebn0_index as u64) << 48) | frame);
    rng
}

enum Backend {
    Llr,
    Fa {
        decoder: Box<FaDecoder>,
        front_end: FrontEnd,
        design_sigma: f64,
    },
}

/// A prepared experiment: code, CRC and decoder built once, shared by all frames.
pub struct Simulator {
    code: CodeConfig,
    crc: Option<CrcConfig>,
    payload_len: usize,
    rate: f64,
    list: Option<usize>,
    seed: u64,
    zero_payload: bool,
    backend: Backend,
    id: String,
}

impl Simulator {
    pub fn new(config: &ExperimentConfig) -> Result<Self> {
        config.validate()?;
        let code = config.code_config()?;
        let kind = config.decoder.kind;
        let list = kind.is_list().then_some(config.list_size);
        let (backend, spec) = if kind.is_finite_alphabet() {
            let path = config.decoder.spec.as_ref().expect("validated");
            let spec = DecoderSpec::load(path)?;
            if spec.len != code.len() {
                return Err(Error::SpecMismatch(format!(
                    "spec is for N = {}, experiment uses N = {}",
                    spec.len,
                    code.len()
                )));
            }
            let design_sigma = NoiseConfig::new(spec.design_ebn0_db, spec.rate)?.sigma();
            let backend = Backend::Fa {
                decoder: Box::new(FaDecoder::new(&spec, config.decoder.options())?),
                front_end: config.decoder.channel_front_end,
                design_sigma,
            };
            (backend, Some(spec))
        } else {
            (Backend::Llr, None)
        };
        let id = config.decoder.id.clone().unwrap_or_else(|| {
            let mut id = kind.name().to_string();
            if let Some(l) = list {
                id.push_str(&l.to_string());
            }
            if let Some(spec) = &spec {
                id.push_str(&format!("-{}-w{}", spec.variant, spec.w));
                if config.decoder.conversion == Conversion::Simplified {
                    id.push_str("-simplified");
                }
                if config.decoder.alt_sign_invert {
                    id.push_str("-alt");
                }
                if config.decoder.channel_front_end == FrontEnd::Llr {
                    id.push_str("-llrfe");
                }
            }
            id
        });
        Ok(Simulator {
            code,
            crc: config.crc_config()?,
            payload_len: config.code.k,
            rate: config.rate(),
            list,
            seed: config.seed,
            zero_payload: config.zero_payload,
            backend,
            id,
        })
    }

    /// Label used in result files.
    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn code(&self) -> &CodeConfig {
        &self.code
    }

    /// Noise level of a sweep point.
    pub fn noise(&self, ebn0_db: f64) -> Result<NoiseConfig> {
        NoiseConfig::new(ebn0_db, self.rate)
    }

    /// Runs one frame; `true` when the decoded payload is wrong.
    pub fn simulate_frame(
        &self,
        ebn0_index: usize,
        frame: u64,
        noise: &NoiseConfig,
    ) -> Result<bool> {
        let mut rng = frame_rng(self.seed, ebn0_index, frame);
        let payload = if self.zero_payload {
            BitBlock::zeros(self.payload_len)
        } else {
            BitBlock::from_bools((0..self.payload_len).map(|_| rng.random::<bool>()))
        };
        let info = match &self.crc {
            Some(c) => crc_attach(&payload, c),
            None => payload.clone(),
        };
        let x = polar_encode(&build_message(&info, &self.code)?, &self.code)?;
        let mut llr = vec![0.0; self.code.len()];
        transmit_into(x.as_slice(), noise, &mut rng, &mut llr);
        let crc = self.crc.as_ref();
        let decoded = match &self.backend {
            Backend::Llr => match self.list {
                Some(l) => scl_decode(&llr, &self.code, l, crc)?,
                None => strip_crc(
                    extract_payload(sc_decode(&llr, &self.code)?.as_slice(), &self.code),
                    crc,
                ),
            },
            Backend::Fa {
                decoder,
                front_end,
                design_sigma,
            } => {
                if *front_end == FrontEnd::Sample {
                    // Same samples, LLRs formed with the design noise level.
                    let scale = (noise.sigma() / design_sigma).powi(2);
                    llr.iter_mut().for_each(|l| *l *= scale);
                }
                match self.list {
                    Some(l) => decoder.scl(&llr, &self.code, l, crc)?,
                    None => strip_crc(
                        extract_payload(decoder.sc(&llr, &self.code)?.as_slice(), &self.code),
                        crc,
                    ),
                }
            }
        };
        Ok(decoded != payload)
    }

    /// Simulates one sweep point until `min_errors` block errors or
    /// `max_frames` frames, whichever comes first.
    pub fn run_point(
        &self,
        pool: &rayon::ThreadPool,
        ebn0_index: usize,
        noise: &NoiseConfig,
        min_errors: u64,
        max_frames: u64,
    ) -> Result<(u64, u64)> {
        let batch = (pool.current_num_threads() as u64 * 16).max(32);
        let (mut frames, mut errors) = (0u64, 0u64);
        while frames < max_frames {
            let end = (frames + batch).min(max_frames);
            let outcomes: Vec<bool> = pool.install(|| {
                (frames..end)
                    .into_par_iter()
                    .map(|f| self.simulate_frame(ebn0_index, f, noise))
                    .collect::<Result<_>>()
            })?;
            for failed in outcomes {
                frames += 1;
                errors += u64::from(failed);
                if errors >= min_errors {
                    return Ok((frames, errors));
                }
            }
        }
        Ok((frames, errors))
    }
}

/// Convenience wrapper around [`Simulator::simulate_frame`].
pub fn simulate_frame(frame: u64, ebn0_index: usize, config: &ExperimentConfig) -> Result<bool> {
    let sim = Simulator::new(config)?;
    let noise = sim.noise(config.ebn0_db[ebn0_index])?;
    sim.simulate_frame(ebn0_index, frame, &noise)
}

fn reusable(rec: &BlerRecord, config: &ExperimentConfig, id: &str, ebn0: f64) -> bool {
    let (min, max) = (config.stopping.min_block_errors, config.stopping.max_frames);
    rec.ebn0_db == ebn0
        && rec.decoder == id
        && rec.seed == config.seed
        && ((rec.frames < max && rec.block_errors == min)
            || (rec.frames == max && rec.block_errors <= min))
}

/// Runs the sweep. With `out` set, the CSV is rewritten after every point
/// and points already present there (same decoder, seed and stopping rule)
/// are reused instead of re-simulated.
pub fn run_bler(config: &ExperimentConfig, out: Option<&Path>) -> Result<Vec<BlerRecord>> {
    run_bler_with_workers(config, out, config.worker_count())
}

/// [`run_bler`] on exactly `workers` threads, ignoring config and environment.
pub fn run_bler_with_workers(
    config: &ExperimentConfig,
    out: Option<&Path>,
    workers: usize,
) -> Result<Vec<BlerRecord>> {
    let sim = Simulator::new(config)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;

    let previous = match out {
        Some(p) if p.exists() => read_csv(p)?,
        _ => Vec::new(),
    };
    let mut records = Vec::with_capacity(config.ebn0_db.len());
    for (i, &ebn0) in config.ebn0_db.iter().enumerate() {
        if let Some(rec) = previous
            .get(i)
            .filter(|r| records.len() == i && reusable(r, config, sim.id(), ebn0))
        {
            log::info!("{} @ {ebn0} dB: reusing {} frames", sim.id(), rec.frames);
            records.push(rec.clone());
            continue;
        }
        let start = Instant::now();
        let noise = sim.noise(ebn0)?;
        let (frames, errors) = sim.run_point(
            &pool,
            i,
            &noise,
            config.stopping.min_block_errors,
            config.stopping.max_frames,
        )?;
        let rec = BlerRecord::new(
            ebn0,
            frames,
            errors,
            sim.id(),
            config.seed,
            start.elapsed().as_secs_f64(),
        );
        log::info!(
            "{} @ {ebn0} dB: {errors}/{frames} = {:.3e} ({:.1} s)",
            sim.id(),
            rec.bler,
            rec.wallclock_s
        );
        records.push(rec);
        if let Some(p) = out {
            write_csv(p, &records)?;
        }
    }
    if let Some(p) = out {
        write_csv(p, &records)?;
    }
    Ok(records)
}

/// Lower-branch cost of one variant.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ComplexityRow {
    pub kind: LowerKind,
    pub ops_per_update: u32,
    pub bits_per_node: u64,
    pub total_ops: u64,
    pub total_bits: u64,
}

/// Lower-branch costs of all variants for one resolution and code length.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ComplexityReport {
    pub len: usize,
    pub w: u32,
    pub w_internal: u32,
    /// Variant used by the spec the report was made for.
    pub used: Option<LowerKind>,
    pub rows: Vec<ComplexityRow>,
}

pub fn complexity_table(len: usize, w: u32, w_internal: u32) -> ComplexityReport {
    let nodes = len.saturating_sub(1) as u64;
    let rows = LowerKind::ALL
        .iter()
        .map(|&kind| {
            let ops = operations_per_update(kind, w);
            let bits = memory_footprint(kind, w, w_internal);
            ComplexityRow {
                kind,
                ops_per_update: ops,
                bits_per_node: bits,
                total_ops: u64::from(ops) * nodes,
                total_bits: bits * nodes,
            }
        })
        .collect();
    ComplexityReport {
        len,
        w,
        w_internal,
        used: None,
        rows,
    }
}

pub fn report_complexity(spec: &DecoderSpec) -> ComplexityReport {
    ComplexityReport {
        used: Some(spec.variant.lower_kind()),
        ..complexity_table(spec.len, spec.w, spec.w_internal)
    }
}

impl fmt::Display for ComplexityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "lower-branch cost, N = {}, w = {}, w' = {}, {} nodes",
            self.len,
            self.w,
            self.w_internal,
            self.len.saturating_sub(1)
        )?;
        writeln!(
            f,
            "{:<16}{:>10}{:>12}{:>12}{:>14}",
            "variant", "ops/node", "bits/node", "total ops", "total bits"
        )?;
        for r in &self.rows {
            let mark = if self.used == Some(r.kind) { " *" } else { "" };
            writeln!(
                f,
                "{:<16}{:>10}{:>12}{:>12}{:>14}{mark}",
                r.kind.name(),
                r.ops_per_update,
                r.bits_per_node,
                r.total_ops,
                r.total_bits
            )?;
        }
        Ok(())
    }
}
