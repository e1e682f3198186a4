//! Finite-alphabet decoding of polar codes.
//!
//! The crate is split along the decoder's life cycle:
//!
//! * [`codec`] builds codes (construction, encoding, CRC).
//! * [`channel`] models BPSK over AWGN and discretizes it for design.
//! * [`infoquant`] holds the mutual-information tooling: exact MI, the
//!   optimal symmetric threshold quantizer and the uniform `(s, r)` search.
//! * [`llr_decoder`] is the double-precision SC / CRC-aided SCL baseline.
//! * [`fa_design`] runs quantized density evolution over the code tree and
//!   emits a [`DecoderSpec`].
//! * [`fa_runtime`] executes a spec bit-accurately: min-sum upper updates,
//!   computational-domain lower updates and lookup-table updates.
//! * [`harness`] drives Monte-Carlo block-error-rate experiments.

pub mod channel;
pub mod codec;
mod engine;
mod error;
pub mod fa_design;
pub mod fa_runtime;
pub mod harness;
pub mod infoquant;
pub mod llr_decoder;
pub mod verify;

pub use crate::codec::{BitBlock, CodeConfig, Construction, CrcConfig};
pub use crate::error::{Error, Result};
pub use crate::fa_design::{DecoderSpec, MessageDistribution, NodeParams, Variant};
pub use crate::fa_runtime::{Conversion, FaOptions, FiniteMessage};
pub use crate::harness::{BlerRecord, ExperimentConfig};
pub use crate::infoquant::BinaryJoint;
