//! Unitary beamforming matrix compression over a rate-limited feedback link,
//! plus the closed-loop Monte Carlo machinery to evaluate it.
//!
//! A transmit beamformer `W` (unitary columns, up to 4x4) is reduced to a
//! short list of Givens-rotation angles, quantized with fixed-rate,
//! variable-rate or entropy-coded policies, serialized into a bit-exact
//! feedback message, and reconstructed on the far side. The [`linksim`]
//! module closes the loop: Rayleigh channel draws, SVD eigen-beamforming,
//! quantized feedback, parallel or MMSE receivers, and BER/MSE/MAD
//! statistics per scheme.
//!
//! Module map:
//! - [`cxmat`]: dense complex matrices up to 4x4, Jacobi SVD, phase
//!   normalization.
//! - [`givens`]: angle parameterization of unitary matrices and its inverse.
//! - [`quantizer`]: uniform mid-rise grids, trained codebooks, bit
//!   allocation policies.
//! - [`entropy`]: canonical Huffman tables and the feedback bitstream codec.
//! - [`scheme`]: the standard feedback configurations (A-E, traditional,
//!   proposed) assembled from the above.
//! - [`codebook`]: angle statistics estimation and Lloyd codebook training.
//! - [`modulation`]: Gray-mapped QPSK/16QAM/64QAM.
//! - [`linksim`]: trial engine, receivers, campaign runner.

pub mod codebook;
pub mod cxmat;
pub mod entropy;
mod error;
pub mod givens;
pub mod linksim;
pub mod modulation;
pub mod quantizer;
pub mod rng;
pub mod scheme;

pub use num_complex;

pub use cxmat::{ComplexMatrix, SvdResult};
pub use entropy::{FeedbackMessage, SymbolTable};
pub use error::Error;
pub use givens::{GivensParams, GrDims};
pub use linksim::{LinkConfig, Receiver, SchemeResult};
pub use quantizer::{BitAllocationPolicy, PsiCodebook, PsiQuantizer, QuantizedParams, UniformGrid};
pub use scheme::{FeedbackScheme, SchemeId};

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
