//! Standard feedback configurations.
//!
//! A [`FeedbackScheme`] bundles everything both ends of the link must
//! agree on: the rotation-angle quantizer, how rotation indices are coded
//! on the wire, and the policy assigning phase widths. The stock lineup:
//!
//! - `a` - perfect feedback, nothing quantized or sent;
//! - `b` - 1-bit rotations, 3-bit phases;
//! - `c` - 2-bit rotations, 2-bit phases;
//! - `d` - 2-bit rotations, 3-bit phases;
//! - `e` - 3x2 only: Huffman-coded 2-bit rotations plus dynamic 2/3-bit
//!   phases, averaging 12.71 bits;
//! - `traditional` - alias of `b`, the fixed 8-bit baseline for 3x1;
//! - `proposed` - 3x1 only: two-level trained rotation codebook plus
//!   dynamic 2..4-bit phases, averaging 8 bits;
//! - `fixed:<b_psi>:<b_phi>` - any supported widths on any shape.

use std::collections::BTreeMap;
use std::str::FromStr;

use crate::cxmat::ComplexMatrix;
use crate::entropy::{build_huffman, scheme_e_phi_bits, SymbolTable};
use crate::givens::{gr_decompose, gr_reconstruct, GrDims};
use crate::quantizer::{
    average_bits, dequantize_gr, quantize_gr, BitAllocationPolicy, PhiRule, PsiCodebook,
    PsiIndexDistribution, PsiQuantizer, QuantizedParams, UniformGrid,
};
use crate::{Error, Result};

/// Two-level rotation codebook shipped with the 3x1 variable-rate scheme.
pub const REFERENCE_PSI_CODEBOOK: [f64; 2] = [0.2967, 0.8727];

/// Reference level probabilities of `psi21` (and `psi32`) on the 4-level
/// grid for a 3x2 beamformer over an i.i.d. Rayleigh channel.
pub const PSI21_LEVEL_PROBS: [f64; 4] = [0.14714, 0.35496, 0.35146, 0.14644];

/// Reference level probabilities of `psi31` on the same grid.
pub const PSI31_LEVEL_PROBS: [f64; 4] = [0.2722, 0.47748, 0.2299, 0.02042];

/// Scheme identifier, as accepted on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SchemeId {
    /// Perfect feedback.
    A,
    B,
    C,
    D,
    /// Entropy-coded variable-rate scheme for 3x2.
    E,
    /// Fixed 8-bit baseline for 3x1 (same widths as `B`).
    Traditional,
    /// Variable-rate 8-bit-average scheme for 3x1.
    Proposed,
    /// Uniform fixed widths `(b_psi, b_phi)`.
    Fixed(u8, u8),
}

impl std::fmt::Display for SchemeId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::A => write!(f, "a"),
            Self::B => write!(f, "b"),
            Self::C => write!(f, "c"),
            Self::D => write!(f, "d"),
            Self::E => write!(f, "e"),
            Self::Traditional => write!(f, "traditional"),
            Self::Proposed => write!(f, "proposed"),
            Self::Fixed(bp, bf) => write!(f, "fixed:{bp}:{bf}"),
        }
    }
}

impl FromStr for SchemeId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "a" => Ok(Self::A),
            "b" => Ok(Self::B),
            "c" => Ok(Self::C),
            "d" => Ok(Self::D),
            "e" => Ok(Self::E),
            "traditional" => Ok(Self::Traditional),
            "proposed" => Ok(Self::Proposed),
            other => {
                if let Some(rest) = other.strip_prefix("fixed:") {
                    let parts: Vec<&str> = rest.split(':').collect();
                    if parts.len() == 2 {
                        let bp = parts[0].parse::<u8>();
                        let bf = parts[1].parse::<u8>();
                        if let (Ok(bp), Ok(bf)) = (bp, bf) {
                            return Ok(Self::Fixed(bp, bf));
                        }
                    }
                    return Err(Error::Config(format!(
                        "fixed scheme must look like fixed:<b_psi>:<b_phi>, got {other}"
                    )));
                }
                Err(Error::Config(format!("unknown scheme id {other:?}")))
            }
        }
    }
}

/// How rotation-index fields appear on the wire.
#[derive(Debug, Clone, PartialEq)]
pub enum PsiCoding {
    /// Plain big-endian index, `log2(levels)` bits.
    FixedWidth,
    /// Prefix codeword per rotation angle, canonical order.
    Huffman(Vec<SymbolTable>),
}

/// Complete quantize-and-serialize configuration for one shape.
#[derive(Debug, Clone, PartialEq)]
pub struct FeedbackScheme {
    id: SchemeId,
    dims: GrDims,
    psi_quantizer: PsiQuantizer,
    psi_coding: PsiCoding,
    policy: BitAllocationPolicy,
}

impl FeedbackScheme {
    /// Assembles a scheme, deriving the policy's per-index rotation costs
    /// from the wire coding so the two can never disagree.
    pub fn new(
        id: SchemeId,
        dims: GrDims,
        psi_quantizer: PsiQuantizer,
        psi_coding: PsiCoding,
        phi_rule: PhiRule,
    ) -> Result<Self> {
        let psi_index_bits: Vec<Vec<u8>> = match &psi_coding {
            PsiCoding::FixedWidth => {
                let width = psi_quantizer.fixed_index_bits()?;
                vec![vec![width; psi_quantizer.size()]; dims.psi_count()]
            }
            PsiCoding::Huffman(tables) => {
                if tables.len() != dims.psi_count() {
                    return Err(Error::Config(format!(
                        "{dims} has {} rotation angles, got {} code tables",
                        dims.psi_count(),
                        tables.len()
                    )));
                }
                for t in tables {
                    if t.len() != psi_quantizer.size() {
                        return Err(Error::Config(format!(
                            "code table covers {} symbols, quantizer has {}",
                            t.len(),
                            psi_quantizer.size()
                        )));
                    }
                }
                tables.iter().map(|t| t.lengths()).collect()
            }
        };
        let policy = BitAllocationPolicy::from_parts(dims, psi_index_bits, phi_rule)?;
        Ok(Self {
            id,
            dims,
            psi_quantizer,
            psi_coding,
            policy,
        })
    }

    pub fn id(&self) -> SchemeId {
        self.id
    }

    pub fn dims(&self) -> GrDims {
        self.dims
    }

    pub fn psi_quantizer(&self) -> &PsiQuantizer {
        &self.psi_quantizer
    }

    pub fn psi_coding(&self) -> &PsiCoding {
        &self.psi_coding
    }

    pub fn policy(&self) -> &BitAllocationPolicy {
        &self.policy
    }

    /// Quantizes a phase-normalized unitary-column matrix end to end.
    pub fn quantize_matrix(&self, w: &ComplexMatrix) -> Result<QuantizedParams> {
        let p = gr_decompose(w, self.dims)?;
        quantize_gr(&p, &self.policy, &self.psi_quantizer)
    }

    /// Rebuilds the quantized beamformer.
    pub fn reconstruct_matrix(&self, q: &QuantizedParams) -> Result<ComplexMatrix> {
        Ok(gr_reconstruct(&dequantize_gr(q)?))
    }

    /// Expected message bits under a rotation-index distribution.
    pub fn expected_bits(&self, dist: &PsiIndexDistribution) -> Result<f64> {
        average_bits(&self.policy, dist)
    }
}

/// Builds the standard scheme `id` for `dims`. Scheme `a` has no codec
/// and is rejected here; campaign code treats it as a bypass.
pub fn standard_scheme(id: SchemeId, dims: GrDims) -> Result<FeedbackScheme> {
    match id {
        SchemeId::A => Err(Error::Config(
            "scheme a feeds back the exact matrix; there is nothing to encode".into(),
        )),
        SchemeId::B | SchemeId::Traditional => fixed_scheme(id, dims, 1, 3),
        SchemeId::C => fixed_scheme(id, dims, 2, 2),
        SchemeId::D => fixed_scheme(id, dims, 2, 3),
        SchemeId::Fixed(bp, bf) => fixed_scheme(id, dims, bp, bf),
        SchemeId::Proposed => {
            let want = GrDims::new(3, 1)?;
            if dims != want {
                return Err(Error::Config(format!(
                    "scheme proposed is defined for {want}, got {dims}"
                )));
            }
            let codebook = PsiCodebook::new(REFERENCE_PSI_CODEBOOK.to_vec())?;
            let policy = BitAllocationPolicy::variable_rate_3x1();
            let rule = policy.rule().clone();
            FeedbackScheme::new(
                id,
                dims,
                PsiQuantizer::Codebook(codebook),
                PsiCoding::FixedWidth,
                rule,
            )
        }
        SchemeId::E => {
            let want = GrDims::new(3, 2)?;
            if dims != want {
                return Err(Error::Config(format!(
                    "scheme e is defined for {want}, got {dims}"
                )));
            }
            let grid = PsiQuantizer::Grid(UniformGrid::psi(2)?);
            // Canonical rotation order is psi21, psi31, psi32; psi32
            // shares psi21's statistics.
            let tables = vec![
                build_huffman(&PSI21_LEVEL_PROBS)?,
                build_huffman(&PSI31_LEVEL_PROBS)?,
                build_huffman(&PSI21_LEVEL_PROBS)?,
            ];
            let mut rule = BTreeMap::new();
            for i21 in 0..4u8 {
                for i31 in 0..4u8 {
                    for i32_ in 0..4u8 {
                        let (b11, b21, b22) = scheme_e_phi_bits(i21 as usize, i31 as usize);
                        rule.insert(vec![i21, i31, i32_], vec![b11, b21, b22]);
                    }
                }
            }
            FeedbackScheme::new(
                id,
                dims,
                grid,
                PsiCoding::Huffman(tables),
                PhiRule::Dynamic(rule),
            )
        }
    }
}

fn fixed_scheme(id: SchemeId, dims: GrDims, b_psi: u8, b_phi: u8) -> Result<FeedbackScheme> {
    let grid = PsiQuantizer::Grid(UniformGrid::psi(b_psi)?);
    FeedbackScheme::new(
        id,
        dims,
        grid,
        PsiCoding::FixedWidth,
        PhiRule::Fixed(vec![b_phi; dims.phi_count()]),
    )
}

/// Builds the scheme for `id`, or `None` for the perfect-feedback bypass.
pub fn scheme_for(id: SchemeId, dims: GrDims) -> Result<Option<FeedbackScheme>> {
    match id {
        SchemeId::A => Ok(None),
        other => standard_scheme(other, dims).map(Some),
    }
}

/// Independent product of the reference rotation-index marginals for the
/// entropy-coded 3x2 scheme.
pub fn scheme_e_reference_distribution() -> PsiIndexDistribution {
    PsiIndexDistribution::from_marginals(&[
        PSI21_LEVEL_PROBS.to_vec(),
        PSI31_LEVEL_PROBS.to_vec(),
        PSI21_LEVEL_PROBS.to_vec(),
    ])
    .expect("reference marginals are normalized")
}
