//! Scalar quantization of rotation angles and the bit allocation policies
//! that decide how many bits each phase gets.
//!
//! Rotation angles `psi` live on `[0, pi/2]` and phases `phi` on
//! `[0, 2*pi)`; both use mid-rise uniform grids whose levels sit at cell
//! midpoints, so a `b`-bit grid never errs by more than half a step.
//! `psi` may instead be quantized against a trained codebook. A
//! [`BitAllocationPolicy`] is either fixed (every phase has a constant
//! width) or dynamic (phase widths are looked up from the already
//! quantized `psi` indices, spending bits where the top-row magnitude is
//! large and the phase resolution matters most).

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, PI, TAU};

use crate::givens::{GivensParams, GrDims};
use crate::{Error, Result};

/// Which angle family a uniform grid quantizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridKind {
    /// Rotation angle on `[0, pi/2]`, linear distance.
    Psi,
    /// Phase on `[0, 2*pi)`, circular distance.
    Phi,
}

/// Supported bit widths per grid kind.
pub const PSI_BITS_RANGE: std::ops::RangeInclusive<u8> = 1..=4;
pub const PHI_BITS_RANGE: std::ops::RangeInclusive<u8> = 2..=6;

/// Mid-rise uniform grid with `2^bits` levels.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct UniformGrid {
    kind: GridKind,
    bits: u8,
}

impl UniformGrid {
    pub fn new(kind: GridKind, bits: u8) -> Result<Self> {
        let range = match kind {
            GridKind::Psi => PSI_BITS_RANGE,
            GridKind::Phi => PHI_BITS_RANGE,
        };
        if !range.contains(&bits) {
            return Err(Error::Config(format!(
                "{kind:?} grid supports {}..={} bits, got {bits}",
                range.start(),
                range.end()
            )));
        }
        Ok(Self { kind, bits })
    }

    pub fn psi(bits: u8) -> Result<Self> {
        Self::new(GridKind::Psi, bits)
    }

    pub fn phi(bits: u8) -> Result<Self> {
        Self::new(GridKind::Phi, bits)
    }

    pub fn kind(&self) -> GridKind {
        self.kind
    }

    pub fn bits(&self) -> u8 {
        self.bits
    }

    pub fn size(&self) -> usize {
        1 << self.bits
    }

    /// Level value for index `k`.
    pub fn level(&self, k: usize) -> f64 {
        debug_assert!(k < self.size());
        let b = self.bits as i32;
        match self.kind {
            GridKind::Psi => k as f64 * PI / pow2(b + 1) + PI / pow2(b + 2),
            GridKind::Phi => k as f64 * PI / pow2(b - 1) + PI / pow2(b),
        }
    }

    pub fn levels(&self) -> Vec<f64> {
        (0..self.size()).map(|k| self.level(k)).collect()
    }

    /// Index of the closest level; phases measure distance around the
    /// circle and ties go to the lower index.
    pub fn nearest(&self, angle: f64) -> usize {
        match self.kind {
            GridKind::Psi => nearest_linear(&self.levels(), angle),
            GridKind::Phi => nearest_circular(&self.levels(), angle),
        }
    }
}

fn pow2(e: i32) -> f64 {
    f64::powi(2.0, e)
}

/// Index of the closest level under absolute distance; ties break toward
/// the lower index.
pub fn nearest_linear(levels: &[f64], angle: f64) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (i, &lv) in levels.iter().enumerate() {
        let d = (angle - lv).abs();
        if d < best_d {
            best_d = d;
            best = i;
        }
    }
    best
}

/// Index of the closest level under circular distance on `[0, 2*pi)`;
/// ties break toward the lower index.
pub fn nearest_circular(levels: &[f64], angle: f64) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (i, &lv) in levels.iter().enumerate() {
        let raw = (angle - lv).abs();
        let d = raw.min(TAU - raw);
        if d < best_d {
            best_d = d;
            best = i;
        }
    }
    best
}

/// Trained (non-uniform) level set for rotation angles.
#[derive(Debug, Clone, PartialEq)]
pub struct PsiCodebook {
    levels: Vec<f64>,
}

impl PsiCodebook {
    pub fn new(levels: Vec<f64>) -> Result<Self> {
        if levels.is_empty() {
            return Err(Error::Validation("empty codebook".into()));
        }
        if levels.iter().any(|l| !(0.0..=FRAC_PI_2).contains(l)) {
            return Err(Error::Validation("codebook level outside [0, pi/2]".into()));
        }
        if levels.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Validation(
                "codebook levels must be strictly ascending".into(),
            ));
        }
        Ok(Self { levels })
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    pub fn size(&self) -> usize {
        self.levels.len()
    }

    pub fn level(&self, k: usize) -> f64 {
        self.levels[k]
    }

    pub fn nearest(&self, angle: f64) -> usize {
        nearest_linear(&self.levels, angle)
    }
}

/// Either quantizer usable for rotation angles.
#[derive(Debug, Clone, PartialEq)]
pub enum PsiQuantizer {
    Grid(UniformGrid),
    Codebook(PsiCodebook),
}

impl PsiQuantizer {
    pub fn size(&self) -> usize {
        match self {
            Self::Grid(g) => g.size(),
            Self::Codebook(c) => c.size(),
        }
    }

    pub fn level(&self, k: usize) -> f64 {
        match self {
            Self::Grid(g) => g.level(k),
            Self::Codebook(c) => c.level(k),
        }
    }

    pub fn levels(&self) -> Vec<f64> {
        match self {
            Self::Grid(g) => g.levels(),
            Self::Codebook(c) => c.levels().to_vec(),
        }
    }

    pub fn nearest(&self, angle: f64) -> usize {
        match self {
            Self::Grid(g) => g.nearest(angle),
            Self::Codebook(c) => c.nearest(angle),
        }
    }

    /// Fixed field width needed to address every level, when the level
    /// count is a power of two.
    pub fn fixed_index_bits(&self) -> Result<u8> {
        let n = self.size();
        if !n.is_power_of_two() {
            return Err(Error::Config(format!(
                "level count {n} is not a power of two; fixed-width coding impossible"
            )));
        }
        Ok(n.trailing_zeros() as u8)
    }
}

/// How phase widths are chosen.
#[derive(Debug, Clone, PartialEq)]
pub enum PhiRule {
    /// Constant width per phase angle, canonical order.
    Fixed(Vec<u8>),
    /// Width lookup keyed by the full tuple of quantized `psi` indices
    /// (canonical order); values are per-phase widths (canonical order).
    Dynamic(BTreeMap<Vec<u8>, Vec<u8>>),
}

/// Per-shape rule assigning wire bits to every angle.
///
/// `psi_index_bits[a][k]` is the cost in bits of sending index `k` for the
/// `a`-th rotation angle (a constant row for fixed-width fields, codeword
/// lengths for entropy-coded ones). Phase widths come from the rule.
#[derive(Debug, Clone, PartialEq)]
pub struct BitAllocationPolicy {
    dims: GrDims,
    psi_index_bits: Vec<Vec<u8>>,
    rule: PhiRule,
}

impl BitAllocationPolicy {
    /// Uniform fixed widths: every rotation angle `b_psi` bits, every
    /// phase `b_phi` bits.
    pub fn fixed(dims: GrDims, b_psi: u8, b_phi: u8) -> Result<Self> {
        UniformGrid::psi(b_psi)?;
        Self::from_parts(
            dims,
            vec![vec![b_psi; 1 << b_psi]; dims.psi_count()],
            PhiRule::Fixed(vec![b_phi; dims.phi_count()]),
        )
    }

    /// Dynamic policy from explicit parts. The lookup table must cover
    /// every index tuple reachable under `psi_index_bits`' cardinalities.
    pub fn dynamic(
        dims: GrDims,
        psi_index_bits: Vec<Vec<u8>>,
        table: BTreeMap<Vec<u8>, Vec<u8>>,
    ) -> Result<Self> {
        Self::from_parts(dims, psi_index_bits, PhiRule::Dynamic(table))
    }

    /// General constructor; validates that the rule covers every angle
    /// and, for dynamic rules, every reachable index tuple.
    pub fn from_parts(dims: GrDims, psi_index_bits: Vec<Vec<u8>>, rule: PhiRule) -> Result<Self> {
        if psi_index_bits.len() != dims.psi_count() {
            return Err(Error::Config(format!(
                "{dims} has {} rotation angles, policy lists {}",
                dims.psi_count(),
                psi_index_bits.len()
            )));
        }
        match &rule {
            PhiRule::Fixed(widths) => {
                if widths.len() != dims.phi_count() {
                    return Err(Error::Config(format!(
                        "{dims} has {} phases, rule lists {}",
                        dims.phi_count(),
                        widths.len()
                    )));
                }
                for &w in widths {
                    UniformGrid::phi(w)?;
                }
            }
            PhiRule::Dynamic(table) => {
                let cards: Vec<usize> = psi_index_bits.iter().map(|r| r.len()).collect();
                let tuples: usize = cards.iter().product();
                if table.len() != tuples {
                    return Err(Error::Config(format!(
                        "dynamic table has {} rows, index space has {tuples}",
                        table.len()
                    )));
                }
                for (key, widths) in table {
                    if key.len() != cards.len()
                        || key.iter().zip(&cards).any(|(&k, &c)| k as usize >= c)
                    {
                        return Err(Error::Config(format!("bad dynamic key {key:?}")));
                    }
                    if widths.len() != dims.phi_count() {
                        return Err(Error::Config(format!(
                            "dynamic row {key:?} lists {} phase widths, need {}",
                            widths.len(),
                            dims.phi_count()
                        )));
                    }
                    for &w in widths {
                        UniformGrid::phi(w)?;
                    }
                }
            }
        }
        Ok(Self {
            dims,
            psi_index_bits,
            rule,
        })
    }

    /// The variable-rate policy for a 3x1 beamformer averaging 8 feedback
    /// bits: both rotation angles take a 1-bit index into a two-level
    /// codebook, and the two phase widths swing between 2 and 4 bits
    /// depending on which cells the rotations landed in. Message lengths
    /// are 9 bits in the two high-resolution rows and 7 in the others.
    pub fn variable_rate_3x1() -> Self {
        let dims = GrDims::new(3, 1).unwrap();
        // key = (psi21 index, psi31 index), value = (phi11, phi21) widths.
        let rows: [([u8; 2], [u8; 2], u32); 4] = [
            ([0, 0], [4, 3], 9),
            ([1, 0], [3, 4], 9),
            ([0, 1], [3, 2], 7),
            ([1, 1], [2, 3], 7),
        ];
        let mut table = BTreeMap::new();
        for (key, widths, total) in rows {
            debug_assert_eq!(1 + 1 + widths[0] as u32 + widths[1] as u32, total);
            table.insert(key.to_vec(), widths.to_vec());
        }
        Self::dynamic(dims, vec![vec![1, 1], vec![1, 1]], table).unwrap()
    }

    pub fn dims(&self) -> GrDims {
        self.dims
    }

    pub fn rule(&self) -> &PhiRule {
        &self.rule
    }

    pub fn is_dynamic(&self) -> bool {
        matches!(self.rule, PhiRule::Dynamic(_))
    }

    /// Wire cost of sending index `k` for rotation angle `a`.
    pub fn psi_cost(&self, a: usize, k: usize) -> u8 {
        self.psi_index_bits[a][k]
    }

    /// Level count expected of the rotation-angle quantizer.
    pub fn psi_cardinalities(&self) -> Vec<usize> {
        self.psi_index_bits.iter().map(|r| r.len()).collect()
    }

    /// Phase widths for a given tuple of quantized rotation indices.
    pub fn phi_bits_for(&self, psi_indices: &[usize]) -> Result<Vec<u8>> {
        if psi_indices.len() != self.psi_index_bits.len() {
            return Err(Error::Config(format!(
                "expected {} rotation indices, got {}",
                self.psi_index_bits.len(),
                psi_indices.len()
            )));
        }
        match &self.rule {
            PhiRule::Fixed(widths) => Ok(widths.clone()),
            PhiRule::Dynamic(table) => {
                let key: Vec<u8> = psi_indices.iter().map(|&i| i as u8).collect();
                table
                    .get(&key)
                    .cloned()
                    .ok_or_else(|| Error::Config(format!("no dynamic row for indices {key:?}")))
            }
        }
    }

    /// Total message bits for one index assignment.
    pub fn message_bits(&self, psi_indices: &[usize]) -> Result<u32> {
        let phi = self.phi_bits_for(psi_indices)?;
        let psi: u32 = psi_indices
            .iter()
            .enumerate()
            .map(|(a, &k)| self.psi_index_bits[a][k] as u32)
            .sum();
        Ok(psi + phi.iter().map(|&w| w as u32).sum::<u32>())
    }
}

/// Quantized angle set: indices plus everything needed to map them back
/// to level values.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantizedParams {
    dims: GrDims,
    psi_indices: Vec<usize>,
    phi_indices: Vec<usize>,
    phi_bits: Vec<u8>,
    psi_quantizer: PsiQuantizer,
    total_bits: u32,
}

impl QuantizedParams {
    /// Assembles a quantized parameter set from raw indices, validating
    /// ranges against the quantizer and widths.
    pub fn from_indices(
        dims: GrDims,
        psi_indices: Vec<usize>,
        phi_indices: Vec<usize>,
        phi_bits: Vec<u8>,
        psi_quantizer: PsiQuantizer,
        total_bits: u32,
    ) -> Result<Self> {
        if psi_indices.len() != dims.psi_count()
            || phi_indices.len() != dims.phi_count()
            || phi_bits.len() != dims.phi_count()
        {
            return Err(Error::Validation(format!(
                "index counts do not match {dims}"
            )));
        }
        if psi_indices.iter().any(|&i| i >= psi_quantizer.size()) {
            return Err(Error::Validation("rotation index out of range".into()));
        }
        for (&idx, &bits) in phi_indices.iter().zip(&phi_bits) {
            UniformGrid::phi(bits)?;
            if idx >= (1 << bits) {
                return Err(Error::Validation(format!(
                    "phase index {idx} exceeds {bits}-bit grid"
                )));
            }
        }
        Ok(Self {
            dims,
            psi_indices,
            phi_indices,
            phi_bits,
            psi_quantizer,
            total_bits,
        })
    }

    pub fn dims(&self) -> GrDims {
        self.dims
    }

    pub fn psi_indices(&self) -> &[usize] {
        &self.psi_indices
    }

    pub fn phi_indices(&self) -> &[usize] {
        &self.phi_indices
    }

    pub fn phi_bits(&self) -> &[u8] {
        &self.phi_bits
    }

    pub fn psi_quantizer(&self) -> &PsiQuantizer {
        &self.psi_quantizer
    }

    /// Wire cost of this message under the policy that produced it.
    pub fn total_bits(&self) -> u32 {
        self.total_bits
    }
}

/// Quantizes every angle of `p`: rotation angles first (they pick the
/// phase widths under a dynamic policy), then each phase on its assigned
/// grid.
pub fn quantize_gr(
    p: &GivensParams,
    policy: &BitAllocationPolicy,
    psi_q: &PsiQuantizer,
) -> Result<QuantizedParams> {
    if p.dims() != policy.dims() {
        return Err(Error::Config(format!(
            "params are {} but policy is {}",
            p.dims(),
            policy.dims()
        )));
    }
    let cards = policy.psi_cardinalities();
    if cards.iter().any(|&c| c != psi_q.size()) {
        return Err(Error::Config(format!(
            "policy expects {cards:?} rotation levels, quantizer has {}",
            psi_q.size()
        )));
    }
    let psi_indices: Vec<usize> = p.psi_flat().iter().map(|&a| psi_q.nearest(a)).collect();
    let phi_bits = policy.phi_bits_for(&psi_indices)?;
    let phi_indices: Vec<usize> = p
        .phi_flat()
        .iter()
        .zip(&phi_bits)
        .map(|(&a, &b)| UniformGrid::phi(b).map(|g| g.nearest(a)))
        .collect::<Result<_>>()?;
    let total_bits = policy.message_bits(&psi_indices)?;
    QuantizedParams::from_indices(
        p.dims(),
        psi_indices,
        phi_indices,
        phi_bits,
        psi_q.clone(),
        total_bits,
    )
}

/// Maps indices back to level values, yielding angles ready for
/// reconstruction.
pub fn dequantize_gr(q: &QuantizedParams) -> Result<GivensParams> {
    let psis: Vec<f64> = q
        .psi_indices()
        .iter()
        .map(|&k| q.psi_quantizer().level(k))
        .collect();
    let phis: Vec<f64> = q
        .phi_indices()
        .iter()
        .zip(q.phi_bits())
        .map(|(&k, &b)| UniformGrid::phi(b).map(|g| g.level(k)))
        .collect::<Result<_>>()?;
    GivensParams::from_flat(q.dims(), &phis, &psis)
}

/// Joint probability over tuples of quantized rotation indices, stored
/// row-major (last angle's index varies fastest).
#[derive(Debug, Clone)]
pub struct PsiIndexDistribution {
    cards: Vec<usize>,
    probs: Vec<f64>,
}

impl PsiIndexDistribution {
    pub fn from_joint(cards: Vec<usize>, probs: Vec<f64>) -> Result<Self> {
        let n: usize = cards.iter().product();
        if probs.len() != n {
            return Err(Error::Validation(format!(
                "joint distribution needs {n} entries, got {}",
                probs.len()
            )));
        }
        if probs.iter().any(|&p| !(0.0..=1.0).contains(&p)) {
            return Err(Error::Validation("probability outside [0, 1]".into()));
        }
        Ok(Self { cards, probs })
    }

    /// Product distribution from independent per-angle marginals.
    pub fn from_marginals(marginals: &[Vec<f64>]) -> Result<Self> {
        let cards: Vec<usize> = marginals.iter().map(|m| m.len()).collect();
        let n: usize = cards.iter().product();
        let mut probs = vec![1.0; n];
        for (flat, p) in probs.iter_mut().enumerate() {
            let mut rem = flat;
            for (a, &card) in cards.iter().enumerate().rev() {
                let idx = rem % card;
                rem /= card;
                *p *= marginals[a][idx];
            }
        }
        Self::from_joint(cards, probs)
    }

    pub fn uniform(cards: Vec<usize>) -> Self {
        let n: usize = cards.iter().product();
        Self {
            cards,
            probs: vec![1.0 / n as f64; n],
        }
    }

    pub fn cards(&self) -> &[usize] {
        &self.cards
    }

    /// Iterates `(index tuple, probability)` pairs.
    pub fn iter(&self) -> impl Iterator<Item = (Vec<usize>, f64)> + '_ {
        self.probs.iter().enumerate().map(|(flat, &p)| {
            let mut tuple = vec![0usize; self.cards.len()];
            let mut rem = flat;
            for (a, &card) in self.cards.iter().enumerate().rev() {
                tuple[a] = rem % card;
                rem /= card;
            }
            (tuple, p)
        })
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }
}

/// Expected message length in bits under a distribution of quantized
/// rotation indices.
pub fn average_bits(policy: &BitAllocationPolicy, dist: &PsiIndexDistribution) -> Result<f64> {
    if (dist.total() - 1.0).abs() > 1e-9 {
        return Err(Error::Validation(format!(
            "distribution sums to {}, not 1",
            dist.total()
        )));
    }
    if dist.cards() != policy.psi_cardinalities().as_slice() {
        return Err(Error::Config(
            "distribution cardinalities do not match the policy".into(),
        ));
    }
    let mut expected = 0.0;
    for (tuple, p) in dist.iter() {
        if p == 0.0 {
            continue;
        }
        expected += p * policy.message_bits(&tuple)? as f64;
    }
    Ok(expected)
}
