//! Canonical Huffman coding for quantized rotation indices and the
//! bit-exact feedback message codec.
//!
//! Wire format (normative for every scheme): all rotation-index fields
//! first, in canonical order (columns ascending, row index ascending
//! within a column), then the phase fields, columns ascending with row
//! index *descending* within a column. Rotation fields are either fixed
//! width or Huffman codewords; phase fields are fixed width, with the
//! widths resolved from the already-decoded rotation indices when the
//! policy is dynamic. Bits are MSB-first with no padding or markers: the
//! feedback channel is assumed lossless, so framing is minimal.

use crate::givens::GrDims;
use crate::quantizer::QuantizedParams;
use crate::scheme::{FeedbackScheme, PsiCoding, SchemeId};
use crate::{Error, Result};

// ---------------------------------------------------------------------------
// Bit-level I/O
// ---------------------------------------------------------------------------

/// MSB-first bit accumulator.
#[derive(Debug, Default, Clone)]
pub struct BitWriter {
    bytes: Vec<u8>,
    len: usize,
}

impl BitWriter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push_bit(&mut self, bit: bool) {
        let byte = self.len / 8;
        if byte == self.bytes.len() {
            self.bytes.push(0);
        }
        if bit {
            self.bytes[byte] |= 0x80 >> (self.len % 8);
        }
        self.len += 1;
    }

    /// Writes the low `width` bits of `value`, most significant first.
    pub fn push_bits(&mut self, value: u32, width: u8) {
        for i in (0..width).rev() {
            self.push_bit((value >> i) & 1 == 1);
        }
    }

    pub fn bit_len(&self) -> usize {
        self.len
    }

    pub fn into_parts(self) -> (Vec<u8>, usize) {
        (self.bytes, self.len)
    }
}

/// MSB-first bit cursor over a packed payload.
#[derive(Debug, Clone)]
pub struct BitReader<'a> {
    bytes: &'a [u8],
    len: usize,
    pos: usize,
}

impl<'a> BitReader<'a> {
    pub fn new(bytes: &'a [u8], bit_len: usize) -> Result<Self> {
        if bit_len > bytes.len() * 8 {
            return Err(Error::CorruptMessage(format!(
                "bit length {bit_len} exceeds payload of {} bytes",
                bytes.len()
            )));
        }
        Ok(Self {
            bytes,
            len: bit_len,
            pos: 0,
        })
    }

    pub fn read_bit(&mut self) -> Result<bool> {
        if self.pos >= self.len {
            return Err(Error::CorruptMessage("truncated payload".into()));
        }
        let bit = (self.bytes[self.pos / 8] >> (7 - self.pos % 8)) & 1 == 1;
        self.pos += 1;
        Ok(bit)
    }

    pub fn read_bits(&mut self, width: u8) -> Result<u32> {
        let mut v = 0u32;
        for _ in 0..width {
            v = (v << 1) | self.read_bit()? as u32;
        }
        Ok(v)
    }

    pub fn consumed(&self) -> usize {
        self.pos
    }

    pub fn remaining(&self) -> usize {
        self.len - self.pos
    }
}

// ---------------------------------------------------------------------------
// Canonical Huffman
// ---------------------------------------------------------------------------

/// Prefix code over a small symbol alphabet.
///
/// Codewords are canonical: lengths come from the Huffman tree, then codes
/// are reassigned by ascending (length, symbol index), so equal-length
/// ties never depend on heap iteration order and bitstreams are
/// deterministic.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolTable {
    probs: Vec<f64>,
    /// Right-aligned codeword bits and length per symbol.
    codes: Vec<(u32, u8)>,
}

/// Builds the optimal prefix code for `probs` in canonical form.
pub fn build_huffman(probs: &[f64]) -> Result<SymbolTable> {
    if probs.len() < 2 {
        return Err(Error::Validation("need at least two symbols".into()));
    }
    if probs.iter().any(|&p| p <= 0.0 || !p.is_finite()) {
        return Err(Error::Validation("probabilities must be positive".into()));
    }
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::Validation(format!(
            "probabilities sum to {total}, not 1"
        )));
    }

    // Tree merge with (weight, creation order) ordering for determinism.
    #[derive(Debug)]
    struct Node {
        weight: f64,
        seq: usize,
        kind: NodeKind,
    }
    #[derive(Debug)]
    enum NodeKind {
        Leaf(usize),
        Internal(usize, usize),
    }
    let mut nodes: Vec<Node> = probs
        .iter()
        .enumerate()
        .map(|(i, &p)| Node {
            weight: p,
            seq: i,
            kind: NodeKind::Leaf(i),
        })
        .collect();
    let mut active: Vec<usize> = (0..nodes.len()).collect();
    let mut seq = nodes.len();
    while active.len() > 1 {
        active.sort_by(|&a, &b| {
            nodes[a]
                .weight
                .partial_cmp(&nodes[b].weight)
                .unwrap()
                .then(nodes[a].seq.cmp(&nodes[b].seq))
        });
        let lo = active.remove(0);
        let hi = active.remove(0);
        nodes.push(Node {
            weight: nodes[lo].weight + nodes[hi].weight,
            seq,
            kind: NodeKind::Internal(lo, hi),
        });
        seq += 1;
        active.push(nodes.len() - 1);
    }

    let mut lengths = vec![0u8; probs.len()];
    let mut stack = vec![(active[0], 0u8)];
    while let Some((idx, depth)) = stack.pop() {
        match nodes[idx].kind {
            NodeKind::Leaf(sym) => lengths[sym] = depth.max(1),
            NodeKind::Internal(a, b) => {
                stack.push((a, depth + 1));
                stack.push((b, depth + 1));
            }
        }
    }

    SymbolTable::from_lengths(probs.to_vec(), lengths)
}

impl SymbolTable {
    /// Canonical code from per-symbol lengths (which must satisfy Kraft).
    pub fn from_lengths(probs: Vec<f64>, lengths: Vec<u8>) -> Result<Self> {
        if probs.len() != lengths.len() {
            return Err(Error::Validation(
                "length/probability count mismatch".into(),
            ));
        }
        let kraft: f64 = lengths.iter().map(|&l| (0.5f64).powi(l as i32)).sum();
        if kraft > 1.0 + 1e-12 {
            return Err(Error::Validation(format!("lengths violate Kraft: {kraft}")));
        }
        let mut order: Vec<usize> = (0..lengths.len()).collect();
        order.sort_by_key(|&i| (lengths[i], i));
        let mut codes = vec![(0u32, 0u8); lengths.len()];
        let mut code = 0u32;
        let mut prev_len = lengths[order[0]];
        for (pos, &sym) in order.iter().enumerate() {
            let len = lengths[sym];
            if pos > 0 {
                code = (code + 1) << (len - prev_len);
            }
            codes[sym] = (code, len);
            prev_len = len;
        }
        Ok(Self { probs, codes })
    }

    pub fn len(&self) -> usize {
        self.codes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codes.is_empty()
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn lengths(&self) -> Vec<u8> {
        self.codes.iter().map(|&(_, l)| l).collect()
    }

    /// Codeword bit cost of `symbol`.
    pub fn length(&self, symbol: usize) -> u8 {
        self.codes[symbol].1
    }

    /// Expected codeword length under the table's probabilities.
    pub fn average_length(&self) -> f64 {
        self.probs
            .iter()
            .zip(&self.codes)
            .map(|(&p, &(_, l))| p * l as f64)
            .sum()
    }

    /// Shannon entropy of the probabilities, in bits.
    pub fn entropy(&self) -> f64 {
        self.probs.iter().map(|&p| -p * p.log2()).sum()
    }

    pub fn kraft_sum(&self) -> f64 {
        self.codes
            .iter()
            .map(|&(_, l)| (0.5f64).powi(l as i32))
            .sum()
    }

    /// Codeword as a 0/1 string, MSB first.
    pub fn codeword_string(&self, symbol: usize) -> String {
        let (code, len) = self.codes[symbol];
        (0..len)
            .rev()
            .map(|i| if (code >> i) & 1 == 1 { '1' } else { '0' })
            .collect()
    }

    pub fn write_symbol(&self, w: &mut BitWriter, symbol: usize) -> Result<()> {
        if symbol >= self.codes.len() {
            return Err(Error::Validation(format!("symbol {symbol} out of range")));
        }
        let (code, len) = self.codes[symbol];
        w.push_bits(code, len);
        Ok(())
    }

    pub fn read_symbol(&self, r: &mut BitReader<'_>) -> Result<usize> {
        let max_len = self.codes.iter().map(|&(_, l)| l).max().unwrap_or(0);
        let mut acc = 0u32;
        let mut len = 0u8;
        loop {
            acc = (acc << 1) | r.read_bit()? as u32;
            len += 1;
            if let Some(sym) = self
                .codes
                .iter()
                .position(|&(code, l)| l == len && code == acc)
            {
                return Ok(sym);
            }
            if len >= max_len {
                return Err(Error::CorruptMessage(format!(
                    "invalid prefix {acc:0width$b}",
                    width = len as usize
                )));
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Feedback messages
// ---------------------------------------------------------------------------

/// Bit-exact serialized quantized beamformer.
#[derive(Debug, Clone, PartialEq)]
pub struct FeedbackMessage {
    dims: GrDims,
    scheme_id: SchemeId,
    payload: Vec<u8>,
    bit_len: usize,
}

impl FeedbackMessage {
    pub fn from_parts(
        dims: GrDims,
        scheme_id: SchemeId,
        payload: Vec<u8>,
        bit_len: usize,
    ) -> Result<Self> {
        if bit_len > payload.len() * 8 || payload.len() > bit_len.div_ceil(8) {
            return Err(Error::Validation(format!(
                "payload of {} bytes inconsistent with bit length {bit_len}",
                payload.len()
            )));
        }
        Ok(Self {
            dims,
            scheme_id,
            payload,
            bit_len,
        })
    }

    pub fn dims(&self) -> GrDims {
        self.dims
    }

    pub fn scheme_id(&self) -> SchemeId {
        self.scheme_id
    }

    pub fn payload(&self) -> &[u8] {
        &self.payload
    }

    pub fn bit_len(&self) -> usize {
        self.bit_len
    }

    /// Hex dump of the payload (final partial byte zero-padded on the
    /// right).
    pub fn to_hex(&self) -> String {
        self.payload.iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Rebuilds a message from a hex dump. When `bit_len` is omitted the
    /// whole byte length is assumed; decoders that know the scheme can use
    /// [`decode_message_prefix`] to cope with right padding.
    pub fn from_hex(
        dims: GrDims,
        scheme_id: SchemeId,
        hex: &str,
        bit_len: Option<usize>,
    ) -> Result<Self> {
        let clean: String = hex.chars().filter(|c| !c.is_whitespace()).collect();
        if clean.len() % 2 != 0 {
            return Err(Error::Validation("hex payload has odd length".into()));
        }
        let payload: Vec<u8> = (0..clean.len() / 2)
            .map(|i| u8::from_str_radix(&clean[2 * i..2 * i + 2], 16))
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Validation(format!("bad hex payload: {e}")))?;
        let bit_len = bit_len.unwrap_or(payload.len() * 8);
        Self::from_parts(dims, scheme_id, payload, bit_len)
    }
}

/// Canonical positions of the phase fields on the wire: columns ascending,
/// row index descending within a column, expressed as indices into the
/// canonical flat phase order.
fn phi_wire_order(dims: GrDims) -> Vec<usize> {
    let mut order = Vec::with_capacity(dims.phi_count());
    let mut start = 0;
    for i in 0..dims.column_count() {
        let cnt = dims.phi_count_in(i);
        order.extend((start..start + cnt).rev());
        start += cnt;
    }
    order
}

/// Serializes quantized parameters under `scheme`.
pub fn encode_message(q: &QuantizedParams, scheme: &FeedbackScheme) -> Result<FeedbackMessage> {
    if q.dims() != scheme.dims() {
        return Err(Error::Validation(format!(
            "params are {}, scheme {} expects {}",
            q.dims(),
            scheme.id(),
            scheme.dims()
        )));
    }
    if q.psi_quantizer() != scheme.psi_quantizer() {
        return Err(Error::Validation(
            "params were quantized with a different rotation quantizer".into(),
        ));
    }
    let expected_phi = scheme.policy().phi_bits_for(q.psi_indices())?;
    if expected_phi != q.phi_bits() {
        return Err(Error::Validation(
            "phase widths do not match the scheme's policy".into(),
        ));
    }

    let mut w = BitWriter::new();
    match scheme.psi_coding() {
        PsiCoding::FixedWidth => {
            let width = scheme.psi_quantizer().fixed_index_bits()?;
            for &idx in q.psi_indices() {
                if idx >= 1usize << width {
                    return Err(Error::Validation(format!(
                        "rotation index {idx} out of range"
                    )));
                }
                w.push_bits(idx as u32, width);
            }
        }
        PsiCoding::Huffman(tables) => {
            for (table, &idx) in tables.iter().zip(q.psi_indices()) {
                table.write_symbol(&mut w, idx)?;
            }
        }
    }
    for &pos in &phi_wire_order(q.dims()) {
        let idx = q.phi_indices()[pos];
        let bits = q.phi_bits()[pos];
        if idx >= 1usize << bits {
            return Err(Error::Validation(format!(
                "phase index {idx} exceeds {bits} bits"
            )));
        }
        w.push_bits(idx as u32, bits);
    }
    let (payload, bit_len) = w.into_parts();
    FeedbackMessage::from_parts(q.dims(), scheme.id(), payload, bit_len)
}

/// Decodes a message, requiring the payload length to match the fields
/// exactly (no trailing bits).
pub fn decode_message(m: &FeedbackMessage, scheme: &FeedbackScheme) -> Result<QuantizedParams> {
    let (params, consumed) = decode_message_prefix(m, scheme)?;
    if consumed != m.bit_len() {
        return Err(Error::CorruptMessage(format!(
            "{} trailing bits after a {consumed}-bit message",
            m.bit_len() - consumed
        )));
    }
    Ok(params)
}

/// Decodes the leading message in a payload, returning the consumed bit
/// count. Rotation fields are read first and, for dynamic schemes,
/// determine the phase widths that follow.
pub fn decode_message_prefix(
    m: &FeedbackMessage,
    scheme: &FeedbackScheme,
) -> Result<(QuantizedParams, usize)> {
    if m.dims() != scheme.dims() {
        return Err(Error::Validation(format!(
            "message is {}, scheme {} expects {}",
            m.dims(),
            scheme.id(),
            scheme.dims()
        )));
    }
    if m.scheme_id() != scheme.id() {
        return Err(Error::Validation(format!(
            "message was encoded with scheme {}, not {}",
            m.scheme_id(),
            scheme.id()
        )));
    }
    let dims = m.dims();
    let mut r = BitReader::new(m.payload(), m.bit_len())?;

    let mut psi_indices = Vec::with_capacity(dims.psi_count());
    match scheme.psi_coding() {
        PsiCoding::FixedWidth => {
            let width = scheme.psi_quantizer().fixed_index_bits()?;
            for _ in 0..dims.psi_count() {
                psi_indices.push(r.read_bits(width)? as usize);
            }
        }
        PsiCoding::Huffman(tables) => {
            for table in tables {
                psi_indices.push(table.read_symbol(&mut r)?);
            }
        }
    }

    let phi_bits = scheme.policy().phi_bits_for(&psi_indices)?;
    let mut phi_indices = vec![0usize; dims.phi_count()];
    for &pos in &phi_wire_order(dims) {
        phi_indices[pos] = r.read_bits(phi_bits[pos])? as usize;
    }

    let total_bits = scheme.policy().message_bits(&psi_indices)?;
    let params = QuantizedParams::from_indices(
        dims,
        psi_indices,
        phi_indices,
        phi_bits,
        scheme.psi_quantizer().clone(),
        total_bits,
    )?;
    Ok((params, r.consumed()))
}

/// Phase widths `(phi11, phi21, phi22)` for the entropy-coded two-stream
/// scheme, keyed on the quantized `psi21` and `psi31` indices of the
/// four-level grid.
///
/// The middle `psi21` cells combined with the low `psi31` cells leave a
/// large top-row magnitude, where coarse phases hurt most; those rows get
/// 3 bits for `phi11`/`phi21`, everything else 2. `phi22` always gets 2.
pub fn scheme_e_phi_bits(psi21_index: usize, psi31_index: usize) -> (u8, u8, u8) {
    let fine = matches!(psi21_index, 1 | 2) && matches!(psi31_index, 0 | 1);
    if fine {
        (3, 3, 2)
    } else {
        (2, 2, 2)
    }
}
