//! Bit-exact variable-length encoding of grid points.
//!
//! Layout per point: `k` sign bits in coordinate order, then `k`
//! magnitudes in coordinate order. Each magnitude `n` is written as
//!
//! * `n <= 1`: marker bit `1` followed by the value bit — two bits total;
//! * `n >= 2`: plain Elias-gamma, i.e. `L-1` zeros then the `L` bits of
//!   `n` (MSB first), where `L = floor(log2 n) + 1 >= 2`.
//!
//! The marker keeps the two cases distinguishable: a gamma code for
//! `n >= 2` always starts with a zero. Cost is 2 bits for `n <= 1` and
//! `2*floor(log2 n) + 1` bits otherwise, so any magnitude costs at most
//! `2 + log2(1 + n^2)` bits — the bound the sketch budget is built on.
//!
//! The stream is most-significant-bit-first within each byte.

use crate::error::{Error, Result};
use crate::grid::GridPoint;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EncodedPoint {
    pub payload: Vec<u8>,
    pub bit_length: usize,
}

#[derive(Debug, Default, Clone)]
pub struct BitWriter {
    bytes: Vec<u8>,
    bit_length: usize,
}

impl BitWriter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn bit_length(&self) -> usize {
        self.bit_length
    }

    pub fn push_bit(&mut self, bit: bool) {
        if self.bit_length % 8 == 0 {
            self.bytes.push(0);
        }
        if bit {
            let last = self.bytes.len() - 1;
            self.bytes[last] |= 1 << (7 - self.bit_length % 8);
        }
        self.bit_length += 1;
    }

    /// Writes the low `width` bits of `value`, most significant first.
    pub fn push_bits(&mut self, value: u64, width: u32) {
        for i in (0..width).rev() {
            self.push_bit(value >> i & 1 == 1);
        }
    }

    pub fn into_bytes(self) -> (Vec<u8>, usize) {
        (self.bytes, self.bit_length)
    }
}

#[derive(Debug, Clone)]
pub struct BitReader<'a> {
    bytes: &'a [u8],
    bit_length: usize,
    pos: usize,
}

impl<'a> BitReader<'a> {
    pub fn new(bytes: &'a [u8], bit_length: usize) -> Self {
        Self { bytes, bit_length, pos: 0 }
    }

    /// Starts reading at an absolute bit offset (for indexed payloads).
    pub fn seek(&mut self, bit_offset: usize) {
        self.pos = bit_offset;
    }

    pub fn position(&self) -> usize {
        self.pos
    }

    pub fn read_bit(&mut self) -> Result<bool> {
        if self.pos >= self.bit_length {
            return Err(Error::TruncatedStream);
        }
        let bit = self.bytes[self.pos / 8] >> (7 - self.pos % 8) & 1 == 1;
        self.pos += 1;
        Ok(bit)
    }

    pub fn read_bits(&mut self, width: u32) -> Result<u64> {
        let mut value = 0u64;
        for _ in 0..width {
            value = value << 1 | u64::from(self.read_bit()?);
        }
        Ok(value)
    }
}

fn write_magnitude(w: &mut BitWriter, n: u32) {
    if n <= 1 {
        w.push_bit(true);
        w.push_bit(n == 1);
    } else {
        let len = 32 - n.leading_zeros(); // floor(log2 n) + 1, >= 2
        for _ in 0..len - 1 {
            w.push_bit(false);
        }
        w.push_bits(n as u64, len);
    }
}

fn read_magnitude(r: &mut BitReader) -> Result<u32> {
    if r.read_bit()? {
        return Ok(u32::from(r.read_bit()?));
    }
    let mut zeros = 1u32;
    while !r.read_bit()? {
        zeros += 1;
        if zeros > 31 {
            return Err(Error::MagnitudeOverflow);
        }
    }
    // Leading 1 of the value already consumed; `zeros` more bits follow.
    let rest = r.read_bits(zeros)?;
    Ok((1u64 << zeros | rest) as u32)
}

/// Exact bit cost of one encoded magnitude.
pub fn magnitude_cost_bits(n: u32) -> usize {
    if n <= 1 {
        2
    } else {
        2 * (31 - n.leading_zeros()) as usize + 1
    }
}

pub fn encode_gridpoint(g: &GridPoint) -> EncodedPoint {
    let mut w = BitWriter::new();
    encode_gridpoint_to(g, &mut w);
    let (payload, bit_length) = w.into_bytes();
    EncodedPoint { payload, bit_length }
}

/// Appends a grid point to an existing stream (used by the sketch file,
/// which concatenates per-point bodies at recorded bit offsets).
pub fn encode_gridpoint_to(g: &GridPoint, w: &mut BitWriter) {
    for &neg in &g.signs {
        w.push_bit(neg);
    }
    for &n in &g.magnitudes {
        write_magnitude(w, n);
    }
}

pub fn decode_gridpoint(e: &EncodedPoint, dim: usize) -> Result<GridPoint> {
    let mut r = BitReader::new(&e.payload, e.bit_length);
    let g = decode_gridpoint_from(&mut r, dim)?;
    if r.position() != e.bit_length {
        return Err(Error::MalformedFile(format!(
            "trailing bits: consumed {}, payload holds {}",
            r.position(),
            e.bit_length
        )));
    }
    Ok(g)
}

pub fn decode_gridpoint_from(r: &mut BitReader, dim: usize) -> Result<GridPoint> {
    let mut signs = Vec::with_capacity(dim);
    for _ in 0..dim {
        signs.push(r.read_bit()?);
    }
    let mut magnitudes = Vec::with_capacity(dim);
    for _ in 0..dim {
        magnitudes.push(read_magnitude(r)?);
    }
    Ok(GridPoint { signs, magnitudes })
}
