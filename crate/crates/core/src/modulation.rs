//! Gray-mapped square constellations with unit average energy.
//!
//! Each symbol carries an independent pulse-amplitude level per axis;
//! bits map to levels through a binary-reflected Gray code so adjacent
//! levels differ in one bit. Detection is nearest-point, done per axis.

use num_complex::Complex64;

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Modulation {
    Qpsk,
    Qam16,
    Qam64,
}

impl Modulation {
    pub fn bits_per_symbol(&self) -> usize {
        2 * self.bits_per_axis()
    }

    fn bits_per_axis(&self) -> usize {
        match self {
            Self::Qpsk => 1,
            Self::Qam16 => 2,
            Self::Qam64 => 3,
        }
    }

    fn levels_per_axis(&self) -> usize {
        1 << self.bits_per_axis()
    }

    /// Scale dividing the odd-integer lattice so E|symbol|^2 = 1.
    fn normalization(&self) -> f64 {
        let n = self.levels_per_axis() as f64;
        (2.0 * (n * n - 1.0) / 3.0).sqrt()
    }

    /// Unnormalized level for a Gray index.
    fn pam_level(&self, gray: usize) -> f64 {
        let n = self.levels_per_axis();
        // Invert gray -> natural (doubling shifts cover up to 8 bits),
        // then space levels at odd integers.
        let mut natural = gray;
        natural ^= natural >> 1;
        natural ^= natural >> 2;
        natural ^= natural >> 4;
        (2 * natural) as f64 - (n - 1) as f64
    }

    /// Maps `bits_per_symbol` bits (in-phase bits first, MSB first) to a
    /// unit-average-energy symbol.
    pub fn map(&self, bits: &[bool]) -> Result<Complex64> {
        let bpa = self.bits_per_axis();
        if bits.len() != 2 * bpa {
            return Err(Error::Validation(format!(
                "{self:?} maps {} bits per symbol, got {}",
                2 * bpa,
                bits.len()
            )));
        }
        let axis = |chunk: &[bool]| -> f64 {
            let gray = chunk.iter().fold(0usize, |acc, &b| (acc << 1) | b as usize);
            self.pam_level(gray)
        };
        Ok(Complex64::new(axis(&bits[..bpa]), axis(&bits[bpa..])) / self.normalization())
    }

    /// Nearest-point detection, returning the bits of the closest symbol.
    pub fn demap(&self, symbol: Complex64) -> Vec<bool> {
        let bpa = self.bits_per_axis();
        let n = self.levels_per_axis();
        let mut bits = Vec::with_capacity(2 * bpa);
        for value in [symbol.re, symbol.im] {
            let scaled = value * self.normalization();
            let natural =
                (((scaled + (n - 1) as f64) / 2.0).round() as i64).clamp(0, n as i64 - 1) as usize;
            let gray = natural ^ (natural >> 1);
            for i in (0..bpa).rev() {
                bits.push((gray >> i) & 1 == 1);
            }
        }
        bits
    }

    /// Enumerates every symbol of the constellation with its bits.
    pub fn symbols(&self) -> Vec<(Vec<bool>, Complex64)> {
        let b = self.bits_per_symbol();
        (0..1usize << b)
            .map(|pattern| {
                let bits: Vec<bool> = (0..b).rev().map(|i| (pattern >> i) & 1 == 1).collect();
                let sym = self.map(&bits).unwrap();
                (bits, sym)
            })
            .collect()
    }
}

impl std::fmt::Display for Modulation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Qpsk => write!(f, "qpsk"),
            Self::Qam16 => write!(f, "16qam"),
            Self::Qam64 => write!(f, "64qam"),
        }
    }
}

impl std::str::FromStr for Modulation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "qpsk" | "4qam" => Ok(Self::Qpsk),
            "16qam" | "qam16" => Ok(Self::Qam16),
            "64qam" | "qam64" => Ok(Self::Qam64),
            other => Err(Error::Config(format!("unknown modulation {other:?}"))),
        }
    }
}
