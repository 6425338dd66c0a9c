//! Block space-time codes: Alamouti, the Golden code and plain spatial
//! multiplexing. All three are real-linear in the information symbols, which
//! gives each of them a linear-dispersion form for lattice decoding.

use std::collections::HashMap;
use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;

use super::{CodeError, CodewordMatrix};
use crate::mathcore::{map_bits, ComplexMatrix, Constellation};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Alamouti codeword: columns `[s1, s2]ᵀ` and `[−s2*, s1*]ᵀ`, scaled by 1/√2.
pub fn encode_alamouti(s1: Complex64, s2: Complex64) -> CodewordMatrix {
    let mut x = ComplexMatrix::zeros(2, 2);
    x[(0, 0)] = s1 * FRAC_1_SQRT_2;
    x[(1, 0)] = s2 * FRAC_1_SQRT_2;
    x[(0, 1)] = -s2.conj() * FRAC_1_SQRT_2;
    x[(1, 1)] = s1.conj() * FRAC_1_SQRT_2;
    x
}

/// Golden code parameters: θ = (1+√5)/2 and its conjugate.
fn golden_constants() -> (f64, f64, Complex64, Complex64) {
    let theta = (1.0 + 5f64.sqrt()) / 2.0;
    let theta_bar = 1.0 - theta;
    let alpha = Complex64::new(1.0, 1.0 - theta);
    let alpha_bar = Complex64::new(1.0, 1.0 - theta_bar);
    (theta, theta_bar, alpha, alpha_bar)
}

/// Golden code codeword for four QAM symbols.
///
/// `(1/√5)·[[α(s1+s2θ), α(s3+s4θ)], [iᾱ(s3+s4θ̄), ᾱ(s1+s2θ̄)]]`, with an extra
/// 1/√2 so the total energy per channel use is one.
pub fn encode_golden(s: &[Complex64; 4]) -> CodewordMatrix {
    let (theta, theta_bar, alpha, alpha_bar) = golden_constants();
    let scale = 1.0 / 10f64.sqrt();
    let mut x = ComplexMatrix::zeros(2, 2);
    x[(0, 0)] = alpha * (s[0] + s[1] * theta) * scale;
    x[(0, 1)] = alpha * (s[2] + s[3] * theta) * scale;
    x[(1, 0)] = I * alpha_bar * (s[2] + s[3] * theta_bar) * scale;
    x[(1, 1)] = alpha_bar * (s[0] + s[1] * theta_bar) * scale;
    x
}

/// Writes `symbols` column by column, `lt` per channel use, scaled by 1/√lt.
pub fn encode_spatial_multiplex(symbols: &[Complex64], lt: usize) -> Result<CodewordMatrix, CodeError> {
    if lt == 0 || symbols.len() % lt != 0 {
        return Err(CodeError::LengthMismatch {
            what: "spatial multiplexing symbols",
            multiple_of: lt.max(1),
            got: symbols.len(),
        });
    }
    let uses = symbols.len() / lt;
    let scale = 1.0 / (lt as f64).sqrt();
    let mut x = ComplexMatrix::zeros(lt, uses);
    for (k, chunk) in symbols.chunks(lt).enumerate() {
        for (a, &s) in chunk.iter().enumerate() {
            x[(a, k)] = s * scale;
        }
    }
    Ok(x)
}

/// The block codes the simulator ships.
#[derive(Debug, Clone, PartialEq)]
pub enum BlockCode {
    Alamouti(Constellation),
    Golden(Constellation),
    SpatialMultiplex {
        constellation: Constellation,
        lt: usize,
        uses: usize,
    },
}

impl BlockCode {
    pub fn constellation(&self) -> &Constellation {
        match self {
            Self::Alamouti(c) | Self::Golden(c) => c,
            Self::SpatialMultiplex { constellation, .. } => constellation,
        }
    }

    pub fn name(&self) -> String {
        match self {
            Self::Alamouti(c) => format!("alamouti-{}", c.name()),
            Self::Golden(c) => format!("golden-{}", c.name()),
            Self::SpatialMultiplex {
                constellation,
                lt,
                uses,
            } => format!("sm{lt}x{uses}-{}", constellation.name()),
        }
    }

    pub fn lt(&self) -> usize {
        match self {
            Self::Alamouti(_) | Self::Golden(_) => 2,
            Self::SpatialMultiplex { lt, .. } => *lt,
        }
    }

    pub fn n_uses(&self) -> usize {
        match self {
            Self::Alamouti(_) | Self::Golden(_) => 2,
            Self::SpatialMultiplex { uses, .. } => *uses,
        }
    }

    pub fn symbols_per_codeword(&self) -> usize {
        match self {
            Self::Alamouti(_) => 2,
            Self::Golden(_) => 4,
            Self::SpatialMultiplex { lt, uses, .. } => lt * uses,
        }
    }

    pub fn bits_per_codeword(&self) -> usize {
        self.symbols_per_codeword() * self.constellation().bits_per_symbol()
    }

    /// Encodes information symbols (one codeword's worth).
    pub fn encode_symbols(&self, s: &[Complex64]) -> Result<CodewordMatrix, CodeError> {
        if s.len() != self.symbols_per_codeword() {
            return Err(CodeError::LengthMismatch {
                what: "codeword symbols",
                multiple_of: self.symbols_per_codeword(),
                got: s.len(),
            });
        }
        Ok(match self {
            Self::Alamouti(_) => encode_alamouti(s[0], s[1]),
            Self::Golden(_) => encode_golden(&[s[0], s[1], s[2], s[3]]),
            Self::SpatialMultiplex { lt, .. } => encode_spatial_multiplex(s, *lt)?,
        })
    }

    pub fn encode_bits(&self, bits: &[u8]) -> Result<CodewordMatrix, CodeError> {
        if bits.len() != self.bits_per_codeword() {
            return Err(CodeError::LengthMismatch {
                what: "codeword bits",
                multiple_of: self.bits_per_codeword(),
                got: bits.len(),
            });
        }
        let symbols = map_bits(bits, self.constellation())?;
        self.encode_symbols(&symbols)
    }

    /// All codewords, indexed by the MSB-first integer value of their bits.
    pub fn codebook(&self) -> BlockCodebook {
        let nbits = self.bits_per_codeword();
        assert!(nbits <= 20, "codebook of 2^{nbits} words is too large to enumerate");
        let words = (0..1usize << nbits)
            .map(|idx| {
                self.encode_bits(&index_to_bits(idx, nbits))
                    .expect("bit count matches by construction")
            })
            .collect();
        BlockCodebook {
            words,
            bits_per_codeword: nbits,
        }
    }

    /// Linear-dispersion matrices, derived by evaluating the encoder on unit
    /// real and imaginary inputs.
    pub fn dispersion(&self) -> LinearDispersionCode {
        let n = self.symbols_per_codeword();
        let mut real_parts = Vec::with_capacity(n);
        let mut imag_parts = Vec::with_capacity(n);
        for i in 0..n {
            let mut s = vec![Complex64::new(0.0, 0.0); n];
            s[i] = Complex64::new(1.0, 0.0);
            real_parts.push(self.encode_symbols(&s).expect("sized"));
            s[i] = I;
            imag_parts.push(self.encode_symbols(&s).expect("sized"));
        }
        LinearDispersionCode {
            lt: self.lt(),
            n_uses: self.n_uses(),
            constellation: self.constellation().clone(),
            real_parts,
            imag_parts,
        }
    }
}

/// Codeword `X = Σ_i Re(s_i)·A_i + Im(s_i)·B_i` over a separable QAM alphabet.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearDispersionCode {
    pub lt: usize,
    pub n_uses: usize,
    pub constellation: Constellation,
    pub real_parts: Vec<ComplexMatrix>,
    pub imag_parts: Vec<ComplexMatrix>,
}

impl LinearDispersionCode {
    pub fn n_symbols(&self) -> usize {
        self.real_parts.len()
    }

    pub fn codeword(&self, s: &[Complex64]) -> CodewordMatrix {
        let mut x = ComplexMatrix::zeros(self.lt, self.n_uses);
        for (i, z) in s.iter().enumerate() {
            x = &x + &self.real_parts[i].scale_real(z.re);
            x = &x + &self.imag_parts[i].scale_real(z.im);
        }
        x
    }
}

/// MSB-first bits of `idx`, `nbits` long.
pub fn index_to_bits(idx: usize, nbits: usize) -> Vec<u8> {
    (0..nbits).rev().map(|k| ((idx >> k) & 1) as u8).collect()
}

pub fn bits_to_index(bits: &[u8]) -> usize {
    bits.iter().fold(0, |acc, &b| (acc << 1) | usize::from(b & 1))
}

/// Exhaustive list of a block code's codewords.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockCodebook {
    words: Vec<CodewordMatrix>,
    bits_per_codeword: usize,
}

impl BlockCodebook {
    /// Validates equal shapes and (when `words.len()` is a power of two) the
    /// size/bit-count relation. Distinctness is checked too.
    pub fn new(words: Vec<CodewordMatrix>, bits_per_codeword: usize) -> Result<Self, CodeError> {
        if words.is_empty() {
            return Err(CodeError::Validation("codebook is empty".into()));
        }
        let shape = words[0].shape();
        if words.iter().any(|w| w.shape() != shape) {
            return Err(CodeError::Validation("codewords differ in shape".into()));
        }
        if words.len() != 1usize << bits_per_codeword {
            return Err(CodeError::Validation(format!(
                "codebook has {} words, expected 2^{bits_per_codeword}",
                words.len()
            )));
        }
        // Exact comparison; `+ 0.0` folds −0 into +0.
        let mut seen = HashMap::with_capacity(words.len());
        for (i, w) in words.iter().enumerate() {
            let key: Vec<u64> = w
                .as_slice()
                .iter()
                .flat_map(|z| [(z.re + 0.0).to_bits(), (z.im + 0.0).to_bits()])
                .collect();
            if let Some(j) = seen.insert(key, i) {
                return Err(CodeError::Validation(format!("codewords {j} and {i} coincide")));
            }
        }
        Ok(Self {
            words,
            bits_per_codeword,
        })
    }

    pub fn words(&self) -> &[CodewordMatrix] {
        &self.words
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn bits_per_codeword(&self) -> usize {
        self.bits_per_codeword
    }

    pub fn shape(&self) -> (usize, usize) {
        self.words[0].shape()
    }

    pub fn bits_of(&self, index: usize) -> Vec<u8> {
        index_to_bits(index, self.bits_per_codeword)
    }
}
