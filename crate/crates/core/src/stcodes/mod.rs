//! Space-time encoders.

mod block;
mod trellis;

pub use block::{
    bits_to_index, encode_alamouti, encode_golden, encode_spatial_multiplex, index_to_bits,
    BlockCode, BlockCodebook, LinearDispersionCode,
};
pub use trellis::{encode_trellis, load_trellis, Transition, TrellisCode, DELAY_DIVERSITY_4STATE};

use crate::mathcore::{ComplexMatrix, MathError};

/// `lt × n_uses` matrix, one column per channel use.
pub type CodewordMatrix = ComplexMatrix;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CodeError {
    #[error("{what}: length {got} is not a multiple of {multiple_of}")]
    LengthMismatch {
        what: &'static str,
        multiple_of: usize,
        got: usize,
    },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("invalid code: {0}")]
    Validation(String),
    #[error(transparent)]
    Math(#[from] MathError),
}

#[cfg(test)]
mod proptests {
    use super::*;
    use crate::mathcore::{Complex64, Constellation};
    use proptest::prelude::*;

    fn symbol() -> impl Strategy<Value = Complex64> {
        (-2.0f64..2.0, -2.0f64..2.0).prop_map(|(a, b)| Complex64::new(a, b))
    }

    /// Average energy per channel use over the whole codebook.
    fn energy_per_use(words: &[CodewordMatrix]) -> f64 {
        let uses = words[0].cols() as f64;
        words.iter().map(ComplexMatrix::frobenius_norm_sqr).sum::<f64>() / (words.len() as f64 * uses)
    }

    #[test]
    fn uniform_codebook_energy_is_one() {
        let codes = [
            BlockCode::Alamouti(Constellation::qpsk()),
            BlockCode::Alamouti(Constellation::qam16()),
            BlockCode::Golden(Constellation::qpsk()),
            BlockCode::SpatialMultiplex {
                constellation: Constellation::qpsk(),
                lt: 2,
                uses: 2,
            },
            BlockCode::SpatialMultiplex {
                constellation: Constellation::qam16(),
                lt: 3,
                uses: 1,
            },
        ];
        for code in codes {
            let e = energy_per_use(code.codebook().words());
            assert!((e - 1.0).abs() < 1e-9, "{}: {e}", code.name());
        }
        // Trellis: every transition output is equally likely under uniform inputs.
        let dd = load_trellis(DELAY_DIVERSITY_4STATE).unwrap();
        let e: f64 = (0..dd.n_states())
            .flat_map(|s| (0..dd.n_inputs()).map(move |u| (s, u)))
            .map(|(s, u)| dd.output_symbols(s, u).iter().map(|z| z.norm_sqr()).sum::<f64>())
            .sum::<f64>()
            / (dd.n_states() * dd.n_inputs()) as f64;
        assert!((e - 1.0).abs() < 1e-9);
    }

    proptest! {
        #[test]
        fn alamouti_columns_orthogonal(s1 in symbol(), s2 in symbol()) {
            let x = encode_alamouti(s1, s2);
            let g = &x.adjoint() * &x;
            let want = ComplexMatrix::identity(2).scale_real((s1.norm_sqr() + s2.norm_sqr()) / 2.0);
            prop_assert!((&g - &want).frobenius_norm() < 1e-12);
        }

        #[test]
        fn golden_is_linear(a in proptest::array::uniform4(symbol()), b in proptest::array::uniform4(symbol())) {
            let sum = [a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3]];
            let lhs = encode_golden(&sum);
            let rhs = &encode_golden(&a) + &encode_golden(&b);
            prop_assert!((&lhs - &rhs).frobenius_norm() < 1e-12);
        }
    }
}
