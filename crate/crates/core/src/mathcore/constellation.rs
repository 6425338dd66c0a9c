use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use super::MathError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ConstellationKind {
    Qpsk,
    Qam16,
}

impl fmt::Display for ConstellationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Qpsk => "QPSK",
            Self::Qam16 => "16QAM",
        })
    }
}

impl FromStr for ConstellationKind {
    type Err = MathError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "QPSK" | "4QAM" => Ok(Self::Qpsk),
            "16QAM" | "QAM16" => Ok(Self::Qam16),
            _ => Err(MathError::UnknownConstellation(s.to_string())),
        }
    }
}

/// Unit-energy Gray-labelled QAM constellation.
///
/// Point index equals the integer value of its bit label (MSB first), so the
/// labeling map is the identity on `0..2^bits_per_symbol`. Both shipped
/// constellations are separable: the real and imaginary parts each depend on
/// a disjoint subset of the label bits, which the lattice decoder relies on.
#[derive(Debug, Clone, PartialEq)]
pub struct Constellation {
    kind: ConstellationKind,
    points: Vec<Complex64>,
    bits_per_symbol: usize,
    /// Distinct per-axis amplitudes, ascending.
    axis_levels: Vec<f64>,
}

/// Gray map of a 2-bit pattern onto {−3, −1, 1, 3}.
fn gray_pam4(bits: usize) -> f64 {
    match bits {
        0b00 => -3.0,
        0b01 => -1.0,
        0b11 => 1.0,
        0b10 => 3.0,
        _ => unreachable!(),
    }
}

impl Constellation {
    pub fn new(kind: ConstellationKind) -> Self {
        match kind {
            ConstellationKind::Qpsk => {
                // 00 → 45°, 01 → 135°, 11 → −135°, 10 → −45°
                let a = std::f64::consts::FRAC_1_SQRT_2;
                let mut points = vec![Complex64::new(0.0, 0.0); 4];
                points[0b00] = Complex64::new(a, a);
                points[0b01] = Complex64::new(-a, a);
                points[0b11] = Complex64::new(-a, -a);
                points[0b10] = Complex64::new(a, -a);
                Self {
                    kind,
                    points,
                    bits_per_symbol: 2,
                    axis_levels: vec![-a, a],
                }
            }
            ConstellationKind::Qam16 => {
                let scale = 1.0 / 10f64.sqrt();
                let points = (0..16)
                    .map(|label| {
                        let re = gray_pam4(label >> 2);
                        let im = gray_pam4(label & 0b11);
                        Complex64::new(re * scale, im * scale)
                    })
                    .collect();
                Self {
                    kind,
                    points,
                    bits_per_symbol: 4,
                    axis_levels: [-3.0, -1.0, 1.0, 3.0].iter().map(|x| x * scale).collect(),
                }
            }
        }
    }

    pub fn qpsk() -> Self {
        Self::new(ConstellationKind::Qpsk)
    }

    pub fn qam16() -> Self {
        Self::new(ConstellationKind::Qam16)
    }

    pub fn kind(&self) -> ConstellationKind {
        self.kind
    }

    pub fn name(&self) -> String {
        self.kind.to_string()
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    pub fn size(&self) -> usize {
        self.points.len()
    }

    pub fn bits_per_symbol(&self) -> usize {
        self.bits_per_symbol
    }

    pub fn point(&self, index: usize) -> Complex64 {
        self.points[index]
    }

    pub fn axis_levels(&self) -> &[f64] {
        &self.axis_levels
    }

    /// Label (point index) for a bit pattern, MSB first.
    pub fn index_of_bits(&self, bits: &[u8]) -> usize {
        debug_assert_eq!(bits.len(), self.bits_per_symbol);
        bits.iter().fold(0, |acc, &b| (acc << 1) | usize::from(b & 1))
    }

    pub fn bits_of_index(&self, index: usize) -> Vec<u8> {
        (0..self.bits_per_symbol)
            .rev()
            .map(|k| ((index >> k) & 1) as u8)
            .collect()
    }

    /// Nearest point by Euclidean distance; ties go to the lowest index.
    pub fn nearest(&self, z: Complex64) -> usize {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (i, p) in self.points.iter().enumerate() {
            let d = (z - p).norm_sqr();
            if d < best_d {
                best_d = d;
                best = i;
            }
        }
        best
    }

    /// Index of the point with exactly these axis coordinates (within 1e-9).
    pub fn index_of_point(&self, z: Complex64) -> Option<usize> {
        self.points.iter().position(|p| (p - z).norm() < 1e-9)
    }
}

/// Maps a bit sequence onto constellation symbols.
pub fn map_bits(bits: &[u8], c: &Constellation) -> Result<Vec<Complex64>, MathError> {
    let k = c.bits_per_symbol();
    if bits.len() % k != 0 {
        return Err(MathError::LengthMismatch {
            expected: bits.len().next_multiple_of(k),
            got: bits.len(),
        });
    }
    Ok(bits.chunks(k).map(|chunk| c.point(c.index_of_bits(chunk))).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn qpsk_anchor() {
        let c = Constellation::qpsk();
        let s = map_bits(&[0, 0], &c).unwrap();
        let a = std::f64::consts::FRAC_1_SQRT_2;
        assert!((s[0] - Complex64::new(a, a)).norm() < 1e-15);
        assert_eq!(map_bits(&[0, 1, 1, 1, 1, 0, 0, 0], &c).unwrap().len(), 4);
    }

    #[test]
    fn length_mismatch() {
        let c = Constellation::qam16();
        assert!(matches!(
            map_bits(&[0, 1, 1], &c),
            Err(MathError::LengthMismatch { .. })
        ));
    }

    #[test]
    fn unit_average_energy() {
        for c in [Constellation::qpsk(), Constellation::qam16()] {
            let e: f64 = c.points().iter().map(Complex64::norm_sqr).sum::<f64>() / c.size() as f64;
            assert!((e - 1.0).abs() < 1e-12, "{}", c.name());
        }
    }

    #[test]
    fn qam16_all_patterns_distinct() {
        let c = Constellation::qam16();
        let bits: Vec<u8> = (0..16).flat_map(|i| c.bits_of_index(i)).collect();
        let pts = map_bits(&bits, &c).unwrap();
        for i in 0..16 {
            for j in i + 1..16 {
                assert!((pts[i] - pts[j]).norm() > 0.1);
            }
        }
    }

    #[test]
    fn gray_neighbours_differ_in_one_bit() {
        for c in [Constellation::qpsk(), Constellation::qam16()] {
            let dmin = c
                .points()
                .iter()
                .enumerate()
                .flat_map(|(i, p)| c.points()[i + 1..].iter().map(move |q| (p - q).norm()))
                .fold(f64::INFINITY, f64::min);
            for i in 0..c.size() {
                for j in 0..c.size() {
                    let d = (c.point(i) - c.point(j)).norm();
                    if i != j && (d - dmin).abs() < 1e-9 {
                        assert_eq!((i ^ j).count_ones(), 1, "{} {i} {j}", c.name());
                    }
                }
            }
        }
    }

    #[test]
    fn labels_roundtrip_and_parse() {
        let c = Constellation::qam16();
        for i in 0..16 {
            assert_eq!(c.index_of_bits(&c.bits_of_index(i)), i);
            assert_eq!(c.nearest(c.point(i) * 1.01), i);
            assert_eq!(c.index_of_point(c.point(i)), Some(i));
        }
        assert_eq!("qpsk".parse::<ConstellationKind>().unwrap(), ConstellationKind::Qpsk);
        assert!("8PSK".parse::<ConstellationKind>().is_err());
    }
}
