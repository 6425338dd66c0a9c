//! Coherent ML word demodulation: minimise `Σ_k ‖Y(k) − √Es·H(k)X(k)‖²`.
//!
//! Four decoders share that metric: exhaustive search over a block codebook,
//! Viterbi over a terminated trellis, a Schnorr-Euchner sphere decoder for
//! linear-dispersion codes, and the Alamouti linear combiner.

use std::cmp::Ordering;

use num_complex::Complex64;

use crate::channel::{FadingRealization, ReceivedFrame};
use crate::mathcore::{ComplexMatrix, Constellation};
use crate::stcodes::{index_to_bits, BlockCodebook, CodewordMatrix, LinearDispersionCode, TrellisCode};

/// Channel variation tolerated inside an Alamouti block.
pub const STATIC_BLOCK_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DemodError {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("code does not fit the lattice model: {0}")]
    ModelMismatch(String),
    #[error("channel changes by {defect:.3e} inside an Alamouti block")]
    NonStaticBlock { defect: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecodeResult {
    pub bits: Vec<u8>,
    /// Value of the ML metric for the returned word.
    pub metric: f64,
    /// Candidate words, trellis branches or tree nodes examined.
    pub nodes: u64,
    /// Set when the channel gave no information (all hypotheses tied).
    pub degenerate: bool,
}

/// `√Es·H(k)` for each use.
fn scaled_gains(h: &FadingRealization, es: f64) -> Vec<ComplexMatrix> {
    let a = es.sqrt();
    h.gains().iter().map(|g| g.scale_real(a)).collect()
}

/// `‖y − G x‖²` for one use.
fn use_metric(g: &ComplexMatrix, y: &[Complex64], x: &[Complex64]) -> f64 {
    let mut acc = 0.0;
    for (i, &yi) in y.iter().enumerate() {
        let gx: Complex64 = g.row(i).iter().zip(x).map(|(a, b)| a * b).sum();
        acc += (yi - gx).norm_sqr();
    }
    acc
}

/// `‖y − G·x[:, k]‖²` reading the codeword column in place.
fn use_metric_at(g: &ComplexMatrix, y: &[Complex64], x: &ComplexMatrix, k: usize) -> f64 {
    let mut acc = 0.0;
    for (i, &yi) in y.iter().enumerate() {
        let gx: Complex64 = g.row(i).iter().enumerate().map(|(j, a)| a * x[(j, k)]).sum();
        acc += (yi - gx).norm_sqr();
    }
    acc
}

/// The ML metric `Σ_k ‖Y(k) − √Es·H(k)X(k)‖²` of a candidate transmit matrix.
pub fn word_metric(y: &ReceivedFrame, h: &FadingRealization, x: &CodewordMatrix, es: f64) -> f64 {
    let g = scaled_gains(h, es);
    (0..x.cols())
        .map(|k| use_metric(&g[k], &y.y.column(k), &x.column(k)))
        .sum()
}

fn check_frame(y: &ReceivedFrame, h: &FadingRealization, lt: usize) -> Result<(), DemodError> {
    if h.len() != y.n_uses() || h.lr() != y.lr() || h.lt() != lt {
        return Err(DemodError::ShapeMismatch(format!(
            "received {}×{}, channel {} uses of {}×{}, code lt={lt}",
            y.lr(),
            y.n_uses(),
            h.len(),
            h.lr(),
            h.lt()
        )));
    }
    Ok(())
}

fn check_blocks(n_uses: usize, block: usize) -> Result<usize, DemodError> {
    if block == 0 || n_uses % block != 0 {
        return Err(DemodError::ShapeMismatch(format!(
            "frame of {n_uses} uses is not a whole number of {block}-use codewords"
        )));
    }
    Ok(n_uses / block)
}

/// Exhaustive ML over a block codebook. A frame may hold several consecutive
/// codewords; each is decided on its own. Ties go to the lowest index.
pub fn ml_exhaustive(
    y: &ReceivedFrame,
    h: &FadingRealization,
    cb: &BlockCodebook,
    es: f64,
) -> Result<DecodeResult, DemodError> {
    let (lt, uses) = cb.shape();
    check_frame(y, h, lt)?;
    let n_blocks = check_blocks(y.n_uses(), uses)?;
    let g = scaled_gains(h, es);
    let cols: Vec<Vec<Complex64>> = (0..y.n_uses()).map(|k| y.y.column(k)).collect();
    let mut out = DecodeResult {
        bits: Vec::with_capacity(n_blocks * cb.bits_per_codeword()),
        metric: 0.0,
        nodes: 0,
        degenerate: false,
    };
    for b in 0..n_blocks {
        let mut best = (usize::MAX, f64::INFINITY);
        let mut all_tied = true;
        for (idx, w) in cb.words().iter().enumerate() {
            let m: f64 = (0..uses)
                .map(|k| use_metric_at(&g[b * uses + k], &cols[b * uses + k], w, k))
                .sum();
            if idx > 0 && m != best.1 {
                all_tied = false;
            }
            if m < best.1 || best.0 == usize::MAX {
                best = (idx, m);
            }
        }
        out.bits.extend(cb.bits_of(best.0));
        out.metric += best.1;
        out.nodes += cb.len() as u64;
        out.degenerate |= all_tied && cb.len() > 1;
    }
    Ok(out)
}

/// ML sequence decoding of a terminated trellis frame.
///
/// The frame carries `n_uses − T` data steps followed by the encoder's tail
/// from whatever state the data left it in, so the search is exact over the
/// code's own codewords. Survivor ties go to the smaller predecessor state,
/// then the smaller input pattern; the final choice among tail-start states
/// goes to the smaller state.
pub fn viterbi_decode(
    y: &ReceivedFrame,
    h: &FadingRealization,
    code: &TrellisCode,
    es: f64,
) -> Result<DecodeResult, DemodError> {
    check_frame(y, h, code.lt())?;
    let tail = code.termination_len();
    if y.n_uses() < tail {
        return Err(DemodError::ShapeMismatch(format!(
            "frame of {} uses is shorter than the {tail}-use tail",
            y.n_uses()
        )));
    }
    let steps = y.n_uses() - tail;
    let ns = code.n_states();
    let ni = code.n_inputs();
    let g = scaled_gains(h, es);
    let cols: Vec<Vec<Complex64>> = (0..y.n_uses()).map(|k| y.y.column(k)).collect();
    let outputs: Vec<Vec<Vec<Complex64>>> = (0..ns)
        .map(|s| (0..ni).map(|u| code.output_symbols(s, u)).collect())
        .collect();

    let mut cost = vec![f64::INFINITY; ns];
    cost[0] = 0.0;
    // survivors[t][s] = (previous state, input)
    let mut survivors: Vec<Vec<(usize, usize)>> = Vec::with_capacity(steps);
    let mut nodes = 0u64;
    for t in 0..steps {
        let mut next = vec![f64::INFINITY; ns];
        let mut back = vec![(usize::MAX, usize::MAX); ns];
        for s in 0..ns {
            if !cost[s].is_finite() {
                continue;
            }
            for u in 0..ni {
                let m = cost[s] + use_metric(&g[t], &cols[t], &outputs[s][u]);
                nodes += 1;
                let n = code.next_state(s, u);
                // (s, u) are visited in increasing order, so strict < keeps
                // the smaller predecessor on ties.
                if m < next[n] || back[n].0 == usize::MAX {
                    next[n] = m;
                    back[n] = (s, u);
                }
            }
        }
        cost = next;
        survivors.push(back);
    }

    let mut best: Option<(usize, f64)> = None;
    for (s, &c) in cost.iter().enumerate() {
        if !c.is_finite() {
            continue;
        }
        let mut state = s;
        let mut m = c;
        for (j, &u) in code.termination_inputs(s).iter().enumerate() {
            m += use_metric(&g[steps + j], &cols[steps + j], &outputs[state][u]);
            state = code.next_state(state, u);
            nodes += 1;
        }
        if best.is_none_or(|(_, bm)| m < bm) {
            best = Some((s, m));
        }
    }
    let (mut state, metric) = best.expect("state 0 is always reachable");

    let mut inputs = vec![0usize; steps];
    for t in (0..steps).rev() {
        let (prev, u) = survivors[t][state];
        inputs[t] = u;
        state = prev;
    }
    let k = code.bits_per_step();
    Ok(DecodeResult {
        bits: inputs.iter().flat_map(|&u| index_to_bits(u, k)).collect(),
        metric,
        nodes,
        degenerate: false,
    })
}

/// Real-valued model `y = G s + n` of one codeword.
struct RealModel {
    /// Column-major `m × n` (m = 2·lr·uses, n = 2·symbols).
    g: Vec<Vec<f64>>,
    y: Vec<f64>,
}

fn real_model(
    ycols: &[Vec<Complex64>],
    gains: &[ComplexMatrix],
    code: &LinearDispersionCode,
) -> RealModel {
    let mut y = Vec::new();
    for col in ycols {
        for z in col {
            y.push(z.re);
            y.push(z.im);
        }
    }
    let mut g = Vec::with_capacity(2 * code.n_symbols());
    for i in 0..code.n_symbols() {
        for basis in [&code.real_parts[i], &code.imag_parts[i]] {
            let mut column = Vec::with_capacity(y.len());
            for (k, gk) in gains.iter().enumerate() {
                for z in gk.matvec(&basis.column(k)) {
                    column.push(z.re);
                    column.push(z.im);
                }
            }
            g.push(column);
        }
    }
    RealModel { g, y }
}

/// Thin QR by modified Gram-Schmidt; returns (Qᵀy, R upper triangular).
fn qr_project(model: &RealModel) -> Option<(Vec<f64>, Vec<Vec<f64>>)> {
    let n = model.g.len();
    let mut q = model.g.clone();
    let mut r = vec![vec![0.0; n]; n];
    let scale = q
        .iter()
        .map(|c| c.iter().map(|v| v * v).sum::<f64>().sqrt())
        .fold(0.0, f64::max);
    for j in 0..n {
        for i in 0..j {
            let d: f64 = q[i].iter().zip(&q[j]).map(|(a, b)| a * b).sum();
            r[i][j] = d;
            let qi = q[i].clone();
            q[j].iter_mut().zip(&qi).for_each(|(v, a)| *v -= d * a);
        }
        let norm = q[j].iter().map(|v| v * v).sum::<f64>().sqrt();
        if !(norm > 1e-12 * scale) {
            return None;
        }
        r[j][j] = norm;
        q[j].iter_mut().for_each(|v| *v /= norm);
    }
    let z = q
        .iter()
        .map(|c| c.iter().zip(&model.y).map(|(a, b)| a * b).sum())
        .collect();
    Some((z, r))
}

struct Search<'a> {
    z: &'a [f64],
    r: &'a [Vec<f64>],
    levels: &'a [f64],
    current: Vec<f64>,
    best: Vec<f64>,
    radius: f64,
    nodes: u64,
}

impl Search<'_> {
    fn descend(&mut self, level: usize, partial: f64) {
        let n = self.r.len();
        let mut interference = 0.0;
        for j in level + 1..n {
            interference += self.r[level][j] * self.current[j];
        }
        let rll = self.r[level][level];
        let center = (self.z[level] - interference) / rll;
        // closest-first child order
        let mut order: Vec<f64> = self.levels.to_vec();
        order.sort_by(|a, b| {
            (a - center)
                .abs()
                .total_cmp(&(b - center).abs())
                .then(a.partial_cmp(b).unwrap_or(Ordering::Equal))
        });
        for v in order {
            let d = partial + (rll * (v - center)).powi(2);
            self.nodes += 1;
            if d >= self.radius {
                // children are sorted by distance, so the rest are worse
                break;
            }
            self.current[level] = v;
            if level == 0 {
                self.radius = d;
                self.best.clone_from(&self.current);
            } else {
                self.descend(level - 1, d);
            }
        }
    }
}

/// Exact ML for linear-dispersion block codes by depth-first lattice search.
/// The radius starts unbounded, so the first leaf reached is the Babai point.
/// Requires at least as many real observations as real unknowns per codeword.
pub fn sphere_decode(
    y: &ReceivedFrame,
    h: &FadingRealization,
    code: &LinearDispersionCode,
    es: f64,
) -> Result<DecodeResult, DemodError> {
    check_frame(y, h, code.lt)?;
    let n_blocks = check_blocks(y.n_uses(), code.n_uses)?;
    let c = &code.constellation;
    let levels = c.axis_levels();
    let n_real = 2 * code.n_symbols();
    if 2 * y.lr() * code.n_uses < n_real {
        return Err(DemodError::ModelMismatch(format!(
            "{n_real} real unknowns but only {} observations with lr={}",
            2 * y.lr() * code.n_uses,
            y.lr()
        )));
    }
    let gains = scaled_gains(h, es);
    let mut out = DecodeResult {
        bits: Vec::new(),
        metric: 0.0,
        nodes: 0,
        degenerate: false,
    };
    for b in 0..n_blocks {
        let span = b * code.n_uses..(b + 1) * code.n_uses;
        let ycols: Vec<Vec<Complex64>> = span.clone().map(|k| y.y.column(k)).collect();
        let model = real_model(&ycols, &gains[span.clone()], code);
        let (z, r) = qr_project(&model)
            .ok_or_else(|| DemodError::ModelMismatch("effective channel is rank deficient".into()))?;
        let mut search = Search {
            z: &z,
            r: &r,
            levels,
            current: vec![0.0; n_real],
            best: vec![0.0; n_real],
            radius: f64::INFINITY,
            nodes: 0,
        };
        search.descend(n_real - 1, 0.0);
        let symbols: Vec<Complex64> = search
            .best
            .chunks(2)
            .map(|p| Complex64::new(p[0], p[1]))
            .collect();
        for &s in &symbols {
            let idx = c.index_of_point(s).expect("search stays on the alphabet");
            out.bits.extend(c.bits_of_index(idx));
        }
        let x = code.codeword(&symbols);
        out.metric += (0..code.n_uses)
            .map(|k| use_metric(&gains[span.start + k], &ycols[k], &x.column(k)))
            .sum::<f64>();
        out.nodes += search.nodes;
    }
    Ok(out)
}

/// Combiner outputs `(s̃1, s̃2)` and the channel gain `Σ|h_ij|²` for one
/// Alamouti block, with `√(Es/2)` folded in so that, noiselessly,
/// `s̃ = √(Es/2)·gain·s`.
pub fn alamouti_statistics(y0: &[Complex64], y1: &[Complex64], h: &ComplexMatrix) -> (Complex64, Complex64, f64) {
    let mut s1 = Complex64::new(0.0, 0.0);
    let mut s2 = Complex64::new(0.0, 0.0);
    let mut gain = 0.0;
    for i in 0..h.rows() {
        let (h1, h2) = (h[(i, 0)], h[(i, 1)]);
        s1 += h1.conj() * y0[i] + h2 * y1[i].conj();
        s2 += h2.conj() * y0[i] - h1 * y1[i].conj();
        gain += h1.norm_sqr() + h2.norm_sqr();
    }
    (s1, s2, gain)
}

/// Alamouti decoding by linear combining and per-symbol slicing. With
/// `allow_varying` the channel is averaged over each block instead of
/// rejecting blocks where it changes.
pub fn alamouti_combine(
    y: &ReceivedFrame,
    h: &FadingRealization,
    es: f64,
    c: &Constellation,
    allow_varying: bool,
) -> Result<DecodeResult, DemodError> {
    check_frame(y, h, 2)?;
    let n_blocks = check_blocks(y.n_uses(), 2)?;
    let amp = (es / 2.0).sqrt();
    let g = scaled_gains(h, es);
    let mut out = DecodeResult {
        bits: Vec::with_capacity(n_blocks * 2 * c.bits_per_symbol()),
        metric: 0.0,
        nodes: 0,
        degenerate: false,
    };
    for b in 0..n_blocks {
        let (h0, h1) = (h.at(2 * b), h.at(2 * b + 1));
        let defect = (h0 - h1).frobenius_norm();
        let hb = if defect > STATIC_BLOCK_TOL {
            if !allow_varying {
                return Err(DemodError::NonStaticBlock { defect });
            }
            (h0 + h1).scale_real(0.5)
        } else {
            h0.clone()
        };
        let (y0, y1) = (y.y.column(2 * b), y.y.column(2 * b + 1));
        let (t1, t2, gain) = alamouti_statistics(&y0, &y1, &hb);
        let (i1, i2) = if gain * amp > 0.0 {
            (c.nearest(t1 / (amp * gain)), c.nearest(t2 / (amp * gain)))
        } else {
            out.degenerate = true;
            (0, 0)
        };
        out.bits.extend(c.bits_of_index(i1));
        out.bits.extend(c.bits_of_index(i2));
        let x = crate::stcodes::encode_alamouti(c.point(i1), c.point(i2));
        out.metric += use_metric(&g[2 * b], &y0, &x.column(0)) + use_metric(&g[2 * b + 1], &y1, &x.column(1));
        out.nodes += 2 * c.size() as u64;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{apply_channel, complex_normal, ChannelParams, FadingMode};
    use crate::stcodes::{encode_trellis, load_trellis, BlockCode, DELAY_DIVERSITY_4STATE};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_h(lr: usize, lt: usize, rng: &mut ChaCha8Rng) -> ComplexMatrix {
        let data = (0..lr * lt).map(|_| complex_normal(rng)).collect();
        ComplexMatrix::from_vec(lr, lt, data).unwrap()
    }

    fn transmit(
        x: &CodewordMatrix,
        h: &FadingRealization,
        es: f64,
        n0: f64,
        rng: &mut ChaCha8Rng,
    ) -> ReceivedFrame {
        let p = ChannelParams::new(x.rows(), h.lr(), 0.0, es, n0, FadingMode::QuasiStatic).unwrap();
        apply_channel(x, h, &p, rng).unwrap()
    }

    fn random_bits(n: usize, rng: &mut ChaCha8Rng) -> Vec<u8> {
        (0..n).map(|_| rng.random_range(0..2u8)).collect()
    }

    #[test]
    fn noiseless_block_round_trips() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let codes = [
            BlockCode::Alamouti(Constellation::qpsk()),
            BlockCode::Alamouti(Constellation::qam16()),
            BlockCode::Golden(Constellation::qpsk()),
            BlockCode::SpatialMultiplex {
                constellation: Constellation::qpsk(),
                lt: 2,
                uses: 1,
            },
        ];
        for code in &codes {
            let cb = code.codebook();
            let disp = code.dispersion();
            for _ in 0..5 {
                let bits = random_bits(code.bits_per_codeword() * 3, &mut rng);
                let mut x = ComplexMatrix::zeros(code.lt(), 3 * code.n_uses());
                for (b, chunk) in bits.chunks(code.bits_per_codeword()).enumerate() {
                    let w = code.encode_bits(chunk).unwrap();
                    for k in 0..code.n_uses() {
                        x.set_column(b * code.n_uses() + k, &w.column(k));
                    }
                }
                let h = FadingRealization::constant(random_h(2, code.lt(), &mut rng), x.cols());
                let y = transmit(&x, &h, 1.0, 1e-300, &mut rng);
                let ml = ml_exhaustive(&y, &h, &cb, 1.0).unwrap();
                assert_eq!(ml.bits, bits, "{}", code.name());
                assert!(ml.metric < 1e-20);
                let sd = sphere_decode(&y, &h, &disp, 1.0).unwrap();
                assert_eq!(sd.bits, bits, "{}", code.name());
                assert!(sd.nodes >= disp.n_symbols() as u64 * 2);
                if let BlockCode::Alamouti(c) = code {
                    let al = alamouti_combine(&y, &h, 1.0, c, false).unwrap();
                    assert_eq!(al.bits, bits);
                }
            }
        }
    }

    #[test]
    fn single_word_codebook() {
        let w = ComplexMatrix::from_real_rows(&[vec![1.0]]).unwrap();
        let cb = BlockCodebook::new(vec![w], 0).unwrap();
        let y = ReceivedFrame {
            y: ComplexMatrix::from_real_rows(&[vec![3.0]]).unwrap(),
            es: 1.0,
            n0: 1.0,
        };
        let h = FadingRealization::constant(ComplexMatrix::identity(1), 1);
        let r = ml_exhaustive(&y, &h, &cb, 1.0).unwrap();
        assert!(r.bits.is_empty());
        assert!((r.metric - 4.0).abs() < 1e-12);
    }

    #[test]
    fn combiner_identity() {
        let c = Constellation::qpsk();
        let (s1, s2) = (c.point(1), c.point(2));
        let x = crate::stcodes::encode_alamouti(s1, s2);
        let h = ComplexMatrix::from_real_rows(&[vec![1.0, 1.0]]).unwrap();
        let y = ComplexMatrix::from_rows(&[vec![
            h.matvec(&x.column(0))[0],
            h.matvec(&x.column(1))[0],
        ]])
        .unwrap();
        let (t1, t2, gain) = alamouti_statistics(&[y[(0, 0)]], &[y[(0, 1)]], &h);
        assert_eq!(gain, 2.0);
        let half = std::f64::consts::FRAC_1_SQRT_2;
        assert!((t1 - s1 * 2.0 * half).norm() < 1e-12);
        assert!((t2 - s2 * 2.0 * half).norm() < 1e-12);
    }

    #[test]
    fn zero_channel_is_degenerate() {
        let c = Constellation::qpsk();
        let y = ReceivedFrame {
            y: ComplexMatrix::from_rows(&[vec![Complex64::new(0.3, 0.1), Complex64::new(-1.0, 0.2)]]).unwrap(),
            es: 1.0,
            n0: 1.0,
        };
        let h = FadingRealization::constant(ComplexMatrix::zeros(1, 2), 2);
        let r = alamouti_combine(&y, &h, 1.0, &c, false).unwrap();
        assert!(r.degenerate);
        assert_eq!(r.bits, vec![0; 4]);
        let ml = ml_exhaustive(&y, &h, &BlockCode::Alamouti(c).codebook(), 1.0).unwrap();
        assert_eq!(ml.bits, vec![0; 4]);
        assert!(ml.degenerate);
    }

    #[test]
    fn varying_block_rejected_unless_allowed() {
        let c = Constellation::qpsk();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let h = FadingRealization::new(vec![random_h(1, 2, &mut rng), random_h(1, 2, &mut rng)]).unwrap();
        let y = ReceivedFrame {
            y: ComplexMatrix::zeros(1, 2),
            es: 1.0,
            n0: 1.0,
        };
        assert!(matches!(
            alamouti_combine(&y, &h, 1.0, &c, false),
            Err(DemodError::NonStaticBlock { .. })
        ));
        assert!(alamouti_combine(&y, &h, 1.0, &c, true).is_ok());
    }

    #[test]
    fn alamouti_matches_exhaustive() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for c in [Constellation::qpsk(), Constellation::qam16()] {
            let code = BlockCode::Alamouti(c.clone());
            let cb = code.codebook();
            for trial in 0..2000 {
                let lr = 1 + trial % 3;
                let bits = random_bits(code.bits_per_codeword(), &mut rng);
                let x = code.encode_bits(&bits).unwrap();
                let h = FadingRealization::constant(random_h(lr, 2, &mut rng), 2);
                let y = transmit(&x, &h, 10.0, 1.0, &mut rng);
                let a = alamouti_combine(&y, &h, 10.0, &c, false).unwrap();
                let m = ml_exhaustive(&y, &h, &cb, 10.0).unwrap();
                assert_eq!(a.bits, m.bits);
                assert!((a.metric - m.metric).abs() < 1e-9 * m.metric.max(1.0));
            }
        }
    }

    #[test]
    fn sphere_matches_exhaustive_spatial_multiplex() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let code = BlockCode::SpatialMultiplex {
            constellation: Constellation::qam16(),
            lt: 2,
            uses: 1,
        };
        let cb = code.codebook();
        let disp = code.dispersion();
        for _ in 0..300 {
            let bits = random_bits(code.bits_per_codeword(), &mut rng);
            let x = code.encode_bits(&bits).unwrap();
            let h = FadingRealization::constant(random_h(3, 2, &mut rng), 1);
            let y = transmit(&x, &h, 10.0, 1.0, &mut rng);
            let s = sphere_decode(&y, &h, &disp, 10.0).unwrap();
            let m = ml_exhaustive(&y, &h, &cb, 10.0).unwrap();
            assert_eq!(s.bits, m.bits);
            assert!((s.metric - m.metric).abs() < 1e-9 * m.metric.max(1.0));
        }
    }

    #[test]
    fn sphere_needs_enough_receivers() {
        let code = BlockCode::Golden(Constellation::qpsk());
        let y = ReceivedFrame {
            y: ComplexMatrix::zeros(1, 2),
            es: 1.0,
            n0: 1.0,
        };
        let h = FadingRealization::constant(ComplexMatrix::zeros(1, 2), 2);
        assert!(matches!(
            sphere_decode(&y, &h, &code.dispersion(), 1.0),
            Err(DemodError::ModelMismatch(_))
        ));
    }

    #[test]
    fn viterbi_noiseless_round_trip() {
        let code = load_trellis(DELAY_DIVERSITY_4STATE).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for steps in [0, 1, 5, 40] {
            let bits = random_bits(steps * code.bits_per_step(), &mut rng);
            let x = encode_trellis(&bits, &code).unwrap();
            let h = FadingRealization::constant(ComplexMatrix::identity(2), x.cols());
            let y = transmit(&x, &h, 1.0, 1e-300, &mut rng);
            let r = viterbi_decode(&y, &h, &code, 1.0).unwrap();
            assert_eq!(r.bits, bits);
            assert!(r.metric.is_finite() && r.metric < 1e-20);
        }
    }

    #[test]
    fn viterbi_matches_path_enumeration() {
        let code = load_trellis(DELAY_DIVERSITY_4STATE).unwrap();
        let steps = 4;
        let nbits = steps * code.bits_per_step();
        let words = (0..1usize << nbits)
            .map(|i| encode_trellis(&index_to_bits(i, nbits), &code).unwrap())
            .collect();
        let cb = BlockCodebook::new(words, nbits).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..200 {
            let bits = random_bits(nbits, &mut rng);
            let x = encode_trellis(&bits, &code).unwrap();
            let gains = (0..x.cols()).map(|_| random_h(1, 2, &mut rng)).collect();
            let h = FadingRealization::new(gains).unwrap();
            let y = transmit(&x, &h, 2.0, 1.0, &mut rng);
            let v = viterbi_decode(&y, &h, &code, 2.0).unwrap();
            let m = ml_exhaustive(&y, &h, &cb, 2.0).unwrap();
            assert_eq!(v.bits, m.bits);
            assert!((v.metric - m.metric).abs() < 1e-9 * m.metric.max(1.0));
        }
    }

    #[test]
    fn frame_shape_errors() {
        let cb = BlockCode::Golden(Constellation::qpsk()).codebook();
        let y = ReceivedFrame {
            y: ComplexMatrix::zeros(2, 3),
            es: 1.0,
            n0: 1.0,
        };
        let h = FadingRealization::constant(ComplexMatrix::zeros(2, 2), 3);
        assert!(matches!(ml_exhaustive(&y, &h, &cb, 1.0), Err(DemodError::ShapeMismatch(_))));
        let h = FadingRealization::constant(ComplexMatrix::zeros(2, 2), 2);
        assert!(matches!(ml_exhaustive(&y, &h, &cb, 1.0), Err(DemodError::ShapeMismatch(_))));
    }
}
