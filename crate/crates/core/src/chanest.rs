//! Pilot-symbol-assisted channel estimation: orthogonal pilot blocks placed
//! flush with both frame edges and uniformly in between, followed by FIR
//! Wiener interpolation of the per-block raw estimates.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::channel::{FadingRealization, ReceivedFrame};
use crate::mathcore::{bessel_j0, ComplexMatrix, RealCholesky};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EstimationError {
    #[error("invalid pilot count: {0}")]
    InvalidCount(String),
    #[error("pilot covariance is singular even after diagonal loading")]
    SingularCovariance,
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
}

/// Pilot placement for one frame.
#[derive(Debug, Clone, PartialEq)]
pub struct PilotMap {
    nf: usize,
    lt: usize,
    block_starts: Vec<usize>,
    /// `lt × lt`, rows are antennas and columns consecutive uses; `P Pᴴ = I`.
    pilot: ComplexMatrix,
    pilot_positions: Vec<usize>,
    data_positions: Vec<usize>,
}

/// Unitary DFT pilot matrix.
fn dft_pilot(lt: usize) -> ComplexMatrix {
    let mut p = ComplexMatrix::zeros(lt, lt);
    let scale = 1.0 / (lt as f64).sqrt();
    for j in 0..lt {
        for k in 0..lt {
            let phase = -2.0 * PI * (j * k) as f64 / lt as f64;
            p[(j, k)] = Complex64::from_polar(scale, phase);
        }
    }
    p
}

/// Lays out `n_pilot / lt` blocks of `lt` uses each: the first at the start of
/// the frame, the last at its end, the rest evenly spaced in between.
pub fn build_pilot_map(nf: usize, lt: usize, n_pilot: usize) -> Result<PilotMap, EstimationError> {
    let bad = |m: String| Err(EstimationError::InvalidCount(m));
    if lt == 0 || n_pilot == 0 || n_pilot % lt != 0 {
        return bad(format!("{n_pilot} pilots is not a positive multiple of lt={lt}"));
    }
    if n_pilot >= nf {
        return bad(format!("{n_pilot} pilots leave no data in a {nf}-use frame"));
    }
    let nb = n_pilot / lt;
    let block_starts: Vec<usize> = if nb == 1 {
        vec![0]
    } else {
        (0..nb)
            .map(|b| (b as f64 * (nf - lt) as f64 / (nb - 1) as f64).round() as usize)
            .collect()
    };
    if block_starts.windows(2).any(|w| w[1] < w[0] + lt) {
        return bad(format!("{nb} blocks of {lt} uses overlap in a {nf}-use frame"));
    }
    let mut is_pilot = vec![false; nf];
    for &s in &block_starts {
        is_pilot[s..s + lt].iter_mut().for_each(|f| *f = true);
    }
    let pilot_positions = (0..nf).filter(|&k| is_pilot[k]).collect();
    let data_positions = (0..nf).filter(|&k| !is_pilot[k]).collect();
    Ok(PilotMap {
        nf,
        lt,
        block_starts,
        pilot: dft_pilot(lt),
        pilot_positions,
        data_positions,
    })
}

impl PilotMap {
    pub fn nf(&self) -> usize {
        self.nf
    }

    pub fn lt(&self) -> usize {
        self.lt
    }

    pub fn n_blocks(&self) -> usize {
        self.block_starts.len()
    }

    pub fn block_starts(&self) -> &[usize] {
        &self.block_starts
    }

    pub fn pilot_matrix(&self) -> &ComplexMatrix {
        &self.pilot
    }

    pub fn pilot_positions(&self) -> &[usize] {
        &self.pilot_positions
    }

    pub fn data_positions(&self) -> &[usize] {
        &self.data_positions
    }

    /// Time of the block centre, in uses.
    fn block_center(&self, b: usize) -> f64 {
        self.block_starts[b] as f64 + (self.lt - 1) as f64 / 2.0
    }

    /// Builds the full `lt × nf` transmit matrix by writing pilot blocks and
    /// filling data positions, in order, from `data` (`lt × n_data`).
    pub fn assemble(&self, data: &ComplexMatrix) -> Result<ComplexMatrix, EstimationError> {
        if data.shape() != (self.lt, self.data_positions.len()) {
            return Err(EstimationError::ShapeMismatch(format!(
                "data block {:?}, expected {}×{}",
                data.shape(),
                self.lt,
                self.data_positions.len()
            )));
        }
        let mut x = ComplexMatrix::zeros(self.lt, self.nf);
        for &s in &self.block_starts {
            for k in 0..self.lt {
                x.set_column(s + k, &self.pilot.column(k));
            }
        }
        for (col, &k) in self.data_positions.iter().enumerate() {
            x.set_column(k, &data.column(col));
        }
        Ok(x)
    }
}

/// Per-position interpolation weights over the nearest pilot blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct WienerInterpolator {
    pub taps: usize,
    pub design_fdt: f64,
    /// Raw-estimate SNR (`Es/N0` of a pilot use) in dB the filter was designed for.
    pub design_snr_db: f64,
    /// For every frame position: (block indices, weights).
    rows: Vec<(Vec<usize>, Vec<f64>)>,
    mmse: Vec<f64>,
}

impl WienerInterpolator {
    pub fn blocks(&self, k: usize) -> &[usize] {
        &self.rows[k].0
    }

    pub fn weights(&self, k: usize) -> &[f64] {
        &self.rows[k].1
    }

    /// Model MMSE `1 − pᵀR⁻¹p` at position `k`.
    pub fn mmse_at(&self, k: usize) -> f64 {
        self.mmse[k]
    }

    /// Model MMSE averaged over the given positions.
    pub fn mean_mmse(&self, positions: &[usize]) -> f64 {
        positions.iter().map(|&k| self.mmse[k]).sum::<f64>() / positions.len() as f64
    }
}

/// Designs MMSE interpolation weights for every position of the frame. The
/// raw block estimate is modelled as the channel at the block centre plus
/// white noise of variance `10^(−snr/10)`; `f64::INFINITY` means noiseless.
pub fn design_wiener(
    map: &PilotMap,
    fdt_design: f64,
    snr_design_db: f64,
    taps: usize,
) -> Result<WienerInterpolator, EstimationError> {
    let nb = map.n_blocks();
    if taps == 0 || taps > nb {
        return Err(EstimationError::InvalidCount(format!("{taps} taps with {nb} pilot blocks")));
    }
    if !(fdt_design >= 0.0) || snr_design_db.is_nan() {
        return Err(EstimationError::InvalidCount("design fdT must be ≥ 0 and SNR a number".into()));
    }
    let noise = 10f64.powf(-snr_design_db / 10.0);
    let r = |lag: f64| bessel_j0(2.0 * PI * fdt_design * lag);

    let mut rows = Vec::with_capacity(map.nf);
    let mut mmse = Vec::with_capacity(map.nf);
    for k in 0..map.nf {
        let t = k as f64;
        let mut order: Vec<usize> = (0..nb).collect();
        order.sort_by(|&a, &b| {
            let da = (map.block_center(a) - t).abs();
            let db = (map.block_center(b) - t).abs();
            da.total_cmp(&db).then(a.cmp(&b))
        });
        let mut blocks = order[..taps].to_vec();
        blocks.sort_unstable();

        let mut cov = vec![0.0; taps * taps];
        for (a, &ba) in blocks.iter().enumerate() {
            for (b, &bb) in blocks.iter().enumerate() {
                cov[a * taps + b] = r(map.block_center(ba) - map.block_center(bb));
            }
            cov[a * taps + a] += noise;
        }
        let p: Vec<f64> = blocks.iter().map(|&b| r(map.block_center(b) - t)).collect();
        let chol = RealCholesky::factor(taps, &cov).map_err(|_| EstimationError::SingularCovariance)?;
        let w = chol.solve(&p);
        if w.iter().any(|v| !v.is_finite()) {
            return Err(EstimationError::SingularCovariance);
        }
        let explained: f64 = w.iter().zip(&p).map(|(a, b)| a * b).sum();
        mmse.push((1.0 - explained).max(0.0));
        rows.push((blocks, w));
    }
    Ok(WienerInterpolator {
        taps,
        design_fdt: fdt_design,
        design_snr_db: snr_design_db,
        rows,
        mmse,
    })
}

/// Raw least-squares estimate per pilot block: `Y_b Pᴴ / √Es`, each `lr × lt`.
pub fn raw_block_estimates(y: &ReceivedFrame, map: &PilotMap) -> Result<Vec<ComplexMatrix>, EstimationError> {
    if y.n_uses() != map.nf {
        return Err(EstimationError::ShapeMismatch(format!(
            "frame has {} uses, pilot map expects {}",
            y.n_uses(),
            map.nf
        )));
    }
    let lr = y.lr();
    let lt = map.lt;
    let p_adj = map.pilot.adjoint();
    let inv_amp = 1.0 / y.es.sqrt();
    Ok(map
        .block_starts
        .iter()
        .map(|&s| {
            let mut yb = ComplexMatrix::zeros(lr, lt);
            for k in 0..lt {
                yb.set_column(k, &y.y.column(s + k));
            }
            (&yb * &p_adj).scale_real(inv_amp)
        })
        .collect())
}

/// Interpolated channel estimate at every position of the frame.
pub fn estimate_channel(
    y: &ReceivedFrame,
    map: &PilotMap,
    w: &WienerInterpolator,
) -> Result<FadingRealization, EstimationError> {
    if w.rows.len() != map.nf {
        return Err(EstimationError::ShapeMismatch(format!(
            "interpolator covers {} positions, frame has {}",
            w.rows.len(),
            map.nf
        )));
    }
    let raw = raw_block_estimates(y, map)?;
    let (lr, lt) = (y.lr(), map.lt);
    let gains = w
        .rows
        .iter()
        .map(|(blocks, weights)| {
            let mut h = ComplexMatrix::zeros(lr, lt);
            for (&b, &c) in blocks.iter().zip(weights) {
                h = &h + &raw[b].scale_real(c);
            }
            h
        })
        .collect();
    Ok(FadingRealization::new(gains).expect("uniform shapes"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{apply_channel, ChannelParams, FadingMode};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn paper_frame_layout() {
        let m = build_pilot_map(300, 2, 72).unwrap();
        assert_eq!(m.n_blocks(), 36);
        assert_eq!(m.block_starts()[0], 0);
        assert_eq!(*m.block_starts().last().unwrap(), 298);
        assert_eq!(m.data_positions().len(), 228);
        assert_eq!(m.pilot_positions().len(), 72);
        assert!((300.0_f64 / 228.0 - 1.316).abs() < 1e-3);
    }

    #[test]
    fn edge_rule_single_antenna() {
        let m = build_pilot_map(10, 1, 2).unwrap();
        assert_eq!(m.pilot_positions(), &[0, 9]);
    }

    #[test]
    fn invalid_counts() {
        assert!(build_pilot_map(300, 2, 71).is_err());
        assert!(build_pilot_map(10, 1, 10).is_err());
        assert!(build_pilot_map(10, 2, 0).is_err());
        // 4 blocks of 3 cannot fit in 10 uses without overlap
        assert!(build_pilot_map(10, 3, 12).is_err());
    }

    #[test]
    fn pilots_are_orthogonal() {
        for lt in 1..=4 {
            let p = dft_pilot(lt);
            let g = &p * &p.adjoint();
            assert!((&g - &ComplexMatrix::identity(lt)).frobenius_norm() < 1e-12);
        }
    }

    #[test]
    fn dc_pass_through() {
        let m = build_pilot_map(300, 2, 72).unwrap();
        let w = design_wiener(&m, 0.0, f64::INFINITY, 20).unwrap();
        for k in 0..300 {
            let s: f64 = w.weights(k).iter().sum();
            assert!((s - 1.0).abs() < 1e-6, "position {k}: {s}");
        }
        assert!(w.mean_mmse(m.data_positions()) < 1e-6);
    }

    #[test]
    fn mmse_in_unit_interval() {
        let m = build_pilot_map(300, 2, 72).unwrap();
        let w = design_wiener(&m, 0.01, 30.0, 20).unwrap();
        for &k in m.data_positions() {
            let e = w.mmse_at(k);
            assert!(e > 0.0 && e < 1.0, "{k}: {e}");
        }
    }

    #[test]
    fn mmse_oracle_by_direct_inverse() {
        // Tiny case: 2 blocks, data at the midpoint; invert the 2×2 by hand.
        let m = build_pilot_map(5, 1, 2).unwrap();
        let (fdt, snr_db) = (0.05, 10.0);
        let w = design_wiener(&m, fdt, snr_db, 2).unwrap();
        let r = |l: f64| bessel_j0(2.0 * PI * fdt * l);
        let n = 0.1;
        let (a, b) = (1.0 + n, r(4.0));
        let det = a * a - b * b;
        let p = [r(2.0), r(2.0)];
        let wt = [(a * p[0] - b * p[1]) / det, (a * p[1] - b * p[0]) / det];
        assert!((w.weights(2)[0] - wt[0]).abs() < 1e-12);
        assert!((w.weights(2)[1] - wt[1]).abs() < 1e-12);
        let mmse = 1.0 - wt[0] * p[0] - wt[1] * p[1];
        assert!((w.mmse_at(2) - mmse).abs() < 1e-12);
    }

    #[test]
    fn symmetric_pilots_give_mirrored_weights() {
        let m = build_pilot_map(101, 1, 11).unwrap();
        let w = design_wiener(&m, 0.01, 20.0, 4).unwrap();
        // blocks at 0,10,...,100; position 45 and 55 mirror each other
        let a = w.weights(45);
        let b = w.weights(55);
        for i in 0..4 {
            assert!((a[i] - b[3 - i]).abs() < 1e-12);
        }
    }

    #[test]
    fn too_many_taps() {
        let m = build_pilot_map(300, 2, 72).unwrap();
        assert!(design_wiener(&m, 0.01, 30.0, 37).is_err());
        assert!(design_wiener(&m, 0.01, 30.0, 0).is_err());
    }

    #[test]
    fn noiseless_constant_channel_recovered() {
        let m = build_pilot_map(300, 2, 72).unwrap();
        let w = design_wiener(&m, 0.0, f64::INFINITY, 20).unwrap();
        let h = ComplexMatrix::from_rows(&[
            vec![Complex64::new(0.3, -1.1), Complex64::new(-0.7, 0.2)],
            vec![Complex64::new(1.4, 0.5), Complex64::new(0.1, 0.9)],
        ])
        .unwrap();
        let data = ComplexMatrix::zeros(2, 228);
        let x = m.assemble(&data).unwrap();
        let fading = FadingRealization::constant(h.clone(), 300);
        let p = ChannelParams::new(2, 2, 0.0, 3.0, 1e-300, FadingMode::QuasiStatic).unwrap();
        let y = apply_channel(&x, &fading, &p, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        let est = estimate_channel(&y, &m, &w).unwrap();
        for k in 0..300 {
            assert!((est.at(k) - &h).frobenius_norm() < 1e-9);
        }
    }

    #[test]
    fn shape_checks() {
        let m = build_pilot_map(300, 2, 72).unwrap();
        assert!(m.assemble(&ComplexMatrix::zeros(2, 227)).is_err());
        let y = ReceivedFrame {
            y: ComplexMatrix::zeros(2, 299),
            es: 1.0,
            n0: 1.0,
        };
        assert!(matches!(raw_block_estimates(&y, &m), Err(EstimationError::ShapeMismatch(_))));
    }
}
