//! Superframe layout: a preamble placeholder, a fixed number of data frames,
//! then a silence gap used to measure the noise level.

use std::ops::Range;

use num_complex::Complex64;

use crate::mathcore::ComplexMatrix;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SuperframeError {
    #[error("slot mismatch: {0}")]
    SlotMismatch(String),
    #[error("no samples to estimate noise from")]
    Empty,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SuperframeLayout {
    pub preamble_len: usize,
    pub n_slots: usize,
    pub frame_len: usize,
    pub silence_len: usize,
}

impl Default for SuperframeLayout {
    fn default() -> Self {
        Self {
            preamble_len: 32,
            n_slots: 42,
            frame_len: 300,
            silence_len: 70,
        }
    }
}

impl SuperframeLayout {
    pub fn total_len(&self) -> usize {
        self.preamble_len + self.n_slots * self.frame_len + self.silence_len
    }

    pub fn slot_range(&self, i: usize) -> Range<usize> {
        let start = self.preamble_len + i * self.frame_len;
        start..start + self.frame_len
    }

    pub fn silence_range(&self) -> Range<usize> {
        let start = self.preamble_len + self.n_slots * self.frame_len;
        start..start + self.silence_len
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Superframe {
    pub layout: SuperframeLayout,
    /// `lt × total_len` transmit stream.
    pub stream: ComplexMatrix,
    /// Column range of each frame slot in `stream`.
    pub slots: Vec<Range<usize>>,
    pub silence: Range<usize>,
}

impl Superframe {
    /// Copy of frame slot `i`.
    pub fn slot(&self, i: usize) -> ComplexMatrix {
        let r = &self.slots[i];
        let mut out = ComplexMatrix::zeros(self.stream.rows(), r.len());
        for (dst, src) in r.clone().enumerate() {
            out.set_column(dst, &self.stream.column(src));
        }
        out
    }
}

/// Concatenates the frames behind an alternating ±1 preamble placeholder and
/// ahead of an all-zero silence gap.
pub fn assemble_superframe(frames: &[ComplexMatrix], layout: &SuperframeLayout) -> Result<Superframe, SuperframeError> {
    if frames.len() != layout.n_slots {
        return Err(SuperframeError::SlotMismatch(format!(
            "{} frames for {} slots",
            frames.len(),
            layout.n_slots
        )));
    }
    let lt = frames.first().map_or(1, ComplexMatrix::rows);
    if let Some(i) = frames.iter().position(|f| f.shape() != (lt, layout.frame_len)) {
        return Err(SuperframeError::SlotMismatch(format!(
            "frame {i} is {:?}, slots are {lt}×{}",
            frames[i].shape(),
            layout.frame_len
        )));
    }
    let mut stream = ComplexMatrix::zeros(lt, layout.total_len());
    let amp = 1.0 / (lt as f64).sqrt();
    for k in 0..layout.preamble_len {
        let v = if k % 2 == 0 { amp } else { -amp };
        stream.set_column(k, &vec![Complex64::new(v, 0.0); lt]);
    }
    let slots: Vec<Range<usize>> = (0..layout.n_slots).map(|i| layout.slot_range(i)).collect();
    for (f, r) in frames.iter().zip(&slots) {
        for (src, dst) in r.clone().enumerate() {
            stream.set_column(dst, &f.column(src));
        }
    }
    Ok(Superframe {
        layout: *layout,
        stream,
        slots,
        silence: layout.silence_range(),
    })
}

/// Noise level `N0` as the mean power of received silence samples.
pub fn estimate_noise(silence: &[Complex64]) -> Result<f64, SuperframeError> {
    if silence.is_empty() {
        return Err(SuperframeError::Empty);
    }
    Ok(silence.iter().map(Complex64::norm_sqr).sum::<f64>() / silence.len() as f64)
}
