//! Flat Rayleigh fading with Clarke temporal correlation `J0(2π f_D T m)` and
//! Kronecker spatial correlation from array geometry, plus the discrete
//! matched-filter signal model `Y(k) = H(k) √Es X(k) + N(k)`.

use std::f64::consts::PI;
use std::str::FromStr;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::Deserialize;

use crate::mathcore::{
    bessel_j0, real_symmetric_cholesky, real_toeplitz_cholesky, ComplexMatrix, MathError, RealCholesky,
};
use crate::stcodes::CodewordMatrix;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ChannelError {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("invalid channel parameters: {0}")]
    InvalidParams(String),
    #[error("unknown array geometry `{0}`")]
    UnknownGeometry(String),
    #[error(transparent)]
    Math(#[from] MathError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FadingMode {
    /// Symbol-by-symbol variation following Clarke's autocorrelation.
    ClarkeVarying,
    /// One independent draw per frame.
    QuasiStatic,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelParams {
    pub lt: usize,
    pub lr: usize,
    /// Normalized Doppler `f_D T`, cycles per symbol.
    pub fdt: f64,
    pub es: f64,
    pub n0: f64,
    pub mode: FadingMode,
}

impl ChannelParams {
    pub fn new(lt: usize, lr: usize, fdt: f64, es: f64, n0: f64, mode: FadingMode) -> Result<Self, ChannelError> {
        if lt == 0 || lr == 0 {
            return Err(ChannelError::InvalidParams("antenna counts must be positive".into()));
        }
        if !(fdt >= 0.0 && fdt.is_finite()) {
            return Err(ChannelError::InvalidParams(format!("fdT must be finite and ≥ 0, got {fdt}")));
        }
        if !(es > 0.0 && es.is_finite()) {
            return Err(ChannelError::InvalidParams(format!("Es must be positive, got {es}")));
        }
        if !(n0 > 0.0 && n0.is_finite()) {
            return Err(ChannelError::InvalidParams(format!("N0 must be positive, got {n0}")));
        }
        Ok(Self { lt, lr, fdt, es, n0, mode })
    }
}

/// Separation (wavelengths) at or beyond which elements are taken as uncorrelated.
pub const INDEPENDENT_SPACING: f64 = 1e6;

/// Element positions, in wavelengths, of one antenna array.
#[derive(Debug, Clone, PartialEq)]
pub struct ArrayGeometry {
    positions: Vec<[f64; 2]>,
}

impl ArrayGeometry {
    pub fn new(positions: Vec<[f64; 2]>) -> Result<Self, ChannelError> {
        if positions.is_empty() {
            return Err(ChannelError::InvalidParams("geometry needs at least one element".into()));
        }
        if positions.iter().flatten().any(|v| !v.is_finite()) {
            return Err(ChannelError::InvalidParams("geometry positions must be finite".into()));
        }
        Ok(Self { positions })
    }

    /// `n` elements on a line with the given spacing.
    pub fn linear(n: usize, spacing: f64) -> Result<Self, ChannelError> {
        Self::new((0..n).map(|i| [i as f64 * spacing, 0.0]).collect())
    }

    /// Up to four elements on the corners of a square, walked around the
    /// perimeter so that consecutive elements are adjacent.
    pub fn square(n: usize, side: f64) -> Result<Self, ChannelError> {
        if n > 4 {
            return Err(ChannelError::InvalidParams(format!("a square array has 4 corners, asked for {n}")));
        }
        let corners = [[0.0, 0.0], [side, 0.0], [side, side], [0.0, side]];
        Self::new(corners[..n].to_vec())
    }

    /// Named presets `tx_linear_<spacing>`, `rx_square_<side>` (also
    /// `linear_*`/`square_*`), or `white` for spatially independent elements.
    pub fn preset(name: &str, n: usize) -> Result<Self, ChannelError> {
        let unknown = || ChannelError::UnknownGeometry(name.to_string());
        if name == "white" {
            // spatial_correlation zeroes anything this far apart
            return Self::linear(n, INDEPENDENT_SPACING);
        }
        let body = name
            .strip_prefix("tx_")
            .or_else(|| name.strip_prefix("rx_"))
            .unwrap_or(name);
        if let Some(d) = body.strip_prefix("linear_") {
            let d = f64::from_str(d).map_err(|_| unknown())?;
            return Self::linear(n, d);
        }
        if let Some(d) = body.strip_prefix("square_") {
            let d = f64::from_str(d).map_err(|_| unknown())?;
            return Self::square(n, d);
        }
        Err(unknown())
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn positions(&self) -> &[[f64; 2]] {
        &self.positions
    }

    fn distance(&self, a: usize, b: usize) -> f64 {
        let [x1, y1] = self.positions[a];
        let [x2, y2] = self.positions[b];
        (x1 - x2).hypot(y1 - y2)
    }
}

/// Isotropic-scattering spatial correlation: entries `J0(2π d_mn)`.
pub fn spatial_correlation(g: &ArrayGeometry) -> Result<ComplexMatrix, ChannelError> {
    let n = g.len();
    let mut r = ComplexMatrix::zeros(n, n);
    for a in 0..n {
        for b in 0..n {
            let d = g.distance(a, b);
            let v = if d >= INDEPENDENT_SPACING { 0.0 } else { bessel_j0(2.0 * PI * d) };
            r[(a, b)] = Complex64::new(if a == b { 1.0 } else { v }, 0.0);
        }
    }
    real_symmetric_cholesky(&r)?;
    Ok(r)
}

/// `H(k)` for k = 0..N_f, each `lr × lt`.
#[derive(Debug, Clone, PartialEq)]
pub struct FadingRealization {
    gains: Vec<ComplexMatrix>,
}

impl FadingRealization {
    pub fn new(gains: Vec<ComplexMatrix>) -> Result<Self, ChannelError> {
        if let Some(first) = gains.first() {
            if gains.iter().any(|g| g.shape() != first.shape()) {
                return Err(ChannelError::ShapeMismatch("gain matrices differ in shape".into()));
            }
        }
        Ok(Self { gains })
    }

    /// The same matrix repeated `n` times.
    pub fn constant(h: ComplexMatrix, n: usize) -> Self {
        Self { gains: vec![h; n] }
    }

    pub fn len(&self) -> usize {
        self.gains.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gains.is_empty()
    }

    pub fn lr(&self) -> usize {
        self.gains.first().map_or(0, ComplexMatrix::rows)
    }

    pub fn lt(&self) -> usize {
        self.gains.first().map_or(0, ComplexMatrix::cols)
    }

    pub fn at(&self, k: usize) -> &ComplexMatrix {
        &self.gains[k]
    }

    pub fn gains(&self) -> &[ComplexMatrix] {
        &self.gains
    }

    /// Selects the given time indices, in order.
    pub fn gather(&self, indices: &[usize]) -> Self {
        Self {
            gains: indices.iter().map(|&k| self.gains[k].clone()).collect(),
        }
    }

    /// Keeps the first `lr` receive antennas.
    pub fn truncate_rx(&self, lr: usize) -> Self {
        Self {
            gains: self.gains.iter().map(|g| g.top_rows(lr)).collect(),
        }
    }

    /// Path gain `H_ij(k)` over time.
    pub fn path(&self, i: usize, j: usize) -> Vec<Complex64> {
        self.gains.iter().map(|g| g[(i, j)]).collect()
    }
}

/// Received matched-filter outputs, `lr × n_uses`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReceivedFrame {
    pub y: ComplexMatrix,
    pub es: f64,
    pub n0: f64,
}

impl ReceivedFrame {
    pub fn n_uses(&self) -> usize {
        self.y.cols()
    }

    pub fn lr(&self) -> usize {
        self.y.rows()
    }

    pub fn gather(&self, indices: &[usize]) -> Self {
        let mut y = ComplexMatrix::zeros(self.lr(), indices.len());
        for (dst, &src) in indices.iter().enumerate() {
            y.set_column(dst, &self.y.column(src));
        }
        Self { y, es: self.es, n0: self.n0 }
    }

    pub fn truncate_rx(&self, lr: usize) -> Self {
        Self {
            y: self.y.top_rows(lr),
            es: self.es,
            n0: self.n0,
        }
    }
}

/// Circularly symmetric complex Gaussian with unit variance.
pub fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Precomputed factors for repeated fading draws with fixed parameters.
#[derive(Debug, Clone)]
pub struct FadingGenerator {
    nf: usize,
    lt: usize,
    lr: usize,
    /// `None` when the process is constant over the frame.
    temporal: Option<RealCholesky>,
    tx: RealCholesky,
    rx: RealCholesky,
}

impl FadingGenerator {
    pub fn new(nf: usize, p: &ChannelParams, rtx: &ComplexMatrix, rrx: &ComplexMatrix) -> Result<Self, ChannelError> {
        if rtx.shape() != (p.lt, p.lt) || rrx.shape() != (p.lr, p.lr) {
            return Err(ChannelError::ShapeMismatch(format!(
                "correlations {:?}/{:?} for lt={} lr={}",
                rtx.shape(),
                rrx.shape(),
                p.lt,
                p.lr
            )));
        }
        for r in [rtx, rrx] {
            if (0..r.rows()).any(|i| (r[(i, i)].re - 1.0).abs() > 1e-9) {
                return Err(ChannelError::InvalidParams("correlation matrices need a unit diagonal".into()));
            }
        }
        let temporal = match p.mode {
            FadingMode::QuasiStatic => None,
            FadingMode::ClarkeVarying if p.fdt == 0.0 || nf <= 1 => None,
            FadingMode::ClarkeVarying => {
                let row: Vec<f64> = (0..nf).map(|m| bessel_j0(2.0 * PI * p.fdt * m as f64)).collect();
                Some(real_toeplitz_cholesky(&row)?)
            }
        };
        Ok(Self {
            nf,
            lt: p.lt,
            lr: p.lr,
            temporal,
            tx: real_symmetric_cholesky(rtx)?,
            rx: real_symmetric_cholesky(rrx)?,
        })
    }

    /// Draws one frame. White samples are consumed receive-antenna-major, so
    /// the first rows of a larger array reproduce a smaller one exactly.
    pub fn generate<R: Rng + ?Sized>(&self, rng: &mut R) -> FadingRealization {
        let (lt, lr, nf) = (self.lt, self.lr, self.nf);
        // white[i][j] = time series for path (i, j)
        let white: Vec<Vec<Vec<Complex64>>> = (0..lr)
            .map(|_| {
                (0..lt)
                    .map(|_| match &self.temporal {
                        Some(l) => {
                            let w: Vec<Complex64> = (0..nf).map(|_| complex_normal(rng)).collect();
                            l.mul_vec(&w)
                        }
                        None => vec![complex_normal(rng); nf],
                    })
                    .collect()
            })
            .collect();

        let gains = (0..nf)
            .map(|k| {
                // H = Lr · W · Ltᵀ
                let mut h = ComplexMatrix::zeros(lr, lt);
                for i in 0..lr {
                    for j in 0..lt {
                        let mut acc = Complex64::new(0.0, 0.0);
                        for a in 0..=i {
                            let lra = self.rx.get(i, a);
                            for b in 0..=j {
                                acc += white[a][b][k] * (lra * self.tx.get(j, b));
                            }
                        }
                        h[(i, j)] = acc;
                    }
                }
                h
            })
            .collect();
        FadingRealization { gains }
    }
}

/// One frame of correlated Rayleigh fading.
pub fn generate_fading<R: Rng + ?Sized>(
    nf: usize,
    p: &ChannelParams,
    rtx: &ComplexMatrix,
    rrx: &ComplexMatrix,
    rng: &mut R,
) -> Result<FadingRealization, ChannelError> {
    Ok(FadingGenerator::new(nf, p, rtx, rrx)?.generate(rng))
}

/// Noise-free channel output `H(k) √Es X(k)`.
pub fn noiseless_output(x: &CodewordMatrix, h: &FadingRealization, es: f64) -> Result<ComplexMatrix, ChannelError> {
    if x.cols() != h.len() || x.rows() != h.lt() {
        return Err(ChannelError::ShapeMismatch(format!(
            "codeword {:?} against {} gains of {}×{}",
            x.shape(),
            h.len(),
            h.lr(),
            h.lt()
        )));
    }
    let amp = es.sqrt();
    let mut y = ComplexMatrix::zeros(h.lr(), x.cols());
    for k in 0..x.cols() {
        let col: Vec<Complex64> = h.at(k).matvec(&x.column(k)).into_iter().map(|z| z * amp).collect();
        y.set_column(k, &col);
    }
    Ok(y)
}

/// `Y(k) = H(k) √Es X(k) + N(k)`, noise variance `N0/2` per real dimension.
/// Noise is drawn receive-antenna-major.
pub fn apply_channel<R: Rng + ?Sized>(
    x: &CodewordMatrix,
    h: &FadingRealization,
    p: &ChannelParams,
    rng: &mut R,
) -> Result<ReceivedFrame, ChannelError> {
    if h.lr() != p.lr || x.rows() != p.lt {
        return Err(ChannelError::ShapeMismatch(format!(
            "params lt={} lr={} vs codeword rows {} and gains lr {}",
            p.lt,
            p.lr,
            x.rows(),
            h.lr()
        )));
    }
    let mut y = noiseless_output(x, h, p.es)?;
    let sigma = p.n0.sqrt();
    for i in 0..p.lr {
        for k in 0..x.cols() {
            y[(i, k)] += complex_normal(rng) * sigma;
        }
    }
    Ok(ReceivedFrame { y, es: p.es, n0: p.n0 })
}
