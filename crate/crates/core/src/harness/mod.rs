//! Monte Carlo driver: builds an experiment from a [`SweepConfig`], runs an
//! Eb/N0 sweep with deterministic per-frame random streams, and reports
//! FER/BER with confidence intervals.

mod config;
mod superframe;

use std::io::Write;
use std::sync::OnceLock;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

pub use config::{
    ChannelConfig, CodeConfig, CodeKind, ConfigError, CsiMode, DecoderConfig, DecoderMethod, FrameConfig,
    GeometrySpec, PilotConfig, StoppingConfig, SweepConfig,
};
pub use superframe::{assemble_superframe, estimate_noise, Superframe, SuperframeError, SuperframeLayout};

use crate::chanest::{build_pilot_map, design_wiener, estimate_channel, PilotMap, WienerInterpolator};
use crate::channel::{
    apply_channel, spatial_correlation, ChannelParams, FadingGenerator, FadingRealization, ReceivedFrame,
};
use crate::demod::{
    alamouti_combine, ml_exhaustive, sphere_decode, viterbi_decode, DecodeResult, DemodError, STATIC_BLOCK_TOL,
};
use crate::mathcore::{ComplexMatrix, Constellation, ConstellationKind};
use crate::stcodes::{
    encode_trellis, load_trellis, BlockCode, BlockCodebook, CodewordMatrix, LinearDispersionCode, TrellisCode,
    DELAY_DIVERSITY_4STATE,
};

/// Two-sided 95% standard normal quantile.
const Z95: f64 = 1.959_963_984_540_054;

/// Frames simulated per batch before the stopping rule is checked.
const CHUNK: u64 = 256;

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

/// What a random stream is used for; each gets an independent key.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum StreamPurpose {
    Bits = 1,
    Fading = 2,
    Noise = 3,
}

/// Independent stream for one (grid point, frame, purpose). The key holds the
/// master seed, grid index and purpose; the frame index selects the stream,
/// so any frame can be regenerated on its own.
pub fn frame_rng(master: u64, snr_idx: usize, frame_idx: u64, purpose: StreamPurpose) -> ChaCha8Rng {
    let mut seed = [0u8; 32];
    seed[..8].copy_from_slice(&master.to_le_bytes());
    seed[8..16].copy_from_slice(&(snr_idx as u64).to_le_bytes());
    seed[16..24].copy_from_slice(&(purpose as u64).to_le_bytes());
    seed[24..].copy_from_slice(b"stc-lab\0");
    let mut rng = ChaCha8Rng::from_seed(seed);
    rng.set_stream(frame_idx);
    rng
}

/// Wilson score interval at 95% for `k` successes in `n` trials.
pub fn wilson_interval(k: u64, n: u64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let n = n as f64;
    let p = k as f64 / n;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = Z95 * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    let lo = if k == 0 { 0.0 } else { (center - half).max(0.0) };
    let hi = if k as f64 == n { 1.0 } else { (center + half).min(1.0) };
    (lo, hi)
}

#[derive(Debug, Clone)]
enum SimCode {
    Block {
        code: BlockCode,
        codebook: OnceLock<BlockCodebook>,
        dispersion: LinearDispersionCode,
    },
    Trellis(TrellisCode),
}

impl SimCode {
    fn lt(&self) -> usize {
        match self {
            Self::Block { code, .. } => code.lt(),
            Self::Trellis(t) => t.lt(),
        }
    }
}

/// A fully resolved simulation set-up.
#[derive(Debug, Clone)]
pub struct Experiment {
    cfg: SweepConfig,
    code: SimCode,
    lt: usize,
    lr: usize,
    /// Uses left for data after pilots.
    data_uses: usize,
    info_bits: usize,
    generator: FadingGenerator,
    pilots: Option<(PilotMap, WienerInterpolator)>,
}

/// One simulated frame before decoding.
#[derive(Debug, Clone)]
pub struct FrameSample {
    pub bits: Vec<u8>,
    pub x: CodewordMatrix,
    pub h: FadingRealization,
    pub y: ReceivedFrame,
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
struct FrameOutcome {
    bit_errors: u64,
    bits: u64,
    nodes: u64,
}

fn resolve_code(c: &CodeConfig) -> Result<SimCode, ConfigError> {
    let constellation = || -> Result<Constellation, ConfigError> {
        let kind: ConstellationKind = c
            .constellation
            .parse()
            .map_err(|e: crate::mathcore::MathError| ConfigError::new("code.constellation", e.to_string()))?;
        Ok(Constellation::new(kind))
    };
    let block = |code: BlockCode| SimCode::Block {
        dispersion: code.dispersion(),
        codebook: OnceLock::new(),
        code,
    };
    Ok(match c.kind {
        CodeKind::Alamouti => block(BlockCode::Alamouti(constellation()?)),
        CodeKind::Golden => block(BlockCode::Golden(constellation()?)),
        CodeKind::SpatialMultiplex => block(BlockCode::SpatialMultiplex {
            constellation: constellation()?,
            lt: c.lt.unwrap_or(2),
            uses: c.uses.unwrap_or(1),
        }),
        CodeKind::Trellis => {
            let name = c.trellis.as_deref().unwrap_or_default();
            SimCode::Trellis(load_named_trellis(name).map_err(|m| ConfigError::new("code.trellis", m))?)
        }
    })
}

/// A built-in trellis by name, or a trellis file.
pub fn load_named_trellis(name: &str) -> Result<TrellisCode, String> {
    let text = match name {
        "delay_diversity_4state" => DELAY_DIVERSITY_4STATE.to_string(),
        path => std::fs::read_to_string(path).map_err(|e| format!("cannot read `{path}`: {e}"))?,
    };
    load_trellis(&text).map_err(|e| e.to_string())
}

impl Experiment {
    pub fn new(cfg: SweepConfig) -> Result<Self, HarnessError> {
        cfg.validate()?;
        let code = resolve_code(&cfg.code)?;
        let lt = code.lt();
        let lr = cfg.channel.lr;
        let nf = cfg.frame.length;

        let pilots = match cfg.csi {
            CsiMode::Perfect => None,
            CsiMode::Pilot => {
                let map = build_pilot_map(nf, lt, cfg.pilot.count)
                    .map_err(|e| ConfigError::new("pilot.count", e.to_string()))?;
                Some(map)
            }
        };
        let data_uses = pilots.as_ref().map_or(nf, |m| m.data_positions().len());
        let info_bits = match &code {
            SimCode::Block { code: b, .. } => {
                if data_uses % b.n_uses() != 0 {
                    return Err(ConfigError::new(
                        "frame.length",
                        format!("{data_uses} data uses do not hold a whole number of {}-use codewords", b.n_uses()),
                    )
                    .into());
                }
                data_uses / b.n_uses() * b.bits_per_codeword()
            }
            SimCode::Trellis(t) => {
                if data_uses <= t.termination_len() {
                    return Err(ConfigError::new(
                        "frame.length",
                        format!("{data_uses} data uses leave no room beyond the {}-use tail", t.termination_len()),
                    )
                    .into());
                }
                (data_uses - t.termination_len()) * t.bits_per_step()
            }
        };

        let rtx = spatial_correlation(&cfg.channel.tx_geometry.resolve(lt, "channel.tx_geometry")?)
            .map_err(|e| ConfigError::new("channel.tx_geometry", e.to_string()))?;
        let rrx = spatial_correlation(&cfg.channel.rx_geometry.resolve(lr, "channel.rx_geometry")?)
            .map_err(|e| ConfigError::new("channel.rx_geometry", e.to_string()))?;
        let params = ChannelParams::new(lt, lr, cfg.channel.fdt, 1.0, 1.0, cfg.channel.mode)
            .map_err(|e| ConfigError::new("channel", e.to_string()))?;
        let generator =
            FadingGenerator::new(nf, &params, &rtx, &rrx).map_err(|e| HarnessError::Numerical(e.to_string()))?;

        let pilots = match pilots {
            None => None,
            Some(map) => {
                if cfg.pilot.taps == 0 || cfg.pilot.taps > map.n_blocks() {
                    return Err(ConfigError::new(
                        "pilot.taps",
                        format!("must be between 1 and the {} pilot blocks", map.n_blocks()),
                    )
                    .into());
                }
                // Pilot uses carry unit energy, so the raw-estimate SNR is Es/N0.
                let design_es_db = cfg.pilot.design_snr_db + 10.0 * (info_bits as f64 / nf as f64).log10();
                let w = design_wiener(&map, cfg.pilot.design_fdt, design_es_db, cfg.pilot.taps)
                    .map_err(|e| HarnessError::Numerical(e.to_string()))?;
                Some((map, w))
            }
        };

        Ok(Self {
            cfg,
            code,
            lt,
            lr,
            data_uses,
            info_bits,
            generator,
            pilots,
        })
    }

    pub fn config(&self) -> &SweepConfig {
        &self.cfg
    }

    pub fn lt(&self) -> usize {
        self.lt
    }

    pub fn lr(&self) -> usize {
        self.lr
    }

    pub fn info_bits_per_frame(&self) -> usize {
        self.info_bits
    }

    pub fn data_uses(&self) -> usize {
        self.data_uses
    }

    /// `Es` for a given Eb/N0 with `N0 = 1`, charging pilots and tails to the
    /// information bits.
    pub fn es_for(&self, ebn0_db: f64) -> f64 {
        10f64.powf(ebn0_db / 10.0) * self.info_bits as f64 / self.cfg.frame.length as f64
    }

    fn encode(&self, bits: &[u8]) -> CodewordMatrix {
        match &self.code {
            SimCode::Block { code, .. } => {
                let mut x = ComplexMatrix::zeros(self.lt, self.data_uses);
                let per = code.bits_per_codeword();
                for (b, chunk) in bits.chunks(per).enumerate() {
                    let w = code.encode_bits(chunk).expect("chunk sized to the codeword");
                    for k in 0..code.n_uses() {
                        x.set_column(b * code.n_uses() + k, &w.column(k));
                    }
                }
                x
            }
            SimCode::Trellis(t) => encode_trellis(bits, t).expect("bits sized to whole steps"),
        }
    }

    /// Generates bits, fading and the received frame for one grid point/frame.
    pub fn transmit(&self, snr_idx: usize, frame_idx: u64) -> Result<FrameSample, HarnessError> {
        let seed = self.cfg.seed;
        let es = self.es_for(self.cfg.ebn0_db[snr_idx]);
        let mut rng = frame_rng(seed, snr_idx, frame_idx, StreamPurpose::Bits);
        let bits: Vec<u8> = (0..self.info_bits).map(|_| rng.random_range(0..2u8)).collect();
        let data = self.encode(&bits);
        let x = match &self.pilots {
            Some((map, _)) => map.assemble(&data).map_err(|e| HarnessError::Numerical(e.to_string()))?,
            None => data,
        };
        let h = self.generator.generate(&mut frame_rng(seed, snr_idx, frame_idx, StreamPurpose::Fading));
        let params = ChannelParams::new(self.lt, self.lr, self.cfg.channel.fdt, es, 1.0, self.cfg.channel.mode)
            .map_err(|e| HarnessError::Numerical(e.to_string()))?;
        let y = apply_channel(&x, &h, &params, &mut frame_rng(seed, snr_idx, frame_idx, StreamPurpose::Noise))
            .map_err(|e| HarnessError::Numerical(e.to_string()))?;
        Ok(FrameSample { bits, x, h, y })
    }

    /// Runs the receiver (estimation if configured, then decoding) on a frame.
    /// `h_true` is used as-is under perfect CSI.
    pub fn receive(&self, y: &ReceivedFrame, h_true: &FadingRealization) -> Result<DecodeResult, HarnessError> {
        let num = |e: String| HarnessError::Numerical(e);
        let (y, h) = match &self.pilots {
            None => (y.clone(), h_true.clone()),
            Some((map, w)) => {
                let est = estimate_channel(y, map, w).map_err(|e| num(e.to_string()))?;
                let data = map.data_positions();
                (y.gather(data), est.gather(data))
            }
        };
        self.decode(&y, &h).map_err(|e| num(e.to_string()))
    }

    fn codebook(&self) -> &BlockCodebook {
        match &self.code {
            SimCode::Block { code, codebook, .. } => codebook.get_or_init(|| code.codebook()),
            SimCode::Trellis(_) => unreachable!("trellis codes have no block codebook"),
        }
    }

    fn decode(&self, y: &ReceivedFrame, h: &FadingRealization) -> Result<DecodeResult, DemodError> {
        let es = y.es;
        let method = self.cfg.decoder.method;
        match &self.code {
            SimCode::Trellis(t) => match method {
                DecoderMethod::Auto | DecoderMethod::Viterbi => viterbi_decode(y, h, t, es),
                other => Err(DemodError::ModelMismatch(format!("{other:?} cannot decode a trellis code"))),
            },
            SimCode::Block { code, dispersion, .. } => match method {
                DecoderMethod::Exhaustive => ml_exhaustive(y, h, self.codebook(), es),
                DecoderMethod::Sphere => sphere_decode(y, h, dispersion, es),
                DecoderMethod::Viterbi => Err(DemodError::ModelMismatch("Viterbi needs a trellis code".into())),
                DecoderMethod::Alamouti => match code {
                    BlockCode::Alamouti(c) => alamouti_combine(y, h, es, c, self.cfg.decoder.alamouti_allow_varying),
                    _ => Err(DemodError::ModelMismatch("the combiner only decodes Alamouti".into())),
                },
                DecoderMethod::Auto => match code {
                    BlockCode::Alamouti(c) => {
                        let block_static = (0..h.len() / 2)
                            .all(|b| (h.at(2 * b) - h.at(2 * b + 1)).frobenius_norm() <= STATIC_BLOCK_TOL);
                        if block_static || self.cfg.decoder.alamouti_allow_varying {
                            alamouti_combine(y, h, es, c, true)
                        } else {
                            ml_exhaustive(y, h, self.codebook(), es)
                        }
                    }
                    _ => match sphere_decode(y, h, dispersion, es) {
                        Err(DemodError::ModelMismatch(_)) => ml_exhaustive(y, h, self.codebook(), es),
                        other => other,
                    },
                },
            },
        }
    }

    fn run_frame(&self, snr_idx: usize, frame_idx: u64) -> Result<FrameOutcome, HarnessError> {
        let s = self.transmit(snr_idx, frame_idx)?;
        let d = self.receive(&s.y, &s.h)?;
        let bit_errors = s.bits.iter().zip(&d.bits).filter(|(a, b)| a != b).count() as u64;
        Ok(FrameOutcome {
            bit_errors,
            bits: s.bits.len() as u64,
            nodes: d.nodes,
        })
    }

    /// One grid point. Frames are simulated in batches; results are folded in
    /// frame order and the stopping rule is applied frame by frame, so the
    /// outcome does not depend on batching or thread count.
    pub fn run_point(&self, snr_idx: usize, exec: Execution) -> Result<SweepRow, HarnessError> {
        let stop = self.cfg.stopping;
        let mut acc = RowAccumulator::default();
        let mut next = 0u64;
        'outer: while next < stop.max_frames {
            let end = (next + CHUNK).min(stop.max_frames);
            let batch: Vec<Result<FrameOutcome, HarnessError>> = match exec {
                Execution::Serial => (next..end).map(|f| self.run_frame(snr_idx, f)).collect(),
                Execution::Parallel => (next..end).into_par_iter().map(|f| self.run_frame(snr_idx, f)).collect(),
            };
            for outcome in batch {
                acc.push(outcome?);
                if stop.min_frame_errors > 0 && acc.frame_errors >= stop.min_frame_errors {
                    break 'outer;
                }
            }
            next = end;
        }
        Ok(acc.finish(self.cfg.ebn0_db[snr_idx]))
    }

    pub fn run(&self, exec: Execution) -> Result<SweepResult, HarnessError> {
        let rows = (0..self.cfg.ebn0_db.len())
            .map(|i| self.run_point(i, exec))
            .collect::<Result<_, _>>()?;
        Ok(SweepResult { rows })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Serial,
    #[default]
    Parallel,
}

#[derive(Debug, Default)]
struct RowAccumulator {
    frames: u64,
    frame_errors: u64,
    bits: u64,
    bit_errors: u64,
    bit_errors_sq: f64,
    nodes: u64,
}

impl RowAccumulator {
    fn push(&mut self, o: FrameOutcome) {
        self.frames += 1;
        self.frame_errors += u64::from(o.bit_errors > 0);
        self.bits += o.bits;
        self.bit_errors += o.bit_errors;
        self.bit_errors_sq += (o.bit_errors as f64).powi(2);
        self.nodes += o.nodes;
    }

    fn finish(self, ebn0_db: f64) -> SweepRow {
        let ratio = |a: u64, b: u64| if b == 0 { 0.0 } else { a as f64 / b as f64 };
        let (lo, hi) = wilson_interval(self.frame_errors, self.frames);
        SweepRow {
            ebn0_db,
            frames: self.frames,
            frame_errors: self.frame_errors,
            fer: ratio(self.frame_errors, self.frames),
            fer_ci_lo: lo,
            fer_ci_hi: hi,
            bits: self.bits,
            bit_errors: self.bit_errors,
            ber: ratio(self.bit_errors, self.bits),
            mean_decoder_nodes: ratio(self.nodes, self.frames),
            bit_errors_sq: self.bit_errors_sq,
        }
    }
}

/// One grid point; field order is the CSV column order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub ebn0_db: f64,
    pub frames: u64,
    pub frame_errors: u64,
    pub fer: f64,
    pub fer_ci_lo: f64,
    pub fer_ci_hi: f64,
    pub bits: u64,
    pub bit_errors: u64,
    pub ber: f64,
    pub mean_decoder_nodes: f64,
    /// Sum over frames of squared per-frame bit-error counts.
    #[serde(skip)]
    pub bit_errors_sq: f64,
}

impl SweepRow {
    /// 95% normal interval for the BER that treats frames, not bits, as the
    /// independent units (bit errors within a frame share one fade).
    pub fn ber_ci(&self) -> (f64, f64) {
        if self.frames < 2 || self.bits == 0 {
            return (0.0, 1.0);
        }
        let n = self.frames as f64;
        let per_frame = self.bits as f64 / n;
        let mean = self.bit_errors as f64 / n;
        let var = (self.bit_errors_sq / n - mean * mean).max(0.0) * n / (n - 1.0);
        let half = Z95 * (var / n).sqrt() / per_frame;
        ((self.ber - half).max(0.0), (self.ber + half).min(1.0))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    pub fn write_csv<W: Write>(&self, w: W) -> Result<(), HarnessError> {
        let mut out = csv::Writer::from_writer(w);
        if self.rows.is_empty() {
            out.write_record([
                "ebn0_db",
                "frames",
                "frame_errors",
                "fer",
                "fer_ci_lo",
                "fer_ci_hi",
                "bits",
                "bit_errors",
                "ber",
                "mean_decoder_nodes",
            ])
            .map_err(csv_io)?;
        }
        for r in &self.rows {
            out.serialize(r).map_err(csv_io)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv is utf-8")
    }
}

fn csv_io(e: csv::Error) -> HarnessError {
    HarnessError::Io(std::io::Error::other(e.to_string()))
}

/// Builds the experiment and runs every grid point.
pub fn run_sweep(cfg: SweepConfig) -> Result<SweepResult, HarnessError> {
    run_sweep_with(cfg, Execution::Parallel)
}

pub fn run_sweep_with(cfg: SweepConfig, exec: Execution) -> Result<SweepResult, HarnessError> {
    Experiment::new(cfg)?.run(exec)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(extra: &str) -> SweepConfig {
        let text = format!(
            r#"
seed = 7
ebn0_db = [0.0, 200.0]
[stopping]
min_frame_errors = 20
max_frames = 300
[code]
kind = "alamouti"
[channel]
lr = 2
mode = "quasi_static"
[frame]
length = 4
{extra}
"#
        );
        SweepConfig::from_toml_str(&text, None).unwrap()
    }

    #[test]
    fn wilson_reference_values() {
        // reference values from statsmodels' proportion_confint(method="wilson")
        let (lo, hi) = wilson_interval(10, 100);
        assert!((lo - 0.055_229_137_060_675_09).abs() < 1e-12, "{lo}");
        assert!((hi - 0.174_365_661_504_913_48).abs() < 1e-12, "{hi}");
        let (lo, hi) = wilson_interval(0, 50);
        assert_eq!(lo, 0.0);
        assert!((hi - 0.071_347_599_133_358_74).abs() < 1e-12, "{hi}");
        assert_eq!(wilson_interval(0, 0), (0.0, 1.0));
    }

    #[test]
    fn streams_are_distinct_and_repeatable() {
        let draw = |r: &mut ChaCha8Rng| r.random::<u64>();
        let a = draw(&mut frame_rng(1, 0, 0, StreamPurpose::Bits));
        assert_eq!(a, draw(&mut frame_rng(1, 0, 0, StreamPurpose::Bits)));
        assert_ne!(a, draw(&mut frame_rng(2, 0, 0, StreamPurpose::Bits)));
        assert_ne!(a, draw(&mut frame_rng(1, 1, 0, StreamPurpose::Bits)));
        assert_ne!(a, draw(&mut frame_rng(1, 0, 1, StreamPurpose::Bits)));
        assert_ne!(a, draw(&mut frame_rng(1, 0, 0, StreamPurpose::Noise)));
    }

    #[test]
    fn zero_frames_gives_empty_rows() {
        let mut c = config("");
        c.stopping.max_frames = 0;
        let r = run_sweep(c).unwrap();
        assert_eq!(r.rows.len(), 2);
        for row in &r.rows {
            assert_eq!((row.frames, row.frame_errors, row.bit_errors), (0, 0, 0));
            assert_eq!(row.fer, 0.0);
        }
    }

    #[test]
    fn noiseless_point_has_no_errors() {
        let r = run_sweep(config("")).unwrap();
        let hi = &r.rows[1];
        assert_eq!(hi.frames, 300);
        assert_eq!(hi.frame_errors, 0);
        assert!(r.rows[0].frame_errors >= 20);
        assert_eq!(r.rows[0].frames, r.rows[0].frames.min(300));
    }

    #[test]
    fn stopping_rule_stops_exactly() {
        let r = run_sweep(config("")).unwrap();
        assert_eq!(r.rows[0].frame_errors, 20);
    }

    #[test]
    fn csv_header_and_columns() {
        let r = run_sweep(config("")).unwrap();
        let text = r.to_csv_string();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "ebn0_db,frames,frame_errors,fer,fer_ci_lo,fer_ci_hi,bits,bit_errors,ber,mean_decoder_nodes"
        );
        assert_eq!(lines.count(), 2);
        let empty = SweepResult { rows: vec![] }.to_csv_string();
        assert!(empty.starts_with("ebn0_db,frames"));
    }

    #[test]
    fn serial_equals_parallel() {
        let a = run_sweep_with(config(""), Execution::Serial).unwrap();
        let b = run_sweep_with(config(""), Execution::Parallel).unwrap();
        assert_eq!(a.to_csv_string(), b.to_csv_string());
    }

    #[test]
    fn es_charges_overheads() {
        let e = Experiment::new(config("")).unwrap();
        // 2 QPSK symbols per 2 uses: 2 bits per use
        assert!((e.es_for(0.0) - 2.0).abs() < 1e-12);
        let mut c = config("");
        c.csi = CsiMode::Pilot;
        assert!(matches!(Experiment::new(c), Err(HarnessError::Config(_))), "4-use frame cannot hold 72 pilots");
    }

    #[test]
    fn pilot_frame_accounting() {
        let mut c = config("");
        c.frame.length = 300;
        c.csi = CsiMode::Pilot;
        let e = Experiment::new(c).unwrap();
        assert_eq!(e.data_uses(), 228);
        assert_eq!(e.info_bits_per_frame(), 456);
        assert!((e.es_for(0.0) - 456.0 / 300.0).abs() < 1e-12);
    }

    #[test]
    fn trellis_frame_accounting() {
        let mut c = config("");
        c.code.kind = CodeKind::Trellis;
        c.code.trellis = Some("delay_diversity_4state".into());
        c.frame.length = 11;
        let e = Experiment::new(c.clone()).unwrap();
        assert_eq!(e.info_bits_per_frame(), 20);
        let r = e.run(Execution::Serial).unwrap();
        assert_eq!(r.rows[1].frame_errors, 0);
        c.frame.length = 1;
        assert!(matches!(Experiment::new(c), Err(HarnessError::Config(_))));
    }
}
