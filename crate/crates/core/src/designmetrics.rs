//! Code-design criteria over codeword pairs: rank of the difference matrix
//! (diversity), geometric mean of the nonzero eigenvalues of `C = D Dᴴ`
//! (product measure, i.e. coding gain), and their arithmetic mean (Euclidean
//! criterion).
//!
//! Eigenvalues of `C` are taken as squared singular values of `D`, which keeps
//! relative accuracy for near-singular differences.

use std::cmp::Ordering;
use std::collections::HashSet;

use rayon::prelude::*;

use crate::mathcore::{singular_values, ComplexMatrix, DEFAULT_RANK_TOL};
use crate::stcodes::{BlockCodebook, CodewordMatrix, TrellisCode};

pub const DEFAULT_EVENT_CAP: usize = 1_000_000;
pub const DEFAULT_EVENT_DEPTH: usize = 10;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MetricsError {
    #[error("codeword shapes differ: {0:?} vs {1:?}")]
    ShapeMismatch((usize, usize), (usize, usize)),
    #[error("codebook needs at least two codewords")]
    TooFewCodewords,
    #[error("max_depth must be at least 1")]
    ZeroDepth,
    #[error("error-event enumeration exceeded the cap of {cap} events")]
    DepthTooLarge { cap: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairMetrics {
    pub rank: usize,
    pub product_measure: f64,
    pub euclidean: f64,
}

impl PairMetrics {
    /// Metrics of a difference matrix `D = x1 − x2`.
    pub fn of_difference(d: &ComplexMatrix) -> Self {
        let lt = d.rows();
        let sv = singular_values(d);
        let largest = sv.first().copied().unwrap_or(0.0);
        let nonzero: Vec<f64> = if largest == 0.0 {
            Vec::new()
        } else {
            sv.iter().copied().filter(|&s| s > DEFAULT_RANK_TOL * largest).collect()
        };
        let rank = nonzero.len();
        let product_measure = if rank == 0 {
            0.0
        } else {
            let log_sum: f64 = nonzero.iter().map(|s| 2.0 * s.ln()).sum();
            (log_sum / rank as f64).exp()
        };
        Self {
            rank,
            product_measure,
            euclidean: d.frobenius_norm_sqr() / lt as f64,
        }
    }

    /// Small-array ordering: higher rank first, then larger product measure.
    pub fn small_array_cmp(&self, other: &Self) -> Ordering {
        self.rank
            .cmp(&other.rank)
            .then(self.product_measure.total_cmp(&other.product_measure))
    }
}

pub fn pair_metrics(x1: &CodewordMatrix, x2: &CodewordMatrix) -> Result<PairMetrics, MetricsError> {
    if x1.shape() != x2.shape() {
        return Err(MetricsError::ShapeMismatch(x1.shape(), x2.shape()));
    }
    Ok(PairMetrics::of_difference(&(x1 - x2)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct DesignMetricsReport {
    /// Diversity advantage.
    pub min_rank: usize,
    /// Smallest product measure among pairs achieving `min_rank`.
    pub min_product_measure_at_min_rank: f64,
    pub min_euclidean: f64,
    /// Pair attaining (min_rank, min product measure).
    pub worst_small_array_pair: (usize, usize),
    /// Pair attaining the minimum Euclidean criterion.
    pub worst_euclidean_pair: (usize, usize),
}

impl DesignMetricsReport {
    /// Lexicographic key for the small-receive-array paradigm (larger is better).
    pub fn small_array_key(&self) -> (usize, f64) {
        (self.min_rank, self.min_product_measure_at_min_rank)
    }

    /// Key for the large-receive-array paradigm (larger is better).
    pub fn large_array_key(&self) -> f64 {
        self.min_euclidean
    }
}

/// Running minimum over labelled pair metrics; ties keep the earlier label.
#[derive(Debug, Clone)]
struct Accumulator {
    small: Option<(PairMetrics, (usize, usize))>,
    euclid: Option<(f64, (usize, usize))>,
}

impl Accumulator {
    fn new() -> Self {
        Self {
            small: None,
            euclid: None,
        }
    }

    fn push(&mut self, m: PairMetrics, label: (usize, usize)) {
        self.push_small(m, label);
        self.push_euclid(m.euclidean, label);
    }

    fn push_small(&mut self, m: PairMetrics, label: (usize, usize)) {
        let replace = match &self.small {
            None => true,
            Some((best, at)) => match m.small_array_cmp(best) {
                Ordering::Less => true,
                Ordering::Equal => label < *at,
                Ordering::Greater => false,
            },
        };
        if replace {
            self.small = Some((m, label));
        }
    }

    fn push_euclid(&mut self, e: f64, label: (usize, usize)) {
        let replace = match &self.euclid {
            None => true,
            Some((best, at)) => e < *best || (e == *best && label < *at),
        };
        if replace {
            self.euclid = Some((e, label));
        }
    }

    fn merge(mut self, other: Self) -> Self {
        if let Some((m, l)) = other.small {
            self.push_small(m, l);
        }
        if let Some((e, l)) = other.euclid {
            self.push_euclid(e, l);
        }
        self
    }

    fn finish(self) -> Option<DesignMetricsReport> {
        let (small, small_at) = self.small?;
        let (euclid, euclid_at) = self.euclid?;
        Some(DesignMetricsReport {
            min_rank: small.rank,
            min_product_measure_at_min_rank: small.product_measure,
            min_euclidean: euclid,
            worst_small_array_pair: small_at,
            worst_euclidean_pair: euclid_at,
        })
    }
}

/// Exhaustive minimum over all unordered pairs of distinct codewords.
pub fn codebook_report(cb: &BlockCodebook) -> Result<DesignMetricsReport, MetricsError> {
    let words = cb.words();
    if words.len() < 2 {
        return Err(MetricsError::TooFewCodewords);
    }
    let acc = (0..words.len())
        .into_par_iter()
        .map(|i| {
            let mut acc = Accumulator::new();
            for j in i + 1..words.len() {
                acc.push(PairMetrics::of_difference(&(&words[i] - &words[j])), (i, j));
            }
            acc
        })
        .reduce(Accumulator::new, Accumulator::merge);
    Ok(acc.finish().expect("at least one pair"))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErrorEvent {
    /// Difference between the competitor and the reference path, `lt × length`.
    pub difference: ComplexMatrix,
    pub metrics: PairMetrics,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EventOptions {
    pub max_depth: usize,
    pub cap: usize,
    /// Enumerate diverging pairs from every state instead of assuming the
    /// all-zero-input path from state 0 is representative.
    pub all_references: bool,
}

impl EventOptions {
    pub fn new(max_depth: usize) -> Self {
        Self {
            max_depth,
            cap: DEFAULT_EVENT_CAP,
            all_references: false,
        }
    }
}

/// Error events on the pair-state trellis with default options.
pub fn trellis_error_events(code: &TrellisCode, max_depth: usize) -> Result<Vec<ErrorEvent>, MetricsError> {
    trellis_error_events_with(code, EventOptions::new(max_depth))
}

/// Enumerates pairs of paths that leave a common state with different
/// inputs and first meet again within `max_depth` steps. Identical
/// difference matrices are reported once.
pub fn trellis_error_events_with(
    code: &TrellisCode,
    opts: EventOptions,
) -> Result<Vec<ErrorEvent>, MetricsError> {
    if opts.max_depth == 0 {
        return Err(MetricsError::ZeroDepth);
    }
    let mut walker = EventWalker {
        code,
        opts,
        columns: Vec::new(),
        found: Vec::new(),
        visited: 0,
    };
    let starts: Vec<usize> = if opts.all_references {
        (0..code.n_states()).collect()
    } else {
        vec![0]
    };
    for start in starts {
        for ref_in in 0..code.n_inputs() {
            if !opts.all_references && ref_in != 0 {
                continue;
            }
            let first_comp = if opts.all_references { ref_in + 1 } else { 1 };
            for comp_in in first_comp..code.n_inputs() {
                walker.step(start, start, ref_in, comp_in)?;
            }
        }
    }

    let mut seen = HashSet::new();
    let mut events: Vec<ErrorEvent> = Vec::with_capacity(walker.found.len());
    for d in walker.found {
        if seen.insert(quantized_key(&d)) {
            let metrics = PairMetrics::of_difference(&d);
            events.push(ErrorEvent {
                difference: d,
                metrics,
            });
        }
    }
    Ok(events)
}

/// Entries rounded to 1e-9 so equal differences hash together.
fn quantized_key(d: &ComplexMatrix) -> (usize, Vec<(i64, i64)>) {
    let q = |x: f64| (x * 1e9).round() as i64;
    (d.cols(), d.as_slice().iter().map(|z| (q(z.re), q(z.im))).collect())
}

struct EventWalker<'a> {
    code: &'a TrellisCode,
    opts: EventOptions,
    columns: Vec<Vec<num_complex::Complex64>>,
    found: Vec<ComplexMatrix>,
    visited: usize,
}

impl EventWalker<'_> {
    /// Takes one step from the pair state `(ref_state, comp_state)`.
    fn step(&mut self, ref_state: usize, comp_state: usize, ref_in: usize, comp_in: usize) -> Result<(), MetricsError> {
        self.visited += 1;
        if self.visited > self.opts.cap {
            return Err(MetricsError::DepthTooLarge { cap: self.opts.cap });
        }
        let code = self.code;
        let r = code.output_symbols(ref_state, ref_in);
        let c = code.output_symbols(comp_state, comp_in);
        self.columns.push(c.iter().zip(&r).map(|(a, b)| a - b).collect());
        let next_ref = code.next_state(ref_state, ref_in);
        let next_comp = code.next_state(comp_state, comp_in);

        if next_ref == next_comp {
            let mut d = ComplexMatrix::zeros(code.lt(), self.columns.len());
            for (k, col) in self.columns.iter().enumerate() {
                d.set_column(k, col);
            }
            self.found.push(d);
            if self.found.len() > self.opts.cap {
                return Err(MetricsError::DepthTooLarge { cap: self.opts.cap });
            }
        } else if self.columns.len() < self.opts.max_depth {
            let ref_inputs: Vec<usize> = if self.opts.all_references {
                (0..code.n_inputs()).collect()
            } else {
                vec![0]
            };
            for ri in ref_inputs {
                for ci in 0..code.n_inputs() {
                    self.step(next_ref, next_comp, ri, ci)?;
                }
            }
        }
        self.columns.pop();
        Ok(())
    }
}

/// Summary over a set of trellis events, mirroring the codebook report.
pub fn events_report(events: &[ErrorEvent]) -> Option<DesignMetricsReport> {
    let mut acc = Accumulator::new();
    for (i, e) in events.iter().enumerate() {
        acc.push(e.metrics, (i, i));
    }
    acc.finish()
}
