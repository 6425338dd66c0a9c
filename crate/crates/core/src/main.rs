use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use stc_lab::designmetrics::{
    codebook_report, events_report, pair_metrics, trellis_error_events, DesignMetricsReport, PairMetrics,
    DEFAULT_EVENT_DEPTH,
};
use stc_lab::harness::{load_named_trellis, Execution, Experiment, HarnessError, SweepConfig};
use stc_lab::mathcore::{bessel_j0, Constellation, ConstellationKind};
use stc_lab::stcodes::BlockCode;

#[derive(Parser)]
#[command(name = "stc-lab", version, about = "Space-time coded MIMO link simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an Eb/N0 sweep and write FER/BER rows as CSV.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the master seed from the config.
        #[arg(long)]
        seed: Option<u64>,
        /// CSV destination; defaults to the config's `out`, else stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Simulate frames on one thread.
        #[arg(long)]
        serial: bool,
    },
    /// Print rank / product-measure / Euclidean design metrics of a code.
    Metrics {
        /// `alamouti-qpsk`, `golden-qpsk`, `sm-qpsk`, ... (block codes), a
        /// built-in trellis name, or a trellis file.
        #[arg(long)]
        code: String,
        /// Maximum error-event length for trellis codes.
        #[arg(long, default_value_t = DEFAULT_EVENT_DEPTH)]
        depth: usize,
        /// Also write the worst pairs / events as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Run quick internal consistency checks.
    Selftest,
}

enum Failure {
    Config(String),
    Numerical(String),
    Io(String),
}

impl Failure {
    fn exit(self) -> ExitCode {
        let (msg, code) = match self {
            Self::Config(m) => (m, 2),
            Self::Numerical(m) => (m, 3),
            Self::Io(m) => (m, 1),
        };
        eprintln!("stc-lab: {msg}");
        ExitCode::from(code)
    }
}

impl From<HarnessError> for Failure {
    fn from(e: HarnessError) -> Self {
        match e {
            HarnessError::Config(c) => Self::Config(c.to_string()),
            HarnessError::Numerical(m) => Self::Numerical(m),
            HarnessError::Io(e) => Self::Io(e.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Self::Io(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Sweep {
            config,
            seed,
            out,
            serial,
        } => sweep(config, seed, out, serial),
        Command::Metrics { code, depth, csv } => metrics(&code, depth, csv),
        Command::Selftest => selftest(),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => f.exit(),
    }
}

fn sweep(config: PathBuf, seed: Option<u64>, out: Option<PathBuf>, serial: bool) -> Result<(), Failure> {
    let mut cfg = SweepConfig::from_file(&config).map_err(|e| Failure::Config(e.to_string()))?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    let out = out.or_else(|| cfg.out.clone());
    let exec = if serial { Execution::Serial } else { Execution::Parallel };
    let result = Experiment::new(cfg)?.run(exec)?;
    match out {
        Some(path) => result.write_csv(File::create(&path)?)?,
        None => result.write_csv(io::stdout().lock())?,
    }
    Ok(())
}

fn block_preset(name: &str) -> Option<BlockCode> {
    let (kind, cons) = name.split_once('-')?;
    let c = Constellation::new(cons.to_uppercase().parse::<ConstellationKind>().ok()?);
    match kind {
        "alamouti" => Some(BlockCode::Alamouti(c)),
        "golden" => Some(BlockCode::Golden(c)),
        "sm" => Some(BlockCode::SpatialMultiplex {
            constellation: c,
            lt: 2,
            uses: 1,
        }),
        _ => None,
    }
}

fn print_report(r: &DesignMetricsReport) {
    println!("min rank                        {}", r.min_rank);
    println!("min product measure at min rank {}", r.min_product_measure_at_min_rank);
    println!("min euclidean                   {}", r.min_euclidean);
}

fn csv_failure(e: csv::Error) -> Failure {
    Failure::Io(e.to_string())
}

fn write_rows(path: &PathBuf, rows: &[(String, PairMetrics)]) -> Result<(), Failure> {
    let mut w = csv::Writer::from_writer(File::create(path)?);
    w.write_record(["item", "rank", "product_measure", "euclidean"]).map_err(csv_failure)?;
    for (item, m) in rows {
        w.write_record([
            item.clone(),
            m.rank.to_string(),
            m.product_measure.to_string(),
            m.euclidean.to_string(),
        ])
        .map_err(csv_failure)?;
    }
    w.flush()?;
    Ok(())
}

fn metrics(code: &str, depth: usize, csv: Option<PathBuf>) -> Result<(), Failure> {
    if let Some(block) = block_preset(code) {
        if block.bits_per_codeword() > 16 {
            return Err(Failure::Config(format!("{code}: codebook too large to enumerate pairs")));
        }
        let cb = block.codebook();
        let r = codebook_report(&cb).map_err(|e| Failure::Numerical(e.to_string()))?;
        println!("code {}  ({} codewords)", block.name(), cb.len());
        print_report(&r);
        if let Some(path) = csv {
            let words = cb.words();
            let row = |label: &str, (a, b): (usize, usize)| -> Result<(String, PairMetrics), Failure> {
                let m = pair_metrics(&words[a], &words[b]).map_err(|e| Failure::Numerical(e.to_string()))?;
                Ok((format!("{label} {a}-{b}"), m))
            };
            let rows = [
                row("worst_small_array", r.worst_small_array_pair)?,
                row("worst_euclidean", r.worst_euclidean_pair)?,
            ];
            write_rows(&path, &rows)?;
        }
        return Ok(());
    }
    let trellis = load_named_trellis(code).map_err(Failure::Config)?;
    let events = trellis_error_events(&trellis, depth).map_err(|e| Failure::Numerical(e.to_string()))?;
    let r = events_report(&events).ok_or_else(|| Failure::Numerical("no error events found".into()))?;
    println!(
        "trellis {} states, {} bits/step, {} events up to depth {depth}",
        trellis.n_states(),
        trellis.bits_per_step(),
        events.len()
    );
    print_report(&r);
    if let Some(path) = csv {
        let rows: Vec<(String, PairMetrics)> = events
            .iter()
            .enumerate()
            .map(|(i, e)| (format!("event {i} len {}", e.difference.cols()), e.metrics))
            .collect();
        write_rows(&path, &rows)?;
    }
    Ok(())
}

fn selftest() -> Result<(), Failure> {
    let mut failed = 0;
    let mut check = |name: &str, ok: bool| {
        println!("{} {name}", if ok { "PASS" } else { "FAIL" });
        failed += usize::from(!ok);
    };

    check("J0(π) ≈ −0.30424", (bessel_j0(std::f64::consts::PI) + 0.304_242_177_644_093_9).abs() < 1e-12);

    let alamouti = codebook_report(&BlockCode::Alamouti(Constellation::qpsk()).codebook());
    check("alamouti-qpsk full rank", alamouti.is_ok_and(|r| r.min_rank == 2));

    let noiseless = r#"
ebn0_db = [200.0]
[stopping]
max_frames = 50
[code]
kind = "golden"
[channel]
lr = 2
mode = "clarke_varying"
fdt = 0.01
[frame]
length = 40
"#;
    let ok = SweepConfig::from_toml_str(noiseless, None)
        .ok()
        .and_then(|c| Experiment::new(c).ok())
        .and_then(|e| e.run(Execution::Serial).ok())
        .is_some_and(|r| r.rows[0].frames == 50 && r.rows[0].frame_errors == 0);
    check("noiseless golden sweep is error free", ok);

    let trellis = load_named_trellis("delay_diversity_4state");
    check(
        "delay diversity events are full rank",
        trellis
            .ok()
            .and_then(|t| trellis_error_events(&t, 4).ok())
            .and_then(|ev| events_report(&ev))
            .is_some_and(|r| r.min_rank == 2),
    );

    io::stdout().flush()?;
    if failed > 0 {
        Err(Failure::Numerical(format!("{failed} self-test check(s) failed")))
    } else {
        Ok(())
    }
}
