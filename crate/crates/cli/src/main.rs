mod manifest;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use fddi_lab::bits::{bits_to_bytes, bytes_to_bits, format_bit_string, parse_bit_string};
use fddi_lab::fddi2::{self, ModeMap};
use fddi_lab::link_planner::{self, MediaTable, Verdict};
use fddi_lab::mac_sim::{self, SimConfigFile, SimJob};
use fddi_lab::phy_codec::{self as phy, CodeTable, Nibble};
use fddi_lab::report::{self, Cell, Format, Provenance, Table};
use fddi_lab::scrambler::{self, Scrambler};
use fddi_lab::spm::{self, SpeLayoutParams};
use fddi_lab::Execution;

use manifest::Manifest;

#[derive(Parser, Debug)]
#[command(name = "fddilab", version, about = "FDDI, FDDI-II and SONET mapping models")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Args, Debug)]
struct Common {
    /// Seed for every random choice in the run.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Report format.
    #[arg(long, global = true, value_enum, default_value_t = OutFormat::Csv)]
    format: OutFormat,
    /// Output file; standard output when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for data-parallel steps; 1 runs sequentially.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Write a JSON run manifest (arguments, input digests, output digest).
    #[arg(long, global = true)]
    manifest: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum OutFormat {
    Csv,
    Json,
}

impl From<OutFormat> for Format {
    fn from(f: OutFormat) -> Self {
        match f {
            OutFormat::Csv => Format::Csv,
            OutFormat::Json => Format::Json,
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the timed-token ring simulator on a JSON config.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Simulated time in microseconds.
        #[arg(long)]
        duration: f64,
    },
    /// Run one simulation per TTRT value and compare with the efficiency bound.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        duration: f64,
        /// Comma-separated TTRT values in microseconds.
        #[arg(long, value_delimiter = ',', required = true)]
        ttrt: Vec<f64>,
    },
    /// Physical-layer codes.
    #[command(subcommand)]
    Codec(CodecCmd),
    /// The 1 + x^6 + x^7 frame-synchronous scrambler.
    #[command(subcommand)]
    Scrambler(ScramblerCmd),
    /// Map a byte stream of FDDI code bits into STS-3c SPEs, or back.
    SonetMap {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        extract: bool,
    },
    /// SONET/SDH rate hierarchy.
    Rates {
        /// Only this STS level.
        #[arg(long)]
        level: Option<u32>,
    },
    /// FDDI-II cycle planning.
    #[command(subcommand)]
    Fddi2(Fddi2Cmd),
    /// Check a ring description against media distance and power rules.
    Plan {
        #[arg(long)]
        ring: PathBuf,
        /// Media table replacing the built-in one.
        #[arg(long)]
        media: Option<PathBuf>,
    },
}

#[derive(Subcommand, Debug)]
enum CodecCmd {
    /// Bytes to 4b/5b code bits (text of 0/1), or back with --decode.
    #[command(name = "4b5b")]
    FourBFiveB {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        decode: bool,
        /// Code table replacing the built-in one.
        #[arg(long)]
        table: Option<PathBuf>,
    },
    /// Code bits (text of 0/1) to NRZI line levels.
    Nrzi {
        #[arg(long = "in")]
        input: PathBuf,
        /// Line level before the first bit.
        #[arg(long, value_enum, default_value_t = Initial::Low)]
        initial: Initial,
        /// Emit transition and frequency figures instead of the levels.
        #[arg(long)]
        stats: bool,
    },
    /// Code bits (text of 0/1) to MLT-3 line levels.
    Mlt3 {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        stats: bool,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Initial {
    Low,
    High,
}

#[derive(Subcommand, Debug)]
enum ScramblerCmd {
    /// Print the scrambler output from the seed as 0/1 text.
    Dump {
        #[arg(long, default_value_t = scrambler::PERIOD)]
        bits: usize,
    },
    /// Longest stretch of the sequence made of valid 4b/5b symbols.
    Analyze {
        #[arg(long)]
        table: Option<PathBuf>,
    },
    /// Scramble (or descramble) a byte file, re-seeding every frame.
    Apply {
        #[arg(long = "in")]
        input: PathBuf,
        /// Frame length in bytes; the whole file is one frame when absent.
        #[arg(long)]
        frame_bytes: Option<usize>,
    },
}

#[derive(Subcommand, Debug)]
enum Fddi2Cmd {
    /// Allocate isochronous channel requests to wideband channels.
    Plan {
        /// 16 letters, I (isochronous) or P (packet), WBC 1 first.
        #[arg(long)]
        modes: String,
        /// `<channel> <bytes-per-cycle>` lines.
        #[arg(long)]
        requests: PathBuf,
    },
}

/// Result of a subcommand: bytes for the output, and a failure reason when
/// the output reports violations.
struct Outcome {
    bytes: Vec<u8>,
    failure: Option<String>,
}

impl Outcome {
    fn ok(bytes: Vec<u8>) -> Self {
        Outcome { bytes, failure: None }
    }
}

struct Ctx {
    format: Format,
    exec: Execution,
    seed: u64,
    manifest: Manifest,
}

impl Ctx {
    fn read(&mut self, path: &Path) -> Result<Vec<u8>> {
        let data = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
        self.manifest.add_input(path, &data);
        Ok(data)
    }

    fn read_text(&mut self, path: &Path) -> Result<String> {
        let data = self.read(path)?;
        String::from_utf8(data).with_context(|| format!("{} is not UTF-8", path.display()))
    }

    fn read_bits(&mut self, path: &Path) -> Result<Vec<bool>> {
        let text = self.read_text(path)?;
        parse_bit_string(&text).map_err(|e| anyhow!("{}: {e}", path.display()))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            let msg = format!("{e:#}").replace('\n', " ");
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Result<bool> {
    let common = cli.common;
    if let Some(j) = common.jobs {
        if j == 0 {
            bail!("--jobs must be at least 1");
        }
        fddi_lab::exec::limit_threads(j).map_err(|e| anyhow!("thread pool: {e}"))?;
    }
    let mut ctx = Ctx {
        format: common.format.into(),
        exec: if common.jobs == Some(1) { Execution::Sequential } else { Execution::Parallel },
        seed: common.seed,
        manifest: Manifest::new(subcommand_name(&cli.cmd), std::env::args().skip(1).collect(), common.seed),
    };
    let outcome = dispatch(&mut ctx, cli.cmd)?;
    match &common.out {
        Some(path) => fs::write(path, &outcome.bytes).with_context(|| format!("writing {}", path.display()))?,
        None => std::io::stdout().write_all(&outcome.bytes).context("writing output")?,
    }
    if let Some(path) = &common.manifest {
        ctx.manifest.set_output(&outcome.bytes);
        fs::write(path, ctx.manifest.to_json()).with_context(|| format!("writing {}", path.display()))?;
    }
    if let Some(reason) = outcome.failure {
        eprintln!("error: {reason}");
        return Ok(false);
    }
    Ok(true)
}

fn subcommand_name(cmd: &Command) -> String {
    match cmd {
        Command::Simulate { .. } => "simulate",
        Command::Sweep { .. } => "sweep",
        Command::Codec(CodecCmd::FourBFiveB { .. }) => "codec 4b5b",
        Command::Codec(CodecCmd::Nrzi { .. }) => "codec nrzi",
        Command::Codec(CodecCmd::Mlt3 { .. }) => "codec mlt3",
        Command::Scrambler(ScramblerCmd::Dump { .. }) => "scrambler dump",
        Command::Scrambler(ScramblerCmd::Analyze { .. }) => "scrambler analyze",
        Command::Scrambler(ScramblerCmd::Apply { .. }) => "scrambler apply",
        Command::SonetMap { .. } => "sonet-map",
        Command::Rates { .. } => "rates",
        Command::Fddi2(Fddi2Cmd::Plan { .. }) => "fddi2 plan",
        Command::Plan { .. } => "plan",
    }
    .to_string()
}

fn dispatch(ctx: &mut Ctx, cmd: Command) -> Result<Outcome> {
    match cmd {
        Command::Simulate { config, duration } => simulate(ctx, &config, duration),
        Command::Sweep { config, duration, ttrt } => sweep(ctx, &config, duration, &ttrt),
        Command::Codec(c) => codec(ctx, c),
        Command::Scrambler(c) => scrambler_cmd(ctx, c),
        Command::SonetMap { input, extract } => sonet_map(ctx, &input, extract),
        Command::Rates { level } => rates(ctx, level),
        Command::Fddi2(Fddi2Cmd::Plan { modes, requests }) => fddi2_plan(ctx, &modes, &requests),
        Command::Plan { ring, media } => plan(ctx, &ring, media.as_deref()),
    }
}

fn load_sim_config(ctx: &mut Ctx, path: &Path) -> Result<SimConfigFile> {
    let text = ctx.read_text(path)?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn violation_report(ctx: &Ctx, violations: &[mac_sim::Violation]) -> Vec<u8> {
    let mut t = Table::new(["violation", "detail"]);
    for v in violations {
        t.push(vec![v.code().into(), v.to_string().into()]);
    }
    t.emit(ctx.format)
}

fn simulate(ctx: &mut Ctx, config: &Path, duration: f64) -> Result<Outcome> {
    let file = load_sim_config(ctx, config)?;
    match mac_sim::run_simulation(&file.ring, &file.traffic, duration, ctx.seed) {
        Ok(m) => Ok(Outcome::ok(report::metrics_table(&m).emit(ctx.format))),
        Err(mac_sim::MacError::InvalidConfig(v)) => Ok(Outcome {
            bytes: violation_report(ctx, &v),
            failure: Some(mac_sim::MacError::InvalidConfig(v).to_string()),
        }),
        Err(e) => Err(e.into()),
    }
}

fn sweep(ctx: &mut Ctx, config: &Path, duration: f64, ttrt: &[f64]) -> Result<Outcome> {
    let file = load_sim_config(ctx, config)?;
    let jobs: Vec<SimJob> = ttrt
        .iter()
        .map(|&t| SimJob {
            cfg: mac_sim::RingConfig { ttrt_us: t, ..file.ring.clone() },
            traffic: file.traffic.clone(),
            duration_us: duration,
            seed: ctx.seed,
        })
        .collect();
    let results = mac_sim::sweep(&jobs, ctx.exec);
    let mut t = Table::new(["ttrt_us", "throughput", "efficiency_bound", "mean_access_delay_us", "max_sync_gap_us"]);
    let mut failures = Vec::new();
    for (job, r) in jobs.iter().zip(results) {
        let cfg = &job.cfg;
        let bound = mac_sim::theoretical_efficiency(cfg.n_stations, cfg.ttrt_us, cfg.ring_latency_us).ok().into();
        match r {
            Ok(m) => t.push(vec![
                cfg.ttrt_us.into(),
                m.throughput.into(),
                bound,
                (m.probes > 0).then_some(m.mean_access_delay_us).into(),
                m.max_sync_gap_us.into(),
            ]),
            Err(e) => failures.push(format!("ttrt {}: {e}", cfg.ttrt_us)),
        }
    }
    Ok(Outcome { bytes: t.emit(ctx.format), failure: (!failures.is_empty()).then(|| failures.join("; ")) })
}

fn codec(ctx: &mut Ctx, cmd: CodecCmd) -> Result<Outcome> {
    match cmd {
        CodecCmd::FourBFiveB { input, decode, table } => {
            let table = match table {
                Some(p) => CodeTable::parse(&ctx.read_text(&p)?)?,
                None => CodeTable::standard(),
            };
            if decode {
                let bits = ctx.read_bits(&input)?;
                let patterns = phy::bits_to_patterns(&bits)?;
                let nibbles = phy::decode_4b5b(&table, &patterns)?;
                if nibbles.len() % 2 != 0 {
                    bail!("odd number of data symbols ({}) does not form whole bytes", nibbles.len());
                }
                Ok(Outcome::ok(Nibble::to_bytes(&nibbles)))
            } else {
                let data = ctx.read(&input)?;
                let symbols = phy::encode_4b5b(&table, &Nibble::from_bytes(&data))?;
                let mut text = format_bit_string(&phy::symbols_to_bits(&symbols));
                text.push('\n');
                Ok(Outcome::ok(text.into_bytes()))
            }
        }
        CodecCmd::Nrzi { input, initial, stats } => {
            let bits = ctx.read_bits(&input)?;
            let level = match initial {
                Initial::Low => phy::Level::Low,
                Initial::High => phy::Level::High,
            };
            line_output(ctx, &phy::nrzi_encode(&bits, level, phy::FDDI_CODE_BIT_RATE), stats)
        }
        CodecCmd::Mlt3 { input, stats } => {
            let bits = ctx.read_bits(&input)?;
            line_output(ctx, &phy::mlt3_encode(&bits, phy::FDDI_CODE_BIT_RATE), stats)
        }
    }
}

fn line_output(ctx: &Ctx, signal: &phy::LineSignal, stats: bool) -> Result<Outcome> {
    if !stats {
        let mut text = signal.render();
        text.push('\n');
        return Ok(Outcome::ok(text.into_bytes()));
    }
    let mut t = Table::new(["metric", "value", "unit"]);
    t.push(vec!["bits".into(), signal.levels.len().into(), "count".into()]);
    t.push(vec!["transitions".into(), signal.transitions().into(), "count".into()]);
    t.push(vec!["bit_rate".into(), signal.bit_rate.into(), "bps".into()]);
    let f = phy::fundamental_frequency(signal).ok().into();
    t.push(vec!["fundamental".into(), f, "Hz".into()]);
    Ok(Outcome::ok(t.emit(ctx.format)))
}

fn scrambler_cmd(ctx: &mut Ctx, cmd: ScramblerCmd) -> Result<Outcome> {
    match cmd {
        ScramblerCmd::Dump { bits } => {
            let seq: Vec<bool> = scrambler::sequence_from(scrambler::seed()).take(bits).collect();
            let mut text = format_bit_string(&seq);
            text.push('\n');
            Ok(Outcome::ok(text.into_bytes()))
        }
        ScramblerCmd::Analyze { table } => {
            let table = match table {
                Some(p) => CodeTable::parse(&ctx.read_text(&p)?)?,
                None => CodeTable::standard(),
            };
            let rep = scrambler::longest_valid_match(&table, ctx.exec);
            let mut t = Table::new([
                "model",
                "length_bits",
                "length_bytes",
                "offset",
                "polarity",
                "lead_bits",
                "trail_bits",
                "unbounded",
                "witness",
            ]);
            for r in [&rep.fragments, &rep.whole_symbols] {
                t.push_with(
                    vec![
                        r.model.to_string().into(),
                        r.length_bits.into(),
                        r.length_bytes().into(),
                        r.offset.into(),
                        r.polarity.to_string().into(),
                        r.lead_bits.into(),
                        r.trail_bits.into(),
                        r.unbounded.to_string().into(),
                        r.witness_string().into(),
                    ],
                    Some(Provenance::Computed),
                );
            }
            Ok(Outcome::ok(t.emit(ctx.format)))
        }
        ScramblerCmd::Apply { input, frame_bytes } => {
            let data = ctx.read(&input)?;
            let frame = match frame_bytes {
                Some(0) => bail!("--frame-bytes must be positive"),
                Some(k) => k,
                None => data.len().max(1),
            };
            let mut s = Scrambler::new();
            let out: Vec<u8> = data.chunks(frame).flat_map(|f| s.scramble_bytes(f, true)).collect();
            Ok(Outcome::ok(out))
        }
    }
}

fn sonet_map(ctx: &mut Ctx, input: &Path, extract: bool) -> Result<Outcome> {
    let layout = Arc::new(spm::build_spe_layout(SpeLayoutParams::default())?);
    let data = ctx.read(input)?;
    if extract {
        let frames = spm::read_stream(&layout, &data)?;
        let bits = spm::extract_fddi(&layout, &frames)?;
        if bits.len() % 8 != 0 {
            bail!("stream carries {} bits, not whole bytes", bits.len());
        }
        Ok(Outcome::ok(bits_to_bytes(&bits)))
    } else {
        let frames = spm::map_fddi(&layout, &bytes_to_bits(&data), ctx.exec);
        Ok(Outcome::ok(spm::write_stream(&frames)))
    }
}

fn rates(ctx: &mut Ctx, level: Option<u32>) -> Result<Outcome> {
    let entries = match level {
        Some(n) => vec![spm::sts_rates(n)?],
        None => spm::rate_table(),
    };
    Ok(Outcome::ok(report::rates_table(&entries).emit(ctx.format)))
}

fn fddi2_plan(ctx: &mut Ctx, modes: &str, requests: &Path) -> Result<Outcome> {
    let modes: ModeMap = modes.parse()?;
    let requests = fddi2::parse_requests(&ctx.read_text(requests)?)?;
    let alloc = fddi2::allocate(modes, &requests)?;
    let mut t = Table::new(["wbc", "mode", "channel", "bytes", "kbps"]);
    for r in alloc.rows() {
        t.push(vec![
            r.wbc.into(),
            r.mode.as_str().into(),
            r.channel.map(|c| c.to_string()).unwrap_or_default().into(),
            r.bytes.into(),
            r.kbps().into(),
        ]);
    }
    Ok(Outcome::ok(t.emit(ctx.format)))
}

fn plan(ctx: &mut Ctx, ring: &Path, media: Option<&Path>) -> Result<Outcome> {
    let table = match media {
        Some(p) => MediaTable::parse(&ctx.read_text(p)?)?,
        None => MediaTable::standard(),
    };
    let desc = link_planner::parse_ring(&ctx.read_text(ring)?)?;
    let rep = link_planner::validate_ring(&table, &desc.links, desc.n_stations, ctx.exec);
    let mut t = Table::new(["link", "rule", "verdict", "detail"]);
    for row in rep.rows() {
        t.push(row.into_iter().map(Cell::from).collect());
    }
    let failure = (rep.verdict == Verdict::Fail).then(|| "ring violates planning rules".to_string());
    Ok(Outcome { bytes: t.emit(ctx.format), failure })
}
