//! Batch analytics front end: parse -> replay -> classify -> respond, with
//! deterministic CSV outputs. Usage errors exit 2, data errors exit 1 with a
//! single machine-readable `error:` line on stderr.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io::{self, BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use spreadbook::classify::{relative_amounts, SpreadChangeEvent, SpreadChangeKind};
use spreadbook::feed::{self, OrderEvent};
use spreadbook::pipeline::{by_kind, symbol_day, SymbolDay};
use spreadbook::response::{
    cross_matrix, log_lag_grid, market_response, self_response_event_scale,
    self_response_physical, CrossResponseMatrix, Day, MidpointTrajectory, ResponseCurve,
    SymbolSeries,
};
use spreadbook::synth::{encode, generate, GeneratorConfig};
use spreadbook::types::{Session, Symbol};

#[derive(Parser)]
#[command(name = "spreadbook", version, about = "Order-book reconstruction and price-response analytics")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Decode a feed and report per-symbol event counts.
    Parse(ParseArgs),
    /// Replay books and report per-symbol/day quotes and average spreads.
    Replay(ReplayArgs),
    /// Classify spread changes into the O/D/T table.
    Classify(ClassifyArgs),
    /// Self-response curves of one event kind.
    Respond(RespondArgs),
    /// Cross-response matrices at fixed lags.
    Cross(CrossArgs),
    /// Market response: mean off-diagonal cross-response per lag.
    Market(MarketArgs),
    /// Generate a synthetic feed.
    Generate(GenerateArgs),
    /// Emit the full set of figure-input CSVs.
    Figures(FiguresArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Binary,
    Csv,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Kind {
    Trade,
    Deletion,
    Placement,
}

impl Kind {
    fn to_kind(self) -> SpreadChangeKind {
        match self {
            Kind::Trade => SpreadChangeKind::Trade,
            Kind::Deletion => SpreadChangeKind::Deletion,
            Kind::Placement => SpreadChangeKind::Placement,
        }
    }

    fn label(self) -> &'static str {
        self.to_kind().label()
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Scale {
    Event,
    Physical,
}

#[derive(Args)]
struct InputArgs {
    /// Input feed file; repeat the flag for multiple trading days.
    #[arg(long = "input", short = 'i', required = true)]
    inputs: Vec<PathBuf>,
    #[arg(long, value_enum, default_value = "binary")]
    format: Format,
    /// Comma-separated ticker whitelist; overrides the config file.
    #[arg(long, value_delimiter = ',')]
    universe: Vec<String>,
    /// TOML config file (universe, session).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Session open, HH:MM.
    #[arg(long = "session-open")]
    session_open: Option<String>,
    /// Session close, HH:MM.
    #[arg(long = "session-close")]
    session_close: Option<String>,
}

#[derive(Args)]
struct OutputArg {
    /// Output file; defaults to stdout (or $SPREADBOOK_OUT/<name>.csv).
    #[arg(long, short = 'o')]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct ParseArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    out: OutputArg,
}

#[derive(Args)]
struct ReplayArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    out: OutputArg,
}

#[derive(Args)]
struct ClassifyArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    out: OutputArg,
    /// Keep individual trade fills instead of merging same-aggressor legs.
    #[arg(long = "no-merge")]
    no_merge: bool,
}

#[derive(Args)]
struct RespondArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    out: OutputArg,
    #[arg(long, value_enum)]
    kind: Kind,
    #[arg(long, value_enum, default_value = "physical")]
    scale: Scale,
    /// Use every event of the kind, not only quote-changing ones.
    #[arg(long = "all-events")]
    all_events: bool,
    /// One output file per day; requires --output as a filename prefix.
    #[arg(long = "per-day")]
    per_day: bool,
    /// Largest lag (seconds or events) on the log-spaced grid.
    #[arg(long = "max-lag", default_value_t = 1_000)]
    max_lag: u64,
    #[arg(long = "no-merge")]
    no_merge: bool,
}

#[derive(Args)]
struct CrossArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    out: OutputArg,
    #[arg(long, value_enum, default_value = "trade")]
    kind: Kind,
    /// Comma-separated lags in seconds.
    #[arg(long = "tau-list", value_delimiter = ',', default_value = "1,10,100,1000")]
    tau_list: Vec<u64>,
}

#[derive(Args)]
struct MarketArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    out: OutputArg,
    #[arg(long, value_enum, default_value = "trade")]
    kind: Kind,
    #[arg(long = "max-lag", default_value_t = 1_000)]
    max_lag: u64,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Comma-separated tickers.
    #[arg(long, value_delimiter = ',', default_value = "SYN")]
    symbols: Vec<String>,
    /// TOML config file; the `[generator]` table overrides the defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long = "session-open")]
    session_open: Option<String>,
    #[arg(long = "session-close")]
    session_close: Option<String>,
    #[arg(long, value_enum, default_value = "binary")]
    format: Format,
    #[command(flatten)]
    out: OutputArg,
}

#[derive(Args)]
struct FiguresArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Output directory; defaults to $SPREADBOOK_OUT or the current directory.
    #[arg(long = "out-dir")]
    out_dir: Option<PathBuf>,
    #[arg(long = "max-lag", default_value_t = 1_000)]
    max_lag: u64,
    #[arg(long = "tau-list", value_delimiter = ',', default_value = "10")]
    tau_list: Vec<u64>,
}

enum CliError {
    Usage(String),
    Data(anyhow::Error),
}

impl From<anyhow::Error> for CliError {
    fn from(e: anyhow::Error) -> CliError {
        CliError::Data(e)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.cmd {
        Cmd::Parse(args) => cmd_parse(args),
        Cmd::Replay(args) => cmd_replay(args),
        Cmd::Classify(args) => cmd_classify(args),
        Cmd::Respond(args) => cmd_respond(args),
        Cmd::Cross(args) => cmd_cross(args),
        Cmd::Market(args) => cmd_market(args),
        Cmd::Generate(args) => cmd_generate(args),
        Cmd::Figures(args) => cmd_figures(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Data(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

#[derive(Deserialize, Default)]
struct FileConfig {
    universe: Option<Vec<String>>,
    session: Option<SessionConfig>,
    generator: Option<GeneratorConfig>,
}

#[derive(Deserialize)]
struct SessionConfig {
    open: String,
    close: String,
}

fn read_config(path: &Option<PathBuf>) -> Result<FileConfig, CliError> {
    let Some(path) = path else {
        return Ok(FileConfig::default());
    };
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading config {}", path.display()))?;
    toml::from_str(&text).map_err(|e| CliError::Usage(format!("bad config file: {e}")))
}

fn parse_clock(label: &str, s: &str) -> Result<u64, CliError> {
    Session::parse_time(s)
        .ok_or_else(|| CliError::Usage(format!("bad {label} time {s:?}, expected HH:MM")))
}

fn resolve_session(
    config: &FileConfig,
    open: &Option<String>,
    close: &Option<String>,
) -> Result<Session, CliError> {
    let mut session = Session::default();
    if let Some(sc) = &config.session {
        session = Session::new(
            parse_clock("session open", &sc.open)?,
            parse_clock("session close", &sc.close)?,
        );
    }
    if let Some(s) = open {
        session.open = parse_clock("session open", s)?;
    }
    if let Some(s) = close {
        session.close = parse_clock("session close", s)?;
    }
    if session.open >= session.close {
        return Err(CliError::Usage("session open must precede close".into()));
    }
    Ok(session)
}

fn parse_symbols(names: &[String]) -> Result<Vec<Symbol>, CliError> {
    names
        .iter()
        .map(|s| Symbol::new(s).map_err(|e| CliError::Usage(format!("bad ticker {s:?}: {e}"))))
        .collect()
}

struct LoadedDay {
    label: String,
    partitions: BTreeMap<Symbol, Vec<OrderEvent>>,
    stats: feed::ParseStats,
}

fn day_label(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

fn load_days(args: &InputArgs) -> Result<(Vec<LoadedDay>, Session), CliError> {
    let config = read_config(&args.config)?;
    let session = resolve_session(&config, &args.session_open, &args.session_close)?;
    let universe_names = if !args.universe.is_empty() {
        Some(args.universe.clone())
    } else {
        config.universe.clone()
    };
    let universe: Option<BTreeSet<Symbol>> = match universe_names {
        Some(names) => Some(parse_symbols(&names)?.into_iter().collect()),
        None => None,
    };

    let mut days = Vec::with_capacity(args.inputs.len());
    for path in &args.inputs {
        let label = day_label(path);
        let day = match args.format {
            Format::Binary => {
                let bytes =
                    fs::read(path).with_context(|| format!("reading {}", path.display()))?;
                let parsed = feed::parse_stream(&bytes, universe.as_ref())
                    .with_context(|| format!("decoding {}", path.display()))?;
                LoadedDay { label, partitions: parsed.partitions, stats: parsed.stats }
            }
            Format::Csv => {
                let file =
                    fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
                let events = feed::ingest_csv(BufReader::new(file))
                    .with_context(|| format!("ingesting {}", path.display()))?;
                let mut partitions: BTreeMap<Symbol, Vec<OrderEvent>> = BTreeMap::new();
                let mut stats = feed::ParseStats::default();
                for ev in events {
                    if universe.as_ref().is_none_or(|u| u.contains(&ev.symbol)) {
                        stats.parsed += 1;
                        partitions.entry(ev.symbol).or_default().push(ev);
                    } else {
                        stats.dropped += 1;
                    }
                }
                for events in partitions.values_mut() {
                    events.sort_by_key(|e| e.timestamp);
                }
                LoadedDay { label, partitions, stats }
            }
        };
        days.push(day);
    }
    Ok((days, session))
}

fn open_output(out: &OutputArg, default_name: &str) -> Result<Box<dyn Write>, CliError> {
    let path = match (&out.output, std::env::var_os("SPREADBOOK_OUT")) {
        (Some(p), _) => Some(p.clone()),
        (None, Some(dir)) => Some(PathBuf::from(dir).join(default_name)),
        (None, None) => None,
    };
    match path {
        Some(p) => {
            let f = fs::File::create(&p)
                .with_context(|| format!("creating {}", p.display()))?;
            Ok(Box::new(io::BufWriter::new(f)))
        }
        None => Ok(Box::new(io::BufWriter::new(io::stdout()))),
    }
}

fn fmt_opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn replay_days(
    days: &[LoadedDay],
    session: Session,
    merge: bool,
) -> Result<Vec<Vec<SymbolDay>>, CliError> {
    days.iter()
        .map(|day| {
            day.partitions
                .iter()
                .map(|(&sym, events)| {
                    symbol_day(sym, events, session, merge)
                        .map_err(|e| anyhow!("{} / {}: {e}", day.label, sym).into())
                })
                .collect()
        })
        .collect()
}

fn cmd_parse(args: ParseArgs) -> Result<(), CliError> {
    let (days, _) = load_days(&args.input)?;
    let mut w = open_output(&args.out, "parse.csv")?;
    let mut emit = || -> io::Result<()> {
        writeln!(w, "date,symbol,events")?;
        for day in &days {
            for (sym, events) in &day.partitions {
                writeln!(w, "{},{},{}", day.label, sym, events.len())?;
            }
        }
        w.flush()
    };
    emit().context("writing output")?;
    for day in &days {
        eprintln!(
            "{}: parsed={} skipped={} dropped={}",
            day.label, day.stats.parsed, day.stats.skipped, day.stats.dropped
        );
    }
    Ok(())
}

fn cmd_replay(args: ReplayArgs) -> Result<(), CliError> {
    let (days, session) = load_days(&args.input)?;
    let replayed = replay_days(&days, session, true)?;
    let mut rows: Vec<(Symbol, &str, String)> = Vec::new();
    for (day, sds) in days.iter().zip(&replayed) {
        for sd in sds {
            rows.push((
                sd.symbol,
                &day.label,
                format!(
                    "{},{},{},{},{},{}",
                    sd.symbol,
                    day.label,
                    sd.deltas.len(),
                    fmt_opt(sd.book.best_bid()),
                    fmt_opt(sd.book.best_ask()),
                    fmt_opt(sd.twa_spread),
                ),
            ));
        }
    }
    rows.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
    let mut w = open_output(&args.out, "replay.csv")?;
    let mut emit = || -> io::Result<()> {
        writeln!(w, "symbol,date,events,best_bid,best_ask,twa_spread")?;
        for (_, _, row) in &rows {
            writeln!(w, "{row}")?;
        }
        w.flush()
    };
    emit().context("writing output")?;
    Ok(())
}

fn cmd_classify(args: ClassifyArgs) -> Result<(), CliError> {
    let (days, session) = load_days(&args.input)?;
    let replayed = replay_days(&days, session, !args.no_merge)?;
    let mut rows: Vec<(Symbol, &str, String)> = Vec::new();
    for (day, sds) in days.iter().zip(&replayed) {
        for sd in sds {
            if sd.quote_events.is_empty() {
                continue;
            }
            let ra = relative_amounts(&sd.quote_events)
                .map_err(|e| anyhow!("{} / {}: {e}", day.label, sd.symbol))?;
            rows.push((
                sd.symbol,
                &day.label,
                format!(
                    "{},{},{},{},{},{},{}",
                    sd.symbol,
                    day.label,
                    ra.o(),
                    ra.d(),
                    ra.t(),
                    ra.total(),
                    ra.balance_deviation()
                ),
            ));
        }
    }
    rows.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
    let mut w = open_output(&args.out, "classify.csv")?;
    let mut emit = || -> io::Result<()> {
        writeln!(w, "symbol,date,O,D,T,total,deviation")?;
        for (_, _, row) in &rows {
            writeln!(w, "{row}")?;
        }
        w.flush()
    };
    emit().context("writing output")?;
    Ok(())
}

fn write_curve(
    w: &mut dyn Write,
    kind: &str,
    scale: &str,
    curve: &ResponseCurve,
) -> io::Result<()> {
    for ((lag, value), count) in curve.lags.iter().zip(&curve.values).zip(&curve.counts) {
        writeln!(w, "{kind},{scale},{lag},{},{count}", fmt_opt(*value))?;
    }
    Ok(())
}

fn curve_for_days(
    sds: &[&SymbolDay],
    kind: SpreadChangeKind,
    scale: Scale,
    all_events: bool,
    grid: &[u64],
) -> Result<ResponseCurve, CliError> {
    let filtered: Vec<Vec<SpreadChangeEvent>> = sds
        .iter()
        .map(|sd| by_kind(if all_events { &sd.all_events } else { &sd.quote_events }, kind))
        .collect();
    let curve = match scale {
        Scale::Event => {
            let slices: Vec<&[SpreadChangeEvent]> =
                filtered.iter().map(|v| v.as_slice()).collect();
            self_response_event_scale(&slices, grid)
        }
        Scale::Physical => {
            let rdays: Vec<Day<'_>> = sds
                .iter()
                .zip(&filtered)
                .map(|(sd, events)| Day {
                    events,
                    traj: &sd.trajectory,
                    session: sd.session,
                })
                .collect();
            self_response_physical(&rdays, grid)
        }
    };
    curve.map_err(|e| anyhow!("response: {e}").into())
}

fn cmd_respond(args: RespondArgs) -> Result<(), CliError> {
    let (days, session) = load_days(&args.input)?;
    let replayed = replay_days(&days, session, !args.no_merge)?;
    let grid = log_lag_grid(args.max_lag);
    let scale_label = match args.scale {
        Scale::Event => "event",
        Scale::Physical => "physical",
    };
    if args.per_day {
        let Some(prefix) = &args.out.output else {
            return Err(CliError::Usage("--per-day requires --output as a filename prefix".into()));
        };
        for (day, sds) in days.iter().zip(&replayed) {
            let refs: Vec<&SymbolDay> = sds.iter().collect();
            let curve =
                curve_for_days(&refs, args.kind.to_kind(), args.scale, args.all_events, &grid)?;
            let path = PathBuf::from(format!("{}{}.csv", prefix.display(), day.label));
            let f = fs::File::create(&path)
                .with_context(|| format!("creating {}", path.display()))?;
            let mut w = io::BufWriter::new(f);
            (|| -> io::Result<()> {
                writeln!(w, "kind,scale,tau,value,count")?;
                write_curve(&mut w, args.kind.label(), scale_label, &curve)?;
                w.flush()
            })()
            .context("writing output")?;
        }
        return Ok(());
    }
    let refs: Vec<&SymbolDay> = replayed.iter().flatten().collect();
    let curve = curve_for_days(&refs, args.kind.to_kind(), args.scale, args.all_events, &grid)?;
    let mut w = open_output(&args.out, "respond.csv")?;
    (|| -> io::Result<()> {
        writeln!(w, "kind,scale,tau,value,count")?;
        write_curve(&mut w, args.kind.label(), scale_label, &curve)?;
        w.flush()
    })()
    .context("writing output")?;
    Ok(())
}

/// Cross-response inputs: one series per symbol, aligned over all days.
/// Symbols missing on a day contribute an empty event list.
fn build_series<'a>(
    replayed: &'a [Vec<SymbolDay>],
    filtered: &'a [Vec<Vec<SpreadChangeEvent>>],
    empty_trajs: &'a BTreeMap<Symbol, MidpointTrajectory>,
    symbols: &[Symbol],
) -> Vec<SymbolSeries<'a>> {
    symbols
        .iter()
        .map(|&symbol| {
            let mut events: Vec<&'a [SpreadChangeEvent]> = Vec::with_capacity(replayed.len());
            let mut trajs: Vec<&'a MidpointTrajectory> = Vec::with_capacity(replayed.len());
            for (sds, evs) in replayed.iter().zip(filtered) {
                match sds.iter().position(|sd| sd.symbol == symbol) {
                    Some(k) => {
                        events.push(&evs[k]);
                        trajs.push(&sds[k].trajectory);
                    }
                    None => {
                        events.push(&[]);
                        trajs.push(&empty_trajs[&symbol]);
                    }
                }
            }
            SymbolSeries { symbol, events, trajs }
        })
        .collect()
}

fn matrices_for(
    replayed: &[Vec<SymbolDay>],
    session: Session,
    kind: SpreadChangeKind,
    taus: &[u64],
) -> Result<Vec<CrossResponseMatrix>, CliError> {
    let symbols: BTreeSet<Symbol> = replayed
        .iter()
        .flatten()
        .map(|sd| sd.symbol)
        .collect();
    let symbols: Vec<Symbol> = symbols.into_iter().collect();
    if symbols.len() < 2 {
        return Err(CliError::Data(anyhow!(
            "cross-response requires at least two symbols, got {}",
            symbols.len()
        )));
    }
    let filtered: Vec<Vec<Vec<SpreadChangeEvent>>> = replayed
        .iter()
        .map(|sds| sds.iter().map(|sd| by_kind(&sd.quote_events, kind)).collect())
        .collect();
    let empty_trajs: BTreeMap<Symbol, MidpointTrajectory> = symbols
        .iter()
        .map(|&s| (s, MidpointTrajectory::new(s)))
        .collect();
    let series = build_series(replayed, &filtered, &empty_trajs, &symbols);
    let sessions = vec![session; replayed.len()];
    taus.iter()
        .map(|&tau| {
            cross_matrix(&series, &sessions, tau).map_err(|e| anyhow!("cross-response: {e}").into())
        })
        .collect()
}

fn cmd_cross(args: CrossArgs) -> Result<(), CliError> {
    if args.tau_list.is_empty() {
        return Err(CliError::Usage("--tau-list must not be empty".into()));
    }
    let (days, session) = load_days(&args.input)?;
    let replayed = replay_days(&days, session, true)?;
    let matrices = matrices_for(&replayed, session, args.kind.to_kind(), &args.tau_list)?;
    let mut w = open_output(&args.out, "cross.csv")?;
    (|| -> io::Result<()> {
        writeln!(w, "tau,row_symbol,col_symbol,R,rho")?;
        for m in &matrices {
            for i in 0..m.n() {
                for j in 0..m.n() {
                    writeln!(
                        w,
                        "{},{},{},{},{}",
                        m.tau_secs,
                        m.symbols[i],
                        m.symbols[j],
                        m.value(i, j),
                        m.rho(i, j)
                    )?;
                }
            }
        }
        w.flush()
    })()
    .context("writing output")?;
    Ok(())
}

fn cmd_market(args: MarketArgs) -> Result<(), CliError> {
    let (days, session) = load_days(&args.input)?;
    let replayed = replay_days(&days, session, true)?;
    let grid = log_lag_grid(args.max_lag);
    let matrices = matrices_for(&replayed, session, args.kind.to_kind(), &grid)?;
    let curve = market_response(&matrices).map_err(|e| anyhow!("market response: {e}"))?;
    let mut w = open_output(&args.out, "market.csv")?;
    (|| -> io::Result<()> {
        writeln!(w, "kind,scale,tau,value,count")?;
        write_curve(&mut w, args.kind.label(), "market", &curve)?;
        w.flush()
    })()
    .context("writing output")?;
    Ok(())
}

fn cmd_generate(args: GenerateArgs) -> Result<(), CliError> {
    let config = read_config(&args.config)?;
    let symbols = parse_symbols(&args.symbols)?;
    let mut cfg = config
        .generator
        .unwrap_or_else(|| GeneratorConfig::calibrated(args.seed, symbols.clone()));
    cfg.seed = args.seed;
    if !symbols.is_empty() {
        cfg.symbols = symbols;
    }
    if let Some(s) = &args.session_open {
        cfg.session.open = parse_clock("session open", s)?;
    }
    if let Some(s) = &args.session_close {
        cfg.session.close = parse_clock("session close", s)?;
    }
    let market = generate(&cfg).map_err(|e| anyhow!("generate: {e}"))?;
    let mut w = open_output(&args.out, "generated.bin")?;
    match args.format {
        Format::Binary => {
            let bytes = encode(&market.streams).map_err(|e| anyhow!("encode: {e}"))?;
            w.write_all(&bytes).context("writing output")?;
        }
        Format::Csv => {
            // merge the per-symbol streams in (timestamp, symbol) order
            let mut merged: Vec<(u64, Symbol, usize, &OrderEvent)> = Vec::new();
            for (&sym, events) in &market.streams {
                for (k, ev) in events.iter().enumerate() {
                    merged.push((ev.timestamp, sym, k, ev));
                }
            }
            merged.sort_by_key(|&(t, s, k, _)| (t, s, k));
            (|| -> io::Result<()> {
                writeln!(w, "{}", feed::CSV_HEADER)?;
                for (_, _, _, ev) in merged {
                    feed::write_csv_row(ev, &mut w)?;
                }
                Ok(())
            })()
            .context("writing output")?;
        }
    }
    w.flush().context("writing output")?;
    Ok(())
}

fn cmd_figures(args: FiguresArgs) -> Result<(), CliError> {
    let (days, session) = load_days(&args.input)?;
    let replayed = replay_days(&days, session, true)?;
    let dir = args
        .out_dir
        .or_else(|| std::env::var_os("SPREADBOOK_OUT").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    let create = |name: &str| -> Result<io::BufWriter<fs::File>, CliError> {
        let path = dir.join(name);
        Ok(io::BufWriter::new(fs::File::create(&path).with_context(
            || format!("creating {}", path.display()),
        )?))
    };

    // spread-change frequencies (O/D/T table)
    let mut rows: Vec<String> = Vec::new();
    for (day, sds) in days.iter().zip(&replayed) {
        for sd in sds {
            if sd.quote_events.is_empty() {
                continue;
            }
            let ra = relative_amounts(&sd.quote_events)
                .map_err(|e| anyhow!("{} / {}: {e}", day.label, sd.symbol))?;
            rows.push(format!(
                "{},{},{},{},{},{},{}",
                sd.symbol,
                day.label,
                ra.o(),
                ra.d(),
                ra.t(),
                ra.total(),
                ra.balance_deviation()
            ));
        }
    }
    rows.sort();
    let mut w = create("spread_change_frequencies.csv")?;
    (|| -> io::Result<()> {
        writeln!(w, "symbol,date,O,D,T,total,deviation")?;
        for row in &rows {
            writeln!(w, "{row}")?;
        }
        w.flush()
    })()
    .context("writing output")?;

    // self-response curves, both scales, all kinds
    let grid = log_lag_grid(args.max_lag);
    let refs: Vec<&SymbolDay> = replayed.iter().flatten().collect();
    for (name, scale, label) in [
        ("response_event_scale.csv", Scale::Event, "event"),
        ("response_physical.csv", Scale::Physical, "physical"),
    ] {
        let mut w = create(name)?;
        writeln!(w, "kind,scale,tau,value,count").context("writing output")?;
        for kind in [Kind::Trade, Kind::Deletion, Kind::Placement] {
            let curve = curve_for_days(&refs, kind.to_kind(), scale, false, &grid)?;
            write_curve(&mut w, kind.label(), label, &curve).context("writing output")?;
        }
        w.flush().context("writing output")?;
    }

    // cross-response matrices, when there is more than one symbol
    let n_symbols = replayed
        .iter()
        .flatten()
        .map(|sd| sd.symbol)
        .collect::<BTreeSet<_>>()
        .len();
    if n_symbols >= 2 {
        let matrices = matrices_for(&replayed, session, SpreadChangeKind::Trade, &args.tau_list)?;
        for m in &matrices {
            let mut w = create(&format!("cross_matrix_{}s.csv", m.tau_secs))?;
            (|| -> io::Result<()> {
                writeln!(w, "tau,row_symbol,col_symbol,R,rho")?;
                for i in 0..m.n() {
                    for j in 0..m.n() {
                        writeln!(
                            w,
                            "{},{},{},{},{}",
                            m.tau_secs,
                            m.symbols[i],
                            m.symbols[j],
                            m.value(i, j),
                            m.rho(i, j)
                        )?;
                    }
                }
                w.flush()
            })()
            .context("writing output")?;
        }
    }
    Ok(())
}
