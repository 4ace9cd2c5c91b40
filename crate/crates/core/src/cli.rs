//! The `sunband` command line.
//!
//! Every stage reads and writes plain CSV so each can run on its own:
//!
//! ```text
//! sunband synth    --output series.csv --days 30 --regime broken --seed 1
//! sunband forecast --input series.csv --output forecast.csv
//! sunband bands    --input forecast.csv --output bands.csv
//! sunband normtest --input forecast.csv
//! sunband report   --input series.csv --output out/
//! ```
//!
//! `report` runs the whole chain in-process and writes the same intermediate
//! files the individual subcommands would.

use std::ffi::OsString;
use std::fmt;
use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::bands::{self, BandError, BandTrack, Cb2Config};
use crate::decomposition::{self, DecompositionError};
use crate::forecast::{self, ForecastError, ForecastTrack, TRACK_HEADER};
use crate::normality::{self, LillieforsTable, NormalityError, NormalityReport, REPORT_HEADER};
use crate::report::{self, PlotInputs, PlotKind, ReportError};
use crate::risk::{self, RiskError};
use crate::series::{self, DaylightMask, IrradianceSeries, SeriesError};
use crate::synth::{self, CloudRegime, SynthConfig, SynthError};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DATA: i32 = 3;
pub const EXIT_UNCALIBRATABLE: i32 = 4;
pub const EXIT_IO: i32 = 5;

/// Header of a bare error-sample CSV accepted by `normtest`.
pub const DIFF_HEADER: &str = "diff";

#[derive(Debug, Parser)]
#[command(name = "sunband", version, about = "Solar irradiance forecasts with confidence bands")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic minute-resolution irradiance series.
    Synth(SynthArgs),
    /// Series CSV in, forecast-track CSV out.
    Forecast(ForecastArgs),
    /// Forecast-track CSV in, band CSV out; prints the alpha history.
    Bands(BandArgs),
    /// Run the normality battery on forecast errors.
    Normtest(NormtestArgs),
    /// Full pipeline: intermediate CSVs, score cards and figures.
    Report(ReportArgs),
    /// Regenerate the Lilliefors critical-value table by simulation.
    LillieforsTable(TableArgs),
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub output: PathBuf,
    #[arg(long, default_value_t = 30)]
    pub days: usize,
    #[arg(long, default_value = "broken")]
    pub regime: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 48.69)]
    pub latitude: f64,
    #[arg(long, default_value_t = 152)]
    pub day_of_year: u32,
    #[arg(long, default_value_t = 1000.0)]
    pub peak: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Trend,
    Persistence,
}

#[derive(Debug, Clone, Args)]
pub struct ForecastParams {
    #[arg(long, default_value_t = decomposition::DEFAULT_WINDOW_W)]
    pub window_w: usize,
    #[arg(long, default_value_t = forecast::DEFAULT_HORIZON)]
    pub horizon: usize,
    #[arg(long, value_enum, default_value_t = Method::Trend)]
    pub method: Method,
}

#[derive(Debug, Clone, Args)]
pub struct BandParams {
    #[arg(long, default_value_t = series::DEFAULT_EPS_DAY)]
    pub eps_day: f64,
    #[arg(long, default_value_t = bands::DEFAULT_TARGET)]
    pub target: f64,
    #[arg(long, default_value_t = bands::DEFAULT_WINDOW_DAYS)]
    pub window_days: usize,
    #[arg(long, default_value_t = bands::DEFAULT_RECAL_EVERY)]
    pub recal_every: usize,
}

#[derive(Debug, Args)]
pub struct ForecastArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub output: PathBuf,
    #[command(flatten)]
    pub params: ForecastParams,
}

#[derive(Debug, Args)]
pub struct BandArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub output: PathBuf,
    /// Horizon the forecast track was built with.
    #[arg(long, default_value_t = forecast::DEFAULT_HORIZON)]
    pub horizon: usize,
    #[command(flatten)]
    pub params: BandParams,
    /// Emit the uncalibrated band (alpha = 1) instead.
    #[arg(long)]
    pub cb1: bool,
}

#[derive(Debug, Args)]
pub struct NormtestArgs {
    /// Forecast-track CSV, or a CSV with a single `diff` column.
    #[arg(long)]
    pub input: PathBuf,
    /// Defaults to standard output.
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, default_value_t = normality::DEFAULT_LEVEL)]
    pub level: f64,
    #[arg(long, default_value_t = series::DEFAULT_EPS_DAY)]
    pub eps_day: f64,
    #[arg(long, default_value_t = forecast::DEFAULT_HORIZON)]
    pub horizon: usize,
    /// Lilliefors table to use instead of the built-in one.
    #[arg(long)]
    pub table: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Output directory (created if missing).
    #[arg(long)]
    pub output: PathBuf,
    #[command(flatten)]
    pub forecast: ForecastParams,
    #[command(flatten)]
    pub bands: BandParams,
    #[arg(long, default_value_t = normality::DEFAULT_LEVEL)]
    pub level: f64,
    /// Zoom start, `YYYY-MM-DDTHH:MM:00Z`. Defaults to the last day.
    #[arg(long)]
    pub from: Option<String>,
    /// Zoom end (exclusive).
    #[arg(long)]
    pub to: Option<String>,
    #[arg(long, default_value_t = 60)]
    pub bins: usize,
    #[arg(long)]
    pub table: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TableArgs {
    #[arg(long)]
    pub output: PathBuf,
    #[arg(long, default_value_t = normality::DEFAULT_TABLE_SEED)]
    pub seed: u64,
    #[arg(long, default_value_t = normality::TABLE_REPLICATES)]
    pub replicates: usize,
}

/// Errors surfaced by the CLI, each mapped to an exit code.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(String),
    Uncalibratable(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Data(_) => EXIT_DATA,
            CliError::Uncalibratable(_) => EXIT_UNCALIBRATABLE,
            CliError::Io(_) => EXIT_IO,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Data(m) | CliError::Uncalibratable(m) | CliError::Io(m) => {
                f.write_str(m)
            }
        }
    }
}

macro_rules! data_error {
    ($($t:ty),*) => {$(
        impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                CliError::Data(e.to_string())
            }
        }
    )*};
}
data_error!(SeriesError, DecompositionError, ForecastError, RiskError, NormalityError, SynthError);

impl From<BandError> for CliError {
    fn from(e: BandError) -> Self {
        match e {
            BandError::Uncalibratable { .. } => CliError::Uncalibratable(e.to_string()),
            BandError::TargetOutOfRange(_) | BandError::ZeroParameter(_) | BandError::InvalidAlpha(_) => {
                CliError::Usage(e.to_string())
            }
            BandError::Misaligned(_) => CliError::Data(e.to_string()),
        }
    }
}

impl From<ReportError> for CliError {
    fn from(e: ReportError) -> Self {
        match e {
            ReportError::Io { .. } => CliError::Io(e.to_string()),
            ReportError::EmptyRange => CliError::Usage(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}

/// Parses `argv` (including the program name), runs, and returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match execute(&cli.command) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("sunband: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(command: &Command) -> Result<(), CliError> {
    match command {
        Command::Synth(a) => cmd_synth(a),
        Command::Forecast(a) => cmd_forecast(a),
        Command::Bands(a) => cmd_bands(a),
        Command::Normtest(a) => cmd_normtest(a),
        Command::Report(a) => cmd_report(a),
        Command::LillieforsTable(a) => cmd_table(a),
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text)
        .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))
}

fn cmd_synth(a: &SynthArgs) -> Result<(), CliError> {
    let regime: CloudRegime = a.regime.parse().map_err(|e: SynthError| CliError::Usage(e.to_string()))?;
    let cfg = SynthConfig {
        latitude: a.latitude,
        day_of_year: a.day_of_year,
        days: a.days,
        clear_sky_peak: a.peak,
        cloud_regime: regime,
        seed: a.seed,
        ..SynthConfig::default()
    };
    let s = synth::generate(&cfg).map_err(|e| CliError::Usage(e.to_string()))?;
    write(&a.output, &s.to_csv())
}

/// Forecast track for `series` under `params`.
pub fn build_forecast(series: &IrradianceSeries, params: &ForecastParams) -> Result<ForecastTrack, CliError> {
    if params.horizon == 0 {
        return Err(CliError::Usage("forecast: --horizon must be at least 1".into()));
    }
    match params.method {
        Method::Trend => {
            if params.window_w < 2 {
                return Err(CliError::Usage("decomposition: --window-w must be at least 2".into()));
            }
            let d = decomposition::extract_trend(series, params.window_w)?;
            Ok(forecast::forecast_trend(series, &d, params.horizon)?)
        }
        Method::Persistence => Ok(forecast::forecast_persistence(series, params.horizon)?),
    }
}

fn cmd_forecast(a: &ForecastArgs) -> Result<(), CliError> {
    let series = IrradianceSeries::from_csv(&read(&a.input)?)?;
    let track = build_forecast(&series, &a.params)?;
    write(&a.output, &track.to_csv())
}

fn check_band_params(p: &BandParams) -> Result<(), CliError> {
    if p.eps_day.is_nan() || p.eps_day < 0.0 {
        return Err(CliError::Usage("series: --eps-day must be nonnegative".into()));
    }
    Ok(())
}

/// CB1 and CB2 for a forecast track.
pub fn build_bands(track: &ForecastTrack, p: &BandParams) -> Result<(BandTrack, BandTrack), CliError> {
    check_band_params(p)?;
    let vol = risk::volatility(track)?;
    let mask = DaylightMask::from_values(track.realized(), p.eps_day);
    let cfg = Cb2Config {
        window_days: p.window_days,
        target: p.target,
        recal_every: p.recal_every,
        alpha_override: None,
    };
    let cb2 = bands::band_cb2(track, &vol, &mask, &cfg)?;
    if cb2.calibrations().iter().all(|c| c.alpha.is_none()) {
        return Err(CliError::Uncalibratable(
            "bands: no calibration window held an eligible record".into(),
        ));
    }
    let cb1 = bands::band_cb1(track, &vol)?;
    Ok((cb1, cb2))
}

fn cmd_bands(a: &BandArgs) -> Result<(), CliError> {
    let track = ForecastTrack::from_csv(&read(&a.input)?, a.horizon)?;
    if a.cb1 {
        check_band_params(&a.params)?;
        let vol = risk::volatility(&track)?;
        return write(&a.output, &bands::band_cb1(&track, &vol)?.to_csv());
    }
    let (_, cb2) = build_bands(&track, &a.params)?;
    write(&a.output, &cb2.to_csv())?;
    print!("{}", cb2.calibrations_csv());
    Ok(())
}

fn load_table(path: Option<&Path>) -> Result<Option<LillieforsTable>, CliError> {
    path.map(|p| read(p).and_then(|t| LillieforsTable::from_csv(&t).map_err(CliError::from)))
        .transpose()
}

/// The three-test battery rendered as CSV.
pub fn normtest_csv(sample: &[f64], level: f64, table: Option<&LillieforsTable>) -> Result<String, CliError> {
    let reports: Vec<NormalityReport> = match table {
        None => normality::battery(sample, level)?,
        Some(t) => {
            let mut r = normality::battery(sample, level)?;
            r[2] = normality::lilliefors_with_table(sample, level, t)?;
            r
        }
    };
    let mut out = String::from(REPORT_HEADER);
    out.push('\n');
    for r in reports {
        out.push_str(&r.csv_row());
        out.push('\n');
    }
    Ok(out)
}

fn parse_diff_column(text: &str) -> Result<Vec<f64>, CliError> {
    text.lines()
        .skip(1)
        .filter(|l| !l.is_empty())
        .enumerate()
        .map(|(i, l)| {
            l.trim()
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| CliError::Data(format!("normtest: line {}: bad value `{l}`", i + 2)))
        })
        .collect()
}

fn cmd_normtest(a: &NormtestArgs) -> Result<(), CliError> {
    let text = read(&a.input)?;
    let first = text.lines().next().unwrap_or("");
    let sample = if first == TRACK_HEADER {
        let track = ForecastTrack::from_csv(&text, a.horizon)?;
        let mask = DaylightMask::from_values(track.realized(), a.eps_day);
        report::daylight_errors(&track, &mask)
    } else if first == DIFF_HEADER {
        parse_diff_column(&text)?
    } else {
        return Err(CliError::Data(format!(
            "normtest: expected header `{TRACK_HEADER}` or `{DIFF_HEADER}`, found `{first}`"
        )));
    };
    let table = load_table(a.table.as_deref())?;
    let csv = normtest_csv(&sample, a.level, table.as_ref())?;
    match &a.output {
        Some(p) => write(p, &csv),
        None => {
            print!("{csv}");
            Ok(())
        }
    }
}

fn parse_time(s: &str) -> Result<DateTime<Utc>, CliError> {
    series::parse_timestamp(s, 0, s).map_err(|_| CliError::Usage(format!("bad timestamp `{s}`")))
}

fn cmd_report(a: &ReportArgs) -> Result<(), CliError> {
    let series = IrradianceSeries::from_csv(&read(&a.input)?)?;
    std::fs::create_dir_all(&a.output)
        .map_err(|e| CliError::Io(format!("cannot create {}: {e}", a.output.display())))?;
    let out = |name: &str| a.output.join(name);

    let track = build_forecast(&series, &a.forecast)?;
    write(&out("forecast.csv"), &track.to_csv())?;

    let (cb1, cb2) = build_bands(&track, &a.bands)?;
    write(&out("bands.csv"), &cb2.to_csv())?;
    write(&out("bands_cb1.csv"), &cb1.to_csv())?;
    write(&out("alpha.csv"), &cb2.calibrations_csv())?;

    let mask = DaylightMask::from_values(track.realized(), a.bands.eps_day);
    let diff = report::daylight_errors(&track, &mask);
    let table = load_table(a.table.as_deref())?;
    write(&out("normtest.csv"), &normtest_csv(&diff, a.level, table.as_ref())?)?;

    write(&out("scorecard.csv"), &report::score(&track, &cb2, &mask)?.to_csv())?;
    write(&out("scorecard_cb1.csv"), &report::score(&track, &cb1, &mask)?.to_csv())?;

    let inputs = PlotInputs {
        series: &series,
        forecast: Some(&track),
        band: Some(&cb2),
        diff: Some(&diff),
    };
    let last = series.time_at(series.len() - 1);
    let from = match &a.from {
        Some(s) => parse_time(s)?,
        None => last - chrono::Duration::minutes(1439).min(last - series.start()),
    };
    let to = match &a.to {
        Some(s) => parse_time(s)?,
        None => last + chrono::Duration::minutes(1),
    };
    report::emit_plot(&inputs, &PlotKind::Monthly, &out("monthly.svg"))?;
    report::emit_plot(&inputs, &PlotKind::Zoom { from, to }, &out("zoom.svg"))?;
    report::emit_plot(&inputs, &PlotKind::Histogram { bins: a.bins }, &out("histogram.svg"))?;
    Ok(())
}

fn cmd_table(a: &TableArgs) -> Result<(), CliError> {
    if a.replicates == 0 {
        return Err(CliError::Usage("lilliefors-table: --replicates must be positive".into()));
    }
    let t = LillieforsTable::generate(
        normality::TABLE_SIZES,
        normality::TABLE_LEVELS,
        a.replicates,
        a.seed,
        crate::exec::Execution::default(),
    );
    write(&a.output, &t.to_csv())
}
