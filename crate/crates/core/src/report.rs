//! Forecast/band scoring and SVG figures.
//!
//! Figures use a fixed palette: measured irradiance in blue, prediction in
//! red, band frontiers as black dashed lines; the error histogram has blue
//! bars with the fitted normal in red. All coordinates are printed with two
//! decimals, so identical inputs give byte-identical documents.

use std::fmt::Write as _;
use std::ops::Range;
use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use thiserror::Error;

use crate::bands::{covers, BandTrack};
use crate::forecast::ForecastTrack;
use crate::normality::{diff_histogram, Histogram, NormalityError};
use crate::series::{format_timestamp, minute_offset, DaylightMask, IrradianceSeries};

pub const SCORE_HEADER: &str = "rmse,mae,nrmse,coverage,mean_band_width,n_scored";

const WIDTH: f64 = 960.0;
const HEIGHT: f64 = 360.0;
const MARGIN_LEFT: f64 = 60.0;
const MARGIN_RIGHT: f64 = 20.0;
const MARGIN_TOP: f64 = 30.0;
const MARGIN_BOTTOM: f64 = 40.0;

const BLUE: &str = "#1f4fd1";
const RED: &str = "#d62728";
const BLACK: &str = "#000000";

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("report: no eligible record to score")]
    NoEligibleRecords,
    #[error("report: inputs are misaligned ({0})")]
    Misaligned(&'static str),
    #[error("report: empty plot range")]
    EmptyRange,
    #[error("report: cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Normality(#[from] NormalityError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoreCard {
    pub rmse: f64,
    pub mae: f64,
    /// RMSE over the mean realized value of the scored records.
    pub nrmse: f64,
    pub coverage: f64,
    pub mean_band_width: f64,
    pub n_scored: usize,
}

impl ScoreCard {
    pub fn to_csv(&self) -> String {
        format!(
            "{SCORE_HEADER}\n{},{},{},{},{},{}\n",
            self.rmse, self.mae, self.nrmse, self.coverage, self.mean_band_width, self.n_scored
        )
    }
}

/// Scores daylight records where the measurement, the prediction and both
/// frontiers are present.
pub fn score(
    forecast: &ForecastTrack,
    band: &BandTrack,
    mask: &DaylightMask,
) -> Result<ScoreCard, ReportError> {
    score_range(forecast, band, mask, 0..forecast.len())
}

pub fn score_range(
    forecast: &ForecastTrack,
    band: &BandTrack,
    mask: &DaylightMask,
    range: Range<usize>,
) -> Result<ScoreCard, ReportError> {
    if band.len() != forecast.len() || band.start() != forecast.start() {
        return Err(ReportError::Misaligned("forecast and band"));
    }
    if mask.len() != forecast.len() {
        return Err(ReportError::Misaligned("daylight mask"));
    }
    let (mut n, mut inside) = (0usize, 0usize);
    let (mut sq, mut abs, mut sum_real, mut width) = (0.0, 0.0, 0.0, 0.0);
    for i in range.start..range.end.min(forecast.len()) {
        if !mask.is_set(i) {
            continue;
        }
        let (Some(r), Some(p), Some((lo, hi))) =
            (forecast.realized()[i], forecast.predicted()[i], band.frontier(i))
        else {
            continue;
        };
        let e = r - p;
        n += 1;
        sq += e * e;
        abs += e.abs();
        sum_real += r;
        width += hi - lo;
        if covers(r, lo, hi) {
            inside += 1;
        }
    }
    if n == 0 {
        return Err(ReportError::NoEligibleRecords);
    }
    let nf = n as f64;
    let rmse = (sq / nf).sqrt();
    Ok(ScoreCard {
        rmse,
        mae: abs / nf,
        nrmse: rmse / (sum_real / nf),
        coverage: inside as f64 / nf,
        mean_band_width: width / nf,
        n_scored: n,
    })
}

/// Daylight forecast errors, in time order.
pub fn daylight_errors(forecast: &ForecastTrack, mask: &DaylightMask) -> Vec<f64> {
    (0..forecast.len())
        .filter(|&i| mask.is_set(i))
        .filter_map(|i| forecast.error(i))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub enum PlotKind {
    /// The whole series.
    Monthly,
    /// `[from, to)`.
    Zoom {
        from: DateTime<Utc>,
        to: DateTime<Utc>,
    },
    Histogram { bins: usize },
}

#[derive(Debug, Clone, Copy)]
pub struct PlotInputs<'a> {
    pub series: &'a IrradianceSeries,
    pub forecast: Option<&'a ForecastTrack>,
    pub band: Option<&'a BandTrack>,
    /// Sample for the histogram kind.
    pub diff: Option<&'a [f64]>,
}

pub fn render_plot(inputs: &PlotInputs<'_>, kind: &PlotKind) -> Result<String, ReportError> {
    match kind {
        PlotKind::Monthly => render_series(inputs, 0..inputs.series.len(), "Monthly view"),
        PlotKind::Zoom { from, to } => {
            let s = inputs.series;
            let lo = minute_offset(s.start(), *from).unwrap_or(0).min(s.len());
            let hi = if *to <= s.start() {
                0
            } else {
                minute_offset(s.start(), *to).unwrap_or(s.len()).min(s.len())
            };
            if from >= to || lo >= hi {
                return Err(ReportError::EmptyRange);
            }
            render_series(inputs, lo..hi, "Zoom")
        }
        PlotKind::Histogram { bins } => {
            let diff = inputs.diff.unwrap_or(&[]);
            let h = diff_histogram(diff, *bins)?;
            Ok(render_histogram(&h))
        }
    }
}

pub fn emit_plot(
    inputs: &PlotInputs<'_>,
    kind: &PlotKind,
    out: &Path,
) -> Result<(), ReportError> {
    let svg = render_plot(inputs, kind)?;
    std::fs::write(out, svg).map_err(|source| ReportError::Io {
        path: out.to_path_buf(),
        source,
    })
}

struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Frame {
    fn x(&self, v: f64) -> f64 {
        let span = (self.x1 - self.x0).max(f64::MIN_POSITIVE);
        MARGIN_LEFT + (v - self.x0) / span * (WIDTH - MARGIN_LEFT - MARGIN_RIGHT)
    }

    fn y(&self, v: f64) -> f64 {
        let span = (self.y1 - self.y0).max(f64::MIN_POSITIVE);
        HEIGHT - MARGIN_BOTTOM - (v - self.y0) / span * (HEIGHT - MARGIN_TOP - MARGIN_BOTTOM)
    }
}

fn nice_ceiling(v: f64) -> f64 {
    if v <= 0.0 {
        return 1.0;
    }
    let step = 10f64.powf(v.log10().floor());
    (v / step).ceil() * step
}

fn open_svg(out: &mut String, title: &str) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(out, r##"<rect width="100%" height="100%" fill="#ffffff"/>"##);
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="18" font-family="sans-serif" font-size="13" text-anchor="middle">{}</text>"#,
        WIDTH / 2.0,
        title
    );
}

fn axes(out: &mut String, frame: &Frame, y_label: &str, x_left: &str, x_right: &str) {
    let (l, r) = (MARGIN_LEFT, WIDTH - MARGIN_RIGHT);
    let (t, b) = (MARGIN_TOP, HEIGHT - MARGIN_BOTTOM);
    let _ = writeln!(
        out,
        r#"<g class="axes" stroke="{BLACK}" stroke-width="1" fill="none"><line x1="{l:.2}" y1="{b:.2}" x2="{r:.2}" y2="{b:.2}"/><line x1="{l:.2}" y1="{t:.2}" x2="{l:.2}" y2="{b:.2}"/></g>"#
    );
    let _ = writeln!(out, r#"<g font-family="sans-serif" font-size="10">"#);
    for i in 0..=4 {
        let v = frame.y0 + (frame.y1 - frame.y0) * i as f64 / 4.0;
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{:.2}</text>"#,
            l - 4.0,
            frame.y(v) + 3.0,
            v
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{l:.2}" y="{:.2}" text-anchor="start">{x_left}</text>"#,
        b + 16.0
    );
    let _ = writeln!(
        out,
        r#"<text x="{r:.2}" y="{:.2}" text-anchor="end">{x_right}</text>"#,
        b + 16.0
    );
    let _ = writeln!(
        out,
        r#"<text x="14" y="{:.2}" transform="rotate(-90 14 {:.2})" text-anchor="middle">{y_label}</text>"#,
        (t + b) / 2.0,
        (t + b) / 2.0
    );
    let _ = writeln!(out, "</g>");
}

/// One `<polyline>` per run of present samples.
fn polylines(
    out: &mut String,
    frame: &Frame,
    range: &Range<usize>,
    values: impl Fn(usize) -> Option<f64>,
    class: &str,
    color: &str,
    dashed: bool,
) {
    let dash = if dashed { r#" stroke-dasharray="6,4""# } else { "" };
    let _ = writeln!(
        out,
        r#"<g class="{class}" stroke="{color}" stroke-width="1" fill="none"{dash}>"#
    );
    let mut points = String::new();
    let flush = |out: &mut String, points: &mut String| {
        if !points.is_empty() {
            let _ = writeln!(out, r#"<polyline points="{}"/>"#, points.trim_end());
            points.clear();
        }
    };
    for i in range.clone() {
        match values(i) {
            Some(v) => {
                let _ = write!(points, "{:.2},{:.2} ", frame.x(i as f64), frame.y(v));
            }
            None => flush(out, &mut points),
        }
    }
    flush(out, &mut points);
    let _ = writeln!(out, "</g>");
}

fn render_series(
    inputs: &PlotInputs<'_>,
    range: Range<usize>,
    title: &str,
) -> Result<String, ReportError> {
    if range.is_empty() {
        return Err(ReportError::EmptyRange);
    }
    let s = inputs.series;
    if let Some(f) = inputs.forecast {
        if f.len() != s.len() || f.start() != s.start() {
            return Err(ReportError::Misaligned("series and forecast"));
        }
    }
    if let Some(b) = inputs.band {
        if b.len() != s.len() || b.start() != s.start() {
            return Err(ReportError::Misaligned("series and band"));
        }
    }

    let mut ymax = 0.0f64;
    for i in range.clone() {
        ymax = ymax.max(s.get(i).unwrap_or(0.0));
        if let Some(p) = inputs.forecast.and_then(|f| f.predicted()[i]) {
            ymax = ymax.max(p);
        }
        if let Some((_, hi)) = inputs.band.and_then(|b| b.frontier(i)) {
            ymax = ymax.max(hi);
        }
    }
    let frame = Frame {
        x0: range.start as f64,
        x1: (range.end - 1) as f64,
        y0: 0.0,
        y1: nice_ceiling(ymax),
    };

    let mut out = String::new();
    open_svg(&mut out, title);
    axes(
        &mut out,
        &frame,
        "W/m²",
        &format_timestamp(s.time_at(range.start)),
        &format_timestamp(s.time_at(range.end - 1)),
    );
    if let Some(b) = inputs.band {
        polylines(&mut out, &frame, &range, |i| b.lower()[i], "band-lower", BLACK, true);
        polylines(&mut out, &frame, &range, |i| b.upper()[i], "band-upper", BLACK, true);
    }
    polylines(&mut out, &frame, &range, |i| s.get(i), "measured", BLUE, false);
    if let Some(f) = inputs.forecast {
        polylines(&mut out, &frame, &range, |i| f.predicted()[i], "predicted", RED, false);
    }
    out.push_str("</svg>\n");
    Ok(out)
}

pub fn render_histogram(h: &Histogram) -> String {
    let bins = h.counts.len();
    let top = h
        .counts
        .iter()
        .map(|&c| c as f64)
        .chain(h.curve.iter().map(|p| p.1))
        .fold(0.0, f64::max);
    let (x0, x1) = if h.bin_width > 0.0 {
        (h.lo, h.hi)
    } else {
        (h.lo - 0.5, h.lo + 0.5)
    };
    let frame = Frame {
        x0,
        x1,
        y0: 0.0,
        y1: nice_ceiling(top),
    };
    let mut out = String::new();
    open_svg(&mut out, "Forecast error distribution");
    axes(&mut out, &frame, "count", &format!("{x0:.2}"), &format!("{x1:.2}"));
    let _ = writeln!(out, r#"<g class="bars" fill="{BLUE}" stroke="none">"#);
    let width = (x1 - x0) / bins as f64;
    for (b, &c) in h.counts.iter().enumerate() {
        let left = frame.x(x0 + b as f64 * width);
        let right = frame.x(x0 + (b + 1) as f64 * width);
        let y = frame.y(c as f64);
        let _ = writeln!(
            out,
            r#"<rect x="{left:.2}" y="{y:.2}" width="{:.2}" height="{:.2}"/>"#,
            (right - left).max(0.0),
            frame.y(0.0) - y
        );
    }
    let _ = writeln!(out, "</g>");
    if !h.curve.is_empty() {
        let pts: Vec<String> = h
            .curve
            .iter()
            .map(|(x, y)| format!("{:.2},{:.2}", frame.x(*x), frame.y(*y)))
            .collect();
        let _ = writeln!(
            out,
            r#"<g class="normal-fit" stroke="{RED}" stroke-width="1.5" fill="none"><polyline points="{}"/></g>"#,
            pts.join(" ")
        );
    }
    out.push_str("</svg>\n");
    out
}
