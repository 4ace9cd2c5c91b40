//! End-to-end runs of the `sunband` binary.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn sunband(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sunband"))
        .args(args)
        .output()
        .expect("spawn sunband")
}

fn ok(args: &[&str]) -> Output {
    let out = sunband(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn path(dir: &Path, name: &str) -> PathBuf {
    dir.join(name)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn synth(dir: &Path, days: &str, seed: &str) -> PathBuf {
    let series = path(dir, "series.csv");
    ok(&["synth", "--output", s(&series), "--days", days, "--seed", seed]);
    series
}

#[test]
fn report_equals_composed_subcommands() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    let series = synth(dir, "6", "3");
    let forecast = path(dir, "forecast.csv");
    let bands = path(dir, "bands.csv");
    let cb1 = path(dir, "bands_cb1.csv");
    let normtest = path(dir, "normtest.csv");
    let report = path(dir, "report");

    ok(&["forecast", "--input", s(&series), "--output", s(&forecast)]);
    let alpha = ok(&["bands", "--input", s(&forecast), "--output", s(&bands)]).stdout;
    ok(&["bands", "--input", s(&forecast), "--output", s(&cb1), "--cb1"]);
    ok(&["normtest", "--input", s(&forecast), "--output", s(&normtest)]);
    ok(&["report", "--input", s(&series), "--output", s(&report)]);

    let read = |p: &Path| std::fs::read(p).unwrap();
    assert_eq!(read(&forecast), read(&report.join("forecast.csv")));
    assert_eq!(read(&bands), read(&report.join("bands.csv")));
    assert_eq!(read(&cb1), read(&report.join("bands_cb1.csv")));
    assert_eq!(read(&normtest), read(&report.join("normtest.csv")));
    assert_eq!(alpha, read(&report.join("alpha.csv")));
    for svg in ["monthly.svg", "zoom.svg", "histogram.svg"] {
        let text = String::from_utf8(read(&report.join(svg))).unwrap();
        assert!(text.starts_with("<svg") && text.trim_end().ends_with("</svg>"), "{svg}");
    }
    let card = String::from_utf8(read(&report.join("scorecard.csv"))).unwrap();
    assert_eq!(card.lines().count(), 2);
}

#[test]
fn synth_is_byte_identical_across_runs_and_seed_sensitive() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b, c) = (
        path(tmp.path(), "a.csv"),
        path(tmp.path(), "b.csv"),
        path(tmp.path(), "c.csv"),
    );
    ok(&["synth", "--output", s(&a), "--days", "2", "--seed", "9"]);
    ok(&["synth", "--output", s(&b), "--days", "2", "--seed", "9"]);
    ok(&["synth", "--output", s(&c), "--days", "2", "--seed", "10"]);
    let read = |p: &Path| std::fs::read(p).unwrap();
    assert_eq!(read(&a), read(&b));
    assert_ne!(read(&a), read(&c));
}

#[test]
fn normtest_on_gaussian_diff_column() {
    use rand::SeedableRng;
    use rand_distr::{Distribution, StandardNormal};

    let tmp = tempfile::tempdir().unwrap();
    let input = path(tmp.path(), "diff.csv");
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
    let mut text = String::from("diff\n");
    for _ in 0..400 {
        let z: f64 = StandardNormal.sample(&mut rng);
        text.push_str(&format!("{}\n", 3.0 * z + 1.0));
    }
    std::fs::write(&input, text).unwrap();
    let out = String::from_utf8(ok(&["normtest", "--input", s(&input)]).stdout).unwrap();
    let rows: Vec<&str> = out.lines().collect();
    assert_eq!(rows.len(), 4);
    assert_eq!(rows[0], sunband::normality::REPORT_HEADER);
    let names: Vec<&str> = rows[1..].iter().map(|r| r.split(',').next().unwrap()).collect();
    assert_eq!(names, ["jarque_bera", "kolmogorov_smirnov", "lilliefors"]);
    for r in &rows[1..] {
        let fields: Vec<&str> = r.split(',').collect();
        assert_eq!(fields.len(), 8);
        assert_eq!(fields[1], "400");
        assert!(fields[5] == "true" || fields[5] == "false");
    }
}

#[test]
fn exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    assert_eq!(sunband(&["nonsense"]).status.code(), Some(2));
    assert_eq!(
        sunband(&["synth", "--output", s(&path(dir, "x.csv")), "--regime", "foggy"]).status.code(),
        Some(2)
    );

    let bad = path(dir, "bad.csv");
    std::fs::write(&bad, "timestamp,ghi_wm2\n2013-06-01T00:00:00Z,-4\n").unwrap();
    let out = path(dir, "out.csv");
    assert_eq!(
        sunband(&["forecast", "--input", s(&bad), "--output", s(&out)]).status.code(),
        Some(3)
    );
    assert_eq!(
        sunband(&["forecast", "--input", s(&path(dir, "missing.csv")), "--output", s(&out)])
            .status
            .code(),
        Some(5)
    );

    // a night-only series has no daylight record to calibrate on
    let night = path(dir, "night.csv");
    let mut text = String::from("timestamp,ghi_wm2\n");
    for m in 0..600 {
        text.push_str(&format!("2013-06-01T{:02}:{:02}:00Z,0\n", m / 60, m % 60));
    }
    std::fs::write(&night, text).unwrap();
    let track = path(dir, "night_forecast.csv");
    ok(&["forecast", "--input", s(&night), "--output", s(&track)]);
    assert_eq!(
        sunband(&["bands", "--input", s(&track), "--output", s(&out)]).status.code(),
        Some(4)
    );
}
