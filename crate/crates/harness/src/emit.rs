//! CSV, JSON and text rendering of runs, per-configuration statistics and
//! comparison reports.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::{Read, Write};

use npb_core::ProblemClass;
use serde::{Deserialize, Serialize};

use crate::execute::{OutputFormat, RunRecord};
use crate::stats::{summarize, ComparisonReport, SampleStats};
use crate::HarnessError;

pub const SECONDS_DIGITS: usize = 6;
pub const P_DIGITS: usize = 3;

/// Rounds to `digits` significant digits. The value printed with `{}` is
/// then the shortest string that reads back to the same double, so output
/// is stable for identical inputs.
pub fn round_sig(x: f64, digits: usize) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{:.*e}", digits.saturating_sub(1), x)
        .parse()
        .unwrap_or(x)
}

/// The fixed CSV schema.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsvRecord {
    pub benchmark: String,
    pub class: ProblemClass,
    pub workers: usize,
    pub rep: usize,
    pub seconds: f64,
    pub mflops: f64,
    pub verified: bool,
    pub safe_mode: bool,
}

pub const CSV_HEADER: [&str; 8] = [
    "benchmark",
    "class",
    "workers",
    "rep",
    "seconds",
    "mflops",
    "verified",
    "safe_mode",
];

impl From<&RunRecord> for CsvRecord {
    fn from(r: &RunRecord) -> Self {
        CsvRecord {
            benchmark: r.result.name.clone(),
            class: r.result.class,
            workers: r.result.workers,
            rep: r.rep,
            seconds: round_sig(r.result.seconds, SECONDS_DIGITS),
            mflops: round_sig(r.result.mflops, SECONDS_DIGITS),
            verified: r.result.verified,
            safe_mode: r.result.safe_mode,
        }
    }
}

/// Timing summary for one (benchmark, class, workers, mode) configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigStats {
    pub benchmark: String,
    pub class: ProblemClass,
    pub workers: usize,
    pub safe_mode: bool,
    pub best: f64,
    pub stats: SampleStats,
    /// Mean 1-worker time over this configuration's mean time, when a
    /// 1-worker sample of the same benchmark, class and mode exists.
    pub speedup: Option<f64>,
}

type ConfigKey = (String, ProblemClass, bool, usize);

/// Groups records by configuration, in benchmark, class, mode, worker order.
pub fn config_stats(records: &[RunRecord]) -> Vec<ConfigStats> {
    let mut groups: BTreeMap<ConfigKey, Vec<f64>> = BTreeMap::new();
    for r in records {
        let key = (
            r.result.name.clone(),
            r.result.class,
            r.result.safe_mode,
            r.result.workers,
        );
        groups.entry(key).or_default().push(r.result.seconds);
    }
    let mut out: Vec<ConfigStats> = groups
        .into_iter()
        .map(|((benchmark, class, safe_mode, workers), secs)| {
            let stats = summarize(&secs);
            ConfigStats {
                benchmark,
                class,
                workers,
                safe_mode,
                best: stats.min,
                stats,
                speedup: None,
            }
        })
        .collect();
    let base: Vec<(String, ProblemClass, bool, f64)> = out
        .iter()
        .filter(|c| c.workers == 1)
        .map(|c| (c.benchmark.clone(), c.class, c.safe_mode, c.stats.mean))
        .collect();
    for c in &mut out {
        c.speedup = base
            .iter()
            .find(|(b, k, s, _)| *b == c.benchmark && *k == c.class && *s == c.safe_mode)
            .map(|(_, _, _, mean)| {
                if c.workers == 1 {
                    1.0
                } else {
                    mean / c.stats.mean
                }
            });
    }
    out
}

pub fn write_csv<W: Write>(w: W, records: &[RunRecord]) -> Result<(), HarnessError> {
    let mut wtr = csv::WriterBuilder::new().has_headers(false).from_writer(w);
    wtr.write_record(CSV_HEADER)?;
    for r in records {
        wtr.serialize(CsvRecord::from(r))?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn read_csv<R: Read>(r: R) -> Result<Vec<CsvRecord>, HarnessError> {
    let mut rdr = csv::Reader::from_reader(r);
    let headers = rdr.headers()?.clone();
    if headers.iter().ne(CSV_HEADER) {
        return Err(HarnessError::Usage(format!(
            "unexpected CSV header `{}`",
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }
    Ok(rdr.deserialize().collect::<Result<_, _>>()?)
}

#[derive(Serialize)]
struct JsonDoc<'a> {
    results: Vec<CsvRecord>,
    stats: &'a [ConfigStats],
    reports: &'a [ComparisonReport],
}

pub const MULTIPLE_COMPARISON_NOTE: &str =
    "note: each comparison is tested separately at alpha = 0.05; no multiple-comparison correction is applied";

fn opt(x: Option<f64>, digits: usize) -> String {
    x.map_or_else(|| "n/a".to_string(), |v| format!("{:.*}", digits, v))
}

/// Speedup table with one row per configuration.
pub fn render_table(stats: &[ConfigStats]) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{:<4} {:<5} {:<9} {:>7} {:>4} {:>12} {:>12} {:>12} {:>8}",
        "name", "class", "mode", "workers", "n", "best (s)", "mean (s)", "stddev (s)", "speedup"
    );
    for c in stats {
        let _ = writeln!(
            s,
            "{:<4} {:<5} {:<9} {:>7} {:>4} {:>12} {:>12} {:>12} {:>8}",
            c.benchmark,
            c.class.to_string(),
            if c.safe_mode { "safe" } else { "unchecked" },
            c.workers,
            c.stats.values.len(),
            round_sig(c.best, SECONDS_DIGITS),
            round_sig(c.stats.mean, SECONDS_DIGITS),
            round_sig(c.stats.stddev, SECONDS_DIGITS),
            opt(c.speedup, 2)
        );
    }
    s
}

pub fn render_reports(reports: &[ComparisonReport]) -> String {
    let mut s = String::new();
    for r in reports {
        let norm = |n: &crate::stats::ShapiroWilk| match n.w {
            Some(_) => format!("{}", round_sig(n.p_value, P_DIGITS)),
            None => "degenerate".to_string(),
        };
        let _ = writeln!(
            s,
            "{} vs {}: mean {} s vs {} s ({:+.2}%), normality p {} / {}, {} p = {} -> {}",
            r.label_a,
            r.label_b,
            round_sig(r.a.mean, SECONDS_DIGITS),
            round_sig(r.b.mean, SECONDS_DIGITS),
            r.relative_difference_pct,
            norm(&r.normality_a),
            norm(&r.normality_b),
            r.test.label(),
            round_sig(r.p_value, P_DIGITS),
            match r.verdict {
                crate::stats::Verdict::Equivalent => "equivalent",
                crate::stats::Verdict::Different => "different",
            }
        );
    }
    if !reports.is_empty() {
        let _ = writeln!(s, "{MULTIPLE_COMPARISON_NOTE}");
    }
    s
}

/// Renders records (and optionally comparison reports) in the chosen format.
pub fn emit<W: Write>(
    mut w: W,
    format: OutputFormat,
    records: &[RunRecord],
    reports: &[ComparisonReport],
) -> Result<(), HarnessError> {
    let stats = config_stats(records);
    match format {
        OutputFormat::Csv => write_csv(w, records),
        OutputFormat::Json => {
            let doc = JsonDoc {
                results: records.iter().map(CsvRecord::from).collect(),
                stats: &stats,
                reports,
            };
            serde_json::to_writer_pretty(&mut w, &doc)?;
            writeln!(w)?;
            Ok(())
        }
        OutputFormat::Text => {
            if !records.is_empty() {
                w.write_all(render_table(&stats).as_bytes())?;
            }
            w.write_all(render_reports(reports).as_bytes())?;
            Ok(())
        }
    }
}
