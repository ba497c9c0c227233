use npb_core::{BenchmarkResult, ProblemClass};
use npb_harness::emit::*;
use npb_harness::{OutputFormat, RunRecord};
use proptest::prelude::*;

fn record(workers: usize, rep: usize, seconds: f64, safe: bool) -> RunRecord {
    RunRecord {
        rep,
        result: BenchmarkResult {
            name: "EP".into(),
            class: ProblemClass::S,
            size: "33554432".into(),
            iterations: 0,
            seconds,
            mflops: 1.0 / seconds,
            op_kind: "Random numbers generated".into(),
            verified: true,
            workers,
            safe_mode: safe,
        },
    }
}

#[test]
fn empty_results_give_header_only_csv() {
    let mut buf = Vec::new();
    emit(&mut buf, OutputFormat::Csv, &[], &[]).unwrap();
    assert_eq!(
        String::from_utf8(buf).unwrap(),
        "benchmark,class,workers,rep,seconds,mflops,verified,safe_mode\n"
    );
}

#[test]
fn seconds_keep_six_significant_digits() {
    let mut buf = Vec::new();
    write_csv(&mut buf, &[record(2, 0, 1.23456789, false)]).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert_eq!(
        text.lines().nth(1).unwrap(),
        "EP,S,2,0,1.23457,0.81,true,false"
    );
    assert_eq!(round_sig(0.000123456789, 3), 0.000123);
    assert_eq!(round_sig(98765.4321, 6), 98765.4);
}

#[test]
fn speedup_is_relative_to_one_worker_mean() {
    let recs = [
        record(1, 0, 4.0, true),
        record(1, 1, 6.0, true),
        record(2, 0, 2.0, true),
        record(2, 1, 3.0, true),
        record(4, 0, 3.0, false),
    ];
    let stats = config_stats(&recs);
    let one = stats.iter().find(|c| c.workers == 1).unwrap();
    assert_eq!(one.speedup, Some(1.0));
    let two = stats.iter().find(|c| c.workers == 2).unwrap();
    assert_eq!(two.speedup, Some(2.0));
    assert_eq!(two.best, 2.0);
    // No 1-worker unchecked sample to divide by.
    let four = stats.iter().find(|c| c.workers == 4).unwrap();
    assert_eq!(four.speedup, None);
    let table = render_table(&stats);
    assert!(table.contains("n/a"));
    assert_eq!(table.lines().count(), 4);
}

#[test]
fn json_mirrors_csv_schema() {
    let mut buf = Vec::new();
    emit(
        &mut buf,
        OutputFormat::Json,
        &[record(1, 0, 2.5, true)],
        &[],
    )
    .unwrap();
    let v: serde_json::Value = serde_json::from_slice(&buf).unwrap();
    let row = &v["results"][0];
    for col in CSV_HEADER {
        assert!(row.get(col).is_some(), "missing {col}");
    }
    assert_eq!(v["stats"][0]["speedup"], 1.0);
    assert!(v["reports"].as_array().unwrap().is_empty());
}

proptest! {
    #[test]
    fn csv_round_trips(rows in prop::collection::vec((1usize..9, 0usize..10, 1e-4f64..1e4, any::<bool>()), 0..20)) {
        let recs: Vec<RunRecord> = rows.iter().map(|&(w, r, s, m)| record(w, r, s, m)).collect();
        let mut buf = Vec::new();
        write_csv(&mut buf, &recs).unwrap();
        let back = read_csv(buf.as_slice()).unwrap();
        let expected: Vec<CsvRecord> = recs.iter().map(CsvRecord::from).collect();
        prop_assert_eq!(back, expected);
        // Same input, same bytes.
        let mut again = Vec::new();
        write_csv(&mut again, &recs).unwrap();
        prop_assert_eq!(buf, again);
    }
}
