//! End-to-end runs of the `npb` binary.

use std::process::Command;

use npb_harness::emit::read_csv;

fn npb() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_npb"));
    c.env_remove("NPB_WORKERS");
    c
}

#[test]
fn one_rep_one_worker_gives_one_result() {
    let out = npb()
        .args([
            "run",
            "is",
            "--class",
            "S",
            "--workers",
            "1",
            "--reps",
            "1",
            "--format",
            "csv",
        ])
        .output()
        .unwrap();
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let rows = read_csv(out.stdout.as_slice()).unwrap();
    assert_eq!(rows.len(), 1);
    assert!(rows[0].verified && rows[0].safe_mode);
}

#[test]
fn sweep_counts_reps_times_workers() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("is.csv");
    let status = npb()
        .args([
            "run",
            "is",
            "--class",
            "S",
            "--workers",
            "1,2",
            "--reps",
            "3",
            "--format",
            "csv",
            "--safe-mode=false",
            "--out",
        ])
        .arg(&path)
        .status()
        .unwrap();
    assert!(status.success());
    let rows = read_csv(std::fs::File::open(&path).unwrap()).unwrap();
    assert_eq!(rows.len(), 6);
    assert_eq!(rows.iter().filter(|r| r.workers == 2).count(), 3);
    assert!(rows.iter().all(|r| !r.safe_mode && r.verified));
    let reps: Vec<usize> = rows.iter().map(|r| r.rep).collect();
    assert_eq!(reps, [0, 1, 2, 0, 1, 2]);
}

#[test]
fn worker_count_from_environment() {
    let out = npb()
        .env("NPB_WORKERS", "3")
        .args([
            "run", "ep", "--class", "S", "--reps", "1", "--format", "csv",
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    let rows = read_csv(out.stdout.as_slice()).unwrap();
    assert_eq!(rows[0].workers, 3);
}

#[test]
fn usage_errors_exit_one() {
    for args in [
        &["run", "xx", "--class", "S"][..],
        &["run", "ep", "--class", "Q"],
        &["run", "ep", "--class", "S", "--reps", "0"],
        &["run", "ep", "--class", "S", "--workers", "0"],
        &["bogus"],
    ] {
        let code = npb().args(args).output().unwrap().status.code();
        assert_eq!(code, Some(1), "{args:?}");
    }
    assert_eq!(npb().arg("--help").output().unwrap().status.code(), Some(0));
}

#[test]
fn list_prints_matrix() {
    let out = npb().arg("list").output().unwrap();
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 9);
    assert!(text.lines().any(|l| l.starts_with("LU")));
}

#[test]
fn compare_two_files() {
    let dir = tempfile::tempdir().unwrap();
    let header = "benchmark,class,workers,rep,seconds,mflops,verified,safe_mode\n";
    let a: String = (0..10)
        .map(|i| {
            format!(
                "MG,S,1,{i},{},1,true,true\n",
                1.0 + 0.01 * ((i * 7) % 5) as f64
            )
        })
        .collect();
    let b: String = (0..10)
        .map(|i| {
            format!(
                "MG,S,1,{i},{},1,true,false\n",
                2.0 + 0.01 * ((i * 3) % 5) as f64
            )
        })
        .collect();
    let pa = dir.path().join("a.csv");
    let pb = dir.path().join("b.csv");
    std::fs::write(&pa, format!("{header}{a}")).unwrap();
    std::fs::write(&pb, format!("{header}{b}")).unwrap();
    let out = npb()
        .arg("compare")
        .arg(&pa)
        .arg(&pb)
        .args(["--key", "benchmark,class,workers"])
        .output()
        .unwrap();
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("-> different"), "{text}");
    assert!(text.contains("no multiple-comparison correction"));

    let bad = npb()
        .arg("compare")
        .arg(&pa)
        .arg(&pb)
        .args(["--key", "colour"])
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(1));
}
