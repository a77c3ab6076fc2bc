use std::path::Path;
use std::process::{Command, Output};

fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wiretap-fca"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn correction_ratio_reports_negative_c() {
    let out = cli(&[
        "correction-ratio",
        "--poly",
        "31,21,12,3,2,1,0",
        "--n",
        "3100",
        "--p1",
        "0.2",
        "--p2",
        "0.1",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    let header: Vec<&str> = text.lines().next().unwrap().split(',').collect();
    // the quoted polynomial spans seven comma-separated pieces
    let c: f64 = row[header.iter().position(|h| *h == "c_ratio").unwrap() + 6]
        .parse()
        .unwrap();
    assert!((c + 0.034).abs() < 0.02, "{c}");
    assert!(String::from_utf8_lossy(&out.stderr).contains("correction capability zero"));
}

#[test]
fn noiseless_simulation_copies_the_sequence() {
    let out = cli(&[
        "simulate", "--poly", "10,3,0", "--n", "300", "--p1", "0", "--p2", "0", "--seed", "4",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("index,a,z,m,s,y"));
    let mut count = 0;
    for line in lines {
        let cells: Vec<&str> = line.split(',').collect();
        assert_eq!(cells[1], cells[5]);
        count += 1;
    }
    assert_eq!(count, 300);
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str, threads: &str| {
        let path = dir.path().join(name);
        let out = cli(&[
            "attack-a",
            "--poly",
            "15,4,2,1,0",
            "--n",
            "1500",
            "--p1",
            "0.2,0.3",
            "--p2",
            "0,0.1",
            "--runs",
            "3",
            "--seed",
            "9",
            "--threads",
            threads,
            "--out",
            path.to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(0));
        std::fs::read(path).unwrap()
    };
    let first = run("a.csv", "1");
    assert_eq!(first, run("b.csv", "1"));
    assert_eq!(first, run("c.csv", "4"));
}

#[test]
fn usage_errors_exit_with_one() {
    assert_eq!(cli(&["attack-a", "--bogus"]).status.code(), Some(1));
    assert_eq!(cli(&["frobnicate"]).status.code(), Some(1));
    let out = cli(&["bound-a", "--poly", "5,2,0", "--n", "3", "--p1", "0.9"]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(
        err.contains("n:") && err.contains("p1:") && err.contains("p2: grid is empty"),
        "{err}"
    );
    assert_eq!(cli(&["sweep"]).status.code(), Some(1));
    assert_eq!(cli(&["--help"]).status.code(), Some(0));
}

#[test]
fn failed_attacks_exit_with_two() {
    let out = cli(&[
        "attack-b",
        "--poly",
        "31,21,12,3,2,1,0",
        "--n",
        "3100",
        "--p1",
        "0.2",
        "--p2",
        "0.1",
        "--runs",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stdout(&out).contains(",false,"));
}

#[test]
fn sweep_reads_config_and_writes_traces() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("table.cfg");
    let results = dir.path().join("results.csv");
    let traces = dir.path().join("rounds.csv");
    std::fs::write(
        &config,
        format!(
            "# light noise\nattack = b\npoly = 31,21,12,3,2,1,0\nn = 3100\np1 = 0.05\np2 = 0\nruns = 2\nout = {}\n",
            results.display()
        ),
    )
    .unwrap();
    let out = cli(&["sweep", "--config", config.to_str().unwrap()]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = std::fs::read_to_string(&results).unwrap();
    assert_eq!(text.lines().count(), 3);
    assert!(text.lines().skip(1).all(|l| l.contains(",true,")));

    let out = cli(&[
        "attack-b",
        "--config",
        config.to_str().unwrap(),
        "--runs",
        "1",
        "--trace",
        traces.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let rounds = std::fs::read_to_string(&traces).unwrap();
    assert!(rounds.starts_with("p1,p2,run,round,bits_flipped,correct_bits\n"));
    assert!(rounds.trim_end().ends_with(",3100"));
    assert!(Path::new(&results).exists());
}
