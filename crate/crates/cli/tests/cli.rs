use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn ssvep(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ssvep"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str], cwd: &Path) -> Output {
    let out = ssvep(args, cwd);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

#[test]
fn stimgen_prints_schedule_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = ok(&["stimgen", "--freq", "7", "--duty", "85"], dir.path());
    let stdout = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = stdout.lines().collect();
    assert_eq!(&lines[..4], ["tick,level", "0,1", "121429,0", "142857,1"]);
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.contains("within tolerance"), "{stderr}");
}

#[test]
fn stimgen_rejects_bad_duty() {
    let dir = tempfile::tempdir().unwrap();
    let out = ssvep(&["stimgen", "--freq", "7", "--duty", "100"], dir.path());
    assert!(!out.status.success());
    assert!(out.stdout.is_empty());
}

#[test]
fn simulate_analyze_stats_report_chain() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(
        d.join("exp.cfg"),
        "frequencies = 8\nduties = 50, 85\ntrials = 2\nseed = 9\n",
    )
    .unwrap();
    ok(
        &[
            "simulate",
            "--subjects",
            "2",
            "--config",
            "exp.cfg",
            "--out",
            "edf",
        ],
        d,
    );
    let mut names: Vec<String> = fs::read_dir(d.join("edf"))
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    assert_eq!(names.len(), 8);
    assert_eq!(names[0], "S1_f8_d50_t1.edf");

    let info = ok(&["edf", "info", "edf/S1_f8_d85_t2.edf"], d);
    let info = String::from_utf8(info.stdout).unwrap();
    assert!(info.contains("30 × 1 s") && info.contains("O2"), "{info}");

    ok(
        &[
            "edf",
            "extract",
            "edf/S1_f8_d85_t2.edf",
            "--channel",
            "O2",
            "--out",
            "o2.csv",
        ],
        d,
    );
    let csv = fs::read_to_string(d.join("o2.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("index,physical_value"));
    assert_eq!(csv.lines().count(), 3841);

    ok(
        &[
            "analyze",
            "--in",
            "edf",
            "--freq",
            "8",
            "--channel",
            "O2",
            "--out",
            "amp.csv",
        ],
        d,
    );
    let amp = fs::read_to_string(d.join("amp.csv")).unwrap();
    assert_eq!(
        amp.lines().next(),
        Some("subject,frequency_hz,duty_pct,trial,segment,amplitude")
    );
    assert_eq!(amp.lines().count(), 1 + 2 * 2 * 2 * 30);

    ok(
        &[
            "stats", "--in", "amp.csv", "--scope", "subject", "--out", "s.json",
        ],
        d,
    );
    let stats: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(d.join("s.json")).unwrap()).unwrap();
    assert_eq!(stats["scope"], "subject");
    assert_eq!(stats["analyses"].as_array().unwrap().len(), 2);
    assert_eq!(stats["analyses"][0]["best"]["duty_pct"], 85.0);

    fs::write(
        d.join("comfort.csv"),
        "subject,frequency_hz,duty_pct,rating\n1,8,50,4\n1,8,85,8\n",
    )
    .unwrap();
    ok(
        &[
            "report",
            "--in",
            "amp.csv",
            "--comfort",
            "comfort.csv",
            "--config",
            "exp.cfg",
            "--out",
            "r.json",
            "--box-csv",
            "box.csv",
        ],
        d,
    );
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(d.join("r.json")).unwrap()).unwrap();
    assert_eq!(report["provenance"]["seed"], 9);
    assert_eq!(report["box_plots"][0]["n"], 120);
    assert_eq!(report["comfort"]["per_duty"][1]["mean_rating"], 8.0);
    let box_csv = fs::read_to_string(d.join("box.csv")).unwrap();
    assert_eq!(
        box_csv.lines().next(),
        Some("frequency_hz,duty_pct,n,q25,median,q75")
    );
}

#[test]
fn plan_is_seeded() {
    let dir = tempfile::tempdir().unwrap();
    let a = ok(&["plan", "--seed", "4"], dir.path()).stdout;
    let b = ok(&["plan", "--seed", "4"], dir.path()).stdout;
    assert_eq!(a, b);
    assert_eq!(String::from_utf8(a).unwrap().lines().count(), 101);
}

#[test]
fn reproduce_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(d.join("small.cfg"), "frequencies = 7, 10\ntrials = 2\n").unwrap();
    let run = |out: &str| {
        let o = ok(
            &[
                "reproduce",
                "--config",
                "small.cfg",
                "--subjects",
                "3",
                "--seed",
                "11",
                "--out",
                out,
            ],
            d,
        );
        String::from_utf8(o.stdout).unwrap()
    };
    let summary = run("a");
    run("b");
    assert!(summary.contains("7 Hz: best duty 85%"), "{summary}");
    for f in [
        "report.json",
        "amplitudes.csv",
        "box_plots.csv",
        "plan.csv",
        "config.txt",
    ] {
        assert_eq!(
            fs::read(d.join("a").join(f)).unwrap(),
            fs::read(d.join("b").join(f)).unwrap(),
            "{f}"
        );
    }
    assert_eq!(
        fs::read_dir(d.join("a/edf")).unwrap().count(),
        3 * 2 * 5 * 2
    );
}

#[test]
fn errors_name_the_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = ssvep(&["edf", "info", "missing.edf"], dir.path());
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("missing.edf"));

    fs::write(dir.path().join("bad.cfg"), "trials = 5\nspeed = 3\n").unwrap();
    let out = ssvep(&["plan", "--config", "bad.cfg"], dir.path());
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));
}
