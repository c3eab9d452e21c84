use std::path::Path;
use std::process::{Command, Output};

fn sievelab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sievelab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn out_arg(dir: &Path) -> String {
    dir.to_str().unwrap().to_string()
}

#[test]
fn census_then_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = out_arg(dir.path());
    let run = sievelab(&["census", "--x", "5,10", "--lmax", "7", "--pcap", "150", "--out", &out]);
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    let csv = std::fs::read_to_string(dir.path().join("census.csv")).unwrap();
    assert!(csv.starts_with("x,B,l,surjective,undecided,skipped,undecided_any,fraction\n"));
    // two heights times two primes
    assert_eq!(csv.lines().count(), 5);

    let run = sievelab(&["report", "--out", &out]);
    assert!(run.status.success());
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(report["census"].as_array().unwrap().len(), 4);
    assert!(dir.path().join("census_fraction.csv").exists());
}

#[test]
fn seed_and_workers_do_not_change_output() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for (dir, seed, workers) in [(&a, "1", "1"), (&b, "99", "3")] {
        let run = sievelab(&[
            "census", "--x", "8", "--lmax", "11", "--pcap", "120", "--seed", seed, "--workers", workers, "--out",
            &out_arg(dir.path()),
        ]);
        assert!(run.status.success());
    }
    for f in ["census.csv", "census_points.csv"] {
        assert_eq!(std::fs::read(a.path().join(f)).unwrap(), std::fs::read(b.path().join(f)).unwrap(), "{f}");
    }
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = out_arg(dir.path());
    // prime cap beyond the feasibility limit
    assert_eq!(sievelab(&["census", "--pcap", "10000000", "--out", &out]).status.code(), Some(3));
    // decreasing heights
    assert_eq!(sievelab(&["census", "--x", "10,5", "--out", &out]).status.code(), Some(2));
    // nothing to merge yet
    assert_eq!(sievelab(&["report", "--out", &out]).status.code(), Some(1));
    // no p = 1 mod 5 below 10
    let run = sievelab(&["classes", "--x", "10", "--l", "5", "--trace", "0", "--q", "10", "--out", &out]);
    assert_eq!(run.status.code(), Some(2));
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"no_such_field": 1}"#).unwrap();
    assert_eq!(sievelab(&["census", "--config", bad.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn other_commands_write_their_tables() {
    let dir = tempfile::tempdir().unwrap();
    let out = out_arg(dir.path());
    assert!(sievelab(&["goodred", "--x", "50,100", "--out", &out]).status.success());
    let gr = std::fs::read_to_string(dir.path().join("goodred.csv")).unwrap();
    assert!(gr.starts_with("x,Q,count,floor_estimate,ratio\n"));
    assert!(sievelab(&["classes", "--x", "20", "--l", "5", "--trace", "2", "--q", "100", "--out", &out])
        .status
        .success());
    assert!(dir.path().join("class_sieve.json").exists());
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"ffield_n": [1, 2]}"#).unwrap();
    assert!(sievelab(&["chebotarev", "--config", cfg.to_str().unwrap(), "--out", &out]).status.success());
    let cb = std::fs::read_to_string(dir.path().join("chebotarev.csv")).unwrap();
    assert!(cb.starts_with("q,n,l,class_key,measured,predicted,deviation\n"));
    let run = sievelab(&["enumerate", "--x", "2"]);
    let text = String::from_utf8(run.stdout).unwrap();
    // header plus the 8 points of P^1(Q) with height <= 2
    assert_eq!(text.lines().count(), 9);
}
