use std::process::Command;

fn punctext() -> Command {
    Command::new(env!("CARGO_BIN_EXE_punctext"))
}

fn stdout(args: &[&str]) -> String {
    let out = punctext().args(args).output().unwrap();
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

#[test]
fn score_summer() {
    let out = stdout(&["score", "summer"]);
    let e = out.lines().find(|l| l.split_whitespace().nth(1) == Some("e")).unwrap();
    assert!(e.trim_end().ends_with("-3.0000"), "{e}");
    let u = out.lines().find(|l| l.split_whitespace().nth(1) == Some("u")).unwrap();
    assert!(u.trim_end().ends_with("-1.0000"), "{u}");
}

#[test]
fn puncture_indicate_recover_chain() {
    let text = "The children played in the garden until the sun went down behind the hills.";
    let out = stdout(&["puncture", text, "--keep", "0.9"]);
    let field = |name: &str| {
        out.lines()
            .find_map(|l| l.strip_prefix(name))
            .map(|v| v.trim_start().to_string())
            .unwrap()
    };
    let indices = field("indices:");
    let payload = field("payload:");
    assert!(payload.len() < text.len());
    let mut args = vec!["indicate", payload.as_str(), "--indices", indices.as_str(), "--keep", "0.9"];
    if field("tail:") == "true" {
        args.push("--tail");
    }
    let indicated = stdout(&args);
    let indicated = indicated.trim_end_matches('\n');
    assert_eq!(indicated.len(), text.len());
    assert_eq!(indicated.chars().filter(|&c| c == '*').count(), text.len() - payload.len());
    let recovered = stdout(&["recover", indicated]);
    assert!(!recovered.contains('*'));
    assert!(recovered.starts_with("The "));
}

#[test]
fn run_writes_results_and_rejects_bad_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.conf");
    std::fs::write(&cfg, "trials = 2\nsentences = 2\nsnr_db = inf\n").unwrap();
    let output = dir.path().join("out.jsonl");
    let out = punctext()
        .args(["run", "--config", cfg.to_str().unwrap(), "--output", output.to_str().unwrap(), "--set", "seed=3"])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(std::fs::read_to_string(&output).unwrap().lines().count(), 4);
    assert!(output.with_extension("csv").exists());

    let bad = punctext()
        .args(["run", "--config", cfg.to_str().unwrap(), "--output", output.to_str().unwrap(), "--set", "sentences=0"])
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn bench_reports_throughput() {
    let out = stdout(&["bench", "--patterns", "200"]);
    assert!(out.contains("lookups/s"));
}
