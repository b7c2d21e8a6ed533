use std::path::Path;
use std::process::Command;

fn fmf(dir: &Path) -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_fmf"));
    c.current_dir(dir).env("FMF_LOG", "error");
    c
}

fn code(c: &mut Command) -> i32 {
    c.status().unwrap().code().unwrap()
}

#[test]
fn pipeline_commands_and_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(code(fmf(d).args(["synth", "--out", "c/corpus.jsonl", "--records", "6"])), 0);
    assert_eq!(code(fmf(d).args(["gen", "--corpus", "c/corpus.jsonl", "--out", "g/cands.jsonl", "--report", "g/report.json"])), 0);
    assert_eq!(code(fmf(d).args(["filter", "--input", "g/cands.jsonl", "--out", "f/ok.jsonl", "--report-csv", "f/report.csv"])), 0);
    assert!(std::fs::read_to_string(d.join("f/report.csv")).unwrap().starts_with("check,kind,count"));
    assert_eq!(code(fmf(d).args(["compose", "--input", "f/ok.jsonl", "--out", "x/complex.jsonl"])), 0);
    assert_eq!(code(fmf(d).args(["export", "--input", "f/ok.jsonl", "x/complex.jsonl", "--out", "ds", "--accept-pending"])), 0);
    let out = fmf(d).args(["stats", "--input", "f/ok.jsonl"]).output().unwrap();
    let stats: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(stats["atomic_basic"]["total_texts"].as_u64().unwrap() > 0);

    // unknown config key: validation failure
    std::fs::write(d.join("bad.conf"), "seed = 1\nno_such_key = 2\n").unwrap();
    assert_eq!(code(fmf(d).args(["--config", "bad.conf", "gen", "--corpus", "c/corpus.jsonl", "--out", "g/x.jsonl"])), 2);
    // unreachable generator: backend failure
    let status = code(
        fmf(d)
            .env("FMF_GENERATOR", "http")
            .env("FMF_GENERATOR_URL", "http://127.0.0.1:9/")
            .env("FMF_GENERATOR_TIMEOUT_MS", "200")
            .args(["gen", "--corpus", "c/corpus.jsonl", "--out", "g/y.jsonl"]),
    );
    assert_eq!(status, 3);
}

#[test]
fn seed_flag_and_env_agree() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(code(fmf(d).args(["synth", "--out", "c/corpus.jsonl", "--records", "4"])), 0);
    assert_eq!(code(fmf(d).args(["--seed", "42", "gen", "--corpus", "c/corpus.jsonl", "--out", "a/t.jsonl"])), 0);
    assert_eq!(code(fmf(d).env("FMF_SEED", "42").args(["gen", "--corpus", "c/corpus.jsonl", "--out", "b/t.jsonl"])), 0);
    assert_eq!(std::fs::read(d.join("a/t.jsonl")).unwrap(), std::fs::read(d.join("b/t.jsonl")).unwrap());
}
