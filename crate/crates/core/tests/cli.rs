use std::path::Path;
use std::process::{Command, Output};

fn qwalk(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qwalk"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("launch qwalk")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

#[test]
fn fusion_examples() {
    let dir = tempfile::tempdir().unwrap();
    let o = qwalk(&["fusion", "qdim", "--model", "auf", "--q", "0.5", "--word", "ab"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "5.25\n");
    let o = qwalk(&["fusion", "decompose", "--model", "auf", "--x", "a", "--y", "b"], dir.path());
    assert_eq!(stdout(&o), "ab 1\ne 1\n");
    let o = qwalk(&["fusion", "decompose", "--model", "tl", "--x", "2", "--y", "1"], dir.path());
    assert_eq!(stdout(&o), "1 1\n3 1\n");
    let o = qwalk(&["fusion", "qdim", "--model", "tl", "--q", "0.5", "--word", "1"], dir.path());
    assert_eq!(stdout(&o), "2.5\n");
    let o = qwalk(&["bounds", "estimate", "--q", "0.5", "--k", "0"], dir.path());
    assert_eq!(stdout(&o), "0.6666666666666666\n");
}

#[test]
fn validation_errors_exit_one_with_one_line() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        vec!["fusion", "qdim", "--q", "1.5", "--word", "ab"],
        vec!["fusion", "qdim", "--word", "abc"],
        vec!["fusion", "qdim", "--model", "spin", "--word", "3"],
        vec!["walk", "power", "--mu", "a:0.5,b:0.4", "--n", "2"],
        vec!["walk", "power", "--mu", "a:-1,b:2", "--n", "2"],
        vec!["walk", "power"],
        vec!["walk", "sideways"],
        vec!["amen", "gamma-norm", "--model", "tl", "--U", "9", "--trunc", "5"],
        vec!["hamana", "minimal", "--input", "missing.json"],
    ] {
        let o = qwalk(&args, dir.path());
        assert_eq!(o.status.code(), Some(1), "{args:?}");
        let err = stderr(&o);
        assert_eq!(err.lines().count(), 1, "{args:?}: {err}");
        assert!(o.stdout.is_empty());
    }
}

#[test]
fn power_table_format() {
    let dir = tempfile::tempdir().unwrap();
    let o = qwalk(
        &["walk", "power", "--mu", "a:0.5,b:0.5", "--n", "2", "--out", "m.csv"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(dir.path().join("m.csv")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "word,mass");
    assert_eq!(lines.last().unwrap(), &"# pruned_mass=0.0000000000000000e0");
    // δ_e gets 2 · 1/4 · 1/d(a)² = 0.08
    assert_eq!(lines[1], "e,8.0000000000000002e-2");
    assert_eq!(lines.len(), 2 + 5);
    let total: f64 = lines[1..lines.len() - 1]
        .iter()
        .map(|l| l.split(',').nth(1).unwrap().parse::<f64>().unwrap())
        .sum();
    assert!((total - 1.0).abs() < 1e-12);
}

#[test]
fn support_overflow_is_numerical() {
    let dir = tempfile::tempdir().unwrap();
    let o = qwalk(&["walk", "power", "--n", "12", "--max-support", "100"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("exceeds the configured cap"));
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("s.toml"),
        "model = \"auf\"\nq = 0.3\nword = \"ab\"\n",
    )
    .unwrap();
    let from_file = qwalk(&["--config", "s.toml", "fusion", "qdim"], dir.path());
    let direct = qwalk(&["fusion", "qdim", "--q", "0.3", "--word", "ab"], dir.path());
    assert_eq!(stdout(&from_file), stdout(&direct));
    let overridden = qwalk(&["--config", "s.toml", "fusion", "qdim", "--q", "0.5"], dir.path());
    assert_eq!(stdout(&overridden), "5.25\n");
    std::fs::write(dir.path().join("bad.toml"), "colour = 3\n").unwrap();
    let bad = qwalk(&["--config", "bad.toml", "fusion", "qdim"], dir.path());
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn sample_and_verify_tables() {
    let dir = tempfile::tempdir().unwrap();
    let o = qwalk(
        &["walk", "sample", "--paths", "20", "--steps", "40", "--seed", "3", "--tail", "2", "--out", "p.csv"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(dir.path().join("p.csv")).unwrap();
    assert!(text.starts_with("path_index,final_word,stabilize_step\n"));
    assert_eq!(text.lines().count(), 22);
    assert!(text.lines().last().unwrap().starts_with("# paths=20 "));

    let o = qwalk(
        &["bounds", "verify", "--trials", "50", "--maxlen", "5", "--N", "2", "--seed", "1"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.starts_with("trial,measured,bound,ok\n"));
    assert!(text.lines().skip(1).all(|l| l.ends_with(",true")));
}

#[test]
fn stationary_and_amen_tables() {
    let dir = tempfile::tempdir().unwrap();
    let o = qwalk(&["walk", "stationary", "--starts", "e,b", "--n", "12"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "start,n,gap,pruned_mass");
    assert!(lines[1].starts_with("e,12,0.0000000000000000e0,"));

    let o = qwalk(&["amen", "gamma-norm", "--model", "tl", "--U", "1", "--trunc", "1"], dir.path());
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "model,q,U,truncation_size,norm,norm_residual,qdim,gap");
    let f: Vec<&str> = lines[1].split(',').collect();
    assert_eq!(&f[..4], &["tl", "5.0000000000000000e-1", "1", "2"]);
    let num = |i: usize| f[i].parse::<f64>().unwrap();
    // on {0, 1} the fusion matrix of 1 is the swap, with norm 1
    assert!((num(4) - 1.0).abs() < 1e-12);
    assert!(num(5) < 1e-12);
    assert_eq!(num(6), 2.5);
    assert!((num(7) - 1.5).abs() < 1e-12);
    let o = qwalk(&["amen", "mean", "--model", "auf", "--window", "3"], dir.path());
    let text = stdout(&o);
    assert!(text.starts_with("model,q,window,residual_a,residual_b,leak\n"));
    assert_eq!(text.lines().count(), 4);
}

const FLIP_FAMILY: &str = r#"{"dimension": 4, "ucp": true, "matrices": [
    {"re": [1,0,0,0, 0,1,0,0, 0,0,1,0, 0,0,0,1]},
    {"re": [1,0,0,0, 0,-1,0,0, 0,0,-1,0, 0,0,0,1]}],
    "a": {"re": [2,0,0,-1]}, "b": {"re": [0.5,0,0,3]}}"#;

#[test]
fn hamana_documents() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("f.json"), FLIP_FAMILY).unwrap();
    for cmd in ["minimal", "cesaro", "choieffros"] {
        let o = qwalk(&["hamana", cmd, "--input", "f.json", "--out", "r.json"], dir.path());
        assert_eq!(o.status.code(), Some(0), "{cmd}: {}", stderr(&o));
        let doc: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(dir.path().join("r.json")).unwrap()).unwrap();
        assert_eq!(doc["certified"], true);
        let re: Vec<f64> = serde_json::from_value(doc["matrix"]["re"].clone()).unwrap();
        let expect = [1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0];
        assert!(re.iter().zip(expect).all(|(a, b)| (a - b).abs() < 1e-9), "{cmd}: {re:?}");
        if cmd == "choieffros" {
            let p: Vec<f64> = serde_json::from_value(doc["product"]["re"].clone()).unwrap();
            assert!(p.iter().zip([1.0, 0.0, 0.0, -3.0]).all(|(a, b)| (a - b).abs() < 1e-12));
        }
    }
    // a rotation family without a fixed vector: the idempotent is zero and
    // certified; a non-contraction is rejected
    std::fs::write(
        dir.path().join("bad.json"),
        r#"{"dimension": 2, "matrices": [{"re": [2,0,0,1]}]}"#,
    )
    .unwrap();
    let o = qwalk(&["hamana", "minimal", "--input", "bad.json"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("not contractive"));
    std::fs::write(
        dir.path().join("ab.json"),
        r#"{"dimension": 4, "ucp": true, "matrices": [{"re": [1,0,0,0, 0,1,0,0, 0,0,1,0, 0,0,0,1]}],
            "a": {"re": [1,0,0,1]}}"#,
    )
    .unwrap();
    let o = qwalk(&["hamana", "choieffros", "--input", "ab.json"], dir.path());
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn uncertified_result_exits_two_and_is_written() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("f.json"),
        r#"{"dimension": 2, "matrices": [{"re": [1,0,0,1]}]}"#,
    )
    .unwrap();
    let o = qwalk(
        &["hamana", "minimal", "--input", "f.json", "--budget", "0", "--out", "r.json"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(2));
    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("r.json")).unwrap()).unwrap();
    assert_eq!(doc["certified"], false);
    assert_eq!(stderr(&o).lines().count(), 1);
}
