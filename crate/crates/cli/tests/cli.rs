use std::path::PathBuf;
use std::process::{Command, Output};

fn corpus(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../core/corpus")
        .join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_germcalc"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn quot_reports_t_certificate() {
    let o = run(&["quot", "[3,2,5,4,2]"]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    assert!(s.contains("quotient 1/144(1,59)"), "{s}");
    assert!(s.contains("class T: yes, index 12"), "{s}");
}

#[test]
fn tchain_inverts_quot() {
    let o = run(&["tchain", "9", "5"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("chain [2,5]"));
}

#[test]
fn analyze_iidual() {
    let f = corpus("iidual.graph");
    let o = run(&["analyze", f.to_str().unwrap(), "--index", "4"]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    assert!(s.contains("v9: K.C = -1/2"), "{s}");
    assert!(s.contains("splitting degree 2"), "{s}");
}

#[test]
fn analyze_k1a_a_family_member() {
    let f = corpus("k1a_a_m3_n2.graph");
    let s = stdout(&run(&["analyze", f.to_str().unwrap()]));
    assert!(s.contains("quotient: 1/9(1,5)"), "{s}");
    assert!(s.contains("K.C = -1/3"), "{s}");
}

#[test]
fn json_mirrors_text() {
    let f = corpus("iidual.graph");
    let o = run(&["--json", "analyze", f.to_str().unwrap(), "--index", "4"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["tree"], true);
    assert_eq!(v["components"].as_array().unwrap().len(), 5);
}

#[test]
fn empty_graph_is_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("empty.graph");
    std::fs::write(&f, "").unwrap();
    let o = run(&["analyze", f.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!o.stderr.is_empty());
}

#[test]
fn missing_file_is_input_error() {
    assert_eq!(
        run(&["classify", "/nonexistent/x.germ"]).status.code(),
        Some(2)
    );
}

#[test]
fn classify_forbidden_pair() {
    let f = corpus("forbid_k2a_kad.germ");
    let o = run(&["classify", f.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("k2A + kAD does not occur"));
}

#[test]
fn flip_table_values() {
    let s = stdout(&run(&[
        "flip",
        "--index",
        "4",
        "--kc",
        "-1/4",
        "--plus-indices",
        "2,3",
    ]));
    assert!(s.contains("K+.C+ = 1/6"), "{s}");
    let s = stdout(&run(&[
        "flip",
        "--index",
        "3",
        "--w",
        "1/3,1/3",
        "--plus-indices",
        "2",
    ]));
    assert!(s.contains("K.C = -1/3") && s.contains("K+.C+ = 1/2"), "{s}");
}

#[test]
fn ic_disprove_single_and_rejected() {
    let o = run(&["ic-disprove", "--m", "7", "--mprime", "5", "--aprime", "3"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("outcome: contradiction"));
    let o = run(&["ic-disprove", "--m", "5", "--mprime", "3", "--aprime", "1"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn kad_disprove_sweep() {
    let o = run(&["kad-disprove", "--subcase", "k3a", "--sweep-max", "15"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("ending in a contradiction"));
}

#[test]
fn verify_paper_passes_and_detects_mutation() {
    let o = run(&["verify-paper", "--sweep-max", "9"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains(", 0 failed"));

    let dir = tempfile::tempdir().unwrap();
    for e in std::fs::read_dir(corpus("")).unwrap() {
        let p = e.unwrap().path();
        std::fs::copy(&p, dir.path().join(p.file_name().unwrap())).unwrap();
    }
    let manifest = dir.path().join("expected.toml");
    let text = std::fs::read_to_string(&manifest).unwrap();
    let start = text.find("name = \"iidual\"").unwrap();
    let at = start + text[start..].find("v2 = { value = \"3/4\"").unwrap();
    let mutated = format!(
        "{}v2 = {{ value = \"2/3\"{}",
        &text[..at],
        &text[at + "v2 = { value = \"3/4\"".len()..]
    );
    std::fs::write(&manifest, mutated).unwrap();
    let o = run(&[
        "verify-paper",
        "--sweep-max",
        "9",
        "--corpus",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1));
    let s = stdout(&o);
    assert!(
        s.contains("FAIL iidual :: delta v2\n  - expected: 2/3\n  + computed: 3/4"),
        "{s}"
    );
}
