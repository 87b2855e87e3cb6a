use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn corpus(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../corpus")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_thurston"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(args: &[&str]) -> Value {
    let out = run(args);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn classify_examples() {
    assert_eq!(
        json(&["classify", &corpus("tor-2I.json")])["class"],
        "Expanding"
    );
    assert_eq!(
        json(&["classify", &corpus("tor-3111.json")])["class"],
        "Exceptional"
    );
    assert_eq!(
        json(&["classify", &corpus("tor-1102.json")])["class"],
        "LevyObstructed"
    );
    let table = &json(&["classify", &corpus("tor-2I.json")])["peripheral_action"];
    assert_eq!(table.as_array().unwrap().len(), 4);
}

#[test]
fn input_errors_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\"version\":1,\"kind\":\"tor-biset\"").unwrap();
    assert_eq!(
        run(&["classify", bad.to_str().unwrap()]).status.code(),
        Some(1)
    );
    assert_eq!(
        run(&["classify", &corpus("basilica.json")]).status.code(),
        Some(1)
    );
    assert_eq!(
        run(&["classify", "/nonexistent.json"]).status.code(),
        Some(1)
    );
    let mixed = run(&[
        "conj",
        &corpus("tor-2I.json"),
        &corpus("basilica-beta-bundle.json"),
    ]);
    assert_eq!(mixed.status.code(), Some(1));
}

#[test]
fn budget_exhaustion_exits_2() {
    let out = run(&[
        "--budget-nucleus",
        "1",
        "portrait-list",
        &corpus("basilica-fixed-point.json"),
    ]);
    assert_eq!(
        out.status.code(),
        Some(2),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn iso_and_shadow() {
    assert_eq!(
        json(&[
            "iso",
            &corpus("tor-2I-v10.json"),
            &corpus("tor-m2I-v32.json")
        ])["isomorphic"],
        true
    );
    assert_eq!(
        json(&["iso", &corpus("tor-2I.json"), &corpus("tor-2I-v10.json")])["isomorphic"],
        false
    );
    let s = json(&["shadow", &corpus("tor-2I-fixed-orbit.json")]);
    assert_eq!(s["points"], serde_json::json!([[[0, 1], [0, 1]]]));
    assert_eq!(s["verified"], true);
}

#[test]
fn centralizer_of_2111() {
    let c = json(&["centralizer", &corpus("tor-2111.json")]);
    assert_eq!(c["verified"], true);
    assert!(!c["generators"].as_array().unwrap().is_empty());
    let b = json(&["centralizer", &corpus("tor-2I-bundle.json")]);
    assert_eq!(b["index"], b["orbit_size"]);
}

#[test]
fn bundle_conjugacy() {
    let beta = corpus("basilica-beta-bundle.json");
    let alpha = corpus("basilica-alpha-bundle.json");
    let twisted = corpus("basilica-twisted-beta-bundle.json");
    let same = json(&["--oracle", "trivial-exp", "conj", &beta, &beta]);
    assert_eq!(same["verdict"], "yes");
    for e in same["certificate"]["ell"].as_object().unwrap().values() {
        assert_eq!(e["exp"], serde_json::json!([]));
    }
    let no = json(&["--oracle", "trivial-exp", "conj", &beta, &alpha]);
    assert_eq!(no["verdict"], "no");
    assert_eq!(no["invariant"], "portrait-not-conjugate");
    let yes = json(&["--oracle", "trivial-exp", "conj", &twisted, &alpha]);
    assert_eq!(yes["verdict"], "yes");
    assert_eq!(yes["certificate"]["verified"], true);
    let transcript: Vec<&str> = yes["certificate"]["transcript"]
        .as_array()
        .unwrap()
        .iter()
        .map(|l| l.as_str().unwrap())
        .collect();
    assert!(
        transcript.iter().any(|l| l.contains("x₂·γ₋₁⁻¹ → x₁")),
        "{transcript:?}"
    );
    // without an Exp oracle the reduction is undecided
    assert_eq!(run(&["conj", &beta, &alpha]).status.code(), Some(1));
    let tor = corpus("tor-2I-bundle.json");
    assert_eq!(json(&["conj", &tor, &tor])["verdict"], "yes");
    assert_eq!(
        json(&["conj", &corpus("tor-2I.json"), &corpus("tor-2I.json")])["verdict"],
        "yes"
    );
}

#[test]
fn certificate_file_matches_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let cert = dir.path().join("cert.json");
    let out = json(&[
        "--oracle",
        "trivial-exp",
        "conj",
        &corpus("basilica-twisted-beta-bundle.json"),
        &corpus("basilica-alpha-bundle.json"),
        "--certificate",
        cert.to_str().unwrap(),
    ]);
    let written: Value = serde_json::from_str(&std::fs::read_to_string(&cert).unwrap()).unwrap();
    assert_eq!(written, out);
}

#[test]
fn portrait_censuses() {
    assert_eq!(
        json(&["portrait-list", &corpus("cube-extra.json")])["count"],
        2
    );
    assert_eq!(
        json(&["portrait-list", &corpus("basilica-fixed-point.json")])["count"],
        2
    );
    assert_eq!(
        json(&["portrait-list", &corpus("basilica-empty.json")])["count"],
        1
    );
}

#[test]
fn portrait_commands() {
    let m = json(&["portrait-minimal", &corpus("basilica.json")]);
    assert_eq!(m["dynamics"]["fstar"], serde_json::json!([1, 0, 2]));
    let cones = json(&["portrait-minimal", &corpus("tor-2I.json")]);
    assert_eq!(cones["cones"].as_array().unwrap().len(), 4);
    let fixed = corpus("basilica-fixed-point.json");
    assert_eq!(json(&["portrait-conj", &fixed, &fixed])["verdict"], "yes");
}

#[test]
fn reduce_commands() {
    let b = json(&["reduce", &corpus("basilica-beta.json"), "--erase", "beta"]);
    assert_eq!(b["kind"], "bundle");
    assert_eq!(
        b["payload"]["data"]["exp"]["portrait"]["reps"][3],
        serde_json::json!([{"prefix": [], "letter": 2}])
    );
    let knit = json(&[
        "reduce",
        &corpus("tor-2I-bundle.json"),
        "--knit",
        r#"[{"t":[8,0],"e":1}]"#,
    ]);
    assert_eq!(knit["iterations"], 3);
    let pushed = json(&[
        "reduce",
        &corpus("basilica-beta-bundle.json"),
        "--push-point",
        "beta",
        "--right",
        "[-1]",
    ]);
    assert_eq!(
        pushed["payload"]["data"]["exp"]["portrait"]["reps"][3],
        serde_json::json!([{"prefix": [], "letter": 1}])
    );
}

#[test]
fn cyclic_invariants() {
    let c = json(&[
        "cyclic-invariant",
        &corpus("cyclic-3-period2.json"),
        &corpus("cyclic-3-period2-shifted.json"),
    ]);
    assert_eq!(c["invariant"], serde_json::json!([[3, 8], [1, 8]]));
    assert_eq!(c["shift"], 1);
    let o = json(&["cyclic-invariant", &corpus("cyclic-3-obstructed.json")]);
    assert_eq!(o["obstructed"], true);
    let rejected = run(&[
        "cyclic-invariant",
        &corpus("cyclic-3-obstructed.json"),
        &corpus("cyclic-3-period2.json"),
    ]);
    assert_eq!(rejected.status.code(), Some(1));
}

#[test]
fn outputs_are_deterministic() {
    let args = ["portrait-list", &corpus("cube-extra.json")];
    assert_eq!(run(&args).stdout, run(&args).stdout);
}

/// Recorded outputs of the worked examples; `THURSTON_UPDATE_CORPUS=1`
/// rewrites them.
#[test]
fn golden_outputs() {
    let cases: Vec<(&str, Vec<String>)> = vec![
        (
            "marked-beta.json",
            vec![
                "--oracle".into(),
                "trivial-exp".into(),
                "conj".into(),
                corpus("basilica-twisted-beta-bundle.json"),
                corpus("basilica-alpha-bundle.json"),
            ],
        ),
        (
            "marked-sqrt2.json",
            vec![
                "reduce".into(),
                corpus("basilica-sqrt2.json"),
                "--erase".into(),
                "sqrt2,1".into(),
            ],
        ),
        (
            "cube-census.json",
            vec!["portrait-list".into(), corpus("cube-extra.json")],
        ),
        (
            "cyclic-shift.json",
            vec![
                "cyclic-invariant".into(),
                corpus("cyclic-3-period2.json"),
                corpus("cyclic-3-period2-shifted.json"),
            ],
        ),
    ];
    let update = std::env::var_os("THURSTON_UPDATE_CORPUS").is_some();
    for (name, args) in cases {
        let args: Vec<&str> = args.iter().map(String::as_str).collect();
        let out = run(&args);
        assert_eq!(out.status.code(), Some(0), "{name}");
        let path = PathBuf::from(corpus("golden")).join(name);
        if update {
            std::fs::write(&path, &out.stdout).unwrap();
        }
        let recorded = std::fs::read(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        assert_eq!(
            String::from_utf8_lossy(&recorded),
            String::from_utf8_lossy(&out.stdout),
            "{name} changed"
        );
    }
}
