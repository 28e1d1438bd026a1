use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_maprepair"));
    c.env_remove("MAPREPAIR_SEED");
    c
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn check_running_example_is_unsafe() {
    let o = run(&["check", s(&fixture("running")), "--json"]);
    assert_eq!(code(&o), 1);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["verdict"], "unsafe");
    assert!(!v["outputs"]["unsafe_bags"].as_array().unwrap().is_empty());
    assert_eq!(v["counts"]["bags"], 5);
}

#[test]
fn views_as_mapping_are_safe() {
    let dir = fixture("running");
    let views = dir.join("views.tgds");
    let o = run(&[
        "check",
        "--schema",
        s(&dir.join("source.schema")),
        "--views",
        s(&views),
        "--mapping",
        s(&views),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
}

#[test]
fn malformed_tgds_exit_2_with_position() {
    let tmp = tempfile::tempdir().unwrap();
    let bad = tmp.path().join("bad.tgds");
    fs::write(&bad, "P(i,n,e,c) -> Q(i).\nP(x -> Q(x).\n").unwrap();
    let dir = fixture("running");
    let o = run(&[
        "check",
        "--schema",
        s(&dir.join("source.schema")),
        "--views",
        s(&dir.join("views.tgds")),
        "--mapping",
        s(&bad),
    ]);
    assert_eq!(code(&o), 2);
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("bad.tgds:2:"), "{err}");
}

#[test]
fn repaired_output_rechecks_safe() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out.tgds");
    let log = tmp.path().join("log.jsonl");
    let dir = fixture("running");
    let o = run(&[
        "repair",
        s(&dir),
        "--pref",
        "max",
        "-o",
        s(&out),
        "--log",
        s(&log),
        "--json",
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let report: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(report["verdict"], "safe");
    let steps = fs::read_to_string(&log).unwrap();
    assert_eq!(
        steps.lines().count() as u64,
        report["counts"]["repairs_applied"].as_u64().unwrap()
    );
    let o = run(&[
        "check",
        "--schema",
        s(&dir.join("source.schema")),
        "--views",
        s(&dir.join("views.tgds")),
        "--mapping",
        s(&out),
    ]);
    assert_eq!(code(&o), 0);
}

#[test]
fn safe_input_is_copied_byte_for_byte() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = fixture("running");
    let mapping = tmp.path().join("m.tgds");
    let text = "# the views themselves\nP(i,n,e,c), HN(i,d) -> V1(e,d).\n\n   O(i,t,p) -> V3(t,p).\n";
    fs::write(&mapping, text).unwrap();
    let out = tmp.path().join("out.tgds");
    let o = run(&[
        "repair",
        "--schema",
        s(&dir.join("source.schema")),
        "--views",
        s(&dir.join("views.tgds")),
        "--mapping",
        s(&mapping),
        "-o",
        s(&out),
    ]);
    assert_eq!(code(&o), 0);
    assert_eq!(fs::read_to_string(&out).unwrap(), text);
}

#[test]
fn knn_with_missing_model_exits_2() {
    let o = run(&["repair", s(&fixture("running")), "--pref", "knn:/no/such/model.csv"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn learn_on_join_choice_gives_the_three_rows() {
    let o = run(&["learn", "--golden", "max", "--scenarios", s(&fixture("join-choice"))]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(
        String::from_utf8(o.stdout).unwrap(),
        "delta_fv,delta_j,choice\n1,-1,2\n1,0,2\n0,1,2\n"
    );
}

#[test]
fn learn_on_no_scenarios_writes_header_only() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("m.csv");
    let o = run(&["learn", "--scenarios", s(tmp.path()), "--out", s(&out)]);
    assert_eq!(code(&o), 0);
    assert_eq!(fs::read_to_string(out).unwrap(), "delta_fv,delta_j,choice\n");
}

fn learning_config(dir: &Path, seed: u64) -> PathBuf {
    let p = dir.join(format!("config{seed}.json"));
    fs::write(
        &p,
        format!(r#"{{"n_dep": 50, "n_atoms": 3, "n_vars": 6, "n_views": 40, "n_relations": 30, "seed": {seed}}}"#),
    )
    .unwrap();
    p
}

#[test]
fn learn_then_eval_gives_mcc_one_and_inverted_model_minus_one() {
    let tmp = tempfile::tempdir().unwrap();
    let train = learning_config(tmp.path(), 500);
    let model = tmp.path().join("model.csv");
    let o = run(&["learn", "--gen", s(&train), "--count", "20", "--out", s(&model)]);
    assert_eq!(code(&o), 0);
    let rows = fs::read_to_string(&model).unwrap().lines().count() - 1;
    assert!(rows >= 20, "{rows}");
    let eval = learning_config(tmp.path(), 900);
    let o = run(&["eval", "--model", s(&model), "--gen", s(&eval), "--count", "20"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["mcc"], 1.0);

    let inverted: String = fs::read_to_string(&model)
        .unwrap()
        .lines()
        .enumerate()
        .map(|(i, l)| {
            if i == 0 {
                format!("{l}\n")
            } else {
                let (head, c) = l.rsplit_once(',').unwrap();
                format!("{head},{}\n", if c == "1" { 2 } else { 1 })
            }
        })
        .collect();
    let inv = tmp.path().join("inv.csv");
    fs::write(&inv, inverted).unwrap();
    let o = run(&["eval", "--model", s(&inv), "--gen", s(&eval), "--count", "20"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["mcc"], -1.0);
}

#[test]
fn eval_with_no_pairs_exits_2() {
    let tmp = tempfile::tempdir().unwrap();
    let model = tmp.path().join("m.csv");
    fs::write(&model, "delta_fv,delta_j,choice\n1,0,2\n").unwrap();
    let o = run(&["eval", "--model", s(&model), "--pairs-from", s(tmp.path())]);
    assert_eq!(code(&o), 2);
}

#[test]
fn gen_writes_a_parseable_scenario() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("scn");
    let o = run(&["gen", "--n-dep", "7", "--seed", "3", "-o", s(&out)]);
    assert_eq!(code(&o), 0);
    for f in ["source.schema", "views.tgds", "mapping.tgds", "config.json"] {
        assert!(out.join(f).exists(), "{f}");
    }
    let o = run(&["check", s(&out)]);
    assert!(code(&o) == 0 || code(&o) == 1);
    assert_eq!(fs::read_to_string(out.join("mapping.tgds")).unwrap().lines().count(), 7);
}

#[test]
fn seed_env_var_overrides_config() {
    let tmp = tempfile::tempdir().unwrap();
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    let c = tmp.path().join("c");
    bin()
        .args(["gen", "--seed", "1", "-o", s(&a)])
        .env("MAPREPAIR_SEED", "99")
        .output()
        .unwrap();
    bin()
        .args(["gen", "--seed", "2", "-o", s(&b)])
        .env("MAPREPAIR_SEED", "99")
        .output()
        .unwrap();
    run(&["gen", "--seed", "99", "-o", s(&c)]);
    let read = |d: &Path| fs::read_to_string(d.join("mapping.tgds")).unwrap();
    assert_eq!(read(&a), read(&b));
    assert_eq!(read(&a), read(&c));
}

#[test]
fn bench_emits_one_report_per_seed_and_a_median() {
    let o = run(&["bench", "--seeds", "5", "--n-dep", "10", "--jobs", "2"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let reports: Vec<serde_json::Value> = String::from_utf8(o.stdout)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(reports.len(), 5);
    let mut totals: Vec<f64> = reports
        .iter()
        .map(|r| r["timings"]["total_ms"].as_f64().unwrap())
        .collect();
    totals.sort_by(f64::total_cmp);
    let summary: serde_json::Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(summary["median_repair_ms"].as_f64().unwrap(), totals[2]);
}

#[test]
fn repair_is_deterministic() {
    let tmp = tempfile::tempdir().unwrap();
    let scn = tmp.path().join("scn");
    run(&["gen", "--n-dep", "40", "--n-atoms", "3", "--seed", "11", "-o", s(&scn)]);
    let mut outputs = Vec::new();
    for i in 0..2 {
        let out = tmp.path().join(format!("out{i}"));
        let log = tmp.path().join(format!("log{i}"));
        run(&["repair", s(&scn), "-o", s(&out), "--log", s(&log)]);
        outputs.push((fs::read(out).unwrap(), fs::read(log).unwrap()));
    }
    assert_eq!(outputs[0], outputs[1]);
}

fn keys(v: &serde_json::Value) -> std::collections::BTreeSet<String> {
    v.as_object().unwrap().keys().cloned().collect()
}

fn required(v: &serde_json::Value) -> std::collections::BTreeSet<String> {
    v["required"]
        .as_array()
        .unwrap()
        .iter()
        .map(|k| k.as_str().unwrap().to_string())
        .collect()
}

#[test]
fn reports_carry_exactly_the_fields_of_the_published_schema() {
    let schema_path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../docs/report.schema.json");
    let schema: serde_json::Value = serde_json::from_str(&fs::read_to_string(schema_path).unwrap()).unwrap();
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out.tgds");
    let check = run(&["check", s(&fixture("running")), "--json"]);
    let repair = run(&["repair", s(&fixture("running")), "-o", s(&out), "--json"]);
    for o in [check, repair] {
        let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
        assert_eq!(keys(&v), required(&schema));
        assert_eq!(keys(&v["timings"]), required(&schema["properties"]["timings"]));
        assert_eq!(keys(&v["counts"]), required(&schema["properties"]["counts"]));
    }
}
