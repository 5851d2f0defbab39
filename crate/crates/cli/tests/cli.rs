use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_combprism"))
        .args(args)
        .env_remove("COMBPRISM_SEED")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn prism_info_counts() {
    let o = run(&["prism-info", "--base-n", "4", "--t", "5"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "{\"vertices\":20,\"edges\":28}\n");
}

#[test]
fn guard_violations_exit_2() {
    assert_eq!(
        run(&["prism-info", "--base-n", "2", "--t", "3"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(run(&["no-such-command"]).status.code(), Some(2));
    let small = run(&[
        "reduce",
        "--set",
        "0,1,2",
        "--matching",
        "0-1,2-3,4-5",
        "--h",
        "1",
        "--t",
        "2",
    ]);
    assert_eq!(small.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&small.stderr).contains("|S| >= 5"));
    assert_eq!(
        run(&[
            "reduce",
            "--set",
            "0,1,2,3,4",
            "--matching",
            "0-1,2-3,4-5",
            "--h",
            "2",
            "--t",
            "2"
        ])
        .status
        .code(),
        Some(2)
    );
    assert_eq!(
        run(&["verify", "lemma1", "--base-n", "7", "--t-max", "3"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        run(&[
            "slack-matrix",
            "--family",
            "uniform-combs",
            "--n",
            "10",
            "--h",
            "1",
            "--t",
            "2"
        ])
        .status
        .code(),
        Some(2)
    );
}

#[test]
fn reduction_sweep_summary() {
    let o = run(&[
        "verify",
        "lemma1",
        "--base-n",
        "6",
        "--t-max",
        "4",
        "--exhaustive",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(v["checked"].as_u64().unwrap() > 0);
    assert_eq!(v["failed"], 0);
}

#[test]
fn reduce_reports_equal_slacks() {
    let o = run(&[
        "reduce",
        "--set",
        "0,1,2,3,4",
        "--matching",
        "0-1,2-3,4-5",
        "--h",
        "1",
        "--t",
        "3",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(
        v["comb"]["teeth"],
        serde_json::json!([[1, 7, 13], [3, 9, 15], [4, 10, 16]])
    );
    assert_eq!(v["sl_comb"], v["sl_odd"]);
}

#[test]
fn protocol_exact_output_is_a_fraction() {
    let o = run(&[
        "protocol",
        "--base-n",
        "6",
        "--odd-set",
        "0,1,2",
        "--matching",
        "0-3,1-4,2-5",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["output"], serde_json::json!({"num": 2, "den": 1}));
    assert_eq!(v["expected_slack"], 2);
    assert_eq!(v["case"], "small_set");
    assert_eq!(v["bits"], 9);
    assert_eq!(v["budget_ok"], true);
}

#[test]
fn seed_from_environment() {
    let args = [
        "protocol",
        "--set",
        "0,1,2,3,4",
        "--matching",
        "0-5,1-6,2-7,3-4",
        "--mode",
        "mc",
        "--trials",
        "500",
    ];
    let with_env = |seed: &str| {
        Command::new(env!("CARGO_BIN_EXE_combprism"))
            .args(args)
            .env("COMBPRISM_SEED", seed)
            .output()
            .unwrap()
    };
    let a = with_env("9");
    let mut flagged = args.to_vec();
    flagged.extend(["--seed", "9"]);
    assert_eq!(a.stdout, run(&flagged).stdout);
    assert_ne!(a.stdout, with_env("10").stdout);
}

#[test]
fn slack_matrix_and_facet_files() {
    let dir = std::env::temp_dir().join(format!("combprism-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let csv = dir.join("m.csv");
    let o = run(&[
        "slack-matrix",
        "--family",
        "uniform-combs",
        "--h",
        "1",
        "--t",
        "2",
        "--n",
        "7",
        "--out",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().count(), 841);

    let good = dir.join("comb.json");
    std::fs::write(&good, r#"{"handle":[0,1,2],"teeth":[[0,3],[1,4],[2,5]]}"#).unwrap();
    assert_eq!(
        run(&["facet-check", "--n", "6", "--comb", good.to_str().unwrap()])
            .status
            .code(),
        Some(0)
    );
    let shifted = dir.join("shifted.json");
    std::fs::write(
        &shifted,
        r#"{"handle":[0,1,2],"teeth":[[0,3],[1,4],[2,5]],"rhs":9}"#,
    )
    .unwrap();
    assert_eq!(
        run(&[
            "facet-check",
            "--n",
            "6",
            "--comb",
            shifted.to_str().unwrap()
        ])
        .status
        .code(),
        Some(1)
    );
    assert_eq!(
        run(&[
            "facet-check",
            "--n",
            "6",
            "--comb",
            dir.join("missing.json").to_str().unwrap()
        ])
        .status
        .code(),
        Some(2)
    );
    std::fs::remove_dir_all(&dir).unwrap();
}
