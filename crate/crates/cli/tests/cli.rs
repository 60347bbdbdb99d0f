//! End-to-end tests driving the built binary: descriptor planning, the
//! encode -> fail -> repair -> collect golden pipeline over shard files,
//! bounds CSV output, verification exit codes and the simulator.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bfr(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bfr"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn plan_p2_msr(dir: &Path) {
    let out = bfr(
        dir,
        &[
            "plan",
            "--construction",
            "plane",
            "--p",
            "2",
            "--sub",
            "msr",
            "--ksub",
            "3",
            "--dsub",
            "4",
            "--nsub",
            "6",
            "--out",
            "desc.json",
        ],
    );
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stderr(&out).contains("alpha=6"));
    assert!(stderr(&out).contains("M=42"));
    assert!(stderr(&out).contains("gamma=12"));
}

#[test]
fn plan_emits_descriptor_and_derived_point() {
    let tmp = tempfile::tempdir().unwrap();
    plan_p2_msr(tmp.path());
    let desc: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("desc.json")).unwrap()).unwrap();
    assert_eq!(desc["params"]["M"], 42);
    assert_eq!(desc["params"]["alpha"], 6);
    assert_eq!(desc["params"]["d"], 12);
    assert_eq!(desc["psi_generator"], 2);
    assert_eq!(desc["sub"]["kind"], "msr");
}

#[test]
fn plan_transpose_file_size() {
    let tmp = tempfile::tempdir().unwrap();
    let out = bfr(
        tmp.path(),
        &[
            "plan",
            "--construction",
            "transpose",
            "--n",
            "8",
            "--k",
            "4",
        ],
    );
    assert!(out.status.success());
    assert!(stderr(&out).contains("M=12"));
    let desc: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(desc["params"]["M"], 12);
    assert_eq!(desc["construction"], "transpose");
}

#[test]
fn plan_rejects_non_prime_order_with_exit_2() {
    let tmp = tempfile::tempdir().unwrap();
    let out = bfr(
        tmp.path(),
        &[
            "plan",
            "--construction",
            "plane",
            "--p",
            "4",
            "--sub",
            "msr",
            "--ksub",
            "3",
            "--nsub",
            "6",
        ],
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("not prime"));
}

#[test]
fn golden_pipeline_round_trips_bytes() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    plan_p2_msr(dir);
    let payload: Vec<u8> = (0..42u8)
        .map(|i| i.wrapping_mul(7).wrapping_add(3))
        .collect();
    fs::write(dir.join("file.bin"), &payload).unwrap();

    let out = bfr(
        dir,
        &[
            "encode",
            "--descriptor",
            "desc.json",
            "--input",
            "file.bin",
            "--out-dir",
            "shards",
        ],
    );
    assert!(out.status.success(), "{}", stderr(&out));
    assert_eq!(fs::read_dir(dir.join("shards")).unwrap().count(), 14);

    let out = bfr(
        dir,
        &[
            "fail",
            "--descriptor",
            "desc.json",
            "--shard-dir",
            "shards",
            "--block",
            "3",
        ],
    );
    assert!(out.status.success(), "{}", stderr(&out));

    for node in ["0", "1"] {
        let out = bfr(
            dir,
            &[
                "repair",
                "--descriptor",
                "desc.json",
                "--shard-dir",
                "shards",
                "--block",
                "3",
                "--node",
                node,
            ],
        );
        assert!(out.status.success(), "{}", stderr(&out));
        assert!(stderr(&out).contains("downloaded 12 symbols"));
    }

    let out = bfr(
        dir,
        &[
            "collect",
            "--descriptor",
            "desc.json",
            "--shard-dir",
            "shards",
            "--out",
            "recovered.bin",
        ],
    );
    assert!(out.status.success(), "{}", stderr(&out));
    assert_eq!(fs::read(dir.join("recovered.bin")).unwrap(), payload);

    // an explicit non-default choice returns the same bytes
    let out = bfr(
        dir,
        &[
            "collect",
            "--descriptor",
            "desc.json",
            "--shard-dir",
            "shards",
            "--out",
            "recovered2.bin",
            "--blocks",
            "0,1,2,3,4,5,6",
            "--nodes",
            "1;0;1;0;1;0;1",
        ],
    );
    assert!(out.status.success(), "{}", stderr(&out));
    assert_eq!(fs::read(dir.join("recovered2.bin")).unwrap(), payload);
}

#[test]
fn encode_is_deterministic() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    plan_p2_msr(dir);
    let payload = vec![9u8; 42];
    fs::write(dir.join("file.bin"), &payload).unwrap();
    for shard_dir in ["a", "b"] {
        let out = bfr(
            dir,
            &[
                "encode",
                "--descriptor",
                "desc.json",
                "--input",
                "file.bin",
                "--out-dir",
                shard_dir,
            ],
        );
        assert!(out.status.success());
    }
    for entry in fs::read_dir(dir.join("a")).unwrap() {
        let name = entry.unwrap().file_name();
        assert_eq!(
            fs::read(dir.join("a").join(&name)).unwrap(),
            fs::read(dir.join("b").join(&name)).unwrap(),
            "{name:?}"
        );
    }
}

#[test]
fn encode_rejects_wrong_length_with_exit_2() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    plan_p2_msr(dir);
    fs::write(dir.join("short.bin"), vec![0u8; 41]).unwrap();
    let out = bfr(
        dir,
        &[
            "encode",
            "--descriptor",
            "desc.json",
            "--input",
            "short.bin",
            "--out-dir",
            "shards",
        ],
    );
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn bounds_csv_rows() {
    let tmp = tempfile::tempdir().unwrap();
    let out = bfr(
        tmp.path(),
        &["bounds", "--b", "3", "--k", "6", "--d", "10", "--M", "36"],
    );
    assert!(out.status.success());
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "b,k,d,rho,M,alpha_msr,gamma_msr,alpha_mbr,gamma_mbr,gamma_classical_msr,gamma_classical_mbr"
    );
    assert_eq!(lines.next().unwrap(), "3,6,10,0,36,6,10,15/2,15/2,12,8");

    // odd-k two-block branch: gamma = 2Md/(2kd - k^2 - k) = 96/12 = 8
    let out = bfr(
        tmp.path(),
        &["bounds", "--b", "2", "--k", "3", "--d", "4", "--M", "12"],
    );
    assert!(out.status.success());
    let text = stdout(&out);
    let row = text.lines().nth(1).unwrap();
    assert_eq!(row, "2,3,4,0,12,4,8,24/5,24/5,8,16/3");

    // rho substitutes b_c = b - rho
    let with_rho = bfr(
        tmp.path(),
        &[
            "bounds", "--b", "4", "--k", "6", "--d", "10", "--M", "36", "--rho", "1",
        ],
    );
    let direct = bfr(
        tmp.path(),
        &["bounds", "--b", "3", "--k", "6", "--d", "10", "--M", "36"],
    );
    let row_rho = stdout(&with_rho);
    let row_direct = stdout(&direct);
    let tail = |s: &str| {
        s.lines()
            .nth(1)
            .unwrap()
            .split(',')
            .skip(5)
            .map(String::from)
            .collect::<Vec<_>>()
    };
    assert_eq!(tail(&row_rho), tail(&row_direct));
}

#[test]
fn bounds_curve_appends_float_samples() {
    let tmp = tempfile::tempdir().unwrap();
    let out = bfr(
        tmp.path(),
        &[
            "bounds", "--b", "3", "--k", "6", "--d", "10", "--M", "36", "--curve", "5",
        ],
    );
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("gamma,alpha"));
    let curve_rows: Vec<&str> = text
        .lines()
        .skip_while(|l| *l != "gamma,alpha")
        .skip(1)
        .collect();
    assert_eq!(curve_rows.len(), 5);
    // endpoints: (7.5, 7.5) and (10, 6)
    assert!(curve_rows[0].starts_with("7.5"));
    assert!(curve_rows[4].starts_with("1.0"));
    assert!(curve_rows[4].ends_with("6.00000000000e0"));
}

#[test]
fn verify_quick_passes_in_budget() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    plan_p2_msr(dir);
    let start = std::time::Instant::now();
    let out = bfr(
        dir,
        &["verify", "--descriptor", "desc.json", "--level", "quick"],
    );
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(start.elapsed().as_secs() < 10, "quick verify exceeded 10 s");
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert!(report["checks"].as_array().unwrap().len() >= 6);
}

#[test]
fn verify_exhaustive_passes_and_reports_bound_point() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    plan_p2_msr(dir);
    let out = bfr(
        dir,
        &[
            "verify",
            "--descriptor",
            "desc.json",
            "--level",
            "exhaustive",
        ],
    );
    assert!(out.status.success(), "{}", stderr(&out));
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let op = report["checks"]
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["name"] == "operating-point")
        .unwrap();
    assert_eq!(op["passed"], true);
    assert!(op["detail"]
        .as_str()
        .unwrap()
        .contains("equals the bound point"));
    let oracle = report["checks"]
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["name"] == "bound-oracle-agreement")
        .unwrap();
    assert!(oracle["detail"]
        .as_str()
        .unwrap()
        .contains("sits on the bound"));
}

#[test]
fn verify_detects_corrupted_shard_with_exit_1() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    plan_p2_msr(dir);
    let payload = vec![5u8; 42];
    fs::write(dir.join("file.bin"), &payload).unwrap();
    let out = bfr(
        dir,
        &[
            "encode",
            "--descriptor",
            "desc.json",
            "--input",
            "file.bin",
            "--out-dir",
            "shards",
        ],
    );
    assert!(out.status.success());
    // flip one symbol byte past the 16-byte header
    let victim = dir.join("shards").join("shard_b001_n000.bin");
    let mut bytes = fs::read(&victim).unwrap();
    bytes[20] ^= 0xff;
    fs::write(&victim, bytes).unwrap();
    let out = bfr(
        dir,
        &[
            "verify",
            "--descriptor",
            "desc.json",
            "--shard-dir",
            "shards",
            "--input",
            "file.bin",
        ],
    );
    assert_eq!(out.status.code(), Some(1));
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let failed = report["checks"]
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["passed"] == false)
        .unwrap();
    assert!(failed["counterexample"].is_object());
}

#[test]
fn plan_emits_feasibility_table() {
    let tmp = tempfile::tempdir().unwrap();
    let out = bfr(
        tmp.path(),
        &[
            "plan",
            "--construction",
            "plane",
            "--p",
            "2",
            "--sub",
            "mbr",
            "--ksub",
            "3",
            "--dsub",
            "4",
            "--nsub",
            "6",
            "--out",
            "desc.json",
            "--feasibility",
            "feas.json",
        ],
    );
    assert!(out.status.success(), "{}", stderr(&out));
    let feas: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("feas.json")).unwrap()).unwrap();
    let entries = feas["entries"].as_array().unwrap();
    assert_eq!(entries.len(), 4); // rho = 0..=3
    assert_eq!(entries[0]["min_rank"], 63);
    assert_eq!(entries[1]["min_rank"], 57);
    assert_eq!(entries[2]["min_rank"], 50);
    assert_eq!(entries[3]["min_rank"], 42);
    assert_eq!(entries[1]["k_max"], 57);
    assert!(entries[1]["worst_subset"].as_array().unwrap().len() == 6);
}

#[test]
fn sim_runs_random_trace_and_reports() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    plan_p2_msr(dir);
    let out = bfr(
        dir,
        &[
            "sim",
            "--descriptor",
            "desc.json",
            "--random-length",
            "30",
            "--seed",
            "9",
            "--report",
            "report.json",
        ],
    );
    assert!(out.status.success(), "{}", stderr(&out));
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["events_run"], 30);
    assert_eq!(report["durability_ok"], true);
    assert_eq!(report["collects"], report["collect_successes"]);
    // every ledger entry downloads exactly gamma = 12
    for rec in report["ledger"]["repairs"].as_array().unwrap() {
        assert_eq!(rec["downloaded"], 12);
    }
}

#[test]
fn sim_replays_explicit_trace_file() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    plan_p2_msr(dir);
    let trace = serde_json::json!({
        "seed": 0,
        "events": [
            {"time": 0, "kind": "block_fail", "block": 2},
            {"time": 1, "kind": "repair_all"},
            {"time": 2, "kind": "collect"},
        ]
    });
    fs::write(dir.join("trace.json"), trace.to_string()).unwrap();
    let out = bfr(
        dir,
        &["sim", "--descriptor", "desc.json", "--trace", "trace.json"],
    );
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stderr(&out).contains("1 collects ok"));
    assert!(stderr(&out).contains("24 symbols downloaded"));
}

#[test]
fn sim_rejects_invalid_trace_with_exit_2() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    plan_p2_msr(dir);
    let trace = serde_json::json!({
        "seed": 0,
        "events": [
            {"time": 0, "kind": "block_fail", "block": 1},
            {"time": 1, "kind": "block_fail", "block": 2},
        ]
    });
    fs::write(dir.join("trace.json"), trace.to_string()).unwrap();
    let out = bfr(
        dir,
        &["sim", "--descriptor", "desc.json", "--trace", "trace.json"],
    );
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn gabidulin_plane_pipeline() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    let out = bfr(
        dir,
        &[
            "plan",
            "--construction",
            "gabidulin-plane",
            "--p",
            "2",
            "--sub",
            "mbr",
            "--ksub",
            "3",
            "--dsub",
            "4",
            "--nsub",
            "6",
            "--rho",
            "1",
            "--out",
            "desc.json",
        ],
    );
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stderr(&out).contains("M=57"));
    // 57 extension symbols of 63 bytes each
    let payload: Vec<u8> = (0..57 * 63).map(|i| (i % 251) as u8).collect();
    fs::write(dir.join("file.bin"), &payload).unwrap();
    let out = bfr(
        dir,
        &[
            "encode",
            "--descriptor",
            "desc.json",
            "--input",
            "file.bin",
            "--out-dir",
            "shards",
        ],
    );
    assert!(out.status.success(), "{}", stderr(&out));
    // lose a block and collect from the remaining six without repairing
    let out = bfr(
        dir,
        &[
            "fail",
            "--descriptor",
            "desc.json",
            "--shard-dir",
            "shards",
            "--block",
            "0",
        ],
    );
    assert!(out.status.success());
    let out = bfr(
        dir,
        &[
            "collect",
            "--descriptor",
            "desc.json",
            "--shard-dir",
            "shards",
            "--out",
            "recovered.bin",
        ],
    );
    assert!(out.status.success(), "{}", stderr(&out));
    assert_eq!(fs::read(dir.join("recovered.bin")).unwrap(), payload);
}
