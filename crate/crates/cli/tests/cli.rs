use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use rrl_core::envs::build_gambler;
use rrl_core::harness::experiment::ExperimentConfig;
use rrl_core::model::DivergenceSpec;

fn rrl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rrl"))
        .args(args)
        .env("RRL_THREADS", "1")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn validate_reports_defects() {
    let tmp = tempfile::tempdir().unwrap();
    let good = tmp.path().join("good.json");
    build_gambler(6, 4, 0.6, DivergenceSpec::chi2(0.3).unwrap())
        .unwrap()
        .save(&good)
        .unwrap();
    let out = rrl(&["validate", path(&good)]);
    assert!(out.status.success());
    assert!(stdout(&out).starts_with("ok: S=8 A=4 H=4"));

    let mut model: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&good).unwrap()).unwrap();
    model["kernel"][0][1][1][0] = serde_json::json!(0.5);
    let bad = tmp.path().join("bad.json");
    fs::write(&bad, model.to_string()).unwrap();
    let out = rrl(&["validate", path(&bad)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("row (h=1,s=1,a=1)"));

    let out = rrl(&["validate", path(&tmp.path().join("missing.json"))]);
    assert!(!out.status.success());
}

#[test]
fn oracle_check_passes() {
    let out = rrl(&[
        "oracle-check",
        "--sigma",
        "0.3",
        "--kind",
        "chi2",
        "--instances",
        "10",
    ]);
    assert!(out.status.success(), "{}", stdout(&out));
    assert!(stdout(&out).contains("10/10 within tolerance"));
    assert!(
        !rrl(&["oracle-check", "--sigma", "0.3", "--kind", "hellinger"])
            .status
            .success()
    );
}

#[test]
fn run_then_plot() {
    let tmp = tempfile::tempdir().unwrap();
    let out_dir = tmp.path().join("results");
    let cfg = serde_json::json!({
        "environment": "frozen_lake",
        "algorithm": ["rvi", "ucbvi"],
        "divergence": "KL",
        "sigma": 0.2,
        "H": 6,
        "K": 20,
        "seeds": [1],
        "output_dir": out_dir,
    });
    let cfg_path = tmp.path().join("cfg.json");
    fs::write(&cfg_path, cfg.to_string()).unwrap();
    let out = rrl(&["run", path(&cfg_path)]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(out_dir.join("manifest.json").exists());

    let agg = out_dir.join("rvi_kl_sigma0.2_H6").join("aggregate.csv");
    for kind in ["regret", "epsilon"] {
        let svg = tmp.path().join(format!("{kind}.svg"));
        let out = rrl(&["plot", path(&agg), "--kind", kind, "--out", path(&svg)]);
        assert!(out.status.success());
        assert!(fs::read_to_string(&svg).unwrap().starts_with("<svg"));
    }

    let junk = tmp.path().join("junk.csv");
    fs::write(&junk, "episode,mean_regret\n1,2\n").unwrap();
    let svg = tmp.path().join("junk.svg");
    let out = rrl(&["plot", path(&junk), "--kind", "regret", "--out", path(&svg)]);
    assert!(!out.status.success());
    assert!(!svg.exists());
}

#[test]
fn shipped_configs_parse() {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut n = 0;
    for entry in fs::read_dir(dir).unwrap() {
        let p = entry.unwrap().path();
        if p.extension().is_some_and(|e| e == "json") {
            ExperimentConfig::load(&p).unwrap_or_else(|e| panic!("{}: {e}", p.display()));
            n += 1;
        }
    }
    assert!(n >= 4);
}
