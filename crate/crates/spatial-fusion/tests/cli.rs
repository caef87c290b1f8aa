use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spatial-fusion"))
        .current_dir(dir)
        .args(args)
        .output()
        .unwrap()
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn fixtures(dir: &Path) {
    let out = run(
        dir,
        &[
            "gen-fixtures",
            "--seed",
            "11",
            "--count",
            "10",
            "--dim",
            "8",
            "--out",
            "fx",
            "--wav-count",
            "2",
        ],
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}

fn trained(dir: &Path) {
    fixtures(dir);
    let out = run(
        dir,
        &[
            "train-toy",
            "--manifest",
            "fx/manifest.json",
            "--steps",
            "5",
            "--lr",
            "0.05",
            "--seed",
            "2",
            "--out",
            "params",
            "--heads",
            "2",
        ],
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn gradcheck_reports_and_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["gradcheck", "--seed", "42", "--dim", "16"]);
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v["max_rel_err"].as_f64().unwrap() <= 1e-5);
    assert_eq!(v["config"]["seed"], 42);
    assert_eq!(v["config"]["model"]["dim"], 16);
}

#[test]
fn gradcheck_above_tolerance_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(
        dir.path(),
        &[
            "gradcheck",
            "--seed",
            "1",
            "--dim",
            "4",
            "--heads",
            "1",
            "--bands",
            "2",
            "--pool",
            "4",
            "--tol",
            "1e-20",
        ],
    );
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("exceeds tolerance"));
}

#[test]
fn rte_of_a_file_with_itself_is_zero() {
    let dir = tempfile::tempdir().unwrap();
    fixtures(dir.path());
    let w = "fx/audio/sample-0000.wav";
    let out = run(dir.path(), &["rte", "--pred", w, "--target", w]);
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["value"], 0.0);
    assert_eq!(v["metric"], "rte");
}

#[test]
fn usage_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        &[
            "eval",
            "--manifest",
            "m",
            "--params",
            "p",
            "--report",
            "r",
            "--zero-source",
            "banana",
        ][..],
        &["frobnicate"],
        &["rt60"],
        &["gradcheck", "--seed", "1", "--dim", "16", "--bogus"],
        &["rte", "--pred", "a.wav"],
    ] {
        let out = run(dir.path(), args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn eval_report_schema_and_order() {
    let dir = tempfile::tempdir().unwrap();
    trained(dir.path());
    let out = run(
        dir.path(),
        &[
            "eval",
            "--manifest",
            "fx/manifest.json",
            "--params",
            "params",
            "--report",
            "eval.json",
        ],
    );
    assert!(out.status.success());
    let v = json(&dir.path().join("eval.json"));
    let obj = v.as_object().unwrap();
    for k in ["mse", "n", "lambda_mean", "per_sample", "config"] {
        assert!(obj.contains_key(k), "{k}");
    }
    let manifest = json(&dir.path().join("fx/manifest.json"));
    let ids: Vec<_> = manifest
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["id"].clone())
        .collect();
    let reported: Vec<_> = v["per_sample"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["id"].clone())
        .collect();
    assert_eq!(ids, reported);
    let lm = &v["lambda_mean"];
    let sum: f64 = ["rgb", "depth", "semantic"]
        .iter()
        .map(|k| lm[k].as_f64().unwrap())
        .sum();
    assert!((sum - 1.0).abs() < 1e-12);
    assert_eq!(v["config"]["model"]["heads"], 2);
    assert!(v["config"]["zero_source"].is_null());
}

#[test]
fn zeroing_a_source_is_recorded_and_changes_mse() {
    let dir = tempfile::tempdir().unwrap();
    trained(dir.path());
    let base = [
        "eval",
        "--manifest",
        "fx/manifest.json",
        "--params",
        "params",
        "--report",
    ];
    assert!(run(dir.path(), &[&base[..], &["a.json"]].concat())
        .status
        .success());
    assert!(run(
        dir.path(),
        &[&base[..], &["b.json", "--zero-source", "rgb"]].concat()
    )
    .status
    .success());
    let (a, b) = (
        json(&dir.path().join("a.json")),
        json(&dir.path().join("b.json")),
    );
    assert_eq!(b["config"]["zero_source"], "rgb");
    assert_ne!(a["mse"], b["mse"]);
}

#[test]
fn training_writes_params_and_trace() {
    let dir = tempfile::tempdir().unwrap();
    trained(dir.path());
    let t = json(&dir.path().join("params/training.json"));
    assert_eq!(t["losses"].as_array().unwrap().len(), 5);
    assert_eq!(t["config"]["lr"], 0.05);
    let index = json(&dir.path().join("params/index.json"));
    let tensors = index["tensors"].as_array().unwrap();
    assert_eq!(tensors[0]["name"], "pos.w1");
    for (i, t) in tensors.iter().enumerate() {
        assert_eq!(t["position"], i);
        assert!(dir
            .path()
            .join("params")
            .join(t["file"].as_str().unwrap())
            .exists());
    }
}

#[test]
fn fuse_dump_weights_adds_vectors() {
    let dir = tempfile::tempdir().unwrap();
    trained(dir.path());
    let base = [
        "fuse",
        "--manifest",
        "fx/manifest.json",
        "--params",
        "params",
        "--out",
    ];
    assert!(run(dir.path(), &[&base[..], &["plain.json"]].concat())
        .status
        .success());
    assert!(run(
        dir.path(),
        &[&base[..], &["full.json", "--dump-weights"]].concat()
    )
    .status
    .success());
    let (plain, full) = (
        json(&dir.path().join("plain.json")),
        json(&dir.path().join("full.json")),
    );
    assert!(plain["per_sample"][0].get("vectors").is_none());
    let v = &full["per_sample"][0]["vectors"];
    for k in ["h", "v_r", "v_d", "v_s"] {
        assert_eq!(v[k].as_array().unwrap().len(), 8);
    }
    let v_r_sum: f64 = v["v_r"]
        .as_array()
        .unwrap()
        .iter()
        .map(|x| x.as_f64().unwrap())
        .sum();
    assert!((v_r_sum - 1.0).abs() < 1e-12);
    assert_eq!(
        plain["per_sample"][0]["lambda"],
        full["per_sample"][0]["lambda"]
    );
}

#[test]
fn encode_position_raw_and_learned() {
    let dir = tempfile::tempdir().unwrap();
    trained(dir.path());
    assert!(run(
        dir.path(),
        &[
            "encode-position",
            "--x",
            "0.5",
            "--y",
            "0.5",
            "--bands",
            "2",
            "--out",
            "raw.mskt"
        ]
    )
    .status
    .success());
    let raw = spatial_fusion::mskt::read_tensor(&dir.path().join("raw.mskt")).unwrap();
    let expected = [1.0, 0.0, 1.0, 0.0, 0.0, -1.0, 0.0, -1.0];
    for (a, b) in raw.as_slice().iter().zip(expected) {
        assert!((a - b).abs() < 1e-7, "{a} vs {b}");
    }
    assert!(run(
        dir.path(),
        &[
            "encode-position",
            "--x",
            "0.5",
            "--y",
            "0.5",
            "--params",
            "params",
            "--out",
            "fp.mskt"
        ]
    )
    .status
    .success());
    let fp = spatial_fusion::mskt::read_tensor(&dir.path().join("fp.mskt")).unwrap();
    assert_eq!((fp.rows(), fp.cols()), (1, 8));
    let out = run(
        dir.path(),
        &[
            "encode-position",
            "--x",
            "1.5",
            "--y",
            "0.5",
            "--out",
            "bad.mskt",
        ],
    );
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn melspec_shape() {
    let dir = tempfile::tempdir().unwrap();
    fixtures(dir.path());
    assert!(run(
        dir.path(),
        &[
            "melspec",
            "--wav",
            "fx/audio/sample-0000.wav",
            "--out",
            "mel.mskt"
        ]
    )
    .status
    .success());
    let m = spatial_fusion::mskt::read_tensor(&dir.path().join("mel.mskt")).unwrap();
    // 1.5 s at 16 kHz, padded by 512 each side, hop 256.
    assert_eq!((m.rows(), m.cols()), (1 + (24_000 + 1024 - 1024) / 256, 80));
    assert!(m.as_slice().iter().all(|&v| v >= 1e-10_f32 as f64));
}

#[test]
fn metric_manifest_mode_covers_every_wav_record() {
    let dir = tempfile::tempdir().unwrap();
    fixtures(dir.path());
    for metric in ["rte", "mcd"] {
        let out = run(
            dir.path(),
            &[
                metric,
                "--manifest",
                "fx/audio_manifest.json",
                "--pred-dir",
                "fx/pred",
            ],
        );
        assert!(
            out.status.success(),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
        let v: Value = serde_json::from_slice(&out.stdout).unwrap();
        let pairs = v["per_pair"].as_array().unwrap();
        assert_eq!(pairs.len(), 2);
        let mean = pairs
            .iter()
            .map(|p| p["value"].as_f64().unwrap())
            .sum::<f64>()
            / 2.0;
        assert!((v["value"].as_f64().unwrap() - mean).abs() < 1e-15);
    }
}

#[test]
fn sample_rate_mismatch_is_a_domain_error() {
    let dir = tempfile::tempdir().unwrap();
    let a = spatial_fusion_core::acoustics::Waveform::new(16_000, vec![0.1; 4000]).unwrap();
    let b = spatial_fusion_core::acoustics::Waveform::new(8_000, vec![0.1; 4000]).unwrap();
    spatial_fusion::wav::write_wav(&dir.path().join("a.wav"), &a).unwrap();
    spatial_fusion::wav::write_wav(&dir.path().join("b.wav"), &b).unwrap();
    let out = run(dir.path(), &["mcd", "--pred", "a.wav", "--target", "b.wav"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("sample rate mismatch"));
}
