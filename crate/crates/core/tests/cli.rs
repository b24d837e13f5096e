use std::path::PathBuf;

use sebkit::cli::run;
use sebkit::io::{channel_to_json, parse_channel_file, to_canonical_json};
use sebkit::random::{random_commutative_holevo, rng};
use sebkit::{Channel, Tolerances};
use serde_json::Value;

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn report(args: &[&str]) -> (i32, Value) {
    let out = run(args.iter().copied());
    let v = serde_json::from_str(&out.stdout)
        .unwrap_or_else(|e| panic!("{args:?}: bad report ({e}): {}{}", out.stdout, out.stderr));
    (out.code, v)
}

fn matrix(v: &Value) -> Vec<Vec<(f64, f64)>> {
    v.as_array()
        .unwrap()
        .iter()
        .map(|row| {
            row.as_array()
                .unwrap()
                .iter()
                .map(|z| (z[0].as_f64().unwrap(), z[1].as_f64().unwrap()))
                .collect()
        })
        .collect()
}

#[test]
fn decompose_dephasing_fixture() {
    let (code, v) = report(&["decompose", &fixture("dephasing-d2.json"), "--seed", "7"]);
    assert_eq!(code, 0);
    assert_eq!(v["ok"], Value::Bool(true));
    assert_eq!(v["payload"]["seed"], 7);
    for k in 0..2 {
        let f = matrix(&v["payload"]["effects"][k]);
        for (i, row) in f.iter().enumerate() {
            for (j, &(re, im)) in row.iter().enumerate() {
                let want = if i == k && j == k { 1.0 } else { 0.0 };
                assert!((re - want).abs() < 1e-12 && im.abs() < 1e-12);
            }
        }
    }
}

#[test]
fn range_comm_identity_reports_witness() {
    let (code, v) = report(&["range-comm", &fixture("identity-d2.json")]);
    assert_eq!(code, 1);
    assert_eq!(
        v["payload"]["worst_pair"],
        serde_json::json!([[1, 2], [2, 1]])
    );
    assert_eq!(v["ok"], Value::Bool(false));
}

#[test]
fn synth_null_then_verify() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("channel.json");
    let out_s = out.to_string_lossy().into_owned();
    let (code, v) = report(&["synth-null", &fixture("sigmaz-span.json"), "-o", &out_s]);
    assert_eq!(code, 0);
    assert_eq!(v["payload"]["dim_out"], 3);
    assert_eq!(v["payload"]["verification"]["rank_of_effect_map"], 3);
    let (code, v) = report(&["verify", &out_s]);
    assert_eq!(code, 0);
    assert_eq!(v["payload"]["representation"], "holevo");
}

#[test]
fn emitted_channel_files_verify() {
    let dir = tempfile::tempdir().unwrap();
    let mut emitted = Vec::new();
    let decomposed = dir.path().join("decomposed.json");
    let d = decomposed.to_string_lossy().into_owned();
    assert_eq!(
        report(&["decompose", &fixture("prepare-state-d3.json"), "-o", &d]).0,
        0
    );
    emitted.push(d);
    for (to, input) in [
        ("kraus", "prepare-state-d3.json"),
        ("holevo", "dephasing-d3.json"),
        ("choi", "dephasing-d2.json"),
    ] {
        let p = dir
            .path()
            .join(format!("{to}.json"))
            .to_string_lossy()
            .into_owned();
        let (code, v) = report(&["convert", &fixture(input), "--to", to, "-o", &p]);
        assert_eq!(code, 0, "{v}");
        assert_eq!(v["payload"]["to"], to);
        emitted.push(p);
    }
    for path in &emitted {
        let (code, v) = report(&["verify", path]);
        assert_eq!(code, 0, "{path}: {v}");
        let again = parse_channel_file(path.as_ref(), true, &Tolerances::default()).unwrap();
        let text = std::fs::read_to_string(path).unwrap();
        assert_eq!(text, to_canonical_json(&channel_to_json(&again)));
    }
}

#[test]
fn random_commutative_channel_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let mut r = rng(77);
    let ch = Channel::Holevo(random_commutative_holevo(&mut r, 4, 5).unwrap());
    let src = dir.path().join("src.json");
    std::fs::write(&src, to_canonical_json(&channel_to_json(&ch))).unwrap();
    let src = src.to_string_lossy().into_owned();
    let out = dir.path().join("out.json").to_string_lossy().into_owned();
    let (code, v) = report(&[
        "decompose",
        &src,
        "--weights",
        "0.1,0.2,0.3,0.4",
        "-o",
        &out,
    ]);
    assert_eq!(code, 0, "{v}");
    assert_eq!(report(&["verify", &out]).0, 0);
    assert_eq!(report(&["dilate", &out]).0, 0);
    assert_eq!(report(&["fixed-points", &out]).0, 0);
}

#[test]
fn dilate_and_fixed_points_fixtures() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("dil.json").to_string_lossy().into_owned();
    let (code, v) = report(&["dilate", &fixture("dephasing-d2.json"), "-o", &out]);
    assert_eq!(code, 0, "{v}");
    let written: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(written["dilation_dim"], 4);

    let (code, v) = report(&["fixed-points", &fixture("dephasing-d3.json"), "--seed", "7"]);
    assert_eq!(code, 0);
    assert_eq!(v["payload"]["commutant_dim"], 3);
    assert_eq!(v["payload"]["projections"].as_array().unwrap().len(), 3);
}

#[test]
fn mult_domain_exit_codes() {
    let ch = fixture("dephasing-d2.json");
    let (code, v) = report(&[
        "mult-domain",
        &ch,
        "--projection",
        &fixture("projection-e1-d2.json"),
    ]);
    assert_eq!(code, 0);
    assert_eq!(v["payload"]["v_eigen_ok"], Value::Bool(true));
    let (code, v) = report(&[
        "mult-domain",
        &ch,
        "--projection",
        &fixture("projection-plus-d2.json"),
    ]);
    assert_eq!(code, 1);
    assert_eq!(v["payload"]["in_domain"], Value::Bool(false));
}

#[test]
fn input_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(
        &bad,
        r#"{"dim_in": 1, "dim_out": 1, "representation": "holevo",
            "holevo": {"states": [[[[1, 0]]]], "effects": [[[[1.5, 0]]]]}}"#,
    )
    .unwrap();
    let bad = bad.to_string_lossy().into_owned();

    let (code, v) = report(&["range-comm", &bad]);
    assert_eq!(code, 2);
    assert_eq!(v["payload"]["error"]["kind"], "ValidationError");
    assert_eq!(v["payload"]["error"]["path"], "holevo.effects");

    // verify reports the failure as an analysis result
    let (code, v) = report(&["verify", &bad]);
    assert_eq!(code, 1);
    assert_eq!(v["payload"]["ok"], Value::Bool(false));
    assert_eq!(report(&["range-comm", &bad, "--no-verify"]).0, 0);

    let (code, v) = report(&["verify", "/nonexistent/channel.json"]);
    assert_eq!(code, 2);
    assert_eq!(v["payload"]["error"]["kind"], "IoError");

    let (code, _) = report(&[
        "decompose",
        &fixture("dephasing-d2.json"),
        "--weights",
        "0.5,0.6",
    ]);
    assert_eq!(code, 2);
    let (code, _) = report(&[
        "mult-domain",
        &fixture("dephasing-d3.json"),
        "--projection",
        &fixture("projection-e1-d2.json"),
    ]);
    assert_eq!(code, 2);

    assert_eq!(run(["frobnicate"]).code, 2);
    assert_eq!(run(["convert", &fixture("dephasing-d2.json")]).code, 2);
    assert_eq!(
        run(["verify", &fixture("dephasing-d2.json"), "--tol-comm", "2"]).code,
        2
    );
}

#[test]
fn analysis_errors_exit_one() {
    let (code, v) = report(&["decompose", &fixture("identity-d2.json")]);
    assert_eq!(code, 1);
    assert_eq!(v["payload"]["error"]["kind"], "NotCommutativeRange");
    let (code, v) = report(&["convert", &fixture("identity-d2.json"), "--to", "holevo"]);
    assert_eq!(code, 1);
    assert_eq!(v["payload"]["error"]["kind"], "NotCommutativeRange");
}

#[test]
fn tolerance_flags_reach_report() {
    let (_, v) = report(&[
        "verify",
        &fixture("dephasing-d2.json"),
        "--tol-comm",
        "1e-6",
        "--tol-psd",
        "1e-7",
        "--tol-recon",
        "1e-5",
        "--tol-herm",
        "1e-11",
        "--tol-rank",
        "1e-12",
    ]);
    let t = &v["tolerances"];
    assert_eq!(t["eps_comm"].as_f64(), Some(1e-6));
    assert_eq!(t["eps_psd"].as_f64(), Some(1e-7));
    assert_eq!(t["eps_recon"].as_f64(), Some(1e-5));
    assert_eq!(t["eps_herm"].as_f64(), Some(1e-11));
    assert_eq!(t["eps_rank"].as_f64(), Some(1e-12));
}

#[test]
fn text_report() {
    let out = run([
        "range-comm",
        &fixture("dephasing-d3.json"),
        "--report",
        "text",
    ]);
    assert_eq!(out.code, 0);
    assert!(out.stdout.lines().any(|l| l == "command: range-comm"));
    assert!(out.stdout.lines().any(|l| l == "payload.commutes: true"));
}

#[test]
fn timing_flag_only_affects_runtime() {
    let strip = |v: &mut Value| {
        v.as_object_mut().unwrap().remove("runtime_ms");
    };
    let (_, mut a) = report(&["dilate", &fixture("prepare-state-d3.json")]);
    let (_, mut b) = report(&["dilate", &fixture("prepare-state-d3.json"), "--timing"]);
    assert_eq!(a["runtime_ms"], 0);
    strip(&mut a);
    strip(&mut b);
    assert_eq!(a, b);
}
