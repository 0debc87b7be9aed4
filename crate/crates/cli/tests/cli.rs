use std::process::{Command, Output};

use serde_json::Value;

fn qcorr(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qcorr")).args(args).output().expect("binary runs")
}

fn json(args: &[&str]) -> Value {
    let mut a = args.to_vec();
    a.extend(["--format", "json"]);
    let out = qcorr(&a);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn num(v: &Value) -> f64 {
    v.as_f64().unwrap_or_else(|| panic!("not a number: {v}"))
}

fn tmp(name: &str) -> std::path::PathBuf {
    std::env::temp_dir().join(format!("qcorr-cli-{}-{name}", std::process::id()))
}

#[test]
fn discord_example_state() {
    let v = json(&["discord", "--x", "0.76,0.6,0.8,0.23,0.3"]);
    assert_eq!(v["schema_version"], 1);
    let r = &v["rows"][0];
    assert_eq!(r["measurement"], "three-element");
    assert!((num(&r["theta"]) - 1.02158).abs() < 1e-3);
    assert!((num(&r["sa_min"]) - 0.441172).abs() < 5e-5);
    assert!((num(&r["a_x"]) - 0.780936).abs() < 1e-6);
}

#[test]
fn discord_bell_and_mixed() {
    let bell = json(&["discord", "--rho", "0.5,0,0,0.5,0,0,0,0,0,0,0,0,0.5,0,0,0.5"]);
    let r = &bell["rows"][0];
    assert!((num(&r["discord"]) - 1.0).abs() < 1e-9);
    assert!((num(&r["classical"]) - 1.0).abs() < 1e-9);
    assert!((num(&r["mutual"]) - 2.0).abs() < 1e-9);
    assert_eq!(r["ppt_entangled"], true);

    let mixed = json(&["discord", "--x", "0,0,0,0,0"]);
    let r = &mixed["rows"][0];
    for k in ["discord", "classical", "mutual"] {
        assert_eq!(num(&r[k]), 0.0, "{k}");
    }
}

#[test]
fn discord_complex_rho_and_side_a() {
    // Bell state with a relative phase: same correlations
    let v = json(&["discord", "--rho", "0.5,0,0,0:0.5,0,0,0,0,0,0,0,0,0:-0.5,0,0,0.5", "--measure", "a"]);
    assert!((num(&v["rows"][0]["discord"]) - 1.0).abs() < 1e-9);
    assert_eq!(v["rows"][0]["measured"], "a");
}

#[test]
fn discord_ellipsoid_input() {
    let v = json(&["discord", "--ellipsoid", "0.65,0.65,0.58,0.4,0.5,1"]);
    let r = &v["rows"][0];
    assert_eq!(r["input"], "ellipsoid");
    assert!((num(&r["z_i"]) - 0.5).abs() < 1e-12);
}

#[test]
fn invalid_state_exits_2_with_reason() {
    let out = qcorr(&["discord", "--x", "2,0,0,0,0"]);
    assert_eq!(out.status.code(), Some(2));
    let e: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(e["error"], "not_physical");
    assert!(out.stdout.is_empty());

    let out = qcorr(&["discord", "--rho", "1,0,0,0"]);
    assert_eq!(out.status.code(), Some(2));
    let out = qcorr(&["discord"]);
    assert_eq!(out.status.code(), Some(2));
    let out = qcorr(&["discord", "--ellipsoid", "0.5,0.5,0.5,0,0,3"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn classify_examples() {
    let row = |x: &str, y: &str| json(&["classify-gaussian", "--x", x, "--y", y])["rows"][0].clone();
    let id = row("1,0,0,1", "0,0,0,0");
    assert_eq!((id["cp"].clone(), id["eb"].clone(), id["nb"].clone()), (true.into(), false.into(), false.into()));
    assert_eq!(id["holevo_class"], "B2_noise");
    assert_eq!(num(&id["noise"]), 0.0);

    let conj = row("1,0,0,-1", "3,0,0,3");
    assert_eq!((conj["cp"].clone(), conj["eb"].clone(), conj["nb"].clone()), (true.into(), true.into(), true.into()));
    assert_eq!(conj["holevo_class"], "D_conj");

    let h = std::f64::consts::FRAC_1_SQRT_2.to_string();
    let att = row(&format!("{h},0,0,{h}"), "0.5,0,0,0.5");
    assert_eq!((att["cp"].clone(), att["eb"].clone()), (true.into(), false.into()));
    assert_eq!(att["holevo_class"], "C1_atten");

    // X = 0.5 I has kappa^2 = 0.25 and needs Y >= 0.75
    let under = row("0.5,0,0,0.5", "0.5,0,0,0.5");
    assert_eq!(under["cp"], false);
    assert_eq!(under["eb"], Value::Null);

    let eb_not_nb = row("1,0,0,0", "1.2,0,0,0.9");
    assert_eq!((eb_not_nb["eb"].clone(), eb_not_nb["nb"].clone()), (true.into(), false.into()));
    assert!(num(&eb_not_nb["r0"]) > 0.0);

    assert_eq!(qcorr(&["classify-gaussian", "--x", "1,0,0,1", "--y", "1,0.5,0,1"]).status.code(), Some(2));
    assert_eq!(qcorr(&["classify-gaussian", "--x", "1,0,0", "--y", "1,0,0,1"]).status.code(), Some(2));
}

#[test]
fn wedge_boundary_sweep() {
    let v = json(&["sweep", "wedge-boundaries", "--zc", "0.4", "--from", "0.5", "--to", "0.6", "--points", "11"]);
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 11);
    let r = &rows[8];
    assert!((num(&r["a_z"]) - 0.58).abs() < 1e-12);
    assert!((num(&r["ax_v"]) - 0.641441).abs() < 1e-5);
}

#[test]
fn discord_vs_ax_is_continuous() {
    let v = json(&[
        "sweep", "discord-vs-ax", "--az", "0.58", "--zc", "0.4", "--zi", "0.5", "--from", "0.59", "--to", "0.7",
        "--points", "111",
    ]);
    let d: Vec<f64> = v["rows"].as_array().unwrap().iter().map(|r| num(&r["discord"])).collect();
    assert_eq!(d.len(), 111);
    let jump = d.windows(2).map(|w| (w[1] - w[0]).abs()).fold(0.0, f64::max);
    assert!(jump < 5e-3, "largest step {jump}");
}

#[test]
fn other_sweeps() {
    let v = json(&["sweep", "sa-vs-z", "--ax", "0.6", "--az", "0.58", "--zc", "0.4", "--zi", "0.5", "--points", "9"]);
    assert!(v["rows"].as_array().unwrap().iter().all(|r| r["sa"].is_number()));
    let v = json(&["sweep", "vn-vs-theta", "--x", "0.76,0.6,0.8,0.23,0.3", "--points", "3"]);
    let rows = v["rows"].as_array().unwrap();
    assert!((num(&rows[0]["sa_vn"]) - 0.441344).abs() < 5e-5);
    assert!((num(&rows[2]["sa_vn"]) - 0.441344).abs() < 5e-5);
}

#[test]
fn bad_grids_exit_2() {
    for args in [
        vec!["sweep", "wedge-boundaries", "--zc", "0.4", "--points", "0"],
        vec!["sweep", "wedge-boundaries", "--zc", "0.4", "--points", "1000001"],
        vec!["sweep", "discord-vs-ax", "--az", "0.5", "--zc", "0", "--zi", "0", "--from", "0.7", "--to", "0.1"],
        vec!["sweep", "discord-vs-ax", "--az", "0.5", "--zc", "0"],
        vec!["robustness", "--state", "noon", "--n", "11", "--channel", "atten"],
    ] {
        assert_eq!(qcorr(&args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn robustness_region_r() {
    let v = json(&["robustness", "--state", "noon", "--n", "5", "--channel", "atten", "--points", "50"]);
    assert!(v["rows"].as_array().unwrap().iter().any(|r| r["region_r"] == true));
    assert!(v["notes"].as_array().unwrap().iter().any(|n| n.as_str().unwrap().contains("mu1 = 0.5185")));

    let v = json(&["robustness", "--state", "pnes", "--n", "5", "--channel", "amp", "--points", "50"]);
    assert!(v["rows"].as_array().unwrap().iter().any(|r| r["a_crit"].is_number()
        && r["g_inf"].is_number()
        && num(&r["a_crit"]) > num(&r["g_inf"])));
}

#[test]
fn verify_suites() {
    let v = json(&["verify", "kraus"]);
    assert!(v["rows"].as_array().unwrap().iter().all(|r| r["pass"] == true));
    let v = json(&["verify", "nb-eb", "--samples", "5000", "--seed", "9"]);
    assert_eq!(v["rows"][0]["failures"], 0);
    let v = json(&["verify", "discord-oracle", "--samples", "20"]);
    assert!(num(&v["rows"][0]["worst_error"]) < 1e-4);
}

#[test]
fn deterministic_bytes() {
    let args = ["sweep", "discord-vs-zi", "--ax", "0.65", "--az", "0.58", "--zc", "0.4", "--from", "-0.1", "--to", "0.9", "--points", "200"];
    let a = qcorr(&args);
    let b = qcorr(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let a = qcorr(&["verify", "semigroup", "--seed", "4"]);
    let b = qcorr(&["verify", "semigroup", "--seed", "4"]);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn csv_layout() {
    let out = qcorr(&["sweep", "wedge-boundaries", "--zc", "0.4", "--points", "3", "--precision", "4"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert!(lines[0].starts_with("# qcorr sweep wedge-boundaries"));
    assert_eq!(lines.iter().filter(|l| !l.starts_with('#')).count(), 3);
    assert_eq!(*lines.iter().rev().nth(3).unwrap(), "# a_z,ax_v,ax_h");
    let first = lines.iter().find(|l| !l.starts_with('#')).unwrap();
    assert_eq!(first.split(',').next().unwrap(), "0.0100");
}

#[test]
fn config_file_and_overrides() {
    let cfg = tmp("run.cfg");
    let out_path = tmp("out.json");
    std::fs::write(&cfg, format!("# defaults\nformat = json\nprecision = 3\nout = {}\n", out_path.display())).unwrap();
    let cfg_s = cfg.to_str().unwrap();

    let shown = qcorr(&["--config", cfg_s, "--show-config", "--precision", "5"]);
    assert!(shown.status.success());
    let text = String::from_utf8(shown.stdout).unwrap();
    assert!(text.contains("format = json") && text.contains("precision = 5") && text.contains("seed = "));

    let run = qcorr(&["--config", cfg_s, "sweep", "wedge-boundaries", "--zc", "0.4", "--points", "2"]);
    assert!(run.status.success());
    assert!(run.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    assert_eq!(v["rows"].as_array().unwrap().len(), 2);

    std::fs::write(&cfg, "colour = blue\n").unwrap();
    assert_eq!(qcorr(&["--config", cfg_s, "--show-config"]).status.code(), Some(2));
    let _ = std::fs::remove_file(cfg);
    let _ = std::fs::remove_file(out_path);
}

#[test]
fn defaults_listed() {
    let out = qcorr(&["--show-config"]);
    assert_eq!(String::from_utf8(out.stdout).unwrap(), "format = csv\nprecision = 9\nseed = 20240521\nncut = 32\nout = -\n");
}
