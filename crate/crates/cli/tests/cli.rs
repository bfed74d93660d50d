use std::path::PathBuf;

use xcavity_cli::{parse_sweep, run_with};

fn configs() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn cfg(name: &str) -> String {
    configs().join(name).to_string_lossy().into_owned()
}

fn run(args: &[&str]) -> (i32, String, String) {
    let mut argv = vec!["xcavity".to_string()];
    argv.extend(args.iter().map(|s| s.to_string()));
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = run_with(&argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn footer(text: &str, key: &str) -> f64 {
    let prefix = format!("# {key} = ");
    let line = text.lines().find(|l| l.starts_with(&prefix)).unwrap();
    line[prefix.len()..].parse().unwrap()
}

#[test]
fn unknown_subcommand_prints_usage() {
    let (code, out, err) = run(&["frobnicate"]);
    assert_eq!(code, 1);
    assert!(out.is_empty());
    assert!(err.contains("Usage"));
}

#[test]
fn sweep_grammar() {
    assert_eq!(parse_sweep("2:4:3").unwrap(), vec![2.0, 3.0, 4.0]);
    assert_eq!(parse_sweep("-1:1:2").unwrap(), vec![-1.0, 1.0]);
    assert_eq!(parse_sweep("5:5:1").unwrap(), vec![5.0]);
    for bad in ["2:4", "4:2:3", "2:4:0", "a:4:3", "2:4:3:1"] {
        assert!(parse_sweep(bad).is_err(), "{bad}");
    }
    let (code, _, err) = run(&["params", "--stack", &cfg("thick_top.json"), "--theta-sweep", "3:2:10"]);
    assert_eq!(code, 1);
    assert!(err.contains("sweep"));
}

#[test]
fn params_sweep_has_header_and_rows() {
    let (code, out, _) = run(&["params", "--stack", &cfg("thick_top.json"), "--theta-sweep", "2.0:4.5:2000"]);
    assert_eq!(code, 0);
    let header: String = out.lines().filter(|l| l.starts_with('#')).map(|l| &l[2..]).collect::<Vec<_>>().join("\n");
    let resolved: serde_json::Value = serde_json::from_str(&header).unwrap();
    assert_eq!(resolved["stack"]["layers"][0]["d_nm"], 80.4);
    let rows: Vec<Vec<f64>> = out
        .lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 2000);
    let peak = rows.iter().max_by(|a, b| a[2].total_cmp(&b[2])).unwrap();
    assert!((peak[0] - 2.2126).abs() < 2e-3, "first mode near 2.21 mrad, got {}", peak[0]);
    // Round-trip safe formatting.
    let first = out.lines().find(|l| l.starts_with("2.0")).unwrap();
    assert_eq!(first.split(',').nth(1).unwrap().len(), "-2.3161304681450248e0".len());
}

#[test]
fn spectrum_reports_visibility() {
    let (code, out, _) = run(&["spectrum", "--stack", &cfg("thin_top.json"), "--theta", "2.2125"]);
    assert_eq!(code, 0);
    let v = footer(&out, "visibility");
    assert!((v - 0.5).abs() <= 0.1, "visibility {v}");
    let data = out.lines().filter(|l| !l.starts_with('#')).count();
    assert_eq!(data, 4002);
}

#[test]
fn outputs_are_byte_identical() {
    for args in [
        vec!["params", "--stack", "OPEN_TOP", "--theta-sweep", "1.5:3:101"],
        vec!["optimize", "--config", "DESIGN", "--restarts", "4"],
        vec!["trace", "--config", "TRACE", "--restarts", "2"],
    ] {
        let open_top = cfg("open_top.json");
        let design = cfg("design_max_sr.json");
        let trace = cfg("trace_cls_sr.json");
        let args: Vec<&str> = args
            .iter()
            .map(|&a| match a {
                "OPEN_TOP" => open_top.as_str(),
                "DESIGN" => design.as_str(),
                "TRACE" => trace.as_str(),
                _ => a,
            })
            .collect();
        let a = run(&args);
        let b = run(&args);
        assert_eq!(a.0, 0, "{}", a.2);
        assert_eq!(a.1, b.1);
    }
}

#[test]
fn seed_override_is_recorded() {
    let (code, out, _) = run(&["optimize", "--config", &cfg("design_max_sr.json"), "--restarts", "2", "--seed", "11"]);
    assert_eq!(code, 0);
    assert!(out.contains("\"seed\": 11"));
    assert!(out.contains("\"restarts\": 2"));
}

#[test]
fn trace_and_optimize_reject_each_others_tasks() {
    let (code, _, err) = run(&["trace", "--config", &cfg("design_max_sr.json")]);
    assert_eq!(code, 1);
    assert!(err.contains("trace"));
    let (code, _, _) = run(&["optimize", "--config", &cfg("trace_cls_sr.json")]);
    assert_eq!(code, 1);
}

#[test]
fn unreachable_target_is_a_numerical_failure() {
    let dir = tempfile::tempdir().unwrap();
    let mut v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(cfg("constrained_vis.json")).unwrap()).unwrap();
    v["task"]["target"] = serde_json::json!([0.0, 5000.0]);
    v["restarts"] = serde_json::json!(2);
    let path = dir.path().join("c.json");
    std::fs::write(&path, v.to_string()).unwrap();
    let (code, _, err) = run(&["optimize", "--config", path.to_str().unwrap()]);
    assert_eq!(code, 2, "{err}");
}

#[test]
fn database_directory_and_output_file() {
    let dir = tempfile::tempdir().unwrap();
    let data = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/data");
    let out_path = dir.path().join("rock.csv");
    let (code, out, err) = run(&[
        "rocking",
        "--stack",
        &cfg("thick_top.json"),
        "--db",
        data.to_str().unwrap(),
        "--out",
        out_path.to_str().unwrap(),
        "--theta-sweep",
        "1:5:41",
    ]);
    assert_eq!(code, 0, "{err}");
    assert!(out.is_empty());
    let text = std::fs::read_to_string(&out_path).unwrap();
    assert!(text.starts_with("# {"));
    assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 42);

    let (code, _, err) = run(&["rocking", "--stack", &cfg("thick_top.json"), "--db", dir.path().to_str().unwrap()]);
    assert_eq!(code, 1);
    assert!(err.contains("material database"));
}

#[test]
fn missing_stack_file_is_a_config_error() {
    let (code, _, err) = run(&["poles", "--stack", "/nonexistent/stack.json"]);
    assert_eq!(code, 1);
    assert!(err.contains("cannot read"));
}
