use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use otgi::mesh::save_obj;
use otgi::shapes;

fn otgi(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_otgi"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = otgi(dir, args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn error_line(out: &Output) -> serde_json::Value {
    let text = String::from_utf8_lossy(&out.stderr);
    let line = text.lines().last().expect("an error line");
    serde_json::from_str(line).expect("error line is json")
}

/// param, rasterize, mipmap, extract and eval on a small cap.
fn pipeline(dir: &Path, res: &str) -> String {
    save_obj(&shapes::hemisphere_cap(6), dir.join("cap.obj")).unwrap();
    ok(dir, &["param", "cap.obj", "-o", "cap.uv", "--scheme", "ot", "--ot-log", "ot.csv"]);
    ok(dir, &["rasterize", "cap.obj", "cap.uv", "-o", "gi.png", "--res", res]);
    ok(dir, &["mipmap", "gi.png"]);
    ok(dir, &["extract", "gi_l0.png", "-o", "back.obj"]);
    ok(dir, &["eval", "cap.obj", "back.obj", "--samples", "2000", "-o", "metrics.json"])
}

#[test]
fn happy_path() {
    let dir = tempfile::tempdir().unwrap();
    let stdout = pipeline(dir.path(), "64");
    let metrics: serde_json::Value = serde_json::from_str(&stdout).unwrap();
    assert!(metrics["chamfer"].as_f64().unwrap() < 1e-3);
    assert!(metrics["hausdorff"].as_f64().unwrap() > 0.0);
    assert_eq!(metrics["seed"], 42);
    for name in ["gi.png", "gi.normal.png", "gi.meta.json", "gi_l6.png", "gi_l6.meta.json", "ot.csv"] {
        assert!(dir.path().join(name).exists(), "{name}");
    }
    let csv = fs::read_to_string(dir.path().join("ot.csv")).unwrap();
    assert!(csv.starts_with("iteration,energy,grad_inf_norm,lambda,empty_cells"));
}

#[test]
fn runs_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    assert_eq!(pipeline(a.path(), "32"), pipeline(b.path(), "32"));
    for name in ["cap.uv", "gi.png", "gi.normal.png", "gi.meta.json", "gi_l2.png", "back.obj", "metrics.json"] {
        assert_eq!(
            fs::read(a.path().join(name)).unwrap(),
            fs::read(b.path().join(name)).unwrap(),
            "{name}"
        );
    }
}

#[test]
fn report_ratios_are_powers_of_four() {
    let dir = tempfile::tempdir().unwrap();
    pipeline(dir.path(), "16");
    let levels: Vec<String> = (0..5).map(|l| format!("gi_l{l}.png")).collect();
    let mut args = vec!["report", "cap.obj"];
    args.extend(levels.iter().map(String::as_str));
    args.extend(["--samples", "1000", "--json", "rows.json"]);
    let table = ok(dir.path(), &args);
    assert_eq!(table.lines().count(), 6);
    let rows: serde_json::Value = serde_json::from_slice(&fs::read(dir.path().join("rows.json")).unwrap()).unwrap();
    for (l, row) in rows.as_array().unwrap().iter().enumerate() {
        assert_eq!(row["level"], l);
        assert_eq!(row["compression_ratio"].as_f64().unwrap(), 4f64.powi(l as i32));
    }
    // the 1x1 level has no surface to sample
    assert!(rows[4]["chamfer"].is_null());
}

#[test]
fn extract_rejects_non_power_of_two() {
    let dir = tempfile::tempdir().unwrap();
    let mut png_bytes = Vec::new();
    {
        let mut enc = png::Encoder::new(&mut png_bytes, 12, 12);
        enc.set_color(png::ColorType::Rgb);
        enc.set_depth(png::BitDepth::Sixteen);
        let mut w = enc.write_header().unwrap();
        w.write_image_data(&[0u8; 12 * 12 * 6]).unwrap();
    }
    fs::write(dir.path().join("odd.png"), png_bytes).unwrap();
    fs::write(
        dir.path().join("odd.meta.json"),
        r#"{"bbox_min":[0,0,0],"bbox_max":[1,1,1],"resolution":12,"level":0,"source":"odd"}"#,
    )
    .unwrap();
    let out = otgi(dir.path(), &["extract", "odd.png", "-o", "odd.obj"]);
    assert_eq!(out.status.code(), Some(3));
    let err = error_line(&out);
    assert_eq!(err["error"], "data");
    assert!(err["message"].as_str().unwrap().contains("power of two"));
}

#[test]
fn usage_and_data_errors() {
    let dir = tempfile::tempdir().unwrap();
    let out = otgi(dir.path(), &["extract", "x.png", "--bogus"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(error_line(&out)["error"], "usage");

    let out = otgi(dir.path(), &["param", "missing.obj", "-o", "m.uv"]);
    assert_eq!(out.status.code(), Some(3));

    let out = otgi(dir.path(), &["param", "a.obj", "-o", "m.uv", "--scheme", "bogus"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn closed_input_needs_a_mesh_path() {
    let dir = tempfile::tempdir().unwrap();
    save_obj(&shapes::icosphere(1), dir.path().join("ball.obj")).unwrap();
    let out = otgi(dir.path(), &["param", "ball.obj", "-o", "ball.uv", "--scheme", "uniform"]);
    assert_eq!(out.status.code(), Some(3));
    ok(
        dir.path(),
        &["param", "ball.obj", "-o", "ball.uv", "--scheme", "uniform", "--mesh-out", "disk.obj"],
    );
    ok(dir.path(), &["rasterize", "disk.obj", "ball.uv", "-o", "ball.png", "--res", "16"]);
}
