//! End-to-end tests of the binary: exit codes, output determinism, config
//! diagnostics and the experiment listing.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_qudit-rabi")
}

fn run_in(dir: &Path, args: &[&str]) -> Output {
    Command::new(bin())
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

const SMALL_SPECTRUM: &str = r#"
experiment = "spectrum"

[model]
d = 2
omega1 = 0.15
omega2 = 0.1

[sweep]
g-min = 0.0
g-max = 0.1
points = 5
levels = 4
"#;

#[test]
fn list_is_stable_and_has_six_rows() {
    let tmp = tempfile::tempdir().unwrap();
    let a = run_in(tmp.path(), &["list"]);
    let b = run_in(tmp.path(), &["list"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout, "listing must be byte-identical");
    let text = String::from_utf8(a.stdout).unwrap();
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 6);
    for name in [
        "spectrum",
        "ghz-fidelity",
        "negativity-map",
        "quench",
        "adiabatic",
        "splitting-scaling",
    ] {
        assert!(text.contains(name), "listing misses {name}");
    }
    // Every row says what it reproduces.
    for row in rows {
        assert!(row.split_whitespace().count() > 3, "bare row: {row}");
    }
}

#[test]
fn spectrum_run_is_deterministic_and_documented() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "spec.toml", SMALL_SPECTRUM);

    let out1 = run_in(tmp.path(), &["run", cfg.to_str().unwrap(), "--out", "run1"]);
    assert!(
        out1.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out1.stderr)
    );
    let out2 = run_in(tmp.path(), &["run", cfg.to_str().unwrap(), "--out", "run2"]);
    assert!(out2.status.success());
    // Strict mode is a no-op when the truncation rule holds.
    let out3 = run_in(
        tmp.path(),
        &[
            "run",
            cfg.to_str().unwrap(),
            "--out",
            "run3",
            "--strict-truncation",
        ],
    );
    assert!(out3.status.success());

    let csv1 = std::fs::read(tmp.path().join("run1/spectrum.csv")).unwrap();
    let csv2 = std::fs::read(tmp.path().join("run2/spectrum.csv")).unwrap();
    let csv3 = std::fs::read(tmp.path().join("run3/spectrum.csv")).unwrap();
    assert_eq!(csv1, csv2, "CSV output must be byte-identical across runs");
    assert_eq!(csv1, csv3, "strict mode must not change the data");

    let text = String::from_utf8(csv1).unwrap();
    let header = text.lines().next().unwrap();
    assert!(header.starts_with("g1 [omega],g2 [omega],E_exact_0 [omega]"));
    assert!(header.contains("E_weak_0 [omega]"));
    assert!(header.contains("E_strong_minus [omega]"));
    // Header + 5 sweep points.
    assert_eq!(text.lines().count(), 6);
    // Every column of every row carries a unit tag in the header.
    for col in header.split(',') {
        assert!(
            col.contains('[') && col.ends_with(']'),
            "column {col} lacks units"
        );
    }
    // Zero-coupling row: the strong-coupling doublet is undefined there.
    let first_row = text.lines().nth(1).unwrap();
    assert!(first_row.ends_with("NaN,NaN"));

    let meta: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(tmp.path().join("run1/spectrum.meta.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(meta["experiment"], "spectrum");
    assert_eq!(meta["config"]["model"]["d"], 2);
    assert!(meta["wall-time-seconds"].as_f64().unwrap() >= 0.0);
    assert!(
        meta["truncation"]["ground-tail-mass-top5"]
            .as_f64()
            .unwrap()
            < 1e-8
    );
    // The canonical config embedded in the metadata re-parses to the same
    // canonical form (round-trip idempotence).
    let canon = meta["config-canonical-toml"].as_str().unwrap();
    let reparsed: toml::Table = canon.parse().unwrap();
    assert_eq!(reparsed["model"]["omega1"], toml::Value::Float(0.15));
}

#[test]
fn missing_field_exits_2_and_names_it() {
    let tmp = tempfile::tempdir().unwrap();
    let broken = SMALL_SPECTRUM.replace("d = 2\n", "");
    let cfg = write_config(tmp.path(), "broken.toml", &broken);
    let out = run_in(tmp.path(), &["run", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(
        err.contains('d'),
        "diagnostic does not name the field: {err}"
    );
}

#[test]
fn unknown_key_exits_2() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "unknown.toml",
        &format!("{SMALL_SPECTRUM}\n[model.extra]\nx = 1\n"),
    );
    let out = run_in(tmp.path(), &["run", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn inadequate_truncation_exits_3() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "trunc.toml", SMALL_SPECTRUM);
    let out = run_in(
        tmp.path(),
        &["run", cfg.to_str().unwrap(), "--set", "model.n-max=3"],
    );
    assert_eq!(out.status.code(), Some(3));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("truncation") || err.contains("Fock"), "{err}");
}

#[test]
fn overrides_change_the_output() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "spec.toml", SMALL_SPECTRUM);
    let out = run_in(
        tmp.path(),
        &[
            "run",
            cfg.to_str().unwrap(),
            "--set",
            "sweep.points=3",
            "--set",
            "output.stem=alt",
        ],
    );
    assert!(out.status.success());
    let text = std::fs::read_to_string(tmp.path().join("alt.csv")).unwrap();
    assert_eq!(text.lines().count(), 4);
}

#[test]
fn splitting_scaling_reports_the_lifting_order() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "split.toml",
        r#"
experiment = "splitting-scaling"

[model]
d = 2
omega1 = 0.1
omega2 = 0.1

[splitting]
g = 0.4
omega2-values = [0.02, 0.04, 0.08]
"#,
    );
    let out = run_in(tmp.path(), &["run", cfg.to_str().unwrap()]);
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let meta: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(tmp.path().join("splitting-scaling.meta.json")).unwrap(),
    )
    .unwrap();
    let slope = meta["results"]["fitted-slope"].as_f64().unwrap();
    assert!((slope - 1.0).abs() < 0.1, "slope {slope}");
}

#[test]
fn quench_metadata_names_the_photon_peak() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "quench.toml",
        r#"
experiment = "quench"

[model]
d = 2
omega1 = 0.12
omega2 = 0.1
g1 = 0.3
g2 = 0.3

[time]
t-max = 50.0
samples = 1024
"#,
    );
    let out = run_in(tmp.path(), &["run", cfg.to_str().unwrap()]);
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let meta: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(tmp.path().join("quench.meta.json")).unwrap(),
    )
    .unwrap();
    let peak = meta["results"]["dominant-peaks"]["photon_number"]["frequency [omega]"]
        .as_f64()
        .unwrap();
    let bin = meta["results"]["frequency-bin [omega]"].as_f64().unwrap();
    assert!((peak - 1.0).abs() <= bin, "photon peak at {peak}");
    // Closed-form qubit columns are present for g1 = g2.
    let csv = std::fs::read_to_string(tmp.path().join("quench.csv")).unwrap();
    assert!(csv.lines().next().unwrap().contains("sigma_z_analytic"));
}

#[test]
fn shipped_example_configs_run_end_to_end() {
    // Every example config in configs/ must validate and run; the heavy ones
    // are shrunk with overrides so the test stays fast.
    let tmp = tempfile::tempdir().unwrap();
    let configs_dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let shrink: &[(&str, &[&str])] = &[
        ("spectrum_qutrit.toml", &["--set", "sweep.points=3"]),
        (
            "ghz_fidelity_qubit.toml",
            &["--set", "sweep.points=2", "--set", "sweep.g-max=0.3"],
        ),
        (
            "negativity_map_qubit.toml",
            &["--set", "grid.g1-points=2", "--set", "grid.g2-points=2"],
        ),
        (
            "quench_qubit.toml",
            &["--set", "time.samples=128", "--set", "time.t-max=10.0"],
        ),
        (
            "adiabatic_scheme1_qubit.toml",
            &["--set", "ramp.slices=50", "--set", "ramp.t-f=5.0"],
        ),
        (
            "adiabatic_scheme2_qutrit.toml",
            &["--set", "ramp.slices=50", "--set", "ramp.t-f=5.0"],
        ),
        ("splitting_scaling_qutrit.toml", &[]),
    ];
    let mut seen = 0;
    for entry in std::fs::read_dir(&configs_dir).unwrap() {
        let path = entry.unwrap().path();
        if !path.extension().is_some_and(|e| e == "toml") {
            continue;
        }
        seen += 1;
        let name = path.file_name().unwrap().to_str().unwrap().to_string();
        let extra = shrink
            .iter()
            .find(|(n, _)| *n == name)
            .map(|(_, args)| *args)
            .unwrap_or(&[]);
        let mut args = vec!["run", path.to_str().unwrap(), "--out", "out"];
        args.extend_from_slice(extra);
        let out = run_in(tmp.path(), &args);
        assert!(
            out.status.success(),
            "{name} failed: {}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
    assert_eq!(seen, 7, "expected the seven shipped configs");
}

#[test]
fn omega_rescales_on_ingestion() {
    // Doubling omega and every energy-like input must reproduce the
    // omega = 1 CSV byte for byte (all columns are in omega units).
    let tmp = tempfile::tempdir().unwrap();
    let base = write_config(tmp.path(), "base.toml", SMALL_SPECTRUM);
    let scaled_text = SMALL_SPECTRUM
        .replace("omega1 = 0.15", "omega = 2.0\nomega1 = 0.3")
        .replace("omega2 = 0.1", "omega2 = 0.2")
        .replace("g-max = 0.1", "g-max = 0.2");
    let scaled = write_config(tmp.path(), "scaled.toml", &scaled_text);
    let o1 = run_in(tmp.path(), &["run", base.to_str().unwrap(), "--out", "a"]);
    let o2 = run_in(tmp.path(), &["run", scaled.to_str().unwrap(), "--out", "b"]);
    assert!(o1.status.success() && o2.status.success());
    let a = std::fs::read(tmp.path().join("a/spectrum.csv")).unwrap();
    let b = std::fs::read(tmp.path().join("b/spectrum.csv")).unwrap();
    assert_eq!(
        a, b,
        "omega rescaling must leave the omega-unit CSV unchanged"
    );
}
