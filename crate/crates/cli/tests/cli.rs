//! End-to-end tests of the qaoatherm binary: output contracts, determinism,
//! exit codes, figure data, and conformance to docs/output_schema.json.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const SCHEMA: &str = include_str!("../../../docs/output_schema.json");

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_qaoatherm"))
}

fn run_ok(args: &[&str]) -> Output {
    let output = bin().args(args).output().expect("binary runs");
    assert!(
        output.status.success(),
        "command {:?} failed: {}",
        args,
        String::from_utf8_lossy(&output.stderr)
    );
    output
}

fn exit_code(args: &[&str]) -> (i32, String) {
    let output = bin().args(args).output().expect("binary runs");
    (output.status.code().expect("exit code"), String::from_utf8_lossy(&output.stderr).into())
}

fn write_config(dir: &Path, body: &str) -> PathBuf {
    let path = dir.join("config.json");
    std::fs::write(&path, body).unwrap();
    path
}

fn dir_entries(dir: &Path) -> Vec<String> {
    let mut names: Vec<String> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    names
}

fn csv_header(path: &Path) -> Vec<String> {
    let text = std::fs::read_to_string(path).unwrap();
    text.lines().next().unwrap().split(',').map(str::to_string).collect()
}

fn csv_rows(path: &Path) -> Vec<BTreeMap<String, String>> {
    let mut reader = csv::Reader::from_path(path).unwrap();
    let header = reader.headers().unwrap().clone();
    reader
        .records()
        .map(|r| {
            let r = r.unwrap();
            header.iter().map(str::to_string).zip(r.iter().map(str::to_string)).collect()
        })
        .collect()
}

fn json_file(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn key_set(value: &serde_json::Value) -> BTreeSet<String> {
    value.as_object().expect("json object").keys().cloned().collect()
}

fn schema_keys(schema: &serde_json::Value, pointer: &str) -> BTreeSet<String> {
    schema
        .pointer(pointer)
        .unwrap_or_else(|| panic!("schema pointer {pointer}"))
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_str().unwrap().to_string())
        .collect()
}

#[test]
fn simulate_writes_records_plus_one_aggregate() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let cfg = write_config(
        tmp.path(),
        r#"{
            "family": "qubo", "n": 8, "instance_count": 2, "seed": 5,
            "angle_policy": {"explicit": [{"gamma": -0.15, "theta": 0.5}]},
            "analyses": ["simulate"]
        }"#,
    );
    run_ok(&["simulate", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(
        dir_entries(&out),
        vec!["aggregate_simulate.csv", "record_0000.json", "record_0001.json"]
    );
    let rows = csv_rows(&out.join("aggregate_simulate.csv"));
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0]["gamma"], "-0.15");
}

#[test]
fn reruns_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let cfg = write_config(
        tmp.path(),
        r#"{
            "family": "maxcut", "n": 7, "instance_count": 2, "seed": 9,
            "angle_policy": {"explicit": [{"gamma": -0.2, "theta": 0.55}]},
            "analyses": ["simulate", "thermal"]
        }"#,
    );
    let args = ["thermal", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()];
    run_ok(&args);
    let before: BTreeMap<String, Vec<u8>> = dir_entries(&out)
        .into_iter()
        .map(|name| {
            let bytes = std::fs::read(out.join(&name)).unwrap();
            (name, bytes)
        })
        .collect();
    run_ok(&args);
    for (name, bytes) in &before {
        assert_eq!(&std::fs::read(out.join(name)).unwrap(), bytes, "{name} changed on rerun");
    }
}

#[test]
fn config_errors_exit_2_with_the_field_name() {
    let (code, stderr) = exit_code(&["simulate", "--family", "two_level", "--density", "0.5", "--out", "unused"]);
    assert_eq!(code, 2, "{stderr}");
    assert!(stderr.contains("density"), "{stderr}");

    let (code, stderr) = exit_code(&["simulate", "--family", "qubo", "--n", "8", "--out", "unused"]);
    assert_eq!(code, 2);
    assert!(stderr.contains("seed"), "{stderr}");
}

#[test]
fn size_limit_exits_3() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let (code, stderr) = exit_code(&[
        "generate", "--family", "qubo", "--n", "30", "--seed", "1", "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 3, "{stderr}");
    assert!(stderr.contains("24"), "{stderr}");
}

#[test]
fn generate_writes_instances_only() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    run_ok(&[
        "generate", "--family", "maxcut", "--n", "6", "--seed", "3", "--instances", "3",
        "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(
        dir_entries(&out),
        vec!["instance_0000.json", "instance_0001.json", "instance_0002.json"]
    );
    let instance = json_file(&out.join("instance_0001.json"));
    assert_eq!(instance["n"], 6);
    assert_eq!(instance["couplings"].as_array().unwrap().len(), 36);
    assert!(instance["fields"].as_array().unwrap().iter().all(|h| h == 0.0));
}

#[test]
fn mcmc_implies_thermal_and_fills_both_blocks() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let cfg = write_config(
        tmp.path(),
        r#"{
            "family": "qubo", "n": 6, "seed": 9,
            "angle_policy": {"explicit": [{"gamma": -0.3, "theta": 0.6}]}
        }"#,
    );
    run_ok(&["mcmc", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    let record = json_file(&out.join("record_0000.json"));
    assert!(!record["thermal"].is_null());
    assert!(!record["mcmc"].is_null());
    assert_eq!(record["mcmc"]["beta"], record["thermal"][0]["fit"]["beta"]);
    let entries = dir_entries(&out);
    assert!(entries.contains(&"aggregate_thermal.csv".to_string()));
    assert!(entries.contains(&"aggregate_mcmc.csv".to_string()));
}

#[test]
fn fig2_grid_contains_the_amplification_peak() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    run_ok(&["figure", "--kind", "fig2", "--family", "two_level", "--out", out.to_str().unwrap()]);
    let rows = csv_rows(&out.join("figure_fig2.csv"));
    assert_eq!(rows.len(), 41 * 41);
    let quarter_pi = std::f64::consts::FRAC_PI_4;
    let half_pi = std::f64::consts::FRAC_PI_2;
    let peak = rows
        .iter()
        .find(|r| {
            (r["theta"].parse::<f64>().unwrap() - quarter_pi).abs() < 1e-9
                && (r["gamma"].parse::<f64>().unwrap() - half_pi).abs() < 1e-9
        })
        .expect("grid contains (pi/4, pi/2)");
    let p_excited: f64 = peak["p_excited"].parse().unwrap();
    assert!((p_excited - 1.0).abs() < 1e-12, "p_excited = {p_excited}");
}

#[test]
fn fig5_zero_gamma_rows_are_uniform() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    run_ok(&[
        "figure", "--kind", "fig5", "--family", "qubo", "--n", "6", "--seed", "3",
        "--out", out.to_str().unwrap(),
    ]);
    let rows = csv_rows(&out.join("figure_fig5.csv"));
    assert_eq!(rows.len(), 6 * 64);
    let zero: Vec<f64> = rows
        .iter()
        .filter(|r| r["gamma"] == "0")
        .map(|r| r["prob"].parse().unwrap())
        .collect();
    assert_eq!(zero.len(), 64);
    assert!(zero.iter().all(|p| (p - 1.0 / 64.0).abs() < 1e-12));
}

#[test]
fn fig4_emits_quantile_count_rows_per_instance() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    run_ok(&[
        "figure", "--kind", "fig4", "--family", "qubo", "--n", "6", "--seed", "4",
        "--instances", "2", "--out", out.to_str().unwrap(),
    ]);
    let rows = csv_rows(&out.join("figure_fig4.csv"));
    let mut per_instance = BTreeMap::new();
    for row in &rows {
        *per_instance.entry(row["instance"].clone()).or_insert(0usize) += 1;
    }
    assert_eq!(per_instance.len(), 2);
    assert!(per_instance.values().all(|&count| count == 500));
    assert!(rows.iter().all(|r| r["within_band"] == "true" || r["within_band"] == "false"));
}

#[test]
fn figure_kind_config_mismatch_exits_2() {
    let (code, stderr) =
        exit_code(&["figure", "--kind", "fig2", "--family", "qubo", "--n", "6", "--seed", "1", "--out", "unused"]);
    assert_eq!(code, 2, "{stderr}");
    assert!(stderr.contains("two_level"), "{stderr}");
}

/// Every emitted file conforms to the shipped schema: CSV headers match
/// exactly, JSON key sets match exactly (modulo documented optional keys).
#[test]
fn outputs_match_the_shipped_schema() {
    let schema: serde_json::Value = serde_json::from_str(SCHEMA).unwrap();
    let tmp = tempfile::tempdir().unwrap();

    // One run covering all analyses on a degenerate family (so mixture and
    // hierarchy paths engage), one optimize run, one generate run.
    let all = tmp.path().join("all");
    let cfg = write_config(
        tmp.path(),
        r#"{
            "family": "maxcut", "n": 6, "instance_count": 1, "seed": 11,
            "angle_policy": {"explicit": [{"gamma": -0.2, "theta": 0.55}]},
            "analyses": ["simulate", "structure", "normality", "mixture", "thermal", "scan"]
        }"#,
    );
    run_ok(&["mcmc", "--config", cfg.to_str().unwrap(), "--out", all.to_str().unwrap()]);
    let opt = tmp.path().join("opt");
    run_ok(&["optimize", "--family", "qubo", "--n", "6", "--seed", "2", "--out", opt.to_str().unwrap()]);
    run_ok(&["generate", "--family", "qubo", "--n", "6", "--seed", "2", "--out", opt.to_str().unwrap()]);
    let figs = tmp.path().join("figs");
    for (kind, family) in
        [("fig2", "two_level"), ("fig3", "maxcut"), ("fig4", "qubo"), ("fig5", "qubo"), ("fig6", "maxcut")]
    {
        let mut args = vec!["figure", "--kind", kind, "--family", family, "--out", figs.to_str().unwrap()];
        if family != "two_level" {
            args.extend(["--n", "6", "--seed", "8"]);
        }
        run_ok(&args);
    }

    // CSV headers.
    for (dir, names) in [
        (&all, vec!["simulate", "structure", "normality", "mixture", "thermal", "scan", "mcmc"]),
        (&opt, vec!["optimize"]),
    ] {
        for name in names {
            let file = format!("aggregate_{name}.csv");
            let expected = schema_keys(&schema, &format!("/csv/{file}"));
            let header: BTreeSet<String> = csv_header(&dir.join(&file)).into_iter().collect();
            assert_eq!(header, expected, "{file}");
            // Column order matters too; schema lists them in order.
            let ordered: Vec<String> = schema
                .pointer(&format!("/csv/{file}"))
                .unwrap()
                .as_array()
                .unwrap()
                .iter()
                .map(|v| v.as_str().unwrap().to_string())
                .collect();
            assert_eq!(csv_header(&dir.join(&file)), ordered, "{file} column order");
        }
    }
    for kind in ["fig2", "fig3", "fig4", "fig5", "fig6"] {
        let file = format!("figure_{kind}.csv");
        let ordered: Vec<String> = schema
            .pointer(&format!("/csv/{file}"))
            .unwrap()
            .as_array()
            .unwrap()
            .iter()
            .map(|v| v.as_str().unwrap().to_string())
            .collect();
        assert_eq!(csv_header(&figs.join(&file)), ordered, "{file}");
    }

    // Record key sets, top level and nested blocks.
    let record = json_file(&all.join("record_0000.json"));
    assert_eq!(key_set(&record), schema_keys(&schema, "/json/record_NNNN.json/keys"));
    let blocks = "/json/record_NNNN.json/blocks";
    let checks: Vec<(&str, &serde_json::Value)> = vec![
        ("config", &record["config"]),
        ("instance", &record["instance"]),
        ("angles[]", &record["angles"][0]),
        ("simulate[]", &record["simulate"][0]),
        ("structure", &record["structure"]),
        ("structure.references[]", &record["structure"]["references"][0]),
        ("structure.slope", &record["structure"]["slope"]),
        ("mixture[]", &record["mixture"][0]),
        ("mixture[].fit", &record["mixture"][0]["fit"]),
        ("mixture[].fit.components[]", &record["mixture"][0]["fit"]["components"][0]),
        ("normality[]", &record["normality"][0]),
        ("thermal[]", &record["thermal"][0]),
        ("thermal[].fit", &record["thermal"][0]["fit"]),
        ("scan", &record["scan"]),
        ("scan.points[]", &record["scan"]["points"][0]),
        ("scan.gamma_c", &record["scan"]["gamma_c"]),
        ("mcmc", &record["mcmc"]),
        ("mcmc.mixing", &record["mcmc"]["mixing"]),
        ("thresholds", &record["thresholds"]),
    ];
    for (pointer, value) in checks {
        assert_eq!(
            key_set(value),
            schema_keys(&schema, &format!("{blocks}/{pointer}")),
            "record block {pointer}"
        );
    }
    let opt_record = json_file(&opt.join("record_0000.json"));
    assert_eq!(
        key_set(&opt_record["optimization"]),
        schema_keys(&schema, &format!("{blocks}/optimization")),
        "optimization block"
    );

    // Instance files.
    let instance = json_file(&opt.join("instance_0000.json"));
    assert_eq!(key_set(&instance), schema_keys(&schema, "/json/instance_NNNN.json/keys"));
    assert_eq!(
        key_set(&instance["generator"]),
        schema_keys(&schema, "/json/instance_NNNN.json/blocks/generator")
    );

    // Figure metadata and the fig3 sidecar.
    for kind in ["fig2", "fig3", "fig4", "fig5", "fig6"] {
        let meta = json_file(&figs.join(format!("figure_{kind}_meta.json")));
        assert_eq!(
            key_set(&meta),
            schema_keys(&schema, "/json/figure_KIND_meta.json/keys"),
            "{kind} metadata"
        );
    }
    let sidecar = json_file(&figs.join("figure_fig3_ellipses.json"));
    assert_eq!(key_set(&sidecar), schema_keys(&schema, "/json/figure_fig3_ellipses.json/keys"));
    assert_eq!(
        key_set(&sidecar["ellipses"][0]),
        schema_keys(&schema, "/json/figure_fig3_ellipses.json/blocks/ellipses[]"),
    );
}
