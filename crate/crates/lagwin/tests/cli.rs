//! End-to-end checks of the `lagwin` binary.

use std::path::Path;
use std::process::{Command, Output};

use lagwin::io::{read_cdf, read_quantile_table};

fn lagwin(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lagwin"))
        .arg("--out")
        .arg(out)
        .args(args)
        .env_remove("LAGWIN_OUT_DIR")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn field(text: &str, key: &str) -> f64 {
    text.lines()
        .find_map(|l| l.strip_prefix(key).map(|v| v.trim().parse().unwrap()))
        .unwrap_or_else(|| panic!("no {key} in\n{text}"))
}

#[test]
fn help_and_bad_flags() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    assert_eq!(lagwin(&out, &["--help"]).status.code(), Some(0));
    assert_eq!(lagwin(&out, &["quantiles", "--help"]).status.code(), Some(0));
    assert_eq!(lagwin(&out, &["quantiles", "--no-such-flag"]).status.code(), Some(2));
    assert_eq!(lagwin(&out, &["frobnicate"]).status.code(), Some(2));
    assert!(!out.exists(), "rejected invocations must not write anything");
}

#[test]
fn quantiles_writes_table_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let o = lagwin(dir.path(), &["--seed", "7", "quantiles", "--kernel", "bartlett", "--draws", "200000"]);
    assert!(o.status.success());
    let t = read_quantile_table(&dir.path().join("quantiles_bartlett.csv")).unwrap();
    assert!(t.is_well_formed());
    assert!((t.critical_value(0.05).unwrap() / 3.796 - 1.0).abs() < 0.03);
    let m = lagwin::manifest::RunManifest::read(&dir.path().join("manifest.json")).unwrap();
    assert_eq!(m.command, "quantiles");
    assert_eq!(m.base_seed, 7);
    assert_eq!(m.outputs, ["quantiles_bartlett.csv", "quantiles_bartlett.json"]);
}

#[test]
fn indefinite_kernel_is_a_numeric_failure() {
    let dir = tempfile::tempdir().unwrap();
    let o = lagwin(dir.path(), &["quantiles", "--kernel", "cubic", "--draws", "100000"]);
    assert_eq!(o.status.code(), Some(4));
    assert!(!dir.path().join("quantiles_cubic.csv").exists());
    assert_eq!(lagwin(dir.path(), &["eigs", "--kernel", "cubic"]).status.code(), Some(4));
}

#[test]
fn estimate_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let constant = dir.path().join("constant.csv");
    std::fs::write(&constant, "h\n".to_string() + &"2.5\n".repeat(50)).unwrap();
    let c = constant.to_str().unwrap();
    assert_eq!(lagwin(dir.path(), &["estimate", "--input", c]).status.code(), Some(4));
    let missing = dir.path().join("missing.csv");
    assert_eq!(lagwin(dir.path(), &["estimate", "--input", missing.to_str().unwrap()]).status.code(), Some(3));
    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "1\n2\nabc\n").unwrap();
    assert_eq!(lagwin(dir.path(), &["estimate", "--input", bad.to_str().unwrap()]).status.code(), Some(3));
    let empty = dir.path().join("empty.csv");
    std::fs::write(&empty, "").unwrap();
    assert_eq!(lagwin(dir.path(), &["estimate", "--input", empty.to_str().unwrap()]).status.code(), Some(3));
    let short = dir.path().join("short.csv");
    std::fs::write(&short, "1\n2\n3\n").unwrap();
    assert_eq!(lagwin(dir.path(), &["estimate", "--input", short.to_str().unwrap()]).status.code(), Some(3));
    assert_eq!(lagwin(dir.path(), &["estimate", "--input", c, "--cn", "npow:2"]).status.code(), Some(2));
    assert_eq!(lagwin(dir.path(), &["estimate", "--input", c, "--cn", "n"]).status.code(), Some(2));
}

#[test]
fn estimate_on_exported_ar1_chain() {
    let dir = tempfile::tempdir().unwrap();
    let o = lagwin(dir.path(), &["chain", "--model", "ar1", "--rho", "0.5", "--n", "65536"]);
    assert!(o.status.success());
    let chain = dir.path().join("chain.csv");
    assert!(dir.path().join("chain.json").exists());
    let o = lagwin(dir.path(), &["estimate", "--input", chain.to_str().unwrap(), "--cn", "npow:0.333"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let g = field(&text, "gamma_sq");
    assert!((g - 3.0).abs() < 0.3, "Γ² = {g}");
    assert!(text.contains("classical"));

    // Fixed-b interval from a persisted table: halfwidth = t·√(Γ²/n).
    assert!(lagwin(dir.path(), &["quantiles", "--levels", "0.025", "--draws", "100000"]).status.success());
    let table = dir.path().join("quantiles_bartlett.csv");
    let o = lagwin(
        dir.path(),
        &["estimate", "--input", chain.to_str().unwrap(), "--cn", "n", "--table", table.to_str().unwrap(), "--json"],
    );
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let t = read_quantile_table(&table).unwrap().critical_value(0.025).unwrap();
    let expected = t * (v["gamma_sq"].as_f64().unwrap() / 65536.0).sqrt();
    assert_eq!(v["method"], "fixedb");
    assert_eq!(v["critical_value"].as_f64().unwrap(), t);
    assert!((v["halfwidth"].as_f64().unwrap() - expected).abs() <= 1e-9);
}

#[test]
fn eigs_quadratic_has_one_eigenvalue() {
    let dir = tempfile::tempdir().unwrap();
    let o = lagwin(dir.path(), &["eigs", "--kernel", "quadratic"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("1 eigenvalues above"), "{text}");
    let first: f64 = text.lines().nth(1).unwrap().split_whitespace().nth(1).unwrap().parse().unwrap();
    assert!((first - 1.0 / 6.0).abs() < 1e-4);
}

#[test]
fn cdf_is_monotone() {
    let dir = tempfile::tempdir().unwrap();
    assert!(lagwin(dir.path(), &["cdf", "--kernel", "bartlett", "--draws", "50000"]).status.success());
    let rows = read_cdf(&dir.path().join("cdf_bartlett.csv")).unwrap();
    assert_eq!(rows.len(), 401);
    assert!(rows.windows(2).all(|w| w[0].x < w[1].x && w[0].cdf <= w[1].cdf));
    assert!(rows[0].cdf < 0.01 && rows[400].cdf > 0.99);
}

#[test]
fn toy_command_reports_clusters() {
    let dir = tempfile::tempdir().unwrap();
    let o = lagwin(
        dir.path(),
        &["toy", "--seeds", "20", "--target-rate", "0.30", "--n-total", "300000", "--burn-in", "30000", "--tolerance", "0.1"],
    );
    assert!(o.status.success());
    let mut rdr = csv::Reader::from_path(dir.path().join("toy_clusters.csv")).unwrap();
    assert!(rdr.records().count() >= 2);
    for f in ["toy_runs.csv", "toy_traces.csv", "manifest.json"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
}

#[test]
fn coverage_persists_and_reuses_tables() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["coverage", "--model", "iid", "--n", "500", "--burn-in", "0", "--reps", "30", "--table-draws", "100000"];
    assert!(lagwin(dir.path(), &args).status.success());
    let first = std::fs::read(dir.path().join("coverage.csv")).unwrap();
    let header = String::from_utf8_lossy(&first).lines().next().unwrap().to_string();
    assert_eq!(
        header,
        "model,method,kernel,delta,K,n,burnin,coverage,coverage_se,mean_halfwidth,halfwidth_se,miss_flags"
    );
    let b = dir.path().join("quantiles_bartlett.csv");
    let q = dir.path().join("quantiles_quadratic.csv");
    assert!(b.exists() && q.exists());

    let other = dir.path().join("again");
    let tables = format!("{},{}", b.display(), q.display());
    let mut with_tables = args.to_vec();
    with_tables.extend(["--tables", &tables]);
    assert!(lagwin(&other, &with_tables).status.success());
    assert_eq!(std::fs::read(other.join("coverage.csv")).unwrap(), first);
    assert!(!other.join("quantiles_bartlett.csv").exists());
}

#[test]
fn rate_csv_columns() {
    let dir = tempfile::tempdir().unwrap();
    let o = lagwin(dir.path(), &["rate", "--n-grid", "64,128,256,512", "--reference-draws", "5000"]);
    assert!(o.status.success());
    let text = std::fs::read_to_string(dir.path().join("rate.csv")).unwrap();
    assert_eq!(text.lines().next().unwrap(), "rho,n,rule,R,rmse,slope_rule,wasserstein");
    assert_eq!(text.lines().count(), 13);
    assert_eq!(lagwin(dir.path(), &["rate", "--n-grid", "64,128,256"]).status.code(), Some(2));
    assert_eq!(lagwin(dir.path(), &["rate", "--reps", "10"]).status.code(), Some(2));
}

#[test]
fn out_dir_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_lagwin"))
        .args(["eigs", "--kernel", "bartlett", "--grid", "100"])
        .env("LAGWIN_OUT_DIR", dir.path())
        .output()
        .unwrap();
    assert!(o.status.success());
    assert!(dir.path().join("eigs_bartlett.csv").exists());
    assert!(dir.path().join("manifest.json").exists());
}
