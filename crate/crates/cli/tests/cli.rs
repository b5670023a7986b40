use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn gbc(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_gbc"));
    cmd.args(args);
    for (k, _) in std::env::vars().filter(|(k, _)| k.starts_with("GBC_")) {
        cmd.env_remove(k);
    }
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("gbc runs")
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("bad JSON ({e}): {}\n{}", String::from_utf8_lossy(&out.stdout), String::from_utf8_lossy(&out.stderr))
    })
}

fn fixture(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name).to_string_lossy().into_owned()
}

fn circle(x: f64) -> f64 {
    let d = x.rem_euclid(1.0);
    d.min(1.0 - d)
}

#[test]
fn gbc_form_for_the_charge_two_monopole() {
    let out = gbc(&["--suite", "gbc_form", "--charge", "2", "--quad-order", "24"], &[]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = report(&out);
    assert_eq!(r["schema"], "gbc-report/1");
    assert_eq!(r["suite"], "gbc_form");
    assert!(r["max_residual"].as_f64().unwrap() < 1e-5);
    let points: u64 = r["cases"].as_array().unwrap().iter().map(|c| c["points"].as_u64().unwrap()).sum();
    assert!(points >= 100);
}

#[test]
fn gbc_character_on_a_flat_bundle_has_vanishing_terms() {
    let out = gbc(&["--suite", "gbc_character", "--bundle", "trivial"], &[]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    let identity: Vec<&Value> = r["cases"].as_array().unwrap().iter().filter(|c| c.get("rhs").is_some()).collect();
    assert!(identity.len() >= 2);
    for case in identity {
        for key in ["lhs1", "lhs2", "rhs"] {
            assert!(circle(case[key].as_f64().unwrap()) < 1e-7, "{case}");
        }
    }
}

#[test]
fn unattainable_tolerance_fails_with_residuals() {
    let out = gbc(&["--suite", "gbc_form", "--tol-form", "1e-30"], &[]);
    assert_eq!(out.status.code(), Some(1));
    let r = report(&out);
    assert_eq!(r["pass"], false);
    for case in r["cases"].as_array().unwrap() {
        assert!(case["residual"].as_f64().unwrap() > 0.0);
        assert_eq!(case["pass"], false);
    }
    assert!(String::from_utf8_lossy(&out.stderr).contains("FAIL"));
}

#[test]
fn parse_failures_exit_with_status_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "[bundle]\nbuiltin = \"monopole\"\nthis is not toml").unwrap();
    let unknown = dir.path().join("unknown.toml");
    std::fs::write(&unknown, "[bundle]\nbuiltin = \"moebius\"").unwrap();
    let expr = dir.path().join("expr.toml");
    std::fs::write(
        &expr,
        "[bundle]\nbase = \"s2\"\nrank = 2\n[[bundle.charts]]\nchart = \"north\"\nomega = { \"1,2\" = [\"0\", \"cos(\"] }",
    )
    .unwrap();
    for path in [&bad, &unknown, &expr] {
        let out = gbc(&["--suite", "gbc_form", "--bundle", path.to_str().unwrap()], &[]);
        assert_eq!(out.status.code(), Some(2), "{}", path.display());
    }
    let missing = dir.path().join("missing.toml");
    let out = gbc(&["--suite", "gbc_form", "--bundle", missing.to_str().unwrap()], &[]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(gbc(&["--suite", "gbc_form", "--bundle", "moebius"], &[]).status.code(), Some(2));
    assert_eq!(gbc(&["--suite", "gbc_form", "--quad-order", "2"], &[]).status.code(), Some(2));
    assert_eq!(gbc(&["--suite", "gbc_form", "--tol-mod", "0"], &[]).status.code(), Some(2));
    assert_eq!(gbc(&["--suite", "nonsense"], &[]).status.code(), Some(2));
}

#[test]
fn flags_override_environment_which_overrides_defaults() {
    let args = ["--suite", "chern_weil_forms", "--samples", "8"];
    let default = report(&gbc(&args, &[]));
    assert_eq!(default["config"]["quad_order"], 32);
    let env = report(&gbc(&args, &[("GBC_QUAD_ORDER", "20"), ("GBC_CHARGE", "3")]));
    assert_eq!(env["config"]["quad_order"], 20);
    assert_eq!(env["config"]["charge"], 3);
    let mut with_flag = args.to_vec();
    with_flag.extend(["--quad-order", "24"]);
    let both = report(&gbc(&with_flag, &[("GBC_QUAD_ORDER", "20")]));
    assert_eq!(both["config"]["quad_order"], 24);
    let suite_from_env = gbc(&["--samples", "8"], &[("GBC_SUITE", "algebra")]);
    assert_eq!(report(&suite_from_env)["suite"], "algebra");
}

#[test]
fn reports_are_deterministic_across_runs_and_pool_sizes() {
    let strip = |mut v: Value| {
        v.as_object_mut().unwrap().remove("seconds");
        v["config"].as_object_mut().unwrap().remove("jobs");
        v
    };
    let a = strip(report(&gbc(&["--suite", "gbc_character", "--jobs", "1"], &[])));
    let b = strip(report(&gbc(&["--suite", "gbc_character", "--jobs", "4"], &[])));
    let c = strip(report(&gbc(&["--suite", "gbc_character"], &[])));
    assert_eq!(a, b);
    assert_eq!(a, c);
    let csv = |_| gbc(&["--suite", "convergence", "--orders", "16,32"], &[]).stdout;
    assert_eq!(csv(0), csv(1));
}

#[test]
fn flat_convergence_table() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("table.csv");
    let out = gbc(
        &["--suite", "convergence", "--bundle", "trivial", "--orders", "8,16,32", "--out", path.to_str().unwrap()],
        &[],
    );
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let mut rows = csv::Reader::from_path(&path).unwrap();
    let mut orders = Vec::new();
    for row in rows.records() {
        let row = row.unwrap();
        orders.push(row[0].parse::<usize>().unwrap());
        assert!(row[1].parse::<f64>().unwrap() < 1e-12);
    }
    assert_eq!(orders, vec![8, 16, 32]);
}

#[test]
fn fixtures_drive_the_suites() {
    for (suite, name) in [
        ("gbc_character", "monopole2.toml"),
        ("gbc_character", "flat_torus.toml"),
        ("gbc_character", "custom_monopole.toml"),
        ("gbc_form", "custom_monopole.toml"),
        ("ak_pairs", "pairs.toml"),
    ] {
        let out = gbc(&["--suite", suite, "--bundle", &fixture(name)], &[]);
        assert_eq!(out.status.code(), Some(0), "{suite} {name}: {}", String::from_utf8_lossy(&out.stderr));
    }
    let r = report(&gbc(&["--suite", "gbc_character", "--bundle", &fixture("monopole2.toml")], &[]));
    let ids: Vec<&str> = r["cases"].as_array().unwrap().iter().map(|c| c["id"].as_str().unwrap()).collect();
    assert!(ids.contains(&"lifted_by_frame"));
    assert!(ids.iter().filter(|i| i.starts_with("well_defined")).count() == 3);
    // a section taken from another fixture file
    let out = gbc(
        &["--suite", "gbc_form", "--bundle", "monopole", "--charge", "2", "--section", &fixture("monopole2.toml")],
        &[],
    );
    assert_eq!(out.status.code(), Some(0));
    assert!(report(&out)["cases"][0]["section"].as_str().unwrap().starts_with("monopole-poly"));
}

#[test]
fn negative_control_and_report_rounding() {
    let out = gbc(&["--suite", "ak_pairs", "--charge", "1"], &[]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    let control = r["cases"].as_array().unwrap().iter().find(|c| c["id"] == "dirac(1)/scaled_control").unwrap();
    assert!(control["residual"].as_f64().unwrap() > 0.1);
    let text = String::from_utf8_lossy(&out.stdout);
    for token in text.split(|c: char| !(c.is_ascii_digit() || c == '.' || c == 'e' || c == '-')) {
        let mantissa = token.split('e').next().unwrap_or_default();
        let digits = mantissa.trim_start_matches(['-', '0', '.']).chars().filter(|c| c.is_ascii_digit()).count();
        assert!(digits <= 12, "{token}");
    }
}
