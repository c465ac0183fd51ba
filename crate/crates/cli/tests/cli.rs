use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use relgw::arith::int;
use relgw::engine::{table, InvariantTable};
use relgw::io::{read_cache, write_cache};
use relgw::pair::{builtin_conic, builtin_line};

fn relgw(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_relgw"))
        .args(args)
        .env_remove("RELGW_CACHE_DIR")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

#[test]
fn compute_line_csv() {
    let o = relgw(&["compute", "--pair", "line", "--max-degree", "3", "--format", "csv"]);
    assert!(o.status.success());
    let out = stdout(&o);
    let rows: Vec<Vec<&str>> = out.lines().skip(2).map(|l| l.split(',').collect()).collect();
    let dnn: Vec<(&str, &str, &str)> = rows.iter().map(|r| (r[0], r[1], r[2])).collect();
    assert_eq!(dnn, vec![("1", "1", "1"), ("2", "1", "2"), ("3", "7", "21")]);
}

#[test]
fn compute_conic_json() {
    let o = relgw(&["compute", "--pair", "conic", "--max-degree", "2", "--format", "json"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let nbar: Vec<&str> = v["rows"].as_array().unwrap().iter().map(|r| r["nbar"].as_str().unwrap()).collect();
    assert_eq!(nbar, vec!["1", "1"]);
}

#[test]
fn bad_arguments_exit_1() {
    assert_eq!(relgw(&["compute", "--pair", "line", "--max-degree", "0"]).status.code(), Some(1));
    assert_eq!(relgw(&["compute", "--pair", "line"]).status.code(), Some(1));
    assert_eq!(relgw(&["compute", "--pair", "plane", "--max-degree", "2"]).status.code(), Some(1));
    assert_eq!(relgw(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(relgw(&["--help"]).status.code(), Some(0));
}

#[test]
fn output_is_deterministic_apart_from_header() {
    let args = ["compute", "--pair", "conic", "--max-degree", "12"];
    let a = stdout(&relgw(&args));
    let b = stdout(&relgw(&args));
    let strip = |s: &str| s.lines().skip(1).collect::<Vec<_>>().join("\n");
    assert_eq!(strip(&a), strip(&b));
    assert!(a.lines().next().unwrap().starts_with("# pair=conic"));

    let json_args = ["compute", "--pair", "line", "--max-degree", "8", "--format", "json"];
    let strip_time = |s: String| s.lines().filter(|l| !l.contains("wall_time_ms")).collect::<Vec<_>>().join("\n");
    assert_eq!(strip_time(stdout(&relgw(&json_args))), strip_time(stdout(&relgw(&json_args))));
}

#[test]
fn csv_and_json_values_match() {
    let csv = stdout(&relgw(&["compute", "--pair", "line", "--max-degree", "15"]));
    let json = stdout(&relgw(&["compute", "--pair", "line", "--max-degree", "15", "--format", "json"]));
    let v: serde_json::Value = serde_json::from_str(&json).unwrap();
    for (line, row) in csv.lines().skip(2).zip(v["rows"].as_array().unwrap()) {
        let cols: Vec<&str> = line.split(',').collect();
        assert_eq!(cols[1], row["nbar"].as_str().unwrap());
        assert_eq!(cols[2], row["n"].as_str().unwrap());
        assert_eq!(cols[3], row["points_fixed"].to_string());
        assert_eq!(cols[4], row["points_unfixed"].to_string());
    }
}

#[test]
fn decimal_column_is_labelled() {
    let out = stdout(&relgw(&["compute", "--pair", "line", "--max-degree", "3", "--decimal"]));
    assert!(out.lines().nth(1).unwrap().ends_with(",nbar_approx_non_authoritative"));
    assert!(out.lines().nth(4).unwrap().starts_with("3,7,21,5,6,7e0"));
}

#[test]
fn h_multiple_gives_same_table() {
    let plain = stdout(&relgw(&["compute", "--pair", "conic", "--max-degree", "9"]));
    let scaled = stdout(&relgw(&["compute", "--pair", "conic", "--max-degree", "9", "--h-multiple", "3"]));
    assert_eq!(plain.lines().skip(1).collect::<Vec<_>>(), scaled.lines().skip(1).collect::<Vec<_>>());
}

#[test]
fn verify_builtins_pass() {
    for pair in ["line", "conic"] {
        let o = relgw(&["verify", "--pair", pair, "--max-degree", "10", "--order", "20"]);
        assert!(o.status.success(), "{pair}: {}", stderr(&o));
        let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
        assert_eq!(v["pass"], true);
        let names: Vec<&str> = v["reports"].as_array().unwrap().iter().map(|r| r["identity"].as_str().unwrap()).collect();
        for id in ["recursion-vs-closed-form", "functional-equation", "ode-key", "m-constant", "lemma-ode", "move2fix"] {
            assert!(names.contains(&id), "{pair} missing {id}");
        }
    }
}

fn write_corrupted(path: &Path) {
    let pair = builtin_line();
    let mut values = table(&pair, 8).unwrap().to_map();
    values.insert(6, &values[&6] + int(1));
    write_cache(&InvariantTable::from_values(pair, values).unwrap(), path).unwrap();
}

#[test]
fn verify_flags_corrupted_cache_entry() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("line.json");
    write_corrupted(&path);
    let o = relgw(&["verify", "--pair", "line", "--max-degree", "8", "--cache", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(4));
    assert!(stderr(&o).contains("recursion-vs-closed-form (at 6)"), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let r = v["reports"]
        .as_array()
        .unwrap()
        .iter()
        .find(|r| r["identity"] == "recursion-vs-closed-form")
        .unwrap();
    assert_eq!(r["pass"], false);
    assert_eq!(r["discrepancy"]["index"], 6);
}

#[test]
fn cache_is_written_and_extended() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sub").join("conic.json");
    let p = path.to_str().unwrap();
    assert!(relgw(&["compute", "--pair", "conic", "--max-degree", "5", "--cache", p]).status.success());
    assert_eq!(read_cache(&path, &builtin_conic()).unwrap().max_degree(), 5);
    assert!(relgw(&["compute", "--pair", "conic", "--max-degree", "9", "--cache", p]).status.success());
    assert_eq!(read_cache(&path, &builtin_conic()).unwrap(), table(&builtin_conic(), 9).unwrap());
    // a smaller request leaves the cache alone
    assert!(relgw(&["compute", "--pair", "conic", "--max-degree", "2", "--cache", p]).status.success());
    assert_eq!(read_cache(&path, &builtin_conic()).unwrap().max_degree(), 9);
}

#[test]
fn cache_dir_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_relgw"))
        .args(["compute", "--pair", "line", "--max-degree", "4"])
        .env("RELGW_CACHE_DIR", dir.path())
        .output()
        .unwrap();
    assert!(o.status.success());
    assert_eq!(read_cache(&dir.path().join("line.json"), &builtin_line()).unwrap().max_degree(), 4);
}

#[test]
fn broken_caches_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("line.json");
    write_corrupted(&path);
    let text = fs::read_to_string(&path).unwrap();
    fs::write(&path, &text[..text.len() / 3]).unwrap();
    let o = relgw(&["compute", "--pair", "line", "--max-degree", "3", "--cache", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("parse"));

    fs::write(&path, text).unwrap();
    let o = relgw(&["compute", "--pair", "conic", "--max-degree", "3", "--cache", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("belongs to pair `line`"));
}

#[test]
fn custom_config_pairs() {
    let dir = tempfile::tempdir().unwrap();
    let good = dir.path().join("line.cfg");
    fs::write(&good, builtin_line().to_config()).unwrap();
    let a = stdout(&relgw(&["compute", "--config", good.to_str().unwrap(), "--max-degree", "6"]));
    let b = stdout(&relgw(&["compute", "--pair", "line", "--max-degree", "6"]));
    assert_eq!(a.lines().skip(1).collect::<Vec<_>>(), b.lines().skip(1).collect::<Vec<_>>());

    let missing = dir.path().join("missing.cfg");
    fs::write(&missing, "name = x\ndelta = 1\nkappa = -2\nsigma = 1\neta = 1\nhd = 1\n").unwrap();
    let o = relgw(&["compute", "--config", missing.to_str().unwrap(), "--max-degree", "3"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("missing seed for degree 1"));

    let o = relgw(&["compute", "--config", dir.path().join("nope.cfg").to_str().unwrap(), "--max-degree", "3"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn series_and_pair_info() {
    let o = relgw(&["series", "--pair", "line", "--order", "6", "--kind", "a"]);
    assert_eq!(stdout(&o).trim(), "1*q + 1/2*q^3 + 7/24*q^5 + O(q^7)");
    let o = relgw(&["series", "--pair", "conic", "--order", "3", "--format", "json"]);
    let coeffs: Vec<String> = serde_json::from_str(&stdout(&o)).unwrap();
    // F^C = 16 q + 16 q^2 + 16*4/2 q^3
    assert_eq!(coeffs, vec!["0", "16", "16", "32"]);
    let o = relgw(&["pair-info", "--pair", "line"]);
    assert!(stdout(&o).contains("seed.1 = 1"));
    assert!(stdout(&o).contains("# seed degrees: 1"));
}
