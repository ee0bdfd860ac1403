use std::path::PathBuf;
use std::process::{Command, Output};

fn data(rel: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../data")
        .join(rel)
        .display()
        .to_string()
}

fn gtodd(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gtodd")).args(args).output().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn ehrhart_unit_square() {
    let out = gtodd(&["ehrhart", "--shortsum", &data("shortsums/unit_square_series.json")]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("p=998244353: (1+t)/(1-t)^3"), "{text}");
    assert!(text.contains("rational: (1+t)/(1-t)^3"), "{text}");
}

#[test]
fn ehrhart_number_without_t() {
    let out = gtodd(&["ehrhart", "--shortsum", &data("shortsums/unit_square_q3.json"), "--primes", "1004535809,469762049"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("rational: 16"));
}

#[test]
fn ct_five_twelfths() {
    let out = gtodd(&["ct", "--problem", &data("ct/five_twelfths.json")]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("rational: 5/12"));
}

#[test]
fn todd_inline_and_file_agree() {
    let a = gtodd(&["todd", "--b0", "1", "--d", "8"]);
    let b = gtodd(&["todd", "--spec", &data("todd/bernoulli.json")]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(stdout(&a), stdout(&b));
    assert!(stdout(&a).contains("-1/720"));
}

#[test]
fn ilp_inline_knapsack() {
    // 3x + 5y = 14 has the single point (3, 1)
    let out = gtodd(&["ilp", "--a", "3,5", "--b", "14", "--cost", "2,-1", "--mode", "min"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(stdout(&out).starts_with("min: 5\n"), "{}", stdout(&out));
}

#[test]
fn json_output_is_reproducible() {
    let args = ["ehrhart", "--shortsum", &data("shortsums/ms3_series.json"), "--json"];
    let a = stdout(&gtodd(&args));
    let b = stdout(&gtodd(&args));
    assert_eq!(a, b);
    let v: serde_json::Value = serde_json::from_str(&a).unwrap();
    assert_eq!(v["command"], "ehrhart");
}

#[test]
fn output_file() {
    let path = std::env::temp_dir().join(format!("gtodd-cli-test-{}.txt", std::process::id()));
    let out = gtodd(&["ct", "--problem", &data("ct/five_twelfths.json"), "--output", &path.display().to_string()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(std::fs::read_to_string(&path).unwrap().contains("5/12"));
    std::fs::remove_file(path).ok();
}

#[test]
fn exit_codes() {
    // validation: missing file, duplicate primes, prime not above d
    assert_eq!(gtodd(&["ct", "--problem", "/nonexistent.json"]).status.code(), Some(2));
    assert_eq!(gtodd(&["todd", "--b0", "1", "--d", "4", "--primes", "7,7"]).status.code(), Some(2));
    assert_eq!(gtodd(&["todd", "--b0", "1", "--d", "8", "--primes", "7"]).status.code(), Some(2));
    // math domain: 7 divides an element of B0
    let path = std::env::temp_dir().join(format!("gtodd-ct7-{}.json", std::process::id()));
    std::fs::write(&path, r#"{"l": [{"c": 1}], "b0": [7, 1]}"#).unwrap();
    let out = gtodd(&["ct", "--problem", &path.display().to_string(), "--primes", "7"]);
    std::fs::remove_file(&path).ok();
    assert_eq!(out.status.code(), Some(3));
    // resource: enumerating the benchmark knapsack is out of reach
    let out = gtodd(&["ilp", "--instance", &data("knapsack/cuww1.json")]);
    assert_eq!(out.status.code(), Some(4), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn bench_csv_header() {
    let out = gtodd(&["bench", "--ops", "inv", "--paths", "fast", "--from", "4", "--to", "5", "--runs", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.starts_with("op,path,d,median_seconds\ninv,fast,16,"), "{text}");
    assert_eq!(text.lines().count(), 3);
}
