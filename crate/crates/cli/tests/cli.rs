use std::path::Path;
use std::process::{Command, Output};

fn triagg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_triagg"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stdout).expect("json on stdout")
}

fn error_category(o: &Output) -> String {
    let v: serde_json::Value = serde_json::from_slice(&o.stderr).expect("json on stderr");
    v["error"]["category"].as_str().unwrap().to_string()
}

fn path(dir: &Path, name: &str) -> String {
    dir.join(name).to_str().unwrap().to_string()
}

#[test]
fn generated_base_44_analyzes_to_known_rank() {
    let dir = tempfile::tempdir().unwrap();
    let file = path(dir.path(), "d44.json");
    let o = triagg(&["gen", "--family", "decomposed", "--n0", "44", "-o", &file]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v = stdout_json(&triagg(&["analyze", &file]));
    assert_eq!(v["t"], 36110);
    let e = v["exponent"].as_f64().unwrap();
    assert!((e - 2.773203).abs() < 5e-7, "{e}");
}

#[test]
fn pan_rank_through_cli() {
    let dir = tempfile::tempdir().unwrap();
    let file = path(dir.path(), "p44.json");
    assert!(triagg(&["gen", "--family", "decomposed", "--of", "pan", "--n0", "44", "-o", &file]).status.success());
    let v = stdout_json(&triagg(&["import", &file]));
    assert_eq!(v["t"], 36133);
    assert_eq!(v["kind"], "decomposed");
}

#[test]
fn verify_certify_and_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let file = path(dir.path(), "n6.json");
    let cert = path(dir.path(), "n6c.json");
    let copy = path(dir.path(), "copy.json");
    assert!(triagg(&["gen", "--family", "new25", "--n0", "6", "-o", &file]).status.success());
    let o = triagg(&["verify", &file, "--mode", "exact", "--certify", &cert]);
    assert!(o.status.success());
    assert_eq!(stdout_json(&o)["result"], true);
    let v = stdout_json(&triagg(&["import", &cert]));
    assert_eq!(v["certificate"]["mode"], "exact");
    assert!(triagg(&["export", &cert, "-o", &copy]).status.success());
    assert_eq!(std::fs::read(&cert).unwrap(), std::fs::read(&copy).unwrap());
}

#[test]
fn corrupted_algorithm_fails_verification() {
    let dir = tempfile::tempdir().unwrap();
    let file = path(dir.path(), "n4.json");
    assert!(triagg(&["gen", "--family", "new25", "--n0", "4", "-o", &file]).status.success());
    let text = std::fs::read_to_string(&file).unwrap();
    let bad = text.replacen("[0,0,\"1/3\"]", "[0,0,\"2/3\"]", 1);
    assert_ne!(bad, text);
    std::fs::write(&file, bad).unwrap();
    for mode in ["exact", "brent", "random", "multiply"] {
        let o = triagg(&["verify", &file, "--mode", mode]);
        assert_eq!(o.status.code(), Some(3), "{mode}");
        assert_eq!(error_category(&o), "verification");
    }
}

#[test]
fn transforms_and_multiply() {
    let dir = tempfile::tempdir().unwrap();
    let base = path(dir.path(), "n4.json");
    let rot = path(dir.path(), "rot.json");
    let merged = path(dir.path(), "merged.json");
    assert!(triagg(&["gen", "--family", "new25", "--n0", "4", "-o", &base]).status.success());
    assert!(triagg(&["rotate", &base, "-o", &rot]).status.success());
    assert!(triagg(&["verify", &rot, "--mode", "exact"]).status.success());
    assert!(triagg(&["merge-kin", &base, "-o", &merged]).status.success());
    assert!(triagg(&["verify", &merged, "--mode", "exact"]).status.success());

    let a = path(dir.path(), "a.txt");
    let b = path(dir.path(), "b.txt");
    let c = path(dir.path(), "c.txt");
    let id: String = (0..4)
        .map(|i| (0..4).map(|j| if i == j { "1" } else { "0" }).collect::<Vec<_>>().join(" ") + "\n")
        .collect();
    let m: String = (0..4)
        .map(|i| (0..4).map(|j| format!("{}/3", i * 4 + j)).collect::<Vec<_>>().join(" ") + "\n")
        .collect();
    std::fs::write(&a, &id).unwrap();
    std::fs::write(&b, &m).unwrap();
    let o = triagg(&["multiply", "--alg", &base, "--a", &a, "--b", &b, "-o", &c]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let got = std::fs::read_to_string(&c).unwrap();
    let want: Vec<Vec<f64>> = (0..4).map(|i| (0..4).map(|j| (i * 4 + j) as f64 / 3.0).collect()).collect();
    let parsed: Vec<Vec<f64>> = got
        .lines()
        .map(|l| {
            l.split_whitespace()
                .map(|x| match x.split_once('/') {
                    Some((n, d)) => n.parse::<f64>().unwrap() / d.parse::<f64>().unwrap(),
                    None => x.parse().unwrap(),
                })
                .collect()
        })
        .collect();
    assert_eq!(parsed, want);
}

#[test]
fn error_categories_and_codes() {
    let dir = tempfile::tempdir().unwrap();
    let o = triagg(&["import", &path(dir.path(), "missing.json")]);
    assert_eq!(o.status.code(), Some(5));
    assert_eq!(error_category(&o), "io");

    let junk = path(dir.path(), "junk.json");
    std::fs::write(&junk, "{\"format\":\"other\"}").unwrap();
    let o = triagg(&["import", &junk]);
    assert_eq!(o.status.code(), Some(4));
    assert_eq!(error_category(&o), "format");

    let o = triagg(&["gen", "--family", "pan", "--n0", "1"]);
    assert!(!o.status.success());

    let o = triagg(&["verify", &junk, "--mode", "sideways"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(error_category(&o), "usage");
}

#[test]
fn bad_prime_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let file = path(dir.path(), "n4.json");
    assert!(triagg(&["gen", "--family", "new25", "--n0", "4", "-o", &file]).status.success());
    let o = triagg(&["verify", &file, "--mode", "random", "--prime", "24"]);
    assert_eq!(error_category(&o), "prime");
}
