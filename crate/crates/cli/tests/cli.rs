use std::process::{Command, Output};

fn hillgap(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hillgap"))
        .args(args)
        .env("RUST_LOG", "error")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn csv_rows(text: &str) -> Vec<csv::StringRecord> {
    csv::Reader::from_reader(text.as_bytes())
        .records()
        .collect::<Result<_, _>>()
        .unwrap()
}

#[test]
fn free_dirichlet_spectrum_is_squares() {
    let o = hillgap(&["spectrum", "--potential", "zero", "--bc", "dir", "--n", "1..5"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let rows = csv_rows(&stdout(&o));
    assert_eq!(rows.len(), 5);
    for r in &rows {
        let n: f64 = r[0].parse().unwrap();
        let re: f64 = r[3].parse().unwrap();
        assert!((re - n * n).abs() < 1e-9, "{n}: {re}");
        assert_eq!(&r[1], "dir");
    }
}

#[test]
fn mathieu_per_plus_both_backends_agree() {
    let o = hillgap(&[
        "spectrum", "--potential", "mathieu:a=1", "--bc", "per+", "--n", "1..6", "--backend", "both",
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.starts_with("n,bc,k,re,im,backend,agreement\n"));
    let rows = csv_rows(&text);
    // n = 2, 4, 6 give two eigenvalues each; odd n are skipped under per+.
    assert_eq!(rows.len(), 6);
    for r in &rows {
        let agreement: f64 = r[6].parse().unwrap();
        assert!(agreement < 1e-9, "agreement {agreement}");
    }
}

#[test]
fn spectrum_output_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for p in [&a, &b] {
        let o = hillgap(&[
            "spectrum", "--potential", "hill:v-1=1,v1=4", "--bc", "per-", "--n", "1..5", "--out",
            p.to_str().unwrap(),
        ]);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
    }
    let (x, y) = (std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert!(!x.is_empty());
    assert_eq!(x, y);
}

#[test]
fn potential_file_matches_inline_spec() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("v.txt");
    std::fs::write(&path, "# Mathieu, a = 1\nv -1 1\nv 1 1\n").unwrap();
    let from_file = hillgap(&["spectrum", "--potential", path.to_str().unwrap(), "--bc", "per+", "--n", "0,2"]);
    let inline = hillgap(&["spectrum", "--potential", "mathieu:a=1", "--bc", "per+", "--n", "0,2"]);
    assert_eq!(code(&from_file), 0, "{}", stderr(&from_file));
    assert_eq!(stdout(&from_file), stdout(&inline));
}

#[test]
fn quasi_requires_monodromy() {
    let o = hillgap(&["spectrum", "--bc", "quasi:0.5", "--backend", "galerkin"]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("monodromy"));
    let o = hillgap(&[
        "spectrum", "--potential", "mathieu:a=1", "--bc", "quasi:0.5", "--backend", "monodromy", "--n", "0..2",
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(csv_rows(&stdout(&o)).len(), 3);
}

#[test]
fn bad_flags_exit_one() {
    assert_eq!(code(&hillgap(&["spectrum", "--potential", "zero", "--bc", "sideways", "--n", "1"])), 1);
    assert_eq!(code(&hillgap(&["spectrum", "--bogus"])), 1);
    assert_eq!(code(&hillgap(&["verify", "--family", "no-such-family"])), 1);
    assert_eq!(code(&hillgap(&["--help"])), 0);
}

#[test]
fn verify_two_exp_prints_gap_ratios() {
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("r.json");
    let csv_path = dir.path().join("r.csv");
    let o = hillgap(&[
        "verify", "--family", "two-exp", "--a", "1", "--b", "4", "--n", "2..8", "--out-json",
        json.to_str().unwrap(), "--out-csv", csv_path.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(stdout(&o).contains("gap_ratio"));
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(report["rows"].as_array().unwrap().len(), 7);
    let csv_text = std::fs::read_to_string(&csv_path).unwrap();
    assert_eq!(csv_rows(&csv_text).len(), 7);
}

#[test]
fn verify_rejects_zero_coefficient() {
    let o = hillgap(&["verify", "--family", "two-exp", "--a", "0", "--b", "1"]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("coefficients must be nonzero"));
}

#[test]
fn verify_dirac_even_gaps_vanish() {
    let o = hillgap(&[
        "verify", "--family", "dirac-two-exp", "--a", "1", "--A", "1", "--b", "1", "--B", "1", "--n", "-4..4",
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    for line in stdout(&o).lines().skip(1) {
        let cols: Vec<&str> = line.split_whitespace().collect();
        let Ok(n) = cols[0].parse::<i64>() else { continue };
        if n % 2 == 0 {
            let gap: f64 = cols[2].parse().unwrap();
            assert!(gap < 1e-8, "n = {n}: {gap}");
        }
    }
}

#[test]
fn isospectral_examples() {
    let o = hillgap(&["isospectral", "--pair", "1,4,2,2", "--t", "1.0", "--count", "12"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(stdout(&o).contains("max matched deviation"));
    let o = hillgap(&["isospectral", "--shift", "0.3+0.2i", "--potential", "mathieu:a=1", "--t", "0", "--count", "10"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(code(&hillgap(&["isospectral", "--pair", "1,4,2,3"])), 1);
    assert_eq!(code(&hillgap(&["isospectral"])), 1);
}

#[test]
fn config_file_supplies_and_flags_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.conf");
    std::fs::write(&cfg, "threads = 1\n[spectrum]\npotential = zero\nbc = dir\nn = 1..3\n").unwrap();
    let c = cfg.to_str().unwrap();
    let o = hillgap(&["spectrum", "--config", c]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(csv_rows(&stdout(&o)).len(), 3);
    let o = hillgap(&["spectrum", "--config", c, "--n", "2"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let rows = csv_rows(&stdout(&o));
    assert_eq!(rows.len(), 1);
    assert_eq!(&rows[0][0], "2");
    assert_eq!(code(&hillgap(&["spectrum", "--config", "/nonexistent/run.conf"])), 1);
}
