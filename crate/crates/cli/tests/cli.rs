use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn unifold(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_unifold"))
        .args(args)
        .env_remove("UNIFOLD_SEED")
        .env_remove("UNIFOLD_CACHE_DIR")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&o.stderr)))
}

fn num(v: &Value, key: &str) -> f64 {
    v[key].as_f64().unwrap_or_else(|| panic!("missing {key} in {v}"))
}

fn dump_one(dir: &Path, dist: &str, datasets: &str) -> Output {
    let d = dir.to_str().unwrap();
    unifold(&["simulate", "--dist", dist, "--datasets", datasets, "--reps", "1000", "--dump", d, "--format", "csv"])
}

#[test]
fn analyze_examples() {
    let o = unifold(&["analyze", "dirac:0.2@-2,0.4@0,0.4@2"]);
    assert!(o.status.success());
    let v = json(&o);
    assert!((num(&v, "sfr_exact") - 0.95).abs() < 0.01);
    assert!((num(&v, "sfr_approx") - 1.422_740_524_781_341).abs() < 1e-12);
    assert_eq!(v["verdict"]["exact_fails"], false);
    assert_eq!(v["verdict"]["approx_fails"], true);

    let v = json(&unifold(&["analyze", "dirac:0.2@-3,0.2@-1.5,0.2@2.5,0.2@4,0.2@11"]));
    assert!((num(&v, "sfr_exact") - 1.07).abs() < 0.01 && (num(&v, "sfr_approx") - 1.38).abs() < 0.01);
    assert_eq!(v["verdict"]["exact_fails"], true);

    let v = json(&unifold(&["analyze", "dirac:0.5@-1,0.5@1"]));
    assert!(num(&v, "sfr_exact").abs() < 1e-12 && num(&v, "sfr_approx").abs() < 1e-12);

    let text = stdout(&unifold(&["analyze", "dirac:0.2@-2,0.4@0,0.4@2", "--format", "md"]));
    assert!(text.contains("sfr_approx: 1.42274\n"));
}

#[test]
fn analyze_reports_parse_position() {
    let o = unifold(&["analyze", "dirac:0.5@-1,0.5"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("parse error at 16"));
}

#[test]
fn dftu_on_normal_data_is_unimodal_and_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    assert!(dump_one(dir.path(), "normal", "1").status.success());
    let file = dir.path().join("d0_r0.txt");
    let f = file.to_str().unwrap();
    let a = unifold(&["test", f, "--test", "dftu", "--reps", "1000", "--expect", "unimodal"]);
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(json(&a)["verdict"], "unimodal");
    let b = unifold(&["test", f, "--test", "dftu", "--reps", "1000"]);
    assert_eq!(a.stdout, b.stdout);

    let c = unifold(&["test", f, "--test", "ftu", "--pivot", "approx", "--reps", "1000", "--expect", "multimodal"]);
    assert_eq!(c.status.code(), Some(1));
    assert_eq!(json(&c)["test"], "ftu-approx");
}

#[test]
fn dumped_datasets_reproduce_simulation_counts() {
    let dir = tempfile::tempdir().unwrap();
    let o = dump_one(dir.path(), "gauss3", "4");
    assert!(o.status.success());
    let csv = stdout(&o);
    let count = |test: &str| -> usize {
        let line = csv.lines().find(|l| l.starts_with(&format!("gauss3,{test},"))).unwrap();
        line.rsplit(',').next().unwrap().parse().unwrap()
    };
    let mut uni = [0usize; 2];
    for r in 0..4 {
        let f = dir.path().join(format!("d0_r{r}.txt"));
        for (k, args) in [["--test", "dftu"], ["--test", "ftu"]].iter().enumerate() {
            let v = json(&unifold(&["test", f.to_str().unwrap(), args[0], args[1], "--reps", "1000"]));
            uni[k] += usize::from(v["verdict"] == "unimodal");
        }
    }
    assert_eq!(uni, [count("DFTU"), count("FTU-exact")]);
}

#[test]
fn bad_inputs_exit_with_status_two() {
    let dir = tempfile::tempdir().unwrap();
    let same = dir.path().join("same.txt");
    fs::write(&same, "3\n3\n3\n").unwrap();
    let o = unifold(&["test", same.to_str().unwrap(), "--reps", "1000"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("degenerate"));

    let bad = dir.path().join("bad.txt");
    fs::write(&bad, "# values\n1.0\n2.0\nthree\n").unwrap();
    let o = unifold(&["test", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("parse error at 4"));

    let o = unifold(&["test", dir.path().join("missing.txt").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));

    assert_eq!(unifold(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn column_selection() {
    let dir = tempfile::tempdir().unwrap();
    let two = dir.path().join("two.csv");
    let single = dir.path().join("one.txt");
    let values: Vec<String> = (0..40).map(|i| format!("{}", (i * 7 % 13) as f64 * 0.5)).collect();
    let rows: Vec<String> = values.iter().map(|v| format!("x,{v}")).collect();
    fs::write(&two, format!("# id,value\n{}\n", rows.join("\n"))).unwrap();
    fs::write(&single, values.join("\n")).unwrap();
    let args = |f: &Path, col: &'static str| unifold(&["test", f.to_str().unwrap(), "--column", col, "--reps", "1000"]);
    assert_eq!(args(&two, "2").stdout, args(&single, "1").stdout);
}

#[test]
fn simulate_is_independent_of_worker_count() {
    let run = |threads: &str| {
        Command::new(env!("CARGO_BIN_EXE_unifold"))
            .args(["simulate", "--dist", "dirac3", "--dist", "gauss2", "--datasets", "5", "--n", "300"])
            .args(["--reps", "1000", "--format", "csv", "--seed", "9"])
            .env("RAYON_NUM_THREADS", threads)
            .output()
            .unwrap()
    };
    let a = run("1");
    assert!(a.status.success());
    assert_eq!(a.stdout, run("3").stdout);
    let csv = stdout(&a);
    assert!(csv.starts_with("distribution,test,uni_count\n"));
    assert!(csv.contains("dirac3,DFTU,0\n"));
}

#[test]
fn simulate_writes_all_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let prefix = dir.path().join("table");
    let o = unifold(&[
        "simulate",
        "--dist",
        "dirac:0.5@-1,0.5@1",
        "--datasets",
        "2",
        "--n",
        "100",
        "--reps",
        "1000",
        "--out",
        prefix.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let csv = fs::read_to_string(dir.path().join("table.csv")).unwrap();
    assert!(csv.contains("\"dirac:0.5@-1,0.5@1\",DFTU,0"));
    assert!(fs::read_to_string(dir.path().join("table.md")).unwrap().contains("| FTU-exact |"));
    let v: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("table.json")).unwrap()).unwrap();
    assert_eq!(v["rows"][0]["uni_counts"][0], 0);
}

#[test]
fn scan_sigma_outputs() {
    let o = unifold(&["scan-sigma", "gauss:0.3@-2.8:1,0.7@1.2:1", "--lo", "0.05", "--hi", "2.5", "--steps", "50"]);
    assert!(o.status.success());
    let csv = stdout(&o);
    assert_eq!(csv.lines().filter(|l| !l.starts_with('#')).count(), 51);
    let crossing: f64 = csv.lines().last().unwrap().rsplit(' ').next().unwrap().parse().unwrap();
    assert!((crossing - 1.34).abs() < 0.02);

    let o = unifold(&["scan-sigma", "gauss:1@0:1", "--format", "json"]);
    assert!(o.status.success());
    let v = json(&o);
    assert!(v["crossing"].is_null());
    for row in v["rows"].as_array().unwrap() {
        assert!((num(row, "sfr") - 1.4535).abs() < 1e-4);
    }

    // Dirac-limit endpoint against the closed form.
    let v =
        json(&unifold(&["scan-sigma", "dirac:0.2@-2,0.4@0,0.4@2", "--lo", "1e-10", "--hi", "1", "--format", "json"]));
    assert!((num(&v["rows"][0], "sfr") - 0.952_380_952_380_952_4).abs() < 1e-6);
}

#[test]
fn verify_grid_flags() {
    let o = unifold(&["verify", "--grid", "20", "--restarts", "20", "--bounds", "200", "--trials", "2000"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(v["passed"], true);
    for obj in v["second_step"]["objectives"].as_array().unwrap() {
        assert!(obj[1]["minimum"].as_f64().unwrap() > 0.0);
    }
    assert_eq!(unifold(&["verify", "--grid", "0"]).status.code(), Some(2));
}

#[test]
fn calibrate_writes_cache() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().to_str().unwrap();
    let args = [
        "calibrate",
        "--n",
        "1000",
        "--alpha",
        "0.05",
        "--alpha1",
        "0.03",
        "--reps",
        "1000",
        "--seed",
        "42",
        "--cache-dir",
        cache,
    ];
    let a = unifold(&args);
    assert!(a.status.success());
    let v = json(&a);
    assert!((num(&v, "alpha2") - 0.020_619).abs() < 1e-6);
    assert!(num(&v, "q1") < 1.0);
    let files: Vec<_> = fs::read_dir(dir.path()).unwrap().map(|e| e.unwrap().path()).collect();
    assert_eq!(files.len(), 1);
    let stored = fs::read(&files[0]).unwrap();
    assert_eq!(stored, a.stdout);

    let b = unifold(&args);
    assert_eq!(b.stdout, a.stdout);
    assert_eq!(fs::read(&files[0]).unwrap(), stored);
    assert!(String::from_utf8_lossy(&b.stderr).contains("cache:"));

    // A fresh calibration without the cache agrees field for field.
    let fresh = unifold(&["calibrate", "--n", "1000", "--reps", "1000", "--seed", "42"]);
    assert_eq!(fresh.stdout, a.stdout);

    let o = unifold(&["calibrate", "--alpha", "0.05", "--alpha1", "0.05", "--reps", "1000"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn environment_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let run = |seed: &str| {
        Command::new(env!("CARGO_BIN_EXE_unifold"))
            .args(["calibrate", "--n", "200", "--reps", "1000"])
            .env("UNIFOLD_SEED", seed)
            .env("UNIFOLD_CACHE_DIR", dir.path())
            .output()
            .unwrap()
    };
    let a = json(&run("5"));
    assert_eq!(a["seed"], 5);
    assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
    let b = json(&run("6"));
    assert_eq!(b["seed"], 6);
    assert_ne!(a["q1"], b["q1"]);
}
