use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn wecopt(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wecopt")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn write_config(dir: &Path, algorithm: &str) -> String {
    let path = dir.join(format!("{algorithm}.toml"));
    let text = format!(
        "scenario = \"builtin:perth\"\nfrequency_stride = 10\nalgorithm = \"{algorithm}\"\nn_buoys = 2\nbudget = 400\nn_runs = 3\n\
         [params.optimizers.de]\npopulation = 10\n[params.optimizers.pso]\npopulation = 10\n"
    );
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn presets_lists_every_algorithm() {
    let o = wecopt(&["presets"]);
    assert!(o.status.success());
    let names: Vec<String> = stdout(&o).lines().map(|l| l.split_whitespace().next().unwrap().to_string()).collect();
    assert_eq!(names.len(), 13);
    assert!(names.iter().any(|n| n == "hcca"));
    assert!(names.iter().any(|n| n == "sls-nm-b"));
}

#[test]
fn run_then_rank() {
    let tmp = tempfile::tempdir().unwrap();
    let mut dirs = Vec::new();
    for algorithm in ["de", "pso"] {
        let cfg = write_config(tmp.path(), algorithm);
        let out = tmp.path().join(algorithm);
        let o = wecopt(&["run", &cfg, "--output", out.to_str().unwrap()]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        let text = stdout(&o);
        assert!(text.starts_with("run,seed,best_fitness_watts,evaluations,complete\n"));
        assert_eq!(text.lines().filter(|l| l.ends_with(",400,true")).count(), 3);
        for name in ["finals.csv", "summary.csv", "config.toml", "convergence_run02.csv"] {
            assert!(out.join(name).exists(), "{name}");
        }
        dirs.push(out.to_str().unwrap().to_string());
    }
    let o = wecopt(&["rank", &dirs[0], &dirs[1]]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let ranks: Vec<f64> = text.lines().skip(1).map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert_eq!(ranks.len(), 2);
    assert!((ranks.iter().sum::<f64>() - 3.0).abs() < 1e-12);
}

#[test]
fn run_overrides_apply() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "de");
    let o = wecopt(&["run", &cfg, "--algorithm", "nm", "--runs", "1", "--seed", "5", "--budget", "150", "--sequential"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    assert_eq!((row[0], row[1], row[3]), ("0", "5", "150"));
    assert!(text.contains("# nm over 1 runs"));
}

#[test]
fn scan_writes_landscape_csv() {
    let tmp = tempfile::tempdir().unwrap();
    let path = tmp.path().join("scan.csv");
    let o = wecopt(&[
        "scan", "--stride", "10", "--k-min", "0", "--k-max", "2e5", "--k-step", "1e5", "--d-min", "1e5", "--d-max", "3e5",
        "--d-step", "1e5", "-o", path.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(path).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "k,d,power_watts");
    assert_eq!(lines.len(), 1 + 9);
    assert!(lines[1..].iter().all(|l| l.split(',').nth(2).unwrap().parse::<f64>().unwrap() > 0.0));
}

#[test]
fn errors_exit_nonzero_with_a_diagnostic() {
    let tmp = tempfile::tempdir().unwrap();
    let cases: Vec<Vec<String>> = vec![
        vec!["run".into(), tmp.path().join("missing.toml").to_str().unwrap().into()],
        vec!["run".into(), write_config(tmp.path(), "de"), "--algorithm".into(), "bogus".into()],
        vec!["scan".into(), "--scenario".into(), "builtin:atlantis".into()],
        vec!["scan".into(), "--k-step".into(), "0".into()],
        vec!["rank".into(), tmp.path().to_str().unwrap().into()],
    ];
    for args in cases {
        let args: Vec<&str> = args.iter().map(String::as_str).collect();
        let o = wecopt(&args);
        assert!(!o.status.success(), "{args:?}");
        assert!(String::from_utf8_lossy(&o.stderr).starts_with("error: "), "{args:?}");
    }
    assert!(!wecopt(&["frobnicate"]).status.success());
}
