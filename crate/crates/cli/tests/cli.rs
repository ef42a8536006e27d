use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_plantlab"))
}

fn run(args: &[&str], out: &Path) -> Output {
    bin().args(args).arg("--out").arg(out).output().unwrap()
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs")
}

#[test]
fn same_seed_gives_byte_identical_csv() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = ["ldlr-sweep", "--seed", "11", "-p", "problem=tpca", "-p", "n=5,6", "-p", "lambda=1,2", "-p", "method=mc", "-p", "trials=500"];
    assert!(run(&args, a.path()).status.success());
    let mut single = args.to_vec();
    single.extend(["--threads", "1"]);
    assert!(run(&single, b.path()).status.success());
    let x = std::fs::read(a.path().join("ldlr_sweep.csv")).unwrap();
    let y = std::fs::read(b.path().join("ldlr_sweep.csv")).unwrap();
    assert_eq!(x, y);
    let c = tempfile::tempdir().unwrap();
    let mut other = args.to_vec();
    other[2] = "12";
    assert!(run(&other, c.path()).status.success());
    assert_ne!(x, std::fs::read(c.path().join("ldlr_sweep.csv")).unwrap());
}

#[test]
fn zero_signal_sweep_is_all_zero() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["ldlr-sweep", "--seed", "1", "-p", "problem=tpca", "-p", "n=6,8", "-p", "lambda=0", "-p", "d=1,2,4"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let mut r = csv::Reader::from_path(dir.path().join("ldlr_sweep.csv")).unwrap();
    let mut rows = 0;
    for rec in r.records() {
        let rec = rec.unwrap();
        assert_eq!(rec[6].parse::<f64>().unwrap(), 0.0);
        rows += 1;
    }
    assert_eq!(rows, 2 * (1 + 2 + 4));
}

#[test]
fn pseudocal_report_has_fifty_entries() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["pseudocal-check", "--seed", "3", "-p", "problem=tpca", "-p", "n=8", "-p", "k=3", "-p", "d=1", "-p", "big_d=4"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_slice(&std::fs::read(dir.path().join("pseudocal_check.json")).unwrap()).unwrap();
    let entries = v["entries"].as_array().unwrap();
    assert_eq!(entries.len(), 50);
    for e in entries {
        for key in ["min_eig", "lambda_00", "objective"] {
            assert!(e[key].is_number(), "{key} missing");
        }
    }
}

#[test]
fn every_row_carries_the_config_hash() {
    let dir = tempfile::tempdir().unwrap();
    let o = bin()
        .args(["moments-check", "--config"])
        .arg(configs().join("moments_slice.toml"))
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let mut r = csv::Reader::from_path(dir.path().join("moments_check.csv")).unwrap();
    assert_eq!(r.headers().unwrap().iter().collect::<Vec<_>>(), ["config_hash", "kind", "n", "k", "d", "lambda_min_nonzero", "kernel_dim"]);
    let hashes: Vec<String> = r.records().map(|x| x.unwrap()[0].to_string()).collect();
    assert_eq!(hashes.len(), 3);
    assert!(hashes.iter().all(|h| h == &hashes[0] && h.len() == 16));
}

#[test]
fn flags_override_config_file_keys() {
    let dir = tempfile::tempdir().unwrap();
    let o = bin()
        .args(["moments-check", "-p", "n=4,6,8", "--config"])
        .arg(configs().join("moments_slice.toml"))
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(o.status.success());
    let text = std::fs::read_to_string(dir.path().join("moments_check.csv")).unwrap();
    assert!(text.contains(",4,2,1,"), "{text}");
}

#[test]
fn shipped_configs_parse_and_run() {
    for (cmd, file) in [("ldlr-sweep", "ldlr_phase.toml"), ("duality-lab", "duality_clique.toml")] {
        let dir = tempfile::tempdir().unwrap();
        let o = bin().args([cmd, "--config"]).arg(configs().join(file)).arg("--out").arg(dir.path()).output().unwrap();
        assert!(o.status.success(), "{file}: {}", String::from_utf8_lossy(&o.stderr));
    }
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let code = |args: &[&str]| run(args, dir.path()).status.code().unwrap();
    // missing seed, unknown key, bad value, unknown subcommand
    assert_eq!(code(&["sample", "-p", "problem=clique", "-p", "n=5"]), 1);
    assert_eq!(code(&["sample", "--seed", "1", "-p", "problem=clique", "-p", "nn=5"]), 1);
    assert_eq!(code(&["sample", "--seed", "1", "-p", "problem=clique", "-p", "n=five"]), 1);
    assert_eq!(code(&["frobnicate", "--seed", "1"]), 1);
    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "problem = [").unwrap();
    assert_eq!(code(&["sample", "--seed", "1", "--config", bad.to_str().unwrap()]), 1);
    // guards
    assert_eq!(code(&["pseudocal-check", "--seed", "1", "-p", "problem=tpca", "-p", "n=100", "-p", "d=2"]), 2);
    assert_eq!(code(&["duality-lab", "--seed", "1", "-p", "problem=clique", "-p", "n=7", "-p", "size=3"]), 2);
    assert_eq!(code(&["ldlr-sweep", "--seed", "1", "-p", "problem=tpca", "-p", "n=8", "-p", "t_cap=9"]), 2);
    // solver cap
    assert_eq!(
        code(&["duality-lab", "--seed", "1", "-p", "problem=clique", "-p", "n=4", "-p", "size=3", "-p", "rho=1.0", "-p", "max_iter=50"]),
        3
    );
    assert_eq!(code(&["sample", "--seed", "1", "-p", "problem=clique", "-p", "n=5", "-p", "size=2"]), 0);
}

#[test]
fn sample_round_trips_through_the_instance_reader() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["sample", "--seed", "4", "-p", "problem=sbm", "-p", "n=6", "-p", "a=3", "-p", "b=1", "-p", "samples=3"], dir.path());
    assert!(o.status.success());
    let f = std::fs::File::open(dir.path().join("instances.csv")).unwrap();
    let (header, insts) = plantlab::models::read_instances_csv(std::io::BufReader::new(f)).unwrap();
    assert_eq!(header.problem, "sbm");
    assert_eq!(insts.len(), 3);
    assert!(insts.iter().all(|i| i.len() == 15));
}
