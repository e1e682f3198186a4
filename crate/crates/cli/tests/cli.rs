use std::path::Path;
use std::process::{Command, Output};

fn polarquant(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_polarquant"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn design(dir: &Path) -> String {
    let spec = dir.join("spec.json").to_string_lossy().into_owned();
    let o = polarquant(&[
        "design",
        "--n",
        "64",
        "--k",
        "32",
        "--w",
        "3",
        "--wint",
        "6",
        "--ebn0",
        "-0.5",
        "--variant",
        "ms-cd-uniform",
        "--out",
        &spec,
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    spec
}

#[test]
fn design_then_report() {
    let dir = tempfile::tempdir().unwrap();
    let spec = design(dir.path());
    let o = polarquant(&["report", "--spec", &spec]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("ms-cd-uniform"));
    let row = text.lines().find(|l| l.starts_with("cd_uniform")).unwrap();
    let cols: Vec<&str> = row.split_whitespace().collect();
    assert_eq!(&cols[1..5], ["1", "40", "63", "2520"]);
    assert!(row.ends_with('*'));
}

#[test]
fn simulate_writes_csv_and_plotdata() {
    let dir = tempfile::tempdir().unwrap();
    design(dir.path());
    let config = dir.path().join("exp.toml");
    std::fs::write(
        &config,
        r#"
seed = 3
ebn0_db = [1.0, 3.0]
[code]
N = 64
K = 32
[decoder]
kind = "fa-sc"
spec = "spec.json"
[stopping]
min_block_errors = 10
max_frames = 400
"#,
    )
    .unwrap();
    let out = dir.path().join("out.csv");
    let plot = dir.path().join("out.dat");
    let o = polarquant(&[
        "simulate",
        "--config",
        config.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--plotdata",
        plot.to_str().unwrap(),
        "--conversion",
        "simplified",
        "--alt-sign-invert",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "ebn0_db,frames,block_errors,bler,decoder,seed");
    assert_eq!(lines.len(), 3);
    assert!(lines[1].contains("fa-sc-ms-cd-uniform-w3-simplified-alt"));
    assert!(std::fs::read_to_string(&plot)
        .unwrap()
        .starts_with("# fa-sc-ms-cd-uniform-w3-simplified-alt\n1 "));
}

#[test]
fn workers_env_does_not_change_output() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("exp.toml");
    std::fs::write(
        &config,
        "seed = 9\nebn0_db = [0.0, 2.0]\n[code]\nN = 128\nK = 64\n[decoder]\nkind = \"llr-sc\"\n[stopping]\nmin_block_errors = 15\nmax_frames = 500\n",
    )
    .unwrap();
    let mut outputs = Vec::new();
    for workers in ["1", "4"] {
        let out = dir.path().join(format!("w{workers}.csv"));
        let o = Command::new(env!("CARGO_BIN_EXE_polarquant"))
            .args([
                "simulate",
                "--config",
                config.to_str().unwrap(),
                "--out",
                out.to_str().unwrap(),
            ])
            .env("POLARQUANT_WORKERS", workers)
            .output()
            .unwrap();
        assert!(o.status.success());
        outputs.push(std::fs::read(&out).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn verify_small_design() {
    let o = polarquant(&["verify", "--n", "32"]);
    assert!(o.status.success(), "{}", stdout(&o));
    let text = stdout(&o);
    assert!(text.lines().all(|l| l.starts_with("PASS")));
    assert!(text.contains("lower datapath equivalence"));
}

#[test]
fn rejects_unknown_variant() {
    let o = polarquant(&[
        "design",
        "--n",
        "64",
        "--k",
        "32",
        "--w",
        "3",
        "--ebn0",
        "1",
        "--variant",
        "mystery",
        "--out",
        "x.json",
    ]);
    assert!(!o.status.success());
}
