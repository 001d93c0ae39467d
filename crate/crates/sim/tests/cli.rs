use std::path::Path;
use std::process::{Command, Output};
use std::time::Instant;

use sim::output::{CELL_HEADER, ENERGY_HEADER, NODE_HEADER, NODE_SEPARATOR};

fn sim(args: &[&str], envs: &[(&str, &Path)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_sim"));
    cmd.args(args).env_remove("SIM_OUT_DIR");
    for (k, v) in envs {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn smoke_args(out: &Path) -> Vec<String> {
    [
        "run",
        "--quiet",
        "--preset",
        "exp2_highdamp",
        "--n",
        "8",
        "--set",
        "final_time=0.1",
        "--set",
        "snapshots=0,0.05,0.1,5",
        "--out",
    ]
    .iter()
    .map(|s| s.to_string())
    .chain([out.display().to_string()])
    .collect()
}

fn run_ok(args: &[String]) {
    let refs: Vec<&str> = args.iter().map(String::as_str).collect();
    let out = sim(&refs, &[]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn smoke_run_writes_all_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let start = Instant::now();
    run_ok(&smoke_args(dir.path()));
    assert!(start.elapsed().as_secs_f64() < 1.0);

    let energies = std::fs::read_to_string(dir.path().join("energies.csv")).unwrap();
    let lines: Vec<_> = energies.lines().collect();
    assert_eq!(lines[0], ENERGY_HEADER);
    let dt = 0.125 * (3.0f64 / 64.0 + 0.5).sqrt() / 10.0;
    let steps = (0.1 / dt).ceil() as usize;
    // Header, initial state, one row per step.
    assert_eq!(lines.len(), 2 + steps);
    for (k, row) in lines[1..].iter().enumerate() {
        let cols: Vec<_> = row.split(',').collect();
        assert_eq!(cols.len(), 10);
        assert_eq!(cols[0].parse::<usize>().unwrap(), k);
    }

    // Snapshot at 5 lies beyond the final time and is not written.
    for t in ["0.0000", "0.0500", "0.1000"] {
        let text = std::fs::read_to_string(dir.path().join(format!("snapshot_t{t}.csv"))).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[0], CELL_HEADER);
        assert_eq!(lines[65], NODE_SEPARATOR);
        assert_eq!(lines[66], NODE_HEADER);
        assert_eq!(lines.len(), 67 + 81);
    }
    assert!(!dir.path().join("snapshot_t5.0000.csv").exists());
}

#[test]
fn repeated_runs_are_bit_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    run_ok(&smoke_args(a.path()));
    run_ok(&smoke_args(b.path()));
    for f in ["energies.csv", "manifest.cfg", "snapshot_t0.0500.csv"] {
        assert_eq!(
            std::fs::read(a.path().join(f)).unwrap(),
            std::fs::read(b.path().join(f)).unwrap(),
            "{f}"
        );
    }
}

#[test]
fn manifest_reproduces_the_run() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    run_ok(&smoke_args(a.path()));
    let manifest = a.path().join("manifest.cfg");
    let out = sim(
        &[
            "run",
            "--quiet",
            "--config",
            manifest.to_str().unwrap(),
            "--out",
            b.path().to_str().unwrap(),
        ],
        &[],
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    for f in ["energies.csv", "manifest.cfg", "snapshot_t0.1000.csv"] {
        assert_eq!(
            std::fs::read(a.path().join(f)).unwrap(),
            std::fs::read(b.path().join(f)).unwrap(),
            "{f}"
        );
    }
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(
        &cfg,
        "# test\npreset = exp1_pos\nn = 4\nfinal_time = 0.02\neps2 = 0.3\n",
    )
    .unwrap();
    let out_dir = dir.path().join("out");
    let out = sim(
        &[
            "run",
            "--quiet",
            "--config",
            cfg.to_str().unwrap(),
            "--set",
            "eps2=0.2",
            "--n",
            "6",
            "--out",
            out_dir.to_str().unwrap(),
        ],
        &[],
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let manifest = std::fs::read_to_string(out_dir.join("manifest.cfg")).unwrap();
    assert!(manifest.contains("\nn = 6\n"));
    assert!(manifest.contains("eps2 = 2.0000000000000001e-1"));
}

#[test]
fn out_dir_defaults_to_env() {
    let dir = tempfile::tempdir().unwrap();
    let out = sim(
        &[
            "run",
            "--quiet",
            "--preset",
            "exp1_neg",
            "--n",
            "4",
            "--set",
            "final_time=0.02",
        ],
        &[("SIM_OUT_DIR", dir.path())],
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(dir.path().join("energies.csv").exists());
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().to_str().unwrap();

    let out = sim(
        &[
            "run",
            "--preset",
            "exp1_pos",
            "--set",
            "eps2=-1.5",
            "--out",
            out_dir,
        ],
        &[],
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("ellipticity"));

    let out = sim(
        &[
            "run", "--preset", "exp1_pos", "--set", "bogus=1", "--out", out_dir,
        ],
        &[],
    );
    assert_eq!(out.status.code(), Some(2));

    let out = sim(
        &[
            "run", "--preset", "exp1_pos", "--n", "8", "--cfl", "fail", "--set", "dt=0.5", "--out",
            out_dir,
        ],
        &[],
    );
    assert_eq!(out.status.code(), Some(2));

    // Far beyond the CFL bound even the halved retry cannot converge.
    let out = sim(
        &[
            "run",
            "--preset",
            "exp2_lowdamp",
            "--n",
            "8",
            "--set",
            "dt=0.5",
            "--set",
            "final_time=1",
            "--out",
            out_dir,
        ],
        &[],
    );
    assert_eq!(
        out.status.code(),
        Some(3),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(String::from_utf8_lossy(&out.stderr).contains("CFL"));

    let blocker = dir.path().join("file");
    std::fs::write(&blocker, "").unwrap();
    let out = sim(
        &[
            "run",
            "--preset",
            "exp1_pos",
            "--n",
            "4",
            "--out",
            blocker.join("sub").to_str().unwrap(),
        ],
        &[],
    );
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn verify_prints_json_lines() {
    let out = sim(&["verify", "--check", "elliptic-convergence"], &[]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<_> = text.lines().collect();
    assert_eq!(lines.len(), 1);
    let v: serde_json::Value = serde_json::from_str(lines[0]).unwrap();
    assert_eq!(v["passed"], true);
    let r = v["metrics"]["eps2=0.5/ratio_n16"].as_f64().unwrap();
    assert!((3.5..=4.5).contains(&r));

    // Ten times over the CFL bound the iteration blows up.
    let out = sim(
        &["verify", "--check", "contraction", "--dt-factor", "50"],
        &[],
    );
    assert!(!out.status.success());
    let v: serde_json::Value =
        serde_json::from_str(String::from_utf8(out.stdout).unwrap().trim()).unwrap();
    assert_eq!(v["passed"], false);

    let out = sim(&["verify", "--check", "nope"], &[]);
    assert!(!out.status.success());
}
