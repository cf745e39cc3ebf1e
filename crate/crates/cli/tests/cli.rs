use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use sphcoords::cohomology::{compute_barcode, select_bar, BarSelection};
use sphcoords::io;
use sphcoords::pipeline::{build_complex, run_from_bar, PipelineConfig};
use tempfile::TempDir;

fn sphcoords(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sphcoords"))
        .args(args)
        .env_remove("SPHCOORDS_THREADS")
        .output()
        .unwrap()
}

fn ok(args: &[&str]) {
    let out = sphcoords(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
}

fn code(args: &[&str]) -> i32 {
    sphcoords(args).status.code().unwrap()
}

fn path(dir: &TempDir, name: &str) -> String {
    dir.path().join(name).to_str().unwrap().to_owned()
}

fn read(p: impl AsRef<Path>) -> String {
    fs::read_to_string(p).unwrap()
}

const OCTAHEDRON: &str = "1,0,0\n-1,0,0\n0,1,0\n0,-1,0\n0,0,1\n0,0,-1\n";

fn octahedron(dir: &TempDir) -> String {
    let p = path(dir, "octahedron.csv");
    fs::write(&p, OCTAHEDRON).unwrap();
    p
}

#[test]
fn synth_is_seeded() {
    let dir = TempDir::new().unwrap();
    let (a, b, c) = (path(&dir, "a"), path(&dir, "b"), path(&dir, "c"));
    for (out, seed) in [(&a, "3"), (&b, "3"), (&c, "4")] {
        ok(&[
            "synth", "circle", "-n", "40", "--sigma", "0.1", "--seed", seed, "-o", out,
        ]);
    }
    assert_eq!(
        read(format!("{a}/points.csv")),
        read(format!("{b}/points.csv"))
    );
    assert_ne!(
        read(format!("{a}/points.csv")),
        read(format!("{c}/points.csv"))
    );
    assert_eq!(read(format!("{a}/points.csv")).lines().count(), 40);
    assert_eq!(read(format!("{a}/truth.csv")).lines().count(), 41);
    ok(&["synth", "two-circles", "-n", "20", "-o", &a]);
    assert!(Path::new(&format!("{a}/labels.csv")).exists());
    ok(&[
        "synth",
        "sensors",
        "-n",
        "16",
        "--walks",
        "2",
        "--walk-len",
        "5",
        "--sigma",
        "0.2",
        "-o",
        &a,
    ]);
    assert_eq!(code(&["synth", "klein-bottle"]), 2);
}

#[test]
fn octahedron_barcode() {
    let dir = TempDir::new().unwrap();
    let input = octahedron(&dir);
    let out = path(&dir, "bars");
    ok(&["barcode", "-i", &input, "--dim", "2", "-o", &out]);
    let csv = read(format!("{out}/barcode.csv"));
    assert_eq!(csv, "index,dimension,birth,death\n0,2,1.41421356237,2\n");
    let reps: serde_json::Value =
        serde_json::from_str(&read(format!("{out}/representatives.json"))).unwrap();
    assert_eq!(reps.as_array().unwrap().len(), 1);
}

#[test]
fn circle_has_one_long_loop() {
    let dir = TempDir::new().unwrap();
    let data = path(&dir, "data");
    ok(&["synth", "circle", "-n", "24", "-o", &data]);
    let out = path(&dir, "bars");
    ok(&[
        "barcode",
        "-i",
        &format!("{data}/points.csv"),
        "--dim",
        "1",
        "-o",
        &out,
    ]);
    let lengths: Vec<f64> = read(format!("{out}/barcode.csv"))
        .lines()
        .skip(1)
        .map(|l| {
            let f: Vec<f64> = l.split(',').map(|x| x.parse().unwrap()).collect();
            f[3] - f[2]
        })
        .collect();
    assert_eq!(lengths.iter().filter(|&&x| x > 0.5).count(), 1);
}

#[test]
fn map_is_barcode_plus_library_calls() {
    let dir = TempDir::new().unwrap();
    let input = octahedron(&dir);
    let (bars, run) = (path(&dir, "bars"), path(&dir, "run"));
    ok(&["barcode", "-i", &input, "-o", &bars]);
    ok(&["map", "-i", &input, "-o", &run]);
    assert_eq!(
        read(format!("{bars}/barcode.csv")),
        read(format!("{run}/barcode.csv"))
    );

    let d = io::read_point_cloud(OCTAHEDRON.as_bytes())
        .unwrap()
        .distance_matrix();
    let cfg = PipelineConfig::default();
    let c = build_complex(&d, 2, None).unwrap();
    let b = compute_barcode(&c, 2, cfg.prime).unwrap();
    let bar = select_bar(&b, BarSelection::Longest).unwrap().clone();
    let out = run_from_bar(&c, b, bar, &cfg).unwrap();
    let mut coords = Vec::new();
    io::write_coordinates(&out.coordinates, &mut coords).unwrap();
    assert_eq!(
        read(format!("{run}/coordinates.csv")),
        String::from_utf8(coords).unwrap()
    );
    let mut trace = Vec::new();
    io::write_energy_trace(&out.report, &mut trace).unwrap();
    assert_eq!(
        read(format!("{run}/energy.csv")),
        String::from_utf8(trace).unwrap()
    );
    let report: serde_json::Value =
        serde_json::from_str(&read(format!("{run}/report.json"))).unwrap();
    assert_eq!(report["converged"], true);
    assert_eq!(report["iterations"], out.report.iterations);
}

#[test]
fn thread_count_does_not_change_results() {
    let dir = TempDir::new().unwrap();
    let data = path(&dir, "data");
    ok(&["synth", "sphere", "-n", "60", "--seed", "1", "-o", &data]);
    let input = format!("{data}/points.csv");
    let (one, four) = (path(&dir, "one"), path(&dir, "four"));
    let out = Command::new(env!("CARGO_BIN_EXE_sphcoords"))
        .args(["map", "-i", &input, "--max-scale", "0.7", "-o", &one])
        .env("SPHCOORDS_THREADS", "1")
        .output()
        .unwrap();
    assert!(out.status.success());
    ok(&[
        "--threads",
        "4",
        "map",
        "-i",
        &input,
        "--max-scale",
        "0.7",
        "-o",
        &four,
    ]);
    for f in ["coordinates.csv", "energy.csv", "report.json", "state.json"] {
        assert_eq!(
            read(format!("{one}/{f}")),
            read(format!("{four}/{f}")),
            "{f}"
        );
    }
}

#[test]
fn circle_map_recovers_angles() {
    let dir = TempDir::new().unwrap();
    let data = path(&dir, "data");
    ok(&["synth", "circle", "-n", "40", "-o", &data]);
    let run = path(&dir, "run");
    ok(&[
        "map",
        "-i",
        &format!("{data}/points.csv"),
        "--dim",
        "1",
        "-o",
        &run,
    ]);
    let metrics = path(&dir, "metrics.json");
    ok(&[
        "eval",
        "--coords",
        &format!("{run}/coordinates.csv"),
        "--truth",
        &format!("{data}/truth.csv"),
        "--kind",
        "circle",
        "--out",
        &metrics,
    ]);
    let m: serde_json::Value = serde_json::from_str(&read(&metrics)).unwrap();
    assert!(m["rms_geodesic"].as_f64().unwrap() < 1e-6);
    assert_eq!(
        code(&[
            "eval",
            "--coords",
            &format!("{run}/coordinates.csv"),
            "--truth",
            &format!("{data}/truth.csv"),
            "--kind",
            "sphere"
        ]),
        2
    );
    ok(&[
        "map",
        "-i",
        &format!("{data}/points.csv"),
        "--dim",
        "1",
        "--energy",
        "spring",
        "--k",
        "2",
        "--rest",
        "auto",
        "-o",
        &run,
    ]);
}

#[test]
fn eval_against_itself() {
    let dir = TempDir::new().unwrap();
    let data = path(&dir, "data");
    ok(&["synth", "sphere", "-n", "30", "-o", &data]);
    let truth = format!("{data}/truth.csv");
    let out = sphcoords(&["eval", "--coords", &truth, "--truth", &truth]);
    assert!(out.status.success());
    let m: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(m["rms_geodesic"].as_f64().unwrap() < 1e-9);
    assert_eq!(m["n"], 30);
}

#[test]
fn prune_thresholds() {
    let dir = TempDir::new().unwrap();
    let input = octahedron(&dir);
    let run = path(&dir, "run");
    ok(&["map", "-i", &input, "-o", &run]);
    let state = format!("{run}/state.json");
    let pruned = path(&dir, "pruned");
    ok(&[
        "prune",
        "--state",
        &state,
        "--threshold",
        "0",
        "-o",
        &pruned,
    ]);
    let r: serde_json::Value =
        serde_json::from_str(&read(format!("{pruned}/report.json"))).unwrap();
    assert_eq!(r["faces_before"], r["faces_after"]);
    assert_eq!(r["threshold"], 0.0);
    ok(&["prune", "--state", &state, "-o", &pruned]);
    let r: serde_json::Value =
        serde_json::from_str(&read(format!("{pruned}/report.json"))).unwrap();
    assert_eq!(r["threshold"], 0.01);
    assert_eq!(
        code(&[
            "prune",
            "--state",
            &state,
            "--threshold",
            "100",
            "-o",
            &pruned
        ]),
        3
    );
}

#[test]
fn exit_codes() {
    let dir = TempDir::new().unwrap();
    let empty = path(&dir, "empty.csv");
    fs::write(&empty, "").unwrap();
    let out = path(&dir, "out");
    assert_eq!(code(&["barcode", "-i", &empty, "-o", &out]), 2);
    assert_eq!(
        code(&["map", "-i", &path(&dir, "missing.csv"), "-o", &out]),
        2
    );
    assert_eq!(code(&["map"]), 2);
    let input = octahedron(&dir);
    assert_eq!(code(&["map", "-i", &input, "--prime", "45", "-o", &out]), 2);
    assert_eq!(code(&["map", "-i", &input, "--dim", "1", "-o", &out]), 3);
    assert_eq!(
        code(&["map", "-i", &input, "--max-scale", "1", "-o", &out]),
        3
    );
    assert_eq!(
        code(&["map", "-i", &input, "--max-iters", "3", "-o", &out]),
        4
    );
    assert!(Path::new(&format!("{out}/coordinates.csv")).exists());
    assert_eq!(
        code(&[
            "map",
            "-i",
            &input,
            "--max-iters",
            "3",
            "--allow-unconverged",
            "-o",
            &out
        ]),
        0
    );
}
