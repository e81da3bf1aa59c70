use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use nalgebra::{DMatrix, DVector};
use narrowcap::{Activation, Layer, Network};

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_narrowcap"));
    cmd.env_remove("NARROWCAP_TOL");
    cmd
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn uuac_line(text: &str) -> f64 {
    text.lines()
        .find_map(|l| l.strip_prefix("UUAC "))
        .expect("UUAC line")
        .parse()
        .unwrap()
}

fn data(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/data")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn fit_two_class_on_the_quadrant_example() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("net.json");
    let o = run(&[
        "fit-two-class",
        "--k1",
        &data("quadrant_k1.csv"),
        "--k2",
        &data("quadrant_k2.csv"),
        "--out",
        s(&out),
    ]);
    assert!(o.status.success(), "{o:?}");
    assert!(uuac_line(&stdout(&o)) <= 1e-9, "{}", stdout(&o));
    let net = Network::read(&out).unwrap();
    assert!(
        (net.forward_scalar(&DVector::from_vec(vec![1.0, 1.0]))
            .unwrap()
            - 1.0)
            .abs()
            <= 1e-9
    );
    assert!(
        net.forward_scalar(&DVector::from_vec(vec![-1.0, -1.0]))
            .unwrap()
            .abs()
            <= 1e-9
    );
}

#[test]
fn verify_max_flags_the_tent_counterexample() {
    let dir = tempfile::tempdir().unwrap();
    // 1 - ReLU(x - 0.5) - ReLU(0.5 - x): width 2 on a 1-D input.
    let tent = Network::new(
        vec![Layer::new(
            DMatrix::from_column_slice(2, 1, &[1.0, -1.0]),
            DVector::from_vec(vec![-0.5, 0.5]),
            Activation::Relu,
        )
        .unwrap()],
        DMatrix::from_row_slice(1, 2, &[-1.0, -1.0]),
        DVector::from_element(1, 1.0),
    )
    .unwrap();
    let path = write(dir.path(), "tent.json", &tent.to_json());
    let o = run(&[
        "verify-max",
        "--net",
        &path,
        "--box",
        "0,1",
        "--step",
        "0.01",
    ]);
    assert_eq!(o.status.code(), Some(2), "{o:?}");
    let text = stdout(&o);
    assert!(text.contains("maximum witness: 0.5"), "{text}");

    let identity = write(
        dir.path(),
        "id.json",
        &Network::identity(1).unwrap().to_json(),
    );
    let o = run(&["verify-max", "--net", &identity, "--box", "0:1"]);
    assert_eq!(o.status.code(), Some(0), "{o:?}");
}

#[test]
fn experiment_writes_its_artifacts_reproducibly() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        let o = run(&[
            "experiment",
            "--balls",
            "6",
            "--seed",
            "1",
            "--epochs",
            "3",
            "--out",
            s(out),
        ]);
        assert!(o.status.success(), "{o:?}");
    }
    for name in [
        "dataset.csv",
        "history.csv",
        "network.json",
        "snapshots.json",
        "config.json",
    ] {
        let x = std::fs::read(a.join(name)).unwrap();
        assert!(!x.is_empty());
        assert_eq!(x, std::fs::read(b.join(name)).unwrap(), "{name}");
    }
    let history = std::fs::read_to_string(a.join("history.csv")).unwrap();
    assert_eq!(history.lines().count(), 5);
}

#[test]
fn full_experiment_smoke_run() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&[
        "experiment",
        "--balls",
        "6",
        "--seed",
        "1",
        "--out",
        s(dir.path()),
    ]);
    assert!(o.status.success(), "{o:?}");
    let history = std::fs::read_to_string(dir.path().join("history.csv")).unwrap();
    assert_eq!(history.lines().count(), 502);
    let snaps: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("snapshots.json")).unwrap())
            .unwrap();
    assert_eq!(snaps.as_array().unwrap().len(), 9);
}

#[test]
fn collapse_and_its_search_failure() {
    let dir = tempfile::tempdir().unwrap();
    let k = write(dir.path(), "k.csv", "2,0\n2.5,0.5\n");
    let m = write(dir.path(), "m.csv", "0,0\n-1,1\n");
    let out = dir.path().join("c.json");
    let o = run(&[
        "collapse",
        "--k",
        &k,
        "--m",
        &m,
        "--eps",
        "0.01",
        "--out",
        s(&out),
    ]);
    assert!(o.status.success(), "{o:?}");
    assert!(stdout(&o).contains("collapsed point:"));
    assert!(out.exists());

    let overlapping = write(dir.path(), "o.csv", "0,0\n3,0\n");
    let o = run(&["collapse", "--k", &k, "--m", &overlapping, "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(3), "{o:?}");
}

#[test]
fn fit_multi_finite_and_cos() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("n.json");
    let multi = write(
        dir.path(),
        "multi.csv",
        "x,y,t\n0,0,0\n0.1,0,0\n1,1.5,1\n1.1,1.5,1\n2,0,2\n2.1,0.1,2\n",
    );
    let o = run(&["fit-multi", "--data", &multi, "--out", s(&out)]);
    assert!(o.status.success(), "{o:?}");
    assert!(uuac_line(&stdout(&o)) <= 1e-7, "{}", stdout(&o));

    let finite = write(dir.path(), "finite.csv", "0,0,1\n1,0,-2\n0,1,3\n1,1,0.5\n");
    let o = run(&["fit-finite", "--data", &finite, "--out", s(&out)]);
    assert!(o.status.success(), "{o:?}");

    let points = write(dir.path(), "p.csv", "0\n0.4\n1\n");
    let targets = write(dir.path(), "t.csv", "0.5\n-1\n2\n");
    let o = run(&[
        "fit-cos",
        "--points",
        &points,
        "--targets",
        &targets,
        "--eps",
        "0.05",
        "--seed",
        "3",
        "--out",
        s(&out),
    ]);
    assert!(o.status.success(), "{o:?}");
    let net = Network::read(&out).unwrap();
    assert_eq!(net.width(), 1);
    for (x, t) in [(0.0, 0.5), (0.4, -1.0), (1.0, 2.0)] {
        assert!((net.forward_scalar(&DVector::from_element(1, x)).unwrap() - t).abs() < 0.05);
    }
}

#[test]
fn render_and_snapshots() {
    let dir = tempfile::tempdir().unwrap();
    let data = write(dir.path(), "d.csv", "0.1,0.2,0\n0.9,0.4,0\n0.5,0.5,1\n");
    let net = write(
        dir.path(),
        "net.json",
        &narrowcap::experiment::TrainConfig::default()
            .initial_network(2)
            .unwrap()
            .to_json(),
    );
    let svg = dir.path().join("d.svg");
    let o = run(&[
        "render",
        "--data",
        &data,
        "--net",
        &net,
        "--resolution",
        "8",
        "--out",
        s(&svg),
    ]);
    assert!(o.status.success(), "{o:?}");
    let doc = std::fs::read_to_string(&svg).unwrap();
    assert_eq!(doc.matches("<circle").count(), 3);
    assert_eq!(doc.matches("<rect").count(), 65);

    let json = dir.path().join("s.json");
    let svgs: PathBuf = dir.path().join("stages");
    let o = run(&[
        "snapshots",
        "--net",
        &net,
        "--data",
        &data,
        "--out",
        s(&json),
        "--svg-dir",
        s(&svgs),
    ]);
    assert!(o.status.success(), "{o:?}");
    // Seven planar stages: the input and three affine/ReLU pairs.
    assert_eq!(std::fs::read_dir(&svgs).unwrap().count(), 7);
}

#[test]
fn usage_and_io_errors_exit_with_one() {
    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(
        run(&[
            "fit-finite",
            "--data",
            "/no/such/file.csv",
            "--out",
            "/tmp/x.json"
        ])
        .status
        .code(),
        Some(1)
    );
    let o = bin()
        .env("NARROWCAP_TOL", "not-a-number")
        .args(["verify-max", "--net", "x.json"])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
}
