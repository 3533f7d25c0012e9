use std::process::{Command, Output};

fn qetlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qetlab")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn qet_row_for_the_table_model() {
    let o = qetlab(&["qet", "--model", "cluster_zz", "--J1", "1.0", "--J2", "0"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("xi,eta,theta,p_plus,e_analytic,e_density_matrix,e_injected"));
    let row: Vec<f64> = lines.next().unwrap().split(',').map(|v| v.parse().unwrap()).collect();
    assert!((row[2] - 0.0145).abs() < 5e-4);
    assert!((row[4] + 0.000824).abs() < 5e-6);
    assert!((row[4] - row[5]).abs() < 1e-12);
}

#[test]
fn zz_flag_is_the_same_as_the_cluster_zz_family() {
    let a = qetlab(&["qet", "--model", "cluster", "--zz", "--J1", "0.4", "--J2", "0"]);
    let b = qetlab(&["qet", "--model", "cluster_zz", "--J1", "0.4", "--J2", "0"]);
    assert_eq!(stdout(&a), stdout(&b));
}

#[test]
fn usage_and_input_errors_exit_with_two() {
    assert_eq!(qetlab(&["--bogus"]).status.code(), Some(2));
    let o = qetlab(&["entropy", "--N", "0"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("error:"));
    assert_eq!(qetlab(&["qet", "--N", "4", "--nB", "4"]).status.code(), Some(2));
}

#[test]
fn runtime_failures_exit_with_one() {
    let o = qetlab(&["sweep", "--config", "/definitely/not/here.json"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn entropy_of_the_ring_cluster_state() {
    // y_cluster at h_y = J_y = 0 is -sum X Z X: the ring cluster state, one ebit per cut point
    let o = qetlab(&[
        "entropy",
        "--model",
        "y_cluster",
        "--N",
        "6",
        "--hy",
        "0",
        "--Jy",
        "0",
        "--boundary",
        "periodic",
        "--base",
        "2",
    ]);
    assert!(o.status.success());
    let s: f64 = stdout(&o).trim().parse().unwrap();
    assert!((s - 2.0).abs() < 1e-9, "{s}");
}

#[test]
fn sweep_writes_a_parsable_grid_to_out() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("grid.csv");
    let o = qetlab(&[
        "--out",
        path.to_str().unwrap(),
        "sweep",
        "--model",
        "ising",
        "--resolution",
        "2",
        "--metric",
        "entropy",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&path).unwrap();
    let grid = qetlab::sweep::SweepGrid::parse(&text).unwrap();
    assert_eq!((grid.x.len(), grid.y.len()), (2, 2));
    assert_eq!(grid.metadata["x_param"], "h_x");
    assert!(!grid.metadata.contains_key("timestamp"));
    let header = text.lines().position(|l| l == "x,y,value").unwrap();
    assert!(text.lines().take(header).all(|l| l.starts_with("# ")));
}

#[test]
fn sweep_with_both_metrics_writes_two_files() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("plane.csv");
    let o = qetlab(&["--out", path.to_str().unwrap(), "sweep", "--resolution", "2", "--metric", "both"]);
    assert!(o.status.success());
    for name in ["plane.entropy.csv", "plane.qet_energy.csv"] {
        assert!(dir.path().join(name).exists(), "{name}");
    }
}

#[test]
fn table1_is_reproducible_for_a_seed() {
    let args = ["table1", "--shots", "20000", "--seed", "3"];
    let a = qetlab(&args);
    assert!(a.status.success());
    assert_eq!(stdout(&a), stdout(&qetlab(&args)));
    let text = stdout(&a);
    assert_eq!(text.lines().next(), Some("observable,mean,std_error,shots,seed,J1,J2,model"));
    assert_eq!(text.lines().count(), 1 + 10 * 5);
    assert!(text.lines().skip(1).filter(|l| l.starts_with("H_nB,")).all(|l| l.contains(",20000,3,")));
}

#[test]
fn check_passes_on_the_default_model() {
    let o = qetlab(&["check", "--J1", "0.8", "--J2", "0.3"]);
    assert!(o.status.success(), "{}", stdout(&o));
    assert!(stdout(&o).lines().all(|l| l.starts_with("PASS") || l.starts_with("SKIP")));
}
