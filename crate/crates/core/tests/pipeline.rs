use qetlab::eigensolve::dump;
use qetlab::eigensolve::{ground_state, Method};
use qetlab::entanglement::half_chain_entropy;
use qetlab::models::{build_cluster, build_ising, Boundary, ModelDescription, ModelKind};
use qetlab::qet::{evaluate, QetConfig};
use qetlab::sweep::{run_sweep, Metric, SweepGrid, SweepSpec};
use qetlab::{table1, Axis};

#[test]
fn calibrated_model_survives_json_and_gives_the_same_energies() {
    let bare = build_cluster(6, 0.6f64, 0.0, true, Boundary::Open).unwrap();
    let g = ground_state(&bare, Method::Dense).unwrap();
    let model = bare.calibrate(&g).unwrap();
    let json = model.describe().to_json().unwrap();
    let back = ModelDescription::from_json(&json).unwrap().build::<f64>().unwrap();
    assert!(back.is_calibrated());
    assert_eq!(back.epsilon(), model.epsilon());

    let cfg = QetConfig::default();
    let a = evaluate(&g, &model, &cfg).unwrap();
    let b = evaluate(&g, &back, &cfg).unwrap();
    assert_eq!(a.csv_row(), b.csv_row());
    assert!((a.e_analytic + 0.002610).abs() < 5e-6);
}

#[test]
fn dumped_ground_state_reloads_bit_exact() {
    let model = build_ising(5, 0.9f64, 0.2, Axis::Z, Boundary::Periodic).unwrap();
    let g = ground_state(&model, Method::Dense).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("g.bin");
    dump::save(&path, g.as_slice()).unwrap();
    let (n, amps) = dump::load(&path).unwrap();
    assert_eq!(n, 5);
    assert_eq!(amps.as_slice(), g.as_slice());
}

#[test]
fn lanczos_and_dense_agree_on_the_protocol() {
    let bare = build_cluster(8, 1.0f64, 0.5, true, Boundary::Open).unwrap();
    let dense = ground_state(&bare, Method::Dense).unwrap();
    let lanczos = ground_state(&bare, Method::Lanczos).unwrap();
    assert!((dense.energy - lanczos.energy).abs() < 1e-9);
    let cfg = QetConfig::new(2, 5, Axis::X, Axis::Y);
    let a = evaluate(&dense, &bare.calibrate(&dense).unwrap(), &cfg).unwrap();
    let b = evaluate(&lanczos, &bare.calibrate(&lanczos).unwrap(), &cfg).unwrap();
    assert!((a.e_analytic - b.e_analytic).abs() < 1e-8);
    assert!((a.theta - b.theta).abs() < 1e-7);
}

#[test]
fn small_sweep_round_trips_through_csv() {
    let spec = SweepSpec::for_family(ModelKind::ClusterZz).unwrap().with_resolution(3);
    let spec = SweepSpec::from_json(&spec.to_json().unwrap()).unwrap();
    let out = run_sweep(&spec).unwrap();
    for metric in [Metric::Entropy, Metric::QetEnergy] {
        let grid = out.grid(metric).unwrap();
        let back = SweepGrid::parse(&grid.to_csv()).unwrap();
        assert_eq!(back.to_csv(), grid.to_csv());
        let model = ModelDescription::from_json(&back.metadata["model"]).unwrap();
        assert_eq!(model.name, ModelKind::ClusterZz);
    }
    // cell (J1, J2) = (1, 1) against a direct evaluation
    let s = out.grid(Metric::Entropy).unwrap().get(1, 1);
    let bare = build_cluster(6, 1.0f64, 1.0, true, Boundary::Open).unwrap();
    let g = ground_state(&bare, Method::Dense).unwrap();
    assert!((s - half_chain_entropy(g.as_slice(), 6).unwrap()).abs() < 1e-12);
}

#[test]
fn table_exact_rows_are_self_consistent() {
    let table = table1::exact_table().unwrap();
    for p in &table {
        assert!(p.qet.identity_residual() < 1e-12);
        assert!(p.qet.e_analytic < 0.0);
    }
    let csv = table1::to_csv(&table);
    assert!(csv.starts_with(table1::CSV_HEADER));
}

#[test]
fn f32_instantiation_runs_end_to_end() {
    let bare = build_cluster::<f32>(6, 1.0, 0.0, true, Boundary::Open).unwrap();
    let g = ground_state(&bare, Method::Dense).unwrap();
    let r: qetlab::qet::QetResult<f32> = evaluate(&g, &bare.calibrate(&g).unwrap(), &QetConfig::default()).unwrap();
    assert!((r.theta - 0.0145).abs() < 1e-3);
    assert!((r.e_analytic + 0.000824).abs() < 1e-4);
}
