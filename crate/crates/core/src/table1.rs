//! Exact and sampled reproduction of the five-point `J1` scan on the
//! cluster chain with `1/2 ZZ` bonds (`N = 6`, `J2 = 0`, open boundary,
//! `sigma_A = X_1`, `sigma_B = Y_4`).
//!
//! Rows follow the order X X, X X, Z Z, Z Z, Z at Bob's site, then `<H_{n_B}>`
//! (sampled), `<H_{n_B}>_exact`, `epsilon_{n_B}` and `theta`. `Y_{n_B}` is
//! sampled and reported after them; it does not enter the energy.

use std::fmt::Write as _;

use serde::Serialize;

use crate::eigensolve::{ground_state, GroundState, Method};
use crate::error::Result;
use crate::models::{build_cluster, Boundary, ModelKind, SpinChainModel};
use crate::pauli::{Axis, OperatorSum, PauliTerm};
use crate::qet::{branch_states, ensemble_expectation, evaluate, QetConfig, QetResult};
use crate::shots::{estimate_bob_energy, estimate_observable, ProtocolRun, ShotEstimate};

pub const J1_VALUES: [f64; 5] = [0.2, 0.4, 0.6, 0.8, 1.0];
pub const N_SITES: usize = 6;
pub const DEFAULT_SHOTS: u64 = 10_000_000;
/// Stream family of observables that are not terms of `H_{n_B}`.
const EXTRA_STREAMS: u32 = 64;

pub fn config() -> QetConfig {
    QetConfig::new(1, 4, Axis::X, Axis::Y)
}

pub fn model(j1: f64) -> Result<SpinChainModel<f64>> {
    build_cluster(N_SITES, j1, 0.0, true, Boundary::Open)
}

/// Pauli strings reported per point, in row order.
pub fn observables(n_b: usize) -> Vec<PauliTerm<f64>> {
    let (l, b, r) = (n_b - 1, n_b, n_b + 1);
    vec![
        PauliTerm::real(1.0, [(l, Axis::X), (b, Axis::X)]),
        PauliTerm::real(1.0, [(b, Axis::X), (r, Axis::X)]),
        PauliTerm::real(1.0, [(l, Axis::Z), (b, Axis::Z)]),
        PauliTerm::real(1.0, [(b, Axis::Z), (r, Axis::Z)]),
        PauliTerm::real(1.0, [(b, Axis::Z)]),
        PauliTerm::real(1.0, [(b, Axis::Y)]),
    ]
}

#[derive(Clone, Debug, Serialize)]
pub struct Table1Point {
    pub j1: f64,
    pub j2: f64,
    pub epsilon_b: f64,
    pub qet: QetResult<f64>,
    /// `(label, Tr[rho O])` in row order.
    pub exact: Vec<(String, f64)>,
    pub sampled: Option<SampledColumn>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SampledColumn {
    pub seed: u64,
    pub observables: Vec<ShotEstimate>,
    pub energy: ShotEstimate,
}

pub fn exact_point(j1: f64) -> Result<(Table1Point, SpinChainModel<f64>, GroundState<f64>)> {
    let bare = model(j1)?;
    let ground = ground_state(&bare, Method::Dense)?;
    let calibrated = bare.calibrate(&ground)?;
    let cfg = config();
    let qet = evaluate(&ground, &calibrated, &cfg)?;
    let branches = branch_states(ground.as_slice(), N_SITES, &cfg, qet.theta)?;
    let exact = observables(cfg.n_b)
        .into_iter()
        .map(|o| {
            let op = OperatorSum::from_term(N_SITES, o.clone())?;
            Ok((o.label(), ensemble_expectation(&branches, &op)?.re))
        })
        .collect::<Result<Vec<_>>>()?;
    let epsilon_b = calibrated.epsilon().expect("calibrated")[cfg.n_b];
    let point = Table1Point { j1, j2: 0.0, epsilon_b, qet, exact, sampled: None };
    Ok((point, calibrated, ground))
}

/// Exact column plus `shots` samples per observable.
///
/// The energy is assembled from the sampled terms of `H_{n_B}`, and the
/// reported correlators are those same samples, so the rows add up.
pub fn sampled_point(j1: f64, shots: u64, seed: u64) -> Result<Table1Point> {
    let (mut point, calibrated, ground) = exact_point(j1)?;
    let cfg = config();
    let run = ProtocolRun::new(&calibrated, &ground, cfg, point.qet.theta).with_shots(shots).with_seed(seed);
    let bob = estimate_bob_energy(&run, 0)?;
    let mut sampled = Vec::new();
    for (i, o) in observables(cfg.n_b).iter().enumerate() {
        let label = o.label();
        match bob.terms.iter().find(|(_, e)| e.observable == label) {
            Some((_, e)) => sampled.push(e.clone()),
            None => sampled.push(estimate_observable(&run, o, EXTRA_STREAMS + i as u32)?),
        }
    }
    point.sampled = Some(SampledColumn { seed, observables: sampled, energy: bob.energy });
    Ok(point)
}

pub fn exact_table() -> Result<Vec<Table1Point>> {
    J1_VALUES.iter().map(|&j1| exact_point(j1).map(|p| p.0)).collect()
}

pub fn sampled_table(shots: u64, seed: u64) -> Result<Vec<Table1Point>> {
    J1_VALUES.iter().map(|&j1| sampled_point(j1, shots, seed)).collect()
}

pub const CSV_HEADER: &str = "observable,mean,std_error,shots,seed,J1,J2,model";

struct Row<'a> {
    label: String,
    mean: f64,
    std_error: f64,
    shots: u64,
    seed: Option<u64>,
    point: &'a Table1Point,
}

impl<'a> Row<'a> {
    fn exact(label: &str, mean: f64, point: &'a Table1Point) -> Self {
        Self { label: label.to_string(), mean, std_error: 0.0, shots: 0, seed: None, point }
    }

    fn sampled(e: &ShotEstimate, label: &str, seed: u64, point: &'a Table1Point) -> Self {
        Self { label: label.to_string(), mean: e.mean, std_error: e.std_error, shots: e.shots, seed: Some(seed), point }
    }
}

fn observable_rows(points: &[Table1Point], row: usize) -> impl Iterator<Item = Row<'_>> {
    points.iter().map(move |p| match &p.sampled {
        Some(s) => Row::sampled(&s.observables[row], &p.exact[row].0, s.seed, p),
        None => Row::exact(&p.exact[row].0, p.exact[row].1, p),
    })
}

/// Long-format CSV: every row of the table across all points, row by row.
/// Exact-only entries have zero shots, zero error and an empty seed.
pub fn to_csv(points: &[Table1Point]) -> String {
    let n_rows = points.first().map_or(0, |p| p.exact.len());
    let energy_terms = n_rows.saturating_sub(1);
    let mut rows: Vec<Row<'_>> = (0..energy_terms).flat_map(|r| observable_rows(points, r)).collect();
    rows.extend(points.iter().map(|p| match &p.sampled {
        Some(s) => Row::sampled(&s.energy, "H_nB", s.seed, p),
        None => Row::exact("H_nB", p.qet.e_density_matrix, p),
    }));
    rows.extend(points.iter().map(|p| Row::exact("H_nB_exact", p.qet.e_analytic, p)));
    rows.extend(points.iter().map(|p| Row::exact("eps", p.epsilon_b, p)));
    rows.extend(points.iter().map(|p| Row::exact("theta", p.qet.theta, p)));
    rows.extend((energy_terms..n_rows).flat_map(|r| observable_rows(points, r)));

    let model_name = ModelKind::ClusterZz.as_str();
    let mut out = format!("{CSV_HEADER}\n");
    for r in rows {
        let seed = r.seed.map(|s| s.to_string()).unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{:.6e},{:.6e},{},{seed},{},{},{model_name}",
            r.label, r.mean, r.std_error, r.shots, r.point.j1, r.point.j2
        );
    }
    out
}
