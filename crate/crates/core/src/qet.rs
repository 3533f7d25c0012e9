//! The teleportation protocol: Alice measures `sigma_A` at `n_A`, Bob applies
//! `U(mu) = cos(theta) I - i mu sin(theta) sigma_B` at `n_B` and the energy of
//! `H_{n_B}` drops below its ground value.
//!
//! `theta` follows the branch `theta = atan2(eta, xi) / 2`, which minimizes
//! `Tr[rho H_{n_B}] = xi sin^2(theta) - eta sin(theta) cos(theta)`.

use std::collections::BTreeSet;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::eigensolve::GroundState;
use crate::error::{Error, Result};
use crate::models::{check_commutator_condition, SpinChainModel};
use crate::pauli::{check_normalized, commutator, Axis, OperatorSum, PauliTerm};
use crate::scalar::{c, cr, Real, C};

/// Largest chain for which `rho_qet` materializes the density matrix.
pub const RHO_DENSE_MAX: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct QetConfig {
    #[serde(rename = "n_A")]
    pub n_a: usize,
    #[serde(rename = "n_B")]
    pub n_b: usize,
    #[serde(rename = "axis_A")]
    pub axis_a: Axis,
    #[serde(rename = "axis_B")]
    pub axis_b: Axis,
}

impl Default for QetConfig {
    fn default() -> Self {
        Self { n_a: 1, n_b: 4, axis_a: Axis::X, axis_b: Axis::Y }
    }
}

impl QetConfig {
    pub fn new(n_a: usize, n_b: usize, axis_a: Axis, axis_b: Axis) -> Self {
        Self { n_a, n_b, axis_a, axis_b }
    }

    pub fn validate(&self, n_sites: usize) -> Result<()> {
        if self.n_a == self.n_b {
            return Err(Error::Invalid(format!("n_A and n_B must differ (both {})", self.n_a)));
        }
        for (name, site) in [("n_A", self.n_a), ("n_B", self.n_b)] {
            if site >= n_sites {
                return Err(Error::OutOfRange(format!("{name}={site} on a {n_sites}-site chain")));
            }
        }
        Ok(())
    }

    pub fn sigma_a<T: Real>(&self, n_sites: usize) -> Result<OperatorSum<T>> {
        OperatorSum::from_term(n_sites, PauliTerm::single(cr(T::one()), self.n_a, self.axis_a))
    }

    pub fn sigma_b<T: Real>(&self, n_sites: usize) -> Result<OperatorSum<T>> {
        OperatorSum::from_term(n_sites, PauliTerm::single(cr(T::one()), self.n_b, self.axis_b))
    }
}

/// Alice's measurement outcome.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Outcome {
    Plus,
    Minus,
}

impl Outcome {
    pub const BOTH: [Outcome; 2] = [Outcome::Plus, Outcome::Minus];

    pub fn sign(self) -> i8 {
        match self {
            Outcome::Plus => 1,
            Outcome::Minus => -1,
        }
    }

    pub fn from_sign(mu: i8) -> Result<Self> {
        match mu {
            1 => Ok(Outcome::Plus),
            -1 => Ok(Outcome::Minus),
            other => Err(Error::Invalid(format!("outcome must be +1 or -1, got {other}"))),
        }
    }

    fn factor<T: Real>(self) -> T {
        T::lit(self.sign() as f64)
    }
}

/// `(I + mu sigma) / 2` on `site`.
pub fn projector<T: Real>(axis: Axis, site: usize, mu: Outcome, n_qubits: usize) -> Result<OperatorSum<T>> {
    let half = T::lit(0.5);
    OperatorSum::from_terms(
        n_qubits,
        [PauliTerm::identity(cr(half)), PauliTerm::single(cr(half * mu.factor::<T>()), site, axis)],
    )
}

/// `cos(theta) I - i mu sin(theta) sigma` on `site`.
pub fn conditional_unitary<T: Real>(
    theta: T,
    axis: Axis,
    site: usize,
    mu: Outcome,
    n_qubits: usize,
) -> Result<OperatorSum<T>> {
    OperatorSum::from_terms(
        n_qubits,
        [
            PauliTerm::identity(cr(theta.cos())),
            PauliTerm::single(c(T::zero(), -mu.factor::<T>() * theta.sin()), site, axis),
        ],
    )
    .map(|u| u.canonicalize())
}

#[derive(Clone, Debug)]
pub struct HeisenbergDerivative<T: Real> {
    /// `i [H, sigma_B]`, canonical.
    pub operator: OperatorSum<T>,
    pub support: BTreeSet<usize>,
}

pub fn heisenberg_derivative<T: Real>(
    model: &SpinChainModel<T>,
    config: &QetConfig,
) -> Result<HeisenbergDerivative<T>> {
    config.validate(model.n_sites())?;
    let sigma = config.sigma_b(model.n_sites())?;
    let operator = commutator(model.bulk_terms(), &sigma)?.scale(c(T::zero(), T::one())).canonicalize();
    let support = operator.support();
    Ok(HeisenbergDerivative { operator, support })
}

/// `<g| sigma_B (H - E0) sigma_B |g>`.
pub fn xi<T: Real>(ground: &GroundState<T>, model: &SpinChainModel<T>, config: &QetConfig) -> Result<T> {
    config.validate(model.n_sites())?;
    let shifted = model.shifted_hamiltonian()?;
    let g = ground.as_slice();
    check_normalized(g)?;
    let kicked = config.sigma_b(model.n_sites())?.apply(g)?;
    Ok(shifted.expectation_raw(&kicked)?.re)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Eta<T: Real> {
    pub re: T,
    pub im: T,
    /// `n_A` lies outside the support of `i [H, sigma_B]`, which makes `eta` real.
    pub support_disjoint: bool,
}

impl<T: Real> Eta<T> {
    /// A warning when the imaginary part is not negligible.
    pub fn warning(&self) -> Option<String> {
        (self.im.abs() > T::contract_tol()).then(|| {
            format!(
                "eta has imaginary part {:e}; sigma_A overlaps the support of the Heisenberg derivative",
                self.im.to_f64_lossy()
            )
        })
    }
}

/// `<g| sigma_A i[H, sigma_B] |g>`.
pub fn eta<T: Real>(ground: &GroundState<T>, model: &SpinChainModel<T>, config: &QetConfig) -> Result<Eta<T>> {
    let derivative = heisenberg_derivative(model, config)?;
    let g = ground.as_slice();
    check_normalized(g)?;
    let moved = derivative.operator.apply(g)?;
    let probe = config.sigma_a(model.n_sites())?.apply(g)?;
    let value = probe.iter().zip(&moved).fold(cr(T::zero()), |acc, (a, b)| acc + a.conj() * b);
    Ok(Eta { re: value.re, im: value.im, support_disjoint: !derivative.support.contains(&config.n_a) })
}

/// `atan2(eta, xi) / 2` in `(-pi/2, pi/2]`, zero when both vanish.
pub fn theta<T: Real>(xi: T, eta: T) -> T {
    if xi == T::zero() && eta == T::zero() {
        return T::zero();
    }
    eta.atan2(xi) * T::lit(0.5)
}

/// `(xi - sqrt(xi^2 + eta^2)) / 2`.
///
/// Evaluated as `-eta^2 / (2 (xi + r))` to avoid cancellation, so the result is
/// strictly negative whenever `|eta|` exceeds the pruning tolerance and exactly
/// zero otherwise.
pub fn teleported_energy_analytic<T: Real>(xi: T, eta: T) -> T {
    if eta.abs() <= T::prune_tol() {
        return T::zero();
    }
    let r = xi.hypot(eta);
    let denom = xi + r;
    if denom > T::zero() {
        -(eta * eta) / (denom + denom)
    } else {
        (xi - r) * T::lit(0.5)
    }
}

/// `U(mu) P(mu) |g>` for both outcomes; their norms squared are the Born weights.
pub fn branch_states<T: Real>(
    ground: &[C<T>],
    n_qubits: usize,
    config: &QetConfig,
    theta: T,
) -> Result<[Vec<C<T>>; 2]> {
    config.validate(n_qubits)?;
    check_normalized(ground)?;
    let branch = |mu: Outcome| -> Result<Vec<C<T>>> {
        let projected = projector(config.axis_a, config.n_a, mu, n_qubits)?.apply(ground)?;
        conditional_unitary(theta, config.axis_b, config.n_b, mu, n_qubits)?.apply(&projected)
    };
    Ok([branch(Outcome::Plus)?, branch(Outcome::Minus)?])
}

/// `sum_mu U(mu) P(mu) |g><g| P(mu) U(mu)^dagger`.
pub fn rho_qet<T: Real>(ground: &GroundState<T>, config: &QetConfig, theta: T) -> Result<DMatrix<C<T>>> {
    let n = ground.n_qubits();
    if n > RHO_DENSE_MAX {
        return Err(Error::Size(format!("density matrix of {n} qubits exceeds the limit of {RHO_DENSE_MAX}")));
    }
    let dim = 1usize << n;
    let mut rho = DMatrix::<C<T>>::zeros(dim, dim);
    for b in branch_states(ground.as_slice(), n, config, theta)? {
        for j in 0..dim {
            let bj = b[j].conj();
            if bj == cr(T::zero()) {
                continue;
            }
            for i in 0..dim {
                rho[(i, j)] += b[i] * bj;
            }
        }
    }
    Ok(rho)
}

/// `Tr[rho O]` for a dense density matrix.
pub fn trace_with<T: Real>(rho: &DMatrix<C<T>>, op: &OperatorSum<T>) -> Result<C<T>> {
    if rho.nrows() != op.dim() || rho.ncols() != op.dim() {
        return Err(Error::Dimension(format!(
            "{}x{} density matrix for a {}-qubit operator",
            rho.nrows(),
            rho.ncols(),
            op.n_qubits()
        )));
    }
    let o = op.to_matrix_with_limit(RHO_DENSE_MAX)?;
    Ok(rho.component_mul(&o.transpose()).sum())
}

/// `Tr[rho H_{n_B}]` with `H_{n_B}` including `epsilon_{n_B}`.
pub fn teleported_energy_dm<T: Real>(rho: &DMatrix<C<T>>, model: &SpinChainModel<T>, n_b: usize) -> Result<T> {
    require_offsets(model)?;
    Ok(trace_with(rho, &model.local_hamiltonian(n_b)?)?.re)
}

/// `sum_mu <b_mu| O |b_mu>` over the branch states; equals `Tr[rho O]`.
pub fn ensemble_expectation<T: Real>(branches: &[Vec<C<T>>; 2], op: &OperatorSum<T>) -> Result<C<T>> {
    Ok(op.expectation_raw(&branches[0])? + op.expectation_raw(&branches[1])?)
}

/// `sum_mu <g| P(mu) (H - E0) P(mu) |g>`.
pub fn injected_energy<T: Real>(ground: &GroundState<T>, model: &SpinChainModel<T>, config: &QetConfig) -> Result<T> {
    config.validate(model.n_sites())?;
    let shifted = model.shifted_hamiltonian()?;
    let g = ground.as_slice();
    check_normalized(g)?;
    let mut total = T::zero();
    for mu in Outcome::BOTH {
        let projected = projector(config.axis_a, config.n_a, mu, model.n_sites())?.apply(g)?;
        total += shifted.expectation_raw(&projected)?.re;
    }
    Ok(total)
}

fn require_offsets<T: Real>(model: &SpinChainModel<T>) -> Result<()> {
    if !model.is_calibrated() {
        return Err(Error::Contract("model is not calibrated; local offsets are missing".into()));
    }
    Ok(())
}

/// Whether the closed form must equal the density-matrix energy.
///
/// Besides `[H, sigma_B] = [H_{n_B}, sigma_B]`, the derivation needs Alice's
/// projector to commute with `H_{n_B}`, i.e. `n_A` outside its support.
pub fn analytic_identity_applies<T: Real>(model: &SpinChainModel<T>, config: &QetConfig) -> Result<bool> {
    config.validate(model.n_sites())?;
    let condition = check_commutator_condition(model, config.n_b, config.axis_b)?;
    let local_support = model.local_hamiltonian_bare(config.n_b)?.support();
    Ok(condition.holds && !local_support.contains(&config.n_a))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct QetResult<T: Real + Serialize> {
    pub xi: T,
    pub eta: T,
    pub eta_imag: T,
    pub theta: T,
    pub p_plus: T,
    pub p_minus: T,
    pub e_analytic: T,
    pub e_density_matrix: T,
    pub e_injected: T,
    pub support_disjoint: bool,
}

impl<T: Real + Serialize> QetResult<T> {
    pub const CSV_HEADER: &'static str = "xi,eta,theta,p_plus,e_analytic,e_density_matrix,e_injected";

    pub fn csv_row(&self) -> String {
        [self.xi, self.eta, self.theta, self.p_plus, self.e_analytic, self.e_density_matrix, self.e_injected]
            .iter()
            .map(|v| format!("{:.11e}", v.to_f64_lossy()))
            .collect::<Vec<_>>()
            .join(",")
    }

    /// `|e_analytic - e_density_matrix|`.
    pub fn identity_residual(&self) -> T {
        (self.e_analytic - self.e_density_matrix).abs()
    }
}

/// Full single-point evaluation on a calibrated model.
///
/// The density-matrix energy uses the materialized `rho_qet` up to
/// [`RHO_DENSE_MAX`] qubits and the branch-state form beyond.
pub fn evaluate<T: Real + Serialize>(
    ground: &GroundState<T>,
    model: &SpinChainModel<T>,
    config: &QetConfig,
) -> Result<QetResult<T>> {
    require_offsets(model)?;
    config.validate(model.n_sites())?;
    let n = model.n_sites();
    let xi_value = xi(ground, model, config)?;
    let eta_value = eta(ground, model, config)?;
    let theta_value = theta(xi_value, eta_value.re);
    let g = ground.as_slice();
    let p_plus = projector(config.axis_a, config.n_a, Outcome::Plus, n)?.expectation_raw(g)?.re;
    let p_minus = projector(config.axis_a, config.n_a, Outcome::Minus, n)?.expectation_raw(g)?.re;
    let e_density_matrix = if n <= RHO_DENSE_MAX {
        teleported_energy_dm(&rho_qet(ground, config, theta_value)?, model, config.n_b)?
    } else {
        let branches = branch_states(g, n, config, theta_value)?;
        ensemble_expectation(&branches, &model.local_hamiltonian(config.n_b)?)?.re
    };
    Ok(QetResult {
        xi: xi_value,
        eta: eta_value.re,
        eta_imag: eta_value.im,
        theta: theta_value,
        p_plus,
        p_minus,
        e_analytic: teleported_energy_analytic(xi_value, eta_value.re),
        e_density_matrix,
        e_injected: injected_energy(ground, model, config)?,
        support_disjoint: eta_value.support_disjoint,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigensolve::{ground_state, ground_state_of, LanczosOptions, Method};
    use crate::models::{build_cluster, build_ising, build_y_cluster, Boundary};
    use nalgebra::SymmetricEigen;
    use proptest::prelude::*;
    use std::f64::consts::FRAC_PI_4;

    fn op1(coefficient: f64, axis: Axis) -> OperatorSum<f64> {
        OperatorSum::from_term(1, PauliTerm::real(coefficient, [(0, axis)])).unwrap()
    }

    fn calibrated(model: SpinChainModel<f64>) -> (SpinChainModel<f64>, GroundState<f64>) {
        let g = ground_state(&model, Method::Dense).unwrap();
        (model.calibrate(&g).unwrap(), g)
    }

    fn table_point(j1: f64) -> (SpinChainModel<f64>, GroundState<f64>) {
        calibrated(build_cluster(6, j1, 0.0, true, Boundary::Open).unwrap())
    }

    #[test]
    fn projector_algebra() {
        let p = projector::<f64>(Axis::Z, 0, Outcome::Plus, 1).unwrap().to_matrix().unwrap();
        assert_eq!(p[(0, 0)], C::new(1.0, 0.0));
        assert_eq!(p[(1, 1)], C::new(0.0, 0.0));
        for axis in Axis::ALL {
            let plus = projector::<f64>(axis, 1, Outcome::Plus, 3).unwrap();
            let minus = projector::<f64>(axis, 1, Outcome::Minus, 3).unwrap();
            assert!(plus.product(&minus).unwrap().is_zero());
            assert_eq!(plus.product(&plus).unwrap(), plus.canonicalize());
            assert_eq!(plus.plus(&minus).unwrap(), OperatorSum::identity(3, cr(1.0)));
        }
    }

    #[test]
    fn x_projector_on_zero_state() {
        let p = projector::<f64>(Axis::X, 0, Outcome::Minus, 1).unwrap();
        let out = p.apply(&[cr(1.0), cr(0.0)]).unwrap();
        assert!((out[0] - cr(0.5)).norm() < 1e-15 && (out[1] - cr(-0.5)).norm() < 1e-15);
        assert!((p.expectation_raw(&[cr(1.0), cr(0.0)]).unwrap().re - 0.5).abs() < 1e-15);
    }

    #[test]
    fn unitary_extremes() {
        let id = conditional_unitary::<f64>(0.0, Axis::Y, 2, Outcome::Plus, 3).unwrap();
        assert_eq!(id, OperatorSum::identity(3, cr(1.0)));
        let u = conditional_unitary::<f64>(std::f64::consts::FRAC_PI_2, Axis::X, 0, Outcome::Plus, 1).unwrap();
        let want = OperatorSum::from_term(1, PauliTerm::single(C::new(0.0, -1.0), 0, Axis::X)).unwrap();
        assert!(u.minus(&want).unwrap().terms().iter().all(|t| t.coefficient.norm() < 1e-15));
    }

    #[test]
    fn derivative_examples() {
        let z_sum = OperatorSum::from_terms(3, (0..3).map(|s| PauliTerm::real(1.0, [(s, Axis::Z)]))).unwrap();
        let sigma = OperatorSum::from_term(3, PauliTerm::real(1.0, [(1, Axis::Z)])).unwrap();
        assert!(commutator(&z_sum, &sigma).unwrap().is_zero());
        let d = commutator(&op1(1.0, Axis::Z), &op1(1.0, Axis::X)).unwrap().scale(c(0.0, 1.0));
        assert_eq!(d, op1(-2.0, Axis::Y));

        let (model, _) = table_point(1.0);
        let d = heisenberg_derivative(&model, &QetConfig::default()).unwrap();
        assert!(d.support.iter().all(|s| (3..=5).contains(s)));
        assert!(!d.support.contains(&1));
    }

    #[test]
    fn two_level_brute_force() {
        // H = Z with E0 = -1: ground |1>, sigma = X kicks it to |0> at energy +1.
        let g = ground_state_of(&op1(1.0, Axis::Z), Method::Dense, &LanczosOptions::default()).unwrap();
        let shifted = op1(1.0, Axis::Z).plus(&OperatorSum::identity(1, cr(1.0))).unwrap();
        let kicked = op1(1.0, Axis::X).apply(g.as_slice()).unwrap();
        assert!((shifted.expectation_raw(&kicked).unwrap().re - 2.0).abs() < 1e-12);
        let mut injected = 0.0;
        for mu in Outcome::BOTH {
            let p = projector::<f64>(Axis::X, 0, mu, 1).unwrap().apply(g.as_slice()).unwrap();
            injected += shifted.expectation_raw(&p).unwrap().re;
        }
        assert!((injected - 1.0).abs() < 1e-12);
    }

    #[test]
    fn theta_branches() {
        assert_eq!(theta(2.0, 0.0), 0.0);
        assert_eq!(theta(0.0, 0.0), 0.0);
        assert!((theta(0.0, 1.0) - FRAC_PI_4).abs() < 1e-15);
        assert!((theta(0.0, -1.0) + FRAC_PI_4).abs() < 1e-15);
        assert!((theta(-1.0, 0.0) - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
    }

    #[test]
    fn analytic_energy_examples() {
        assert!((teleported_energy_analytic(3.0f64, 4.0) + 1.0).abs() < 1e-15);
        assert_eq!(teleported_energy_analytic(5.0f64, 0.0), 0.0);
        assert!(teleported_energy_analytic(1e6f64, 1e-6) < 0.0);
    }

    #[test]
    fn theta_minimizes_the_density_matrix_energy() {
        let (model, g) = table_point(0.6);
        let config = QetConfig::default();
        let r = evaluate(&g, &model, &config).unwrap();
        for delta in [-0.01, 0.01] {
            let rho = rho_qet(&g, &config, r.theta + delta).unwrap();
            assert!(teleported_energy_dm(&rho, &model, 4).unwrap() > r.e_density_matrix);
        }
    }

    #[test]
    fn table_values_at_weak_and_strong_coupling() {
        let (model, g) = table_point(0.2);
        let r = evaluate(&g, &model, &QetConfig::default()).unwrap();
        assert!(r.eta < 0.0 && (r.theta + 0.0486).abs() < 5e-4);
        assert!((r.e_analytic + 0.0022).abs() < 1.5e-4);
        let (model, g) = table_point(1.0);
        let r = evaluate(&g, &model, &QetConfig::default()).unwrap();
        assert!((r.theta - 0.0145).abs() < 5e-4);
        assert!((r.e_density_matrix + 0.0008).abs() < 1e-4);
        assert!(r.identity_residual() < 1e-8);
        assert!(r.e_injected > r.e_analytic.abs());
    }

    #[test]
    fn zero_coupling_cluster_has_no_correlations() {
        let (model, g) = calibrated(build_cluster(6, 0.0, 0.0, false, Boundary::Open).unwrap());
        let r = evaluate(&g, &model, &QetConfig::default()).unwrap();
        assert!(r.eta.abs() < 1e-12);
        assert_eq!(r.e_analytic, 0.0);
    }

    #[test]
    fn non_disturbing_measurement_changes_nothing() {
        // Ground state of -sum Z is |0...0>; measuring Z leaves it alone.
        let (model, g) = calibrated(build_ising(5, 0.0, 1.0, Axis::Z, Boundary::Open).unwrap());
        let config = QetConfig::new(0, 3, Axis::Z, Axis::X);
        let rho = rho_qet(&g, &config, 0.0).unwrap();
        let pure = &g.amplitudes * g.amplitudes.adjoint();
        assert!((rho - pure).norm() < 1e-12);
        let r = evaluate(&g, &model, &config).unwrap();
        assert!(r.e_injected.abs() < 1e-12);
    }

    #[test]
    fn uncalibrated_models_are_rejected() {
        let model = build_cluster::<f64>(6, 1.0, 0.0, true, Boundary::Open).unwrap();
        let g = ground_state(&model, Method::Dense).unwrap();
        assert!(matches!(xi(&g, &model, &QetConfig::default()), Err(Error::Contract(_))));
        assert!(matches!(evaluate(&g, &model, &QetConfig::default()), Err(Error::Contract(_))));
        assert!(QetConfig::new(2, 2, Axis::X, Axis::X).validate(6).is_err());
        assert!(QetConfig::new(1, 6, Axis::X, Axis::X).validate(6).is_err());
    }

    #[test]
    fn eta_ignores_constant_shifts() {
        let (model, g) = table_point(0.8);
        let base = eta(&g, &model, &QetConfig::default()).unwrap();
        let shifted_terms = model.bulk_terms().plus(&OperatorSum::identity(6, cr(3.7))).unwrap();
        let shifted =
            SpinChainModel::from_parts(model.kind(), 6, model.couplings().clone(), model.boundary(), shifted_terms);
        let moved = eta(&g, &shifted, &QetConfig::default()).unwrap();
        assert!((base.re - moved.re).abs() < 1e-12);
    }

    #[test]
    fn overlapping_support_reports_imaginary_part() {
        let (model, g) = calibrated(build_ising(6, 0.7, 0.3, Axis::X, Boundary::Open).unwrap());
        let config = QetConfig::new(3, 4, Axis::Z, Axis::Z);
        let e = eta(&g, &model, &config).unwrap();
        assert!(!e.support_disjoint);
        let disjoint = eta(&g, &model, &QetConfig::new(1, 4, Axis::Z, Axis::Z)).unwrap();
        assert!(disjoint.support_disjoint && disjoint.im.abs() < 1e-10);
    }

    #[test]
    fn csv_row_has_seven_columns() {
        let (model, g) = table_point(0.4);
        let r = evaluate(&g, &model, &QetConfig::default()).unwrap();
        assert_eq!(r.csv_row().split(',').count(), QetResult::<f64>::CSV_HEADER.split(',').count());
    }

    fn random_model(family: u8, n: usize, a: f64, b: f64, axis: Axis) -> SpinChainModel<f64> {
        match family {
            0 => build_ising(n, a, b, axis, Boundary::Open).unwrap(),
            1 => build_ising(n, a, b, axis, Boundary::Periodic).unwrap(),
            2 => build_cluster(n, a, b, false, Boundary::Open).unwrap(),
            3 => build_cluster(n, a, b, true, Boundary::Periodic).unwrap(),
            _ => build_y_cluster(n, a, b, Boundary::Open).unwrap(),
        }
    }

    fn axis_strategy() -> impl Strategy<Value = Axis> {
        prop_oneof![Just(Axis::X), Just(Axis::Y), Just(Axis::Z)]
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn unitarity(theta in -3.2f64..3.2, axis in axis_strategy(), plus in any::<bool>()) {
            let mu = if plus { Outcome::Plus } else { Outcome::Minus };
            let u = conditional_unitary(theta, axis, 1, mu, 2).unwrap();
            let prod = u.adjoint().product(&u).unwrap().to_matrix().unwrap();
            let id = DMatrix::<C<f64>>::identity(4, 4);
            prop_assert!((prod - id).iter().all(|z| z.norm() < 1e-12));
        }

        #[test]
        fn protocol_contracts(
            family in 0u8..5,
            n in 4usize..=6,
            a in 0.0f64..2.0,
            b in 0.0f64..2.0,
            model_axis in axis_strategy(),
            axis_a in axis_strategy(),
            axis_b in axis_strategy(),
            sites in (0usize..6, 0usize..6),
        ) {
            let (n_a, n_b) = (sites.0 % n, sites.1 % n);
            prop_assume!(n_a != n_b);
            let (model, g) = calibrated(random_model(family, n, a, b, model_axis));
            let config = QetConfig::new(n_a, n_b, axis_a, axis_b);
            let r = evaluate(&g, &model, &config).unwrap();
            prop_assert!((r.p_plus + r.p_minus - 1.0).abs() < 1e-10);
            prop_assert!(r.xi >= -1e-10);
            prop_assert!(r.e_analytic <= 1e-12);
            prop_assert_eq!(r.e_analytic < 0.0, r.eta.abs() > 1e-12);
            if r.support_disjoint {
                prop_assert!(r.eta_imag.abs() < 1e-10);
            }
            let rho = rho_qet(&g, &config, r.theta).unwrap();
            prop_assert!((rho.trace() - cr(1.0)).norm() < 1e-10);
            prop_assert!((&rho - rho.adjoint()).iter().all(|z| z.norm() < 1e-10));
            let min_eig = SymmetricEigen::new(rho).eigenvalues.min();
            prop_assert!(min_eig > -1e-10);
            if analytic_identity_applies(&model, &config).unwrap() {
                prop_assert!(r.identity_residual() < 1e-8, "residual {}", r.identity_residual());
            }
        }
    }
}
