//! Ground states and spectra.
//!
//! Small chains go through a dense Hermitian eigendecomposition; larger ones
//! through matrix-free Lanczos ([`lanczos`]). Both return the same
//! [`GroundState`] with a fixed global phase.

pub mod dump;
pub mod lanczos;

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::models::SpinChainModel;
use crate::pauli::{OperatorSum, DEFAULT_DENSE_LIMIT};
use crate::scalar::{cr, Real, C};

pub use lanczos::LanczosOptions;

/// Largest chain that `Method::Auto` hands to the dense solver.
pub const AUTO_DENSE_MAX: usize = 10;
/// Largest chain for which a full spectrum is computed.
pub const SPECTRUM_MAX: usize = 10;
/// Largest chain accepted by Lanczos.
pub const LANCZOS_MAX: usize = 24;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Method {
    Dense,
    Lanczos,
    #[default]
    Auto,
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dense" => Ok(Method::Dense),
            "lanczos" => Ok(Method::Lanczos),
            "auto" => Ok(Method::Auto),
            other => Err(Error::Invalid(format!("unknown eigensolver {other:?}"))),
        }
    }
}

#[derive(Clone, Debug)]
pub struct GroundState<T: Real> {
    /// Normalized; the first amplitude with modulus above 1e-10 is real positive.
    pub amplitudes: DVector<C<T>>,
    pub energy: T,
    /// `E1 - E0`. For Lanczos this is the Ritz estimate (an upper bound) unless
    /// the run detected degeneracy, in which case it is zero.
    pub gap: T,
    pub degenerate: bool,
}

impl<T: Real> GroundState<T> {
    pub fn n_qubits(&self) -> usize {
        self.amplitudes.len().trailing_zeros() as usize
    }

    pub fn as_slice(&self) -> &[C<T>] {
        self.amplitudes.as_slice()
    }
}

pub fn ground_state<T: Real>(model: &SpinChainModel<T>, method: Method) -> Result<GroundState<T>> {
    ground_state_of(model.bulk_terms(), method, &LanczosOptions::default())
}

/// Ground state of an arbitrary Hermitian operator.
pub fn ground_state_of<T: Real>(
    op: &OperatorSum<T>,
    method: Method,
    lanczos_opts: &LanczosOptions,
) -> Result<GroundState<T>> {
    if !op.is_hermitian() {
        return Err(Error::Algebra("Hamiltonian is not Hermitian".into()));
    }
    let n = op.n_qubits();
    let method = match method {
        Method::Auto if n <= AUTO_DENSE_MAX => Method::Dense,
        Method::Auto => Method::Lanczos,
        m => m,
    };
    match method {
        Method::Dense => dense_ground(op),
        Method::Lanczos => {
            if n > LANCZOS_MAX {
                return Err(Error::Size(format!("{n} qubits exceeds the Lanczos limit of {LANCZOS_MAX}")));
            }
            lanczos::ground_state(op, lanczos_opts)
        }
        Method::Auto => unreachable!(),
    }
}

fn hermitian_eigen<T: Real>(op: &OperatorSum<T>, limit: usize) -> Result<SymmetricEigen<C<T>, nalgebra::Dyn>> {
    let m: DMatrix<C<T>> = op.to_matrix_with_limit(limit)?;
    Ok(SymmetricEigen::new(m))
}

fn dense_ground<T: Real>(op: &OperatorSum<T>) -> Result<GroundState<T>> {
    let eig = hermitian_eigen(op, DEFAULT_DENSE_LIMIT)?;
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).unwrap_or(std::cmp::Ordering::Equal));
    let e0 = eig.eigenvalues[order[0]];
    let gap = order.get(1).map_or(T::zero(), |&i| eig.eigenvalues[i] - e0);
    let mut v: Vec<C<T>> = eig.eigenvectors.column(order[0]).iter().copied().collect();
    normalize(&mut v);
    fix_phase(&mut v);
    Ok(GroundState { amplitudes: DVector::from_vec(v), energy: e0, gap, degenerate: gap < T::contract_tol() })
}

/// All `2^N` eigenvalues in ascending order.
pub fn spectrum<T: Real>(model: &SpinChainModel<T>) -> Result<Vec<T>> {
    spectrum_of(model.bulk_terms())
}

pub fn spectrum_of<T: Real>(op: &OperatorSum<T>) -> Result<Vec<T>> {
    if !op.is_hermitian() {
        return Err(Error::Algebra("Hamiltonian is not Hermitian".into()));
    }
    let eig = hermitian_eigen(op, SPECTRUM_MAX)?;
    let mut vals: Vec<T> = eig.eigenvalues.iter().copied().collect();
    vals.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    Ok(vals)
}

pub(crate) fn normalize<T: Real>(v: &mut [C<T>]) {
    let norm = v.iter().fold(T::zero(), |acc, a| acc + a.norm_sqr()).sqrt();
    if norm > T::zero() {
        for a in v.iter_mut() {
            *a /= cr(norm);
        }
    }
}

/// Rotates the global phase so the first amplitude above 1e-10 in modulus is
/// real and positive.
pub(crate) fn fix_phase<T: Real>(v: &mut [C<T>]) {
    let floor = T::lit(1e-10);
    if let Some(pivot) = v.iter().position(|a| a.norm_sqr().sqrt() > floor) {
        let a = v[pivot];
        let rot = a.conj() / cr(a.norm_sqr().sqrt());
        for x in v.iter_mut() {
            *x *= rot;
        }
        v[pivot] = cr(v[pivot].re);
    }
}

/// `max_b |(H v - E v)_b|`.
pub fn residual_inf<T: Real>(op: &OperatorSum<T>, v: &[C<T>], energy: T) -> Result<T> {
    let hv = op.apply(v)?;
    Ok(hv.iter().zip(v).fold(T::zero(), |m, (h, x)| {
        let r = *h - *x * cr(energy);
        m.max(r.norm_sqr().sqrt())
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{build_cluster, build_ising, Boundary};
    use crate::pauli::{expectation, Axis, PauliTerm};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn z_sum(n: usize) -> OperatorSum<f64> {
        OperatorSum::from_terms(n, (0..n).map(|s| PauliTerm::real(1.0, [(s, Axis::Z)]))).unwrap()
    }

    #[test]
    fn z_sum_ground_state_is_all_down() {
        let g = ground_state_of(&z_sum(3), Method::Dense, &LanczosOptions::default()).unwrap();
        assert!((g.energy + 3.0).abs() < 1e-12);
        assert!((g.gap - 2.0).abs() < 1e-12);
        assert!(!g.degenerate);
        // all sites Z = -1 is basis index 0b111
        assert!((g.amplitudes[7] - C::new(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn small_spectra() {
        let z = OperatorSum::from_term(1, PauliTerm::real(1.0f64, [(0, Axis::Z)])).unwrap();
        assert_eq!(spectrum_of(&z).unwrap(), vec![-1.0, 1.0]);
        let xx = OperatorSum::from_term(2, PauliTerm::real(-1.0f64, [(0, Axis::X), (1, Axis::X)])).unwrap();
        let s = spectrum_of(&xx).unwrap();
        for (a, b) in s.iter().zip([-1.0f64, -1.0, 1.0, 1.0]) {
            assert!((a - b).abs() < 1e-12);
        }
        let too_big = z_sum(11);
        assert!(matches!(spectrum_of(&too_big), Err(Error::Size(_))));
    }

    #[test]
    fn non_hermitian_input_is_rejected() {
        let op = OperatorSum::from_term(1, PauliTerm::single(C::new(0.0, 1.0), 0, Axis::X)).unwrap();
        assert!(matches!(ground_state_of(&op, Method::Dense, &LanczosOptions::default()), Err(Error::Algebra(_))));
    }

    #[test]
    fn dense_and_lanczos_agree_on_critical_ising() {
        let m = build_ising::<f64>(6, 1.0, 0.0, Axis::Z, Boundary::Periodic).unwrap();
        let d = ground_state(&m, Method::Dense).unwrap();
        let l = ground_state(&m, Method::Lanczos).unwrap();
        assert!((d.energy - l.energy).abs() < 1e-9);
        let overlap: C<f64> = d.amplitudes.iter().zip(l.amplitudes.iter()).map(|(a, b)| a.conj() * b).sum();
        assert!((overlap.norm() - 1.0).abs() < 1e-8);
        assert!(residual_inf(m.bulk_terms(), l.as_slice(), l.energy).unwrap() < 1e-8);
    }

    #[test]
    fn lanczos_handles_larger_chains() {
        let m = build_cluster::<f64>(12, 0.7, 0.4, true, Boundary::Periodic).unwrap();
        let g = ground_state(&m, Method::Auto).unwrap();
        assert!(residual_inf(m.bulk_terms(), g.as_slice(), g.energy).unwrap() < 1e-8);
        let norm: f64 = g.amplitudes.iter().map(|a| a.norm_sqr()).sum();
        assert!((norm - 1.0).abs() < 1e-10);
    }

    #[test]
    fn ground_state_contracts_hold() {
        let m = build_cluster::<f64>(6, 0.8, 0.3, true, Boundary::Open).unwrap();
        let g = ground_state(&m, Method::Dense).unwrap();
        let norm: f64 = g.amplitudes.iter().map(|a| a.norm_sqr()).sum();
        assert!((norm - 1.0).abs() < 1e-10);
        assert!(residual_inf(m.bulk_terms(), g.as_slice(), g.energy).unwrap() < 1e-8);
        let pivot = g.amplitudes.iter().find(|a| a.norm() > 1e-10).unwrap();
        assert!(pivot.im == 0.0 && pivot.re > 0.0);
        let again = ground_state(&m, Method::Dense).unwrap();
        for (a, b) in g.amplitudes.iter().zip(again.amplitudes.iter()) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn variational_bound() {
        let m = build_ising::<f64>(6, 0.6, 0.2, Axis::Y, Boundary::Periodic).unwrap();
        let g = ground_state(&m, Method::Dense).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let mut v: Vec<C<f64>> =
                (0..64).map(|_| C::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
            normalize(&mut v);
            let e = expectation(&v, m.bulk_terms()).unwrap().re;
            assert!(e >= g.energy - 1e-10);
        }
    }

    #[test]
    fn degeneracy_is_flagged() {
        // -X0X1 - X1X2 - X2X0: two-fold degenerate ground space.
        let m = build_ising::<f64>(3, 0.0, 0.0, Axis::X, Boundary::Periodic).unwrap();
        let g = ground_state(&m, Method::Dense).unwrap();
        assert!(g.degenerate);
        assert!(g.gap.abs() < 1e-10);
        let l = ground_state(&m, Method::Lanczos).unwrap();
        assert!(l.degenerate);
        assert!((l.energy - g.energy).abs() < 1e-9);
    }

    #[test]
    fn f32_dense_ground_state() {
        let m = build_ising::<f32>(4, 1.0, 0.0, Axis::Z, Boundary::Periodic).unwrap();
        let g = ground_state(&m, Method::Dense).unwrap();
        let g64 = ground_state(&build_ising::<f64>(4, 1.0, 0.0, Axis::Z, Boundary::Periodic).unwrap(), Method::Dense)
            .unwrap();
        assert!((g.energy as f64 - g64.energy).abs() < 1e-4);
    }
}
