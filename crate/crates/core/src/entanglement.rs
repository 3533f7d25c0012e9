//! Reduced density matrices and von Neumann entropy for contiguous cuts.
//!
//! Site 0 is the least significant bit, so the left block `{0..cut}` indexes
//! the low bits: `psi[l + 2^cut * r]`.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pauli::check_normalized;
use crate::scalar::{cr, Real, C};

/// Eigenvalues at or below this are dropped from `-sum l ln l`.
pub const EIGENVALUE_FLOOR: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Bipartition {
    n_sites: usize,
    cut: usize,
}

impl Bipartition {
    /// Left block `{0, ..., cut - 1}`, right block the rest.
    pub fn new(n_sites: usize, cut: usize) -> Result<Self> {
        if cut == 0 || cut >= n_sites {
            return Err(Error::Partition(format!("cut {cut} leaves an empty side of a {n_sites}-site chain")));
        }
        Ok(Self { n_sites, cut })
    }

    pub fn half_chain(n_sites: usize) -> Result<Self> {
        Self::new(n_sites, n_sites / 2)
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn cut(&self) -> usize {
        self.cut
    }

    pub fn left_sites(&self) -> std::ops::Range<usize> {
        0..self.cut
    }

    pub fn right_sites(&self) -> std::ops::Range<usize> {
        self.cut..self.n_sites
    }

    pub fn len(&self, keep: Keep) -> usize {
        match keep {
            Keep::Left => self.cut,
            Keep::Right => self.n_sites - self.cut,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Keep {
    Left,
    Right,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LogBase {
    #[default]
    Natural,
    Two,
}

/// The amplitudes as a `2^|L| x 2^|R|` matrix.
fn reshape<T: Real>(state: &[C<T>], part: &Bipartition) -> Result<DMatrix<C<T>>> {
    if state.len() != 1usize << part.n_sites {
        return Err(Error::Dimension(format!(
            "state of length {} for a {}-site bipartition",
            state.len(),
            part.n_sites
        )));
    }
    let rows = 1usize << part.cut;
    let cols = 1usize << (part.n_sites - part.cut);
    // Column-major storage with row index l and column index r matches l + rows * r.
    Ok(DMatrix::from_column_slice(rows, cols, state))
}

pub fn reduced_density_matrix<T: Real>(state: &[C<T>], part: &Bipartition, keep: Keep) -> Result<DMatrix<C<T>>> {
    check_normalized(state)?;
    let m = reshape(state, part)?;
    Ok(match keep {
        Keep::Left => &m * m.adjoint(),
        // rho_R[r, r'] = sum_l psi[l, r] conj(psi[l, r'])
        Keep::Right => (m.adjoint() * &m).transpose(),
    })
}

/// Eigenvalues of a density matrix after checking Hermiticity, trace and
/// positivity against the scalar's contract tolerance.
pub fn density_spectrum<T: Real>(rho: &DMatrix<C<T>>) -> Result<Vec<T>> {
    if !rho.is_square() {
        return Err(Error::Dimension(format!("{}x{} density matrix", rho.nrows(), rho.ncols())));
    }
    let tol = T::contract_tol();
    let skew = (rho - rho.adjoint()).iter().fold(T::zero(), |m, z| m.max(z.norm_sqr().sqrt()));
    if skew > tol {
        return Err(Error::Contract(format!("density matrix is not Hermitian (deviation {:e})", skew.to_f64_lossy())));
    }
    let trace = rho.trace();
    if (trace - cr(T::one())).norm_sqr().sqrt() > tol {
        return Err(Error::Contract(format!("density matrix trace is {}", trace.re.to_f64_lossy())));
    }
    let mut values: Vec<T> = SymmetricEigen::new(rho.clone()).eigenvalues.iter().copied().collect();
    values.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    if let Some(&min) = values.last() {
        if min < -tol {
            return Err(Error::Contract(format!("density matrix has eigenvalue {:e}", min.to_f64_lossy())));
        }
    }
    Ok(values)
}

/// `-sum l ln l` over eigenvalues above [`EIGENVALUE_FLOOR`], optionally in bits.
pub fn von_neumann_entropy<T: Real>(rho: &DMatrix<C<T>>, base: LogBase) -> Result<T> {
    let floor = T::lit(EIGENVALUE_FLOOR);
    let nats = density_spectrum(rho)?.into_iter().filter(|&l| l > floor).fold(T::zero(), |s, l| s - l * l.ln());
    Ok(match base {
        LogBase::Natural => nats,
        LogBase::Two => nats / T::lit(std::f64::consts::LN_2),
    })
}

pub fn entanglement_entropy<T: Real>(state: &[C<T>], part: &Bipartition, keep: Keep, base: LogBase) -> Result<T> {
    von_neumann_entropy(&reduced_density_matrix(state, part, keep)?, base)
}

/// Entropy of the right half for the cut at `N / 2`, in nats.
pub fn half_chain_entropy<T: Real>(state: &[C<T>], n_sites: usize) -> Result<T> {
    entanglement_entropy(state, &Bipartition::half_chain(n_sites)?, Keep::Right, LogBase::Natural)
}
