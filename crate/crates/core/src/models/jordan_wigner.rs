//! Quadratic fermion chains mapped to spin operators.
//!
//! `c_j = (prod_{m<j} Z_m) (X_j + i Y_j) / 2`. Products are taken
//! symbolically, so the Z strings of nearest-neighbour terms cancel on their
//! own. With this convention an occupied mode is the Z = -1 state.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{Boundary, ModelKind, SpinChainModel};
use crate::error::{Error, Result};
use crate::pauli::{Axis, OperatorSum, PauliTerm};
use crate::scalar::{c, cr, Real};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FermionKind {
    /// Two-site cells, `2 sum_n (1-l) c+_{A,n} c_{B,n} + l c+_{A,n+1} c_{B,n} + h.c.`
    Ssh,
    /// `sum_n c+_n c_{n+1} + l c+_n c+_{n+1} + h.c.`
    Kitaev,
}

impl fmt::Display for FermionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FermionKind::Ssh => "ssh",
            FermionKind::Kitaev => "kitaev",
        })
    }
}

impl FromStr for FermionKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ssh" => Ok(FermionKind::Ssh),
            "kitaev" => Ok(FermionKind::Kitaev),
            other => Err(Error::Invalid(format!("unknown fermion chain {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FermionChainSpec<T: Real> {
    pub kind: FermionKind,
    /// Unit cells for SSH, sites for Kitaev.
    pub size: usize,
    pub lambda: T,
}

impl<T: Real> FermionChainSpec<T> {
    pub fn n_modes(&self) -> usize {
        match self.kind {
            FermionKind::Ssh => 2 * self.size,
            FermionKind::Kitaev => self.size,
        }
    }
}

fn annihilation<T: Real>(n_modes: usize, j: usize) -> Result<OperatorSum<T>> {
    let string = (0..j).map(|m| (m, Axis::Z));
    let half = T::lit(0.5);
    let x = PauliTerm::new(cr(half), string.clone().chain([(j, Axis::X)]))?;
    let y = PauliTerm::new(c(T::zero(), half), string.chain([(j, Axis::Y)]))?;
    OperatorSum::from_terms(n_modes, [x, y])
}

struct Modes<T: Real> {
    c: Vec<OperatorSum<T>>,
    cdag: Vec<OperatorSum<T>>,
}

impl<T: Real> Modes<T> {
    fn new(n: usize) -> Result<Self> {
        let c = (0..n).map(|j| annihilation(n, j)).collect::<Result<Vec<_>>>()?;
        let cdag = c.iter().map(OperatorSum::adjoint).collect();
        Ok(Self { c, cdag })
    }

    /// `t (c+_i c_j + c+_j c_i)` for real `t`.
    fn hopping(&self, i: usize, j: usize, t: T) -> Result<OperatorSum<T>> {
        let fwd = self.cdag[i].product(&self.c[j])?;
        fwd.plus(&fwd.adjoint()).map(|h| h.scale(cr(t)))
    }

    /// `d c+_i c+_j + h.c.` for real `d`.
    fn pairing(&self, i: usize, j: usize, d: T) -> Result<OperatorSum<T>> {
        let fwd = self.cdag[i].product(&self.cdag[j])?;
        fwd.plus(&fwd.adjoint()).map(|h| h.scale(cr(d)))
    }
}

/// Jordan-Wigner image of an open SSH or Kitaev chain.
///
/// Periodic chains are rejected: their boundary term depends on the fermion
/// parity sector and has no single spin form.
pub fn jordan_wigner<T: Real>(spec: &FermionChainSpec<T>, boundary: Boundary) -> Result<SpinChainModel<T>> {
    if boundary == Boundary::Periodic {
        return Err(Error::Unsupported(
            "Jordan-Wigner mapping of periodic chains (parity-dependent boundary term)".into(),
        ));
    }
    let n = spec.n_modes();
    if spec.size < 2 {
        return Err(Error::Invalid(format!("fermion chain needs size >= 2, got {}", spec.size)));
    }
    let modes = Modes::<T>::new(n)?;
    let lambda = spec.lambda;
    let mut h = OperatorSum::zero(n);
    match spec.kind {
        FermionKind::Ssh => {
            let two = T::lit(2.0);
            for cell in 0..spec.size {
                let (a, b) = (2 * cell, 2 * cell + 1);
                h = h.plus(&modes.hopping(a, b, two * (T::one() - lambda))?)?;
                if cell + 1 < spec.size {
                    h = h.plus(&modes.hopping(a + 2, b, two * lambda)?)?;
                }
            }
        }
        FermionKind::Kitaev => {
            for j in 0..n - 1 {
                h = h.plus(&modes.hopping(j, j + 1, T::one())?)?;
                h = h.plus(&modes.pairing(j, j + 1, lambda)?)?;
            }
        }
    }
    if !h.is_hermitian() {
        return Err(Error::Algebra("Jordan-Wigner image is not Hermitian".into()));
    }
    let couplings = BTreeMap::from([("lambda".to_string(), lambda)]);
    let mut model = SpinChainModel::from_parts(ModelKind::JwMapped, n, couplings, boundary, h);
    model.fermion = Some(spec.kind);
    Ok(model)
}
