//! Hamiltonian families, local Hamiltonians and the zero-point calibration.
//!
//! Every family is stored as a canonical [`OperatorSum`] without offsets. The
//! per-site offsets `epsilon` and the global shift `e0_shift` are filled in by
//! [`calibrate`] once a ground state is known.
//!
//! Local Hamiltonians overlap: a bond or three-site term enters the local
//! Hamiltonian of every site it touches at full coefficient, so
//! `sum_n H_n != H`. The global zero point is carried separately by
//! `e0_shift`.

mod jordan_wigner;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use jordan_wigner::{jordan_wigner, FermionChainSpec, FermionKind};

use crate::eigensolve::GroundState;
use crate::error::{Error, Result};
use crate::pauli::{commutator, expectation, Axis, OperatorSum, PauliTerm};
use crate::scalar::{cr, Real};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Ising,
    Cluster,
    ClusterZz,
    YCluster,
    JwMapped,
}

impl ModelKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Ising => "ising",
            ModelKind::Cluster => "cluster",
            ModelKind::ClusterZz => "cluster_zz",
            ModelKind::YCluster => "y_cluster",
            ModelKind::JwMapped => "jw_mapped",
        }
    }

    /// Coupling names accepted by the family, in canonical order.
    pub fn coupling_names(self) -> &'static [&'static str] {
        match self {
            ModelKind::Ising => &["h_x", "h_z"],
            ModelKind::Cluster | ModelKind::ClusterZz => &["J1", "J2"],
            ModelKind::YCluster => &["h_y", "J_y"],
            ModelKind::JwMapped => &["lambda"],
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ising" => Ok(ModelKind::Ising),
            "cluster" => Ok(ModelKind::Cluster),
            "cluster_zz" => Ok(ModelKind::ClusterZz),
            "y_cluster" => Ok(ModelKind::YCluster),
            "jw_mapped" => Ok(ModelKind::JwMapped),
            other => Err(Error::Invalid(format!("unknown model family {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    Periodic,
    /// Reproduces the offsets of the cluster + ZZ reference data; default for
    /// every family.
    #[default]
    Open,
}

impl fmt::Display for Boundary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Boundary::Periodic => "periodic",
            Boundary::Open => "open",
        })
    }
}

impl FromStr for Boundary {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "periodic" | "pbc" => Ok(Boundary::Periodic),
            "open" | "obc" => Ok(Boundary::Open),
            other => Err(Error::Invalid(format!("unknown boundary {other:?}"))),
        }
    }
}

/// Nearest-neighbour bonds `(n, n+1)`.
pub fn bonds(n_sites: usize, boundary: Boundary) -> Vec<(usize, usize)> {
    match boundary {
        Boundary::Periodic => (0..n_sites).map(|n| (n, (n + 1) % n_sites)).collect(),
        Boundary::Open => (0..n_sites.saturating_sub(1)).map(|n| (n, n + 1)).collect(),
    }
}

/// Three-site windows `(n-1, n, n+1)`; interior centres only for open chains.
pub fn triples(n_sites: usize, boundary: Boundary) -> Vec<(usize, usize, usize)> {
    match boundary {
        Boundary::Periodic => (0..n_sites).map(|n| ((n + n_sites - 1) % n_sites, n, (n + 1) % n_sites)).collect(),
        Boundary::Open => (1..n_sites.saturating_sub(1)).map(|n| (n - 1, n, n + 1)).collect(),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpinChainModel<T: Real> {
    kind: ModelKind,
    n_sites: usize,
    couplings: BTreeMap<String, T>,
    boundary: Boundary,
    bulk_terms: OperatorSum<T>,
    epsilon: Option<Vec<T>>,
    e0_shift: Option<T>,
    coupling_axis: Option<Axis>,
    fermion: Option<FermionKind>,
    degenerate_ground: bool,
}

fn require_sites(n_sites: usize) -> Result<()> {
    if n_sites < 3 {
        return Err(Error::Invalid(format!("spin chains need at least 3 sites, got {n_sites}")));
    }
    Ok(())
}

impl<T: Real> SpinChainModel<T> {
    pub(crate) fn from_parts(
        kind: ModelKind,
        n_sites: usize,
        couplings: BTreeMap<String, T>,
        boundary: Boundary,
        bulk_terms: OperatorSum<T>,
    ) -> Self {
        Self {
            kind,
            n_sites,
            couplings,
            boundary,
            bulk_terms: bulk_terms.canonicalize(),
            epsilon: None,
            e0_shift: None,
            coupling_axis: None,
            fermion: None,
            degenerate_ground: false,
        }
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn couplings(&self) -> &BTreeMap<String, T> {
        &self.couplings
    }

    pub fn coupling(&self, name: &str) -> Option<T> {
        self.couplings.get(name).copied()
    }

    pub fn coupling_axis(&self) -> Option<Axis> {
        self.coupling_axis
    }

    pub fn fermion_kind(&self) -> Option<FermionKind> {
        self.fermion
    }

    /// Hamiltonian without offsets.
    pub fn bulk_terms(&self) -> &OperatorSum<T> {
        &self.bulk_terms
    }

    pub fn epsilon(&self) -> Option<&[T]> {
        self.epsilon.as_deref()
    }

    pub fn e0_shift(&self) -> Option<T> {
        self.e0_shift
    }

    pub fn is_calibrated(&self) -> bool {
        self.epsilon.is_some() && self.e0_shift.is_some()
    }

    /// Whether the ground state used for calibration was flagged degenerate.
    pub fn degenerate_ground(&self) -> bool {
        self.degenerate_ground
    }

    fn check_site(&self, n: usize) -> Result<()> {
        if n >= self.n_sites {
            return Err(Error::OutOfRange(format!("site {n} on a {}-site chain", self.n_sites)));
        }
        Ok(())
    }

    /// Every bulk term whose support contains `n`, at full coefficient.
    pub fn local_hamiltonian_bare(&self, n: usize) -> Result<OperatorSum<T>> {
        self.check_site(n)?;
        OperatorSum::from_terms(
            self.n_sites,
            self.bulk_terms.terms().iter().filter(|t| t.factors().contains_key(&n)).cloned(),
        )
    }

    /// `H_n`: the bare local Hamiltonian plus `epsilon_n` (when calibrated).
    pub fn local_hamiltonian(&self, n: usize) -> Result<OperatorSum<T>> {
        let mut h = self.local_hamiltonian_bare(n)?;
        if let Some(eps) = &self.epsilon {
            if eps[n] != T::zero() {
                h.push(PauliTerm::identity(cr(eps[n])))?;
            }
        }
        Ok(h)
    }

    /// `H - E0`, whose ground-state expectation vanishes.
    pub fn shifted_hamiltonian(&self) -> Result<OperatorSum<T>> {
        let e0 =
            self.e0_shift.ok_or_else(|| Error::Contract("model has no global shift; calibrate it first".into()))?;
        self.bulk_terms.plus(&OperatorSum::identity(self.n_sites, cr(-e0)))
    }

    /// See [`calibrate`].
    pub fn calibrate(&self, ground: &GroundState<T>) -> Result<Self> {
        calibrate(self, ground)
    }

    pub fn describe(&self) -> ModelDescription {
        ModelDescription {
            name: self.kind,
            n_sites: self.n_sites,
            couplings: self.couplings.iter().map(|(k, v)| (k.clone(), v.to_f64_lossy())).collect(),
            boundary: self.boundary,
            epsilon: self.epsilon.as_ref().map(|e| e.iter().map(|x| x.to_f64_lossy()).collect()).unwrap_or_default(),
            e0_shift: self.e0_shift.map(|x| x.to_f64_lossy()),
            axis: self.coupling_axis,
            fermion: self.fermion,
        }
    }
}

fn couplings_of<T: Real>(pairs: &[(&str, T)]) -> BTreeMap<String, T> {
    pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

/// `-sum_n [s_n s_{n+1} + h_x X_n + h_z Z_n]` with `s` the coupling axis.
pub fn build_ising<T: Real>(
    n_sites: usize,
    h_x: T,
    h_z: T,
    coupling_axis: Axis,
    boundary: Boundary,
) -> Result<SpinChainModel<T>> {
    require_sites(n_sites)?;
    let mut h = OperatorSum::zero(n_sites);
    for (a, b) in bonds(n_sites, boundary) {
        h.push(PauliTerm::real(-T::one(), [(a, coupling_axis), (b, coupling_axis)]))?;
    }
    for n in 0..n_sites {
        h.push(PauliTerm::real(-h_x, [(n, Axis::X)]))?;
        h.push(PauliTerm::real(-h_z, [(n, Axis::Z)]))?;
    }
    let mut model =
        SpinChainModel::from_parts(ModelKind::Ising, n_sites, couplings_of(&[("h_x", h_x), ("h_z", h_z)]), boundary, h);
    model.coupling_axis = Some(coupling_axis);
    Ok(model)
}

/// `sum_n (Z_n - J1 X_n X_{n+1} - J2 X_{n-1} Z_n X_{n+1})`, plus
/// `1/2 sum_n Z_n Z_{n+1}` when `with_zz`.
pub fn build_cluster<T: Real>(
    n_sites: usize,
    j1: T,
    j2: T,
    with_zz: bool,
    boundary: Boundary,
) -> Result<SpinChainModel<T>> {
    require_sites(n_sites)?;
    let mut h = OperatorSum::zero(n_sites);
    for n in 0..n_sites {
        h.push(PauliTerm::real(T::one(), [(n, Axis::Z)]))?;
    }
    for (a, b) in bonds(n_sites, boundary) {
        h.push(PauliTerm::real(-j1, [(a, Axis::X), (b, Axis::X)]))?;
        if with_zz {
            h.push(PauliTerm::real(T::lit(0.5), [(a, Axis::Z), (b, Axis::Z)]))?;
        }
    }
    for (l, m, r) in triples(n_sites, boundary) {
        h.push(PauliTerm::real(-j2, [(l, Axis::X), (m, Axis::Z), (r, Axis::X)]))?;
    }
    let kind = if with_zz { ModelKind::ClusterZz } else { ModelKind::Cluster };
    Ok(SpinChainModel::from_parts(kind, n_sites, couplings_of(&[("J1", j1), ("J2", j2)]), boundary, h))
}

/// `sum_n (h_y Y_n - J_y Y_n Y_{n+1} - X_{n-1} Z_n X_{n+1})`.
pub fn build_y_cluster<T: Real>(n_sites: usize, h_y: T, j_y: T, boundary: Boundary) -> Result<SpinChainModel<T>> {
    require_sites(n_sites)?;
    let mut h = OperatorSum::zero(n_sites);
    for n in 0..n_sites {
        h.push(PauliTerm::real(h_y, [(n, Axis::Y)]))?;
    }
    for (a, b) in bonds(n_sites, boundary) {
        h.push(PauliTerm::real(-j_y, [(a, Axis::Y), (b, Axis::Y)]))?;
    }
    for (l, m, r) in triples(n_sites, boundary) {
        h.push(PauliTerm::real(-T::one(), [(l, Axis::X), (m, Axis::Z), (r, Axis::X)]))?;
    }
    Ok(SpinChainModel::from_parts(
        ModelKind::YCluster,
        n_sites,
        couplings_of(&[("h_y", h_y), ("J_y", j_y)]),
        boundary,
        h,
    ))
}

/// Sets `epsilon_n = -<g|H_n^bare|g>` for every site and `e0_shift = E0`.
///
/// Degenerate ground states are accepted; the flag is carried on the model.
pub fn calibrate<T: Real>(model: &SpinChainModel<T>, ground: &GroundState<T>) -> Result<SpinChainModel<T>> {
    let amps = ground.amplitudes.as_slice();
    if amps.len() != model.bulk_terms.dim() {
        return Err(Error::Dimension(format!(
            "ground state of length {} for a {}-site model",
            amps.len(),
            model.n_sites
        )));
    }
    let epsilon = (0..model.n_sites)
        .map(|n| Ok(-expectation(amps, &model.local_hamiltonian_bare(n)?)?.re))
        .collect::<Result<Vec<T>>>()?;
    let mut out = model.clone();
    out.epsilon = Some(epsilon);
    out.e0_shift = Some(ground.energy);
    out.degenerate_ground = ground.degenerate;
    Ok(out)
}

#[derive(Clone, Debug)]
pub struct CommutatorCheck<T: Real> {
    pub holds: bool,
    /// `[H, sigma] - [H_local, sigma]`, canonical; empty when the condition holds.
    pub residual: OperatorSum<T>,
}

/// `[h, sigma] - [h_local, sigma]`.
pub fn commutator_residual<T: Real>(
    h: &OperatorSum<T>,
    h_local: &OperatorSum<T>,
    sigma: &OperatorSum<T>,
) -> Result<CommutatorCheck<T>> {
    let residual = commutator(h, sigma)?.minus(&commutator(h_local, sigma)?)?;
    Ok(CommutatorCheck { holds: residual.terms().is_empty(), residual })
}

/// Checks `[H, sigma_{n_B}] = [H_{n_B}, sigma_{n_B}]` symbolically.
pub fn check_commutator_condition<T: Real>(
    model: &SpinChainModel<T>,
    n_b: usize,
    axis_b: Axis,
) -> Result<CommutatorCheck<T>> {
    let sigma = OperatorSum::from_term(model.n_sites, PauliTerm::single(cr(T::one()), n_b, axis_b))?;
    commutator_residual(&model.bulk_terms, &model.local_hamiltonian(n_b)?, &sigma)
}

/// JSON form of a model: `{name, N, couplings, boundary, epsilon[], e0_shift}`.
///
/// `axis` (Ising coupling axis) and `fermion` (Jordan-Wigner source chain)
/// are only present for the families that need them.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelDescription {
    pub name: ModelKind,
    #[serde(rename = "N")]
    pub n_sites: usize,
    #[serde(default)]
    pub couplings: BTreeMap<String, f64>,
    #[serde(default)]
    pub boundary: Boundary,
    #[serde(default)]
    pub epsilon: Vec<f64>,
    #[serde(default)]
    pub e0_shift: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub axis: Option<Axis>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fermion: Option<FermionKind>,
}

impl ModelDescription {
    pub fn new(name: ModelKind, n_sites: usize) -> Self {
        Self {
            name,
            n_sites,
            couplings: BTreeMap::new(),
            boundary: Boundary::default(),
            epsilon: Vec::new(),
            e0_shift: None,
            axis: None,
            fermion: None,
        }
    }

    pub fn with_coupling(mut self, name: &str, value: f64) -> Self {
        self.couplings.insert(name.to_string(), value);
        self
    }

    pub fn with_boundary(mut self, boundary: Boundary) -> Self {
        self.boundary = boundary;
        self
    }

    pub fn with_axis(mut self, axis: Axis) -> Self {
        self.axis = Some(axis);
        self
    }

    pub fn with_fermion(mut self, kind: FermionKind) -> Self {
        self.fermion = Some(kind);
        self
    }

    /// Value of a coupling, defaulting to zero; unknown names are rejected.
    pub fn coupling(&self, name: &str) -> Result<f64> {
        if !self.name.coupling_names().contains(&name) {
            return Err(Error::Invalid(format!("{} has no coupling {name:?}", self.name)));
        }
        Ok(self.couplings.get(name).copied().unwrap_or(0.0))
    }

    fn validate_couplings(&self) -> Result<()> {
        for key in self.couplings.keys() {
            self.coupling(key)?;
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(json: &str) -> Result<Self> {
        Ok(serde_json::from_str(json)?)
    }

    /// Builds the model; stored offsets (if any) are restored as-is.
    pub fn build<T: Real>(&self) -> Result<SpinChainModel<T>> {
        self.validate_couplings()?;
        let get = |name: &str| self.coupling(name).map(T::lit);
        let mut model = match self.name {
            ModelKind::Ising => {
                build_ising(self.n_sites, get("h_x")?, get("h_z")?, self.axis.unwrap_or(Axis::X), self.boundary)?
            }
            ModelKind::Cluster => build_cluster(self.n_sites, get("J1")?, get("J2")?, false, self.boundary)?,
            ModelKind::ClusterZz => build_cluster(self.n_sites, get("J1")?, get("J2")?, true, self.boundary)?,
            ModelKind::YCluster => build_y_cluster(self.n_sites, get("h_y")?, get("J_y")?, self.boundary)?,
            ModelKind::JwMapped => {
                let kind =
                    self.fermion.ok_or_else(|| Error::Invalid("jw_mapped model needs a \"fermion\" kind".into()))?;
                let size = match kind {
                    FermionKind::Ssh if self.n_sites.is_multiple_of(2) => self.n_sites / 2,
                    FermionKind::Ssh => return Err(Error::Invalid("SSH chains need an even number of sites".into())),
                    FermionKind::Kitaev => self.n_sites,
                };
                jordan_wigner(&FermionChainSpec { kind, size, lambda: get("lambda")? }, self.boundary)?
            }
        };
        if !self.epsilon.is_empty() {
            if self.epsilon.len() != self.n_sites {
                return Err(Error::Invalid(format!(
                    "epsilon has {} entries for {} sites",
                    self.epsilon.len(),
                    self.n_sites
                )));
            }
            model.epsilon = Some(self.epsilon.iter().map(|&x| T::lit(x)).collect());
        }
        model.e0_shift = self.e0_shift.map(T::lit);
        Ok(model)
    }
}
