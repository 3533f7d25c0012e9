//! Pauli strings and weighted sums of them on an N-qubit chain.
//!
//! Basis convention, shared by every module in the crate: site `n` is bit `n`
//! of the computational-basis index, so site 0 is the least-significant bit.
//! Bit value 0 is the Z = +1 eigenstate.
//!
//! Products and commutators are computed symbolically with the Pauli group
//! multiplication table; dense matrices are only produced on request.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{c, cr, Real, C};

/// Largest qubit count for which dense matrices are rendered by default.
pub const DEFAULT_DENSE_LIMIT: usize = 14;

/// Matrix-free application switches to rayon above this dimension.
const PARALLEL_APPLY_DIM: usize = 1 << 14;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    /// `self * rhs = i^k * result`, returned as `(k, result)`; `None` is the identity.
    fn product(self, rhs: Axis) -> (u8, Option<Axis>) {
        use Axis::*;
        match (self, rhs) {
            (a, b) if a == b => (0, None),
            (X, Y) => (1, Some(Z)),
            (Y, Z) => (1, Some(X)),
            (Z, X) => (1, Some(Y)),
            (Y, X) => (3, Some(Z)),
            (Z, Y) => (3, Some(X)),
            (X, Z) => (3, Some(Y)),
            _ => unreachable!(),
        }
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Axis::X => "X",
            Axis::Y => "Y",
            Axis::Z => "Z",
        };
        f.write_str(s)
    }
}

impl FromStr for Axis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "X" | "x" => Ok(Axis::X),
            "Y" | "y" => Ok(Axis::Y),
            "Z" | "z" => Ok(Axis::Z),
            other => Err(Error::Invalid(format!("unknown Pauli axis {other:?}"))),
        }
    }
}

fn i_pow<T: Real>(k: u8) -> C<T> {
    match k % 4 {
        0 => c(T::one(), T::zero()),
        1 => c(T::zero(), T::one()),
        2 => c(-T::one(), T::zero()),
        _ => c(T::zero(), -T::one()),
    }
}

/// A complex coefficient times a tensor product of single-site Paulis.
#[derive(Clone, Debug, PartialEq)]
pub struct PauliTerm<T: Real> {
    pub coefficient: C<T>,
    factors: BTreeMap<usize, Axis>,
}

impl<T: Real> PauliTerm<T> {
    pub fn new(coefficient: C<T>, factors: impl IntoIterator<Item = (usize, Axis)>) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (site, axis) in factors {
            if map.insert(site, axis).is_some() {
                return Err(Error::Invalid(format!("site {site} appears twice in a Pauli string")));
            }
        }
        Ok(Self { coefficient, factors: map })
    }

    /// Real-coefficient constructor for strings known to have distinct sites.
    ///
    /// Panics on a repeated site; use [`PauliTerm::new`] for untrusted input.
    pub fn real(coefficient: T, factors: impl IntoIterator<Item = (usize, Axis)>) -> Self {
        Self::new(cr(coefficient), factors).expect("repeated site in Pauli string")
    }

    pub fn identity(coefficient: C<T>) -> Self {
        Self { coefficient, factors: BTreeMap::new() }
    }

    pub fn single(coefficient: C<T>, site: usize, axis: Axis) -> Self {
        Self { coefficient, factors: BTreeMap::from([(site, axis)]) }
    }

    /// Parses labels such as `"X0 Z1"`, `"X0Z1"` or `"I"` with unit coefficient.
    pub fn parse(label: &str) -> Result<Self> {
        let mut factors = Vec::new();
        let mut chars = label.chars().filter(|ch| !ch.is_whitespace() && *ch != '*').peekable();
        while let Some(ch) = chars.next() {
            if ch == 'I' && chars.peek().is_none_or(|n| !n.is_ascii_digit()) {
                continue;
            }
            let axis: Axis = ch.to_string().parse()?;
            let mut digits = String::new();
            while let Some(d) = chars.peek().filter(|d| d.is_ascii_digit()) {
                digits.push(*d);
                chars.next();
            }
            let site = digits
                .parse::<usize>()
                .map_err(|_| Error::Invalid(format!("missing site index after {axis} in {label:?}")))?;
            factors.push((site, axis));
        }
        Self::new(C::new(T::one(), T::zero()), factors)
    }

    pub fn factors(&self) -> &BTreeMap<usize, Axis> {
        &self.factors
    }

    pub fn axis_at(&self, site: usize) -> Option<Axis> {
        self.factors.get(&site).copied()
    }

    pub fn is_identity(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.factors.keys().copied()
    }

    pub fn weight(&self) -> usize {
        self.factors.len()
    }

    /// Operator label without the coefficient, e.g. `X3 X4`; `I` for the identity.
    pub fn label(&self) -> String {
        if self.factors.is_empty() {
            return "I".to_string();
        }
        self.factors.iter().map(|(s, a)| format!("{a}{s}")).collect::<Vec<_>>().join(" ")
    }

    pub fn with_coefficient(&self, coefficient: C<T>) -> Self {
        Self { coefficient, factors: self.factors.clone() }
    }

    /// Two Pauli strings commute iff they anticommute on an even number of sites.
    pub fn commutes_with(&self, other: &Self) -> bool {
        let clashes =
            self.factors.iter().filter(|(site, axis)| other.factors.get(site).is_some_and(|b| b != *axis)).count();
        clashes % 2 == 0
    }

    pub fn multiply(&self, other: &Self) -> Self {
        let mut phase = 0u8;
        let mut factors = self.factors.clone();
        for (&site, &b) in &other.factors {
            match factors.get(&site).copied() {
                None => {
                    factors.insert(site, b);
                }
                Some(a) => {
                    let (k, prod) = a.product(b);
                    phase = (phase + k) % 4;
                    match prod {
                        Some(axis) => factors.insert(site, axis),
                        None => factors.remove(&site),
                    };
                }
            }
        }
        Self { coefficient: self.coefficient * other.coefficient * i_pow::<T>(phase), factors }
    }

    /// Bit masks `(x, z)` and the number of Y factors; Y sets both bits.
    fn masks(&self) -> (u64, u64, u8) {
        let (mut x, mut z, mut ny) = (0u64, 0u64, 0u8);
        for (&site, &axis) in &self.factors {
            let bit = 1u64 << site;
            match axis {
                Axis::X => x |= bit,
                Axis::Z => z |= bit,
                Axis::Y => {
                    x |= bit;
                    z |= bit;
                    ny += 1;
                }
            }
        }
        (x, z, ny)
    }

    fn compiled(&self) -> CompiledTerm<T> {
        let (x, z, ny) = self.masks();
        CompiledTerm { x, z, coeff: self.coefficient * i_pow::<T>(ny) }
    }
}

/// Symbolic product of two Pauli strings.
pub fn multiply<T: Real>(a: &PauliTerm<T>, b: &PauliTerm<T>) -> PauliTerm<T> {
    a.multiply(b)
}

/// `P |b> = coeff * (-1)^popcount(b & z) |b ^ x>`.
#[derive(Clone, Copy, Debug)]
struct CompiledTerm<T: Real> {
    x: u64,
    z: u64,
    coeff: C<T>,
}

impl<T: Real> CompiledTerm<T> {
    #[inline]
    fn sign(&self, basis: u64) -> bool {
        (basis & self.z).count_ones() % 2 == 1
    }
}

/// Weighted sum of Pauli strings on `n_qubits` sites.
#[derive(Clone, Debug, PartialEq)]
pub struct OperatorSum<T: Real> {
    n_qubits: usize,
    terms: Vec<PauliTerm<T>>,
}

impl<T: Real> OperatorSum<T> {
    pub fn zero(n_qubits: usize) -> Self {
        Self { n_qubits, terms: Vec::new() }
    }

    pub fn identity(n_qubits: usize, coefficient: C<T>) -> Self {
        Self { n_qubits, terms: vec![PauliTerm::identity(coefficient)] }
    }

    pub fn from_terms(n_qubits: usize, terms: impl IntoIterator<Item = PauliTerm<T>>) -> Result<Self> {
        let mut out = Self::zero(n_qubits);
        for t in terms {
            out.push(t)?;
        }
        Ok(out)
    }

    pub fn from_term(n_qubits: usize, term: PauliTerm<T>) -> Result<Self> {
        Self::from_terms(n_qubits, [term])
    }

    pub fn push(&mut self, term: PauliTerm<T>) -> Result<()> {
        if let Some(&site) = term.factors.keys().next_back() {
            if site >= self.n_qubits {
                return Err(Error::OutOfRange(format!("site {site} on a {}-qubit operator", self.n_qubits)));
            }
        }
        self.terms.push(term);
        Ok(())
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        1usize << self.n_qubits
    }

    pub fn terms(&self) -> &[PauliTerm<T>] {
        &self.terms
    }

    fn check_same_size(&self, other: &Self) -> Result<()> {
        if self.n_qubits != other.n_qubits {
            return Err(Error::Dimension(format!("{}-qubit vs {}-qubit operator", self.n_qubits, other.n_qubits)));
        }
        Ok(())
    }

    /// Merges identical strings and drops coefficients below [`Real::prune_tol`].
    /// Terms come out sorted by their factor maps.
    pub fn canonicalize(&self) -> Self {
        let mut merged: BTreeMap<&BTreeMap<usize, Axis>, C<T>> = BTreeMap::new();
        for t in &self.terms {
            let slot = merged.entry(&t.factors).or_insert_with(|| cr(T::zero()));
            *slot += t.coefficient;
        }
        let tol = T::prune_tol();
        let terms = merged
            .into_iter()
            .filter(|(_, coeff)| coeff.re.abs() >= tol || coeff.im.abs() >= tol)
            .map(|(factors, coeff)| PauliTerm { coefficient: prune_parts(coeff, tol), factors: factors.clone() })
            .collect();
        Self { n_qubits: self.n_qubits, terms }
    }

    pub fn is_zero(&self) -> bool {
        self.canonicalize().terms.is_empty()
    }

    pub fn is_hermitian(&self) -> bool {
        self.max_imag_coefficient() < T::prune_tol()
    }

    pub fn max_imag_coefficient(&self) -> T {
        self.canonicalize().terms.iter().fold(T::zero(), |m, t| m.max(t.coefficient.im.abs()))
    }

    pub fn plus(&self, other: &Self) -> Result<Self> {
        self.check_same_size(other)?;
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        Ok(Self { n_qubits: self.n_qubits, terms }.canonicalize())
    }

    pub fn minus(&self, other: &Self) -> Result<Self> {
        self.plus(&other.scale(cr(-T::one())))
    }

    pub fn scale(&self, factor: C<T>) -> Self {
        let terms = self.terms.iter().map(|t| t.with_coefficient(t.coefficient * factor)).collect();
        Self { n_qubits: self.n_qubits, terms }
    }

    pub fn adjoint(&self) -> Self {
        let terms = self.terms.iter().map(|t| t.with_coefficient(t.coefficient.conj())).collect();
        Self { n_qubits: self.n_qubits, terms }
    }

    /// Operator product `self * other`, canonicalized.
    pub fn product(&self, other: &Self) -> Result<Self> {
        self.check_same_size(other)?;
        let mut terms = Vec::with_capacity(self.terms.len() * other.terms.len());
        for a in &self.terms {
            for b in &other.terms {
                terms.push(a.multiply(b));
            }
        }
        Ok(Self { n_qubits: self.n_qubits, terms }.canonicalize())
    }

    /// Union of the supports of all (canonical) terms.
    pub fn support(&self) -> BTreeSet<usize> {
        self.canonicalize().terms.iter().flat_map(|t| t.support()).collect()
    }

    /// Sum of the coefficients of identity terms.
    pub fn identity_coefficient(&self) -> C<T> {
        self.terms.iter().filter(|t| t.is_identity()).fold(cr(T::zero()), |acc, t| acc + t.coefficient)
    }

    fn compiled(&self) -> Vec<CompiledTerm<T>> {
        self.terms.iter().map(PauliTerm::compiled).collect()
    }

    pub fn to_matrix(&self) -> Result<DMatrix<C<T>>> {
        self.to_matrix_with_limit(DEFAULT_DENSE_LIMIT)
    }

    pub fn to_matrix_with_limit(&self, limit: usize) -> Result<DMatrix<C<T>>> {
        if self.n_qubits > limit {
            return Err(Error::Size(format!("{} qubits exceeds the dense limit of {limit}", self.n_qubits)));
        }
        let dim = self.dim();
        let mut m = DMatrix::from_element(dim, dim, cr(T::zero()));
        for t in self.compiled() {
            for b in 0..dim as u64 {
                let v = if t.sign(b) { -t.coeff } else { t.coeff };
                m[((b ^ t.x) as usize, b as usize)] += v;
            }
        }
        Ok(m)
    }

    fn check_state_len(&self, len: usize) -> Result<()> {
        if len != self.dim() {
            return Err(Error::Dimension(format!("state of length {len} for a {}-qubit operator", self.n_qubits)));
        }
        Ok(())
    }

    /// Matrix-free `out = self * input`.
    pub fn apply_into(&self, input: &[C<T>], out: &mut [C<T>]) -> Result<()> {
        self.check_state_len(input.len())?;
        self.check_state_len(out.len())?;
        let compiled = self.compiled();
        let row = |b: usize| {
            let b = b as u64;
            let mut acc = cr(T::zero());
            for t in &compiled {
                let src = b ^ t.x;
                let v = t.coeff * input[src as usize];
                if t.sign(src) {
                    acc -= v;
                } else {
                    acc += v;
                }
            }
            acc
        };
        if out.len() >= PARALLEL_APPLY_DIM {
            out.par_iter_mut().enumerate().for_each(|(b, o)| *o = row(b));
        } else {
            out.iter_mut().enumerate().for_each(|(b, o)| *o = row(b));
        }
        Ok(())
    }

    pub fn apply(&self, input: &[C<T>]) -> Result<Vec<C<T>>> {
        let mut out = vec![cr(T::zero()); input.len()];
        self.apply_into(input, &mut out)?;
        Ok(out)
    }

    /// `<psi|self|psi>` without any normalization requirement.
    pub fn expectation_raw(&self, psi: &[C<T>]) -> Result<C<T>> {
        self.check_state_len(psi.len())?;
        let mut total = cr(T::zero());
        for t in self.compiled() {
            let mut acc = cr(T::zero());
            for (b, amp) in psi.iter().enumerate() {
                let src = b as u64 ^ t.x;
                let v = amp.conj() * psi[src as usize];
                if t.sign(src) {
                    acc -= v;
                } else {
                    acc += v;
                }
            }
            total += acc * t.coeff;
        }
        Ok(total)
    }

    pub fn to_json(&self) -> Result<String> {
        let records: Vec<TermRecord> = self
            .terms
            .iter()
            .map(|t| TermRecord {
                coefficient: [t.coefficient.re.to_f64_lossy(), t.coefficient.im.to_f64_lossy()],
                factors: t.factors.iter().map(|(s, a)| (s.to_string(), *a)).collect(),
            })
            .collect();
        Ok(serde_json::to_string(&records)?)
    }

    pub fn from_json(n_qubits: usize, json: &str) -> Result<Self> {
        let records: Vec<TermRecord> = serde_json::from_str(json)?;
        let mut out = Self::zero(n_qubits);
        for r in records {
            let mut factors = Vec::with_capacity(r.factors.len());
            for (site, axis) in r.factors {
                let site = site.parse::<usize>().map_err(|_| Error::Invalid(format!("bad site key {site:?}")))?;
                factors.push((site, axis));
            }
            out.push(PauliTerm::new(c(T::lit(r.coefficient[0]), T::lit(r.coefficient[1])), factors)?)?;
        }
        Ok(out)
    }
}

fn prune_parts<T: Real>(z: C<T>, tol: T) -> C<T> {
    let re = if z.re.abs() < tol { T::zero() } else { z.re };
    let im = if z.im.abs() < tol { T::zero() } else { z.im };
    c(re, im)
}

#[derive(Serialize, Deserialize)]
struct TermRecord {
    coefficient: [f64; 2],
    factors: BTreeMap<String, Axis>,
}

/// `[a, b] = ab - ba`, computed term by term: commuting string pairs contribute
/// nothing and anticommuting pairs contribute `2ab`.
pub fn commutator<T: Real>(a: &OperatorSum<T>, b: &OperatorSum<T>) -> Result<OperatorSum<T>> {
    a.check_same_size(b)?;
    let two = cr(T::lit(2.0));
    let mut terms = Vec::new();
    for ta in &a.terms {
        for tb in &b.terms {
            if !ta.commutes_with(tb) {
                let p = ta.multiply(tb);
                terms.push(p.with_coefficient(p.coefficient * two));
            }
        }
    }
    Ok(OperatorSum { n_qubits: a.n_qubits, terms }.canonicalize())
}

/// `<state|op|state>` for a normalized state.
pub fn expectation<T: Real>(state: &[C<T>], op: &OperatorSum<T>) -> Result<C<T>> {
    check_normalized(state)?;
    op.expectation_raw(state)
}

pub fn norm_sqr<T: Real>(state: &[C<T>]) -> T {
    state.iter().fold(T::zero(), |acc, a| acc + a.norm_sqr())
}

pub(crate) fn check_normalized<T: Real>(state: &[C<T>]) -> Result<()> {
    let deviation = (norm_sqr(state).sqrt() - T::one()).abs();
    if deviation > T::norm_tol() {
        return Err(Error::Normalization { deviation: deviation.to_f64_lossy() });
    }
    Ok(())
}
