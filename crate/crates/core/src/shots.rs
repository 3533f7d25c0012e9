//! Shot-based realization of the protocol on a statevector.
//!
//! A shot starts from the ground state, samples Alice's outcome with the Born
//! rule, applies Bob's rotation for that outcome and reads out one Pauli
//! string as `+1` or `-1`. Every shot consumes exactly two uniform draws
//! (three for the decorrelated control), in that order.
//!
//! Randomness comes from ChaCha8. Shots are grouped into batches of
//! [`BATCH_SIZE`]; batch `k` of observable `j` owns the stream
//! `(j << 32) | k` under the run seed, so totals do not depend on how batches
//! are spread over threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::eigensolve::GroundState;
use crate::error::{Error, Result};
use crate::models::SpinChainModel;
use crate::pauli::{check_normalized, Axis, OperatorSum, PauliTerm};
use crate::qet::{conditional_unitary, projector, Outcome, QetConfig};
use crate::scalar::C;

pub const BATCH_SIZE: u64 = 65_536;
/// Below this many shots the standard errors are flagged as unreliable.
pub const MIN_RELIABLE_SHOTS: u64 = 1_000;

type Amp = C<f64>;

pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn batch_rng(seed: u64, observable: u32, batch: u32) -> ChaCha8Rng {
    let mut rng = seeded_rng(seed);
    rng.set_stream(((observable as u64) << 32) | batch as u64);
    rng
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ShotEstimate {
    pub observable: String,
    pub mean: f64,
    /// Sample standard deviation over `sqrt(shots)`.
    pub std_error: f64,
    pub shots: u64,
}

impl ShotEstimate {
    /// Estimate from the number of `+1` readouts among `shots`.
    pub fn from_counts(observable: String, plus: u64, shots: u64) -> Result<Self> {
        if shots == 0 {
            return Err(Error::Invalid("an estimate needs at least one shot".into()));
        }
        let n = shots as f64;
        let mean = (2.0 * plus as f64 - n) / n;
        let std_error = if shots > 1 { ((1.0 - mean * mean).max(0.0) * n / (n - 1.0)).sqrt() / n.sqrt() } else { 0.0 };
        Ok(Self { observable, mean, std_error, shots })
    }
}

/// `(I + mu sigma)|psi> / sqrt(p_mu)` together with `p_mu`.
fn collapse(state: &[Amp], axis: Axis, site: usize, mu: Outcome) -> Result<(f64, Vec<Amp>)> {
    let n = state.len().trailing_zeros() as usize;
    let mut projected = projector::<f64>(axis, site, mu, n)?.apply(state)?;
    let p: f64 = projected.iter().map(|a| a.norm_sqr()).sum();
    if p > 0.0 {
        let scale = 1.0 / p.sqrt();
        projected.iter_mut().for_each(|a| *a *= scale);
    }
    Ok((p, projected))
}

/// Probability of reading `+1` for the Pauli string.
fn plus_probability(state: &[Amp], observable: &PauliTerm<f64>) -> Result<f64> {
    let n = state.len().trailing_zeros() as usize;
    let op = OperatorSum::from_term(n, observable.with_coefficient(C::new(1.0, 0.0)))?;
    let value = op.expectation_raw(state)?.re;
    Ok((0.5 * (1.0 + value)).clamp(0.0, 1.0))
}

fn draw_outcome(p_plus: f64, rng: &mut impl Rng) -> Outcome {
    if rng.gen::<f64>() < p_plus {
        Outcome::Plus
    } else {
        Outcome::Minus
    }
}

fn draw_readout(q_plus: f64, rng: &mut impl Rng) -> i8 {
    if rng.gen::<f64>() < q_plus {
        1
    } else {
        -1
    }
}

/// Projective measurement of one Pauli factor: the outcome and the collapsed state.
pub fn measure_pauli_sample(state: &[Amp], axis: Axis, site: usize, rng: &mut impl Rng) -> Result<(Outcome, Vec<Amp>)> {
    check_normalized(state)?;
    let (p_plus, plus_state) = collapse(state, axis, site, Outcome::Plus)?;
    match draw_outcome(p_plus, rng) {
        Outcome::Plus => Ok((Outcome::Plus, plus_state)),
        Outcome::Minus => Ok((Outcome::Minus, collapse(state, axis, site, Outcome::Minus)?.1)),
    }
}

/// Single-shot readout of a Pauli string (coefficient ignored).
pub fn measure_pauli_string(state: &[Amp], observable: &PauliTerm<f64>, rng: &mut impl Rng) -> Result<i8> {
    Ok(draw_readout(plus_probability(state, observable)?, rng))
}

/// How Bob's rotation is chosen.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Feedforward {
    /// `U(mu)` with Alice's recorded outcome.
    #[default]
    Recorded,
    /// `U(mu')` with `mu'` drawn afresh from the same marginal; a negative control.
    Decorrelated,
}

#[derive(Clone, Debug)]
pub struct ProtocolRun<'a> {
    pub model: &'a SpinChainModel<f64>,
    pub ground: &'a GroundState<f64>,
    pub config: QetConfig,
    pub theta: f64,
    pub shots: u64,
    pub seed: u64,
    pub observables: Vec<PauliTerm<f64>>,
    pub feedforward: Feedforward,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ShotRecord {
    pub mu: Outcome,
    pub readout: i8,
}

impl<'a> ProtocolRun<'a> {
    pub fn new(model: &'a SpinChainModel<f64>, ground: &'a GroundState<f64>, config: QetConfig, theta: f64) -> Self {
        Self {
            model,
            ground,
            config,
            theta,
            shots: 100_000,
            seed: 0,
            observables: Vec::new(),
            feedforward: Feedforward::Recorded,
        }
    }

    pub fn with_shots(mut self, shots: u64) -> Self {
        self.shots = shots;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_observables(mut self, observables: Vec<PauliTerm<f64>>) -> Self {
        self.observables = observables;
        self
    }

    pub fn with_feedforward(mut self, feedforward: Feedforward) -> Self {
        self.feedforward = feedforward;
        self
    }

    fn n_qubits(&self) -> usize {
        self.model.n_sites()
    }

    fn rotate(&self, state: &[Amp], mu: Outcome) -> Result<Vec<Amp>> {
        conditional_unitary(self.theta, self.config.axis_b, self.config.n_b, mu, self.n_qubits())?.apply(state)
    }
}

/// One shot, applying every operator explicitly. Reference for the batched sampler.
pub fn run_protocol_once(run: &ProtocolRun<'_>, observable: &PauliTerm<f64>, rng: &mut impl Rng) -> Result<ShotRecord> {
    let cfg = &run.config;
    cfg.validate(run.n_qubits())?;
    let (mu, collapsed) = measure_pauli_sample(run.ground.as_slice(), cfg.axis_a, cfg.n_a, rng)?;
    let applied = match run.feedforward {
        Feedforward::Recorded => mu,
        Feedforward::Decorrelated => {
            let (p_plus, _) = collapse(run.ground.as_slice(), cfg.axis_a, cfg.n_a, Outcome::Plus)?;
            draw_outcome(p_plus, rng)
        }
    };
    let rotated = run.rotate(&collapsed, applied)?;
    let readout = measure_pauli_string(&rotated, observable, rng)?;
    Ok(ShotRecord { mu, readout })
}

/// Born weights and readout probabilities, computed once per observable.
struct Prepared {
    p_plus: f64,
    /// `q[measured][applied]`, the `+1` readout probability.
    q: [[f64; 2]; 2],
    feedforward: Feedforward,
}

impl Prepared {
    fn new(run: &ProtocolRun<'_>, observable: &PauliTerm<f64>) -> Result<Self> {
        let cfg = &run.config;
        cfg.validate(run.n_qubits())?;
        check_normalized(run.ground.as_slice())?;
        let g = run.ground.as_slice();
        let (p_plus, plus_state) = collapse(g, cfg.axis_a, cfg.n_a, Outcome::Plus)?;
        let (_, minus_state) = collapse(g, cfg.axis_a, cfg.n_a, Outcome::Minus)?;
        let mut q = [[0.0; 2]; 2];
        for (i, state) in [plus_state, minus_state].iter().enumerate() {
            for (j, mu) in Outcome::BOTH.into_iter().enumerate() {
                q[i][j] = plus_probability(&run.rotate(state, mu)?, observable)?;
            }
        }
        Ok(Self { p_plus, q, feedforward: run.feedforward })
    }

    fn index(mu: Outcome) -> usize {
        match mu {
            Outcome::Plus => 0,
            Outcome::Minus => 1,
        }
    }

    fn shot(&self, rng: &mut impl Rng) -> i8 {
        let mu = draw_outcome(self.p_plus, rng);
        let applied = match self.feedforward {
            Feedforward::Recorded => mu,
            Feedforward::Decorrelated => draw_outcome(self.p_plus, rng),
        };
        draw_readout(self.q[Self::index(mu)][Self::index(applied)], rng)
    }

    fn count_plus(&self, seed: u64, observable: u32, batch: u32, shots: u64) -> u64 {
        let mut rng = batch_rng(seed, observable, batch);
        (0..shots).filter(|_| self.shot(&mut rng) == 1).count() as u64
    }
}

/// Samples `shots` readouts of one Pauli string after the protocol.
///
/// `index` selects the family of sub-streams, so distinct observables in one
/// run are statistically independent.
pub fn estimate_observable(run: &ProtocolRun<'_>, observable: &PauliTerm<f64>, index: u32) -> Result<ShotEstimate> {
    if run.shots == 0 {
        return Err(Error::Invalid("shots must be at least 1".into()));
    }
    let prepared = Prepared::new(run, observable)?;
    let batches = run.shots.div_ceil(BATCH_SIZE);
    if batches > u32::MAX as u64 {
        return Err(Error::Invalid(format!("{} shots exceed the stream budget", run.shots)));
    }
    let plus: u64 = (0..batches)
        .into_par_iter()
        .map(|k| {
            let len = BATCH_SIZE.min(run.shots - k * BATCH_SIZE);
            prepared.count_plus(run.seed, index, k as u32, len)
        })
        .sum();
    ShotEstimate::from_counts(observable.label(), plus, run.shots)
}

/// Estimates every observable of the run, each with its own sub-streams.
pub fn estimate_all(run: &ProtocolRun<'_>) -> Result<Vec<ShotEstimate>> {
    run.observables.iter().enumerate().map(|(i, o)| estimate_observable(run, o, i as u32)).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BobEnergyEstimate {
    pub energy: ShotEstimate,
    /// Per-term estimates with their real coefficients in `H_{n_B}`.
    pub terms: Vec<(f64, ShotEstimate)>,
    pub epsilon: f64,
    pub warning: Option<String>,
}

/// `<H_{n_B}>` from the sampled Pauli terms of `H_{n_B}` plus `epsilon_{n_B}`,
/// errors added in quadrature.
///
/// Observables use stream families `offset, offset + 1, ...` in the order of
/// the canonical terms of `H_{n_B}`.
pub fn estimate_bob_energy(run: &ProtocolRun<'_>, stream_offset: u32) -> Result<BobEnergyEstimate> {
    let n_b = run.config.n_b;
    let epsilon = run
        .model
        .epsilon()
        .ok_or_else(|| Error::Contract("model is not calibrated; local offsets are missing".into()))?[n_b];
    let local = run.model.local_hamiltonian_bare(n_b)?;
    let mut terms = Vec::new();
    let mut mean = epsilon;
    let mut variance = 0.0;
    for (i, term) in local.terms().iter().filter(|t| !t.is_identity()).enumerate() {
        if term.coefficient.im.abs() > 1e-12 {
            return Err(Error::Algebra(format!("term {} has a complex coefficient", term.label())));
        }
        let coefficient = term.coefficient.re;
        let estimate = estimate_observable(run, term, stream_offset + i as u32)?;
        mean += coefficient * estimate.mean;
        variance += (coefficient * estimate.std_error).powi(2);
        terms.push((coefficient, estimate));
    }
    let warning = (run.shots < MIN_RELIABLE_SHOTS).then(|| {
        format!("{} shots per observable; standard errors are unreliable below {MIN_RELIABLE_SHOTS}", run.shots)
    });
    Ok(BobEnergyEstimate {
        energy: ShotEstimate { observable: format!("H_{n_b}"), mean, std_error: variance.sqrt(), shots: run.shots },
        terms,
        epsilon,
        warning,
    })
}
