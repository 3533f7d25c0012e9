//! Matrix-free Lanczos with full reorthogonalization.
//!
//! Each run starts from a seeded random vector. A second run from an
//! independent seed has to reproduce the ground energy; if the two Ritz
//! vectors differ while the energies agree, the ground space is degenerate.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{fix_phase, normalize, residual_inf, GroundState};
use crate::error::{Error, Result};
use crate::pauli::OperatorSum;
use crate::scalar::{cr, Real, C};

#[derive(Clone, Debug)]
pub struct LanczosOptions {
    pub max_iter: usize,
    /// Ritz residual `beta_k |y_k|` at which the lowest pair counts as converged.
    pub tol: f64,
    pub seed: u64,
    /// Agreement required between the two independent runs.
    pub confirm_tol: f64,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        Self { max_iter: 500, tol: 1e-10, seed: 0x5EED_0001, confirm_tol: 1e-9 }
    }
}

const SECOND_SEED_MIX: u64 = 0x9E37_79B9_7F4A_7C15;

#[derive(Clone, Debug)]
pub struct LanczosRun<T: Real> {
    pub energy: T,
    pub second_ritz: Option<T>,
    pub vector: Vec<C<T>>,
    pub iterations: usize,
}

fn dot<T: Real>(a: &[C<T>], b: &[C<T>]) -> C<T> {
    a.iter().zip(b).fold(cr(T::zero()), |acc, (x, y)| acc + x.conj() * y)
}

fn axpy<T: Real>(y: &mut [C<T>], alpha: C<T>, x: &[C<T>]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

fn lowest_ritz<T: Real>(alphas: &[T], betas: &[T]) -> (Vec<T>, DMatrix<T>) {
    let k = alphas.len();
    let mut t = DMatrix::zeros(k, k);
    for i in 0..k {
        t[(i, i)] = alphas[i];
        if i + 1 < k {
            t[(i, i + 1)] = betas[i];
            t[(i + 1, i)] = betas[i];
        }
    }
    let eig = SymmetricEigen::new(t);
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).unwrap_or(std::cmp::Ordering::Equal));
    let vals = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vecs = DMatrix::from_columns(
        &order.iter().map(|&i| eig.eigenvectors.column(i).into_owned()).collect::<Vec<DVector<T>>>(),
    );
    (vals, vecs)
}

/// One Lanczos run from the start vector drawn with `seed`.
pub fn run<T: Real>(op: &OperatorSum<T>, opts: &LanczosOptions, seed: u64) -> Result<LanczosRun<T>> {
    let dim = op.dim();
    let max_steps = opts.max_iter.min(dim).max(1);
    let tol = T::lit(opts.tol);
    let breakdown = T::lit(1e-14);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v: Vec<C<T>> =
        (0..dim).map(|_| C::new(T::lit(rng.gen_range(-1.0..1.0)), T::lit(rng.gen_range(-1.0..1.0)))).collect();
    normalize(&mut v);

    let mut basis: Vec<Vec<C<T>>> = vec![v];
    let mut alphas: Vec<T> = Vec::new();
    let mut betas: Vec<T> = Vec::new();
    let mut w = vec![cr(T::zero()); dim];

    loop {
        let j = alphas.len();
        op.apply_into(&basis[j], &mut w)?;
        let alpha = dot(&basis[j], &w).re;
        axpy(&mut w, cr(-alpha), &basis[j]);
        if j > 0 {
            axpy(&mut w, cr(-betas[j - 1]), &basis[j - 1]);
        }
        for _ in 0..2 {
            for q in &basis {
                let proj = dot(q, &w);
                axpy(&mut w, -proj, q);
            }
        }
        let beta = w.iter().fold(T::zero(), |acc, a| acc + a.norm_sqr()).sqrt();
        alphas.push(alpha);

        let steps = alphas.len();
        let exhausted = beta < breakdown || steps >= max_steps;
        let check = exhausted || steps <= 30 || steps.is_multiple_of(5);
        if check {
            let (vals, vecs) = lowest_ritz(&alphas, &betas);
            let ritz_residual = beta * vecs[(steps - 1, 0)].abs();
            if ritz_residual < tol || exhausted {
                if ritz_residual >= tol && steps < dim && beta >= breakdown {
                    return Err(Error::Convergence(format!(
                        "Ritz residual {:e} after {steps} iterations",
                        ritz_residual.to_f64_lossy()
                    )));
                }
                let mut x = vec![cr(T::zero()); dim];
                for (i, q) in basis.iter().enumerate().take(steps) {
                    axpy(&mut x, cr(vecs[(i, 0)]), q);
                }
                normalize(&mut x);
                return Ok(LanczosRun {
                    energy: vals[0],
                    second_ritz: vals.get(1).copied(),
                    vector: x,
                    iterations: steps,
                });
            }
        }
        let next: Vec<C<T>> = w.iter().map(|a| *a / cr(beta)).collect();
        betas.push(beta);
        basis.push(next);
    }
}

pub fn ground_state<T: Real>(op: &OperatorSum<T>, opts: &LanczosOptions) -> Result<GroundState<T>> {
    let first = run(op, opts, opts.seed)?;
    let second = run(op, opts, opts.seed ^ SECOND_SEED_MIX)?;
    if (first.energy - second.energy).abs() > T::lit(opts.confirm_tol) {
        return Err(Error::Convergence(format!(
            "independent starts disagree: {} vs {}",
            first.energy.to_f64_lossy(),
            second.energy.to_f64_lossy()
        )));
    }
    let overlap = dot(&first.vector, &second.vector).norm_sqr().sqrt();
    let mut vector = first.vector;
    let residual = residual_inf(op, &vector, first.energy)?;
    if residual > T::lit(1e-8).max(T::contract_tol()) {
        return Err(Error::Convergence(format!("eigen-residual {:e}", residual.to_f64_lossy())));
    }
    fix_phase(&mut vector);
    let split_vectors = overlap < T::one() - T::lit(1e-6);
    let ritz_gap = first.second_ritz.map_or(T::zero(), |e1| e1 - first.energy);
    let degenerate = split_vectors || ritz_gap < T::contract_tol();
    Ok(GroundState {
        amplitudes: DVector::from_vec(vector),
        energy: first.energy,
        gap: if split_vectors { T::zero() } else { ritz_gap },
        degenerate,
    })
}
