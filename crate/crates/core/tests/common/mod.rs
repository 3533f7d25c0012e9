#![allow(dead_code)]

use nalgebra::{DMatrix, SymmetricEigen};
use qetlab::models::FermionKind;

/// Hopping matrix `A` and pairing matrix `B` of
/// `H = sum A_ij c+_i c_j + 1/2 sum (B_ij c+_i c+_j + h.c.)`.
pub fn quadratic_form(kind: FermionKind, size: usize, lambda: f64) -> (DMatrix<f64>, DMatrix<f64>) {
    match kind {
        FermionKind::Kitaev => {
            let mut a = DMatrix::zeros(size, size);
            let mut b = DMatrix::zeros(size, size);
            for j in 0..size - 1 {
                a[(j, j + 1)] = 1.0;
                a[(j + 1, j)] = 1.0;
                b[(j, j + 1)] = lambda;
                b[(j + 1, j)] = -lambda;
            }
            (a, b)
        }
        FermionKind::Ssh => {
            let n = 2 * size;
            let mut a = DMatrix::zeros(n, n);
            for cell in 0..size {
                let (p, q) = (2 * cell, 2 * cell + 1);
                a[(p, q)] = 2.0 * (1.0 - lambda);
                a[(q, p)] = 2.0 * (1.0 - lambda);
                if cell + 1 < size {
                    a[(p + 2, q)] = 2.0 * lambda;
                    a[(q, p + 2)] = 2.0 * lambda;
                }
            }
            (a, DMatrix::zeros(n, n))
        }
    }
}

/// All `2^L` many-body energies from the Bogoliubov-de Gennes spectrum,
/// ascending: `Tr A / 2 - sum_k e_k / 2 + sum_{k in S} e_k`.
pub fn free_fermion_spectrum(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Vec<f64> {
    let l = a.nrows();
    let mut m = DMatrix::zeros(2 * l, 2 * l);
    m.view_mut((0, 0), (l, l)).copy_from(a);
    m.view_mut((0, l), (l, l)).copy_from(b);
    m.view_mut((l, 0), (l, l)).copy_from(&b.transpose());
    m.view_mut((l, l), (l, l)).copy_from(&(-a.transpose()));
    let mut bdg: Vec<f64> = SymmetricEigen::new(m).eigenvalues.iter().copied().collect();
    bdg.sort_by(f64::total_cmp);
    let modes: Vec<f64> = bdg[l..].iter().map(|e| e.max(0.0)).collect();
    let base = 0.5 * a.trace() - 0.5 * modes.iter().sum::<f64>();
    let mut energies: Vec<f64> = (0..1usize << l)
        .map(|set| base + (0..l).filter(|k| set >> k & 1 == 1).map(|k| modes[k]).sum::<f64>())
        .collect();
    energies.sort_by(f64::total_cmp);
    energies
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
