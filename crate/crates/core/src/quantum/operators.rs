//! Collective spin operators on the Dicke basis, `m = -J..J` ascending.

use nalgebra::{Complex, DMatrix};

use crate::error::{Error, Result};
use crate::model::{dicke_dim, DickeState};

pub type C64 = Complex<f64>;

/// Largest dimension `2J+1` accepted for dense storage.
pub const DENSE_CAP: usize = 4097;

/// Ladder coefficients `a_k = √(J(J+1) - m_k(m_k+1))`, `k = 0..2J-1`, so that
/// `J_+ |m_k⟩ = a_k |m_{k+1}⟩`.
pub fn ladder_coefficients(j: f64) -> Result<Vec<f64>> {
    let dim = dicke_dim(j)?;
    Ok((0..dim - 1)
        .map(|k| {
            let m = k as f64 - j;
            (j * (j + 1.0) - m * (m + 1.0)).max(0.0).sqrt()
        })
        .collect())
}

/// Dense `J_x, J_y, J_z, J_x²`.
#[derive(Debug, Clone, PartialEq)]
pub struct CollectiveOperators {
    pub j: f64,
    pub jx: DMatrix<C64>,
    pub jy: DMatrix<C64>,
    pub jz: DMatrix<C64>,
    pub jx2: DMatrix<C64>,
}

pub fn build_operators(j: f64) -> Result<CollectiveOperators> {
    build_operators_capped(j, DENSE_CAP)
}

pub fn build_operators_capped(j: f64, cap: usize) -> Result<CollectiveOperators> {
    let dim = dicke_dim(j)?;
    if dim > cap {
        return Err(Error::Capacity { dim, cap });
    }
    let a = ladder_coefficients(j)?;
    let zero = C64::new(0.0, 0.0);
    let mut jx = DMatrix::from_element(dim, dim, zero);
    let mut jy = DMatrix::from_element(dim, dim, zero);
    let mut jz = DMatrix::from_element(dim, dim, zero);
    for k in 0..dim {
        jz[(k, k)] = C64::new(k as f64 - j, 0.0);
    }
    for (k, &ak) in a.iter().enumerate() {
        jx[(k + 1, k)] = C64::new(0.5 * ak, 0.0);
        jx[(k, k + 1)] = C64::new(0.5 * ak, 0.0);
        // J_y = (J_+ - J_-) / 2i
        jy[(k + 1, k)] = C64::new(0.0, -0.5 * ak);
        jy[(k, k + 1)] = C64::new(0.0, 0.5 * ak);
    }
    let jx2 = &jx * &jx;
    Ok(CollectiveOperators { j, jx, jy, jz, jx2 })
}

/// `(⟨J_x⟩, ⟨J_y⟩, ⟨J_z⟩)` from the banded structure, `O(2J)`.
pub fn spin_expectations(state: &DickeState, ladder: &[f64]) -> [f64; 3] {
    let psi = state.amplitudes();
    let j = state.j();
    let mut jplus = C64::new(0.0, 0.0);
    for (k, &ak) in ladder.iter().enumerate() {
        jplus += psi[k + 1].conj() * psi[k] * ak;
    }
    let jz: f64 = psi
        .iter()
        .enumerate()
        .map(|(k, c)| (k as f64 - j) * c.norm_sqr())
        .sum();
    [jplus.re, jplus.im, jz]
}

/// `⟨J_x⟩` of raw amplitudes.
#[inline]
pub(crate) fn jx_expectation(psi: &[C64], ladder: &[f64]) -> f64 {
    let mut acc = 0.0;
    for (k, &ak) in ladder.iter().enumerate() {
        let p = psi[k + 1].conj() * psi[k];
        acc += ak * p.re;
    }
    acc
}
