//! The LMG Hamiltonian in the Dicke basis and its parity-resolved spectrum.
//!
//! `H_0 = -(1-s) J_z - (s/N) J_x²` only couples `m` to `m ± 2`, so it splits
//! into two blocks by the parity of `J - m`. Each block is diagonalized
//! separately, which keeps every eigenvector a parity eigenstate even when
//! the two blocks are numerically degenerate.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use super::operators::{ladder_coefficients, C64, DENSE_CAP};
use crate::error::{Error, Result};
use crate::model::{dicke_dim, DickeState, ModelParams};

#[derive(Debug, Clone)]
pub struct HamiltonianSpec {
    params: ModelParams,
    ladder: Vec<f64>,
    /// Diagonal of `H_0`.
    diag: Vec<f64>,
    /// `(H_0)_{k,k+2}`.
    off2: Vec<f64>,
}

impl HamiltonianSpec {
    pub fn new(params: ModelParams) -> Result<Self> {
        let j = params.j();
        let ladder = ladder_coefficients(j)?;
        let dim = ladder.len() + 1;
        let (s, n) = (params.s(), params.n() as f64);
        let a2 = |k: isize| -> f64 {
            if k < 0 || k as usize >= ladder.len() {
                0.0
            } else {
                ladder[k as usize].powi(2)
            }
        };
        let diag = (0..dim)
            .map(|k| {
                let m = k as f64 - j;
                let jx2 = 0.25 * (a2(k as isize - 1) + a2(k as isize));
                -(1.0 - s) * m - s / n * jx2
            })
            .collect();
        let off2 = (0..dim.saturating_sub(2))
            .map(|k| -s / n * 0.25 * ladder[k] * ladder[k + 1])
            .collect();
        Ok(Self {
            params,
            ladder,
            diag,
            off2,
        })
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn j(&self) -> f64 {
        self.params.j()
    }

    /// `a_k` with `J_+|m_k⟩ = a_k|m_{k+1}⟩`.
    pub fn ladder(&self) -> &[f64] {
        &self.ladder
    }

    /// Dense `H_0` (real symmetric, hence Hermitian).
    pub fn h0(&self) -> DMatrix<f64> {
        let d = self.dim();
        let mut h = DMatrix::from_diagonal(&DVector::from_column_slice(&self.diag));
        for (k, &v) in self.off2.iter().enumerate() {
            h[(k, k + 2)] = v;
            h[(k + 2, k)] = v;
        }
        debug_assert_eq!(h.nrows(), d);
        h
    }

    /// Dense drive operator `-J_y`; the runtime coefficient is `ε0 cos(ωt)`.
    pub fn drive(&self) -> DMatrix<C64> {
        let d = self.dim();
        let mut m = DMatrix::from_element(d, d, C64::new(0.0, 0.0));
        for (k, &a) in self.ladder.iter().enumerate() {
            m[(k + 1, k)] = C64::new(0.0, 0.5 * a);
            m[(k, k + 1)] = C64::new(0.0, -0.5 * a);
        }
        m
    }

    /// Dense `H(t) = H_0 - ε0 cos(ωt) J_y`.
    pub fn dense_at(&self, t: f64) -> DMatrix<C64> {
        let f = self.params.drive(t);
        self.h0().map(|v| C64::new(v, 0.0)) + self.drive() * C64::new(f, 0.0)
    }

    /// Gershgorin bound on `|E|` for `H_0`.
    pub fn h0_norm_bound(&self) -> f64 {
        let (lo, hi) = self.gershgorin_interval(0.0);
        lo.abs().max(hi.abs())
    }

    /// Interval `[lo, hi]` containing the spectrum of `H(t)` for any `t`.
    pub(crate) fn spectral_interval(&self) -> (f64, f64) {
        self.gershgorin_interval(self.params.eps0().abs())
    }

    fn gershgorin_interval(&self, drive_amp: f64) -> (f64, f64) {
        let d = self.dim();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for k in 0..d {
            let mut r = 0.0;
            if k >= 2 {
                r += self.off2[k - 2].abs();
            }
            if k + 2 < d {
                r += self.off2[k].abs();
            }
            if k >= 1 {
                r += drive_amp * 0.5 * self.ladder[k - 1];
            }
            if k + 1 < d {
                r += drive_amp * 0.5 * self.ladder[k];
            }
            lo = lo.min(self.diag[k] - r);
            hi = hi.max(self.diag[k] + r);
        }
        (lo, hi)
    }

    pub(crate) fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub(crate) fn off2(&self) -> &[f64] {
        &self.off2
    }

    /// `⟨ψ|H_0|ψ⟩`.
    pub fn energy(&self, state: &DickeState) -> f64 {
        let psi = state.amplitudes();
        let mut e = 0.0;
        for (k, c) in psi.iter().enumerate() {
            e += self.diag[k] * c.norm_sqr();
        }
        for (k, &v) in self.off2.iter().enumerate() {
            e += 2.0 * v * (psi[k].conj() * psi[k + 2]).re;
        }
        e
    }
}

/// One parity block: Dicke indices and the block eigenpairs.
#[derive(Debug, Clone)]
pub(crate) struct ParityBlock {
    pub indices: Vec<usize>,
    pub energies: Vec<f64>,
    /// Columns are eigenvectors over `indices`.
    pub vectors: DMatrix<f64>,
}

/// Full spectrum, levels sorted by energy.
#[derive(Debug, Clone)]
pub struct Spectrum {
    j: f64,
    pub(crate) blocks: [ParityBlock; 2],
    /// `(block, column)` for each level in ascending energy.
    order: Vec<(usize, usize)>,
}

impl Spectrum {
    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn energies(&self) -> Vec<f64> {
        self.order.iter().map(|&(b, c)| self.blocks[b].energies[c]).collect()
    }

    pub fn energy(&self, level: usize) -> f64 {
        let (b, c) = self.order[level];
        self.blocks[b].energies[c]
    }

    /// Eigenvalue of `e^{iπ(J - J_z)}`: `+1` or `-1`.
    pub fn parity(&self, level: usize) -> i8 {
        self.block_parity(self.order[level].0)
    }

    fn block_parity(&self, block: usize) -> i8 {
        // block 0 holds even k; J - m = 2J - k
        let two_j = (2.0 * self.j).round() as usize;
        if (two_j + block) % 2 == 0 {
            1
        } else {
            -1
        }
    }

    pub fn parities(&self) -> Vec<i8> {
        (0..self.len()).map(|l| self.parity(l)).collect()
    }

    /// Eigenvector of `level` in the full Dicke basis.
    pub fn eigenvector(&self, level: usize) -> DVector<f64> {
        let (b, c) = self.order[level];
        let blk = &self.blocks[b];
        let mut v = DVector::zeros(self.len());
        for (i, &k) in blk.indices.iter().enumerate() {
            v[k] = blk.vectors[(i, c)];
        }
        v
    }

    /// Gap between the lowest levels of the two parity sectors.
    pub fn parity_gap(&self) -> f64 {
        let lo = |b: usize| {
            self.blocks[b]
                .energies
                .iter()
                .copied()
                .fold(f64::INFINITY, f64::min)
        };
        (lo(0) - lo(1)).abs()
    }

    /// `⟨u_b|ψ⟩` per block, indexed like `blocks[b].energies`.
    pub(crate) fn project(&self, psi: &[C64]) -> [Vec<C64>; 2] {
        let proj = |blk: &ParityBlock| {
            (0..blk.energies.len())
                .map(|c| {
                    blk.indices
                        .iter()
                        .enumerate()
                        .fold(C64::new(0.0, 0.0), |acc, (i, &k)| acc + psi[k] * blk.vectors[(i, c)])
                })
                .collect()
        };
        [proj(&self.blocks[0]), proj(&self.blocks[1])]
    }

    /// Inverse of [`Spectrum::project`].
    pub(crate) fn assemble(&self, coeffs: &[Vec<C64>; 2]) -> Vec<C64> {
        let mut psi = vec![C64::new(0.0, 0.0); self.len()];
        for (blk, c) in self.blocks.iter().zip(coeffs) {
            for (i, &k) in blk.indices.iter().enumerate() {
                let mut acc = C64::new(0.0, 0.0);
                for (col, cc) in c.iter().enumerate() {
                    acc += cc * blk.vectors[(i, col)];
                }
                psi[k] = acc;
            }
        }
        psi
    }

    /// `Σ_n |c_n|² ⟨u_n|J_x|u_n⟩ / J`, the infinite-time average without
    /// near-degenerate dephasing.
    pub fn diagonal_average_x(&self, initial: &DickeState, ladder: &[f64]) -> f64 {
        let coeffs = self.project(initial.amplitudes());
        let mut acc = 0.0;
        for level in 0..self.len() {
            let (b, c) = self.order[level];
            let u = self.eigenvector(level);
            let mut jx = 0.0;
            for (k, &a) in ladder.iter().enumerate() {
                jx += a * u[k] * u[k + 1];
            }
            acc += coeffs[b][c].norm_sqr() * jx;
        }
        acc / self.j
    }
}

fn solve_block(h: &DMatrix<f64>, indices: Vec<usize>) -> Result<ParityBlock> {
    let sub = DMatrix::from_fn(indices.len(), indices.len(), |r, c| h[(indices[r], indices[c])]);
    let scale = sub.amax();
    let eig = SymmetricEigen::try_new(sub.clone(), f64::EPSILON, 10_000).ok_or_else(|| {
        Error::Eigen(format!(
            "symmetric eigensolver did not converge on a {0}x{0} block (max entry {scale:e})",
            indices.len()
        ))
    })?;
    let n = eig.eigenvalues.len();
    let mut cols: Vec<usize> = (0..n).collect();
    cols.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let energies = cols.iter().map(|&c| eig.eigenvalues[c]).collect();
    let vectors = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, cols[c])]);
    Ok(ParityBlock {
        indices,
        energies,
        vectors,
    })
}

/// Eigenpairs of `H_0` sorted by energy; each eigenvector has definite parity.
pub fn eigendecompose(h: &HamiltonianSpec) -> Result<Spectrum> {
    let d = h.dim();
    dicke_dim(h.j())?;
    if d > DENSE_CAP {
        return Err(Error::Capacity { dim: d, cap: DENSE_CAP });
    }
    let dense = h.h0();
    let even = solve_block(&dense, (0..d).step_by(2).collect())?;
    let odd = solve_block(&dense, (1..d).step_by(2).collect())?;
    let blocks = [even, odd];
    let mut order: Vec<(usize, usize)> = blocks
        .iter()
        .enumerate()
        .flat_map(|(b, blk)| (0..blk.energies.len()).map(move |c| (b, c)))
        .collect();
    order.sort_by(|x, y| {
        blocks[x.0].energies[x.1]
            .total_cmp(&blocks[y.0].energies[y.1])
            .then(x.0.cmp(&y.0))
    });
    Ok(Spectrum {
        j: h.j(),
        blocks,
        order,
    })
}
