//! Discrete Schrödinger Hamiltonians over a patch and their eigenbases.
//!
//! The operator is `H = diag(V) + β·L`, where `L` is the 5-point Laplacian
//! stencil on the patch with zero padding outside it: every diagonal carries
//! `4β` regardless of position and each in-patch 4-neighbour contributes
//! `-β`. Horizontal coupling never wraps from the end of one row to the
//! start of the next.

use faer::{Mat, Side};

use crate::error::{Error, Result};
use crate::image::{patch_grid, Image, Patch};

/// Dense symmetric matrix stored in full, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    dim: usize,
    entries: Vec<f64>,
}

impl SymMatrix {
    /// Evaluates `f` on the upper triangle and mirrors it, so the result is
    /// symmetric bit for bit.
    pub fn from_upper(dim: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::validation("matrix dimension must be positive"));
        }
        let mut entries = vec![0.0; dim * dim];
        for i in 0..dim {
            for j in i..dim {
                let v = f(i, j);
                if !v.is_finite() {
                    return Err(Error::validation(format!("non-finite entry at ({i}, {j})")));
                }
                entries[i * dim + j] = v;
                entries[j * dim + i] = v;
            }
        }
        Ok(Self { dim, entries })
    }

    pub fn diagonal(values: &[f64]) -> Result<Self> {
        Self::from_upper(values.len(), |i, j| if i == j { values[i] } else { 0.0 })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.dim + j]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.dim, "dimension mismatch");
        self.entries
            .chunks_exact(self.dim)
            .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }
}

/// Hamiltonian of a `side`x`side` potential given row-major.
pub fn hamiltonian_from_values(potential: &[f64], side: usize, beta: f64) -> Result<SymMatrix> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::validation(format!("beta must be positive, got {beta}")));
    }
    if side == 0 || potential.len() != side * side {
        return Err(Error::validation(format!(
            "potential of length {} is not a {side}x{side} patch",
            potential.len()
        )));
    }
    if potential.iter().any(|v| !v.is_finite()) {
        return Err(Error::validation("potential contains a non-finite value"));
    }
    SymMatrix::from_upper(side * side, |i, j| {
        if i == j {
            potential[i] + 4.0 * beta
        } else if (j == i + 1 && j % side != 0) || j == i + side {
            -beta
        } else {
            0.0
        }
    })
}

pub fn build_hamiltonian(potential: &Patch, beta: f64) -> Result<SymMatrix> {
    hamiltonian_from_values(potential.values(), potential.side(), beta)
}

/// Lowest part of a spectrum: ascending energies with unit eigenvectors.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenBasis {
    dim: usize,
    eigenvalues: Vec<f64>,
    // vector k occupies vectors[k*dim..(k+1)*dim]
    vectors: Vec<f64>,
}

impl EigenBasis {
    /// Builds a basis from explicit pairs. Vectors are taken as given.
    pub fn from_parts(dim: usize, eigenvalues: Vec<f64>, vectors: Vec<f64>) -> Result<Self> {
        if dim == 0 || vectors.len() != eigenvalues.len() * dim {
            return Err(Error::validation("eigenvector storage does not match dim"));
        }
        if eigenvalues.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::validation("eigenvalues must be ascending"));
        }
        Ok(Self {
            dim,
            eigenvalues,
            vectors,
        })
    }

    /// Length of each eigenvector.
    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of eigenpairs held.
    #[inline]
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    #[inline]
    pub fn vector(&self, k: usize) -> &[f64] {
        &self.vectors[k * self.dim..(k + 1) * self.dim]
    }

    pub fn vectors(&self) -> impl Iterator<Item = &[f64]> {
        self.vectors.chunks_exact(self.dim)
    }

    /// Largest `‖Hψ_k − E_k ψ_k‖₂` over the held pairs.
    pub fn max_residual(&self, h: &SymMatrix) -> f64 {
        self.vectors()
            .zip(&self.eigenvalues)
            .map(|(v, &e)| {
                h.mul_vec(v)
                    .iter()
                    .zip(v)
                    .map(|(hv, x)| (hv - e * x).powi(2))
                    .sum::<f64>()
                    .sqrt()
            })
            .fold(0.0, f64::max)
    }
}

/// Flips `v` so its largest-magnitude entry (first one on ties) is positive.
fn fix_sign(v: &mut [f64]) {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() {
            best = i;
        }
    }
    if v[best] < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

/// The `k` algebraically smallest eigenpairs of `h`, ascending.
///
/// Backed by a dense tridiagonal reduction followed by a divide-and-conquer
/// / implicit QR iteration, run single-threaded so results do not depend on
/// the caller's thread pool.
pub fn eigendecompose(h: &SymMatrix, k: usize) -> Result<EigenBasis> {
    let n = h.dim;
    if k == 0 || k > n {
        return Err(Error::validation(format!(
            "requested {k} eigenpairs from a {n}x{n} matrix"
        )));
    }
    let a = Mat::<f64>::from_fn(n, n, |i, j| h.entries[i * n + j]);
    let evd = a
        .self_adjoint_eigen(Side::Lower)
        .map_err(|_| Error::NoConvergence {
            dim: n,
            residual: f64::NAN,
        })?;
    let values = evd.S().column_vector();
    let u = evd.U();

    // faer already returns ascending order; sort anyway so the contract does
    // not rest on that.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| values[x].total_cmp(&values[y]));

    let mut eigenvalues = Vec::with_capacity(k);
    let mut vectors = Vec::with_capacity(k * n);
    for &col in order.iter().take(k) {
        eigenvalues.push(values[col]);
        let start = vectors.len();
        vectors.extend((0..n).map(|row| u[(row, col)]));
        fix_sign(&mut vectors[start..]);
    }
    if eigenvalues.iter().chain(&vectors).any(|v| !v.is_finite()) {
        return Err(Error::NoConvergence {
            dim: n,
            residual: f64::INFINITY,
        });
    }
    Ok(EigenBasis {
        dim: n,
        eigenvalues,
        vectors,
    })
}

/// Inverse participation ratio `1 / Σ v_i⁴` of a unit vector.
pub fn ipr(v: &[f64]) -> Result<f64> {
    let norm2: f64 = v.iter().map(|x| x * x).sum();
    if norm2 == 0.0 {
        return Err(Error::validation("IPR of the zero vector"));
    }
    if (norm2.sqrt() - 1.0).abs() > 1e-8 {
        return Err(Error::validation(format!(
            "IPR needs a unit vector, norm is {}",
            norm2.sqrt()
        )));
    }
    Ok(1.0 / v.iter().map(|x| x.powi(4)).sum::<f64>())
}

/// Mean IPR over every eigenvector of every non-overlapping `side`x`side`
/// patch Hamiltonian built from the raw pixel values.
///
/// Leftover rows and columns that do not fill a whole patch are ignored.
/// `max_patches` limits the work to that many tiles, spread evenly over the
/// row-major tile sequence.
pub fn average_ipr(
    image: &Image,
    side: usize,
    beta: f64,
    max_patches: Option<usize>,
) -> Result<f64> {
    let tiles = (image.height() / side.max(1)) * (image.width() / side.max(1));
    let grid = patch_grid(image.width(), image.height(), side, side)?;
    let limit = max_patches.unwrap_or(usize::MAX).min(tiles);
    let whole: Vec<_> = grid
        .positions()
        .iter()
        .filter(|o| o.row % side == 0 && o.col % side == 0)
        .collect();
    let origins = (0..limit).map(|i| *whole[i * tiles / limit]);

    let mut total = 0.0;
    let mut count = 0usize;
    for origin in origins {
        let patch = image.extract_patch(origin, side, false)?;
        let h = build_hamiltonian(&patch, beta)?;
        let basis = eigendecompose(&h, h.dim())?;
        for v in basis.vectors() {
            total += ipr(v)?;
            count += 1;
        }
    }
    if count == 0 {
        return Err(Error::validation("no patches to average over"));
    }
    Ok(total / count as f64)
}
