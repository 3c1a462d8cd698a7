//! Denoising by quantum interactive patches.
//!
//! For every target patch on an overlapping grid:
//!
//! 1. sum the inverse-square interactions with its search-window neighbours
//!    and add them to the patch values to get the effective potential;
//! 2. set `β = f_factor · (max − min)` of the noisy target patch;
//! 3. build the patch Hamiltonian over the effective potential and keep its
//!    `d` lowest-energy eigenvectors;
//! 4. project the noisy patch onto them and rebuild it from those `d`
//!    coefficients.
//!
//! Rebuilt patches are averaged back into the image.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::{aggregate_patches, patch_grid, Image, Origin, Patch};
use crate::interaction::{effective_potential, interaction_field, window_offsets};
use crate::spectral::{eigendecompose, hamiltonian_from_values, EigenBasis};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DenoiseParams {
    pub patch_side: usize,
    pub window_side: usize,
    /// Interaction strength.
    pub p: f64,
    /// Number of lowest-energy basis vectors kept per patch.
    pub d: usize,
    pub f_factor: f64,
    pub target_stride: usize,
    pub neighbor_stride: usize,
}

impl DenoiseParams {
    /// Parameters with the default strides: targets every `⌊side/2⌋` pixels
    /// (at least 1) and every window position as a neighbour.
    pub fn new(patch_side: usize, window_side: usize, p: f64, d: usize, f_factor: f64) -> Self {
        Self {
            patch_side,
            window_side,
            p,
            d,
            f_factor,
            target_stride: default_target_stride(patch_side),
            neighbor_stride: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let dim = self.patch_side * self.patch_side;
        if self.patch_side == 0 {
            return Err(Error::validation("patch side must be positive"));
        }
        if self.d == 0 || self.d > dim {
            return Err(Error::validation(format!(
                "d = {} must be in 1..={dim}",
                self.d
            )));
        }
        if self.window_side < self.patch_side || self.window_side.is_multiple_of(2) {
            return Err(Error::validation(format!(
                "search window {} must be odd and at least the patch side {}",
                self.window_side, self.patch_side
            )));
        }
        if !(self.p >= 0.0 && self.p.is_finite()) {
            return Err(Error::validation(format!("p must be non-negative, got {}", self.p)));
        }
        if !(self.f_factor > 0.0 && self.f_factor.is_finite()) {
            return Err(Error::validation(format!(
                "f_factor must be positive, got {}",
                self.f_factor
            )));
        }
        if self.target_stride == 0 || self.neighbor_stride == 0 {
            return Err(Error::validation("strides must be at least 1"));
        }
        Ok(())
    }
}

pub fn default_target_stride(patch_side: usize) -> usize {
    (patch_side / 2).max(1)
}

/// `f_factor · (max − min)` of the patch, or `f_factor` for a flat patch.
pub fn adaptive_beta(target: &Patch, f_factor: f64) -> f64 {
    let (lo, hi) = target.min_max();
    let range = hi - lo;
    if range > 0.0 {
        f_factor * range
    } else {
        f_factor
    }
}

/// Coefficients `⟨x, ψ_k⟩` for every vector in the basis.
pub fn project(values: &[f64], basis: &EigenBasis) -> Result<Vec<f64>> {
    if values.len() != basis.dim() {
        return Err(Error::validation(format!(
            "patch of {} pixels against a basis of dimension {}",
            values.len(),
            basis.dim()
        )));
    }
    Ok(basis
        .vectors()
        .map(|v| v.iter().zip(values).map(|(a, b)| a * b).sum())
        .collect())
}

/// `Σ_k c_k ψ_k` over the supplied coefficients.
pub fn reconstruct(coeffs: &[f64], basis: &EigenBasis) -> Result<Vec<f64>> {
    if coeffs.is_empty() || coeffs.len() > basis.len() {
        return Err(Error::validation(format!(
            "cannot rebuild from {} coefficients with {} basis vectors",
            coeffs.len(),
            basis.len()
        )));
    }
    let mut out = vec![0.0; basis.dim()];
    for (c, v) in coeffs.iter().zip(basis.vectors()) {
        for (o, x) in out.iter_mut().zip(v) {
            *o += c * x;
        }
    }
    Ok(out)
}

/// Adaptive basis for one target patch: the `d` lowest eigenvectors of the
/// Hamiltonian over its effective potential.
pub fn adaptive_basis(image: &Image, target: &Patch, params: &DenoiseParams) -> Result<EigenBasis> {
    let offsets = window_offsets(params.patch_side, params.window_side, params.neighbor_stride)?;
    basis_with_offsets(image, target, params, &offsets)
}

fn basis_with_offsets(
    image: &Image,
    target: &Patch,
    params: &DenoiseParams,
    offsets: &[(isize, isize)],
) -> Result<EigenBasis> {
    let field = interaction_field(image, target, offsets, params.p);
    let potential = effective_potential(target, &field)?;
    let beta = adaptive_beta(target, params.f_factor);
    let h = hamiltonian_from_values(potential.values(), params.patch_side, beta)?;
    eigendecompose(&h, params.d)
}

fn denoise_target(
    image: &Image,
    origin: Origin,
    params: &DenoiseParams,
    offsets: &[(isize, isize)],
) -> Result<Patch> {
    let target = image.extract_patch(origin, params.patch_side, false)?;
    let basis = basis_with_offsets(image, &target, params, offsets)?;
    let coeffs = project(target.values(), &basis)?;
    target.with_values(reconstruct(&coeffs, &basis)?)
}

pub fn denoise_patch(image: &Image, origin: Origin, params: &DenoiseParams) -> Result<Patch> {
    params.validate()?;
    let offsets = window_offsets(params.patch_side, params.window_side, params.neighbor_stride)?;
    denoise_target(image, origin, params, &offsets)
}

/// Denoises every patch on the target grid in parallel and averages them.
/// The output does not depend on the number of worker threads.
pub fn denoise_image(image: &Image, params: &DenoiseParams) -> Result<Image> {
    params.validate()?;
    let grid = patch_grid(
        image.width(),
        image.height(),
        params.patch_side,
        params.target_stride,
    )?;
    let offsets = window_offsets(params.patch_side, params.window_side, params.neighbor_stride)?;
    let patches = grid
        .positions()
        .par_iter()
        .map(|&origin| denoise_target(image, origin, params, &offsets))
        .collect::<Result<Vec<_>>>()?;
    aggregate_patches(&patches, image.width(), image.height())
}
