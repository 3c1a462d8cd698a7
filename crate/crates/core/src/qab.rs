//! Single-particle adaptive-basis baseline.
//!
//! One Hamiltonian per tile, built over a Gaussian-smoothed copy of the image
//! (smoothing keeps the eigenvectors from localising), with a hard cut to the
//! `keep` lowest-energy vectors. The raw noisy tile is projected onto that
//! basis and rebuilt; tiles are averaged back together.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dequip::{project, reconstruct};
use crate::error::{Error, Result};
use crate::image::{aggregate_patches, patch_grid, Image};
use crate::spectral::{eigendecompose, hamiltonian_from_values};

/// Largest tile side the dense solver is asked to handle.
pub const MAX_TILE_SIDE: usize = 96;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QabParams {
    pub beta: f64,
    pub smooth_sigma: f64,
    pub keep: usize,
    pub tile_side: usize,
}

impl QabParams {
    pub fn validate(&self) -> Result<()> {
        if self.tile_side == 0 {
            return Err(Error::validation("tile side must be positive"));
        }
        if self.tile_side > MAX_TILE_SIDE {
            return Err(Error::Capacity(format!(
                "tile side {} exceeds the dense solver cap of {MAX_TILE_SIDE}",
                self.tile_side
            )));
        }
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return Err(Error::validation(format!("beta must be positive, got {}", self.beta)));
        }
        if !(self.smooth_sigma >= 0.0 && self.smooth_sigma.is_finite()) {
            return Err(Error::validation(format!(
                "smoothing sigma must be non-negative, got {}",
                self.smooth_sigma
            )));
        }
        let dim = self.tile_side * self.tile_side;
        if self.keep == 0 || self.keep > dim {
            return Err(Error::validation(format!(
                "keep = {} must be in 1..={dim}",
                self.keep
            )));
        }
        Ok(())
    }
}

fn gaussian_kernel(sigma: f64) -> Vec<f64> {
    let radius = (3.0 * sigma).ceil() as isize;
    let mut k: Vec<f64> = (-radius..=radius)
        .map(|x| (-(x * x) as f64 / (2.0 * sigma * sigma)).exp())
        .collect();
    let sum: f64 = k.iter().sum();
    k.iter_mut().for_each(|v| *v /= sum);
    k
}

/// One 1-D pass; taps falling outside `[0, len)` are dropped and the rest
/// renormalised.
fn convolve_line(src: &[f64], kernel: &[f64], out: &mut [f64]) {
    let radius = (kernel.len() / 2) as isize;
    let len = src.len() as isize;
    for (i, o) in out.iter_mut().enumerate() {
        let i = i as isize;
        let (mut acc, mut weight) = (0.0, 0.0);
        for (t, &w) in kernel.iter().enumerate() {
            let j = i + t as isize - radius;
            if (0..len).contains(&j) {
                acc += w * src[j as usize];
                weight += w;
            }
        }
        *o = acc / weight;
    }
}

/// Separable Gaussian blur with radius `⌈3σ⌉`. `sigma = 0` returns the input.
pub fn gaussian_smooth(image: &Image, sigma: f64) -> Result<Image> {
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(Error::validation(format!(
            "smoothing sigma must be non-negative, got {sigma}"
        )));
    }
    if sigma == 0.0 {
        return Ok(image.clone());
    }
    let kernel = gaussian_kernel(sigma);
    let (w, h) = (image.width(), image.height());

    let mut rows = vec![0.0; w * h];
    for (src, dst) in image.data().chunks(w).zip(rows.chunks_mut(w)) {
        convolve_line(src, &kernel, dst);
    }

    let mut out = vec![0.0; w * h];
    let mut column = vec![0.0; h];
    let mut smoothed = vec![0.0; h];
    for c in 0..w {
        for r in 0..h {
            column[r] = rows[r * w + c];
        }
        convolve_line(&column, &kernel, &mut smoothed);
        for r in 0..h {
            out[r * w + c] = smoothed[r];
        }
    }
    Image::new(w, h, out)
}

pub fn qab_denoise(image: &Image, params: &QabParams) -> Result<Image> {
    params.validate()?;
    let tile = params.tile_side.min(image.width()).min(image.height());
    let keep = params.keep.min(tile * tile);
    let smooth = gaussian_smooth(image, params.smooth_sigma)?;
    let grid = patch_grid(image.width(), image.height(), tile, tile)?;
    let patches = grid
        .positions()
        .par_iter()
        .map(|&origin| {
            let guide = smooth.extract_patch(origin, tile, false)?;
            let raw = image.extract_patch(origin, tile, false)?;
            let h = hamiltonian_from_values(guide.values(), tile, params.beta)?;
            let basis = eigendecompose(&h, keep)?;
            let coeffs = project(raw.values(), &basis)?;
            raw.with_values(reconstruct(&coeffs, &basis)?)
        })
        .collect::<Result<Vec<_>>>()?;
    aggregate_patches(&patches, image.width(), image.height())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(beta: f64, sigma: f64, keep: usize, tile: usize) -> QabParams {
        QabParams {
            beta,
            smooth_sigma: sigma,
            keep,
            tile_side: tile,
        }
    }

    #[test]
    fn zero_sigma_is_identity() {
        let img = Image::from_fn(5, 4, |r, c| (r * 5 + c) as f64).unwrap();
        assert_eq!(gaussian_smooth(&img, 0.0).unwrap(), img);
        assert!(gaussian_smooth(&img, -1.0).is_err());
    }

    #[test]
    fn impulse_center_tap() {
        let img = Image::from_fn(9, 9, |r, c| if r == 4 && c == 4 { 1.0 } else { 0.0 }).unwrap();
        let out = gaussian_smooth(&img, 1.0).unwrap();
        let taps: Vec<f64> = (-3i32..=3).map(|x| (-(x * x) as f64 / 2.0).exp()).collect();
        let sum: f64 = taps.iter().sum();
        let center = (1.0 / sum) * (1.0 / sum);
        assert!((out.get(4, 4) - center).abs() < 1e-15);
        assert_eq!(out.get(4, 0), 0.0);
    }

    #[test]
    fn constant_survives_smoothing_and_denoising() {
        let img = Image::constant(12, 10, 42.0).unwrap();
        let s = gaussian_smooth(&img, 2.0).unwrap();
        assert!(s.data().iter().all(|v| (v - 42.0).abs() < 1e-12));
        let out = qab_denoise(&img, &params(1.0, 1.0, 100, 10)).unwrap();
        assert!(out.data().iter().all(|v| (v - 42.0).abs() < 1e-9));
    }

    #[test]
    fn full_rank_is_identity() {
        let img = Image::from_fn(11, 9, |r, c| ((r * 37 + c * 11) % 17) as f64).unwrap();
        let out = qab_denoise(&img, &params(2.0, 0.0, 16, 4)).unwrap();
        let err = out
            .data()
            .iter()
            .zip(img.data())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-7);
    }

    #[test]
    fn limits() {
        let img = Image::constant(8, 8, 1.0).unwrap();
        assert!(matches!(
            qab_denoise(&img, &params(1.0, 1.0, 4, 97)),
            Err(Error::Capacity(_))
        ));
        assert!(qab_denoise(&img, &params(1.0, 1.0, 0, 4)).is_err());
        assert!(qab_denoise(&img, &params(1.0, 1.0, 17, 4)).is_err());
        assert!(qab_denoise(&img, &params(0.0, 1.0, 4, 4)).is_err());
    }
}
