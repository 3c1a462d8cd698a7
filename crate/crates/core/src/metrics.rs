//! Image quality measures: SNR, PSNR, mean SSIM and contrast-to-noise ratio.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::Image;

/// A decibel figure, or the sentinel for "no error at all".
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Db {
    Finite(f64),
    Infinite,
}

impl Db {
    pub fn value(self) -> f64 {
        match self {
            Db::Finite(v) => v,
            Db::Infinite => f64::INFINITY,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Db::Infinite)
    }
}

impl fmt::Display for Db {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Db::Finite(v) => write!(f, "{v:.4}"),
            Db::Infinite => f.write_str("inf"),
        }
    }
}

fn check_shapes(a: &Image, b: &Image) -> Result<()> {
    if !a.same_shape(b) {
        return Err(Error::validation(format!(
            "image sizes differ: {}x{} vs {}x{}",
            a.width(),
            a.height(),
            b.width(),
            b.height()
        )));
    }
    Ok(())
}

fn squared_error(a: &Image, b: &Image) -> f64 {
    a.data().iter().zip(b.data()).map(|(x, y)| (x - y).powi(2)).sum()
}

/// What counts as signal power when an SNR is quoted.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SnrConvention {
    /// Mean square intensity, `Σx² / N`.
    #[default]
    Power,
    /// Intensity variance about the image mean, `Σ(x − x̄)² / N`. Much
    /// weaker noise for the same dB figure on typical 8-bit images.
    Variance,
}

impl fmt::Display for SnrConvention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SnrConvention::Power => "power",
            SnrConvention::Variance => "variance",
        })
    }
}

impl std::str::FromStr for SnrConvention {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "power" => Ok(SnrConvention::Power),
            "variance" => Ok(SnrConvention::Variance),
            other => Err(Error::validation(format!("unknown SNR convention {other:?}"))),
        }
    }
}

/// Per-pixel signal power of `image` under `convention`.
pub fn signal_power(image: &Image, convention: SnrConvention) -> f64 {
    let n = image.len() as f64;
    match convention {
        SnrConvention::Power => image.data().iter().map(|v| v * v).sum::<f64>() / n,
        SnrConvention::Variance => {
            let mean = image.data().iter().sum::<f64>() / n;
            image.data().iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n
        }
    }
}

/// `10·log10(Σ clean² / Σ (noisy − clean)²)`.
pub fn measure_snr(clean: &Image, noisy: &Image) -> Result<Db> {
    measure_snr_with(clean, noisy, SnrConvention::Power)
}

/// SNR with the signal power taken under `convention`.
pub fn measure_snr_with(clean: &Image, noisy: &Image, convention: SnrConvention) -> Result<Db> {
    check_shapes(clean, noisy)?;
    let noise = squared_error(clean, noisy);
    if noise == 0.0 {
        return Ok(Db::Infinite);
    }
    let signal = signal_power(clean, convention) * clean.len() as f64;
    Ok(Db::Finite(10.0 * (signal / noise).log10()))
}

pub const PEAK: f64 = 255.0;

/// `10·log10(peak² / MSE)`.
pub fn psnr(reference: &Image, test: &Image, peak: f64) -> Result<Db> {
    check_shapes(reference, test)?;
    if !(peak > 0.0) {
        return Err(Error::validation(format!("peak must be positive, got {peak}")));
    }
    let mse = squared_error(reference, test) / reference.len() as f64;
    if mse == 0.0 {
        return Ok(Db::Infinite);
    }
    Ok(Db::Finite(10.0 * (peak * peak / mse).log10()))
}

const SSIM_WINDOW: usize = 11;
const SSIM_SIGMA: f64 = 1.5;
const SSIM_K1: f64 = 0.01;
const SSIM_K2: f64 = 0.03;

fn ssim_taps() -> [f64; SSIM_WINDOW] {
    let mut taps = [0.0; SSIM_WINDOW];
    let half = (SSIM_WINDOW / 2) as f64;
    for (i, t) in taps.iter_mut().enumerate() {
        let x = i as f64 - half;
        *t = (-x * x / (2.0 * SSIM_SIGMA * SSIM_SIGMA)).exp();
    }
    let sum: f64 = taps.iter().sum();
    taps.iter_mut().for_each(|t| *t /= sum);
    taps
}

/// Gaussian-weighted local mean over every full window position.
fn filter_valid(data: &[f64], w: usize, h: usize, taps: &[f64]) -> Vec<f64> {
    let k = taps.len();
    let (ow, oh) = (w + 1 - k, h + 1 - k);
    let mut rows = vec![0.0; ow * h];
    for r in 0..h {
        let line = &data[r * w..(r + 1) * w];
        for c in 0..ow {
            rows[r * ow + c] = taps.iter().zip(&line[c..c + k]).map(|(t, v)| t * v).sum();
        }
    }
    let mut out = vec![0.0; ow * oh];
    for r in 0..oh {
        for c in 0..ow {
            out[r * ow + c] = taps
                .iter()
                .enumerate()
                .map(|(i, t)| t * rows[(r + i) * ow + c])
                .sum();
        }
    }
    out
}

/// Mean local SSIM with an 11x11 Gaussian window (σ = 1.5), K1 = 0.01,
/// K2 = 0.03 and a dynamic range of 255, averaged over the window positions
/// that lie wholly inside the image.
pub fn ssim(reference: &Image, test: &Image) -> Result<f64> {
    check_shapes(reference, test)?;
    let (w, h) = (reference.width(), reference.height());
    if w < SSIM_WINDOW || h < SSIM_WINDOW {
        return Err(Error::validation(format!(
            "SSIM needs at least {SSIM_WINDOW}x{SSIM_WINDOW} pixels, got {w}x{h}"
        )));
    }
    let taps = ssim_taps();
    let x = reference.data();
    let y = test.data();
    let prod = |f: fn(f64, f64) -> f64| -> Vec<f64> {
        x.iter().zip(y).map(|(&a, &b)| f(a, b)).collect()
    };
    let mu_x = filter_valid(x, w, h, &taps);
    let mu_y = filter_valid(y, w, h, &taps);
    let xx = filter_valid(&prod(|a, _| a * a), w, h, &taps);
    let yy = filter_valid(&prod(|_, b| b * b), w, h, &taps);
    let xy = filter_valid(&prod(|a, b| a * b), w, h, &taps);

    let c1 = (SSIM_K1 * PEAK).powi(2);
    let c2 = (SSIM_K2 * PEAK).powi(2);
    let mut total = 0.0;
    for i in 0..mu_x.len() {
        let (mx, my) = (mu_x[i], mu_y[i]);
        let sx = xx[i] - mx * mx;
        let sy = yy[i] - my * my;
        let sxy = xy[i] - mx * my;
        total += ((2.0 * mx * my + c1) * (2.0 * sxy + c2))
            / ((mx * mx + my * my + c1) * (sx + sy + c2));
    }
    Ok(total / mu_x.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Roi {
    pub top: usize,
    pub left: usize,
    pub height: usize,
    pub width: usize,
}

impl Roi {
    pub fn new(top: usize, left: usize, height: usize, width: usize) -> Self {
        Self {
            top,
            left,
            height,
            width,
        }
    }

    fn pixels<'a>(&self, image: &'a Image) -> Result<impl Iterator<Item = f64> + 'a> {
        if self.height == 0
            || self.width == 0
            || self.top + self.height > image.height()
            || self.left + self.width > image.width()
        {
            return Err(Error::validation(format!(
                "ROI {self:?} does not fit a {}x{} image",
                image.width(),
                image.height()
            )));
        }
        let Roi {
            top,
            left,
            height,
            width,
        } = *self;
        Ok((top..top + height)
            .flat_map(move |r| (left..left + width).map(move |c| image.get(r, c))))
    }

    fn overlaps(&self, other: &Roi) -> bool {
        self.top < other.top + other.height
            && other.top < self.top + self.height
            && self.left < other.left + other.width
            && other.left < self.left + self.width
    }
}

fn mean_var(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let v: Vec<f64> = values.collect();
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    (mean, var)
}

/// `|μa − μb| / √(σa² + σb²)` with population variances over two disjoint
/// regions.
pub fn cnr(image: &Image, a: Roi, b: Roi) -> Result<f64> {
    if a.overlaps(&b) {
        return Err(Error::validation("CNR regions overlap"));
    }
    let (ma, va) = mean_var(a.pixels(image)?);
    let (mb, vb) = mean_var(b.pixels(image)?);
    let denom = (va + vb).sqrt();
    if denom == 0.0 {
        return Err(Error::validation("CNR undefined: both regions have zero variance"));
    }
    Ok((ma - mb).abs() / denom)
}
