//! Seeded noise at a requested SNR.
//!
//! SNR is the second-moment ratio `10·log10(Σx² / Σn²)` unless a
//! [`SnrConvention`] says otherwise. Every
//! generator draws from a ChaCha20 stream seeded with the caller's `u64`, in
//! pixel order on the calling thread, so a seed always reproduces the same
//! image.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::Image;
use crate::metrics::{signal_power, SnrConvention};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseKind {
    Gaussian,
    Poisson,
    Speckle,
}

impl fmt::Display for NoiseKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NoiseKind::Gaussian => "gaussian",
            NoiseKind::Poisson => "poisson",
            NoiseKind::Speckle => "speckle",
        })
    }
}

impl FromStr for NoiseKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "gaussian" | "awgn" => Ok(NoiseKind::Gaussian),
            "poisson" => Ok(NoiseKind::Poisson),
            "speckle" => Ok(NoiseKind::Speckle),
            other => Err(Error::validation(format!("unknown noise model {other:?}"))),
        }
    }
}

fn rng(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

fn sum_sq(image: &Image) -> f64 {
    image.data().iter().map(|v| v * v).sum()
}

fn require_non_negative(image: &Image) -> Result<()> {
    if image.data().iter().any(|&v| v < 0.0) {
        return Err(Error::validation("noise model needs non-negative intensities"));
    }
    Ok(())
}

/// Total noise energy `Σn²` that puts `image` at `snr_db`.
fn noise_energy(image: &Image, snr_db: f64, convention: SnrConvention) -> Result<f64> {
    let signal = signal_power(image, convention) * image.len() as f64;
    if signal == 0.0 {
        return Err(Error::validation(format!(
            "cannot set an SNR on an image with zero signal {convention}"
        )));
    }
    Ok(signal / 10f64.powf(snr_db / 10.0))
}

/// Standard deviation of white Gaussian noise that gives `snr_db` on `image`.
pub fn awgn_sigma(image: &Image, snr_db: f64, convention: SnrConvention) -> Result<f64> {
    Ok((noise_energy(image, snr_db, convention)? / image.len() as f64).sqrt())
}

/// Photon-count scale `η`; the expected noise energy of `Poisson(ηx)/η` is
/// `Σx / η`.
pub fn poisson_scale(image: &Image, snr_db: f64, convention: SnrConvention) -> Result<f64> {
    let total: f64 = image.data().iter().sum();
    Ok(total / noise_energy(image, snr_db, convention)?)
}

/// Relative level `σ` of multiplicative noise; the expected noise energy of
/// `x·n` is `σ²·Σx²`. Under the power convention this is `10^(−SNR/20)`.
pub fn speckle_sigma(image: &Image, snr_db: f64, convention: SnrConvention) -> Result<f64> {
    Ok((noise_energy(image, snr_db, convention)? / sum_sq(image)).sqrt())
}

/// `y = x + n`, `n ~ N(0, σ²)` i.i.d. An infinite SNR returns the input.
pub fn add_awgn(image: &Image, snr_db: f64, seed: u64) -> Result<Image> {
    add_noise_with(image, NoiseKind::Gaussian, snr_db, seed, SnrConvention::Power)
}

/// `y = Poisson(η·x) / η`, so `y` stays on the scale of `x`.
///
/// Means below 12 are sampled by Knuth's multiplication (inversion) method,
/// larger ones by rejection from a Cauchy envelope (rand_distr's `Poisson`).
pub fn add_poisson(image: &Image, snr_db: f64, seed: u64) -> Result<Image> {
    add_noise_with(image, NoiseKind::Poisson, snr_db, seed, SnrConvention::Power)
}

/// `y = x·(1 + n)`, `n ~ N(0, σ²)` i.i.d.
pub fn add_speckle(image: &Image, snr_db: f64, seed: u64) -> Result<Image> {
    add_noise_with(image, NoiseKind::Speckle, snr_db, seed, SnrConvention::Power)
}

/// Noise at `snr_db` under the mean-square (power) convention.
pub fn add_noise(image: &Image, kind: NoiseKind, snr_db: f64, seed: u64) -> Result<Image> {
    add_noise_with(image, kind, snr_db, seed, SnrConvention::Power)
}

pub fn add_noise_with(
    image: &Image,
    kind: NoiseKind,
    snr_db: f64,
    seed: u64,
    convention: SnrConvention,
) -> Result<Image> {
    if snr_db.is_nan() {
        return Err(Error::validation("SNR is NaN"));
    }
    if kind != NoiseKind::Gaussian {
        require_non_negative(image)?;
    }
    if snr_db == f64::INFINITY {
        return Ok(image.clone());
    }
    let mut rng = rng(seed);
    let data: Vec<f64> = match kind {
        NoiseKind::Gaussian => {
            let sigma = awgn_sigma(image, snr_db, convention)?;
            image
                .data()
                .iter()
                .map(|&x| {
                    let z: f64 = rng.sample(StandardNormal);
                    x + sigma * z
                })
                .collect()
        }
        NoiseKind::Poisson => {
            let eta = poisson_scale(image, snr_db, convention)?;
            image
                .data()
                .iter()
                .map(|&x| {
                    let mean = eta * x;
                    if mean == 0.0 {
                        return Ok(0.0);
                    }
                    let dist = Poisson::new(mean)
                        .map_err(|e| Error::validation(format!("Poisson mean {mean}: {e}")))?;
                    let k: f64 = dist.sample(&mut rng);
                    Ok(k / eta)
                })
                .collect::<Result<_>>()?
        }
        NoiseKind::Speckle => {
            let sigma = speckle_sigma(image, snr_db, convention)?;
            image
                .data()
                .iter()
                .map(|&x| {
                    let z: f64 = rng.sample(StandardNormal);
                    x * (1.0 + sigma * z)
                })
                .collect()
        }
    };
    Image::new(image.width(), image.height(), data)
}
