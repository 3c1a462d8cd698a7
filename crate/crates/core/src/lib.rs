//! Image denoising with quantum-interaction adaptive bases.
//!
//! Each noisy patch is treated as the potential of a discrete Schrödinger
//! operator, corrected by inverse-square interactions with the similar
//! patches around it. The lowest-energy eigenvectors of that operator form a
//! basis adapted to the patch; keeping only the first `d` of them filters the
//! noise. A single-particle baseline ([`qab`]), seeded noise generators,
//! quality metrics and automatic hyperparameter rules are included.

pub mod dequip;
pub mod error;
pub mod hyper;
pub mod image;
pub mod interaction;
pub mod metrics;
pub mod noise;
pub mod pgm;
pub mod qab;
pub mod spectral;

pub use dequip::{denoise_image, denoise_patch, DenoiseParams};
pub use error::{Error, Result};
pub use hyper::{auto_params, FitConstants, FitTable, NoiseModel};
pub use image::{Image, Origin, Patch};
pub use metrics::{cnr, measure_snr, measure_snr_with, psnr, ssim, Db, Roi, SnrConvention};
pub use noise::{add_awgn, add_noise, add_noise_with, add_poisson, add_speckle, NoiseKind};
pub use qab::{qab_denoise, QabParams};
