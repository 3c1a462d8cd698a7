use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use dequip::{NoiseKind, NoiseModel, Roi, SnrConvention};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::failure::{Failure, Outcome};

#[derive(Debug, Parser)]
#[command(name = "dequip", version, about = "Patch denoising with quantum-interaction adaptive bases")]
pub struct Cli {
    /// Worker threads for patch-level parallelism.
    #[arg(long, global = true, env = "DEQUIP_THREADS")]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Denoise a PGM image.
    Denoise(DenoiseArgs),
    /// Denoise with the single-particle tiled baseline.
    Qab(QabArgs),
    /// Add seeded noise at a target SNR.
    Noise(NoiseArgs),
    /// Compare a test image against a reference.
    Metrics(MetricsArgs),
    /// Mean IPR of patch eigenbases across noise levels.
    Ipr(IprArgs),
    /// Print the automatic hyperparameters for an SNR.
    Hyper(HyperArgs),
    /// Noise, denoise and score every image/model/SNR/patch/seed combination.
    Bench(BenchArgs),
}

/// Fills every unset field of `$dst` from `$src`.
macro_rules! fill_from {
    ($dst:ident, $src:ident; $($field:ident),* $(,)?) => {
        $( if $dst.$field.is_none() { $dst.$field = $src.$field; } )*
    };
}

/// Reads a JSON config file into the same record the flags fill.
pub fn read_config<T: DeserializeOwned>(path: &Path) -> Outcome<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::io(path, e))?;
    serde_json::from_str(&text)
        .map_err(|e| Failure::usage(format!("config {}: {e}", path.display())))
}

#[derive(Debug, Clone, Default, PartialEq, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DenoiseArgs {
    /// Noisy input image (PGM).
    #[arg(long = "in")]
    #[serde(rename = "in")]
    pub input: Option<PathBuf>,
    /// Where to write the denoised PGM.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Patch side in pixels (default 7).
    #[arg(long)]
    pub patch: Option<usize>,
    /// SNR of the input in dB; drives the automatic hyperparameters.
    #[arg(long)]
    pub snr: Option<f64>,
    /// Noise model for the automatic hyperparameters (default gaussian).
    #[arg(long)]
    pub model: Option<NoiseModel>,
    /// Interaction strength.
    #[arg(long)]
    pub p: Option<f64>,
    /// Number of basis vectors kept per patch.
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long)]
    pub ffactor: Option<f64>,
    /// Search window side (odd).
    #[arg(long)]
    pub window: Option<usize>,
    /// Step between target patches.
    #[arg(long)]
    pub stride: Option<usize>,
    /// Step between neighbours inside the search window.
    #[arg(long)]
    pub neighbor_stride: Option<usize>,
    /// Recorded in the report only.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Clean image; adds PSNR and SSIM to the report.
    #[arg(long)]
    pub reference: Option<PathBuf>,
    /// JSON file of fit constants replacing the built-in table.
    #[arg(long)]
    pub table: Option<PathBuf>,
    /// JSON config; flags given on the command line take precedence.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

impl DenoiseArgs {
    pub fn resolve(mut self) -> Outcome<Self> {
        if let Some(path) = self.config.clone() {
            let file: Self = read_config(&path)?;
            fill_from!(self, file; input, out, patch, snr, model, p, d, ffactor, window,
                stride, neighbor_stride, seed, reference, table);
        }
        Ok(self)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QabArgs {
    #[arg(long = "in")]
    #[serde(rename = "in")]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Hopping strength of the tile Hamiltonian.
    #[arg(long)]
    pub beta: Option<f64>,
    /// Gaussian pre-filter width in pixels (default 0).
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Basis vectors kept per tile.
    #[arg(long)]
    pub keep: Option<usize>,
    /// Tile side (default and maximum 96).
    #[arg(long)]
    pub tile: Option<usize>,
    #[arg(long)]
    pub reference: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

impl QabArgs {
    pub fn resolve(mut self) -> Outcome<Self> {
        if let Some(path) = self.config.clone() {
            let file: Self = read_config(&path)?;
            fill_from!(self, file; input, out, beta, sigma, keep, tile, reference);
        }
        Ok(self)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseArgs {
    #[arg(long = "in")]
    #[serde(rename = "in")]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// gaussian, poisson or speckle.
    #[arg(long)]
    pub model: Option<NoiseKind>,
    /// Target SNR in dB (`inf` copies the input).
    #[arg(long)]
    pub snr: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Signal power used for the SNR: power (mean square) or variance.
    #[arg(long)]
    pub snr_convention: Option<SnrConvention>,
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

impl NoiseArgs {
    pub fn resolve(mut self) -> Outcome<Self> {
        if let Some(path) = self.config.clone() {
            let file: Self = read_config(&path)?;
            fill_from!(self, file; input, out, model, snr, seed, snr_convention);
        }
        Ok(self)
    }
}

/// A region given as `top,left,height,width`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoiArg(pub Roi);

impl FromStr for RoiArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<usize> = s
            .split(',')
            .map(|v| v.trim().parse::<usize>().map_err(|e| format!("{v:?}: {e}")))
            .collect::<Result<_, _>>()?;
        match parts[..] {
            [top, left, height, width] => Ok(RoiArg(Roi::new(top, left, height, width))),
            _ => Err(format!("expected top,left,height,width, got {s:?}")),
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct MetricsArgs {
    #[arg(long = "ref")]
    pub reference: PathBuf,
    #[arg(long)]
    pub test: PathBuf,
    /// First CNR region, `top,left,height,width`.
    #[arg(long, requires = "roi_b")]
    pub roi_a: Option<RoiArg>,
    #[arg(long, requires = "roi_a")]
    pub roi_b: Option<RoiArg>,
}

#[derive(Debug, Clone, Args)]
pub struct IprArgs {
    /// Clean image; noise is added per SNR and seed.
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Patch sides, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    pub patch: Vec<usize>,
    #[arg(long)]
    pub beta: f64,
    /// SNRs in dB, comma separated (`inf` for the clean image).
    #[arg(long, value_delimiter = ',', required = true)]
    pub snr_list: Vec<f64>,
    /// Number of noise realisations averaged per point.
    #[arg(long, default_value_t = 1)]
    pub seeds: u64,
    /// Limit on tiles per point, spread over the image.
    #[arg(long)]
    pub max_patches: Option<usize>,
    #[arg(long, default_value = "power")]
    pub snr_convention: SnrConvention,
}

#[derive(Debug, Clone, Args)]
pub struct HyperArgs {
    #[arg(long)]
    pub snr: f64,
    #[arg(long)]
    pub patch: usize,
    #[arg(long, default_value = "gaussian")]
    pub model: NoiseModel,
    /// JSON file of fit constants replacing the built-in table.
    #[arg(long)]
    pub table: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct BenchArgs {
    /// Directory of clean PGM images.
    #[arg(long)]
    pub images: PathBuf,
    #[arg(long, value_delimiter = ',', default_value = "gaussian")]
    pub models: Vec<NoiseModel>,
    #[arg(long, value_delimiter = ',', required = true)]
    pub snrs: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "7")]
    pub patches: Vec<usize>,
    /// Noise realisations per cell, seeded `first_seed..first_seed+seeds`.
    #[arg(long, default_value_t = 1)]
    pub seeds: u64,
    #[arg(long, default_value_t = 0)]
    pub first_seed: u64,
    #[arg(long, default_value = "power")]
    pub snr_convention: SnrConvention,
    /// Round noisy images to 8 bits before denoising, as `noise` writes them.
    #[arg(long)]
    pub quantize: bool,
    /// Also run the tiled baseline with this tile side.
    #[arg(long, requires_all = ["qab_beta", "qab_keep"])]
    pub qab_tile: Option<usize>,
    #[arg(long)]
    pub qab_beta: Option<f64>,
    #[arg(long, default_value_t = 0.0)]
    pub qab_sigma: f64,
    #[arg(long)]
    pub qab_keep: Option<usize>,
    /// CSV report path (stdout when absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roi_parsing() {
        assert_eq!("1,2,3,4".parse::<RoiArg>().unwrap().0, Roi::new(1, 2, 3, 4));
        assert!("1,2,3".parse::<RoiArg>().is_err());
        assert!("a,2,3,4".parse::<RoiArg>().is_err());
    }

    #[test]
    fn flags_win_over_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        std::fs::write(&path, r#"{"patch": 5, "snr": 10.0, "p": 0.5}"#).unwrap();
        let args = DenoiseArgs {
            patch: Some(7),
            config: Some(path),
            ..Default::default()
        };
        let r = args.resolve().unwrap();
        assert_eq!(r.patch, Some(7));
        assert_eq!(r.snr, Some(10.0));
        assert_eq!(r.p, Some(0.5));
    }

    #[test]
    fn unknown_config_key_is_usage_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        std::fs::write(&path, r#"{"patchh": 5}"#).unwrap();
        let args = DenoiseArgs {
            config: Some(path),
            ..Default::default()
        };
        assert_eq!(args.resolve().unwrap_err().exit_code(), 2);
    }
}
