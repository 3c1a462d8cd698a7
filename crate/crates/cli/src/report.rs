//! CSV reports. Every command writes a header row followed by data rows.

use std::io::Write;

use serde::Serialize;

use crate::failure::{Failure, Outcome};

/// Row of `denoise`, `qab` and `bench` reports.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunRow {
    pub image: String,
    pub method: String,
    pub noise_model: String,
    pub target_snr: Option<f64>,
    /// A seed number, or `mean` for a row averaged over seeds.
    pub seed: String,
    pub psnr: Option<f64>,
    pub ssim: Option<f64>,
    pub cnr: Option<f64>,
    pub wall_ms: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct NoiseRow {
    pub image: String,
    pub noise_model: String,
    pub target_snr: f64,
    pub seed: u64,
    pub measured_snr: f64,
    pub snr_convention: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct MetricsRow {
    pub reference: String,
    pub test: String,
    pub snr: f64,
    pub psnr: f64,
    pub ssim: Option<f64>,
    pub cnr: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct IprRow {
    pub snr: f64,
    pub patch_side: usize,
    pub mean_ipr: f64,
}

/// Writes `rows` as CSV with a header derived from the row type.
pub fn write_rows<W: Write, R: Serialize>(out: W, rows: &[R]) -> Outcome {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row)
            .map_err(|e| Failure::Io(format!("writing CSV: {e}")))?;
    }
    w.flush().map_err(|e| Failure::Io(format!("writing CSV: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn run_header_matches_row_fields() {
        let row = RunRow {
            image: "a.pgm".into(),
            method: "dequip".into(),
            noise_model: String::new(),
            target_snr: None,
            seed: "mean".into(),
            psnr: Some(30.5),
            ssim: None,
            cnr: None,
            wall_ms: 1.25,
        };
        let mut buf = Vec::new();
        write_rows(&mut buf, &[row]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "image,method,noise_model,target_snr,seed,psnr,ssim,cnr,wall_ms"
        );
        assert_eq!(lines.next().unwrap(), "a.pgm,dequip,,,mean,30.5,,,1.25");
    }
}
