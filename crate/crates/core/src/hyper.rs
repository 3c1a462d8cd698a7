//! Automatic hyperparameters from the input SNR.
//!
//! Three fitted rules, one constants row per (noise model, patch side):
//!
//! * `p = m1·SNR + c1`, clamped at 0;
//! * `d = m2·SNR + c2`, rounded half up and clamped to `[1, side²]`;
//! * `f_factor = l1 + l3 / (d − l2)`.
//!
//! Built-in rows exist for 5x5, 7x7 and 11x11 patches under Gaussian and
//! Poisson noise. Other rows can be supplied as JSON.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dequip::{default_target_stride, DenoiseParams};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseModel {
    Gaussian,
    Poisson,
}

impl fmt::Display for NoiseModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NoiseModel::Gaussian => "gaussian",
            NoiseModel::Poisson => "poisson",
        })
    }
}

impl FromStr for NoiseModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "gaussian" | "awgn" => Ok(NoiseModel::Gaussian),
            "poisson" => Ok(NoiseModel::Poisson),
            other => Err(Error::validation(format!("unknown noise model {other:?}"))),
        }
    }
}

/// One row of fit constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitConstants {
    pub model: NoiseModel,
    pub side: usize,
    pub m1: f64,
    pub c1: f64,
    pub m2: f64,
    pub c2: f64,
    pub l1: f64,
    pub l2: f64,
    pub l3: f64,
}

#[rustfmt::skip]
const BUILTIN: [FitConstants; 6] = [
    FitConstants { model: NoiseModel::Gaussian, side: 5,  m1: 12.84e-4, c1: -35.96e-4, m2: 0.7783, c2: 0.7315, l1: 0.5287, l2: -4.4551, l3: 20.6204 },
    FitConstants { model: NoiseModel::Gaussian, side: 7,  m1: 30.96e-4, c1: 13.56e-3,  m2: 1.7000, c2: 0.5345, l1: 1.2630, l2: -4.1915, l3: 13.9698 },
    FitConstants { model: NoiseModel::Gaussian, side: 11, m1: 16.46e-4, c1: 50.40e-3,  m2: 4.2500, c2: 4.8210, l1: 1.9161, l2: 6.8223,  l3: 9.7995 },
    FitConstants { model: NoiseModel::Poisson,  side: 5,  m1: 60.33e-5, c1: -21.85e-4, m2: 0.8202, c2: 0.8621, l1: 0.8083, l2: -3.8975, l3: 16.8476 },
    FitConstants { model: NoiseModel::Poisson,  side: 7,  m1: 21.00e-4, c1: 36.31e-4,  m2: 1.6030, c2: 0.5800, l1: 1.5391, l2: -4.4288, l3: 10.1560 },
    FitConstants { model: NoiseModel::Poisson,  side: 11, m1: 16.64e-4, c1: 44.23e-3,  m2: 4.3990, c2: 2.8900, l1: 1.8587, l2: 11.6517, l3: 3.9798 },
];

/// A set of constants rows, at most one per (model, side).
#[derive(Debug, Clone, PartialEq)]
pub struct FitTable {
    rows: Vec<FitConstants>,
}

impl Default for FitTable {
    fn default() -> Self {
        Self::builtin()
    }
}

impl FitTable {
    pub fn builtin() -> Self {
        Self {
            rows: BUILTIN.to_vec(),
        }
    }

    pub fn from_rows(rows: Vec<FitConstants>) -> Result<Self> {
        for (i, a) in rows.iter().enumerate() {
            if rows[..i].iter().any(|b| b.model == a.model && b.side == a.side) {
                return Err(Error::validation(format!(
                    "duplicate constants for {} {}x{}",
                    a.model, a.side, a.side
                )));
            }
        }
        Ok(Self { rows })
    }

    /// Parses a JSON array of rows.
    pub fn from_json(text: &str) -> Result<Self> {
        let rows: Vec<FitConstants> = serde_json::from_str(text)
            .map_err(|e| Error::validation(format!("bad constants JSON: {e}")))?;
        Self::from_rows(rows)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn rows(&self) -> &[FitConstants] {
        &self.rows
    }

    pub fn lookup(&self, model: NoiseModel, side: usize) -> Result<&FitConstants> {
        self.rows
            .iter()
            .find(|r| r.model == model && r.side == side)
            .ok_or_else(|| Error::Lookup {
                model: model.to_string(),
                side,
            })
    }
}

pub fn estimate_p(snr_db: f64, constants: &FitConstants) -> f64 {
    (constants.m1 * snr_db + constants.c1).max(0.0)
}

pub fn estimate_d(snr_db: f64, constants: &FitConstants, p_dim: usize) -> usize {
    let raw = (constants.m2 * snr_db + constants.c2 + 0.5).floor();
    raw.clamp(1.0, p_dim as f64) as usize
}

pub fn estimate_f_factor(d: usize, constants: &FitConstants) -> Result<f64> {
    let gap = d as f64 - constants.l2;
    if gap.abs() < 0.5 {
        return Err(Error::Singularity {
            d,
            pole: constants.l2,
        });
    }
    let f = constants.l1 + constants.l3 / gap;
    if !(f > 0.0) {
        return Err(Error::validation(format!(
            "F-factor rule gives {f} for d = {d}; no positive value on that side of the pole"
        )));
    }
    Ok(f)
}

/// Search window for a patch side: 15, 21 and 33 for the tabulated sides,
/// otherwise three times the side rounded up to odd.
pub fn default_window(patch_side: usize) -> usize {
    match patch_side {
        5 => 15,
        7 => 21,
        11 => 33,
        s => (3 * s) | 1,
    }
}

pub fn auto_params_with(
    table: &FitTable,
    snr_db: f64,
    patch_side: usize,
    model: NoiseModel,
) -> Result<DenoiseParams> {
    if !snr_db.is_finite() {
        return Err(Error::validation(format!("SNR must be finite, got {snr_db}")));
    }
    let row = table.lookup(model, patch_side)?;
    let d = estimate_d(snr_db, row, patch_side * patch_side);
    Ok(DenoiseParams {
        patch_side,
        window_side: default_window(patch_side),
        p: estimate_p(snr_db, row),
        d,
        f_factor: estimate_f_factor(d, row)?,
        target_stride: default_target_stride(patch_side),
        neighbor_stride: 1,
    })
}

/// All hyperparameters from the built-in constants.
pub fn auto_params(snr_db: f64, patch_side: usize, model: NoiseModel) -> Result<DenoiseParams> {
    auto_params_with(&FitTable::builtin(), snr_db, patch_side, model)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(model: NoiseModel, side: usize) -> FitConstants {
        *FitTable::builtin().lookup(model, side).unwrap()
    }

    #[test]
    fn p_rule() {
        let g7 = row(NoiseModel::Gaussian, 7);
        assert!((estimate_p(16.0, &g7) - 0.063096).abs() < 1e-15);
        assert_eq!(estimate_p(0.0, &row(NoiseModel::Gaussian, 5)), 0.0);
        let zero_at = -g7.c1 / g7.m1;
        assert_eq!(estimate_p(zero_at, &g7), 0.0);
    }

    #[test]
    fn d_rule() {
        let g7 = row(NoiseModel::Gaussian, 7);
        assert_eq!(estimate_d(16.0, &g7, 49), 28);
        assert_eq!(estimate_d(-10.0, &g7, 49), 1);
        assert_eq!(estimate_d(30.0, &row(NoiseModel::Gaussian, 11), 121), 121);
    }

    #[test]
    fn f_rule() {
        let g7 = row(NoiseModel::Gaussian, 7);
        let f = estimate_f_factor(28, &g7).unwrap();
        assert!((f - (1.2630 + 13.9698 / 32.1915)).abs() < 1e-15);
        assert!(matches!(
            estimate_f_factor(7, &row(NoiseModel::Gaussian, 11)),
            Err(Error::Singularity { d: 7, .. })
        ));
        assert!(estimate_f_factor(5, &row(NoiseModel::Gaussian, 11)).is_err());
        let far = estimate_f_factor(100_000, &g7).unwrap();
        assert!((far - g7.l1).abs() < 1e-3);
    }

    #[test]
    fn windows() {
        assert_eq!(default_window(5), 15);
        assert_eq!(default_window(7), 21);
        assert_eq!(default_window(11), 33);
        assert_eq!(default_window(9), 27);
        assert_eq!(default_window(8), 25);
    }

    #[test]
    fn poisson_chain() {
        let p = auto_params(16.0, 7, NoiseModel::Poisson).unwrap();
        assert_eq!(p.d, 26);
        assert!((p.f_factor - (1.5391 + 10.1560 / 30.4288)).abs() < 1e-12);
        assert_eq!(p.window_side, 21);
    }

    #[test]
    fn unknown_side() {
        assert!(matches!(
            auto_params(16.0, 9, NoiseModel::Gaussian),
            Err(Error::Lookup { side: 9, .. })
        ));
    }

    #[test]
    fn json_round_trip() {
        let json = serde_json::to_string(FitTable::builtin().rows()).unwrap();
        assert_eq!(FitTable::from_json(&json).unwrap(), FitTable::builtin());
        let dup = format!("[{0},{0}]", serde_json::to_string(&BUILTIN[0]).unwrap());
        assert!(FitTable::from_json(&dup).is_err());
        let custom = r#"[{"model":"gaussian","side":9,"m1":0.001,"c1":0.0,"m2":2.0,"c2":1.0,"l1":1.0,"l2":-3.0,"l3":10.0}]"#;
        let t = FitTable::from_json(custom).unwrap();
        let p = auto_params_with(&t, 10.0, 9, NoiseModel::Gaussian).unwrap();
        assert_eq!(p.d, 21);
        assert_eq!(p.window_side, 27);
    }
}
