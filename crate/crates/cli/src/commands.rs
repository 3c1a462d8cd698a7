use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use dequip::dequip::default_target_stride;
use dequip::hyper::{default_window, estimate_d, estimate_f_factor, estimate_p};
use dequip::metrics::PEAK;
use dequip::pgm::{load_pgm, quantize, save_pgm};
use dequip::spectral::average_ipr;
use dequip::{
    add_noise_with, cnr, denoise_image, measure_snr_with, psnr, qab_denoise, ssim, DenoiseParams,
    FitTable, Image, NoiseKind, NoiseModel, QabParams, SnrConvention,
};
use serde::Serialize;

use crate::args::{BenchArgs, DenoiseArgs, HyperArgs, IprArgs, MetricsArgs, NoiseArgs, QabArgs};
use crate::failure::{Failure, Outcome};
use crate::report::{write_rows, IprRow, MetricsRow, NoiseRow, RunRow};

fn required<T>(value: Option<T>, flag: &str) -> Outcome<T> {
    value.ok_or_else(|| Failure::usage(format!("--{flag} is required")))
}

fn file_name(path: &Path) -> String {
    path.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

fn load_table(path: Option<&Path>) -> Outcome<FitTable> {
    Ok(match path {
        Some(p) => FitTable::load(p)?,
        None => FitTable::builtin(),
    })
}

fn finite_db(v: dequip::Db) -> f64 {
    v.value()
}

/// PSNR and SSIM of `test` against `reference`; SSIM is left out for
/// images smaller than its window.
fn score(reference: &Image, test: &Image) -> Outcome<(f64, Option<f64>)> {
    let p = finite_db(psnr(reference, test, PEAK)?);
    let s = if reference.width() >= 11 && reference.height() >= 11 {
        Some(ssim(reference, test)?)
    } else {
        None
    };
    Ok((p, s))
}

fn stdout_rows<R: Serialize>(rows: &[R]) -> Outcome {
    write_rows(io::stdout().lock(), rows)
}

/// Hyperparameters from explicit values, filling any gaps from the fit
/// table at the given SNR.
pub fn denoise_params(args: &DenoiseArgs) -> Outcome<DenoiseParams> {
    let side = args.patch.unwrap_or(7);
    let explicit = args.p.is_some() && args.d.is_some() && args.ffactor.is_some();
    let (p, d, f) = if explicit {
        (args.p.unwrap(), args.d.unwrap(), args.ffactor.unwrap())
    } else {
        let snr = args.snr.ok_or_else(|| {
            Failure::usage("--snr is required unless --p, --d and --ffactor are all given")
        })?;
        let model = args.model.unwrap_or(NoiseModel::Gaussian);
        let table = load_table(args.table.as_deref())?;
        let row = table.lookup(model, side)?;
        let p = args.p.unwrap_or_else(|| estimate_p(snr, row));
        let d = args.d.unwrap_or_else(|| estimate_d(snr, row, side * side));
        let f = match args.ffactor {
            Some(f) => f,
            None => estimate_f_factor(d, row)?,
        };
        (p, d, f)
    };
    let params = DenoiseParams {
        patch_side: side,
        window_side: args.window.unwrap_or_else(|| default_window(side)),
        p,
        d,
        f_factor: f,
        target_stride: args.stride.unwrap_or_else(|| default_target_stride(side)),
        neighbor_stride: args.neighbor_stride.unwrap_or(1),
    };
    params.validate()?;
    Ok(params)
}

pub fn denoise(args: DenoiseArgs) -> Outcome {
    let args = args.resolve()?;
    let input = required(args.input.clone(), "in")?;
    let out = required(args.out.clone(), "out")?;
    let params = denoise_params(&args)?;
    eprintln!(
        "params: {}",
        serde_json::to_string(&params).expect("params serialise")
    );

    let noisy = load_pgm(&input)?;
    let reference = args.reference.as_deref().map(load_pgm).transpose()?;
    let start = Instant::now();
    let clean = denoise_image(&noisy, &params)?;
    let wall_ms = start.elapsed().as_secs_f64() * 1e3;
    save_pgm(&clean, &out)?;

    let (psnr, ssim) = match &reference {
        Some(r) => {
            let (p, s) = score(r, &clean)?;
            (Some(p), s)
        }
        None => (None, None),
    };
    stdout_rows(&[RunRow {
        image: file_name(&input),
        method: format!("dequip-{0}x{0}", params.patch_side),
        noise_model: args.model.map(|m| m.to_string()).unwrap_or_default(),
        target_snr: args.snr,
        seed: args.seed.map(|s| s.to_string()).unwrap_or_default(),
        psnr,
        ssim,
        cnr: None,
        wall_ms,
    }])
}

fn qab_params(args: &QabArgs) -> Outcome<QabParams> {
    let params = QabParams {
        beta: required(args.beta, "beta")?,
        smooth_sigma: args.sigma.unwrap_or(0.0),
        keep: required(args.keep, "keep")?,
        tile_side: args.tile.unwrap_or(dequip::qab::MAX_TILE_SIDE),
    };
    params.validate()?;
    Ok(params)
}

pub fn qab(args: QabArgs) -> Outcome {
    let args = args.resolve()?;
    let input = required(args.input.clone(), "in")?;
    let out = required(args.out.clone(), "out")?;
    let params = qab_params(&args)?;

    let noisy = load_pgm(&input)?;
    let reference = args.reference.as_deref().map(load_pgm).transpose()?;
    let start = Instant::now();
    let clean = qab_denoise(&noisy, &params)?;
    let wall_ms = start.elapsed().as_secs_f64() * 1e3;
    save_pgm(&clean, &out)?;

    let (psnr, ssim) = match &reference {
        Some(r) => {
            let (p, s) = score(r, &clean)?;
            (Some(p), s)
        }
        None => (None, None),
    };
    stdout_rows(&[RunRow {
        image: file_name(&input),
        method: format!("qab-{0}x{0}", params.tile_side),
        noise_model: String::new(),
        target_snr: None,
        seed: String::new(),
        psnr,
        ssim,
        cnr: None,
        wall_ms,
    }])
}

pub fn noise(args: NoiseArgs) -> Outcome {
    let args = args.resolve()?;
    let input = required(args.input.clone(), "in")?;
    let out = required(args.out.clone(), "out")?;
    let kind = required(args.model, "model")?;
    let snr = required(args.snr, "snr")?;
    let seed = args.seed.unwrap_or(0);
    let convention = args.snr_convention.unwrap_or_default();

    let clean = load_pgm(&input)?;
    let noisy = add_noise_with(&clean, kind, snr, seed, convention)?;
    save_pgm(&noisy, &out)?;
    stdout_rows(&[NoiseRow {
        image: file_name(&input),
        noise_model: kind.to_string(),
        target_snr: snr,
        seed,
        measured_snr: finite_db(measure_snr_with(&clean, &noisy, convention)?),
        snr_convention: convention.to_string(),
    }])
}

pub fn metrics(args: MetricsArgs) -> Outcome {
    let reference = load_pgm(&args.reference)?;
    let test = load_pgm(&args.test)?;
    let (psnr, ssim) = score(&reference, &test)?;
    let cnr = match (args.roi_a, args.roi_b) {
        (Some(a), Some(b)) => Some(cnr(&test, a.0, b.0)?),
        _ => None,
    };
    stdout_rows(&[MetricsRow {
        reference: file_name(&args.reference),
        test: file_name(&args.test),
        snr: finite_db(measure_snr_with(&reference, &test, SnrConvention::Power)?),
        psnr,
        ssim,
        cnr,
    }])
}

pub fn ipr(args: IprArgs) -> Outcome {
    if args.seeds == 0 {
        return Err(Failure::usage("--seeds must be at least 1"));
    }
    let clean = load_pgm(&args.input)?;
    let mut rows = Vec::new();
    for &snr in &args.snr_list {
        for &side in &args.patch {
            let mut total = 0.0;
            for seed in 0..args.seeds {
                let noisy =
                    add_noise_with(&clean, NoiseKind::Gaussian, snr, seed, args.snr_convention)?;
                total += average_ipr(&noisy, side, args.beta, args.max_patches)?;
            }
            rows.push(IprRow {
                snr,
                patch_side: side,
                mean_ipr: total / args.seeds as f64,
            });
        }
    }
    stdout_rows(&rows)
}

#[derive(Serialize)]
struct HyperReport {
    p: f64,
    d: usize,
    f_factor: f64,
    window_side: usize,
}

pub fn hyper(args: HyperArgs) -> Outcome {
    let table = load_table(args.table.as_deref())?;
    let params = dequip::hyper::auto_params_with(&table, args.snr, args.patch, args.model)?;
    let report = HyperReport {
        p: params.p,
        d: params.d,
        f_factor: params.f_factor,
        window_side: params.window_side,
    };
    println!("{}", serde_json::to_string(&report).expect("report serialises"));
    Ok(())
}

fn model_kind(model: NoiseModel) -> NoiseKind {
    match model {
        NoiseModel::Gaussian => NoiseKind::Gaussian,
        NoiseModel::Poisson => NoiseKind::Poisson,
    }
}

fn pgm_files(dir: &Path) -> Outcome<Vec<PathBuf>> {
    let entries = std::fs::read_dir(dir).map_err(|e| Failure::io(dir, e))?;
    let mut files = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| Failure::io(dir, e))?.path();
        if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("pgm")) {
            files.push(path);
        }
    }
    files.sort();
    if files.is_empty() {
        return Err(Failure::usage(format!(
            "no .pgm images in {}",
            dir.display()
        )));
    }
    Ok(files)
}

fn mean_row(rows: &[RunRow]) -> RunRow {
    let n = rows.len() as f64;
    let mean = |f: fn(&RunRow) -> Option<f64>| -> Option<f64> {
        rows.iter().map(f).sum::<Option<f64>>().map(|s| s / n)
    };
    RunRow {
        seed: "mean".into(),
        psnr: mean(|r| r.psnr),
        ssim: mean(|r| r.ssim),
        cnr: None,
        wall_ms: rows.iter().map(|r| r.wall_ms).sum::<f64>() / n,
        ..rows[0].clone()
    }
}

/// Noisy image as the bench sees it; with `quantize` it is rounded to 8 bits
/// exactly as `noise` would write it.
fn bench_noisy(
    clean: &Image,
    model: NoiseModel,
    snr: f64,
    seed: u64,
    args: &BenchArgs,
) -> Outcome<Image> {
    let noisy = add_noise_with(clean, model_kind(model), snr, seed, args.snr_convention)?;
    if !args.quantize {
        return Ok(noisy);
    }
    let data = noisy.data().iter().map(|&v| f64::from(quantize(v))).collect();
    Ok(Image::new(noisy.width(), noisy.height(), data)?)
}

pub fn bench(args: BenchArgs) -> Outcome {
    if args.seeds == 0 {
        return Err(Failure::usage("--seeds must be at least 1"));
    }
    let images = pgm_files(&args.images)?;
    let qab = match args.qab_tile {
        Some(tile) => {
            let params = QabParams {
                beta: required(args.qab_beta, "qab-beta")?,
                smooth_sigma: args.qab_sigma,
                keep: required(args.qab_keep, "qab-keep")?,
                tile_side: tile,
            };
            params.validate()?;
            Some(params)
        }
        None => None,
    };

    let mut rows = Vec::new();
    for path in &images {
        let clean = load_pgm(path)?;
        let image = file_name(path);
        for &model in &args.models {
            for &snr in &args.snrs {
                let seeds = args.first_seed..args.first_seed + args.seeds;
                let noisy: Vec<Image> = seeds
                    .clone()
                    .map(|s| bench_noisy(&clean, model, snr, s, &args))
                    .collect::<Outcome<_>>()?;
                let cell = |method: String, run: &dyn Fn(&Image) -> dequip::Result<Image>| {
                    let mut cell_rows = Vec::new();
                    for (seed, y) in seeds.clone().zip(&noisy) {
                        let start = Instant::now();
                        let out = run(y)?;
                        let wall_ms = start.elapsed().as_secs_f64() * 1e3;
                        let (p, s) = score(&clean, &out)?;
                        cell_rows.push(RunRow {
                            image: image.clone(),
                            method: method.clone(),
                            noise_model: model.to_string(),
                            target_snr: Some(snr),
                            seed: seed.to_string(),
                            psnr: Some(p),
                            ssim: s,
                            cnr: None,
                            wall_ms,
                        });
                    }
                    let mean = mean_row(&cell_rows);
                    cell_rows.push(mean);
                    Outcome::Ok(cell_rows)
                };
                for &side in &args.patches {
                    let params = dequip::auto_params(snr, side, model)?;
                    rows.extend(cell(format!("dequip-{side}x{side}"), &|y| {
                        denoise_image(y, &params)
                    })?);
                }
                if let Some(q) = &qab {
                    rows.extend(cell(format!("qab-{0}x{0}", q.tile_side), &|y| {
                        qab_denoise(y, q)
                    })?);
                }
            }
        }
    }

    match &args.out {
        Some(path) => {
            let file = File::create(path).map_err(|e| Failure::io(path, e))?;
            write_rows(file, &rows)?;
        }
        None => stdout_rows(&rows)?,
    }
    io::stdout().flush().map_err(|e| Failure::Io(e.to_string()))
}
