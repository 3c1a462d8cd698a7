//! Independent reference implementations shared by the integration tests.
//! Nothing here calls into the library's numerical code.

#![allow(dead_code)]

use std::path::PathBuf;

/// Cyclic Jacobi eigensolver for a dense symmetric matrix (row-major).
/// Returns eigenvalues ascending and eigenvectors as rows, in the same order.
pub fn jacobi_eigen(a: &[f64], n: usize) -> (Vec<f64>, Vec<Vec<f64>>) {
    let mut a = a.to_vec();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i * n + j].powi(2))
            .sum();
        if off < 1e-26 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| a[x * n + x].partial_cmp(&a[y * n + y]).unwrap());
    let values = order.iter().map(|&k| a[k * n + k]).collect();
    let vectors = order
        .iter()
        .map(|&k| (0..n).map(|i| v[i * n + k]).collect())
        .collect();
    (values, vectors)
}

/// Dirichlet 5-point operator over a `side`x`side` potential, written out
/// from the stencil definition.
pub fn stencil_matrix(potential: &[f64], side: usize, beta: f64) -> Vec<f64> {
    let n = side * side;
    let mut h = vec![0.0; n * n];
    for r in 0..side {
        for c in 0..side {
            let i = r * side + c;
            h[i * n + i] = potential[i] + 4.0 * beta;
            let mut link = |rr: isize, cc: isize| {
                if rr >= 0 && cc >= 0 && (rr as usize) < side && (cc as usize) < side {
                    let j = rr as usize * side + cc as usize;
                    h[i * n + j] = -beta;
                }
            };
            link(r as isize - 1, c as isize);
            link(r as isize + 1, c as isize);
            link(r as isize, c as isize - 1);
            link(r as isize, c as isize + 1);
        }
    }
    h
}

/// Small deterministic generator so fixtures do not depend on the library's
/// RNG choices.
pub struct Lcg(u64);

impl Lcg {
    pub fn new(seed: u64) -> Self {
        Lcg(seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ 0xD1B5_4A32_D192_ED03)
    }

    pub fn next_f64(&mut self) -> f64 {
        self.0 = self
            .0
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        (self.0 >> 11) as f64 / (1u64 << 53) as f64
    }

    pub fn vec(&mut self, n: usize, scale: f64) -> Vec<f64> {
        (0..n).map(|_| self.next_f64() * scale).collect()
    }
}

/// Straight-line patch denoiser: for every target on the clamped grid, sum
/// the window interactions, form the operator, keep the `d` lowest modes,
/// project, rebuild and average. Uses the Jacobi oracle for the spectrum.
#[allow(clippy::too_many_arguments)]
pub fn brute_force_denoise(
    img: &[f64],
    w: usize,
    h: usize,
    side: usize,
    window: usize,
    p: f64,
    d: usize,
    f_factor: f64,
    stride: usize,
) -> Vec<f64> {
    let axis = |len: usize| {
        let mut o: Vec<usize> = (0..=len - side).step_by(stride).collect();
        if *o.last().unwrap() != len - side {
            o.push(len - side);
        }
        o
    };
    let reach = ((window - side) / 2) as isize;
    let at = |r: isize, c: isize| {
        let rr = r.rem_euclid(h as isize) as usize;
        let cc = c.rem_euclid(w as isize) as usize;
        img[rr * w + cc]
    };
    let n = side * side;
    let mut sum = vec![0.0; w * h];
    let mut count = vec![0.0; w * h];
    for &r0 in &axis(h) {
        for &c0 in &axis(w) {
            let mut target = vec![0.0; n];
            for i in 0..side {
                for j in 0..side {
                    target[i * side + j] = img[(r0 + i) * w + c0 + j];
                }
            }
            let mut potential = target.clone();
            for dr in -reach..=reach {
                for dc in -reach..=reach {
                    if dr == 0 && dc == 0 {
                        continue;
                    }
                    let dist2 = (dr * dr + dc * dc) as f64;
                    for i in 0..side {
                        for j in 0..side {
                            let b = at(r0 as isize + dr + i as isize, c0 as isize + dc + j as isize);
                            potential[i * side + j] += p * (target[i * side + j] - b).abs() / dist2;
                        }
                    }
                }
            }
            let lo = target.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = target.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let beta = if hi > lo { f_factor * (hi - lo) } else { f_factor };
            let hmat = stencil_matrix(&potential, side, beta);
            let (_, vecs) = jacobi_eigen(&hmat, n);
            let mut rebuilt = vec![0.0; n];
            for v in vecs.iter().take(d) {
                let c: f64 = v.iter().zip(&target).map(|(a, b)| a * b).sum();
                for k in 0..n {
                    rebuilt[k] += c * v[k];
                }
            }
            for i in 0..side {
                for j in 0..side {
                    let idx = (r0 + i) * w + c0 + j;
                    sum[idx] += rebuilt[i * side + j];
                    count[idx] += 1.0;
                }
            }
        }
    }
    sum.iter().zip(&count).map(|(s, c)| s / c).collect()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

pub fn data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests").join("data")
}

/// Looks for a test image in `DEQUIP_DATA_DIR` first, then the bundled data.
pub fn find_image(name: &str) -> Option<PathBuf> {
    let mut dirs = Vec::new();
    if let Ok(dir) = std::env::var("DEQUIP_DATA_DIR") {
        dirs.push(PathBuf::from(dir));
    }
    dirs.push(data_dir());
    dirs.into_iter()
        .map(|d| d.join(name))
        .find(|p| p.is_file())
}
