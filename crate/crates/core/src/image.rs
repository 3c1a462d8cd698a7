//! Grayscale images, square patches and the grids that tile an image with them.
//!
//! Intensities are `f64` on a nominal `[0, 255]` scale. Nothing here clamps;
//! noisy images routinely leave that range and are only clamped when written
//! to disk.

use crate::error::{Error, Result};

/// Top-left pixel of a patch, in image coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Origin {
    pub row: usize,
    pub col: usize,
}

impl Origin {
    pub const fn new(row: usize, col: usize) -> Self {
        Self { row, col }
    }
}

impl From<(usize, usize)> for Origin {
    fn from((row, col): (usize, usize)) -> Self {
        Self { row, col }
    }
}

/// Row-major grayscale image.
#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl Image {
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::validation(format!(
                "image dimensions must be positive, got {width}x{height}"
            )));
        }
        if data.len() != width * height {
            return Err(Error::validation(format!(
                "{width}x{height} image needs {} values, got {}",
                width * height,
                data.len()
            )));
        }
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::validation(format!(
                "non-finite intensity at index {i}"
            )));
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    /// Builds an image by evaluating `f(row, col)` at every pixel.
    pub fn from_fn(
        width: usize,
        height: usize,
        mut f: impl FnMut(usize, usize) -> f64,
    ) -> Result<Self> {
        let mut data = Vec::with_capacity(width * height);
        for row in 0..height {
            for col in 0..width {
                data.push(f(row, col));
            }
        }
        Self::new(width, height, data)
    }

    pub fn constant(width: usize, height: usize, value: f64) -> Result<Self> {
        Self::new(width, height, vec![value; width * height])
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.data.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.width + col]
    }

    pub fn same_shape(&self, other: &Image) -> bool {
        self.width == other.width && self.height == other.height
    }

    /// Copies out the `side`x`side` block at `origin`. With `cyclic` the block
    /// wraps around the image edges; without it the block must fit.
    pub fn extract_patch(&self, origin: Origin, side: usize, cyclic: bool) -> Result<Patch> {
        extract_patch(self, origin, side, cyclic)
    }
}

/// A `side`x`side` block of intensities together with where it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct Patch {
    side: usize,
    values: Vec<f64>,
    origin: Origin,
}

impl Patch {
    pub fn new(side: usize, values: Vec<f64>, origin: Origin) -> Result<Self> {
        if side == 0 {
            return Err(Error::validation("patch side must be positive"));
        }
        if values.len() != side * side {
            return Err(Error::validation(format!(
                "patch of side {side} needs {} values, got {}",
                side * side,
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::validation("patch contains a non-finite value"));
        }
        Ok(Self {
            side,
            values,
            origin,
        })
    }

    #[inline]
    pub fn side(&self) -> usize {
        self.side
    }

    /// Number of pixels, `side²`.
    #[inline]
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn origin(&self) -> Origin {
        self.origin
    }

    pub fn min_max(&self) -> (f64, f64) {
        self.values
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            })
    }

    /// Same shape and origin, new values.
    pub fn with_values(&self, values: Vec<f64>) -> Result<Self> {
        Self::new(self.side, values, self.origin)
    }
}

pub fn extract_patch(image: &Image, origin: Origin, side: usize, cyclic: bool) -> Result<Patch> {
    if side == 0 || side > image.width.min(image.height) {
        return Err(Error::validation(format!(
            "patch side {side} must be in 1..={}",
            image.width.min(image.height)
        )));
    }
    let mut values = Vec::with_capacity(side * side);
    if cyclic {
        for dr in 0..side {
            let row = (origin.row + dr) % image.height;
            for dc in 0..side {
                let col = (origin.col + dc) % image.width;
                values.push(image.get(row, col));
            }
        }
    } else {
        if origin.row + side > image.height || origin.col + side > image.width {
            return Err(Error::Bounds {
                row: origin.row,
                col: origin.col,
                side,
                width: image.width,
                height: image.height,
            });
        }
        for row in origin.row..origin.row + side {
            let start = row * image.width + origin.col;
            values.extend_from_slice(&image.data[start..start + side]);
        }
    }
    Ok(Patch {
        side,
        values,
        origin,
    })
}

/// Patch origins that cover an image completely.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatchGrid {
    positions: Vec<Origin>,
    side: usize,
    stride: usize,
}

impl PatchGrid {
    /// Origins in row-major order.
    pub fn positions(&self) -> &[Origin] {
        &self.positions
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn stride(&self) -> usize {
        self.stride
    }

    /// Number of patches in the grid.
    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }
}

fn axis_origins(dim: usize, side: usize, stride: usize) -> Vec<usize> {
    let last = dim - side;
    let mut origins: Vec<usize> = (0..=last).step_by(stride).collect();
    if origins.last() != Some(&last) {
        origins.push(last);
    }
    origins
}

/// Origins on multiples of `stride`, with the last one on each axis pulled
/// back to `dim - side` so the right and bottom edges are covered.
pub fn patch_grid(width: usize, height: usize, side: usize, stride: usize) -> Result<PatchGrid> {
    if side == 0 || side > width.min(height) {
        return Err(Error::validation(format!(
            "patch side {side} must be in 1..={}",
            width.min(height)
        )));
    }
    if stride == 0 {
        return Err(Error::validation("stride must be at least 1"));
    }
    let rows = axis_origins(height, side, stride);
    let cols = axis_origins(width, side, stride);
    let positions = rows
        .iter()
        .flat_map(|&row| cols.iter().map(move |&col| Origin { row, col }))
        .collect();
    Ok(PatchGrid {
        positions,
        side,
        stride,
    })
}

/// Averages overlapping patches back into an image.
///
/// Accumulation runs in slice order, so the same input always produces the
/// same bits.
pub fn aggregate_patches(patches: &[Patch], width: usize, height: usize) -> Result<Image> {
    let mut sum = vec![0.0; width * height];
    let mut count = vec![0u32; width * height];
    for patch in patches {
        let Origin { row, col } = patch.origin;
        if row + patch.side > height || col + patch.side > width {
            return Err(Error::Bounds {
                row,
                col,
                side: patch.side,
                width,
                height,
            });
        }
        for (dr, chunk) in patch.values.chunks_exact(patch.side).enumerate() {
            let start = (row + dr) * width + col;
            for (k, &v) in chunk.iter().enumerate() {
                sum[start + k] += v;
                count[start + k] += 1;
            }
        }
    }
    if let Some(i) = count.iter().position(|&c| c == 0) {
        return Err(Error::Coverage {
            row: i / width,
            col: i % width,
        });
    }
    let data = sum
        .into_iter()
        .zip(count)
        .map(|(s, c)| s / f64::from(c))
        .collect();
    Image::new(width, height, data)
}
