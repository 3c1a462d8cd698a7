//! Inverse-square interactions between a patch and its neighbours.
//!
//! A neighbour `B` at centre distance `D` from the target `A` adds
//! `p·|A_i − B_i| / D²` to pixel `i` of the target's potential. Neighbours
//! are drawn from a square search window centred on the target; the window
//! wraps cyclically at image edges, but distances are measured on the
//! unwrapped window offsets so a wrapped neighbour stays close.

use crate::error::{Error, Result};
use crate::image::{Image, Origin, Patch};

/// Euclidean distance between two patch origins, in pixels. For patches of
/// equal side this is also the distance between their centres.
pub fn patch_distance(a: Origin, b: Origin) -> f64 {
    let dr = a.row as f64 - b.row as f64;
    let dc = a.col as f64 - b.col as f64;
    (dr * dr + dc * dc).sqrt()
}

#[inline]
fn offset_distance(dr: isize, dc: isize) -> f64 {
    ((dr * dr + dc * dc) as f64).sqrt()
}

#[inline]
fn interaction_term(p: f64, a: f64, b: f64, distance: f64) -> f64 {
    p * (a - b).abs() / (distance * distance)
}

/// Per-pixel interaction `p·|A_i − B_i| / D²`.
pub fn pair_interaction(a: &Patch, b: &Patch, distance: f64, p: f64) -> Result<Vec<f64>> {
    if !(distance > 0.0) {
        return Err(Error::validation(format!(
            "interaction distance must be positive, got {distance}"
        )));
    }
    if a.side() != b.side() {
        return Err(Error::validation(format!(
            "patch sides differ: {} vs {}",
            a.side(),
            b.side()
        )));
    }
    Ok(a.values()
        .iter()
        .zip(b.values())
        .map(|(&x, &y)| interaction_term(p, x, y, distance))
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Neighbor {
    /// Neighbour values, extracted with cyclic wrap. Its origin is the wrapped
    /// position in the image.
    pub patch: Patch,
    pub distance: f64,
    /// Unwrapped `(row, col)` displacement from the target origin.
    pub offset: (isize, isize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Neighborhood {
    pub target: Patch,
    pub neighbors: Vec<Neighbor>,
    pub window_side: usize,
}

/// Total interaction on each pixel of a patch.
#[derive(Debug, Clone, PartialEq)]
pub struct InteractionField {
    values: Vec<f64>,
}

impl InteractionField {
    pub fn zeros(dim: usize) -> Self {
        Self {
            values: vec![0.0; dim],
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Window displacements, row-major, that place a whole neighbour inside a
/// `window_side` window centred on the target. The zero displacement (the
/// target itself) is skipped.
pub fn window_offsets(
    side: usize,
    window_side: usize,
    neighbor_stride: usize,
) -> Result<Vec<(isize, isize)>> {
    if window_side < side {
        return Err(Error::validation(format!(
            "search window {window_side} is smaller than the patch side {side}"
        )));
    }
    if window_side.is_multiple_of(2) {
        return Err(Error::validation(format!(
            "search window side must be odd, got {window_side}"
        )));
    }
    if neighbor_stride == 0 {
        return Err(Error::validation("neighbour stride must be at least 1"));
    }
    let reach = ((window_side - side) / 2 / neighbor_stride) as isize;
    let step = neighbor_stride as isize;
    let mut out = Vec::new();
    for i in -reach..=reach {
        for j in -reach..=reach {
            if i != 0 || j != 0 {
                out.push((i * step, j * step));
            }
        }
    }
    Ok(out)
}

fn wrap(base: usize, delta: isize, len: usize) -> usize {
    (base as isize + delta).rem_euclid(len as isize) as usize
}

pub fn collect_neighbors(
    image: &Image,
    target_origin: Origin,
    side: usize,
    window_side: usize,
    neighbor_stride: usize,
) -> Result<Neighborhood> {
    let offsets = window_offsets(side, window_side, neighbor_stride)?;
    let target = image.extract_patch(target_origin, side, false)?;
    let neighbors = offsets
        .into_iter()
        .map(|(dr, dc)| {
            let origin = Origin::new(
                wrap(target_origin.row, dr, image.height()),
                wrap(target_origin.col, dc, image.width()),
            );
            Ok(Neighbor {
                patch: image.extract_patch(origin, side, true)?,
                distance: offset_distance(dr, dc),
                offset: (dr, dc),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Neighborhood {
        target,
        neighbors,
        window_side,
    })
}

/// Element-wise sum of the pair interactions over all neighbours.
pub fn total_interaction(nbhd: &Neighborhood, p: f64) -> Result<InteractionField> {
    let mut field = InteractionField::zeros(nbhd.target.dim());
    for n in &nbhd.neighbors {
        let pair = pair_interaction(&nbhd.target, &n.patch, n.distance, p)?;
        for (acc, v) in field.values.iter_mut().zip(pair) {
            *acc += v;
        }
    }
    Ok(field)
}

/// Same result as `collect_neighbors` followed by `total_interaction`, bit
/// for bit, without materialising the neighbour patches.
pub(crate) fn interaction_field(
    image: &Image,
    target: &Patch,
    offsets: &[(isize, isize)],
    p: f64,
) -> InteractionField {
    let side = target.side();
    let (w, h) = (image.width(), image.height());
    let data = image.data();
    let origin = target.origin();
    let mut field = InteractionField::zeros(target.dim());
    let mut cols = vec![0usize; side];
    for &(dr, dc) in offsets {
        let distance = offset_distance(dr, dc);
        let row0 = wrap(origin.row, dr, h);
        let col0 = wrap(origin.col, dc, w);
        for (k, c) in cols.iter_mut().enumerate() {
            *c = (col0 + k) % w;
        }
        for r in 0..side {
            let row = (row0 + r) % h;
            let base = row * w;
            let a_row = &target.values()[r * side..(r + 1) * side];
            let f_row = &mut field.values[r * side..(r + 1) * side];
            for ((acc, &a), &c) in f_row.iter_mut().zip(a_row).zip(&cols) {
                *acc += interaction_term(p, a, data[base + c], distance);
            }
        }
    }
    field
}

/// Target values plus the interaction field.
pub fn effective_potential(target: &Patch, field: &InteractionField) -> Result<Patch> {
    if field.values.len() != target.dim() {
        return Err(Error::validation(format!(
            "interaction field has {} entries for a patch of {}",
            field.values.len(),
            target.dim()
        )));
    }
    target.with_values(
        target
            .values()
            .iter()
            .zip(&field.values)
            .map(|(a, b)| a + b)
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn patch(values: Vec<f64>) -> Patch {
        let side = (values.len() as f64).sqrt() as usize;
        Patch::new(side, values, Origin::default()).unwrap()
    }

    #[test]
    fn distances() {
        assert_eq!(patch_distance(Origin::new(0, 0), Origin::new(0, 0)), 0.0);
        assert_eq!(patch_distance(Origin::new(0, 0), Origin::new(3, 4)), 5.0);
        assert_eq!(patch_distance(Origin::new(2, 7), Origin::new(5, 3)), 5.0);
    }

    #[test]
    fn pair_law() {
        let a = patch(vec![1.0, 2.0, 3.0, 4.0]);
        let b = patch(vec![1.0, 2.0, 3.0, 8.0]);
        let got = pair_interaction(&a, &b, 5.0, 0.05).unwrap();
        assert_eq!(&got[..3], &[0.0; 3]);
        assert!((got[3] - 0.008).abs() < 1e-15);
        assert!(pair_interaction(&a, &a, 2.0, 3.0).unwrap().iter().all(|&v| v == 0.0));
        assert!(pair_interaction(&a, &b, 1.0, 0.0).unwrap().iter().all(|&v| v == 0.0));
        assert!(pair_interaction(&a, &b, 0.0, 1.0).is_err());
    }

    #[test]
    fn window_equal_to_patch_has_no_neighbors() {
        let img = Image::constant(8, 8, 3.0).unwrap();
        let n = collect_neighbors(&img, Origin::new(2, 2), 3, 3, 1).unwrap();
        assert!(n.neighbors.is_empty());
    }

    #[test]
    fn neighbor_count_and_zero_field_on_constant_image() {
        let img = Image::constant(8, 8, 7.0).unwrap();
        let n = collect_neighbors(&img, Origin::new(2, 2), 3, 7, 1).unwrap();
        assert_eq!(n.neighbors.len(), 24);
        let field = total_interaction(&n, 0.3).unwrap();
        assert!(field.values().iter().all(|&v| v == 0.0));
        assert_eq!(effective_potential(&n.target, &field).unwrap(), n.target);
    }

    #[test]
    fn corner_target_wraps() {
        let img = Image::from_fn(6, 6, |r, c| (r * 6 + c) as f64).unwrap();
        let n = collect_neighbors(&img, Origin::new(0, 0), 3, 7, 1).unwrap();
        assert_eq!(n.neighbors.len(), 24);
        let up_left = n.neighbors.iter().find(|n| n.offset == (-2, -2)).unwrap();
        assert_eq!(up_left.patch.origin(), Origin::new(4, 4));
        assert!((up_left.distance - 8f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn even_window_rejected() {
        let img = Image::constant(8, 8, 1.0).unwrap();
        assert!(collect_neighbors(&img, Origin::new(0, 0), 3, 6, 1).is_err());
        assert!(collect_neighbors(&img, Origin::new(0, 0), 3, 1, 1).is_err());
    }

    #[test]
    fn hand_sum_of_two_neighbors() {
        let target = patch(vec![4.0; 4]);
        let nb = |d: f64| Neighbor {
            patch: patch(vec![0.0; 4]),
            distance: d,
            offset: (0, 0),
        };
        let nbhd = Neighborhood {
            target,
            neighbors: vec![nb(1.0), nb(2.0)],
            window_side: 5,
        };
        let field = total_interaction(&nbhd, 1.0).unwrap();
        assert_eq!(field.values(), &[5.0; 4]);
    }

    #[test]
    fn empty_window_gives_zero_field() {
        let nbhd = Neighborhood {
            target: patch(vec![1.0; 4]),
            neighbors: vec![],
            window_side: 2,
        };
        assert_eq!(total_interaction(&nbhd, 1.0).unwrap().values(), &[0.0; 4]);
    }

    #[test]
    fn effective_potential_adds() {
        let t = patch(vec![1.0]);
        let f = InteractionField { values: vec![0.5] };
        assert_eq!(effective_potential(&t, &f).unwrap().values(), &[1.5]);
        let bad = InteractionField { values: vec![0.5, 1.0] };
        assert!(effective_potential(&t, &bad).is_err());
    }

    #[test]
    fn streaming_field_matches_collected() {
        let img = Image::from_fn(9, 7, |r, c| ((r * 31 + c * 17) % 23) as f64 * 1.7).unwrap();
        for origin in [Origin::new(0, 0), Origin::new(4, 6), Origin::new(3, 2)] {
            let nbhd = collect_neighbors(&img, origin, 3, 7, 1).unwrap();
            let slow = total_interaction(&nbhd, 0.37).unwrap();
            let offsets = window_offsets(3, 7, 1).unwrap();
            let fast = interaction_field(&img, &nbhd.target, &offsets, 0.37);
            assert_eq!(slow, fast);
        }
    }

    #[test]
    fn strided_lattice() {
        let offs = window_offsets(3, 11, 2).unwrap();
        // reach = (11-3)/2/2 = 2 lattice steps -> 5x5 - 1
        assert_eq!(offs.len(), 24);
        assert!(offs.contains(&(-4, 4)));
        assert!(!offs.contains(&(1, 0)));
    }
}
