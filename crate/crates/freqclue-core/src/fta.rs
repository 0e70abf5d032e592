//! Frequency temporal attention.
//!
//! Four stages turn a weighted spectrum into per-frame block weights:
//! channel-wise L2 magnitude, per-frame spatial normalization, block sums
//! over the CFE grid, and a per-frame L1 normalization. Every normalization
//! denominator carries a small epsilon so all-zero frames produce all-zero
//! rows instead of NaN.

use ndarray::{Array2, Array3, Axis};

use crate::cfe::BlockGrid;
use crate::error::{Error, Result};
use crate::tensor::Spectrum;

/// Epsilon added to normalization denominators.
pub const DEFAULT_EPSILON: f64 = 1e-12;

/// Per-frame, per-block attention weights: `N x K`, rows nonnegative and
/// summing to 1 (or to 0 for a degenerate all-zero frame).
#[derive(Debug, Clone, PartialEq)]
pub struct AttentionMap(Array2<f64>);

impl AttentionMap {
    pub fn new(data: Array2<f64>) -> Result<Self> {
        let (n, k) = data.dim();
        if n == 0 || k == 0 {
            return Err(Error::shape("AttentionMap", "N, K >= 1", format!("{n}x{k}")));
        }
        if let Some(v) = data.iter().find(|v| **v < 0.0 || !v.is_finite()) {
            return Err(Error::NonFinite {
                context: format!("AttentionMap entry {v} (must be finite and >= 0)"),
            });
        }
        Ok(Self(data))
    }

    /// (N, K)
    pub fn dims(&self) -> (usize, usize) {
        self.0.dim()
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.0
    }

    /// Serialize as CSV, one row per frame.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for row in self.0.rows() {
            let line: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        out
    }
}

/// Channel-dimension L2 magnitude: `A(n,h,w) = sqrt(sum_c F(n,c,h,w)^2)`.
pub fn channel_l2(spectrum: &Spectrum) -> Array3<f64> {
    let (n, c, h, w) = spectrum.dims();
    let mut out = Array3::<f64>::zeros((n, h, w));
    for frame in 0..n {
        for channel in 0..c {
            let plane = spectrum.plane(frame, channel);
            let mut acc = out.index_axis_mut(Axis(0), frame);
            acc.zip_mut_with(&plane, |a, &f| *a += f * f);
        }
    }
    out.mapv_inplace(f64::sqrt);
    out
}

/// Divide each frame by its total mass so entries land in [0, 1] and sum to
/// ~1; an all-zero frame stays all-zero.
pub fn spatial_normalize(magnitudes: &Array3<f64>, epsilon: f64) -> Array3<f64> {
    let mut out = magnitudes.clone();
    for mut frame in out.axis_iter_mut(Axis(0)) {
        let total: f64 = frame.sum();
        let denom = total + epsilon;
        frame.mapv_inplace(|v| v / denom);
    }
    out
}

/// Sum each normalized frame over the grid's tiles, yielding `N x K`.
pub fn block_scores(normalized: &Array3<f64>, grid: BlockGrid) -> Result<Array2<f64>> {
    let (n, h, w) = normalized.dim();
    grid.check_divides(h, w)?;
    let k = grid.block_count();
    let mut out = Array2::<f64>::zeros((n, k));
    for frame in 0..n {
        let plane = normalized.index_axis(Axis(0), frame);
        for block in 0..k {
            let (rows, cols) = grid.tile_bounds(h, w, block);
            out[[frame, block]] = plane.slice(ndarray::s![rows, cols]).sum();
        }
    }
    Ok(out)
}

/// Per-frame L1 normalization of the block scores.
pub fn frame_l1(scores: &Array2<f64>, epsilon: f64) -> Result<AttentionMap> {
    if let Some(v) = scores.iter().find(|v| **v < 0.0) {
        return Err(Error::NonFinite {
            context: format!("frame_l1 input entry {v} (must be >= 0)"),
        });
    }
    let mut out = scores.clone();
    for mut row in out.rows_mut() {
        let total: f64 = row.sum();
        let denom = total + epsilon;
        row.mapv_inplace(|v| v / denom);
    }
    AttentionMap::new(out)
}

/// Full attention pipeline over a (weighted) spectrum.
pub fn attention(spectrum: &Spectrum, grid: BlockGrid, epsilon: f64) -> Result<AttentionMap> {
    let magnitudes = channel_l2(spectrum);
    let normalized = spatial_normalize(&magnitudes, epsilon);
    let scores = block_scores(&normalized, grid)?;
    frame_l1(&scores, epsilon)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{Array2, Array4};
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn random_spectrum(n: usize, c: usize, h: usize, w: usize, seed: u64) -> Spectrum {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        Spectrum::new(Array4::from_shape_fn((n, c, h, w), |_| {
            rng.gen_range(-2.0..2.0f64)
        }))
        .unwrap()
    }

    #[test]
    fn single_channel_l2_is_absolute_value() {
        let spectrum = random_spectrum(2, 1, 4, 4, 31);
        let a = channel_l2(&spectrum);
        for n in 0..2 {
            for h in 0..4 {
                for w in 0..4 {
                    assert_eq!(a[[n, h, w]], spectrum.plane(n, 0)[[h, w]].abs());
                }
            }
        }
    }

    #[test]
    fn three_four_channels_give_five() {
        let mut tensor = Array4::<f64>::zeros((1, 2, 2, 2));
        tensor[[0, 0, 1, 1]] = 3.0;
        tensor[[0, 1, 1, 1]] = 4.0;
        let a = channel_l2(&Spectrum::new(tensor).unwrap());
        assert!((a[[0, 1, 1]] - 5.0).abs() < 1e-12);
    }

    #[test]
    fn channel_l2_matches_per_position_loop() {
        let spectrum = random_spectrum(2, 3, 4, 4, 33);
        let a = channel_l2(&spectrum);
        for n in 0..2 {
            for h in 0..4 {
                for w in 0..4 {
                    let mut sum = 0.0;
                    for c in 0..3 {
                        sum += spectrum.plane(n, c)[[h, w]].powi(2);
                    }
                    assert!((a[[n, h, w]] - sum.sqrt()).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn uniform_frame_normalizes_to_cell_mass() {
        let a = Array3::from_elem((1, 4, 8), 3.5);
        let norm = spatial_normalize(&a, DEFAULT_EPSILON);
        for &v in norm.iter() {
            assert!((v - 1.0 / 32.0).abs() < 1e-9);
        }
    }

    #[test]
    fn one_hot_frame_keeps_its_mass() {
        let mut a = Array3::zeros((1, 4, 4));
        a[[0, 2, 3]] = 9.0;
        let norm = spatial_normalize(&a, DEFAULT_EPSILON);
        assert!((norm[[0, 2, 3]] - 1.0).abs() < 1e-9);
        assert!((norm.sum() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn all_zero_frame_stays_zero_without_nan() {
        let a = Array3::zeros((2, 4, 4));
        let norm = spatial_normalize(&a, DEFAULT_EPSILON);
        assert!(norm.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn uniform_mass_splits_evenly_over_blocks() {
        let a = Array3::from_elem((1, 8, 8), 1.0 / 64.0);
        let scores = block_scores(&a, BlockGrid::new(4, 4).unwrap()).unwrap();
        for &v in scores.iter() {
            assert!((v - 1.0 / 16.0).abs() < 1e-12);
        }
    }

    #[test]
    fn all_mass_in_one_tile() {
        let mut a = Array3::zeros((1, 8, 8));
        a[[0, 0, 0]] = 1.0;
        let scores = block_scores(&a, BlockGrid::new(4, 4).unwrap()).unwrap();
        assert_eq!(scores[[0, 0]], 1.0);
        assert!(scores.iter().skip(1).all(|v| *v == 0.0));
    }

    #[test]
    fn block_scores_match_tile_sum_loop() {
        let mut rng = ChaCha20Rng::seed_from_u64(35);
        let a = Array3::from_shape_fn((2, 8, 8), |_| rng.gen_range(0.0..1.0f64));
        let grid = BlockGrid::new(2, 4).unwrap();
        let scores = block_scores(&a, grid).unwrap();
        for n in 0..2 {
            for k in 0..8 {
                let (rows, cols) = grid.tile_bounds(8, 8, k);
                let mut expected = 0.0;
                for r in rows.clone() {
                    for c in cols.clone() {
                        expected += a[[n, r, c]];
                    }
                }
                assert!((scores[[n, k]] - expected).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn frame_l1_keeps_normalized_rows() {
        let scores = Array2::from_shape_vec((1, 4), vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        let att = frame_l1(&scores, DEFAULT_EPSILON).unwrap();
        for (a, b) in att.values().iter().zip(scores.iter()) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn frame_l1_halves_a_two_two_row() {
        let scores = Array2::from_shape_vec((1, 4), vec![2.0, 2.0, 0.0, 0.0]).unwrap();
        let att = frame_l1(&scores, DEFAULT_EPSILON).unwrap();
        let row: Vec<f64> = att.values().row(0).to_vec();
        assert!((row[0] - 0.5).abs() < 1e-12);
        assert!((row[1] - 0.5).abs() < 1e-12);
        assert_eq!(row[2], 0.0);
        assert_eq!(row[3], 0.0);
    }

    #[test]
    fn frame_l1_matches_per_row_division() {
        let mut rng = ChaCha20Rng::seed_from_u64(37);
        let scores = Array2::from_shape_fn((3, 6), |_| rng.gen_range(0.0..4.0f64));
        let att = frame_l1(&scores, DEFAULT_EPSILON).unwrap();
        for n in 0..3 {
            let total: f64 = scores.row(n).sum();
            for k in 0..6 {
                let expected = scores[[n, k]] / (total + DEFAULT_EPSILON);
                assert_eq!(att.values()[[n, k]], expected);
            }
        }
    }

    #[test]
    fn identical_frames_get_identical_rows() {
        let mut rng = ChaCha20Rng::seed_from_u64(39);
        let plane = Array2::from_shape_fn((8, 8), |_| rng.gen_range(-1.0..1.0f64));
        let mut tensor = Array4::<f64>::zeros((3, 1, 8, 8));
        for n in 0..3 {
            tensor
                .index_axis_mut(Axis(0), n)
                .index_axis_mut(Axis(0), 0)
                .assign(&plane);
        }
        let att = attention(
            &Spectrum::new(tensor).unwrap(),
            BlockGrid::new(4, 4).unwrap(),
            DEFAULT_EPSILON,
        )
        .unwrap();
        let first = att.values().row(0).to_owned();
        for n in 1..3 {
            assert_eq!(att.values().row(n), first);
        }
    }

    #[test]
    fn mass_in_one_tile_dominates_attention() {
        let mut tensor = Array4::<f64>::zeros((2, 1, 8, 8));
        tensor[[0, 0, 1, 1]] = 4.0; // inside tile 0 of a 4x4 grid
        tensor[[1, 0, 7, 7]] = 2.0; // inside the last tile
        let att = attention(
            &Spectrum::new(tensor).unwrap(),
            BlockGrid::new(4, 4).unwrap(),
            DEFAULT_EPSILON,
        )
        .unwrap();
        assert!((att.values()[[0, 0]] - 1.0).abs() < 1e-9);
        assert!((att.values()[[1, 15]] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn rows_sum_to_one_and_are_nonnegative() {
        let spectrum = random_spectrum(4, 2, 8, 8, 41);
        let att = attention(&spectrum, BlockGrid::new(4, 4).unwrap(), DEFAULT_EPSILON).unwrap();
        for row in att.values().rows() {
            let sum: f64 = row.sum();
            assert!((sum - 1.0).abs() < 1e-9, "row sum {sum}");
            assert!(row.iter().all(|v| *v >= 0.0));
        }
    }

    #[test]
    fn csv_dump_has_one_row_per_frame() {
        let att = AttentionMap::new(
            Array2::from_shape_vec((2, 2), vec![0.25, 0.75, 1.0, 0.0]).unwrap(),
        )
        .unwrap();
        assert_eq!(att.to_csv(), "0.25,0.75\n1,0\n");
    }
}
