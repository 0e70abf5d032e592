//! Independent naive oracles for the integration and acceptance suites.
//!
//! Everything here recomputes results from definitions — quadruple loops,
//! exhaustive scans, pairwise enumeration — and deliberately avoids the
//! library's separable/vectorized paths.

#![allow(dead_code)]

use freqclue_core::data::manifest::Label;
use ndarray::{Array2, Array3, Array4};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

/// Quadruple-loop orthonormal 2-D DCT-II straight from the defining double
/// sum, with per-dimension normalizers.
pub fn naive_dct2(input: &Array2<f64>) -> Array2<f64> {
    let (h, w) = input.dim();
    let c = |u: usize, m: usize| {
        if u == 0 {
            (1.0 / m as f64).sqrt()
        } else {
            (2.0 / m as f64).sqrt()
        }
    };
    Array2::from_shape_fn((h, w), |(u, v)| {
        let mut sum = 0.0;
        for i in 0..h {
            for j in 0..w {
                sum += input[[i, j]]
                    * ((i as f64 + 0.5) * std::f64::consts::PI * u as f64 / h as f64).cos()
                    * ((j as f64 + 0.5) * std::f64::consts::PI * v as f64 / w as f64).cos();
            }
        }
        c(u, h) * c(v, w) * sum
    })
}

/// Band exponent evaluated with floating-point thresholds, as an independent
/// route to the integer comparisons inside the library.
pub fn naive_band_exponent(u: usize, v: usize, h: usize) -> u8 {
    let s = (u + v) as f64;
    let third = h as f64 / 3.0;
    if s < third {
        0
    } else if s <= 2.0 * third {
        1
    } else {
        2
    }
}

/// Elementwise weighting by `beta^alpha` with f64 thresholds.
pub fn naive_weighted(spectrum: &Array4<f64>, beta: f64) -> Array4<f64> {
    let (n, c, h, w) = spectrum.dim();
    let mut out = spectrum.clone();
    for frame in 0..n {
        for channel in 0..c {
            for u in 0..h {
                for v in 0..w {
                    let alpha = naive_band_exponent(u, v, h) as i32;
                    out[[frame, channel, u, v]] = spectrum[[frame, channel, u, v]]
                        * if beta == std::f64::consts::SQRT_2 && alpha == 2 {
                            2.0
                        } else {
                            beta.powi(alpha)
                        };
                }
            }
        }
    }
    out
}

/// Exhaustive per-tile reduction over a row-major `rows x cols` grid.
pub fn naive_compact(
    spectrum: &Array4<f64>,
    grid_rows: usize,
    grid_cols: usize,
    reduction: &str,
) -> Array3<f64> {
    let (n, c, h, w) = spectrum.dim();
    assert_eq!(h % grid_rows, 0);
    assert_eq!(w % grid_cols, 0);
    let th = h / grid_rows;
    let tw = w / grid_cols;
    let k = grid_rows * grid_cols;
    let mut out = Array3::<f64>::zeros((n, c, k));
    for frame in 0..n {
        for channel in 0..c {
            for block in 0..k {
                let r0 = (block / grid_cols) * th;
                let c0 = (block % grid_cols) * tw;
                let mut values = Vec::with_capacity(th * tw);
                for r in r0..r0 + th {
                    for cc in c0..c0 + tw {
                        values.push(spectrum[[frame, channel, r, cc]]);
                    }
                }
                out[[frame, channel, block]] = match reduction {
                    "max" => values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
                    "min" => values.iter().copied().fold(f64::INFINITY, f64::min),
                    "avg" => values.iter().sum::<f64>() / values.len() as f64,
                    other => panic!("unknown reduction {other}"),
                };
            }
        }
    }
    out
}

/// The four attention stages as plain loops.
pub fn naive_attention(
    spectrum: &Array4<f64>,
    grid_rows: usize,
    grid_cols: usize,
    epsilon: f64,
) -> Array2<f64> {
    let (n, c, h, w) = spectrum.dim();
    // channel L2
    let mut a = Array3::<f64>::zeros((n, h, w));
    for frame in 0..n {
        for y in 0..h {
            for x in 0..w {
                let mut sum = 0.0;
                for channel in 0..c {
                    sum += spectrum[[frame, channel, y, x]].powi(2);
                }
                a[[frame, y, x]] = sum.sqrt();
            }
        }
    }
    // spatial normalization
    for frame in 0..n {
        let mut total = 0.0;
        for y in 0..h {
            for x in 0..w {
                total += a[[frame, y, x]];
            }
        }
        for y in 0..h {
            for x in 0..w {
                a[[frame, y, x]] /= total + epsilon;
            }
        }
    }
    // block sums
    let th = h / grid_rows;
    let tw = w / grid_cols;
    let k = grid_rows * grid_cols;
    let mut scores = Array2::<f64>::zeros((n, k));
    for frame in 0..n {
        for block in 0..k {
            let r0 = (block / grid_cols) * th;
            let c0 = (block % grid_cols) * tw;
            let mut sum = 0.0;
            for r in r0..r0 + th {
                for cc in c0..c0 + tw {
                    sum += a[[frame, r, cc]];
                }
            }
            scores[[frame, block]] = sum;
        }
    }
    // per-frame L1
    for frame in 0..n {
        let mut total = 0.0;
        for block in 0..k {
            total += scores[[frame, block]];
        }
        for block in 0..k {
            scores[[frame, block]] /= total + epsilon;
        }
    }
    scores
}

/// Triple-loop fusion.
pub fn naive_fuse(compact: &Array3<f64>, attention: &Array2<f64>) -> Vec<f64> {
    let (n, c, k) = compact.dim();
    let mut out = vec![0.0; c];
    for channel in 0..c {
        for frame in 0..n {
            for block in 0..k {
                out[channel] += compact[[frame, channel, block]] * attention[[frame, block]];
            }
        }
    }
    out
}

/// Pairwise Mann-Whitney statistic: P(fake > real) + 0.5 * P(equal).
pub fn mann_whitney_auc(scores: &[(f64, Label)]) -> f64 {
    let positives: Vec<f64> = scores
        .iter()
        .filter(|(_, l)| l.is_fake())
        .map(|(s, _)| *s)
        .collect();
    let negatives: Vec<f64> = scores
        .iter()
        .filter(|(_, l)| !l.is_fake())
        .map(|(s, _)| *s)
        .collect();
    assert!(!positives.is_empty() && !negatives.is_empty());
    let mut favorable = 0.0f64;
    for &p in &positives {
        for &n in &negatives {
            if p > n {
                favorable += 1.0;
            } else if p == n {
                favorable += 0.5;
            }
        }
    }
    favorable / (positives.len() as f64 * negatives.len() as f64)
}

pub fn random_array2(h: usize, w: usize, rng: &mut ChaCha20Rng) -> Array2<f64> {
    Array2::from_shape_fn((h, w), |_| rng.gen_range(-1.0..1.0))
}

pub fn random_array4(n: usize, c: usize, h: usize, w: usize, rng: &mut ChaCha20Rng) -> Array4<f64> {
    Array4::from_shape_fn((n, c, h, w), |_| rng.gen_range(-1.0..1.0))
}

pub fn max_abs_diff<'a>(
    a: impl IntoIterator<Item = &'a f64>,
    b: impl IntoIterator<Item = &'a f64>,
) -> f64 {
    a.into_iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

pub fn rng(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}
