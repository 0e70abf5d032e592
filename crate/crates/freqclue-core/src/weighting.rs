//! Band weighting of DCT spectra.
//!
//! Coefficients at position (u, v) are scaled by `base^alpha(u+v)` where the
//! exponent steps 0 -> 1 -> 2 as u+v crosses H/3 and 2H/3. Low frequencies
//! keep their magnitude; mid and high bands are amplified so forgery residue
//! there carries more weight downstream.

use ndarray::{Array2, Array4, Axis};

use crate::error::{Error, Result};
use crate::tensor::Spectrum;

/// Default amplification base.
pub const DEFAULT_BASE: f64 = std::f64::consts::SQRT_2;

/// Multiplicative weight matrix over spectrum coordinates.
#[derive(Debug, Clone)]
pub struct WeightMatrix {
    base: f64,
    weights: Array2<f64>,
}

/// Band exponent for coordinate (u, v) on a spectrum of height `h`.
///
/// Thresholds compare `3 * (u + v)` against `h` and `2h` so the band
/// boundaries of the defining inequalities are exact in integer arithmetic.
/// Everything above the 2h/3 line takes the highest exponent; banding uses
/// the height only, including for non-square spectra.
pub fn band_exponent(u: usize, v: usize, h: usize) -> u8 {
    let s = 3 * (u + v);
    if s < h {
        0
    } else if s <= 2 * h {
        1
    } else {
        2
    }
}

impl WeightMatrix {
    /// Build the weight matrix for an `height x width` spectrum.
    ///
    /// `height < 3` would leave a band empty and is rejected.
    pub fn build(height: usize, width: usize, base: f64) -> Result<Self> {
        if height < 3 {
            return Err(Error::DegenerateBands { height });
        }
        if width == 0 {
            return Err(Error::shape("WeightMatrix", "W >= 1", "0"));
        }
        if !base.is_finite() || base <= 0.0 {
            return Err(Error::Config(format!(
                "weight base must be a positive finite number, got {base}"
            )));
        }
        // sqrt(2)^2 is exactly 2; squaring the rounded constant would land
        // one ulp high
        let squared = if base == DEFAULT_BASE { 2.0 } else { base * base };
        let levels = [1.0, base, squared];
        let weights = Array2::from_shape_fn((height, width), |(u, v)| {
            levels[band_exponent(u, v, height) as usize]
        });
        Ok(Self { base, weights })
    }

    pub fn height(&self) -> usize {
        self.weights.dim().0
    }

    pub fn width(&self) -> usize {
        self.weights.dim().1
    }

    pub fn base(&self) -> f64 {
        self.base
    }

    pub fn weights(&self) -> &Array2<f64> {
        &self.weights
    }

    /// The exponent map as a text grid, one row per u, for inspection.
    pub fn band_grid(&self) -> String {
        let (h, w) = self.weights.dim();
        let mut out = String::with_capacity(h * (2 * w + 1));
        for u in 0..h {
            for v in 0..w {
                if v > 0 {
                    out.push(' ');
                }
                out.push(char::from(b'0' + band_exponent(u, v, h)));
            }
            out.push('\n');
        }
        out
    }
}

/// Mean squared coefficient per exponent band of one spectrum plane.
///
/// Index 0/1/2 corresponds to the low/mid/high `u+v` bands; bands with no
/// cells report 0.
pub fn band_energies(plane: ndarray::ArrayView2<'_, f64>) -> [f64; 3] {
    let h = plane.dim().0;
    let mut sums = [0.0f64; 3];
    let mut counts = [0usize; 3];
    for ((u, v), &coef) in plane.indexed_iter() {
        let band = band_exponent(u, v, h) as usize;
        sums[band] += coef * coef;
        counts[band] += 1;
    }
    let mut out = [0.0; 3];
    for band in 0..3 {
        if counts[band] > 0 {
            out[band] = sums[band] / counts[band] as f64;
        }
    }
    out
}

/// Scale every spectrum plane elementwise by the weight matrix.
pub fn apply_weights(spectrum: &Spectrum, weights: &WeightMatrix) -> Result<Spectrum> {
    let (n, c, h, w) = spectrum.dims();
    if (weights.height(), weights.width()) != (h, w) {
        return Err(Error::shape(
            "apply_weights",
            format!("weights {h}x{w}"),
            format!("weights {}x{}", weights.height(), weights.width()),
        ));
    }
    let mut out = Array4::<f64>::zeros((n, c, h, w));
    for frame in 0..n {
        for channel in 0..c {
            let plane = spectrum.plane(frame, channel);
            let weighted = &plane * weights.weights();
            out.index_axis_mut(Axis(0), frame)
                .index_axis_mut(Axis(0), channel)
                .assign(&weighted);
        }
    }
    Spectrum::new(out)
}
