//! Orthonormal 2-D DCT-II forward/inverse transforms.
//!
//! Planes are transformed separably: a precomputed cosine table per dimension,
//! rows first, then columns. The tables are orthonormal, so the inverse is the
//! transposed product and Parseval holds to machine precision. All spectral
//! math runs in f64.

use ndarray::{Array2, ArrayView2, Axis};

use crate::error::{Error, Result};
use crate::tensor::{FeatureMapSequence, Spectrum};

/// A single real-valued H x W plane; the unit the 2-D DCT operates on.
#[derive(Debug, Clone, PartialEq)]
pub struct Plane {
    data: Array2<f64>,
}

impl Plane {
    pub fn new(data: Array2<f64>) -> Result<Self> {
        let (h, w) = data.dim();
        if h == 0 || w == 0 {
            return Err(Error::shape("Plane", "H >= 1 and W >= 1", format!("{h}x{w}")));
        }
        Ok(Self { data })
    }

    pub fn from_vec(height: usize, width: usize, values: Vec<f64>) -> Result<Self> {
        let data = Array2::from_shape_vec((height, width), values).map_err(|e| {
            Error::shape("Plane", format!("{height}x{width} values"), e.to_string())
        })?;
        Self::new(data)
    }

    pub fn height(&self) -> usize {
        self.data.dim().0
    }

    pub fn width(&self) -> usize {
        self.data.dim().1
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.data
    }

    pub fn into_inner(self) -> Array2<f64> {
        self.data
    }
}

/// Orthonormal DCT-II basis for one dimension of size M.
///
/// Entry `(u, i)` is `c(u) * cos((i + 0.5) * PI * u / M)` with
/// `c(0) = sqrt(1/M)` and `c(u) = sqrt(2/M)` otherwise, so the rows form an
/// orthonormal set: `T * T^t = I`.
#[derive(Debug, Clone)]
pub struct CosineTable {
    size: usize,
    matrix: Array2<f64>,
}

impl CosineTable {
    pub fn new(size: usize) -> Result<Self> {
        if size == 0 {
            return Err(Error::shape("CosineTable", "size >= 1", "0"));
        }
        let m = size as f64;
        let c0 = (1.0 / m).sqrt();
        let c = (2.0 / m).sqrt();
        let matrix = Array2::from_shape_fn((size, size), |(u, i)| {
            let norm = if u == 0 { c0 } else { c };
            norm * ((i as f64 + 0.5) * std::f64::consts::PI * u as f64 / m).cos()
        });
        Ok(Self { size, matrix })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn matrix(&self) -> &Array2<f64> {
        &self.matrix
    }

    /// Max abs deviation of `T * T^t` from the identity; used to audit the
    /// orthonormality invariant.
    pub fn orthonormality_error(&self) -> f64 {
        let gram = self.matrix.dot(&self.matrix.t());
        let mut worst = 0.0f64;
        for ((u, v), &g) in gram.indexed_iter() {
            let expected = if u == v { 1.0 } else { 0.0 };
            worst = worst.max((g - expected).abs());
        }
        worst
    }
}

/// Separable 2-D DCT-II for planes of a fixed shape.
///
/// Height and width get their own tables so non-square planes stay
/// orthonormal per dimension.
#[derive(Debug, Clone)]
pub struct Dct2 {
    rows: CosineTable,
    cols: CosineTable,
}

impl Dct2 {
    pub fn new(height: usize, width: usize) -> Result<Self> {
        Ok(Self {
            rows: CosineTable::new(height)?,
            cols: CosineTable::new(width)?,
        })
    }

    pub fn forward(&self, input: &Plane) -> Result<Plane> {
        self.check_shape(input)?;
        ensure_finite(input.values().view(), "dct2_forward input")?;
        Plane::new(self.forward_array(input.values().view()))
    }

    pub fn inverse(&self, input: &Plane) -> Result<Plane> {
        self.check_shape(input)?;
        ensure_finite(input.values().view(), "dct2_inverse input")?;
        Plane::new(self.inverse_array(input.values().view()))
    }

    /// D = T_h * X * T_w^t
    pub(crate) fn forward_array(&self, x: ArrayView2<'_, f64>) -> Array2<f64> {
        self.rows.matrix.dot(&x).dot(&self.cols.matrix.t())
    }

    /// X = T_h^t * D * T_w
    pub(crate) fn inverse_array(&self, d: ArrayView2<'_, f64>) -> Array2<f64> {
        self.rows.matrix.t().dot(&d).dot(&self.cols.matrix)
    }

    fn check_shape(&self, input: &Plane) -> Result<()> {
        if input.height() != self.rows.size || input.width() != self.cols.size {
            return Err(Error::shape(
                "Dct2",
                format!("{}x{}", self.rows.size, self.cols.size),
                format!("{}x{}", input.height(), input.width()),
            ));
        }
        Ok(())
    }
}

fn ensure_finite(view: ArrayView2<'_, f64>, context: &str) -> Result<()> {
    if view.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite {
            context: context.to_string(),
        })
    }
}

/// Forward orthonormal 2-D DCT-II of a single plane.
pub fn dct2_forward(input: &Plane) -> Result<Plane> {
    Dct2::new(input.height(), input.width())?.forward(input)
}

/// Inverse of [`dct2_forward`]; `inverse(forward(x)) == x` to ~1e-9.
pub fn dct2_inverse(input: &Plane) -> Result<Plane> {
    Dct2::new(input.height(), input.width())?.inverse(input)
}

/// Transform every (frame, channel) plane of a sequence independently.
///
/// The cosine tables are built once and shared; plane errors carry the
/// offending (n, c) index.
pub fn dct2_batch(input: &FeatureMapSequence) -> Result<Spectrum> {
    let (n, c, h, w) = input.dims();
    let dct = Dct2::new(h, w)?;
    let mut out = ndarray::Array4::<f64>::zeros((n, c, h, w));
    for frame in 0..n {
        for channel in 0..c {
            let plane = input.plane(frame, channel);
            ensure_finite(plane, &format!("dct2_batch plane (n={frame}, c={channel})"))?;
            let transformed = dct.forward_array(plane);
            out.index_axis_mut(Axis(0), frame)
                .index_axis_mut(Axis(0), channel)
                .assign(&transformed);
        }
    }
    Spectrum::new(out)
}
