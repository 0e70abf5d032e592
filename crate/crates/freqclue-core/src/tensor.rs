//! Rank-4 tensor newtypes shared across the pipeline.
//!
//! Both types wrap an `(N, C, H, W)` array: `FeatureMapSequence` holds
//! per-frame backbone activations in the pixel domain, `Spectrum` holds their
//! per-plane DCT coefficients (raw or band-weighted).

use ndarray::{Array4, ArrayView2, ArrayView4};

use crate::error::{Error, Result};

/// Frame-sequence feature maps: `(frames, channels, height, width)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMapSequence(Array4<f64>);

/// Per-frame, per-channel DCT coefficient planes: `(frames, channels, height, width)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum(Array4<f64>);

fn check_dims(context: &str, dims: (usize, usize, usize, usize)) -> Result<()> {
    let (n, c, h, w) = dims;
    if n == 0 || c == 0 || h == 0 || w == 0 {
        return Err(Error::shape(
            context,
            "all of N, C, H, W >= 1",
            format!("{n}x{c}x{h}x{w}"),
        ));
    }
    Ok(())
}

macro_rules! tensor_impl {
    ($name:ident, $context:literal) => {
        impl $name {
            pub fn new(data: Array4<f64>) -> Result<Self> {
                check_dims($context, data.dim())?;
                Ok(Self(data))
            }

            /// (N, C, H, W)
            pub fn dims(&self) -> (usize, usize, usize, usize) {
                self.0.dim()
            }

            pub fn frames(&self) -> usize {
                self.0.dim().0
            }

            pub fn channels(&self) -> usize {
                self.0.dim().1
            }

            pub fn height(&self) -> usize {
                self.0.dim().2
            }

            pub fn width(&self) -> usize {
                self.0.dim().3
            }

            pub fn view(&self) -> ArrayView4<'_, f64> {
                self.0.view()
            }

            /// The (frame, channel) plane as a 2-D view.
            pub fn plane(&self, frame: usize, channel: usize) -> ArrayView2<'_, f64> {
                self.0
                    .view()
                    .index_axis_move(ndarray::Axis(0), frame)
                    .index_axis_move(ndarray::Axis(0), channel)
            }

            pub fn into_inner(self) -> Array4<f64> {
                self.0
            }

            pub fn as_array(&self) -> &Array4<f64> {
                &self.0
            }
        }
    };
}

tensor_impl!(FeatureMapSequence, "FeatureMapSequence");
tensor_impl!(Spectrum, "Spectrum");

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array4;

    #[test]
    fn rejects_zero_dims() {
        let t = Array4::<f64>::zeros((0, 1, 4, 4));
        assert!(matches!(
            FeatureMapSequence::new(t),
            Err(Error::Shape { .. })
        ));
        let t = Array4::<f64>::zeros((2, 1, 0, 4));
        assert!(matches!(Spectrum::new(t), Err(Error::Shape { .. })));
    }

    #[test]
    fn plane_view_matches_indexing() {
        let t = Array4::from_shape_fn((2, 3, 4, 5), |(n, c, h, w)| {
            (n * 1000 + c * 100 + h * 10 + w) as f64
        });
        let seq = FeatureMapSequence::new(t).unwrap();
        let plane = seq.plane(1, 2);
        assert_eq!(plane[[3, 4]], 1234.0);
        assert_eq!(plane.dim(), (4, 5));
    }
}
