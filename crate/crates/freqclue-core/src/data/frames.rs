//! Frame ingestion: image files to normalized channel tensors.

use std::path::{Path, PathBuf};

use image::DynamicImage;
use ndarray::{Array2, Array3, ArrayView2};

use crate::data::manifest::{CropBox, VideoSample};
use crate::error::{Error, Result};

/// Per-channel normalization constants applied after scaling pixels to [0, 1].
pub const IMAGENET_MEAN: [f64; 3] = [0.485, 0.456, 0.406];
pub const IMAGENET_STD: [f64; 3] = [0.229, 0.224, 0.225];

/// Decoded frame: 1 (grayscale) or 3 (RGB) channels of `[0, 1]` intensities,
/// stored channel-major.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameImage {
    data: Array3<f64>,
}

impl FrameImage {
    pub fn new(data: Array3<f64>) -> Result<Self> {
        let (c, h, w) = data.dim();
        if !(c == 1 || c == 3) || h == 0 || w == 0 {
            return Err(Error::shape(
                "FrameImage",
                "1 or 3 channels, H, W >= 1",
                format!("{c}x{h}x{w}"),
            ));
        }
        Ok(Self { data })
    }

    /// Decode an 8-bit PNG or PGM/PPM file. Gray stays single-channel here;
    /// replication to 3 channels happens in [`preprocess`].
    pub fn load(path: &Path) -> Result<Self> {
        let decoded = image::open(path).map_err(|e| Error::Image {
            path: path.to_path_buf(),
            source: e,
        })?;
        let (c, h, w, raw): (usize, usize, usize, Vec<u8>) = match decoded {
            DynamicImage::ImageLuma8(img) => {
                let (w, h) = img.dimensions();
                (1, h as usize, w as usize, img.into_raw())
            }
            other => {
                let img = other.to_rgb8();
                let (w, h) = img.dimensions();
                (3, h as usize, w as usize, img.into_raw())
            }
        };
        // raw is pixel-major (HWC); transpose to channel-major
        let mut data = Array3::<f64>::zeros((c, h, w));
        for y in 0..h {
            for x in 0..w {
                for ch in 0..c {
                    data[[ch, y, x]] = raw[(y * w + x) * c + ch] as f64 / 255.0;
                }
            }
        }
        Self::new(data)
    }

    /// Quantize to 8 bits and encode as PNG (grayscale or RGB by channel
    /// count). Encoded in memory and renamed into place like every other
    /// artifact.
    pub fn save_png(&self, path: &Path) -> Result<()> {
        let (c, h, w) = self.data.dim();
        let quantize = |v: f64| (v.clamp(0.0, 1.0) * 255.0).round() as u8;
        let mut raw = Vec::with_capacity(c * h * w);
        for y in 0..h {
            for x in 0..w {
                for ch in 0..c {
                    raw.push(quantize(self.data[[ch, y, x]]));
                }
            }
        }
        let mut encoded = std::io::Cursor::new(Vec::new());
        let result = if c == 1 {
            image::GrayImage::from_raw(w as u32, h as u32, raw)
                .expect("buffer sized to dimensions")
                .write_to(&mut encoded, image::ImageOutputFormat::Png)
        } else {
            image::RgbImage::from_raw(w as u32, h as u32, raw)
                .expect("buffer sized to dimensions")
                .write_to(&mut encoded, image::ImageOutputFormat::Png)
        };
        result.map_err(|e| Error::Image {
            path: path.to_path_buf(),
            source: e,
        })?;
        crate::util::write_atomic(path, &encoded.into_inner())
    }

    pub fn channels(&self) -> usize {
        self.data.dim().0
    }

    pub fn height(&self) -> usize {
        self.data.dim().1
    }

    pub fn width(&self) -> usize {
        self.data.dim().2
    }

    pub fn data(&self) -> &Array3<f64> {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut Array3<f64> {
        &mut self.data
    }

    pub fn into_inner(self) -> Array3<f64> {
        self.data
    }
}

/// Uniform sampling indices: `floor(j * total / n)` for `j = 0..n`, repeating
/// frames when the video is shorter than `n`.
pub fn sample_indices(total: usize, n: usize) -> Vec<usize> {
    (0..n).map(|j| j * total / n).collect()
}

/// Pick `n` frame paths from a video by uniform sampling.
pub fn sample_frames(video: &VideoSample, n: usize) -> Result<Vec<PathBuf>> {
    if video.frames.is_empty() {
        return Err(Error::EmptyVideo {
            id: video.id.clone(),
        });
    }
    if n == 0 {
        return Err(Error::Config("frame count must be >= 1".into()));
    }
    Ok(sample_indices(video.frames.len(), n)
        .into_iter()
        .map(|i| video.frames[i].clone())
        .collect())
}

/// Bilinear resample of one plane. Sampling uses pixel-center alignment, so
/// equal input/output sizes copy exactly.
pub fn bilinear_resize(plane: ArrayView2<'_, f64>, out_h: usize, out_w: usize) -> Array2<f64> {
    let (h, w) = plane.dim();
    let scale_y = h as f64 / out_h as f64;
    let scale_x = w as f64 / out_w as f64;
    Array2::from_shape_fn((out_h, out_w), |(oy, ox)| {
        let sy = ((oy as f64 + 0.5) * scale_y - 0.5).clamp(0.0, (h - 1) as f64);
        let sx = ((ox as f64 + 0.5) * scale_x - 0.5).clamp(0.0, (w - 1) as f64);
        let y0 = sy.floor() as usize;
        let x0 = sx.floor() as usize;
        let y1 = (y0 + 1).min(h - 1);
        let x1 = (x0 + 1).min(w - 1);
        let fy = sy - y0 as f64;
        let fx = sx - x0 as f64;
        plane[[y0, x0]] * (1.0 - fy) * (1.0 - fx)
            + plane[[y0, x1]] * (1.0 - fy) * fx
            + plane[[y1, x0]] * fy * (1.0 - fx)
            + plane[[y1, x1]] * fy * fx
    })
}

/// Crop, resize, replicate gray to RGB and normalize one frame, yielding a
/// `3 x side x side` tensor ready for the backbone.
pub fn preprocess(
    frame: &FrameImage,
    crop: Option<CropBox>,
    target_side: Option<usize>,
) -> Result<Array3<f64>> {
    let (channels, height, width) = frame.data().dim();

    let cropped: Array3<f64> = if let Some(crop) = crop {
        if crop.w == 0
            || crop.h == 0
            || crop.x as usize + crop.w as usize > width
            || crop.y as usize + crop.h as usize > height
        {
            return Err(Error::Geometry {
                x: crop.x,
                y: crop.y,
                w: crop.w,
                h: crop.h,
                width: width as u32,
                height: height as u32,
            });
        }
        frame
            .data()
            .slice(ndarray::s![
                ..,
                crop.y as usize..crop.y as usize + crop.h as usize,
                crop.x as usize..crop.x as usize + crop.w as usize
            ])
            .to_owned()
    } else {
        frame.data().clone()
    };

    let (_, ch, cw) = cropped.dim();
    let (side_h, side_w) = match target_side {
        Some(0) => return Err(Error::Config("resize target must be >= 1".into())),
        Some(side) => (side, side),
        None => (ch, cw),
    };

    let mut resized = Array3::<f64>::zeros((channels, side_h, side_w));
    for c in 0..channels {
        let plane = cropped.index_axis(ndarray::Axis(0), c);
        resized
            .index_axis_mut(ndarray::Axis(0), c)
            .assign(&bilinear_resize(plane, side_h, side_w));
    }

    // replicate grayscale to three channels, then normalize per channel
    let mut out = Array3::<f64>::zeros((3, side_h, side_w));
    for c in 0..3 {
        let source = resized.index_axis(ndarray::Axis(0), if channels == 1 { 0 } else { c });
        let mut dest = out.index_axis_mut(ndarray::Axis(0), c);
        dest.assign(&source);
        dest.mapv_inplace(|v| (v - IMAGENET_MEAN[c]) / IMAGENET_STD[c]);
    }
    Ok(out)
}
