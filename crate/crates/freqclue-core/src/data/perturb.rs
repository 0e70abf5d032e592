//! Frame perturbations: Gaussian blur, Gaussian noise, JPEG-style
//! quantization and contrast change.

use std::path::Path;

use ndarray::{Array2, Array3, ArrayView2};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Normal};

use crate::data::frames::FrameImage;
use crate::data::manifest::{DatasetManifest, VideoSample};
use crate::dct::Dct2;
use crate::error::{Error, Result};
use crate::util;

/// Annex-K luminance quantization table, row-major.
const LUMA_QUANT: [u16; 64] = [
    16, 11, 10, 16, 24, 40, 51, 61, //
    12, 12, 14, 19, 26, 58, 60, 55, //
    14, 13, 16, 24, 40, 57, 69, 56, //
    14, 17, 22, 29, 51, 87, 80, 62, //
    18, 22, 37, 56, 68, 109, 103, 77, //
    24, 35, 55, 64, 81, 104, 113, 92, //
    49, 64, 78, 87, 103, 121, 120, 101, //
    72, 92, 95, 98, 112, 100, 103, 99,
];

/// What to do to each frame.
#[derive(Debug, Clone, PartialEq)]
pub enum PerturbationKind {
    GaussianBlur { sigma: f64, radius: usize },
    GaussianNoise { sigma: f64 },
    JpegLike { quality: u8 },
    Contrast { gain: f64 },
}

/// A perturbation plus the seed driving its stochastic parts.
#[derive(Debug, Clone, PartialEq)]
pub struct PerturbationSpec {
    pub kind: PerturbationKind,
    pub seed: u64,
}

impl PerturbationSpec {
    pub fn new(kind: PerturbationKind, seed: u64) -> Result<Self> {
        match &kind {
            PerturbationKind::GaussianBlur { sigma, radius } => {
                if !sigma.is_finite() || *sigma <= 0.0 {
                    return Err(Error::Config(format!("blur sigma must be > 0, got {sigma}")));
                }
                if *radius == 0 {
                    return Err(Error::Config("blur radius must be >= 1".into()));
                }
            }
            PerturbationKind::GaussianNoise { sigma } => {
                if *sigma < 0.0 || !sigma.is_finite() {
                    return Err(Error::Config(format!(
                        "noise sigma must be finite and >= 0, got {sigma}"
                    )));
                }
            }
            PerturbationKind::JpegLike { quality } => {
                if !(1..=100).contains(quality) {
                    return Err(Error::Config(format!(
                        "jpeg quality must be in 1..=100, got {quality}"
                    )));
                }
            }
            PerturbationKind::Contrast { gain } => {
                if !gain.is_finite() || *gain <= 0.0 {
                    return Err(Error::Config(format!("contrast gain must be > 0, got {gain}")));
                }
            }
        }
        Ok(Self { kind, seed })
    }

    /// Parse the CLI form: `blur:<sigma>[,<radius>]`, `noise:<sigma>`,
    /// `jpeg:<quality>`, `contrast:<gain>`. The radius defaults to
    /// `ceil(3 * sigma)`.
    pub fn parse(spec: &str, seed: u64) -> Result<Self> {
        let (kind, args) = spec.split_once(':').ok_or_else(|| {
            Error::Config(format!("perturbation must look like kind:params, got '{spec}'"))
        })?;
        let parse_f64 = |s: &str, what: &str| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| Error::Config(format!("bad {what} '{s}'")))
        };
        let kind = match kind {
            "blur" => {
                let mut parts = args.split(',');
                let sigma = parse_f64(parts.next().unwrap_or(""), "blur sigma")?;
                let radius = match parts.next() {
                    Some(r) => r
                        .trim()
                        .parse::<usize>()
                        .map_err(|_| Error::Config(format!("bad blur radius '{r}'")))?,
                    None => (3.0 * sigma).ceil().max(1.0) as usize,
                };
                PerturbationKind::GaussianBlur { sigma, radius }
            }
            "noise" => PerturbationKind::GaussianNoise {
                sigma: parse_f64(args, "noise sigma")?,
            },
            "jpeg" => PerturbationKind::JpegLike {
                quality: args
                    .trim()
                    .parse::<u8>()
                    .map_err(|_| Error::Config(format!("bad jpeg quality '{args}'")))?,
            },
            "contrast" => PerturbationKind::Contrast {
                gain: parse_f64(args, "contrast gain")?,
            },
            other => {
                return Err(Error::Config(format!(
                    "unknown perturbation '{other}' (expected blur, noise, jpeg or contrast)"
                )))
            }
        };
        PerturbationSpec::new(kind, seed)
    }

    pub fn id(&self) -> String {
        match &self.kind {
            PerturbationKind::GaussianBlur { sigma, radius } => format!("blur:{sigma},{radius}"),
            PerturbationKind::GaussianNoise { sigma } => format!("noise:{sigma}"),
            PerturbationKind::JpegLike { quality } => format!("jpeg:{quality}"),
            PerturbationKind::Contrast { gain } => format!("contrast:{gain}"),
        }
    }
}

/// Apply one perturbation to one frame. Pure given the spec (the seed covers
/// the stochastic kinds).
pub fn perturb(frame: &FrameImage, spec: &PerturbationSpec) -> Result<FrameImage> {
    let data = frame.data();
    let out = match &spec.kind {
        PerturbationKind::GaussianBlur { sigma, radius } => {
            map_planes(data, |plane| gaussian_blur(plane, *sigma, *radius))
        }
        PerturbationKind::GaussianNoise { sigma } => {
            if *sigma == 0.0 {
                data.clone()
            } else {
                let mut rng = ChaCha20Rng::seed_from_u64(spec.seed);
                let normal = Normal::new(0.0, *sigma).expect("validated sigma");
                data.mapv(|v| (v + normal.sample(&mut rng)).clamp(0.0, 1.0))
            }
        }
        PerturbationKind::JpegLike { quality } => {
            let table = scaled_quant_table(*quality);
            map_planes(data, |plane| jpeg_like_plane(plane, &table))
        }
        PerturbationKind::Contrast { gain } => {
            data.mapv(|v| (gain * (v - 0.5) + 0.5).clamp(0.0, 1.0))
        }
    };
    FrameImage::new(out)
}

fn map_planes(data: &Array3<f64>, f: impl Fn(ArrayView2<'_, f64>) -> Array2<f64>) -> Array3<f64> {
    let (c, h, w) = data.dim();
    let mut out = Array3::<f64>::zeros((c, h, w));
    for ch in 0..c {
        out.index_axis_mut(ndarray::Axis(0), ch)
            .assign(&f(data.index_axis(ndarray::Axis(0), ch)));
    }
    out
}

/// Normalized 1-D Gaussian taps at integer offsets `-radius..=radius`.
fn gaussian_kernel(sigma: f64, radius: usize) -> Vec<f64> {
    let mut taps: Vec<f64> = (-(radius as isize)..=radius as isize)
        .map(|i| (-((i * i) as f64) / (2.0 * sigma * sigma)).exp())
        .collect();
    let sum: f64 = taps.iter().sum();
    for t in &mut taps {
        *t /= sum;
    }
    taps
}

fn reflect(index: isize, len: usize) -> usize {
    let len = len as isize;
    let mut i = index;
    if i < 0 {
        i = -i - 1;
    }
    if i >= len {
        i = 2 * len - i - 1;
    }
    i.clamp(0, len - 1) as usize
}

/// Separable Gaussian convolution with reflect padding.
pub fn gaussian_blur(plane: ArrayView2<'_, f64>, sigma: f64, radius: usize) -> Array2<f64> {
    let taps = gaussian_kernel(sigma, radius);
    let (h, w) = plane.dim();
    let r = radius as isize;
    let mut rows = Array2::<f64>::zeros((h, w));
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0;
            for (t, &tap) in taps.iter().enumerate() {
                let sx = reflect(x as isize + t as isize - r, w);
                acc += tap * plane[[y, sx]];
            }
            rows[[y, x]] = acc;
        }
    }
    let mut out = Array2::<f64>::zeros((h, w));
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0;
            for (t, &tap) in taps.iter().enumerate() {
                let sy = reflect(y as isize + t as isize - r, h);
                acc += tap * rows[[sy, x]];
            }
            out[[y, x]] = acc;
        }
    }
    out
}

/// Annex-K table scaled by the conventional quality factor.
pub fn scaled_quant_table(quality: u8) -> [f64; 64] {
    let q = quality as i64;
    let scale = if q < 50 { 5000 / q } else { 200 - 2 * q };
    let mut out = [0.0; 64];
    for (i, &base) in LUMA_QUANT.iter().enumerate() {
        let scaled = (base as i64 * scale + 50) / 100;
        out[i] = scaled.clamp(1, 255) as f64;
    }
    out
}

/// Quantize one plane through 8x8 block DCTs, emulating luminance JPEG
/// degradation. Planes whose sides are not multiples of 8 are edge-padded for
/// the transform and cropped back.
fn jpeg_like_plane(plane: ArrayView2<'_, f64>, table: &[f64; 64]) -> Array2<f64> {
    let (h, w) = plane.dim();
    let ph = h.div_ceil(8) * 8;
    let pw = w.div_ceil(8) * 8;
    let mut padded = Array2::<f64>::zeros((ph, pw));
    for y in 0..ph {
        for x in 0..pw {
            padded[[y, x]] = plane[[y.min(h - 1), x.min(w - 1)]] * 255.0 - 128.0;
        }
    }
    let dct = Dct2::new(8, 8).expect("8x8 table");
    for by in (0..ph).step_by(8) {
        for bx in (0..pw).step_by(8) {
            let block = padded.slice(ndarray::s![by..by + 8, bx..bx + 8]).to_owned();
            let mut coeffs = dct.forward_array(block.view());
            for u in 0..8 {
                for v in 0..8 {
                    let step = table[u * 8 + v];
                    coeffs[[u, v]] = (coeffs[[u, v]] / step).round() * step;
                }
            }
            let restored = dct.inverse_array(coeffs.view());
            padded
                .slice_mut(ndarray::s![by..by + 8, bx..bx + 8])
                .assign(&restored);
        }
    }
    Array2::from_shape_fn((h, w), |(y, x)| {
        ((padded[[y, x]] + 128.0) / 255.0).clamp(0.0, 1.0)
    })
}

/// Perturb every frame of a manifest, writing new frame files under
/// `out_dir/frames/<id>/` plus a new manifest. Per-frame seeds derive from
/// (spec seed, video id, frame index) so processing order cannot change
/// results.
pub fn perturb_corpus(
    manifest: &DatasetManifest,
    spec: &PerturbationSpec,
    out_dir: &Path,
) -> Result<DatasetManifest> {
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let mut samples = Vec::with_capacity(manifest.len());
    for sample in manifest.samples() {
        let mut frames = Vec::with_capacity(sample.frames.len());
        for (index, frame_path) in sample.frames.iter().enumerate() {
            let frame = FrameImage::load(frame_path)?;
            let frame_spec = PerturbationSpec {
                kind: spec.kind.clone(),
                seed: util::derive_seed(spec.seed, &format!("{}/{}", sample.id, index)),
            };
            let perturbed = perturb(&frame, &frame_spec)?;
            let rel = Path::new("frames")
                .join(&sample.id)
                .join(format!("f{index:03}.png"));
            perturbed.save_png(&out_dir.join(&rel))?;
            frames.push(rel);
        }
        samples.push(VideoSample {
            id: sample.id.clone(),
            label: sample.label,
            frames,
            crop: sample.crop,
            split: sample.split.clone(),
        });
    }
    let out = DatasetManifest::new(samples)?;
    out.save(&out_dir.join("manifest.jsonl"))?;
    DatasetManifest::load(&out_dir.join("manifest.jsonl"))
}
