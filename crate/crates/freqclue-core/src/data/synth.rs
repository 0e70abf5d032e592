//! Synthetic corpus generator.
//!
//! "Real" videos are temporally correlated smooth random fields. "Fake"
//! videos run the same process at a fraction of the resolution and are
//! upsampled, which plants the periodic spectral replicas the feature
//! pipeline is built to catch.

use std::path::Path;

use ndarray::{Array2, ArrayView2};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use crate::data::frames::{bilinear_resize, FrameImage};
use crate::data::manifest::{DatasetManifest, Label, VideoSample};
use crate::data::perturb::gaussian_blur;
use crate::error::{Error, Result};
use crate::util;

/// How low-resolution fake fields are brought up to full size.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UpsampleMode {
    Nearest,
    Bilinear,
}

impl std::str::FromStr for UpsampleMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "nearest" => Ok(UpsampleMode::Nearest),
            "bilinear" => Ok(UpsampleMode::Bilinear),
            _ => Err(Error::Config(format!(
                "unknown upsample mode '{s}' (expected nearest or bilinear)"
            ))),
        }
    }
}

impl std::fmt::Display for UpsampleMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            UpsampleMode::Nearest => "nearest",
            UpsampleMode::Bilinear => "bilinear",
        })
    }
}

#[derive(Debug, Clone)]
pub struct SynthConfig {
    /// Videos per class.
    pub per_class: usize,
    /// Frames per video.
    pub frames: usize,
    /// Square frame side in pixels.
    pub size: usize,
    /// Resolution divisor for the fake class.
    pub factor: usize,
    pub mode: UpsampleMode,
    pub seed: u64,
    /// Leading fraction of each class tagged `train`; the rest gets `test`.
    pub train_fraction: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            per_class: 100,
            frames: 16,
            size: 64,
            factor: 2,
            mode: UpsampleMode::Nearest,
            seed: 0,
            train_fraction: 0.7,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        if self.per_class == 0 || self.frames == 0 {
            return Err(Error::Config("per_class and frames must be >= 1".into()));
        }
        if !(self.factor == 2 || self.factor == 4) {
            return Err(Error::Config(format!(
                "upsample factor must be 2 or 4, got {} (factor 1 would make the classes coincide)",
                self.factor
            )));
        }
        if !self.size.is_multiple_of(self.factor) || self.size / self.factor < 8 {
            return Err(Error::Config(format!(
                "size {} must be divisible by factor {} with a low-res side of at least 8",
                self.size, self.factor
            )));
        }
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(Error::Config(format!(
                "train fraction must lie in (0, 1), got {}",
                self.train_fraction
            )));
        }
        Ok(())
    }
}

/// Temporally correlated smooth fields at the given side length, one per
/// frame, standardized to mean 0 / unit variance.
fn smooth_fields(rng: &mut ChaCha20Rng, side: usize, frames: usize, sigma: f64) -> Vec<Array2<f64>> {
    let rho = 0.85f64;
    let mix = (1.0 - rho * rho).sqrt();
    let mut state = Array2::from_shape_fn((side, side), |_| rng.gen_range(-1.0..1.0));
    let radius = (3.0 * sigma).ceil().max(1.0) as usize;
    let mut out = Vec::with_capacity(frames);
    for t in 0..frames {
        if t > 0 {
            let fresh = Array2::from_shape_fn((side, side), |_| rng.gen_range(-1.0..1.0));
            state.zip_mut_with(&fresh, |s, &z| *s = rho * *s + mix * z);
        }
        let mut field = gaussian_blur(state.view(), sigma, radius);
        let mean = field.mean().unwrap_or(0.0);
        let var = field.mapv(|v| (v - mean).powi(2)).mean().unwrap_or(1.0);
        let std = var.sqrt().max(1e-9);
        field.mapv_inplace(|v| (v - mean) / std);
        out.push(field);
    }
    out
}

fn nearest_upsample(plane: ArrayView2<'_, f64>, factor: usize) -> Array2<f64> {
    let (h, w) = plane.dim();
    Array2::from_shape_fn((h * factor, w * factor), |(y, x)| {
        plane[[y / factor, x / factor]]
    })
}

fn to_pixels(field: &Array2<f64>) -> Array2<f64> {
    field.mapv(|z| (0.5 + 0.16 * z).clamp(0.0, 1.0))
}

/// Generate the corpus under `out_dir`: grayscale PNG frames per video, a
/// `manifest.jsonl`, and a `corpus.json` provenance record. Fully
/// reproducible from the seed.
pub fn synth_corpus(config: &SynthConfig, out_dir: &Path) -> Result<DatasetManifest> {
    config.validate()?;
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;

    let sigma_full = config.size as f64 / 32.0;
    let train_count = (config.train_fraction * config.per_class as f64).round() as usize;
    let mut samples = Vec::with_capacity(2 * config.per_class);

    for label in [Label::Real, Label::Fake] {
        for index in 0..config.per_class {
            let id = format!("{label}-{index:04}");
            let mut rng =
                ChaCha20Rng::seed_from_u64(util::derive_seed(config.seed, &format!("video:{id}")));
            let frames_px: Vec<Array2<f64>> = match label {
                Label::Real => smooth_fields(&mut rng, config.size, config.frames, sigma_full)
                    .iter()
                    .map(to_pixels)
                    .collect(),
                Label::Fake => {
                    let low_side = config.size / config.factor;
                    let low_sigma = sigma_full / config.factor as f64;
                    smooth_fields(&mut rng, low_side, config.frames, low_sigma)
                        .iter()
                        .map(|field| {
                            let px = to_pixels(field);
                            match config.mode {
                                UpsampleMode::Nearest => nearest_upsample(px.view(), config.factor),
                                UpsampleMode::Bilinear => {
                                    bilinear_resize(px.view(), config.size, config.size)
                                }
                            }
                        })
                        .collect()
                }
            };

            let mut frame_paths = Vec::with_capacity(config.frames);
            for (t, px) in frames_px.iter().enumerate() {
                let rel = Path::new("frames").join(&id).join(format!("f{t:03}.png"));
                let (h, w) = px.dim();
                let frame = FrameImage::new(
                    px.clone()
                        .into_shape((1, h, w))
                        .expect("plane reshapes to single channel"),
                )?;
                frame.save_png(&out_dir.join(&rel))?;
                frame_paths.push(rel);
            }

            samples.push(VideoSample {
                id,
                label,
                frames: frame_paths,
                crop: None,
                split: Some(if index < train_count { "train" } else { "test" }.into()),
            });
        }
    }

    let manifest = DatasetManifest::new(samples)?;
    manifest.save(&out_dir.join("manifest.jsonl"))?;

    let settings = format!(
        "per_class={};frames={};size={};factor={};mode={};seed={};train_fraction={}",
        config.per_class,
        config.frames,
        config.size,
        config.factor,
        config.mode,
        config.seed,
        config.train_fraction,
    );
    let provenance = serde_json::json!({
        "generator": "synth",
        "per_class": config.per_class,
        "frames": config.frames,
        "size": config.size,
        "factor": config.factor,
        "mode": config.mode.to_string(),
        "seed": config.seed,
        "train_fraction": config.train_fraction,
        "config_fingerprint": util::short_hash(settings.as_bytes()),
    });
    util::write_atomic(
        &out_dir.join("corpus.json"),
        serde_json::to_string_pretty(&provenance)
            .expect("provenance serializes")
            .as_bytes(),
    )?;

    DatasetManifest::load(&out_dir.join("manifest.jsonl"))
}
