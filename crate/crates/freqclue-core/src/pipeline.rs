//! End-to-end feature extraction: frames -> backbone -> DCT -> band weighting
//! -> (block compaction || temporal attention) -> fused per-video vector.

use ndarray::{Array3, Array4};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::backbone::{Backbone, BackboneSpec};
use crate::cfe::{compact, BlockGrid, CompactFeature, Reduction};
use crate::data::frames::{preprocess, sample_frames, FrameImage};
use crate::data::manifest::{DatasetManifest, Label, VideoSample};
use crate::dct::dct2_batch;
use crate::error::{Error, Result};
use crate::fta::{attention, AttentionMap, DEFAULT_EPSILON};
use crate::tensor::FeatureMapSequence;
use crate::util;
use crate::weighting::{apply_weights, WeightMatrix, DEFAULT_BASE};

/// Everything that determines a feature vector besides the input video.
#[derive(Debug, Clone)]
pub struct PipelineConfig {
    /// Frames sampled per video.
    pub frames: usize,
    pub grid: BlockGrid,
    /// Band-weighting base.
    pub beta: f64,
    pub reduction: Reduction,
    pub backbone: BackboneSpec,
    /// Normalization epsilon for the attention stages.
    pub epsilon: f64,
    /// Optional square resize applied during preprocessing.
    pub resize: Option<usize>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            frames: 16,
            grid: BlockGrid { rows: 4, cols: 4 },
            beta: DEFAULT_BASE,
            reduction: Reduction::Max,
            backbone: BackboneSpec::Identity,
            epsilon: DEFAULT_EPSILON,
            resize: None,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        if self.frames == 0 {
            return Err(Error::Config("frame count must be >= 1".into()));
        }
        if !self.beta.is_finite() || self.beta <= 0.0 {
            return Err(Error::Config(format!("beta must be > 0, got {}", self.beta)));
        }
        if !self.epsilon.is_finite() || self.epsilon < 0.0 {
            return Err(Error::Config(format!(
                "epsilon must be finite and >= 0, got {}",
                self.epsilon
            )));
        }
        Ok(())
    }

    /// Short hash over every effective setting; stamped into every artifact
    /// this configuration produces.
    pub fn fingerprint(&self) -> String {
        let canonical = format!(
            "frames={};grid={};beta={};reduction={};backbone={};epsilon={};resize={}",
            self.frames,
            self.grid,
            self.beta,
            self.reduction,
            self.backbone.id(),
            self.epsilon,
            self.resize.map_or("native".to_string(), |s| s.to_string()),
        );
        util::short_hash(canonical.as_bytes())
    }
}

/// Descriptive metadata carried by every fused feature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureMeta {
    pub video_id: String,
    pub frames: usize,
    pub blocks: usize,
    pub beta: f64,
    pub backbone: String,
}

/// The per-video spatial-temporal frequency feature: one value per backbone
/// channel.
#[derive(Debug, Clone, PartialEq)]
pub struct FusedFeature {
    pub values: Vec<f64>,
    pub meta: FeatureMeta,
}

/// Attention-weighted sum of compact features over frames and blocks:
/// `f_c = sum_n sum_k compact(n,c,k) * attention(n,k)`.
pub fn fuse(compact: &CompactFeature, attention: &AttentionMap) -> Result<Vec<f64>> {
    let (n, c, k) = compact.dims();
    let (an, ak) = attention.dims();
    if (n, k) != (an, ak) {
        return Err(Error::shape(
            "fuse",
            format!("attention {n}x{k}"),
            format!("attention {an}x{ak}"),
        ));
    }
    let mut out = vec![0.0f64; c];
    for frame in 0..n {
        for (channel, slot) in out.iter_mut().enumerate() {
            let mut acc = 0.0;
            for block in 0..k {
                acc += compact.values()[[frame, channel, block]]
                    * attention.values()[[frame, block]];
            }
            *slot += acc;
        }
    }
    if let Some(bad) = out.iter().find(|v| !v.is_finite()) {
        return Err(Error::NonFinite {
            context: format!("fused feature value {bad}"),
        });
    }
    Ok(out)
}

/// Load, sample and preprocess one video into a frame tensor.
pub fn ingest(video: &VideoSample, config: &PipelineConfig) -> Result<FeatureMapSequence> {
    let paths = sample_frames(video, config.frames)?;
    let mut planes: Vec<Array3<f64>> = Vec::with_capacity(paths.len());
    for path in &paths {
        let frame = FrameImage::load(path)?;
        planes.push(preprocess(&frame, video.crop, config.resize)?);
    }
    let (c, h, w) = planes[0].dim();
    for (i, plane) in planes.iter().enumerate() {
        if plane.dim() != (c, h, w) {
            return Err(Error::shape(
                "ingest",
                format!("uniform frame shape {c}x{h}x{w}"),
                format!("frame {i} of '{}' is {:?}", video.id, plane.dim()),
            ));
        }
    }
    let mut tensor = Array4::<f64>::zeros((planes.len(), c, h, w));
    for (i, plane) in planes.into_iter().enumerate() {
        tensor.index_axis_mut(ndarray::Axis(0), i).assign(&plane);
    }
    FeatureMapSequence::new(tensor)
}

/// Run the full pipeline on one video.
pub fn extract(video: &VideoSample, config: &PipelineConfig) -> Result<FusedFeature> {
    config.validate()?;
    let backbone = Backbone::new(config.backbone.clone())?;
    extract_with_backbone(video, config, &backbone)
}

/// As [`extract`], reusing a constructed backbone across videos.
pub fn extract_with_backbone(
    video: &VideoSample,
    config: &PipelineConfig,
    backbone: &Backbone,
) -> Result<FusedFeature> {
    let frames = ingest(video, config)?;
    let maps = backbone.featurize(&frames, &video.id)?;
    let spectrum = dct2_batch(&maps)?;
    let weights = WeightMatrix::build(spectrum.height(), spectrum.width(), config.beta)?;
    let weighted = apply_weights(&spectrum, &weights)?;
    let compacted = compact(&weighted, config.grid, config.reduction)?;
    let att = attention(&weighted, config.grid, config.epsilon)?;
    let values = fuse(&compacted, &att)?;
    Ok(FusedFeature {
        values,
        meta: FeatureMeta {
            video_id: video.id.clone(),
            frames: config.frames,
            blocks: config.grid.block_count(),
            beta: config.beta,
            backbone: config.backbone.id(),
        },
    })
}

/// Extracted feature of one video plus its label, as serialized to feature
/// files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureRecord {
    pub id: String,
    pub label: Label,
    pub fingerprint: String,
    pub values: Vec<f64>,
}

/// Extract every video of a manifest with `workers` threads. Results follow
/// manifest order regardless of scheduling, and each video's feature is a
/// pure function of its frames and the config.
pub fn extract_batch(
    manifest: &DatasetManifest,
    config: &PipelineConfig,
    workers: usize,
) -> Result<Vec<FeatureRecord>> {
    config.validate()?;
    if manifest.is_empty() {
        return Err(Error::format("manifest", "no samples to extract"));
    }
    let backbone = Backbone::new(config.backbone.clone())?;
    let fingerprint = config.fingerprint();
    let run = |sample: &VideoSample| -> Result<FeatureRecord> {
        let fused = extract_with_backbone(sample, config, &backbone)?;
        Ok(FeatureRecord {
            id: sample.id.clone(),
            label: sample.label,
            fingerprint: fingerprint.clone(),
            values: fused.values,
        })
    };
    if workers <= 1 {
        manifest.samples().iter().map(run).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| Error::Config(format!("worker pool: {e}")))?;
        pool.install(|| manifest.samples().par_iter().map(run).collect())
    }
}
