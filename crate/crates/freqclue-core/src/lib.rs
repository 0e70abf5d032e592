//! Frequency-domain forgery features for video sequences.
//!
//! The pipeline turns a video into one vector per backbone channel: sampled
//! frames are featurized, each plane goes through an orthonormal 2-D DCT,
//! mid/high bands are amplified, and two branches share the weighted
//! spectrum — block-max compaction for the spatial clue and per-frame block
//! attention for the temporal one — before an attention-weighted sum fuses
//! them. A linear head plus accuracy/AUC metrics close the loop, and a
//! synthetic corpus generator with upsampling artifacts makes the whole chain
//! testable without external datasets.

pub mod backbone;
pub mod cfe;
pub mod classifier;
pub mod data;
pub mod dct;
pub mod error;
pub mod feature_file;
pub mod fta;
pub mod metrics;
pub mod pipeline;
pub mod tensor;
pub mod util;
pub mod weighting;

pub use backbone::{Backbone, BackboneSpec};
pub use cfe::{compact, partition_blocks, BlockGrid, CompactFeature, Reduction};
pub use classifier::{train, LinearHead, TrainConfig};
pub use data::{
    perturb, perturb_corpus, preprocess, sample_frames, synth_corpus, CropBox, DatasetManifest,
    FrameImage, Label, PerturbationKind, PerturbationSpec, SynthConfig, UpsampleMode, VideoSample,
};
pub use dct::{dct2_batch, dct2_forward, dct2_inverse, CosineTable, Dct2, Plane};
pub use error::{Error, Result};
pub use fta::{attention, AttentionMap, DEFAULT_EPSILON};
pub use metrics::{accuracy, auc};
pub use pipeline::{
    extract, extract_batch, fuse, FeatureMeta, FeatureRecord, FusedFeature, PipelineConfig,
};
pub use tensor::{FeatureMapSequence, Spectrum};
pub use weighting::{apply_weights, band_exponent, WeightMatrix, DEFAULT_BASE};
