//! Dataset plumbing: manifests, frame ingestion, perturbations and the
//! synthetic artifact corpus generator.

pub mod frames;
pub mod manifest;
pub mod perturb;
pub mod synth;

pub use frames::{preprocess, sample_frames, sample_indices, FrameImage, IMAGENET_MEAN, IMAGENET_STD};
pub use manifest::{CropBox, DatasetManifest, Label, VideoSample};
pub use perturb::{perturb, perturb_corpus, PerturbationKind, PerturbationSpec};
pub use synth::{synth_corpus, SynthConfig, UpsampleMode};
