//! JSON-lines dataset manifests: one video sample per line.

use std::collections::HashSet;
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::util;

/// Ground-truth class of a video. `fake` is the positive class throughout.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Real,
    Fake,
}

impl Label {
    pub fn is_fake(self) -> bool {
        matches!(self, Label::Fake)
    }

    /// Regression target: fake = 1, real = 0.
    pub fn target(self) -> f64 {
        if self.is_fake() {
            1.0
        } else {
            0.0
        }
    }
}

impl std::fmt::Display for Label {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Label::Real => "real",
            Label::Fake => "fake",
        })
    }
}

/// Pixel-space crop rectangle, declared in the manifest instead of running a
/// face detector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CropBox {
    pub x: u32,
    pub y: u32,
    pub w: u32,
    pub h: u32,
}

/// One video: an id, a label and an ordered list of frame image files.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VideoSample {
    pub id: String,
    pub label: Label,
    pub frames: Vec<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub crop: Option<CropBox>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub split: Option<String>,
}

/// An ordered collection of samples with unique ids.
#[derive(Debug, Clone)]
pub struct DatasetManifest {
    samples: Vec<VideoSample>,
}

impl DatasetManifest {
    pub fn new(samples: Vec<VideoSample>) -> Result<Self> {
        let mut seen = HashSet::new();
        for sample in &samples {
            if !seen.insert(sample.id.as_str()) {
                return Err(Error::format(
                    "manifest",
                    format!("duplicate video id '{}'", sample.id),
                ));
            }
            if sample.frames.is_empty() {
                return Err(Error::EmptyVideo {
                    id: sample.id.clone(),
                });
            }
        }
        Ok(Self { samples })
    }

    /// Load a JSON-lines manifest. Relative frame paths are resolved against
    /// the manifest's directory so corpora stay relocatable.
    pub fn load(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        let mut samples = Vec::new();
        for (lineno, line) in BufReader::new(file).lines().enumerate() {
            let line = line.map_err(|e| Error::io(path, e))?;
            if line.trim().is_empty() {
                continue;
            }
            let mut sample: VideoSample = serde_json::from_str(&line).map_err(|e| {
                Error::format(
                    "manifest",
                    format!("{}:{}: {e}", path.display(), lineno + 1),
                )
            })?;
            for frame in &mut sample.frames {
                if frame.is_relative() {
                    *frame = base.join(&*frame);
                }
            }
            samples.push(sample);
        }
        Self::new(samples)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut out = String::new();
        for sample in &self.samples {
            out.push_str(&serde_json::to_string(sample).expect("manifest serializes"));
            out.push('\n');
        }
        util::write_atomic(path, out.as_bytes())
    }

    pub fn samples(&self) -> &[VideoSample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&VideoSample> {
        self.samples.iter().find(|s| s.id == id)
    }

    /// Samples whose split tag equals `split`.
    pub fn filter_split(&self, split: &str) -> Result<Self> {
        let samples: Vec<VideoSample> = self
            .samples
            .iter()
            .filter(|s| s.split.as_deref() == Some(split))
            .cloned()
            .collect();
        if samples.is_empty() {
            return Err(Error::format(
                "manifest",
                format!("no samples carry split '{split}'"),
            ));
        }
        Self::new(samples)
    }
}
