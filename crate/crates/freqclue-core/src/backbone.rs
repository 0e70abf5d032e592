//! Pluggable frame-to-feature-map extractors.
//!
//! Three kinds: `identity` passes preprocessed frames straight through,
//! `randconv` is a frozen seeded convolution stack (ReLU, strided
//! downsampling), and `file` loads feature maps precomputed elsewhere in the
//! FMT1 tensor format.

use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use ndarray::{Array4, Axis};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::tensor::FeatureMapSequence;
use crate::util;

const TENSOR_MAGIC: &[u8; 4] = b"FMT1";
const KERNEL: usize = 3;
const PAD: usize = 1;

/// Which backbone to run and how to build it.
#[derive(Debug, Clone, PartialEq)]
pub enum BackboneSpec {
    /// Frames pass through unchanged.
    Identity,
    /// Frozen random convolution stack; one entry per layer.
    RandConv {
        channels: Vec<usize>,
        strides: Vec<usize>,
        seed: u64,
    },
    /// Precomputed feature maps. A directory resolves to `<dir>/<video-id>.fmt`;
    /// a file is used as-is.
    TensorFile { path: PathBuf },
}

impl BackboneSpec {
    /// Parse the CLI form: `identity`, `randconv:<channels>@<strides>` with
    /// comma-separated per-layer values, or `file:<path>`. The seed feeds the
    /// randconv weights.
    pub fn parse(spec: &str, seed: u64) -> Result<Self> {
        if spec == "identity" {
            return Ok(BackboneSpec::Identity);
        }
        if let Some(rest) = spec.strip_prefix("randconv:") {
            let (channels_part, strides_part) = rest.split_once('@').ok_or_else(|| {
                Error::Config(format!(
                    "randconv spec must look like randconv:8,16@2,2, got '{spec}'"
                ))
            })?;
            let channels = parse_list(channels_part, "randconv channels")?;
            let strides = parse_list(strides_part, "randconv strides")?;
            if channels.is_empty() || channels.len() != strides.len() {
                return Err(Error::Config(format!(
                    "randconv needs one stride per layer, got {} channels and {} strides",
                    channels.len(),
                    strides.len()
                )));
            }
            if strides.contains(&0) || channels.contains(&0) {
                return Err(Error::Config(
                    "randconv channels and strides must be positive".into(),
                ));
            }
            return Ok(BackboneSpec::RandConv {
                channels,
                strides,
                seed,
            });
        }
        if let Some(path) = spec.strip_prefix("file:") {
            if path.is_empty() {
                return Err(Error::Config("file backbone needs a path".into()));
            }
            return Ok(BackboneSpec::TensorFile { path: path.into() });
        }
        Err(Error::Config(format!(
            "unknown backbone '{spec}' (expected identity, randconv:<spec> or file:<path>)"
        )))
    }

    /// Stable identifier recorded in feature metadata and fingerprints.
    pub fn id(&self) -> String {
        match self {
            BackboneSpec::Identity => "identity".into(),
            BackboneSpec::RandConv {
                channels,
                strides,
                seed,
            } => format!(
                "randconv:{}@{}#{}",
                join(channels),
                join(strides),
                seed
            ),
            BackboneSpec::TensorFile { path } => format!("file:{}", path.display()),
        }
    }

    /// Output dims predicted from the spec alone (not applicable to tensor
    /// files, whose shape lives in the file header).
    pub fn output_shape(
        &self,
        frames: usize,
        channels_in: usize,
        height_in: usize,
        width_in: usize,
    ) -> Option<(usize, usize, usize, usize)> {
        match self {
            BackboneSpec::Identity => Some((frames, channels_in, height_in, width_in)),
            BackboneSpec::RandConv {
                channels, strides, ..
            } => {
                let mut h = height_in;
                let mut w = width_in;
                for &s in strides {
                    h = conv_out(h, s);
                    w = conv_out(w, s);
                }
                Some((frames, *channels.last().unwrap(), h, w))
            }
            BackboneSpec::TensorFile { .. } => None,
        }
    }
}

fn parse_list(s: &str, what: &str) -> Result<Vec<usize>> {
    s.split(',')
        .map(|part| {
            part.trim()
                .parse::<usize>()
                .map_err(|_| Error::Config(format!("bad {what} entry '{part}'")))
        })
        .collect()
}

fn join(values: &[usize]) -> String {
    values
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

fn conv_out(size: usize, stride: usize) -> usize {
    // 3x3 kernel, padding 1
    (size + 2 * PAD - KERNEL) / stride + 1
}

struct ConvLayer {
    // (out_ch, in_ch, 3, 3)
    weights: Array4<f64>,
    stride: usize,
}

/// A materialized backbone ready to featurize frame tensors.
pub struct Backbone {
    spec: BackboneSpec,
    layers: Vec<ConvLayer>,
}

impl Backbone {
    pub fn new(spec: BackboneSpec) -> Result<Self> {
        let layers = match &spec {
            BackboneSpec::RandConv {
                channels,
                strides,
                seed,
            } => build_layers(channels, strides, *seed),
            _ => Vec::new(),
        };
        Ok(Self { spec, layers })
    }

    pub fn spec(&self) -> &BackboneSpec {
        &self.spec
    }

    /// Featurize the frame tensor of one video. `video_id` resolves per-video
    /// tensor files when the spec points at a directory.
    pub fn featurize(
        &self,
        frames: &FeatureMapSequence,
        video_id: &str,
    ) -> Result<FeatureMapSequence> {
        match &self.spec {
            BackboneSpec::Identity => Ok(frames.clone()),
            BackboneSpec::RandConv { .. } => {
                let mut current = frames.as_array().clone();
                for layer in &self.layers {
                    current = conv_forward_relu(&current, layer);
                }
                FeatureMapSequence::new(current)
            }
            BackboneSpec::TensorFile { path } => {
                let resolved = resolve_tensor_path(path, video_id);
                let tensor = read_tensor_file(&resolved)?;
                if tensor.frames() != frames.frames() {
                    return Err(Error::shape(
                        "tensor-file backbone",
                        format!("{} frames (sampled count)", frames.frames()),
                        format!("{} frames in {}", tensor.frames(), resolved.display()),
                    ));
                }
                Ok(tensor)
            }
        }
    }
}

fn resolve_tensor_path(path: &Path, video_id: &str) -> PathBuf {
    if path.is_dir() {
        path.join(format!("{video_id}.fmt"))
    } else {
        path.to_path_buf()
    }
}

fn build_layers(channels: &[usize], strides: &[usize], seed: u64) -> Vec<ConvLayer> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut layers = Vec::with_capacity(channels.len());
    let mut in_ch = 3usize;
    for (&out_ch, &stride) in channels.iter().zip(strides) {
        let fan_in = (in_ch * KERNEL * KERNEL) as f64;
        let normal = Normal::new(0.0, (2.0 / fan_in).sqrt()).unwrap();
        let weights =
            Array4::from_shape_fn((out_ch, in_ch, KERNEL, KERNEL), |_| normal.sample(&mut rng));
        layers.push(ConvLayer { weights, stride });
        in_ch = out_ch;
    }
    layers
}

fn conv_forward_relu(input: &Array4<f64>, layer: &ConvLayer) -> Array4<f64> {
    let (n, in_ch, h, w) = input.dim();
    let out_ch = layer.weights.dim().0;
    let oh = conv_out(h, layer.stride);
    let ow = conv_out(w, layer.stride);
    let mut out = Array4::<f64>::zeros((n, out_ch, oh, ow));
    for frame in 0..n {
        let x = input.index_axis(Axis(0), frame);
        for oc in 0..out_ch {
            for out_r in 0..oh {
                for out_c in 0..ow {
                    let mut acc = 0.0;
                    for ic in 0..in_ch {
                        for kr in 0..KERNEL {
                            for kc in 0..KERNEL {
                                let r = (out_r * layer.stride + kr) as isize - PAD as isize;
                                let c = (out_c * layer.stride + kc) as isize - PAD as isize;
                                if r < 0 || c < 0 || r as usize >= h || c as usize >= w {
                                    continue; // zero padding
                                }
                                acc += layer.weights[[oc, ic, kr, kc]]
                                    * x[[ic, r as usize, c as usize]];
                            }
                        }
                    }
                    out[[frame, oc, out_r, out_c]] = acc.max(0.0);
                }
            }
        }
    }
    out
}

/// Write a feature-map tensor as an FMT1 file: magic, little-endian u32
/// N, C, H, W, then the f32 payload in N-major row-major order.
pub fn write_tensor_file(path: &Path, tensor: &FeatureMapSequence) -> Result<()> {
    let (n, c, h, w) = tensor.dims();
    let mut bytes = Vec::with_capacity(20 + n * c * h * w * 4);
    bytes.extend_from_slice(TENSOR_MAGIC);
    for dim in [n, c, h, w] {
        bytes.extend_from_slice(&(dim as u32).to_le_bytes());
    }
    for &v in tensor.as_array().iter() {
        bytes.extend_from_slice(&(v as f32).to_le_bytes());
    }
    util::write_atomic(path, &bytes)
}

/// Read an FMT1 tensor file; f32 payload widens to f64.
pub fn read_tensor_file(path: &Path) -> Result<FeatureMapSequence> {
    let mut file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut header = [0u8; 20];
    file.read_exact(&mut header)
        .map_err(|_| Error::format("tensor file", format!("{}: truncated header", path.display())))?;
    if &header[0..4] != TENSOR_MAGIC {
        return Err(Error::format(
            "tensor file",
            format!("{}: bad magic (expected FMT1)", path.display()),
        ));
    }
    let mut dims = [0usize; 4];
    for (i, dim) in dims.iter_mut().enumerate() {
        let mut buf = [0u8; 4];
        buf.copy_from_slice(&header[4 + 4 * i..8 + 4 * i]);
        *dim = u32::from_le_bytes(buf) as usize;
    }
    let [n, c, h, w] = dims;
    let count = n * c * h * w;
    let mut payload = Vec::with_capacity(count * 4);
    file.read_to_end(&mut payload)
        .map_err(|e| Error::io(path, e))?;
    if payload.len() != count * 4 {
        return Err(Error::format(
            "tensor file",
            format!(
                "{}: payload is {} bytes, header {}x{}x{}x{} implies {}",
                path.display(),
                payload.len(),
                n,
                c,
                h,
                w,
                count * 4
            ),
        ));
    }
    let values: Vec<f64> = payload
        .chunks_exact(4)
        .map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64)
        .collect();
    let array = Array4::from_shape_vec((n, c, h, w), values)
        .map_err(|e| Error::format("tensor file", e.to_string()))?;
    FeatureMapSequence::new(array)
}

/// Stream a tensor file's payload without building the full byte buffer;
/// handy for large exports.
pub fn write_tensor_file_streaming<W: Write>(
    mut sink: W,
    tensor: &FeatureMapSequence,
) -> std::io::Result<()> {
    let (n, c, h, w) = tensor.dims();
    sink.write_all(TENSOR_MAGIC)?;
    for dim in [n, c, h, w] {
        sink.write_all(&(dim as u32).to_le_bytes())?;
    }
    for &v in tensor.as_array().iter() {
        sink.write_all(&(v as f32).to_le_bytes())?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array4;
    use rand::Rng;

    fn random_tensor(n: usize, c: usize, h: usize, w: usize, seed: u64) -> FeatureMapSequence {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        FeatureMapSequence::new(Array4::from_shape_fn((n, c, h, w), |_| {
            rng.gen_range(-1.0..1.0f32) as f64
        }))
        .unwrap()
    }

    #[test]
    fn identity_is_exactly_identity() {
        let frames = random_tensor(4, 3, 8, 8, 51);
        let backbone = Backbone::new(BackboneSpec::Identity).unwrap();
        let out = backbone.featurize(&frames, "v0").unwrap();
        assert_eq!(out.as_array(), frames.as_array());
    }

    #[test]
    fn randconv_shapes_and_determinism() {
        let spec = BackboneSpec::parse("randconv:8,8@2,2", 7).unwrap();
        let frames = random_tensor(2, 3, 64, 64, 53);
        assert_eq!(spec.output_shape(2, 3, 64, 64), Some((2, 8, 16, 16)));
        let out1 = Backbone::new(spec.clone()).unwrap().featurize(&frames, "v").unwrap();
        let out2 = Backbone::new(spec).unwrap().featurize(&frames, "v").unwrap();
        assert_eq!(out1.dims(), (2, 8, 16, 16));
        assert_eq!(out1.as_array(), out2.as_array());
    }

    #[test]
    fn different_seeds_give_different_weights() {
        let frames = random_tensor(1, 3, 16, 16, 54);
        let a = Backbone::new(BackboneSpec::parse("randconv:4@1", 1).unwrap())
            .unwrap()
            .featurize(&frames, "v")
            .unwrap();
        let b = Backbone::new(BackboneSpec::parse("randconv:4@1", 2).unwrap())
            .unwrap()
            .featurize(&frames, "v")
            .unwrap();
        assert_ne!(a.as_array(), b.as_array());
    }

    #[test]
    fn relu_output_is_nonnegative() {
        let frames = random_tensor(1, 3, 12, 12, 55);
        let out = Backbone::new(BackboneSpec::parse("randconv:6@2", 9).unwrap())
            .unwrap()
            .featurize(&frames, "v")
            .unwrap();
        assert!(out.as_array().iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn predicted_shape_matches_actual() {
        for spec_str in ["randconv:4@1", "randconv:4,6@2,1", "randconv:2,2,2@2,2,2"] {
            let spec = BackboneSpec::parse(spec_str, 3).unwrap();
            let frames = random_tensor(2, 3, 33, 40, 56);
            let predicted = spec.output_shape(2, 3, 33, 40).unwrap();
            let actual = Backbone::new(spec).unwrap().featurize(&frames, "v").unwrap();
            assert_eq!(actual.dims(), predicted, "{spec_str}");
        }
    }

    #[test]
    fn tensor_file_roundtrip_is_bitwise_for_f32() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.fmt");
        let tensor = random_tensor(3, 2, 5, 4, 57);
        write_tensor_file(&path, &tensor).unwrap();
        let back = read_tensor_file(&path).unwrap();
        // values were drawn as f32 then widened, so the roundtrip is exact
        assert_eq!(back.as_array(), tensor.as_array());
    }

    #[test]
    fn tensor_file_bad_magic_and_truncation() {
        let dir = tempfile::tempdir().unwrap();
        let bad = dir.path().join("bad.fmt");
        std::fs::write(&bad, b"NOPE0000000000000000").unwrap();
        assert!(matches!(read_tensor_file(&bad), Err(Error::Format { .. })));

        let truncated = dir.path().join("short.fmt");
        let tensor = random_tensor(1, 1, 2, 2, 58);
        write_tensor_file(&truncated, &tensor).unwrap();
        let bytes = std::fs::read(&truncated).unwrap();
        std::fs::write(&truncated, &bytes[..bytes.len() - 3]).unwrap();
        assert!(matches!(read_tensor_file(&truncated), Err(Error::Format { .. })));
    }

    #[test]
    fn tensor_file_backbone_resolves_per_video_in_directory() {
        let dir = tempfile::tempdir().unwrap();
        let tensor = random_tensor(2, 4, 6, 6, 59);
        write_tensor_file(&dir.path().join("clip.fmt"), &tensor).unwrap();
        let backbone = Backbone::new(BackboneSpec::TensorFile {
            path: dir.path().to_path_buf(),
        })
        .unwrap();
        let frames = random_tensor(2, 3, 6, 6, 60);
        let out = backbone.featurize(&frames, "clip").unwrap();
        assert_eq!(out.as_array(), tensor.as_array());

        // frame-count mismatch is a shape error
        let frames3 = random_tensor(3, 3, 6, 6, 61);
        assert!(matches!(
            backbone.featurize(&frames3, "clip"),
            Err(Error::Shape { .. })
        ));
    }

    #[test]
    fn spec_parse_and_id() {
        assert_eq!(
            BackboneSpec::parse("identity", 0).unwrap().id(),
            "identity"
        );
        let spec = BackboneSpec::parse("randconv:8,16@2,2", 5).unwrap();
        assert_eq!(spec.id(), "randconv:8,16@2,2#5");
        assert!(BackboneSpec::parse("randconv:8,16@2", 0).is_err());
        assert!(BackboneSpec::parse("resnet50", 0).is_err());
    }
}
