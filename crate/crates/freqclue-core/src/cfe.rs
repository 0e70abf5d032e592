//! Compact feature extraction: tile each spectrum plane into a fixed grid and
//! reduce every tile to a single value (max by default), giving an
//! `N x C x K` tensor per sequence.

use ndarray::{Array3, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::Spectrum;

/// Tiling of a plane into `rows x cols` equal contiguous blocks,
/// numbered row-major: `k = r * cols + c`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockGrid {
    pub rows: usize,
    pub cols: usize,
}

impl BlockGrid {
    pub fn new(rows: usize, cols: usize) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Config(format!(
                "block grid needs positive dimensions, got {rows}x{cols}"
            )));
        }
        Ok(Self { rows, cols })
    }

    /// Number of blocks.
    pub fn block_count(&self) -> usize {
        self.rows * self.cols
    }

    /// Fails unless the grid evenly tiles an `height x width` plane.
    pub fn check_divides(&self, height: usize, width: usize) -> Result<()> {
        if !height.is_multiple_of(self.rows) || !width.is_multiple_of(self.cols) {
            return Err(Error::Partition {
                height,
                width,
                grid_rows: self.rows,
                grid_cols: self.cols,
            });
        }
        Ok(())
    }

    /// Half-open row/col ranges of block `k` on an `height x width` plane.
    pub fn tile_bounds(
        &self,
        height: usize,
        width: usize,
        k: usize,
    ) -> (std::ops::Range<usize>, std::ops::Range<usize>) {
        debug_assert!(k < self.block_count());
        let th = height / self.rows;
        let tw = width / self.cols;
        let r = k / self.cols;
        let c = k % self.cols;
        (r * th..(r + 1) * th, c * tw..(c + 1) * tw)
    }
}

impl std::str::FromStr for BlockGrid {
    type Err = Error;

    /// Parses the `RxC` form, e.g. `4x4`.
    fn from_str(s: &str) -> Result<Self> {
        let (r, c) = s
            .split_once(['x', 'X'])
            .ok_or_else(|| Error::Config(format!("block grid must look like RxC, got '{s}'")))?;
        let rows = r
            .parse::<usize>()
            .map_err(|_| Error::Config(format!("bad grid rows '{r}'")))?;
        let cols = c
            .parse::<usize>()
            .map_err(|_| Error::Config(format!("bad grid cols '{c}'")))?;
        Self::new(rows, cols)
    }
}

impl std::fmt::Display for BlockGrid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}x{}", self.rows, self.cols)
    }
}

/// How a tile collapses to one value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Reduction {
    /// Signed maximum (the default).
    Max,
    Min,
    Avg,
    /// Maximum of absolute values; experimental alternative to signed max.
    AbsMax,
}

impl Reduction {
    pub fn reduce(&self, tile: ArrayView2<'_, f64>) -> f64 {
        match self {
            Reduction::Max => tile.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            Reduction::Min => tile.iter().copied().fold(f64::INFINITY, f64::min),
            Reduction::Avg => tile.sum() / tile.len() as f64,
            Reduction::AbsMax => tile.iter().fold(0.0f64, |acc, v| acc.max(v.abs())),
        }
    }
}

impl std::str::FromStr for Reduction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "max" => Ok(Reduction::Max),
            "min" => Ok(Reduction::Min),
            "avg" => Ok(Reduction::Avg),
            "absmax" => Ok(Reduction::AbsMax),
            _ => Err(Error::Config(format!(
                "unknown reduction '{s}' (expected max, min, avg or absmax)"
            ))),
        }
    }
}

impl std::fmt::Display for Reduction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            Reduction::Max => "max",
            Reduction::Min => "min",
            Reduction::Avg => "avg",
            Reduction::AbsMax => "absmax",
        };
        f.write_str(name)
    }
}

/// Read-only tiled view of a spectrum under a block grid.
#[derive(Debug)]
pub struct BlockView<'a> {
    spectrum: &'a Spectrum,
    grid: BlockGrid,
}

impl<'a> BlockView<'a> {
    pub fn grid(&self) -> BlockGrid {
        self.grid
    }

    /// Tile `k` of plane (n, c).
    pub fn tile(&self, n: usize, c: usize, k: usize) -> ArrayView2<'a, f64> {
        let (_, _, h, w) = self.spectrum.dims();
        let (rows, cols) = self.grid.tile_bounds(h, w, k);
        let plane = self.spectrum.plane(n, c);
        plane.slice_move(ndarray::s![rows, cols])
    }
}

/// Tile the spectrum, failing when the grid does not divide its planes.
pub fn partition_blocks<'a>(spectrum: &'a Spectrum, grid: BlockGrid) -> Result<BlockView<'a>> {
    let (_, _, h, w) = spectrum.dims();
    grid.check_divides(h, w)?;
    Ok(BlockView { spectrum, grid })
}

/// Block-reduced spectrum: `N x C x K` with the reduction that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct CompactFeature {
    data: Array3<f64>,
    reduction: Reduction,
}

impl CompactFeature {
    pub fn new(data: Array3<f64>, reduction: Reduction) -> Result<Self> {
        let (n, c, k) = data.dim();
        if n == 0 || c == 0 || k == 0 {
            return Err(Error::shape(
                "CompactFeature",
                "all of N, C, K >= 1",
                format!("{n}x{c}x{k}"),
            ));
        }
        Ok(Self { data, reduction })
    }

    /// (N, C, K)
    pub fn dims(&self) -> (usize, usize, usize) {
        self.data.dim()
    }

    pub fn reduction(&self) -> Reduction {
        self.reduction
    }

    pub fn values(&self) -> &Array3<f64> {
        &self.data
    }
}

/// Reduce every tile of every (n, c) plane, yielding `N x C x K`.
pub fn compact(spectrum: &Spectrum, grid: BlockGrid, reduction: Reduction) -> Result<CompactFeature> {
    let view = partition_blocks(spectrum, grid)?;
    let (n, c, _, _) = spectrum.dims();
    let k = grid.block_count();
    let mut out = Array3::<f64>::zeros((n, c, k));
    for frame in 0..n {
        for channel in 0..c {
            for block in 0..k {
                out[[frame, channel, block]] = reduction.reduce(view.tile(frame, channel, block));
            }
        }
    }
    CompactFeature::new(out, reduction)
}
