//! Explicit NDWT matrices.
//!
//! For depth `p` the stacked matrix `W` has `(p + 1) m` rows arranged as
//! `m`-row blocks:
//!
//! ```text
//! block 0      H_p ... H_2 H_1          coarse  c(J-p)
//! block 1      G_p H_(p-1) ... H_1      detail  d(J-p)
//! ...
//! block p-1    G_2 H_1                  detail  d(J-2)
//! block p      G_1                      detail  d(J-1)   (finest)
//! ```
//!
//! The diagonal weight `T` gives the first `2m` rows weight `2^-p` and each
//! following block twice the weight of the previous one, so that
//! `W' T W = I`.

use std::io::{Read, Write};
use std::ops::Range;

use ndarray::{s, Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::error::{NdwtError, Result};
use crate::filter_bank::{dilate_filter, WaveletFilter};

pub const DEFAULT_MAX_ELEMENTS: u64 = 2_000_000_000;
pub const MAX_ELEMENTS_ENV: &str = "NDWT_MAX_ELEMENTS";

/// Cap on the number of `f64` elements a dense `W` may hold.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MemoryGuard {
    max_elements: u64,
}

impl Default for MemoryGuard {
    fn default() -> Self {
        Self {
            max_elements: DEFAULT_MAX_ELEMENTS,
        }
    }
}

impl MemoryGuard {
    pub fn new(max_elements: u64) -> Self {
        Self { max_elements }
    }

    /// Reads `NDWT_MAX_ELEMENTS`, falling back to the default cap.
    pub fn from_env() -> Result<Self> {
        match std::env::var(MAX_ELEMENTS_ENV) {
            Ok(v) => v
                .trim()
                .parse::<u64>()
                .map(Self::new)
                .map_err(|_| {
                    NdwtError::InvalidArgument(format!("{MAX_ELEMENTS_ENV}={v:?} is not a count"))
                }),
            Err(_) => Ok(Self::default()),
        }
    }

    pub fn max_elements(&self) -> u64 {
        self.max_elements
    }

    /// Element count of a depth-`p` matrix over length `m`, or an error if
    /// it exceeds the cap.
    pub fn check(&self, m: usize, p: usize) -> Result<usize> {
        let required = (p as u128 + 1) * (m as u128) * (m as u128);
        if required > self.max_elements as u128 || required > usize::MAX as u128 {
            return Err(NdwtError::ResourceLimit {
                required,
                allowed: self.max_elements,
            });
        }
        Ok(required as usize)
    }
}

/// Circulant low/high-pass matrices for one decomposition level.
#[derive(Clone, Debug)]
pub struct LevelFilterMatrices {
    pub low: Array2<f64>,
    pub high: Array2<f64>,
    pub level: usize,
    pub m: usize,
    pub shift: i64,
}

/// Nonzero `(column, value)` entries of row `i` when the taps are laid down
/// from column `(i + shift) mod m` with circular wrap. Coincident wrapped
/// taps are summed.
fn placed_row(taps: &[f64], m: usize, shift: i64, i: usize) -> Vec<(usize, f64)> {
    let start = (i as i64 + shift).rem_euclid(m as i64) as usize;
    let mut row: Vec<(usize, f64)> = Vec::with_capacity(taps.len().min(m));
    for (t, &v) in taps.iter().enumerate() {
        if v == 0.0 {
            continue;
        }
        let col = (start + t) % m;
        match row.iter_mut().find(|(c, _)| *c == col) {
            Some(entry) => entry.1 += v,
            None => row.push((col, v)),
        }
    }
    row
}

struct SparseCirculant {
    rows: Vec<Vec<(usize, f64)>>,
}

impl SparseCirculant {
    fn new(taps: &[f64], m: usize, shift: i64) -> Self {
        Self {
            rows: (0..m).map(|i| placed_row(taps, m, shift, i)).collect(),
        }
    }

    fn to_dense(&self, m: usize) -> Array2<f64> {
        let mut out = Array2::zeros((m, m));
        for (i, row) in self.rows.iter().enumerate() {
            for &(c, v) in row {
                out[[i, c]] += v;
            }
        }
        out
    }

    /// `self * rhs` written into `out`.
    fn mul_into(&self, rhs: ArrayView2<f64>, mut out: ndarray::ArrayViewMut2<f64>) {
        out.fill(0.0);
        for (i, row) in self.rows.iter().enumerate() {
            let mut dst = out.row_mut(i);
            for &(c, v) in row {
                dst.scaled_add(v, &rhs.row(c));
            }
        }
    }
}

fn level_taps(filter: &WaveletFilter, level: usize) -> (Vec<f64>, Vec<f64>) {
    let r = (level - 1) as u32;
    (
        dilate_filter(filter.low_pass(), r).taps,
        dilate_filter(filter.high_pass(), r).taps,
    )
}

pub fn build_level_matrices(
    filter: &WaveletFilter,
    m: usize,
    level: usize,
    shift: i64,
) -> Result<LevelFilterMatrices> {
    if m < 2 {
        return Err(NdwtError::InvalidArgument(format!(
            "signal length must be at least 2, got {m}"
        )));
    }
    if level == 0 {
        return Err(NdwtError::InvalidArgument("level must be at least 1".into()));
    }
    let (h, g) = level_taps(filter, level);
    Ok(LevelFilterMatrices {
        low: SparseCirculant::new(&h, m, shift).to_dense(m),
        high: SparseCirculant::new(&g, m, shift).to_dense(m),
        level,
        m,
        shift,
    })
}

/// Which coefficient vector a block of `W` produces. `level` counts from 1
/// at the finest scale, so `Detail { level: j }` is `d(J-j)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum BlockLabel {
    Coarse { level: usize },
    Detail { level: usize },
}

impl BlockLabel {
    pub fn level(&self) -> usize {
        match *self {
            BlockLabel::Coarse { level } | BlockLabel::Detail { level } => level,
        }
    }

    pub fn is_detail(&self) -> bool {
        matches!(self, BlockLabel::Detail { .. })
    }
}

/// Block labels for depth `p`, top to bottom.
pub fn block_labels(p: usize) -> Vec<BlockLabel> {
    std::iter::once(BlockLabel::Coarse { level: p })
        .chain((1..=p).rev().map(|level| BlockLabel::Detail { level }))
        .collect()
}

/// Index of the block holding `d(J-level)`.
pub fn detail_block_index(p: usize, level: usize) -> usize {
    p + 1 - level
}

#[derive(Clone, Debug)]
pub struct NdwtMatrix {
    w: Array2<f64>,
    m: usize,
    depth: usize,
    filter: String,
    shift: i64,
}

impl NdwtMatrix {
    /// Builds `W` by the block recursion, checking the element cap before
    /// any allocation.
    pub fn build(
        filter: &WaveletFilter,
        m: usize,
        depth: usize,
        shift: i64,
        guard: &MemoryGuard,
    ) -> Result<Self> {
        if m < 2 {
            return Err(NdwtError::InvalidArgument(format!(
                "signal length must be at least 2, got {m}"
            )));
        }
        if depth == 0 {
            return Err(NdwtError::InvalidArgument("depth must be at least 1".into()));
        }
        guard.check(m, depth)?;

        let mut w = Array2::<f64>::zeros(((depth + 1) * m, m));
        // running product H_(j-1) ... H_1; None stands for the identity
        let mut acc: Option<Array2<f64>> = None;
        for level in 1..=depth {
            let (h, g) = level_taps(filter, level);
            let low = SparseCirculant::new(&h, m, shift);
            let high = SparseCirculant::new(&g, m, shift);
            let b = detail_block_index(depth, level);
            let block = w.slice_mut(s![b * m..(b + 1) * m, ..]);
            acc = Some(match acc {
                None => {
                    high.to_dense(m).move_into(block);
                    low.to_dense(m)
                }
                Some(prev) => {
                    high.mul_into(prev.view(), block);
                    let mut next = Array2::zeros((m, m));
                    low.mul_into(prev.view(), next.view_mut());
                    next
                }
            });
        }
        if let Some(coarse) = acc {
            coarse.move_into(w.slice_mut(s![0..m, ..]));
        }
        Ok(Self {
            w,
            m,
            depth,
            filter: filter.name().to_string(),
            shift,
        })
    }

    pub fn matrix(&self) -> &Array2<f64> {
        &self.w
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn filter_name(&self) -> &str {
        &self.filter
    }

    pub fn shift(&self) -> i64 {
        self.shift
    }

    pub fn rows(&self) -> usize {
        self.w.nrows()
    }

    /// Row ranges with their labels, in stacking order.
    pub fn block_map(&self) -> Vec<(Range<usize>, BlockLabel)> {
        block_labels(self.depth)
            .into_iter()
            .enumerate()
            .map(|(b, label)| (b * self.m..(b + 1) * self.m, label))
            .collect()
    }

    pub fn block(&self, index: usize) -> ArrayView2<'_, f64> {
        self.w.slice(s![index * self.m..(index + 1) * self.m, ..])
    }

    /// Writes the `NDWTW1` container: magic, `u16` name length, name bytes,
    /// then `m`, `p` (`u64`), shift (`i64`), element count (`u64`) and the
    /// row-major little-endian `f64` payload.
    pub fn write_to<W: Write>(&self, mut out: W) -> Result<()> {
        out.write_all(WMAT_MAGIC)?;
        let name = self.filter.as_bytes();
        out.write_all(&(name.len() as u16).to_le_bytes())?;
        out.write_all(name)?;
        out.write_all(&(self.m as u64).to_le_bytes())?;
        out.write_all(&(self.depth as u64).to_le_bytes())?;
        out.write_all(&self.shift.to_le_bytes())?;
        out.write_all(&(self.w.len() as u64).to_le_bytes())?;
        crate::io::write_f64s(&mut out, self.w.iter().copied())?;
        Ok(())
    }

    pub fn read_from<R: Read>(mut input: R, guard: &MemoryGuard) -> Result<Self> {
        let mut magic = [0u8; 6];
        crate::io::read_exact(&mut input, &mut magic, "magic")?;
        if &magic != WMAT_MAGIC {
            return Err(NdwtError::Format("not an NDWTW1 matrix container".into()));
        }
        let name_len = crate::io::read_u16(&mut input)? as usize;
        let mut name = vec![0u8; name_len];
        crate::io::read_exact(&mut input, &mut name, "filter name")?;
        let filter = String::from_utf8(name)
            .map_err(|_| NdwtError::Format("filter name is not UTF-8".into()))?;
        let m = crate::io::read_u64(&mut input)? as usize;
        let depth = crate::io::read_u64(&mut input)? as usize;
        let shift = crate::io::read_i64(&mut input)?;
        let count = crate::io::read_u64(&mut input)?;
        if m < 2 || depth == 0 {
            return Err(NdwtError::Format(format!("invalid header m={m} p={depth}")));
        }
        let expected = guard.check(m, depth)?;
        if count as usize != expected {
            return Err(NdwtError::Format(format!(
                "element count {count} does not match (p+1)*m*m = {expected}"
            )));
        }
        let data = crate::io::read_f64s(&mut input, expected)?;
        let w = Array2::from_shape_vec(((depth + 1) * m, m), data)
            .map_err(|e| NdwtError::Format(e.to_string()))?;
        Ok(Self {
            w,
            m,
            depth,
            filter,
            shift,
        })
    }
}

const WMAT_MAGIC: &[u8; 6] = b"NDWTW1";

/// [`NdwtMatrix::build`] under the default element cap.
pub fn build_ndwt_matrix(
    filter: &WaveletFilter,
    m: usize,
    depth: usize,
    shift: i64,
) -> Result<NdwtMatrix> {
    NdwtMatrix::build(filter, m, depth, shift, &MemoryGuard::default())
}

/// Diagonal of `T`, stored as a vector.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightMatrix {
    diag: Vec<f64>,
    m: usize,
    depth: usize,
}

impl WeightMatrix {
    pub fn diagonal(&self) -> &[f64] {
        &self.diag
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    /// Weight shared by every row of block `b`.
    pub fn block_weight(&self, b: usize) -> f64 {
        block_weight(self.depth, b)
    }
}

fn block_weight(p: usize, b: usize) -> f64 {
    let exponent = if b == 0 { p } else { p + 1 - b };
    0.5f64.powi(exponent as i32)
}

pub fn build_weight_matrix(m: usize, p: usize) -> Result<WeightMatrix> {
    if m == 0 || p == 0 {
        return Err(NdwtError::InvalidArgument(format!(
            "weight matrix needs m >= 1 and p >= 1, got m={m} p={p}"
        )));
    }
    let diag = (0..=p)
        .flat_map(|b| std::iter::repeat_n(block_weight(p, b), m))
        .collect();
    Ok(WeightMatrix { diag, m, depth: p })
}

/// `V = T^(1/2) W`, whose columns are orthonormal.
pub fn build_orthonormal_matrix(w: &NdwtMatrix, t: &WeightMatrix) -> Result<Array2<f64>> {
    if t.diag.len() != w.rows() {
        return Err(NdwtError::mismatch(
            format!("weight diagonal of length {}", w.rows()),
            t.diag.len(),
        ));
    }
    let mut v = w.w.clone();
    for (mut row, &d) in v.rows_mut().into_iter().zip(&t.diag) {
        row *= d.sqrt();
    }
    Ok(v)
}
