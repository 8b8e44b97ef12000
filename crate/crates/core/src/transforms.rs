//! Forward and inverse transforms.
//!
//! The matrix path multiplies by a prebuilt [`NdwtMatrix`]; the a-trous path
//! runs the classical cascade of circular convolutions with dilated filters
//! and serves as the reference the matrix path is checked against. Both use
//! periodic boundaries and the same coefficient layout (coarse block first,
//! finest detail last), so their outputs are directly comparable.

use ndarray::{s, Array1, Array2, ArrayView1, ArrayView2, ArrayViewMut2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{NdwtError, Result};
use crate::filter_bank::WaveletFilter;
use crate::ndwt_matrix::{
    block_labels, build_level_matrices, detail_block_index, BlockLabel, NdwtMatrix, WeightMatrix,
};
use crate::par;

/// Level-indexed 1-D coefficients, flattened in the row order of `W`.
#[derive(Clone, Debug, PartialEq)]
pub struct CoefficientStack1D {
    data: Vec<f64>,
    m: usize,
    depth: usize,
    filter: String,
    shift: i64,
}

impl CoefficientStack1D {
    pub fn new(data: Vec<f64>, m: usize, depth: usize, filter: &str, shift: i64) -> Result<Self> {
        if m == 0 || depth == 0 {
            return Err(NdwtError::InvalidArgument(format!(
                "coefficient stack needs m >= 1 and p >= 1, got m={m} p={depth}"
            )));
        }
        if data.len() != (depth + 1) * m {
            return Err(NdwtError::mismatch((depth + 1) * m, data.len()));
        }
        Ok(Self {
            data,
            m,
            depth,
            filter: filter.to_string(),
            shift,
        })
    }

    /// All-zero stack with the shape `w` produces.
    pub fn zeros_like(w: &NdwtMatrix) -> Self {
        Self {
            data: vec![0.0; w.rows()],
            m: w.m(),
            depth: w.depth(),
            filter: w.filter_name().to_string(),
            shift: w.shift(),
        }
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

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn block(&self, b: usize) -> &[f64] {
        &self.data[b * self.m..(b + 1) * self.m]
    }

    pub fn block_mut(&mut self, b: usize) -> &mut [f64] {
        &mut self.data[b * self.m..(b + 1) * self.m]
    }

    pub fn coarse(&self) -> &[f64] {
        self.block(0)
    }

    pub fn coarse_mut(&mut self) -> &mut [f64] {
        self.block_mut(0)
    }

    /// `d(J-level)`; level 1 is the finest.
    pub fn detail(&self, level: usize) -> &[f64] {
        self.block(detail_block_index(self.depth, level))
    }

    pub fn detail_mut(&mut self, level: usize) -> &mut [f64] {
        let b = detail_block_index(self.depth, level);
        self.block_mut(b)
    }

    pub fn finest_detail(&self) -> &[f64] {
        self.detail(1)
    }

    /// Blocks paired with their labels, in storage order.
    pub fn levels(&self) -> impl Iterator<Item = (BlockLabel, &[f64])> {
        block_labels(self.depth)
            .into_iter()
            .zip(self.data.chunks(self.m))
    }
}

/// `d = W y`.
pub fn forward_1d(w: &NdwtMatrix, y: &[f64]) -> Result<CoefficientStack1D> {
    if y.len() != w.m() {
        return Err(NdwtError::mismatch(
            format!("signal of length {}", w.m()),
            y.len(),
        ));
    }
    let d = w.matrix().dot(&ArrayView1::from(y));
    Ok(CoefficientStack1D {
        data: d.to_vec(),
        m: w.m(),
        depth: w.depth(),
        filter: w.filter_name().to_string(),
        shift: w.shift(),
    })
}

/// Forward transform of many equal-length signals sharing one `W`.
pub fn forward_1d_batch(w: &NdwtMatrix, signals: &[Vec<f64>]) -> Result<Vec<CoefficientStack1D>> {
    par::map(signals, |y| forward_1d(w, y)).into_iter().collect()
}

/// `y = W' T d`.
pub fn inverse_1d(w: &NdwtMatrix, t: &WeightMatrix, d: &CoefficientStack1D) -> Result<Vec<f64>> {
    if d.data.len() != w.rows() || t.diagonal().len() != w.rows() {
        return Err(NdwtError::mismatch(
            format!("{} coefficients and weights", w.rows()),
            format!("{} coefficients, {} weights", d.data.len(), t.diagonal().len()),
        ));
    }
    let td: Array1<f64> = d
        .data
        .iter()
        .zip(t.diagonal())
        .map(|(x, wt)| x * wt)
        .collect();
    Ok(w.matrix().t().dot(&td).to_vec())
}

/// Coefficient type of a 2-D block.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CoefficientKind {
    C,
    H,
    V,
    D,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockTag {
    pub kind: CoefficientKind,
    /// Label of the row block (from the transform over `m`).
    pub row: BlockLabel,
    /// Label of the column block (from the transform over `n`).
    pub col: BlockLabel,
}

fn tag_for(row: BlockLabel, col: BlockLabel) -> BlockTag {
    let kind = match (row.is_detail(), col.is_detail()) {
        (false, false) => CoefficientKind::C,
        (false, true) => CoefficientKind::H,
        (true, false) => CoefficientKind::V,
        (true, true) => CoefficientKind::D,
    };
    BlockTag { kind, row, col }
}

/// Scale-mixing 2-D coefficients `B = W1 A W2'` with their tessellation.
#[derive(Clone, Debug, PartialEq)]
pub struct CoefficientGrid2D {
    data: Array2<f64>,
    m: usize,
    n: usize,
    depth_rows: usize,
    depth_cols: usize,
    row_filter: String,
    col_filter: String,
    shift: i64,
}

impl CoefficientGrid2D {
    pub fn new(
        data: Array2<f64>,
        (m, n): (usize, usize),
        (depth_rows, depth_cols): (usize, usize),
        (row_filter, col_filter): (&str, &str),
        shift: i64,
    ) -> Result<Self> {
        if m == 0 || n == 0 || depth_rows == 0 || depth_cols == 0 {
            return Err(NdwtError::InvalidArgument(
                "grid dimensions and depths must be positive".into(),
            ));
        }
        let expected = ((depth_rows + 1) * m, (depth_cols + 1) * n);
        if data.dim() != expected {
            return Err(NdwtError::mismatch(
                format!("{}x{}", expected.0, expected.1),
                format!("{}x{}", data.nrows(), data.ncols()),
            ));
        }
        Ok(Self {
            data,
            m,
            n,
            depth_rows,
            depth_cols,
            row_filter: row_filter.to_string(),
            col_filter: col_filter.to_string(),
            shift,
        })
    }

    pub fn data(&self) -> &Array2<f64> {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut Array2<f64> {
        &mut self.data
    }

    pub fn into_data(self) -> Array2<f64> {
        self.data
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.m, self.n)
    }

    pub fn depths(&self) -> (usize, usize) {
        (self.depth_rows, self.depth_cols)
    }

    pub fn filters(&self) -> (&str, &str) {
        (&self.row_filter, &self.col_filter)
    }

    pub fn shift(&self) -> i64 {
        self.shift
    }

    pub fn tag(&self, rb: usize, cb: usize) -> BlockTag {
        tag_for(
            block_labels(self.depth_rows)[rb],
            block_labels(self.depth_cols)[cb],
        )
    }

    /// Every `(row block, column block, tag)` in row-major block order.
    pub fn tags(&self) -> Vec<(usize, usize, BlockTag)> {
        let rows = block_labels(self.depth_rows);
        let cols = block_labels(self.depth_cols);
        let mut out = Vec::with_capacity(rows.len() * cols.len());
        for (rb, &r) in rows.iter().enumerate() {
            for (cb, &c) in cols.iter().enumerate() {
                out.push((rb, cb, tag_for(r, c)));
            }
        }
        out
    }

    pub fn block(&self, rb: usize, cb: usize) -> ArrayView2<'_, f64> {
        let (m, n) = (self.m, self.n);
        self.data
            .slice(s![rb * m..(rb + 1) * m, cb * n..(cb + 1) * n])
    }

    pub fn block_mut(&mut self, rb: usize, cb: usize) -> ArrayViewMut2<'_, f64> {
        let (m, n) = (self.m, self.n);
        self.data
            .slice_mut(s![rb * m..(rb + 1) * m, cb * n..(cb + 1) * n])
    }

    /// Diagonal-hierarchy detail block with scale `level` on both axes.
    pub fn diagonal_block(&self, level: usize) -> Option<ArrayView2<'_, f64>> {
        if level == 0 || level > self.depth_rows.min(self.depth_cols) {
            return None;
        }
        Some(self.block(
            detail_block_index(self.depth_rows, level),
            detail_block_index(self.depth_cols, level),
        ))
    }
}

fn check_2d(w1: &NdwtMatrix, w2: &NdwtMatrix, m: usize, n: usize) -> Result<()> {
    if w1.m() != m || w2.m() != n {
        return Err(NdwtError::mismatch(
            format!("{}x{} input", w1.m(), w2.m()),
            format!("{m}x{n}"),
        ));
    }
    Ok(())
}

/// `B = W1 A W2'`. The row and column matrices may use different filters
/// and depths.
pub fn forward_2d(w1: &NdwtMatrix, w2: &NdwtMatrix, a: &Array2<f64>) -> Result<CoefficientGrid2D> {
    check_2d(w1, w2, a.nrows(), a.ncols())?;
    let b = w1.matrix().dot(a).dot(&w2.matrix().t());
    Ok(CoefficientGrid2D {
        data: b,
        m: w1.m(),
        n: w2.m(),
        depth_rows: w1.depth(),
        depth_cols: w2.depth(),
        row_filter: w1.filter_name().to_string(),
        col_filter: w2.filter_name().to_string(),
        shift: w1.shift(),
    })
}

/// `A = W1' T1 B T2 W2`.
pub fn inverse_2d(
    w1: &NdwtMatrix,
    t1: &WeightMatrix,
    b: &CoefficientGrid2D,
    t2: &WeightMatrix,
    w2: &NdwtMatrix,
) -> Result<Array2<f64>> {
    check_2d(w1, w2, b.m, b.n)?;
    if b.data.dim() != (w1.rows(), w2.rows())
        || t1.diagonal().len() != w1.rows()
        || t2.diagonal().len() != w2.rows()
    {
        return Err(NdwtError::mismatch(
            format!("{}x{} grid with matching weights", w1.rows(), w2.rows()),
            format!("{}x{}", b.data.nrows(), b.data.ncols()),
        ));
    }
    let mut scaled = b.data.clone();
    for (mut row, &r) in scaled.rows_mut().into_iter().zip(t1.diagonal()) {
        row.zip_mut_with(&ArrayView1::from(t2.diagonal()), |x, &c| *x *= r * c);
    }
    Ok(w1.matrix().t().dot(&scaled).dot(w2.matrix()))
}

/// One level of the standard (non scale-mixing) 2-D transform.
#[derive(Clone, Debug, PartialEq)]
pub struct StandardLevel {
    pub level: usize,
    pub h: Array2<f64>,
    pub v: Array2<f64>,
    pub d: Array2<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StandardGrid2D {
    pub coarse: Array2<f64>,
    /// Finest level first.
    pub levels: Vec<StandardLevel>,
    pub filter: String,
    pub shift: i64,
}

impl StandardGrid2D {
    pub fn coefficient_count(&self) -> usize {
        self.coarse.len() + self.levels.iter().map(|l| 3 * l.h.len()).sum::<usize>()
    }

    /// All coefficients: coarse, then `h`, `v`, `d` of each level.
    pub fn coefficients(&self) -> impl Iterator<Item = f64> + '_ {
        self.coarse.iter().copied().chain(
            self.levels
                .iter()
                .flat_map(|l| l.h.iter().chain(l.v.iter()).chain(l.d.iter()).copied()),
        )
    }
}

/// Standard 2-D NDWT: at each level the current coarse image is filtered by
/// the level's low/high-pass matrices along both axes, giving `h`, `v`, `d`
/// details and the next coarse image. Both axes share one scale.
pub fn standard_ndwt_2d(
    filter: &WaveletFilter,
    a: &Array2<f64>,
    depth: usize,
    shift: i64,
) -> Result<StandardGrid2D> {
    if depth == 0 {
        return Err(NdwtError::InvalidArgument("depth must be at least 1".into()));
    }
    let (m, n) = a.dim();
    let mut coarse = a.clone();
    let mut levels = Vec::with_capacity(depth);
    for level in 1..=depth {
        let rows = build_level_matrices(filter, m, level, shift)?;
        let cols = build_level_matrices(filter, n, level, shift)?;
        let low = rows.low.dot(&coarse);
        let high = rows.high.dot(&coarse);
        let h = low.dot(&cols.high.t());
        let v = high.dot(&cols.low.t());
        let d = high.dot(&cols.high.t());
        coarse = low.dot(&cols.low.t());
        levels.push(StandardLevel { level, h, v, d });
    }
    Ok(StandardGrid2D {
        coarse,
        levels,
        filter: filter.name().to_string(),
        shift,
    })
}

/// Circular correlation `out[i] = sum_k f[k] x[(i + shift + k*stride) mod m]`.
fn dilated_filter_pass(x: &[f64], taps: &[f64], stride: usize, shift: i64, out: &mut [f64]) {
    let m = x.len() as i64;
    let offsets: Vec<usize> = (0..taps.len())
        .map(|k| (shift + (k * stride) as i64).rem_euclid(m) as usize)
        .collect();
    let m = x.len();
    for (i, o) in out.iter_mut().enumerate() {
        let mut acc = 0.0;
        for (&f, &off) in taps.iter().zip(&offsets) {
            let mut idx = i + off;
            if idx >= m {
                idx -= m;
            }
            acc += f * x[idx];
        }
        *o = acc;
    }
}

fn atrous_cascade(filter: &WaveletFilter, y: &[f64], depth: usize, shift: i64) -> Vec<f64> {
    let m = y.len();
    let mut out = vec![0.0; (depth + 1) * m];
    let mut coarse = y.to_vec();
    let mut next = vec![0.0; m];
    for level in 1..=depth {
        let stride = 1usize << (level - 1);
        let b = detail_block_index(depth, level);
        dilated_filter_pass(
            &coarse,
            filter.high_pass(),
            stride,
            shift,
            &mut out[b * m..(b + 1) * m],
        );
        dilated_filter_pass(&coarse, filter.low_pass(), stride, shift, &mut next);
        std::mem::swap(&mut coarse, &mut next);
    }
    out[..m].copy_from_slice(&coarse);
    out
}

/// A-trous reference transform: no matrices, no decimation.
pub fn atrous_forward_1d(
    filter: &WaveletFilter,
    y: &[f64],
    depth: usize,
    shift: i64,
) -> Result<CoefficientStack1D> {
    if depth == 0 {
        return Err(NdwtError::InvalidArgument("depth must be at least 1".into()));
    }
    if y.is_empty() {
        return Err(NdwtError::InvalidArgument("empty signal".into()));
    }
    Ok(CoefficientStack1D {
        data: atrous_cascade(filter, y, depth, shift),
        m: y.len(),
        depth,
        filter: filter.name().to_string(),
        shift,
    })
}

/// Separable a-trous transform: every column with `filter_rows`, then every
/// row of the result with `filter_cols`. Lanes are processed in parallel.
pub fn atrous_forward_2d(
    filter_rows: &WaveletFilter,
    filter_cols: &WaveletFilter,
    a: &Array2<f64>,
    depth_rows: usize,
    depth_cols: usize,
    shift: i64,
) -> Result<CoefficientGrid2D> {
    if depth_rows == 0 || depth_cols == 0 {
        return Err(NdwtError::InvalidArgument("depth must be at least 1".into()));
    }
    let (m, n) = a.dim();
    if m == 0 || n == 0 {
        return Err(NdwtError::InvalidArgument("empty input".into()));
    }
    let columns: Vec<Vec<f64>> = a.axis_iter(Axis(1)).map(|c| c.to_vec()).collect();
    let col_out = par::map(&columns, |c| atrous_cascade(filter_rows, c, depth_rows, shift));
    let mid_rows = (depth_rows + 1) * m;
    let rows: Vec<Vec<f64>> = (0..mid_rows)
        .map(|i| col_out.iter().map(|c| c[i]).collect())
        .collect();
    let row_out = par::map(&rows, |r| atrous_cascade(filter_cols, r, depth_cols, shift));
    let width = (depth_cols + 1) * n;
    let data = Array2::from_shape_vec((mid_rows, width), row_out.concat())
        .map_err(|e| NdwtError::Format(e.to_string()))?;
    Ok(CoefficientGrid2D {
        data,
        m,
        n,
        depth_rows,
        depth_cols,
        row_filter: filter_rows.name().to_string(),
        col_filter: filter_cols.name().to_string(),
        shift,
    })
}
