//! File formats: CSV vectors/matrices, PGM images, the `NDWTC1` coefficient
//! container and its JSON block-map sidecar.
//!
//! `NDWTC1` layout (all integers little-endian):
//!
//! ```text
//! magic      6 bytes  "NDWTC1"
//! dims       u8       1 or 2
//! m, n       u64      signal shape (n = 1 for 1-D)
//! p1, p2     u64      depths (p2 = 0 for 1-D)
//! shift      i64
//! row filter u16 length + UTF-8 bytes
//! col filter u16 length + UTF-8 bytes (empty for 1-D)
//! count      u64      number of f64 values that follow
//! payload    f64      row-major
//! ```

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{NdwtError, Result};
use crate::ndwt_matrix::BlockLabel;
use crate::transforms::{BlockTag, CoefficientGrid2D, CoefficientStack1D};

pub(crate) fn read_exact<R: Read>(r: &mut R, buf: &mut [u8], what: &str) -> Result<()> {
    r.read_exact(buf).map_err(|e| match e.kind() {
        std::io::ErrorKind::UnexpectedEof => NdwtError::Format(format!("truncated input reading {what}")),
        _ => NdwtError::Io(e),
    })
}

pub(crate) fn read_u16<R: Read>(r: &mut R) -> Result<u16> {
    let mut b = [0u8; 2];
    read_exact(r, &mut b, "header")?;
    Ok(u16::from_le_bytes(b))
}

pub(crate) fn read_u64<R: Read>(r: &mut R) -> Result<u64> {
    let mut b = [0u8; 8];
    read_exact(r, &mut b, "header")?;
    Ok(u64::from_le_bytes(b))
}

pub(crate) fn read_i64<R: Read>(r: &mut R) -> Result<i64> {
    let mut b = [0u8; 8];
    read_exact(r, &mut b, "header")?;
    Ok(i64::from_le_bytes(b))
}

pub(crate) fn write_f64s<W: Write>(w: &mut W, values: impl Iterator<Item = f64>) -> Result<()> {
    for v in values {
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

pub(crate) fn read_f64s<R: Read>(r: &mut R, count: usize) -> Result<Vec<f64>> {
    let mut bytes = vec![0u8; count.checked_mul(8).ok_or_else(|| NdwtError::Format("payload too large".into()))?];
    read_exact(r, &mut bytes, "payload")?;
    Ok(bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
        .collect())
}

fn write_name<W: Write>(w: &mut W, name: &str) -> Result<()> {
    let b = name.as_bytes();
    let len = u16::try_from(b.len()).map_err(|_| NdwtError::InvalidArgument("filter name too long".into()))?;
    w.write_all(&len.to_le_bytes())?;
    w.write_all(b)?;
    Ok(())
}

fn read_name<R: Read>(r: &mut R) -> Result<String> {
    let len = read_u16(r)? as usize;
    let mut b = vec![0u8; len];
    read_exact(r, &mut b, "filter name")?;
    String::from_utf8(b).map_err(|_| NdwtError::Format("filter name is not UTF-8".into()))
}

const COEF_MAGIC: &[u8; 6] = b"NDWTC1";

/// Contents of a coefficient container.
#[derive(Clone, Debug, PartialEq)]
pub enum Coefficients {
    OneD(CoefficientStack1D),
    TwoD(CoefficientGrid2D),
}

impl Coefficients {
    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(COEF_MAGIC)?;
        match self {
            Coefficients::OneD(s) => {
                w.write_all(&[1u8])?;
                for v in [s.m() as u64, 1, s.depth() as u64, 0] {
                    w.write_all(&v.to_le_bytes())?;
                }
                w.write_all(&s.shift().to_le_bytes())?;
                write_name(&mut w, s.filter_name())?;
                write_name(&mut w, "")?;
                w.write_all(&(s.as_slice().len() as u64).to_le_bytes())?;
                write_f64s(&mut w, s.as_slice().iter().copied())?;
            }
            Coefficients::TwoD(g) => {
                w.write_all(&[2u8])?;
                let (m, n) = g.dims();
                let (p1, p2) = g.depths();
                for v in [m as u64, n as u64, p1 as u64, p2 as u64] {
                    w.write_all(&v.to_le_bytes())?;
                }
                w.write_all(&g.shift().to_le_bytes())?;
                let (rf, cf) = g.filters();
                write_name(&mut w, rf)?;
                write_name(&mut w, cf)?;
                w.write_all(&(g.data().len() as u64).to_le_bytes())?;
                write_f64s(&mut w, g.data().iter().copied())?;
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_from<R: Read>(mut r: R) -> Result<Self> {
        let mut magic = [0u8; 6];
        read_exact(&mut r, &mut magic, "magic")?;
        if &magic != COEF_MAGIC {
            return Err(NdwtError::Format("not an NDWTC1 coefficient container".into()));
        }
        let mut dims = [0u8; 1];
        read_exact(&mut r, &mut dims, "header")?;
        let m = read_u64(&mut r)? as usize;
        let n = read_u64(&mut r)? as usize;
        let p1 = read_u64(&mut r)? as usize;
        let p2 = read_u64(&mut r)? as usize;
        let shift = read_i64(&mut r)?;
        let rf = read_name(&mut r)?;
        let cf = read_name(&mut r)?;
        let count = read_u64(&mut r)? as usize;
        let expected = match dims[0] {
            1 => (p1 as u128 + 1) * m as u128,
            2 => (p1 as u128 + 1) * m as u128 * (p2 as u128 + 1) * n as u128,
            d => return Err(NdwtError::Format(format!("unsupported dimensionality {d}"))),
        };
        if count as u128 != expected {
            return Err(NdwtError::Format(format!(
                "element count {count} does not match header shape ({expected})"
            )));
        }
        let data = read_f64s(&mut r, count)?;
        match dims[0] {
            1 => Ok(Coefficients::OneD(CoefficientStack1D::new(data, m, p1, &rf, shift)?)),
            _ => {
                let arr = Array2::from_shape_vec(((p1 + 1) * m, (p2 + 1) * n), data)
                    .map_err(|e| NdwtError::Format(e.to_string()))?;
                Ok(Coefficients::TwoD(CoefficientGrid2D::new(
                    arr,
                    (m, n),
                    (p1, p2),
                    (&rf, &cf),
                    shift,
                )?))
            }
        }
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        self.write_to(BufWriter::new(File::create(path)?))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::read_from(BufReader::new(File::open(path)?))
    }

    /// Coefficients as a matrix: a single column for 1-D stacks.
    pub fn to_matrix(&self) -> Array2<f64> {
        match self {
            Coefficients::OneD(s) => {
                Array2::from_shape_vec((s.as_slice().len(), 1), s.as_slice().to_vec())
                    .expect("column shape")
            }
            Coefficients::TwoD(g) => g.data().clone(),
        }
    }

    pub fn layout(&self) -> BlockLayout {
        match self {
            Coefficients::OneD(s) => BlockLayout {
                dims: 1,
                m: s.m(),
                n: 1,
                depth_rows: s.depth(),
                depth_cols: 0,
                row_filter: s.filter_name().to_string(),
                col_filter: String::new(),
                shift: s.shift(),
                blocks: s
                    .levels()
                    .enumerate()
                    .map(|(b, (label, _))| LayoutBlock {
                        rows: [b * s.m(), (b + 1) * s.m()],
                        cols: [0, 1],
                        row_label: label,
                        col_label: None,
                        kind: None,
                    })
                    .collect(),
            },
            Coefficients::TwoD(g) => {
                let (m, n) = g.dims();
                let (p1, p2) = g.depths();
                let (rf, cf) = g.filters();
                BlockLayout {
                    dims: 2,
                    m,
                    n,
                    depth_rows: p1,
                    depth_cols: p2,
                    row_filter: rf.to_string(),
                    col_filter: cf.to_string(),
                    shift: g.shift(),
                    blocks: g
                        .tags()
                        .into_iter()
                        .map(|(rb, cb, BlockTag { kind, row, col })| LayoutBlock {
                            rows: [rb * m, (rb + 1) * m],
                            cols: [cb * n, (cb + 1) * n],
                            row_label: row,
                            col_label: Some(col),
                            kind: Some(kind),
                        })
                        .collect(),
                }
            }
        }
    }

    /// Rebuilds a container from a CSV matrix and its block-map sidecar.
    pub fn from_matrix(data: Array2<f64>, layout: &BlockLayout) -> Result<Self> {
        match layout.dims {
            1 => {
                let values: Vec<f64> = data.iter().copied().collect();
                if data.ncols() != 1 && data.nrows() != 1 {
                    return Err(NdwtError::Format("1-D coefficients must be a single row or column".into()));
                }
                Ok(Coefficients::OneD(CoefficientStack1D::new(
                    values,
                    layout.m,
                    layout.depth_rows,
                    &layout.row_filter,
                    layout.shift,
                )?))
            }
            2 => Ok(Coefficients::TwoD(CoefficientGrid2D::new(
                data,
                (layout.m, layout.n),
                (layout.depth_rows, layout.depth_cols),
                (&layout.row_filter, &layout.col_filter),
                layout.shift,
            )?)),
            d => Err(NdwtError::Format(format!("unsupported dimensionality {d}"))),
        }
    }
}

/// JSON sidecar describing how a CSV coefficient matrix is partitioned.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockLayout {
    pub dims: u8,
    pub m: usize,
    pub n: usize,
    pub depth_rows: usize,
    pub depth_cols: usize,
    pub row_filter: String,
    pub col_filter: String,
    pub shift: i64,
    pub blocks: Vec<LayoutBlock>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LayoutBlock {
    /// Half-open row range.
    pub rows: [usize; 2],
    pub cols: [usize; 2],
    pub row_label: BlockLabel,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub col_label: Option<BlockLabel>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub kind: Option<crate::transforms::CoefficientKind>,
}

/// Shortest decimal form that parses back to the same bits.
pub fn format_f64(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || (1e-5..1e15).contains(&a) || !x.is_finite() {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

/// Reads a headerless numeric CSV into a matrix. Blank lines are skipped and
/// every row must have the same number of fields.
pub fn read_csv_matrix<R: Read>(input: R) -> Result<Array2<f64>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(input);
    let mut values = Vec::new();
    let mut cols = None;
    let mut rows = 0usize;
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| NdwtError::Format(format!("CSV: {e}")))?;
        let fields: Vec<&str> = record.iter().filter(|f| !f.is_empty()).collect();
        if fields.is_empty() {
            continue;
        }
        match cols {
            None => cols = Some(fields.len()),
            Some(c) if c != fields.len() => {
                return Err(NdwtError::Format(format!(
                    "CSV row {} has {} fields, expected {c}",
                    line + 1,
                    fields.len()
                )))
            }
            _ => {}
        }
        for f in fields {
            values.push(f.parse::<f64>().map_err(|_| {
                NdwtError::Format(format!("CSV row {}: '{f}' is not a number", line + 1))
            })?);
        }
        rows += 1;
    }
    let cols = cols.ok_or_else(|| NdwtError::Format("CSV input is empty".into()))?;
    Array2::from_shape_vec((rows, cols), values).map_err(|e| NdwtError::Format(e.to_string()))
}

/// A CSV vector is a single row or a single column.
pub fn read_csv_vector<R: Read>(input: R) -> Result<Vec<f64>> {
    let m = read_csv_matrix(input)?;
    if m.nrows() != 1 && m.ncols() != 1 {
        return Err(NdwtError::Format(format!(
            "expected a vector, got a {}x{} matrix",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(m.iter().copied().collect())
}

pub fn write_csv_matrix<W: Write>(out: W, a: &Array2<f64>) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    for row in a.rows() {
        w.write_record(row.iter().map(|v| format_f64(*v)))
            .map_err(|e| NdwtError::Format(e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

/// Writes a vector as a single column.
pub fn write_csv_vector<W: Write>(out: W, v: &[f64]) -> Result<()> {
    let a = Array2::from_shape_vec((v.len(), 1), v.to_vec()).expect("column shape");
    write_csv_matrix(out, &a)
}

/// Reads a binary (P5) or ASCII (P2) greymap with 8- or 16-bit samples.
pub fn read_pgm<R: Read>(mut input: R) -> Result<Array2<f64>> {
    let mut bytes = Vec::new();
    input.read_to_end(&mut bytes)?;
    let mut pos = 0usize;
    let mut token = || -> Result<String> {
        loop {
            while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
                pos += 1;
            }
            if pos < bytes.len() && bytes[pos] == b'#' {
                while pos < bytes.len() && bytes[pos] != b'\n' {
                    pos += 1;
                }
                continue;
            }
            break;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(NdwtError::Format("truncated PGM header".into()));
        }
        Ok(String::from_utf8_lossy(&bytes[start..pos]).into_owned())
    };
    let magic = token()?;
    let num = |s: String| -> Result<usize> {
        s.parse().map_err(|_| NdwtError::Format(format!("bad PGM header field '{s}'")))
    };
    let width = num(token()?)?;
    let height = num(token()?)?;
    let maxval = num(token()?)?;
    if width == 0 || height == 0 || maxval == 0 || maxval > 65535 {
        return Err(NdwtError::Format("invalid PGM dimensions or maxval".into()));
    }
    let count = width * height;
    let values: Vec<f64> = match magic.as_str() {
        "P2" => {
            let mut v = Vec::with_capacity(count);
            for _ in 0..count {
                v.push(num(token()?)? as f64);
            }
            v
        }
        "P5" => {
            // exactly one whitespace byte separates the header from the raster
            pos += 1;
            let wide = maxval > 255;
            let need = count * if wide { 2 } else { 1 };
            let raster = bytes
                .get(pos..pos + need)
                .ok_or_else(|| NdwtError::Format("truncated PGM raster".into()))?;
            if wide {
                raster
                    .chunks_exact(2)
                    .map(|c| u16::from_be_bytes([c[0], c[1]]) as f64)
                    .collect()
            } else {
                raster.iter().map(|&b| b as f64).collect()
            }
        }
        other => return Err(NdwtError::Format(format!("unsupported PGM magic '{other}'"))),
    };
    Array2::from_shape_vec((height, width), values).map_err(|e| NdwtError::Format(e.to_string()))
}

/// Loads a matrix from `.pgm` or CSV, chosen by extension.
pub fn load_matrix(path: &Path) -> Result<Array2<f64>> {
    let file = BufReader::new(File::open(path)?);
    let is_pgm = path
        .extension()
        .map(|e| e.eq_ignore_ascii_case("pgm"))
        .unwrap_or(false);
    if is_pgm {
        read_pgm(file)
    } else {
        read_csv_matrix(file)
    }
}

pub fn save_matrix_csv(path: &Path, a: &Array2<f64>) -> Result<()> {
    write_csv_matrix(BufWriter::new(File::create(path)?), a)
}

pub fn save_vector_csv(path: &Path, v: &[f64]) -> Result<()> {
    write_csv_vector(BufWriter::new(File::create(path)?), v)
}
