//! Wavelet filter bank: orthonormal low-pass filters, their quadrature
//! mirror high-pass counterparts, and a-trous dilation.

mod tables;

use crate::error::{NdwtError, Result};
use serde::Serialize;

/// Filter family, used for listing and vanishing-moment bookkeeping.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Haar,
    Daubechies,
    Symmlet,
    Coiflet,
}

struct Entry {
    name: &'static str,
    family: Family,
    vanishing_moments: usize,
    taps: &'static [f64],
}

const BANK: &[Entry] = &[
    Entry { name: "haar", family: Family::Haar, vanishing_moments: 1, taps: &tables::HAAR },
    Entry { name: "db4", family: Family::Daubechies, vanishing_moments: 2, taps: &tables::DB4 },
    Entry { name: "db6", family: Family::Daubechies, vanishing_moments: 3, taps: &tables::DB6 },
    Entry { name: "db8", family: Family::Daubechies, vanishing_moments: 4, taps: &tables::DB8 },
    Entry { name: "db10", family: Family::Daubechies, vanishing_moments: 5, taps: &tables::DB10 },
    Entry { name: "db12", family: Family::Daubechies, vanishing_moments: 6, taps: &tables::DB12 },
    Entry { name: "db14", family: Family::Daubechies, vanishing_moments: 7, taps: &tables::DB14 },
    Entry { name: "db16", family: Family::Daubechies, vanishing_moments: 8, taps: &tables::DB16 },
    Entry { name: "db18", family: Family::Daubechies, vanishing_moments: 9, taps: &tables::DB18 },
    Entry { name: "db20", family: Family::Daubechies, vanishing_moments: 10, taps: &tables::DB20 },
    Entry { name: "sym8", family: Family::Symmlet, vanishing_moments: 4, taps: &tables::SYM8 },
    Entry { name: "sym10", family: Family::Symmlet, vanishing_moments: 5, taps: &tables::SYM10 },
    Entry { name: "sym12", family: Family::Symmlet, vanishing_moments: 6, taps: &tables::SYM12 },
    Entry { name: "sym14", family: Family::Symmlet, vanishing_moments: 7, taps: &tables::SYM14 },
    Entry { name: "sym16", family: Family::Symmlet, vanishing_moments: 8, taps: &tables::SYM16 },
    Entry { name: "sym18", family: Family::Symmlet, vanishing_moments: 9, taps: &tables::SYM18 },
    Entry { name: "sym20", family: Family::Symmlet, vanishing_moments: 10, taps: &tables::SYM20 },
    Entry { name: "coif6", family: Family::Coiflet, vanishing_moments: 2, taps: &tables::COIF6 },
    Entry { name: "coif12", family: Family::Coiflet, vanishing_moments: 4, taps: &tables::COIF12 },
    Entry { name: "coif18", family: Family::Coiflet, vanishing_moments: 6, taps: &tables::COIF18 },
];

/// Names accepted by [`get_filter`], in bank order.
pub fn supported_names() -> Vec<&'static str> {
    BANK.iter().map(|e| e.name).collect()
}

/// An orthonormal low-pass filter `h` together with its QMF high-pass `g`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WaveletFilter {
    name: String,
    family: Family,
    vanishing_moments: usize,
    h: Vec<f64>,
    g: Vec<f64>,
}

impl WaveletFilter {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn vanishing_moments(&self) -> usize {
        self.vanishing_moments
    }

    pub fn low_pass(&self) -> &[f64] {
        &self.h
    }

    pub fn high_pass(&self) -> &[f64] {
        &self.g
    }

    pub fn len(&self) -> usize {
        self.h.len()
    }

    pub fn is_empty(&self) -> bool {
        self.h.is_empty()
    }
}

/// Look up a filter from the bank by its CLI-visible name (`haar`, `db4` …
/// `db20`, `sym8` … `sym20`, `coif6`, `coif12`, `coif18`). Numbers count
/// taps, not vanishing moments.
pub fn get_filter(name: &str) -> Result<WaveletFilter> {
    let key = name.trim().to_ascii_lowercase();
    let entry = BANK
        .iter()
        .find(|e| e.name == key)
        .ok_or_else(|| NdwtError::UnknownFilter {
            name: name.to_string(),
            supported: supported_names(),
        })?;
    let h = entry.taps.to_vec();
    let g = derive_qmf(&h)?;
    Ok(WaveletFilter {
        name: entry.name.to_string(),
        family: entry.family,
        vanishing_moments: entry.vanishing_moments,
        h,
        g,
    })
}

/// High-pass quadrature mirror of `h`: `g[k] = (-1)^k h[L-1-k]`.
pub fn derive_qmf(h: &[f64]) -> Result<Vec<f64>> {
    if h.is_empty() {
        return Err(NdwtError::InvalidArgument(
            "cannot derive a QMF from an empty filter".into(),
        ));
    }
    let last = h.len() - 1;
    Ok((0..h.len())
        .map(|k| {
            let v = h[last - k];
            if k % 2 == 0 {
                v
            } else {
                -v
            }
        })
        .collect())
}

/// A filter dilated by repeated zero insertion.
#[derive(Clone, Debug, PartialEq)]
pub struct DilatedFilter {
    pub base_len: usize,
    pub order: u32,
    pub taps: Vec<f64>,
}

impl DilatedFilter {
    /// Distance between consecutive base taps, `2^order`.
    pub fn stride(&self) -> usize {
        1usize << self.order
    }
}

/// Insert one zero between every pair of adjacent taps, `r` times over.
/// The result has length `2^r (L - 1) + 1`.
pub fn dilate_filter(f: &[f64], r: u32) -> DilatedFilter {
    let mut taps = f.to_vec();
    for _ in 0..r {
        if taps.len() < 2 {
            break;
        }
        let mut next = Vec::with_capacity(2 * taps.len() - 1);
        for (i, &t) in taps.iter().enumerate() {
            if i > 0 {
                next.push(0.0);
            }
            next.push(t);
        }
        taps = next;
    }
    DilatedFilter {
        base_len: f.len(),
        order: r,
        taps,
    }
}
