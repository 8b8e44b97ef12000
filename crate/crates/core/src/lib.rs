//! Non-decimated wavelet transforms in matrix form.
//!
//! The transform of a length-`m` signal at depth `p` is the product of an
//! explicit `(p+1)m x m` matrix `W` with the signal. A diagonal weight
//! matrix `T` makes `W' T W` the identity, so inversion is a second matrix
//! product. Two-dimensional inputs use `W1 A W2'` with independent row and
//! column filters and depths (the scale-mixing transform).
//!
//! ```
//! use ndwt::{build_ndwt_matrix, build_weight_matrix, forward_1d, get_filter, inverse_1d};
//!
//! let filter = get_filter("db4").unwrap();
//! let w = build_ndwt_matrix(&filter, 37, 3, 0).unwrap();
//! let t = build_weight_matrix(37, 3).unwrap();
//! let y: Vec<f64> = (0..37).map(|i| (i as f64 * 0.3).sin()).collect();
//! let d = forward_1d(&w, &y).unwrap();
//! let back = inverse_1d(&w, &t, &d).unwrap();
//! assert!(y.iter().zip(&back).all(|(a, b)| (a - b).abs() < 1e-12));
//! ```

pub mod analysis;
pub mod bench;
pub mod denoise;
pub mod error;
pub mod filter_bank;
pub mod io;
pub mod ndwt_matrix;
pub mod par;
pub mod siggen;
pub mod transforms;

pub use error::{NdwtError, Result};
pub use filter_bank::{derive_qmf, dilate_filter, get_filter, supported_names, Family, WaveletFilter};
pub use ndwt_matrix::{
    block_labels, build_level_matrices, build_ndwt_matrix, build_orthonormal_matrix, build_weight_matrix,
    detail_block_index, BlockLabel, MemoryGuard, NdwtMatrix, WeightMatrix,
};
pub use transforms::{
    atrous_forward_1d, atrous_forward_2d, forward_1d, forward_1d_batch, forward_2d, inverse_1d, inverse_2d,
    standard_ndwt_2d, CoefficientGrid2D, CoefficientKind, CoefficientStack1D, StandardGrid2D,
};
