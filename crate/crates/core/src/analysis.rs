//! Wavelet spectra, Hurst exponent estimation and compressibility metrics.

use num_rational::Ratio;
use serde::Serialize;

use crate::error::{NdwtError, Result};
use crate::transforms::{CoefficientGrid2D, CoefficientStack1D};

/// One spectrum point. `level` grows toward finer scales; `energy` is the
/// base-2 log of the mean squared detail coefficient.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SpectrumPoint {
    pub level: i32,
    pub energy: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Spectrum {
    pub points: Vec<SpectrumPoint>,
    /// Inclusive level range used for the regression.
    pub fit_range: (i32, i32),
    pub slope: f64,
    pub intercept: f64,
    /// Present only for 2-D diagonal spectra.
    pub hurst: Option<f64>,
    pub log_base: u32,
}

fn log2_mean_square<'a>(values: impl Iterator<Item = &'a f64>) -> f64 {
    let (sum, count) = values.fold((0.0, 0usize), |(s, c), v| (s + v * v, c + 1));
    (sum / count as f64).log2()
}

/// Spectrum over the diagonal hierarchy of a square-depth scale-mixing grid:
/// for each matched scale `(j, j)` the log2 mean squared coefficient of that
/// d-type block. Points are labeled `p + 1 - j`, so the finest block gets
/// the largest level.
pub fn wavelet_spectra_2d(grid: &CoefficientGrid2D) -> Result<Vec<SpectrumPoint>> {
    let (p1, p2) = grid.depths();
    if p1 != p2 {
        return Err(NdwtError::InvalidArgument(format!(
            "diagonal spectra need equal row and column depths, got {p1} and {p2}"
        )));
    }
    let p = p1;
    let mut points: Vec<SpectrumPoint> = (1..=p)
        .map(|j| {
            let block = grid.diagonal_block(j).expect("level within depth");
            SpectrumPoint {
                level: (p + 1 - j) as i32,
                energy: log2_mean_square(block.iter()),
            }
        })
        .collect();
    points.sort_by_key(|pt| pt.level);
    Ok(points)
}

/// 1-D spectrum of the detail levels of a stack, same level labeling.
pub fn wavelet_spectra_1d(stack: &CoefficientStack1D) -> Vec<SpectrumPoint> {
    let p = stack.depth();
    let mut points: Vec<SpectrumPoint> = (1..=p)
        .map(|j| SpectrumPoint {
            level: (p + 1 - j) as i32,
            energy: log2_mean_square(stack.detail(j).iter()),
        })
        .collect();
    points.sort_by_key(|pt| pt.level);
    points
}

/// Drops the coarsest and finest level when at least four are available.
pub fn default_fit_range(points: &[SpectrumPoint]) -> Option<(i32, i32)> {
    let lo = points.iter().map(|p| p.level).min()?;
    let hi = points.iter().map(|p| p.level).max()?;
    if points.len() >= 4 {
        Some((lo + 1, hi - 1))
    } else {
        Some((lo, hi))
    }
}

/// Ordinary least squares of energy on level over `fit_range`.
pub fn fit_spectrum(points: &[SpectrumPoint], fit_range: (i32, i32)) -> Result<LinearFit> {
    let sel: Vec<&SpectrumPoint> = points
        .iter()
        .filter(|p| p.level >= fit_range.0 && p.level <= fit_range.1)
        .collect();
    if sel.len() < 2 {
        return Err(NdwtError::InvalidArgument(format!(
            "fit range {}..={} covers {} level(s); at least 2 are needed",
            fit_range.0,
            fit_range.1,
            sel.len()
        )));
    }
    let n = sel.len() as f64;
    let mx = sel.iter().map(|p| p.level as f64).sum::<f64>() / n;
    let my = sel.iter().map(|p| p.energy).sum::<f64>() / n;
    let sxy: f64 = sel.iter().map(|p| (p.level as f64 - mx) * (p.energy - my)).sum();
    let sxx: f64 = sel.iter().map(|p| (p.level as f64 - mx).powi(2)).sum();
    let slope = sxy / sxx;
    Ok(LinearFit {
        slope,
        intercept: my - slope * mx,
    })
}

/// Hurst exponent from a 2-D diagonal spectral slope.
pub fn hurst_from_slope(slope: f64) -> f64 {
    -(slope + 2.0) / 2.0
}

/// Fits the spectrum over `fit_range` and converts the slope.
pub fn estimate_hurst(points: &[SpectrumPoint], fit_range: (i32, i32)) -> Result<(LinearFit, f64)> {
    let fit = fit_spectrum(points, fit_range)?;
    Ok((fit, hurst_from_slope(fit.slope)))
}

/// Full diagonal-spectrum analysis of a grid; `fit_range` defaults to
/// [`default_fit_range`].
pub fn spectrum_2d(grid: &CoefficientGrid2D, fit_range: Option<(i32, i32)>) -> Result<Spectrum> {
    let points = wavelet_spectra_2d(grid)?;
    let range = match fit_range {
        Some(r) => r,
        None => default_fit_range(&points)
            .ok_or_else(|| NdwtError::InvalidArgument("empty spectrum".into()))?,
    };
    let (fit, hurst) = estimate_hurst(&points, range)?;
    Ok(Spectrum {
        points,
        fit_range: range,
        slope: fit.slope,
        intercept: fit.intercept,
        hurst: Some(hurst),
        log_base: 2,
    })
}

/// 1-D spectrum with slope only; no Hurst conversion is attempted.
pub fn spectrum_1d(stack: &CoefficientStack1D, fit_range: Option<(i32, i32)>) -> Result<Spectrum> {
    let points = wavelet_spectra_1d(stack);
    let range = match fit_range {
        Some(r) => r,
        None => default_fit_range(&points)
            .ok_or_else(|| NdwtError::InvalidArgument("empty spectrum".into()))?,
    };
    let fit = fit_spectrum(&points, range)?;
    Ok(Spectrum {
        points,
        fit_range: range,
        slope: fit.slope,
        intercept: fit.intercept,
        hurst: None,
        log_base: 2,
    })
}

fn normalized_energies(coefficients: &[f64]) -> Result<Vec<f64>> {
    let total: f64 = coefficients.iter().map(|d| d * d).sum();
    if total == 0.0 || !total.is_finite() {
        return Err(NdwtError::InvalidArgument(
            "coefficients have no (finite) energy to normalize".into(),
        ));
    }
    Ok(coefficients.iter().map(|d| d * d / total).collect())
}

/// Lorenz curve of energy: points `(k/n, cumulative sum of the k smallest
/// normalized squared coefficients)` for `k = 1..n`.
pub fn lorenz_curve(coefficients: &[f64]) -> Result<Vec<(f64, f64)>> {
    let mut p = normalized_energies(coefficients)?;
    p.sort_by(|a, b| a.total_cmp(b));
    let n = p.len() as f64;
    let mut acc = 0.0;
    let mut out: Vec<(f64, f64)> = p
        .iter()
        .enumerate()
        .map(|(k, pk)| {
            acc += pk;
            ((k + 1) as f64 / n, acc)
        })
        .collect();
    // pin the end point against accumulated rounding
    if let Some(last) = out.last_mut() {
        *last = (1.0, 1.0);
    }
    Ok(out)
}

/// `-sum p log p / log n` over normalized squared coefficients, with
/// `0 log 0 = 0`.
pub fn normalized_entropy(coefficients: &[f64]) -> Result<f64> {
    if coefficients.len() < 2 {
        return Err(NdwtError::InvalidArgument(
            "entropy needs at least two coefficients".into(),
        ));
    }
    let p = normalized_energies(coefficients)?;
    let h: f64 = p.iter().filter(|&&x| x > 0.0).map(|x| -x * x.ln()).sum();
    Ok((h / (coefficients.len() as f64).ln()).clamp(0.0, 1.0))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TransformMode {
    ScaleMixing,
    Standard,
}

/// Share of d-type coefficients for depth `p`: `p^2 / (p+1)^2` for the
/// scale-mixing layout, `p / (3p+1)` for the standard one.
pub fn d_type_proportion(p: u64, mode: TransformMode) -> Result<Ratio<u64>> {
    if p == 0 {
        return Err(NdwtError::InvalidArgument("depth must be at least 1".into()));
    }
    Ok(match mode {
        TransformMode::ScaleMixing => Ratio::new(p * p, (p + 1) * (p + 1)),
        TransformMode::Standard => Ratio::new(p, 3 * p + 1),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CompressReport {
    pub mode: TransformMode,
    pub coefficient_count: usize,
    pub entropy: f64,
    pub d_proportion: String,
    /// Lorenz curve sampled at evenly spaced fractions.
    pub lorenz: Vec<(f64, f64)>,
}

/// Entropy, d-type share and a subsampled Lorenz curve for one transform.
pub fn compress_report(
    coefficients: &[f64],
    depth: u64,
    mode: TransformMode,
    lorenz_samples: usize,
) -> Result<CompressReport> {
    let curve = lorenz_curve(coefficients)?;
    let n = curve.len();
    let samples = lorenz_samples.clamp(2, n.max(2));
    let mut lorenz: Vec<(f64, f64)> = (1..=samples)
        .map(|s| curve[(s * n).div_ceil(samples).clamp(1, n) - 1])
        .collect();
    lorenz.dedup();
    let ratio = d_type_proportion(depth, mode)?;
    Ok(CompressReport {
        mode,
        coefficient_count: coefficients.len(),
        entropy: normalized_entropy(coefficients)?,
        d_proportion: format!("{}/{}", ratio.numer(), ratio.denom()),
        lorenz,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use ndarray::Array2;
    use proptest::prelude::*;

    fn grid_with_diagonal(value: f64, p: usize) -> CoefficientGrid2D {
        let m = 3;
        let mut g = CoefficientGrid2D::new(
            Array2::from_elem(((p + 1) * m, (p + 1) * m), 0.5),
            (m, m),
            (p, p),
            ("haar", "haar"),
            0,
        )
        .unwrap();
        for j in 1..=p {
            let b = crate::ndwt_matrix::detail_block_index(p, j);
            g.block_mut(b, b).fill(value);
        }
        g
    }

    #[test]
    fn constant_diagonal_block_energy() {
        let pts = wavelet_spectra_2d(&grid_with_diagonal(2.0, 3)).unwrap();
        assert_eq!(pts.len(), 3);
        assert_eq!(pts.iter().map(|p| p.level).collect::<Vec<_>>(), vec![1, 2, 3]);
        for p in pts {
            assert_abs_diff_eq!(p.energy, 2.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn unequal_depths_are_rejected() {
        let g = CoefficientGrid2D::new(
            Array2::zeros((6, 8)),
            (2, 2),
            (2, 3),
            ("haar", "haar"),
            0,
        )
        .unwrap();
        assert!(wavelet_spectra_2d(&g).is_err());
    }

    #[test]
    fn scaling_the_grid_shifts_energies_uniformly() {
        let mut g = grid_with_diagonal(1.0, 4);
        for (j, v) in [(1, 0.3), (2, 1.7), (3, 4.0), (4, 9.5)] {
            let b = crate::ndwt_matrix::detail_block_index(4, j);
            g.block_mut(b, b).fill(v);
        }
        let base = spectrum_2d(&g, Some((1, 4))).unwrap();
        let alpha = 3.0;
        let mut scaled = g.clone();
        scaled.data_mut().mapv_inplace(|x| x * alpha);
        let s = spectrum_2d(&scaled, Some((1, 4))).unwrap();
        for (a, b) in base.points.iter().zip(&s.points) {
            assert_abs_diff_eq!(b.energy - a.energy, 2.0 * alpha.log2(), epsilon = 1e-12);
        }
        assert_abs_diff_eq!(base.slope, s.slope, epsilon = 1e-10);
        assert_abs_diff_eq!(base.hurst.unwrap(), s.hurst.unwrap(), epsilon = 1e-10);
    }

    fn line(slope: f64, offset: f64) -> Vec<SpectrumPoint> {
        (1..=6)
            .map(|l| SpectrumPoint {
                level: l,
                energy: offset + slope * l as f64,
            })
            .collect()
    }

    #[test]
    fn hurst_from_reported_slope() {
        assert_abs_diff_eq!(hurst_from_slope(-2.6722), 0.3361, epsilon = 1e-12);
        let (fit, h) = estimate_hurst(&line(-2.0, 5.0), (1, 6)).unwrap();
        assert_abs_diff_eq!(fit.slope, -2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(h, 0.0, epsilon = 1e-12);
        let (_, h) = estimate_hurst(&line(-4.0, 1.0), (2, 5)).unwrap();
        assert_abs_diff_eq!(h, 1.0, epsilon = 1e-12);
        assert!(estimate_hurst(&line(-3.0, 0.0), (3, 3)).is_err());
    }

    #[test]
    fn default_range_trims_extremes() {
        assert_eq!(default_fit_range(&line(-3.0, 0.0)), Some((2, 5)));
        assert_eq!(default_fit_range(&line(-3.0, 0.0)[..3]), Some((1, 3)));
    }

    #[test]
    fn lorenz_examples() {
        let uniform = lorenz_curve(&[2.0, -2.0, 2.0, 2.0]).unwrap();
        for (k, (x, y)) in uniform.iter().enumerate() {
            assert_abs_diff_eq!(*x, (k + 1) as f64 / 4.0, epsilon = 1e-15);
            assert_abs_diff_eq!(*y, (k + 1) as f64 / 4.0, epsilon = 1e-15);
        }
        let point = lorenz_curve(&[0.0, 0.0, 5.0]).unwrap();
        assert_eq!(point.iter().map(|p| p.1).collect::<Vec<_>>(), vec![0.0, 0.0, 1.0]);
        let c = lorenz_curve(&[1.0, 1.0, 2f64.sqrt()]).unwrap();
        for (got, want) in c.iter().map(|p| p.1).zip([0.25, 0.5, 1.0]) {
            assert_abs_diff_eq!(got, want, epsilon = 1e-15);
        }
        assert!(lorenz_curve(&[0.0, 0.0]).is_err());
    }

    #[test]
    fn entropy_examples() {
        assert_abs_diff_eq!(normalized_entropy(&[1.0; 16]).unwrap(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(normalized_entropy(&[0.0, 3.0, 0.0]).unwrap(), 0.0, epsilon = 1e-15);
        assert!(normalized_entropy(&[0.0; 4]).is_err());
        assert!(normalized_entropy(&[1.0]).is_err());
    }

    #[test]
    fn proportions_match_the_closed_forms() {
        assert_eq!(d_type_proportion(3, TransformMode::ScaleMixing).unwrap(), Ratio::new(9, 16));
        assert_eq!(d_type_proportion(3, TransformMode::Standard).unwrap(), Ratio::new(3, 10));
        assert_eq!(
            d_type_proportion(1, TransformMode::ScaleMixing).unwrap(),
            d_type_proportion(1, TransformMode::Standard).unwrap()
        );
        for p in 2..=50 {
            assert!(
                d_type_proportion(p, TransformMode::ScaleMixing).unwrap()
                    > d_type_proportion(p, TransformMode::Standard).unwrap()
            );
        }
        assert!(d_type_proportion(0, TransformMode::Standard).is_err());
    }

    #[test]
    fn report_samples_end_at_one() {
        let coefs: Vec<f64> = (1..=100).map(|i| i as f64).collect();
        let r = compress_report(&coefs, 3, TransformMode::ScaleMixing, 10).unwrap();
        assert_eq!(r.d_proportion, "9/16");
        assert_eq!(r.lorenz.len(), 10);
        assert_eq!(*r.lorenz.last().unwrap(), (1.0, 1.0));
    }

    proptest! {
        #[test]
        fn lorenz_is_monotone_and_convex(values in prop::collection::vec(-100.0f64..100.0, 2..200)) {
            prop_assume!(values.iter().any(|v| *v != 0.0));
            let c = lorenz_curve(&values).unwrap();
            prop_assert_eq!(*c.last().unwrap(), (1.0, 1.0));
            for w in c.windows(2) {
                prop_assert!(w[1].1 >= w[0].1 - 1e-15);
            }
            let ys: Vec<f64> = std::iter::once(0.0).chain(c.iter().map(|p| p.1)).collect();
            for w in ys.windows(3) {
                prop_assert!(w[2] - 2.0 * w[1] + w[0] >= -1e-12);
            }
            let e = normalized_entropy(&values).unwrap();
            prop_assert!((0.0..=1.0).contains(&e));
        }

        #[test]
        fn hurst_ignores_constant_offsets(
            energies in prop::collection::vec(-20.0f64..20.0, 4..10),
            offset in -50.0f64..50.0,
        ) {
            let pts: Vec<SpectrumPoint> = energies.iter().enumerate()
                .map(|(i, e)| SpectrumPoint { level: i as i32 + 1, energy: *e }).collect();
            let moved: Vec<SpectrumPoint> = pts.iter()
                .map(|p| SpectrumPoint { level: p.level, energy: p.energy + offset }).collect();
            let range = (1, pts.len() as i32);
            let (a, ha) = estimate_hurst(&pts, range).unwrap();
            let (b, hb) = estimate_hurst(&moved, range).unwrap();
            prop_assert!((a.slope - b.slope).abs() < 1e-9);
            prop_assert!((ha - hb).abs() < 1e-9);
        }
    }
}
