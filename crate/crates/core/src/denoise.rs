//! Hard-threshold shrinkage of NDWT detail coefficients.

use ndarray::Array2;
use serde::Serialize;

use crate::error::{NdwtError, Result};
use crate::filter_bank::{get_filter, WaveletFilter};
use crate::ndwt_matrix::{build_weight_matrix, MemoryGuard, NdwtMatrix, WeightMatrix};
use crate::transforms::{forward_1d, forward_2d, inverse_1d, inverse_2d, CoefficientKind, CoefficientStack1D};

/// Universal threshold variants. Both use the natural logarithm.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub enum ThresholdRule {
    /// `sqrt(2 ln m) * sigma`
    #[default]
    #[serde(rename = "text-rule")]
    Universal,
    /// `sqrt(2 ln(p m)) * sigma`, as used by the Doppler demo.
    #[serde(rename = "demo-rule")]
    DepthScaled,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DenoiseConfig {
    pub filter: WaveletFilter,
    pub depth: usize,
    pub shift: i64,
    pub rule: ThresholdRule,
    /// Skips estimation when set.
    pub sigma: Option<f64>,
}

impl DenoiseConfig {
    pub fn new(filter: &str, depth: usize) -> Result<Self> {
        if depth == 0 {
            return Err(NdwtError::InvalidArgument("depth must be at least 1".into()));
        }
        Ok(Self {
            filter: get_filter(filter)?,
            depth,
            shift: 0,
            rule: ThresholdRule::default(),
            sigma: None,
        })
    }

    pub fn with_rule(mut self, rule: ThresholdRule) -> Self {
        self.rule = rule;
        self
    }

    pub fn with_shift(mut self, shift: i64) -> Self {
        self.shift = shift;
        self
    }

    pub fn with_sigma(mut self, sigma: Option<f64>) -> Self {
        self.sigma = sigma;
        self
    }
}

/// `floor(log2 m) - 1`, clamped to at least 1.
pub fn default_depth(m: usize) -> usize {
    let j = usize::BITS - 1 - m.max(1).leading_zeros();
    (j as usize).saturating_sub(1).max(1)
}

fn sample_variance(xs: impl Iterator<Item = f64> + Clone) -> f64 {
    let (n, sum) = xs.clone().fold((0usize, 0.0), |(n, s), x| (n + 1, s + x));
    let mean = sum / n as f64;
    xs.map(|x| (x - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0)
}

/// Noise level from the finest detail level: the root of the average of the
/// sample variances (n - 1 denominator) of even- and odd-position
/// coefficients.
pub fn estimate_sigma(finest_detail: &[f64]) -> Result<f64> {
    if finest_detail.len() < 4 {
        return Err(NdwtError::InvalidArgument(format!(
            "sigma estimation needs at least 4 coefficients, got {}",
            finest_detail.len()
        )));
    }
    let even = finest_detail.iter().step_by(2).copied();
    let odd = finest_detail.iter().skip(1).step_by(2).copied();
    Ok(((sample_variance(even) + sample_variance(odd)) / 2.0).sqrt())
}

pub fn universal_threshold(m: usize, sigma: f64, rule: ThresholdRule, depth: usize) -> f64 {
    let count = match rule {
        ThresholdRule::Universal => m as f64,
        ThresholdRule::DepthScaled => (depth * m) as f64,
    };
    (2.0 * count.ln()).sqrt() * sigma
}

/// Zeroes every detail coefficient with `|x| <= threshold`; the coarse block
/// is left alone.
pub fn hard_threshold(stack: &CoefficientStack1D, threshold: f64) -> CoefficientStack1D {
    let mut out = stack.clone();
    for level in 1..=stack.depth() {
        for x in out.detail_mut(level) {
            if x.abs() <= threshold {
                *x = 0.0;
            }
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DenoiseOutcome {
    #[serde(skip)]
    pub signal: Vec<f64>,
    pub sigma: f64,
    pub threshold: f64,
    /// Fraction of detail coefficients that survived thresholding.
    pub retained_fraction: f64,
}

/// Precomputed `W` and `T` for denoising many signals of one length.
#[derive(Clone, Debug)]
pub struct Denoiser {
    config: DenoiseConfig,
    w: NdwtMatrix,
    t: WeightMatrix,
}

impl Denoiser {
    pub fn new(config: DenoiseConfig, m: usize, guard: &MemoryGuard) -> Result<Self> {
        if m < 4 {
            return Err(NdwtError::InvalidArgument(format!(
                "denoising needs at least 4 samples, got {m}"
            )));
        }
        let w = NdwtMatrix::build(&config.filter, m, config.depth, config.shift, guard)?;
        let t = build_weight_matrix(m, config.depth)?;
        Ok(Self { config, w, t })
    }

    pub fn matrix(&self) -> &NdwtMatrix {
        &self.w
    }

    pub fn denoise(&self, signal: &[f64]) -> Result<DenoiseOutcome> {
        let coeffs = forward_1d(&self.w, signal)?;
        let sigma = match self.config.sigma {
            Some(s) if s >= 0.0 => s,
            Some(s) => return Err(NdwtError::InvalidArgument(format!("sigma must be >= 0, got {s}"))),
            None => estimate_sigma(coeffs.finest_detail())?,
        };
        let threshold = universal_threshold(signal.len(), sigma, self.config.rule, self.config.depth);
        let kept = hard_threshold(&coeffs, threshold);
        let details = (self.config.depth * signal.len()) as f64;
        let retained = (1..=kept.depth())
            .flat_map(|l| kept.detail(l).iter())
            .filter(|x| **x != 0.0)
            .count() as f64;
        Ok(DenoiseOutcome {
            signal: inverse_1d(&self.w, &self.t, &kept)?,
            sigma,
            threshold,
            retained_fraction: retained / details,
        })
    }
}

/// Forward transform, noise estimate on the finest level, threshold, hard
/// shrinkage of all details, inverse transform.
pub fn denoise_1d(signal: &[f64], config: &DenoiseConfig) -> Result<DenoiseOutcome> {
    Denoiser::new(config.clone(), signal.len(), &MemoryGuard::default())?.denoise(signal)
}

/// Same pipeline on the scale-mixing 2-D grid. The noise level comes from
/// the finest diagonal block and the threshold uses `m n` samples. Both axes
/// share the configured filter and depth.
pub fn denoise_2d(image: &Array2<f64>, config: &DenoiseConfig, guard: &MemoryGuard) -> Result<DenoiseOutcome> {
    let (m, n) = image.dim();
    let w1 = NdwtMatrix::build(&config.filter, m, config.depth, config.shift, guard)?;
    let w2 = NdwtMatrix::build(&config.filter, n, config.depth, config.shift, guard)?;
    let t1 = build_weight_matrix(m, config.depth)?;
    let t2 = build_weight_matrix(n, config.depth)?;
    let mut grid = forward_2d(&w1, &w2, image)?;
    let sigma = match config.sigma {
        Some(s) => s,
        None => {
            let finest: Vec<f64> = grid
                .diagonal_block(1)
                .expect("depth >= 1")
                .iter()
                .copied()
                .collect();
            estimate_sigma(&finest)?
        }
    };
    let threshold = universal_threshold(m * n, sigma, config.rule, config.depth);
    let mut total = 0usize;
    let mut retained = 0usize;
    for (rb, cb, tag) in grid.tags() {
        if tag.kind == CoefficientKind::C {
            continue;
        }
        for x in grid.block_mut(rb, cb).iter_mut() {
            total += 1;
            if x.abs() <= threshold {
                *x = 0.0;
            } else {
                retained += 1;
            }
        }
    }
    let out = inverse_2d(&w1, &t1, &grid, &t2, &w2)?;
    Ok(DenoiseOutcome {
        signal: out.iter().copied().collect(),
        sigma,
        threshold,
        retained_fraction: retained as f64 / total.max(1) as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::siggen::{doppler, gaussian_noise};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn sigma_examples() {
        assert_eq!(estimate_sigma(&[0.7; 10]).unwrap(), 0.0);
        let alternating: Vec<f64> = (0..20).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        assert_eq!(estimate_sigma(&alternating).unwrap(), 0.0);
        assert!(estimate_sigma(&[1.0, 2.0, 3.0]).is_err());
        // even (1, 3) var 2, odd (2, 6) var 8 -> sqrt(5)
        assert_abs_diff_eq!(estimate_sigma(&[1.0, 2.0, 3.0, 6.0]).unwrap(), 5f64.sqrt(), epsilon = 1e-15);
    }

    #[test]
    fn sigma_is_calibrated_on_white_noise() {
        let sigma = 0.7;
        let mut mean = 0.0;
        for seed in 0..50 {
            let x = gaussian_noise(10_000, sigma, seed).unwrap();
            let s = estimate_sigma(&x).unwrap();
            assert!((s - sigma).abs() / sigma < 0.05);
            mean += s / 50.0;
        }
        assert!((mean - sigma).abs() / sigma < 0.01);
    }

    #[test]
    fn threshold_examples() {
        let expected = (2.0 * 250f64.ln()).sqrt() * 0.05;
        assert_abs_diff_eq!(
            universal_threshold(250, 0.05, ThresholdRule::Universal, 6),
            expected,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(expected, 0.16615, epsilon = 5e-6);
        assert_eq!(universal_threshold(250, 0.0, ThresholdRule::Universal, 6), 0.0);
        assert_abs_diff_eq!(
            universal_threshold(250, 0.05, ThresholdRule::DepthScaled, 6),
            (2.0 * 1500f64.ln()).sqrt() * 0.05,
            epsilon = 1e-15
        );
    }

    fn stack(details: &[f64], coarse: &[f64]) -> CoefficientStack1D {
        let mut data = coarse.to_vec();
        data.extend_from_slice(details);
        CoefficientStack1D::new(data, coarse.len(), 1, "haar", 0).unwrap()
    }

    #[test]
    fn hard_threshold_examples() {
        let s = stack(&[0.1, -0.2, 0.3], &[0.05, 9.0, -0.01]);
        let t = hard_threshold(&s, 0.15);
        assert_eq!(t.detail(1), &[0.0, -0.2, 0.3]);
        assert_eq!(t.coarse(), s.coarse());
        let z = stack(&[0.0, -0.2, 1e-300], &[1.0, 2.0, 3.0]);
        assert_eq!(hard_threshold(&z, 0.0), z);
        let all = hard_threshold(&s, f64::INFINITY);
        assert_eq!(all.detail(1), &[0.0; 3]);
        assert_eq!(all.coarse(), s.coarse());
    }

    #[test]
    fn default_depth_follows_log2() {
        assert_eq!(default_depth(250), 6);
        assert_eq!(default_depth(256), 7);
        assert_eq!(default_depth(4), 1);
    }

    #[test]
    fn smooth_signal_passes_through() {
        let m = 1024;
        let s: Vec<f64> = (0..m)
            .map(|i| (2.0 * std::f64::consts::PI * i as f64 / m as f64).sin())
            .collect();
        let cfg = DenoiseConfig::new("db8", 4).unwrap();
        let out = denoise_1d(&s, &cfg).unwrap();
        let err = s.iter().zip(&out.signal).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(err < 1e-6, "{err}");
    }

    #[test]
    fn zero_in_zero_out() {
        let cfg = DenoiseConfig::new("haar", 3).unwrap();
        let out = denoise_1d(&[0.0; 64], &cfg).unwrap();
        assert!(out.signal.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn pure_noise_loses_energy() {
        let cfg = DenoiseConfig::new("db4", 5).unwrap();
        let d = Denoiser::new(cfg, 256, &MemoryGuard::default()).unwrap();
        for seed in 0..20 {
            let x = gaussian_noise(256, 1.0, seed).unwrap();
            let out = d.denoise(&x).unwrap();
            let ein: f64 = x.iter().map(|v| v * v).sum();
            let eout: f64 = out.signal.iter().map(|v| v * v).sum();
            assert!(eout < ein);
        }
    }

    #[test]
    fn doppler_with_known_sigma_beats_noise_variance() {
        let m = 250;
        let clean = doppler(m).unwrap();
        let cfg = DenoiseConfig::new("haar", default_depth(m)).unwrap().with_sigma(Some(0.05));
        let d = Denoiser::new(cfg, m, &MemoryGuard::default()).unwrap();
        let wins = (0..100)
            .filter(|&seed| {
                let noise = gaussian_noise(m, 0.05, seed).unwrap();
                let noisy: Vec<f64> = clean.iter().zip(&noise).map(|(a, b)| a + b).collect();
                let out = d.denoise(&noisy).unwrap();
                let mse = clean.iter().zip(&out.signal).map(|(a, b)| (a - b).powi(2)).sum::<f64>() / m as f64;
                mse < 0.05 * 0.05
            })
            .count();
        assert!(wins >= 90, "{wins}");
    }

    #[test]
    fn explicit_sigma_overrides_estimate() {
        let x = gaussian_noise(64, 1.0, 3).unwrap();
        let cfg = DenoiseConfig::new("haar", 3).unwrap().with_sigma(Some(0.0));
        let out = denoise_1d(&x, &cfg).unwrap();
        assert_eq!(out.threshold, 0.0);
        let err = x.iter().zip(&out.signal).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(err < 1e-9);
        let bad = DenoiseConfig::new("haar", 3).unwrap().with_sigma(Some(-1.0));
        assert!(denoise_1d(&x, &bad).is_err());
    }

    #[test]
    fn two_dim_plumbing_reduces_noise() {
        let (m, n) = (32, 40);
        let clean = Array2::from_shape_fn((m, n), |(i, j)| ((i as f64) / 9.0).sin() + ((j as f64) / 13.0).cos());
        let noise = crate::siggen::gaussian_noise_2d(m, n, 0.1, 1).unwrap();
        let noisy = &clean + &noise;
        let cfg = DenoiseConfig::new("haar", 3).unwrap();
        let out = denoise_2d(&noisy, &cfg, &MemoryGuard::default()).unwrap();
        let mse_in = noise.iter().map(|v| v * v).sum::<f64>();
        let mse_out: f64 = clean.iter().zip(&out.signal).map(|(a, b)| (a - b).powi(2)).sum();
        assert!(mse_out < mse_in);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn hard_threshold_is_idempotent(
            values in prop::collection::vec(-2.0f64..2.0, 12),
            lambda in 0.0f64..1.5,
        ) {
            let s = CoefficientStack1D::new(values, 4, 2, "haar", 0).unwrap();
            let once = hard_threshold(&s, lambda);
            prop_assert_eq!(hard_threshold(&once, lambda), once);
        }

        #[test]
        fn even_shifts_commute_with_denoising(seed in any::<u64>(), half in 0usize..32) {
            let m = 64;
            let x = gaussian_noise(m, 1.0, seed).unwrap();
            let cfg = DenoiseConfig::new("db4", 3).unwrap();
            let d = Denoiser::new(cfg, m, &MemoryGuard::default()).unwrap();
            let base = d.denoise(&x).unwrap().signal;
            let mut shifted = x.clone();
            shifted.rotate_right(2 * half);
            let moved = d.denoise(&shifted).unwrap().signal;
            let mut expected = base.clone();
            expected.rotate_right(2 * half);
            for (a, b) in expected.iter().zip(&moved) {
                prop_assert!((a - b).abs() < 1e-9);
            }
        }
    }
}
