//! Seeded synthetic signals.
//!
//! Every stochastic generator draws from `ChaCha8Rng::seed_from_u64(seed)`
//! and produces normals with the ziggurat sampler of `rand_distr`, so output
//! is reproducible across platforms for a fixed seed.

use std::f64::consts::PI;

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::error::{NdwtError, Result};

pub const RNG_ALGORITHM: &str = "chacha8";

/// Seed plus algorithm tag, recorded next to generated artifacts.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct SeededGenerator {
    pub seed: u64,
    pub algorithm: &'static str,
}

impl SeededGenerator {
    pub fn new(seed: u64) -> Self {
        Self { seed, algorithm: RNG_ALGORITHM }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed)
    }
}

/// `sqrt(t (1 - t)) sin(2.1 pi / (t + 0.05))` sampled at `t = k/m`, `k = 1..=m`.
pub fn doppler(m: usize) -> Result<Vec<f64>> {
    if m < 2 {
        return Err(NdwtError::InvalidArgument(format!("doppler needs m >= 2, got {m}")));
    }
    Ok((1..=m)
        .map(|k| {
            let t = k as f64 / m as f64;
            (t * (1.0 - t)).sqrt() * (2.0 * PI * 1.05 / (t + 0.05)).sin()
        })
        .collect())
}

fn check_sigma(sigma: f64) -> Result<()> {
    if sigma.is_finite() && sigma >= 0.0 {
        Ok(())
    } else {
        Err(NdwtError::InvalidArgument(format!("sigma must be finite and >= 0, got {sigma}")))
    }
}

fn normals(rng: &mut ChaCha8Rng, count: usize) -> Vec<f64> {
    (0..count).map(|_| rng.sample::<f64, _>(StandardNormal)).collect()
}

pub fn gaussian_noise(m: usize, sigma: f64, seed: u64) -> Result<Vec<f64>> {
    check_sigma(sigma)?;
    let mut rng = SeededGenerator::new(seed).rng();
    Ok(normals(&mut rng, m).into_iter().map(|z| z * sigma).collect())
}

pub fn gaussian_noise_2d(m: usize, n: usize, sigma: f64, seed: u64) -> Result<Array2<f64>> {
    let v = gaussian_noise(m * n, sigma, seed)?;
    Ok(Array2::from_shape_vec((m, n), v).expect("length matches shape"))
}

fn check_hurst(h: f64) -> Result<()> {
    if h > 0.0 && h < 1.0 {
        Ok(())
    } else {
        Err(NdwtError::InvalidArgument(format!("Hurst exponent must lie in (0, 1), got {h}")))
    }
}

/// Relative tolerance below which negative embedding eigenvalues are treated
/// as rounding noise and clipped to zero.
const EIGEN_TOLERANCE: f64 = 1e-9;

fn sqrt_eigenvalues(eig: &[f64], scale: f64, what: &str) -> Result<Vec<f64>> {
    let top = eig.iter().copied().fold(0.0, f64::max);
    let low = eig.iter().copied().fold(f64::INFINITY, f64::min);
    if low < -EIGEN_TOLERANCE * top {
        return Err(NdwtError::Embedding(format!(
            "{what}: min eigenvalue {low:.3e}, max {top:.3e}"
        )));
    }
    Ok(eig.iter().map(|l| (l.max(0.0) * scale).sqrt()).collect())
}

/// Fractional Brownian motion at `t = k/m`, `k = 0..m`, with `B(0) = 0`.
///
/// Increments are fractional Gaussian noise drawn exactly by circulant
/// embedding of their autocovariance, then rescaled to step `1/m`.
pub fn fbm_1d(m: usize, hurst: f64, seed: u64) -> Result<Vec<f64>> {
    check_hurst(hurst)?;
    if m == 0 {
        return Err(NdwtError::InvalidArgument("fbm_1d needs m >= 1".into()));
    }
    let n = m - 1;
    if n == 0 {
        return Ok(vec![0.0]);
    }
    let two_h = 2.0 * hurst;
    let gamma = |k: usize| {
        let k = k as f64;
        0.5 * ((k + 1.0).powf(two_h) - 2.0 * k.powf(two_h) + (k - 1.0).abs().powf(two_h))
    };
    // circulant of size 2n: gamma(0..=n), gamma(n-1..=1)
    let size = 2 * n;
    let mut row: Vec<Complex<f64>> = (0..size)
        .map(|k| Complex::new(gamma(if k <= n { k } else { size - k }), 0.0))
        .collect();
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(size);
    fft.process(&mut row);
    let eig: Vec<f64> = row.iter().map(|c| c.re).collect();
    let lam = sqrt_eigenvalues(&eig, 1.0 / size as f64, "fbm_1d")?;

    let mut rng = SeededGenerator::new(seed).rng();
    let mut buf: Vec<Complex<f64>> = lam
        .iter()
        .map(|l| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            Complex::new(re, im) * *l
        })
        .collect();
    fft.process(&mut buf);

    let step = (1.0 / m as f64).powf(hurst);
    let mut out = Vec::with_capacity(m);
    let mut acc = 0.0;
    out.push(0.0);
    for c in buf.iter().take(n) {
        acc += c.re * step;
        out.push(acc);
    }
    Ok(out)
}

fn fft2_in_place(data: &mut [Complex<f64>], rows: usize, cols: usize, planner: &mut FftPlanner<f64>) {
    let row_fft = planner.plan_fft_forward(cols);
    for r in data.chunks_exact_mut(cols) {
        row_fft.process(r);
    }
    let col_fft = planner.plan_fft_forward(rows);
    let mut column = vec![Complex::new(0.0, 0.0); rows];
    for c in 0..cols {
        for r in 0..rows {
            column[r] = data[r * cols + c];
        }
        col_fft.process(&mut column);
        for r in 0..rows {
            data[r * cols + c] = column[r];
        }
    }
}

/// Coefficients of the compactly supported covariance used by the intrinsic
/// embedding: `(R, beta, c0, c2)`.
fn stein_coefficients(alpha: f64) -> (f64, f64, f64, f64) {
    if alpha <= 1.5 {
        (1.0, 0.0, 1.0 - alpha / 2.0, alpha / 2.0)
    } else {
        let r = 2.0;
        let beta = alpha * (2.0 - alpha) / (3.0 * r * (r * r - 1.0));
        let c2 = (alpha - beta * (r - 1.0).powi(2) * (r + 2.0)) / 2.0;
        let c0 = beta * (r - 1.0).powi(3) + 1.0 - c2;
        (r, beta, c0, c2)
    }
}

fn stein_rho(dist: f64, alpha: f64, coef: (f64, f64, f64, f64)) -> f64 {
    let (r_max, beta, c0, c2) = coef;
    if dist <= 1.0 {
        c0 - dist.powf(alpha) + c2 * dist * dist
    } else if dist <= r_max {
        beta * (r_max - dist).powi(3) / dist
    } else {
        0.0
    }
}

/// Isotropic fractional Brownian field sampled at `(i/M, j/M)` for
/// `i < m`, `j < n`, with `M = max(m, n)` and value 0 at the origin.
///
/// Uses the intrinsic (Stein) embedding: a stationary field with a compactly
/// supported covariance is drawn exactly on a torus by FFT, and a random
/// linear term restores the fractional increments. The field is built on a
/// grid whose points are all within unit distance, then rescaled by
/// self-similarity so increments satisfy `Var(X(x) - X(y)) = |x - y|^(2H)`.
pub fn fbf_2d(m: usize, n: usize, hurst: f64, seed: u64) -> Result<Array2<f64>> {
    check_hurst(hurst)?;
    if m < 2 || n < 2 {
        return Err(NdwtError::InvalidArgument(format!("fbf_2d needs m, n >= 2, got {m}x{n}")));
    }
    let alpha = 2.0 * hurst;
    let coef = stein_coefficients(alpha);
    let big = m.max(n);
    let delta = 1.0 / (std::f64::consts::SQRT_2 * (big - 1) as f64);
    // base grid spans [0, R] in each axis so the torus has period 2R
    let base = ((coef.0 / delta).ceil() as usize + 1).max(big);
    let size = 2 * (base - 1);

    let mut row: Vec<Complex<f64>> = Vec::with_capacity(size * size);
    for a in 0..size {
        let da = a.min(size - a) as f64;
        for b in 0..size {
            let db = b.min(size - b) as f64;
            let dist = delta * (da * da + db * db).sqrt();
            row.push(Complex::new(stein_rho(dist, alpha, coef), 0.0));
        }
    }
    let mut planner = FftPlanner::new();
    fft2_in_place(&mut row, size, size, &mut planner);
    let eig: Vec<f64> = row.iter().map(|c| c.re).collect();
    let lam = sqrt_eigenvalues(&eig, 1.0 / (size * size) as f64, "fbf_2d").map_err(|e| match e {
        NdwtError::Embedding(msg) => NdwtError::Embedding(format!("{msg}; try a smaller grid or a lower Hurst exponent")),
        other => other,
    })?;

    let mut rng = SeededGenerator::new(seed).rng();
    let mut field: Vec<Complex<f64>> = lam
        .iter()
        .map(|l| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            Complex::new(re, im) * *l
        })
        .collect();
    fft2_in_place(&mut field, size, size, &mut planner);
    let n1: f64 = rng.sample(StandardNormal);
    let n2: f64 = rng.sample(StandardNormal);
    let kappa = (2.0 * coef.3).sqrt();
    let origin = field[0].re;
    let rescale = (1.0 / (big as f64 * delta)).powf(hurst) / std::f64::consts::SQRT_2;
    Ok(Array2::from_shape_fn((m, n), |(i, j)| {
        let x1 = i as f64 * delta;
        let x2 = j as f64 * delta;
        (field[i * size + j].re - origin + kappa * (x1 * n1 + x2 * n2)) * rescale
    }))
}

/// Deterministic test image on `x = i/m`, `y = j/n`:
///
/// ```text
/// f = sin(2 pi x) cos(2 pi y) + 0.5 cos(2 pi (x + 2y)) + 0.25 sin(4 pi x) + 0.2 (x + y)
/// ```
pub fn smooth_test_image(m: usize, n: usize) -> Result<Array2<f64>> {
    if m < 16 || n < 16 {
        return Err(NdwtError::InvalidArgument(format!(
            "smooth_test_image needs m, n >= 16, got {m}x{n}"
        )));
    }
    Ok(Array2::from_shape_fn((m, n), |(i, j)| {
        let x = i as f64 / m as f64;
        let y = j as f64 / n as f64;
        (2.0 * PI * x).sin() * (2.0 * PI * y).cos()
            + 0.5 * (2.0 * PI * (x + 2.0 * y)).cos()
            + 0.25 * (4.0 * PI * x).sin()
            + 0.2 * (x + y)
    }))
}
