use std::fs::{self, File};
use std::io::{ErrorKind, Read, Write};
use std::path::{Path, PathBuf};

use ndarray::Array2;
use serde::Serialize;

use ndwt::analysis::{compress_report, d_type_proportion, spectrum_2d, CompressReport, Spectrum, SpectrumPoint, TransformMode};
use ndwt::bench::{run_bench, BenchConfig, BenchReport, BenchStatus};
use ndwt::denoise::{default_depth, denoise_2d, universal_threshold, DenoiseConfig, Denoiser, ThresholdRule};
use ndwt::io::{load_matrix, read_csv_matrix, save_matrix_csv, save_vector_csv, write_csv_matrix, BlockLayout, Coefficients};
use ndwt::siggen::{doppler, fbf_2d, fbm_1d, gaussian_noise, gaussian_noise_2d, smooth_test_image};
use ndwt::{
    build_weight_matrix, forward_1d, forward_2d, get_filter, inverse_1d, inverse_2d, par, standard_ndwt_2d,
    supported_names, MemoryGuard, NdwtMatrix,
};

use crate::svg::{Document, Rect, Series, Style};
use crate::{
    BenchArgs, Cli, CliError, CoefFormat, Command, CompressArgs, DemoArgs, DemoName, DenoiseArgs, Dims, Direction,
    FilterArgs, GenArgs, GenKind, ListFormat, Rule, SpectraArgs, TransformArgs,
};

type Result<T> = std::result::Result<T, CliError>;

pub const DOPPLER_DEMO_SEED: u64 = 0;

pub fn run(cli: &Cli) -> Result<()> {
    let guard = MemoryGuard::new(cli.max_elements);
    match &cli.command {
        Command::Filters { format, .. } => filters(*format),
        Command::Gen(a) => gen(a),
        Command::Transform(a) => transform(a, &guard),
        Command::Denoise(a) => denoise(a, &guard),
        Command::Spectra(a) => spectra(a, &guard),
        Command::Compress(a) => compress(a, &guard),
        Command::Bench(a) => bench(a, &guard),
        Command::Demo(a) => demo(a, &guard),
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

pub fn parse_shape(s: &str) -> Result<(usize, Option<usize>)> {
    let parse = |t: &str| {
        t.trim()
            .parse::<usize>()
            .map_err(|_| usage(format!("'{s}' is not a size (expected M or MxN)")))
    };
    match s.split_once(['x', 'X']) {
        Some((a, b)) => Ok((parse(a)?, Some(parse(b)?))),
        None => Ok((parse(s)?, None)),
    }
}

fn parse_square(s: &str) -> Result<(usize, usize)> {
    let (m, n) = parse_shape(s)?;
    Ok((m, n.unwrap_or(m)))
}

fn parse_range(s: &str) -> Result<(i32, i32)> {
    let bad = || usage(format!("'{s}' is not a level range (expected a:b)"));
    let (a, b) = s.split_once(':').ok_or_else(bad)?;
    Ok((a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?))
}

/// Writes to stdout, treating a closed pipe as success.
fn emit(text: &str) -> Result<()> {
    let mut out = std::io::stdout().lock();
    match out.write_all(text.as_bytes()).and_then(|_| out.write_all(b"\n")).and_then(|_| out.flush()) {
        Err(e) if e.kind() != ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn write_json<T: Serialize>(value: &T, path: Option<&Path>) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    match path {
        Some(p) => fs::write(p, text + "\n")?,
        None => emit(&text)?,
    }
    Ok(())
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text)?;
    Ok(())
}

// ---------------------------------------------------------------- filters

#[derive(Serialize)]
struct FilterInfo {
    name: &'static str,
    family: ndwt::Family,
    taps: usize,
    vanishing_moments: usize,
    low_pass: Vec<f64>,
}

fn filters(format: ListFormat) -> Result<()> {
    let infos: Vec<FilterInfo> = supported_names()
        .into_iter()
        .map(|name| {
            let f = get_filter(name).expect("bank names resolve");
            FilterInfo {
                name,
                family: f.family(),
                taps: f.len(),
                vanishing_moments: f.vanishing_moments(),
                low_pass: f.low_pass().to_vec(),
            }
        })
        .collect();
    match format {
        ListFormat::Json => write_json(&infos, None),
        ListFormat::Text => {
            emit(&format!("{:<8} {:<11} {:>4} {:>17}", "name", "family", "taps", "vanishing moments"))?;
            for i in infos {
                emit(&format!("{:<8} {:<11} {:>4} {:>17}", i.name, format!("{:?}", i.family).to_lowercase(), i.taps, i.vanishing_moments))?;
            }
            Ok(())
        }
    }
}

// -------------------------------------------------------------------- gen

fn gen(a: &GenArgs) -> Result<()> {
    let (m, n) = parse_shape(&a.size)?;
    let seed = || {
        a.seed
            .ok_or_else(|| usage(format!("--seed is required for the {:?} generator", a.kind).to_lowercase()))
    };
    let hurst = || a.hurst.ok_or_else(|| usage("--hurst is required for fbm/fbf"));
    let data: Array2<f64> = match a.kind {
        GenKind::Doppler => column(doppler(m)?),
        GenKind::Noise => match n {
            None => column(gaussian_noise(m, a.sigma, seed()?)?),
            Some(n) => gaussian_noise_2d(m, n, a.sigma, seed()?)?,
        },
        GenKind::Fbm => column(fbm_1d(m, hurst()?, seed()?)?),
        GenKind::Fbf => fbf_2d(m, n.unwrap_or(m), hurst()?, seed()?)?,
        GenKind::Smooth => smooth_test_image(m, n.unwrap_or(m))?,
    };
    match &a.output {
        Some(p) => save_matrix_csv(p, &data)?,
        None => write_csv_matrix(std::io::stdout().lock(), &data)?,
    }
    Ok(())
}

fn column(v: Vec<f64>) -> Array2<f64> {
    let len = v.len();
    Array2::from_shape_vec((len, 1), v).expect("column shape")
}

// -------------------------------------------------------------- transform

struct Resolved {
    row_filter: String,
    col_filter: String,
    depth_rows: usize,
    depth_cols: usize,
}

fn resolve(f: &FilterArgs, default_depth: usize) -> Resolved {
    let depth = f.depth.unwrap_or(default_depth);
    Resolved {
        row_filter: f.filter_rows.clone().unwrap_or_else(|| f.filter.clone()),
        col_filter: f.filter_cols.clone().unwrap_or_else(|| f.filter.clone()),
        depth_rows: f.depth_rows.unwrap_or(depth),
        depth_cols: f.depth_cols.unwrap_or(depth),
    }
}

fn is_container(path: &Path) -> Result<bool> {
    let mut magic = [0u8; 6];
    let mut file = File::open(path)?;
    let mut read = 0;
    while read < magic.len() {
        match file.read(&mut magic[read..])? {
            0 => break,
            k => read += k,
        }
    }
    Ok(read == magic.len() && &magic == b"NDWTC1")
}

fn layout_path(output: &Path) -> PathBuf {
    let mut s = output.as_os_str().to_owned();
    s.push(".layout.json");
    PathBuf::from(s)
}

fn transform(a: &TransformArgs, guard: &MemoryGuard) -> Result<()> {
    match a.direction {
        Direction::Forward => transform_forward(a, guard),
        Direction::Inverse => transform_inverse(a, guard),
    }
}

fn transform_forward(a: &TransformArgs, guard: &MemoryGuard) -> Result<()> {
    let input = load_matrix(&a.input)?;
    let (rows, cols) = input.dim();
    let one_d = match a.dims {
        Dims::One => {
            if rows != 1 && cols != 1 {
                return Err(CliError::Data(format!("--dims 1d needs a vector, got {rows}x{cols}")));
            }
            true
        }
        Dims::Two => false,
        Dims::Auto => rows == 1 || cols == 1,
    };
    let r = resolve(&a.filters, 3);
    let coefs = if one_d {
        let y: Vec<f64> = input.iter().copied().collect();
        guard.check(y.len(), r.depth_rows)?;
        let w = NdwtMatrix::build(&get_filter(&r.row_filter)?, y.len(), r.depth_rows, a.filters.shift, guard)?;
        Coefficients::OneD(forward_1d(&w, &y)?)
    } else {
        guard.check(rows, r.depth_rows)?;
        guard.check(cols, r.depth_cols)?;
        let w1 = NdwtMatrix::build(&get_filter(&r.row_filter)?, rows, r.depth_rows, a.filters.shift, guard)?;
        let w2 = NdwtMatrix::build(&get_filter(&r.col_filter)?, cols, r.depth_cols, a.filters.shift, guard)?;
        Coefficients::TwoD(forward_2d(&w1, &w2, &input)?)
    };
    match a.format {
        CoefFormat::Bin => coefs.save(&a.output)?,
        CoefFormat::Csv => {
            save_matrix_csv(&a.output, &coefs.to_matrix())?;
            write_json(&coefs.layout(), Some(&layout_path(&a.output)))?;
        }
    }
    let shape = coefs.to_matrix().dim();
    match &coefs {
        Coefficients::OneD(s) => emit(&format!(
            "forward 1d: {} samples -> {} coefficients ({} blocks, filter {}, depth {}, shift {})",
            s.m(),
            shape.0,
            s.depth() + 1,
            s.filter_name(),
            s.depth(),
            s.shift()
        ))?,
        Coefficients::TwoD(g) => {
            let (p1, p2) = g.depths();
            let (rf, cf) = g.filters();
            emit(&format!(
                "forward 2d: {rows}x{cols} -> {}x{} (filters {rf}/{cf}, depths {p1}/{p2}, shift {})",
                shape.0,
                shape.1,
                g.shift()
            ))?;
        }
    }
    Ok(())
}

fn transform_inverse(a: &TransformArgs, guard: &MemoryGuard) -> Result<()> {
    let coefs = if is_container(&a.input)? {
        Coefficients::load(&a.input)?
    } else {
        let layout_file = a.layout.clone().unwrap_or_else(|| layout_path(&a.input));
        let text = fs::read_to_string(&layout_file).map_err(|e| {
            CliError::Data(format!(
                "CSV coefficients need a block map ({}): {e}",
                layout_file.display()
            ))
        })?;
        let layout: BlockLayout = serde_json::from_str(&text)?;
        let data = read_csv_matrix(File::open(&a.input)?)?;
        Coefficients::from_matrix(data, &layout)?
    };
    match coefs {
        Coefficients::OneD(s) => {
            guard.check(s.m(), s.depth())?;
            let w = NdwtMatrix::build(&get_filter(s.filter_name())?, s.m(), s.depth(), s.shift(), guard)?;
            let t = build_weight_matrix(s.m(), s.depth())?;
            let y = inverse_1d(&w, &t, &s)?;
            save_vector_csv(&a.output, &y)?;
            emit(&format!("inverse 1d: {} coefficients -> {} samples", s.as_slice().len(), y.len()))?;
        }
        Coefficients::TwoD(g) => {
            let (m, n) = g.dims();
            let (p1, p2) = g.depths();
            let (rf, cf) = g.filters();
            guard.check(m, p1)?;
            guard.check(n, p2)?;
            let w1 = NdwtMatrix::build(&get_filter(rf)?, m, p1, g.shift(), guard)?;
            let w2 = NdwtMatrix::build(&get_filter(cf)?, n, p2, g.shift(), guard)?;
            let t1 = build_weight_matrix(m, p1)?;
            let t2 = build_weight_matrix(n, p2)?;
            let out = inverse_2d(&w1, &t1, &g, &t2, &w2)?;
            save_matrix_csv(&a.output, &out)?;
            emit(&format!("inverse 2d: {}x{} -> {m}x{n}", g.data().nrows(), g.data().ncols()))?;
        }
    }
    Ok(())
}

// ---------------------------------------------------------------- denoise

fn threshold_rule(r: Rule) -> ThresholdRule {
    match r {
        Rule::Text => ThresholdRule::Universal,
        Rule::Demo => ThresholdRule::DepthScaled,
    }
}

#[derive(Serialize)]
struct DenoiseReport {
    samples: usize,
    filter: String,
    depth: usize,
    shift: i64,
    rule: ThresholdRule,
    sigma_source: &'static str,
    sigma: f64,
    threshold: f64,
    retained_fraction: f64,
}

fn denoise(a: &DenoiseArgs, guard: &MemoryGuard) -> Result<()> {
    let input = load_matrix(&a.input)?;
    let (rows, cols) = input.dim();
    let samples = rows * cols;
    let one_d = rows == 1 || cols == 1;
    let depth = a.depth.unwrap_or_else(|| default_depth(if one_d { samples } else { rows.min(cols) }));
    let cfg = DenoiseConfig::new(&a.filter, depth)?
        .with_shift(a.shift)
        .with_rule(threshold_rule(a.rule))
        .with_sigma(a.sigma);
    let outcome = if one_d {
        guard.check(samples, depth)?;
        let y: Vec<f64> = input.iter().copied().collect();
        let out = Denoiser::new(cfg.clone(), samples, guard)?.denoise(&y)?;
        save_vector_csv(&a.output, &out.signal)?;
        out
    } else {
        guard.check(rows, depth)?;
        guard.check(cols, depth)?;
        let out = denoise_2d(&input, &cfg, guard)?;
        let img = Array2::from_shape_vec((rows, cols), out.signal.clone()).expect("image shape");
        save_matrix_csv(&a.output, &img)?;
        out
    };
    let report = DenoiseReport {
        samples,
        filter: cfg.filter.name().to_string(),
        depth,
        shift: a.shift,
        rule: cfg.rule,
        sigma_source: if a.sigma.is_some() { "given" } else { "estimated" },
        sigma: outcome.sigma,
        threshold: outcome.threshold,
        retained_fraction: outcome.retained_fraction,
    };
    write_json(&report, a.report.as_deref())
}

// ---------------------------------------------------------------- spectra

#[derive(Serialize)]
struct SpectraReport {
    source: String,
    filter: String,
    depth: usize,
    /// Spectrum of the single input, or the level-wise mean over fields.
    points: Vec<SpectrumPoint>,
    fit_range: (i32, i32),
    slope: f64,
    intercept: f64,
    hurst: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    hurst_std: Option<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    per_seed: Vec<SeedResult>,
}

#[derive(Serialize)]
struct SeedResult {
    seed: u64,
    slope: f64,
    hurst: f64,
}

fn spectrum_of(
    image: &Array2<f64>,
    w1: &NdwtMatrix,
    w2: &NdwtMatrix,
    fit: Option<(i32, i32)>,
) -> Result<Spectrum> {
    Ok(spectrum_2d(&forward_2d(w1, w2, image)?, fit)?)
}

fn spectra(a: &SpectraArgs, guard: &MemoryGuard) -> Result<()> {
    let filter = get_filter(&a.filter)?;
    let fit = a.fit_range.as_deref().map(parse_range).transpose()?;
    let report = match (&a.input, a.fbf_hurst) {
        (Some(path), _) => {
            let img = load_matrix(path)?;
            let (m, n) = img.dim();
            guard.check(m, a.depth)?;
            guard.check(n, a.depth)?;
            let w1 = NdwtMatrix::build(&filter, m, a.depth, 0, guard)?;
            let w2 = NdwtMatrix::build(&filter, n, a.depth, 0, guard)?;
            let s = spectrum_of(&img, &w1, &w2, fit)?;
            SpectraReport {
                source: path.display().to_string(),
                filter: filter.name().to_string(),
                depth: a.depth,
                hurst: s.hurst.expect("2-D spectra carry a Hurst estimate"),
                points: s.points,
                fit_range: s.fit_range,
                slope: s.slope,
                intercept: s.intercept,
                hurst_std: None,
                per_seed: Vec::new(),
            }
        }
        (None, Some(h)) => {
            if a.seeds == 0 {
                return Err(usage("--seeds must be at least 1"));
            }
            let (m, n) = parse_square(&a.size)?;
            guard.check(m, a.depth)?;
            guard.check(n, a.depth)?;
            let w1 = NdwtMatrix::build(&filter, m, a.depth, 0, guard)?;
            let w2 = if n == m { w1.clone() } else { NdwtMatrix::build(&filter, n, a.depth, 0, guard)? };
            let base = a.seed.expect("clap enforces --seed");
            let seeds: Vec<u64> = (0..a.seeds).map(|k| base.wrapping_add(k)).collect();
            let results = par::map(&seeds, |&seed| -> Result<Spectrum> {
                let field = fbf_2d(m, n, h, seed)?;
                spectrum_of(&field, &w1, &w2, fit)
            })
            .into_iter()
            .collect::<Result<Vec<_>>>()?;
            let k = results.len() as f64;
            let first = &results[0];
            let points: Vec<SpectrumPoint> = first
                .points
                .iter()
                .enumerate()
                .map(|(i, p)| SpectrumPoint {
                    level: p.level,
                    energy: results.iter().map(|r| r.points[i].energy).sum::<f64>() / k,
                })
                .collect();
            let hursts: Vec<f64> = results.iter().map(|r| r.hurst.expect("2-D")).collect();
            let mean_h = hursts.iter().sum::<f64>() / k;
            let std = (results.len() > 1).then(|| {
                (hursts.iter().map(|x| (x - mean_h).powi(2)).sum::<f64>() / (k - 1.0)).sqrt()
            });
            SpectraReport {
                source: format!("fbf H={h} {m}x{n}"),
                filter: filter.name().to_string(),
                depth: a.depth,
                points,
                fit_range: first.fit_range,
                slope: results.iter().map(|r| r.slope).sum::<f64>() / k,
                intercept: results.iter().map(|r| r.intercept).sum::<f64>() / k,
                hurst: mean_h,
                hurst_std: std,
                per_seed: seeds
                    .iter()
                    .zip(&results)
                    .map(|(&seed, r)| SeedResult { seed, slope: r.slope, hurst: r.hurst.expect("2-D") })
                    .collect(),
            }
        }
        (None, None) => return Err(usage("spectra needs --input or --fbf-hurst")),
    };
    if let Some(path) = &a.svg {
        write_text(path, &spectra_svg(&report))?;
    }
    write_json(&report, a.output.as_deref())
}

fn spectra_svg(r: &SpectraReport) -> String {
    let pts: Vec<(f64, f64)> = r.points.iter().map(|p| (p.level as f64, p.energy)).collect();
    let line: Vec<(f64, f64)> = [r.fit_range.0, r.fit_range.1]
        .iter()
        .map(|&l| (l as f64, r.intercept + r.slope * l as f64))
        .collect();
    let mut doc = Document::new(520.0, 360.0);
    doc.line_chart(
        Rect::new(0.0, 0.0, 520.0, 360.0),
        &format!("wavelet spectrum: slope {:.3}, H {:.3}", r.slope, r.hurst),
        "level (finer to the right)",
        "log2 mean squared coefficient",
        &[
            Series { name: "spectrum", points: &pts, style: Style::Markers },
            Series { name: "fit", points: &line, style: Style::Line },
        ],
    );
    doc.finish()
}

// --------------------------------------------------------------- compress

#[derive(Serialize)]
struct CompressSummary {
    source: String,
    filter: String,
    depth: usize,
    entropy_scale_mixing: f64,
    entropy_standard: f64,
    d_proportion_scale_mixing: String,
    d_proportion_standard: String,
    scale_mixing: CompressReport,
    standard: CompressReport,
}

fn compress(a: &CompressArgs, guard: &MemoryGuard) -> Result<()> {
    if a.depth == 0 {
        return Err(usage("--depth must be at least 1"));
    }
    if a.proportions {
        let p = a.depth as u64;
        let sm = d_type_proportion(p, TransformMode::ScaleMixing)?;
        let st = d_type_proportion(p, TransformMode::Standard)?;
        emit(&format!("scale-mixing d-type proportion: {}/{}", sm.numer(), sm.denom()))?;
        emit(&format!("standard d-type proportion: {}/{}", st.numer(), st.denom()))?;
        return Ok(());
    }
    let filter = get_filter(&a.filter)?;
    let (image, source) = match &a.input {
        Some(p) => (load_matrix(p)?, p.display().to_string()),
        None => {
            let (m, n) = parse_square(&a.size)?;
            (smooth_test_image(m, n)?, format!("smooth_test_image {m}x{n}"))
        }
    };
    let (m, n) = image.dim();
    guard.check(m, a.depth)?;
    guard.check(n, a.depth)?;
    let w1 = NdwtMatrix::build(&filter, m, a.depth, 0, guard)?;
    let w2 = NdwtMatrix::build(&filter, n, a.depth, 0, guard)?;
    let mixing: Vec<f64> = forward_2d(&w1, &w2, &image)?.into_data().into_iter().collect();
    let standard: Vec<f64> = standard_ndwt_2d(&filter, &image, a.depth, 0)?.coefficients().collect();
    let sm = compress_report(&mixing, a.depth as u64, TransformMode::ScaleMixing, a.lorenz_samples)?;
    let st = compress_report(&standard, a.depth as u64, TransformMode::Standard, a.lorenz_samples)?;
    let summary = CompressSummary {
        source,
        filter: filter.name().to_string(),
        depth: a.depth,
        entropy_scale_mixing: sm.entropy,
        entropy_standard: st.entropy,
        d_proportion_scale_mixing: sm.d_proportion.clone(),
        d_proportion_standard: st.d_proportion.clone(),
        scale_mixing: sm,
        standard: st,
    };
    if let Some(path) = &a.svg {
        let mut doc = Document::new(520.0, 380.0);
        doc.line_chart(
            Rect::new(0.0, 0.0, 520.0, 380.0),
            "Lorenz curves of coefficient energy",
            "fraction of coefficients (ascending energy)",
            "cumulative energy",
            &[
                Series { name: "scale-mixing", points: &summary.scale_mixing.lorenz, style: Style::Line },
                Series { name: "standard", points: &summary.standard.lorenz, style: Style::Line },
            ],
        );
        write_text(path, &doc.finish())?;
    }
    write_json(&summary, a.output.as_deref())
}

// ------------------------------------------------------------------ bench

fn bench(a: &BenchArgs, guard: &MemoryGuard) -> Result<()> {
    let mut configs = Vec::new();
    for size in a.sizes.split(',').filter(|s| !s.trim().is_empty()) {
        let (rows, cols) = parse_square(size)?;
        for filter in a.filters.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            configs.push(BenchConfig {
                rows,
                cols,
                depth: a.depth,
                filter: filter.to_string(),
                repeats: a.repetitions,
                seed: a.seed,
            });
        }
    }
    if configs.is_empty() {
        return Err(usage("no benchmark configurations given"));
    }
    let report = run_bench(&configs, guard)?;
    if let Some(path) = &a.svg {
        write_text(path, &bench_svg(&report))?;
    }
    write_json(&report, a.output.as_deref())?;
    if !report.all_passed() {
        return Err(CliError::Data("agreement gate failed for at least one configuration".into()));
    }
    Ok(())
}

fn bench_svg(r: &BenchReport) -> String {
    let done: Vec<_> = r.entries.iter().filter(|e| e.status != BenchStatus::Skipped).collect();
    let categories: Vec<String> = done.iter().map(|e| format!("{}x{} {} p={}", e.rows, e.cols, e.filter, e.depth)).collect();
    let ms = |v: Option<f64>| v.map(|s| s * 1e3).unwrap_or(f64::NAN);
    let values = vec![
        done.iter().map(|e| ms(e.first_apply_secs)).collect(),
        done.iter().map(|e| ms(e.amortized_apply_secs)).collect(),
        done.iter().map(|e| ms(e.convolution.map(|c| c.median))).collect(),
    ];
    let width = 200.0 + 160.0 * categories.len() as f64;
    let mut doc = Document::new(width, 360.0);
    doc.bar_chart(
        Rect::new(0.0, 0.0, width, 360.0),
        "matrix vs a-trous, single thread",
        "milliseconds",
        &categories,
        &["matrix (build + apply)", "matrix (amortized)", "a-trous (median)"],
        &values,
    );
    doc.finish()
}

// ------------------------------------------------------------------- demo

#[derive(Serialize)]
struct LenaLikeReport {
    rows: usize,
    cols: usize,
    depth: usize,
    filter: &'static str,
    coefficient_shape: (usize, usize),
    max_reconstruction_error: f64,
    files: Vec<String>,
}

#[derive(Serialize)]
struct DopplerReport {
    length: usize,
    sigma: f64,
    seed: u64,
    depth: usize,
    filter: &'static str,
    rule: ThresholdRule,
    sigma_hat: f64,
    threshold: f64,
    expected_threshold: f64,
    mse_noisy: f64,
    mse_denoised: f64,
    files: Vec<String>,
}

fn demo(a: &DemoArgs, guard: &MemoryGuard) -> Result<()> {
    fs::create_dir_all(&a.output_dir)?;
    let file = |name: &str| a.output_dir.join(name);
    match a.name {
        DemoName::LenaLike => {
            let (m, n) = (256, 512);
            let image = smooth_test_image(m, n)?;
            // floor of the natural log, as in the original demo script
            let p = ((m.min(n) as f64).ln().floor() as usize).saturating_sub(2).max(1);
            let haar = get_filter("haar")?;
            guard.check(m, p)?;
            guard.check(n, p)?;
            let w1 = NdwtMatrix::build(&haar, m, p, 0, guard)?;
            let w2 = NdwtMatrix::build(&haar, n, p, 0, guard)?;
            let t1 = build_weight_matrix(m, p)?;
            let t2 = build_weight_matrix(n, p)?;
            let grid = forward_2d(&w1, &w2, &image)?;
            let back = inverse_2d(&w1, &t1, &grid, &t2, &w2)?;
            let err = image.iter().zip(back.iter()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
            let names = ["lena_like_original.csv", "lena_like_reconstructed.csv", "lena_like_coefficients.ndwt", "lena_like.svg"];
            save_matrix_csv(&file(names[0]), &image)?;
            save_matrix_csv(&file(names[1]), &back)?;
            let shape = grid.data().dim();
            let magnitude = grid.data().mapv(|v| (v.abs() + 1e-12).log10());
            let coefs = Coefficients::TwoD(grid);
            coefs.save(&file(names[2]))?;
            let mut doc = Document::new(1200.0, 330.0);
            doc.heatmap(Rect::new(0.0, 0.0, 400.0, 220.0), "original", &image, 128);
            doc.heatmap(Rect::new(400.0, 0.0, 400.0, 220.0), "log10 |coefficients|", &magnitude, 128);
            doc.heatmap(Rect::new(800.0, 0.0, 400.0, 220.0), &format!("reconstructed (max error {err:.1e})"), &back, 128);
            write_text(&file(names[3]), &doc.finish())?;
            let report = LenaLikeReport {
                rows: m,
                cols: n,
                depth: p,
                filter: "haar",
                coefficient_shape: shape,
                max_reconstruction_error: err,
                files: names.iter().map(|s| file(s).display().to_string()).collect(),
            };
            write_json(&report, None)?;
            if err >= 1e-9 {
                return Err(CliError::Data(format!("reconstruction error {err:.3e} exceeds 1e-9")));
            }
            Ok(())
        }
        DemoName::Doppler => {
            let (m, sigma) = (250usize, 0.05);
            let p = default_depth(m);
            let clean = doppler(m)?;
            let noise = gaussian_noise(m, sigma, a.seed)?;
            let noisy: Vec<f64> = clean.iter().zip(&noise).map(|(s, e)| s + e).collect();
            let cfg = DenoiseConfig::new("haar", p)?.with_rule(ThresholdRule::DepthScaled);
            let out = Denoiser::new(cfg, m, guard)?.denoise(&noisy)?;
            let mse = |x: &[f64]| clean.iter().zip(x).map(|(c, v)| (c - v).powi(2)).sum::<f64>() / m as f64;
            let names = ["doppler_clean.csv", "doppler_noisy.csv", "doppler_denoised.csv", "doppler.svg"];
            save_vector_csv(&file(names[0]), &clean)?;
            save_vector_csv(&file(names[1]), &noisy)?;
            save_vector_csv(&file(names[2]), &out.signal)?;
            let t = |v: &[f64]| -> Vec<(f64, f64)> { v.iter().enumerate().map(|(k, y)| ((k + 1) as f64 / m as f64, *y)).collect() };
            let (c, nz, dn) = (t(&clean), t(&noisy), t(&out.signal));
            let mut doc = Document::new(700.0, 560.0);
            doc.line_chart(
                Rect::new(0.0, 0.0, 700.0, 280.0),
                "noisy Doppler",
                "t",
                "",
                &[
                    Series { name: "noisy", points: &nz, style: Style::Line },
                    Series { name: "clean", points: &c, style: Style::Line },
                ],
            );
            doc.line_chart(
                Rect::new(0.0, 280.0, 700.0, 280.0),
                "hard-threshold NDWT estimate",
                "t",
                "",
                &[
                    Series { name: "denoised", points: &dn, style: Style::Line },
                    Series { name: "clean", points: &c, style: Style::Line },
                ],
            );
            write_text(&file(names[3]), &doc.finish())?;
            let report = DopplerReport {
                length: m,
                sigma,
                seed: a.seed,
                depth: p,
                filter: "haar",
                rule: ThresholdRule::DepthScaled,
                sigma_hat: out.sigma,
                threshold: out.threshold,
                expected_threshold: universal_threshold(m, out.sigma, ThresholdRule::DepthScaled, p),
                mse_noisy: mse(&noisy),
                mse_denoised: mse(&out.signal),
                files: names.iter().map(|s| file(s).display().to_string()).collect(),
            };
            write_json(&report, None)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shapes_and_ranges_parse() {
        assert_eq!(parse_shape("250").unwrap(), (250, None));
        assert_eq!(parse_shape("64x32").unwrap(), (64, Some(32)));
        assert_eq!(parse_square("16").unwrap(), (16, 16));
        assert!(parse_shape("x3").is_err());
        assert_eq!(parse_range("2:5").unwrap(), (2, 5));
        assert!(parse_range("2-5").is_err());
    }

    #[test]
    fn layout_path_appends_suffix() {
        assert_eq!(layout_path(Path::new("out/c.csv")), PathBuf::from("out/c.csv.layout.json"));
    }
}
