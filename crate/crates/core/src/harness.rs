//! Experiment engine: synthetic data, exact and approximate Gram matrices,
//! Monte-Carlo statistics and construction-time benchmarks.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;
use std::time::Instant;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::features::{
    apply_nonlinearity, estimate_kernel, Family, FeatureMap, FeatureMapConfig, FeatureVector, Nonlinearity,
};
use crate::kernels::KernelSpec;
use crate::structured::DenseMatrix;

/// Largest dataset accepted by [`exact_gram`].
pub const GRAM_LIMIT: usize = 5000;
/// Rows used by the median heuristic.
pub const SIGMA_SUBSAMPLE: usize = 100;
pub const BOOTSTRAP_RESAMPLES: usize = 1000;

const DATA_STREAM: u64 = 0x6461_7461;
const SUBSAMPLE_STREAM: u64 = 0x7375_6273;
const BOOTSTRAP_STREAM: u64 = 0x626f_6f74;
const BENCH_STREAM: u64 = 0x6265_6e63;

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Examples as rows, with optional labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub name: String,
    rows: Vec<Vec<f64>>,
    labels: Option<Vec<f64>>,
}

impl Dataset {
    pub fn new(name: impl Into<String>, rows: Vec<Vec<f64>>, labels: Option<Vec<f64>>) -> Result<Self> {
        if rows.len() < 2 {
            return Err(Error::invalid(format!("a dataset needs at least 2 rows, got {}", rows.len())));
        }
        let n = rows[0].len();
        if n == 0 {
            return Err(Error::Empty);
        }
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::invalid(format!("row {i} has {} columns, expected {n}", row.len())));
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(Error::invalid(format!("row {i} has a non-finite entry")));
            }
        }
        if let Some(l) = &labels {
            if l.len() != rows.len() {
                return Err(Error::DimensionMismatch {
                    expected: rows.len(),
                    got: l.len(),
                });
            }
        }
        Ok(Self {
            name: name.into(),
            rows,
            labels,
        })
    }

    pub fn l(&self) -> usize {
        self.rows.len()
    }

    pub fn n(&self) -> usize {
        self.rows[0].len()
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.rows[i]
    }

    pub fn labels(&self) -> Option<&[f64]> {
        self.labels.as_deref()
    }

    pub fn max_norm(&self) -> f64 {
        self.rows.iter().map(|r| norm(r)).fold(0.0, f64::max)
    }

    /// Divides every row by the largest row norm (with a tiny slack) so the
    /// data sits inside the unit ball.
    pub fn normalize_to_unit_ball(&mut self) {
        let scale = self.max_norm() * (1.0 + 1e-9);
        if scale > 0.0 {
            for row in &mut self.rows {
                row.iter_mut().for_each(|v| *v /= scale);
            }
        }
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Mean separation giving a 5% Bayes error for two unit-variance classes.
pub fn g50c_separation() -> f64 {
    let std = Normal::standard();
    2.0 * std.inverse_cdf(0.95)
}

/// Two isotropic Gaussian classes in `n` dimensions whose means differ by
/// [`g50c_separation`] along the first axis, rescaled into the unit ball.
/// Rows alternate between labels `-1` and `+1`.
pub fn gen_g50c_like(l: usize, n: usize, seed: u64) -> Result<Dataset> {
    if l < 2 || !l.is_multiple_of(2) {
        return Err(Error::invalid(format!("l must be even and at least 2, got {l}")));
    }
    if n == 0 {
        return Err(Error::invalid("n must be positive"));
    }
    let half = g50c_separation() / 2.0;
    let mut rng = rng_for(seed, DATA_STREAM);
    let mut rows = Vec::with_capacity(l);
    let mut labels = Vec::with_capacity(l);
    for i in 0..l {
        let label = if i % 2 == 0 { -1.0 } else { 1.0 };
        let mut row: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        row[0] += label * half;
        rows.push(row);
        labels.push(label);
    }
    let mut ds = Dataset::new(format!("g50c-like-{l}x{n}-s{seed}"), rows, Some(labels))?;
    ds.normalize_to_unit_ball();
    Ok(ds)
}

/// A point drawn uniformly from the unit ball in `n` dimensions.
pub fn random_ball_point<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    let dir: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
    let radius = rng.random::<f64>().powf(1.0 / n as f64);
    let scale = radius / norm(&dir);
    dir.into_iter().map(|v| v * scale).collect()
}

/// `count` independent pairs of uniform points in the unit ball.
pub fn random_ball_pairs(count: usize, n: usize, seed: u64) -> Vec<(Vec<f64>, Vec<f64>)> {
    let mut rng = rng_for(seed, DATA_STREAM ^ 1);
    (0..count)
        .map(|_| (random_ball_point(n, &mut rng), random_ball_point(n, &mut rng)))
        .collect()
}

/// Exact kernel matrix, symmetric by construction.
pub fn exact_gram(ds: &Dataset, kernel: &KernelSpec) -> Result<DenseMatrix> {
    let l = ds.l();
    if l > GRAM_LIMIT {
        return Err(Error::SizeGuard {
            what: "l",
            value: l,
            limit: GRAM_LIMIT,
        });
    }
    let upper: Vec<Vec<f64>> = (0..l)
        .into_par_iter()
        .map(|i| (i..l).map(|j| kernel.eval(ds.row(i), ds.row(j))).collect::<Result<_>>())
        .collect::<Result<_>>()?;
    let mut k = DenseMatrix::zeros(l, l);
    for (i, row) in upper.iter().enumerate() {
        for (off, &v) in row.iter().enumerate() {
            k[(i, i + off)] = v;
            k[(i + off, i)] = v;
        }
    }
    Ok(k)
}

/// Median pairwise distance over a seeded subsample of at most
/// [`SIGMA_SUBSAMPLE`] rows.
pub fn median_heuristic(ds: &Dataset, seed: u64) -> f64 {
    let idx: Vec<usize> = if ds.l() <= SIGMA_SUBSAMPLE {
        (0..ds.l()).collect()
    } else {
        let mut v = index::sample(&mut rng_for(seed, SUBSAMPLE_STREAM), ds.l(), SIGMA_SUBSAMPLE).into_vec();
        v.sort_unstable();
        v
    };
    let mut d: Vec<f64> = idx
        .iter()
        .enumerate()
        .flat_map(|(a, &i)| idx[a + 1..].iter().map(move |&j| (i, j)))
        .map(|(i, j)| distance(ds.row(i), ds.row(j)))
        .collect();
    d.sort_by(f64::total_cmp);
    quantile_sorted(&d, 0.5)
}

/// `cfg` with `k` rounded up to a multiple of `m` and `sigma` filled in by
/// the median heuristic when a complex exponential needs one.
pub fn resolve_config(ds: &Dataset, cfg: &FeatureMapConfig) -> FeatureMapConfig {
    let mut out = cfg.clone();
    out.k = cfg.effective_k();
    if out.nonlinearity == Nonlinearity::ComplexExp && out.sigma.is_none() {
        out.sigma = Some(median_heuristic(ds, cfg.seed));
    }
    out
}

/// Kernel targeted by a resolved config.
pub fn target_kernel(cfg: &FeatureMapConfig) -> KernelSpec {
    cfg.nonlinearity.kernel(cfg.sigma.unwrap_or(1.0))
}

/// Real `l × k'` matrix whose rows have the same inner products as the
/// feature vectors (`k' = 2k` for complex features).
pub fn feature_matrix(ds: &Dataset, fm: &FeatureMap) -> Result<DenseMatrix> {
    let rows: Vec<Vec<f64>> = ds
        .rows()
        .par_iter()
        .map(|x| Ok(fm.transform(x)?.to_real_coords()))
        .collect::<Result<_>>()?;
    let width = rows[0].len();
    Ok(DenseMatrix::from_row_iterator(ds.l(), width, rows.into_iter().flatten()))
}

fn gram_of(phi: &DenseMatrix) -> DenseMatrix {
    let mut k = phi * phi.transpose();
    let l = k.nrows();
    for i in 0..l {
        for j in i + 1..l {
            k[(j, i)] = k[(i, j)];
        }
    }
    k
}

/// Approximate Gram matrix from the `trial`-th realization of `cfg`.
pub fn approx_gram_trial(ds: &Dataset, cfg: &FeatureMapConfig, trial: u64) -> Result<DenseMatrix> {
    let cfg = resolve_config(ds, cfg);
    let fm = FeatureMap::for_trial(&cfg, ds.n(), trial)?;
    Ok(gram_of(&feature_matrix(ds, &fm)?))
}

pub fn approx_gram(ds: &Dataset, cfg: &FeatureMapConfig) -> Result<DenseMatrix> {
    approx_gram_trial(ds, cfg, 0)
}

/// `‖K − K̃‖_F / ‖K‖_F`.
pub fn rel_frobenius_error(k: &DenseMatrix, k_tilde: &DenseMatrix) -> Result<f64> {
    if k.shape() != k_tilde.shape() {
        return Err(Error::invalid(format!(
            "shape mismatch: {:?} vs {:?}",
            k.shape(),
            k_tilde.shape()
        )));
    }
    let denom = k.norm();
    if denom == 0.0 {
        return Err(Error::ZeroVector);
    }
    Ok((k - k_tilde).norm() / denom)
}

/// Linear-interpolation quantile of sorted data.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    match sorted.len() {
        0 => f64::NAN,
        1 => sorted[0],
        len => {
            let pos = q.clamp(0.0, 1.0) * (len - 1) as f64;
            let lo = pos.floor() as usize;
            let hi = (lo + 1).min(len - 1);
            sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
        }
    }
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    quantile_sorted(&v, 0.5)
}

/// Mean and unbiased sample variance.
pub fn mean_variance(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = if values.len() > 1 {
        values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    (mean, var)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quantiles {
    pub p25: f64,
    pub p50: f64,
    pub p75: f64,
}

impl Quantiles {
    pub fn of(values: &[f64]) -> Self {
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        Self {
            p25: quantile_sorted(&v, 0.25),
            p50: quantile_sorted(&v, 0.5),
            p75: quantile_sorted(&v, 0.75),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GramReport {
    pub family: Family,
    pub nonlinearity: Nonlinearity,
    pub k: usize,
    pub m: usize,
    pub r: usize,
    pub alpha: usize,
    pub sigma: Option<f64>,
    /// Mean over trials.
    pub rel_fro_error: f64,
    pub trials: usize,
    pub error_quantiles: Quantiles,
}

/// Relative Frobenius errors of `trials` independent realizations.
pub fn gram_errors(ds: &Dataset, exact: &DenseMatrix, cfg: &FeatureMapConfig, trials: usize) -> Result<Vec<f64>> {
    let cfg = resolve_config(ds, cfg);
    (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let fm = FeatureMap::for_trial(&cfg, ds.n(), t)?;
            rel_frobenius_error(exact, &gram_of(&feature_matrix(ds, &fm)?))
        })
        .collect()
}

pub fn gram_report(ds: &Dataset, cfg: &FeatureMapConfig, trials: usize) -> Result<GramReport> {
    if trials == 0 {
        return Err(Error::invalid("trials must be positive"));
    }
    let cfg = resolve_config(ds, cfg);
    let exact = exact_gram(ds, &target_kernel(&cfg))?;
    report_from(&cfg, &gram_errors(ds, &exact, &cfg, trials)?)
}

fn report_from(cfg: &FeatureMapConfig, errors: &[f64]) -> Result<GramReport> {
    let (mean, _) = mean_variance(errors);
    let (r, alpha) = if cfg.family.is_toeplitz_like() { (cfg.r, cfg.alpha) } else { (1, 1) };
    Ok(GramReport {
        family: cfg.family,
        nonlinearity: cfg.nonlinearity,
        k: cfg.k,
        m: cfg.m,
        r,
        alpha,
        sigma: cfg.sigma,
        rel_fro_error: mean,
        trials: errors.len(),
        error_quantiles: Quantiles::of(errors),
    })
}

/// One report per `(family, k)`, sharing the exact Gram matrix.
pub fn approx_sweep(
    ds: &Dataset,
    base: &FeatureMapConfig,
    families: &[Family],
    ks: &[usize],
    trials: usize,
) -> Result<Vec<GramReport>> {
    if trials == 0 {
        return Err(Error::invalid("trials must be positive"));
    }
    let resolved = resolve_config(ds, base);
    let exact = exact_gram(ds, &target_kernel(&resolved))?;
    let mut out = Vec::new();
    for &family in families {
        for &k in ks {
            let cfg = FeatureMapConfig {
                family,
                k,
                ..resolved.clone()
            };
            let cfg = resolve_config(ds, &cfg);
            out.push(report_from(&cfg, &gram_errors(ds, &exact, &cfg, trials)?)?);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnbiasednessStats {
    pub mean: f64,
    pub std_err: f64,
    pub exact: f64,
    pub z_score: f64,
    pub trials: usize,
}

impl UnbiasednessStats {
    fn from_samples(samples: &[f64], exact: f64) -> Self {
        let (mean, var) = mean_variance(samples);
        let std_err = (var / samples.len() as f64).sqrt();
        let diff = mean - exact;
        let z_score = if std_err > 0.0 {
            diff / std_err
        } else if diff.abs() <= 1e-12 * exact.abs().max(1.0) {
            0.0
        } else {
            diff.signum() * f64::INFINITY
        };
        Self {
            mean,
            std_err,
            exact,
            z_score,
            trials: samples.len(),
        }
    }
}

/// Single-block estimates for several pairs and nonlinearities at once;
/// each trial draws one `m`-row block and reuses its projections.
/// Returns `stats[pair][nonlinearity]`.
pub fn unbiasedness_study(
    pairs: &[(Vec<f64>, Vec<f64>)],
    cfg: &FeatureMapConfig,
    nonlinearities: &[Nonlinearity],
    trials: usize,
) -> Result<Vec<Vec<UnbiasednessStats>>> {
    if trials < 100 {
        return Err(Error::invalid(format!("need at least 100 trials, got {trials}")));
    }
    let Some((x0, _)) = pairs.first() else {
        return Ok(Vec::new());
    };
    let n = x0.len();
    let sigma = cfg.sigma.unwrap_or(1.0);
    let block = FeatureMapConfig {
        k: cfg.m,
        nonlinearity: Nonlinearity::Relu,
        ..cfg.clone()
    };
    let per_trial: Vec<Vec<f64>> = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let fm = FeatureMap::for_trial(&block, n, t)?;
            let mut out = Vec::with_capacity(pairs.len() * nonlinearities.len());
            for (x, z) in pairs {
                let ux = fm.project(&fm.preprocess(x)?)?;
                let uz = fm.project(&fm.preprocess(z)?)?;
                for &nl in nonlinearities {
                    out.push(estimate_kernel(
                        &apply_nonlinearity(&ux, nl, sigma),
                        &apply_nonlinearity(&uz, nl, sigma),
                    )?);
                }
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    let width = nonlinearities.len();
    pairs
        .iter()
        .enumerate()
        .map(|(p, (x, z))| {
            nonlinearities
                .iter()
                .enumerate()
                .map(|(q, nl)| {
                    let samples: Vec<f64> = per_trial.iter().map(|row| row[p * width + q]).collect();
                    let exact = nl.kernel(sigma).eval(x, z)?;
                    Ok(UnbiasednessStats::from_samples(&samples, exact))
                })
                .collect()
        })
        .collect()
}

pub fn unbiasedness_stats(x: &[f64], z: &[f64], cfg: &FeatureMapConfig, trials: usize) -> Result<UnbiasednessStats> {
    let pairs = [(x.to_vec(), z.to_vec())];
    Ok(unbiasedness_study(&pairs, cfg, &[cfg.nonlinearity], trials)?[0][0])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VarianceEstimate {
    pub family: Family,
    pub nonlinearity: Nonlinearity,
    pub k: usize,
    pub m: usize,
    pub r: usize,
    pub mean: f64,
    pub variance: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub trials: usize,
}

/// Full-`k` kernel estimates from `trials` independent maps.
pub fn estimates(x: &[f64], z: &[f64], cfg: &FeatureMapConfig, trials: usize) -> Result<Vec<f64>> {
    (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let fm = FeatureMap::for_trial(cfg, x.len(), t)?;
            estimate_kernel(&fm.transform(x)?, &fm.transform(z)?)
        })
        .collect()
}

/// Percentile bootstrap interval for the sample variance.
pub fn bootstrap_variance_ci(samples: &[f64], resamples: usize, level: f64, seed: u64) -> (f64, f64) {
    let mut rng = rng_for(seed, BOOTSTRAP_STREAM);
    let len = samples.len();
    let mut vars: Vec<f64> = (0..resamples)
        .map(|_| {
            let draw: Vec<f64> = (0..len).map(|_| samples[rng.random_range(0..len)]).collect();
            mean_variance(&draw).1
        })
        .collect();
    vars.sort_by(f64::total_cmp);
    let tail = (1.0 - level) / 2.0;
    (quantile_sorted(&vars, tail), quantile_sorted(&vars, 1.0 - tail))
}

/// Empirical variance of the full estimator for each config, with a 95%
/// bootstrap interval.
pub fn variance_profile(x: &[f64], z: &[f64], cfgs: &[FeatureMapConfig], trials: usize) -> Result<Vec<VarianceEstimate>> {
    if trials < 1000 {
        return Err(Error::invalid(format!("need at least 1000 trials, got {trials}")));
    }
    cfgs.iter()
        .map(|cfg| {
            let samples = estimates(x, z, cfg, trials)?;
            let (mean, variance) = mean_variance(&samples);
            let (ci_low, ci_high) = bootstrap_variance_ci(&samples, BOOTSTRAP_RESAMPLES, 0.95, cfg.seed);
            Ok(VarianceEstimate {
                family: cfg.family,
                nonlinearity: cfg.nonlinearity,
                k: cfg.k,
                m: cfg.m,
                r: cfg.r,
                mean,
                variance,
                ci_low,
                ci_high,
                trials,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub n: usize,
    pub family: Family,
    pub r: usize,
    /// Seconds.
    pub wall_time_structured: f64,
    pub wall_time_dense: f64,
    pub speedup: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchOptions {
    pub reps: usize,
    /// Points embedded per timed run.
    pub batch: usize,
    pub ranks: Vec<usize>,
    pub alpha: usize,
    pub seed: u64,
}

impl Default for BenchOptions {
    fn default() -> Self {
        Self {
            reps: 5,
            batch: 16,
            ranks: vec![1],
            alpha: 1,
            seed: 42,
        }
    }
}

fn bench_points(n: usize, batch: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = rng_for(seed, BENCH_STREAM);
    (0..batch)
        .map(|_| (0..n).map(|_| rng.sample::<f64, _>(StandardNormal) / (n as f64).sqrt()).collect())
        .collect()
}

/// Median wall time to build an `n × n` map and embed the batch; the first
/// run is a discarded warmup.
pub fn time_construction(cfg: &FeatureMapConfig, points: &[Vec<f64>], reps: usize) -> Result<f64> {
    let n = points.first().map_or(0, Vec::len);
    let mut times = Vec::with_capacity(reps);
    for rep in 0..=reps {
        let start = Instant::now();
        let fm = FeatureMap::for_trial(cfg, n, rep as u64)?;
        let mut sink = 0.0;
        for p in points {
            if let FeatureVector::Real(v) = fm.transform(p)? {
                sink += v[0];
            }
        }
        std::hint::black_box(sink);
        if rep > 0 {
            times.push(start.elapsed().as_secs_f64());
        }
    }
    Ok(median(&times))
}

/// Construction-time benchmark. Toeplitz-like families get one row per rank
/// in `opts.ranks`; the dense row reports a speedup of 1.
pub fn bench_construction(n_list: &[usize], families: &[Family], opts: &BenchOptions) -> Result<Vec<BenchRow>> {
    if opts.reps < 5 {
        return Err(Error::invalid(format!("reps must be at least 5, got {}", opts.reps)));
    }
    let mut rows = Vec::new();
    for &n in n_list {
        if !n.is_power_of_two() {
            return Err(Error::NotPowerOfTwo(n));
        }
        let points = bench_points(n, opts.batch.max(1), opts.seed);
        let cfg = |family, r| {
            FeatureMapConfig::new(family, Nonlinearity::Relu, n, n)
                .with_rank(r)
                .with_alpha(opts.alpha.min(n))
                .with_seed(opts.seed)
        };
        let dense = time_construction(&cfg(Family::Dense, 1), &points, opts.reps)?;
        for &family in families {
            let ranks: Vec<usize> = if family.is_toeplitz_like() {
                opts.ranks.clone()
            } else {
                vec![1]
            };
            for r in ranks {
                let structured = if family == Family::Dense {
                    dense
                } else {
                    time_construction(&cfg(family, r), &points, opts.reps)?
                };
                rows.push(BenchRow {
                    n,
                    family,
                    r,
                    wall_time_structured: structured,
                    wall_time_dense: dense,
                    speedup: dense / structured,
                });
            }
        }
    }
    Ok(rows)
}

/// Parses a dataset CSV: comma-separated decimals, one example per row.
/// A leading `# label:last` comment marks the final column as the label.
pub fn parse_dataset_csv(text: &str, name: &str) -> Result<Dataset> {
    let mut label_last = false;
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    let mut width = None;
    for (lineno, line) in text.lines().enumerate() {
        let row_no = lineno + 1;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            if rows.is_empty() && comment.trim() == "label:last" {
                label_last = true;
            }
            continue;
        }
        let mut values = Vec::new();
        for (c, field) in line.split(',').enumerate() {
            let v: f64 = field.trim().parse().map_err(|e| Error::Parse {
                row: row_no,
                column: c + 1,
                message: format!("'{}': {e}", field.trim()),
            })?;
            if !v.is_finite() {
                return Err(Error::Parse {
                    row: row_no,
                    column: c + 1,
                    message: "non-finite value".into(),
                });
            }
            values.push(v);
        }
        let expected = *width.get_or_insert(values.len());
        if values.len() != expected {
            return Err(Error::Parse {
                row: row_no,
                column: values.len().min(expected) + 1,
                message: format!("expected {expected} columns, found {}", values.len()),
            });
        }
        if label_last {
            let label = values.pop().ok_or_else(|| Error::Parse {
                row: row_no,
                column: 1,
                message: "missing label".into(),
            })?;
            labels.push(label);
        }
        if values.is_empty() {
            return Err(Error::Parse {
                row: row_no,
                column: 1,
                message: "no feature columns".into(),
            });
        }
        rows.push(values);
    }
    if rows.len() < 2 {
        return Err(Error::Parse {
            row: rows.len() + 1,
            column: 1,
            message: format!("need at least 2 data rows, found {}", rows.len()),
        });
    }
    Dataset::new(name, rows, label_last.then_some(labels))
}

pub fn load_dataset_csv(path: &Path) -> Result<Dataset> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let name = path.file_stem().and_then(|s| s.to_str()).unwrap_or("dataset");
    parse_dataset_csv(&text, name)
}

/// CSV text with 17 significant digits per value.
pub fn dataset_to_csv(ds: &Dataset) -> String {
    let mut out = String::new();
    if ds.labels.is_some() {
        out.push_str("# label:last\n");
    }
    for (i, row) in ds.rows.iter().enumerate() {
        let mut fields: Vec<String> = row.iter().map(|v| format!("{v:.16e}")).collect();
        if let Some(labels) = &ds.labels {
            fields.push(format!("{:.16e}", labels[i]));
        }
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

/// Writes through a temporary file in the target directory, then renames.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(path, e))?;
    tmp.write_all(bytes).map_err(|e| Error::io(path, e))?;
    tmp.as_file().sync_all().map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

pub fn save_dataset_csv(path: &Path, ds: &Dataset) -> Result<()> {
    write_atomic(path, dataset_to_csv(ds).as_bytes())
}

/// Pretty JSON with object keys in sorted order.
pub fn to_canonical_json<T: Serialize>(value: &T) -> Result<String> {
    let v = serde_json::to_value(value)?;
    let mut s = serde_json::to_string_pretty(&v)?;
    s.push('\n');
    Ok(s)
}

pub fn save_report<T: Serialize>(path: &Path, report: &T) -> Result<()> {
    write_atomic(path, to_canonical_json(report)?.as_bytes())
}

pub const REPORT_CSV_HEADER: &str = "family,nonlinearity,k,r,metric,value";

/// Long-format CSV: one line per `(report, metric)`.
pub fn gram_reports_csv(reports: &[GramReport]) -> String {
    let mut out = format!("{REPORT_CSV_HEADER}\n");
    for rep in reports {
        let metrics = [
            ("rel_fro_error", rep.rel_fro_error),
            ("p25", rep.error_quantiles.p25),
            ("p50", rep.error_quantiles.p50),
            ("p75", rep.error_quantiles.p75),
        ];
        for (metric, value) in metrics {
            let _ = writeln!(out, "{},{},{},{},{metric},{value:e}", rep.family, rep.nonlinearity, rep.k, rep.r);
        }
    }
    out
}

pub const BENCH_CSV_HEADER: &str = "n,family,r,wall_time_structured,wall_time_dense,speedup";

pub fn bench_rows_csv(rows: &[BenchRow]) -> String {
    let mut out = format!("{BENCH_CSV_HEADER}\n");
    for row in rows {
        let _ = writeln!(
            out,
            "{},{},{},{:e},{:e},{:e}",
            row.n, row.family, row.r, row.wall_time_structured, row.wall_time_dense, row.speedup
        );
    }
    out
}

/// Kolmogorov–Smirnov distance between a sample and the standard normal.
pub fn ks_statistic_normal(samples: &[f64]) -> f64 {
    let std = Normal::standard();
    let mut v = samples.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    v.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = std.cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

/// Asymptotic KS critical value at significance 0.001.
pub fn ks_critical_001(n: usize) -> f64 {
    1.949_5 / (n as f64).sqrt()
}

/// Fraction of rows misclassified by the nearest-class-mean rule fitted on
/// `train`.
pub fn nearest_mean_error(train: &Dataset, test: &Dataset) -> Result<f64> {
    let (Some(yl), Some(tl)) = (train.labels(), test.labels()) else {
        return Err(Error::invalid("nearest-mean classification needs labels"));
    };
    let mut means: BTreeMap<i64, (Vec<f64>, usize)> = BTreeMap::new();
    for (row, &y) in train.rows().iter().zip(yl) {
        let e = means.entry(y as i64).or_insert_with(|| (vec![0.0; row.len()], 0));
        e.0.iter_mut().zip(row).for_each(|(a, b)| *a += b);
        e.1 += 1;
    }
    let centers: Vec<(i64, Vec<f64>)> = means
        .into_iter()
        .map(|(y, (s, c))| (y, s.into_iter().map(|v| v / c as f64).collect()))
        .collect();
    let wrong = test
        .rows()
        .iter()
        .zip(tl)
        .filter(|(row, &y)| {
            let best = centers
                .iter()
                .min_by(|a, b| distance(row, &a.1).total_cmp(&distance(row, &b.1)))
                .map(|c| c.0);
            best != Some(y as i64)
        })
        .count();
    Ok(wrong as f64 / test.l() as f64)
}
