//! Random feature maps `Ψ(x) = s(M x) / √k` with structured blocks.
//!
//! The projection `M` is a vertical stack of `k/m` independently drawn
//! `m × n` blocks. Each block recycles one Gaussian budget vector through a
//! structured family; inputs are first zero-padded to a power of two and
//! densified with `D₁ H D₀` (random signs around a normalized Hadamard).

use std::f64::consts::SQRT_2;
use std::fmt;
use std::str::FromStr;

use nalgebra::DVector;
use num_complex::Complex64;
use rand::seq::{index, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{ChiSquared, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::structured::{
    AnyOperator, CirculantOp, DenseMatrix, FastfoodOp, HankelOp, StructuredOperator, ToeplitzLikeOp,
    ToeplitzOp,
};
use crate::transforms;

/// Projection families. `Dense` is the unstructured i.i.d. Gaussian baseline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    Dense,
    Circulant,
    Toeplitz,
    Hankel,
    Fastfood,
    #[serde(alias = "toeplitz-like")]
    ToeplitzLikeSparse,
    ToeplitzLikeDense,
}

impl Family {
    pub const ALL: [Family; 7] = [
        Family::Dense,
        Family::Circulant,
        Family::Toeplitz,
        Family::Hankel,
        Family::Fastfood,
        Family::ToeplitzLikeSparse,
        Family::ToeplitzLikeDense,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::Dense => "dense",
            Family::Circulant => "circulant",
            Family::Toeplitz => "toeplitz",
            Family::Hankel => "hankel",
            Family::Fastfood => "fastfood",
            Family::ToeplitzLikeSparse => "toeplitz-like-sparse",
            Family::ToeplitzLikeDense => "toeplitz-like-dense",
        }
    }

    pub fn is_toeplitz_like(self) -> bool {
        matches!(self, Family::ToeplitzLikeSparse | Family::ToeplitzLikeDense)
    }

    /// Length `t` of the Gaussian budget for an `n`-dimensional block.
    pub fn budget_len(self, n: usize, r: usize) -> usize {
        match self {
            Family::Dense => n * n,
            Family::Circulant | Family::Fastfood => n,
            Family::Toeplitz | Family::Hankel => 2 * n - 1,
            Family::ToeplitzLikeSparse | Family::ToeplitzLikeDense => n * r,
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "toeplitz-like" {
            return Ok(Family::ToeplitzLikeSparse);
        }
        Family::ALL.into_iter().find(|f| f.name() == s).ok_or_else(|| {
            let valid: Vec<_> = Family::ALL.iter().map(|f| f.name()).collect();
            Error::invalid(format!(
                "unknown family '{s}' (valid: {})",
                valid.join(", ")
            ))
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Nonlinearity {
    /// `e^{-iu/σ}`, estimates the Gaussian kernel.
    ComplexExp,
    /// `√2·𝟙{u > 0}`, estimates the order-0 arc-cosine kernel.
    Step,
    /// `√2·max(u, 0)`, estimates the order-1 arc-cosine kernel.
    Relu,
}

impl Nonlinearity {
    pub const ALL: [Nonlinearity; 3] = [Nonlinearity::ComplexExp, Nonlinearity::Step, Nonlinearity::Relu];

    pub fn name(self) -> &'static str {
        match self {
            Nonlinearity::ComplexExp => "complex-exp",
            Nonlinearity::Step => "step",
            Nonlinearity::Relu => "relu",
        }
    }

    /// Kernel estimated by this nonlinearity.
    pub fn kernel(self, sigma: f64) -> crate::kernels::KernelSpec {
        use crate::kernels::KernelSpec;
        match self {
            Nonlinearity::ComplexExp => KernelSpec::Gaussian { sigma },
            Nonlinearity::Step => KernelSpec::ArcCos0,
            Nonlinearity::Relu => KernelSpec::ArcCos1,
        }
    }
}

impl fmt::Display for Nonlinearity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Nonlinearity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Nonlinearity::ALL
            .into_iter()
            .find(|n| n.name() == s)
            .ok_or_else(|| Error::invalid(format!("unknown nonlinearity '{s}' (valid: complex-exp, step, relu)")))
    }
}

fn default_r() -> usize {
    1
}

fn default_alpha() -> usize {
    1
}

fn default_seed() -> u64 {
    42
}

/// Recipe for a feature map. Serializes to
/// `{family, nonlinearity, k, m, sigma, r, alpha, seed}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureMapConfig {
    pub family: Family,
    pub nonlinearity: Nonlinearity,
    /// Total number of features.
    pub k: usize,
    /// Rows per structured block.
    pub m: usize,
    /// Bandwidth for the complex exponential; `None` lets callers pick one
    /// from data.
    #[serde(default)]
    pub sigma: Option<f64>,
    /// Displacement rank (Toeplitz-like families only).
    #[serde(default = "default_r")]
    pub r: usize,
    /// Nonzeros per skew-circulant generator (sparse Toeplitz-like only).
    #[serde(default = "default_alpha")]
    pub alpha: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
}

impl FeatureMapConfig {
    pub fn new(family: Family, nonlinearity: Nonlinearity, k: usize, m: usize) -> Self {
        Self {
            family,
            nonlinearity,
            k,
            m,
            sigma: None,
            r: default_r(),
            alpha: default_alpha(),
            seed: default_seed(),
        }
    }

    pub fn with_sigma(mut self, sigma: f64) -> Self {
        self.sigma = Some(sigma);
        self
    }

    pub fn with_rank(mut self, r: usize) -> Self {
        self.r = r;
        self
    }

    pub fn with_alpha(mut self, alpha: usize) -> Self {
        self.alpha = alpha;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// `k` rounded up to the next multiple of `m`.
    pub fn effective_k(&self) -> usize {
        if self.m == 0 {
            self.k
        } else {
            self.k.div_ceil(self.m) * self.m
        }
    }

    pub fn num_blocks(&self) -> usize {
        self.k / self.m.max(1)
    }

    fn validate(&self, n_padded: usize) -> Result<()> {
        if self.k == 0 || self.m == 0 {
            return Err(Error::invalid("k and m must be positive"));
        }
        if !self.k.is_multiple_of(self.m) {
            return Err(Error::invalid(format!(
                "k={} is not a multiple of m={}",
                self.k, self.m
            )));
        }
        if self.m > n_padded {
            return Err(Error::invalid(format!(
                "m={} exceeds padded dimension {n_padded}",
                self.m
            )));
        }
        if self.nonlinearity == Nonlinearity::ComplexExp {
            match self.sigma {
                Some(s) if s > 0.0 && s.is_finite() => {}
                other => {
                    return Err(Error::invalid(format!(
                        "complex-exp needs a positive sigma, got {other:?}"
                    )))
                }
            }
        }
        Ok(())
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Deterministic generator for block `block` of trial `trial`. Streams for
/// distinct `(trial, block)` pairs are independent of scheduling order.
pub fn stream_rng(seed: u64, trial: u64, block: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(splitmix64(splitmix64(trial) ^ block));
    rng
}

// Stream index reserved for the preprocessing signs.
const PREPROCESS_STREAM: u64 = u64::MAX;

/// A sampled Gaussian budget plus whatever non-Gaussian structure the
/// family needs.
#[derive(Debug, Clone, PartialEq)]
pub struct Budget {
    pub g: Vec<f64>,
    pub structure: Structure,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Structure {
    Plain,
    Fastfood { s: Vec<f64>, b: Vec<f64>, perm: Vec<usize> },
    /// Skew-circulant generators `h¹..hʳ`.
    ToeplitzLike { h: Vec<Vec<f64>> },
}

fn gaussians<R: Rng + ?Sized>(rng: &mut R, len: usize) -> Vec<f64> {
    (0..len).map(|_| rng.sample(StandardNormal)).collect()
}

fn sign<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    if rng.random::<bool>() {
        1.0
    } else {
        -1.0
    }
}

/// Sparse skew-circulant generators: `α` random positions per vector with
/// values `±1/√(αr)`, so that `Σ‖hⁱ‖² = 1`.
pub fn sample_sparse_generators<R: Rng + ?Sized>(
    n: usize,
    r: usize,
    alpha: usize,
    rng: &mut R,
) -> Result<Vec<Vec<f64>>> {
    if alpha == 0 || alpha > n {
        return Err(Error::invalid(format!("alpha={alpha} must be in 1..={n}")));
    }
    if r == 0 || r > n {
        return Err(Error::invalid(format!("r={r} must be in 1..={n}")));
    }
    let mag = 1.0 / ((alpha * r) as f64).sqrt();
    Ok((0..r)
        .map(|_| {
            let mut h = vec![0.0; n];
            for pos in index::sample(rng, n, alpha) {
                h[pos] = mag * sign(rng);
            }
            h
        })
        .collect())
}

/// Dense skew-circulant generators with entries `±1/√(nr)`.
pub fn sample_dense_generators<R: Rng + ?Sized>(n: usize, r: usize, rng: &mut R) -> Result<Vec<Vec<f64>>> {
    if r == 0 || r > n {
        return Err(Error::invalid(format!("r={r} must be in 1..={n}")));
    }
    let mag = 1.0 / ((n * r) as f64).sqrt();
    Ok((0..r).map(|_| (0..n).map(|_| mag * sign(rng)).collect()).collect())
}

/// Number of coordinates that are nonzero in at least one generator.
pub fn support_size(h: &[Vec<f64>]) -> usize {
    let n = h.first().map_or(0, Vec::len);
    (0..n).filter(|&j| h.iter().any(|v| v[j] != 0.0)).count()
}

/// Draws the budget of randomness for one block of dimension `n`.
pub fn sample_budget<R: Rng + ?Sized>(
    family: Family,
    n: usize,
    r: usize,
    alpha: usize,
    rng: &mut R,
) -> Result<Budget> {
    if n == 0 {
        return Err(Error::Empty);
    }
    let structure = match family {
        Family::Fastfood => {
            if !n.is_power_of_two() {
                return Err(Error::NotPowerOfTwo(n));
            }
            let b = (0..n).map(|_| sign(rng)).collect();
            let mut perm: Vec<usize> = (0..n).collect();
            perm.shuffle(rng);
            Structure::Fastfood { s: Vec::new(), b, perm }
        }
        Family::ToeplitzLikeSparse => Structure::ToeplitzLike {
            h: sample_sparse_generators(n, r, alpha, rng)?,
        },
        Family::ToeplitzLikeDense => Structure::ToeplitzLike {
            h: sample_dense_generators(n, r, rng)?,
        },
        _ => Structure::Plain,
    };
    let g = gaussians(rng, family.budget_len(n, r));
    let structure = match structure {
        // rows of H·G·P·H·B/√n all have norm ‖g‖; rescale each to an independent χₙ draw
        Structure::Fastfood { b, perm, .. } => {
            let g_norm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
            let chi2 = ChiSquared::new(n as f64).map_err(|e| Error::invalid(e.to_string()))?;
            let s = (0..n).map(|_| rng.sample(chi2).sqrt() / g_norm).collect();
            Structure::Fastfood { s, b, perm }
        }
        other => other,
    };
    Ok(Budget { g, structure })
}

/// One `m × n` block of the projection.
#[derive(Debug, Clone)]
pub enum Block {
    Dense(DenseMatrix),
    Structured(AnyOperator),
}

impl Block {
    /// Turns a sampled budget into a block with `m` rows.
    pub fn from_budget(family: Family, n: usize, m: usize, budget: Budget) -> Result<Self> {
        let Budget { g, structure } = budget;
        let op = match (family, structure) {
            (Family::Dense, _) => {
                check_len(n * n, g.len())?;
                // row-major budget, first m rows
                return Ok(Block::Dense(DenseMatrix::from_row_slice(m, n, &g[..m * n])));
            }
            (Family::Circulant, _) => AnyOperator::Circulant(CirculantOp::new(g)?),
            (Family::Toeplitz, _) => AnyOperator::Toeplitz(ToeplitzOp::new(g)?),
            (Family::Hankel, _) => AnyOperator::Hankel(HankelOp::new(g)?),
            (Family::Fastfood, Structure::Fastfood { s, b, perm }) => {
                AnyOperator::Fastfood(FastfoodOp::new(s, g, b, perm)?)
            }
            (Family::ToeplitzLikeSparse | Family::ToeplitzLikeDense, Structure::ToeplitzLike { h }) => {
                let r = h.len();
                check_len(n * r, g.len())?;
                let gens = g.chunks(n).map(<[f64]>::to_vec).zip(h).collect();
                AnyOperator::ToeplitzLike(ToeplitzLikeOp::new(gens)?)
            }
            (f, _) => return Err(Error::invalid(format!("budget structure does not match family {f}"))),
        };
        if op.dim() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: op.dim(),
            });
        }
        let _ = m;
        Ok(Block::Structured(op))
    }

    fn project(&self, x: &[f64], m: usize, out: &mut Vec<f64>) -> Result<()> {
        match self {
            Block::Dense(w) => {
                check_len(w.ncols(), x.len())?;
                let y = w * DVector::from_column_slice(x);
                out.extend_from_slice(y.as_slice());
            }
            Block::Structured(op) => out.extend(op.apply_rows(x, m)?),
        }
        Ok(())
    }

    /// Dense `m × n` matrix of this block.
    pub fn to_dense(&self, m: usize) -> Result<DenseMatrix> {
        match self {
            Block::Dense(w) => Ok(w.clone()),
            Block::Structured(op) => Ok(op.materialize()?.rows(0, m).into_owned()),
        }
    }
}

/// An input that has been padded and passed through `D₁ H D₀`.
#[derive(Debug, Clone, PartialEq)]
pub struct Preprocessed(Vec<f64>);

impl Preprocessed {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum FeatureVector {
    Complex(Vec<Complex64>),
    Real(Vec<f64>),
}

impl FeatureVector {
    pub fn len(&self) -> usize {
        match self {
            FeatureVector::Complex(v) => v.len(),
            FeatureVector::Real(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Real coordinates whose dot product equals [`estimate_kernel`]:
    /// `[re..., im...]` for complex features.
    pub fn to_real_coords(&self) -> Vec<f64> {
        match self {
            FeatureVector::Complex(v) => v.iter().map(|z| z.re).chain(v.iter().map(|z| z.im)).collect(),
            FeatureVector::Real(v) => v.clone(),
        }
    }
}

/// Kernel estimate `⟨Ψ(x), Ψ(z)⟩`, taking the real part of the conjugate
/// inner product for complex features.
pub fn estimate_kernel(a: &FeatureVector, b: &FeatureVector) -> Result<f64> {
    match (a, b) {
        (FeatureVector::Complex(a), FeatureVector::Complex(b)) => {
            check_len(a.len(), b.len())?;
            Ok(a.iter().zip(b).map(|(x, z)| (x * z.conj()).re).sum())
        }
        (FeatureVector::Real(a), FeatureVector::Real(b)) => {
            check_len(a.len(), b.len())?;
            Ok(a.iter().zip(b).map(|(x, z)| x * z).sum())
        }
        _ => Err(Error::MixedFeatureKinds),
    }
}

/// Applies `s(·)/√k` to a vector of projections `u` (with `k = u.len()`).
pub fn apply_nonlinearity(u: &[f64], nonlinearity: Nonlinearity, sigma: f64) -> FeatureVector {
    let scale = 1.0 / (u.len() as f64).sqrt();
    match nonlinearity {
        Nonlinearity::ComplexExp => FeatureVector::Complex(
            u.iter()
                .map(|&v| Complex64::from_polar(scale, -v / sigma))
                .collect(),
        ),
        Nonlinearity::Step => FeatureVector::Real(
            u.iter()
                .map(|&v| if v > 0.0 { SQRT_2 * scale } else { 0.0 })
                .collect(),
        ),
        Nonlinearity::Relu => FeatureVector::Real(u.iter().map(|&v| SQRT_2 * scale * v.max(0.0)).collect()),
    }
}

/// A realized feature map.
#[derive(Debug, Clone)]
pub struct FeatureMap {
    config: FeatureMapConfig,
    n_original: usize,
    n_padded: usize,
    d0: Vec<f64>,
    d1: Vec<f64>,
    blocks: Vec<Block>,
}

impl FeatureMap {
    /// Builds the map for inputs of dimension `n`.
    pub fn new(config: &FeatureMapConfig, n: usize) -> Result<Self> {
        Self::for_trial(config, n, 0)
    }

    /// Builds the `trial`-th independent realization under `config.seed`.
    pub fn for_trial(config: &FeatureMapConfig, n: usize, trial: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::Empty);
        }
        let n_padded = transforms::next_power_of_two(n);
        config.validate(n_padded)?;
        let mut rng = stream_rng(config.seed, trial, PREPROCESS_STREAM);
        let d0 = (0..n_padded).map(|_| sign(&mut rng)).collect();
        let d1 = (0..n_padded).map(|_| sign(&mut rng)).collect();
        let blocks = (0..config.num_blocks())
            .map(|b| {
                let mut rng = stream_rng(config.seed, trial, b as u64);
                let budget = sample_budget(config.family, n_padded, config.r, config.alpha, &mut rng)?;
                Block::from_budget(config.family, n_padded, config.m, budget)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            config: config.clone(),
            n_original: n,
            n_padded,
            d0,
            d1,
            blocks,
        })
    }

    pub fn config(&self) -> &FeatureMapConfig {
        &self.config
    }

    pub fn n_original(&self) -> usize {
        self.n_original
    }

    pub fn n_padded(&self) -> usize {
        self.n_padded
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn preprocess_signs(&self) -> (&[f64], &[f64]) {
        (&self.d0, &self.d1)
    }

    /// `D₁ H D₀ [x; 0]` with `H` the normalized Hadamard matrix.
    pub fn preprocess(&self, x: &[f64]) -> Result<Preprocessed> {
        check_len(self.n_original, x.len())?;
        let mut v = vec![0.0; self.n_padded];
        for ((v, x), d) in v.iter_mut().zip(x).zip(&self.d0) {
            *v = x * d;
        }
        transforms::fwht_in_place(&mut v)?;
        let scale = 1.0 / (self.n_padded as f64).sqrt();
        for (v, d) in v.iter_mut().zip(&self.d1) {
            *v *= scale * d;
        }
        Ok(Preprocessed(v))
    }

    /// Linear part `M x'` of length `k`.
    pub fn project(&self, x: &Preprocessed) -> Result<Vec<f64>> {
        check_len(self.n_padded, x.0.len())?;
        let mut out = Vec::with_capacity(self.config.k);
        for block in &self.blocks {
            block.project(&x.0, self.config.m, &mut out)?;
        }
        Ok(out)
    }

    pub fn embed(&self, x: &Preprocessed) -> Result<FeatureVector> {
        let u = self.project(x)?;
        Ok(apply_nonlinearity(&u, self.config.nonlinearity, self.config.sigma.unwrap_or(1.0)))
    }

    /// `preprocess` followed by `embed`.
    pub fn transform(&self, x: &[f64]) -> Result<FeatureVector> {
        self.embed(&self.preprocess(x)?)
    }

    /// Dense `k × n_padded` projection matrix (blocks stacked).
    pub fn projection_matrix(&self) -> Result<DenseMatrix> {
        let mut m = DenseMatrix::zeros(self.config.k, self.n_padded);
        for (b, block) in self.blocks.iter().enumerate() {
            let d = block.to_dense(self.config.m)?;
            m.rows_mut(b * self.config.m, self.config.m).copy_from(&d);
        }
        Ok(m)
    }
}
