//! Structured matrices with fast matrix-vector products.
//!
//! Every operator stores a compact parameterization and applies itself in
//! `O(n log n)` time through FFT or Walsh-Hadamard transforms. Each one can
//! also be materialized densely from its entry formula, which is what the
//! property tests compare against.
//!
//! Index conventions are 0-based:
//!
//! | operator        | entry `(i, c)`                                   |
//! |-----------------|--------------------------------------------------|
//! | circulant       | `g[(i - c) mod n]`                               |
//! | skew-circulant  | `h[(i - c) mod n]`, negated when `i < c`         |
//! | Toeplitz        | `t_{i-c}`, stored as `d[(i - c) + n - 1]`        |
//! | Hankel          | `a[i + c]`                                       |

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{check_len, Error, Result};
use crate::transforms::{self, FftPlan};

pub type DenseMatrix = DMatrix<f64>;

/// Largest dimension [`StructuredOperator::materialize`] will allocate.
pub const MATERIALIZE_LIMIT: usize = 4096;

/// A square linear operator with a fast apply and a dense oracle.
pub trait StructuredOperator {
    /// Side length `n` of the square operator.
    fn dim(&self) -> usize;

    fn apply(&self, x: &[f64]) -> Result<Vec<f64>>;

    /// Dense `n × n` matrix built directly from the entry formula.
    fn materialize(&self) -> Result<DenseMatrix>;

    /// First `m` entries of `apply(x)`, i.e. the product with the
    /// rectangular operator made of the first `m` rows.
    fn apply_rows(&self, x: &[f64], m: usize) -> Result<Vec<f64>> {
        if m > self.dim() {
            return Err(Error::invalid(format!(
                "cannot take {m} rows of a {0}x{0} operator",
                self.dim()
            )));
        }
        let mut y = self.apply(x)?;
        y.truncate(m);
        Ok(y)
    }
}

fn guard(n: usize) -> Result<()> {
    if n > MATERIALIZE_LIMIT {
        Err(Error::SizeGuard {
            what: "n",
            value: n,
            limit: MATERIALIZE_LIMIT,
        })
    } else {
        Ok(())
    }
}

/// Cyclic (`sign = +1`) or negacyclic (`sign = -1`) convolution with a fixed
/// kernel, with the kernel spectrum precomputed.
#[derive(Debug, Clone)]
struct Convolver {
    n: usize,
    negacyclic: bool,
    plan: Arc<FftPlan>,
    spectrum: Vec<Complex64>,
    // ω_j = exp(-iπj/n), only for negacyclic power-of-two lengths
    modulation: Option<Vec<Complex64>>,
}

impl Convolver {
    fn new(kernel: &[f64], negacyclic: bool) -> Result<Self> {
        let n = kernel.len();
        if n == 0 {
            return Err(Error::Empty);
        }
        if n.is_power_of_two() {
            let plan = transforms::plan(n)?;
            let modulation = negacyclic.then(|| {
                (0..n)
                    .map(|j| Complex64::from_polar(1.0, -PI * j as f64 / n as f64))
                    .collect::<Vec<_>>()
            });
            let mut spectrum: Vec<Complex64> = match &modulation {
                Some(w) => kernel.iter().zip(w).map(|(k, w)| w * k).collect(),
                None => kernel.iter().map(|&k| Complex64::new(k, 0.0)).collect(),
            };
            plan.forward(&mut spectrum)?;
            Ok(Self {
                n,
                negacyclic,
                plan,
                spectrum,
                modulation,
            })
        } else {
            // Linear convolution on a padded power-of-two grid, folded back
            // onto n points afterwards.
            let size = transforms::next_power_of_two(2 * n - 1);
            let plan = transforms::plan(size)?;
            let mut spectrum = vec![Complex64::new(0.0, 0.0); size];
            for (s, &k) in spectrum.iter_mut().zip(kernel) {
                s.re = k;
            }
            plan.forward(&mut spectrum)?;
            Ok(Self {
                n,
                negacyclic,
                plan,
                spectrum,
                modulation: None,
            })
        }
    }

    fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_len(self.n, x.len())?;
        let size = self.plan.len();
        let mut buf = vec![Complex64::new(0.0, 0.0); size];
        match &self.modulation {
            Some(w) => {
                for ((b, &xv), wv) in buf.iter_mut().zip(x).zip(w) {
                    *b = wv * xv;
                }
            }
            None => {
                for (b, &xv) in buf.iter_mut().zip(x) {
                    b.re = xv;
                }
            }
        }
        self.plan.forward(&mut buf)?;
        for (b, s) in buf.iter_mut().zip(&self.spectrum) {
            *b *= s;
        }
        self.plan.inverse(&mut buf)?;
        let n = self.n;
        let y = if size == n {
            match &self.modulation {
                Some(w) => buf.iter().zip(w).map(|(b, wv)| (b * wv.conj()).re).collect(),
                None => buf.iter().map(|b| b.re).collect(),
            }
        } else {
            let sign = if self.negacyclic { -1.0 } else { 1.0 };
            (0..n)
                .map(|i| {
                    let wrap = if i + n < 2 * n - 1 { buf[i + n].re } else { 0.0 };
                    buf[i].re + sign * wrap
                })
                .collect()
        };
        Ok(y)
    }
}

/// `circ[g]`: each column is the previous one cyclically shifted down.
#[derive(Debug, Clone)]
pub struct CirculantOp {
    first_column: Vec<f64>,
    conv: Convolver,
}

impl CirculantOp {
    pub fn new(first_column: Vec<f64>) -> Result<Self> {
        let conv = Convolver::new(&first_column, false)?;
        Ok(Self { first_column, conv })
    }

    pub fn first_column(&self) -> &[f64] {
        &self.first_column
    }
}

impl StructuredOperator for CirculantOp {
    fn dim(&self) -> usize {
        self.first_column.len()
    }

    fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.conv.apply(x)
    }

    fn materialize(&self) -> Result<DenseMatrix> {
        let n = self.dim();
        guard(n)?;
        let g = &self.first_column;
        Ok(DenseMatrix::from_fn(n, n, |i, c| g[(i + n - c) % n]))
    }
}

/// `scirc[h]`: a circulant whose strictly upper triangle is negated.
#[derive(Debug, Clone)]
pub struct SkewCirculantOp {
    first_column: Vec<f64>,
    conv: Convolver,
}

impl SkewCirculantOp {
    pub fn new(first_column: Vec<f64>) -> Result<Self> {
        let conv = Convolver::new(&first_column, true)?;
        Ok(Self { first_column, conv })
    }

    pub fn first_column(&self) -> &[f64] {
        &self.first_column
    }
}

impl StructuredOperator for SkewCirculantOp {
    fn dim(&self) -> usize {
        self.first_column.len()
    }

    fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.conv.apply(x)
    }

    fn materialize(&self) -> Result<DenseMatrix> {
        let n = self.dim();
        guard(n)?;
        let h = &self.first_column;
        Ok(DenseMatrix::from_fn(n, n, |i, c| {
            let v = h[(i + n - c) % n];
            if i < c {
                -v
            } else {
                v
            }
        }))
    }
}

/// Toeplitz matrix stored by its `2n - 1` diagonals, `d[j] = t_{j-(n-1)}`.
#[derive(Debug, Clone)]
pub struct ToeplitzOp {
    diagonals: Vec<f64>,
    n: usize,
    embedding: CirculantOp,
}

impl ToeplitzOp {
    pub fn new(diagonals: Vec<f64>) -> Result<Self> {
        if diagonals.is_empty() {
            return Err(Error::Empty);
        }
        if diagonals.len().is_multiple_of(2) {
            return Err(Error::invalid(format!(
                "Toeplitz diagonals must have odd length 2n-1, got {}",
                diagonals.len()
            )));
        }
        let n = diagonals.len().div_ceil(2);
        // [t_0 .. t_{n-1}, 0, t_{-(n-1)} .. t_{-1}]
        let mut column = Vec::with_capacity(2 * n);
        column.extend_from_slice(&diagonals[n - 1..]);
        column.push(0.0);
        column.extend_from_slice(&diagonals[..n - 1]);
        let embedding = CirculantOp::new(column)?;
        Ok(Self {
            diagonals,
            n,
            embedding,
        })
    }

    /// Builds the diagonal vector from `t_0..t_{n-1}` (first column) and
    /// `t_0, t_{-1}..t_{-(n-1)}` (first row).
    pub fn from_column_row(column: &[f64], row: &[f64]) -> Result<Self> {
        check_len(column.len(), row.len())?;
        if column.is_empty() {
            return Err(Error::Empty);
        }
        let mut d: Vec<f64> = row[1..].iter().rev().copied().collect();
        d.extend_from_slice(column);
        Self::new(d)
    }

    pub fn diagonals(&self) -> &[f64] {
        &self.diagonals
    }

    /// `t_k` for `-(n-1) <= k <= n-1`.
    pub fn diagonal(&self, k: isize) -> f64 {
        self.diagonals[(k + self.n as isize - 1) as usize]
    }
}

impl StructuredOperator for ToeplitzOp {
    fn dim(&self) -> usize {
        self.n
    }

    fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_len(self.n, x.len())?;
        let mut padded = x.to_vec();
        padded.resize(2 * self.n, 0.0);
        let mut y = self.embedding.apply(&padded)?;
        y.truncate(self.n);
        Ok(y)
    }

    fn materialize(&self) -> Result<DenseMatrix> {
        let n = self.n;
        guard(n)?;
        Ok(DenseMatrix::from_fn(n, n, |i, c| self.diagonals[i + n - 1 - c]))
    }
}

/// Hankel matrix stored by its `2n - 1` anti-diagonals, entry `(i, c) = a[i + c]`.
#[derive(Debug, Clone)]
pub struct HankelOp {
    // Hankel·x == Toeplitz(a)·reverse(x)
    toeplitz: ToeplitzOp,
}

impl HankelOp {
    pub fn new(antidiagonals: Vec<f64>) -> Result<Self> {
        Ok(Self {
            toeplitz: ToeplitzOp::new(antidiagonals)?,
        })
    }

    pub fn antidiagonals(&self) -> &[f64] {
        self.toeplitz.diagonals()
    }
}

impl StructuredOperator for HankelOp {
    fn dim(&self) -> usize {
        self.toeplitz.dim()
    }

    fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_len(self.dim(), x.len())?;
        let rev: Vec<f64> = x.iter().rev().copied().collect();
        self.toeplitz.apply(&rev)
    }

    fn materialize(&self) -> Result<DenseMatrix> {
        let n = self.dim();
        guard(n)?;
        let a = self.antidiagonals();
        Ok(DenseMatrix::from_fn(n, n, |i, c| a[i + c]))
    }
}

/// Toeplitz-like matrix of displacement rank at most `r`:
/// `T = Σ_j circ[g_j] · scirc[h_j]`.
#[derive(Debug, Clone)]
pub struct ToeplitzLikeOp {
    n: usize,
    circulants: Vec<CirculantOp>,
    skews: Vec<SkewCirculantOp>,
}

impl ToeplitzLikeOp {
    pub fn new(generators: Vec<(Vec<f64>, Vec<f64>)>) -> Result<Self> {
        let r = generators.len();
        if r == 0 {
            return Err(Error::invalid("displacement rank r must be at least 1"));
        }
        let n = generators[0].0.len();
        if n == 0 {
            return Err(Error::Empty);
        }
        if r > n {
            return Err(Error::invalid(format!("displacement rank r={r} exceeds n={n}")));
        }
        let mut circulants = Vec::with_capacity(r);
        let mut skews = Vec::with_capacity(r);
        for (g, h) in generators {
            check_len(n, g.len())?;
            check_len(n, h.len())?;
            circulants.push(CirculantOp::new(g)?);
            skews.push(SkewCirculantOp::new(h)?);
        }
        Ok(Self {
            n,
            circulants,
            skews,
        })
    }

    pub fn rank(&self) -> usize {
        self.circulants.len()
    }

    pub fn generators(&self) -> impl Iterator<Item = (&[f64], &[f64])> {
        self.circulants
            .iter()
            .zip(&self.skews)
            .map(|(c, s)| (c.first_column(), s.first_column()))
    }
}

impl StructuredOperator for ToeplitzLikeOp {
    fn dim(&self) -> usize {
        self.n
    }

    fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_len(self.n, x.len())?;
        let mut y = vec![0.0; self.n];
        for (c, s) in self.circulants.iter().zip(&self.skews) {
            let part = c.apply(&s.apply(x)?)?;
            y.iter_mut().zip(part).for_each(|(a, b)| *a += b);
        }
        Ok(y)
    }

    fn materialize(&self) -> Result<DenseMatrix> {
        guard(self.n)?;
        let mut t = DenseMatrix::zeros(self.n, self.n);
        for (c, s) in self.circulants.iter().zip(&self.skews) {
            t += c.materialize()? * s.materialize()?;
        }
        Ok(t)
    }
}

/// Fastfood block `(1/√n) · S H G P H B` with `H` the ±1 Hadamard matrix,
/// `S`, `G`, `B` diagonal and `P` a permutation, `(P x)_i = x[perm[i]]`.
#[derive(Debug, Clone)]
pub struct FastfoodOp {
    s: Vec<f64>,
    g: Vec<f64>,
    b: Vec<f64>,
    perm: Vec<usize>,
}

impl FastfoodOp {
    pub fn new(s: Vec<f64>, g: Vec<f64>, b: Vec<f64>, perm: Vec<usize>) -> Result<Self> {
        let n = g.len();
        if n == 0 {
            return Err(Error::Empty);
        }
        if !n.is_power_of_two() {
            return Err(Error::NotPowerOfTwo(n));
        }
        check_len(n, s.len())?;
        check_len(n, b.len())?;
        check_len(n, perm.len())?;
        let mut seen = vec![false; n];
        for &p in &perm {
            if p >= n || std::mem::replace(&mut seen[p], true) {
                return Err(Error::invalid("perm is not a permutation of 0..n"));
            }
        }
        Ok(Self { s, g, b, perm })
    }

    pub fn s_diag(&self) -> &[f64] {
        &self.s
    }

    pub fn g_diag(&self) -> &[f64] {
        &self.g
    }

    pub fn b_diag(&self) -> &[f64] {
        &self.b
    }

    pub fn perm(&self) -> &[usize] {
        &self.perm
    }
}

impl StructuredOperator for FastfoodOp {
    fn dim(&self) -> usize {
        self.g.len()
    }

    fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        let n = self.dim();
        check_len(n, x.len())?;
        let mut u: Vec<f64> = x.iter().zip(&self.b).map(|(x, b)| x * b).collect();
        transforms::fwht_in_place(&mut u)?;
        let mut v: Vec<f64> = self.perm.iter().zip(&self.g).map(|(&p, g)| g * u[p]).collect();
        transforms::fwht_in_place(&mut v)?;
        let scale = 1.0 / (n as f64).sqrt();
        Ok(v.iter().zip(&self.s).map(|(v, s)| scale * s * v).collect())
    }

    fn materialize(&self) -> Result<DenseMatrix> {
        let n = self.dim();
        guard(n)?;
        let h = hadamard_matrix(n)?;
        let diag = |d: &[f64]| DenseMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(d));
        let p = DenseMatrix::from_fn(n, n, |i, c| if self.perm[i] == c { 1.0 } else { 0.0 });
        let f = diag(&self.s) * &h * diag(&self.g) * p * &h * diag(&self.b);
        Ok(f / (n as f64).sqrt())
    }
}

/// Any of the structured families, for heterogeneous storage.
#[derive(Debug, Clone)]
pub enum AnyOperator {
    Circulant(CirculantOp),
    SkewCirculant(SkewCirculantOp),
    Toeplitz(ToeplitzOp),
    Hankel(HankelOp),
    ToeplitzLike(ToeplitzLikeOp),
    Fastfood(FastfoodOp),
}

macro_rules! dispatch {
    ($self:ident, $op:ident => $e:expr) => {
        match $self {
            AnyOperator::Circulant($op) => $e,
            AnyOperator::SkewCirculant($op) => $e,
            AnyOperator::Toeplitz($op) => $e,
            AnyOperator::Hankel($op) => $e,
            AnyOperator::ToeplitzLike($op) => $e,
            AnyOperator::Fastfood($op) => $e,
        }
    };
}

impl StructuredOperator for AnyOperator {
    fn dim(&self) -> usize {
        dispatch!(self, op => op.dim())
    }

    fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        dispatch!(self, op => op.apply(x))
    }

    fn materialize(&self) -> Result<DenseMatrix> {
        dispatch!(self, op => op.materialize())
    }
}

/// Dense ±1 Hadamard matrix, `H[i][j] = (-1)^{popcount(i & j)}`.
pub fn hadamard_matrix(n: usize) -> Result<DenseMatrix> {
    if n == 0 {
        return Err(Error::Empty);
    }
    if !n.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(n));
    }
    guard(n)?;
    Ok(DenseMatrix::from_fn(n, n, |i, j| {
        if (i & j).count_ones() % 2 == 0 {
            1.0
        } else {
            -1.0
        }
    }))
}

/// `Z_f = [e_2 e_3 … e_n  f·e_1]`: shifts down and scales the wrapped entry by `f`.
pub fn unit_f_circulant(n: usize, f: f64) -> DenseMatrix {
    DenseMatrix::from_fn(n, n, |i, c| {
        if n == 1 {
            f
        } else if c + 1 == n {
            if i == 0 {
                f
            } else {
                0.0
            }
        } else if i == c + 1 {
            1.0
        } else {
            0.0
        }
    })
}

/// Sylvester displacement `Z_1 T - T Z_{-1}`.
pub fn sylvester_displacement(t: &DenseMatrix) -> Result<DenseMatrix> {
    if !t.is_square() {
        return Err(Error::invalid("displacement needs a square matrix"));
    }
    let n = t.nrows();
    Ok(unit_f_circulant(n, 1.0) * t - t * unit_f_circulant(n, -1.0))
}

/// Number of singular values above `rel_cutoff · σ_max`.
pub fn numerical_rank(m: &DenseMatrix, rel_cutoff: f64) -> usize {
    let sv = m.clone().singular_values();
    let max = sv.iter().copied().fold(0.0, f64::max);
    if max == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > rel_cutoff * max).count()
}

/// Numerical rank of `Z_1 T - T Z_{-1}` with relative cutoff `1e-8`.
pub fn displacement_rank(t: &DenseMatrix) -> Result<usize> {
    Ok(numerical_rank(&sylvester_displacement(t)?, 1e-8))
}
