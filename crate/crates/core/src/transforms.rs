//! Radix-2 FFT and fast Walsh-Hadamard transform.
//!
//! The forward FFT is unnormalized and the inverse carries the `1/n`
//! factor, so `ifft(fft(g) ⊙ fft(x))` is the cyclic convolution `g ⊛ x`.
//! FFT lengths must be powers of two; structured operators pad as needed.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Precomputed twiddle factors and bit-reversal table for one FFT length.
#[derive(Debug)]
pub struct FftPlan {
    n: usize,
    // e^{-2πik/n} for k in 0..n/2
    twiddles: Vec<Complex64>,
    bit_rev: Vec<usize>,
}

impl FftPlan {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Empty);
        }
        if !n.is_power_of_two() {
            return Err(Error::NotPowerOfTwo(n));
        }
        let twiddles = (0..n / 2)
            .map(|k| Complex64::from_polar(1.0, -2.0 * PI * k as f64 / n as f64))
            .collect();
        let bits = n.trailing_zeros();
        let bit_rev = (0..n)
            .map(|i| if bits == 0 { 0 } else { i.reverse_bits() >> (usize::BITS - bits) })
            .collect();
        Ok(Self {
            n,
            twiddles,
            bit_rev,
        })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Unnormalized forward transform in place.
    pub fn forward(&self, data: &mut [Complex64]) -> Result<()> {
        self.process(data, false)
    }

    /// Inverse transform in place, including the `1/n` factor.
    pub fn inverse(&self, data: &mut [Complex64]) -> Result<()> {
        self.process(data, true)?;
        let scale = 1.0 / self.n as f64;
        for v in data.iter_mut() {
            *v *= scale;
        }
        Ok(())
    }

    fn process(&self, data: &mut [Complex64], inverse: bool) -> Result<()> {
        let n = self.n;
        if data.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: data.len(),
            });
        }
        for i in 0..n {
            let j = self.bit_rev[i];
            if i < j {
                data.swap(i, j);
            }
        }
        let mut half = 1;
        while half < n {
            let stride = n / (2 * half);
            for start in (0..n).step_by(2 * half) {
                for k in 0..half {
                    let w = self.twiddles[k * stride];
                    let w = if inverse { w.conj() } else { w };
                    let a = data[start + k];
                    let b = data[start + k + half] * w;
                    data[start + k] = a + b;
                    data[start + k + half] = a - b;
                }
            }
            half *= 2;
        }
        Ok(())
    }
}

fn plan_cache() -> &'static Mutex<HashMap<usize, Arc<FftPlan>>> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<FftPlan>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Shared plan for length `n`, built on first use.
pub fn plan(n: usize) -> Result<Arc<FftPlan>> {
    let mut cache = plan_cache().lock().unwrap_or_else(|e| e.into_inner());
    if let Some(p) = cache.get(&n) {
        return Ok(Arc::clone(p));
    }
    let p = Arc::new(FftPlan::new(n)?);
    cache.insert(n, Arc::clone(&p));
    Ok(p)
}

/// Unnormalized forward DFT.
pub fn fft(v: &[Complex64]) -> Result<Vec<Complex64>> {
    let p = plan(v.len())?;
    let mut out = v.to_vec();
    p.forward(&mut out)?;
    Ok(out)
}

/// Inverse DFT with `1/n` normalization.
pub fn ifft(v: &[Complex64]) -> Result<Vec<Complex64>> {
    let p = plan(v.len())?;
    let mut out = v.to_vec();
    p.inverse(&mut out)?;
    Ok(out)
}

/// Multiplies `data` by the ±1 Hadamard matrix in place.
pub fn fwht_in_place(data: &mut [f64]) -> Result<()> {
    let n = data.len();
    if n == 0 {
        return Err(Error::Empty);
    }
    if !n.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(n));
    }
    let mut half = 1;
    while half < n {
        for start in (0..n).step_by(2 * half) {
            for i in start..start + half {
                let a = data[i];
                let b = data[i + half];
                data[i] = a + b;
                data[i + half] = a - b;
            }
        }
        half *= 2;
    }
    Ok(())
}

/// Hadamard transform of `v`. With `normalized` the matrix is scaled by
/// `1/√n`, which makes it orthogonal and an involution.
pub fn fwht(v: &[f64], normalized: bool) -> Result<Vec<f64>> {
    let mut out = v.to_vec();
    fwht_in_place(&mut out)?;
    if normalized {
        let s = 1.0 / (out.len() as f64).sqrt();
        out.iter_mut().for_each(|x| *x *= s);
    }
    Ok(out)
}

/// Smallest power of two `>= n` (1 for `n == 0`).
pub fn next_power_of_two(n: usize) -> usize {
    n.max(1).next_power_of_two()
}
