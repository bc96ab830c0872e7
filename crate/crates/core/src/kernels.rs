//! Exact kernels used as ground truth for the random-feature estimators.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum KernelSpec {
    Gaussian { sigma: f64 },
    ArcCos0,
    ArcCos1,
}

impl KernelSpec {
    pub fn eval(&self, x: &[f64], z: &[f64]) -> Result<f64> {
        match *self {
            KernelSpec::Gaussian { sigma } => gaussian_kernel(x, z, sigma),
            KernelSpec::ArcCos0 => arccos0_kernel(x, z),
            KernelSpec::ArcCos1 => arccos1_kernel(x, z),
        }
    }
}

fn dot(x: &[f64], z: &[f64]) -> f64 {
    x.iter().zip(z).map(|(a, b)| a * b).sum()
}

fn norm(x: &[f64]) -> f64 {
    dot(x, x).sqrt()
}

/// `exp(-‖x - z‖² / (2σ²))`.
pub fn gaussian_kernel(x: &[f64], z: &[f64], sigma: f64) -> Result<f64> {
    check_len(x.len(), z.len())?;
    if !(sigma > 0.0) {
        return Err(Error::invalid(format!("sigma must be positive, got {sigma}")));
    }
    let d2: f64 = x.iter().zip(z).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok((-d2 / (2.0 * sigma * sigma)).exp())
}

/// Angle between `x` and `z` in `[0, π]`.
///
/// Computed as `2·atan2(‖x̂ - ẑ‖, ‖x̂ + ẑ‖)` on the unit vectors, which stays
/// accurate near 0 and π where `acos` of the (clamped) cosine loses half
/// its digits. Never NaN for nonzero inputs.
pub fn cosine_angle(x: &[f64], z: &[f64]) -> Result<f64> {
    check_len(x.len(), z.len())?;
    let (nx, nz) = (norm(x), norm(z));
    if nx == 0.0 || nz == 0.0 {
        return Err(Error::ZeroVector);
    }
    let (mut diff, mut sum) = (0.0, 0.0);
    for (a, b) in x.iter().zip(z) {
        let (u, v) = (a / nx, b / nz);
        diff += (u - v) * (u - v);
        sum += (u + v) * (u + v);
    }
    Ok((2.0 * diff.sqrt().atan2(sum.sqrt())).clamp(0.0, PI))
}

/// Order-0 arc-cosine kernel `1 - θ/π`.
pub fn arccos0_kernel(x: &[f64], z: &[f64]) -> Result<f64> {
    Ok(1.0 - cosine_angle(x, z)? / PI)
}

/// Order-1 arc-cosine kernel `(‖x‖‖z‖/π)(sin θ + (π - θ) cos θ)`.
pub fn arccos1_kernel(x: &[f64], z: &[f64]) -> Result<f64> {
    let theta = cosine_angle(x, z)?;
    Ok(norm(x) * norm(z) / PI * (theta.sin() + (PI - theta) * theta.cos()))
}
