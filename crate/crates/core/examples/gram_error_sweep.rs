//! Relative Frobenius error of the approximate Gram matrix as the number of
//! features grows, with Toeplitz-like maps of increasing displacement rank.
//! Writes plot-ready long-format CSV to stdout.
//!
//! cargo run --release --example gram_error_sweep > sweep.csv

use structfeat::features::{Family, FeatureMapConfig, Nonlinearity};
use structfeat::harness;

fn main() -> structfeat::Result<()> {
    let ds = harness::gen_g50c_like(550, 50, 42)?;
    let base = FeatureMapConfig::new(Family::Dense, Nonlinearity::ComplexExp, 64, 64).with_alpha(5);
    let ks = [64, 128, 256, 512, 1024];
    let mut reports = harness::approx_sweep(&ds, &base, &[Family::Dense, Family::Circulant, Family::Fastfood], &ks, 10)?;
    for r in [1, 2, 4, 8] {
        let cfg = base.clone().with_rank(r);
        reports.extend(harness::approx_sweep(&ds, &cfg, &[Family::ToeplitzLikeSparse], &ks, 10)?);
    }
    print!("{}", harness::gram_reports_csv(&reports));
    Ok(())
}
