//! Feature construction time of structured maps relative to a dense
//! Gaussian projection, across dimensions.
//!
//! cargo run --release --example speedup_bench

use structfeat::features::Family;
use structfeat::harness::{self, BenchOptions};

fn main() -> structfeat::Result<()> {
    let opts = BenchOptions {
        ranks: vec![1, 4, 8],
        ..BenchOptions::default()
    };
    let rows = harness::bench_construction(
        &[256, 1024, 4096],
        &[Family::Circulant, Family::Fastfood, Family::ToeplitzLikeSparse, Family::Dense],
        &opts,
    )?;
    println!("{:>5} {:<22} {:>3} {:>12} {:>12} {:>9}", "n", "family", "r", "structured", "dense", "speedup");
    for row in rows {
        println!(
            "{:>5} {:<22} {:>3} {:>11.5}s {:>11.5}s {:>8.1}x",
            row.n,
            row.family.to_string(),
            row.r,
            row.wall_time_structured,
            row.wall_time_dense,
            row.speedup
        );
    }
    Ok(())
}
