//! Approximate the Gaussian and arc-cosine Gram matrices of a small
//! two-cluster dataset with dense and structured random features.
//!
//! cargo run --release --example kernel_approximation

use structfeat::features::{Family, FeatureMapConfig, Nonlinearity};
use structfeat::harness;

fn main() -> structfeat::Result<()> {
    let ds = harness::gen_g50c_like(200, 30, 42)?;
    println!("dataset: {} points in {} dimensions", ds.l(), ds.n());

    for nl in Nonlinearity::ALL {
        let base = harness::resolve_config(&ds, &FeatureMapConfig::new(Family::Dense, nl, 512, 32).with_seed(1));
        if let Some(sigma) = base.sigma {
            println!("\n{nl} (median-heuristic sigma {sigma:.3})");
        } else {
            println!("\n{nl}");
        }
        let exact = harness::exact_gram(&ds, &harness::target_kernel(&base))?;
        for (family, r) in [
            (Family::Dense, 1),
            (Family::Circulant, 1),
            (Family::Toeplitz, 1),
            (Family::Fastfood, 1),
            (Family::ToeplitzLikeSparse, 4),
        ] {
            let cfg = FeatureMapConfig { family, r, ..base.clone() };
            let errors = harness::gram_errors(&ds, &exact, &cfg, 5)?;
            println!("  {:<24} median relative Frobenius error {:.4}", format!("{family} r={r}"), harness::median(&errors));
        }
    }
    Ok(())
}
