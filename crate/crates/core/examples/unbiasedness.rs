//! Monte-Carlo check that structured feature maps estimate the kernel
//! without bias: averages over many independent maps against closed forms.
//!
//! cargo run --release --example unbiasedness

use structfeat::features::{Family, FeatureMapConfig, Nonlinearity};
use structfeat::harness;

fn main() -> structfeat::Result<()> {
    let n = 16;
    let trials = 5000;
    let pairs = harness::random_ball_pairs(3, n, 9);
    for family in [Family::Dense, Family::Circulant, Family::Hankel, Family::Fastfood, Family::ToeplitzLikeSparse] {
        let cfg = FeatureMapConfig::new(family, Nonlinearity::ComplexExp, n, n).with_sigma(1.0).with_rank(2);
        let stats = harness::unbiasedness_study(&pairs, &cfg, &Nonlinearity::ALL, trials)?;
        println!("{family}");
        for (p, per_pair) in stats.iter().enumerate() {
            for (nl, s) in Nonlinearity::ALL.iter().zip(per_pair) {
                println!(
                    "  pair {p} {:<12} exact {:.5}  mean {:.5} ± {:.5}  z {:+.2}",
                    nl.to_string(),
                    s.exact,
                    s.mean,
                    s.std_err,
                    s.z_score
                );
            }
        }
    }
    Ok(())
}
