//! Displacement rank of Toeplitz-like sums of circulant times skew-circulant
//! products, and of plain Toeplitz matrices.
//!
//! cargo run --release --example displacement_rank

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use structfeat::structured::{displacement_rank, StructuredOperator, ToeplitzLikeOp, ToeplitzOp};

fn main() -> structfeat::Result<()> {
    let n = 32;
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut gauss = |len: usize| -> Vec<f64> { (0..len).map(|_| rng.sample(StandardNormal)).collect() };

    for r in [1, 2, 4, 8] {
        let gens = (0..r).map(|_| (gauss(n), gauss(n))).collect();
        let t = ToeplitzLikeOp::new(gens)?.materialize()?;
        println!("toeplitz-like with {r} generator pairs: displacement rank {}", displacement_rank(&t)?);
    }
    let t = ToeplitzOp::new(gauss(2 * n - 1))?.materialize()?;
    println!("random toeplitz: displacement rank {}", displacement_rank(&t)?);
    let dense = nalgebra::DMatrix::from_fn(n, n, |_, _| gauss(1)[0]);
    println!("dense gaussian: displacement rank {}", displacement_rank(&dense)?);
    Ok(())
}
