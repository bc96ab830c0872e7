//! Fast matrix-vector products for every structured family, checked against
//! the dense matrix each operator represents.
//!
//! cargo run --release --example structured_apply

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use structfeat::structured::{
    AnyOperator, CirculantOp, FastfoodOp, HankelOp, SkewCirculantOp, StructuredOperator, ToeplitzLikeOp, ToeplitzOp,
};

fn gauss(rng: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
    (0..len).map(|_| rng.sample(StandardNormal)).collect()
}

fn main() -> structfeat::Result<()> {
    let n = 1024;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let signs: Vec<f64> = (0..n).map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 }).collect();
    let mut perm: Vec<usize> = (0..n).collect();
    rand::seq::SliceRandom::shuffle(perm.as_mut_slice(), &mut rng);

    let ops = [
        ("circulant", AnyOperator::Circulant(CirculantOp::new(gauss(&mut rng, n))?)),
        ("skew-circulant", AnyOperator::SkewCirculant(SkewCirculantOp::new(gauss(&mut rng, n))?)),
        ("toeplitz", AnyOperator::Toeplitz(ToeplitzOp::new(gauss(&mut rng, 2 * n - 1))?)),
        ("hankel", AnyOperator::Hankel(HankelOp::new(gauss(&mut rng, 2 * n - 1))?)),
        (
            "toeplitz-like r=4",
            AnyOperator::ToeplitzLike(ToeplitzLikeOp::new(
                (0..4).map(|_| (gauss(&mut rng, n), gauss(&mut rng, n))).collect(),
            )?),
        ),
        (
            "fastfood",
            AnyOperator::Fastfood(FastfoodOp::new(vec![1.0; n], gauss(&mut rng, n), signs, perm)?),
        ),
    ];

    let x = gauss(&mut rng, n);
    println!("{:<18} {:>12} {:>12} {:>12}", "family", "fast (us)", "dense (us)", "rel. error");
    for (name, op) in &ops {
        let t = Instant::now();
        let fast = op.apply(&x)?;
        let fast_us = t.elapsed().as_secs_f64() * 1e6;

        let dense = op.materialize()?;
        let t = Instant::now();
        let reference = &dense * nalgebra::DVector::from_column_slice(&x);
        let dense_us = t.elapsed().as_secs_f64() * 1e6;

        let err = (nalgebra::DVector::from_column_slice(&fast) - &reference).norm() / reference.norm();
        println!("{name:<18} {fast_us:>12.1} {dense_us:>12.1} {err:>12.2e}");
    }
    Ok(())
}
