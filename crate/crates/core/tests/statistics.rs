use structfeat::features::{Family, FeatureMap, FeatureMapConfig, FeatureVector, Nonlinearity};
use structfeat::harness;

const N: usize = 32;

fn pair(seed: u64) -> (Vec<f64>, Vec<f64>) {
    harness::random_ball_pairs(1, N, seed).remove(0)
}

fn cfg(family: Family, nl: Nonlinearity, k: usize, m: usize) -> FeatureMapConfig {
    FeatureMapConfig::new(family, nl, k, m).with_sigma(1.0).with_seed(11)
}

#[test]
fn projected_coordinates_are_standard_normal() {
    let (x, _) = pair(1);
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    let trials = 2000;
    for family in [Family::Circulant, Family::Toeplitz, Family::Hankel, Family::Fastfood, Family::ToeplitzLikeSparse] {
        let c = cfg(family, Nonlinearity::Step, N, N);
        // one coordinate per independent map, taken from different rows
        let samples: Vec<f64> = (0..trials as u64)
            .map(|t| {
                let fm = FeatureMap::for_trial(&c, N, t).unwrap();
                let u = fm.project(&fm.preprocess(&x).unwrap()).unwrap();
                u[t as usize % N] / norm
            })
            .collect();
        let d = harness::ks_statistic_normal(&samples);
        assert!(d < harness::ks_critical_001(trials), "{family}: KS statistic {d}");
    }
}

#[test]
fn dense_variance_scales_inversely_with_k() {
    let (x, z) = pair(2);
    let cfgs: Vec<_> = [32, 128, 512]
        .iter()
        .map(|&k| cfg(Family::Dense, Nonlinearity::ComplexExp, k, N))
        .collect();
    let profile = harness::variance_profile(&x, &z, &cfgs, 2000).unwrap();
    let scaled: Vec<f64> = profile.iter().map(|p| p.variance * p.k as f64).collect();
    let (lo, hi) = scaled.iter().fold((f64::MAX, 0.0f64), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    assert!(hi / lo < 1.5, "k·variance {scaled:?}");
}

#[test]
fn single_row_blocks_match_dense_variance() {
    // with m = 1 every feature comes from an independent block
    let (x, z) = pair(3);
    let cfgs = [
        cfg(Family::Dense, Nonlinearity::Relu, 64, 1),
        cfg(Family::Circulant, Nonlinearity::Relu, 64, 1),
        cfg(Family::Toeplitz, Nonlinearity::Relu, 64, 1),
    ];
    let profile = harness::variance_profile(&x, &z, &cfgs, 3000).unwrap();
    for p in &profile[1..] {
        let ratio = p.variance / profile[0].variance;
        assert!((0.8..1.25).contains(&ratio), "{}: ratio {ratio}", p.family);
    }
}

#[test]
fn more_displacement_rank_does_not_raise_variance() {
    let (x, z) = pair(4);
    let base = cfg(Family::ToeplitzLikeSparse, Nonlinearity::ComplexExp, N, N).with_alpha(4);
    let profile =
        harness::variance_profile(&x, &z, &[base.clone().with_rank(1), base.with_rank(8)], 3000).unwrap();
    assert!(profile[1].variance <= 1.1 * profile[0].variance, "{profile:?}");
}

#[test]
fn dense_gram_error_shrinks_with_k() {
    let ds = harness::gen_g50c_like(60, 10, 5).unwrap();
    let base = harness::resolve_config(&ds, &FeatureMapConfig::new(Family::Dense, Nonlinearity::ComplexExp, 16, 16));
    let exact = harness::exact_gram(&ds, &harness::target_kernel(&base)).unwrap();
    let errors: Vec<f64> = [16, 64, 256, 1024]
        .iter()
        .map(|&k| {
            let c = FeatureMapConfig { k, ..base.clone() };
            harness::median(&harness::gram_errors(&ds, &exact, &c, 9).unwrap())
        })
        .collect();
    assert!(errors.windows(2).all(|w| w[1] < w[0]), "{errors:?}");
}

#[test]
fn relu_single_feature_by_hand() {
    let c = cfg(Family::Dense, Nonlinearity::Relu, 1, 1);
    let fm = FeatureMap::new(&c, 3).unwrap();
    let w = fm.projection_matrix().unwrap();
    let x = [0.3, -0.2, 0.5];
    let px = fm.preprocess(&x).unwrap();
    let dot: f64 = w.row(0).iter().zip(px.as_slice()).map(|(a, b)| a * b).sum();
    let FeatureVector::Real(f) = fm.embed(&px).unwrap() else {
        panic!("relu features are real");
    };
    assert_eq!(f.len(), 1);
    assert!((f[0] - 2f64.sqrt() * dot.max(0.0)).abs() < 1e-12);
}

#[test]
fn preprocessing_preserves_norm_and_inner_products() {
    let (x, z) = harness::random_ball_pairs(1, 20, 6).remove(0);
    let fm = FeatureMap::new(&cfg(Family::Circulant, Nonlinearity::Step, 32, 32), 20).unwrap();
    let (px, pz) = (fm.preprocess(&x).unwrap(), fm.preprocess(&z).unwrap());
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(u, v)| u * v).sum::<f64>();
    assert_eq!(px.as_slice().len(), 32);
    assert!((dot(px.as_slice(), pz.as_slice()) - dot(&x, &z)).abs() < 1e-12);
    assert!((dot(px.as_slice(), px.as_slice()) - dot(&x, &x)).abs() < 1e-12);
}

#[test]
fn structured_estimates_center_on_the_kernel() {
    let (x, z) = pair(7);
    for nl in Nonlinearity::ALL {
        let s = harness::unbiasedness_stats(&x, &z, &cfg(Family::Hankel, nl, N, N), 4000).unwrap();
        assert!(s.z_score.abs() < 4.5, "{nl}: {s:?}");
    }
}
