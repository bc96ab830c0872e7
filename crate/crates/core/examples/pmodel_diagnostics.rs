//! Coherence, uni-coherence and chromatic bounds of the P-model behind each
//! structured family.
//!
//! cargo run --release --example pmodel_diagnostics

use structfeat::pmodel::{self, FamilyTag, PModel, PModelParams};

fn main() -> structfeat::Result<()> {
    let n = 32;
    let cases = [
        (FamilyTag::Circulant, PModelParams::default()),
        (FamilyTag::Toeplitz, PModelParams::default()),
        (FamilyTag::Hankel, PModelParams::default()),
        (FamilyTag::Fastfood, PModelParams::default()),
        (FamilyTag::ToeplitzLikeSparse, PModelParams { r: 2, alpha: 1 }),
        (FamilyTag::ToeplitzLikeSparse, PModelParams { r: 2, alpha: 3 }),
        (FamilyTag::ToeplitzLikeDense, PModelParams { r: 2, alpha: 1 }),
    ];
    println!(
        "{:<22} {:>3} {:>5} {:>8} {:>9} {:>6} {:>6} {:>6}",
        "family", "r", "alpha", "mu", "mu_tilde", "chi", "clique", "kappa"
    );
    for (tag, params) in cases {
        let model = PModel::build(tag, n, n, params, 3)?;
        let d = pmodel::diagnose(&model)?;
        let kappa = d.kappa.map_or("-".to_string(), |k| k.to_string());
        println!(
            "{:<22} {:>3} {:>5} {:>8.4} {:>9.3} {:>6} {:>6} {:>6}",
            d.family.to_string(), d.r, d.alpha, d.mu, d.mu_tilde, d.chi_bound, d.chi_lower, kappa
        );
    }

    let model = PModel::build(FamilyTag::ToeplitzLikeSparse, 16, 16, PModelParams { r: 1, alpha: 2 }, 0)?;
    let graph = pmodel::coherence_graph(&model, 0, 1)?;
    println!(
        "\nsparse toeplitz-like n=16 alpha=2, graph (0,1): {} vertices, {} edges, chromatic bound {}",
        graph.len(),
        graph.edge_count(),
        pmodel::chromatic_bound(&graph)
    );
    Ok(())
}
