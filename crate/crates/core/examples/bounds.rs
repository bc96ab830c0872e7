//! Evaluate the concentration bounds for a structured P-model using its
//! measured coherence and chromatic numbers.
//!
//! cargo run --release --example bounds

use structfeat::pmodel::{self, BoundInputs, FamilyTag, PModel, PModelParams};

fn main() -> structfeat::Result<()> {
    let n = 64;
    let m = 16;
    for (tag, params) in [
        (FamilyTag::Circulant, PModelParams::default()),
        (FamilyTag::Fastfood, PModelParams::default()),
        (FamilyTag::ToeplitzLikeSparse, PModelParams { r: 4, alpha: 2 }),
    ] {
        let model = PModel::build(tag, n, m, params, 5)?;
        let inputs = BoundInputs {
            n,
            m,
            d: 1,
            t: 20.0,
            eps: 0.5,
            mu: pmodel::coherence(&model),
            chi: pmodel::chromatic_table(&model),
            eta: pmodel::eta(&model).ok(),
            k: Some(256),
        };
        let report = pmodel::evaluate_bounds(&inputs)?;
        println!("{tag} (mu {:.4})", inputs.mu);
        println!("  p_gen {:.4e}  p_struct {:.4e}", report.p_gen, report.p_struct);
        if let Some(p) = report.p_wrong {
            println!("  p_wrong {p:.4e}");
        }
        if let Some(gap) = report.variance_gap {
            println!("  variance gap scale {gap:.4e}");
        }
    }

    let g = pmodel::sparse_ldr_guarantee(2, 4, n);
    println!(
        "\nsparse Toeplitz-like with kappa=2: chi <= {}, mu <= {}, rank condition met: {}",
        g.chi_bound, g.mu_bound, g.rank_condition
    );
    for tau in [0.5, 1.0, 2.0] {
        println!("  tail bound at tau={tau}: {:.4e}", pmodel::coherence_tail_bound(n, tau, 2, 4, 2, 1.0));
    }
    Ok(())
}
