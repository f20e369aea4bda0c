//! The base-learner layer: hyperparameter grids, defaults, and direct
//! fits of each family.
//!
//! ```bash
//! cargo run --example learner_grids
//! ```

use cate_select::data::gen_partially_linear;
use cate_select::learners::{
    default_spec, expand_grid, fit_gbt, fit_kernel_ridge, fit_linear, fit_propensity, fit_tree,
    reduced_grid, FitContext, LearnerFamily,
};
use cate_select::numeric::mean;

fn main() -> cate_select::Result<()> {
    for &family in LearnerFamily::all() {
        let full = expand_grid(family);
        let reduced = reduced_grid(family);
        println!(
            "{:<14} grid {:>3} specs (reduced {}), default: {}",
            family.name(),
            full.len(),
            reduced.len(),
            default_spec(family).hyper_id()
        );
    }

    let ds = gen_partially_linear(400, 3, 2.0, 0.5, 0.5, 9)?;
    let x = ds.x().view();
    let y = ds.yf();

    let ridge = fit_linear(&default_spec(LearnerFamily::L2Linear), x, y, None)?;
    let kr = fit_kernel_ridge(&default_spec(LearnerFamily::KernelRidge), x, y)?;
    let tree = fit_tree(&default_spec(LearnerFamily::Tree), x, y, None)?;
    let gbt = fit_gbt(&default_spec(LearnerFamily::GbtLight), x, y, None, 50, 0.1)?;

    let rmse = |pred: &[f64]| -> f64 {
        (pred.iter().zip(y).map(|(p, t)| (p - t) * (p - t)).sum::<f64>() / y.len() as f64).sqrt()
    };
    println!("in-sample RMSE  ridge {:.3}", rmse(&ridge.predict(x)?));
    println!("in-sample RMSE  kernel ridge {:.3}", rmse(&kr.predict(x)?));
    println!("in-sample RMSE  tree {:.3}", rmse(&tree.predict(x)?));
    println!("in-sample RMSE  gbt (50 rounds) {:.3}", rmse(&gbt.predict(x)?));

    // boosting exposes its per-round training losses
    let losses = gbt.gbt_train_losses().unwrap();
    println!("gbt loss round 1 {:.4} -> round 50 {:.4}", losses[0], losses[49]);

    // every family also fits in probability-classification mode
    let prop = fit_propensity(
        &default_spec(LearnerFamily::GbtLight),
        x,
        ds.t(),
        &FitContext { ensemble_size: 50, learning_rate: 0.1, seed: 0 },
    )?;
    let e = prop.predict(x)?;
    println!(
        "propensity predictions: mean {:.3}, range [{:.3}, {:.3}] (clipped to [0.01, 0.99])",
        mean(&e),
        e.iter().cloned().fold(f64::INFINITY, f64::min),
        e.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
    );
    Ok(())
}
