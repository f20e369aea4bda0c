//! The two built-in generators: the sinusoidal two-arm demonstration DGP
//! with a missing treated band, and the partially linear confounded DGP.
//!
//! ```bash
//! cargo run --example synthetic_data
//! ```

use cate_select::data::{gen_partially_linear, gen_sinusoidal_demo};
use cate_select::numeric::{mean, variance_sample};

fn main() -> cate_select::Result<()> {
    // sinusoidal arms with treated units removed inside [-2, 2]
    let demo = gen_sinusoidal_demo(300, 120, Some((-2.0, 2.0)), 0.3, 7)?;
    let treated_in_band = demo
        .treated_indices()
        .iter()
        .filter(|&&i| (-2.0..=2.0).contains(&demo.x()[[i, 0]]))
        .count();
    println!(
        "sinusoidal: {} units ({} treated after band removal), treated inside band: {}",
        demo.n(),
        demo.treated_indices().len(),
        treated_in_band
    );

    // partially linear with a constant effect of 2 and logistic confounding
    let ds = gen_partially_linear(2000, 5, 2.0, 1.0, 1.0, 1)?;
    let tau = ds.tau_true().unwrap();
    println!("partially linear: n={}, d={}, τ(x) ≡ {}", ds.n(), ds.dim(), tau[0]);

    // confounding bias: naive difference-in-means overshoots θ = 2
    let y1: Vec<f64> = ds.treated_indices().iter().map(|&i| ds.yf()[i]).collect();
    let y0: Vec<f64> = ds.control_indices().iter().map(|&i| ds.yf()[i]).collect();
    let dim = mean(&y1) - mean(&y0);
    let se = (variance_sample(&y1) / y1.len() as f64 + variance_sample(&y0) / y0.len() as f64)
        .sqrt();
    println!(
        "difference-in-means: {dim:.3} (true effect 2.0, gap {:.1} standard errors)",
        (dim - 2.0).abs() / se
    );

    // without confounding the same estimate is honest
    let fair = gen_partially_linear(2000, 5, 2.0, 0.0, 1.0, 1)?;
    let y1: Vec<f64> = fair.treated_indices().iter().map(|&i| fair.yf()[i]).collect();
    let y0: Vec<f64> = fair.control_indices().iter().map(|&i| fair.yf()[i]).collect();
    println!("unconfounded difference-in-means: {:.3}", mean(&y1) - mean(&y0));
    Ok(())
}
