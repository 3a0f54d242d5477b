//! Compare analytic gradients of the logistic-regression and MLP objectives
//! with central finite differences.
//!
//! cargo run --example gradient_check

use hgd::classifiers::{
    finite_difference_grad, max_relative_error, LabeledSet, LogRegModel, MlpModel, TrainConfig,
};

fn main() -> hgd::Result<()> {
    let rows = [[0.2, -1.0, 0.5], [1.5, 0.3, -0.7], [-0.4, 0.8, 1.1], [0.9, -0.2, 0.0], [-1.2, 0.6, 0.3]];
    let labels = ["sar", "ser", "sor", "sar", "ser"];
    let data = LabeledSet::from_rows(&rows, &labels)?;

    let theta: Vec<f64> = (0..LogRegModel::num_params(&data)).map(|i| (i as f64 * 0.37).sin()).collect();
    let analytic = LogRegModel::gradient(&data, 1e-2, &theta);
    let numeric = finite_difference_grad(|t| LogRegModel::objective(&data, 1e-2, t), &theta, 1e-5)?;
    println!("logreg: {} params, max relative error {:.2e}", theta.len(), max_relative_error(&analytic, &numeric, 1e-6));

    let hidden = [4, 3];
    let cfg = TrainConfig::mlp_default(7);
    for steps in [0, 10] {
        let theta = MlpModel::params_after(&data, &hidden, &cfg, steps)?;
        let analytic = MlpModel::gradient(&data, &hidden, cfg.l2, &theta)?;
        let numeric = finite_difference_grad(
            |t| MlpModel::objective(&data, &hidden, cfg.l2, t).expect("shapes fixed"),
            &theta,
            1e-5,
        )?;
        println!(
            "mlp after {steps:>2} steps: {} params, max relative error {:.2e}",
            theta.len(),
            max_relative_error(&analytic, &numeric, 1e-6)
        );
    }
    Ok(())
}
