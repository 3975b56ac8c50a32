//! Analytic gradients against central finite differences.

use graphdiff_core::model::{Denoiser, DenoiserConfig, TrainExample};
use graphdiff_core::rng::rng_from_seed;
use rand::Rng as _;

const STEPS: usize = 50;
const H: f64 = 1e-5;

fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-6)
}

#[test]
fn analytic_gradient_matches_finite_differences_at_20_points() {
    let mut rng = rng_from_seed(41);
    let mut worst: f64 = 0.0;
    for point in 0..20 {
        let cfg = DenoiserConfig { n_nodes: 5, hidden_sizes: vec![6, 5], time_embed_dim: 4, seed: point };
        let mut model = Denoiser::new(cfg).unwrap();
        // Move away from the initialization, including the zero biases.
        for p in model.params_mut() {
            *p += rng.random_range(-0.5..0.5);
        }
        let batch: Vec<TrainExample> = (0..3)
            .map(|_| TrainExample {
                xt: (0..10).map(|_| if rng.random::<bool>() { 1.0 } else { 0.0 }).collect(),
                t: rng.random_range(1..=STEPS),
                x0: (0..10).map(|_| rng.random::<bool>()).collect(),
            })
            .collect();

        let (loss, grad) = model.loss_and_grad(&batch, STEPS).unwrap();
        assert!((loss - model.loss(&batch, STEPS).unwrap()).abs() < 1e-12);
        for (i, &g) in grad.iter().enumerate() {
            let orig = model.params()[i];
            model.params_mut()[i] = orig + H;
            let up = model.loss(&batch, STEPS).unwrap();
            model.params_mut()[i] = orig - H;
            let down = model.loss(&batch, STEPS).unwrap();
            model.params_mut()[i] = orig;
            let numeric = (up - down) / (2.0 * H);
            let err = relative_error(g, numeric);
            worst = worst.max(err);
            assert!(err < 1e-4, "point {point}, param {i}: analytic {g} numeric {numeric}");
        }
    }
    println!("worst relative error {worst:e}");
}
