//! Compares the analytic gradient against central finite differences, per
//! parameter group, for both attention modes.
//!
//! cargo run --example gradient_check -- [seed]

use early_benefit::neural::{backward, finite_diff_grad, group_relative_error, ParamGroup, PrefixSample};
use early_benefit::{AttentionMode, ModelConfig, ModelParams, SeriesInstance};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> early_benefit::Result<()> {
    let seed: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (d, h, t) = (3, 8, 7);
    let values: Vec<f64> = (0..d * t).map(|_| rng.random_range(-1.0..1.0)).collect();
    let inst = SeriesInstance::new("g", 0, d, values)?;
    let seq = inst.sequence();
    let batch: Vec<PrefixSample> = (1..=t)
        .map(|k| PrefixSample {
            prefix: seq.prefix(k),
            target: rng.random_range(-2.0..2.0),
        })
        .collect();
    for attention in [AttentionMode::Full, AttentionMode::LastStateOnly] {
        let cfg = ModelConfig {
            attention,
            ..ModelConfig::new(d, h)
        };
        let params = ModelParams::init(cfg, seed)?;
        let (loss, analytic) = backward(&params, &batch)?;
        let numeric = finite_diff_grad(&params, &batch, 1e-5)?;
        println!("{attention:?}: loss {loss:.6}, {} parameters", params.len());
        for g in ParamGroup::ALL {
            println!("  {:<14} max relative error {:.2e}", g.name(), group_relative_error(&analytic, &numeric, g));
        }
    }
    Ok(())
}
