//! Per-tick streaming latency in both attention modes, and training time as a
//! function of the number of training series.
//!
//! cargo run --release --example runtime_scaling -- [data/ucr/ECG200]

use early_benefit::eval::{bench_step_latency, bench_training_scaling, linear_fit, random_series};
use early_benefit::{AttentionMode, BenefitSpec, DecisionPolicy, LabeledDataset, Mode, ModelConfig, ModelParams, TrainConfig};

fn main() -> early_benefit::Result<()> {
    let stem = std::env::args().nth(1).unwrap_or_else(|| "data/ucr/ECG200".into());
    let (dim, hidden, len) = (107, 32, 500);
    let series = random_series(dim, len, 1)?;
    for attention in [AttentionMode::LastStateOnly, AttentionMode::Full] {
        let cfg = ModelConfig {
            attention,
            ..ModelConfig::new(dim, hidden)
        };
        let params = ModelParams::init(cfg, 0)?;
        let medians = bench_step_latency(&[(1, &params)], DecisionPolicy::outcome(attention), Some(0), &series, 11)?;
        let ticks: Vec<f64> = (1..=len).map(|t| t as f64).collect();
        let fit = linear_fit(&ticks, &medians);
        println!(
            "{attention:?}: t=10 {:.1}us, t=100 {:.1}us, t=500 {:.1}us, slope {:.4}us/tick",
            medians[9] * 1e6,
            medians[99] * 1e6,
            medians[len - 1] * 1e6,
            fit.slope * 1e6
        );
    }

    let train = LabeledDataset::load(format!("{stem}_TRAIN.tsv"))?;
    let spec = BenefitSpec::from_ms_ratio(Mode::Type, train.num_classes(), train.max_len() as f64, None)?;
    let cfg = TrainConfig {
        epochs: 10,
        batch_size: 1,
        normalize: false,
        ..TrainConfig::default()
    };
    let report = bench_training_scaling(&train, &spec, &[0.2, 0.4, 0.6, 0.8, 1.0], &cfg, 1)?;
    for row in &report.rows {
        println!("{:>4} series: {:.2}s", row.n, row.seconds);
    }
    println!("linear fit: {:.4}s per series, R^2 {:?}", report.fit.slope, report.fit.r2);
    Ok(())
}
