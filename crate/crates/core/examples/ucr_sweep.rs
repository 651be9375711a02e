//! Trains type-mode bundles over an `M/s` grid on a UCR train/test pair and
//! prints test accuracy and tardiness for every margin fraction.
//!
//! cargo run --release --example ucr_sweep -- data/ucr/ECG200 [seed] [epochs] [batch] [patience] [lr] [hidden]
//!
//! UCR series arrive z-normalized, so no further scaling is fitted.

use std::time::Instant;

use early_benefit::dataio::LabeledDataset;
use early_benefit::eval::{accuracy_at_tolerance, pareto_front, SweepPoint};
use early_benefit::training::GridConfig;
use early_benefit::{train_bundle, BenefitSpec, Mode, TrainConfig};

fn main() -> early_benefit::Result<()> {
    let mut args = std::env::args().skip(1);
    let stem = args.next().unwrap_or_else(|| "data/ucr/ECG200".into());
    let seed: u64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(0);
    let epochs: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(300);
    let batch_size: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(1);
    let patience: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(20);
    let learning_rate: f64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(0.01);
    let hidden_dim: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(16);
    let train = LabeledDataset::load(format!("{stem}_TRAIN.tsv"))?;
    let test = LabeledDataset::load_with_map(format!("{stem}_TEST.tsv"), train.label_map())?;
    let grid = GridConfig::standard(train.max_len());

    let mut points = Vec::new();
    for &ms in &grid.ms_ratios {
        let spec = BenefitSpec::from_ms_ratio(Mode::Type, train.num_classes(), ms, None)?;
        let cfg = TrainConfig {
            seed,
            epochs,
            batch_size,
            learning_rate,
            hidden_dim,
            normalize: false,
            patience: (patience > 0).then_some(patience),
            ..TrainConfig::default()
        };
        let start = Instant::now();
        let bundle = train_bundle(&train, &spec, &cfg)?;
        let elapsed = start.elapsed().as_secs_f64();
        let prepared = bundle.prepare(&test)?;
        for &delta in &grid.delta_fracs {
            let b = bundle.with_delta_frac(delta);
            let r = b.evaluate_prepared(&prepared)?;
            println!(
                "M/s {ms:>6} delta {delta:.1}: acc {:.3} tard {:.3} unclassified {:>3} ({elapsed:.1}s)",
                r.accuracy, r.tardiness, r.unclassified
            );
            points.push(SweepPoint::from_report(format!("ms{ms}_d{delta}"), r));
        }
    }
    for tol in [0.5, 0.6, 0.75, 1.0] {
        match accuracy_at_tolerance(&points, tol) {
            Some(a) => println!("best accuracy at tardiness <= {tol:.2}: {a:.3}"),
            None => println!("best accuracy at tardiness <= {tol:.2}: -"),
        }
    }
    for p in pareto_front(&points) {
        println!("front: {} tard {:.3} acc {:.3}", p.id, p.tardiness, p.accuracy);
    }
    Ok(())
}
