//! Generates the synthetic outcome dataset, trains a bundle, scores it on a
//! held-out split, and round-trips the bundle through disk.
//!
//! cargo run --release --example train_outcome -- [seed]

use early_benefit::stream::{run_decisions, ReplayOptions};
use early_benefit::synth::{synth_outcome_dataset, SynthConfig};
use early_benefit::training::{load_bundle, save_bundle, split_indices};
use early_benefit::{evaluate, train_bundle, BenefitSpec, Mode, TrainConfig};

fn main() -> early_benefit::Result<()> {
    let seed: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(0);
    let synth = SynthConfig::default();
    let (data, truth) = synth_outcome_dataset(&synth)?;
    println!(
        "{} series, dim {}, drift on channels {:?}, counts {:?}",
        data.len(),
        data.dim(),
        truth.drift_channels,
        data.class_counts()
    );
    let labels: Vec<usize> = data.instances().iter().map(|i| i.label).collect();
    let (train_idx, test_idx) = split_indices(&labels, 0.7, seed)?;
    let (train, test) = (data.subset(&train_idx)?, data.subset(&test_idx)?);

    // class 0 needs no action; a false alarm costs twice the longest series
    let spec = BenefitSpec::from_ms_ratio(Mode::Outcome, 2, 2.0 * synth.max_len as f64, Some(0))?;
    let cfg = TrainConfig {
        seed,
        epochs: 60,
        patience: Some(15),
        batch_size: 1,
        ..TrainConfig::default()
    };
    let bundle = train_bundle(&train, &spec, &cfg)?;
    for m in &bundle.models {
        println!(
            "class {} regressor: best epoch {:?} of {}, validation mse {:?}",
            m.class,
            m.history.best_epoch,
            m.history.epochs.len(),
            m.history.best_val()
        );
    }
    let prepared = bundle.prepare(&test)?;
    let runs = run_decisions(&bundle, &prepared, ReplayOptions::default())?;
    let records: Vec<_> = runs.into_iter().map(|r| r.record).collect();
    let report = evaluate(&records, &bundle.spec, bundle.positive_class)?;
    println!(
        "test: precision {:.3} recall {:.3} accuracy {:.3} tardiness {:.3} total benefit {:.1}",
        report.precision, report.recall, report.accuracy, report.tardiness, report.total_benefit
    );

    let dir = std::env::temp_dir().join("early_benefit_example");
    std::fs::create_dir_all(&dir)?;
    let path = dir.join("outcome_bundle.json");
    save_bundle(&bundle, &path)?;
    let back = load_bundle(&path)?;
    println!("bundle saved to {} and reloaded: identical = {}", path.display(), back == bundle);
    Ok(())
}
