//! Runs a small hyperparameter grid, ranks every point by its validation
//! distance to the ideal corner, and prints the validation Pareto front.
//!
//! cargo run --release --example grid_rank -- [data/ucr/ItalyPowerDemand]

use early_benefit::eval::{pareto_front, SweepPoint};
use early_benefit::training::{grid_search, GridConfig};
use early_benefit::{LabeledDataset, Mode, TrainConfig};

fn main() -> early_benefit::Result<()> {
    let stem = std::env::args().nth(1).unwrap_or_else(|| "data/ucr/ItalyPowerDemand".into());
    let train = LabeledDataset::load(format!("{stem}_TRAIN.tsv"))?;
    let len = train.max_len() as f64;
    let grid = GridConfig {
        ms_ratios: vec![0.5 * len, 2.0 * len],
        learning_rates: vec![0.01],
        hidden_dims: vec![8],
        delta_fracs: vec![0.4, 0.6, 0.8],
    };
    let base = TrainConfig {
        epochs: 30,
        batch_size: 1,
        normalize: false,
        ..TrainConfig::default()
    };
    let mut results = grid_search(&train, Mode::Type, None, &grid, &base)?;
    results.sort_by_key(|r| r.rank.unwrap_or(usize::MAX));
    let mut points = Vec::new();
    for r in &results {
        match r.report() {
            Some(rep) => {
                println!(
                    "rank {:>2} {:<28} val accuracy {:.3} tardiness {:.3} distance {:.4}",
                    r.rank.unwrap_or(0),
                    r.point.id(),
                    rep.accuracy,
                    rep.tardiness,
                    r.distance.unwrap_or(f64::NAN)
                );
                points.push(SweepPoint::from_report(r.point.id(), rep.clone()));
            }
            None => println!("failed {}: {:?}", r.point.id(), r.outcome.as_ref().err()),
        }
    }
    for p in pareto_front(&points) {
        println!("front: {} ({:.3}, {:.3})", p.id, p.tardiness, p.accuracy);
    }
    Ok(())
}
