//! Loads a UCR file, builds a small multivariate series with gaps and artifacts,
//! and runs it through interpolation, trimming, downsampling and scaling.
//!
//! cargo run --example load_and_preprocess -- [data/ucr/ItalyPowerDemand]

use early_benefit::dataio::{
    fit_apply_normalize, interpolate_missing, median_downsample, trim_artifacts, Role, DEFAULT_LEAD_SIGMA,
    DEFAULT_TRAIL_EPS,
};
use early_benefit::{LabelMap, LabeledDataset, SeriesInstance};

fn main() -> early_benefit::Result<()> {
    let stem = std::env::args().nth(1).unwrap_or_else(|| "data/ucr/ItalyPowerDemand".into());
    let train = LabeledDataset::load(format!("{stem}_TRAIN.tsv"))?;
    let test = LabeledDataset::load_with_map(format!("{stem}_TEST.tsv"), train.label_map())?;
    println!(
        "{stem}: {} train / {} test, dim {}, max length {}, labels {:?}, class counts {:?}",
        train.len(),
        test.len(),
        train.dim(),
        train.max_len(),
        train.label_map().names(),
        train.class_counts()
    );
    let (train_n, _test_n, stats) = fit_apply_normalize(&train, &test)?;
    let first = &train_n.instances()[0];
    println!("first scaled series starts {:?}", &first.values()[..4]);
    println!("scaling: {} channel(s)", stats.dim());

    // two channels, a spike at tick 1, a gap, and a flat tail of zeros
    let none = f64::NAN;
    let rows = [
        [40.0, 1.0],
        [0.1, 1.1],
        [0.2, none],
        [0.3, 1.3],
        [none, 1.4],
        [0.5, 1.5],
        [0.0, 0.0],
        [0.0, 0.0],
    ];
    let values: Vec<Option<f64>> = rows.iter().flatten().map(|&v| (!v.is_nan()).then_some(v)).collect();
    let raw = SeriesInstance::with_missing("demo", 0, 2, values)?;
    println!("raw: {} ticks, {} missing", raw.len(), raw.missing_count());
    let filled = interpolate_missing(&raw)?;
    println!("interpolated channel 1: {:?}", filled.channel(1));
    let trimmed = trim_artifacts(&filled, DEFAULT_LEAD_SIGMA, DEFAULT_TRAIL_EPS)?;
    println!("trimmed to {} ticks: {:?}", trimmed.len(), trimmed.channel(0));
    let down = median_downsample(&trimmed, 2)?;
    println!("median of windows of 2: {:?}", down.channel(0));

    let demo = LabeledDataset::new(vec![down], LabelMap::identity(2), Role::Train)?;
    println!("demo dataset: {} series of dim {}", demo.len(), demo.dim());
    Ok(())
}
