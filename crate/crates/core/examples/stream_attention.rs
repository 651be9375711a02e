//! Streams one test series through a trained type-mode bundle, printing each
//! class's benefit estimate per tick and where attention sits when it decides.
//!
//! cargo run --release --example stream_attention -- [data/ucr/ItalyPowerDemand] [index]

use early_benefit::stream::{init_stream, Status};
use early_benefit::{train_bundle, BenefitSpec, LabeledDataset, Mode, TrainConfig};

fn main() -> early_benefit::Result<()> {
    let mut args = std::env::args().skip(1);
    let stem = args.next().unwrap_or_else(|| "data/ucr/ItalyPowerDemand".into());
    let index: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(0);
    let train = LabeledDataset::load(format!("{stem}_TRAIN.tsv"))?;
    let test = LabeledDataset::load_with_map(format!("{stem}_TEST.tsv"), train.label_map())?;
    let spec = BenefitSpec::from_ms_ratio(Mode::Type, train.num_classes(), 2.0 * train.max_len() as f64, None)?;
    let cfg = TrainConfig {
        epochs: 60,
        batch_size: 1,
        normalize: false,
        delta_frac: 0.4,
        ..TrainConfig::default()
    };
    let bundle = train_bundle(&train, &spec, &cfg)?;
    let prepared = bundle.prepare(&test)?;
    let inst = &prepared.instances()[index.min(prepared.len() - 1)];
    println!("series {} (label {}), margin {:.2}", inst.id, train.label_map().name(inst.label), bundle.policy.delta_abs);

    let mut state = init_stream(&bundle, bundle.policy)?;
    let mut shown = false;
    for x in inst.sequence().rows() {
        let out = state.observe(x)?;
        let est: Vec<String> = out.estimates.iter().map(|(c, b)| format!("{c}:{b:>7.2}")).collect();
        println!("t={:>3} {}  {:?}", out.tick, est.join(" "), out.status);
        if let (Status::Decided { .. }, false) = (out.status, shown) {
            shown = true;
            for (class, alpha) in state.attention_snapshot()? {
                let peak = alpha.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).map(|(i, _)| i + 1);
                println!("  class {class} attention peaks at tick {peak:?}: {alpha:.3?}");
            }
        }
    }
    println!("final: {:?}", state.finalize(inst.len())?.status);
    Ok(())
}
