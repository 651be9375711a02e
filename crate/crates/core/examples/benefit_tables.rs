//! Prints the per-tick benefit targets each regressor learns, in both modes, and
//! shows how the type-mode margin follows from the cost matrix.
//!
//! cargo run --example benefit_tables

use early_benefit::benefit::{build_targets, total_benefit};
use early_benefit::{BenefitSpec, DecisionRecord, Mode, SeriesInstance};

fn main() -> early_benefit::Result<()> {
    let len = 6;
    // outcome mode: class 0 survives (no action), class 1 dies; M/s = 4
    let outcome = BenefitSpec::from_ms_ratio(Mode::Outcome, 2, 4.0, Some(0))?;
    println!("outcome mode, M/s = 4, L = {len}; only class 1 has a regressor");
    for truth in 0..2 {
        let inst = SeriesInstance::new("x", truth, 1, vec![0.0; len])?;
        let b = build_targets(&outcome, &inst, 1)?;
        println!("  truth {truth}: {:?}", b.values);
    }

    // type mode with an asymmetric cost: confusing 2 for 0 is the expensive error
    let cost = vec![vec![0.0, 1.0, 2.0], vec![1.0, 0.0, 1.0], vec![6.0, 1.0, 0.0]];
    let typed = BenefitSpec::new(Mode::Type, 0.5, cost, None)?;
    println!("type mode, s = 0.5, every class modeled");
    for truth in 0..3 {
        let inst = SeriesInstance::new("x", truth, 1, vec![0.0; len])?;
        for model in 0..3 {
            let b = build_targets(&typed, &inst, model)?;
            println!("  truth {truth} model {model}: {:?}", b.values);
        }
        println!("  spread for truth {truth}: {}", typed.target_spread(truth));
    }
    let max_spread = (0..3).map(|l| typed.target_spread(l)).fold(0.0, f64::max);
    println!("margin at delta 0.5: {}", 0.5 * max_spread);

    let decisions = [
        DecisionRecord::new(1, Some(1), 2, len),
        DecisionRecord::new(0, Some(1), 3, len),
        DecisionRecord::new(0, None, len, len),
    ];
    for m in [1.0, 4.0, 8.0] {
        let spec = BenefitSpec::from_ms_ratio(Mode::Outcome, 2, m, Some(0))?;
        println!("total benefit of three fixed decisions at M/s = {m}: {}", total_benefit(&spec, &decisions)?);
    }
    Ok(())
}
