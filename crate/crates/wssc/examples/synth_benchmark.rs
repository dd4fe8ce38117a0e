//! Run the synthetic benchmark that contrasts segmented matching with the
//! full-spectrum baselines, and print per-method accuracies and the
//! segmented method's confusion matrix.
//!
//! ```bash
//! cargo run --release -p wssc --example synth_benchmark
//! ```

use wssc::matching::MatchConfig;
use wssc::synth::{evaluate_scenario, find_scenario, TestSetParams};

fn main() -> wssc::Result<()> {
    let scenario = find_scenario("localized-features")?;
    println!("scenario: {}", scenario.name);
    println!("{}", scenario.description);
    println!();

    let params = TestSetParams {
        count: 1000,
        dominant_fraction: 0.7,
        snr_db: 30.0,
        pure: false,
    };
    let outcome = evaluate_scenario(scenario, &params, 42, &MatchConfig::default())?;

    println!("{} test spectra (70/30 mixtures, 30 dB SNR, seed 42)", outcome.sample_count);
    println!();
    println!("{:<14} accuracy", "method");
    for m in &outcome.methods {
        println!("{:<14} {:.4}", m.method, m.accuracy);
    }

    let wssc = outcome.method("wssc").unwrap();
    println!();
    println!("wssc confusion matrix (rows = truth, columns = prediction):");
    let col = |name: &str| format!("{:>13}", &name[..name.len().min(12)]);
    print!("{:<20}", "");
    for name in &outcome.class_names {
        print!("{}", col(name));
    }
    println!("{}", col("unclassified"));
    for (i, row) in wssc.confusion.iter().enumerate() {
        print!("{:<20}", outcome.class_names[i]);
        for v in row {
            print!("{v:>13}");
        }
        println!();
    }
    Ok(())
}
