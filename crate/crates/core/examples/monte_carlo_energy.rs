//! Closed-form expected energy against sampled energy with random unit-power signals.

use wpt_marl::env::{EnvConfig, SignalModel, WptEnv};

fn main() -> wpt_marl::Result<()> {
    let env = WptEnv::new(EnvConfig::default())?;
    let codes = [1, 4, 6, 3];
    let expected = env.energies(&codes)?;
    println!(
        "{:>3} {:>12} {:>12} {:>12} {:>8}",
        "rx", "expected", "gaussian", "constant", "dev %"
    );
    for (j, e) in expected.iter().enumerate() {
        let g = env.sample_energy(j, &codes, 200_000, SignalModel::ComplexGaussian, j as u64)?;
        // with a common constant signal the cross terms between transmitters survive
        let c = env.sample_energy(j, &codes, 1, SignalModel::Constant, 0)?;
        println!(
            "{j:>3} {e:>12.5} {g:>12.5} {c:>12.5} {:>8.3}",
            100.0 * (g - e) / e
        );
    }
    Ok(())
}
