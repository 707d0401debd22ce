//! Which code each transmitter would pick for each receiver on its own, and how
//! close that code's gain comes to a perfectly matched beam.

use wpt_marl::array::{angle_of_departure, beam_power_gain, los_link_response, path_gain};
use wpt_marl::env::{EnvConfig, WptEnv};

fn main() -> wpt_marl::Result<()> {
    let env = WptEnv::new(EnvConfig {
        placement_seed: 4,
        ..EnvConfig::default()
    })?;
    let geo = env.geometry();
    let book = env.codebook();
    println!(
        "code angles (local, deg): {:?}",
        book.angles()
            .iter()
            .map(|a| a.to_degrees().round())
            .collect::<Vec<_>>()
    );

    for p in 0..env.tx_count() {
        let cfg = &env.arrays()[p];
        println!(
            "tx {p} at {:?}, boresight {:.1} deg",
            geo.tx_positions[p],
            cfg.boresight.to_degrees()
        );
        for (j, &rx) in geo.rx_positions.iter().enumerate() {
            let phi = angle_of_departure(p, rx, geo, cfg)?;
            let link = los_link_response(p, j, geo, cfg)?;
            let (best, gain) = (0..book.len())
                .map(|i| (i, beam_power_gain(&link, &book.codes()[i]).unwrap()))
                .fold((0, f64::MIN), |a, b| if b.1 > a.1 { b } else { a });
            let (x, y) = geo.tx_positions[p];
            let d = ((rx.0 - x).powi(2) + (rx.1 - y).powi(2)).sqrt();
            let matched = (path_gain(d, cfg)? * cfg.elements as f64).powi(2);
            println!(
                "  rx {j} ({:5.1},{:5.1}) aod {:6.1} deg -> code {best} (nearest in cos: {}), {:5.1}% of matched",
                rx.0,
                rx.1,
                phi.to_degrees(),
                book.nearest_in_cos(phi),
                100.0 * gain / matched
            );
        }
    }
    Ok(())
}
