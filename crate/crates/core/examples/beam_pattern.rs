//! Power pattern of each code in the default codebook, swept over departure angle.
//!
//!     cargo run --example beam_pattern -- 16

use std::f64::consts::PI;

use wpt_marl::array::{beam_power_gain, steering_vector, ArrayConfig};
use wpt_marl::codebook::Codebook;

fn main() -> wpt_marl::Result<()> {
    let elements: usize = std::env::args()
        .nth(1)
        .map_or(16, |s| s.parse().expect("element count"));
    let cfg = ArrayConfig {
        elements,
        ..ArrayConfig::default()
    };
    let book = Codebook::build(8, PI / 2.0, PI / 2.0, &cfg)?;
    let peak = (elements * elements) as f64;

    print!("{:>7}", "deg");
    for a in book.angles() {
        print!("{:>7.1}", a.to_degrees());
    }
    println!();
    for step in 0..=36 {
        let phi = PI * f64::from(step) / 36.0;
        let link = steering_vector(phi, &cfg)?.conj();
        print!("{:>7.1}", phi.to_degrees());
        for code in book.codes() {
            // normalized gain in dB, floored at -40
            let g = beam_power_gain(&link, code)? / peak;
            print!("{:>7.1}", (10.0 * g.log10()).max(-40.0));
        }
        println!();
    }
    Ok(())
}
