//! Regenerate the demo measurement fixture under `fixtures/`.
//!
//! Usage: cargo run -p radcom --example gen_fixture -- [OUT_PATH]
//!
//! Writes 100 packets per distance for a single 25 m target with the default
//! link budget, receiver noise, a static scene phase per distance, and the
//! 0.125 m cable offset baked into the recorded delays.

use radcom::calib::{synthesize_fixture, write_estimates_csv, FixtureSpec};
use radcom::config::Config;

fn main() {
    let out = std::env::args().nth(1).unwrap_or_else(|| "fixtures/target_25m.csv".to_string());
    let cfg = Config::<f64>::default();
    let spec = FixtureSpec { packets_per_distance: 100, seed: 20260401, ..Default::default() };
    let records = synthesize_fixture(&[25.0], &cfg.link, &cfg.ofdm, &cfg.noise, &spec);
    std::fs::write(&out, write_estimates_csv(&records)).expect("write fixture");
    eprintln!("wrote {} packets to {out}", records.len());
}
