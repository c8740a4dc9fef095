use radcom::config::*;
use radcom::link::*;
use radcom::phy;

fn main() {
    let cfg = Config::<f64>::default();
    let ofdm = &cfg.ofdm;
    let quiet = NoiseModel { enabled: false, ..Default::default() };
    let ltf = phy::generate_ltf(ofdm).unwrap();
    for ratio in [1e-3f64, 3.5e-2, 0.1] {
        for rho in [5.0, 25.0, 45.0] {
            let alpha = 1.29e-2;
            let beta = alpha * ratio;
            let ch = TwoPathChannel::new(alpha, beta, 1.0, round_trip_delay(rho));
            for guard_mult in [1usize, 4] {
                let count = phy::default_tap_count(&[ch.reflected()], ofdm) * guard_mult;
                let taps = phy::discrete_impulse_response(&ch, ofdm, count).unwrap();
                let rx = phy::apply_channel_and_noise(&ltf, &taps, &quiet, ofdm, 0);
                let est = phy::ls_channel_estimate(&rx, &ltf, ofdm).unwrap();
                let reference = synthesize_estimate(alpha, &[ch.reflected()], ofdm);
                let mut worst = 0.0f64;
                for (a, b) in est.values.iter().zip(&reference.values) {
                    worst = worst.max((a - b).norm() / b.norm());
                }
                println!("ratio={ratio} rho={rho} taps={count}: rel={worst:.3e}");
            }
        }
    }
}
