//! Model-error verification: how far does the sampled-cosine reading of the
//! normalized channel energy drift from the exact energy quotient?
//!
//! For each true range the exact metric is synthesized, a cosine model with
//! every channel parameter held at truth except the delay is fitted by
//! Nelder-Mead from the true delay, and the fitted delay is mapped back to
//! meters. The residual range error is pure model error: it is largest when
//! the band spans less than a full beat cycle (short ranges) and shrinks as
//! the cycle count grows.

use rayon::prelude::*;

use crate::config::{LinkBudget, NelderMeadConfig, NoiseModel, OfdmConfig};
use crate::link::{direct_alpha, reflected_beta, round_trip_delay, synthesize_from_targets, TargetSpec};
use crate::optim::{nelder_mead, simplex_around};
use crate::ranging::{mean_normalized_metric, MetricVector};
use crate::rng::{rng_from, scalar_bits, uniform_phase};
use crate::scalar::Real;

/// One row of the verification sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct VerificationPoint<T> {
    pub true_range_m: T,
    pub bandwidth_hz: T,
    pub rms_error_m: T,
    pub trials: usize,
    /// Trials where the simplex hit the iteration cap before collapsing.
    pub fit_failures: usize,
}

/// Fitted delay plus convergence bookkeeping.
#[derive(Clone, Copy, Debug)]
pub struct DelayFit<T> {
    pub tau_s: T,
    pub iterations: usize,
    pub converged: bool,
}

/// Fit the reflection delay by minimizing the squared error between the
/// cosine model `amplitude*cos(2*pi*m*spacing*tau - theta)` and the observed
/// metric, all parameters except `tau` held fixed. Returns the best delay
/// seen even when the iteration cap is reached.
pub fn nelder_mead_delay_fit<T: Real>(
    observed: &MetricVector<T>,
    initial_tau_s: T,
    amplitude: T,
    theta_rad: T,
    ofdm: &OfdmConfig<T>,
    nm: &NelderMeadConfig<T>,
) -> DelayFit<T> {
    debug_assert!(initial_tau_s >= T::zero());
    let spacing = ofdm.subcarrier_spacing_hz();
    let indices = ofdm.nonzero_subcarriers();
    let x = observed.values();
    let objective = |p: &[T]| {
        let tau = p[0];
        let mut acc = T::zero();
        for (&m, &xv) in indices.iter().zip(x) {
            let model = amplitude * (T::TAU() * T::of(m as f64) * spacing * tau - theta_rad).cos();
            let d = model - xv;
            acc = acc + d * d;
        }
        acc
    };
    // zero initial delay would collapse the relative spread; fall back to one
    // thousandth of a sample period
    let spread = if initial_tau_s > T::zero() {
        nm.initial_spread
    } else {
        nm.initial_spread * T::of(1e-3) / ofdm.bandwidth_hz
    };
    let out = nelder_mead(nm, objective, simplex_around(initial_tau_s, spread));
    DelayFit { tau_s: out.x[0], iterations: out.iterations, converged: out.converged }
}

/// Options for [`verification_sweep`].
#[derive(Clone, Debug)]
pub struct SweepOptions<T> {
    pub trials: usize,
    pub seed: u64,
    /// Add receiver noise to the synthesized estimates instead of measuring
    /// pure model error.
    pub noise: Option<NoiseModel<T>>,
    /// Drop non-converged fits from the RMS instead of keeping their
    /// best-so-far delay.
    pub exclude_failures: bool,
}

impl<T> Default for SweepOptions<T> {
    fn default() -> Self {
        Self { trials: 1000, seed: 1, noise: None, exclude_failures: false }
    }
}

/// Sweep true ranges, fitting the delay per trial with a fresh uniform
/// reflection phase. Deterministic for a fixed seed; trials parallelize over
/// ranges without affecting results.
pub fn verification_sweep<T: Real>(
    ranges_m: &[T],
    ofdm: &OfdmConfig<T>,
    budget: &LinkBudget<T>,
    nm: &NelderMeadConfig<T>,
    opts: &SweepOptions<T>,
) -> Vec<VerificationPoint<T>> {
    assert!(opts.trials >= 1);
    let half_c = T::speed_of_light() / T::of(2.0);
    ranges_m
        .par_iter()
        .map(|&rho| {
            let target = TargetSpec::new(rho, budget.rcs_m2);
            let alpha = direct_alpha(budget);
            let beta = reflected_beta(budget, &target);
            let amplitude = T::of(2.0) * beta / alpha;
            let tau0 = round_trip_delay(rho);
            let mut failures = 0usize;
            let mut acc = T::zero();
            let mut used = 0usize;
            for trial in 0..opts.trials {
                let mut rng = rng_from(&[opts.seed, scalar_bits(rho), scalar_bits(ofdm.bandwidth_hz), trial as u64]);
                let theta: T = uniform_phase(&mut rng);
                let spec = TargetSpec { phase_rad: Some(theta), ..target };
                let mut est = synthesize_from_targets(budget, &[spec], &[theta], ofdm);
                if let Some(noise) = &opts.noise {
                    let var = crate::phy::per_bin_estimate_variance(noise, ofdm);
                    if var > T::zero() {
                        for v in est.values.iter_mut() {
                            *v = *v + crate::rng::complex_gaussian(&mut rng, var);
                        }
                    }
                }
                let metric = mean_normalized_metric(&est).expect("synthesized estimate has energy");
                let fit = nelder_mead_delay_fit(&metric, tau0, amplitude, theta, ofdm, nm);
                if !fit.converged {
                    failures += 1;
                    if opts.exclude_failures {
                        continue;
                    }
                }
                let err = fit.tau_s * half_c - rho;
                acc = acc + err * err;
                used += 1;
            }
            let rms = if used > 0 { (acc / T::of(used as f64)).sqrt() } else { T::nan() };
            VerificationPoint {
                true_range_m: rho,
                bandwidth_hz: ofdm.bandwidth_hz,
                rms_error_m: rms,
                trials: opts.trials,
                fit_failures: failures,
            }
        })
        .collect()
}

/// The sweep range list matching the reference study: 0.5 m steps from 0.5
/// to 50 m.
pub fn default_sweep_ranges<T: Real>() -> Vec<T> {
    (1..=100).map(|k| T::of(k as f64 * 0.5)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Config;
    use crate::link::{synthesize_estimate, ReflectedPath};

    fn setup() -> Config<f64> {
        Config::default()
    }

    #[test]
    fn exact_cosine_input_is_a_fixed_point() {
        let c = setup();
        let tau0 = round_trip_delay(25.0);
        let amplitude = 2.83e-3;
        let theta = 0.77;
        // observed generated from the cosine model itself
        let spacing = c.ofdm.subcarrier_spacing_hz();
        let x = MetricVector(
            c.ofdm
                .nonzero_subcarriers()
                .iter()
                .map(|&m| amplitude * (2.0 * std::f64::consts::PI * m as f64 * spacing * tau0 - theta).cos())
                .collect(),
        );
        let fit = nelder_mead_delay_fit(&x, tau0, amplitude, theta, &c.ofdm, &c.nelder_mead);
        assert!(fit.converged);
        assert!((fit.tau_s - tau0).abs() < 1e-12, "drift {}", fit.tau_s - tau0);
    }

    #[test]
    fn quotient_input_20mhz_25m_within_a_meter() {
        let c = setup();
        let budget = LinkBudget::<f64>::default();
        let alpha = direct_alpha(&budget);
        let beta = reflected_beta(&budget, &TargetSpec::new(25.0, 1.0));
        let tau0 = round_trip_delay(25.0);
        let theta = 1.9;
        let est = synthesize_estimate(alpha, &[ReflectedPath { beta, theta_rad: theta, tau_s: tau0 }], &c.ofdm);
        let x = mean_normalized_metric(&est).unwrap();
        let fit = nelder_mead_delay_fit(&x, tau0, 2.0 * beta / alpha, theta, &c.ofdm, &c.nelder_mead);
        let err = fit.tau_s * crate::scalar::SPEED_OF_LIGHT_M_S / 2.0 - 25.0;
        assert!(err.abs() < 1.0, "range error {err}");
    }

    #[test]
    fn quotient_input_10mhz_15m_within_three_meters() {
        let mut c = setup();
        c.ofdm = crate::config::OfdmConfig::new(10e6).unwrap();
        let budget = LinkBudget::<f64>::default();
        let alpha = direct_alpha(&budget);
        let beta = reflected_beta(&budget, &TargetSpec::new(15.0, 1.0));
        let tau0 = round_trip_delay(15.0);
        let theta = 0.31;
        let est = synthesize_estimate(alpha, &[ReflectedPath { beta, theta_rad: theta, tau_s: tau0 }], &c.ofdm);
        let x = mean_normalized_metric(&est).unwrap();
        let fit = nelder_mead_delay_fit(&x, tau0, 2.0 * beta / alpha, theta, &c.ofdm, &c.nelder_mead);
        let err = fit.tau_s * crate::scalar::SPEED_OF_LIGHT_M_S / 2.0 - 15.0;
        assert!(err.abs() < 3.0, "range error {err}");
    }

    #[test]
    fn single_trial_rms_is_absolute_error() {
        let c = setup();
        let opts = SweepOptions { trials: 1, seed: 3, ..Default::default() };
        let pts = verification_sweep(&[30.0], &c.ofdm, &c.link, &c.nelder_mead, &opts);
        assert_eq!(pts.len(), 1);
        assert_eq!(pts[0].trials, 1);
        // rerun the identical trial by hand
        let mut rng = rng_from(&[3, scalar_bits(30.0f64), scalar_bits(c.ofdm.bandwidth_hz), 0]);
        let theta: f64 = uniform_phase(&mut rng);
        let budget = &c.link;
        let alpha = direct_alpha(budget);
        let beta = reflected_beta(budget, &TargetSpec::new(30.0, 1.0));
        let est = synthesize_estimate(
            alpha,
            &[ReflectedPath { beta, theta_rad: theta, tau_s: round_trip_delay(30.0) }],
            &c.ofdm,
        );
        let x = mean_normalized_metric(&est).unwrap();
        let fit = nelder_mead_delay_fit(&x, round_trip_delay(30.0), 2.0 * beta / alpha, theta, &c.ofdm, &c.nelder_mead);
        let err = (fit.tau_s * crate::scalar::SPEED_OF_LIGHT_M_S / 2.0 - 30.0).abs();
        assert!((pts[0].rms_error_m - err).abs() < 1e-12);
    }

    #[test]
    fn sweep_deterministic() {
        let c = setup();
        let opts = SweepOptions { trials: 8, seed: 11, ..Default::default() };
        let a = verification_sweep(&[10.0, 20.0], &c.ofdm, &c.link, &c.nelder_mead, &opts);
        let b = verification_sweep(&[10.0, 20.0], &c.ofdm, &c.link, &c.nelder_mead, &opts);
        assert_eq!(a, b);
        // results per range do not depend on which other ranges run
        let solo = verification_sweep(&[20.0], &c.ofdm, &c.link, &c.nelder_mead, &opts);
        assert_eq!(a[1], solo[0]);
    }
}
