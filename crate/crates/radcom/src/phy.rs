//! OFDM receive-path simulation: long-training-field generation, band-limited
//! two-path taps, thermal noise, and least-squares channel estimation.
//!
//! Everything runs at the symbol rate (one sample per `1/bandwidth`). The
//! band-limited impulse response sampled at that rate is a sinc train, so an
//! oversample-then-decimate pipeline would produce the same taps.

use std::fmt;

use num_complex::Complex;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::config::{NoiseModel, OfdmConfig};
use crate::estimate::{ChannelEstimate, EstimateSource};
use crate::fft::fft_in_place;
use crate::link::{ReflectedPath, TwoPathChannel};
use crate::scalar::{Real, BOLTZMANN_J_PER_K};

/// Sign pattern of the 802.11a/g/p long training symbol on subcarriers
/// -26..-1, 1..26 (DC is null).
pub const LTF_SIGNS: [i8; 52] = [
    1, 1, -1, -1, 1, 1, -1, 1, -1, 1, 1, 1, 1, 1, 1, -1, -1, 1, 1, -1, 1, -1, 1, 1, 1, 1, // -26..-1
    1, -1, -1, 1, 1, -1, 1, -1, 1, -1, -1, -1, -1, -1, 1, 1, -1, -1, 1, -1, 1, -1, 1, 1, 1, 1, // 1..26
];

/// Default guard taps kept on each side of the reflected sinc peak.
pub const DEFAULT_TAP_GUARD: usize = 16;

#[derive(Debug, PartialEq, Eq)]
pub enum PhyError {
    UnsupportedFftSize(usize),
    TapCountTooSmall { required: usize, got: usize },
    /// Received sample stream shorter than the two training symbols.
    ShortReceive { required: usize, got: usize },
}

impl fmt::Display for PhyError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PhyError::UnsupportedFftSize(n) => write!(f, "unsupported fft size {n} (only 64)"),
            PhyError::TapCountTooSmall { required, got } => {
                write!(f, "tap count {got} too small for the requested delay (need >= {required})")
            }
            PhyError::ShortReceive { required, got } => {
                write!(f, "received stream has {got} samples, need at least {required}")
            }
        }
    }
}

impl std::error::Error for PhyError {}

/// The pair of long training symbols: known frequency-domain signs and the
/// transmit-side time samples (32-sample guard + two identical 64-sample
/// symbols), normalized to unit average power over the symbol portion.
#[derive(Clone, Debug)]
pub struct LtfSymbolPair<T> {
    /// +-1 per nonzero subcarrier, ordered by subcarrier index.
    pub known_freq: Vec<T>,
    /// 160 samples at the symbol rate.
    pub time_samples: Vec<Complex<T>>,
}

impl<T: Real> LtfSymbolPair<T> {
    /// Amplitude applied to each frequency-domain +-1 so the time-domain
    /// symbol has unit average power.
    pub fn freq_scale(ofdm: &OfdmConfig<T>) -> T {
        T::of(ofdm.fft_size as f64) / T::of(ofdm.n_used() as f64).sqrt()
    }
}

/// Build the long-training-field pair for the 64-point numerology.
pub fn generate_ltf<T: Real>(ofdm: &OfdmConfig<T>) -> Result<LtfSymbolPair<T>, PhyError> {
    if ofdm.fft_size != 64 || ofdm.n_used() != 52 {
        return Err(PhyError::UnsupportedFftSize(ofdm.fft_size));
    }
    let known_freq: Vec<T> = LTF_SIGNS.iter().map(|&s| T::of(s as f64)).collect();
    let scale = LtfSymbolPair::freq_scale(ofdm);

    // map subcarrier index m to FFT bin (negative indices wrap)
    let mut bins = vec![Complex::new(T::zero(), T::zero()); 64];
    for (&m, &sign) in ofdm.nonzero_subcarriers().iter().zip(&known_freq) {
        let bin = if m < 0 { (64 + m) as usize } else { m as usize };
        bins[bin] = Complex::new(sign * scale, T::zero());
    }
    let mut symbol = bins;
    fft_in_place(&mut symbol, true);

    let mut time = Vec::with_capacity(160);
    time.extend_from_slice(&symbol[32..]); // double-length guard = symbol tail
    time.extend_from_slice(&symbol);
    time.extend_from_slice(&symbol);
    Ok(LtfSymbolPair { known_freq, time_samples: time })
}

/// Band-limited impulse response of a two-path channel sampled at the symbol
/// rate: a unit tap for the direct path plus a sinc train for the
/// reflection, `taps[n] = alpha*delta[n] + beta*e^{j*theta}*sinc(n - B*tau)`.
///
/// `tap_count` must cover the reflected peak plus [`DEFAULT_TAP_GUARD`] taps.
/// The discarded sinc tails carry some of the reflection energy; the loss is
/// logged when it exceeds 1e-4 of the reflected power.
pub fn discrete_impulse_response<T: Real>(
    channel: &TwoPathChannel<T>,
    ofdm: &OfdmConfig<T>,
    tap_count: usize,
) -> Result<Vec<Complex<T>>, PhyError> {
    impulse_response_multi(channel.alpha, &[channel.reflected()], ofdm, tap_count)
}

/// Additive multi-reflection variant of [`discrete_impulse_response`].
pub fn impulse_response_multi<T: Real>(
    alpha: T,
    paths: &[ReflectedPath<T>],
    ofdm: &OfdmConfig<T>,
    tap_count: usize,
) -> Result<Vec<Complex<T>>, PhyError> {
    let bw = ofdm.bandwidth_hz;
    let max_peak = paths
        .iter()
        .map(|p| (bw * p.tau_s).ceil().as_f64() as usize)
        .max()
        .unwrap_or(0);
    let required = max_peak + DEFAULT_TAP_GUARD;
    if tap_count < required {
        return Err(PhyError::TapCountTooSmall { required, got: tap_count });
    }

    let mut taps = vec![Complex::new(T::zero(), T::zero()); tap_count];
    taps[0] = Complex::new(alpha, T::zero());
    for p in paths {
        let rot = Complex::from_polar(p.beta, p.theta_rad);
        let center = bw * p.tau_s;
        let mut captured = T::zero();
        for (n, tap) in taps.iter_mut().enumerate() {
            let s = sinc(T::of(n as f64) - center);
            *tap = *tap + rot * s;
            captured = captured + s * s;
        }
        let lost = T::one() - captured;
        if lost > T::of(1e-4) {
            log::debug!(
                "sinc truncation drops {:.2e} of the reflected tap energy (B*tau = {:.3})",
                lost.as_f64(),
                center.as_f64()
            );
        }
    }
    Ok(taps)
}

#[inline]
fn sinc<T: Real>(x: T) -> T {
    if x == T::zero() {
        T::one()
    } else {
        let px = T::PI() * x;
        px.sin() / px
    }
}

/// Suggested tap count for a set of reflections.
pub fn default_tap_count<T: Real>(paths: &[ReflectedPath<T>], ofdm: &OfdmConfig<T>) -> usize {
    let peak = paths
        .iter()
        .map(|p| (ofdm.bandwidth_hz * p.tau_s).ceil().as_f64() as usize)
        .max()
        .unwrap_or(0);
    peak + DEFAULT_TAP_GUARD
}

/// Per-complex-sample thermal noise variance `kT * B * 10^(NF/10)` at the
/// symbol rate. Disabled noise models give zero.
pub fn noise_variance_per_sample<T: Real>(noise: &NoiseModel<T>, ofdm: &OfdmConfig<T>) -> T {
    if !noise.enabled {
        return T::zero();
    }
    T::of(BOLTZMANN_J_PER_K)
        * noise.temperature_k
        * ofdm.bandwidth_hz
        * T::db_to_linear(noise.noise_figure_db)
}

/// Variance of one least-squares channel-estimate bin under this noise
/// model: `N0 * n_used / (2 * fft_size)`. The factor 2 is the two-symbol
/// average; `n_used/fft_size` accounts for the training power concentrating
/// in the occupied bins.
pub fn per_bin_estimate_variance<T: Real>(noise: &NoiseModel<T>, ofdm: &OfdmConfig<T>) -> T {
    noise_variance_per_sample(noise, ofdm) * T::of(ofdm.n_used() as f64)
        / (T::of(2.0) * T::of(ofdm.fft_size as f64))
}

/// Convolve the training waveform with the channel taps and add
/// circularly-symmetric complex Gaussian noise. Identical seeds give
/// identical outputs.
pub fn apply_channel_and_noise<T: Real>(
    ltf: &LtfSymbolPair<T>,
    taps: &[Complex<T>],
    noise: &NoiseModel<T>,
    ofdm: &OfdmConfig<T>,
    seed: u64,
) -> Vec<Complex<T>> {
    let x = &ltf.time_samples;
    let mut y = vec![Complex::new(T::zero(), T::zero()); x.len() + taps.len().saturating_sub(1)];
    for (k, h) in taps.iter().enumerate() {
        if h.re == T::zero() && h.im == T::zero() {
            continue;
        }
        for (n, xv) in x.iter().enumerate() {
            y[n + k] = y[n + k] + *h * *xv;
        }
    }
    let var = noise_variance_per_sample(noise, ofdm);
    if var > T::zero() {
        let sigma = (var / T::of(2.0)).sqrt();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for v in y.iter_mut() {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            *v = *v + Complex::new(sigma * T::of(re), sigma * T::of(im));
        }
    }
    y
}

/// Least-squares channel estimate from the two training symbols, averaged.
/// Assumes perfect symbol timing: the guard interval ends at sample 32.
pub fn ls_channel_estimate<T: Real>(
    received: &[Complex<T>],
    ltf: &LtfSymbolPair<T>,
    ofdm: &OfdmConfig<T>,
) -> Result<ChannelEstimate<T>, PhyError> {
    let per_symbol = ls_symbol_estimates(received, ltf, ofdm)?;
    let half = T::of(0.5);
    let values = per_symbol[0]
        .iter()
        .zip(&per_symbol[1])
        .map(|(a, b)| Complex::new((a.re + b.re) * half, (a.im + b.im) * half))
        .collect();
    Ok(ChannelEstimate::new(values, EstimateSource::SimulatedLtf))
}

/// Per-symbol least-squares estimates (no averaging); index 0 is the first
/// training symbol.
pub fn ls_symbol_estimates<T: Real>(
    received: &[Complex<T>],
    ltf: &LtfSymbolPair<T>,
    ofdm: &OfdmConfig<T>,
) -> Result<[Vec<Complex<T>>; 2], PhyError> {
    if ofdm.fft_size != 64 {
        return Err(PhyError::UnsupportedFftSize(ofdm.fft_size));
    }
    if received.len() < 160 {
        return Err(PhyError::ShortReceive { required: 160, got: received.len() });
    }
    let scale = LtfSymbolPair::freq_scale(ofdm);
    let mut out: [Vec<Complex<T>>; 2] = [Vec::with_capacity(52), Vec::with_capacity(52)];
    for (s, slot) in out.iter_mut().enumerate() {
        let start = 32 + 64 * s;
        let mut window: Vec<Complex<T>> = received[start..start + 64].to_vec();
        fft_in_place(&mut window, false);
        for (&m, &sign) in ofdm.nonzero_subcarriers().iter().zip(&ltf.known_freq) {
            let bin = if m < 0 { (64 + m) as usize } else { m as usize };
            let denom = sign * scale;
            slot.push(Complex::new(window[bin].re / denom, window[bin].im / denom));
        }
    }
    Ok(out)
}
