//! Radar link budget and closed-form two-path channel synthesis.
//!
//! The channel seen by the receiver is a direct transmit-to-receive path of
//! amplitude `alpha` plus one reflection per target, each with amplitude
//! `beta`, relative phase `theta`, and round-trip delay `tau`. Sampling its
//! transfer function at the nonzero subcarriers gives
//!
//! ```text
//! H[m] = alpha + sum_k beta_k * exp(-j*(2*pi*m*spacing*tau_k - theta_k))
//! ```

use std::fmt;

use num_complex::Complex;

use crate::config::{LinkBudget, OfdmConfig};
use crate::estimate::{ChannelEstimate, EstimateSource};
use crate::scalar::Real;

#[derive(Debug, PartialEq, Eq)]
pub enum LinkError {
    NonPositiveDistance,
    NonPositiveWavelength,
}

impl fmt::Display for LinkError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LinkError::NonPositiveDistance => write!(f, "distance must be > 0"),
            LinkError::NonPositiveWavelength => write!(f, "wavelength must be > 0"),
        }
    }
}

impl std::error::Error for LinkError {}

/// One ranging target: true range, radar cross section, and optionally a
/// pinned reflection phase (otherwise drawn per trial). `rcs_m2 = 0` encodes
/// "target absent".
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TargetSpec<T> {
    pub range_m: T,
    pub rcs_m2: T,
    pub phase_rad: Option<T>,
}

impl<T: Real> TargetSpec<T> {
    pub fn new(range_m: T, rcs_m2: T) -> Self {
        Self { range_m, rcs_m2, phase_rad: None }
    }
}

/// One reflected component of the channel.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReflectedPath<T> {
    pub beta: T,
    pub theta_rad: T,
    pub tau_s: T,
}

/// The (alpha, beta, theta, tau) tuple that fully defines a noiseless
/// single-target channel estimate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TwoPathChannel<T> {
    pub alpha: T,
    pub beta: T,
    pub theta_rad: T,
    pub tau_s: T,
}

impl<T: Real> TwoPathChannel<T> {
    /// `theta` is folded into [0, 2*pi). Logs a diagnostic when the
    /// reflection is not small relative to the direct path (beta/alpha >
    /// 0.1), where the cosine approximation of the normalized energy starts
    /// to distort; the channel is still usable.
    pub fn new(alpha: T, beta: T, theta_rad: T, tau_s: T) -> Self {
        assert!(alpha > T::zero(), "direct-path amplitude must be > 0");
        assert!(beta >= T::zero(), "reflected amplitude must be >= 0");
        assert!(tau_s >= T::zero(), "delay must be >= 0");
        if beta / alpha > T::of(0.1) {
            log::warn!(
                "reflection-to-direct ratio {:.3} exceeds 0.1; normalized-energy cosine model will distort",
                (beta / alpha).as_f64()
            );
        }
        let tau = T::TAU();
        let theta = ((theta_rad % tau) + tau) % tau;
        Self { alpha, beta, theta_rad: theta, tau_s }
    }

    pub fn reflected(&self) -> ReflectedPath<T> {
        ReflectedPath { beta: self.beta, theta_rad: self.theta_rad, tau_s: self.tau_s }
    }
}

/// Free-space one-way power loss `(wavelength / (4*pi*distance))^2`.
pub fn friis_loss<T: Real>(distance_m: T, wavelength_m: T) -> Result<T, LinkError> {
    if !(distance_m > T::zero()) {
        return Err(LinkError::NonPositiveDistance);
    }
    if !(wavelength_m > T::zero()) {
        return Err(LinkError::NonPositiveWavelength);
    }
    let ratio = wavelength_m / (T::of(4.0) * T::PI() * distance_m);
    Ok(ratio * ratio)
}

/// Reflection power gain `4*pi*rcs / wavelength^2` of a target with radar
/// cross section `rcs_m2`.
pub fn reflection_loss<T: Real>(rcs_m2: T, wavelength_m: T) -> T {
    debug_assert!(rcs_m2 >= T::zero() && wavelength_m > T::zero());
    T::of(4.0) * T::PI() * rcs_m2 / (wavelength_m * wavelength_m)
}

/// Direct-path amplitude: internal feed-through plus external line-of-sight
/// leakage, `sqrt(P*F) + sqrt(P*G1tx*G1rx*L1)`.
pub fn direct_alpha<T: Real>(budget: &LinkBudget<T>) -> T {
    let lam = budget.wavelength_m();
    let l1 = friis_loss(budget.direct_path_range_m, lam).expect("validated budget");
    let p = budget.tx_power_w;
    (p * budget.feedthrough).sqrt() + (p * budget.g1_tx * budget.g1_rx * l1).sqrt()
}

/// Reflected-path amplitude for one target:
/// `sqrt(P*G2tx*G2rx*L(range)^2*R(rcs))`.
pub fn reflected_beta<T: Real>(budget: &LinkBudget<T>, target: &TargetSpec<T>) -> T {
    let lam = budget.wavelength_m();
    let l = friis_loss(target.range_m, lam).expect("target range must be positive");
    let r = reflection_loss(target.rcs_m2, lam);
    (budget.tx_power_w * budget.g2_tx * budget.g2_rx * l * l * r).sqrt()
}

/// Round-trip delay 2*range/c of a monostatic reflection.
pub fn round_trip_delay<T: Real>(range_m: T) -> T {
    debug_assert!(range_m >= T::zero());
    T::of(2.0) * range_m / T::speed_of_light()
}

/// Noiseless frequency-domain channel estimate for a direct path plus any
/// number of reflected components, evaluated at every nonzero subcarrier.
/// Delays beyond the long-training cyclic prefix are allowed but logged,
/// since a real receiver's estimate would start to smear.
pub fn synthesize_estimate<T: Real>(
    alpha: T,
    paths: &[ReflectedPath<T>],
    ofdm: &OfdmConfig<T>,
) -> ChannelEstimate<T> {
    let cp = ofdm.cyclic_prefix_s();
    for p in paths {
        if p.tau_s > cp {
            log::warn!(
                "reflection delay {:.3e} s exceeds the {:.3e} s cyclic prefix; estimate validity degrades",
                p.tau_s.as_f64(),
                cp.as_f64()
            );
        }
    }
    let spacing = ofdm.subcarrier_spacing_hz();
    let values = ofdm
        .nonzero_subcarriers()
        .iter()
        .map(|&m| {
            let mut h = Complex::new(alpha, T::zero());
            for p in paths {
                let phase = T::TAU() * T::of(m as f64) * spacing * p.tau_s - p.theta_rad;
                h = h + Complex::from_polar(p.beta, -phase);
            }
            h
        })
        .collect();
    ChannelEstimate::new(values, EstimateSource::Synthetic)
}

/// Convenience: synthesize from a link budget and target list, with phases
/// supplied by the caller (one per target).
pub fn synthesize_from_targets<T: Real>(
    budget: &LinkBudget<T>,
    targets: &[TargetSpec<T>],
    phases: &[T],
    ofdm: &OfdmConfig<T>,
) -> ChannelEstimate<T> {
    assert_eq!(targets.len(), phases.len(), "one phase per target");
    let alpha = direct_alpha(budget);
    let paths: Vec<ReflectedPath<T>> = targets
        .iter()
        .zip(phases)
        .filter(|(t, _)| t.rcs_m2 > T::zero())
        .map(|(t, &ph)| ReflectedPath {
            beta: reflected_beta(budget, t),
            theta_rad: t.phase_rad.unwrap_or(ph),
            tau_s: round_trip_delay(t.range_m),
        })
        .collect();
    synthesize_estimate(alpha, &paths, ofdm)
}
