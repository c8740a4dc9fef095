//! Mean-normalized channel-energy metric and brute-force range estimation.
//!
//! For a direct path much stronger than the reflection, the per-subcarrier
//! energy of the channel estimate divided by its mean, minus one, is close to
//! a sampled cosine whose frequency in the subcarrier index encodes the
//! round-trip delay. The estimator fits `offset + magnitude*cos(phase +
//! increment*m)` over a finite grid and declares a target when the best
//! residual beats a threshold.

use std::fmt;

use crate::config::{EstimatorGrid, OfdmConfig};
use crate::estimate::ChannelEstimate;
use crate::scalar::Real;

#[derive(Debug, PartialEq, Eq)]
pub enum RangingError {
    EmptyEstimate,
    /// All-zero estimate: the mean-normalization is undefined.
    ZeroMeanEnergy,
    LengthMismatch { expected: usize, got: usize },
    InvalidQuantile,
}

impl fmt::Display for RangingError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RangingError::EmptyEstimate => write!(f, "channel estimate is empty"),
            RangingError::ZeroMeanEnergy => write!(f, "mean channel energy is zero"),
            RangingError::LengthMismatch { expected, got } => {
                write!(f, "vector length {got}, expected {expected}")
            }
            RangingError::InvalidQuantile => write!(f, "quantile must lie in (0, 1]"),
        }
    }
}

impl std::error::Error for RangingError {}

/// Mean-normalized channel energy minus one, per nonzero subcarrier.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricVector<T>(pub Vec<T>);

impl<T: Real> MetricVector<T> {
    #[inline]
    pub fn values(&self) -> &[T] {
        &self.0
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.0.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Fitted sampled-cosine model `offset + magnitude*cos(phase + increment*m)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CosineFit<T> {
    pub offset: T,
    pub magnitude: T,
    /// Initial phase in [0, 2*pi).
    pub phase: T,
    /// Phase increment per subcarrier, radians.
    pub increment: T,
}

/// Outcome of one brute-force search.
#[derive(Clone, Debug, PartialEq)]
pub struct RangingResult<T> {
    pub detected: bool,
    /// Present exactly when detected; always one of the grid candidates.
    pub range_m: Option<T>,
    /// Best residual found, or the detection threshold when nothing beat it.
    pub residual: T,
    pub fit: Option<CosineFit<T>>,
}

/// x[m] = |H[m]|^2 / mean(|H|^2) - 1. Scale-invariant: a common factor on
/// the estimate cancels.
pub fn mean_normalized_metric<T: Real>(
    estimate: &ChannelEstimate<T>,
) -> Result<MetricVector<T>, RangingError> {
    if estimate.is_empty() {
        return Err(RangingError::EmptyEstimate);
    }
    let energies = estimate.energies();
    let mean = energies.iter().copied().sum::<T>() / T::of(energies.len() as f64);
    if !(mean > T::zero()) {
        return Err(RangingError::ZeroMeanEnergy);
    }
    Ok(MetricVector(energies.into_iter().map(|e| e / mean - T::one()).collect()))
}

/// Nearest-rank quantile of the metric magnitudes; `quantile = 1` is the
/// maximum. Used to pin the cosine magnitude before the grid search.
pub fn estimate_cosine_magnitude<T: Real>(
    metric: &MetricVector<T>,
    quantile: T,
) -> Result<T, RangingError> {
    if !(quantile > T::zero() && quantile <= T::one()) {
        return Err(RangingError::InvalidQuantile);
    }
    if metric.is_empty() {
        return Err(RangingError::EmptyEstimate);
    }
    let mut mags: Vec<T> = metric.values().iter().map(|x| x.abs()).collect();
    mags.sort_by(|a, b| a.partial_cmp(b).expect("finite metric"));
    let n = mags.len();
    let rank = (quantile * T::of(n as f64)).ceil().as_f64() as usize;
    Ok(mags[rank.clamp(1, n) - 1])
}

/// Phase increment per subcarrier for a round-trip reflection at `range_m`:
/// `2*pi*spacing*(2*range/c)`.
pub fn rho_to_increment<T: Real>(range_m: T, ofdm: &OfdmConfig<T>) -> T {
    debug_assert!(range_m >= T::zero());
    T::of(4.0) * T::PI() * ofdm.subcarrier_spacing_hz() * range_m / T::speed_of_light()
}

/// Evaluate a fit over the given subcarrier indices.
pub fn model_metric<T: Real>(fit: &CosineFit<T>, indices: &[i32]) -> MetricVector<T> {
    MetricVector(
        indices
            .iter()
            .map(|&m| fit.offset + fit.magnitude * (fit.phase + fit.increment * T::of(m as f64)).cos())
            .collect(),
    )
}

/// Sum of squared differences over all subcarriers.
pub fn residual<T: Real>(model: &MetricVector<T>, observed: &MetricVector<T>) -> Result<T, RangingError> {
    if model.len() != observed.len() {
        return Err(RangingError::LengthMismatch { expected: observed.len(), got: model.len() });
    }
    let mut acc = T::zero();
    for (&a, &b) in model.values().iter().zip(observed.values()) {
        let d = a - b;
        acc = acc + d * d;
    }
    Ok(acc)
}

/// Threshold-free exhaustive search: the best residual over every
/// (offset, phase, range) candidate, with the cosine magnitude pinned to the
/// configured order statistic. Candidates are visited range-ascending, then
/// offset, then phase; a strictly smaller residual wins, so exact ties keep
/// the first candidate (smallest range).
pub fn brute_force_best<T: Real>(
    observed: &MetricVector<T>,
    grid: &EstimatorGrid<T>,
    ofdm: &OfdmConfig<T>,
) -> Result<(T, T, CosineFit<T>), RangingError> {
    if observed.len() != ofdm.n_used() {
        return Err(RangingError::LengthMismatch { expected: ofdm.n_used(), got: observed.len() });
    }
    if grid.set_rho_m.is_empty() || grid.set_a.is_empty() || grid.set_c.is_empty() {
        return Err(RangingError::EmptyEstimate);
    }
    let magnitude = estimate_cosine_magnitude(observed, grid.b_quantile)?;
    let x = observed.values();
    let indices = ofdm.nonzero_subcarriers();

    let mut best: Option<(T, T, CosineFit<T>)> = None;
    // scaled cosine table, rebuilt per range candidate
    let mut table: Vec<Vec<T>> = vec![Vec::with_capacity(x.len()); grid.set_c.len()];
    for &rho in &grid.set_rho_m {
        let increment = rho_to_increment(rho, ofdm);
        for (ci, &phase) in grid.set_c.iter().enumerate() {
            table[ci].clear();
            for &m in indices {
                table[ci].push(magnitude * (phase + increment * T::of(m as f64)).cos());
            }
        }
        for &offset in &grid.set_a {
            for (ci, &phase) in grid.set_c.iter().enumerate() {
                let mut eps = T::zero();
                for (t, &xv) in table[ci].iter().zip(x) {
                    let d = offset + *t - xv;
                    eps = eps + d * d;
                }
                let better = match &best {
                    None => true,
                    Some((e, _, _)) => eps < *e,
                };
                if better {
                    best = Some((eps, rho, CosineFit { offset, magnitude, phase, increment }));
                }
            }
        }
    }
    Ok(best.expect("nonempty grid"))
}

/// Grid search with the detection rule: the minimum residual starts at the
/// threshold, so "nothing beat the threshold" reports no target and a
/// residual equal to the threshold.
pub fn brute_force_range<T: Real>(
    observed: &MetricVector<T>,
    grid: &EstimatorGrid<T>,
    ofdm: &OfdmConfig<T>,
) -> Result<RangingResult<T>, RangingError> {
    let (eps, rho, fit) = brute_force_best(observed, grid, ofdm)?;
    if eps < grid.epsilon_t {
        Ok(RangingResult { detected: true, range_m: Some(rho), residual: eps, fit: Some(fit) })
    } else {
        Ok(RangingResult { detected: false, range_m: None, residual: grid.epsilon_t, fit: None })
    }
}
