//! Frequency-domain channel estimates: one complex value per nonzero
//! subcarrier, ordered by subcarrier index.

use num_complex::Complex;

use crate::scalar::Real;

/// Where an estimate came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EstimateSource {
    /// Closed-form two-path synthesis.
    Synthetic,
    /// Least-squares estimation over a simulated long training field.
    SimulatedLtf,
    /// Parsed from a recorded-estimate file.
    Ingested,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChannelEstimate<T> {
    pub values: Vec<Complex<T>>,
    pub source: EstimateSource,
}

impl<T: Real> ChannelEstimate<T> {
    pub fn new(values: Vec<Complex<T>>, source: EstimateSource) -> Self {
        Self { values, source }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.values.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Same estimate scaled by a real factor.
    pub fn scaled(&self, k: T) -> Self {
        Self {
            values: self.values.iter().map(|v| Complex::new(v.re * k, v.im * k)).collect(),
            source: self.source,
        }
    }

    /// Same estimate rotated by a global phase.
    pub fn rotated(&self, phase: T) -> Self {
        let rot = Complex::from_polar(T::one(), phase);
        Self { values: self.values.iter().map(|v| v * rot).collect(), source: self.source }
    }

    /// Per-subcarrier energy |H[m]|^2.
    pub fn energies(&self) -> Vec<T> {
        self.values.iter().map(|v| v.norm_sqr()).collect()
    }
}
