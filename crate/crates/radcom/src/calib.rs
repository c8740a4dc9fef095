//! Recorded-estimate ingestion, calibration, and batch replay.
//!
//! Measurement rigs leave two artifacts the estimator has to deal with: a
//! near-linear tilt of the per-subcarrier energy caused by a second
//! direct-path tap a fraction of a sample late, and a constant range offset
//! from asymmetric cabling. Calibration removes the tilt by subtracting a
//! least-squares line from the metric; the cable offset is subtracted from
//! every range estimate.
//!
//! File format (UTF-8, LF): header
//! `packet_id,subcarrier,re,im[,timestamp_s][,true_range_m]`, one row per
//! (packet, subcarrier), subcarrier in {-26..-1, 1..26}.

use std::fmt;
use std::fs;
use std::path::Path;

use num_complex::Complex;

use crate::config::{EstimatorGrid, LinkBudget, NoiseModel, OfdmConfig};
use crate::estimate::{ChannelEstimate, EstimateSource};
use crate::link::{direct_alpha, reflected_beta, round_trip_delay, TargetSpec};
use crate::ranging::{brute_force_range, mean_normalized_metric, MetricVector, RangingResult};
use crate::rng::{complex_gaussian, rng_from, scalar_bits, uniform_phase};
use crate::scalar::Real;

/// One recorded packet: a full 52-bin channel estimate plus optional
/// metadata.
#[derive(Clone, Debug, PartialEq)]
pub struct PacketRecord<T> {
    pub packet_id: u64,
    pub estimate: ChannelEstimate<T>,
    pub timestamp_s: Option<T>,
    /// Ground truth when the capture rig knew it (regression fixtures).
    pub true_range_m: Option<T>,
}

#[derive(Debug, PartialEq)]
pub enum ParseError {
    MissingHeader,
    MissingColumn { line: usize, column: &'static str },
    BadNumber { line: usize, field: String },
    NonFinite { line: usize },
    UnknownSubcarrier { line: usize, index: i64 },
    DuplicateSubcarrier { packet_id: u64, subcarrier: i32 },
    MissingSubcarrier { packet_id: u64, subcarrier: i32 },
    ConflictingMetadata { packet_id: u64 },
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParseError::MissingHeader => write!(f, "missing header row"),
            ParseError::MissingColumn { line, column } => write!(f, "line {line}: missing column `{column}`"),
            ParseError::BadNumber { line, field } => write!(f, "line {line}: cannot parse `{field}` as a number"),
            ParseError::NonFinite { line } => write!(f, "line {line}: non-finite value"),
            ParseError::UnknownSubcarrier { line, index } => {
                write!(f, "line {line}: subcarrier {index} outside {{-26..-1, 1..26}}")
            }
            ParseError::DuplicateSubcarrier { packet_id, subcarrier } => {
                write!(f, "packet {packet_id}: duplicate subcarrier {subcarrier}")
            }
            ParseError::MissingSubcarrier { packet_id, subcarrier } => {
                write!(f, "packet {packet_id}: missing subcarrier {subcarrier}")
            }
            ParseError::ConflictingMetadata { packet_id } => {
                write!(f, "packet {packet_id}: rows disagree on timestamp or true range")
            }
        }
    }
}

impl std::error::Error for ParseError {}

#[derive(Debug)]
pub enum CalibError {
    Io(std::io::Error),
    Parse(ParseError),
}

impl fmt::Display for CalibError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CalibError::Io(e) => write!(f, "estimate file i/o error: {e}"),
            CalibError::Parse(e) => write!(f, "estimate file: {e}"),
        }
    }
}

impl std::error::Error for CalibError {}

impl From<std::io::Error> for CalibError {
    fn from(e: std::io::Error) -> Self {
        CalibError::Io(e)
    }
}

impl From<ParseError> for CalibError {
    fn from(e: ParseError) -> Self {
        CalibError::Parse(e)
    }
}

pub fn load_estimates<T: Real>(path: impl AsRef<Path>) -> Result<Vec<PacketRecord<T>>, CalibError> {
    let text = fs::read_to_string(path)?;
    Ok(parse_estimates(&text)?)
}

/// Parse the channel-estimate CSV. Records come back in first-appearance
/// order; every packet must carry all 52 subcarriers exactly once.
pub fn parse_estimates<T: Real>(text: &str) -> Result<Vec<PacketRecord<T>>, ParseError> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or(ParseError::MissingHeader)?;
    let cols: Vec<&str> = header.trim().split(',').map(str::trim).collect();
    let col = |name: &'static str| cols.iter().position(|c| *c == name);
    let (id_c, sc_c, re_c, im_c) = match (col("packet_id"), col("subcarrier"), col("re"), col("im")) {
        (Some(a), Some(b), Some(c), Some(d)) => (a, b, c, d),
        (None, ..) => return Err(ParseError::MissingColumn { line: 1, column: "packet_id" }),
        (_, None, ..) => return Err(ParseError::MissingColumn { line: 1, column: "subcarrier" }),
        (_, _, None, _) => return Err(ParseError::MissingColumn { line: 1, column: "re" }),
        (_, _, _, None) => return Err(ParseError::MissingColumn { line: 1, column: "im" }),
    };
    let ts_c = col("timestamp_s");
    let tr_c = col("true_range_m");

    struct Partial<T> {
        packet_id: u64,
        bins: Vec<Option<Complex<T>>>,
        timestamp_s: Option<T>,
        true_range_m: Option<T>,
    }
    let mut order: Vec<u64> = Vec::new();
    let mut partials: Vec<Partial<T>> = Vec::new();

    for (i, raw) in lines {
        let line_no = i + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        let get = |c: usize, name: &'static str| -> Result<&str, ParseError> {
            fields.get(c).copied().ok_or(ParseError::MissingColumn { line: line_no, column: name })
        };
        let parse_f = |s: &str| -> Result<f64, ParseError> {
            let v: f64 = s.parse().map_err(|_| ParseError::BadNumber { line: line_no, field: s.to_string() })?;
            if !v.is_finite() {
                return Err(ParseError::NonFinite { line: line_no });
            }
            Ok(v)
        };
        let packet_id: u64 = get(id_c, "packet_id")?
            .parse()
            .map_err(|_| ParseError::BadNumber { line: line_no, field: fields[id_c].to_string() })?;
        let sc: i64 = get(sc_c, "subcarrier")?
            .parse()
            .map_err(|_| ParseError::BadNumber { line: line_no, field: fields[sc_c].to_string() })?;
        if sc == 0 || sc < -26 || sc > 26 {
            return Err(ParseError::UnknownSubcarrier { line: line_no, index: sc });
        }
        let sc = sc as i32;
        let re = T::of(parse_f(get(re_c, "re")?)?);
        let im = T::of(parse_f(get(im_c, "im")?)?);
        let ts = match ts_c {
            Some(c) if fields.len() > c && !fields[c].is_empty() => Some(T::of(parse_f(fields[c])?)),
            _ => None,
        };
        let tr = match tr_c {
            Some(c) if fields.len() > c && !fields[c].is_empty() => Some(T::of(parse_f(fields[c])?)),
            _ => None,
        };

        let slot = sc + 26 - usize::from(sc > 0) as i32;
        let idx = slot as usize; // 0..52, DC skipped by construction
        let partial = match partials.iter_mut().find(|p| p.packet_id == packet_id) {
            Some(p) => p,
            None => {
                order.push(packet_id);
                partials.push(Partial {
                    packet_id,
                    bins: vec![None; 52],
                    timestamp_s: ts,
                    true_range_m: tr,
                });
                partials.last_mut().expect("just pushed")
            }
        };
        if partial.bins[idx].is_some() {
            return Err(ParseError::DuplicateSubcarrier { packet_id, subcarrier: sc });
        }
        if (ts.is_some() && partial.timestamp_s.is_some() && ts != partial.timestamp_s)
            || (tr.is_some() && partial.true_range_m.is_some() && tr != partial.true_range_m)
        {
            return Err(ParseError::ConflictingMetadata { packet_id });
        }
        if partial.timestamp_s.is_none() {
            partial.timestamp_s = ts;
        }
        if partial.true_range_m.is_none() {
            partial.true_range_m = tr;
        }
        partial.bins[idx] = Some(Complex::new(re, im));
    }

    let subcarriers: Vec<i32> = (-26..=26).filter(|&m| m != 0).collect();
    let mut records = Vec::with_capacity(partials.len());
    for id in order {
        let p = partials.iter().find(|p| p.packet_id == id).expect("ordered id exists");
        let mut values = Vec::with_capacity(52);
        for (slot, v) in p.bins.iter().enumerate() {
            match v {
                Some(c) => values.push(*c),
                None => {
                    return Err(ParseError::MissingSubcarrier { packet_id: id, subcarrier: subcarriers[slot] })
                }
            }
        }
        records.push(PacketRecord {
            packet_id: id,
            estimate: ChannelEstimate::new(values, EstimateSource::Ingested),
            timestamp_s: p.timestamp_s,
            true_range_m: p.true_range_m,
        });
    }
    Ok(records)
}

/// Render records in the same CSV format `parse_estimates` reads. Floats use
/// the shortest round-trip representation, so parse -> write -> parse is
/// bit-identical.
pub fn write_estimates_csv<T: Real>(records: &[PacketRecord<T>]) -> String {
    let any_ts = records.iter().any(|r| r.timestamp_s.is_some());
    let any_tr = records.iter().any(|r| r.true_range_m.is_some());
    let mut out = String::from("packet_id,subcarrier,re,im");
    if any_ts {
        out.push_str(",timestamp_s");
    }
    if any_tr {
        out.push_str(",true_range_m");
    }
    out.push('\n');
    let subcarriers: Vec<i32> = (-26..=26).filter(|&m| m != 0).collect();
    for r in records {
        for (&m, v) in subcarriers.iter().zip(&r.estimate.values) {
            out.push_str(&format!("{},{},{},{}", r.packet_id, m, v.re, v.im));
            if any_ts {
                out.push(',');
                if let Some(ts) = r.timestamp_s {
                    out.push_str(&format!("{ts}"));
                }
            }
            if any_tr {
                out.push(',');
                if let Some(tr) = r.true_range_m {
                    out.push_str(&format!("{tr}"));
                }
            }
            out.push('\n');
        }
    }
    out
}

/// Exact per-subcarrier energy of a three-tap channel: direct tap `alpha`, a
/// target reflection `(beta, tau, theta)`, and a second direct-path tap
/// `(gamma, tau_d, phi)`. With `tau_d` well under a sample period the third
/// term tilts the band energy almost linearly, which is what calibration
/// removes.
#[allow(clippy::too_many_arguments)]
pub fn three_tap_energy<T: Real>(
    alpha: T,
    beta: T,
    gamma: T,
    tau_s: T,
    tau_d_s: T,
    theta_rad: T,
    phi_rad: T,
    ofdm: &OfdmConfig<T>,
) -> Vec<T> {
    assert!(alpha > T::zero());
    let spacing = ofdm.subcarrier_spacing_hz();
    ofdm.nonzero_subcarriers()
        .iter()
        .map(|&m| {
            let w = T::TAU() * T::of(m as f64) * spacing;
            let h = Complex::new(alpha, T::zero())
                + Complex::from_polar(beta, -(w * tau_s + theta_rad))
                + Complex::from_polar(gamma, -(w * tau_d_s + phi_rad));
            h.norm_sqr()
        })
        .collect()
}

/// Subtract the least-squares line `a*m + b` fitted over the subcarrier
/// indices. Idempotent; a pure line maps to zero.
pub fn remove_linear_slope<T: Real>(metric: &MetricVector<T>, indices: &[i32]) -> MetricVector<T> {
    assert_eq!(metric.len(), indices.len());
    let n = T::of(indices.len() as f64);
    let mut sum_x = T::zero();
    let mut sum_y = T::zero();
    let mut sum_xx = T::zero();
    let mut sum_xy = T::zero();
    for (&m, &y) in indices.iter().zip(metric.values()) {
        let x = T::of(m as f64);
        sum_x = sum_x + x;
        sum_y = sum_y + y;
        sum_xx = sum_xx + x * x;
        sum_xy = sum_xy + x * y;
    }
    let denom = n * sum_xx - sum_x * sum_x;
    let slope = (n * sum_xy - sum_x * sum_y) / denom;
    let intercept = (sum_y - slope * sum_x) / n;
    MetricVector(
        indices
            .iter()
            .zip(metric.values())
            .map(|(&m, &y)| y - (slope * T::of(m as f64) + intercept))
            .collect(),
    )
}

/// Replay controls.
#[derive(Clone, Copy, Debug)]
pub struct ReplayOptions<T> {
    /// Remove the linear energy tilt before ranging.
    pub calibrate: bool,
    /// Cable offset subtracted from every estimate.
    pub range_bias_m: T,
}

impl<T: Real> Default for ReplayOptions<T> {
    fn default() -> Self {
        Self { calibrate: false, range_bias_m: T::of(0.125) }
    }
}

/// Per-packet replay outcome. `range_m` already has the cable offset
/// removed.
#[derive(Clone, Debug, PartialEq)]
pub struct PacketOutcome<T> {
    pub packet_id: u64,
    pub true_range_m: Option<T>,
    pub detected: bool,
    pub range_m: Option<T>,
    pub residual: T,
}

/// Group statistics per true range (packets without ground truth pool into
/// one unlabeled group).
#[derive(Clone, Debug, PartialEq)]
pub struct SummaryRow<T> {
    pub true_range_m: Option<T>,
    /// Detected packets contributing to the statistics.
    pub count: usize,
    pub mean_m: Option<T>,
    pub std_m: Option<T>,
    pub rms_error_m: Option<T>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReplayReport<T> {
    pub packets: Vec<PacketOutcome<T>>,
    pub summary: Vec<SummaryRow<T>>,
    /// Packets whose metric could not be formed (all-zero estimates).
    pub failed_packets: usize,
}

/// Run the estimator over every packet and aggregate by ground truth.
/// Individual bad packets are tallied, never fatal.
pub fn replay_ranging<T: Real>(
    records: &[PacketRecord<T>],
    grid: &EstimatorGrid<T>,
    ofdm: &OfdmConfig<T>,
    opts: &ReplayOptions<T>,
) -> ReplayReport<T> {
    let mut packets = Vec::with_capacity(records.len());
    let mut failed = 0usize;
    for rec in records {
        let metric = match mean_normalized_metric(&rec.estimate) {
            Ok(m) => m,
            Err(_) => {
                failed += 1;
                continue;
            }
        };
        let metric = if opts.calibrate {
            remove_linear_slope(&metric, ofdm.nonzero_subcarriers())
        } else {
            metric
        };
        let result: RangingResult<T> = match brute_force_range(&metric, grid, ofdm) {
            Ok(r) => r,
            Err(_) => {
                failed += 1;
                continue;
            }
        };
        packets.push(PacketOutcome {
            packet_id: rec.packet_id,
            true_range_m: rec.true_range_m,
            detected: result.detected,
            range_m: result.range_m.map(|r| r - opts.range_bias_m),
            residual: result.residual,
        });
    }

    // group by truth, preserving first-appearance order, unlabeled last
    let mut keys: Vec<Option<T>> = Vec::new();
    for p in &packets {
        if !keys.iter().any(|k| same_key(k, &p.true_range_m)) {
            keys.push(p.true_range_m);
        }
    }
    keys.sort_by(|a, b| match (a, b) {
        (Some(x), Some(y)) => x.partial_cmp(y).expect("finite truth"),
        (Some(_), None) => std::cmp::Ordering::Less,
        (None, Some(_)) => std::cmp::Ordering::Greater,
        (None, None) => std::cmp::Ordering::Equal,
    });
    let summary = keys
        .iter()
        .map(|key| {
            let ranges: Vec<T> = packets
                .iter()
                .filter(|p| same_key(&p.true_range_m, key))
                .filter_map(|p| p.range_m)
                .collect();
            let count = ranges.len();
            if count == 0 {
                return SummaryRow { true_range_m: *key, count, mean_m: None, std_m: None, rms_error_m: None };
            }
            let n = T::of(count as f64);
            let mean = ranges.iter().copied().sum::<T>() / n;
            let std = if count > 1 {
                let ss = ranges.iter().map(|&r| (r - mean) * (r - mean)).sum::<T>();
                (ss / (n - T::one())).sqrt()
            } else {
                T::zero()
            };
            let rms = key.map(|truth| {
                (ranges.iter().map(|&r| (r - truth) * (r - truth)).sum::<T>() / n).sqrt()
            });
            SummaryRow { true_range_m: *key, count, mean_m: Some(mean), std_m: Some(std), rms_error_m: rms }
        })
        .collect();

    ReplayReport { packets, summary, failed_packets: failed }
}

fn same_key<T: Real>(a: &Option<T>, b: &Option<T>) -> bool {
    match (a, b) {
        (Some(x), Some(y)) => x == y,
        (None, None) => true,
        _ => false,
    }
}

/// Knobs for synthetic measurement fixtures.
#[derive(Clone, Debug)]
pub struct FixtureSpec<T> {
    pub packets_per_distance: usize,
    pub seed: u64,
    /// Extra path length the rig cabling adds to every reflection.
    pub cable_offset_m: T,
    /// Second direct-path tap amplitude as a fraction of the direct tap
    /// (0 = clean rig).
    pub direct_ripple: T,
    /// Delay of the second direct-path tap, as a fraction of a sample.
    pub ripple_delay_samples: T,
}

impl<T: Real> Default for FixtureSpec<T> {
    fn default() -> Self {
        Self {
            packets_per_distance: 100,
            seed: 1,
            cable_offset_m: T::of(0.125),
            direct_ripple: T::zero(),
            ripple_delay_samples: T::of(0.1),
        }
    }
}

/// Synthesize a measurement-style fixture: a static scene per distance (one
/// reflection phase drawn per distance, as a parked target would present),
/// fresh receiver noise per packet, plus the rig's cable offset and optional
/// direct-path ripple.
pub fn synthesize_fixture<T: Real>(
    distances_m: &[T],
    budget: &LinkBudget<T>,
    ofdm: &OfdmConfig<T>,
    noise: &NoiseModel<T>,
    spec: &FixtureSpec<T>,
) -> Vec<PacketRecord<T>> {
    let alpha = direct_alpha(budget);
    let est_var = crate::phy::per_bin_estimate_variance(noise, ofdm);
    let spacing = ofdm.subcarrier_spacing_hz();
    let mut records = Vec::new();
    let mut packet_id = 0u64;
    for &truth in distances_m {
        let mut scene_rng = rng_from(&[spec.seed, scalar_bits(truth)]);
        let theta: T = uniform_phase(&mut scene_rng);
        let phi: T = uniform_phase(&mut scene_rng);
        let target = TargetSpec::new(truth + spec.cable_offset_m, budget.rcs_m2);
        let beta = reflected_beta(budget, &target);
        let tau = round_trip_delay(target.range_m);
        let gamma = alpha * spec.direct_ripple;
        let tau_d = spec.ripple_delay_samples / ofdm.bandwidth_hz;
        for k in 0..spec.packets_per_distance {
            let mut rng = rng_from(&[spec.seed, scalar_bits(truth), k as u64 + 1]);
            let values: Vec<Complex<T>> = ofdm
                .nonzero_subcarriers()
                .iter()
                .map(|&m| {
                    let w = T::TAU() * T::of(m as f64) * spacing;
                    let mut h = Complex::new(alpha, T::zero())
                        + Complex::from_polar(beta, -(w * tau - theta));
                    if gamma > T::zero() {
                        h = h + Complex::from_polar(gamma, -(w * tau_d + phi));
                    }
                    if est_var > T::zero() {
                        h = h + complex_gaussian(&mut rng, est_var);
                    }
                    h
                })
                .collect();
            records.push(PacketRecord {
                packet_id,
                estimate: ChannelEstimate::new(values, EstimateSource::Ingested),
                timestamp_s: Some(T::of(packet_id as f64) * T::of(0.25)),
                true_range_m: Some(truth),
            });
            packet_id += 1;
        }
    }
    records
}
