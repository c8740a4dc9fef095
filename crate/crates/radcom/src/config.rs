//! Shared domain types, physical defaults, and the flat key-value config file.
//!
//! The file format is flat TOML: one `snake_case` key per line, units
//! suffixed (`bandwidth_hz`, `tx_power_dbm`, `rcs_m2`). Powers and gains are
//! given in dB at the file boundary and stored linear internally. Every key
//! is optional; an empty file yields the default simulation setup (20 MHz
//! channel, 5.89 GHz carrier, 20 dBm transmit power, -70 dB feed-through,
//! 15 dBi reflect-path gain).

use std::fmt;
use std::fs;
use std::path::Path;

use crate::scalar::Real;

/// OFDM numerology. `fft_size` is fixed at 64 (802.11a/g/p structure); the
/// subcarrier spacing is always derived as `bandwidth / fft_size`.
#[derive(Clone, Debug, PartialEq)]
pub struct OfdmConfig<T> {
    pub bandwidth_hz: T,
    pub fft_size: usize,
    /// Receiver sample rate, informational. The delay-to-phase-increment
    /// mapping always goes through the subcarrier spacing; see
    /// [`crate::ranging::rho_to_increment`].
    pub phy_sample_rate_hz: T,
    nonzero_subcarriers: Vec<i32>,
}

impl<T: Real> OfdmConfig<T> {
    /// Standard 52-subcarrier layout for the given channel bandwidth.
    pub fn new(bandwidth_hz: T) -> Result<Self, ConfigError> {
        let subs: Vec<i32> = (-26..=26).filter(|&m| m != 0).collect();
        Self::with_subcarriers(bandwidth_hz, subs)
    }

    pub fn with_subcarriers(bandwidth_hz: T, nonzero: Vec<i32>) -> Result<Self, ConfigError> {
        if !(bandwidth_hz > T::zero()) {
            return Err(ConfigError::invalid("bandwidth_hz", format!("{bandwidth_hz}"), "must be > 0"));
        }
        if nonzero.iter().any(|&m| m == 0) {
            return Err(ConfigError::invalid("nonzero_subcarriers", "0".into(), "DC bin must be excluded"));
        }
        let mut mirrored: Vec<i32> = nonzero.iter().map(|&m| -m).collect();
        mirrored.sort_unstable();
        let mut sorted = nonzero.clone();
        sorted.sort_unstable();
        if mirrored != sorted {
            return Err(ConfigError::invalid(
                "nonzero_subcarriers",
                format!("{nonzero:?}"),
                "index set must be symmetric about 0",
            ));
        }
        if sorted != nonzero {
            return Err(ConfigError::invalid(
                "nonzero_subcarriers",
                format!("{nonzero:?}"),
                "indices must be ascending",
            ));
        }
        let cfg = Self {
            bandwidth_hz,
            fft_size: 64,
            phy_sample_rate_hz: T::of(4.0) * bandwidth_hz,
            nonzero_subcarriers: nonzero,
        };
        Ok(cfg)
    }

    /// Subcarrier spacing in Hz. The bandwidth is divided by a power of two,
    /// so `spacing * fft_size == bandwidth` holds exactly in floating point.
    #[inline]
    pub fn subcarrier_spacing_hz(&self) -> T {
        self.bandwidth_hz / T::of(self.fft_size as f64)
    }

    #[inline]
    pub fn nonzero_subcarriers(&self) -> &[i32] {
        &self.nonzero_subcarriers
    }

    /// Number of nonzero subcarriers (52 for the standard layout).
    #[inline]
    pub fn n_used(&self) -> usize {
        self.nonzero_subcarriers.len()
    }

    /// Symbol period 1/bandwidth in seconds.
    #[inline]
    pub fn symbol_period_s(&self) -> T {
        T::one() / self.bandwidth_hz
    }

    /// Duration of the long-training-field guard interval (double-length
    /// cyclic prefix, 32 samples at the symbol rate).
    #[inline]
    pub fn cyclic_prefix_s(&self) -> T {
        T::of(32.0) / self.bandwidth_hz
    }
}

/// Physical-layer constants that determine the direct-path and reflected-path
/// amplitudes. All power-like quantities are linear.
#[derive(Clone, Debug, PartialEq)]
pub struct LinkBudget<T> {
    pub tx_power_w: T,
    /// Signal power feed-through between the transmit and receive chains.
    pub feedthrough: T,
    pub g1_tx: T,
    pub g1_rx: T,
    pub g2_tx: T,
    pub g2_rx: T,
    pub carrier_frequency_hz: T,
    pub direct_path_range_m: T,
    pub rcs_m2: T,
}

impl<T: Real> LinkBudget<T> {
    pub fn wavelength_m(&self) -> T {
        T::speed_of_light() / self.carrier_frequency_hz
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.tx_power_w > T::zero()) {
            return Err(ConfigError::invalid("tx_power_dbm", format!("{}", self.tx_power_w), "power must be > 0"));
        }
        if !(self.carrier_frequency_hz > T::zero()) {
            return Err(ConfigError::invalid(
                "carrier_frequency_hz",
                format!("{}", self.carrier_frequency_hz),
                "must be > 0",
            ));
        }
        for (key, v) in [
            ("feedthrough_db", self.feedthrough),
            ("g1_tx_dbi", self.g1_tx),
            ("g1_rx_dbi", self.g1_rx),
            ("g2_tx_dbi", self.g2_tx),
            ("g2_rx_dbi", self.g2_rx),
            ("direct_path_range_m", self.direct_path_range_m),
            ("rcs_m2", self.rcs_m2),
        ] {
            if !(v >= T::zero()) {
                return Err(ConfigError::invalid(key, format!("{v}"), "must be nonnegative"));
            }
        }
        Ok(())
    }
}

impl<T: Real> Default for LinkBudget<T> {
    fn default() -> Self {
        Self {
            tx_power_w: T::of(0.1),                 // 20 dBm
            feedthrough: T::of(1e-7),               // -70 dB
            g1_tx: T::one(),                        // 0 dBi
            g1_rx: T::one(),
            g2_tx: T::db_to_linear(T::of(15.0)),    // 15 dBi
            g2_rx: T::db_to_linear(T::of(15.0)),
            carrier_frequency_hz: T::of(5.89e9),
            direct_path_range_m: T::of(0.1),
            rcs_m2: T::one(),
        }
    }
}

/// Search grids and decision threshold for the brute-force estimator.
#[derive(Clone, Debug, PartialEq)]
pub struct EstimatorGrid<T> {
    /// Mean-offset candidates.
    pub set_a: Vec<T>,
    /// Initial-phase candidates in radians.
    pub set_c: Vec<T>,
    /// Range candidates in meters, strictly increasing.
    pub set_rho_m: Vec<T>,
    /// Residual threshold below which a target is declared present.
    pub epsilon_t: T,
    /// Order-statistic fraction used to estimate the cosine magnitude from
    /// the observed metric. Default 0.98: the second-largest magnitude of 52
    /// bins, robust to a single outlier bin while still tracking the peak.
    pub b_quantile: T,
}

impl<T: Real> EstimatorGrid<T> {
    pub fn validate(&self) -> Result<(), ConfigError> {
        for (key, set) in [("set_a", &self.set_a), ("set_c_rad", &self.set_c), ("set_rho_m", &self.set_rho_m)] {
            if set.is_empty() {
                return Err(ConfigError::invalid(key, "[]".into(), "set must be nonempty"));
            }
        }
        let mut prev = T::zero();
        for &rho in &self.set_rho_m {
            if !(rho > prev) {
                return Err(ConfigError::invalid(
                    "set_rho_m",
                    format!("{rho}"),
                    "range candidates must be positive and strictly increasing",
                ));
            }
            prev = rho;
        }
        if !(self.epsilon_t > T::zero()) {
            return Err(ConfigError::invalid("epsilon_t", format!("{}", self.epsilon_t), "must be > 0"));
        }
        if !(self.b_quantile > T::zero() && self.b_quantile <= T::one()) {
            return Err(ConfigError::invalid("b_quantile", format!("{}", self.b_quantile), "must lie in (0, 1]"));
        }
        Ok(())
    }
}

impl<T: Real> Default for EstimatorGrid<T> {
    fn default() -> Self {
        Self {
            set_a: [-1.0, -0.5, 0.0, 0.5, 1.0].iter().map(|&a| T::of(a)).collect(),
            // pi/16 steps over the full circle. A half-circle grid cannot
            // represent half of the possible reflection phases (the model
            // magnitude is constrained nonnegative), so the default covers
            // [0, 2*pi).
            set_c: (0..32).map(|k| T::of(k as f64) * T::PI() / T::of(16.0)).collect(),
            set_rho_m: (5..=50).map(|r| T::of(r as f64)).collect(),
            epsilon_t: T::of(25.0),
            b_quantile: T::of(0.98),
        }
    }
}

/// Receiver thermal-noise model.
#[derive(Clone, Debug, PartialEq)]
pub struct NoiseModel<T> {
    pub noise_figure_db: T,
    pub temperature_k: T,
    pub enabled: bool,
}

impl<T: Real> NoiseModel<T> {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.noise_figure_db >= T::zero()) {
            return Err(ConfigError::invalid(
                "noise_figure_db",
                format!("{}", self.noise_figure_db),
                "must be nonnegative",
            ));
        }
        if !(self.temperature_k > T::zero()) {
            return Err(ConfigError::invalid("temperature_k", format!("{}", self.temperature_k), "must be > 0"));
        }
        Ok(())
    }
}

impl<T: Real> Default for NoiseModel<T> {
    fn default() -> Self {
        Self { noise_figure_db: T::of(5.0), temperature_k: T::of(290.0), enabled: true }
    }
}

/// Textbook Nelder-Mead coefficients for the delay-fit verification path.
#[derive(Clone, Debug, PartialEq)]
pub struct NelderMeadConfig<T> {
    pub reflection: T,
    pub expansion: T,
    pub contraction: T,
    pub shrink: T,
    /// Initial simplex spread as a fraction of the initial guess.
    pub initial_spread: T,
    pub max_iterations: usize,
    /// Convergence: simplex diameter below this (in the optimized variable's
    /// units, seconds for delay fits).
    pub diameter_tolerance: T,
}

impl<T: Real> Default for NelderMeadConfig<T> {
    fn default() -> Self {
        Self {
            reflection: T::one(),
            expansion: T::of(2.0),
            contraction: T::of(0.5),
            shrink: T::of(0.5),
            initial_spread: T::of(0.05),
            max_iterations: 500,
            diameter_tolerance: T::of(1e-12),
        }
    }
}

/// How a Monte Carlo campaign models the direct path seen by the receiver.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DirectPathMode {
    /// Direct path scaled to the strongest reflection, mirroring a receiver
    /// that attenuates its reference path to keep the reflection resolvable
    /// within its dynamic range. No target means no direct reference either,
    /// so no-target trials degenerate to pure noise.
    Matched,
    /// Direct-path amplitude straight from the link budget.
    Budget,
    /// No direct path at all.
    None,
}

impl DirectPathMode {
    pub fn as_str(self) -> &'static str {
        match self {
            DirectPathMode::Matched => "matched",
            DirectPathMode::Budget => "budget",
            DirectPathMode::None => "none",
        }
    }
}

impl std::str::FromStr for DirectPathMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "matched" => Ok(DirectPathMode::Matched),
            "budget" => Ok(DirectPathMode::Budget),
            "none" => Ok(DirectPathMode::None),
            other => Err(format!("unknown direct-path mode `{other}` (expected matched|budget|none)")),
        }
    }
}

/// Monte Carlo campaign shape: which cells to run and how many trials each.
#[derive(Clone, Debug, PartialEq)]
pub struct CampaignConfig<T> {
    pub iterations: usize,
    pub seed: u64,
    pub bandwidths_hz: Vec<T>,
    pub target_ranges_m: Vec<T>,
    pub rcs_values_m2: Vec<T>,
    /// Second target range; active only when `target2_rcs_m2 > 0`.
    pub target2_range_m: T,
    pub target2_rcs_m2: T,
    pub epsilon_sweep: Vec<T>,
    pub direct_mode: DirectPathMode,
    pub full_phy: bool,
}

impl<T: Real> CampaignConfig<T> {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.iterations == 0 {
            return Err(ConfigError::invalid("iterations", "0".into(), "must be >= 1"));
        }
        for &r in &self.target_ranges_m {
            if !(r > T::zero()) {
                return Err(ConfigError::invalid("target_ranges_m", format!("{r}"), "ranges must be positive"));
            }
        }
        Ok(())
    }
}

impl<T: Real> Default for CampaignConfig<T> {
    fn default() -> Self {
        Self {
            iterations: 5000,
            seed: 1,
            bandwidths_hz: vec![T::of(20e6)],
            target_ranges_m: (1..=10).map(|k| T::of(5.0 * k as f64)).collect(),
            rcs_values_m2: vec![T::of(0.01), T::of(0.1), T::one()],
            target2_range_m: T::of(25.0),
            target2_rcs_m2: T::zero(),
            epsilon_sweep: Vec::new(),
            direct_mode: DirectPathMode::Matched,
            full_phy: false,
        }
    }
}

/// Everything the library needs, bundled. All types are immutable after
/// construction and safe to share across workers.
#[derive(Clone, Debug, PartialEq)]
pub struct Config<T> {
    pub ofdm: OfdmConfig<T>,
    pub link: LinkBudget<T>,
    pub grid: EstimatorGrid<T>,
    pub noise: NoiseModel<T>,
    pub nelder_mead: NelderMeadConfig<T>,
    pub campaign: CampaignConfig<T>,
    /// Constant added to the true range by measurement-rig cabling; replay
    /// subtracts it from every estimate.
    pub range_bias_m: T,
}

impl<T: Real> Default for Config<T> {
    fn default() -> Self {
        Self {
            ofdm: OfdmConfig::new(T::of(20e6)).expect("default numerology is valid"),
            link: LinkBudget::default(),
            grid: EstimatorGrid::default(),
            noise: NoiseModel::default(),
            nelder_mead: NelderMeadConfig::default(),
            campaign: CampaignConfig::default(),
            range_bias_m: T::of(0.125),
        }
    }
}

#[derive(Debug)]
pub enum ConfigError {
    Io(std::io::Error),
    Parse(String),
    /// A key parsed but violates an invariant; carries key and offending value.
    Invalid { key: String, value: String, reason: String },
}

impl ConfigError {
    fn invalid(key: &str, value: String, reason: &str) -> Self {
        ConfigError::Invalid { key: key.to_string(), value, reason: reason.to_string() }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::Io(e) => write!(f, "config i/o error: {e}"),
            ConfigError::Parse(msg) => write!(f, "config parse error: {msg}"),
            ConfigError::Invalid { key, value, reason } => {
                write!(f, "config key `{key}` = {value}: {reason}")
            }
        }
    }
}

impl std::error::Error for ConfigError {}

impl From<std::io::Error> for ConfigError {
    fn from(e: std::io::Error) -> Self {
        ConfigError::Io(e)
    }
}

/// Load a config file, applying defaults for absent keys.
pub fn load_config<T: Real>(path: impl AsRef<Path>) -> Result<Config<T>, ConfigError> {
    let text = fs::read_to_string(path)?;
    Config::from_toml_str(&text)
}

fn value_f64(key: &str, v: &toml::Value) -> Result<f64, ConfigError> {
    match v {
        toml::Value::Float(x) => Ok(*x),
        toml::Value::Integer(i) => Ok(*i as f64),
        other => Err(ConfigError::invalid(key, other.to_string(), "expected a number")),
    }
}

fn value_list<T: Real>(key: &str, v: &toml::Value) -> Result<Vec<T>, ConfigError> {
    match v {
        toml::Value::Array(items) => {
            items.iter().map(|it| value_f64(key, it).map(T::of)).collect()
        }
        other => Err(ConfigError::invalid(key, other.to_string(), "expected an array of numbers")),
    }
}

fn value_usize(key: &str, v: &toml::Value) -> Result<usize, ConfigError> {
    match v {
        toml::Value::Integer(i) if *i >= 0 => Ok(*i as usize),
        other => Err(ConfigError::invalid(key, other.to_string(), "expected a nonnegative integer")),
    }
}

fn value_bool(key: &str, v: &toml::Value) -> Result<bool, ConfigError> {
    match v {
        toml::Value::Boolean(b) => Ok(*b),
        other => Err(ConfigError::invalid(key, other.to_string(), "expected true or false")),
    }
}

fn value_str<'v>(key: &str, v: &'v toml::Value) -> Result<&'v str, ConfigError> {
    match v {
        toml::Value::String(s) => Ok(s.as_str()),
        other => Err(ConfigError::invalid(key, other.to_string(), "expected a string")),
    }
}

impl<T: Real> Config<T> {
    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        let table: toml::Table = text.parse().map_err(|e: toml::de::Error| ConfigError::Parse(e.to_string()))?;
        let mut cfg = Config::<T>::default();
        let mut bandwidth = cfg.ofdm.bandwidth_hz;
        let mut phy_rate: Option<T> = None;

        for (key, v) in &table {
            match key.as_str() {
                "bandwidth_hz" => bandwidth = T::of(value_f64(key, v)?),
                "fft_size" => {
                    let n = value_usize(key, v)?;
                    if n != 64 {
                        return Err(ConfigError::invalid(key, n.to_string(), "only the 64-point numerology is supported"));
                    }
                }
                "phy_sample_rate_hz" => phy_rate = Some(T::of(value_f64(key, v)?)),
                "tx_power_dbm" => {
                    let dbm = value_f64(key, v)?;
                    cfg.link.tx_power_w = T::of(10f64.powf((dbm - 30.0) / 10.0));
                }
                "feedthrough_db" => cfg.link.feedthrough = T::db_to_linear(T::of(value_f64(key, v)?)),
                "g1_tx_dbi" => cfg.link.g1_tx = T::db_to_linear(T::of(value_f64(key, v)?)),
                "g1_rx_dbi" => cfg.link.g1_rx = T::db_to_linear(T::of(value_f64(key, v)?)),
                "g2_tx_dbi" => cfg.link.g2_tx = T::db_to_linear(T::of(value_f64(key, v)?)),
                "g2_rx_dbi" => cfg.link.g2_rx = T::db_to_linear(T::of(value_f64(key, v)?)),
                "carrier_frequency_hz" => cfg.link.carrier_frequency_hz = T::of(value_f64(key, v)?),
                "direct_path_range_m" => cfg.link.direct_path_range_m = T::of(value_f64(key, v)?),
                "rcs_m2" => cfg.link.rcs_m2 = T::of(value_f64(key, v)?),
                "set_a" => cfg.grid.set_a = value_list(key, v)?,
                "set_c_rad" => cfg.grid.set_c = value_list(key, v)?,
                "set_rho_m" => cfg.grid.set_rho_m = value_list(key, v)?,
                "epsilon_t" => cfg.grid.epsilon_t = T::of(value_f64(key, v)?),
                "b_quantile" => cfg.grid.b_quantile = T::of(value_f64(key, v)?),
                "noise_figure_db" => cfg.noise.noise_figure_db = T::of(value_f64(key, v)?),
                "temperature_k" => cfg.noise.temperature_k = T::of(value_f64(key, v)?),
                "noise_enabled" => cfg.noise.enabled = value_bool(key, v)?,
                "nm_reflection" => cfg.nelder_mead.reflection = T::of(value_f64(key, v)?),
                "nm_expansion" => cfg.nelder_mead.expansion = T::of(value_f64(key, v)?),
                "nm_contraction" => cfg.nelder_mead.contraction = T::of(value_f64(key, v)?),
                "nm_shrink" => cfg.nelder_mead.shrink = T::of(value_f64(key, v)?),
                "nm_initial_spread" => cfg.nelder_mead.initial_spread = T::of(value_f64(key, v)?),
                "nm_max_iterations" => cfg.nelder_mead.max_iterations = value_usize(key, v)?,
                "nm_diameter_tol_s" => cfg.nelder_mead.diameter_tolerance = T::of(value_f64(key, v)?),
                "iterations" => cfg.campaign.iterations = value_usize(key, v)?,
                "seed" => cfg.campaign.seed = value_usize(key, v)? as u64,
                "bandwidths_hz" => cfg.campaign.bandwidths_hz = value_list(key, v)?,
                "target_ranges_m" => cfg.campaign.target_ranges_m = value_list(key, v)?,
                "rcs_values_m2" => cfg.campaign.rcs_values_m2 = value_list(key, v)?,
                "target2_range_m" => cfg.campaign.target2_range_m = T::of(value_f64(key, v)?),
                "target2_rcs_m2" => cfg.campaign.target2_rcs_m2 = T::of(value_f64(key, v)?),
                "epsilon_sweep" => cfg.campaign.epsilon_sweep = value_list(key, v)?,
                "direct_mode" => {
                    cfg.campaign.direct_mode = value_str(key, v)?
                        .parse()
                        .map_err(|e: String| ConfigError::invalid(key, v.to_string(), &e))?;
                }
                "full_phy" => cfg.campaign.full_phy = value_bool(key, v)?,
                "range_bias_m" => cfg.range_bias_m = T::of(value_f64(key, v)?),
                other => {
                    return Err(ConfigError::invalid(other, v.to_string(), "unknown key"));
                }
            }
        }

        cfg.ofdm = OfdmConfig::new(bandwidth)?;
        if let Some(r) = phy_rate {
            if !(r > T::zero()) {
                return Err(ConfigError::invalid("phy_sample_rate_hz", format!("{r}"), "must be > 0"));
            }
            cfg.ofdm.phy_sample_rate_hz = r;
        }
        cfg.link.validate()?;
        cfg.grid.validate()?;
        cfg.noise.validate()?;
        cfg.campaign.validate()?;
        if !(cfg.range_bias_m >= T::zero()) {
            return Err(ConfigError::invalid("range_bias_m", format!("{}", cfg.range_bias_m), "must be nonnegative"));
        }
        Ok(cfg)
    }

    /// Render the effective configuration in the same flat format
    /// `from_toml_str` accepts. Reloading the output reproduces the config.
    pub fn to_toml_string(&self) -> String {
        fn num<T: Real>(x: T) -> String {
            let v = x.as_f64();
            if v == v.trunc() && v.abs() < 1e15 {
                format!("{v:.1}")
            } else {
                format!("{v}")
            }
        }
        fn list<T: Real>(xs: &[T]) -> String {
            let inner: Vec<String> = xs.iter().map(|&x| num(x)).collect();
            format!("[{}]", inner.join(", "))
        }
        let mut s = String::new();
        let c = self;
        s.push_str(&format!("bandwidth_hz = {}\n", num(c.ofdm.bandwidth_hz)));
        s.push_str(&format!("fft_size = {}\n", c.ofdm.fft_size));
        s.push_str(&format!("phy_sample_rate_hz = {}\n", num(c.ofdm.phy_sample_rate_hz)));
        s.push_str(&format!(
            "tx_power_dbm = {}\n",
            num(T::linear_to_db(c.link.tx_power_w) + T::of(30.0))
        ));
        s.push_str(&format!("feedthrough_db = {}\n", num(T::linear_to_db(c.link.feedthrough))));
        s.push_str(&format!("g1_tx_dbi = {}\n", num(T::linear_to_db(c.link.g1_tx))));
        s.push_str(&format!("g1_rx_dbi = {}\n", num(T::linear_to_db(c.link.g1_rx))));
        s.push_str(&format!("g2_tx_dbi = {}\n", num(T::linear_to_db(c.link.g2_tx))));
        s.push_str(&format!("g2_rx_dbi = {}\n", num(T::linear_to_db(c.link.g2_rx))));
        s.push_str(&format!("carrier_frequency_hz = {}\n", num(c.link.carrier_frequency_hz)));
        s.push_str(&format!("direct_path_range_m = {}\n", num(c.link.direct_path_range_m)));
        s.push_str(&format!("rcs_m2 = {}\n", num(c.link.rcs_m2)));
        s.push_str(&format!("set_a = {}\n", list(&c.grid.set_a)));
        s.push_str(&format!("set_c_rad = {}\n", list(&c.grid.set_c)));
        s.push_str(&format!("set_rho_m = {}\n", list(&c.grid.set_rho_m)));
        s.push_str(&format!("epsilon_t = {}\n", num(c.grid.epsilon_t)));
        s.push_str(&format!("b_quantile = {}\n", num(c.grid.b_quantile)));
        s.push_str(&format!("noise_figure_db = {}\n", num(c.noise.noise_figure_db)));
        s.push_str(&format!("temperature_k = {}\n", num(c.noise.temperature_k)));
        s.push_str(&format!("noise_enabled = {}\n", c.noise.enabled));
        s.push_str(&format!("nm_reflection = {}\n", num(c.nelder_mead.reflection)));
        s.push_str(&format!("nm_expansion = {}\n", num(c.nelder_mead.expansion)));
        s.push_str(&format!("nm_contraction = {}\n", num(c.nelder_mead.contraction)));
        s.push_str(&format!("nm_shrink = {}\n", num(c.nelder_mead.shrink)));
        s.push_str(&format!("nm_initial_spread = {}\n", num(c.nelder_mead.initial_spread)));
        s.push_str(&format!("nm_max_iterations = {}\n", c.nelder_mead.max_iterations));
        s.push_str(&format!("nm_diameter_tol_s = {}\n", num(c.nelder_mead.diameter_tolerance)));
        s.push_str(&format!("iterations = {}\n", c.campaign.iterations));
        s.push_str(&format!("seed = {}\n", c.campaign.seed));
        s.push_str(&format!("bandwidths_hz = {}\n", list(&c.campaign.bandwidths_hz)));
        s.push_str(&format!("target_ranges_m = {}\n", list(&c.campaign.target_ranges_m)));
        s.push_str(&format!("rcs_values_m2 = {}\n", list(&c.campaign.rcs_values_m2)));
        s.push_str(&format!("target2_range_m = {}\n", num(c.campaign.target2_range_m)));
        s.push_str(&format!("target2_rcs_m2 = {}\n", num(c.campaign.target2_rcs_m2)));
        if !c.campaign.epsilon_sweep.is_empty() {
            s.push_str(&format!("epsilon_sweep = {}\n", list(&c.campaign.epsilon_sweep)));
        }
        s.push_str(&format!("direct_mode = \"{}\"\n", c.campaign.direct_mode.as_str()));
        s.push_str(&format!("full_phy = {}\n", c.campaign.full_phy));
        s.push_str(&format!("range_bias_m = {}\n", num(c.range_bias_m)));
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        let cfg: Config<f64> = Config::from_toml_str("").unwrap();
        assert_eq!(cfg, Config::default());
        assert_eq!(cfg.ofdm.bandwidth_hz, 20e6);
        assert_eq!(cfg.ofdm.subcarrier_spacing_hz(), 312_500.0);
        assert_eq!(cfg.ofdm.n_used(), 52);
        assert_eq!(cfg.link.tx_power_w, 0.1);
        assert_eq!(cfg.link.feedthrough, 1e-7);
        assert_eq!(cfg.link.carrier_frequency_hz, 5.89e9);
        assert_eq!(cfg.grid.epsilon_t, 25.0);
        assert_eq!(cfg.grid.set_a, vec![-1.0, -0.5, 0.0, 0.5, 1.0]);
        assert_eq!(cfg.grid.set_rho_m.len(), 46);
        assert_eq!(cfg.noise.noise_figure_db, 5.0);
        assert_eq!(cfg.campaign.iterations, 5000);
    }

    #[test]
    fn ten_mhz_spacing() {
        let cfg: Config<f64> = Config::from_toml_str("bandwidth_hz = 10e6\n").unwrap();
        assert_eq!(cfg.ofdm.subcarrier_spacing_hz(), 156_250.0);
        // spacing * fft_size reproduces the bandwidth exactly
        assert_eq!(cfg.ofdm.subcarrier_spacing_hz() * 64.0, cfg.ofdm.bandwidth_hz);
    }

    #[test]
    fn negative_epsilon_rejected_with_key_name() {
        let err = Config::<f64>::from_toml_str("epsilon_t = -1\n").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("epsilon_t"), "{msg}");
        assert!(msg.contains("-1"), "{msg}");
    }

    #[test]
    fn unknown_key_rejected() {
        let err = Config::<f64>::from_toml_str("bandwith_hz = 10e6\n").unwrap_err();
        assert!(err.to_string().contains("bandwith_hz"));
    }

    #[test]
    fn fft_size_pinned() {
        assert!(Config::<f64>::from_toml_str("fft_size = 128\n").is_err());
        assert!(Config::<f64>::from_toml_str("fft_size = 64\n").is_ok());
    }

    #[test]
    fn round_trip_identity() {
        let file = "bandwidth_hz = 10e6\ntx_power_dbm = 17.0\nfeedthrough_db = -60.0\n\
                    g2_tx_dbi = 12.0\nb_quantile = 0.9\nseed = 42\ndirect_mode = \"budget\"\n\
                    epsilon_sweep = [5.0, 10.0, 25.0]\n";
        let a: Config<f64> = Config::from_toml_str(file).unwrap();
        let b: Config<f64> = Config::from_toml_str(&a.to_toml_string()).unwrap();
        assert_eq!(a, b);
        // and the render itself is a fixed point
        assert_eq!(a.to_toml_string(), b.to_toml_string());
    }

    #[test]
    fn default_round_trip() {
        let a: Config<f64> = Config::default();
        let b: Config<f64> = Config::from_toml_str(&a.to_toml_string()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn subcarrier_sets_checked() {
        assert!(OfdmConfig::<f64>::with_subcarriers(20e6, vec![-2, -1, 0, 1, 2]).is_err());
        assert!(OfdmConfig::<f64>::with_subcarriers(20e6, vec![-2, -1, 1]).is_err());
        assert!(OfdmConfig::<f64>::with_subcarriers(20e6, vec![-2, -1, 1, 2]).is_ok());
    }

    #[test]
    fn grid_must_increase() {
        let mut g = EstimatorGrid::<f64>::default();
        g.set_rho_m = vec![5.0, 5.0, 6.0];
        assert!(g.validate().is_err());
    }
}
