//! `radcom` — OFDM channel-estimate ranging toolbox.
//!
//! Subcommands map onto the library's workflows: Monte Carlo campaigns,
//! model-error verification sweeps, recorded-estimate replay, calibration,
//! and detection-threshold sweeps. All outputs are CSV (stdout or `--out`),
//! progress goes to stderr, and a fixed seed reproduces output byte for
//! byte.

use std::fs;
use std::io::Write;
use std::process::ExitCode;

use radcom::calib::{self, ReplayOptions};
use radcom::campaign::{run_campaign, sweep_threshold, CampaignStats};
use radcom::config::{load_config, Config, ConfigError};
use radcom::ranging::{mean_normalized_metric, MetricVector};
use radcom::verify::{default_sweep_ranges, verification_sweep, SweepOptions};

const EXIT_USAGE: u8 = 2;
const EXIT_IO: u8 = 3;
const EXIT_CONFIG: u8 = 4;
const EXIT_DATA: u8 = 5;

fn usage() -> &'static str {
    "radcom - closest-target ranging from OFDM channel estimates

USAGE:
  radcom simulate [OPTIONS]         Monte Carlo campaign -> per-cell CSV
  radcom verify [OPTIONS]           cosine-model error sweep -> per-range CSV
  radcom estimate --input FILE      replay recorded estimates -> summary CSV
  radcom calibrate --input FILE     emit slope-removed metrics -> CSV
  radcom sweep-threshold [OPTIONS]  re-score detection over thresholds -> CSV

COMMON OPTIONS:
  --config PATH        flat key-value config file (defaults apply otherwise)
  --out PATH           write CSV here instead of stdout
  --seed N             RNG seed (default from config)
  --verbose            echo the effective config to stderr

SIMULATE / SWEEP-THRESHOLD OPTIONS:
  --bandwidth-mhz LIST   channel bandwidths, e.g. 20 or 10,20
  --rcs LIST             target cross sections in m^2, e.g. 1.0 or 0.01,0.1,1
  --ranges SPEC          target ranges in m: a,b,c or start:step:stop
  --iterations N         trials per cell
  --target2-range M      second-target range in m
  --target2-rcs S        second-target cross section (0 disables)
  --direct-mode MODE     matched | budget | none (default matched)
  --full-phy             simulate the training-field receive path per trial
  --noiseless            disable receiver noise
  --epsilon LIST         (sweep-threshold) thresholds to score

VERIFY OPTIONS:
  --bandwidth-mhz LIST   bandwidths to sweep (default 20)
  --trials N             fits per range (default 1000)
  --ranges SPEC          ranges in m (default 0.5:0.5:50)
  --noise                add receiver noise to the synthesized estimates
  --exclude-failures     drop non-converged fits from the RMS

ESTIMATE OPTIONS:
  --input PATH           channel-estimate CSV (see docs for the schema)
  --calibrate            remove the linear energy tilt before ranging
  --range-bias M         cable offset subtracted from estimates (default 0.125)
  --packets PATH         also write per-packet results here

EXIT CODES:
  0 success   2 usage error   3 file i/o error
  4 config error   5 data/parse error
"
}

struct Cli {
    args: Vec<String>,
}

#[derive(Debug)]
struct CliError {
    code: u8,
    message: String,
}

impl CliError {
    fn usage(msg: impl Into<String>) -> Self {
        Self { code: EXIT_USAGE, message: msg.into() }
    }
    fn io(msg: impl Into<String>) -> Self {
        Self { code: EXIT_IO, message: msg.into() }
    }
    fn data(msg: impl Into<String>) -> Self {
        Self { code: EXIT_DATA, message: msg.into() }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        let code = match e {
            ConfigError::Io(_) => EXIT_IO,
            _ => EXIT_CONFIG,
        };
        Self { code, message: e.to_string() }
    }
}

impl Cli {
    fn take_flag(&mut self, name: &str) -> bool {
        if let Some(pos) = self.args.iter().position(|a| a == name) {
            self.args.remove(pos);
            true
        } else {
            false
        }
    }

    fn take_value(&mut self, name: &str) -> Result<Option<String>, CliError> {
        if let Some(pos) = self.args.iter().position(|a| a == name) {
            if pos + 1 >= self.args.len() {
                return Err(CliError::usage(format!("{name} needs a value")));
            }
            let v = self.args.remove(pos + 1);
            self.args.remove(pos);
            Ok(Some(v))
        } else {
            Ok(None)
        }
    }

    fn finish(self) -> Result<(), CliError> {
        if let Some(extra) = self.args.first() {
            return Err(CliError::usage(format!("unknown argument `{extra}`")));
        }
        Ok(())
    }
}

fn parse_f64(name: &str, s: &str) -> Result<f64, CliError> {
    s.parse().map_err(|_| CliError::usage(format!("{name}: cannot parse `{s}` as a number")))
}

fn parse_usize(name: &str, s: &str) -> Result<usize, CliError> {
    s.parse().map_err(|_| CliError::usage(format!("{name}: cannot parse `{s}` as an integer")))
}

/// `a,b,c` or `start:step:stop` (stop inclusive within half a step).
fn parse_list(name: &str, s: &str) -> Result<Vec<f64>, CliError> {
    if s.contains(':') {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(CliError::usage(format!("{name}: range spec is start:step:stop")));
        }
        let start = parse_f64(name, parts[0])?;
        let step = parse_f64(name, parts[1])?;
        let stop = parse_f64(name, parts[2])?;
        if step <= 0.0 || stop < start {
            return Err(CliError::usage(format!("{name}: need step > 0 and stop >= start")));
        }
        let mut out = Vec::new();
        let mut k = 0u64;
        loop {
            let v = start + step * k as f64;
            if v > stop + step * 0.5 {
                break;
            }
            out.push(v);
            k += 1;
            if k > 1_000_000 {
                return Err(CliError::usage(format!("{name}: range spec too long")));
            }
        }
        Ok(out)
    } else {
        s.split(',').map(|p| parse_f64(name, p)).collect()
    }
}

fn load_base_config(cli: &mut Cli) -> Result<Config<f64>, CliError> {
    match cli.take_value("--config")? {
        Some(path) => Ok(load_config(&path)?),
        None => Ok(Config::default()),
    }
}

fn write_output(out_path: Option<String>, text: &str) -> Result<(), CliError> {
    match out_path {
        Some(path) => fs::write(&path, text).map_err(|e| CliError::io(format!("cannot write {path}: {e}"))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .map_err(|e| CliError::io(format!("cannot write stdout: {e}")))
        }
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn apply_campaign_flags(cli: &mut Cli, cfg: &mut Config<f64>) -> Result<(), CliError> {
    if let Some(s) = cli.take_value("--bandwidth-mhz")? {
        cfg.campaign.bandwidths_hz = parse_list("--bandwidth-mhz", &s)?.into_iter().map(|v| v * 1e6).collect();
    }
    if let Some(s) = cli.take_value("--rcs")? {
        cfg.campaign.rcs_values_m2 = parse_list("--rcs", &s)?;
    }
    if let Some(s) = cli.take_value("--ranges")? {
        cfg.campaign.target_ranges_m = parse_list("--ranges", &s)?;
    }
    if let Some(s) = cli.take_value("--iterations")? {
        cfg.campaign.iterations = parse_usize("--iterations", &s)?;
    }
    if let Some(s) = cli.take_value("--seed")? {
        cfg.campaign.seed = parse_usize("--seed", &s)? as u64;
    }
    if let Some(s) = cli.take_value("--target2-range")? {
        cfg.campaign.target2_range_m = parse_f64("--target2-range", &s)?;
    }
    if let Some(s) = cli.take_value("--target2-rcs")? {
        cfg.campaign.target2_rcs_m2 = parse_f64("--target2-rcs", &s)?;
    }
    if let Some(s) = cli.take_value("--direct-mode")? {
        cfg.campaign.direct_mode = s.parse().map_err(CliError::usage)?;
    }
    if cli.take_flag("--full-phy") {
        cfg.campaign.full_phy = true;
    }
    if cli.take_flag("--noiseless") {
        cfg.noise.enabled = false;
    }
    cfg.campaign
        .validate()
        .map_err(CliError::from)?;
    Ok(())
}

fn campaign_csv(stats: &CampaignStats<f64>) -> String {
    let mut out = String::from("bandwidth_hz,rcs_m2,range_m,trials,detected,rms_error_m,p_d,p_fa");
    if stats.two_target {
        out.push_str(",rms_nearest_m");
    }
    out.push('\n');
    for c in &stats.cells {
        let p_fa = stats.p_fa_for(c.bandwidth_hz).unwrap_or(f64::NAN);
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}",
            c.bandwidth_hz, c.rcs_m2, c.range_m, c.trials, c.detected, c.rms_error_m, c.p_d, p_fa
        ));
        if stats.two_target {
            out.push_str(&format!(",{}", c.rms_error_nearest_m));
        }
        out.push('\n');
    }
    out
}

fn cmd_simulate(mut cli: Cli) -> Result<(), CliError> {
    let mut cfg = load_base_config(&mut cli)?;
    apply_campaign_flags(&mut cli, &mut cfg)?;
    let out_path = cli.take_value("--out")?;
    let verbose = cli.take_flag("--verbose");
    cli.finish()?;
    if verbose {
        eprint!("{}", cfg.to_toml_string());
    }
    let cells = cfg.campaign.bandwidths_hz.len()
        * cfg.campaign.rcs_values_m2.len()
        * cfg.campaign.target_ranges_m.len();
    eprintln!(
        "simulate: {cells} cells x {} trials (direct mode {}, {})",
        cfg.campaign.iterations,
        cfg.campaign.direct_mode.as_str(),
        if cfg.campaign.full_phy { "training-field path" } else { "closed-form path" },
    );
    let stats = run_campaign(&cfg.campaign, &cfg);
    write_output(out_path, &campaign_csv(&stats))
}

fn cmd_sweep_threshold(mut cli: Cli) -> Result<(), CliError> {
    let mut cfg = load_base_config(&mut cli)?;
    apply_campaign_flags(&mut cli, &mut cfg)?;
    if let Some(s) = cli.take_value("--epsilon")? {
        cfg.campaign.epsilon_sweep = parse_list("--epsilon", &s)?;
    }
    let out_path = cli.take_value("--out")?;
    let verbose = cli.take_flag("--verbose");
    cli.finish()?;
    if cfg.campaign.epsilon_sweep.is_empty() {
        return Err(CliError::usage("sweep-threshold needs --epsilon or epsilon_sweep in the config"));
    }
    if verbose {
        eprint!("{}", cfg.to_toml_string());
    }
    eprintln!(
        "sweep-threshold: {} thresholds over {} cells x {} trials",
        cfg.campaign.epsilon_sweep.len(),
        cfg.campaign.bandwidths_hz.len() * cfg.campaign.rcs_values_m2.len() * cfg.campaign.target_ranges_m.len(),
        cfg.campaign.iterations
    );
    let stats = run_campaign(&cfg.campaign, &cfg);
    let points = sweep_threshold(&stats, &cfg.campaign.epsilon_sweep);
    let mut out = String::from("bandwidth_hz,rcs_m2,range_m,epsilon_t,trials,p_d,p_fa\n");
    for p in points {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            p.bandwidth_hz, p.rcs_m2, p.range_m, p.epsilon_t, p.trials, p.p_d, p.p_fa
        ));
    }
    write_output(out_path, &out)
}

fn cmd_verify(mut cli: Cli) -> Result<(), CliError> {
    let cfg = load_base_config(&mut cli)?;
    let bandwidths: Vec<f64> = match cli.take_value("--bandwidth-mhz")? {
        Some(s) => parse_list("--bandwidth-mhz", &s)?.into_iter().map(|v| v * 1e6).collect(),
        None => vec![cfg.ofdm.bandwidth_hz],
    };
    let ranges = match cli.take_value("--ranges")? {
        Some(s) => parse_list("--ranges", &s)?,
        None => default_sweep_ranges(),
    };
    let mut opts = SweepOptions::<f64> { seed: cfg.campaign.seed, ..Default::default() };
    if let Some(s) = cli.take_value("--trials")? {
        opts.trials = parse_usize("--trials", &s)?;
    }
    if let Some(s) = cli.take_value("--seed")? {
        opts.seed = parse_usize("--seed", &s)? as u64;
    }
    if cli.take_flag("--noise") {
        opts.noise = Some(cfg.noise.clone());
    }
    if cli.take_flag("--exclude-failures") {
        opts.exclude_failures = true;
    }
    let out_path = cli.take_value("--out")?;
    let verbose = cli.take_flag("--verbose");
    cli.finish()?;
    if opts.trials == 0 {
        return Err(CliError::usage("--trials must be >= 1"));
    }
    if verbose {
        eprint!("{}", cfg.to_toml_string());
    }
    let mut out = String::from("bandwidth_hz,range_m,trials,fit_failures,rms_error_m\n");
    for bw in bandwidths {
        eprintln!("verify: {} ranges x {} trials at {} MHz", ranges.len(), opts.trials, bw / 1e6);
        let ofdm = radcom::config::OfdmConfig::new(bw).map_err(CliError::from)?;
        let points = verification_sweep(&ranges, &ofdm, &cfg.link, &cfg.nelder_mead, &opts);
        for p in points {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                p.bandwidth_hz, p.true_range_m, p.trials, p.fit_failures, p.rms_error_m
            ));
        }
    }
    write_output(out_path, &out)
}

fn read_records(cli: &mut Cli) -> Result<Vec<calib::PacketRecord<f64>>, CliError> {
    let input = cli
        .take_value("--input")?
        .ok_or_else(|| CliError::usage("--input FILE is required"))?;
    let text = fs::read_to_string(&input).map_err(|e| CliError::io(format!("cannot read {input}: {e}")))?;
    calib::parse_estimates(&text).map_err(|e| CliError::data(format!("{input}: {e}")))
}

fn cmd_estimate(mut cli: Cli) -> Result<(), CliError> {
    let cfg = load_base_config(&mut cli)?;
    let records = read_records(&mut cli)?;
    let mut opts = ReplayOptions::<f64> { calibrate: false, range_bias_m: cfg.range_bias_m };
    if cli.take_flag("--calibrate") {
        opts.calibrate = true;
    }
    if let Some(s) = cli.take_value("--range-bias")? {
        opts.range_bias_m = parse_f64("--range-bias", &s)?;
    }
    let packets_path = cli.take_value("--packets")?;
    let out_path = cli.take_value("--out")?;
    let verbose = cli.take_flag("--verbose");
    cli.finish()?;
    if verbose {
        eprint!("{}", cfg.to_toml_string());
    }
    eprintln!(
        "estimate: {} packets ({}calibrated, bias {} m)",
        records.len(),
        if opts.calibrate { "" } else { "un" },
        opts.range_bias_m
    );
    let report = calib::replay_ranging(&records, &cfg.grid, &cfg.ofdm, &opts);
    if report.failed_packets > 0 {
        eprintln!("estimate: {} packets had unusable estimates", report.failed_packets);
    }
    if let Some(path) = packets_path {
        let mut pp = String::from("packet_id,true_range_m,detected,range_m,residual\n");
        for p in &report.packets {
            pp.push_str(&format!(
                "{},{},{},{},{}\n",
                p.packet_id,
                fmt_opt(p.true_range_m),
                p.detected,
                fmt_opt(p.range_m),
                p.residual
            ));
        }
        fs::write(&path, pp).map_err(|e| CliError::io(format!("cannot write {path}: {e}")))?;
    }
    let mut out = String::from("true_range_m,count,mean_m,std_m,rms_error_m\n");
    for row in &report.summary {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            fmt_opt(row.true_range_m),
            row.count,
            fmt_opt(row.mean_m),
            fmt_opt(row.std_m),
            fmt_opt(row.rms_error_m)
        ));
    }
    write_output(out_path, &out)
}

fn cmd_calibrate(mut cli: Cli) -> Result<(), CliError> {
    let cfg = load_base_config(&mut cli)?;
    let records = read_records(&mut cli)?;
    let out_path = cli.take_value("--out")?;
    let verbose = cli.take_flag("--verbose");
    cli.finish()?;
    if verbose {
        eprint!("{}", cfg.to_toml_string());
    }
    eprintln!("calibrate: {} packets -> slope-removed metrics", records.len());
    let idx = cfg.ofdm.nonzero_subcarriers();
    let mut out = String::from("packet_id,subcarrier,metric\n");
    let mut skipped = 0usize;
    for rec in &records {
        let metric: MetricVector<f64> = match mean_normalized_metric(&rec.estimate) {
            Ok(m) => m,
            Err(_) => {
                skipped += 1;
                continue;
            }
        };
        let cal = calib::remove_linear_slope(&metric, idx);
        for (&m, v) in idx.iter().zip(cal.values()) {
            out.push_str(&format!("{},{},{}\n", rec.packet_id, m, v));
        }
    }
    if skipped > 0 {
        eprintln!("calibrate: {skipped} packets had unusable estimates");
    }
    write_output(out_path, &out)
}

fn dispatch() -> Result<(), CliError> {
    let mut argv: Vec<String> = std::env::args().skip(1).collect();
    if argv.is_empty() || argv[0] == "--help" || argv[0] == "-h" || argv[0] == "help" {
        print!("{}", usage());
        return Ok(());
    }
    let sub = argv.remove(0);
    let cli = Cli { args: argv };
    match sub.as_str() {
        "simulate" => cmd_simulate(cli),
        "verify" => cmd_verify(cli),
        "estimate" => cmd_estimate(cli),
        "calibrate" => cmd_calibrate(cli),
        "sweep-threshold" => cmd_sweep_threshold(cli),
        other => Err(CliError::usage(format!("unknown subcommand `{other}`"))),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match dispatch() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            if e.code == EXIT_USAGE {
                eprintln!("\n{}", usage());
            }
            ExitCode::from(e.code)
        }
    }
}
