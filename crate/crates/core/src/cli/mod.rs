//! Command implementations behind the `transducer` binary.
//!
//! Every command returns its output as a string so it can be tested without a
//! process boundary. CSV output starts with `#` metadata lines and uses 12
//! significant digits, so identical configurations give byte-identical files.

mod config;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::calibrate::{self, FitReport, PowerPoint, S11Mode};
use crate::model::{dbm_to_watts, hz, PumpConfig, PumpConfiguration, HBAR};
use crate::quantumstats::{self, NoiseReport, PairRate, ThermalEnvironment};
use crate::response::{self, linspace, EfficiencyBudget, OperatingPoint, Port};
use crate::timedomain::{pulsed_downconversion, DetectionNoise, LockInConfig, PulseSequence, PulseShape, PulsedRun};
use crate::{Error, Result};

pub use config::{LoadedConfig, RunConfig};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Parser)]
#[command(name = "transducer", version, about = "Microwave-optical transducer simulation and calibration")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// TOML run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Sweep grid `start,stop,n` (Hz for spectra, dBm for power sweeps).
    #[arg(long, global = true, allow_hyphen_values = true, value_parser = parse_grid)]
    pub grid: Option<Grid>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Efficiency and scattering spectrum over a microwave frequency grid.
    Spectrum,
    /// Efficiencies versus pump power.
    PowerSweep,
    /// Pulsed down-conversion trace seen through the lock-in.
    Pulse,
    /// Fit measured data and print a JSON report.
    Fit {
        kind: FitKind,
        /// CSV data file.
        data: PathBuf,
    },
    /// Efficiency ledger, pair rate, added noise and decoherence rates as JSON.
    Budget,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FitKind {
    Doublet,
    S11,
    Power,
    Step,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub start: f64,
    pub stop: f64,
    pub n: usize,
}

impl Grid {
    fn values(&self) -> Result<Vec<f64>> {
        if self.n == 0 {
            return Err(Error::Config("empty grid".into()));
        }
        if self.n == 1 && self.start == self.stop && self.start.is_finite() {
            return Ok(vec![self.start]);
        }
        linspace(self.start, self.stop, self.n).map_err(|e| Error::Config(e.to_string()))
    }
}

fn parse_grid(s: &str) -> std::result::Result<Grid, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let [a, b, n] = parts.as_slice() else {
        return Err(format!("expected start,stop,n; got `{s}`"));
    };
    let num = |x: &str| x.parse::<f64>().map_err(|e| format!("`{x}`: {e}"));
    Ok(Grid { start: num(a)?, stop: num(b)?, n: n.parse().map_err(|e| format!("`{n}`: {e}"))? })
}

/// Parse arguments, run, and map the outcome to an exit status.
pub fn main() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn run(cli: &Cli) -> Result<()> {
    let cfg = cli.config.as_deref().map(LoadedConfig::from_path).transpose()?;
    let need = || cfg.as_ref().ok_or_else(|| Error::Config("--config is required for this command".into()));
    let text = match &cli.command {
        Command::Spectrum => cmd_spectrum(need()?, cli.grid)?,
        Command::PowerSweep => cmd_power_sweep(need()?, cli.grid)?,
        Command::Pulse => cmd_pulse(need()?, cli.seed)?,
        Command::Fit { kind, data } => cmd_fit(*kind, data, cfg.as_ref(), cli.seed)?,
        Command::Budget => cmd_budget(need()?)?,
    };
    let out = cli.out.clone().or_else(|| cfg.as_ref().and_then(|c| c.config.output.as_ref()?.path.clone().map(PathBuf::from)));
    match out {
        Some(path) => std::fs::write(&path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.11e}")
    } else {
        format!("{x}")
    }
}

fn csv(command: &str, cfg: &LoadedConfig, header: &[&str], rows: &[Vec<f64>]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# transducer {VERSION}");
    let _ = writeln!(s, "# command {command}");
    let _ = writeln!(s, "# config_sha256 {}", cfg.sha256);
    let _ = writeln!(s, "{}", header.join(","));
    for r in rows {
        let _ = writeln!(s, "{}", r.iter().map(|x| num(*x)).collect::<Vec<_>>().join(","));
    }
    s
}

fn grid_or(grid: Option<Grid>, start: Option<f64>, stop: Option<f64>, n: Option<usize>, what: &str) -> Result<Vec<f64>> {
    let g = match (grid, start, stop, n) {
        (Some(g), ..) => g,
        (None, Some(start), Some(stop), Some(n)) => Grid { start, stop, n },
        _ => return Err(Error::Config(format!("no {what} grid: pass --grid or set it in [sweep]"))),
    };
    g.values()
}

/// Columns `freq_hz, eta_onchip, eta_offchip, s_ac_re, s_ac_im, s_cc_re, s_cc_im`.
/// Efficiencies sum every acoustic mode; scattering parameters belong to the
/// transduction mode.
pub fn cmd_spectrum(cfg: &LoadedConfig, grid: Option<Grid>) -> Result<String> {
    let c = &cfg.config;
    let sweep = c.sweep.as_ref();
    let freqs = grid_or(grid, sweep.and_then(|s| s.start_hz), sweep.and_then(|s| s.stop_hz), sweep.and_then(|s| s.points), "frequency")?;
    let params = c.device()?;
    let pump = c.pump()?;
    let omega: Vec<f64> = freqs.iter().map(|f| hz(*f)).collect();
    let mm = response::multimode_spectrum(&params, &pump, c.pump_detuning(), &omega)?;
    let eta = mm.spectrum.real("total").expect("total channel");
    let op = OperatingPoint::for_mode(&params, &pump, 0, c.pump_detuning())?;
    let losses = params.losses.eta_probes * params.losses.eta_fiber_chip;
    let rows = omega
        .par_iter()
        .zip(eta.par_iter())
        .zip(freqs.par_iter())
        .map(|((&w, &e), &f)| {
            let offset = match op.configuration {
                PumpConfiguration::AntiStokes => w - op.omega_m,
                PumpConfiguration::Stokes => op.omega_m - w,
            };
            let s_ac = response::transfer(&op, Port::Microwave, Port::Optical, offset)?;
            let s_cc = response::transfer(&op, Port::Microwave, Port::Microwave, offset)?;
            Ok(vec![f, e, e * losses, s_ac.re, s_ac.im, s_cc.re, s_cc.im])
        })
        .collect::<Result<Vec<_>>>()?;
    for w in &mm.warnings {
        eprintln!("warning: {w}");
    }
    Ok(csv(
        "spectrum",
        cfg,
        &["freq_hz", "eta_onchip", "eta_offchip", "s_ac_re", "s_ac_im", "s_cc_re", "s_cc_im"],
        &rows,
    ))
}

fn budget_at(cfg: &LoadedConfig, power_dbm: f64) -> Result<EfficiencyBudget> {
    let c = &cfg.config;
    response::offchip_efficiency(&c.device()?, &c.pump_at(power_dbm)?)
}

/// Columns `power_dbm, eta_tot, eta_oc, eta_int, C, n_bar`.
pub fn cmd_power_sweep(cfg: &LoadedConfig, grid: Option<Grid>) -> Result<String> {
    let c = &cfg.config;
    let sweep = c.sweep.as_ref();
    let powers = match (grid, sweep.and_then(|s| s.powers_dbm.clone())) {
        (None, Some(list)) if !list.is_empty() => list,
        (None, Some(_)) => return Err(Error::Config("empty power list".into())),
        _ => grid_or(
            grid,
            sweep.and_then(|s| s.power_start_dbm),
            sweep.and_then(|s| s.power_stop_dbm),
            sweep.and_then(|s| s.power_points),
            "power",
        )?,
    };
    let rows = powers
        .par_iter()
        .map(|&p| {
            let b = budget_at(cfg, p)?;
            Ok(vec![p, b.eta_tot, b.eta_oc, b.eta_int, b.cooperativity, b.n_bar])
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(csv("power-sweep", cfg, &["power_dbm", "eta_tot", "eta_oc", "eta_int", "C", "n_bar"], &rows))
}

/// Columns `t_s, amp, phase` of the demodulated microwave output.
pub fn cmd_pulse(cfg: &LoadedConfig, seed: Option<u64>) -> Result<String> {
    let c = &cfg.config;
    let p = c.pulse.as_ref().ok_or_else(|| Error::Config("missing [pulse] section".into()))?;
    let shape = match p.edge_s {
        Some(edge) => PulseShape::RaisedCosine { edge },
        None => PulseShape::Rect,
    };
    let pulse = PulseSequence::new(p.tau_on_s, p.rep_rate_hz, shape).map_err(|e| Error::Config(e.to_string()))?;
    let params = c.device()?;
    let op = OperatingPoint::for_mode(&params, &c.pump()?, 0, c.pump_detuning())?;
    op.check_stability()?;
    let lockin = LockInConfig::new(op.omega_m, p.tau_rc_s).map_err(|e| Error::Config(e.to_string()))?;
    let p_chip = params.losses.eta_fiber_chip * dbm_to_watts(p.optical_power_dbm);
    let amplitude = (p_chip / (HBAR * op.omega_pump.max(1.0))).sqrt();
    let t_end = p.t_end_s.unwrap_or(p.tau_on_s + 5.0 * p.tau_rc_s);
    if !(t_end > 0.0) {
        return Err(Error::Config(format!("t_end_s = {t_end}")));
    }
    let noise = match (p.noise_rms, seed) {
        (Some(rms), seed) if rms > 0.0 => Some(DetectionNoise { rms, seed: seed.unwrap_or(0) }),
        _ => None,
    };
    let run = PulsedRun { pulse, optical_amplitude: Complex64::new(amplitude, 0.0), lockin, t_end, noise };
    let d = pulsed_downconversion(&op, &run)?;
    let points = p.output_points.unwrap_or(2000).max(2);
    let stride = d.t.len().div_ceil(points).max(1);
    let rows: Vec<Vec<f64>> = (0..d.t.len())
        .step_by(stride)
        .map(|k| vec![d.t[k], d.iq[k].norm(), d.iq[k].arg()])
        .collect();
    Ok(csv("pulse", cfg, &["t_s", "amp", "phase"], &rows))
}

/// Fit `data` and return the report as JSON, frequencies in Hz.
pub fn cmd_fit(kind: FitKind, data: &Path, cfg: Option<&LoadedConfig>, seed: Option<u64>) -> Result<String> {
    let report: FitReport = match kind {
        FitKind::Doublet => calibrate::fit_doublet(&calibrate::read_spectrum_csv(data)?)?,
        FitKind::S11 => {
            let s = calibrate::read_spectrum_csv(data)?;
            match s.real("transmission") {
                Some(mag) => {
                    let s = crate::Spectrum::new(s.omega().to_vec())?.with_real("s11_mag", mag.to_vec())?;
                    calibrate::fit_s11(&s, S11Mode::MagnitudeOnly)?
                }
                None => calibrate::fit_s11(&s, S11Mode::Complex)?,
            }
        }
        FitKind::Power => {
            let cfg = cfg.ok_or_else(|| Error::Config("power fits need --config for the fixed losses".into()))?;
            let points: Vec<PowerPoint> = calibrate::read_numeric_csv(data)?
                .iter()
                .map(|r| PowerPoint { power_in: dbm_to_watts(r[0]), eta_tot: r[1] })
                .collect();
            calibrate::fit_efficiency_power(&points, &cfg.config.power_fit_inputs()?)?
        }
        FitKind::Step => {
            let rows = calibrate::read_numeric_csv(data)?;
            if rows[0].len() < 2 {
                return Err(Error::Config(format!("{}: need (t_s, amp) columns", data.display())));
            }
            let t: Vec<f64> = rows.iter().map(|r| r[0]).collect();
            let y: Vec<f64> = rows.iter().map(|r| r[1]).collect();
            calibrate::fit_rc_step(&t, &y)?
        }
    };
    let report = match seed {
        Some(s) => report.with_seed(s),
        None => report,
    };
    let mut s = report.in_hz().to_json()?;
    s.push('\n');
    Ok(s)
}

#[derive(Debug, Serialize)]
struct Meta<'a> {
    version: &'a str,
    config_sha256: &'a str,
}

#[derive(Debug, Serialize)]
struct Decoherence {
    temperature_k: f64,
    n_th: f64,
    rate_hz: f64,
}

#[derive(Debug, Serialize)]
struct NoiseAt {
    temperature_k: f64,
    report: NoiseReport,
}

#[derive(Debug, Serialize)]
struct Budget<'a> {
    meta: Meta<'a>,
    efficiency: EfficiencyBudget,
    eta_tot_db: f64,
    pair_rate: Option<PairRate>,
    pair_rate_note: Option<String>,
    noise: Vec<NoiseAt>,
    decoherence: Vec<Decoherence>,
    x_zpf_m: Option<f64>,
}

pub fn cmd_budget(cfg: &LoadedConfig) -> Result<String> {
    let c = &cfg.config;
    let params = c.device()?;
    let pump = c.pump()?;
    let efficiency = response::offchip_efficiency(&params, &pump)?;
    let stokes = OperatingPoint::new(&params, &PumpConfig { configuration: PumpConfiguration::Stokes, ..pump })?;
    let (pair_rate, pair_rate_note) = match quantumstats::pair_rate(&stokes) {
        Ok(r) => (Some(r), None),
        Err(e @ Error::ParametricInstability(_)) => (None, Some(e.to_string())),
        Err(e) => return Err(e),
    };
    let op = OperatingPoint::new(&params, &pump)?;
    let acoustic = params.acoustic();
    let temps = c.environment.as_ref().map(|e| e.temperatures_k.clone()).unwrap_or_default();
    let n_opt = c.environment.as_ref().map(|e| e.optical_occupancy).unwrap_or(0.0);
    let mut noise = Vec::new();
    let mut decoherence = Vec::new();
    for &t in &temps {
        let env = ThermalEnvironment::new(t)?;
        let n_th = env.occupancy(acoustic.omega_m)?;
        decoherence.push(Decoherence { temperature_k: t, n_th, rate_hz: quantumstats::decoherence_rate(acoustic.kappa_m, n_th) });
        match quantumstats::added_noise(&op, 0.0, &env, n_opt) {
            Ok(report) => noise.push(NoiseAt { temperature_k: t, report }),
            Err(Error::UnboundedNoise) => {}
            Err(e) => return Err(e),
        }
    }
    let x_zpf_m = acoustic.m_eff.map(|m| crate::model::x_zpf(m, acoustic.omega_m)).transpose()?;
    let b = Budget {
        meta: Meta { version: VERSION, config_sha256: &cfg.sha256 },
        eta_tot_db: efficiency.eta_tot_db(),
        efficiency,
        pair_rate,
        pair_rate_note,
        noise,
        decoherence,
        x_zpf_m,
    };
    let mut s = serde_json::to_string_pretty(&b)?;
    s.push('\n');
    Ok(s)
}
