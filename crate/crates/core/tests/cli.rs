mod common;

use std::fmt::Write as _;
use std::path::Path;
use std::process::{Command, Output};

use num_complex::Complex64;
use serde_json::Value;
use transducer::calibrate::{gaussian_noise, DoubletModel, RcStep, S11Model};
use transducer::model::{dbm_to_watts, hz, to_hz};
use transducer::response::linspace;

use common::{config_path, load_config};

const BIN: &str = env!("CARGO_BIN_EXE_transducer");

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    assert!(out.status.success(), "exit {:?}: {}", out.status.code(), String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn reference_device() -> String {
    config_path("reference_device.toml").to_string_lossy().into_owned()
}

fn reference_text() -> String {
    std::fs::read_to_string(config_path("reference_device.toml")).unwrap()
}

/// Write `text` next to the other temporary files and return its path.
fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

/// Data rows of a CSV emitted by the binary, keyed by the header.
fn table(text: &str) -> (Vec<String>, Vec<Vec<f64>>) {
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines.map(|l| l.split(',').map(|x| x.parse().unwrap()).collect()).collect();
    (header, rows)
}

fn column(header: &[String], rows: &[Vec<f64>], name: &str) -> Vec<f64> {
    let k = header.iter().position(|h| h == name).unwrap();
    rows.iter().map(|r| r[k]).collect()
}

fn fit_value(report: &Value, name: &str) -> (f64, f64) {
    let p = report["parameters"].as_array().unwrap().iter().find(|p| p["name"] == name).unwrap();
    (p["value"].as_f64().unwrap(), p["std_err"].as_f64().unwrap_or(f64::NAN))
}

#[test]
fn identical_config_gives_identical_bytes() {
    let cfg = reference_device();
    for verb in [&["spectrum", "--grid", "3.0e9,3.7e9,301"][..], &["power-sweep"], &["budget"]] {
        let mut args = vec!["--config", &cfg];
        args.extend_from_slice(verb);
        assert_eq!(run(&args).stdout, run(&args).stdout, "{verb:?}");
    }
    let pulse = config_path("fast_pulse.toml").to_string_lossy().into_owned();
    let dir = tempfile::tempdir().unwrap();
    let noisy = write(dir.path(), "noisy.toml", &std::fs::read_to_string(&pulse).unwrap().replace("output_points = 3000", "output_points = 300\nnoise_rms = 0.01"));
    let a = run(&["--config", &noisy, "--seed", "4", "pulse"]);
    assert_eq!(stdout(&a), stdout(&run(&["--config", &noisy, "--seed", "4", "pulse"])));
    assert_ne!(a.stdout, run(&["--config", &noisy, "--seed", "5", "pulse"]).stdout);
}

#[test]
fn csv_carries_metadata_and_fixed_precision() {
    let text = stdout(&run(&["--config", &reference_device(), "spectrum", "--grid", "3.4e9,3.5e9,3"]));
    let meta: Vec<&str> = text.lines().take_while(|l| l.starts_with('#')).collect();
    assert!(meta.iter().any(|l| l.contains("config_sha256")));
    assert!(meta.iter().any(|l| l.contains(env!("CARGO_PKG_VERSION"))));
    let first = text.lines().find(|l| l.starts_with("3.4")).unwrap();
    let mantissa = first.split(',').next().unwrap().split('e').next().unwrap();
    assert_eq!(mantissa.chars().filter(char::is_ascii_digit).count(), 12);
}

#[test]
fn out_flag_writes_the_same_text() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.csv");
    let cfg = reference_device();
    let args = ["--config", &cfg, "spectrum", "--grid", "3.4e9,3.5e9,11"];
    let printed = stdout(&run(&args));
    let mut with_out = args.to_vec();
    with_out.extend(["--out", path.to_str().unwrap()]);
    let out = run(&with_out);
    assert!(out.status.success() && out.stdout.is_empty());
    assert_eq!(std::fs::read_to_string(&path).unwrap(), printed);
}

#[test]
fn config_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let base = reference_text();
    let cases = [
        ("unknown.toml", base.replace("[coupling]\n", "[coupling]\nbogus_hz = 1\n")),
        ("unsuffixed.toml", base.replace("g0_hz = 42", "g0 = 42")),
        ("missing.toml", base.replace("coupling_j_hz = 1.74e9\n", "")),
        ("malformed.toml", base.replace("[optics]", "[optics")),
        ("negative.toml", base.replace("linewidth_hz = 13e6", "linewidth_hz = -13e6")),
    ];
    for (name, text) in cases {
        assert_ne!(text, base, "{name} edit applied");
        let cfg = write(dir.path(), name, &text);
        assert_eq!(run(&["--config", &cfg, "spectrum"]).status.code(), Some(1), "{name}");
    }
    let cfg = reference_device();
    for grid in ["3e9,3.7e9,0", "3e9,3.7e9", "a,b,c"] {
        assert_eq!(run(&["--config", &cfg, "spectrum", "--grid", grid]).status.code(), Some(1), "{grid}");
    }
    assert_eq!(run(&["--config", "/nonexistent.toml", "budget"]).status.code(), Some(1));
    assert_eq!(run(&["spectrum"]).status.code(), Some(1));
    assert_eq!(run(&["--config", &cfg, "frobnicate"]).status.code(), Some(1));
}

#[test]
fn stokes_above_threshold_exits_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let text = reference_text().replace("configuration = \"anti-stokes\"", "configuration = \"stokes\"").replace("power_dbm = 21", "power_dbm = 70");
    let cfg = write(dir.path(), "hot.toml", &text);
    for verb in ["spectrum", "budget"] {
        assert_eq!(run(&["--config", &cfg, verb]).status.code(), Some(3), "{verb}");
    }
    let below = write(dir.path(), "below.toml", &text.replace("power_dbm = 70", "power_dbm = 21"));
    stdout(&run(&["--config", &below, "spectrum", "--grid", "3.4e9,3.5e9,5"]));
}

#[test]
fn unresolvable_data_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    // A sweep inside the resonance never reaches half depth, so the width is unknown.
    let m = S11Model { omega_m: hz(3.48e9), q_m: 284.0, eta_m: 0.11 };
    let mut text = String::from("freq_hz,re,im\n");
    for w in linspace(hz(3.479e9), hz(3.481e9), 201).unwrap() {
        let z = m.reflection(w);
        writeln!(text, "{},{},{}", to_hz(w), z.re, z.im).unwrap();
    }
    let data = write(dir.path(), "narrow.csv", &text);
    assert_eq!(run(&["fit", "s11", &data]).status.code(), Some(2));

    let mut text = String::from("freq_hz,transmission\n");
    for k in 0..200 {
        writeln!(text, "{},{}", 193e12 + k as f64 * 1e7, 1.0).unwrap();
    }
    let data = write(dir.path(), "flat.csv", &text);
    assert_eq!(run(&["fit", "doublet", &data]).status.code(), Some(1));
}

#[test]
fn malformed_data_exits_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [("words.csv", "t_s,amp\n1,2\nx,y\n"), ("ragged.csv", "1,2\n3\n"), ("empty.csv", "# nothing\n")];
    for (name, text) in cases {
        let data = write(dir.path(), name, text);
        assert_eq!(run(&["fit", "step", &data]).status.code(), Some(1), "{name}");
    }
    assert_eq!(run(&["fit", "step", "/nonexistent.csv"]).status.code(), Some(1));
    let data = write(dir.path(), "power.csv", "10,1e-6\n11,1.2e-6\n");
    assert_eq!(run(&["fit", "power", &data]).status.code(), Some(1), "power fit without --config");
}

fn local_maxima(x: &[f64], y: &[f64], floor: f64) -> Vec<f64> {
    (1..y.len() - 1).filter(|&k| y[k] > y[k - 1] && y[k] >= y[k + 1] && y[k] > floor).map(|k| x[k]).collect()
}

#[test]
fn one_peak_per_acoustic_mode() {
    let text = stdout(&run(&["--config", &reference_device(), "spectrum"]));
    let (h, rows) = table(&text);
    let (f, eta) = (column(&h, &rows, "freq_hz"), column(&h, &rows, "eta_onchip"));
    let max = eta.iter().cloned().fold(0.0, f64::max);
    let peaks = local_maxima(&f, &eta, 0.05 * max);
    assert_eq!(peaks.len(), 2, "{peaks:?}");
    assert!((peaks[0] - 3.165e9).abs() < 2e6 && (peaks[1] - 3.48e9).abs() < 2e6, "{peaks:?}");

    let dir = tempfile::tempdir().unwrap();
    let base = reference_text();
    let start = base.find("[[acoustic]]\nfrequency_hz = 3.165e9").unwrap();
    let end = start + base[start..].find("[coupling]").unwrap();
    let single = write(dir.path(), "single.toml", &format!("{}{}", &base[..start], &base[end..]));
    let (h, rows) = table(&stdout(&run(&["--config", &single, "spectrum", "--grid", "3.3e9,3.6e9,601"])));
    let (f, eta) = (column(&h, &rows, "freq_hz"), column(&h, &rows, "eta_onchip"));
    let max = eta.iter().cloned().fold(0.0, f64::max);
    assert_eq!(local_maxima(&f, &eta, 1e-3 * max), vec![3.48e9]);
}

#[test]
fn power_sweep_rows() {
    let text = stdout(&run(&["--config", &reference_device(), "power-sweep"]));
    let (h, rows) = table(&text);
    assert_eq!(h, ["power_dbm", "eta_tot", "eta_oc", "eta_int", "C", "n_bar"]);
    let p = column(&h, &rows, "power_dbm");
    let eta = column(&h, &rows, "eta_tot");
    let k = p.iter().position(|&x| x == 21.0).unwrap();
    let db = 10.0 * eta[k].log10();
    assert!((db + 48.0).abs() <= 3.0, "{db} dB at 21 dBm");
    // Slope one on a log-log scale while C stays small.
    let slope = (eta.last().unwrap() / eta[0]).log10() / ((p.last().unwrap() - p[0]) / 10.0);
    assert!((slope - 1.0).abs() < 1e-2, "{slope}");

    let dir = tempfile::tempdir().unwrap();
    let text = reference_text().replace("power_points = 12", "power_points = 12\npowers_dbm = [-inf, 0.0]");
    let cfg = write(dir.path(), "list.toml", &text.replace("power_start_dbm = 10\npower_stop_dbm = 21\npower_points = 12\n", ""));
    let (_, rows) = table(&stdout(&run(&["--config", &cfg, "power-sweep"])));
    assert_eq!(rows[0][0], f64::NEG_INFINITY);
    assert!(rows[0][1..].iter().all(|&v| v == 0.0), "{:?}", rows[0]);
    assert!(rows[1][1..].iter().all(|&v| v > 0.0));
}

#[test]
fn budget_report() {
    let out: Value = serde_json::from_str(&stdout(&run(&["--config", &reference_device(), "budget"]))).unwrap();
    let e = &out["efficiency"];
    let (tot, oc, int) = (e["eta_tot"].as_f64().unwrap(), e["eta_oc"].as_f64().unwrap(), e["eta_int"].as_f64().unwrap());
    assert!((10.0 * tot.log10() + 48.0).abs() <= 3.0);
    assert!((oc / 7.9e-5 - 1.0).abs() <= 0.3, "{oc}");
    assert!((int / 2e-3 - 1.0).abs() <= 0.3, "{int}");
    // The chain arithmetic behind the quoted figures: rescaled to -48 dB total,
    // the ledger divides back to the same on-chip and internal numbers.
    let factor = |stage: &str| {
        e["ledger"].as_array().unwrap().iter().find(|s| s["stage"] == stage).unwrap()["factor"].as_f64().unwrap()
    };
    let ports = factor("microwave probes") * factor("fiber-chip facet");
    let extraction = factor("optical extraction") * factor("microwave extraction");
    assert!((oc * ports / tot - 1.0).abs() < 1e-12);
    assert!((int * extraction / oc - 1.0).abs() < 1e-12);
    let oc_48 = 1e-4_f64.powf(1.2) / ports;
    assert!((oc_48 / 7.9e-5 - 1.0).abs() <= 0.05, "{oc_48}");
    assert!((oc_48 / extraction / 2e-3 - 1.0).abs() <= 0.05, "{}", oc_48 / extraction);

    let pair = &out["pair_rate"];
    assert!(pair.is_null() || pair["closed_form_per_rad"].as_f64().unwrap() > 0.0);
    assert_eq!(out["decoherence"].as_array().unwrap().len(), 2);
    assert!((out["x_zpf_m"].as_f64().unwrap() / 2e-17 - 1.0).abs() <= 0.05);
}

#[test]
fn budget_decoherence_rates() {
    let dir = tempfile::tempdir().unwrap();
    let text = reference_text().replace("frequency_hz = 3.48e9\nlinewidth_hz = 13e6", "frequency_hz = 3.5e9\nlinewidth_hz = 10e6");
    let cfg = write(dir.path(), "cold.toml", &text);
    let out: Value = serde_json::from_str(&stdout(&run(&["--config", &cfg, "budget"]))).unwrap();
    let rates: Vec<(f64, f64)> = out["decoherence"]
        .as_array()
        .unwrap()
        .iter()
        .map(|d| (d["temperature_k"].as_f64().unwrap(), d["rate_hz"].as_f64().unwrap()))
        .collect();
    assert_eq!(rates[0].0, 0.8);
    assert!((rates[0].1 / 43e6 - 1.0).abs() <= 0.02, "{}", rates[0].1);
    assert_eq!(rates[1].0, 0.01);
    assert!((rates[1].1 / 0.5 - 1.0).abs() <= 0.05, "{}", rates[1].1);
}

#[test]
fn lossless_budget_has_no_port_loss() {
    let dir = tempfile::tempdir().unwrap();
    let text = reference_text().replace("probes_db = -3", "probes_db = 0").replace("fiber_chip_db = -4", "fiber_chip_db = 0");
    let cfg = write(dir.path(), "lossless.toml", &text);
    let out: Value = serde_json::from_str(&stdout(&run(&["--config", &cfg, "budget"]))).unwrap();
    assert_eq!(out["efficiency"]["eta_tot"], out["efficiency"]["eta_oc"]);
}

#[test]
fn pulse_trace() {
    let base = std::fs::read_to_string(config_path("fast_pulse.toml")).unwrap();
    let dir = tempfile::tempdir().unwrap();

    let trace = write(dir.path(), "trace.csv", &stdout(&run(&["--config", &config_path("fast_pulse.toml").to_string_lossy(), "pulse"])));
    let (h, rows) = table(&std::fs::read_to_string(&trace).unwrap());
    assert_eq!(h, ["t_s", "amp", "phase"]);
    let fit: Value = serde_json::from_str(&stdout(&run(&["fit", "step", &trace]))).unwrap();
    let (tau, _) = fit_value(&fit, "tau_rc");
    assert!((tau / 30e-9 - 1.0).abs() <= 0.05, "{tau}");
    assert!(rows.len() >= 1000);

    let off = write(dir.path(), "off.toml", &base.replace("power_dbm = 21", "power_dbm = -inf"));
    let (h, rows) = table(&stdout(&run(&["--config", &off, "pulse"])));
    assert!(column(&h, &rows, "amp").iter().all(|&a| a == 0.0));

    let dark = write(dir.path(), "dark.toml", &base.replace("optical_power_dbm = 0", "optical_power_dbm = -inf"));
    let (h, rows) = table(&stdout(&run(&["--config", &dark, "pulse"])));
    assert!(column(&h, &rows, "amp").iter().all(|&a| a == 0.0));

    let crowded = write(dir.path(), "duty.toml", &base.replace("rep_rate_hz = 1e6", "rep_rate_hz = 1e7"));
    assert_eq!(run(&["--config", &crowded, "pulse"]).status.code(), Some(1));
}

// Fit round-trips through files.

#[test]
fn doublet_file_round_trip() {
    let m = DoubletModel { kappa_l: hz(190e6), kappa_r: hz(154e6), kappa_ex: hz(60e6), j: hz(300e6), delta: hz(500e6), center: 0.0 };
    let w = linspace(hz(-2e9), hz(2e9), 4001).unwrap();
    let t = m.transmission(&w).unwrap();
    let noise = gaussian_noise(11, w.len(), 0.005);
    let mut text = String::from("# synthetic\nfreq_hz,transmission\n");
    for ((x, y), e) in w.iter().zip(&t).zip(&noise) {
        writeln!(text, "{},{}", 193.4e12 + to_hz(*x), y + e).unwrap();
    }
    let dir = tempfile::tempdir().unwrap();
    let data = write(dir.path(), "doublet.csv", &text);
    let r: Value = serde_json::from_str(&stdout(&run(&["fit", "doublet", &data, "--seed", "11"]))).unwrap();
    assert_eq!(r["seed"], 11);
    for (name, truth) in [("kappa_l", 190e6), ("kappa_r", 154e6), ("kappa_ex", 60e6), ("J", 300e6), ("delta", 500e6)] {
        let (v, se) = fit_value(&r, name);
        assert!((v - truth).abs() <= 3.0 * se && (v / truth - 1.0).abs() < 0.02, "{name}: {v} ± {se}");
    }
}

#[test]
fn s11_file_round_trip() {
    let m = S11Model { omega_m: hz(3.48e9), q_m: 284.0, eta_m: 0.11 };
    let w = linspace(hz(3.3e9), hz(3.66e9), 801).unwrap();
    let noise = gaussian_noise(12, 2 * w.len(), 0.005);
    let mut complex = String::from("freq_hz,re,im\n");
    let mut magnitude = String::from("freq_hz,mag\n");
    for (k, &x) in w.iter().enumerate() {
        let z = m.reflection(x) + Complex64::new(noise[2 * k], noise[2 * k + 1]);
        writeln!(complex, "{},{},{}", to_hz(x), z.re, z.im).unwrap();
        writeln!(magnitude, "{},{}", to_hz(x), m.reflection(x).norm() + noise[2 * k]).unwrap();
    }
    let dir = tempfile::tempdir().unwrap();
    for text in [complex, magnitude] {
        let data = write(dir.path(), "s11.csv", &text);
        let r: Value = serde_json::from_str(&stdout(&run(&["fit", "s11", &data]))).unwrap();
        let (f, _) = fit_value(&r, "omega_m");
        let (q, _) = fit_value(&r, "Q_m");
        let (eta, _) = fit_value(&r, "eta_m");
        assert!((f / 3.48e9 - 1.0).abs() < 1e-3, "{f}");
        assert!((q / 284.0 - 1.0).abs() < 0.03, "{q}");
        assert!((eta / 0.11 - 1.0).abs() < 0.03, "{eta}");
    }
}

#[test]
fn power_file_round_trip_recovers_coupling() {
    let cfg = load_config("reference_device.toml");
    let inputs = cfg.config.power_fit_inputs().unwrap();
    let noise = gaussian_noise(13, 12, 0.01);
    let mut text = String::from("power_dbm,eta_tot\n");
    for (k, e) in noise.iter().enumerate() {
        let dbm = 10.0 + k as f64;
        writeln!(text, "{dbm},{}", inputs.eta_tot(8e-13, dbm_to_watts(dbm)) * (1.0 + e)).unwrap();
    }
    let dir = tempfile::tempdir().unwrap();
    let data = write(dir.path(), "power.csv", &text);
    let r: Value = serde_json::from_str(&stdout(&run(&["--config", &reference_device(), "fit", "power", &data]))).unwrap();
    let (c0, _) = fit_value(&r, "C0");
    let (g0, _) = fit_value(&r, "g0");
    assert!((c0 / 8e-13 - 1.0).abs() < 0.02, "{c0}");
    assert!((g0 / 42.0 - 1.0).abs() < 0.05, "{g0}");
}

#[test]
fn step_file_round_trip() {
    let m = RcStep { tau: 30e-9, amplitude: 2.5, t0: 40e-9 };
    let noise = gaussian_noise(14, 600, 0.02);
    let mut text = String::from("t_s,amp\n");
    for (k, e) in noise.iter().enumerate() {
        let t = k as f64 * 0.5e-9;
        writeln!(text, "{t},{}", m.value(t) + e).unwrap();
    }
    let dir = tempfile::tempdir().unwrap();
    let data = write(dir.path(), "step.csv", &text);
    let r: Value = serde_json::from_str(&stdout(&run(&["fit", "step", &data]))).unwrap();
    for (name, truth) in [("tau_rc", 30e-9), ("amplitude", 2.5), ("t0", 40e-9)] {
        let (v, se) = fit_value(&r, name);
        assert!((v - truth).abs() <= 3.0 * se, "{name}: {v} ± {se}");
    }
}
