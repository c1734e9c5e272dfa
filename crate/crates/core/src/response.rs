//! Closed-form transfer functions and conversion efficiencies.
//!
//! Spectra are indexed by the offset `omega` from the relevant carrier. In the
//! anti-Stokes configuration the microwave signal sits at `omega_m + omega` and the
//! optical signal at `omega_+ + omega`. In the Stokes configuration the optical
//! signal sits at `omega_- + omega` and the microwave port refers to the conjugate
//! sideband at `omega_m - omega`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::hybridize::{self, Supermodes};
use crate::model::{AcousticMode, DeviceParams, PumpConfig, PumpConfiguration, HBAR};
use crate::{Error, Result};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Cavity susceptibility `(kappa/2 - i omega)^-1`.
pub fn chi(kappa: f64, omega: f64) -> Complex64 {
    1.0 / Complex64::new(0.5 * kappa, -omega)
}

/// Everything the linear response depends on, reduced to rates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OperatingPoint {
    pub configuration: PumpConfiguration,
    pub kappa_minus: f64,
    pub kappa_plus: f64,
    pub kappa_ex_minus: f64,
    pub kappa_ex_plus: f64,
    pub omega_m: f64,
    pub kappa_m: f64,
    pub kappa_ex_m: f64,
    /// Active multi-photon coupling (`g_+` anti-Stokes, `g_-` Stokes).
    pub g: Complex64,
    /// Pump photons in the addressed supermode.
    pub n_bar: f64,
    pub omega_pump: f64,
}

impl OperatingPoint {
    /// Operating point of the transduction mode under a resonant pump.
    pub fn new(params: &DeviceParams, pump: &PumpConfig) -> Result<Self> {
        Self::for_mode(params, pump, 0, 0.0)
    }

    /// Operating point of acoustic mode `mode` with the pump shifted by `pump_offset`.
    pub fn for_mode(params: &DeviceParams, pump: &PumpConfig, mode: usize, pump_offset: f64) -> Result<Self> {
        let (modes, c) = hybridize::dress_detuned(params, pump, pump_offset)?;
        let acoustic = params
            .acoustic_modes
            .get(mode)
            .ok_or_else(|| Error::InvalidParameter(format!("no acoustic mode {mode}")))?;
        let n_bar = match pump.configuration {
            PumpConfiguration::AntiStokes => c.alpha_ss_minus.norm_sqr(),
            PumpConfiguration::Stokes => c.alpha_ss_plus.norm_sqr(),
        };
        Ok(Self {
            configuration: pump.configuration,
            kappa_minus: modes.kappa_minus,
            kappa_plus: modes.kappa_plus,
            kappa_ex_minus: modes.kappa_ex_minus,
            kappa_ex_plus: modes.kappa_ex_plus,
            omega_m: acoustic.omega_m,
            kappa_m: acoustic.kappa_m,
            kappa_ex_m: acoustic.kappa_ex_m,
            g: hybridize::active_coupling(&c, pump.configuration),
            n_bar,
            omega_pump: pump.omega_l(&modes) + pump_offset,
        })
    }

    /// Operating point from bare rates, with `n_bar = 1` and no pump frequency.
    pub fn from_rates(
        configuration: PumpConfiguration,
        modes: &Supermodes,
        acoustic: &AcousticMode,
        g: Complex64,
    ) -> Result<Self> {
        acoustic.validate()?;
        let op = Self {
            configuration,
            kappa_minus: modes.kappa_minus,
            kappa_plus: modes.kappa_plus,
            kappa_ex_minus: modes.kappa_ex_minus,
            kappa_ex_plus: modes.kappa_ex_plus,
            omega_m: acoustic.omega_m,
            kappa_m: acoustic.kappa_m,
            kappa_ex_m: acoustic.kappa_ex_m,
            g,
            n_bar: 1.0,
            omega_pump: 0.0,
        };
        op.validate()?;
        Ok(op)
    }

    pub fn validate(&self) -> Result<()> {
        let rates = [
            self.kappa_minus,
            self.kappa_plus,
            self.kappa_m,
        ];
        if rates.iter().any(|&k| !(k > 0.0 && k.is_finite())) {
            return Err(Error::InvalidParameter("linewidths must be positive".into()));
        }
        let ex = [
            (self.kappa_ex_minus, self.kappa_minus),
            (self.kappa_ex_plus, self.kappa_plus),
            (self.kappa_ex_m, self.kappa_m),
        ];
        if ex.iter().any(|&(e, k)| !(e >= 0.0 && e <= k * (1.0 + 1e-12))) {
            return Err(Error::InvalidParameter("external coupling outside [0, kappa]".into()));
        }
        if !(self.g.re.is_finite() && self.g.im.is_finite()) {
            return Err(Error::InvalidParameter(format!("coupling g = {}", self.g)));
        }
        Ok(())
    }

    pub fn with_coupling(self, g: Complex64) -> Self {
        Self { g, ..self }
    }

    /// Linewidth and external rate of the supermode that carries the optical signal.
    pub fn signal_mode(&self) -> (f64, f64) {
        match self.configuration {
            PumpConfiguration::AntiStokes => (self.kappa_plus, self.kappa_ex_plus),
            PumpConfiguration::Stokes => (self.kappa_minus, self.kappa_ex_minus),
        }
    }

    /// Linewidth and external rate of the pumped supermode.
    pub fn pump_mode(&self) -> (f64, f64) {
        match self.configuration {
            PumpConfiguration::AntiStokes => (self.kappa_minus, self.kappa_ex_minus),
            PumpConfiguration::Stokes => (self.kappa_plus, self.kappa_ex_plus),
        }
    }

    pub fn cooperativity(&self) -> f64 {
        cooperativity(self.g.norm(), self.signal_mode().0, self.kappa_m)
    }

    /// Largest optical linewidth over the acoustic frequency; small values justify
    /// the sideband-resolved forms.
    pub fn sideband_ratio(&self) -> f64 {
        self.kappa_minus.max(self.kappa_plus) / self.omega_m
    }

    /// Parametric instability check (Stokes only).
    pub fn check_stability(&self) -> Result<()> {
        let c = self.cooperativity();
        if self.configuration == PumpConfiguration::Stokes && c >= 1.0 {
            return Err(Error::ParametricInstability(c));
        }
        Ok(())
    }
}

/// `C = 4|g|^2 / (kappa_o kappa_m)`.
pub fn cooperativity(g: f64, kappa_o: f64, kappa_m: f64) -> f64 {
    4.0 * g * g / (kappa_o * kappa_m)
}

/// `4C/(1+C)^2` (anti-Stokes) or `4C/(1-C)^2` (Stokes).
pub fn eta_internal(c: f64, configuration: PumpConfiguration) -> Result<f64> {
    if !(c >= 0.0) {
        return Err(Error::InvalidParameter(format!("cooperativity {c}")));
    }
    match configuration {
        PumpConfiguration::AntiStokes => Ok(4.0 * c / (1.0 + c).powi(2)),
        PumpConfiguration::Stokes if c < 1.0 => Ok(4.0 * c / (1.0 - c).powi(2)),
        PumpConfiguration::Stokes => Err(Error::ParametricInstability(c)),
    }
}

pub fn eta_extraction(kappa_ex_o: f64, kappa_o: f64, kappa_ex_m: f64, kappa_m: f64) -> f64 {
    (kappa_ex_o / kappa_o) * (kappa_ex_m / kappa_m)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Port {
    Optical,
    Microwave,
}

/// Scattering parameter `S_{to <- from}` at offset `omega`.
pub fn transfer(op: &OperatingPoint, from: Port, to: Port, omega: f64) -> Result<Complex64> {
    op.check_stability()?;
    let g = op.g;
    let g2 = g.norm_sqr();
    let chi_m = chi(op.kappa_m, omega);
    let root = (op.kappa_ex_plus.sqrt(), op.kappa_ex_minus.sqrt(), op.kappa_ex_m.sqrt());
    let s = match op.configuration {
        PumpConfiguration::AntiStokes => {
            let chi_p = chi(op.kappa_plus, omega);
            let d = 1.0 + g2 * chi_p * chi_m;
            let cross = root.0 * root.2 * chi_p * chi_m / d;
            match (from, to) {
                (Port::Microwave, Port::Optical) => -I * g * cross,
                (Port::Optical, Port::Microwave) => I * g.conj() * cross,
                (Port::Microwave, Port::Microwave) => -1.0 + op.kappa_ex_m * chi_m / d,
                (Port::Optical, Port::Optical) => {
                    1.0 - op.kappa_ex_plus * chi_p / d
                        - op.kappa_ex_minus * chi(op.kappa_minus, omega + op.omega_m)
                }
            }
        }
        PumpConfiguration::Stokes => {
            let chi_n = chi(op.kappa_minus, omega);
            let d = 1.0 - g2 * chi_n * chi_m;
            let cross = root.1 * root.2 * chi_n * chi_m / d;
            match (from, to) {
                (Port::Microwave, Port::Optical) => -I * g * cross,
                (Port::Optical, Port::Microwave) => -I * g.conj() * cross,
                (Port::Microwave, Port::Microwave) => -1.0 + op.kappa_ex_m * chi_m / d,
                (Port::Optical, Port::Optical) => {
                    1.0 - op.kappa_ex_minus * chi_n / d
                        - op.kappa_ex_plus * chi(op.kappa_plus, omega - op.omega_m)
                }
            }
        }
    };
    Ok(s)
}

/// On-chip photon-number conversion efficiency at offset `omega`. Up- and
/// down-conversion are equal.
pub fn onchip_efficiency(op: &OperatingPoint, omega: f64) -> Result<f64> {
    Ok(transfer(op, Port::Microwave, Port::Optical, omega)?.norm_sqr())
}

/// Evenly spaced grid, endpoints included.
pub fn linspace(start: f64, stop: f64, n: usize) -> Result<Vec<f64>> {
    if n < 2 || !(stop > start) || !start.is_finite() || !stop.is_finite() {
        return Err(Error::InvalidParameter(format!("grid ({start}, {stop}, {n})")));
    }
    let step = (stop - start) / (n - 1) as f64;
    Ok((0..n).map(|k| if k == n - 1 { stop } else { start + step * k as f64 }).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Values {
    Real(Vec<f64>),
    Complex(Vec<Complex64>),
}

impl Values {
    fn len(&self) -> usize {
        match self {
            Values::Real(v) => v.len(),
            Values::Complex(v) => v.len(),
        }
    }

    fn finite(&self) -> bool {
        match self {
            Values::Real(v) => v.iter().all(|x| x.is_finite()),
            Values::Complex(v) => v.iter().all(|z| z.re.is_finite() && z.im.is_finite()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Channel {
    pub label: String,
    pub values: Values,
}

/// Labelled channels on a strictly ascending frequency grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Spectrum {
    omega: Vec<f64>,
    channels: Vec<Channel>,
}

impl Spectrum {
    pub fn new(omega: Vec<f64>) -> Result<Self> {
        if omega.is_empty() || omega.iter().any(|w| !w.is_finite()) {
            return Err(Error::InvalidParameter("empty or non-finite grid".into()));
        }
        if omega.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParameter("grid must be strictly ascending".into()));
        }
        Ok(Self { omega, channels: Vec::new() })
    }

    pub fn omega(&self) -> &[f64] {
        &self.omega
    }

    pub fn channels(&self) -> &[Channel] {
        &self.channels
    }

    pub fn len(&self) -> usize {
        self.omega.len()
    }

    pub fn is_empty(&self) -> bool {
        self.omega.is_empty()
    }

    pub fn push(&mut self, label: &str, values: Values) -> Result<()> {
        if values.len() != self.omega.len() {
            return Err(Error::InvalidParameter(format!(
                "channel `{label}` has {} values for {} grid points",
                values.len(),
                self.omega.len()
            )));
        }
        if !values.finite() {
            return Err(Error::InvalidParameter(format!("channel `{label}` is not finite")));
        }
        self.channels.push(Channel { label: label.to_string(), values });
        Ok(())
    }

    pub fn with_real(mut self, label: &str, values: Vec<f64>) -> Result<Self> {
        self.push(label, Values::Real(values))?;
        Ok(self)
    }

    pub fn real(&self, label: &str) -> Option<&[f64]> {
        self.channels.iter().find(|c| c.label == label).and_then(|c| match &c.values {
            Values::Real(v) => Some(v.as_slice()),
            Values::Complex(_) => None,
        })
    }

    pub fn complex(&self, label: &str) -> Option<&[Complex64]> {
        self.channels.iter().find(|c| c.label == label).and_then(|c| match &c.values {
            Values::Complex(v) => Some(v.as_slice()),
            Values::Real(_) => None,
        })
    }
}

/// Efficiency spectrum (channel `eta`) on `grid`, evaluated in parallel.
pub fn onchip_efficiency_spectrum(op: &OperatingPoint, grid: &[f64]) -> Result<Spectrum> {
    op.check_stability()?;
    let eta = grid.par_iter().map(|&w| onchip_efficiency(op, w)).collect::<Result<Vec<_>>>()?;
    Spectrum::new(grid.to_vec())?.with_real("eta", eta)
}

/// All four scattering parameters on `grid` as complex channels.
pub fn scattering_spectrum(op: &OperatingPoint, grid: &[f64]) -> Result<Spectrum> {
    op.check_stability()?;
    let mut s = Spectrum::new(grid.to_vec())?;
    for (label, from, to) in [
        ("s_oo", Port::Optical, Port::Optical),
        ("s_om", Port::Microwave, Port::Optical),
        ("s_mo", Port::Optical, Port::Microwave),
        ("s_mm", Port::Microwave, Port::Microwave),
    ] {
        let v = grid.par_iter().map(|&w| transfer(op, from, to, w)).collect::<Result<Vec<_>>>()?;
        s.push(label, Values::Complex(v))?;
    }
    Ok(s)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LossStage {
    pub stage: String,
    pub factor: f64,
    pub db: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EfficiencyBudget {
    pub configuration: PumpConfiguration,
    pub power_in: f64,
    pub cooperativity: f64,
    pub c0: f64,
    pub n_bar: f64,
    pub eta_int: f64,
    pub eta_ext: f64,
    /// Exact on-chip efficiency at zero detuning.
    pub eta_oc: f64,
    /// `eta_probes * eta_fiber_chip * eta_oc`.
    pub eta_tot: f64,
    /// Low-cooperativity estimate, linear in pump power.
    pub eta_tot_linear: f64,
    pub sideband_ratio: f64,
    pub ledger: Vec<LossStage>,
}

impl EfficiencyBudget {
    pub fn eta_tot_db(&self) -> f64 {
        crate::model::linear_to_db(self.eta_tot)
    }
}

/// Single-photon cooperativity `C / n_bar` of the transduction mode.
pub fn single_photon_cooperativity(params: &DeviceParams, pump: &PumpConfig) -> Result<f64> {
    // Any nonzero reference power gives the same ratio.
    let reference = pump.with_power(1e-3);
    let op = OperatingPoint::new(params, &reference)?;
    Ok(op.cooperativity() / op.n_bar)
}

/// Off-chip efficiency with the full loss ledger, at zero detuning.
pub fn offchip_efficiency(params: &DeviceParams, pump: &PumpConfig) -> Result<EfficiencyBudget> {
    let op = OperatingPoint::new(params, pump)?;
    let c = op.cooperativity();
    let c0 = single_photon_cooperativity(params, pump)?;
    let (kappa_s, kappa_ex_s) = op.signal_mode();
    let (kappa_p, kappa_ex_p) = op.pump_mode();
    let eta_o = kappa_ex_s / kappa_s;
    let eta_m = op.kappa_ex_m / op.kappa_m;
    let eta_ext = eta_o * eta_m;
    let eta_int = eta_internal(c, op.configuration)?;
    let eta_oc = onchip_efficiency(&op, 0.0)?;
    let losses = params.losses;
    let eta_tot = losses.eta_probes * losses.eta_fiber_chip * eta_oc;
    let n_bar_linear = 4.0 * kappa_ex_p / (kappa_p * kappa_p) * losses.eta_fiber_chip * pump.power_in
        / (HBAR * op.omega_pump);
    let eta_tot_linear = losses.eta_probes * losses.eta_fiber_chip * eta_ext * 4.0 * c0 * n_bar_linear;
    let stage = |name: &str, f: f64| LossStage {
        stage: name.to_string(),
        factor: f,
        db: crate::model::linear_to_db(f),
    };
    let ledger = vec![
        stage("microwave probes", losses.eta_probes),
        stage("fiber-chip facet", losses.eta_fiber_chip),
        stage("optical extraction", eta_o),
        stage("microwave extraction", eta_m),
        stage("internal conversion", eta_int),
    ];
    Ok(EfficiencyBudget {
        configuration: op.configuration,
        power_in: pump.power_in,
        cooperativity: c,
        c0,
        n_bar: op.n_bar,
        eta_int,
        eta_ext,
        eta_oc,
        eta_tot,
        eta_tot_linear,
        sideband_ratio: op.sideband_ratio(),
        ledger,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MultimodeSpectrum {
    /// Grid in absolute microwave angular frequency; channels `total` and `mode_<k>`.
    pub spectrum: Spectrum,
    pub warnings: Vec<String>,
}

/// Sum of independent per-mode efficiency spectra on an absolute microwave grid,
/// with the pump shifted by `pump_detuning` from its supermode.
pub fn multimode_spectrum(
    params: &DeviceParams,
    pump: &PumpConfig,
    pump_detuning: f64,
    grid: &[f64],
) -> Result<MultimodeSpectrum> {
    let omega_ref = params.acoustic().omega_m;
    let mut warnings = Vec::new();
    let modes = &params.acoustic_modes;
    for (i, a) in modes.iter().enumerate() {
        for b in &modes[i + 1..] {
            let sep = (a.omega_m - b.omega_m).abs();
            if sep < 3.0 * a.kappa_m.max(b.kappa_m) {
                warnings.push(format!(
                    "acoustic modes at {:.6e} and {:.6e} rad/s overlap (separation {:.3e} rad/s)",
                    a.omega_m, b.omega_m, sep
                ));
            }
        }
    }
    let mut spectrum = Spectrum::new(grid.to_vec())?;
    let mut total = vec![0.0; grid.len()];
    for k in 0..modes.len() {
        let op = OperatingPoint::for_mode(params, pump, k, pump_detuning)?;
        op.check_stability()?;
        if op.sideband_ratio() > 0.1 && k == 0 {
            warnings.push(format!("sideband ratio kappa/omega_m = {:.3}", op.sideband_ratio()));
        }
        let eta: Vec<f64> = grid
            .par_iter()
            .map(|&w| multimode_term(&op, omega_ref, pump_detuning, w))
            .collect();
        for (t, e) in total.iter_mut().zip(&eta) {
            *t += e;
        }
        spectrum.push(&format!("mode_{k}"), Values::Real(eta))?;
    }
    spectrum.channels.insert(0, Channel { label: "total".into(), values: Values::Real(total) });
    Ok(MultimodeSpectrum { spectrum, warnings })
}

fn multimode_term(op: &OperatingPoint, omega_ref: f64, pump_detuning: f64, omega_mw: f64) -> f64 {
    let g2 = op.g.norm_sqr();
    let (chi_o, chi_m, d) = match op.configuration {
        PumpConfiguration::AntiStokes => {
            let chi_o = chi(op.kappa_plus, omega_mw - omega_ref + pump_detuning);
            let chi_m = chi(op.kappa_m, omega_mw - op.omega_m);
            (chi_o, chi_m, 1.0 + g2 * chi_o * chi_m)
        }
        PumpConfiguration::Stokes => {
            let chi_o = chi(op.kappa_minus, omega_ref + pump_detuning - omega_mw);
            let chi_m = chi(op.kappa_m, op.omega_m - omega_mw);
            (chi_o, chi_m, 1.0 - g2 * chi_o * chi_m)
        }
    };
    let (_, kappa_ex_s) = op.signal_mode();
    kappa_ex_s * op.kappa_ex_m * g2 * (chi_o * chi_m / d).norm_sqr()
}

/// Full width at half maximum of the first channel (magnitude for complex values).
pub fn fwhm(spectrum: &Spectrum) -> Result<f64> {
    let ch = spectrum
        .channels
        .first()
        .ok_or_else(|| Error::InvalidParameter("spectrum has no channels".into()))?;
    let y: Vec<f64> = match &ch.values {
        Values::Real(v) => v.clone(),
        Values::Complex(v) => v.iter().map(|z| z.norm()).collect(),
    };
    fwhm_of(&spectrum.omega, &y)
}

/// FWHM with linear interpolation of the half-maximum crossings.
pub fn fwhm_of(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() || x.len() < 3 {
        return Err(Error::InsufficientResolution(x.len()));
    }
    let (imax, &ymax) = y
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .expect("non-empty");
    let ymin = y.iter().copied().fold(f64::INFINITY, f64::min);
    if !(ymax - ymin > 1e-12 * ymax.abs()) {
        return Err(Error::FlatSpectrum);
    }
    if imax == 0 || imax == y.len() - 1 {
        return Err(Error::InsufficientSpan);
    }
    let half = 0.5 * ymax;
    let cross = |a: usize, b: usize| x[a] + (half - y[a]) * (x[b] - x[a]) / (y[b] - y[a]);
    let left = (1..=imax).rev().find(|&k| y[k - 1] < half).map(|k| cross(k - 1, k));
    let right = (imax..y.len() - 1).find(|&k| y[k + 1] < half).map(|k| cross(k, k + 1));
    match (left, right) {
        (Some(l), Some(r)) => {
            let inside = x.iter().filter(|&&w| w >= l && w <= r).count();
            if inside < 8 {
                return Err(Error::InsufficientResolution(inside));
            }
            Ok(r - l)
        }
        _ => Err(Error::InsufficientSpan),
    }
}

/// FWHM of `|chi(a, w) chi(b, w)|^2`: the positive root of the half-maximum quartic
/// `(w^2 + a^2/4)(w^2 + b^2/4) = a^2 b^2 / 8`.
pub fn lorentzian_product_fwhm(a: f64, b: f64) -> f64 {
    let s = 0.25 * (a * a + b * b);
    let p = a * a * b * b / 16.0;
    let u = 2.0 * p / (s + (s * s + 4.0 * p).sqrt());
    2.0 * u.sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptimalCoupling {
    pub r_opt: f64,
    pub eta_peak: f64,
    /// `(R, eta)` on a log grid over `[0.01, 100]`.
    pub curve: Vec<(f64, f64)>,
}

/// Power-limited efficiency `F R^2 / (1+R)^4` at coupling ratio `R = kappa_ex/kappa_int`.
pub fn coupling_efficiency(f: f64, r: f64) -> f64 {
    f * r * r / (1.0 + r).powi(4)
}

pub fn optimal_coupling(f: f64) -> Result<OptimalCoupling> {
    if !(f > 0.0 && f.is_finite()) {
        return Err(Error::InvalidParameter(format!("prefactor F = {f}")));
    }
    let n = 401;
    let curve = (0..n)
        .map(|k| {
            let r = 10f64.powf(-2.0 + 4.0 * k as f64 / (n - 1) as f64);
            (r, coupling_efficiency(f, r))
        })
        .collect();
    Ok(OptimalCoupling { r_opt: 1.0, eta_peak: f / 16.0, curve })
}
