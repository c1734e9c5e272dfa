//! Transmission of a probe past the photonic molecule, and its inverse fit.

use num_complex::Complex64;
use serde::Serialize;

use super::lm::{minimize, LmOptions, Problem};
use super::{noise_floor, param, sorted_by_x, FitReport};
use crate::{Error, Result, Spectrum};

/// Two coupled rings side-coupled to one bus with equal external rates. `center`
/// is the mean ring frequency on the spectrum's axis; the left ring sits at
/// `center + delta/2`. Light leaving both rings interferes in the bus:
/// `t = 1 - sqrt(kappa_ex) (a_l + a_r)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DoubletModel {
    /// Total linewidths of the bare rings.
    pub kappa_l: f64,
    pub kappa_r: f64,
    pub kappa_ex: f64,
    pub j: f64,
    pub delta: f64,
    pub center: f64,
}

impl DoubletModel {
    pub fn validate(&self) -> Result<()> {
        if !(self.kappa_ex >= 0.0 && self.kappa_ex <= self.kappa_l.min(self.kappa_r)) {
            return Err(Error::InvalidParameter(format!(
                "kappa_ex = {} with ring linewidths {}, {}",
                self.kappa_ex, self.kappa_l, self.kappa_r
            )));
        }
        if !(self.j >= 0.0) {
            return Err(Error::InvalidParameter(format!("J = {}", self.j)));
        }
        Ok(())
    }

    /// Complex field transmission at probe frequency `omega`.
    pub fn amplitude(&self, omega: f64) -> Complex64 {
        let ml = Complex64::new(0.5 * self.kappa_l, -(omega - self.center - 0.5 * self.delta));
        let mr = Complex64::new(0.5 * self.kappa_r, -(omega - self.center + 0.5 * self.delta));
        let off = Complex64::new(0.0, -self.j);
        1.0 - self.kappa_ex * (ml + mr - 2.0 * off) / (ml * mr - off * off)
    }

    /// Power transmission on `omega` (same axis as `center`).
    pub fn transmission(&self, omega: &[f64]) -> Result<Vec<f64>> {
        self.validate()?;
        Ok(omega.iter().map(|&w| self.amplitude(w).norm_sqr()).collect())
    }

    fn from_vec(p: &[f64], origin: f64) -> Self {
        Self { kappa_l: p[0], kappa_r: p[1], kappa_ex: p[2], j: p[3], delta: p[4], center: origin + p[5] }
    }
}

#[derive(Debug, Clone, Copy)]
struct Dip {
    index: usize,
    depth: f64,
    width: f64,
}

fn moving_average(y: &[f64], half: usize) -> Vec<f64> {
    (0..y.len())
        .map(|i| {
            let (a, b) = (i.saturating_sub(half), (i + half + 1).min(y.len()));
            y[a..b].iter().sum::<f64>() / (b - a) as f64
        })
        .collect()
}

fn local_minima(y: &[f64], half: usize) -> Vec<usize> {
    (0..y.len())
        .filter(|&i| {
            let (a, b) = (i.saturating_sub(half), (i + half + 1).min(y.len()));
            y[a..b].iter().all(|&v| v >= y[i]) && y[a..b].iter().any(|&v| v > y[i])
        })
        .collect()
}

fn dip_width(omega: &[f64], y: &[f64], i: usize, level: f64, lo: usize, hi: usize) -> Option<f64> {
    let cross = |a: usize, b: usize| {
        let f = (level - y[a]) / (y[b] - y[a]);
        omega[a] + f * (omega[b] - omega[a])
    };
    let left = (lo..i).rev().find(|&k| y[k] >= level).map(|k| cross(k + 1, k));
    let right = (i + 1..=hi).find(|&k| y[k] >= level).map(|k| cross(k - 1, k));
    match (left, right) {
        (Some(l), Some(r)) => Some(r - l),
        (Some(l), None) => Some(2.0 * (omega[i] - l)),
        (None, Some(r)) => Some(2.0 * (r - omega[i])),
        (None, None) => None,
    }
}

// The two most prominent dips, in ascending frequency.
fn find_dips(omega: &[f64], t: &[f64], baseline: f64) -> Result<[Dip; 2]> {
    let n = t.len();
    let sigma = noise_floor(t);
    let smooth = moving_average(t, (n / 400).max(2));
    let mut minima = local_minima(&smooth, (n / 200).max(3));
    minima.sort_by(|&a, &b| smooth[a].total_cmp(&smooth[b]));
    let Some(&first) = minima.first() else {
        return Err(Error::DegenerateData("no transmission dip".into()));
    };
    let depth1 = baseline - smooth[first];
    if depth1 < 5.0 * sigma.max(1e-12) {
        return Err(Error::DegenerateData("no transmission dip above the noise".into()));
    }
    let threshold = (0.03 * depth1).max(5.0 * sigma);
    let second = minima[1..].iter().copied().find(|&k| {
        let (a, b) = (k.min(first), k.max(first));
        let ridge = smooth[a..=b].iter().copied().fold(f64::MIN, f64::max);
        ridge - smooth[k] > threshold
    });
    let Some(second) = second else {
        return Err(Error::DegenerateData("single transmission dip; the doublet is unresolved".into()));
    };
    let (i, k) = (first.min(second), first.max(second));
    let ridge = i + smooth[i..=k].iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).map(|(o, _)| o).unwrap_or(0);
    let make = |idx: usize, lo: usize, hi: usize| -> Result<Dip> {
        let depth = baseline - smooth[idx];
        let width = dip_width(omega, &smooth, idx, baseline - 0.5 * depth, lo, hi)
            .ok_or_else(|| Error::DegenerateData("dip width not resolved".into()))?;
        Ok(Dip { index: idx, depth, width })
    };
    Ok([make(i, 0, ridge)?, make(k, ridge, n - 1)?])
}

/// Fit coupled-ring transmission (real channel `transmission`, linear power units,
/// normalized off resonance) for the ring linewidths, the shared external coupling,
/// `J`, the ring detuning and the doublet center.
pub fn fit_doublet(spectrum: &Spectrum) -> Result<FitReport> {
    let data = spectrum
        .real("transmission")
        .ok_or_else(|| Error::InvalidParameter("spectrum lacks a real `transmission` channel".into()))?;
    let (omega, t) = sorted_by_x(spectrum.omega(), data)?;
    if omega.len() < 16 {
        return Err(Error::DegenerateData(format!("{} samples", omega.len())));
    }
    let edge = (omega.len() / 20).max(1);
    let mut ends: Vec<f64> = t[..edge].iter().chain(&t[t.len() - edge..]).copied().collect();
    ends.sort_by(|a, b| a.total_cmp(b));
    let baseline = ends[ends.len() / 2];
    let dips = find_dips(&omega, &t, baseline)?;

    let origin = 0.5 * (omega[dips[0].index] + omega[dips[1].index]);
    let x: Vec<f64> = omega.iter().map(|w| w - origin).collect();
    let split = omega[dips[1].index] - omega[dips[0].index];
    let wbar = 0.5 * (dips[0].width + dips[1].width);
    let wmin = dips[0].width.min(dips[1].width);
    let kex0: f64 = dips
        .iter()
        .map(|d| 0.5 * d.width * (1.0 - ((baseline - d.depth).max(0.0) / baseline).sqrt()))
        .sum::<f64>()
        / 2.0;
    let mut kexs: Vec<f64> = [kex0, 2.0 * kex0, 0.45 * wmin, 0.8 * wmin]
        .iter()
        .map(|k| k.clamp(1e-3 * wbar, 0.95 * wmin))
        .collect();
    kexs.dedup_by(|a, b| (*a - *b).abs() < 1e-6 * wbar);

    let residuals_on = |xs: Vec<f64>, ts: Vec<f64>| {
        move |p: &[f64]| -> Result<Vec<f64>> {
            let m = DoubletModel::from_vec(p, 0.0);
            Ok(m.transmission(&xs)?.iter().zip(&ts).map(|(a, b)| a - b).collect())
        }
    };
    // Starts are screened on at most ~2000 samples and the winner is refined on all of them.
    let stride = (x.len() / 2000).max(1);
    let coarse = residuals_on(x.iter().step_by(stride).copied().collect(), t.iter().step_by(stride).copied().collect());
    let cost = |p: &[f64]| coarse(p).map(|r| r.iter().map(|v| v * v).sum::<f64>()).unwrap_or(f64::INFINITY);

    let mut starts = Vec::new();
    for &kex in &kexs {
        for (ka, kb) in [(dips[0].width, dips[1].width), (dips[1].width, dips[0].width)] {
            for frac in [0.2, 0.45, 0.7, 0.95] {
                let phi = frac * std::f64::consts::FRAC_PI_2;
                starts.push(vec![ka, kb, kex, 0.5 * split * phi.sin(), split * phi.cos(), 0.0]);
            }
        }
    }
    starts.sort_by(|a, b| cost(a).total_cmp(&cost(b)));

    let scale = vec![wbar, wbar, wbar, split, split, wbar];
    let lower = vec![1e-3 * wbar, 1e-3 * wbar, 0.0, 0.0, 0.0, x[0]];
    let upper = vec![100.0 * wbar, 100.0 * wbar, 100.0 * wbar, 10.0 * split, 10.0 * split, x[x.len() - 1]];
    let problem = |x0: Vec<f64>, residuals| Problem { x0, scale: scale.clone(), lower: lower.clone(), upper: upper.clone(), residuals };
    let mut best: Option<super::lm::LmSolution> = None;
    let mut last_err = None;
    for x0 in starts {
        match minimize(&problem(x0, &coarse), &LmOptions::default()) {
            Ok(sol) if best.as_ref().is_none_or(|b| sol.cost < b.cost) => best = Some(sol),
            Ok(_) => {}
            Err(e) => last_err = Some(e),
        }
    }
    if stride > 1 {
        if let Some(b) = best.take() {
            let full = residuals_on(x.clone(), t.clone());
            best = Some(minimize(&problem(b.x, &full), &LmOptions::default())?);
        }
    }
    let sol = best.ok_or_else(|| last_err.unwrap_or(Error::NoConvergence(0)))?;
    let se = sol.std_errors();
    let m = DoubletModel::from_vec(&sol.x, origin);
    let mut flags = Vec::new();
    if sol.covariance.is_none() {
        flags.push("singular-covariance".to_string());
    }
    if m.j == 0.0 {
        flags.push("uncoupled".to_string());
    }
    Ok(FitReport {
        kind: "doublet".into(),
        parameters: vec![
            param("kappa_l", m.kappa_l, "rad/s", se[0]),
            param("kappa_r", m.kappa_r, "rad/s", se[1]),
            param("kappa_ex", m.kappa_ex, "rad/s", se[2]),
            param("J", m.j, "rad/s", se[3]),
            param("delta", m.delta, "rad/s", se[4]),
            param("center", m.center, "rad/s", se[5]),
        ],
        residual_norm: sol.cost.sqrt(),
        iterations: sol.iterations,
        converged: sol.converged,
        flags,
        seed: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calibrate::gaussian_noise;
    use crate::model::hz;
    use crate::response::linspace;

    fn truth(j: f64, delta: f64) -> DoubletModel {
        DoubletModel { kappa_l: hz(190e6), kappa_r: hz(154e6), kappa_ex: hz(60e6), j, delta, center: hz(40e6) }
    }

    fn synth(m: &DoubletModel, sigma: f64, seed: u64) -> Spectrum {
        let w = linspace(hz(-2e9), hz(2e9), 2001).unwrap();
        let t = m.transmission(&w).unwrap();
        let n = gaussian_noise(seed, w.len(), sigma);
        let t: Vec<f64> = t.iter().zip(n).map(|(a, b)| a + b).collect();
        Spectrum::new(w).unwrap().with_real("transmission", t).unwrap()
    }

    #[test]
    fn noiseless_round_trip() {
        let m = truth(hz(300e6), hz(500e6));
        let r = fit_doublet(&synth(&m, 0.0, 0)).unwrap();

        for (name, v) in [("kappa_l", m.kappa_l), ("kappa_r", m.kappa_r), ("kappa_ex", m.kappa_ex), ("J", m.j), ("delta", m.delta)] {
            assert!((r.value(name) / v - 1.0).abs() < 1e-6, "{name}: {} vs {v}", r.value(name));
        }
        assert!((r.value("center") - m.center).abs() < 1e-3 * hz(1e6));
    }

    #[test]
    fn uncoupled_rings_give_two_lorentzians() {
        let m = truth(0.0, hz(600e6));
        let r = fit_doublet(&synth(&m, 0.01, 3)).unwrap();
        assert!((r.value("delta") / m.delta - 1.0).abs() < 0.01);
        assert!((r.value("kappa_l") / m.kappa_l - 1.0).abs() < 0.02);
        assert!((r.value("kappa_r") / m.kappa_r - 1.0).abs() < 0.02);
        assert!(r.value("J") < 0.05 * m.delta);
    }

    #[test]
    fn single_dip_is_degenerate() {
        let w = linspace(hz(-1e9), hz(1e9), 1001).unwrap();
        let t: Vec<f64> = w.iter().map(|&x| (1.0 - hz(60e6) / Complex64::new(hz(85e6), -x)).norm_sqr()).collect();
        let s = Spectrum::new(w).unwrap().with_real("transmission", t).unwrap();
        assert!(matches!(fit_doublet(&s), Err(Error::DegenerateData(_))));
    }
}
