//! Photonic-molecule supermodes and the pump-dressed optomechanical couplings.
//!
//! Two rings with resonances `omega_l`, `omega_r`, linewidths `kappa_l`, `kappa_r`
//! and coupling `J` evolve under the non-Hermitian matrix
//!
//! ```text
//! K = [[ i omega_l + kappa_l/2,  -i J                  ],
//!      [ -i J,                    i omega_r + kappa_r/2 ]]
//! ```
//!
//! whose eigenvalues `i omega_pm + kappa_pm/2` define the supermodes. Eigenvectors
//! are normalized to unit Euclidean norm with the left-ring amplitude real and
//! non-negative.

use num_complex::Complex64;
use serde::Serialize;

use crate::model::{OpticalModeBare, PumpConfig, PumpConfiguration};
use crate::{Error, Result};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Hybridized optical doublet.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Supermodes {
    pub omega_minus: f64,
    pub omega_plus: f64,
    pub kappa_minus: f64,
    pub kappa_plus: f64,
    pub kappa_ex_minus: f64,
    pub kappa_ex_plus: f64,
    /// Left-ring participation of the lower (symmetric) supermode.
    pub alpha_minus: Complex64,
    pub alpha_plus: Complex64,
    /// Right-ring participation.
    pub beta_minus: Complex64,
    pub beta_plus: Complex64,
    /// Splitting `omega_plus - omega_minus` (never negative).
    pub delta_omega: f64,
    /// Linewidth difference `kappa_plus - kappa_minus`.
    pub delta_kappa: f64,
}

impl Supermodes {
    /// Coefficients `(x, y)` of the left ring in the supermode basis,
    /// `a_l = x a_- + y a_+`, renormalized to unit norm.
    pub fn left_ring_projection(&self) -> (Complex64, Complex64) {
        let x = self.alpha_minus.conj();
        let y = self.alpha_plus.conj();
        let norm = (x.norm_sqr() + y.norm_sqr()).sqrt();
        if norm == 0.0 {
            return (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0));
        }
        (x / norm, y / norm)
    }
}

/// Supermode frequencies, linewidths and participation ratios of two coupled rings.
///
/// For `J = 0` with identical rings the eigenbasis is arbitrary; the bare rings are
/// returned with the left ring as the lower mode.
pub fn supermodes(left: &OpticalModeBare, right: &OpticalModeBare, j: f64) -> Result<Supermodes> {
    left.validate()?;
    right.validate()?;
    if !(j >= 0.0) {
        return Err(Error::InvalidParameter(format!("inter-ring coupling J = {j}")));
    }
    let (kl, kr) = (left.kappa(), right.kappa());
    let omega_bar = 0.5 * (left.omega + right.omega);
    let kappa_bar = 0.5 * (kl + kr);
    let delta = left.omega - right.omega;
    let mu = kl - kr;

    if j == 0.0 && delta == 0.0 && mu == 0.0 {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        return Ok(Supermodes {
            omega_minus: omega_bar,
            omega_plus: omega_bar,
            kappa_minus: kl,
            kappa_plus: kr,
            kappa_ex_minus: left.kappa_ex,
            kappa_ex_plus: right.kappa_ex,
            alpha_minus: one,
            alpha_plus: zero,
            beta_minus: zero,
            beta_plus: one,
            delta_omega: 0.0,
            delta_kappa: 0.0,
        });
    }

    // lambda_+ - lambda_- = sqrt((mu/2 + i delta)^2 - 4 J^2), branch chosen so that
    // the splitting is non-negative.
    let z = Complex64::new(0.5 * mu, delta);
    let mut root = stable_sqrt(z * z - 4.0 * j * j);
    if root.im < 0.0 {
        root = -root;
    }
    let delta_omega = root.im;
    let delta_kappa = 2.0 * root.re;

    // Eigenvalues in the frame rotating at omega_bar.
    let k_ll = Complex64::new(0.5 * kl, 0.5 * delta);
    let k_rr = Complex64::new(0.5 * kr, -0.5 * delta);
    let lambda_mean = Complex64::new(0.5 * kappa_bar, 0.0);
    let lambda_minus = lambda_mean - 0.5 * root;
    let lambda_plus = lambda_mean + 0.5 * root;

    let (alpha_minus, beta_minus) = eigenvector(k_ll, k_rr, j, lambda_minus);
    let (alpha_plus, beta_plus) = eigenvector(k_ll, k_rr, j, lambda_plus);

    let mix = |a: Complex64, b: Complex64| a.norm_sqr() * left.kappa_ex + b.norm_sqr() * right.kappa_ex;

    Ok(Supermodes {
        omega_minus: omega_bar - 0.5 * delta_omega,
        omega_plus: omega_bar + 0.5 * delta_omega,
        kappa_minus: kappa_bar - 0.5 * delta_kappa,
        kappa_plus: kappa_bar + 0.5 * delta_kappa,
        kappa_ex_minus: mix(alpha_minus, beta_minus),
        kappa_ex_plus: mix(alpha_plus, beta_plus),
        alpha_minus,
        alpha_plus,
        beta_minus,
        beta_plus,
        delta_omega,
        delta_kappa,
    })
}

// Principal square root without cancellation in the smaller component.
fn stable_sqrt(w: Complex64) -> Complex64 {
    let r = w.norm();
    if r == 0.0 {
        return w;
    }
    if w.re >= 0.0 {
        let t = (0.5 * (r + w.re)).sqrt();
        Complex64::new(t, 0.5 * w.im / t)
    } else {
        let t = (0.5 * (r - w.re)).sqrt();
        Complex64::new(0.5 * w.im.abs() / t, t.copysign(w.im))
    }
}

fn eigenvector(k_ll: Complex64, k_rr: Complex64, j: f64, lambda: Complex64) -> (Complex64, Complex64) {
    // Either row of (K - lambda) v = 0 gives a valid vector; take the better conditioned one.
    let v1 = (I * j, k_ll - lambda);
    let v2 = (k_rr - lambda, I * j);
    let n1 = v1.0.norm_sqr() + v1.1.norm_sqr();
    let n2 = v2.0.norm_sqr() + v2.1.norm_sqr();
    let (a, b, n) = if n1 >= n2 { (v1.0, v1.1, n1) } else { (v2.0, v2.1, n2) };
    let n = n.sqrt();
    let (a, b) = (a / n, b / n);
    let phase = if a.norm() > 1e-300 {
        (-Complex64::new(0.0, a.arg())).exp()
    } else {
        (-Complex64::new(0.0, b.arg())).exp()
    };
    (a * phase, b * phase)
}

/// Ring detuning that makes the supermode splitting equal `target`. Solved for
/// `delta = omega_l - omega_r >= 0` while keeping `omega_bar` fixed.
pub fn detuning_for_splitting(left: &OpticalModeBare, right: &OpticalModeBare, j: f64, target: f64) -> Result<f64> {
    let split = |delta: f64| -> Result<f64> {
        let mean = 0.5 * (left.omega + right.omega);
        let l = OpticalModeBare { omega: mean + 0.5 * delta, ..*left };
        let r = OpticalModeBare { omega: mean - 0.5 * delta, ..*right };
        Ok(supermodes(&l, &r, j)?.delta_omega)
    };
    if split(0.0)? > target {
        return Err(Error::InvalidParameter(format!(
            "splitting at zero detuning already exceeds {target} rad/s; reduce J"
        )));
    }
    let (mut lo, mut hi) = (0.0, target.max(1.0));
    while split(hi)? < target {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if split(mid)? < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Independent check: roots of the characteristic polynomial of the coupled-ring
/// matrix evaluated at `s = -i omega_eval`, sorted by frequency. Each root is
/// `i (omega - omega_eval) + kappa / 2` for one supermode.
pub fn eigen_oracle(left: &OpticalModeBare, right: &OpticalModeBare, j: f64, omega_eval: f64) -> [Complex64; 2] {
    let inv_chi = |m: &OpticalModeBare| Complex64::new(0.5 * m.kappa(), m.omega - omega_eval);
    let a = inv_chi(left);
    let d = inv_chi(right);
    let off = I * j;
    let trace = a + d;
    let det = a * d - off * off;
    let disc = (trace * trace - 4.0 * det).sqrt();
    // Stable quadratic roots: q = -(b + sgn sqrt(disc))/2 with b = -trace.
    let q = if (trace.conj() * disc).re >= 0.0 { 0.5 * (trace + disc) } else { 0.5 * (trace - disc) };
    let (r1, r2) = if q.norm() == 0.0 { (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)) } else { (q, det / q) };
    if r1.im <= r2.im {
        [r1, r2]
    } else {
        [r2, r1]
    }
}

/// Multi-photon coupling rates and the steady-state pump amplitudes behind them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EffectiveCouplings {
    pub g_minus: Complex64,
    pub g_plus: Complex64,
    pub alpha_ss_minus: Complex64,
    pub alpha_ss_plus: Complex64,
}

/// Classical intracavity pump amplitudes of both supermodes.
///
/// `|alpha|^2` is a photon number; the bus carries `eta_fiber_chip * P_in` at the
/// addressed supermode's frequency and the detunings follow triple resonance.
pub fn steady_state_amplitudes(
    modes: &Supermodes,
    pump: &PumpConfig,
    eta_fiber_chip: f64,
    omega_m: f64,
) -> Result<(Complex64, Complex64)> {
    steady_state_amplitudes_detuned(modes, pump, eta_fiber_chip, omega_m, 0.0)
}

/// As [`steady_state_amplitudes`] with the pump shifted by `pump_offset` from the
/// addressed supermode.
pub fn steady_state_amplitudes_detuned(
    modes: &Supermodes,
    pump: &PumpConfig,
    eta_fiber_chip: f64,
    omega_m: f64,
    pump_offset: f64,
) -> Result<(Complex64, Complex64)> {
    let omega_l = pump.omega_l(modes) + pump_offset;
    let flux = crate::model::photon_flux(eta_fiber_chip * pump.power_in, omega_l)?;
    let s_in = flux.sqrt();
    let (d_minus, d_plus) = pump.configuration.detunings(omega_m);
    let (d_minus, d_plus) = (d_minus + pump_offset, d_plus + pump_offset);
    let amp = |kappa_ex: f64, kappa: f64, detuning: f64| {
        kappa_ex.sqrt() * s_in / Complex64::new(0.5 * kappa, -detuning)
    };
    Ok((
        amp(modes.kappa_ex_minus, modes.kappa_minus, d_minus),
        amp(modes.kappa_ex_plus, modes.kappa_plus, d_plus),
    ))
}

/// `g_- = g0 (|x|^2 alpha_- + x* y alpha_+)`, `g_+ = g0 (|y|^2 alpha_+ + x y* alpha_-)`.
pub fn effective_couplings(
    g0: f64,
    x: Complex64,
    y: Complex64,
    alpha_ss_minus: Complex64,
    alpha_ss_plus: Complex64,
) -> Result<EffectiveCouplings> {
    let norm = x.norm_sqr() + y.norm_sqr();
    if (norm - 1.0).abs() > 1e-9 {
        return Err(Error::InconsistentHybridization(norm));
    }
    Ok(EffectiveCouplings {
        g_minus: g0 * (x.norm_sqr() * alpha_ss_minus + x.conj() * y * alpha_ss_plus),
        g_plus: g0 * (y.norm_sqr() * alpha_ss_plus + x * y.conj() * alpha_ss_minus),
        alpha_ss_minus,
        alpha_ss_plus,
    })
}

/// Supermodes, pump amplitudes and couplings of a device under a given pump.
pub fn dress(params: &crate::DeviceParams, pump: &PumpConfig) -> Result<(Supermodes, EffectiveCouplings)> {
    dress_detuned(params, pump, 0.0)
}

/// As [`dress`] with the pump shifted by `pump_offset` from the addressed supermode.
pub fn dress_detuned(
    params: &crate::DeviceParams,
    pump: &PumpConfig,
    pump_offset: f64,
) -> Result<(Supermodes, EffectiveCouplings)> {
    params.validate()?;
    let modes = supermodes(&params.left, &params.right, params.j)?;
    let (am, ap) = steady_state_amplitudes_detuned(
        &modes,
        pump,
        params.losses.eta_fiber_chip,
        params.acoustic().omega_m,
        pump_offset,
    )?;
    let (x, y) = modes.left_ring_projection();
    let couplings = effective_couplings(params.g0, x, y, am, ap)?;
    Ok((modes, couplings))
}

/// The coupling that drives conversion in the given configuration.
pub fn active_coupling(couplings: &EffectiveCouplings, configuration: PumpConfiguration) -> Complex64 {
    match configuration {
        PumpConfiguration::AntiStokes => couplings.g_plus,
        PumpConfiguration::Stokes => couplings.g_minus,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::hz;

    fn ring(f: f64, kint: f64, kex: f64) -> OpticalModeBare {
        OpticalModeBare::new(hz(f), hz(kint), hz(kex)).unwrap()
    }

    #[test]
    fn symmetric_limit() {
        let l = ring(193e12, 100e6, 70e6);
        let r = ring(193e12, 100e6, 70e6);
        let j = hz(1e9);
        let m = supermodes(&l, &r, j).unwrap();
        let wbar = hz(193e12);
        assert!((m.omega_minus - (wbar - j)).abs() < 1e-6 * j);
        assert!((m.omega_plus - (wbar + j)).abs() < 1e-6 * j);
        assert!((m.kappa_minus - hz(170e6)).abs() < 1e-9 * hz(170e6));
        assert!((m.kappa_plus - hz(170e6)).abs() < 1e-9 * hz(170e6));
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!((m.alpha_minus - s).norm() < 1e-12);
        assert!((m.beta_minus - s).norm() < 1e-12);
        assert!((m.alpha_plus - s).norm() < 1e-12);
        assert!((m.beta_plus + s).norm() < 1e-12);
    }

    #[test]
    fn uncoupled_rings() {
        // mu * delta > 0: the upper mode is the broader left ring.
        let l = ring(193e12 + 2e9, 150e6, 40e6);
        let r = ring(193e12, 100e6, 54e6);
        let m = supermodes(&l, &r, 0.0).unwrap();
        assert!((m.delta_omega - hz(2e9)).abs() < 1e-9 * hz(2e9));
        assert!((m.delta_kappa - hz(36e6)).abs() < 1e-9 * hz(36e6));
        assert!((m.kappa_plus - l.kappa()).abs() < 1e-6);
        assert!((m.kappa_ex_plus - l.kappa_ex).abs() < 1e-6);
        // mu * delta < 0 keeps the frequency order and flips the linewidth difference.
        let m = supermodes(&r, &l, 0.0).unwrap();
        assert!((m.delta_omega - hz(2e9)).abs() < 1e-9 * hz(2e9));
        assert!((m.delta_kappa - hz(36e6)).abs() < 1e-9 * hz(36e6));
        let l2 = ring(193e12 + 2e9, 100e6, 54e6);
        let r2 = ring(193e12, 150e6, 40e6);
        let m = supermodes(&l2, &r2, 0.0).unwrap();
        assert!((m.delta_kappa + hz(36e6)).abs() < 1e-9 * hz(36e6));
        assert!((m.kappa_plus - l2.kappa()).abs() < 1e-6);
    }

    #[test]
    fn degenerate_case_returns_bare_modes() {
        let l = ring(193e12, 100e6, 70e6);
        let m = supermodes(&l, &l, 0.0).unwrap();
        assert_eq!(m.alpha_minus, Complex64::new(1.0, 0.0));
        assert_eq!(m.beta_minus, Complex64::new(0.0, 0.0));
        assert_eq!(m.delta_omega, 0.0);
    }

    #[test]
    fn device_linewidths_match_oracle() {
        let l = ring(193.4e12, 130e6, 60e6);
        let r = ring(193.4e12, 94e6, 60e6);
        let j = hz(300e6);
        for delta_hz in [0.0, 100e6, 600e6, -250e6] {
            let r = OpticalModeBare { omega: l.omega - hz(delta_hz), ..r };
            let m = supermodes(&l, &r, j).unwrap();
            let wbar = 0.5 * (l.omega + r.omega);
            let [lm, lp] = eigen_oracle(&l, &r, j, wbar);
            let diff = lp - lm;
            let closed = Complex64::new(0.5 * m.delta_kappa, m.delta_omega);
            assert!((diff - closed).norm() <= 1e-10 * closed.norm(), "{diff} vs {closed}");
            let mean = 0.5 * (lp + lm);
            assert!((4.0 * mean.re - (m.kappa_minus + m.kappa_plus)).abs() <= 1e-10 * m.kappa_plus);
        }
    }

    #[test]
    fn oracle_swaps_and_decouples() {
        let l = ring(193e12 + 1e9, 130e6, 60e6);
        let r = ring(193e12, 94e6, 60e6);
        let [a, b] = eigen_oracle(&l, &r, 0.0, l.omega);
        assert!((a - Complex64::new(0.5 * r.kappa(), r.omega - l.omega)).norm() < 1e-3);
        assert!((b - Complex64::new(0.5 * l.kappa(), 0.0)).norm() < 1e-3);
        let j = hz(420e6);
        let x = eigen_oracle(&l, &r, j, 0.5 * (l.omega + r.omega));
        let y = eigen_oracle(&r, &l, j, 0.5 * (l.omega + r.omega));
        for k in 0..2 {
            assert!((x[k] - y[k]).norm() < 1e-9 * x[k].norm());
        }
    }

    #[test]
    fn steady_state_and_couplings() {
        let l = ring(193.4e12, 130e6, 60e6);
        let r = ring(193.4e12, 94e6, 60e6);
        let m = supermodes(&l, &r, hz(1.74e9)).unwrap();
        let pump = PumpConfig::anti_stokes_dbm(-200.0).with_power(0.0);
        let (a, b) = steady_state_amplitudes(&m, &pump, 0.4, hz(3.48e9)).unwrap();
        assert_eq!((a.norm(), b.norm()), (0.0, 0.0));

        let s = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let alpha = Complex64::new(3.0, 1.0);
        let c = effective_couplings(2.0, s, s, alpha, Complex64::new(0.0, 0.0)).unwrap();
        assert!((c.g_minus - alpha).norm() < 1e-12);
        assert!((c.g_plus - alpha).norm() < 1e-12);
        let zero = Complex64::new(0.0, 0.0);
        let c = effective_couplings(2.0, s, s, zero, zero).unwrap();
        assert_eq!(c.g_minus, zero);
        assert!(matches!(
            effective_couplings(1.0, s, Complex64::new(1.0, 0.0), zero, zero),
            Err(Error::InconsistentHybridization(_))
        ));
    }

    #[test]
    fn splitting_solver_hits_target() {
        let l = ring(193.4e12, 130e6, 60e6);
        let r = ring(193.4e12, 94e6, 60e6);
        let j = hz(1.6e9);
        let target = hz(3.48e9);
        let delta = detuning_for_splitting(&l, &r, j, target).unwrap();
        let mean = l.omega;
        let l2 = OpticalModeBare { omega: mean + 0.5 * delta, ..l };
        let r2 = OpticalModeBare { omega: mean - 0.5 * delta, ..r };
        let m = supermodes(&l2, &r2, j).unwrap();
        assert!((m.delta_omega - target).abs() < 1e-6 * target);
        assert!(detuning_for_splitting(&l, &r, hz(2e9), target).is_err());
    }
}
