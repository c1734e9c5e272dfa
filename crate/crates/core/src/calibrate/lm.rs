//! Bounded Levenberg-Marquardt on scaled parameters with finite-difference Jacobians.

use nalgebra::{DMatrix, DVector};

use crate::{Error, Result};

pub type ResidualFn<'a> = dyn Fn(&[f64]) -> Result<Vec<f64>> + 'a;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LmOptions {
    pub max_iter: usize,
    /// Relative objective change that ends the search.
    pub ftol: f64,
    /// Scaled gradient norm that ends the search.
    pub gtol: f64,
}

impl Default for LmOptions {
    fn default() -> Self {
        Self { max_iter: 500, ftol: 1e-10, gtol: 1e-8 }
    }
}

/// Box-constrained least-squares problem. `scale` sets the typical magnitude of
/// each parameter; the search runs on `x / scale`.
pub struct Problem<'a> {
    pub x0: Vec<f64>,
    pub scale: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub residuals: &'a ResidualFn<'a>,
}

#[derive(Debug, Clone)]
pub struct LmSolution {
    pub x: Vec<f64>,
    pub residuals: Vec<f64>,
    /// Sum of squared residuals.
    pub cost: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Cost after every accepted step, starting with the initial cost.
    pub history: Vec<f64>,
    /// `sigma^2 (J^T J)^-1` in parameter units; `None` when `J^T J` is singular.
    pub covariance: Option<DMatrix<f64>>,
}

impl LmSolution {
    pub fn std_errors(&self) -> Vec<f64> {
        match &self.covariance {
            Some(c) => (0..self.x.len()).map(|i| c[(i, i)].max(0.0).sqrt()).collect(),
            None => vec![f64::NAN; self.x.len()],
        }
    }
}

const FD_STEP: f64 = 1e-6;
const LAMBDA_MAX: f64 = 1e16;

struct Scaled<'p, 'a> {
    p: &'p Problem<'a>,
}

impl Scaled<'_, '_> {
    fn unscale(&self, u: &[f64]) -> Vec<f64> {
        u.iter().zip(&self.p.scale).map(|(u, s)| u * s).collect()
    }

    fn lo(&self, i: usize) -> f64 {
        self.p.lower[i] / self.p.scale[i]
    }

    fn hi(&self, i: usize) -> f64 {
        self.p.upper[i] / self.p.scale[i]
    }

    fn clamp(&self, u: &mut [f64]) {
        for (i, v) in u.iter_mut().enumerate() {
            *v = v.clamp(self.lo(i), self.hi(i));
        }
    }

    fn eval(&self, u: &[f64]) -> Result<DVector<f64>> {
        let r = (self.p.residuals)(&self.unscale(u))?;
        if r.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("non-finite residual".into()));
        }
        Ok(DVector::from_vec(r))
    }

    fn jacobian(&self, u: &[f64], r0: &DVector<f64>) -> Result<DMatrix<f64>> {
        let mut jac = DMatrix::zeros(r0.len(), u.len());
        let mut w = u.to_vec();
        for k in 0..u.len() {
            let h = FD_STEP * u[k].abs().max(1.0);
            let (fwd, bwd) = (u[k] + h <= self.hi(k), u[k] - h >= self.lo(k));
            let col = match (fwd, bwd) {
                (true, true) => {
                    w[k] = u[k] + h;
                    let rp = self.eval(&w)?;
                    w[k] = u[k] - h;
                    let rm = self.eval(&w)?;
                    (rp - rm) / (2.0 * h)
                }
                (true, false) => {
                    w[k] = u[k] + h;
                    (self.eval(&w)? - r0) / h
                }
                (false, true) => {
                    w[k] = u[k] - h;
                    (r0 - self.eval(&w)?) / h
                }
                (false, false) => DVector::zeros(r0.len()),
            };
            w[k] = u[k];
            jac.set_column(k, &col);
        }
        Ok(jac)
    }

    // Largest cosine between a free column of J and the residual vector.
    fn gradient_measure(&self, u: &[f64], jac: &DMatrix<f64>, g: &DVector<f64>, r: &DVector<f64>) -> f64 {
        let rn = r.norm();
        if rn == 0.0 {
            return 0.0;
        }
        let mut worst: f64 = 0.0;
        for k in 0..u.len() {
            let pinned = (u[k] <= self.lo(k) && g[k] > 0.0) || (u[k] >= self.hi(k) && g[k] < 0.0);
            let cn = jac.column(k).norm();
            if pinned || cn == 0.0 {
                continue;
            }
            worst = worst.max(g[k].abs() / (cn * rn));
        }
        worst
    }
}

pub fn minimize(problem: &Problem, opts: &LmOptions) -> Result<LmSolution> {
    let n = problem.x0.len();
    if problem.scale.len() != n || problem.lower.len() != n || problem.upper.len() != n {
        return Err(Error::InvalidParameter("parameter vectors differ in length".into()));
    }
    if problem.scale.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
        return Err(Error::InvalidParameter("parameter scales must be positive".into()));
    }
    let sp = Scaled { p: problem };
    let mut u: Vec<f64> = problem.x0.iter().zip(&problem.scale).map(|(x, s)| x / s).collect();
    sp.clamp(&mut u);
    let mut r = sp.eval(&u)?;
    if r.len() < n {
        return Err(Error::DegenerateData(format!("{} residuals for {n} parameters", r.len())));
    }
    let mut cost = r.norm_squared();
    let mut history = vec![cost];
    let mut lambda = 1e-3;
    let mut converged = false;
    let mut iterations = 0;
    let mut jac = sp.jacobian(&u, &r)?;

    while iterations < opts.max_iter {
        iterations += 1;
        let g = jac.transpose() * &r;
        if cost == 0.0 || sp.gradient_measure(&u, &jac, &g, &r) < opts.gtol {
            converged = true;
            break;
        }
        let a = jac.transpose() * &jac;
        let mut accepted = false;
        let mut stalled = false;
        while !accepted {
            let mut m = a.clone();
            for k in 0..n {
                m[(k, k)] += lambda * a[(k, k)].max(1e-12);
            }
            let Some(step) = m.clone().cholesky().map(|c| c.solve(&(-&g))).or_else(|| m.lu().solve(&(-&g))) else {
                lambda *= 4.0;
                if lambda > LAMBDA_MAX {
                    stalled = true;
                    break;
                }
                continue;
            };
            let mut trial: Vec<f64> = u.iter().zip(step.iter()).map(|(a, b)| a + b).collect();
            sp.clamp(&mut trial);
            let moved = trial.iter().zip(&u).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
            let size = u.iter().map(|v| v * v).sum::<f64>().sqrt();
            if moved <= 1e-15 * (1.0 + size) {
                stalled = true;
                break;
            }
            match sp.eval(&trial) {
                Ok(rt) if rt.norm_squared() < cost => {
                    let new_cost = rt.norm_squared();
                    let rel = (cost - new_cost) / cost;
                    u = trial;
                    r = rt;
                    cost = new_cost;
                    history.push(cost);
                    lambda = (lambda / 3.0).max(1e-12);
                    accepted = true;
                    if rel < opts.ftol {
                        converged = true;
                    }
                }
                _ => {
                    lambda *= 4.0;
                    if lambda > LAMBDA_MAX {
                        stalled = true;
                        break;
                    }
                }
            }
        }
        if stalled {
            // No representable step lowers the objective any further.
            converged = true;
            break;
        }
        jac = sp.jacobian(&u, &r)?;
        if converged {
            break;
        }
    }

    if !converged {
        return Err(Error::NoConvergence(iterations));
    }

    let m = r.len();
    let covariance = if m > n {
        let sigma2 = cost / (m - n) as f64;
        let a = jac.transpose() * &jac;
        let svd = a.clone().svd(false, false);
        let smax = svd.singular_values.max();
        let smin = svd.singular_values.min();
        if smax > 0.0 && smin > 1e-14 * smax {
            a.try_inverse().map(|inv| {
                let s = DMatrix::from_diagonal(&DVector::from_column_slice(&problem.scale));
                &s * inv * &s * sigma2
            })
        } else {
            None
        }
    } else {
        None
    };

    Ok(LmSolution {
        x: sp.unscale(&u),
        residuals: r.iter().copied().collect(),
        cost,
        iterations,
        converged,
        history,
        covariance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay() {
        let t: Vec<f64> = (0..50).map(|k| k as f64 * 0.1).collect();
        let y: Vec<f64> = t.iter().map(|t| 3.0 * (-1.7 * t).exp()).collect();
        let f = |p: &[f64]| -> Result<Vec<f64>> {
            Ok(t.iter().zip(&y).map(|(t, y)| p[0] * (-p[1] * t).exp() - y).collect())
        };
        let prob = Problem {
            x0: vec![1.0, 0.5],
            scale: vec![1.0, 1.0],
            lower: vec![0.0, 0.0],
            upper: vec![10.0, 10.0],
            residuals: &f,
        };
        let sol = minimize(&prob, &LmOptions::default()).unwrap();
        assert!((sol.x[0] - 3.0).abs() < 1e-7 && (sol.x[1] - 1.7).abs() < 1e-7);
        assert!(sol.history.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn respects_bounds() {
        let f = |p: &[f64]| -> Result<Vec<f64>> { Ok(vec![p[0] + 1.0, 0.5 * (p[0] + 1.0)]) };
        let prob = Problem {
            x0: vec![2.0],
            scale: vec![1.0],
            lower: vec![0.0],
            upper: vec![5.0],
            residuals: &f,
        };
        let sol = minimize(&prob, &LmOptions::default()).unwrap();
        assert_eq!(sol.x[0], 0.0);
    }

    #[test]
    fn iteration_cap() {
        let f = |p: &[f64]| -> Result<Vec<f64>> { Ok(vec![10.0 * (p[1] - p[0] * p[0]), 1.0 - p[0]]) };
        let prob = Problem {
            x0: vec![-1.2, 1.0],
            scale: vec![1.0, 1.0],
            lower: vec![-10.0, -10.0],
            upper: vec![10.0, 10.0],
            residuals: &f,
        };
        let opts = LmOptions { max_iter: 2, ..Default::default() };
        assert!(matches!(minimize(&prob, &opts), Err(Error::NoConvergence(2))));
        let sol = minimize(&prob, &LmOptions::default()).unwrap();
        assert!((sol.x[0] - 1.0).abs() < 1e-6);
    }
}
