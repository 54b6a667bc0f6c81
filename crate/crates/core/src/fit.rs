//! Nonlinear least-squares fits for the experiment analyses.
//!
//! Small dense Levenberg–Marquardt with forward-difference Jacobians.
//! Initialisation is documented per model: a log-linear seed for the
//! exponential, and a quadrature (single-bin discrete Fourier projection)
//! seed for the oscillatory models.

use nalgebra::{DMatrix, DVector};

use crate::error::{QdError, Result};

/// Parameter estimates with standard errors and the residual norm.
#[derive(Debug, Clone)]
pub struct FitResult {
    pub names: Vec<&'static str>,
    pub values: Vec<f64>,
    pub stderr: Vec<f64>,
    pub residual_norm: f64,
}

impl FitResult {
    pub fn get(&self, name: &str) -> Option<f64> {
        self.names.iter().position(|n| *n == name).map(|i| self.values[i])
    }

    pub fn stderr_of(&self, name: &str) -> Option<f64> {
        self.names.iter().position(|n| *n == name).map(|i| self.stderr[i])
    }
}

/// A·e^(−t/τ). Seeded by linear regression of ln y on t over the positive
/// samples. Rejects data that do not decay (τ seed far beyond the span).
pub fn fit_exponential(times: &[f64], values: &[f64]) -> Result<FitResult> {
    if times.len() != values.len() {
        return Err(QdError::DimensionMismatch(format!(
            "{} times vs {} values",
            times.len(),
            values.len()
        )));
    }
    if times.len() < 3 {
        return Err(QdError::InvalidInput("exponential fit needs at least 3 points".into()));
    }
    let span = times[times.len() - 1] - times[0];
    if !(span > 0.0) {
        return Err(QdError::InvalidInput("times must span a positive interval".into()));
    }

    // log-linear seed over positive samples
    let pts: Vec<(f64, f64)> = times
        .iter()
        .zip(values.iter())
        .filter(|(_, &y)| y > 0.0)
        .map(|(&t, &y)| (t, y.ln()))
        .collect();
    if pts.len() < 3 {
        return Err(QdError::DegenerateFit("fewer than 3 positive samples".into()));
    }
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    let denom = n * sxx - sx * sx;
    if denom.abs() < 1e-30 {
        return Err(QdError::DegenerateFit("times are collinear".into()));
    }
    let slope = (n * sxy - sx * sy) / denom;
    let intercept = (sy - slope * sx) / n;
    if slope >= -1e-3 / span {
        return Err(QdError::DegenerateFit(format!(
            "data do not decay (log-linear slope {slope:.3e} 1/ns)"
        )));
    }
    let seed = vec![intercept.exp(), -1.0 / slope];

    let fit = levenberg_marquardt(
        times,
        values,
        &seed,
        |p, t| p[0] * (-t / p[1]).exp(),
        200,
    )?;
    if fit.values[1] > span * 1e3 {
        return Err(QdError::DegenerateFit(format!(
            "fitted decay time {} ns vastly exceeds the {} ns window",
            fit.values[1], span
        )));
    }
    Ok(FitResult { names: vec!["amplitude", "tau"], ..fit })
}

/// Exact solution of y = a0 + a1·cos x + a2·sin x by normal equations.
/// Returns the coefficients, their covariance (already scaled by the residual
/// variance) and the residual sum of squares.
pub(crate) fn cosine_lsq(
    points: &[(f64, f64)],
) -> Result<([f64; 3], nalgebra::Matrix3<f64>, f64)> {
    let mut distinct: Vec<f64> = Vec::new();
    for &(x, _) in points {
        if !distinct.iter().any(|&p| (p - x).abs() < 1e-12) {
            distinct.push(x);
        }
    }
    if distinct.len() < 4 {
        return Err(QdError::InvalidInput(format!(
            "need at least 4 distinct phases, got {}",
            distinct.len()
        )));
    }
    let mut xtx = nalgebra::Matrix3::zeros();
    let mut xty = nalgebra::Vector3::zeros();
    for &(x, y) in points {
        let row = nalgebra::Vector3::new(1.0, x.cos(), x.sin());
        xtx += row * row.transpose();
        xty += row * y;
    }
    let inv = xtx
        .try_inverse()
        .ok_or_else(|| QdError::DegenerateFit("singular normal equations".into()))?;
    let coef = inv * xty;
    let mut ssr = 0.0;
    for &(x, y) in points {
        let model = coef[0] + coef[1] * x.cos() + coef[2] * x.sin();
        ssr += (y - model) * (y - model);
    }
    let dof = (points.len() as f64 - 3.0).max(1.0);
    let cov = inv * (ssr / dof);
    Ok(([coef[0], coef[1], coef[2]], cov, ssr))
}

/// A + B·cos(x + φ₀) over points (x, y). The model is linear in
/// (A, B·cosφ₀, −B·sinφ₀); the quadrature projections Σy·cos x and Σy·sin x
/// determine the fit exactly.
pub fn fit_sinusoid(points: &[(f64, f64)]) -> Result<FitResult> {
    let ([a0, a1, a2], cov, ssr) = cosine_lsq(points)?;
    let b = a1.hypot(a2);
    let phi0 = (-a2).atan2(a1);
    // propagate to (A, B, phi0)
    let stderr_a = cov[(0, 0)].max(0.0).sqrt();
    let (stderr_b, stderr_phi) = if b > 1e-300 {
        let gb = [0.0, a1 / b, a2 / b];
        let gp = [0.0, a2 / (b * b), -a1 / (b * b)];
        let quad = |g: [f64; 3]| -> f64 {
            let mut v = 0.0;
            for i in 0..3 {
                for j in 0..3 {
                    v += g[i] * cov[(i, j)] * g[j];
                }
            }
            v.max(0.0).sqrt()
        };
        (quad(gb), quad(gp))
    } else {
        (cov[(1, 1)].max(cov[(2, 2)]).max(0.0).sqrt(), f64::NAN)
    };
    Ok(FitResult {
        names: vec!["A", "B", "phi0"],
        values: vec![a0, b, phi0],
        stderr: vec![stderr_a, stderr_b, stderr_phi],
        residual_norm: ssr.sqrt(),
    })
}

/// (A + B·cos(ωt + φ)·e^(−t/τ_r))·e^(−t/τ_p), the spin-pumping trace with
/// visible Rabi oscillations. ω is seeded by scanning the quadrature power
/// |Σ y(t)e^{iωt}| over a candidate grid; the envelope rates are seeded from
/// the exponential fit of the mean level.
pub fn fit_damped_oscillation(times: &[f64], values: &[f64]) -> Result<FitResult> {
    if times.len() != values.len() {
        return Err(QdError::DimensionMismatch(format!(
            "{} times vs {} values",
            times.len(),
            values.len()
        )));
    }
    if times.len() < 8 {
        return Err(QdError::InvalidInput("damped-oscillation fit needs at least 8 points".into()));
    }
    let span = times[times.len() - 1] - times[0];
    let mean = values.iter().sum::<f64>() / values.len() as f64;

    // quadrature scan for the oscillation frequency
    let dt_min = times.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
    let w_lo = 2.0 * std::f64::consts::PI / span;
    let w_hi = std::f64::consts::PI / dt_min;
    let mut best_w = w_lo;
    let mut best_pow = 0.0;
    let n_scan = 400;
    for k in 0..n_scan {
        let w = w_lo * (w_hi / w_lo).powf(k as f64 / (n_scan - 1) as f64);
        let (mut re, mut im) = (0.0, 0.0);
        for (&t, &y) in times.iter().zip(values.iter()) {
            let d = y - mean;
            re += d * (w * t).cos();
            im += d * (w * t).sin();
        }
        let pow = re * re + im * im;
        if pow > best_pow {
            best_pow = pow;
            best_w = w;
        }
    }

    let amp0 = (values.iter().map(|y| (y - mean) * (y - mean)).sum::<f64>()
        / values.len() as f64)
        .sqrt()
        * std::f64::consts::SQRT_2;
    let seed = vec![mean, amp0, best_w, 0.0, span, span * 2.0];
    let fit = levenberg_marquardt(
        times,
        values,
        &seed,
        |p, t| (p[0] + p[1] * (p[2] * t + p[3]).cos() * (-t / p[4]).exp()) * (-t / p[5]).exp(),
        400,
    )?;
    Ok(FitResult {
        names: vec!["baseline", "osc_amplitude", "omega", "phi", "tau_rabi", "tau_pump"],
        ..fit
    })
}

/// Dense LM with numerical Jacobian. `model(p, t)` evaluates the model at one
/// abscissa.
pub fn levenberg_marquardt(
    xs: &[f64],
    ys: &[f64],
    seed: &[f64],
    model: impl Fn(&[f64], f64) -> f64,
    max_iter: usize,
) -> Result<FitResult> {
    let n = xs.len();
    let m = seed.len();
    if n <= m {
        return Err(QdError::InvalidInput(format!(
            "{n} points cannot determine {m} parameters"
        )));
    }
    let mut p = seed.to_vec();
    let residuals = |p: &[f64]| -> DVector<f64> {
        DVector::from_iterator(n, xs.iter().zip(ys.iter()).map(|(&x, &y)| model(p, x) - y))
    };
    let mut r = residuals(&p);
    let mut chi2 = r.norm_squared();
    let mut lambda = 1e-3;
    let mut converged = false;

    for _ in 0..max_iter {
        // forward-difference Jacobian
        let mut jac = DMatrix::zeros(n, m);
        for j in 0..m {
            let h = 1e-7 * p[j].abs().max(1e-9);
            let mut pj = p.clone();
            pj[j] += h;
            let rj = residuals(&pj);
            for i in 0..n {
                jac[(i, j)] = (rj[i] - r[i]) / h;
            }
        }
        let jt = jac.transpose();
        let jtj = &jt * &jac;
        let g = &jt * &r;
        if g.amax() < 1e-14 {
            converged = true;
            break;
        }

        let mut accepted = false;
        for _ in 0..25 {
            let mut a = jtj.clone();
            for j in 0..m {
                a[(j, j)] += lambda * jtj[(j, j)].max(1e-12);
            }
            let step = match a.clone().lu().solve(&g) {
                Some(s) => s,
                None => {
                    lambda *= 10.0;
                    continue;
                }
            };
            let trial: Vec<f64> = (0..m).map(|j| p[j] - step[j]).collect();
            let rt = residuals(&trial);
            let chi2_t = rt.norm_squared();
            if chi2_t.is_finite() && chi2_t < chi2 {
                let improvement = (chi2 - chi2_t) / chi2.max(1e-300);
                p = trial;
                r = rt;
                chi2 = chi2_t;
                lambda = (lambda * 0.3).max(1e-12);
                accepted = true;
                if improvement < 1e-12 {
                    converged = true;
                }
                break;
            }
            lambda *= 10.0;
            if lambda > 1e12 {
                break;
            }
        }
        if !accepted {
            // cannot improve further: treat the current point as the optimum
            converged = true;
        }
        if converged {
            break;
        }
    }
    if !converged {
        return Err(QdError::FitNonConvergence(format!(
            "no convergence after {max_iter} iterations (chi2 = {chi2:.3e})"
        )));
    }

    // covariance from the final Jacobian
    let mut jac = DMatrix::zeros(n, m);
    for j in 0..m {
        let h = 1e-7 * p[j].abs().max(1e-9);
        let mut pj = p.clone();
        pj[j] += h;
        let rj = residuals(&pj);
        for i in 0..n {
            jac[(i, j)] = (rj[i] - r[i]) / h;
        }
    }
    let jtj = jac.transpose() * &jac;
    let dof = (n - m).max(1) as f64;
    let s2 = chi2 / dof;
    let stderr = match jtj.try_inverse() {
        Some(cov) => (0..m).map(|j| (cov[(j, j)] * s2).max(0.0).sqrt()).collect(),
        None => vec![f64::NAN; m],
    };

    Ok(FitResult { names: vec![""; m], values: p, stderr, residual_norm: chi2.sqrt() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn exponential_recovers_synthetic_decay() {
        // noiseless tau = 6.71 ns (the slow spin-pumping scale)
        let times: Vec<f64> = (0..200).map(|i| i as f64 * 0.1).collect();
        let values: Vec<f64> = times.iter().map(|t| 2.0 * (-t / 6.71).exp()).collect();
        let fit = fit_exponential(&times, &values).unwrap();
        assert_relative_eq!(fit.get("tau").unwrap(), 6.71, epsilon = 1e-6);
        assert_relative_eq!(fit.get("amplitude").unwrap(), 2.0, epsilon = 1e-6);
    }

    #[test]
    fn constant_series_rejected() {
        let times: Vec<f64> = (0..50).map(|i| i as f64 * 0.1).collect();
        let values = vec![1.0; 50];
        assert!(matches!(fit_exponential(&times, &values), Err(QdError::DegenerateFit(_))));
    }

    #[test]
    fn sinusoid_recovers_amplitude_ratio() {
        // paper-anchored synthetic value: 1 + 0.677 cos(phi)
        let pts: Vec<(f64, f64)> =
            (0..16).map(|k| k as f64 * PI / 8.0).map(|p| (p, 1.0 + 0.677 * p.cos())).collect();
        let fit = fit_sinusoid(&pts).unwrap();
        let a = fit.get("A").unwrap();
        let b = fit.get("B").unwrap();
        assert_relative_eq!(b / a, 0.677, epsilon = 1e-9);
    }

    #[test]
    fn damped_oscillation_recovers_frequency() {
        let omega = 3.0;
        let times: Vec<f64> = (0..600).map(|i| i as f64 * 0.02).collect();
        let values: Vec<f64> = times
            .iter()
            .map(|&t| (0.5 - 0.5 * (omega * t).cos() * (-t / 6.0).exp()) * (-t / 15.0).exp())
            .collect();
        let fit = fit_damped_oscillation(&times, &values).unwrap();
        let w = fit.get("omega").unwrap().abs();
        assert!((w - omega).abs() / omega < 0.01, "omega fit {w} vs {omega}");
        let tau_p = fit.get("tau_pump").unwrap();
        assert!((tau_p - 15.0).abs() / 15.0 < 0.02, "tau_pump {tau_p}");
    }
}
