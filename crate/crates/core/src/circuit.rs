//! Equivalent-circuit reflection of a tunable reflecting element and the
//! least-squares fit of the amplitude/phase law to it.

use std::f64::consts::PI;

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::ris::RisParams;
use crate::{Error, Result, C64};

/// Number of capacitance samples used by default when fitting.
pub const FIT_SAMPLES: usize = 512;

/// Smallest attained phase span accepted by the fit (radians).
const MIN_PHASE_SPAN: f64 = 0.1;

/// Bottom-layer inductance, top-layer inductance, tunable capacitance and
/// loss resistance of one element, with the carrier frequency.
///
/// The capacitance range of [`CircuitParams::reference`] is a fixture choice
/// that spans the resonance of the reference inductances; it is not a
/// measured device range.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CircuitParams {
    /// Henry.
    pub l1: f64,
    /// Henry.
    pub l2: f64,
    /// Hertz.
    pub freq: f64,
    /// Ohm.
    pub resistance: f64,
    /// Ohm.
    #[serde(default = "free_space_impedance")]
    pub z0: f64,
    /// Farad.
    pub c_min: f64,
    /// Farad.
    pub c_max: f64,
}

fn free_space_impedance() -> f64 {
    377.0
}

impl CircuitParams {
    /// L1 = 2.5 nH, L2 = 0.7 nH, f = 2.5 GHz, Z0 = 377 ohm, C in [0.47, 2.35] pF.
    pub fn reference(resistance: f64) -> Self {
        Self {
            l1: 2.5e-9,
            l2: 0.7e-9,
            freq: 2.5e9,
            resistance,
            z0: free_space_impedance(),
            c_min: 0.47e-12,
            c_max: 2.35e-12,
        }
    }

    pub fn with_resistance(self, resistance: f64) -> Self {
        Self { resistance, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [("l1", self.l1), ("l2", self.l2), ("freq", self.freq), ("z0", self.z0)];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.resistance.is_finite() && self.resistance >= 0.0) {
            return Err(Error::Config(format!(
                "resistance must be non-negative, got {}",
                self.resistance
            )));
        }
        if !(self.c_min > 0.0 && self.c_min < self.c_max && self.c_max.is_finite()) {
            return Err(Error::Config(format!(
                "capacitance range [{}, {}] is invalid",
                self.c_min, self.c_max
            )));
        }
        Ok(())
    }

    /// Element impedance at capacitance `c`.
    pub fn impedance(&self, c: f64) -> C64 {
        let w = 2.0 * PI * self.freq;
        let outer = C64::new(0.0, w * self.l1);
        let series = C64::new(self.resistance, w * self.l2) + 1.0 / C64::new(0.0, w * c);
        outer * series / (outer + series)
    }
}

/// Reflection coefficient `(Z - Z0) / (Z + Z0)` at capacitance `c`.
pub fn circuit_reflection(c: f64, cp: &CircuitParams) -> Result<C64> {
    if !(c >= cp.c_min && c <= cp.c_max) {
        return Err(Error::Domain(format!(
            "capacitance {c} outside [{}, {}]",
            cp.c_min, cp.c_max
        )));
    }
    let z = cp.impedance(c);
    let den = z + cp.z0;
    if !z.is_finite() || den.norm() < f64::MIN_POSITIVE.sqrt() {
        return Err(Error::Numeric(format!(
            "impedance denominator vanishes at C = {c}"
        )));
    }
    Ok((z - cp.z0) / den)
}

/// Outcome of fitting the amplitude/phase law to a circuit sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct RisFit {
    pub params: RisParams,
    /// Root-mean-square amplitude residual over the sweep.
    pub rms_error: f64,
    pub iterations: usize,
    /// Sampled `(phase, amplitude)` pairs in sweep order.
    pub samples: Vec<(f64, f64)>,
}

/// Log-spaced capacitance sweep over the circuit's tuning range.
pub fn sweep(cp: &CircuitParams, n: usize) -> Result<Vec<(f64, f64)>> {
    cp.validate()?;
    let (lo, hi) = (cp.c_min.ln(), cp.c_max.ln());
    (0..n)
        .map(|k| {
            let t = k as f64 / (n - 1).max(1) as f64;
            let c = (lo + t * (hi - lo)).exp().clamp(cp.c_min, cp.c_max);
            circuit_reflection(c, cp).map(|g| (g.arg(), g.norm()))
        })
        .collect()
}

/// Fits `beta_min`, `alpha` and `theta_tilde` by damped Gauss-Newton; the
/// phase bounds are the extremes attained by the sweep.
pub fn fit_ris_params(cp: &CircuitParams, n_samples: usize) -> Result<RisFit> {
    if n_samples < 16 {
        return Err(Error::Config(format!("need at least 16 samples, got {n_samples}")));
    }
    let samples = sweep(cp, n_samples)?;
    let theta_min = samples.iter().map(|s| s.0).fold(f64::INFINITY, f64::min);
    let theta_max = samples.iter().map(|s| s.0).fold(f64::NEG_INFINITY, f64::max);
    if theta_max - theta_min < MIN_PHASE_SPAN {
        return Err(Error::Fit(format!(
            "attained phase span {} rad is degenerate",
            theta_max - theta_min
        )));
    }
    if !(theta_min > -PI && theta_max < PI) {
        return Err(Error::Fit("sweep reaches the phase wrap at +-pi".into()));
    }

    let (arg_min, b_min) = samples
        .iter()
        .copied()
        .fold((0.0, f64::INFINITY), |acc, s| if s.1 < acc.1 { s } else { acc });
    let start = Vector3::new(b_min.min(1.0), 1.0, arg_min + PI / 2.0);
    let (x, iterations) = levenberg_marquardt(&samples, start)?;
    let params = RisParams {
        beta_min: x[0],
        alpha: x[1],
        theta_tilde: x[2],
        theta_min,
        theta_max,
        resistance: cp.resistance,
    };
    let rms_error = (cost(&samples, &x) * 2.0 / samples.len() as f64).sqrt();
    Ok(RisFit {
        params,
        rms_error,
        iterations,
        samples,
    })
}

fn model(theta: f64, x: &Vector3<f64>) -> f64 {
    let base = ((theta - x[2]).sin() + 1.0) / 2.0;
    (1.0 - x[0]) * base.powf(x[1]) + x[0]
}

/// Half the sum of squared residuals.
fn cost(samples: &[(f64, f64)], x: &Vector3<f64>) -> f64 {
    0.5 * samples
        .iter()
        .map(|&(t, b)| (model(t, x) - b).powi(2))
        .sum::<f64>()
}

fn clamp_params(x: Vector3<f64>) -> Vector3<f64> {
    Vector3::new(x[0].clamp(0.0, 1.0), x[1].clamp(1e-3, 50.0), x[2])
}

fn normal_equations(samples: &[(f64, f64)], x: &Vector3<f64>) -> (Matrix3<f64>, Vector3<f64>) {
    let mut jtj = Matrix3::zeros();
    let mut jtr = Vector3::zeros();
    for &(t, b) in samples {
        let s = (t - x[2]).sin();
        let base = (s + 1.0) / 2.0;
        let pow = base.powf(x[1]);
        let r = (1.0 - x[0]) * pow + x[0] - b;
        let d_alpha = if base > 0.0 { (1.0 - x[0]) * pow * base.ln() } else { 0.0 };
        let d_tilde = if base > 0.0 {
            -(1.0 - x[0]) * x[1] * base.powf(x[1] - 1.0) * (t - x[2]).cos() / 2.0
        } else {
            0.0
        };
        let j = Vector3::new(1.0 - pow, d_alpha, d_tilde);
        jtj += j * j.transpose();
        jtr += j * r;
    }
    (jtj, jtr)
}

fn levenberg_marquardt(samples: &[(f64, f64)], start: Vector3<f64>) -> Result<(Vector3<f64>, usize)> {
    const MAX_ITER: usize = 500;
    let mut x = clamp_params(start);
    let mut f = cost(samples, &x);
    let mut lambda = 1e-3;
    let scale = samples.len() as f64;
    for it in 0..MAX_ITER {
        if f <= 1e-28 * scale {
            return Ok((x, it));
        }
        let (jtj, jtr) = normal_equations(samples, &x);
        let mut damped = jtj;
        for k in 0..3 {
            damped[(k, k)] += lambda * jtj[(k, k)].max(1e-12);
        }
        let Some(step) = damped.lu().solve(&(-jtr)) else {
            lambda *= 10.0;
            continue;
        };
        let candidate = clamp_params(x + step);
        let fc = cost(samples, &candidate);
        if !fc.is_finite() {
            lambda *= 10.0;
        } else if fc < f {
            let gain = f - fc;
            x = candidate;
            f = fc;
            lambda = (lambda / 3.0).max(1e-12);
            if gain <= 1e-14 * f.max(1e-300) || step.norm() < 1e-13 {
                return Ok((x, it + 1));
            }
        } else {
            lambda *= 4.0;
            if (candidate - x).norm() < 1e-13 {
                // no admissible step reduces the cost: stationary at a bound
                return Ok((x, it + 1));
            }
        }
        if lambda > 1e16 {
            return Ok((x, it + 1));
        }
    }
    Err(Error::Fit(format!(
        "least squares did not converge in {MAX_ITER} iterations (cost {f:e})"
    )))
}
