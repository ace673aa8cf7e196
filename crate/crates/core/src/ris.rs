//! Lossy RIS element model: amplitude/phase law, its derivative and the
//! bounded-angle projection.

use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::{CVec, Error, Result, C64};

/// Constants of the amplitude/phase law of a reflecting element.
///
/// `resistance` records which circuit resistance the constants were fitted
/// for; it does not enter any formula.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RisParams {
    pub beta_min: f64,
    pub alpha: f64,
    pub theta_tilde: f64,
    pub theta_min: f64,
    pub theta_max: f64,
    pub resistance: f64,
}

impl RisParams {
    /// Unit-amplitude element over the given phase range.
    pub fn lossless(theta_min: f64, theta_max: f64) -> Self {
        Self {
            beta_min: 1.0,
            alpha: 1.0,
            theta_tilde: 0.0,
            theta_min,
            theta_max,
            resistance: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let all = [
            self.beta_min,
            self.alpha,
            self.theta_tilde,
            self.theta_min,
            self.theta_max,
            self.resistance,
        ];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::Config("RIS parameters must be finite".into()));
        }
        if !(0.0..=1.0).contains(&self.beta_min) {
            return Err(Error::Config(format!("beta_min {} outside [0, 1]", self.beta_min)));
        }
        if self.alpha <= 0.0 {
            return Err(Error::Config(format!("alpha {} must be positive", self.alpha)));
        }
        if !(self.theta_min > -PI && self.theta_max < PI && self.theta_min < self.theta_max) {
            return Err(Error::Config(format!(
                "phase range [{}, {}] must satisfy -pi < min < max < pi",
                self.theta_min, self.theta_max
            )));
        }
        if self.resistance < 0.0 {
            return Err(Error::Config("resistance must be non-negative".into()));
        }
        Ok(())
    }

    #[inline]
    pub fn contains(&self, theta: f64) -> bool {
        theta >= self.theta_min && theta <= self.theta_max
    }

    pub fn phase_span(&self) -> f64 {
        self.theta_max - self.theta_min
    }

    fn check(&self, theta: f64) -> Result<()> {
        if self.contains(theta) {
            Ok(())
        } else {
            Err(Error::Domain(format!(
                "phase {theta} outside [{}, {}]",
                self.theta_min, self.theta_max
            )))
        }
    }

    /// Maps `u` in `[0, 1]` affinely onto the phase range.
    pub fn phase_at_fraction(&self, u: f64) -> f64 {
        (self.theta_min + u * self.phase_span()).clamp(self.theta_min, self.theta_max)
    }

    /// Draws `m` phases uniformly over the feasible range.
    pub fn uniform_phases<R: Rng + ?Sized>(&self, m: usize, rng: &mut R) -> Vec<f64> {
        (0..m).map(|_| self.phase_at_fraction(rng.random::<f64>())).collect()
    }
}

/// Reflection amplitude as a function of phase.
pub fn amplitude_of_phase(theta: f64, p: &RisParams) -> Result<f64> {
    p.check(theta)?;
    Ok(amplitude_unchecked(theta, p))
}

#[inline]
fn amplitude_unchecked(theta: f64, p: &RisParams) -> f64 {
    let base = ((theta - p.theta_tilde).sin() + 1.0) / 2.0;
    ((1.0 - p.beta_min) * base.powf(p.alpha) + p.beta_min).clamp(p.beta_min, 1.0)
}

/// Reflection coefficients `beta(theta) e^{i theta}` and their derivatives with
/// respect to each phase.
pub fn reflection_and_derivative(theta: &[f64], p: &RisParams) -> Result<(CVec, CVec)> {
    let mut phi = CVec::zeros(theta.len());
    let mut dphi = CVec::zeros(theta.len());
    for (m, &th) in theta.iter().enumerate() {
        p.check(th)?;
        let beta = amplitude_unchecked(th, p);
        let rot = C64::from_polar(1.0, th);
        let coef = (1.0 - p.beta_min) * p.alpha / 2f64.powf(p.alpha);
        // (1 - beta_min) = 0 makes the amplitude constant whatever alpha is.
        let slope = if coef == 0.0 {
            0.0
        } else {
            let s = (th - p.theta_tilde).sin() + 1.0;
            coef * s.powf(p.alpha - 1.0) * (th - p.theta_tilde).cos()
        };
        phi[m] = rot * beta;
        dphi[m] = rot * slope + C64::i() * rot * beta;
    }
    Ok((phi, dphi))
}

/// Projects one unconstrained phase onto `[theta_min, theta_max]`.
pub fn project_angle(theta_hat: f64, p: &RisParams) -> f64 {
    if p.contains(theta_hat) {
        return theta_hat;
    }
    let wrapped = (theta_hat + PI).rem_euclid(2.0 * PI) - PI;
    if p.contains(wrapped) {
        return wrapped;
    }
    let lifted = if wrapped >= 0.0 { wrapped } else { wrapped + 2.0 * PI };
    let center = ((p.theta_min + 2.0 * PI) + p.theta_max) / 2.0;
    if lifted >= center {
        p.theta_min
    } else {
        p.theta_max
    }
}

pub fn project_theta(theta_hat: &[f64], p: &RisParams) -> Vec<f64> {
    theta_hat.iter().map(|&t| project_angle(t, p)).collect()
}

/// Feasible phase vector with its derived amplitudes, reflection coefficients
/// and phase derivatives.
#[derive(Debug, Clone, PartialEq)]
pub struct RisState {
    pub theta: Vec<f64>,
    pub beta: Vec<f64>,
    pub phi: CVec,
    pub dphi: CVec,
}

impl RisState {
    pub fn new(theta: Vec<f64>, p: &RisParams) -> Result<Self> {
        let (phi, dphi) = reflection_and_derivative(&theta, p)?;
        let beta = theta.iter().map(|&t| amplitude_unchecked(t, p)).collect();
        Ok(Self {
            theta,
            beta,
            phi,
            dphi,
        })
    }

    pub fn len(&self) -> usize {
        self.theta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.theta.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(beta_min: f64, alpha: f64, theta_tilde: f64) -> RisParams {
        RisParams {
            beta_min,
            alpha,
            theta_tilde,
            theta_min: -3.0,
            theta_max: 3.0,
            resistance: 1.0,
        }
    }

    #[test]
    fn amplitude_extremes() {
        let p = params(0.3, 1.7, 0.4);
        let top = amplitude_of_phase(0.4 + PI / 2.0, &p).unwrap();
        let bottom = amplitude_of_phase(0.4 - PI / 2.0, &p).unwrap();
        assert!((top - 1.0).abs() < 1e-15);
        assert!((bottom - 0.3).abs() < 1e-15);
    }

    #[test]
    fn amplitude_reference_value() {
        // (1 - 0.2) * ((sin(pi/6) + 1) / 2)^1.6 + 0.2 = 0.8 * 0.75^1.6 + 0.2,
        // evaluated with 50-digit arithmetic.
        let p = params(0.2, 1.6, 0.0);
        let v = amplitude_of_phase(PI / 6.0, &p).unwrap();
        assert!((v - 0.704_879_815_450_789_8).abs() < 1e-15, "{v}");
    }

    #[test]
    fn amplitude_rejects_out_of_range() {
        let p = params(0.2, 1.6, 0.0);
        assert!(matches!(amplitude_of_phase(3.1, &p), Err(Error::Domain(_))));
        assert!(matches!(
            reflection_and_derivative(&[0.0, -3.05], &p),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn lossless_derivative_is_pure_rotation() {
        let p = RisParams::lossless(-2.9, 2.8);
        let theta = [-2.0, -0.3, 0.0, 1.1, 2.8];
        let (phi, dphi) = reflection_and_derivative(&theta, &p).unwrap();
        for (m, &t) in theta.iter().enumerate() {
            let expect = C64::i() * C64::from_polar(1.0, t);
            assert!((dphi[m] - expect).norm() < 1e-15);
            assert!((phi[m].norm() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn derivative_at_theta_tilde() {
        // sin = 0, cos = 1: amplitude slope is (1 - beta_min) alpha / 2^alpha.
        let p = params(0.25, 1.4, 0.5);
        let (_, dphi) = reflection_and_derivative(&[0.5], &p).unwrap();
        let slope = 0.75 * 1.4 / 2f64.powf(1.4);
        let beta = 0.75 * 0.5f64.powf(1.4) + 0.25;
        let rot = C64::from_polar(1.0, 0.5);
        let along = (dphi[0] * rot.conj()).re;
        let across = (dphi[0] * rot.conj()).im;
        assert!((along - slope).abs() < 1e-14);
        assert!((across - beta).abs() < 1e-14);
    }

    #[test]
    fn projection_cases() {
        let p = RisParams {
            theta_min: -2.0,
            theta_max: 2.0,
            ..params(0.2, 1.0, 0.0)
        };
        assert_eq!(project_angle(1.5, &p), 1.5);
        assert_eq!(project_angle(2.5, &p), 2.0);
        assert_eq!(project_angle(-2.5, &p), -2.0);
        // wrapping brings 2pi + 1 back into range
        let w = project_angle(2.0 * PI + 1.0, &p);
        assert!((w - 1.0).abs() < 1e-12);
        // the tie at the centre goes to the lower bound
        assert_eq!(project_angle(PI, &p), -2.0);
    }

    #[test]
    fn state_invariants() {
        let p = params(0.4, 2.0, -0.7);
        let s = RisState::new(vec![-1.0, 0.0, 2.5], &p).unwrap();
        for m in 0..3 {
            assert!(s.beta[m] >= 0.4 && s.beta[m] <= 1.0);
            assert!((s.phi[m].norm() - s.beta[m]).abs() < 1e-15);
            assert!(s.phi[m].norm() <= 1.0);
        }
    }
}
