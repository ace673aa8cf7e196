//! Achievable rates, the secrecy objective, the channel power difference and
//! their analytic gradients.
//!
//! Gradients with respect to the precoder follow the conjugate-cogradient
//! convention: for a real objective `f(T)` the returned matrix is
//! `df/dT* = (df/dRe T + i df/dIm T) / 2`, which is the direction used by the
//! ascent update `T + step * df/dT*`.

use std::f64::consts::LN_2;
use std::ops::Deref;

use nalgebra::{Cholesky, Dyn};
use serde::{Deserialize, Serialize};

use crate::channel::{effective_channels, ChannelSet, SystemConfig};
use crate::linalg::{frob_sq, gram_plus_identity, hpd_factor, log2_det};
use crate::ris::RisState;
use crate::{CMat, CVec, Error, Result, C64};

/// Linear precoder `T` (`na x ns`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Precoder(#[serde(with = "crate::serde_cmat")] pub CMat);

impl Precoder {
    pub fn zeros(na: usize, ns: usize) -> Self {
        Self(CMat::zeros(na, ns))
    }

    /// `Tr(T T^H)`.
    pub fn power(&self) -> f64 {
        frob_sq(&self.0)
    }

    pub fn is_feasible(&self, budget: f64) -> bool {
        self.power() <= budget * (1.0 + 1e-9)
    }

    pub fn into_inner(self) -> CMat {
        self.0
    }
}

impl Deref for Precoder {
    type Target = CMat;
    fn deref(&self) -> &CMat {
        &self.0
    }
}

impl From<CMat> for Precoder {
    fn from(t: CMat) -> Self {
        Self(t)
    }
}

/// Rates in bits/s/Hz. `secrecy` is the raw difference and may be negative.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateBundle {
    pub rate_bob: f64,
    pub rate_eve: f64,
    pub secrecy: f64,
}

impl RateBundle {
    /// Secrecy rate clamped at zero, for reporting.
    pub fn reported(&self) -> f64 {
        self.secrecy.max(0.0)
    }
}

struct LinkTerms {
    /// `H T`
    ht: CMat,
    factor: Cholesky<C64, Dyn>,
}

impl LinkTerms {
    fn new(h: &CMat, t: &CMat, sigma2: f64) -> Result<Self> {
        if h.ncols() != t.nrows() {
            return Err(Error::Dimension(format!(
                "channel has {} columns, precoder {} rows",
                h.ncols(),
                t.nrows()
            )));
        }
        let ht = h * t;
        let factor = hpd_factor(gram_plus_identity(&ht, sigma2))?;
        Ok(Self { ht, factor })
    }

    fn rate(&self) -> f64 {
        log2_det(&self.factor).max(0.0)
    }

    /// `A^{-1} H T`
    fn whitened(&self) -> CMat {
        self.factor.solve(&self.ht)
    }
}

/// `log2 det(I + H T T^H H^H / sigma2)`.
pub fn rate(h_hat: &CMat, t: &Precoder, sigma2: f64) -> Result<f64> {
    if !(sigma2 > 0.0) {
        return Err(Error::Domain(format!("noise power {sigma2} must be positive")));
    }
    Ok(LinkTerms::new(h_hat, t, sigma2)?.rate())
}

/// Effective Alice-Bob and Alice-Eve channels at a fixed reflection vector.
/// Precoder-only quantities need nothing else, so solvers keep one of these
/// while only `T` moves.
#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveChannels {
    pub hb: CMat,
    pub he: CMat,
}

impl EffectiveChannels {
    pub fn new(ch: &ChannelSet, phi: &CVec) -> Result<Self> {
        let (hb, he) = effective_channels(ch, phi)?;
        Ok(Self { hb, he })
    }

    pub fn rates(&self, t: &CMat, cfg: &SystemConfig) -> Result<RateBundle> {
        let b = LinkTerms::new(&self.hb, t, cfg.sigma2_b)?.rate();
        let e = LinkTerms::new(&self.he, t, cfg.sigma2_e)?.rate();
        Ok(RateBundle {
            rate_bob: b,
            rate_eve: e,
            secrecy: b - e,
        })
    }

    pub fn grad_t(&self, t: &CMat, cfg: &SystemConfig) -> Result<CMat> {
        let b = LinkTerms::new(&self.hb, t, cfg.sigma2_b)?;
        let e = LinkTerms::new(&self.he, t, cfg.sigma2_e)?;
        let gb = self.hb.adjoint() * b.whitened() / C64::from(cfg.sigma2_b);
        let ge = self.he.adjoint() * e.whitened() / C64::from(cfg.sigma2_e);
        Ok((gb - ge) / C64::from(LN_2))
    }

    /// `Tr[T^H (Hb^H Hb / sb2 - He^H He / se2) T]`.
    pub fn power_diff(&self, t: &CMat, cfg: &SystemConfig) -> f64 {
        frob_sq(&(&self.hb * t)) / cfg.sigma2_b - frob_sq(&(&self.he * t)) / cfg.sigma2_e
    }

    /// `G = Hb^H Hb / sb2 - He^H He / se2`.
    pub fn gram_difference(&self, cfg: &SystemConfig) -> CMat {
        self.hb.adjoint() * &self.hb / C64::from(cfg.sigma2_b)
            - self.he.adjoint() * &self.he / C64::from(cfg.sigma2_e)
    }
}

pub fn secrecy_rate(
    ch: &ChannelSet,
    state: &RisState,
    t: &Precoder,
    cfg: &SystemConfig,
) -> Result<RateBundle> {
    EffectiveChannels::new(ch, &state.phi)?.rates(t, cfg)
}

/// Conjugate cogradient of the secrecy rate with respect to `T`.
pub fn grad_t(ch: &ChannelSet, state: &RisState, t: &Precoder, cfg: &SystemConfig) -> Result<CMat> {
    EffectiveChannels::new(ch, &state.phi)?.grad_t(t, cfg)
}

/// `scale * Re{ dphi o diag[H_ar (T kb^H / sb2) H_rb - H_ar (T ke^H / se2) H_re] }`.
///
/// With `kb = A_b^{-1} Hb T` this is the secrecy gradient (scale `2/ln 2`),
/// with `kb = Hb T` the power-difference gradient (scale 2). Only `na x m`
/// intermediates are formed, so the cost is linear in `m`.
pub(crate) fn theta_gradient_from_terms(
    ch: &ChannelSet,
    dphi: &CVec,
    t: &CMat,
    kb: &CMat,
    ke: &CMat,
    cfg: &SystemConfig,
    scale: f64,
) -> Vec<f64> {
    let wb = t * kb.adjoint() / C64::from(cfg.sigma2_b);
    let we = t * ke.adjoint() / C64::from(cfg.sigma2_e);
    let x = wb * &ch.h_rb - we * &ch.h_re;
    (0..ch.m())
        .map(|m| {
            let d: C64 = ch
                .h_ar
                .row(m)
                .iter()
                .zip(x.column(m).iter())
                .map(|(a, b)| a * b)
                .sum();
            scale * (dphi[m] * d).re
        })
        .collect()
}

fn check_state(ch: &ChannelSet, state: &RisState) -> Result<()> {
    if state.len() != ch.m() {
        return Err(Error::Dimension(format!(
            "state has {} phases, RIS has {}",
            state.len(),
            ch.m()
        )));
    }
    Ok(())
}

/// Gradient of the secrecy rate with respect to the phases.
pub fn grad_theta_secrecy(
    ch: &ChannelSet,
    state: &RisState,
    t: &Precoder,
    cfg: &SystemConfig,
) -> Result<Vec<f64>> {
    check_state(ch, state)?;
    let eff = EffectiveChannels::new(ch, &state.phi)?;
    let kb = LinkTerms::new(&eff.hb, t, cfg.sigma2_b)?.whitened();
    let ke = LinkTerms::new(&eff.he, t, cfg.sigma2_e)?.whitened();
    Ok(theta_gradient_from_terms(ch, &state.dphi, t, &kb, &ke, cfg, 2.0 / LN_2))
}

pub fn channel_power_diff(
    ch: &ChannelSet,
    state: &RisState,
    t: &Precoder,
    cfg: &SystemConfig,
) -> Result<f64> {
    let eff = EffectiveChannels::new(ch, &state.phi)?;
    if t.nrows() != ch.na() {
        return Err(Error::Dimension("precoder rows differ from transmit antennas".into()));
    }
    Ok(eff.power_diff(t, cfg))
}

/// Gradient of the channel power difference with respect to the phases.
pub fn grad_theta_pdiff(
    ch: &ChannelSet,
    state: &RisState,
    t: &Precoder,
    cfg: &SystemConfig,
) -> Result<Vec<f64>> {
    check_state(ch, state)?;
    let eff = EffectiveChannels::new(ch, &state.phi)?;
    if t.nrows() != ch.na() {
        return Err(Error::Dimension("precoder rows differ from transmit antennas".into()));
    }
    let kb = &eff.hb * &t.0;
    let ke = &eff.he * &t.0;
    Ok(theta_gradient_from_terms(ch, &state.dphi, t, &kb, &ke, cfg, 2.0))
}
