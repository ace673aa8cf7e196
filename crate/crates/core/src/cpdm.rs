//! Channel-power-difference surrogate: eigen precoder, phase ascent and the
//! check that the surrogate bounds the secrecy rate.

use std::f64::consts::LN_2;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::ascent::{self, Policy};
use crate::channel::{ChannelSet, SystemConfig};
use crate::linalg::hermitian_eigen;
use crate::pgm::{init_step_theta, Termination};
use crate::ris::{project_theta, RisParams, RisState};
use crate::secrecy::{grad_theta_pdiff, EffectiveChannels, Precoder, RateBundle};
use crate::{CMat, Error, Result, C64};

/// How the power budget is shared by the selected positive eigen-directions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PowerSplit {
    /// Proportional to the eigenvalues.
    #[default]
    Proportional,
    /// Everything on the strongest direction.
    TopMode,
    Equal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CpdmOptions {
    pub max_iter: usize,
    pub max_inner: usize,
    /// Tolerance on the change of the power difference.
    pub xi: f64,
    pub backtrack: f64,
    /// Largest first phase step; a quarter of the phase range when unset.
    pub theta_max_step: Option<f64>,
    pub split: PowerSplit,
    /// Extra rounds of re-solving the precoder at the new phases followed by
    /// another phase ascent.
    pub alternations: usize,
}

impl Default for CpdmOptions {
    fn default() -> Self {
        Self {
            max_iter: 500,
            max_inner: 30,
            xi: 1e-4,
            backtrack: 0.5,
            theta_max_step: None,
            split: PowerSplit::Proportional,
            alternations: 0,
        }
    }
}

impl CpdmOptions {
    pub fn validate(&self, p: &RisParams) -> Result<()> {
        if self.max_iter == 0 || self.max_inner == 0 {
            return Err(Error::Config("iteration limits must be at least 1".into()));
        }
        if !(self.xi >= 0.0) {
            return Err(Error::Config("xi must be non-negative".into()));
        }
        if !(self.backtrack > 0.0 && self.backtrack < 1.0) {
            return Err(Error::Config(format!("backtracking factor {} outside (0, 1)", self.backtrack)));
        }
        if let Some(s) = self.theta_max_step {
            if !(s > 0.0 && s <= p.phase_span() / 2.0) {
                return Err(Error::Config(format!("theta_max_step {s} outside (0, {}]", p.phase_span() / 2.0)));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenPrecoder {
    pub precoder: Precoder,
    /// Eigenvalues of `G`, decreasing.
    pub eigenvalues: Vec<f64>,
    /// Set when `G` has no positive eigenvalue; the precoder is then zero.
    pub no_positive_mode: bool,
}

/// Precoder maximizing `Tr(T^H G T)` over the eigen-directions of a Hermitian
/// `G`: columns are the leading eigenvectors with positive eigenvalue, scaled
/// per `split` so that the total power is `power`. Columns beyond the positive
/// modes are zero.
pub fn precoder_from_gram(g: &CMat, ns: usize, power: f64, split: PowerSplit) -> Result<EigenPrecoder> {
    if !g.is_square() {
        return Err(Error::Dimension("G must be square".into()));
    }
    let (vals, vecs) = hermitian_eigen(g);
    let n = g.nrows();
    let take = vals.iter().take(ns).filter(|v| **v > 0.0).count();
    let mut t = CMat::zeros(n, ns);
    if take == 0 {
        return Ok(EigenPrecoder {
            precoder: Precoder(t),
            eigenvalues: vals,
            no_positive_mode: true,
        });
    }
    let weights: Vec<f64> = match split {
        PowerSplit::Proportional => {
            let total: f64 = vals[..take].iter().sum();
            vals[..take].iter().map(|v| v / total).collect()
        }
        PowerSplit::TopMode => (0..take).map(|k| if k == 0 { 1.0 } else { 0.0 }).collect(),
        PowerSplit::Equal => vec![1.0 / take as f64; take],
    };
    for (k, w) in weights.iter().enumerate() {
        let scale = C64::from((w * power).sqrt());
        t.set_column(k, &(vecs.column(k) * scale));
    }
    Ok(EigenPrecoder {
        precoder: Precoder(t),
        eigenvalues: vals,
        no_positive_mode: false,
    })
}

/// Eigen precoder for the power-difference matrix at the current phases.
pub fn optimal_precoder_cpdm(
    ch: &ChannelSet,
    state: &RisState,
    cfg: &SystemConfig,
    split: PowerSplit,
) -> Result<EigenPrecoder> {
    let eff = EffectiveChannels::new(ch, &state.phi)?;
    precoder_from_gram(&eff.gram_difference(cfg), cfg.ns, cfg.power, split)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CpdmReport {
    /// Power difference before the first iteration and after each iteration
    /// of the final phase ascent.
    pub pdiff_trace: Vec<f64>,
    pub theta_sub: Vec<f64>,
    pub t_sub: Precoder,
    /// Eigenvalues of `G` at the final phases, decreasing.
    pub eigen_spectrum_of_g: Vec<f64>,
    pub termination: Termination,
    /// Seconds.
    pub wall_time: f64,
    pub iterations: usize,
    pub objective_evals: usize,
    /// Secrecy rate at the returned point.
    pub rates: RateBundle,
    pub no_positive_mode: bool,
    pub failure: Option<String>,
}

fn check_inputs(ch: &ChannelSet, params: &RisParams, cfg: &SystemConfig, opts: &CpdmOptions) -> Result<()> {
    cfg.validate()?;
    params.validate()?;
    opts.validate(params)?;
    ch.check_dims()?;
    if ch.m() != cfg.m || ch.na() != cfg.na {
        return Err(Error::Dimension("channel set does not match the system configuration".into()));
    }
    Ok(())
}

struct Ascent {
    trace: Vec<f64>,
    state: RisState,
    evals: usize,
    termination: Termination,
    failure: Option<String>,
}

fn ascend(
    ch: &ChannelSet,
    params: &RisParams,
    cfg: &SystemConfig,
    opts: &CpdmOptions,
    t: &Precoder,
    state: RisState,
) -> Result<Ascent> {
    let pdiff = |s: &RisState| -> Result<f64> { Ok(EffectiveChannels::new(ch, &s.phi)?.power_diff(t, cfg)) };
    let mut current = pdiff(&state)?;
    let mut a = Ascent {
        trace: vec![current],
        state,
        evals: 1,
        termination: Termination::MaxIter,
        failure: None,
    };
    let policy = Policy::Backtrack {
        c: opts.backtrack,
        max_inner: opts.max_inner,
        xi: opts.xi,
    };
    let max_step = opts.theta_max_step.unwrap_or(params.phase_span() / 4.0);
    let mut step: Option<f64> = None;
    for _ in 0..opts.max_iter {
        let res = (|| -> Result<bool> {
            let g = grad_theta_pdiff(ch, &a.state, t, cfg)?;
            if g.iter().all(|v| *v == 0.0) {
                return Ok(true);
            }
            let s0 = match step {
                Some(s) => s,
                None => init_step_theta(&g, max_step)?,
            };
            let theta = &a.state.theta;
            let out = ascent::step(current, s0, policy, |s| {
                let raw: Vec<f64> = theta.iter().zip(&g).map(|(th, gm)| th + s * gm).collect();
                let cand = RisState::new(project_theta(&raw, params), params)?;
                let v = pdiff(&cand)?;
                Ok((cand, v))
            })?;
            a.evals += out.evals;
            step = Some(out.step);
            let before = current;
            if let Some((cand, v)) = out.accepted {
                a.state = cand;
                current = v;
            }
            a.trace.push(current);
            Ok((current - before).abs() <= opts.xi)
        })();
        match res {
            Ok(true) => {
                a.termination = Termination::Converged;
                break;
            }
            Ok(false) => {}
            Err(e) => {
                a.failure = Some(e.to_string());
                break;
            }
        }
    }
    Ok(a)
}

/// Phase ascent on the power difference with the precoder held fixed.
pub fn solve_theta_cpdm(
    ch: &ChannelSet,
    params: &RisParams,
    cfg: &SystemConfig,
    opts: &CpdmOptions,
    t: &Precoder,
    theta_init: Vec<f64>,
) -> Result<CpdmReport> {
    check_inputs(ch, params, cfg, opts)?;
    if t.nrows() != cfg.na {
        return Err(Error::Dimension("precoder rows differ from transmit antennas".into()));
    }
    let start = Instant::now();
    let state = RisState::new(theta_init, params)?;
    let a = ascend(ch, params, cfg, opts, t, state)?;
    finish(ch, cfg, a, t.clone(), false, 0, start)
}

fn finish(
    ch: &ChannelSet,
    cfg: &SystemConfig,
    a: Ascent,
    t: Precoder,
    no_positive_mode: bool,
    extra_evals: usize,
    start: Instant,
) -> Result<CpdmReport> {
    let eff = EffectiveChannels::new(ch, &a.state.phi)?;
    let (eigen, _) = hermitian_eigen(&eff.gram_difference(cfg));
    let rates = eff.rates(&t, cfg)?;
    Ok(CpdmReport {
        iterations: a.trace.len() - 1,
        pdiff_trace: a.trace,
        theta_sub: a.state.theta,
        t_sub: t,
        eigen_spectrum_of_g: eigen,
        termination: a.termination,
        wall_time: start.elapsed().as_secs_f64(),
        objective_evals: a.evals + extra_evals,
        rates,
        no_positive_mode,
        failure: a.failure,
    })
}

/// Eigen precoder at `theta_init`, then the phase ascent; repeated
/// `opts.alternations` more times from the new phases.
pub fn solve_cpdm(
    ch: &ChannelSet,
    params: &RisParams,
    cfg: &SystemConfig,
    opts: &CpdmOptions,
    theta_init: Vec<f64>,
) -> Result<CpdmReport> {
    check_inputs(ch, params, cfg, opts)?;
    let start = Instant::now();
    let mut state = RisState::new(theta_init, params)?;
    let mut earlier_evals = 0;
    let mut pass = 0;
    loop {
        let ep = optimal_precoder_cpdm(ch, &state, cfg, opts.split)?;
        let a = ascend(ch, params, cfg, opts, &ep.precoder, state)?;
        if pass == opts.alternations || a.failure.is_some() {
            return finish(ch, cfg, a, ep.precoder, ep.no_positive_mode, earlier_evals, start);
        }
        earlier_evals += a.evals;
        state = a.state;
        pass += 1;
    }
}

/// Outcome of comparing the secrecy rate with the power-difference surrogate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurrogateCheck {
    /// `F_b - F_e` positive semidefinite up to the relative tolerance.
    pub is_psd: bool,
    pub csec: f64,
    pub pdiff_over_ln2: f64,
    /// `P_diff / ln 2 - C_sec`, bits/s/Hz.
    pub gap: f64,
    pub min_eigenvalue: f64,
    /// Largest eigenvalue over `F_b` and `F_e`.
    pub max_f_eigenvalue: f64,
    /// `0.5 (Tr F_b^2 + Tr F_e^2) / ln 2`.
    pub taylor_envelope: f64,
    /// `C_sec <= P_diff / ln 2`, checked only when `is_psd`.
    pub bound_holds: Option<bool>,
    /// `|gap| <= taylor_envelope`, checked only when every eigenvalue of
    /// `F_b` and `F_e` is at most [`TAYLOR_REGIME`].
    pub taylor_holds: Option<bool>,
}

pub const PSD_TOLERANCE: f64 = 1e-9;
pub const TAYLOR_REGIME: f64 = 0.1;

pub fn check_surrogate_bound(
    ch: &ChannelSet,
    state: &RisState,
    t: &Precoder,
    cfg: &SystemConfig,
) -> Result<SurrogateCheck> {
    let eff = EffectiveChannels::new(ch, &state.phi)?;
    let fb = {
        let x = &eff.hb * &t.0;
        x.adjoint() * x / C64::from(cfg.sigma2_b)
    };
    let fe = {
        let x = &eff.he * &t.0;
        x.adjoint() * x / C64::from(cfg.sigma2_e)
    };
    let (d, _) = hermitian_eigen(&(&fb - &fe));
    let scale = fb.norm().max(fe.norm());
    let min_eigenvalue = d.last().copied().unwrap_or(0.0);
    let is_psd = min_eigenvalue >= -PSD_TOLERANCE * scale;
    let rates = eff.rates(t, cfg)?;
    let pdiff = eff.power_diff(t, cfg);
    let pdiff_over_ln2 = pdiff / LN_2;
    let gap = pdiff_over_ln2 - rates.secrecy;
    let (eb, _) = hermitian_eigen(&fb);
    let (ee, _) = hermitian_eigen(&fe);
    let max_f_eigenvalue = eb.iter().chain(&ee).fold(0.0f64, |a, v| a.max(*v));
    let taylor_envelope =
        0.5 * (eb.iter().map(|v| v * v).sum::<f64>() + ee.iter().map(|v| v * v).sum::<f64>()) / LN_2;
    // both sides carry roundoff of order eps times the larger term
    let slack = 64.0 * f64::EPSILON * pdiff_over_ln2.abs().max(rates.rate_bob).max(1e-300);
    Ok(SurrogateCheck {
        is_psd,
        csec: rates.secrecy,
        pdiff_over_ln2,
        gap,
        min_eigenvalue,
        max_f_eigenvalue,
        taylor_envelope,
        bound_holds: is_psd.then_some(rates.secrecy <= pdiff_over_ln2 + slack),
        taylor_holds: (max_f_eigenvalue <= TAYLOR_REGIME).then(|| gap.abs() <= taylor_envelope + slack),
    })
}
