//! Joint projected-gradient ascent of the secrecy rate over the precoder and
//! the RIS phases.
//!
//! Each outer iteration takes one phase step and then one precoder step. A step
//! moves along the analytic gradient, projects back onto the feasible set and
//! is shrunk by the backtracking factor while the secrecy rate drops. Step sizes
//! are initialized once from the first nonzero gradients and afterwards only
//! shrink.

use std::time::Instant;

use nalgebra::SVD;
use serde::{Deserialize, Serialize};

use crate::ascent::{self, Policy};
use crate::channel::{gaussian_matrix, ChannelSet, SystemConfig};
use crate::linalg::frob_sq;
use crate::ris::{project_theta, RisParams, RisState};
use crate::rng::{stream, Purpose};
use crate::secrecy::{grad_theta_secrecy, EffectiveChannels, Precoder, RateBundle};
use crate::{CMat, Error, Result, C64};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum StepRule {
    /// Step sizes from the first gradients, then backtracking.
    Adaptive,
    /// Constant step sizes, every step accepted.
    Fixed { theta: f64, precoder: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PgmOptions {
    pub max_outer: usize,
    pub max_inner: usize,
    /// Tolerance on the change of the secrecy rate, bits/s/Hz.
    pub xi: f64,
    /// Backtracking factor in (0, 1).
    pub backtrack: f64,
    /// Scale of the first precoder step relative to `sqrt(P)`.
    pub tau: f64,
    /// Largest first phase step; a quarter of the phase range when unset.
    pub theta_max_step: Option<f64>,
    pub step_rule: StepRule,
    pub optimize_theta: bool,
    pub optimize_precoder: bool,
}

impl Default for PgmOptions {
    fn default() -> Self {
        Self {
            max_outer: 500,
            max_inner: 30,
            xi: 1e-4,
            backtrack: 0.5,
            tau: 0.5,
            theta_max_step: None,
            step_rule: StepRule::Adaptive,
            optimize_theta: true,
            optimize_precoder: true,
        }
    }
}

impl PgmOptions {
    pub fn validate(&self, p: &RisParams) -> Result<()> {
        if self.max_outer == 0 || self.max_inner == 0 {
            return Err(Error::Config("iteration limits must be at least 1".into()));
        }
        if !(self.xi >= 0.0) {
            return Err(Error::Config("xi must be non-negative".into()));
        }
        if !(self.backtrack > 0.0 && self.backtrack < 1.0) {
            return Err(Error::Config(format!("backtracking factor {} outside (0, 1)", self.backtrack)));
        }
        if !(self.tau > 0.0 && self.tau <= 1.0) {
            return Err(Error::Config(format!("tau {} outside (0, 1]", self.tau)));
        }
        if let Some(s) = self.theta_max_step {
            if !(s > 0.0 && s <= p.phase_span() / 2.0) {
                return Err(Error::Config(format!(
                    "theta_max_step {s} outside (0, {}]",
                    p.phase_span() / 2.0
                )));
            }
        }
        if let StepRule::Fixed { theta, precoder } = self.step_rule {
            if !(theta > 0.0 && precoder > 0.0) {
                return Err(Error::Config("fixed step sizes must be positive".into()));
            }
        }
        Ok(())
    }

    pub fn theta_max_step(&self, p: &RisParams) -> f64 {
        self.theta_max_step.unwrap_or(p.phase_span() / 4.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Converged,
    MaxIter,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolveReport {
    /// Secrecy rate (raw difference) before the first iteration and after
    /// each outer iteration.
    pub objective_trace: Vec<f64>,
    pub t_opt: Precoder,
    pub theta_opt: Vec<f64>,
    /// `(step_theta, step_t)` after each outer iteration; 0 until initialized.
    pub step_history: Vec<(f64, f64)>,
    pub termination: Termination,
    /// Seconds.
    pub wall_time: f64,
    pub outer_iterations: usize,
    /// Secrecy-rate evaluations, including the initial one.
    pub objective_evals: usize,
    pub gradient_evals: usize,
    pub rates: RateBundle,
    pub warnings: Vec<String>,
    /// Numeric failure that stopped the run early; the iterate is the last
    /// feasible one.
    pub failure: Option<String>,
    pub options: PgmOptions,
    pub seed: u64,
}

impl SolveReport {
    pub fn final_secrecy(&self) -> f64 {
        self.rates.secrecy
    }
}

/// Scales `t_hat` back onto the power ball if it lies outside.
pub fn project_precoder(t_hat: CMat, power: f64) -> Precoder {
    let tr = frob_sq(&t_hat);
    if tr <= power {
        Precoder(t_hat)
    } else {
        Precoder(t_hat * C64::from((power / tr).sqrt()))
    }
}

/// Scales `t` so that `Tr(T T^H) = power`.
pub fn scale_to_power(t: CMat, power: f64) -> Result<Precoder> {
    let tr = frob_sq(&t);
    if tr == 0.0 {
        return Err(Error::Degenerate("cannot scale a zero precoder onto the power boundary".into()));
    }
    Ok(Precoder(t * C64::from((power / tr).sqrt())))
}

/// First phase step size: the raw step has max-norm `max_step`.
pub fn init_step_theta(g: &[f64], max_step: f64) -> Result<f64> {
    let gmax = g.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if gmax == 0.0 {
        return Err(Error::ZeroGradient);
    }
    Ok(max_step / gmax)
}

/// First precoder step size: the raw step has Frobenius norm `tau sqrt(P)`.
pub fn init_step_t(g: &CMat, power: f64, tau: f64) -> Result<f64> {
    let n = g.norm();
    if n == 0.0 {
        return Err(Error::ZeroGradient);
    }
    Ok(tau * power.sqrt() / n)
}

/// Uniform phases and the strongest `ns` right singular directions of the
/// direct Alice-Bob channel, sharing the power budget equally.
pub fn default_init(ch: &ChannelSet, params: &RisParams, cfg: &SystemConfig) -> Result<(Precoder, Vec<f64>)> {
    let theta = params.uniform_phases(ch.m(), &mut stream(cfg.seed, Purpose::InitTheta));
    let svd = SVD::new(ch.h_ab.clone(), false, true);
    let v_t = svd.v_t.ok_or_else(|| Error::Numeric("SVD of the direct channel failed".into()))?;
    // singular values come back sorted in decreasing order
    let mut t = CMat::zeros(ch.na(), cfg.ns);
    let avail = v_t.nrows().min(cfg.ns);
    for k in 0..avail {
        for a in 0..ch.na() {
            t[(a, k)] = v_t[(k, a)].conj();
        }
    }
    if avail < cfg.ns {
        // fill the remaining streams from a fixed stream so T keeps full width
        let extra = gaussian_matrix(ch.na(), cfg.ns - avail, &mut stream(cfg.seed, Purpose::InitPrecoder));
        t.columns_mut(avail, cfg.ns - avail).copy_from(&extra);
    }
    let t = scale_to_power(t, cfg.power)?;
    Ok((t, theta))
}

/// Uniform random phases and a Gaussian precoder scaled onto the power boundary.
pub fn random_init(ch: &ChannelSet, params: &RisParams, cfg: &SystemConfig) -> Result<(Precoder, Vec<f64>)> {
    let theta = params.uniform_phases(ch.m(), &mut stream(cfg.seed, Purpose::RandomRisTheta));
    let t = gaussian_matrix(ch.na(), cfg.ns, &mut stream(cfg.seed, Purpose::RandomPrecoder));
    Ok((scale_to_power(t, cfg.power)?, theta))
}

struct Iterate {
    state: RisState,
    eff: EffectiveChannels,
    t: Precoder,
    rates: RateBundle,
}

fn check_inputs(ch: &ChannelSet, params: &RisParams, cfg: &SystemConfig, opts: &PgmOptions) -> Result<()> {
    cfg.validate()?;
    params.validate()?;
    opts.validate(params)?;
    ch.check_dims()?;
    if ch.m() != cfg.m || ch.na() != cfg.na || ch.nb() != cfg.nb || ch.ne() != cfg.ne {
        return Err(Error::Dimension("channel set does not match the system configuration".into()));
    }
    Ok(())
}

/// Runs the joint ascent. `None` initial values fall back to [`default_init`].
///
/// Configuration and dimension problems are returned as errors; numeric
/// failures during the iterations end the run and are recorded in the report.
pub fn solve(
    ch: &ChannelSet,
    params: &RisParams,
    cfg: &SystemConfig,
    opts: &PgmOptions,
    t_init: Option<Precoder>,
    theta_init: Option<Vec<f64>>,
) -> Result<SolveReport> {
    solve_observed(ch, params, cfg, opts, t_init, theta_init, |_, _| {})
}

/// [`solve`], calling `observe` with the starting point and the iterate after
/// every outer iteration.
pub fn solve_observed(
    ch: &ChannelSet,
    params: &RisParams,
    cfg: &SystemConfig,
    opts: &PgmOptions,
    t_init: Option<Precoder>,
    theta_init: Option<Vec<f64>>,
    mut observe: impl FnMut(&Precoder, &[f64]),
) -> Result<SolveReport> {
    check_inputs(ch, params, cfg, opts)?;
    let start = Instant::now();
    let mut warnings = Vec::new();
    let (t0, theta0) = match (t_init, theta_init) {
        (Some(t), Some(th)) => (t, th),
        (t, th) => {
            let (dt, dth) = default_init(ch, params, cfg)?;
            (t.unwrap_or(dt), th.unwrap_or(dth))
        }
    };
    if t0.nrows() != cfg.na || t0.ncols() != cfg.ns {
        return Err(Error::Dimension(format!(
            "initial precoder is {}x{}, expected {}x{}",
            t0.nrows(),
            t0.ncols(),
            cfg.na,
            cfg.ns
        )));
    }
    if theta0.len() != cfg.m {
        return Err(Error::Dimension(format!("{} initial phases for {} elements", theta0.len(), cfg.m)));
    }
    let t0 = if t0.is_feasible(cfg.power) {
        t0
    } else {
        warnings.push("initial precoder exceeded the power budget and was projected".into());
        project_precoder(t0.into_inner(), cfg.power)
    };
    let state = RisState::new(theta0, params)?;
    let eff = EffectiveChannels::new(ch, &state.phi)?;
    let rates = eff.rates(&t0, cfg)?;
    let mut it = Iterate { state, eff, t: t0, rates };

    let mut run = Run {
        ch,
        params,
        cfg,
        opts,
        trace: vec![it.rates.secrecy],
        steps: Vec::new(),
        evals: 1,
        grads: 0,
        step_theta: None,
        step_t: None,
    };
    let mut termination = Termination::MaxIter;
    let mut failure = None;
    observe(&it.t, &it.state.theta);
    for _ in 0..opts.max_outer {
        let step = run.outer(&mut it);
        observe(&it.t, &it.state.theta);
        match step {
            Ok(converged) => {
                if converged {
                    termination = Termination::Converged;
                    break;
                }
            }
            Err(e) => {
                failure = Some(e.to_string());
                break;
            }
        }
    }
    Ok(SolveReport {
        outer_iterations: run.steps.len(),
        objective_trace: run.trace,
        step_history: run.steps,
        t_opt: it.t,
        theta_opt: it.state.theta,
        termination,
        wall_time: start.elapsed().as_secs_f64(),
        objective_evals: run.evals,
        gradient_evals: run.grads,
        rates: it.rates,
        warnings,
        failure,
        options: *opts,
        seed: cfg.seed,
    })
}

struct Run<'a> {
    ch: &'a ChannelSet,
    params: &'a RisParams,
    cfg: &'a SystemConfig,
    opts: &'a PgmOptions,
    trace: Vec<f64>,
    steps: Vec<(f64, f64)>,
    evals: usize,
    grads: usize,
    step_theta: Option<f64>,
    step_t: Option<f64>,
}

impl Run<'_> {
    fn policy(&self) -> Policy {
        match self.opts.step_rule {
            StepRule::Adaptive => Policy::Backtrack {
                c: self.opts.backtrack,
                max_inner: self.opts.max_inner,
                xi: self.opts.xi,
            },
            StepRule::Fixed { .. } => Policy::AcceptAll,
        }
    }

    /// One outer iteration; returns whether the run has converged.
    fn outer(&mut self, it: &mut Iterate) -> Result<bool> {
        let before = it.rates.secrecy;
        let mut moved = false;
        if self.opts.optimize_theta {
            moved |= self.theta_step(it)?;
        }
        if self.opts.optimize_precoder {
            moved |= self.precoder_step(it)?;
        }
        self.trace.push(it.rates.secrecy);
        self.steps.push((self.step_theta.unwrap_or(0.0), self.step_t.unwrap_or(0.0)));
        let delta = it.rates.secrecy - before;
        Ok(!moved || delta.abs() <= self.opts.xi)
    }

    /// Returns false when the gradient vanished and nothing was attempted.
    fn theta_step(&mut self, it: &mut Iterate) -> Result<bool> {
        let g = grad_theta_secrecy(self.ch, &it.state, &it.t, self.cfg)?;
        self.grads += 1;
        if g.iter().all(|v| *v == 0.0) {
            return Ok(false);
        }
        let step = match (self.step_theta, self.opts.step_rule) {
            (Some(s), _) => s,
            (None, StepRule::Fixed { theta, .. }) => theta,
            (None, StepRule::Adaptive) => init_step_theta(&g, self.opts.theta_max_step(self.params))?,
        };
        let (ch, params, cfg, t) = (self.ch, self.params, self.cfg, &it.t);
        let theta = &it.state.theta;
        let out = ascent::step(it.rates.secrecy, step, self.policy(), |s| {
            let raw: Vec<f64> = theta.iter().zip(&g).map(|(th, gm)| th + s * gm).collect();
            let state = RisState::new(project_theta(&raw, params), params)?;
            let eff = EffectiveChannels::new(ch, &state.phi)?;
            let rates = eff.rates(t, cfg)?;
            Ok(((state, eff, rates), rates.secrecy))
        })?;
        self.evals += out.evals;
        self.step_theta = Some(out.step);
        if let Some(((state, eff, rates), _)) = out.accepted {
            it.state = state;
            it.eff = eff;
            it.rates = rates;
        }
        Ok(true)
    }

    fn precoder_step(&mut self, it: &mut Iterate) -> Result<bool> {
        let g = it.eff.grad_t(&it.t, self.cfg)?;
        self.grads += 1;
        if g.iter().all(|z| z.norm_sqr() == 0.0) {
            return Ok(false);
        }
        let step = match (self.step_t, self.opts.step_rule) {
            (Some(s), _) => s,
            (None, StepRule::Fixed { precoder, .. }) => precoder,
            (None, StepRule::Adaptive) => init_step_t(&g, self.cfg.power, self.opts.tau)?,
        };
        let (cfg, eff, t) = (self.cfg, &it.eff, &it.t);
        let out = ascent::step(it.rates.secrecy, step, self.policy(), |s| {
            let cand = project_precoder(&t.0 + &g * C64::from(s), cfg.power);
            let rates = eff.rates(&cand, cfg)?;
            Ok(((cand, rates), rates.secrecy))
        })?;
        self.evals += out.evals;
        self.step_t = Some(out.step);
        if let Some(((t, rates), _)) = out.accepted {
            it.t = t;
            it.rates = rates;
        }
        Ok(true)
    }
}
