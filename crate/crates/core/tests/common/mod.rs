#![allow(dead_code)]

use rand::Rng;
use ris_secrecy::channel::gaussian_matrix;
use ris_secrecy::circuit::{fit_ris_params, CircuitParams, FIT_SAMPLES};
use ris_secrecy::pgm::scale_to_power;
use ris_secrecy::rng::{stream, Purpose};
use ris_secrecy::{ChannelSet, Precoder, RisParams, RisState, SystemConfig, C64};

pub struct Instance {
    pub ch: ChannelSet,
    pub params: RisParams,
    pub cfg: SystemConfig,
    pub state: RisState,
    pub t: Precoder,
}

pub fn unit_config(na: usize, nb: usize, ne: usize, ns: usize, m: usize, seed: u64) -> SystemConfig {
    SystemConfig {
        na,
        nb,
        ne,
        ns,
        m,
        power: 1.0,
        sigma2_b: 1.0,
        sigma2_e: 1.0,
        seed,
    }
}

/// Unit-variance channels of the given shape; Eve's links are scaled by `eve`.
pub fn unit_channels(cfg: &SystemConfig, eve: f64, purpose: u32) -> ChannelSet {
    let mut rng = stream(cfg.seed, Purpose::Other(purpose));
    let mut g = |r, c| gaussian_matrix(r, c, &mut rng);
    ChannelSet {
        h_ab: g(cfg.nb, cfg.na),
        h_ar: g(cfg.m, cfg.na),
        h_rb: g(cfg.nb, cfg.m),
        h_ae: g(cfg.ne, cfg.na) * C64::from(eve),
        h_re: g(cfg.ne, cfg.m) * C64::from(eve),
    }
}

pub fn random_params<R: Rng>(rng: &mut R) -> RisParams {
    RisParams {
        beta_min: rng.random_range(0.1..0.9),
        alpha: rng.random_range(1.0..3.0),
        theta_tilde: rng.random_range(-1.0..2.0),
        theta_min: rng.random_range(-3.0..-1.0),
        theta_max: rng.random_range(1.0..3.0),
        resistance: 1.0,
    }
}

/// Dimensions in 1..=4, M in 1..=16, phases away from the range ends and a
/// full-power Gaussian precoder.
pub fn random_instance(seed: u64) -> Instance {
    let mut rng = stream(seed, Purpose::Other(100));
    let mut dim = |hi: usize| rng.random_range(1..=hi);
    let (na, nb, ne, ns, m) = (dim(4), dim(4), dim(4), dim(4), dim(16));
    let params = random_params(&mut rng);
    let cfg = unit_config(na, nb, ne, ns, m, seed);
    let ch = unit_channels(&cfg, 0.5, 101);
    let theta = (0..m).map(|_| params.phase_at_fraction(rng.random_range(0.01..0.99))).collect();
    let state = RisState::new(theta, &params).unwrap();
    let t = scale_to_power(gaussian_matrix(na, ns, &mut rng), 1.0).unwrap();
    Instance {
        ch,
        params,
        cfg,
        state,
        t,
    }
}

pub fn practical() -> RisParams {
    fit_ris_params(&CircuitParams::reference(2.0), FIT_SAMPLES).unwrap().params
}
