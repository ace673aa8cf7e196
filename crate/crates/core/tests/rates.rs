mod common;

use common::{random_instance, unit_channels, unit_config, Instance};
use ris_secrecy::oracle::rate_extended;
use ris_secrecy::secrecy::{channel_power_diff, rate, secrecy_rate, EffectiveChannels};
use ris_secrecy::{CMat, Precoder, RisParams, RisState, C64};

fn fixture() -> (ris_secrecy::ChannelSet, RisState, Precoder, ris_secrecy::SystemConfig) {
    let cfg = unit_config(2, 2, 2, 2, 2, 42);
    let ch = unit_channels(&cfg, 0.5, 7);
    let p = RisParams {
        beta_min: 0.35,
        alpha: 1.5,
        theta_tilde: 1.36,
        theta_min: -2.99,
        theta_max: 2.83,
        resistance: 2.0,
    };
    let state = RisState::new(vec![0.3, -1.1], &p).unwrap();
    let t = Precoder(CMat::from_row_slice(
        2,
        2,
        &[C64::new(0.5, 0.1), C64::new(-0.2, 0.3), C64::new(0.1, -0.4), C64::new(0.6, 0.0)],
    ));
    (ch, state, t, cfg)
}

/// Secrecy rate of [`fixture`] from the double-double determinant.
const PINNED_SECRECY: f64 = 1.1045779616318845;

#[test]
fn fixed_fixture_is_pinned() {
    let (ch, state, t, cfg) = fixture();
    let eff = EffectiveChannels::new(&ch, &state.phi).unwrap();
    let oracle = rate_extended(&eff.hb, &t.0, 1.0) - rate_extended(&eff.he, &t.0, 1.0);
    assert!((oracle - PINNED_SECRECY).abs() <= 1e-14 * PINNED_SECRECY.abs());
    let got = secrecy_rate(&ch, &state, &t, &cfg).unwrap().secrecy;
    assert!((got - PINNED_SECRECY).abs() <= 1e-12 * PINNED_SECRECY.abs(), "{got}");
}

#[test]
fn rates_match_extended_precision() {
    for seed in 0..50 {
        let Instance { ch, cfg, state, t, .. } = random_instance(seed);
        let eff = EffectiveChannels::new(&ch, &state.phi).unwrap();
        for (h, s2) in [(&eff.hb, cfg.sigma2_b), (&eff.he, cfg.sigma2_e)] {
            let r = rate(h, &t, s2).unwrap();
            let o = rate_extended(h, &t.0, s2);
            assert!((r - o).abs() <= 1e-10 * o.abs().max(1e-300), "seed {seed}: {r} vs {o}");
        }
    }
}

#[test]
fn scalar_rate_formula() {
    for (h, t, s2) in [(C64::new(0.3, -1.2), C64::new(0.7, 0.2), 0.5), (C64::new(2.0, 0.0), C64::new(0.0, 1.0), 3.0)] {
        let r = rate(&CMat::from_element(1, 1, h), &Precoder(CMat::from_element(1, 1, t)), s2).unwrap();
        let expect = (1.0 + h.norm_sqr() * t.norm_sqr() / s2).log2();
        assert!((r - expect).abs() < 1e-14);
    }
}

/// Right-multiplying the precoder by a unitary leaves `T T^H` and the rates
/// unchanged.
#[test]
fn rates_are_invariant_to_stream_rotation() {
    for seed in 0..30 {
        let Instance { ch, cfg, state, t, .. } = random_instance(seed);
        let mut rng = ris_secrecy::rng::stream(seed, ris_secrecy::rng::Purpose::Other(5));
        let q = ris_secrecy::channel::gaussian_matrix(cfg.ns, cfg.ns, &mut rng).qr().q();
        let a = secrecy_rate(&ch, &state, &t, &cfg).unwrap();
        let b = secrecy_rate(&ch, &state, &Precoder(&t.0 * q), &cfg).unwrap();
        assert!((a.rate_bob - b.rate_bob).abs() < 1e-10 * a.rate_bob.max(1.0));
        assert!((a.secrecy - b.secrecy).abs() < 1e-10 * a.rate_bob.max(1.0));
    }
}

#[test]
fn exchanging_receivers_negates_the_secrecy_rate() {
    for seed in 0..30 {
        let Instance { ch, mut cfg, state, t, .. } = random_instance(seed);
        let a = secrecy_rate(&ch, &state, &t, &cfg).unwrap();
        std::mem::swap(&mut cfg.nb, &mut cfg.ne);
        let b = secrecy_rate(&ch.swapped(), &state, &t, &cfg).unwrap();
        assert!((a.secrecy + b.secrecy).abs() < 1e-12 * a.rate_bob.max(1.0));
        assert_eq!(a.rate_bob, b.rate_eve);
        assert_eq!(b.reported(), b.secrecy.max(0.0));
    }
}

#[test]
fn power_difference_adds_over_streams() {
    for seed in 0..30 {
        let Instance { ch, cfg, state, t, .. } = random_instance(seed);
        let whole = channel_power_diff(&ch, &state, &t, &cfg).unwrap();
        let parts: f64 = (0..cfg.ns)
            .map(|k| channel_power_diff(&ch, &state, &Precoder(t.0.columns(k, 1).into_owned()), &cfg).unwrap())
            .sum();
        assert!((whole - parts).abs() < 1e-12 * whole.abs().max(1.0));
    }
}

#[test]
fn power_difference_elementwise_expansion() {
    let (ch, state, t, cfg) = fixture();
    let eff = EffectiveChannels::new(&ch, &state.phi).unwrap();
    let mut expect = 0.0;
    for (h, s2) in [(&eff.hb, 1.0), (&eff.he, -1.0)] {
        for r in 0..2 {
            for k in 0..2 {
                let mut acc = C64::new(0.0, 0.0);
                for a in 0..2 {
                    acc += h[(r, a)] * t.0[(a, k)];
                }
                expect += s2 * acc.norm_sqr();
            }
        }
    }
    let got = channel_power_diff(&ch, &state, &t, &cfg).unwrap();
    assert!((got - expect).abs() <= 1e-12 * expect.abs());
}

#[test]
fn zero_precoder_and_identical_receivers() {
    let (mut ch, state, t, cfg) = fixture();
    let z = secrecy_rate(&ch, &state, &Precoder::zeros(2, 2), &cfg).unwrap();
    assert_eq!((z.rate_bob, z.secrecy), (0.0, 0.0));
    ch.h_ae = ch.h_ab.clone();
    ch.h_re = ch.h_rb.clone();
    assert_eq!(secrecy_rate(&ch, &state, &t, &cfg).unwrap().secrecy, 0.0);
    assert_eq!(channel_power_diff(&ch, &state, &t, &cfg).unwrap(), 0.0);
}
