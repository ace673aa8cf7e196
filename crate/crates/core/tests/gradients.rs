mod common;

use common::{random_instance, unit_channels, unit_config, Instance};
use rand::Rng;
use ris_secrecy::oracle::{fd_grad_t, fd_grad_theta, relative_error, relative_error_c, FdSpec};
use ris_secrecy::ris::{amplitude_of_phase, reflection_and_derivative};
use ris_secrecy::rng::{stream, Purpose};
use ris_secrecy::secrecy::{channel_power_diff, grad_t, grad_theta_pdiff, grad_theta_secrecy, secrecy_rate};
use ris_secrecy::{CMat, Precoder, RisParams, RisState, C64};

const TOL: f64 = 1e-5;

#[test]
fn precoder_gradient_battery() {
    let spec = FdSpec::default();
    for seed in 0..100 {
        let Instance { ch, cfg, state, t, .. } = random_instance(seed);
        let f = |x: &CMat| Ok(secrecy_rate(&ch, &state, &Precoder(x.clone()), &cfg)?.secrecy);
        let fd = fd_grad_t(f, &t, &spec).unwrap();
        let g = grad_t(&ch, &state, &t, &cfg).unwrap();
        let e = relative_error_c(&g, &fd);
        assert!(e <= TOL, "seed {seed}: {e:e}");
    }
}

#[test]
fn phase_gradient_battery() {
    let spec = FdSpec::default();
    for seed in 0..100 {
        let Instance { ch, params, cfg, state, t } = random_instance(seed);
        let f = |th: &[f64]| Ok(secrecy_rate(&ch, &RisState::new(th.to_vec(), &params)?, &t, &cfg)?.secrecy);
        let fd = fd_grad_theta(f, &state.theta, (params.theta_min, params.theta_max), &spec).unwrap();
        assert!(fd.one_sided.iter().all(|b| !b));
        let e = relative_error(&grad_theta_secrecy(&ch, &state, &t, &cfg).unwrap(), &fd.grad);
        assert!(e <= TOL, "seed {seed}: {e:e}");
    }
}

#[test]
fn power_difference_gradient_battery() {
    let spec = FdSpec::default();
    for seed in 0..100 {
        let Instance { ch, params, cfg, state, t } = random_instance(seed);
        let f = |th: &[f64]| channel_power_diff(&ch, &RisState::new(th.to_vec(), &params)?, &t, &cfg);
        let fd = fd_grad_theta(f, &state.theta, (params.theta_min, params.theta_max), &spec).unwrap();
        let e = relative_error(&grad_theta_pdiff(&ch, &state, &t, &cfg).unwrap(), &fd.grad);
        assert!(e <= TOL, "seed {seed}: {e:e}");
    }
}

#[test]
fn reflection_derivative_over_many_angles() {
    let mut rng = stream(9, Purpose::Other(0));
    let h = 1e-6;
    for k in 0..1000 {
        let p = common::random_params(&mut rng);
        let theta = p.phase_at_fraction(rng.random_range(0.001..0.999));
        let (_, d) = reflection_and_derivative(&[theta], &p).unwrap();
        let (fp, _) = reflection_and_derivative(&[theta + h], &p).unwrap();
        let (fm, _) = reflection_and_derivative(&[theta - h], &p).unwrap();
        let fd = (fp[0] - fm[0]) / (2.0 * h);
        let e = (d[0] - fd).norm() / fd.norm();
        assert!(e <= TOL, "angle {k} ({theta}): {e:e}");
    }
}

#[test]
fn zero_precoder_gives_zero_phase_gradients() {
    let Instance { ch, cfg, state, .. } = random_instance(3);
    let t = Precoder::zeros(cfg.na, cfg.ns);
    assert!(grad_theta_secrecy(&ch, &state, &t, &cfg).unwrap().iter().all(|v| *v == 0.0));
    assert!(grad_theta_pdiff(&ch, &state, &t, &cfg).unwrap().iter().all(|v| *v == 0.0));
}

/// With one stream each receiver contributes `Q t / ((σ² + t^H Q t) ln 2)`,
/// `Q = H^H H`.
#[test]
fn single_stream_matches_vector_formula() {
    for seed in 0..20 {
        let cfg = unit_config(3, 2, 2, 1, 4, seed);
        let ch = unit_channels(&cfg, 0.6, 7);
        let p = RisParams::lossless(-3.0, 3.0);
        let state = RisState::new(vec![0.1, -0.7, 1.9, 2.5], &p).unwrap();
        let t = Precoder(CMat::from_fn(3, 1, |i, _| C64::new(0.3 * i as f64 + 0.1, 0.2 - 0.1 * i as f64)));
        let eff = ris_secrecy::secrecy::EffectiveChannels::new(&ch, &state.phi).unwrap();
        let vec_grad = |h: &CMat, s: f64| {
            let q = h.adjoint() * h;
            let denom = s + (t.0.adjoint() * &q * &t.0)[(0, 0)].re;
            &q * &t.0 / C64::from(denom * std::f64::consts::LN_2)
        };
        let expect = vec_grad(&eff.hb, cfg.sigma2_b) - vec_grad(&eff.he, cfg.sigma2_e);
        let got = grad_t(&ch, &state, &t, &cfg).unwrap();
        assert!(relative_error_c(&got, &expect) < 1e-12, "seed {seed}");
    }
}

/// `M = 1`, one antenna everywhere: the phase derivative by the scalar chain
/// rule through `h_b = a + b φ(θ)`.
#[test]
fn single_element_scalar_chain_rule() {
    let p = RisParams {
        beta_min: 0.3,
        alpha: 1.7,
        theta_tilde: 0.4,
        theta_min: -2.8,
        theta_max: 2.9,
        resistance: 1.0,
    };
    for seed in 0..20 {
        let cfg = unit_config(1, 1, 1, 1, 1, seed);
        let ch = unit_channels(&cfg, 0.7, 8);
        let theta = -2.5 + 0.25 * seed as f64;
        let state = RisState::new(vec![theta], &p).unwrap();
        let t = Precoder(CMat::from_element(1, 1, C64::new(0.8, 0.6)));
        let (_, dphi) = reflection_and_derivative(&[theta], &p).unwrap();
        let phi = amplitude_of_phase(theta, &p).unwrap() * C64::from_polar(1.0, theta);
        let tt = t.0[(0, 0)].norm_sqr();
        let link = |a: C64, b: C64, s: f64| {
            let h = a + b * phi;
            let dh = b * dphi[0];
            // d/dθ log2(1 + |h|² |t|² / s)
            2.0 * (h.conj() * dh).re * tt / s / ((1.0 + h.norm_sqr() * tt / s) * std::f64::consts::LN_2)
        };
        let b_cas = ch.h_rb[(0, 0)] * ch.h_ar[(0, 0)];
        let e_cas = ch.h_re[(0, 0)] * ch.h_ar[(0, 0)];
        let expect = link(ch.h_ab[(0, 0)], b_cas, 1.0) - link(ch.h_ae[(0, 0)], e_cas, 1.0);
        let got = grad_theta_secrecy(&ch, &state, &t, &cfg).unwrap()[0];
        assert!((got - expect).abs() <= 1e-12 * expect.abs().max(1.0), "seed {seed}: {got} vs {expect}");
    }
}
