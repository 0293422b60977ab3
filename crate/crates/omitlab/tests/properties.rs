//! Property tests for the spec-level invariants that hold over whole
//! parameter regions rather than at hand-picked points.

#![allow(clippy::field_reassign_with_default)]

use proptest::prelude::*;

use omitlab::config::{drive_amplitudes, load_config, ProbeSetting, SystemConfig};
use omitlab::omit::{linear_response, probe_transmission};
use omitlab::optical::{optical_transmission, supermode_frequencies};
use omitlab::sideband::second_order_amplitude;
use omitlab::steady_state::solve_steady_state;

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
}

/// Configurations in a physical box around the reference point.
fn config_strategy() -> impl Strategy<Value = SystemConfig> {
    (
        0.5_f64..2.0, // gamma1 scale
        0.5_f64..2.0, // gamma2 scale
        0.0_f64..8.0, // gamma_tip / gamma_c
        0.5_f64..2.0, // J scale
        0.2_f64..2.0, // P_L scale
        0.8_f64..1.2, // Delta_L / omega_m
    )
        .prop_map(|(g1, g2, tip, j, p, dl)| {
            let mut cfg = SystemConfig::default();
            cfg.gamma1 = 6.43e6 * g1;
            cfg.gamma2 = 6.43e6 * g2;
            cfg.gamma_tip = 6.43e6 * tip;
            cfg.j = 12.86e6 * j;
            cfg.p_l = 1e-3 * p;
            cfg.p_in = 0.0025 * cfg.p_l;
            cfg.delta_l = cfg.omega_m * dl;
            cfg
        })
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, ..ProptestConfig::default() })]

    #[test]
    fn drive_amplitude_is_sqrt_homogeneous(cfg in config_strategy(), k in 1e-3_f64..1e3) {
        let (eps_l, _) = drive_amplitudes(&cfg);
        let mut scaled = cfg.clone();
        scaled.p_l *= k;
        let (eps_k, _) = drive_amplitudes(&scaled);
        prop_assert!(rel(eps_k, k.sqrt() * eps_l) < 1e-12);
    }

    #[test]
    fn probe_setting_identity_holds(delta_p in -30e6_f64..30e6, delta_l in 1e8_f64..2e8) {
        let p = ProbeSetting::from_delta_p(delta_p, delta_l);
        prop_assert_eq!(p.delta_p, p.epsilon - delta_l);
    }

    #[test]
    fn optical_transmission_is_passive(cfg in config_strategy(), delta in -40e6_f64..40e6) {
        let t = optical_transmission(&cfg, delta, delta);
        prop_assert!((0.0..=1.0 + 1e-12).contains(&t), "T = {}", t);
        // mirror symmetry for equal bare modes
        prop_assert!(rel(t, optical_transmission(&cfg, -delta, -delta)) < 1e-12);
    }

    #[test]
    fn supermode_sum_rule(cfg in config_strategy()) {
        let modes = supermode_frequencies(&cfg, cfg.omega_c, cfg.omega_c);
        let sum = modes.omega_plus + modes.omega_minus;
        let want_re = 2.0 * cfg.omega_c;
        let want_im = -(cfg.gamma1 + cfg.gamma2 + cfg.gamma_tip);
        prop_assert!(rel(sum.re, want_re) < 1e-12);
        prop_assert!(rel(sum.im, want_im) < 1e-12);
    }

    #[test]
    fn transmission_invariant_under_probe_power(cfg in config_strategy(), k in 1e-2_f64..1e2, delta_p in -12e6_f64..12e6) {
        let base = probe_transmission(&cfg, delta_p).unwrap().transmission;
        let mut scaled = cfg.clone();
        scaled.p_in *= k;
        let same = probe_transmission(&scaled, delta_p).unwrap().transmission;
        prop_assert!(rel(base, same) < 1e-10);
    }

    #[test]
    fn efficiency_nonnegative_and_linear_in_probe(cfg in config_strategy(), k in 1e-2_f64..1e2, delta_p in -12e6_f64..12e6) {
        let eta_at = |cfg: &SystemConfig| {
            let ss = solve_steady_state(cfg).unwrap();
            let eps = ProbeSetting::from_delta_p(delta_p, cfg.delta_l).epsilon;
            let lr = linear_response(cfg, &ss, eps).unwrap();
            second_order_amplitude(cfg, &ss, &lr, eps).unwrap().eta
        };
        let base = eta_at(&cfg);
        prop_assert!(base >= 0.0);
        let mut scaled = cfg.clone();
        scaled.p_in *= k * k; // eps_P scales by k
        prop_assert!(rel(eta_at(&scaled), k * base) < 1e-10);
    }

    #[test]
    fn config_documents_round_trip(cfg in config_strategy()) {
        let reloaded = load_config(&cfg.to_document()).unwrap();
        prop_assert_eq!(cfg, reloaded);
    }
}
