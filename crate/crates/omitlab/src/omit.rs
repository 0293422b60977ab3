//! First-order probe response of the full optomechanical system: sideband
//! fluctuation amplitudes, probe transmission and optical group delay.
//!
//! Probe axis convention: Delta_P = epsilon - Delta_L, so the g -> 0 limit of
//! the probe transmission coincides with the purely optical rate at
//! Delta1 = Delta2 = Delta_P.

use num_complex::Complex64;

use crate::config::{drive_amplitudes, ProbeSetting, SystemConfig};
use crate::error::{Error, Result};
use crate::steady_state::{solve_steady_state, SteadyState};

/// Default probe-detuning step for the group-delay phase derivative [s⁻¹].
pub const DEFAULT_PHASE_STEP: f64 = 1e3;

/// Closed-form coefficients of the first-order sideband solution:
/// mu_pm = i Delta_L + gamma2 + gamma_tip pm i eps,
/// nu_pm = i Delta_L + gamma1 - i g x_s pm i eps,
/// det_plus = conj(mu_plus) conj(nu_plus) + J^2, det_minus = mu_minus nu_minus + J^2,
/// k = m (-eps^2 - i eps Gamma_m + omega_m^2).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FirstOrderCoeffs {
    pub mu_plus: Complex64,
    pub mu_minus: Complex64,
    pub nu_plus: Complex64,
    pub nu_minus: Complex64,
    /// Upper-sideband determinant conj(mu_plus) conj(nu_plus) + J^2.
    pub det_plus: Complex64,
    /// Lower-sideband determinant mu_minus nu_minus + J^2.
    pub det_minus: Complex64,
    /// Mechanical response denominator [kg s⁻²].
    pub k: Complex64,
}

pub fn first_order_coeffs(cfg: &SystemConfig, ss: &SteadyState, epsilon: f64) -> FirstOrderCoeffs {
    let g2t = cfg.gamma2_total();
    let mu_plus = Complex64::new(g2t, cfg.delta_l + epsilon);
    let mu_minus = Complex64::new(g2t, cfg.delta_l - epsilon);
    let nu_plus = Complex64::new(cfg.gamma1, cfg.delta_l - ss.beta + epsilon);
    let nu_minus = Complex64::new(cfg.gamma1, cfg.delta_l - ss.beta - epsilon);
    let j2 = cfg.j * cfg.j;
    FirstOrderCoeffs {
        mu_plus,
        mu_minus,
        nu_plus,
        nu_minus,
        det_plus: mu_plus.conj() * nu_plus.conj() + j2,
        det_minus: mu_minus * nu_minus + j2,
        k: cfg.m
            * Complex64::new(
                cfg.omega_m * cfg.omega_m - epsilon * epsilon,
                -epsilon * cfg.gamma_m,
            ),
    }
}

/// First-order response at the upper sideband.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinearResponse {
    /// Displacement amplitude at e^{-i eps t} [m].
    pub dx_plus: Complex64,
    /// Left-resonator field amplitude at e^{-i eps t} [sqrt(photon)].
    pub da1_plus: Complex64,
    /// Complex probe transmission amplitude t_P = 1 - 2 gamma1 da1_plus / eps_P.
    pub t_p: Complex64,
    /// Transmission rate T_P = |t_P|^2.
    pub transmission: f64,
}

/// Shared denominator of the first-order solutions; errors when it collapses
/// below 1e-30 of its natural scale.
fn first_order_denominator(
    cfg: &SystemConfig,
    ss: &SteadyState,
    co: &FirstOrderCoeffs,
) -> Result<(Complex64, f64)> {
    let g2n = cfg.hbar * cfg.g * cfg.g * ss.a1_s.norm_sqr();
    let i_g2n = Complex64::new(0.0, g2n);
    let den = co.k * co.det_plus * co.det_minus
        + i_g2n * (co.mu_plus.conj() * co.det_minus - co.mu_minus * co.det_plus);
    let scale = (co.k * co.det_plus * co.det_minus).norm()
        + g2n * (co.mu_plus.norm() * co.det_minus.norm() + co.mu_minus.norm() * co.det_plus.norm());
    if den.norm() < 1e-30 * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::SingularDenominator);
    }
    Ok((den, g2n))
}

/// First-order fluctuation amplitudes and probe transmission at probe-pump
/// detuning `epsilon`, about the given steady state.
pub fn linear_response(
    cfg: &SystemConfig,
    ss: &SteadyState,
    epsilon: f64,
) -> Result<LinearResponse> {
    let (_, eps_p) = drive_amplitudes(cfg);
    let co = first_order_coeffs(cfg, ss, epsilon);
    let (den, g2n) = first_order_denominator(cfg, ss, &co)?;

    let dx_plus = cfg.hbar * cfg.g * eps_p * ss.a1_s.conj() * co.mu_minus * co.det_plus / den;
    let da1_plus =
        eps_p * co.mu_minus * (co.k * co.det_plus + Complex64::new(0.0, g2n) * co.mu_plus.conj())
            / den;

    // probe normalizes out of t_P; the eps_P = 0 limit keeps the same value
    let t_p = if eps_p > 0.0 {
        Complex64::new(1.0, 0.0) - 2.0 * cfg.gamma1 * da1_plus / eps_p
    } else {
        let da1_unit =
            co.mu_minus * (co.k * co.det_plus + Complex64::new(0.0, g2n) * co.mu_plus.conj()) / den;
        Complex64::new(1.0, 0.0) - 2.0 * cfg.gamma1 * da1_unit
    };
    Ok(LinearResponse {
        dx_plus,
        da1_plus,
        t_p,
        transmission: t_p.norm_sqr(),
    })
}

/// Convenience composition: solve the steady state, place the probe at
/// Delta_P and return its transmission.
pub fn probe_transmission(cfg: &SystemConfig, delta_p: f64) -> Result<LinearResponse> {
    let ss = solve_steady_state(cfg)?;
    let probe = ProbeSetting::from_delta_p(delta_p, cfg.delta_l);
    linear_response(cfg, &ss, probe.epsilon)
}

/// Group delay tau_g = d arg(t_P) / d Delta_P [s], by phase-unwrapped central
/// differences at steps `step` and `step/2`, Richardson-extrapolated.
/// Errors with [`Error::NonConverged`] when the two difference levels differ
/// by more than 1e-3 relative (and more than 1e-12 s absolute).
pub fn group_delay(cfg: &SystemConfig, delta_p: f64, step: f64) -> Result<f64> {
    if step.is_nan() || step <= 0.0 {
        return Err(Error::InvalidSpec(format!(
            "group_delay step must be > 0, got {step}"
        )));
    }
    let ss = solve_steady_state(cfg)?;
    let phase_slope = |h: f64| -> Result<f64> {
        let probe_hi = ProbeSetting::from_delta_p(delta_p + h, cfg.delta_l);
        let probe_lo = ProbeSetting::from_delta_p(delta_p - h, cfg.delta_l);
        let hi = linear_response(cfg, &ss, probe_hi.epsilon)?.t_p;
        let lo = linear_response(cfg, &ss, probe_lo.epsilon)?.t_p;
        let mut dphi = hi.arg() - lo.arg();
        // unwrap across the +-pi branch cut
        while dphi > std::f64::consts::PI {
            dphi -= std::f64::consts::TAU;
        }
        while dphi < -std::f64::consts::PI {
            dphi += std::f64::consts::TAU;
        }
        Ok(dphi / (2.0 * h))
    };
    let d1 = phase_slope(step)?;
    let d2 = phase_slope(step / 2.0)?;
    let diff = (d1 - d2).abs();
    let rel = diff / d1.abs().max(d2.abs()).max(1e-300);
    if rel > 1e-3 && diff > 1e-12 {
        return Err(Error::NonConverged { rel });
    }
    Ok((4.0 * d2 - d1) / 3.0)
}
