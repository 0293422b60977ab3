//! Second-order sideband amplitude and conversion efficiency.
//!
//! The second-order component oscillates at 2 eps relative to the pump and is
//! generated purely by the optomechanical nonlinearity; it vanishes with g
//! and scales with the square of the probe amplitude.

use num_complex::Complex64;

use crate::config::{drive_amplitudes, ProbeSetting, SystemConfig};
use crate::error::{Error, Result};
use crate::omit::{first_order_coeffs, linear_response, LinearResponse};
use crate::steady_state::{solve_steady_state, SteadyState};

/// Closed-form coefficients of the second-order solution; same structure as
/// the first-order set with eps -> 2 eps, plus the cross-term factor lambda.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SecondOrderCoeffs {
    pub mu_plus: Complex64,
    pub mu_minus: Complex64,
    pub nu_plus: Complex64,
    pub nu_minus: Complex64,
    pub det_plus: Complex64,
    pub det_minus: Complex64,
    /// Coupling factor multiplying dx_plus * da1_plus in the numerator.
    pub lambda: Complex64,
    /// Mechanical response denominator at 2 eps [kg s⁻²].
    pub k: Complex64,
}

pub fn second_order_coeffs(
    cfg: &SystemConfig,
    ss: &SteadyState,
    epsilon: f64,
) -> SecondOrderCoeffs {
    let g2t = cfg.gamma2_total();
    let mu_plus = Complex64::new(g2t, cfg.delta_l + 2.0 * epsilon);
    let mu_minus = Complex64::new(g2t, cfg.delta_l - 2.0 * epsilon);
    let nu_plus = Complex64::new(cfg.gamma1, cfg.delta_l - ss.beta + 2.0 * epsilon);
    let nu_minus = Complex64::new(cfg.gamma1, cfg.delta_l - ss.beta - 2.0 * epsilon);
    let j2 = cfg.j * cfg.j;
    let det_plus = mu_plus.conj() * nu_plus.conj() + j2;
    let det_minus = mu_minus * nu_minus + j2;
    let k = cfg.m
        * Complex64::new(
            cfg.omega_m * cfg.omega_m - 4.0 * epsilon * epsilon,
            -2.0 * epsilon * cfg.gamma_m,
        );

    let first = first_order_coeffs(cfg, ss, epsilon);
    let n1 = ss.a1_s.norm_sqr();
    let g = cfg.g;
    let lambda = Complex64::new(0.0, g) * mu_minus * k * first.det_plus * det_plus
        - cfg.hbar
            * g.powi(3)
            * n1
            * mu_minus
            * (first.det_plus * mu_plus.conj() - first.mu_plus.conj() * det_plus);

    SecondOrderCoeffs {
        mu_plus,
        mu_minus,
        nu_plus,
        nu_minus,
        det_plus,
        det_minus,
        lambda,
        k,
    }
}

/// Second-order field amplitude and sideband efficiency.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SecondOrderResponse {
    /// Left-resonator amplitude at e^{-2 i eps t} [sqrt(photon)].
    pub da1_plus: Complex64,
    /// Efficiency eta = |2 gamma1 da1_plus / eps_P|.
    pub eta: f64,
}

/// Evaluate the second-order solution from the first-order response.
/// eps_P = 0 carries no sidebands and returns zeros.
pub fn second_order_amplitude(
    cfg: &SystemConfig,
    ss: &SteadyState,
    lr: &LinearResponse,
    epsilon: f64,
) -> Result<SecondOrderResponse> {
    let (_, eps_p) = drive_amplitudes(cfg);
    if eps_p == 0.0 {
        return Ok(SecondOrderResponse {
            da1_plus: Complex64::new(0.0, 0.0),
            eta: 0.0,
        });
    }

    let first = first_order_coeffs(cfg, ss, epsilon);
    let co = second_order_coeffs(cfg, ss, epsilon);
    let n1 = ss.a1_s.norm_sqr();
    let g = cfg.g;
    let g2n = cfg.hbar * g * g * n1;

    let den_inner = co.k * co.det_plus * co.det_minus
        + Complex64::new(0.0, g2n) * (co.det_minus * co.mu_plus.conj() - co.det_plus * co.mu_minus);
    let den = first.det_plus * den_inner;
    let scale = first.det_plus.norm()
        * ((co.k * co.det_plus * co.det_minus).norm()
            + g2n
                * (co.det_minus.norm() * co.mu_plus.norm()
                    + co.det_plus.norm() * co.mu_minus.norm()));
    if den.norm() < 1e-30 * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::SingularDenominator);
    }

    // evaluated exactly as the single printed fraction
    let quad = -Complex64::new(0.0, cfg.hbar * g.powi(4) * n1)
        * ss.a1_s
        * first.mu_plus.conj()
        * co.mu_plus.conj()
        * co.mu_minus
        * lr.dx_plus
        * lr.dx_plus;
    let da1_plus = (quad + co.lambda * lr.dx_plus * lr.da1_plus) / den;

    // internal cross-check: mu_minus factored out of both numerator terms
    #[cfg(debug_assertions)]
    {
        let lambda_core = Complex64::new(0.0, g) * co.k * first.det_plus * co.det_plus
            - cfg.hbar
                * g.powi(3)
                * n1
                * (first.det_plus * co.mu_plus.conj() - first.mu_plus.conj() * co.det_plus);
        let quad_core = -Complex64::new(0.0, cfg.hbar * g.powi(4) * n1)
            * ss.a1_s
            * first.mu_plus.conj()
            * co.mu_plus.conj()
            * lr.dx_plus
            * lr.dx_plus;
        let alt = co.mu_minus * (quad_core + lambda_core * lr.dx_plus * lr.da1_plus) / den;
        let rel = (alt - da1_plus).norm() / da1_plus.norm().max(1e-300);
        debug_assert!(
            rel < 1e-10 || da1_plus.norm() == 0.0,
            "grouping check: {rel}"
        );
    }

    Ok(SecondOrderResponse {
        da1_plus,
        eta: (2.0 * cfg.gamma1 * da1_plus / eps_p).norm(),
    })
}

/// Efficiency over a probe-detuning grid, in grid order.
pub fn sideband_spectrum(cfg: &SystemConfig, delta_p_grid: &[f64]) -> Result<Vec<(f64, f64)>> {
    if delta_p_grid.is_empty() {
        return Err(Error::InvalidSpec("empty Delta_P grid".into()));
    }
    let ss = solve_steady_state(cfg)?;
    delta_p_grid
        .iter()
        .map(|&dp| {
            let eps = ProbeSetting::from_delta_p(dp, cfg.delta_l).epsilon;
            let lr = linear_response(cfg, &ss, eps)?;
            let so = second_order_amplitude(cfg, &ss, &lr, eps)?;
            Ok((dp, so.eta))
        })
        .collect()
}
