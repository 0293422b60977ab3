//! Effective detuning and damping seen by the probe once the mechanical
//! response is folded into the left resonator, and the frequency-shift
//! diagnostics that locate the loss-induced transparency.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::config::{ProbeSetting, SystemConfig};
use crate::error::{Error, Result};
use crate::omit::{first_order_coeffs, linear_response, LinearResponse};
use crate::sideband::second_order_coeffs;
use crate::steady_state::{solve_steady_state, SteadyState};

/// First-order effective parameters: the mechanical back-action enters the
/// probe equation as the complex self-energy C1, shifting the detuning by
/// Re(C1) and the damping by Im(C1).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EffectiveLinear {
    pub c1: Complex64,
    /// Delta' = Delta_L - g x_s - Re(C1) [s⁻¹].
    pub delta_prime: f64,
    /// gamma1' = gamma1 + Im(C1) [s⁻¹].
    pub gamma1_prime: f64,
    /// Total first-order frequency shift g x_s + Re(C1) [s⁻¹].
    pub shift: f64,
}

/// Second-order counterparts (C2, B) plus the inter-order shift.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EffectiveSecond {
    pub c2: Complex64,
    /// Delta'' = Delta_L - g x_s - Re(C2) [s⁻¹].
    pub delta_dprime: f64,
    /// gamma1'' = gamma1 + Im(C2) [s⁻¹].
    pub gamma1_dprime: f64,
    /// Constant drive term of the reduced second-order equation.
    pub b: Complex64,
    /// |Re(C2) - Re(C1)| [s⁻¹].
    pub shift2: f64,
}

pub fn effective_linear(
    cfg: &SystemConfig,
    ss: &SteadyState,
    epsilon: f64,
) -> Result<EffectiveLinear> {
    let co = first_order_coeffs(cfg, ss, epsilon);
    let g2n = cfg.hbar * cfg.g * cfg.g * ss.a1_s.norm_sqr();
    let den = co.det_plus * co.k + Complex64::new(0.0, g2n) * co.mu_plus.conj();
    let scale = (co.det_plus * co.k).norm() + g2n * co.mu_plus.norm();
    if den.norm() < 1e-30 * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::SingularDenominator);
    }
    let c1 = co.det_plus * g2n / den;
    Ok(EffectiveLinear {
        c1,
        delta_prime: cfg.delta_l - ss.beta - c1.re,
        gamma1_prime: cfg.gamma1 + c1.im,
        shift: ss.beta + c1.re,
    })
}

pub fn effective_second(
    cfg: &SystemConfig,
    ss: &SteadyState,
    lr: &LinearResponse,
    epsilon: f64,
) -> Result<EffectiveSecond> {
    let first = first_order_coeffs(cfg, ss, epsilon);
    let co = second_order_coeffs(cfg, ss, epsilon);
    let g = cfg.g;
    let g2n = cfg.hbar * g * g * ss.a1_s.norm_sqr();

    let den = co.det_plus * first.det_plus * co.k
        + Complex64::new(0.0, g2n) * first.det_plus * co.mu_plus.conj();
    let scale = (co.det_plus * first.det_plus * co.k).norm()
        + g2n * first.det_plus.norm() * co.mu_plus.norm();
    if den.norm() < 1e-30 * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::SingularDenominator);
    }

    let c2 = g2n * co.det_plus * first.det_plus / den;
    let b_inner = -g
        * g
        * ss.a1_s.norm_sqr()
        * co.mu_plus.conj()
        * first.mu_plus.conj()
        * lr.dx_plus
        * lr.dx_plus
        - Complex64::new(0.0, g)
            * co.det_plus
            * ss.a1_s.conj()
            * first.mu_plus.conj()
            * lr.dx_plus
            * lr.da1_plus;
    let b = Complex64::new(0.0, cfg.hbar * g * g) * ss.a1_s * b_inner / den
        + Complex64::new(0.0, g) * lr.dx_plus * lr.da1_plus;

    let c1 = effective_linear(cfg, ss, epsilon)?.c1;
    Ok(EffectiveSecond {
        c2,
        delta_dprime: cfg.delta_l - ss.beta - c2.re,
        gamma1_dprime: cfg.gamma1 + c2.im,
        b,
        shift2: (c2.re - c1.re).abs(),
    })
}

/// Frequency-shift diagnostics explaining where the loss-induced transparency
/// appears in the probe spectrum.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShiftReport {
    /// First-order shift g x_s + Re(C1), evaluated at the self-consistent
    /// dressed resonance [s⁻¹].
    pub shift: f64,
    /// |Re(C2) - Re(C1)| at probe-cavity resonance (eps = Delta_L) [s⁻¹].
    pub shift2: f64,
    /// Predicted off-resonance transparency detunings, -shift and +shift [s⁻¹].
    pub lit_detunings: [f64; 2],
    /// Probe detuning at which the first-order shift was evaluated [s⁻¹].
    pub reference_delta_p: f64,
    /// Whether the dressed-resonance condition Delta_P = -shift(Delta_P)
    /// was solved; false falls back to shift at the scan edge (zero coupling).
    pub self_consistent: bool,
}

/// Solve the dressed-resonance condition on the red side and report both
/// shifts. The probe sees the mechanically dressed cavity at resonance when
/// Delta_P = -(g x_s + Re C1(eps)), which is where the transparency minimum
/// relocates; the scan walks Delta_P in [-6 gamma1, -0.05 gamma1] and bisects
/// the first crossing from below.
pub fn lit_shift_report(cfg: &SystemConfig) -> Result<ShiftReport> {
    let ss = solve_steady_state(cfg)?;
    let shift_at = |delta_p: f64| -> Result<f64> {
        let eps = ProbeSetting::from_delta_p(delta_p, cfg.delta_l).epsilon;
        Ok(effective_linear(cfg, &ss, eps)?.shift)
    };

    let lo = -6.0 * cfg.gamma1;
    let hi = -0.05 * cfg.gamma1;
    let n = 121;
    let step = (hi - lo) / (n - 1) as f64;
    let mut crossing = None;
    let mut prev = lo + shift_at(lo)?;
    for i in 1..n {
        let dp = lo + step * i as f64;
        let f = dp + shift_at(dp)?;
        if prev < 0.0 && f >= 0.0 {
            crossing = Some((dp - step, dp));
            break;
        }
        prev = f;
    }

    let (shift, reference_delta_p, self_consistent) = match crossing {
        Some((mut a, mut b)) => {
            for _ in 0..80 {
                let mid = 0.5 * (a + b);
                if mid + shift_at(mid)? < 0.0 {
                    a = mid;
                } else {
                    b = mid;
                }
            }
            let dp_star = 0.5 * (a + b);
            (shift_at(dp_star)?, dp_star, true)
        }
        // no dressed resonance inside the scan: coupling too weak to move the
        // transparency off resonance (exactly zero shift for g = 0)
        None => (shift_at(hi)?, hi, false),
    };

    let eps_res = cfg.delta_l;
    let lr = linear_response(cfg, &ss, eps_res)?;
    let shift2 = effective_second(cfg, &ss, &lr, eps_res)?.shift2;

    Ok(ShiftReport {
        shift,
        shift2,
        lit_detunings: [-shift, shift],
        reference_delta_p,
        self_consistent,
    })
}
