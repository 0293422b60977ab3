//! Self-consistent steady state of the pumped compound system.
//!
//! The mechanical displacement obeys x_s = (hbar g / m omega_m^2) |a1_s|^2
//! while a1_s itself depends on beta = g x_s through the shifted detuning,
//! so beta solves a real cubic. With D2 = i Delta_L + gamma2 + gamma_tip and
//! D1(beta) = i (Delta_L - beta) + gamma1:
//!
//!   beta * |D1(beta) D2 + J^2|^2 = K eps_L^2 |D2|^2,   K = hbar g^2 / (m omega_m^2)
//!
//! Both real and imaginary parts of D1 D2 + J^2 are linear in beta, which
//! gives the cubic coefficients returned by [`steady_state_cubic`].

use num_complex::Complex64;

use crate::config::{drive_amplitudes, SystemConfig};
use crate::error::{Error, Result};

/// Denominator floor for the relative self-consistency residual.
const RESIDUAL_FLOOR: f64 = 1e-30;

/// Steady operating point about which the perturbative expansion is taken.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SteadyState {
    /// Mechanical displacement [m].
    pub x_s: f64,
    /// Intracavity amplitude of the optomechanical resonator [sqrt(photon)].
    pub a1_s: Complex64,
    /// Intracavity amplitude of the purely optical resonator [sqrt(photon)].
    pub a2_s: Complex64,
    /// g * x_s [s⁻¹]; smallest non-negative root of the steady-state cubic.
    pub beta: f64,
    /// Relative self-consistency error |beta - K |a1_s|^2| / max(beta, 1e-30).
    pub residual: f64,
    /// Three non-negative real roots were found; the lowest branch is returned.
    pub bistable: bool,
}

/// Coefficients `[c0, c1, c2, c3]` of the real cubic in beta,
/// c0 + c1 b + c2 b^2 + c3 b^3 = 0, whose roots are the self-consistent
/// beta = g x_s values.
pub fn steady_state_cubic(cfg: &SystemConfig, eps_l: f64) -> [f64; 4] {
    let g2t = cfg.gamma2_total();
    let dl = cfg.delta_l;
    let k = cfg.hbar * cfg.g * cfg.g / (cfg.m * cfg.omega_m * cfg.omega_m);

    // Re(D1 D2 + J^2) = p0 + p1 b, Im = q0 + q1 b
    let p0 = cfg.gamma1 * g2t - dl * dl + cfg.j * cfg.j;
    let p1 = dl;
    let q0 = (cfg.gamma1 + g2t) * dl;
    let q1 = -g2t;
    let drive = k * eps_l * eps_l * (dl * dl + g2t * g2t);

    [
        -drive,
        p0 * p0 + q0 * q0,
        2.0 * (p0 * p1 + q0 * q1),
        p1 * p1 + q1 * q1,
    ]
}

/// Intracavity amplitudes at a given beta (both lines of the steady solution).
fn amplitudes_at(cfg: &SystemConfig, eps_l: f64, beta: f64) -> (Complex64, Complex64) {
    let d2 = Complex64::new(cfg.gamma2_total(), cfg.delta_l);
    let d1 = Complex64::new(cfg.gamma1, cfg.delta_l - beta);
    let den = d1 * d2 + cfg.j * cfg.j;
    (eps_l * d2 / den, Complex64::new(0.0, cfg.j) * eps_l / den)
}

/// Solve the steady state; picks the smallest non-negative real root of the
/// cubic (the branch continuously connected to beta = 0 as eps_L -> 0) and
/// flags bistability when three such roots exist.
pub fn solve_steady_state(cfg: &SystemConfig) -> Result<SteadyState> {
    cfg.validate()?;
    let (eps_l, _) = drive_amplitudes(cfg);
    let coeffs = steady_state_cubic(cfg, eps_l);
    let roots = real_cubic_roots(coeffs);

    let scale = roots.iter().fold(1.0_f64, |m, r| m.max(r.abs()));
    let mut nonneg: Vec<f64> = roots
        .iter()
        .copied()
        .filter(|&r| r >= -1e-9 * scale)
        .map(|r| r.max(0.0))
        .collect();
    nonneg.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let Some(&root) = nonneg.first() else {
        return Err(Error::NoPhysicalRoot);
    };
    let bistable = nonneg.len() == 3;

    // polish on the fixed-point map f(b) = K |a1_s(b)|^2 - b
    let k = cfg.hbar * cfg.g * cfg.g / (cfg.m * cfg.omega_m * cfg.omega_m);
    let mut beta = root;
    for _ in 0..3 {
        let (a1, _) = amplitudes_at(cfg, eps_l, beta);
        let f = k * a1.norm_sqr() - beta;
        let h = 1e-7 * beta.max(1e-3);
        let (a1p, _) = amplitudes_at(cfg, eps_l, beta + h);
        let fp = (k * a1p.norm_sqr() - (beta + h) - f) / h;
        if fp.abs() > 0.0 {
            let step = f / fp;
            if step.is_finite() {
                beta = (beta - step).max(0.0);
            }
        }
    }

    let (a1_s, a2_s) = amplitudes_at(cfg, eps_l, beta);
    let n1 = a1_s.norm_sqr();
    let x_s = cfg.hbar * cfg.g * n1 / (cfg.m * cfg.omega_m * cfg.omega_m);
    let residual = (beta - k * n1).abs() / beta.max(RESIDUAL_FLOOR);

    Ok(SteadyState {
        x_s,
        a1_s,
        a2_s,
        beta,
        residual,
        bistable,
    })
}

/// Real roots of c0 + c1 x + c2 x^2 + c3 x^3, Newton-polished.
/// Degenerate leading coefficients fall back to quadratic/linear.
pub(crate) fn real_cubic_roots(c: [f64; 4]) -> Vec<f64> {
    let [c0, c1, c2, c3] = c;
    let scale = c.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if scale == 0.0 {
        return vec![];
    }
    if c3.abs() <= 1e-300 * scale {
        return real_quadratic_roots(c0, c1, c2);
    }

    // monic: x^3 + a x^2 + b x + d
    let a = c2 / c3;
    let b = c1 / c3;
    let d = c0 / c3;
    // depressed: y^3 + p y + q, x = y - a/3
    let p = b - a * a / 3.0;
    let q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + d;
    let shift = -a / 3.0;

    let mut roots = Vec::with_capacity(3);
    let disc = -4.0 * p * p * p - 27.0 * q * q;
    if disc > 0.0 {
        // three distinct real roots (trigonometric form, p < 0 here)
        let m = 2.0 * (-p / 3.0).sqrt();
        let arg = (3.0 * q / (p * m)).clamp(-1.0, 1.0);
        let theta = arg.acos() / 3.0;
        for k in 0..3 {
            let y = m * (theta - std::f64::consts::TAU * k as f64 / 3.0).cos();
            roots.push(y + shift);
        }
    } else {
        // one real root (Cardano)
        let half_q = q / 2.0;
        let r = (half_q * half_q + p * p * p / 27.0).max(0.0).sqrt();
        let u = (-half_q + r).cbrt();
        let v = (-half_q - r).cbrt();
        roots.push(u + v + shift);
    }

    for root in &mut roots {
        *root = newton_polish(c, *root);
    }
    roots.sort_by(|x, y| x.partial_cmp(y).unwrap());
    roots.dedup_by(|x, y| (*x - *y).abs() <= 1e-12 * (x.abs() + y.abs() + 1e-300));
    roots
}

fn real_quadratic_roots(c0: f64, c1: f64, c2: f64) -> Vec<f64> {
    if c2 == 0.0 {
        if c1 == 0.0 {
            return vec![];
        }
        return vec![-c0 / c1];
    }
    let disc = c1 * c1 - 4.0 * c2 * c0;
    if disc < 0.0 {
        return vec![];
    }
    let s = disc.sqrt();
    let q = -0.5 * (c1 + c1.signum() * s);
    let mut roots = vec![q / c2];
    if q != 0.0 {
        roots.push(c0 / q);
    }
    roots.sort_by(|x, y| x.partial_cmp(y).unwrap());
    roots
}

fn newton_polish(c: [f64; 4], mut x: f64) -> f64 {
    for _ in 0..4 {
        let f = ((c[3] * x + c[2]) * x + c[1]) * x + c[0];
        let df = (3.0 * c[3] * x + 2.0 * c[2]) * x + c[1];
        if df == 0.0 {
            break;
        }
        let step = f / df;
        if !step.is_finite() {
            break;
        }
        x -= step;
        if step.abs() <= 1e-16 * x.abs() {
            break;
        }
    }
    x
}
