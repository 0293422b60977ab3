//! Independent verification path: fixed-step 4th-order integration of the
//! full nonlinear classical equations of motion, followed by harmonic
//! demodulation of the intracavity field. No perturbative assumptions.
//!
//! State (x, xdot, a1, a2) evolves under
//!
//!   xddot = -Gamma_m xdot - omega_m^2 x + (hbar g / m) |a1|^2
//!   a1dot = (-i Delta_L - gamma1 + i g x) a1 + i J a2 + eps_L + eps_P e^{-i eps t}
//!   a2dot = (-i Delta_L - gamma2 - gamma_tip) a2 + i J a1
//!
//! from all-zero initial conditions. The integration step is snapped so a
//! whole probe period holds an exact integer number of steps, and the trace
//! is stored at [`SAMPLES_PER_PERIOD`] samples per period; rectangle-rule
//! demodulation over whole periods is then exact for periodic tones.

use num_complex::Complex64;

use crate::config::{drive_amplitudes, ProbeSetting, SystemConfig};
use crate::error::{Error, Result};

/// Stored samples per probe period (kills aliases of harmonics 1..31 exactly).
pub const SAMPLES_PER_PERIOD: usize = 32;

/// Time-domain trajectory with demodulation metadata.
#[derive(Clone, Debug)]
pub struct TdTrace {
    /// Stored sample times [s]; uniform, strictly increasing.
    pub t: Vec<f64>,
    /// Mechanical displacement at the stored samples [m].
    pub x: Vec<f64>,
    /// Left-resonator field [sqrt(photon)].
    pub a1: Vec<Complex64>,
    /// Right-resonator field [sqrt(photon)].
    pub a2: Vec<Complex64>,
    /// Stored sample spacing [s].
    pub dt: f64,
    /// Probe-pump detuning used for the drive [s⁻¹].
    pub epsilon: f64,
    /// Successive demodulation windows agreed to 1e-4 relative.
    pub converged: bool,
    /// Start of the converged region [s].
    pub transient_end: f64,
}

#[derive(Clone, Copy)]
struct State {
    x: f64,
    v: f64,
    a1: Complex64,
    a2: Complex64,
}

/// Upper bound on the step for the stated resolution precondition.
pub fn max_step(cfg: &SystemConfig, epsilon: f64) -> f64 {
    0.05 / cfg
        .delta_l
        .abs()
        .max(cfg.omega_m)
        .max(epsilon.abs() + cfg.delta_l.abs())
}

/// Integrate the equations of motion to `t_final` with step at most `dt`
/// (snapped down so whole probe periods hold an integer number of steps).
pub fn integrate(cfg: &SystemConfig, epsilon: f64, t_final: f64, dt: f64) -> Result<TdTrace> {
    cfg.validate()?;
    let dt_max = max_step(cfg, epsilon);
    if dt > dt_max {
        return Err(Error::StepTooLarge { dt, max: dt_max });
    }
    if t_final.is_nan() || t_final <= 0.0 {
        return Err(Error::InvalidSpec(format!(
            "t_final must be > 0, got {t_final}"
        )));
    }

    let (eps_l, eps_p) = drive_amplitudes(cfg);
    let g = cfg.g;
    let rates = Rates {
        delta_l: cfg.delta_l,
        gamma1: cfg.gamma1,
        gamma2t: cfg.gamma2_total(),
        j: cfg.j,
        omega_m2: cfg.omega_m * cfg.omega_m,
        gamma_m: cfg.gamma_m,
        hbar_g_over_m: cfg.hbar * g / cfg.m,
        g,
        eps_l,
        eps_p,
        epsilon,
    };

    // step layout: integer steps per probe period, multiple of the store rate
    let (n_steps, dt_int, store_every) = if epsilon > 0.0 {
        let period = std::f64::consts::TAU / epsilon;
        let per_period =
            ((period / dt).ceil() as usize).div_ceil(SAMPLES_PER_PERIOD) * SAMPLES_PER_PERIOD;
        let n_periods = (t_final / period).ceil().max(1.0) as usize;
        (
            n_periods * per_period,
            period / per_period as f64,
            per_period / SAMPLES_PER_PERIOD,
        )
    } else {
        let n = (t_final / dt).ceil().max(1.0) as usize;
        (n, dt, (n / 200_000).max(1))
    };

    // blow-up guards relative to the driven steady scale
    let a_scale = (eps_l + eps_p) / cfg.gamma1.min(cfg.gamma2_total().max(cfg.gamma1));
    let a_limit = 1e12 * a_scale.max(1.0);
    let x_limit =
        1e12 * (cfg.hbar * g * a_scale * a_scale / (cfg.m * cfg.omega_m * cfg.omega_m)).max(1e-18);

    let n_stored = n_steps / store_every + 1;
    let mut t_out = Vec::with_capacity(n_stored);
    let mut x_out = Vec::with_capacity(n_stored);
    let mut a1_out = Vec::with_capacity(n_stored);
    let mut a2_out = Vec::with_capacity(n_stored);

    let mut s = State {
        x: 0.0,
        v: 0.0,
        a1: Complex64::new(0.0, 0.0),
        a2: Complex64::new(0.0, 0.0),
    };
    t_out.push(0.0);
    x_out.push(s.x);
    a1_out.push(s.a1);
    a2_out.push(s.a2);

    for i in 0..n_steps {
        let t = i as f64 * dt_int;
        s = rk4_step(&rates, t, dt_int, s);
        if (i + 1) % store_every == 0 {
            let t_next = (i + 1) as f64 * dt_int;
            t_out.push(t_next);
            x_out.push(s.x);
            a1_out.push(s.a1);
            a2_out.push(s.a2);
        }
        if i % 4096 == 0
            && (!s.x.is_finite()
                || !s.a1.re.is_finite()
                || s.a1.norm_sqr() > a_limit * a_limit
                || s.a2.norm_sqr() > a_limit * a_limit
                || s.x.abs() > x_limit)
        {
            return Err(Error::Diverged { at: t });
        }
    }

    let mut trace = TdTrace {
        t: t_out,
        x: x_out,
        a1: a1_out,
        a2: a2_out,
        dt: dt_int * store_every as f64,
        epsilon,
        converged: false,
        transient_end: 0.0,
    };
    detect_transient(cfg, &mut trace);
    Ok(trace)
}

struct Rates {
    delta_l: f64,
    gamma1: f64,
    gamma2t: f64,
    j: f64,
    omega_m2: f64,
    gamma_m: f64,
    hbar_g_over_m: f64,
    g: f64,
    eps_l: f64,
    eps_p: f64,
    epsilon: f64,
}

impl Rates {
    #[inline]
    fn deriv(&self, t: f64, s: &State) -> State {
        let drive = self.eps_l + self.eps_p * Complex64::from_polar(1.0, -self.epsilon * t);
        State {
            x: s.v,
            v: -self.gamma_m * s.v - self.omega_m2 * s.x + self.hbar_g_over_m * s.a1.norm_sqr(),
            a1: Complex64::new(-self.gamma1, -self.delta_l + self.g * s.x) * s.a1
                + Complex64::new(0.0, self.j) * s.a2
                + drive,
            a2: Complex64::new(-self.gamma2t, -self.delta_l) * s.a2
                + Complex64::new(0.0, self.j) * s.a1,
        }
    }
}

#[inline]
fn rk4_step(rates: &Rates, t: f64, h: f64, s: State) -> State {
    let add = |a: &State, k: &State, w: f64| State {
        x: a.x + w * k.x,
        v: a.v + w * k.v,
        a1: a.a1 + w * k.a1,
        a2: a.a2 + w * k.a2,
    };
    let k1 = rates.deriv(t, &s);
    let k2 = rates.deriv(t + 0.5 * h, &add(&s, &k1, 0.5 * h));
    let k3 = rates.deriv(t + 0.5 * h, &add(&s, &k2, 0.5 * h));
    let k4 = rates.deriv(t + h, &add(&s, &k3, h));
    State {
        x: s.x + h / 6.0 * (k1.x + 2.0 * k2.x + 2.0 * k3.x + k4.x),
        v: s.v + h / 6.0 * (k1.v + 2.0 * k2.v + 2.0 * k3.v + k4.v),
        a1: s.a1 + h / 6.0 * (k1.a1 + 2.0 * k2.a1 + 2.0 * k3.a1 + k4.a1),
        a2: s.a2 + h / 6.0 * (k1.a2 + 2.0 * k2.a2 + 2.0 * k3.a2 + k4.a2),
    }
}

/// Mark `transient_end` at the first pair of successive demodulation windows
/// that agree to 1e-4 relative (lower-bounded by 10/Gamma_m) and `converged`
/// from the last pair.
fn detect_transient(cfg: &SystemConfig, trace: &mut TdTrace) {
    if trace.epsilon <= 0.0 || trace.t.len() < 2 * SAMPLES_PER_PERIOD {
        return;
    }
    let period = std::f64::consts::TAU / trace.epsilon;
    // window of roughly one mechanical damping time, at least 10 periods
    let win_periods = ((1.0 / cfg.gamma_m / period).ceil() as usize).max(10);
    let win = win_periods * SAMPLES_PER_PERIOD;
    let total = trace.t.len() - 1;
    let n_windows = total / win;
    if n_windows < 2 {
        return;
    }

    let dc_scale = window_mean_abs(&trace.a1[total - win..total]);
    let demod_window = |w: usize| -> Complex64 {
        let start = w * win;
        harmonic_mean(
            &trace.t[start..start + win],
            &trace.a1[start..start + win],
            trace.epsilon,
            1,
        )
    };
    let agree = |a: Complex64, b: Complex64| -> bool {
        let diff = (a - b).norm();
        diff <= 1e-4 * a.norm().max(b.norm()) || diff <= 1e-12 * dc_scale.max(f64::MIN_POSITIVE)
    };

    let lower_bound = 10.0 / cfg.gamma_m;
    let mut prev = demod_window(0);
    let mut found = None;
    for w in 1..n_windows {
        let cur = demod_window(w);
        let start_time = trace.t[(w - 1) * win];
        if found.is_none() && agree(prev, cur) && start_time >= lower_bound {
            found = Some(start_time);
        }
        if w == n_windows - 1 {
            trace.converged = agree(prev, cur);
        }
        prev = cur;
    }
    trace.transient_end = found.unwrap_or(trace.t[(n_windows - 1) * win]);
}

fn window_mean_abs(a: &[Complex64]) -> f64 {
    a.iter().map(|z| z.norm()).sum::<f64>() / a.len() as f64
}

/// Rectangle-rule mean of a1(t) e^{+i n eps t} over the samples (half-open).
fn harmonic_mean(t: &[f64], a1: &[Complex64], epsilon: f64, harmonic: u32) -> Complex64 {
    let n = harmonic as f64;
    let sum: Complex64 = t
        .iter()
        .zip(a1)
        .map(|(&tk, &ak)| ak * Complex64::from_polar(1.0, n * epsilon * tk))
        .sum();
    sum / t.len() as f64
}

/// Coefficient of e^{-i n eps t} in a1(t): (1/T_w) integral of a1 e^{+i n eps t}
/// over the longest whole-period window after `transient_end`.
pub fn demodulate(trace: &TdTrace, epsilon: f64, harmonic: u32) -> Result<Complex64> {
    assert!(
        harmonic == 1 || harmonic == 2,
        "harmonic must be 1 or 2, got {harmonic}"
    );
    if epsilon.is_nan() || epsilon <= 0.0 {
        return Err(Error::WindowTooShort { periods: 0 });
    }
    let period = std::f64::consts::TAU / epsilon;
    let samples_per_period = (period / trace.dt).round() as usize;
    if samples_per_period == 0
        || ((samples_per_period as f64 * trace.dt) - period).abs() > 1e-9 * period
    {
        return Err(Error::InvalidSpec(format!(
            "trace sampling ({} s) does not tile the probe period ({} s)",
            trace.dt, period
        )));
    }

    let total = trace.t.len() - 1; // half-open sample count
    let usable_time = trace.t[total] - trace.transient_end + trace.dt;
    let periods = (usable_time / period).floor() as usize;
    let periods = periods.min(total / samples_per_period);
    if periods < 10 {
        return Err(Error::WindowTooShort { periods });
    }
    let win = periods * samples_per_period;
    let start = total + 1 - win;
    Ok(harmonic_mean(
        &trace.t[start..start + win],
        &trace.a1[start..start + win],
        epsilon,
        harmonic,
    ))
}

/// Demodulated observables from one full integration.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OraclePoint {
    /// Complex probe-transmission amplitude 1 - 2 gamma1 A1 / eps_P.
    pub t_p: Complex64,
    /// Transmission rate |t_p|^2.
    pub transmission: f64,
    /// Second-order efficiency |2 gamma1 A2 / eps_P|.
    pub eta: f64,
}

/// Integrate for 50 mechanical damping times at probe detuning Delta_P and
/// apply the input-output normalizations to the demodulated harmonics.
pub fn oracle_point(cfg: &SystemConfig, delta_p: f64) -> Result<OraclePoint> {
    let (_, eps_p) = drive_amplitudes(cfg);
    if eps_p == 0.0 {
        return Err(Error::Constraint {
            field: "P_in".into(),
            message: "oracle observables need a nonzero probe".into(),
        });
    }
    let epsilon = ProbeSetting::from_delta_p(delta_p, cfg.delta_l).epsilon;
    let t_final = 50.0 / cfg.gamma_m;
    let trace = integrate(cfg, epsilon, t_final, max_step(cfg, epsilon))?;
    let a1 = demodulate(&trace, epsilon, 1)?;
    let a2 = demodulate(&trace, epsilon, 2)?;
    let t_p = Complex64::new(1.0, 0.0) - 2.0 * cfg.gamma1 * a1 / eps_p;
    Ok(OraclePoint {
        t_p,
        transmission: t_p.norm_sqr(),
        eta: (2.0 * cfg.gamma1 * a2 / eps_p).norm(),
    })
}

/// (T_P, eta) from the time-domain path; see [`oracle_point`].
pub fn oracle_observables(cfg: &SystemConfig, delta_p: f64) -> Result<(f64, f64)> {
    let p = oracle_point(cfg, delta_p)?;
    Ok((p.transmission, p.eta))
}

/// [`oracle_point`] over a probe-detuning grid; integrations run on the rayon
/// pool when the `parallel` feature is on. Each trace is single-threaded and
/// deterministic, so the output does not depend on the schedule.
#[cfg(feature = "parallel")]
pub fn oracle_batch(cfg: &SystemConfig, delta_p_grid: &[f64]) -> Vec<Result<OraclePoint>> {
    use rayon::prelude::*;
    delta_p_grid
        .par_iter()
        .map(|&dp| oracle_point(cfg, dp))
        .collect()
}

#[cfg(not(feature = "parallel"))]
pub fn oracle_batch(cfg: &SystemConfig, delta_p_grid: &[f64]) -> Vec<Result<OraclePoint>> {
    oracle_batch_serial(cfg, delta_p_grid)
}

/// Sequential fallback of [`oracle_batch`].
pub fn oracle_batch_serial(cfg: &SystemConfig, delta_p_grid: &[f64]) -> Vec<Result<OraclePoint>> {
    delta_p_grid
        .iter()
        .map(|&dp| oracle_point(cfg, dp))
        .collect()
}
