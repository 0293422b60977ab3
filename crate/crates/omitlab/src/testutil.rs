//! Shared helpers for unit tests: independent oracles and tolerance math.

use crate::config::SystemConfig;
use num_complex::Complex64;

/// |a - b| / max(|a|, |b|, 1e-300).
pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
}

/// Relative distance between complex values.
pub fn rel_err_c(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / a.norm().max(b.norm()).max(1e-300)
}

/// Independent fixed-point bisection for beta = K |a1_s(beta)|^2.
/// Expands the bracket upward from [0, 1] until the map goes negative.
pub fn bisect_beta(cfg: &SystemConfig, eps_l: f64) -> f64 {
    let k = cfg.hbar * cfg.g * cfg.g / (cfg.m * cfg.omega_m * cfg.omega_m);
    let map = |b: f64| {
        let d2 = Complex64::new(cfg.gamma2_total(), cfg.delta_l);
        let d1 = Complex64::new(cfg.gamma1, cfg.delta_l - b);
        let a1 = eps_l * d2 / (d1 * d2 + cfg.j * cfg.j);
        k * a1.norm_sqr() - b
    };
    if map(0.0) <= 0.0 {
        return 0.0;
    }
    let mut hi = 1.0;
    while map(hi) > 0.0 {
        hi *= 2.0;
        assert!(hi < 1e15, "bisection bracket blew up");
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if map(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Deterministic xorshift64* stream in [0, 1) for parameter draws.
pub struct DrawStream(u64);

impl DrawStream {
    pub fn new(seed: u64) -> Self {
        DrawStream(seed.max(1))
    }

    pub fn uniform(&mut self) -> f64 {
        self.0 ^= self.0 >> 12;
        self.0 ^= self.0 << 25;
        self.0 ^= self.0 >> 27;
        (self.0.wrapping_mul(0x2545F4914F6CDD1D) >> 11) as f64 / (1u64 << 53) as f64
    }

    /// Random config in a documented box around the reference parameters.
    pub fn config(&mut self) -> SystemConfig {
        let mut cfg = SystemConfig::default();
        cfg.gamma1 = 6.43e6 * (0.5 + self.uniform());
        cfg.gamma2 = 6.43e6 * (0.5 + self.uniform());
        cfg.gamma_tip = 6.43e6 * 8.0 * self.uniform();
        cfg.j = 12.86e6 * (0.5 + self.uniform());
        cfg.p_l = 1e-3 * (0.2 + 1.8 * self.uniform());
        cfg.p_in = cfg.p_l * 0.0025 * (0.1 + self.uniform());
        cfg.delta_l = cfg.omega_m * (0.8 + 0.4 * self.uniform());
        cfg
    }
}
