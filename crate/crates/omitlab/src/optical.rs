//! Purely optical response of the coupled resonators (mechanical coupling
//! ignored): transmission, loss-induced-transparency turning point, supermode
//! eigenfrequencies and the exceptional point.

use num_complex::Complex64;

use crate::config::SystemConfig;
use crate::error::{Error, Result};

/// Supermode eigenfrequencies of the coupled optical system.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModeSpectrum {
    pub omega_plus: Complex64,
    pub omega_minus: Complex64,
    /// |omega_plus - omega_minus| [s⁻¹].
    pub splitting: f64,
}

/// Complex transmission amplitude
/// t = 1 - 2 gamma1 (i D2 + gamma2 + gamma_tip) / ((i D1 + gamma1)(i D2 + gamma2 + gamma_tip) + J^2).
pub fn optical_amplitude(cfg: &SystemConfig, delta1: f64, delta2: f64) -> Complex64 {
    let d1 = Complex64::new(cfg.gamma1, delta1);
    let d2 = Complex64::new(cfg.gamma2_total(), delta2);
    Complex64::new(1.0, 0.0) - 2.0 * cfg.gamma1 * d2 / (d1 * d2 + cfg.j * cfg.j)
}

/// Transmission rate T = |t|^2.
pub fn optical_transmission(cfg: &SystemConfig, delta1: f64, delta2: f64) -> f64 {
    optical_amplitude(cfg, delta1, delta2).norm_sqr()
}

/// Loss value at which transmission turns from falling to rising.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TurningPoint {
    /// Complex turning-point condition; exactly the tip loss that zeroes the
    /// transmission amplitude when it happens to be real.
    pub gamma_complex: Complex64,
    /// Real part, reported as the physical turning point [s⁻¹].
    pub gamma_tp: f64,
    /// False when gamma_tp < 0: no physical turning point, transmission is
    /// monotonic in gamma_tip.
    pub physical: bool,
    /// Set when |Im| > 1e-2 gamma1: the estimate is approximate off resonance;
    /// use [`numeric_tp_scan`] instead.
    pub approximate: bool,
}

/// Turning-point position
/// gamma_tp = -(i D2 + gamma2) + (i D1 + gamma1) J^2 / (D1^2 + gamma1^2).
pub fn turning_point(cfg: &SystemConfig, delta1: f64, delta2: f64) -> TurningPoint {
    let gamma_complex = -Complex64::new(cfg.gamma2, delta2)
        + Complex64::new(cfg.gamma1, delta1) * cfg.j * cfg.j
            / (delta1 * delta1 + cfg.gamma1 * cfg.gamma1);
    let gamma_tp = gamma_complex.re;
    TurningPoint {
        gamma_complex,
        gamma_tp,
        physical: gamma_tp >= 0.0,
        approximate: gamma_complex.im.abs() > 1e-2 * cfg.gamma1,
    }
}

/// Eigenfrequencies of the coupled optical system (principal square root):
/// omega_pm = [(w1+w2) - i(g1+g2+gt)]/2 pm sqrt([(w1-w2) + i(g2+gt-g1)]^2 + 4J^2)/2.
pub fn supermode_frequencies(cfg: &SystemConfig, omega1: f64, omega2: f64) -> ModeSpectrum {
    let g2t = cfg.gamma2_total();
    let center = Complex64::new(omega1 + omega2, -(cfg.gamma1 + g2t)) * 0.5;
    let inner = Complex64::new(omega1 - omega2, g2t - cfg.gamma1);
    let radicand = inner * inner + 4.0 * cfg.j * cfg.j;
    let half_split = radicand.sqrt() * 0.5;
    ModeSpectrum {
        omega_plus: center + half_split,
        omega_minus: center - half_split,
        splitting: (2.0 * half_split).norm(),
    }
}

/// Closed-form exceptional point gamma_tip = gamma1 - gamma2 + 2J,
/// valid only for degenerate bare modes.
pub fn exceptional_point(cfg: &SystemConfig, omega1: f64, omega2: f64) -> Result<f64> {
    if omega1 != omega2 {
        return Err(Error::DetunedModes);
    }
    Ok(cfg.gamma1 - cfg.gamma2 + 2.0 * cfg.j)
}

/// Result of a numeric turning-point scan.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TpScan {
    /// gamma_tip of the refined interior transmission minimum [s⁻¹].
    pub gamma_at_min: f64,
    /// Transmission at that loss.
    pub t_min: f64,
}

/// Grid-scan transmission over gamma_tip, then golden-section refine the
/// bracketed interior minimum to ~1e-7 relative in gamma_tip.
pub fn numeric_tp_scan(
    cfg: &SystemConfig,
    delta1: f64,
    delta2: f64,
    gamma_tip_range: (f64, f64),
    n_points: usize,
) -> Result<TpScan> {
    let (lo, hi) = gamma_tip_range;
    if n_points < 3 {
        return Err(Error::InvalidSpec(format!(
            "numeric_tp_scan needs n_points >= 3, got {n_points}"
        )));
    }
    if lo.is_nan() || hi.is_nan() || lo < 0.0 || hi <= lo {
        return Err(Error::InvalidSpec(format!(
            "gamma_tip range must satisfy 0 <= lo < hi, got [{lo}, {hi}]"
        )));
    }

    let t_at = |gamma_tip: f64| {
        let mut c = cfg.clone();
        c.gamma_tip = gamma_tip;
        optical_transmission(&c, delta1, delta2)
    };

    let step = (hi - lo) / (n_points - 1) as f64;
    let grid: Vec<f64> = (0..n_points).map(|i| lo + step * i as f64).collect();
    let values: Vec<f64> = grid.iter().map(|&g| t_at(g)).collect();
    let i_min = values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .map(|(i, _)| i)
        .unwrap();
    if i_min == 0 || i_min == n_points - 1 {
        return Err(Error::NoInteriorMinimum { lo, hi });
    }

    // golden-section on the bracketing triple
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let (mut a, mut b) = (grid[i_min - 1], grid[i_min + 1]);
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let (mut f1, mut f2) = (t_at(x1), t_at(x2));
    while (b - a) > 1e-7 * (a.abs() + b.abs()).max(1e-9 * (hi - lo)) {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = t_at(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = t_at(x2);
        }
    }
    let gamma_at_min = 0.5 * (a + b);
    Ok(TpScan {
        gamma_at_min,
        t_min: t_at(gamma_at_min),
    })
}
