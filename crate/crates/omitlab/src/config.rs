//! System configuration: physical constants, unit resolution, and drive amplitudes.
//!
//! All rate-like quantities are stored as angular frequencies in s⁻¹. In the
//! configuration document, frequency-family keys accept three forms:
//!
//! ```toml
//! gamma1 = 6.43                              # plain number, units of 1e6 s^-1
//! omega_m = { value = 23.4, angular = "2pi" }  # 1e6 s^-1 with a 2pi multiplier
//! Delta_L = { raw = 1.47026536580742e8 }       # raw s^-1, exact round-trip form
//! ```
//!
//! The `carrier` flag ("plain" | "angular") records how the bare-number loss
//! family (gamma1, gamma2, gamma_tip, J, Gamma_m) is interpreted: "angular"
//! multiplies those plain numbers by 2π for sensitivity checks. Default "plain".

use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

use crate::error::{Error, Result};

/// Reduced Planck constant [J·s].
pub const HBAR: f64 = 1.0545718e-34;

/// Document frequency unit: plain numbers are multiples of 1e6 s⁻¹.
pub const FREQ_UNIT: f64 = 1e6;

/// How bare-number loss rates in the document are converted to s⁻¹.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CarrierConvention {
    /// `6.43` means 6.43e6 s⁻¹.
    #[default]
    Plain,
    /// `6.43` means 2π × 6.43e6 s⁻¹.
    Angular,
}

/// All physical constants and rates of the compound system, resolved to SI.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SystemConfig {
    /// Intrinsic optical loss of the left (optomechanical) resonator [s⁻¹].
    pub gamma1: f64,
    /// Intrinsic optical loss of the right (purely optical) resonator [s⁻¹].
    pub gamma2: f64,
    /// Tip-induced additional loss on the right resonator [s⁻¹, >= 0].
    pub gamma_tip: f64,
    /// Inter-resonator coupling strength [s⁻¹].
    pub j: f64,
    /// Optical resonance frequency [s⁻¹].
    pub omega_c: f64,
    /// Mechanical frequency [s⁻¹].
    pub omega_m: f64,
    /// Effective mechanical mass [kg].
    pub m: f64,
    /// Mechanical damping rate [s⁻¹].
    pub gamma_m: f64,
    /// Resonator radius [m]; used only to derive `g`.
    pub r: f64,
    /// Optomechanical coupling [s⁻¹ per meter]; `omega_c / r` unless explicit.
    pub g: f64,
    /// Pump power [W].
    pub p_l: f64,
    /// Probe power [W].
    pub p_in: f64,
    /// Pump-cavity detuning omega_c - omega_L [s⁻¹].
    pub delta_l: f64,
    /// Reduced Planck constant [J·s].
    pub hbar: f64,
    /// Carrier convention used when the document was loaded.
    pub carrier: CarrierConvention,
}

impl Default for SystemConfig {
    /// Reference operating point of the compound system.
    ///
    /// gamma_c = 6.43e6 s⁻¹, J = 2 gamma_c, omega_m = 2π × 23.4e6 s⁻¹,
    /// omega_c = 193e12 s⁻¹, m = 5e-11 kg, Gamma_m = 0.24e6 s⁻¹,
    /// R = 34.5 μm, g = omega_c/R, P_L = 1 mW, P_in = 0.0025 P_L,
    /// Delta_L = omega_m (red-detuned pump).
    fn default() -> Self {
        let omega_c = 193e12;
        let omega_m = TAU * 23.4e6;
        let r = 34.5e-6;
        SystemConfig {
            gamma1: 6.43e6,
            gamma2: 6.43e6,
            gamma_tip: 0.0,
            j: 12.86e6,
            omega_c,
            omega_m,
            m: 5e-11,
            gamma_m: 0.24e6,
            r,
            g: omega_c / r,
            p_l: 1e-3,
            p_in: 0.0025e-3,
            delta_l: omega_m,
            hbar: HBAR,
            carrier: CarrierConvention::Plain,
        }
    }
}

impl SystemConfig {
    /// Total loss of the right resonator, gamma2 + gamma_tip.
    pub fn gamma2_total(&self) -> f64 {
        self.gamma2 + self.gamma_tip
    }

    /// Check every physical bound; returns the first violation.
    pub fn validate(&self) -> Result<()> {
        let positive: [(&str, f64); 8] = [
            ("gamma1", self.gamma1),
            ("gamma2", self.gamma2),
            ("J", self.j),
            ("omega_m", self.omega_m),
            ("omega_c", self.omega_c),
            ("m", self.m),
            ("Gamma_m", self.gamma_m),
            ("hbar", self.hbar),
        ];
        for (field, v) in positive {
            if !v.is_finite() || v <= 0.0 {
                return Err(constraint(field, v, "must be finite and > 0"));
            }
        }
        let nonneg: [(&str, f64); 3] = [
            ("gamma_tip", self.gamma_tip),
            ("P_L", self.p_l),
            ("P_in", self.p_in),
        ];
        for (field, v) in nonneg {
            if !v.is_finite() || v < 0.0 {
                return Err(constraint(field, v, "must be finite and >= 0"));
            }
        }
        if !self.r.is_finite() || self.r <= 0.0 {
            return Err(constraint("R", self.r, "must be finite and > 0"));
        }
        if !self.g.is_finite() || !self.delta_l.is_finite() {
            return Err(constraint("g/Delta_L", self.g, "must be finite"));
        }
        Ok(())
    }

    /// Canonical document form; `load_config` of the output reproduces `self`
    /// field-identically (frequencies written in exact `{ raw = ... }` form).
    pub fn to_document(&self) -> String {
        let mut out = String::new();
        let carrier = match self.carrier {
            CarrierConvention::Plain => "plain",
            CarrierConvention::Angular => "angular",
        };
        out.push_str(&format!("carrier = \"{carrier}\"\n"));
        for (key, v) in [
            ("gamma1", self.gamma1),
            ("gamma2", self.gamma2),
            ("gamma_tip", self.gamma_tip),
            ("J", self.j),
            ("omega_c", self.omega_c),
            ("omega_m", self.omega_m),
            ("Gamma_m", self.gamma_m),
            ("Delta_L", self.delta_l),
        ] {
            out.push_str(&format!("{key} = {{ raw = {} }}\n", fmt_f64(v)));
        }
        for (key, v) in [
            ("m", self.m),
            ("R", self.r),
            ("g", self.g),
            ("P_L", self.p_l),
            ("P_in", self.p_in),
            ("hbar", self.hbar),
        ] {
            out.push_str(&format!("{key} = {}\n", fmt_f64(v)));
        }
        out
    }

    /// Hex SHA-256 of the canonical document (sweep provenance).
    pub fn content_hash(&self) -> String {
        use sha2::{Digest, Sha256};
        let digest = Sha256::digest(self.to_document().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Assign a raw-SI value to the config field named by `path`
    /// (document key names). Used by the sweep axis driver.
    pub fn set_param(&mut self, path: &str, value: f64) -> Result<()> {
        match path {
            "gamma1" => self.gamma1 = value,
            "gamma2" => self.gamma2 = value,
            "gamma_tip" => self.gamma_tip = value,
            "J" => self.j = value,
            "omega_c" => self.omega_c = value,
            "omega_m" => self.omega_m = value,
            "m" => self.m = value,
            "Gamma_m" => self.gamma_m = value,
            "R" => self.r = value,
            "g" => self.g = value,
            "P_L" => self.p_l = value,
            "P_in" => self.p_in = value,
            "Delta_L" => self.delta_l = value,
            other => {
                return Err(Error::InvalidSpec(format!(
                    "unknown parameter path `{other}`"
                )))
            }
        }
        Ok(())
    }
}

/// Write an f64 so that TOML parsing recovers it bit-exactly.
fn fmt_f64(v: f64) -> String {
    if v == v.trunc() && v.abs() < 1e15 {
        format!("{v:.1}")
    } else {
        // 17 significant digits round-trip any finite f64
        format!("{v:.16e}")
    }
}

fn constraint(field: &str, value: f64, bound: &str) -> Error {
    Error::Constraint {
        field: field.to_string(),
        message: format!("{bound} (got {value:e})"),
    }
}

/// Probe placement relative to pump and cavity.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeSetting {
    /// Probe-pump detuning omega_P - omega_L [s⁻¹].
    pub epsilon: f64,
    /// Probe-cavity detuning, epsilon - Delta_L by construction [s⁻¹].
    pub delta_p: f64,
}

impl ProbeSetting {
    pub fn from_epsilon(epsilon: f64, delta_l: f64) -> Self {
        ProbeSetting {
            epsilon,
            delta_p: epsilon - delta_l,
        }
    }

    pub fn from_delta_p(delta_p: f64, delta_l: f64) -> Self {
        // derive delta_p back from the rounded sum so the identity
        // delta_p == epsilon - delta_l is exact, not one ulp off
        let epsilon = delta_p + delta_l;
        ProbeSetting {
            epsilon,
            delta_p: epsilon - delta_l,
        }
    }
}

/// Pump and probe drive amplitudes from the corresponding powers:
/// eps = sqrt(2 gamma_c P / (hbar omega_c)), with gamma_c = gamma1 and the
/// pump/probe carriers both approximated by omega_c (|eps|, Delta_L << omega_c).
pub fn drive_amplitudes(cfg: &SystemConfig) -> (f64, f64) {
    let denom = cfg.hbar * cfg.omega_c;
    let eps_l = (2.0 * cfg.gamma1 * cfg.p_l / denom).sqrt();
    let eps_p = (2.0 * cfg.gamma1 * cfg.p_in / denom).sqrt();
    (eps_l, eps_p)
}

/// Keys of the frequency family (document values in 1e6 s⁻¹ unless marked).
const FREQ_KEYS: &[&str] = &[
    "gamma1",
    "gamma2",
    "gamma_tip",
    "J",
    "omega_c",
    "omega_m",
    "Gamma_m",
    "Delta_L",
];
/// Subset of FREQ_KEYS the carrier flag applies to (loss rates quoted as bare MHz numbers).
const CARRIER_KEYS: &[&str] = &["gamma1", "gamma2", "gamma_tip", "J", "Gamma_m"];
/// Raw-SI keys (W, kg, m, J·s, s⁻¹/m).
const RAW_KEYS: &[&str] = &["m", "R", "g", "P_L", "P_in", "hbar"];

/// Parse a configuration document (TOML). Missing keys keep the defaults;
/// `g` defaults to omega_c/R, `Delta_L` to omega_m and `P_in` to 0.0025·P_L
/// unless given explicitly.
pub fn load_config(text: &str) -> Result<SystemConfig> {
    let table: toml::Table = text
        .parse()
        .map_err(|e: toml::de::Error| Error::Parse(e.to_string()))?;
    apply_overrides(SystemConfig::default(), &table)
}

/// Apply a parsed override table on top of `base`.
pub fn apply_overrides(base: SystemConfig, table: &toml::Table) -> Result<SystemConfig> {
    let mut cfg = base;

    let carrier = match table.get("carrier") {
        None => cfg.carrier,
        Some(toml::Value::String(s)) => match s.as_str() {
            "plain" => CarrierConvention::Plain,
            "angular" => CarrierConvention::Angular,
            other => {
                return Err(Error::Parse(format!(
                    "carrier must be \"plain\" or \"angular\", got \"{other}\""
                )))
            }
        },
        Some(v) => return Err(Error::Parse(format!("carrier must be a string, got {v}"))),
    };
    cfg.carrier = carrier;

    let mut g_explicit = false;
    let mut delta_l_explicit = false;
    let mut p_in_explicit = false;

    for (key, value) in table {
        let key = key.as_str();
        if key == "carrier" {
            continue;
        }
        if FREQ_KEYS.contains(&key) {
            let scale_2pi = CARRIER_KEYS.contains(&key) && carrier == CarrierConvention::Angular;
            let resolved = resolve_frequency(key, value, scale_2pi)?;
            cfg.set_param(key, resolved)
                .expect("FREQ_KEYS are valid paths");
            if key == "Delta_L" {
                delta_l_explicit = true;
            }
        } else if RAW_KEYS.contains(&key) {
            let v = plain_number(key, value)?;
            match key {
                "m" => cfg.m = v,
                "R" => cfg.r = v,
                "g" => {
                    cfg.g = v;
                    g_explicit = true;
                }
                "P_L" => cfg.p_l = v,
                "P_in" => {
                    cfg.p_in = v;
                    p_in_explicit = true;
                }
                "hbar" => cfg.hbar = v,
                _ => unreachable!(),
            }
        } else {
            return Err(Error::Parse(format!("unknown configuration key `{key}`")));
        }
    }

    if !g_explicit {
        cfg.g = cfg.omega_c / cfg.r;
    }
    if !delta_l_explicit && table.contains_key("omega_m") {
        cfg.delta_l = cfg.omega_m;
    }
    if !p_in_explicit && table.contains_key("P_L") {
        cfg.p_in = 0.0025 * cfg.p_l;
    }

    cfg.validate()?;
    Ok(cfg)
}

/// Accepts `x` (×1e6, carrier-scaled), `{ value = x, angular = "2pi" }`
/// (×1e6×2π), or `{ raw = x }` (s⁻¹ as-is).
fn resolve_frequency(key: &str, value: &toml::Value, carrier_2pi: bool) -> Result<f64> {
    match value {
        toml::Value::Float(x) => Ok(scaled(*x, carrier_2pi)),
        toml::Value::Integer(x) => Ok(scaled(*x as f64, carrier_2pi)),
        toml::Value::Table(t) => {
            if let Some(raw) = t.get("raw") {
                return plain_number(key, raw);
            }
            let v = t
                .get("value")
                .ok_or_else(|| Error::Parse(format!("{key}: table form needs `value` or `raw`")))?;
            let v = plain_number(key, v)?;
            match t.get("angular") {
                None => Ok(scaled(v, carrier_2pi)),
                Some(toml::Value::String(s)) if s == "2pi" => Ok(v * FREQ_UNIT * TAU),
                Some(other) => Err(Error::Parse(format!(
                    "{key}: angular marker must be \"2pi\", got {other}"
                ))),
            }
        }
        other => Err(Error::Parse(format!(
            "{key}: expected a number or table, got {other}"
        ))),
    }
}

fn scaled(v: f64, carrier_2pi: bool) -> f64 {
    let base = v * FREQ_UNIT;
    if carrier_2pi {
        base * TAU
    } else {
        base
    }
}

fn plain_number(key: &str, value: &toml::Value) -> Result<f64> {
    match value {
        toml::Value::Float(x) => Ok(*x),
        toml::Value::Integer(x) => Ok(*x as f64),
        other => Err(Error::Parse(format!(
            "{key}: expected a number, got {other}"
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_gives_defaults() {
        let cfg = load_config("").unwrap();
        assert_eq!(cfg.gamma1, 6.43e6);
        assert_eq!(cfg.gamma2, 6.43e6);
        assert_eq!(cfg.j, 12.86e6);
        assert_eq!(cfg.omega_m, TAU * 23.4e6);
        assert_eq!(cfg.m, 5e-11);
        assert_eq!(cfg.gamma_m, 0.24e6);
        assert_eq!(cfg.p_l, 1e-3);
        assert_eq!(cfg.delta_l, cfg.omega_m);
        assert_eq!(cfg.g, cfg.omega_c / cfg.r);
    }

    #[test]
    fn negative_gamma_tip_is_a_constraint_error() {
        let err = load_config("gamma_tip = -1.0").unwrap_err();
        match err {
            Error::Constraint { field, .. } => assert_eq!(field, "gamma_tip"),
            other => panic!("expected constraint error, got {other:?}"),
        }
    }

    #[test]
    fn radius_derives_coupling() {
        let cfg = load_config("R = 34.5e-6").unwrap();
        assert_eq!(cfg.g, cfg.omega_c / 34.5e-6);
        // explicit g wins
        let cfg = load_config("R = 34.5e-6\ng = 1.0e18").unwrap();
        assert_eq!(cfg.g, 1.0e18);
    }

    #[test]
    fn frequency_forms_resolve() {
        let cfg = load_config("gamma_tip = 19.29").unwrap();
        assert_eq!(cfg.gamma_tip, 19.29e6);
        let cfg = load_config("omega_m = { value = 23.4, angular = \"2pi\" }").unwrap();
        assert_eq!(cfg.omega_m, TAU * 23.4e6);
        let cfg = load_config("Delta_L = { raw = 1.5e8 }").unwrap();
        assert_eq!(cfg.delta_l, 1.5e8);
    }

    #[test]
    fn angular_carrier_scales_loss_family_only() {
        let cfg = load_config(
            "carrier = \"angular\"\ngamma1 = 6.43\nomega_m = { value = 23.4, angular = \"2pi\" }",
        )
        .unwrap();
        assert_eq!(cfg.gamma1, TAU * 6.43e6);
        assert_eq!(cfg.omega_m, TAU * 23.4e6);
    }

    #[test]
    fn unknown_key_rejected() {
        assert!(matches!(
            load_config("gamma_typo = 1.0"),
            Err(Error::Parse(_))
        ));
    }

    #[test]
    fn document_round_trip_is_field_identical() {
        let mut cfg = SystemConfig::default();
        cfg.gamma_tip = 19.2901234e6;
        cfg.delta_l = 1.4702653658074216e8;
        cfg.p_in = 1e-9;
        let reloaded = load_config(&cfg.to_document()).unwrap();
        assert_eq!(cfg, reloaded);
    }

    #[test]
    fn drive_amplitude_values() {
        let cfg = SystemConfig::default();
        let (eps_l, eps_p) = drive_amplitudes(&cfg);
        // frozen from the re-derivation script
        assert!((eps_l - 794883995622.3663).abs() / eps_l < 1e-12);
        assert!((eps_p / eps_l - 0.05).abs() < 1e-12);

        // eps_L at omega_c = 2pi * 193 THz, gamma_c = 6.43e6, P_L = 1 mW
        let mut cfg = SystemConfig::default();
        cfg.omega_c = TAU * 193e12;
        let (eps_l, _) = drive_amplitudes(&cfg);
        assert!((eps_l - 317112833868.1893).abs() / eps_l < 1e-12);

        // zero power
        let mut cfg = SystemConfig::default();
        cfg.p_l = 0.0;
        assert_eq!(drive_amplitudes(&cfg).0, 0.0);

        // quadrupling P_in doubles eps_P
        let mut cfg4 = SystemConfig::default();
        cfg4.p_in *= 4.0;
        let (_, e1) = drive_amplitudes(&SystemConfig::default());
        let (_, e4) = drive_amplitudes(&cfg4);
        assert!((e4 - 2.0 * e1).abs() / e4 < 1e-14);
    }

    #[test]
    fn probe_setting_identity() {
        let delta_l = TAU * 23.4e6;
        for dp in [-11e6, -3e6, 0.0, 3e6, 11e6] {
            let p = ProbeSetting::from_delta_p(dp, delta_l);
            assert_eq!(p.delta_p, p.epsilon - delta_l);
        }
        let p = ProbeSetting::from_epsilon(1.5e8, delta_l);
        assert_eq!(p.delta_p, 1.5e8 - delta_l);
    }
}
