//! Checked-in sweep recipes reproducing each figure dataset, plus the spec
//! document loader used by `sweep --spec` and `reproduce-figure`.
//!
//! A spec document is TOML:
//!
//! ```toml
//! observable = "T_P"        # optical_T | T_P | tau_g | eta | eig_real | eig_imag | eigenmodes | shift
//! delta_p = -11.0e6         # optional fixed probe detuning [s^-1]
//!
//! [axis1]                   # required; axis2 optional, same shape
//! param = "gamma_tip"       # config key or "Delta_P"
//! start = 0.0               # raw SI values
//! stop = 51.44e6
//! count = 161
//!
//! [config]                  # optional overrides in configuration-document units
//! P_L = 2.0e-3
//! ```

use crate::config::{apply_overrides, SystemConfig};
use crate::error::{Error, Result};
use crate::sweep::{AxisSpec, Observable, SweepSpec};

macro_rules! recipes {
    ($($id:literal),+ $(,)?) => {
        &[$(($id, include_str!(concat!("../specs/", $id, ".toml")))),+]
    };
}

/// (id, document) pairs for every shipped figure recipe.
pub const FIGURE_RECIPES: &[(&str, &str)] = recipes![
    "fig2a", "fig2b", "fig2cd", "fig3a", "fig3b", "fig3c", "fig3d", "fig3e", "fig3f", "fig4a",
    "fig4b", "fig5a", "fig5b", "fig5c", "fig5d",
];

/// Ids of all shipped figure recipes.
pub fn figure_ids() -> Vec<&'static str> {
    FIGURE_RECIPES.iter().map(|(id, _)| *id).collect()
}

/// Resolve a figure id into its sweep spec, on top of `base` configuration.
pub fn figure_spec(id: &str, base: &SystemConfig) -> Result<SweepSpec> {
    let doc = FIGURE_RECIPES
        .iter()
        .find(|(name, _)| *name == id)
        .map(|(_, doc)| *doc)
        .ok_or_else(|| {
            Error::InvalidSpec(format!(
                "unknown figure `{id}`; known: {}",
                figure_ids().join(", ")
            ))
        })?;
    parse_spec_document(doc, base)
}

/// Parse a sweep spec document on top of a base configuration.
pub fn parse_spec_document(text: &str, base: &SystemConfig) -> Result<SweepSpec> {
    let table: toml::Table = text
        .parse()
        .map_err(|e: toml::de::Error| Error::InvalidSpec(e.to_string()))?;

    let observable: Observable = match table.get("observable") {
        Some(v) => Observable::deserialize_from(v)?,
        None => return Err(Error::InvalidSpec("missing `observable`".into())),
    };
    let delta_p = match table.get("delta_p") {
        None => 0.0,
        Some(toml::Value::Float(x)) => *x,
        Some(toml::Value::Integer(x)) => *x as f64,
        Some(v) => {
            return Err(Error::InvalidSpec(format!(
                "delta_p must be a number, got {v}"
            )))
        }
    };
    let axis1 =
        parse_axis(&table, "axis1")?.ok_or_else(|| Error::InvalidSpec("missing [axis1]".into()))?;
    let axis2 = parse_axis(&table, "axis2")?;

    let config = match table.get("config") {
        None => base.clone(),
        Some(toml::Value::Table(overrides)) => apply_overrides(base.clone(), overrides)
            .map_err(|e| Error::InvalidSpec(format!("[config]: {e}")))?,
        Some(v) => {
            return Err(Error::InvalidSpec(format!(
                "[config] must be a table, got {v}"
            )))
        }
    };

    for key in table.keys() {
        if !["observable", "delta_p", "axis1", "axis2", "config"].contains(&key.as_str()) {
            return Err(Error::InvalidSpec(format!("unknown spec key `{key}`")));
        }
    }

    let spec = SweepSpec {
        observable,
        axis1,
        axis2,
        delta_p,
        config,
    };
    spec.validate()?;
    Ok(spec)
}

impl Observable {
    fn deserialize_from(v: &toml::Value) -> Result<Self> {
        let toml::Value::String(name) = v else {
            return Err(Error::InvalidSpec(format!(
                "observable must be a string, got {v}"
            )));
        };
        serde_json::from_value(serde_json::Value::String(name.clone()))
            .map_err(|_| Error::InvalidSpec(format!("unknown observable `{name}`")))
    }
}

fn parse_axis(table: &toml::Table, key: &str) -> Result<Option<AxisSpec>> {
    let Some(value) = table.get(key) else {
        return Ok(None);
    };
    let toml::Value::Table(t) = value else {
        return Err(Error::InvalidSpec(format!("[{key}] must be a table")));
    };
    let param = match t.get("param") {
        Some(toml::Value::String(s)) => s.clone(),
        _ => {
            return Err(Error::InvalidSpec(format!(
                "[{key}] needs a string `param`"
            )))
        }
    };
    let num = |field: &str| -> Result<f64> {
        match t.get(field) {
            Some(toml::Value::Float(x)) => Ok(*x),
            Some(toml::Value::Integer(x)) => Ok(*x as f64),
            _ => Err(Error::InvalidSpec(format!(
                "[{key}] needs numeric `{field}`"
            ))),
        }
    };
    let count = match t.get("count") {
        Some(toml::Value::Integer(x)) if *x >= 0 => *x as usize,
        _ => return Err(Error::InvalidSpec(format!("[{key}] needs integer `count`"))),
    };
    Ok(Some(AxisSpec {
        param,
        start: num("start")?,
        stop: num("stop")?,
        count,
    }))
}
