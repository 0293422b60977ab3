//! Simulator for a compound optomechanical system: two coupled optical
//! resonators, one of them carrying a mechanical mode and a pump/probe drive,
//! the other a tunable extra loss.
//!
//! The crate computes, from one [`config::SystemConfig`]:
//!
//! - the self-consistent steady state ([`steady_state`]),
//! - purely optical transmission, turning point, supermodes and the
//!   exceptional point ([`optical`]),
//! - first-order probe transmission and group delay ([`omit`]),
//! - second-order sideband efficiency ([`sideband`]),
//! - effective detuning/damping diagnostics ([`effective`]),
//! - a nonlinear time-domain integration + demodulation oracle that validates
//!   every perturbative formula without its assumptions ([`oracle`]),
//! - a deterministic sweep engine with CSV/JSON emission and checked-in
//!   figure recipes ([`sweep`], [`figures`]).
//!
//! Grid evaluation parallelizes through rayon behind the default `parallel`
//! feature; `sweep::run_sweep_serial` is the sequential fallback and produces
//! bit-identical output.
//!
//! ```
//! use omitlab::omit::probe_transmission;
//! use omitlab::SystemConfig;
//!
//! // adding loss to the purely optical resonator opens a transparency
//! // window; at three times the intrinsic loss the -3 MHz probe goes dark
//! let mut cfg = SystemConfig::default();
//! cfg.gamma_tip = 3.0 * cfg.gamma1;
//! let response = probe_transmission(&cfg, -3.0e6).unwrap();
//! assert!(response.transmission < 1e-3);
//!
//! // while the same probe without tip loss transmits strongly
//! cfg.gamma_tip = 0.0;
//! assert!(probe_transmission(&cfg, -3.0e6).unwrap().transmission > 0.3);
//! ```

#![cfg_attr(test, allow(clippy::field_reassign_with_default))]

pub mod config;
pub mod effective;
pub mod error;
pub mod figures;
pub mod omit;
pub mod optical;
pub mod oracle;
pub mod sideband;
pub mod steady_state;
pub mod sweep;

#[cfg(test)]
mod testutil;

pub use config::{drive_amplitudes, load_config, CarrierConvention, ProbeSetting, SystemConfig};
pub use error::{Error, Result};
pub use steady_state::{solve_steady_state, SteadyState};
