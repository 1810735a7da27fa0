//! Explicit self-similar blowup solutions of 3D incompressible MHD.
//!
//! The crate has two halves. The exact half evaluates the explicit family
//! ([`exact_fields`]) and certifies it in exact rational arithmetic
//! ([`timepoly`]). The numerical half maps the perturbation problem to
//! self-similar coordinates ([`selfsim`]), integrates the linearized system
//! on the unit cube ([`linsolver`]), measures decay and energy bookkeeping
//! ([`energy_monitor`]) and runs a desk-scale Nash–Moser iteration
//! ([`nash_moser`]). [`cli`] wires everything to the `mhd-blowup` binary.

pub mod cli;
pub mod energy_monitor;
pub mod error;
pub mod exact_fields;
pub mod linsolver;
pub mod nash_moser;
pub mod selfsim;
pub mod timepoly;

pub use error::{Error, Result};
