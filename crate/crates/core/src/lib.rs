//! Simulation and calibration toolkit for triply-resonant piezo-optomechanical
//! microwave-optical transducers.
//!
//! A transducer here is a photonic molecule (two evanescently coupled micro-rings)
//! whose optical supermodes are split by one acoustic overtone frequency, so that a
//! pump on one supermode converts microwave phonons into photons of the other.
//!
//! * [`model`]: device parameters, unit conversions and photon budget helpers.
//! * [`hybridize`]: supermode structure and pump-dressed coupling rates.
//! * [`sfg`]: generic signal-flow graphs, Mason's gain formula and a linear-solve check.
//! * [`response`]: closed-form transfer functions, efficiencies and bandwidths.
//! * [`quantumstats`]: thermal occupancy, added noise, pair rate and g2.
//! * [`timedomain`]: mean-field RK4 integration, pulsed pumping and lock-in detection.
//! * [`calibrate`]: least-squares recovery of device parameters from measured data.
//! * [`cli`]: configuration files and the command implementations behind the binary.
//!
//! All frequencies and rates are angular (rad/s) and all powers are in watts
//! unless a name says otherwise. Hz and dBm only appear at file boundaries.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod calibrate;
pub mod cli;
mod error;
pub mod hybridize;
pub mod model;
pub mod quantumstats;
pub mod response;
pub mod sfg;
pub mod timedomain;

pub use error::{Error, Result};
pub use hybridize::{EffectiveCouplings, Supermodes};
pub use model::{AcousticMode, DeviceParams, OpticalModeBare, PortLosses, PumpConfig, PumpConfiguration};
pub use response::{OperatingPoint, Spectrum};
