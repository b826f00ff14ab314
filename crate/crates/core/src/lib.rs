//! Performance toolkit for an underlay cognitive molecular-communication
//! system: two point transmitters and two fully-absorbing spherical receivers
//! of unequal radii in unbounded 3-D diffusion.
//!
//! - [`model`]: parameters, topology and derived geometry.
//! - [`hitting`]: closed-form hitting probabilities and slotted channel taps.
//! - [`sim`]: particle-based Brownian oracle.
//! - [`control`]: secondary-transmitter molecule budgeting.
//! - [`detection`]: exact bit-error probabilities and thresholds.
//!
//! ```
//! use mcvd_core::control::{transmit_budget, ControlParams, TrafficModel};
//! use mcvd_core::hitting::{channel_taps_for, SeriesControl};
//! use mcvd_core::{Link, MediumParams, Topology};
//!
//! # fn main() -> mcvd_core::Result<()> {
//! let topo = Topology::new([30., -10., 0.], [18., 10., 0.], [30., 10., 0.], [10., 10., 20.], 5., 5.)?;
//! let medium = MediumParams::new(100.0, 0.0, 1.0)?;
//! let taps = channel_taps_for(&topo, &medium, Link::Secondary, Link::Primary, 20, &SeriesControl::default())?;
//! let schedule = transmit_budget(&taps, &TrafficModel::new(0.5, 0.5)?, &ControlParams::new(300, 300, 5.0)?, 20)?;
//! assert_eq!(schedule.u_s.len(), 20);
//! # Ok(())
//! # }
//! ```

pub mod control;
pub mod detection;
pub mod erf;
pub mod error;
pub mod hitting;
pub mod model;
pub mod sim;

pub use error::{Error, Result};
pub use model::{Link, MediumParams, Point, Topology, TwoFarGeometry};
