//! Pursuit-evasion with a pursuer that senses the evader only on request,
//! under a finite sensing budget.
//!
//! The crate is organised bottom-up:
//!
//! - [`geom`], [`config`], [`payoff`]: planar primitives, game parameters and
//!   terminal payoff functions, all in the normalised frame where the
//!   pursuer's top speed is 1 and the evader's is `nu < 1`.
//! - [`strategies`]: sensing and motion policies as pure functions of each
//!   player's information.
//! - [`engine`]: event-exact simulation with closed-form capture detection.
//! - [`value`]: closed-form sensing counts, value-function bounds and the
//!   degradation metrics.
//! - [`verify`]: oracles and deviation searches that check the closed forms
//!   against the simulator.

pub mod config;
pub mod engine;
mod error;
pub mod geom;
pub mod payoff;
pub mod strategies;
pub mod value;
pub mod verify;

pub use error::{Error, Result};
