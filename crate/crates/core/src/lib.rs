//! Organisation modelling: structure, dynamics, simulation and
//! interlevel verification.

pub mod dynamics;
pub mod ident;
pub mod interlevel;
pub mod model;
pub mod property;
pub mod realization;
pub mod simulator;
pub mod state;
pub mod structure;
pub mod trace;
pub mod violation;
