//! Shared test support: a brute-force reference evaluator, random trace
//! and formula generators, and agreement drivers.

#![allow(dead_code)]

pub mod agreement;
pub mod gen;
pub mod metamorphic;
pub mod oracle;
