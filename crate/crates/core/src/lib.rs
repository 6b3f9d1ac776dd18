//! Throughput maximization for wireless powered sensor networks assisted by
//! a self-sustainable intelligent reflecting surface.
//!
//! The solvers are generic over [`Real`] (`f32` or `f64`); the aliases below
//! fix the scalar to `f64`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod allocation;
pub mod channel;
pub mod config;
pub mod error;
pub mod harness;
pub mod numerics;
pub mod phase;
pub mod policy;
mod scalar;

pub use error::{Error, Result};
pub use scalar::Real;

pub type ChannelSet = channel::ChannelSet<f64>;
pub type SystemConfig = config::SystemConfig<f64>;
pub type PhaseVector = phase::PhaseVector<f64>;
pub type PhaseSchedule = phase::PhaseSchedule<f64>;
pub type TimeAllocation = allocation::TimeAllocation<f64>;
pub type PolicySolution = policy::PolicySolution<f64>;
pub type FeasibilityReport = policy::FeasibilityReport<f64>;
