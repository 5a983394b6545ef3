//! Stochastic forward-backward Nash equilibrium seeking.
//!
//! The library covers the game model ([`game`]), proximal operators and the
//! residual metric ([`operators`]), one-sample and batched pseudogradient
//! estimators ([`sampling`]), five interchangeable iteration schemes
//! ([`algorithms`]), concrete test games ([`games`]) and a multi-seed
//! experiment harness ([`harness`]).

pub mod algorithms;
pub mod cli;
pub mod compliance;
pub mod config;
pub mod error;
pub mod game;
pub mod games;
pub mod harness;
pub mod operators;
pub mod profile;
pub mod sampling;
pub mod schedule;

pub use algorithms::{Algorithm, AlgorithmRegistry, IterationRecord, RunRecord, SolverState, StepSize};
pub use config::{AlgorithmConfig, Estimator};
pub use error::{Error, Result};
pub use game::{Constants, GameSpec};
pub use operators::{residual, ProxDescriptor};
pub use profile::{make_profile, DecisionProfile, Partition};
pub use sampling::{NoiseModel, RngStream, Scheme};
pub use schedule::{BatchSchedule, StepSchedule};
