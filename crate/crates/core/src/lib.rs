//! Energy-efficient epidemic broadcast in mobile ad-hoc networks.
//!
//! Nodes move by the random direction model on a square torus, links follow a
//! log-normal shadowing / Nakagami-m channel, and an informed node sleeps,
//! wakes and retransmits a fixed number of times before going quiet. The crate
//! provides an event-driven simulator for that scheme, time-stepped SI and SIR
//! baselines, the closed-form bounds (effective degree, percolation, informed
//! fraction, delay, efficiency, energy) and a replay engine for GPS traces.

pub mod analytics;
pub mod channel;
pub mod error;
pub mod geometry;
pub mod params;
pub mod report;
pub mod rng;
pub mod simcore;
pub mod stats;
pub mod trace;

pub use channel::{ChannelDraw, ChannelModel, Fading};
pub use error::{Error, Result};
pub use geometry::{Displacement, TorusPoint};
pub use params::{GuardMode, NetworkParams, SchemeConfig, SchemeKind, TauLaw};
