//! Three-layer hybrid collision avoidance (COLAV) stack for autonomous
//! surface vehicles, with a deterministic scenario simulator.
//!
//! The stack consists of:
//! - a high-level planner producing an energy-optimized nominal trajectory
//!   among static obstacles ([`hiplanner`]),
//! - a COLREGs-aware mid-level MPC tracking that trajectory while avoiding
//!   moving obstacles ([`midlevel`], classification in [`colregs`]),
//! - a sample-based short-term planner handling emergencies ([`bcmpc`]).
//!
//! [`sim`] closes the loop around the vessel model in [`vessel`] and runs
//! the bundled scenarios; [`nlp`] is the shared transcription/solver layer.

pub mod angles;
pub mod bcmpc;
pub mod colregs;
pub mod geometry;
pub mod hiplanner;
pub mod midlevel;
pub mod nlp;
pub mod sim;
pub mod trajectory;
pub mod vessel;

pub use trajectory::Trajectory;
