//! Bounded Turing reductions and mutual dimension at desk scale.
//!
//! Simulates Turing functionals with exact use and yield, verifies bounded
//! reduction witnesses on finite prefixes, and checks data processing
//! inequalities for mutual dimension using compression-based complexity
//! proxies.

pub mod bound;
pub mod functional;
pub mod harness;
pub mod infoproxy;
pub mod mdim;
pub mod reduction;
pub mod seq;
