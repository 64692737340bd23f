//! Thread-safety checker for Java classes annotated `@ThreadSafe`.
//!
//! Three rules are checked per annotated class:
//!
//! - P1, no escaping: every field is `private`.
//! - P2, safe publication: every field is default-initialized, `final` or
//!   `volatile`.
//! - P3, correct synchronization: every pair of conflicting field accesses
//!   reachable from public methods is guarded by a common monitor.
//!
//! [`hboracle`] checks the same classes dynamically by enumerating the
//! interleavings of a two-thread driver program and computing the
//! happens-before relation of each execution.

pub mod accesspaths;
pub mod cfg;
pub mod classmodel;
pub mod cli;
pub mod config;
pub mod frontend;
pub mod hboracle;
pub mod monitors;
pub mod raceanalysis;
