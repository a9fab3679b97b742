//! Exact invariants of two-dimensional klt pairs and a ledger for divisorial
//! contractions of the minimal model program.
//!
//! Graphs of singular points live in [`graph`], their classification and
//! invariants in [`discrepancy`], the contraction ledger in [`ledger`], and the
//! exhaustive enumerations in [`mmp`]. All arithmetic is exact.

pub mod cyclic;
pub mod discrepancy;
pub mod graph;
pub mod io;
pub mod ledger;
pub mod linalg;
pub mod mmp;
pub mod rational;

pub use cyclic::{CyclicType, HJExpansion};
pub use discrepancy::{Basket, BasketShape, Classification, KltThreshold};
pub use graph::{BlowUpStep, BoundaryIndex, DualGraph, VertexId};
pub use ledger::{ContractionData, ContractionScenario, ScenarioMode, SurfaceState};
pub use rational::Rational;
