//! Projection-free convex optimization over compact sets with an exact (or
//! controllably inexact) linear minimization oracle.
//!
//! * [`gug`]: the generalized outer loop with classical conditional gradient,
//!   its β > 0 equivalent, and the sliding schedule for Hölder-smooth problems.
//! * [`ucgs`]: universal conditional gradient sliding, which needs neither
//!   the Hölder exponent nor its constant and stops with a certified gap.
//! * [`inner`]: the conditional gradient procedures that solve the
//!   projection-type subproblems both outer loops generate.
//!
//! Every oracle call goes through [`OracleCounters`] so complexity claims can
//! be measured directly.

pub mod error;
pub mod gug;
pub mod inner;
pub mod linalg;
pub mod objectives;
pub mod problem;
pub mod reference;
pub mod rng;
pub mod sets;
pub mod trace;
pub mod ucgs;

pub use error::{Error, Result};
pub use linalg::{convex_combine, gamma_sequence_product, telescoping_bound, CounterSnapshot, Matrix, OracleCounters, Vector};
pub use objectives::{CountedObjective, Objective, Smoothness};
pub use problem::{InstanceSpec, ObjectiveSpec, ProblemInstance, SetSpec};
pub use sets::FeasibleSet;
pub use trace::{RunTrace, TraceRow};
