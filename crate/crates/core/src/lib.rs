//! Certified first-order methods for convex quadratics.
//!
//! Every accelerated run carries an approximate-duality-gap certificate:
//! per-iteration upper and lower bounds on `f(x*)` and a potential that
//! must never increase. Conjugate gradients is certified through a shadow
//! sequence built next to its Krylov iterates.

pub mod adgt;
pub mod cli;
pub mod diagnostics;
pub mod error;
pub mod linalg;
pub mod methods;
pub mod problem;
pub mod trace;

pub use adgt::{Certificate, LowerBoundState, Schedule};
pub use diagnostics::{check_certificate, theorem_bound, VerificationReport};
pub use error::{Error, Result};
pub use linalg::{SymMatrix, Vector};
pub use methods::{run_method, Method, MethodKind, PlaneVariant, RunOptions};
pub use problem::{GenSpec, Objective, ProblemFile, QuadraticProblem};
pub use trace::{CertifiedTrace, TerminalStatus, TraceRow};
