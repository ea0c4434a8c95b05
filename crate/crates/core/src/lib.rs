//! Loans as commuting operators on a finite-dimensional space.
//!
//! The crate builds classical French/German/custom loan schedules, represents
//! them as diagonal operators with ladder operators between periods, rotates
//! them with SO(M) similarity transforms that preserve the total paid, and
//! searches rotation angles for target payment schedules. Indexed
//! (inflation-linked) loans are handled by converting index-unit schedules to
//! currency.

pub mod designer;
pub mod error;
pub mod format;
pub mod indexed;
pub mod loan;
pub mod operators;
pub mod rotation;

pub use error::{LoanError, Result};
pub use loan::{AmortizationSystem, LoanSpec, RateModel, Schedule};
pub use operators::{build_operators, check_algebra, AlgebraReport, LoanOperators};
pub use rotation::{rotation_from_angles, RotatedSchedule, RotationSpec};
pub use designer::{solve_design, DesignConfig, DesignProblem, DesignSolution, DesignStatus, Objective};
pub use indexed::{IndexModel, IndexedSchedule};
