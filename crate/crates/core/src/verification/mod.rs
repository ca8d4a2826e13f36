//! Manufactured solutions, convergence tables, DOF counts and balance checks.

pub mod balance;
pub mod convergence;
pub mod dofs;
pub mod mms;

pub use convergence::{run_convergence, run_mms, run_mms_on, ConvergenceReport, ErrorRow, MmsRun, MmsStep};
pub use mms::MmsProblem;
pub use balance::{mass_balance_report, BalanceReport};
pub use dofs::{dof_counts_2d, dof_counts_3d, dof_ratio_2d, dof_ratio_3d, enumerate_dofs_2d, DofCounts};
