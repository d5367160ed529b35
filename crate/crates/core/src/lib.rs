//! Certificates for unique, adequately balanced power-flow solutions in
//! three-phase distribution networks.
//!
//! The pipeline runs in four stages:
//!
//! 1. [`netmodel`] assembles the partitioned admittance matrix and the
//!    no-load normalization (`E`, `Ẑ`).
//! 2. [`solvability`] evaluates the stress measures of a load scenario and,
//!    when the fixed-point certificate holds, produces one voltage disk per
//!    node-phase.
//! 3. [`robustcert`] checks a voltage-unbalance requirement (PVUR, LVUR or
//!    VUF) over every voltage in the disks of a critical node, either exactly
//!    or through a safe approximation.
//! 4. [`balancibility`] ties the stages together, searches for the smallest
//!    certifiable tolerance and runs load sweeps.
//!
//! [`powerflow`] is the fixed-point solver used both for nominal points and
//! as the ground truth that the certificates are tested against.

// Validity checks are written `!(x > 0.0)` so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod balancibility;
pub mod error;
pub mod fixtures;
pub mod netmodel;
pub mod phase;
pub mod powerflow;
pub mod robustcert;
pub mod solvability;
pub mod unbalance;

pub use error::{Error, PowerFlowError, Result};
pub use netmodel::{build_network, make_load_state, LoadState, NetworkModel};
pub use phase::{NodePhase, Phase};
pub use powerflow::{solve_fixed_point, FixedPointOptions, PowerFlowResult};
pub use solvability::{build_disks, compute_stress, DiskBundle, StressSummary};

pub use num_complex::Complex64;
