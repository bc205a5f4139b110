//! Numerical toolkit for the one-dimensional periodic Vlasov-Poisson system.
//!
//! The crate provides three levels of description of the same dynamics and
//! the tools to compare them:
//!
//! * [`particles`]: the N-particle system with the singular Coulomb force
//!   (or its mollified variants), with an O(N log N) exact force;
//! * [`vlasov_grid`]: a bounded-density phase-space solution computed by a
//!   Strang-split semi-Lagrangian scheme;
//! * [`wasserstein`]: the exact Wasserstein-1 distance on `T x R` between
//!   discrete measures.
//!
//! [`experiments`] combines them into stability, propagation-of-chaos,
//! mean-field convergence and mollification studies.

pub mod error;
pub mod experiments;
pub mod geometry;
pub mod io;
pub mod kernel;
pub mod measures;
pub mod particles;
pub mod rng;
pub mod vlasov_grid;
pub mod wasserstein;

pub use error::{Error, Result};
pub use experiments::{
    CampaignParams, CauchyReport, ChaosReport, ConvergenceReport, ConvergenceRow, StabilityReport,
};
pub use geometry::{phase_distance, torus_diff, wrap, PhasePoint, TorusCoord};
pub use kernel::KernelKind;
pub use measures::{
    first_v_moment, sample_initial, subsample, DiscreteMeasure, DistributionSpec,
    InitialDistribution, Sampling, TableGrid,
};
pub use particles::{Diagnostics, Integrator, ParticleState, TrajectoryRecord};
pub use vlasov_grid::{DensityProfile, DensityTrace, FieldProfile, GridParams, PhaseGrid};
pub use wasserstein::{w1_assignment_oracle, w1_exact, TransportPlan};
