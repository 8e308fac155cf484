//! Robust global stabilization of disturbed nonlinear systems by sampled-data
//! feedback with a positive sampling rate.
//!
//! The crate is organized bottom-up:
//!
//! * [`dynamics`]: control systems `ẋ = f(d, x, u)`, disturbance signals and
//!   sampling-schedule perturbations.
//! * [`integrate`]: adaptive Dormand-Prince integration with the control held
//!   constant, dense output and region hitting times.
//! * [`hybrid`]: the sample-and-hold closed loop with perturbed sampling
//!   instants `τᵢ₊₁ = τᵢ + h·exp(−d̃(τᵢ))`.
//! * [`setchain`]: predicate regions, the disjoint cell decomposition of a set
//!   chain and the piecewise feedback built on top of it.
//! * [`certify`]: grid-based certificates (Lyapunov decrease, robust
//!   reachability, sampling-period bound, emulation inequalities).
//! * [`stability`]: Monte-Carlo assessment of the closed loop and of the
//!   set-descent property.
//! * [`scenarios`]: the perturbed jet engine and the scalar positive-drift
//!   system, fully parameterized.

pub mod certify;
pub mod dynamics;
pub mod hybrid;
pub mod integrate;
pub mod rng;
pub mod scenarios;
pub mod setchain;
pub mod stability;
pub mod vecops;

pub use certify::{
    Envelope, LyapunovData, LyapunovKind, MonotoneTable, ReachabilityCertificate, SamplingBound,
};
pub use dynamics::{
    AxisBound, BoxSet, ControlSet, ControlSystem, DisturbanceKind, DisturbanceSignal,
    DynamicsError, SchedulePerturbation,
};
pub use hybrid::{SimulationError, Termination, Trajectory};
pub use integrate::{DenseSegment, IntegrateError, IntegratorConfig};
pub use setchain::{ChainError, ChainGenerator, PiecewiseFeedback, Region, RegionExpr, SetChain};
