//! Equilibrium opinions of the cubic mean-field Ising model of a mixed
//! human/AI population.
//!
//! - [`model`]: parameters and the free-energy functionals with their derivatives.
//! - [`solver`]: all stationary points, their stability and the global maximizers.
//! - [`transitions`]: sweeps, first-order jump refinement, critical couplings
//!   and phase diagrams.
//! - [`oracle`]: exact finite-N enumeration and a Metropolis sampler.
//!
//! Model, solver and transition code is generic over the scalar type
//! ([`Real`]); the aliases below fix it to `f64`.

// Negated float comparisons are used so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod model;
pub mod num;
pub mod oracle;
pub mod solver;
pub mod transitions;

pub use num::Real;

pub type OneComponentParams = model::OneComponentParams<f64>;
pub type TwoComponentParams = model::TwoComponentParams<f64>;
pub type MagnetizationPair = model::MagnetizationPair<f64>;
pub type SolverConfig = solver::SolverConfig<f64>;
pub type OneSolution = solver::OneSolution<f64>;
pub type TwoSolution = solver::TwoSolution<f64>;
pub type Model = transitions::Model<f64>;
pub type Axis = transitions::Axis<f64>;
pub type SweepSpec = transitions::SweepSpec<f64>;
pub type SweepRow = transitions::SweepRow<f64>;
pub type JumpEvent = transitions::JumpEvent<f64>;
pub type PhaseDiagram = transitions::PhaseDiagram<f64>;
pub type TransitionOptions = transitions::TransitionOptions<f64>;
