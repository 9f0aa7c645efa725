//! Subshifts of finite type, locally constant potentials, their equilibrium states, and the
//! averaged pushforwards that carry the conditional Gibbs measure of one potential on an
//! unstable fiber to the equilibrium state of another.
//!
//! Floating-point and exact rational evaluation share one code path through [`Scalar`].

pub mod alchemy;
pub mod error;
pub mod perron;
pub mod potential;
pub mod scalar;
pub mod shift;
pub mod thermo;

pub use alchemy::{
    enumerate, mu_n_enumerated, ConvergenceReport, ConvergenceRow, Enumeration, GrowthPoint,
    GrowthSeries, JobOptions, LambdaN, Normalization, PartitionSums, Query, TransformJob,
};
pub use error::{Error, Result};
pub use perron::{exact_perron, perron, ExactPerron, PerronData, PerronOptions};
pub use potential::{LocallyConstantPotential, VariationProfile, Window};
pub use scalar::{rationalize, render_rational, Scalar, SquareMatrix};
pub use shift::{
    bracket, higher_block_recode, shifted_cylinder_constraints, FiberConstraint, FiberConvention,
    HigherBlock, PastWord, Point, ShiftSpace, Symbol, TwoSidedCylinder, Word,
};
pub use thermo::{
    bowen_log_partition, bowen_log_partition_enumerated, conditional_unstable_measure,
    conditional_unstable_measure_with, equilibrium_state, gibbs_ratio_report,
    gibbs_ratio_report_enumerated, pressure_bowen, pressure_spectral, variational_score,
    CylinderMass, EquilibriumMarkovState, GibbsReport, GibbsRow, MarkovChain, MarkovState,
    ThermoOptions, UnstableFiberMeasure,
};

pub use num_rational::BigRational;
