//! Kinetostatic analysis of the planar 3-PRR parallel manipulator.
//!
//! Three legs, each an actuated prismatic joint on a fixed rail followed by
//! two passive revolute joints, carry an equilateral platform. The crate
//! provides closed-form inverse kinematics per working mode, the
//! direct/inverse kinematics matrices and their normalized forms, singular
//! value based conditioning, constructive isotropic configurations, and
//! Cartesian-plane analyses (orientation-optimized conditioning fields,
//! workspace area, average conditioning, design sweeps, contour extraction).
//!
//! All math is generic over the scalar type through [`Scalar`]; the `*64`
//! aliases below are what the CLI and file formats use.

#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(x > 0)` also rejects NaN

pub mod analysis;
pub mod conditioning;
pub mod error;
pub mod geometry;
pub mod io;
pub mod isotropy;
pub mod kinetostatics;
pub mod linalg;
pub mod scalar;

pub use analysis::{
    average_conditioning, design_sweep, extract_contours, optimal_conditioning, scan_field,
    workspace_area, workspace_mask, ContourSet, GridSpec, MatrixKind, ScalarField, SweepRow,
    ThetaSearch,
};
pub use conditioning::{condition_number, conditioning_report, singular_values, ConditioningReport};
pub use error::{Error, Result};
pub use geometry::{
    inverse_kinematics, mode_signs, platform_anchors, signs_to_mode, Configuration, Geometry,
    LegSolution, Pose, WorkingMode,
};
pub use isotropy::{
    characteristic_length, isotropy_residuals, max_serial_distance_check,
    symmetric_isotropic_config, IsotropyReport,
};
pub use kinetostatics::{
    build_matrices, classify_singularity, forward_rate_map, inverse_rate_map, JointRates,
    KinetostaticMatrices, SingularityClass, SingularityKind, Twist,
};
pub use linalg::{Mat3, Vec2};
pub use scalar::Scalar;

pub type Geometry64 = Geometry<f64>;
pub type Pose64 = Pose<f64>;
pub type Configuration64 = Configuration<f64>;
pub type LegSolution64 = LegSolution<f64>;
pub type Matrices64 = KinetostaticMatrices<f64>;
pub type IsotropyReport64 = IsotropyReport<f64>;
pub type ScalarField64 = ScalarField<f64>;
pub type GridSpec64 = GridSpec<f64>;
pub type SweepRow64 = SweepRow<f64>;
pub type ContourSet64 = ContourSet<f64>;
pub type Mat3f64 = Mat3<f64>;
pub type Vec2f64 = Vec2<f64>;

pub type Geometry32 = Geometry<f32>;
pub type Pose32 = Pose<f32>;
pub type Configuration32 = Configuration<f32>;
pub type Matrices32 = KinetostaticMatrices<f32>;
