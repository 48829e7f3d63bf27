//! Steklov eigenvalues of star-shaped domains in 3D and 4D, and gradient
//! ascent on the volume-normalized eigenvalues over such domains.
//!
//! The boundary is a graph over the unit sphere, r(xi) expanded in real
//! (hyper)spherical harmonics. Eigenvalues come from a method of fundamental
//! solutions discretization; the shape gradient follows from the Hadamard
//! derivative of simple eigenvalues, and clusters of nearly equal eigenvalues
//! are moved together by a max-min ascent step.

pub mod ball;
pub mod config;
pub mod error;
pub mod geometry;
pub mod harmonics;
pub mod io;
pub mod mfs;
pub mod qp;
pub mod quadrature;
pub mod runner;
pub mod shape_opt;
pub mod sphere_points;
pub mod vecmath;

pub use ball::BallOracle;
pub use config::{Mode, Overrides, RunConfig};
pub use io::{load_coefficients, save_coefficients, TriMesh};
pub use error::{Error, Result};
pub use geometry::{BoundaryQuadrature, GridResolution, HarmonicCoefficients, SphereRule};
pub use harmonics::{BasisIndex, BasisTable, BasisWorkspace, Dimension};
pub use mfs::{EigenSolution, MfsSystem};
pub use qp::{maxmin_direction, MaxMinDirection};
pub use shape_opt::{
    cluster_size, cost_gradient, optimize, optimize_multi, CostEvaluator, OptimizeOptions,
    OptimizerState, StopReason,
};
pub use sphere_points::CollocationSet;
