//! Nonconforming finite elements for two-phase Stokes interface problems.
//!
//! The discretization pairs Crouzeix–Raviart velocities on triangles with a
//! rotated-Q1-type element on the anisotropic quadrilaterals produced by
//! cutting a structured background mesh along a level-set interface.
//! Pressures are piecewise constant on the fitted mesh, and no stabilization
//! terms are added.
//!
//! Pipeline: [`level_set`] → [`mesh`] → [`elements`] → [`assembly`] →
//! [`solver`] → [`analysis`], with exact data from [`manufactured`].

pub mod analysis;
pub mod assembly;
pub mod config;
pub mod elements;
pub mod error;
pub mod geometry;
pub mod io;
pub mod level_set;
pub mod manufactured;
pub mod mesh;
pub mod poly;
pub mod solver;
pub mod sparse;

pub use error::{Error, Result};
pub use geometry::{Point, Vec2};
pub use level_set::{LevelSet, Region};
