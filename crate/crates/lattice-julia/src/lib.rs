//! Dynamics of the diamond hierarchical lattice renormalization maps
//! `T_λ(z) = ((z+λ-1)/(z-1))^d`: basin classification, parameter-space
//! pictures, periodic-point pressure estimates of Julia set dimension, and
//! the perturbation series behind the large-`λ` dimension asymptotics.

pub mod classify;
pub mod error;
pub mod family;
pub mod periodic;
pub mod raster;
pub mod series;
pub mod sphere;
pub mod sum;

pub use error::{Error, Result};
pub use family::{CriticalData, FamilyParams, RescaledMap};
pub use sphere::SpherePoint;
