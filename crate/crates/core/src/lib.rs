//! Numerical laboratory for forward compositions of finite Blaschke products.
//!
//! The crate is `no_std` (with `alloc`). The `parallel` feature (on by
//! default) pulls in `std` and spreads Monte Carlo samples over a rayon pool;
//! results are identical with and without it.

#![cfg_attr(not(feature = "std"), no_std)]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod circle;
pub mod compose;
pub mod disk;
pub mod error;
mod math;
pub mod stats;
pub mod targets;

pub use circle::{harmonic_measure, harmonic_measure_arc, Angle, Arc, ArcUnion, ANGLE_TOL};
pub use disk::{Blaschke, DiskMap, InnerFunction, Mobius};
pub use error::{Error, Result};
pub use math::Modulus;
pub use num_complex::Complex64;
