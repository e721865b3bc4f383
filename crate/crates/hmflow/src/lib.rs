//! Controlled harmonic map heat flow from the circle to the sphere.
//!
//! The crate simulates u_t - u_xx = |u_x|^2 u + 1_w f^{u-perp} on T^1 with
//! values in S^k and implements the constructive control layers on top of
//! it: linear heat null control, frequency-Lyapunov rapid stabilization,
//! small-time local null control, energy-level crossing, geodesic steering,
//! winding-number changes, and the global steering pipeline that chains
//! them together. A CLI front end (`hmflow`) drives scenario runs and a
//! machine-checkable verification suite.

pub mod error;
pub mod grid;
pub mod sphere;
pub mod solver;
pub mod linear;

pub use error::{Error, Result};
