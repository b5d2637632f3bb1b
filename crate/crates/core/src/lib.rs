//! Numerical laboratory for positive solutions of
//!
//! ```text
//! u_tt + Δ_{S^{n-1}} u + b u_t + a u + u^p = 0     on S^{n-1} × (0, ∞)
//! ```
//!
//! and of the radial ODE `ψ'' + bψ' + aψ + ψ^p = 0` obtained by averaging over
//! the sphere. The crate covers the two parameter charts (cylinder and punctured
//! ball), the phase-plane structure of the ODE, tail-rate fitting, an
//! axisymmetric Newton solver for the PDE, and the removability analysis of the
//! singularity at the origin of the ball chart.

pub mod error;
pub mod fitter;
pub mod io;
pub mod ode;
pub mod params;
pub mod pde;
pub mod quad;
pub mod singularity;

pub use error::{Error, Result};
pub use params::{BallParams, CylinderParams, Regime};
