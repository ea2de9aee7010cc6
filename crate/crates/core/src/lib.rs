//! Critical points of holomorphic sections of `O(m)` over complex projective
//! space `CP^n`, taken with respect to the Fubini-Study metric.
//!
//! A section is a homogeneous polynomial of degree `m` in `n + 1` complex
//! variables. Away from its zero set, its critical points are the points
//! where the Chern-connection derivative `∇'s = ∂f − f ∂φ` vanishes, which
//! are also the critical points of `log |s|²`.
//!
//! The crate is organised as:
//!
//! * [`geometry`]: projective points, affine charts, unitary maps, the
//!   Fubini-Study distance and the `CP^1` ↔ unit sphere model.
//! * [`sections`]: polynomial sections, the potential jet, `∇'s`, norms,
//!   gradients, the Gaussian ensemble and binary-form factorisation.
//! * [`critical`]: the multistart solver, Hessian reduction, Morse indices,
//!   degeneracy margins and the Poincaré–Hopf completeness check.
//! * [`quadric`]: Takagi canonical form and closed-form critical sets for
//!   `m = 2`.
//! * [`gauss_lucas`]: spherical hulls, the tangent-cone lemma and the
//!   hull-membership certificate on `CP^1`.
//! * [`morse`]: integer counting series and the Morse inequality.
//! * [`cli`]: the `fubini-crit` command-line front end.

pub mod cli;
pub mod critical;
pub mod error;
pub mod gauss_lucas;
pub mod geometry;
mod linalg;
pub mod morse;
pub mod quadric;
pub mod sections;

pub use error::{Error, Result};

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;
