//! Spectral analysis of the linearized Sobolev operator on cones.
//!
//! A cone is spanned by a domain `D` on the unit sphere: a geodesic cap, or
//! an abstract domain known through `lambda_1(D)` and `|D|`. The crate
//! computes the spectrum of the operator linearized at the bubble, both in
//! closed form and by independent shooting, evaluates Sobolev quotients,
//! deficits and distances to the bubble manifold, and reproduces the local
//! stability constant `c_*` together with the probes around it.

pub mod angular_spectrum;
pub mod error;
pub mod functionals;
pub mod geometry;
pub mod ode;
pub mod profile;
pub mod quadrature;
pub mod radial_ode;
pub mod spectrum;
pub mod verify;

pub use error::{Error, Result};
pub use functionals::{ConeProblem, DeficitReport, TestFunction};
pub use geometry::{Bubble, CapDescriptor, ConeDomain};
pub use profile::{Radial, RadialProfile};
pub use quadrature::{MapKind, RadialGrid};
pub use spectrum::{EigenPair, HarmonicPolynomial};
