//! Executable constructions for moduli spaces of flat connections on compact
//! surfaces.
//!
//! The crate covers:
//!
//! * [`lie`]: matrix groups U(n), SU(n), SO(3), their exponential and
//!   logarithm, Haar sampling, the central splitting `G = G_ss * S` and the
//!   projection `G -> G/G_ss`.
//! * [`rootsys`]: exact root systems of every irreducible type and a Weyl-type
//!   element with no unit eigenvalue on the root span.
//! * [`surface`]: surface signatures, generator tuples and the relation word
//!   whose zero set is `Hom(pi_1(surface), G)`.
//! * [`solver`]: Riemannian descent with Gauss-Newton polish for relation and
//!   commutator-preimage problems.
//! * [`topology`]: obstruction classes, finite abelian groups and component
//!   counts.
//! * [`homotopy`]: explicit paths inside the solution variety and a
//!   certifier.
//! * [`experiments`]: seeded Monte-Carlo harnesses (census, success rates)
//!   that fan out through [`Exec`].

pub mod error;
pub mod exec;
pub mod experiments;
pub mod homotopy;
pub mod lie;
pub mod rng;
pub mod rootsys;
pub mod solver;
pub mod surface;
pub mod tol;
pub mod topology;
pub mod wire;

pub use error::{Error, Result};
pub use exec::Exec;
pub use lie::{AlgebraElement, CMat, Family, GroupElement, GroupSpec};
pub use surface::{SurfaceSig, TuplePoint};

/// Version tag embedded in every JSON document the crate emits.
pub const SCHEMA: &str = "flatmoduli/1";
