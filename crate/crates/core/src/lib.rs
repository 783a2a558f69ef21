//! Numerics for the birth-of-a-cut transition in hermitian one-matrix models.
//!
//! The crate covers the full chain from a critical potential to finite-N
//! ground truth:
//!
//! * [`potentials`] builds and validates critical potentials `V` whose
//!   effective potential touches the equilibrium level at an outer point `e`;
//! * [`equilibrium`] solves one- and two-cut equilibrium measures and the
//!   abelian objects (`Ω`, `Λ`, `γ`) attached to them;
//! * [`critical`] holds the closed-form near-critical expansions;
//! * [`modelchain`] is the effective `y^{2ν}/2ν` matrix model;
//! * [`asymptotics`] evaluates the mean-field sums over the number of
//!   eigenvalues in the newborn cut and their dominant-term reductions;
//! * [`oracle`] computes exact recurrence coefficients and wavefunctions at
//!   finite N with a discretized Stieltjes procedure.
//!
//! Everything numerical is generic over [`Real`]; [`Hp`] (about 40 decimal
//! digits) is the extended type used where double precision runs out.

pub mod asymptotics;
pub mod critical;
pub mod equilibrium;
pub mod hp;
pub mod kv;
pub mod modelchain;
pub mod oracle;
pub mod orthopoly;
pub mod poly;
pub mod potentials;
pub mod quadrature;
pub mod scalar;
pub mod specialfn;

pub use hp::Hp;
pub use num_complex::Complex;
pub use poly::Poly;
pub use scalar::Real;

/// Double-precision polynomial.
pub type PolyF64 = Poly<f64>;
/// Extended-precision polynomial.
pub type PolyHp = Poly<Hp>;

/// Errors raised by the numerical routines.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// An argument is outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// An iteration failed to converge or precision was lost.
    #[error("numerical failure: {0}")]
    Numerical(String),
    /// A serialized block could not be parsed.
    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
