//! Transfer-function analysis of discrete classical input/output systems.
//!
//! A deterministic system is described completely by its transfer function,
//! a total map from joint input values to joint output values. A stochastic
//! system is a probability distribution over transfer functions. On top of
//! that representation this crate provides:
//!
//! - counting, enumeration, series/parallel composition and loop closure of
//!   transfer functions ([`systems`]), including the deterministic loop
//!   constraint (a loop function without a fixed point is forbidden);
//! - transition tables, transfer distributions, joint distributions and the
//!   stochastic loop constraint ([`stochastic`]);
//! - the consistent region of transfer probabilities as an exact rational LP,
//!   locality and symmetry restrictions, Farkas certificates and the
//!   systematic derivation of Bell-type inequalities ([`polytope`]);
//! - 1+1D spacetime placement of ports and causal admissibility of classical
//!   links ([`spacetime`]);
//! - Bell, simplified Bell and double Bell scenarios with a singlet
//!   state-vector oracle ([`experiments`]).
//!
//! All probabilities are exact rationals ([`Q`]).

pub mod angle;
pub mod error;
pub mod experiments;
pub mod linalg;
pub mod polytope;
pub mod rational;
pub mod spacetime;
pub mod stochastic;
pub mod systems;

pub use error::{Error, Result};
pub use rational::Q;
