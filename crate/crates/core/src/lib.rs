//! Spectral convex geometry on the sphere.
//!
//! Support functions of convex bodies are stored as spherical-harmonic
//! coefficients ([`harmonics::SpectralField`]). The projection body
//! operator, the Funk/Radon and cosine transforms, and the linearization of
//! the fixed-point map `K ↦ Π²ᵐK` at the ball are all diagonal or nearly so in
//! that basis. Every spectral formula is paired with a quadrature route on
//! `S^2` that computes the same quantity from its definition.

pub mod body;
pub mod error;
pub mod harmonics;
pub mod projection;
pub mod random;
pub mod stability;
pub mod sphere;
pub mod transforms;
pub mod verify;

pub use error::{Error, Result};
