//! Computational engine for the Type IIA geometric flow on symplectic
//! 6-manifolds.
//!
//! The flow evolves a closed, primitive, positive 3-form `φ` by
//! `∂_t φ = dΛd(|φ|² ⋆φ)`. The crate provides:
//!
//! * [`forms6`] — exact exterior algebra on a fixed 6-dimensional space;
//! * [`hitchin`] — the pointwise construction `(ω, φ) ↦ (λ_φ, J_φ, φ̂, |φ|², g, g̃)`,
//!   the normal form, the variation of `φ̂`, and the principal-symbol spectrum;
//! * [`liegeom`] — left-invariant geometry on 6-dimensional Lie models
//!   (torus, nilmanifold, solvmanifold): invariant `d`, Levi-Civita and
//!   projected connections, curvature, the Nijenhuis tensor, and the
//!   identity suite that certifies the structural identities of the geometry;
//! * [`flow`] — the flow engine on invariant data with two independent
//!   right-hand-side evaluators, RK4 stepping, observables, closed-form
//!   oracles, and blow-up diagnostics;
//! * [`torusgrid`] — the spatially one-dimensional torus reduction as a
//!   periodic finite-difference PDE, cross-checked against the general
//!   evaluator.

pub mod flow;
pub mod forms6;
pub mod hitchin;
pub mod liegeom;
pub mod report;
pub mod samples;
pub mod torusgrid;

#[cfg(test)]
pub(crate) mod testutil;

/// Engine version embedded in every emitted artifact.
pub const ENGINE_VERSION: &str = env!("CARGO_PKG_VERSION");
