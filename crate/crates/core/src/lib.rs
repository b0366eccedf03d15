//! Whirl curves: space curves whose principal normal and unit tangent have
//! proportional projections onto a fixed axis.
//!
//! The crate is organised bottom-up:
//!
//! - [`numerics`]: adaptive Simpson quadrature, cumulative integrals,
//!   Gauss-Legendre panels and central-difference derivatives.
//! - [`frenet`]: the [`Curve`] abstraction, Frenet-Serret apparatus and
//!   sampled traces.
//! - [`whirl`]: the intrinsic equation, the axis vector and whirl
//!   verification / fitting on arbitrary curves.
//! - [`synth`]: whirl curves built from a prescribed positive curvature.
//! - [`rectifying`]: the closed-form whirl-rectifying family, its cone,
//!   hyperboloid and sphere geometry, and the continuous extensions.
//! - [`trace_io`]: CSV and JSON exchange of [`CurveTrace`]s.
//! - [`cli`]: the command-line front end.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod frenet;
pub mod numerics;
pub mod rectifying;
pub mod synth;
pub mod trace_io;
pub mod vec3;
pub mod whirl;

pub use error::{Error, Result};
pub use frenet::{Curve, CurveTrace, FrenetApparatus, ParamKind};
pub use vec3::{Sign, Vec3};
