//! Normotope reachability and Reach-iLQR.
//!
//! A normotope `⟨x̊, α, y⟩ = {x : ‖α(x − x̊)‖ ≤ y}` is a norm ball with a
//! linear change of coordinates. This crate propagates normotopes through
//! nonlinear dynamics with an interval-LDI embedding system and optimizes the
//! shape dynamics ("hypercontrol") with an iLQR-style solver that minimizes
//! the final volume while keeping every intermediate volume below a bound.
//!
//! The building blocks, in dependency order:
//!
//! * [`interval`]: closed intervals, interval vectors and matrices.
//! * [`normotope`]: the set representation, hulls, volume cost, sampling.
//! * [`matrix_norms`]: logarithmic and induced norms and their gradients.
//! * [`dynamics`]: vector fields with interval Jacobians and LDI corners.
//! * [`embedding`]: the embedding system and its Euler rollout.
//! * [`reach_ilqr`]: linearization, backward/forward passes, the outer loop.
//! * [`verify`]: Monte Carlo containment, LTV exactness, adjoint optimality.
//!
//! Every capability has a runnable program under `examples/`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod dynamics;
pub mod embedding;
pub mod error;
pub mod interval;
pub mod matrix_norms;
pub mod normotope;
pub mod reach_ilqr;
pub mod scalar;
pub mod verify;

pub use dynamics::{ldi_corners, LdiCorners, System, VectorField};
pub use embedding::{Embedding, EmbeddingState, HypercontrolSchedule, Policy, TimeGrid, Trajectory};
pub use error::{Error, Result};
pub use interval::{Interval, IntervalMatrix, IntervalVector};
pub use normotope::{NormKind, Normotope};
