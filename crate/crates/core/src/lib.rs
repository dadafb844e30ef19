// SPDX-License-Identifier: Apache-2.0

//! Two-dimensional Stokes interface dynamics on the periodic strip: a
//! graph-height evolution, a parametric-curve evolution, diagnostics, and a
//! turning-family construction with its threshold search.

pub mod cli;
pub mod diagnostics;
pub mod error;
pub mod evolution_curve;
pub mod evolution_graph;
pub mod geometry;
pub mod kernels;
pub mod ode;
pub mod par;
pub mod quadrature;
pub mod snapshot;
pub mod trajectory;
pub mod turning;

pub use error::{Error, Result};
