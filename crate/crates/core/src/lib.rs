//! Geodesic geometry and exact discrete optimal transport on concrete CAT(0) spaces.
//!
//! Three families of spaces are supported: Euclidean space, finite metric trees
//! (stars and truncated combs included) and the open book of `k` half-planes
//! glued along a common line. On top of the comparison geometry of these spaces
//! the crate provides the quadratic cost `c = d²/2`, derivatives along geodesics,
//! an exact network-simplex Kantorovich solver with dual potentials, cyclical
//! monotonicity checks, Monge-map extraction and the discrete polar factorization
//! `s = T ∘ u`.
//!
//! ```
//! use cat0ot::spaces::Space;
//! use cat0ot::geometry::Point;
//!
//! let book = Space::open_book(3).unwrap();
//! let p = Point::page(0, 1.0, 0.0);
//! let q = Point::page(1, 1.0, 0.0);
//! assert!((book.distance(&p, &q).unwrap() - 2.0).abs() < 1e-12);
//! ```

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod calculus;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod polar;
pub mod rng;
pub mod spaces;
pub mod tolerances;
pub mod transport;

pub use error::{Error, Result};
pub use geometry::{Geodesic, Point};
pub use spaces::Space;
