//! Differential geometry of parametric surfaces on truncated-Taylor jets.
//!
//! The engine evaluates immersions x(u, v) on seeded jets, from which every
//! pointwise quantity follows exactly: fundamental forms I/II/III, the Gauss
//! map and its derivatives, curvatures, Christoffel symbols of all three
//! forms, and the Beltrami differential parameters of each form. On top of
//! that sit a matrix-relation detector for the Gauss map and position vector
//! (least-squares fits of Δn = Λn and Δx = Ax + B), a battery of tensor
//! identities usable as a self-check suite, and hand-derived closed-form
//! pipelines for ruled surfaces and both quadric families, cross-validated
//! against the generic machinery.
//!
//! Sign convention, used everywhere: Δ f = −a^{ij} (f_{,ij} − C^k_{ij} f_{,k})
//! with (a^{ij}) the inverse of the selected form and C its Christoffel
//! symbols. The Gauss map is n = (x_u × x_v)/‖x_u × x_v‖, never flipped
//! per-surface; reversing orientation maps H to −H.

pub mod beltrami;
pub mod closedforms;
pub mod error;
#[cfg(any(test, feature = "fdcheck"))]
pub mod fdcheck;
pub mod finitetype;
pub mod forms;
pub mod identities;
pub mod jet;
pub mod surfaces;

pub use error::{Error, Result};
pub use jet::{Jet2, Var};
