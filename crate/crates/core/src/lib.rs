//! Primal heuristics for mixed-integer linear programs.
//!
//! The crate bundles a small MIP toolkit (instance model, bound propagation,
//! a bounded primal simplex and an exact branch-and-bound) with three primal
//! heuristics built on top of it:
//!
//! * [`heur::rens`]: restrict integers to the floor/ceil box around the LP
//!   optimum and solve the resulting sub-MIP.
//! * [`heur::fix_loop`]: round integers one by one following an instruction
//!   vector, propagating after every fixing.
//! * [`heur::fp_search`]: LP-free depth-first fix-and-propagate driven by
//!   inferred objective scores.
//!
//! [`analysis`] measures LP/MIP proximity and primal-dual integrals, and
//! [`gen`] produces seeded unit-commitment instances to run everything on.

pub mod model;
pub mod propagate;
pub mod lp;
pub mod bnb;
pub mod heur;
pub mod analysis;
pub mod gen;
pub mod batch;
pub mod par;
