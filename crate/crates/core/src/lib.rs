//! Convex polyhedra over exact rationals with Farkas-certified operators.

pub mod constraint;
pub mod numeric;
pub mod simplex;
pub mod certificate;
pub mod checker;
pub mod domain;
pub mod trace;
