//! Synthesis of Array-OL data-access specifications from sequential loop
//! nests.
//!
//! The pipeline parses a kernel ([`front`]), takes the Jacobians of every
//! array subscript, groups references into channels by paving matrix and
//! builds a pattern and fitting matrix for each channel ([`synth`]) on top of
//! an integer row echelon decomposition ([`echelon`]) and vertex-based
//! footprints ([`geometry`]).

pub mod affine;
pub mod echelon;
pub mod exact_math;
pub mod front;
pub mod geometry;
pub mod pipeline;
pub mod spec_doc;
pub mod synth;
