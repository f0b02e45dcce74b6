//! Front end for the loop-nest language: parsing, reference extraction and
//! subscript Jacobians.

pub mod analysis;
pub mod ast;
pub mod error;
pub mod lower;
pub mod parser;
pub mod print;

pub use analysis::{
    analyze, extract_references, jacobians, repetition_space, AccessKind, ArrayReference,
    RawReference, RepetitionSpace,
};
pub use ast::{ArrayDecl, Direction, Program, Span};
pub use error::{FrontError, FrontErrorKind};
pub use parser::parse;
pub use print::print_program;
