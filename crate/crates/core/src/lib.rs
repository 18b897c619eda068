//! Symbolic charts, jets and pointwise tensor calculus for almost contact
//! metric 3-cells, their Cartesian products and the sewn manifolds embedded
//! in those products.

#![no_std]
extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod array;
pub mod catalog;
pub mod chart;
pub mod error;
pub mod expr;
pub mod geometry;
pub mod jet;
pub mod nullity;
pub mod sample;
pub mod sewing;
pub mod structure;
pub mod tensor;

pub use chart::{Chart, DomainConstraint, Relation};
pub use error::{Error, EvalError, ParseError, Result};
pub use expr::{parse_expression, BinOp, Expr, Func};
pub use geometry::{classify, Classification, LocalGeometry, StructureClass};
pub use sample::{sample_leaf_groups, sample_points, PointSample, SampleBox};
pub use structure::{validate_cell, validate_structure, CellDefinition, Structure, ValidationReport};
pub use tensor::{PointTensor, TensorField, Valence};
