//! Projective metrics `d_ν(x, y) = ν(π[x,y])` induced by measures on
//! hyperplanes, the embedding `f_ν`, and numerical audits of its properties.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod diagnostics;
pub mod error;
pub mod evaluators;
pub mod geometry;
pub mod measure;
pub mod plan;
mod quadrature;
pub mod scenarios;

pub use error::{Error, Result};

pub mod prelude {
    pub use crate::diagnostics::{run_diagnostics, DiagnosticsReport, Witness};
    pub use crate::error::{Error, Result};
    pub use crate::evaluators::{Backend, EmbeddingMap, Evaluator, PairQuantities};
    pub use crate::geometry::{alpha, BoxRegion, Cube, Hyperplane, Point, Segment, Vector};
    pub use crate::measure::{
        validate, BaseMeasure, BaseMeasure1D, BaseMeasureND, DirectionMeasure, HyperplaneMeasure, LineMeasure,
    };
    pub use crate::plan::SamplingPlan;
    pub use crate::scenarios::{
        build_beurling_ahlfors, build_crofton, build_degenerate_family, build_kmw, grid_export, Scenario,
    };
}
