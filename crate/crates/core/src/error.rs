//! Crate-level error that wraps every module error.

use thiserror::Error;

use crate::conic::TableError;
use crate::criterion::CriterionError;
use crate::flattening::FlattenError;
use crate::flow::FlowError;
use crate::iet::IetError;
use crate::quadrature::QuadratureError;
use crate::staircase::PolygonError;
use crate::surface::SurfaceError;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Table(#[from] TableError),
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
    #[error(transparent)]
    Polygon(#[from] PolygonError),
    #[error(transparent)]
    Flatten(#[from] FlattenError),
    #[error(transparent)]
    Surface(#[from] SurfaceError),
    #[error(transparent)]
    Flow(#[from] FlowError),
    #[error(transparent)]
    Iet(#[from] IetError),
    #[error(transparent)]
    Criterion(#[from] CriterionError),
}

impl Error {
    /// True when the error signals a broken cross-check rather than bad input.
    pub fn is_internal(&self) -> bool {
        match self {
            Error::Table(e) => e.is_internal(),
            Error::Quadrature(e) => e.is_internal(),
            Error::Polygon(_) => false,
            Error::Flatten(e) => e.is_internal(),
            Error::Surface(e) => e.is_internal(),
            Error::Flow(e) => e.is_internal(),
            Error::Iet(_) => false,
            Error::Criterion(e) => e.is_internal(),
        }
    }
}
