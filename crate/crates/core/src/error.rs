use serde::Serialize;
use thiserror::Error;

/// Errors raised by the geometric and spectral routines.
#[derive(Debug, Clone, PartialEq, Error, Serialize)]
#[serde(tag = "kind", content = "details")]
pub enum Error {
    #[error("difference {index} of the ratio is not invertible")]
    NonInvertibleDifference { index: usize },
    #[error("splitting points coincide")]
    DegenerateSplitting,
    #[error("lattice basis is not positively oriented")]
    NonPositiveBasis,
    #[error("lattice quotient is not a regular triangulation")]
    NonRegularQuotient,
    #[error("basis is not adapted to any edge direction")]
    NotAdapted,
    #[error("thin torus needs at least 3 vertices, got {n}")]
    TooSmall { n: usize },
    #[error("triangle has coincident vertex values")]
    DegenerateTriangle,
    #[error("black triangle {triangle} has coincident vertex values")]
    BlackTriangleDegenerate { triangle: usize },
    #[error("adjacent vertices {p} and {q} have the same image")]
    NotImmersed { p: usize, q: usize },
    #[error("section vanishes at vertex {vertex}")]
    BasePoint { vertex: usize },
    #[error("polynomial interpolation stayed ill-conditioned after {attempts} attempts")]
    InterpolationIllConditioned { attempts: usize },
    #[error("operator has no kernel (smallest relative singular value {sigma_rel:e})")]
    EmptyKernel { sigma_rel: f64 },
    #[error("section vanishes on black triangle {triangle}")]
    SingularAtTriangle { triangle: usize },
    #[error("section is not holomorphic on black triangle {triangle} (residual {residual:e})")]
    InconsistentSection { triangle: usize, residual: f64 },
    #[error("transform meets the surface at {} (black triangle, vertex) pairs", pairs.len())]
    RegularityViolation { pairs: Vec<(usize, usize)> },
    #[error("prolongation vanishes on black triangle {triangle}")]
    ZeroProlongation { triangle: usize },
    #[error("ratio on white triangle {white} has a non-invertible difference")]
    NonInvertibleOnWhite { white: usize },
    #[error("ratio on cube {cube:?} has a non-invertible difference")]
    NonInvertibleOnCube { cube: [i64; 3] },
    #[error("gauge factors on white triangle {white} disagree by {deviation:e}")]
    ChiInconsistent { white: usize, deviation: f64 },
    #[error("the two transforms agree on black triangle {triangle}")]
    TransformsCollide { triangle: usize },
    #[error("curve is not a polygon at index {index}")]
    NotAPolygon { index: usize },
    #[error("eigenvalue {index} of the holonomy is not simple")]
    EigenlineDegenerate { index: usize },
    #[error("curve is not closed")]
    NotClosed,
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
