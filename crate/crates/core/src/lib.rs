//! Divergence-free virtual elements for the 3D Stokes equations on general
//! polyhedral meshes, solved by a BDDC-preconditioned conjugate gradient
//! method on the interface saddle-point system.
//!
//! The crate is organized along the solution pipeline:
//!
//! * [`mesh`] — polyhedral tessellations (built-in hexahedral/octahedral
//!   generators, a plain-text import format, quality checks),
//! * [`poly`] — scaled monomial bases, polynomial space decompositions and
//!   quadrature on polygons/polyhedra,
//! * [`vem`] — the local virtual element spaces, their projection operators
//!   and the global degree-of-freedom map,
//! * [`assembly`] — local/global discrete forms, boundary conditions and the
//!   assembled saddle-point system,
//! * [`decomp`] — subdomain partitions, interface classification and
//!   statically condensed Schur-complement operators,
//! * [`bddc`] — the BDDC preconditioner (primal spaces, change of basis,
//!   multiplicity/deluxe scaling, coarse problem),
//! * [`adaptive`] — per-face generalized eigenvalue problems that enrich the
//!   primal space,
//! * [`krylov`] — preconditioned CG/GMRES with Lanczos condition estimates,
//!   plus the sparse direct and block-Schur baselines,
//! * [`bench`] — benchmark problems, the suite runner and its CSV output.
//!
//! All numerical kernels are generic over the [`Scalar`] type; the
//! [`Real`] alias fixes the default double-precision instantiation.

pub mod adaptive;
pub mod assembly;
pub mod bddc;
pub mod bench;
pub mod decomp;
pub mod krylov;
pub mod linalg;
pub mod mesh;
pub mod poly;
pub mod vem;

use thiserror::Error;

/// Scalar type over which the numerical core is generic.
///
/// `nalgebra::RealField` supplies the factorization and eigensolver
/// machinery, the `num_traits` bounds the conversions to and from `f64`
/// used for literals, tolerances and reporting.
pub trait Scalar:
    nalgebra::RealField + num_traits::FromPrimitive + num_traits::ToPrimitive + Copy + Default
{
    /// Lossy view as `f64`, for reports and thresholds.
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().expect("scalar not representable as f64")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Default scalar used by the CLI and the benchmark suite.
pub type Real = f64;

/// Convert an `f64` literal into the working scalar type.
#[inline]
pub fn lit<S: Scalar>(x: f64) -> S {
    S::from_f64(x).expect("literal not representable in scalar type")
}

/// Errors produced while building meshes, spaces or solver state.
#[derive(Error, Debug)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("mesh parse error at line {line}: {msg}")]
    MeshParse { line: usize, msg: String },
    #[error("face {face} is non-planar: deviation {deviation:.3e} exceeds {tolerance:.3e}")]
    NonPlanarFace {
        face: usize,
        deviation: f64,
        tolerance: f64,
    },
    #[error("face {face} is degenerate or self-intersecting")]
    BadFace { face: usize },
    #[error("cell {cell} has an open or inconsistently oriented boundary (defect {defect:.3e})")]
    OpenCell { cell: usize, defect: f64 },
    #[error("cell {cell} has non-positive volume {volume:.3e}")]
    BadVolume { cell: usize, volume: f64 },
    #[error("geometry error in cell {cell}: {msg}")]
    Geometry { cell: usize, msg: String },
    #[error("singular local system on {entity} {index}: {msg}")]
    SingularLocal {
        entity: &'static str,
        index: usize,
        msg: String,
    },
    #[error("rank deficiency in cell {cell}: expected {expected}, found {found}")]
    RankDeficient {
        cell: usize,
        expected: usize,
        found: usize,
    },
    #[error("invalid partition: {0}")]
    InvalidPartition(String),
    #[error("sparse factorization failed: {0}")]
    Factorization(String),
    #[error("coarse problem singular; primal constraints insufficient: {0}")]
    CoarseSingular(String),
    #[error("Krylov breakdown: {0}")]
    KrylovBreakdown(String),
    #[error("eigensolver failure: {0}")]
    EigenFailure(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

/// Crate-wide result type.
pub type Result<T> = std::result::Result<T, Error>;
