//! Exact and numeric geometry of products of circles in the unit quaternions.

pub mod circles;
pub mod classify;
pub mod error;
pub mod implicit;
pub mod lattice;
pub mod linalg;
pub mod mesh;
pub mod moebius;
pub mod poly;
pub mod product;
pub mod quat;
pub mod scalar;
pub mod topology;
pub mod verify;

pub use circles::{Circle, CircleSpec, Preset, RationalCircleParam};
pub use classify::{classify, Classification, GreatType};
pub use error::{Error, Result};
pub use implicit::{ImplicitPoly, MonomialBasis};
pub use lattice::DivisorClass;
pub use mesh::{Mesh, PolylineCurve, Vertices};
pub use moebius::{Projection, Stereographic};
pub use poly::{BiForm, BinaryForm, ProjRoot};
pub use product::{ProductSurface, Side};
pub use quat::{Quaternion, UnitQuaternion};
pub use scalar::{Rational, Scalar};
pub use topology::{Check, Report};
