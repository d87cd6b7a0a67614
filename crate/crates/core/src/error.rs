use thiserror::Error;

/// Errors raised by the geometric and algebraic routines of this crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("quaternion is not a unit quaternion (norm^2 = {0})")]
    NotUnit(String),
    #[error("projective point has x0 = 0 and lies on the hyperplane of the elliptic absolute")]
    AtInfinity,
    #[error("projective point has all coordinates zero")]
    ZeroPoint,
    #[error("point coincides with the projection center")]
    Pole,
    #[error("central projection of the center (1:0:0:0:0) is undefined")]
    CentralProjectionCenter,
    #[error("inversion is undefined at its own center")]
    InversionCenter,
    #[error("unknown circle preset `{0}`")]
    UnknownPreset(String),
    #[error("invalid circle: {0}")]
    InvalidCircle(String),
    #[error("degenerate circle: {0}")]
    Degenerate(String),
    #[error("small circle lies in the plane pair of the great circle")]
    NotTransversal,
    #[error("circle is not great")]
    NotGreat,
    #[error("parse error: {0}")]
    Parse(String),
    #[error("line does not lie on the elliptic absolute")]
    NotOnAbsolute,
    #[error("the two factors are the same circle; the product collapses to a curve")]
    DegenerateProduct,
    #[error("projection center lies on the surface (distance {0:e})")]
    CenterOnSurface(f64),
    #[error("mesh resolution too small: need at least 8 samples per direction, got {0}")]
    Resolution(usize),
    #[error("no vanishing polynomial up to degree {0}")]
    NoVanishingPolynomial(usize),
    #[error("curve point is not on the surface")]
    NotOnSurface,
    #[error("class pair gives a non-integral genus")]
    NonIntegralGenus,
    #[error("curves are too close for a reliable linking number (distance {0:e}); refine")]
    CurvesTooClose(f64),
    #[error("linking number did not converge (residue {0})")]
    LinkingResidue(f64),
    #[error("degenerate fiber of radius {0:e}")]
    DegenerateFiber(f64),
    #[error("mesh is not closed")]
    OpenMesh,
    #[error("certificate not applicable: {0}")]
    NotApplicable(String),
    #[error("both circles are great: Clifford torus, not in the I/II/III family (degree 4)")]
    CliffordTorus,
    #[error("both circles are small: no great type is defined")]
    BothSmall,
    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;
