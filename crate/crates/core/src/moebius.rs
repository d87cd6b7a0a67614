//! Projections out of S³, inversions, elliptic maps of the Möbius quadric and the
//! two ruling families of the elliptic absolute.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_traits::{One, Zero};
use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::quat::{left_mul_matrix, right_mul_matrix, ProjectivePoint5, Quaternion, UnitQuaternion};
use crate::scalar::{parse_rational, GaussianRational, Rational, Scalar};

/// Float tolerance for pole and center detection.
pub const POLE_TOLERANCE: f64 = 1e-12;

type Mat4 = [[Rational; 4]; 4];

fn mat_vec<T: Scalar>(m: &[[T; 4]; 4], p: &[T; 4]) -> [T; 4] {
    std::array::from_fn(|r| (0..4).fold(T::zero(), |s, c| s + m[r][c].clone() * p[c].clone()))
}

fn transpose<T: Clone>(m: &[[T; 4]; 4]) -> [[T; 4]; 4] {
    std::array::from_fn(|r| std::array::from_fn(|c| m[c][r].clone()))
}

/// Stereographic projection from a rational center of S³.
///
/// A general center is handled by a rational rotation `R` with `R c = (0,0,0,1)`,
/// followed by `(x₁, x₂, x₃)/(1 − x₄)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Stereographic {
    center: UnitQuaternion<Rational>,
    rotation: Option<Mat4>,
}

impl Default for Stereographic {
    fn default() -> Self {
        Self { center: UnitQuaternion::new(Quaternion::k()).expect("k is a unit"), rotation: None }
    }
}

impl Stereographic {
    pub fn new(center: UnitQuaternion<Rational>) -> Self {
        let c = center.to_array();
        let e4 = [Rational::zero(), Rational::zero(), Rational::zero(), Rational::one()];
        if c == e4 {
            return Self::default();
        }
        // Householder reflection along c − e₄ sends c to e₄; flipping x₃ restores orientation.
        let v: [Rational; 4] = std::array::from_fn(|i| &c[i] - &e4[i]);
        let vv = v.iter().fold(Rational::zero(), |s, x| s + x * x);
        let two = Rational::from_integer(2.into());
        let rotation: Mat4 = std::array::from_fn(|r| {
            std::array::from_fn(|col| {
                let id = if r == col { Rational::one() } else { Rational::zero() };
                let h = id - &two * &v[r] * &v[col] / &vv;
                if r == 2 {
                    -h
                } else {
                    h
                }
            })
        });
        Self { center, rotation: Some(rotation) }
    }

    pub fn center(&self) -> &UnitQuaternion<Rational> {
        &self.center
    }

    pub fn is_default(&self) -> bool {
        self.rotation.is_none()
    }

    fn to_standard<T: Scalar>(&self, p: [T; 4]) -> [T; 4] {
        match &self.rotation {
            None => p,
            Some(m) => mat_vec(&m.clone().map(|r| r.map(|x| T::from_rational(&x))), &p),
        }
    }

    fn from_standard<T: Scalar>(&self, p: [T; 4]) -> [T; 4] {
        match &self.rotation {
            None => p,
            Some(m) => mat_vec(&transpose(m).map(|r| r.map(|x| T::from_rational(&x))), &p),
        }
    }

    /// `(x₁, x₂, x₃)/(1 − x₄)` after rotating the center to `(0,0,0,1)`.
    pub fn project<T: Scalar>(&self, p: &Quaternion<T>) -> Result<[T; 3]> {
        let [y1, y2, y3, y4] = self.to_standard(p.to_array());
        let den = T::one() - y4;
        if den.is_negligible(POLE_TOLERANCE) {
            return Err(Error::Pole);
        }
        Ok([y1 / den.clone(), y2 / den.clone(), y3 / den])
    }

    /// `(2X, |X|² − 1)/(|X|² + 1)`, rotated back; exactly on S³ for rational input.
    pub fn inverse<T: Scalar>(&self, x: &[T; 3]) -> Quaternion<T> {
        let n2 = x.iter().fold(T::zero(), |s, c| s + c.clone() * c.clone());
        let den = n2.clone() + T::one();
        let two = T::one() + T::one();
        let y = [
            two.clone() * x[0].clone() / den.clone(),
            two.clone() * x[1].clone() / den.clone(),
            two * x[2].clone() / den.clone(),
            (n2 - T::one()) / den,
        ];
        Quaternion::from_array(self.from_standard(y))
    }
}

/// `stereographic(center)(p)` with the default center `(0,0,0,1)`.
pub fn stereographic<T: Scalar>(p: &Quaternion<T>) -> Result<[T; 3]> {
    Stereographic::default().project(p)
}

pub fn inverse_stereographic<T: Scalar>(x: &[T; 3]) -> Quaternion<T> {
    Stereographic::default().inverse(x)
}

/// `x ↦ τ(x) = (x₁ : x₂ : x₃ : x₄)`, the 2:1 central projection from `(1:0:0:0:0)`.
pub fn central_projection<T: Scalar>(p: &ProjectivePoint5<T>) -> Result<[T; 4]> {
    let [_, rest @ ..] = p.coords().clone();
    if rest.iter().all(|c| c.is_negligible(0.0)) {
        return Err(Error::CentralProjectionCenter);
    }
    Ok(rest)
}

/// Projective equality of homogeneous tuples: all 2×2 minors vanish.
pub fn homogeneous_eq<T: Scalar>(a: &[T], b: &[T]) -> bool {
    let m = a.iter().chain(b).map(|c| c.to_f64().abs()).fold(0.0, f64::max);
    let tol = if T::EXACT { 0.0 } else { 1e-12 * m * m };
    a.len() == b.len()
        && (0..a.len()).all(|i| {
            (i + 1..a.len()).all(|j| (a[i].clone() * b[j].clone() - a[j].clone() * b[i].clone()).is_negligible(tol))
        })
}

/// Projection used to take a surface in S³ to 3-space.
#[derive(Clone, Debug, PartialEq, Default)]
pub enum Projection {
    #[default]
    Stereo,
    StereoAt(Stereographic),
    Central,
}

impl Projection {
    pub fn stereographic(&self) -> Option<Stereographic> {
        match self {
            Projection::Stereo => Some(Stereographic::default()),
            Projection::StereoAt(s) => Some(s.clone()),
            Projection::Central => None,
        }
    }

    pub fn is_central(&self) -> bool {
        matches!(self, Projection::Central)
    }
}

impl FromStr for Projection {
    type Err = Error;
    /// `stereo:default`, `stereo:cx,cy,cz,cw` (exact unit rationals, decimals allowed), `central`.
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "central" => Ok(Projection::Central),
            "stereo" | "stereo:default" => Ok(Projection::Stereo),
            other => {
                let body = other
                    .strip_prefix("stereo:")
                    .ok_or_else(|| Error::Parse(format!("unknown projection `{other}`")))?;
                let coords: Vec<Rational> = body.split(',').map(parse_rational).collect::<Result<_>>()?;
                if coords.len() != 4 {
                    return Err(Error::Parse("stereographic center needs four coordinates".into()));
                }
                let q = Quaternion::from_array(std::array::from_fn(|i| coords[i].clone()));
                let st = Stereographic::new(UnitQuaternion::new(q)?);
                Ok(if st.is_default() { Projection::Stereo } else { Projection::StereoAt(st) })
            }
        }
    }
}

impl fmt::Display for Projection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Projection::Stereo => write!(f, "stereo:default"),
            Projection::StereoAt(s) => {
                let c = s.center().to_array().map(|x| crate::scalar::format_rational(&x));
                write!(f, "stereo:{}", c.join(","))
            }
            Projection::Central => write!(f, "central"),
        }
    }
}

/// Inversion in the sphere of radius `r` about `c`: `c + r²(x − c)/‖x − c‖²`.
pub fn inversion<T: Scalar>(c: &[T; 3], r: &T, x: &[T; 3]) -> Result<[T; 3]> {
    let d: [T; 3] = std::array::from_fn(|i| x[i].clone() - c[i].clone());
    let n2 = d.iter().fold(T::zero(), |s, v| s + v.clone() * v.clone());
    if n2.is_negligible(POLE_TOLERANCE) {
        return Err(Error::InversionCenter);
    }
    let k = r.clone() * r.clone() / n2;
    Ok(std::array::from_fn(|i| c[i].clone() + k.clone() * d[i].clone()))
}

/// Largest geometric deviation of `points` from the best circle or line through them,
/// relative to the extent of the point set.
///
/// A plane is fitted by SVD of the centered points, then `a|p|² + b x + c y + d = 0`
/// in plane coordinates; `a = 0` covers the line case.
pub fn circle_fit_residual(points: &[[f64; 3]]) -> f64 {
    let n = points.len();
    assert!(n >= 5, "need at least five points");
    let centroid: [f64; 3] = std::array::from_fn(|k| points.iter().map(|p| p[k]).sum::<f64>() / n as f64);
    let extent = points
        .iter()
        .map(|p| (0..3).map(|k| (p[k] - centroid[k]).powi(2)).sum::<f64>().sqrt())
        .fold(0.0, f64::max)
        .max(1e-300);
    let centered = DMatrix::from_fn(n, 3, |r, c| (points[r][c] - centroid[c]) / extent);
    let svd = centered.clone().svd(false, true);
    let vt = svd.v_t.expect("requested");
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let axis = |k: usize| [vt[(order[k], 0)], vt[(order[k], 1)], vt[(order[k], 2)]];
    let (e1, e2, nrm) = (axis(0), axis(1), axis(2));
    let dotp = |r: usize, a: &[f64; 3]| (0..3).map(|k| centered[(r, k)] * a[k]).sum::<f64>();
    let plane_res = (0..n).map(|r| dotp(r, &nrm).abs()).fold(0.0, f64::max);
    let uv: Vec<(f64, f64)> = (0..n).map(|r| (dotp(r, &e1), dotp(r, &e2))).collect();
    let design = DMatrix::from_fn(n, 4, |r, c| {
        let (x, y) = uv[r];
        [x * x + y * y, x, y, 1.0][c]
    });
    let svd2 = design.svd(false, true);
    let vt2 = svd2.v_t.expect("requested");
    let smallest = (0..svd2.singular_values.len())
        .min_by(|&a, &b| svd2.singular_values[a].total_cmp(&svd2.singular_values[b]))
        .expect("non-empty");
    let f: Vec<f64> = (0..4).map(|c| vt2[(smallest, c)]).collect();
    let circle_res = uv
        .iter()
        .map(|&(x, y)| {
            let val = f[0] * (x * x + y * y) + f[1] * x + f[2] * y + f[3];
            let g = ((2.0 * f[0] * x + f[1]).powi(2) + (2.0 * f[0] * y + f[2]).powi(2)).sqrt();
            val.abs() / g.max(1e-300)
        })
        .fold(0.0, f64::max);
    plane_res.max(circle_res)
}

/// Invertible 5×5 matrix acting on homogeneous coordinates of ℙ⁴.
#[derive(Clone, Debug, PartialEq)]
pub struct ProjectiveMap5<T> {
    m: [[T; 5]; 5],
}

impl<T: Scalar> ProjectiveMap5<T> {
    pub fn new(m: [[T; 5]; 5]) -> Result<Self> {
        let map = Self { m };
        if map.determinant().is_negligible(1e-14) {
            return Err(Error::Degenerate("singular projective map".into()));
        }
        Ok(map)
    }

    pub fn identity() -> Self {
        Self { m: std::array::from_fn(|r| std::array::from_fn(|c| if r == c { T::one() } else { T::zero() })) }
    }

    /// `diag(1, M)`.
    pub fn from_block(block: &[[T; 4]; 4]) -> Self {
        let m = std::array::from_fn(|r| {
            std::array::from_fn(|c| match (r, c) {
                (0, 0) => T::one(),
                (0, _) | (_, 0) => T::zero(),
                _ => block[r - 1][c - 1].clone(),
            })
        });
        Self { m }
    }

    pub fn matrix(&self) -> &[[T; 5]; 5] {
        &self.m
    }

    pub fn determinant(&self) -> T {
        let mut a: Vec<Vec<T>> = self.m.iter().map(|r| r.to_vec()).collect();
        let mut det = T::one();
        for col in 0..5 {
            let pivot = (col..5)
                .filter(|&r| !a[r][col].is_negligible(0.0))
                .max_by(|&x, &y| a[x][col].to_f64().abs().total_cmp(&a[y][col].to_f64().abs()));
            let Some(p) = pivot else { return T::zero() };
            if p != col {
                a.swap(p, col);
                det = -det;
            }
            let pv = a[col][col].clone();
            det = det * pv.clone();
            for r in col + 1..5 {
                let f = a[r][col].clone() / pv.clone();
                for c in col..5 {
                    let sub = f.clone() * a[col][c].clone();
                    a[r][c] = a[r][c].clone() - sub;
                }
            }
        }
        det
    }

    pub fn apply(&self, p: &ProjectivePoint5<T>) -> ProjectivePoint5<T> {
        let x = p.coords();
        let y = std::array::from_fn(|r| (0..5).fold(T::zero(), |s, c| s + self.m[r][c].clone() * x[c].clone()));
        ProjectivePoint5::new(y).expect("invertible map sends non-zero points to non-zero points")
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Self) -> Self {
        let m = std::array::from_fn(|r| {
            std::array::from_fn(|c| (0..5).fold(T::zero(), |s, k| s + self.m[r][k].clone() * other.m[k][c].clone()))
        });
        Self { m }
    }

    /// Equality as projective maps: matrices proportional.
    pub fn projectively_eq(&self, other: &Self) -> bool {
        let a: Vec<T> = self.m.iter().flatten().cloned().collect();
        let b: Vec<T> = other.m.iter().flatten().cloned().collect();
        homogeneous_eq(&a, &b)
    }

    /// Preserves `−x₀² + Σ xᵢ²` up to a non-zero factor and maps `x₀ = 0` to itself.
    pub fn is_elliptic(&self) -> bool {
        let tol = 1e-10;
        if (1..5).any(|c| !self.m[0][c].is_negligible(tol)) {
            return false;
        }
        let sign = |k: usize| if k == 0 { -T::one() } else { T::one() };
        // G = Mᵀ J M must equal λ J
        let g = |r: usize, c: usize| {
            (0..5).fold(T::zero(), |s, k| s + sign(k) * self.m[k][r].clone() * self.m[k][c].clone())
        };
        let lambda = g(1, 1);
        if lambda.is_negligible(tol) {
            return false;
        }
        (0..5).all(|r| {
            (0..5).all(|c| {
                let want = if r == c { sign(r) * lambda.clone() } else { T::zero() };
                (g(r, c) - want).is_negligible(tol)
            })
        })
    }
}

impl ProjectiveMap5<Rational> {
    /// Action on Gaussian-rational homogeneous coordinates.
    pub fn apply_gaussian(&self, x: &[GaussianRational; 5]) -> [GaussianRational; 5] {
        std::array::from_fn(|r| {
            (0..5).fold(GaussianRational::zero(), |s, c| {
                s + GaussianRational::real(self.m[r][c].clone()) * x[c].clone()
            })
        })
    }
}

/// `diag(1, L_a)` where `L_a x = a⋆x`.
pub fn left_translation<T: Scalar>(a: &UnitQuaternion<T>) -> ProjectiveMap5<T> {
    ProjectiveMap5::from_block(&left_mul_matrix(a))
}

/// `diag(1, R_b)` where `R_b x = x⋆b`.
pub fn right_translation<T: Scalar>(b: &UnitQuaternion<T>) -> ProjectiveMap5<T> {
    ProjectiveMap5::from_block(&right_mul_matrix(b))
}

/// Rational point of S³ of bounded height, via inverse stereographic projection of
/// a random rational point of ℝ³.
pub fn random_unit_quaternion<R: Rng>(rng: &mut R, height: i64) -> UnitQuaternion<Rational> {
    let mut coord = || Rational::new(rng.random_range(-height..=height).into(), rng.random_range(1..=height).into());
    let x = [coord(), coord(), coord()];
    UnitQuaternion::new(inverse_stereographic(&x)).expect("inverse stereographic lands on S³")
}

/// Ruling family of the elliptic absolute `𝔼 = {x₀ = 0, Σ xᵢ² = 0}`.
///
/// With `P = x₁ + i x₂`, `P' = x₁ − i x₂`, `Q = x₃ + i x₄`, `Q' = x₃ − i x₄` the
/// quadric reads `P P' = −Q Q'`. Left lines are `P = μQ, Q' = −μP'`; right lines
/// are `P = μQ', Q = −μP'`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Family {
    Left,
    Right,
}

/// Calibration of the family labels: every left line is mapped to itself by every
/// left translation, and every right line by every right translation.
pub const LEFT_FIXED_BY_LEFT_TRANSLATIONS: bool = true;

type G = GaussianRational;

/// Line on `𝔼` spanned by two Gaussian-rational points.
#[derive(Clone, Debug, PartialEq)]
pub struct GeneratorLine {
    pub p: [G; 5],
    pub q: [G; 5],
    pub family: Family,
}

fn to_x(pp: G, ppc: G, qq: G, qqc: G) -> [G; 5] {
    let half = G::real(Rational::new(1.into(), 2.into()));
    let two_i = G::i() + G::i();
    [
        G::zero(),
        (pp.clone() + ppc.clone()) * half.clone(),
        (pp - ppc) / two_i.clone(),
        (qq.clone() + qqc.clone()) * half,
        (qq - qqc) / two_i,
    ]
}

/// `(P, P', Q, Q')` of a point.
fn pq(x: &[G; 5]) -> [G; 4] {
    let i = G::i();
    [
        x[1].clone() + i.clone() * x[2].clone(),
        x[1].clone() - i.clone() * x[2].clone(),
        x[3].clone() + i.clone() * x[4].clone(),
        x[3].clone() - i * x[4].clone(),
    ]
}

fn on_absolute(x: &[G; 5]) -> bool {
    x[0].is_zero() && x[1..].iter().fold(G::zero(), |s, c| s + c.clone() * c.clone()).is_zero()
}

/// Line of the given family with slope `μ`.
pub fn generator_line(family: Family, mu: &G) -> GeneratorLine {
    let (z, o) = (G::zero(), G::one());
    let m = mu.clone();
    let (p, q) = match family {
        // (P, P', Q, Q') = (μ, 0, 1, 0) and (0, 1, 0, −μ)
        Family::Left => (to_x(m.clone(), z.clone(), o.clone(), z.clone()), to_x(z.clone(), o, z, -m)),
        // (μ, 0, 0, 1) and (0, 1, −μ, 0)
        Family::Right => (to_x(m.clone(), z.clone(), z.clone(), o.clone()), to_x(z.clone(), o, -m, z)),
    };
    GeneratorLine { p, q, family }
}

/// Family and slope of a line on `𝔼`; `mu` is `None` for the slope at infinity.
#[derive(Clone, Debug, PartialEq)]
pub struct GeneratorClass {
    pub family: Family,
    pub mu: Option<G>,
}

/// Recovers family and slope of the line through `p` and `q`.
pub fn classify_generator(p: &[G; 5], q: &[G; 5]) -> Result<GeneratorClass> {
    let mid: [G; 5] = std::array::from_fn(|k| p[k].clone() + q[k].clone());
    if !(on_absolute(p) && on_absolute(q) && on_absolute(&mid)) {
        return Err(Error::NotOnAbsolute);
    }
    let (a, b) = (pq(p), pq(q));
    let minor = |i: usize, j: usize| a[i].clone() * b[j].clone() - a[j].clone() * b[i].clone();
    if minor(0, 1).is_zero() && minor(0, 2).is_zero() && minor(0, 3).is_zero() && minor(1, 2).is_zero() {
        return Err(Error::Degenerate("points coincide".into()));
    }
    // indices into [P, P', Q, Q']
    let slope = |num: usize, den: usize, alt_num: usize, alt_den: usize| -> Option<G> {
        for x in [&a, &b] {
            if !x[den].is_zero() {
                return Some(x[num].clone() / x[den].clone());
            }
        }
        for x in [&a, &b] {
            if !x[alt_den].is_zero() {
                return Some(-(x[alt_num].clone() / x[alt_den].clone()));
            }
        }
        None
    };
    if minor(0, 2).is_zero() && minor(3, 1).is_zero() {
        return Ok(GeneratorClass { family: Family::Left, mu: slope(0, 2, 3, 1) });
    }
    if minor(0, 3).is_zero() && minor(2, 1).is_zero() {
        return Ok(GeneratorClass { family: Family::Right, mu: slope(0, 3, 2, 1) });
    }
    Err(Error::NotOnAbsolute)
}

impl GeneratorLine {
    pub fn classify(&self) -> Result<GeneratorClass> {
        classify_generator(&self.p, &self.q)
    }

    pub fn map(&self, f: &ProjectiveMap5<Rational>) -> Result<GeneratorClass> {
        classify_generator(&f.apply_gaussian(&self.p), &f.apply_gaussian(&self.q))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circles::{meet_great_circle, Preset, RationalCircleParam};
    use crate::quat::hamilton_product;
    use crate::scalar::{int, rat};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn q(w: Rational, x: Rational, y: Rational, z: Rational) -> Quaternion<Rational> {
        Quaternion::new(w, x, y, z)
    }

    #[test]
    fn stereographic_examples() {
        assert_eq!(stereographic(&q(int(1), int(0), int(0), int(0))).unwrap(), [int(1), int(0), int(0)]);
        assert_eq!(stereographic(&q(int(0), int(0), int(0), int(-1))).unwrap(), [int(0), int(0), int(0)]);
        assert_eq!(stereographic(&Quaternion::<Rational>::k()), Err(Error::Pole));
        assert_eq!(inverse_stereographic(&[int(0), int(0), int(0)]), q(int(0), int(0), int(0), int(-1)));
        assert_eq!(inverse_stereographic(&[int(1), int(0), int(0)]), Quaternion::one());
        let p = inverse_stereographic(&[rat(1, 2), int(0), int(0)]);
        assert_eq!(p, q(rat(4, 5), int(0), int(0), rat(-3, 5)));
        assert!(p.norm_sqr().is_one());
    }

    #[test]
    fn a0_projects_to_unit_circle() {
        let a0 = RationalCircleParam::preset(Preset::A0);
        for k in -6i64..6 {
            let x = stereographic(&a0.eval_rational(&k.into(), &3.into())).unwrap();
            assert!(x[2].is_zero());
            assert!((&x[0] * &x[0] + &x[1] * &x[1]).is_one());
        }
    }

    #[test]
    fn general_center() {
        let c = UnitQuaternion::new(q(rat(3, 5), int(0), int(0), rat(4, 5))).unwrap();
        let st = Stereographic::new(c.clone());
        assert_eq!(st.project(&*c), Err(Error::Pole));
        let anti = -(*c).clone();
        assert_eq!(st.project(&anti).unwrap(), [int(0), int(0), int(0)]);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let x = [0, 1, 2].map(|_| rat(rng.random_range(-9..9), rng.random_range(1..9)));
            let p = st.inverse(&x);
            assert!(p.norm_sqr().is_one());
            assert_eq!(st.project(&p).unwrap(), x);
        }
        let proj: Projection = "stereo:0.6,0,0,0.8".parse().unwrap();
        assert_eq!(proj.stereographic().unwrap().center(), &c);
        assert_eq!(proj.to_string(), "stereo:3/5,0,0,4/5");
        assert!(matches!("stereo:1,1,0,0".parse::<Projection>(), Err(Error::NotUnit(_))));
        assert_eq!("stereo:0,0,0,1".parse::<Projection>().unwrap(), Projection::Stereo);
        assert!("mercator".parse::<Projection>().is_err());
    }

    proptest! {
        #[test]
        fn stereographic_round_trip(a in -50i64..50, b in -50i64..50, c in -50i64..50, d in 1i64..30) {
            let x = [rat(a, d), rat(b, d), rat(c, d)];
            let p = inverse_stereographic(&x);
            prop_assert!(p.norm_sqr().is_one());
            prop_assert_eq!(stereographic(&p).unwrap(), x);
        }
    }

    #[test]
    fn inversion_examples() {
        let o = [0.0, 0.0, 0.0];
        assert_eq!(inversion(&o, &1.0, &[2.0, 0.0, 0.0]).unwrap(), [0.5, 0.0, 0.0]);
        let c = [int(1), int(2), int(-1)];
        let r = rat(3, 2);
        let on = [int(1), rat(7, 2), int(-1)];
        assert_eq!(inversion(&c, &r, &on).unwrap(), on);
        let x = [rat(2, 7), int(5), rat(-1, 3)];
        let y = inversion(&c, &r, &x).unwrap();
        assert_eq!(inversion(&c, &r, &y).unwrap(), x);
        assert_eq!(inversion(&c, &r, &c), Err(Error::InversionCenter));
    }

    #[test]
    fn inversion_maps_circles_to_circles() {
        let circle: Vec<[f64; 3]> = (0..24)
            .map(|k| {
                let t = k as f64 * 0.26;
                [2.0 + t.cos(), t.sin() / 2f64.sqrt(), 1.0 + t.sin() / 2f64.sqrt()]
            })
            .collect();
        assert!(circle_fit_residual(&circle) < 1e-12);
        let image: Vec<[f64; 3]> = circle.iter().map(|x| inversion(&[0.3, -0.2, 0.1], &1.7, x).unwrap()).collect();
        assert!(circle_fit_residual(&image) < 1e-10);
        let bent: Vec<[f64; 3]> = (0..24).map(|k| [k as f64, (k * k) as f64 * 0.1, 0.0]).collect();
        assert!(circle_fit_residual(&bent) > 1e-3);
    }

    #[test]
    fn stereographic_sends_circles_to_circles() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let centers = ["stereo:default", "stereo:3/5,0,0,4/5", "stereo:2/7,3/7,6/7,0"];
        for _ in 0..10 {
            let a = random_unit_quaternion(&mut rng, 9);
            let c = RationalCircleParam::preset(Preset::B1).translate_left(&a);
            for spec in centers {
                let st = spec.parse::<Projection>().unwrap().stereographic().unwrap();
                let pts: Vec<[f64; 3]> = (0..16)
                    .filter_map(|k| st.project(&c.eval_angle(k as f64 * 0.39)).ok())
                    .collect();
                assert!(circle_fit_residual(&pts) < 1e-10, "{spec}");
            }
        }
    }

    #[test]
    fn translations() {
        let one = UnitQuaternion::<Rational>::identity();
        assert!(left_translation(&one).projectively_eq(&ProjectiveMap5::identity()));
        let i = UnitQuaternion::new(Quaternion::<Rational>::i()).unwrap();
        let p = ProjectivePoint5::new([int(1), int(1), int(0), int(0), int(0)]).unwrap();
        let want = ProjectivePoint5::new([int(1), int(0), int(1), int(0), int(0)]).unwrap();
        assert_eq!(left_translation(&i).apply(&p), want);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10 {
            let a = random_unit_quaternion(&mut rng, 12);
            let b = random_unit_quaternion(&mut rng, 12);
            let (la, lb) = (left_translation(&a), left_translation(&b));
            assert!(la.is_elliptic() && right_translation(&b).is_elliptic());
            assert!(la.compose(&lb).projectively_eq(&left_translation(&(&a * &b))));
            let (ra, rb) = (right_translation(&a), right_translation(&b));
            assert!(ra.compose(&rb).projectively_eq(&right_translation(&(&b * &a))));
            assert!(!la.determinant().is_zero());
        }
        let shear = ProjectiveMap5::from_block(&[[int(1), int(1), int(0), int(0)], [int(0), int(1), int(0), int(0)], [int(0), int(0), int(1), int(0)], [int(0), int(0), int(0), int(1)]]);
        assert!(!shear.is_elliptic());
        assert!(ProjectiveMap5::<Rational>::new(std::array::from_fn(|_| std::array::from_fn(|_| int(0)))).is_err());
    }

    #[test]
    fn isoclinic_law() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let a = random_unit_quaternion(&mut rng, 20);
        for _ in 0..100 {
            let x = random_unit_quaternion(&mut rng, 20);
            let ax = hamilton_product(&a, &x);
            assert_eq!(x.dot(&ax), *a.re());
        }
    }

    #[test]
    fn central_projection_examples() {
        let p = ProjectivePoint5::new([int(1), int(0), int(1), int(0), int(0)]).unwrap();
        assert_eq!(central_projection(&p).unwrap(), [int(0), int(1), int(0), int(0)]);
        let plus = central_projection(&ProjectivePoint5::gamma_inv(&Quaternion::<Rational>::one())).unwrap();
        let minus = central_projection(&ProjectivePoint5::gamma_inv(&-Quaternion::<Rational>::one())).unwrap();
        assert!(homogeneous_eq(&plus, &minus));
        let center = ProjectivePoint5::new([int(1), int(0), int(0), int(0), int(0)]).unwrap();
        assert_eq!(central_projection(&center), Err(Error::CentralProjectionCenter));
        let a0 = RationalCircleParam::preset(Preset::A0);
        for k in 0..8i64 {
            let x = a0.eval_rational(&k.into(), &(k + 1).into());
            let t = central_projection(&ProjectivePoint5::gamma_inv(&x)).unwrap();
            assert!(t[2].is_zero() && t[3].is_zero());
        }
    }

    fn random_gaussian(rng: &mut ChaCha8Rng) -> G {
        G::new(rat(rng.random_range(-20..20), rng.random_range(1..9)), rat(rng.random_range(-20..20), rng.random_range(1..9)))
    }

    #[test]
    fn generators_lie_on_absolute() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for family in [Family::Left, Family::Right] {
            for _ in 0..10 {
                let mu = random_gaussian(&mut rng);
                let line = generator_line(family, &mu);
                for t in 0..4 {
                    let s = G::new(int(t), int(1 - t));
                    let x: [G; 5] = std::array::from_fn(|k| line.p[k].clone() + s.clone() * line.q[k].clone());
                    assert!(on_absolute(&x));
                }
                let class = line.classify().unwrap();
                assert_eq!(class.family, family);
                assert_eq!(class.mu, Some(mu));
            }
        }
        let off = [G::zero(), G::one(), G::zero(), G::zero(), G::zero()];
        assert_eq!(classify_generator(&off, &off), Err(Error::NotOnAbsolute));
    }

    #[test]
    fn families_are_preserved() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..20 {
            let a = random_unit_quaternion(&mut rng, 15);
            let maps = [(left_translation(&a), true), (right_translation(&a), false)];
            for family in [Family::Left, Family::Right] {
                for _ in 0..5 {
                    let line = generator_line(family, &random_gaussian(&mut rng));
                    let mu = line.classify().unwrap().mu;
                    for (map, is_left) in &maps {
                        let image = line.map(map).unwrap();
                        assert_eq!(image.family, family);
                        let fixed_kind = if LEFT_FIXED_BY_LEFT_TRANSLATIONS { *is_left } else { !*is_left };
                        if (family == Family::Left) == fixed_kind {
                            assert_eq!(image.mu, mu);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn elliptic_maps_preserve_meet_counts() {
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        let a0 = RationalCircleParam::preset(Preset::A0);
        for _ in 0..6 {
            let t = random_unit_quaternion(&mut rng, 7);
            let small = RationalCircleParam::preset(Preset::B1).translate_left(&t);
            let base = meet_great_circle(&small, &a0.plane_form().unwrap()).unwrap().q;
            let g = random_unit_quaternion(&mut rng, 7);
            let h = random_unit_quaternion(&mut rng, 7);
            let m = left_mul_matrix(&g);
            let n = right_mul_matrix(&h);
            let moved_small = small.transform(&m).transform(&n);
            let moved_great = a0.transform(&m).transform(&n).plane_form().unwrap();
            assert_eq!(meet_great_circle(&moved_small, &moved_great).unwrap().q, base);
        }
    }
}
