//! Quaternion algebra on S³ ⊂ ℝ⁴ and the bridge to the projective model in ℙ⁴.
//!
//! Coordinates are ordered `(w, x, y, z)` = `(1, i, j, k)`, matching the point
//! `(x₁, x₂, x₃, x₄) ∈ ℝ⁴`.

use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{Rational, Scalar};

/// Float-mode tolerance for `‖q‖² = 1`.
pub const UNIT_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct Quaternion<T> {
    pub w: T,
    pub x: T,
    pub y: T,
    pub z: T,
}

pub type RatQuaternion = Quaternion<Rational>;

impl<T> Quaternion<T> {
    pub const fn new(w: T, x: T, y: T, z: T) -> Self {
        Self { w, x, y, z }
    }

    pub fn from_array([w, x, y, z]: [T; 4]) -> Self {
        Self { w, x, y, z }
    }

    pub fn into_array(self) -> [T; 4] {
        [self.w, self.x, self.y, self.z]
    }

    pub fn map<U>(self, mut f: impl FnMut(T) -> U) -> Quaternion<U> {
        Quaternion::new(f(self.w), f(self.x), f(self.y), f(self.z))
    }

    pub fn as_array(&self) -> [&T; 4] {
        [&self.w, &self.x, &self.y, &self.z]
    }
}

impl<T: Clone> Quaternion<T> {
    pub fn to_array(&self) -> [T; 4] {
        [self.w.clone(), self.x.clone(), self.y.clone(), self.z.clone()]
    }
}

impl<T: Zero + One> Quaternion<T> {
    pub fn one() -> Self {
        Self::new(T::one(), T::zero(), T::zero(), T::zero())
    }
    pub fn i() -> Self {
        Self::new(T::zero(), T::one(), T::zero(), T::zero())
    }
    pub fn j() -> Self {
        Self::new(T::zero(), T::zero(), T::one(), T::zero())
    }
    pub fn k() -> Self {
        Self::new(T::zero(), T::zero(), T::zero(), T::one())
    }
}

impl<T> Quaternion<T>
where
    T: Clone + Add<Output = T> + Sub<Output = T> + Mul<Output = T> + Neg<Output = T>,
{
    pub fn conjugate(&self) -> Self {
        Self::new(self.w.clone(), -self.x.clone(), -self.y.clone(), -self.z.clone())
    }

    pub fn norm_sqr(&self) -> T {
        self.dot(self)
    }

    /// Euclidean inner product in ℝ⁴.
    pub fn dot(&self, o: &Self) -> T {
        self.w.clone() * o.w.clone()
            + self.x.clone() * o.x.clone()
            + self.y.clone() * o.y.clone()
            + self.z.clone() * o.z.clone()
    }

    pub fn scale(&self, s: &T) -> Self {
        self.clone().map(|c| c * s.clone())
    }
}

/// Hamilton product.
pub fn hamilton_product<T>(a: &Quaternion<T>, b: &Quaternion<T>) -> Quaternion<T>
where
    T: Clone + Add<Output = T> + Sub<Output = T> + Mul<Output = T>,
{
    let (a0, a1, a2, a3) = (a.w.clone(), a.x.clone(), a.y.clone(), a.z.clone());
    let (b0, b1, b2, b3) = (b.w.clone(), b.x.clone(), b.y.clone(), b.z.clone());
    Quaternion::new(
        a0.clone() * b0.clone() - a1.clone() * b1.clone() - a2.clone() * b2.clone() - a3.clone() * b3.clone(),
        a0.clone() * b1.clone() + a1.clone() * b0.clone() + a2.clone() * b3.clone() - a3.clone() * b2.clone(),
        a0.clone() * b2.clone() - a1.clone() * b3.clone() + a2.clone() * b0.clone() + a3.clone() * b1.clone(),
        a0 * b3 + a1 * b2 - a2 * b1 + a3 * b0,
    )
}

impl<T> Mul for &Quaternion<T>
where
    T: Clone + Add<Output = T> + Sub<Output = T> + Mul<Output = T>,
{
    type Output = Quaternion<T>;
    fn mul(self, rhs: Self) -> Quaternion<T> {
        hamilton_product(self, rhs)
    }
}

impl<T> Mul for Quaternion<T>
where
    T: Clone + Add<Output = T> + Sub<Output = T> + Mul<Output = T>,
{
    type Output = Quaternion<T>;
    fn mul(self, rhs: Self) -> Quaternion<T> {
        hamilton_product(&self, &rhs)
    }
}

impl<T: Add<Output = T>> Add for Quaternion<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.w + o.w, self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl<T: Sub<Output = T>> Sub for Quaternion<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.w - o.w, self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl<T: Neg<Output = T>> Neg for Quaternion<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.w, -self.x, -self.y, -self.z)
    }
}

impl<T: Scalar> Quaternion<T> {
    pub fn to_f64(&self) -> Quaternion<f64> {
        Quaternion::new(self.w.to_f64(), self.x.to_f64(), self.y.to_f64(), self.z.to_f64())
    }

    pub fn is_unit(&self) -> bool {
        let n = self.norm_sqr() - T::one();
        n.is_negligible(UNIT_TOLERANCE)
    }
}

impl Quaternion<f64> {
    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn distance(&self, o: &Self) -> f64 {
        (self.clone() - o.clone()).norm()
    }
}

/// Inverse of a unit quaternion given as a plain quaternion; rejects non-unit input.
pub fn inverse<T: Scalar>(q: &Quaternion<T>) -> Result<Quaternion<T>> {
    Ok(UnitQuaternion::new(q.clone())?.inverse().into_inner())
}

/// A point of S³: `‖q‖² = 1` exactly (rational mode) or to 1e-12 (float mode).
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct UnitQuaternion<T>(Quaternion<T>);

impl<T: Scalar> UnitQuaternion<T> {
    pub fn new(q: Quaternion<T>) -> Result<Self> {
        if q.is_unit() {
            Ok(Self(q))
        } else {
            Err(Error::NotUnit(format!("{:?}", q.norm_sqr())))
        }
    }

    pub fn identity() -> Self {
        Self(Quaternion::one())
    }

    pub fn inverse(&self) -> Self {
        Self(self.0.conjugate())
    }

    /// Real part, equal to the cosine of the isoclinic rotation angle of `x ↦ a⋆x`.
    pub fn re(&self) -> &T {
        &self.0.w
    }

    pub fn into_inner(self) -> Quaternion<T> {
        self.0
    }

    pub fn to_f64(&self) -> UnitQuaternion<f64> {
        UnitQuaternion(self.0.to_f64())
    }
}

impl UnitQuaternion<f64> {
    /// Normalizes an arbitrary non-zero float quaternion onto S³.
    pub fn normalize(q: Quaternion<f64>) -> Result<Self> {
        let n = q.norm();
        if n == 0.0 || !n.is_finite() {
            return Err(Error::NotUnit(format!("{n}")));
        }
        Ok(Self(q.scale(&(1.0 / n))))
    }
}

impl<T> std::ops::Deref for UnitQuaternion<T> {
    type Target = Quaternion<T>;
    fn deref(&self) -> &Quaternion<T> {
        &self.0
    }
}

impl<T: Scalar> Mul for &UnitQuaternion<T> {
    type Output = UnitQuaternion<T>;
    fn mul(self, rhs: Self) -> UnitQuaternion<T> {
        UnitQuaternion(hamilton_product(&self.0, &rhs.0))
    }
}

/// Point `(x₀ : … : x₄)` of ℙ⁴, up to a non-zero common scale.
#[derive(Clone, Debug, Serialize)]
pub struct ProjectivePoint5<T>([T; 5]);

impl<T: Scalar> ProjectivePoint5<T> {
    pub fn new(coords: [T; 5]) -> Result<Self> {
        if coords.iter().all(|c| c.is_negligible(0.0)) {
            return Err(Error::ZeroPoint);
        }
        Ok(Self(coords))
    }

    pub fn coords(&self) -> &[T; 5] {
        &self.0
    }

    /// `(x₁/x₀, …, x₄/x₀)`; the affine chart containing S³.
    pub fn gamma(&self) -> Result<Quaternion<T>> {
        let [x0, x1, x2, x3, x4] = &self.0;
        if x0.is_negligible(0.0) {
            return Err(Error::AtInfinity);
        }
        Ok(Quaternion::new(
            x1.clone() / x0.clone(),
            x2.clone() / x0.clone(),
            x3.clone() / x0.clone(),
            x4.clone() / x0.clone(),
        ))
    }

    /// `(1 : w : x : y : z)`.
    pub fn gamma_inv(q: &Quaternion<T>) -> Self {
        Self([T::one(), q.w.clone(), q.x.clone(), q.y.clone(), q.z.clone()])
    }

    /// Value of the Möbius form `−x₀² + x₁² + x₂² + x₃² + x₄²`.
    pub fn moebius_form(&self) -> T {
        let [x0, rest @ ..] = &self.0;
        rest.iter()
            .fold(-(x0.clone() * x0.clone()), |acc, c| acc + c.clone() * c.clone())
    }
}

/// Projective equality: every 2×2 minor of the coordinate pair vanishes.
impl<T: Scalar> PartialEq for ProjectivePoint5<T> {
    fn eq(&self, other: &Self) -> bool {
        let (a, b) = (&self.0, &other.0);
        let scale = if T::EXACT {
            0.0
        } else {
            let m = a.iter().chain(b.iter()).map(|c| c.to_f64().abs()).fold(0.0, f64::max);
            1e-12 * m * m
        };
        (0..5).all(|i| {
            (i + 1..5).all(|j| {
                (a[i].clone() * b[j].clone() - a[j].clone() * b[i].clone()).is_negligible(scale)
            })
        })
    }
}

/// Projective map `x ↦ a⋆x` as a 4×4 matrix acting on `(w, x, y, z)`.
pub fn left_mul_matrix<T: Scalar>(a: &Quaternion<T>) -> [[T; 4]; 4] {
    let basis = [Quaternion::one(), Quaternion::i(), Quaternion::j(), Quaternion::k()];
    let cols = basis.map(|e| hamilton_product(a, &e).into_array());
    std::array::from_fn(|r| std::array::from_fn(|c| cols[c][r].clone()))
}

/// 4×4 matrix of `x ↦ x⋆b`.
pub fn right_mul_matrix<T: Scalar>(b: &Quaternion<T>) -> [[T; 4]; 4] {
    let basis = [Quaternion::one(), Quaternion::i(), Quaternion::j(), Quaternion::k()];
    let cols = basis.map(|e| hamilton_product(&e, b).into_array());
    std::array::from_fn(|r| std::array::from_fn(|c| cols[c][r].clone()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, rat};
    use proptest::prelude::*;

    type Q = RatQuaternion;

    fn q(w: i64, x: i64, y: i64, z: i64) -> Q {
        Quaternion::new(int(w), int(x), int(y), int(z))
    }

    #[test]
    fn multiplication_table() {
        assert_eq!(Q::i() * Q::j(), Q::k());
        assert_eq!(Q::j() * Q::k(), Q::i());
        assert_eq!(Q::k() * Q::i(), Q::j());
        assert_eq!(Q::i() * Q::i(), -Q::one());
        assert_ne!(Q::i() * Q::j(), Q::j() * Q::i());
    }

    #[test]
    fn identity_is_neutral() {
        let a = q(3, -1, 4, 2);
        assert_eq!(&Q::one() * &a, a);
        assert_eq!(&a * &Q::one(), a);
    }

    #[test]
    fn rotation_times_b_expands() {
        // (cos s + i sin s)(b0 + b1 i + b3 k) with cos s = 3/5, sin s = 4/5
        let (c, s) = (rat(3, 5), rat(4, 5));
        let (b0, b1, b3) = (rat(2, 7), rat(-1, 3), rat(5, 11));
        let a = Quaternion::new(c.clone(), s.clone(), int(0), int(0));
        let b = Quaternion::new(b0.clone(), b1.clone(), int(0), b3.clone());
        let expected = Quaternion::new(
            &b0 * &c - &b1 * &s,
            &b0 * &s + &b1 * &c,
            -(&b3 * &s),
            &b3 * &c,
        );
        assert_eq!(a * b, expected);
    }

    #[test]
    fn conjugate_and_inverse() {
        assert_eq!(Q::i().conjugate(), -Q::i());
        assert_eq!(inverse(&Q::k()).unwrap(), -Q::k());
        assert!(matches!(inverse(&q(1, 1, 0, 0)), Err(Error::NotUnit(_))));
        let u = UnitQuaternion::new(Quaternion::new(rat(1, 2), rat(1, 2), rat(-1, 2), rat(1, 2))).unwrap();
        assert_eq!((&u * &u.inverse()).into_inner(), Q::one());
    }

    #[test]
    fn float_unit_tolerance() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!(UnitQuaternion::new(Quaternion::new(s, s, 0.0, 0.0)).is_ok());
        assert!(UnitQuaternion::new(Quaternion::new(1.0, 1e-5, 0.0, 0.0)).is_err());
    }

    #[test]
    fn gamma_charts() {
        let p = ProjectivePoint5::new([int(2), int(2), int(0), int(0), int(0)]).unwrap();
        assert_eq!(p.gamma().unwrap(), Q::one());
        let pi = ProjectivePoint5::gamma_inv(&Q::i());
        assert_eq!(pi.coords(), &[int(1), int(0), int(1), int(0), int(0)]);
        let p = ProjectivePoint5::new([int(1), rat(3, 5), rat(4, 5), int(0), int(0)]).unwrap();
        let g = p.gamma().unwrap();
        assert_eq!(g, Quaternion::new(rat(3, 5), rat(4, 5), int(0), int(0)));
        assert!(g.is_unit());
        let inf = ProjectivePoint5::new([int(0), int(1), int(0), int(0), int(0)]).unwrap();
        assert_eq!(inf.gamma(), Err(Error::AtInfinity));
        assert!(ProjectivePoint5::<Rational>::new([int(0), int(0), int(0), int(0), int(0)]).is_err());
    }

    #[test]
    fn projective_equality_is_scale_free() {
        let a = ProjectivePoint5::new([int(1), rat(1, 2), int(0), int(-3), int(2)]).unwrap();
        let b = ProjectivePoint5::new([int(-4), int(-2), int(0), int(12), int(-8)]).unwrap();
        let c = ProjectivePoint5::new([int(1), rat(1, 2), int(0), int(-3), int(3)]).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        let af = ProjectivePoint5::new([1.0, 0.5, 0.0, -3.0, 2.0]).unwrap();
        let bf = ProjectivePoint5::new([0.1, 0.05, 0.0, -0.3, 0.2]).unwrap();
        assert_eq!(af, bf);
    }

    #[test]
    fn multiplication_matrices() {
        let a = q(1, 2, -3, 4);
        let x = q(-2, 5, 1, 7);
        let m = left_mul_matrix(&a);
        let xa = x.to_array();
        let y: [Rational; 4] = std::array::from_fn(|r| (0..4).map(|c| &m[r][c] * &xa[c]).sum());
        assert_eq!(Quaternion::from_array(y), &a * &x);
        let m = right_mul_matrix(&a);
        let y: [Rational; 4] = std::array::from_fn(|r| (0..4).map(|c| &m[r][c] * &xa[c]).sum());
        assert_eq!(Quaternion::from_array(y), &x * &a);
    }

    fn small_q() -> impl Strategy<Value = Q> {
        prop::array::uniform4((-30i64..30, 1i64..12))
            .prop_map(|a| Quaternion::from_array(a.map(|(n, d)| rat(n, d))))
    }

    /// Unit rational quaternions from the Euler four-square parametrization.
    fn unit_q() -> impl Strategy<Value = Q> {
        prop::array::uniform4(-9i64..9)
            .prop_filter("nonzero", |a| a.iter().any(|&c| c != 0))
            .prop_map(|[a, b, c, d]| {
                let n = a * a + b * b + c * c + d * d;
                let p = Quaternion::new(int(a), int(b), int(c), int(d));
                // p ⋆ i ⋆ p̄ / n is a pure unit; mix with the real axis for variety
                let v = (&(&p * &Q::i()) * &p.conjugate()).scale(&rat(1, n));
                let u = Quaternion::new(rat(3, 5), int(0), int(0), int(0)) + v.scale(&rat(4, 5));
                u
            })
    }

    proptest! {
        #[test]
        fn norm_is_multiplicative(a in small_q(), b in small_q()) {
            prop_assert_eq!((&a * &b).norm_sqr(), a.norm_sqr() * b.norm_sqr());
        }

        #[test]
        fn product_is_associative(a in small_q(), b in small_q(), c in small_q()) {
            prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        }

        #[test]
        fn isoclinic_inner_product(a in unit_q(), x in unit_q()) {
            prop_assert!(a.is_unit() && x.is_unit());
            prop_assert_eq!(x.dot(&(&a * &x)), a.w.clone());
        }
    }
}
