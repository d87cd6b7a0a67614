//! Divisor classes in the rank-2 lattice `⟨ℓ₀, ℓ₁⟩` with `ℓ₀² = ℓ₁² = 0`,
//! `ℓ₀·ℓ₁ = 1`, the arithmetic genus and the total sectional delta invariants.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{rat, Rational};

/// `a·ℓ₀ + b·ℓ₁`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DivisorClass {
    pub a: i64,
    pub b: i64,
}

impl DivisorClass {
    pub const fn new(a: i64, b: i64) -> Self {
        Self { a, b }
    }

    pub const fn l0() -> Self {
        Self::new(1, 0)
    }

    pub const fn l1() -> Self {
        Self::new(0, 1)
    }

    /// `2ℓ₀ + 2ℓ₁`, the hyperplane class of a surface in S³ with two circle pencils.
    pub const fn hyperplane() -> Self {
        Self::new(2, 2)
    }

    /// `self · self`.
    pub fn square(self) -> i64 {
        intersect(self, self)
    }
}

impl fmt::Display for DivisorClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}ℓ₀{:+}ℓ₁", self.a, self.b)
    }
}

impl Add for DivisorClass {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.a + o.a, self.b + o.b)
    }
}

impl Sub for DivisorClass {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.a - o.a, self.b - o.b)
    }
}

impl Neg for DivisorClass {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.a, -self.b)
    }
}

impl Mul<DivisorClass> for i64 {
    type Output = DivisorClass;
    fn mul(self, c: DivisorClass) -> DivisorClass {
        DivisorClass::new(self * c.a, self * c.b)
    }
}

/// `(a, b)·(a′, b′) = ab′ + ba′`.
pub fn intersect(c: DivisorClass, d: DivisorClass) -> i64 {
    c.a * d.b + c.b * d.a
}

/// `½(c² + c·k) + 1`; fails when `c² + c·k` is odd.
pub fn arithmetic_genus(c: DivisorClass, k: DivisorClass) -> Result<i64> {
    let s = c.square() + intersect(c, k);
    if s.is_odd() {
        return Err(Error::NonIntegralGenus);
    }
    Ok(s / 2 + 1)
}

/// Total delta of a surface of degree `d` in ℙ³: `d/2·(d − 4) − ½·h·k`.
pub fn delta_p3(d: i64, hk: i64) -> Rational {
    rat(d, 2) * rat(d - 4, 1) - rat(hk, 2)
}

/// Total delta of a surface of degree `d` in the Möbius quadric: `d/2·(d/2 − 3) − ½·h·k`.
pub fn delta_s3(d: i64, hk: i64) -> Rational {
    rat(d, 2) * (rat(d, 2) - rat(3, 1)) - rat(hk, 2)
}

/// A total delta together with its split over singular components.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DeltaChain {
    pub name: &'static str,
    pub h: DivisorClass,
    pub k: DivisorClass,
    pub degree: i64,
    /// Formula value.
    pub total: String,
    pub components: Vec<(&'static str, i64)>,
}

impl DeltaChain {
    pub fn component_sum(&self) -> i64 {
        self.components.iter().map(|c| c.1).sum()
    }

    pub fn total_value(&self) -> Rational {
        self.total.parse().expect("formatted rational")
    }

    /// The formula value is an integer equal to the component sum.
    pub fn balances(&self) -> bool {
        self.total_value() == rat(self.component_sum(), 1)
    }

    /// `"8 = 1+1+2+2+2"`.
    pub fn equation(&self) -> String {
        let parts: Vec<String> = self.components.iter().map(|c| c.1.to_string()).collect();
        format!("{} = {}", self.total, parts.join("+"))
    }
}

/// The double circle `V`, two antipodal small circles `L, L̄` and the pair `R, R̄`
/// of the normal forms in S³.
pub fn s3_chain() -> DeltaChain {
    let h = DivisorClass::hyperplane();
    let k = -h;
    DeltaChain {
        name: "S3",
        h,
        k,
        degree: h.square(),
        total: delta_s3(h.square(), intersect(h, k)).to_string(),
        components: vec![("L", 1), ("L̄", 1), ("R", 2), ("R̄", 2), ("V", 2)],
    }
}

/// The central projection: `h = 2ℓ₀ + ℓ₁`, `k = −2(ℓ₀ + ℓ₁)`, degree 4, with
/// components `τR, τR̄` and the double line `τV`.
pub fn p3_chain() -> DeltaChain {
    let h = DivisorClass::new(2, 1);
    let k = -2 * (DivisorClass::l0() + DivisorClass::l1());
    DeltaChain {
        name: "P3",
        h,
        k,
        degree: h.square(),
        total: delta_p3(h.square(), intersect(h, k)).to_string(),
        components: vec![("τR", 1), ("τR̄", 1), ("τV", 1)],
    }
}
