//! Integer binary forms in a projective parameter `(v : w)` and bihomogeneous
//! forms on ℙ¹ × ℙ¹, the coordinate functions of circle and surface parametrizations.

use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::scalar::{integer_sqrt, ratio_to_f64, Rational, Scalar};

/// Homogeneous polynomial `Σ c[k] v^k w^(d−k)` with integer coefficients.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BinaryForm {
    coeffs: Vec<BigInt>,
}

impl BinaryForm {
    /// `coeffs[k]` multiplies `v^k w^(d−k)`; the degree is `coeffs.len() − 1`.
    pub fn new(coeffs: Vec<BigInt>) -> Self {
        assert!(!coeffs.is_empty(), "binary form needs a degree");
        Self { coeffs }
    }

    pub fn from_i64(coeffs: &[i64]) -> Self {
        Self::new(coeffs.iter().map(|&c| BigInt::from(c)).collect())
    }

    /// Quadratic `a v² + b vw + c w²`.
    pub fn quadratic(a: i64, b: i64, c: i64) -> Self {
        Self::from_i64(&[c, b, a])
    }

    pub fn zero(degree: usize) -> Self {
        Self::new(vec![BigInt::zero(); degree + 1])
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    pub fn eval<T: Scalar + From<BigIntScalar>>(&self, v: &T, w: &T) -> T {
        eval_binary(&self.coeffs, v, w)
    }

    pub fn eval_f64(&self, v: f64, w: f64) -> f64 {
        let d = self.degree() as i32;
        self.coeffs
            .iter()
            .enumerate()
            .map(|(k, c)| big_to_f64(c) * v.powi(k as i32) * w.powi(d - k as i32))
            .sum()
    }

    pub fn eval_int(&self, v: &BigInt, w: &BigInt) -> BigInt {
        let d = self.degree();
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(k, c)| c * num_traits::pow(v.clone(), k) * num_traits::pow(w.clone(), d - k))
            .sum()
    }

    pub fn eval_rational(&self, v: &Rational, w: &Rational) -> Rational {
        let d = self.degree();
        let mut sum = Rational::zero();
        for (k, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            sum += Rational::from_integer(c.clone())
                * num_traits::pow(v.clone(), k)
                * num_traits::pow(w.clone(), d - k);
        }
        sum
    }

    pub fn scale(&self, s: &BigInt) -> Self {
        Self::new(self.coeffs.iter().map(|c| c * s).collect())
    }

    pub fn content(&self) -> BigInt {
        self.coeffs.iter().fold(BigInt::zero(), |g, c| g.gcd(c))
    }

    /// Divides by the content and fixes the sign so the leading (highest `v`
    /// power) non-zero coefficient is positive.
    pub fn primitive(&self) -> Self {
        let g = self.content();
        if g.is_zero() {
            return self.clone();
        }
        let sign = self
            .coeffs
            .iter()
            .rev()
            .find(|c| !c.is_zero())
            .map_or(BigInt::one(), |c| if c.is_negative() { -BigInt::one() } else { BigInt::one() });
        Self::new(self.coeffs.iter().map(|c| c / &g * &sign).collect())
    }

    /// Discriminant `b² − 4ac` of a quadratic form.
    pub fn discriminant(&self) -> BigInt {
        assert_eq!(self.degree(), 2, "discriminant is implemented for quadratics");
        let (c, b, a) = (&self.coeffs[0], &self.coeffs[1], &self.coeffs[2]);
        b * b - BigInt::from(4) * a * c
    }

    /// Multiplicity of the root `(1 : 0)`, i.e. the power of `w` dividing the form.
    fn infinite_multiplicity(&self) -> usize {
        self.coeffs.iter().rev().take_while(|c| c.is_zero()).count()
    }

    /// Dehomogenized coefficients in `t = v/w`, low to high, trimmed.
    fn affine(&self) -> Vec<Rational> {
        let mut c: Vec<Rational> = self.coeffs.iter().cloned().map(Rational::from_integer).collect();
        while c.len() > 1 && c.last().is_some_and(Zero::is_zero) {
            c.pop();
        }
        c
    }

    fn from_affine(affine: &[Rational], degree: usize) -> Self {
        let lcm = affine.iter().fold(BigInt::one(), |l, c| l.lcm(c.denom()));
        let mut coeffs: Vec<BigInt> = affine.iter().map(|c| (c * Rational::from_integer(lcm.clone())).to_integer()).collect();
        coeffs.resize(degree + 1, BigInt::zero());
        Self::new(coeffs).primitive()
    }

    /// Greatest common divisor over ℚ as a primitive binary form, roots at
    /// `(1:0)` included. `gcd(0, g) = g`.
    pub fn gcd(&self, other: &Self) -> Self {
        if self.is_zero() {
            return other.primitive();
        }
        if other.is_zero() {
            return self.primitive();
        }
        let inf = self.infinite_multiplicity().min(other.infinite_multiplicity());
        let g = upoly_gcd(self.affine(), other.affine());
        let deg = g.len() - 1 + inf;
        Self::from_affine(&g, deg)
    }

    /// Substitutes `(v, w) ↦ (a v + b w, c v + d w)`.
    pub fn substitute(&self, a: i64, b: i64, c: i64, d: i64) -> Self {
        let deg = self.degree();
        let lin_v = BinaryForm::from_i64(&[b, a]);
        let lin_w = BinaryForm::from_i64(&[d, c]);
        let mut out = BinaryForm::zero(deg);
        for (k, coef) in self.coeffs.iter().enumerate() {
            if coef.is_zero() {
                continue;
            }
            let term = lin_v.pow(k) * lin_w.pow(deg - k);
            out = out + term.scale(coef);
        }
        out
    }

    pub fn pow(&self, e: usize) -> Self {
        (0..e).fold(BinaryForm::from_i64(&[1]), |acc, _| acc * self.clone())
    }

    /// Distinct real roots of a form of degree at most two, with multiplicities.
    /// Returns `None` for the zero form.
    pub fn real_roots(&self) -> Option<Vec<ProjRoot>> {
        if self.is_zero() {
            return None;
        }
        assert!(self.degree() <= 2, "root isolation is implemented up to degree 2");
        let inf = self.infinite_multiplicity();
        let mut roots = Vec::new();
        if inf > 0 {
            roots.push(ProjRoot::exact(BigInt::one(), BigInt::zero(), inf as u32));
        }
        // remaining affine polynomial in t, degree ≤ 2 − inf
        let aff: Vec<BigInt> = self.coeffs[..self.coeffs.len() - inf].to_vec();
        match aff.len() {
            0 | 1 => {}
            2 => {
                // c0 + c1 t = 0 → (v : w) = (−c0 : c1)
                roots.push(ProjRoot::exact(-aff[0].clone(), aff[1].clone(), 1));
            }
            3 => {
                let (c, b, a) = (&aff[0], &aff[1], &aff[2]);
                let disc = b * b - BigInt::from(4) * a * c;
                if disc.is_zero() {
                    roots.push(ProjRoot::exact(-b.clone(), BigInt::from(2) * a, 2));
                } else if disc.is_positive() {
                    if let Some(s) = integer_sqrt(&disc) {
                        for sgn in [-1, 1] {
                            roots.push(ProjRoot::exact(-b + &s * sgn, BigInt::from(2) * a, 1));
                        }
                    } else {
                        let (af, bf, df) = (big_to_f64(a), big_to_f64(b), big_to_f64(&disc).sqrt());
                        for sgn in [-1.0, 1.0] {
                            roots.push(ProjRoot::approx((-bf + sgn * df) / (2.0 * af), 1.0, 1));
                        }
                    }
                }
            }
            _ => unreachable!(),
        }
        Some(roots)
    }
}

/// Marker allowing generic evaluation to lift integer coefficients.
pub struct BigIntScalar(pub BigInt);

impl From<BigIntScalar> for Rational {
    fn from(b: BigIntScalar) -> Self {
        Rational::from_integer(b.0)
    }
}

impl From<BigIntScalar> for f64 {
    fn from(b: BigIntScalar) -> Self {
        big_to_f64(&b.0)
    }
}

fn eval_binary<T: Scalar + From<BigIntScalar>>(coeffs: &[BigInt], v: &T, w: &T) -> T {
    let d = coeffs.len() - 1;
    let mut sum = T::zero();
    for (k, c) in coeffs.iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        let mut term = T::from(BigIntScalar(c.clone()));
        for _ in 0..k {
            term = term * v.clone();
        }
        for _ in 0..d - k {
            term = term * w.clone();
        }
        sum = sum + term;
    }
    sum
}

pub fn big_to_f64(b: &BigInt) -> f64 {
    ratio_to_f64(&Rational::from_integer(b.clone()))
}

impl Add for BinaryForm {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        assert_eq!(self.degree(), o.degree(), "adding forms of different degrees");
        Self::new(self.coeffs.into_iter().zip(o.coeffs).map(|(a, b)| a + b).collect())
    }
}

impl Sub for BinaryForm {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        self + (-o)
    }
}

impl Neg for BinaryForm {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(self.coeffs.into_iter().map(|c| -c).collect())
    }
}

impl Mul for BinaryForm {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        let mut out = vec![BigInt::zero(); self.coeffs.len() + o.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Self::new(out)
    }
}

/// A real projective root `(v : w)` of a binary form.
#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct ProjRoot {
    /// Float representative, normalized to `v² + w² = 1` with `w ≥ 0`.
    pub v: f64,
    pub w: f64,
    /// Integer representative when the root is rational.
    #[serde(skip)]
    pub exact: Option<(BigInt, BigInt)>,
    pub multiplicity: u32,
}

impl ProjRoot {
    fn exact(v: BigInt, w: BigInt, multiplicity: u32) -> Self {
        let g = v.gcd(&w);
        let (mut v, mut w) = (v / &g, w / &g);
        if w.is_negative() || (w.is_zero() && v.is_negative()) {
            v = -v;
            w = -w;
        }
        let mut r = Self::approx(big_to_f64(&v), big_to_f64(&w), multiplicity);
        r.exact = Some((v, w));
        r
    }

    fn approx(v: f64, w: f64, multiplicity: u32) -> Self {
        let n = v.hypot(w);
        let (mut v, mut w) = (v / n, w / n);
        if w < 0.0 || (w == 0.0 && v < 0.0) {
            v = -v;
            w = -w;
        }
        Self { v, w, exact: None, multiplicity }
    }

    /// Angle θ with `(v : w) = (sin θ/2 : cos θ/2)`, in `[0, 2π)`.
    pub fn angle(&self) -> f64 {
        (2.0 * self.v.atan2(self.w)).rem_euclid(std::f64::consts::TAU)
    }
}

/// Euclidean gcd of univariate rational polynomials (low-to-high coefficients), monic.
fn upoly_gcd(mut a: Vec<Rational>, mut b: Vec<Rational>) -> Vec<Rational> {
    trim(&mut a);
    trim(&mut b);
    while !(b.len() == 1 && b[0].is_zero()) {
        let r = upoly_rem(&a, &b);
        a = b;
        b = r;
    }
    let lead = a.last().cloned().unwrap();
    if lead.is_zero() {
        return a;
    }
    a.into_iter().map(|c| c / &lead).collect()
}

fn trim(p: &mut Vec<Rational>) {
    while p.len() > 1 && p.last().is_some_and(Zero::is_zero) {
        p.pop();
    }
}

fn upoly_rem(a: &[Rational], b: &[Rational]) -> Vec<Rational> {
    let mut r = a.to_vec();
    let db = b.len() - 1;
    let lb = b[db].clone();
    while r.len() > db && !(r.len() == 1 && r[0].is_zero()) {
        let dr = r.len() - 1;
        let f = &r[dr] / &lb;
        for i in 0..=db {
            let t = &f * &b[i];
            r[dr - db + i] -= t;
        }
        r.pop();
        if r.is_empty() {
            r.push(Rational::zero());
        }
        trim(&mut r);
        if db == 0 {
            return vec![Rational::zero()];
        }
    }
    r
}

/// Bihomogeneous form `Σ c[i][j] u^i s^(du−i) v^j w^(dv−j)` on ℙ¹ × ℙ¹.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BiForm {
    coeffs: Vec<Vec<BigInt>>,
}

impl BiForm {
    pub fn new(coeffs: Vec<Vec<BigInt>>) -> Self {
        assert!(!coeffs.is_empty() && !coeffs[0].is_empty());
        assert!(coeffs.iter().all(|r| r.len() == coeffs[0].len()));
        Self { coeffs }
    }

    pub fn zero(du: usize, dv: usize) -> Self {
        Self::new(vec![vec![BigInt::zero(); dv + 1]; du + 1])
    }

    /// `f(u:s) · g(v:w)`.
    pub fn outer(f: &BinaryForm, g: &BinaryForm) -> Self {
        Self::new(
            f.coeffs()
                .iter()
                .map(|a| g.coeffs().iter().map(|b| a * b).collect())
                .collect(),
        )
    }

    pub fn degrees(&self) -> (usize, usize) {
        (self.coeffs.len() - 1, self.coeffs[0].len() - 1)
    }

    pub fn coeffs(&self) -> &[Vec<BigInt>] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().flatten().all(Zero::is_zero)
    }

    pub fn scale(&self, s: &BigInt) -> Self {
        Self::new(self.coeffs.iter().map(|r| r.iter().map(|c| c * s).collect()).collect())
    }

    pub fn eval_f64(&self, u: (f64, f64), v: (f64, f64)) -> f64 {
        let (du, dv) = self.degrees();
        let mut sum = 0.0;
        for (i, row) in self.coeffs.iter().enumerate() {
            let ui = u.0.powi(i as i32) * u.1.powi((du - i) as i32);
            for (j, c) in row.iter().enumerate() {
                if !c.is_zero() {
                    sum += big_to_f64(c) * ui * v.0.powi(j as i32) * v.1.powi((dv - j) as i32);
                }
            }
        }
        sum
    }

    pub fn eval_int(&self, u: (&BigInt, &BigInt), v: (&BigInt, &BigInt)) -> BigInt {
        let (du, dv) = self.degrees();
        let upow: Vec<BigInt> = (0..=du)
            .map(|i| num_traits::pow(u.0.clone(), i) * num_traits::pow(u.1.clone(), du - i))
            .collect();
        let vpow: Vec<BigInt> = (0..=dv)
            .map(|j| num_traits::pow(v.0.clone(), j) * num_traits::pow(v.1.clone(), dv - j))
            .collect();
        let mut sum = BigInt::zero();
        for (i, row) in self.coeffs.iter().enumerate() {
            for (j, c) in row.iter().enumerate() {
                if !c.is_zero() {
                    sum += c * &upow[i] * &vpow[j];
                }
            }
        }
        sum
    }

    /// Writes the form as `f(u:s)·g(v:w)` when its coefficient matrix has rank one.
    /// `g` is primitive; `f` carries the content.
    pub fn separate(&self) -> Option<(BinaryForm, BinaryForm)> {
        let (i0, j0) = self
            .coeffs
            .iter()
            .enumerate()
            .find_map(|(i, r)| r.iter().position(|c| !c.is_zero()).map(|j| (i, j)))?;
        let g = BinaryForm::new(self.coeffs[i0].clone()).primitive();
        let gj = &g.coeffs()[j0];
        let mut f = Vec::with_capacity(self.coeffs.len());
        for row in &self.coeffs {
            let (q, r) = row[j0].div_rem(gj);
            if !r.is_zero() {
                return None;
            }
            f.push(q);
        }
        let f = BinaryForm::new(f);
        (BiForm::outer(&f, &g) == *self).then_some((f, g))
    }
}

impl Add for BiForm {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        assert_eq!(self.degrees(), o.degrees(), "adding forms of different bidegrees");
        Self::new(
            self.coeffs
                .into_iter()
                .zip(o.coeffs)
                .map(|(a, b)| a.into_iter().zip(b).map(|(x, y)| x + y).collect())
                .collect(),
        )
    }
}

impl Sub for BiForm {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        self + (-o)
    }
}

impl Neg for BiForm {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(self.coeffs.into_iter().map(|r| r.into_iter().map(|c| -c).collect()).collect())
    }
}

impl Mul for BiForm {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        let (a1, b1) = self.degrees();
        let (a2, b2) = o.degrees();
        let mut out = BiForm::zero(a1 + a2, b1 + b2);
        for (i, r) in self.coeffs.iter().enumerate() {
            for (j, c) in r.iter().enumerate() {
                if c.is_zero() {
                    continue;
                }
                for (k, r2) in o.coeffs.iter().enumerate() {
                    for (l, c2) in r2.iter().enumerate() {
                        if !c2.is_zero() {
                            out.coeffs[i + k][j + l] += c * c2;
                        }
                    }
                }
            }
        }
        out
    }
}
