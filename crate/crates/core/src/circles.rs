//! Circles on S³: plane-pair form, exact rational parametrizations over ℙ¹, the
//! named normal-form circles, and intersection multiplicities against great circles.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{primitive_integer_vector, rational_nullspace};
use crate::poly::{big_to_f64, BinaryForm, ProjRoot};
use crate::quat::{Quaternion, UnitQuaternion};
use crate::scalar::{parse_rational, rational_sqrt, serde_rational, serde_rational_vec, Rational, Scalar};

/// Float-mode tolerance for orthogonality and offsets.
pub const FLOAT_TOLERANCE: f64 = 1e-12;

/// `S³ ∩ {x·n1 = d1} ∩ {x·n2 = d2}`.
///
/// Normals need not be unit length: exact circles such as `12 x₁ + x₄ = 9` have
/// irrational unit normals. They must be non-zero and orthogonal.
#[derive(Clone, Debug, PartialEq)]
pub struct Circle<T> {
    pub n1: [T; 4],
    pub n2: [T; 4],
    pub d1: T,
    pub d2: T,
}

fn dot<T: Scalar>(a: &[T; 4], b: &[T; 4]) -> T {
    a.iter().zip(b).fold(T::zero(), |s, (x, y)| s + x.clone() * y.clone())
}

impl<T: Scalar> Circle<T> {
    pub fn new(n1: [T; 4], n2: [T; 4], d1: T, d2: T) -> Result<Self> {
        let (a, b) = (dot(&n1, &n1), dot(&n2, &n2));
        if a.is_negligible(FLOAT_TOLERANCE) || b.is_negligible(FLOAT_TOLERANCE) {
            return Err(Error::InvalidCircle("zero normal".into()));
        }
        let c = dot(&n1, &n2);
        let scale = (a.to_f64() * b.to_f64()).sqrt();
        if !c.is_negligible(FLOAT_TOLERANCE * scale) {
            return Err(Error::InvalidCircle("normals are not orthogonal".into()));
        }
        let circle = Self { n1, n2, d1, d2 };
        let r2 = circle.radius_sqr();
        if r2.to_f64() <= 0.0 || r2.is_negligible(FLOAT_TOLERANCE) {
            return Err(Error::InvalidCircle("plane pair misses the sphere or touches it".into()));
        }
        Ok(circle)
    }

    pub fn is_great(&self) -> bool {
        self.d1.is_negligible(FLOAT_TOLERANCE) && self.d2.is_negligible(FLOAT_TOLERANCE)
    }

    /// `c = d1 n1/|n1|² + d2 n2/|n2|²`.
    pub fn center(&self) -> [T; 4] {
        let s1 = self.d1.clone() / dot(&self.n1, &self.n1);
        let s2 = self.d2.clone() / dot(&self.n2, &self.n2);
        std::array::from_fn(|i| s1.clone() * self.n1[i].clone() + s2.clone() * self.n2[i].clone())
    }

    /// `r² = 1 − |c|²`; rational in exact mode.
    pub fn radius_sqr(&self) -> T {
        let c = self.center();
        T::one() - dot(&c, &c)
    }

    /// Membership test: on S³ and on both planes (exact, or to 1e-9 in float mode).
    pub fn contains(&self, p: &[T; 4]) -> bool {
        let tol = 1e-9;
        (dot(p, p) - T::one()).is_negligible(tol)
            && (dot(p, &self.n1) - self.d1.clone()).is_negligible(tol)
            && (dot(p, &self.n2) - self.d2.clone()).is_negligible(tol)
    }

    pub fn to_f64(&self) -> Circle<f64> {
        Circle {
            n1: self.n1.clone().map(|x| x.to_f64()),
            n2: self.n2.clone().map(|x| x.to_f64()),
            d1: self.d1.to_f64(),
            d2: self.d2.to_f64(),
        }
    }

    /// Image under the linear map `x ↦ M x` with `M` orthogonal.
    pub fn transform(&self, m: &[[T; 4]; 4]) -> Result<Self> {
        // for orthogonal M the plane n·x = d maps to (M n)·y = d
        let apply = |n: &[T; 4]| -> [T; 4] { std::array::from_fn(|r| dot(&m[r], n)) };
        Self::new(apply(&self.n1), apply(&self.n2), self.d1.clone(), self.d2.clone())
    }
}

impl Circle<f64> {
    /// Orthonormal frame `(u, v)` of the circle's plane, Gram–Schmidt on the
    /// standard basis against `n1, n2`.
    pub fn frame(&self) -> ([f64; 4], [f64; 4]) {
        let norm = |a: [f64; 4]| {
            let l = dot(&a, &a).sqrt();
            a.map(|x| x / l)
        };
        let mut basis = vec![norm(self.n1), norm(self.n2)];
        let start = basis.len();
        for e in 0..4 {
            let mut v = [0.0; 4];
            v[e] = 1.0;
            for b in &basis {
                let c = dot(&v, b);
                for i in 0..4 {
                    v[i] -= c * b[i];
                }
            }
            if dot(&v, &v) > 1e-10 {
                basis.push(norm(v));
            }
            if basis.len() == 4 {
                break;
            }
        }
        (basis[start], basis[start + 1])
    }

    /// Angle-parametrized point function `t ↦ c + r (cos t · u + sin t · v)`.
    pub fn parametrize(&self) -> impl Fn(f64) -> [f64; 4] + Send + Sync {
        let c = self.center();
        let r = self.radius_sqr().sqrt();
        let (u, v) = self.frame();
        move |t| std::array::from_fn(|i| c[i] + r * (t.cos() * u[i] + t.sin() * v[i]))
    }
}

/// Named circles of the normal forms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Preset {
    /// Great circle `(cos α, sin α, 0, 0)` through 1 and i.
    A0,
    /// Small circle of great type I.
    B1,
    /// Small circle of great type II.
    B2,
    /// Small circle of great type III.
    B3,
    /// Great circle spanned by `(3/5, 0, 4/5, 0)` and `(0, 3/5, 0, −4/5)`;
    /// `A0⋆C` is the flat torus `|z₁| = 3/5, |z₂| = 4/5`.
    C,
    /// Great circle through 1 and j. `A0⋆J` contains `i⋆j = k`, the default
    /// stereographic center.
    J,
}

impl Preset {
    pub const ALL: [Preset; 6] = [Preset::A0, Preset::B1, Preset::B2, Preset::B3, Preset::C, Preset::J];
}

impl FromStr for Preset {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "A0" => Preset::A0,
            "B1" => Preset::B1,
            "B2" => Preset::B2,
            "B3" => Preset::B3,
            "C" => Preset::C,
            "J" => Preset::J,
            other => return Err(Error::UnknownPreset(other.to_string())),
        })
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

/// Four quadratic numerators over a common positive quadratic denominator in `(v : w)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RationalCircleParam {
    pub num: Quaternion<BinaryForm>,
    pub den: BinaryForm,
}

impl RationalCircleParam {
    /// Checks degrees and that the denominator is positive on real `(v : w)`.
    /// The on-sphere identity is not enforced; see [`Self::on_sphere_certificate`].
    pub fn new(num: [BinaryForm; 4], den: BinaryForm) -> Result<Self> {
        if num.iter().chain([&den]).any(|f| f.degree() != 2) {
            return Err(Error::InvalidCircle("coordinate functions must be quadratic".into()));
        }
        let [c, _, a] = [&den.coeffs()[0], &den.coeffs()[1], &den.coeffs()[2]];
        if !(den.discriminant().is_negative() && a.is_positive() && c.is_positive()) {
            return Err(Error::InvalidCircle("denominator must be positive definite".into()));
        }
        Ok(Self { num: Quaternion::from_array(num), den })
    }

    /// Weierstrass form `cos θ = (w²−v²)/(w²+v²)`, `sin θ = 2vw/(w²+v²)` of the named circles.
    pub fn preset(p: Preset) -> Self {
        let q = BinaryForm::quadratic;
        let zero = BinaryForm::zero(2);
        let (num, den) = match p {
            Preset::A0 => ([q(-1, 0, 1), q(0, 2, 0), zero.clone(), zero], q(1, 0, 1)),
            Preset::B1 => ([q(4, 0, 20), q(0, 16, 0), zero, q(-3, 0, 21)], q(5, 0, 29)),
            Preset::B2 => ([q(1, 0, 3), q(0, 2, 0), zero, q(0, 0, 4)], q(1, 0, 5)),
            Preset::B3 => ([q(4, 0, 8), q(0, 4, 0), zero, q(3, 0, 15)], q(5, 0, 17)),
            Preset::C => ([q(-3, 0, 3), q(0, 6, 0), q(-4, 0, 4), q(0, -8, 0)], q(5, 0, 5)),
            Preset::J => ([q(-1, 0, 1), zero.clone(), q(0, 2, 0), zero], q(1, 0, 1)),
        };
        Self::new(num, den).expect("presets are valid")
    }

    pub fn named_circle(name: &str) -> Result<Self> {
        Ok(Self::preset(name.parse()?))
    }

    /// `Σ numᵢ² ≡ den²` as an exact polynomial identity.
    pub fn on_sphere_certificate(&self) -> bool {
        let sum = self
            .num
            .as_array()
            .into_iter()
            .fold(BinaryForm::zero(4), |acc, f| acc + f.clone() * f.clone());
        sum == self.den.clone() * self.den.clone()
    }

    pub fn numerators(&self) -> [&BinaryForm; 4] {
        self.num.as_array()
    }

    pub fn eval_rational(&self, v: &BigInt, w: &BigInt) -> Quaternion<Rational> {
        let d = Rational::from_integer(self.den.eval_int(v, w));
        self.num.clone().map(|f| Rational::from_integer(f.eval_int(v, w)) / &d)
    }

    /// Integer numerators and denominator at `(v : w)`.
    pub fn eval_int(&self, v: &BigInt, w: &BigInt) -> (Quaternion<BigInt>, BigInt) {
        (self.num.clone().map(|f| f.eval_int(v, w)), self.den.eval_int(v, w))
    }

    pub fn eval_proj_f64(&self, v: f64, w: f64) -> Quaternion<f64> {
        let d = self.den.eval_f64(v, w);
        self.num.clone().map(|f| f.eval_f64(v, w) / d)
    }

    /// Point at angle θ, where `(v : w) = (sin θ/2 : cos θ/2)`.
    pub fn eval_angle(&self, theta: f64) -> Quaternion<f64> {
        let (s, c) = (theta / 2.0).sin_cos();
        self.eval_proj_f64(s, c)
    }

    /// Point and derivative with respect to θ.
    pub fn eval_angle_with_derivative(&self, theta: f64) -> (Quaternion<f64>, Quaternion<f64>) {
        let (v, w) = (theta / 2.0).sin_cos();
        let (dv, dw) = (w / 2.0, -v / 2.0);
        let val_der = |f: &BinaryForm| -> (f64, f64) {
            let d = f.degree() as i32;
            let (mut val, mut der) = (0.0, 0.0);
            for (k, c) in f.coeffs().iter().enumerate() {
                let (c, k) = (big_to_f64(c), k as i32);
                val += c * v.powi(k) * w.powi(d - k);
                if k > 0 {
                    der += c * k as f64 * v.powi(k - 1) * w.powi(d - k) * dv;
                }
                if k < d {
                    der += c * (d - k) as f64 * v.powi(k) * w.powi(d - k - 1) * dw;
                }
            }
            (val, der)
        };
        let (dval, dder) = val_der(&self.den);
        let pairs = self.num.clone().map(|f| val_der(&f));
        let point = pairs.clone().map(|(n, _)| n / dval);
        let deriv = pairs.map(|(n, nd)| (nd * dval - n * dder) / (dval * dval));
        (point, deriv)
    }

    /// Möbius change of parameter `(v, w) ↦ (a v + b w, c v + d w)`, `ad − bc ≠ 0`.
    pub fn reparametrize(&self, a: i64, b: i64, c: i64, d: i64) -> Result<Self> {
        if a * d - b * c == 0 {
            return Err(Error::Degenerate("singular reparametrization".into()));
        }
        let num = self.num.clone().map(|f| f.substitute(a, b, c, d));
        Self::new(num.into_array(), self.den.substitute(a, b, c, d))
    }

    /// Applies a rational linear map of ℝ⁴ to the numerators, clearing denominators.
    fn map_linear(&self, m: &[[Rational; 4]; 4]) -> Self {
        let lcm = m.iter().flatten().fold(BigInt::one(), |l, c| l.lcm(c.denom()));
        let mi: Vec<Vec<BigInt>> = m
            .iter()
            .map(|r| r.iter().map(|c| (c * Rational::from_integer(lcm.clone())).to_integer()).collect())
            .collect();
        let src = self.num.to_array();
        let num: [BinaryForm; 4] = std::array::from_fn(|r| {
            (0..4).fold(BinaryForm::zero(2), |acc, c| acc + src[c].scale(&mi[r][c]))
        });
        let den = self.den.scale(&lcm);
        // strip a common factor so coefficients stay small
        let g = num.iter().chain([&den]).fold(BigInt::zero(), |g, f| g.gcd(&f.content()));
        let div = |f: &BinaryForm| BinaryForm::new(f.coeffs().iter().map(|c| c / &g).collect());
        Self { num: Quaternion::from_array(num.each_ref().map(div)), den: div(&den) }
    }

    /// `{a}⋆C`.
    pub fn translate_left(&self, a: &UnitQuaternion<Rational>) -> Self {
        self.map_linear(&crate::quat::left_mul_matrix(a))
    }

    /// `C⋆{b}`.
    pub fn translate_right(&self, b: &UnitQuaternion<Rational>) -> Self {
        self.map_linear(&crate::quat::right_mul_matrix(b))
    }

    /// Image under an orthogonal rational map.
    pub fn transform(&self, m: &[[Rational; 4]; 4]) -> Self {
        self.map_linear(m)
    }

    /// The two affine hyperplanes containing the circle, solved from the
    /// coefficient identities `n·num − d·den ≡ 0`, orthogonalized and scaled to
    /// primitive integers.
    pub fn plane_form(&self) -> Result<Circle<Rational>> {
        let forms: Vec<&BinaryForm> = self.num.as_array().into_iter().chain([&self.den]).collect();
        let rows: Vec<Vec<Rational>> = (0..3)
            .map(|k| {
                forms
                    .iter()
                    .enumerate()
                    .map(|(i, f)| {
                        let c = Rational::from_integer(f.coeffs()[k].clone());
                        if i == 4 {
                            -c
                        } else {
                            c
                        }
                    })
                    .collect()
            })
            .collect();
        let ns = rational_nullspace(rows, 5);
        if ns.len() != 2 {
            return Err(Error::Degenerate(format!("expected two supporting planes, found {}", ns.len())));
        }
        let f1 = ns[0].clone();
        let mut f2 = ns[1].clone();
        let n = |f: &[Rational]| -> [Rational; 4] { std::array::from_fn(|i| f[i].clone()) };
        let c = dot(&n(&f1), &n(&f2)) / dot(&n(&f1), &n(&f1));
        for i in 0..5 {
            f2[i] = &f2[i] - &c * &f1[i];
        }
        let to_form = |f: &[Rational]| -> ([Rational; 4], Rational) {
            let ints = primitive_integer_vector(f);
            let r: Vec<Rational> = ints.into_iter().map(Rational::from_integer).collect();
            (std::array::from_fn(|i| r[i].clone()), r[4].clone())
        };
        let (n1, d1) = to_form(&f1);
        let (n2, d2) = to_form(&f2);
        Circle::new(n1, n2, d1, d2)
    }

    /// Rational parametrization of a plane-pair circle by projecting from a
    /// rational point `p0` on it (searched for when not given).
    pub fn from_circle(c: &Circle<Rational>, point: Option<[Rational; 4]>) -> Result<Self> {
        let p0 = match point {
            Some(p) if c.contains(&p) => p,
            Some(_) => return Err(Error::InvalidCircle("given point is not on the circle".into())),
            None => find_rational_point(c)?,
        };
        let (e, f) = direction_basis(c);
        // x(s,t) = p0·|se+tf|² − 2 (p0·(se+tf)) (se+tf)
        let q = |a: &[Rational; 4], b: &[Rational; 4]| dot(a, b);
        let (ee, ef, ff) = (q(&e, &e), q(&e, &f), q(&f, &f));
        let (pe, pf) = (q(&p0, &e), q(&p0, &f));
        let two = Rational::from_integer(2.into());
        // coefficients on [t², st, s²] = index [w², vw, v²] with (v, w) = (s, t)
        let den = [ff.clone(), &two * &ef, ee.clone()];
        let num: Vec<[Rational; 3]> = (0..4)
            .map(|i| {
                [
                    &p0[i] * &ff - &two * &pf * &f[i],
                    &p0[i] * &two * &ef - &two * (&pe * &f[i] + &pf * &e[i]),
                    &p0[i] * &ee - &two * &pe * &e[i],
                ]
            })
            .collect();
        let all: Vec<Rational> = num.iter().flatten().chain(den.iter()).cloned().collect();
        let lcm = all.iter().fold(BigInt::one(), |l, x| l.lcm(x.denom()));
        let to_int = |x: &Rational| (x * Rational::from_integer(lcm.clone())).to_integer();
        let forms: Vec<BinaryForm> = num.iter().map(|c| BinaryForm::new(c.iter().map(to_int).collect())).collect();
        let den = BinaryForm::new(den.iter().map(to_int).collect());
        let g = forms.iter().chain([&den]).fold(BigInt::zero(), |g, f| g.gcd(&f.content()));
        let div = |f: &BinaryForm| BinaryForm::new(f.coeffs().iter().map(|c| c / &g).collect());
        let mut den = div(&den);
        let mut forms: Vec<BinaryForm> = forms.iter().map(div).collect();
        if den.coeffs()[2].is_negative() {
            den = -den;
            forms = forms.into_iter().map(|f| -f).collect();
        }
        Self::new([forms[0].clone(), forms[1].clone(), forms[2].clone(), forms[3].clone()], den)
    }
}

/// Rational basis of the direction plane `{n1, n2}^⊥`.
fn direction_basis(c: &Circle<Rational>) -> ([Rational; 4], [Rational; 4]) {
    let rows = vec![c.n1.to_vec(), c.n2.to_vec()];
    let ns = rational_nullspace(rows, 4);
    let arr = |v: &Vec<Rational>| -> [Rational; 4] { std::array::from_fn(|i| v[i].clone()) };
    (arr(&ns[0]), arr(&ns[1]))
}

/// Searches small-height rational points `c + a e + b f` with `|a e + b f|² = r²`.
fn find_rational_point(c: &Circle<Rational>) -> Result<[Rational; 4]> {
    let center = c.center();
    let r2 = c.radius_sqr();
    let (e, f) = direction_basis(c);
    let (ee, ef, ff) = (dot(&e, &e), dot(&e, &f), dot(&f, &f));
    let two = Rational::from_integer(2.into());
    let four = Rational::from_integer(4.into());
    let point = |a: &Rational, b: &Rational| -> [Rational; 4] {
        std::array::from_fn(|i| &center[i] + a * &e[i] + b * &f[i])
    };
    // b = 0 first, then a sweep over a = p/q; each gives a quadratic in b
    for height in 1i64..=60 {
        for qd in 1..=height {
            for pn in -height..=height {
                if pn.abs() != height && qd != height {
                    continue;
                }
                let a = Rational::new(pn.into(), qd.into());
                // ff b² + 2 ef a b + (ee a² − r²) = 0
                let (qa, qb, qc) = (ff.clone(), &two * &ef * &a, &ee * &a * &a - &r2);
                let disc = &qb * &qb - &four * &qa * &qc;
                if disc.is_negative() {
                    continue;
                }
                if let Some(s) = rational_sqrt(&disc) {
                    let b = (-qb + s) / (&two * &qa);
                    let p = point(&a, &b);
                    debug_assert!(c.contains(&p));
                    return Ok(p);
                }
            }
        }
    }
    Err(Error::InvalidCircle("no rational point of small height found; pass one explicitly".into()))
}

/// Outcome of intersecting a small circle with a great circle.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Meet {
    /// Number of distinct real common points.
    pub q: usize,
    /// A common point has multiplicity two.
    pub tangent: bool,
    pub roots: Vec<ProjRoot>,
    /// `gcd` of the two composed linear forms, primitive.
    #[serde(skip)]
    pub common_factor: BinaryForm,
}

/// Linear forms of the great circle composed with the parametrization give two
/// binary quadratics; their gcd carries the common real roots.
pub fn meet_great_circle(small: &RationalCircleParam, great: &Circle<Rational>) -> Result<Meet> {
    if !great.is_great() {
        return Err(Error::NotGreat);
    }
    let compose = |n: &[Rational; 4]| -> BinaryForm {
        let lcm = n.iter().fold(BigInt::one(), |l, c| l.lcm(c.denom()));
        let ni: Vec<BigInt> = n.iter().map(|c| (c * Rational::from_integer(lcm.clone())).to_integer()).collect();
        small
            .num
            .as_array()
            .into_iter()
            .zip(&ni)
            .fold(BinaryForm::zero(2), |acc, (f, k)| acc + f.scale(k))
    };
    let (f1, f2) = (compose(&great.n1), compose(&great.n2));
    if f1.is_zero() && f2.is_zero() {
        return Err(Error::NotTransversal);
    }
    let g = f1.gcd(&f2);
    let roots = g.real_roots().expect("gcd of non-zero forms is non-zero");
    Ok(Meet {
        q: roots.len(),
        tangent: roots.iter().any(|r| r.multiplicity >= 2),
        roots,
        common_factor: g,
    })
}

/// Float-mode meet. A near-zero discriminant is reported as numerically tangent.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MeetF64 {
    pub q: usize,
    pub tangent: bool,
    /// `|Δ| < 1e-10 · scale`; exact mode is authoritative in that case.
    pub numerically_tangent: bool,
}

pub fn meet_great_circle_f64(small: &RationalCircleParam, great: &Circle<f64>) -> Result<MeetF64> {
    if !great.is_great() {
        return Err(Error::NotGreat);
    }
    let compose = |n: &[f64; 4]| -> [f64; 3] {
        let mut out = [0.0; 3];
        for (f, k) in small.num.as_array().into_iter().zip(n) {
            for (o, c) in out.iter_mut().zip(f.coeffs()) {
                *o += k * big_to_f64(c);
            }
        }
        out
    };
    let (f1, f2) = (compose(&great.n1), compose(&great.n2));
    let mag = |f: &[f64; 3]| f.iter().fold(0.0f64, |m, c| m.max(c.abs()));
    let scale = mag(&f1).max(mag(&f2)).max(1.0);
    let tiny = |f: &[f64; 3]| mag(f) < 1e-10 * scale;
    let quad_meet = |f: &[f64; 3]| -> MeetF64 {
        let (c, b, a) = (f[0], f[1], f[2]);
        let disc = b * b - 4.0 * a * c;
        let s = mag(f).powi(2);
        if disc.abs() < 1e-10 * s {
            MeetF64 { q: 1, tangent: true, numerically_tangent: true }
        } else if disc > 0.0 {
            MeetF64 { q: 2, tangent: false, numerically_tangent: false }
        } else {
            MeetF64 { q: 0, tangent: false, numerically_tangent: false }
        }
    };
    match (tiny(&f1), tiny(&f2)) {
        (true, true) => Err(Error::NotTransversal),
        (true, false) => Ok(quad_meet(&f2)),
        (false, true) => Ok(quad_meet(&f1)),
        (false, false) => {
            // proportional forms share both roots; otherwise at most one
            let cross = [(0, 1), (0, 2), (1, 2)]
                .iter()
                .map(|&(i, j)| (f1[i] * f2[j] - f1[j] * f2[i]).abs())
                .fold(0.0, f64::max);
            if cross < 1e-10 * scale * scale {
                return Ok(quad_meet(&f1));
            }
            let res = resultant2(&f1, &f2);
            if res.abs() < 1e-10 * scale.powi(4) {
                Ok(MeetF64 { q: 1, tangent: false, numerically_tangent: false })
            } else {
                Ok(MeetF64 { q: 0, tangent: false, numerically_tangent: false })
            }
        }
    }
}

/// Resultant of two binary quadratics `[w², vw, v²]`.
fn resultant2(f: &[f64; 3], g: &[f64; 3]) -> f64 {
    let (c1, b1, a1) = (f[0], f[1], f[2]);
    let (c2, b2, a2) = (g[0], g[1], g[2]);
    (a1 * c2 - a2 * c1).powi(2) - (a1 * b2 - a2 * b1) * (b1 * c2 - b2 * c1)
}

/// JSON description of a circle: a preset, a plane pair, or explicit numerators.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CircleSpec {
    Preset {
        preset: String,
    },
    Plane {
        #[serde(with = "serde_rational_vec")]
        n1: Vec<Rational>,
        #[serde(with = "serde_rational_vec")]
        n2: Vec<Rational>,
        #[serde(with = "serde_rational")]
        d1: Rational,
        #[serde(with = "serde_rational")]
        d2: Rational,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        point: Option<Vec<String>>,
    },
    Param {
        /// Four numerators, each `[w², vw, v²]` coefficients.
        num: Vec<[i64; 3]>,
        den: [i64; 3],
    },
}

impl CircleSpec {
    /// Parses either a bare preset name (`"B1"`) or a JSON object.
    pub fn parse(s: &str) -> Result<Self> {
        let t = s.trim();
        if t.starts_with('{') {
            serde_json::from_str(t).map_err(|e| Error::Parse(e.to_string()))
        } else {
            t.parse::<Preset>()?;
            Ok(CircleSpec::Preset { preset: t.to_string() })
        }
    }

    pub fn to_param(&self) -> Result<RationalCircleParam> {
        match self {
            CircleSpec::Preset { preset } => RationalCircleParam::named_circle(preset),
            CircleSpec::Plane { point, .. } => {
                let c = self.to_circle()?;
                let p = point
                    .as_ref()
                    .map(|p| {
                        if p.len() != 4 {
                            return Err(Error::Parse("point needs four coordinates".into()));
                        }
                        let v: Vec<Rational> = p.iter().map(|x| parse_rational(x)).collect::<Result<_>>()?;
                        Ok(std::array::from_fn(|i| v[i].clone()))
                    })
                    .transpose()?;
                RationalCircleParam::from_circle(&c, p)
            }
            CircleSpec::Param { num, den } => {
                if num.len() != 4 {
                    return Err(Error::Parse("need four numerators".into()));
                }
                let f = |c: &[i64; 3]| BinaryForm::from_i64(c);
                RationalCircleParam::new([f(&num[0]), f(&num[1]), f(&num[2]), f(&num[3])], f(den))
            }
        }
    }

    pub fn to_circle(&self) -> Result<Circle<Rational>> {
        match self {
            CircleSpec::Plane { n1, n2, d1, d2, .. } => {
                if n1.len() != 4 || n2.len() != 4 {
                    return Err(Error::Parse("normals need four coordinates".into()));
                }
                Circle::new(
                    std::array::from_fn(|i| n1[i].clone()),
                    std::array::from_fn(|i| n2[i].clone()),
                    d1.clone(),
                    d2.clone(),
                )
            }
            _ => self.to_param()?.plane_form(),
        }
    }

    pub fn from_circle(c: &Circle<Rational>) -> Self {
        CircleSpec::Plane {
            n1: c.n1.to_vec(),
            n2: c.n2.to_vec(),
            d1: c.d1.clone(),
            d2: c.d2.clone(),
            point: None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, rat};

    fn b(x: i64) -> BigInt {
        BigInt::from(x)
    }

    #[test]
    fn preset_evaluations() {
        let a0 = RationalCircleParam::preset(Preset::A0);
        assert_eq!(a0.eval_rational(&b(0), &b(1)), Quaternion::one());
        let b2 = RationalCircleParam::preset(Preset::B2);
        assert_eq!(b2.eval_rational(&b(1), &b(0)), Quaternion::one());
        let b1 = RationalCircleParam::preset(Preset::B1);
        assert_eq!(b1.eval_rational(&b(0), &b(1)), Quaternion::new(rat(20, 29), int(0), int(0), rat(21, 29)));
        assert!(matches!(RationalCircleParam::named_circle("B4"), Err(Error::UnknownPreset(_))));
    }

    #[test]
    fn presets_match_angle_formulas() {
        // B1 at β: ((12+8cosβ), 8 sinβ, 0, (9+12cosβ)) / (17+12cosβ)
        let b1 = RationalCircleParam::preset(Preset::B1);
        for beta in [0.3f64, 1.7, 2.9, 4.4] {
            let (c, s) = (beta.cos(), beta.sin());
            let d = 17.0 + 12.0 * c;
            let want = [(12.0 + 8.0 * c) / d, 8.0 * s / d, 0.0, (9.0 + 12.0 * c) / d];
            let got = b1.eval_angle(beta).into_array();
            for (g, w) in got.iter().zip(want) {
                assert!((g - w).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn angle_derivative_matches_difference_quotient() {
        let b1 = RationalCircleParam::preset(Preset::B1);
        for t in [0.1f64, 1.3, 2.9, 5.0] {
            let (p, d) = b1.eval_angle_with_derivative(t);
            let h = 1e-6;
            let fd = (b1.eval_angle(t + h) - b1.eval_angle(t - h)).scale(&(0.5 / h));
            assert!((p - b1.eval_angle(t)).norm() < 1e-15);
            assert!((d - fd).norm() < 1e-8);
        }
    }

    #[test]
    fn on_sphere_certificates() {
        for p in Preset::ALL {
            assert!(RationalCircleParam::preset(p).on_sphere_certificate(), "{p}");
        }
        let mut bad = RationalCircleParam::preset(Preset::B1);
        let mut c = bad.num.w.coeffs().to_vec();
        c[0] += 1;
        bad.num.w = BinaryForm::new(c);
        assert!(!bad.on_sphere_certificate());
    }

    #[test]
    fn plane_forms() {
        let a0 = RationalCircleParam::preset(Preset::A0).plane_form().unwrap();
        assert_eq!(a0.n1, [int(0), int(0), int(1), int(0)]);
        assert_eq!(a0.n2, [int(0), int(0), int(0), int(1)]);
        assert!(a0.d1.is_zero() && a0.d2.is_zero());
        assert!(a0.is_great());
        let b1 = RationalCircleParam::preset(Preset::B1).plane_form().unwrap();
        assert!(!b1.is_great());
        assert_eq!(b1.n2, [int(12), int(0), int(0), int(1)]);
        assert_eq!(b1.d2, int(9));
        let b2 = RationalCircleParam::preset(Preset::B2).plane_form().unwrap();
        assert!(!b2.is_great());
        assert!(!b2.d2.is_zero());
        let half = Circle::new(
            [int(0), int(0), int(1), int(0)],
            [int(0), int(0), int(0), int(1)],
            rat(1, 2),
            int(0),
        )
        .unwrap();
        assert!(!half.is_great());
        assert!(RationalCircleParam::preset(Preset::C).plane_form().unwrap().is_great());
    }

    #[test]
    fn plane_form_matches_sampled_fit() {
        // independent route: fit linear forms through sampled rational points
        for p in Preset::ALL {
            let param = RationalCircleParam::preset(p);
            let rows: Vec<Vec<Rational>> = (0..6)
                .map(|k| {
                    let x = param.eval_rational(&b(k - 2), &b(k + 1));
                    let mut r = x.to_array().to_vec();
                    r.push(-int(1));
                    r
                })
                .collect();
            let fit = rational_nullspace(rows, 5);
            assert_eq!(fit.len(), 2, "{p}");
            let c = param.plane_form().unwrap();
            for f in &fit {
                // every fitted form is a combination of the two planes
                let n: [Rational; 4] = std::array::from_fn(|i| f[i].clone());
                let pts: Vec<_> = (0..8).map(|k| param.eval_rational(&b(3 * k - 7), &b(k + 2))).collect();
                for x in &pts {
                    assert_eq!(dot(&n, &x.to_array()), f[4]);
                    assert!(c.contains(&x.to_array()));
                }
            }
        }
    }

    #[test]
    fn parametrize_round_trip() {
        let great = Circle::new(
            [0.0, 1.0, 0.0, 0.0],
            [0.0, 0.0, 0.0, 1.0],
            0.0,
            0.0,
        )
        .unwrap();
        let f = great.parametrize();
        let p = f(0.0);
        assert!((p[0] - 1.0).abs() < 1e-15 && p[1..].iter().all(|x| x.abs() < 1e-15));
        for preset in Preset::ALL {
            let param = RationalCircleParam::preset(preset);
            let c = param.plane_form().unwrap().to_f64();
            let g = c.parametrize();
            for k in 0..8 {
                assert!(c.contains(&g(k as f64 * 0.8)), "{preset}");
            }
        }
    }

    #[test]
    fn from_circle_round_trip() {
        for preset in [Preset::A0, Preset::B2, Preset::C] {
            let c = RationalCircleParam::preset(preset).plane_form().unwrap();
            let p = RationalCircleParam::from_circle(&c, None).unwrap();
            assert!(p.on_sphere_certificate());
            let c2 = p.plane_form().unwrap();
            for k in 0..8 {
                assert!(c.contains(&p.eval_rational(&b(k - 3), &b(2 * k + 1)).to_array()));
                assert!(c2.contains(&RationalCircleParam::preset(preset).eval_rational(&b(k), &b(3)).to_array()));
            }
        }
    }

    #[test]
    fn meets_against_a0() {
        let a0 = RationalCircleParam::preset(Preset::A0).plane_form().unwrap();
        let m1 = meet_great_circle(&RationalCircleParam::preset(Preset::B1), &a0).unwrap();
        assert_eq!((m1.q, m1.tangent), (2, false));
        let m2 = meet_great_circle(&RationalCircleParam::preset(Preset::B2), &a0).unwrap();
        assert_eq!((m2.q, m2.tangent), (1, true));
        assert_eq!(m2.roots[0].exact, Some((b(1), b(0))));
        let m3 = meet_great_circle(&RationalCircleParam::preset(Preset::B3), &a0).unwrap();
        assert_eq!((m3.q, m3.tangent), (0, false));
        // independent discriminants of the x₄ numerators
        assert!(BinaryForm::quadratic(-3, 0, 21).discriminant().is_positive());
        assert!(BinaryForm::quadratic(0, 0, 4).discriminant().is_zero());
        assert!(BinaryForm::quadratic(3, 0, 15).discriminant().is_negative());
    }

    #[test]
    fn meet_errors() {
        let a0p = RationalCircleParam::preset(Preset::A0);
        let a0 = a0p.plane_form().unwrap();
        assert_eq!(meet_great_circle(&a0p, &a0), Err(Error::NotTransversal));
        let b1 = RationalCircleParam::preset(Preset::B1).plane_form().unwrap();
        assert_eq!(meet_great_circle(&a0p, &b1).unwrap_err(), Error::NotGreat);
    }

    #[test]
    fn meet_is_reparametrization_invariant() {
        let a0 = RationalCircleParam::preset(Preset::A0).plane_form().unwrap();
        for (p, q) in [(Preset::B1, 2), (Preset::B2, 1), (Preset::B3, 0)] {
            for (a, bb, c, d) in [(1, 0, 0, 1), (2, 1, 1, 1), (0, 1, -1, 0), (3, -2, 1, 5)] {
                let r = RationalCircleParam::preset(p).reparametrize(a, bb, c, d).unwrap();
                assert!(r.on_sphere_certificate());
                assert_eq!(meet_great_circle(&r, &a0).unwrap().q, q);
            }
        }
    }

    #[test]
    fn float_meet_agrees() {
        let a0 = RationalCircleParam::preset(Preset::A0).plane_form().unwrap().to_f64();
        let m = |p| meet_great_circle_f64(&RationalCircleParam::preset(p), &a0).unwrap();
        assert_eq!(m(Preset::B1).q, 2);
        let m2 = m(Preset::B2);
        assert!(m2.tangent && m2.numerically_tangent);
        assert_eq!(m(Preset::B3).q, 0);
    }

    #[test]
    fn circle_validation() {
        let e3 = [int(0), int(0), int(1), int(0)];
        let e4 = [int(0), int(0), int(0), int(1)];
        assert!(Circle::new(e3.clone(), e4.clone(), int(1), int(0)).is_err());
        assert!(Circle::new(e3.clone(), e3.clone(), int(0), int(0)).is_err());
        let c = Circle::new(e3, e4, rat(3, 5), int(0)).unwrap();
        assert_eq!(c.radius_sqr(), rat(16, 25));
    }

    #[test]
    fn spec_json() {
        let s = CircleSpec::parse(r#"{"n1":["0","0","1","0"],"n2":["0","0","0","1"],"d1":"0","d2":"0"}"#).unwrap();
        assert!(s.to_circle().unwrap().is_great());
        let p = CircleSpec::parse(r#"{"preset":"B1"}"#).unwrap().to_param().unwrap();
        assert_eq!(p, RationalCircleParam::preset(Preset::B1));
        let text = serde_json::to_string(&CircleSpec::from_circle(&RationalCircleParam::preset(Preset::B1).plane_form().unwrap())).unwrap();
        assert!(text.contains("\"d2\":\"9\""), "{text}");
        assert!(CircleSpec::parse("B9").is_err());
    }
}
