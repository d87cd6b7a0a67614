//! Exact implicitization of projected product surfaces: sampling at rational
//! parameters, exact vanishing kernels, degree certification and gradient checks.

use std::collections::HashSet;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circles::RationalCircleParam;
use crate::error::{Error, Result};
use crate::linalg::{bareiss_nullspace, independent_rows_mod_p, large_primes, normalize_integer_vector, reduce_mod};
use crate::moebius::Projection;
use crate::product::ProductSurface;
use crate::quat::Quaternion;
use crate::scalar::{format_rational, parse_rational, Rational};

/// Default seed for sampling.
pub const DEFAULT_SEED: u64 = 0x5eed_c1c1e;
/// Bound on numerators and denominators of sampled parameters.
pub const SAMPLE_HEIGHT: i64 = 40;
/// Extra training samples beyond the basis size.
pub const EXTRA_SAMPLES: usize = 40;
/// Fresh samples used to re-verify a certified polynomial.
pub const FRESH_SAMPLES: usize = 50;

/// Monomials in graded lexicographic order: ascending total degree, and within one
/// degree descending in the exponent of the first variable, then the second, ….
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MonomialBasis {
    vars: usize,
    degree: u32,
    homogeneous: bool,
    exponents: Vec<Vec<u32>>,
}

fn compositions(vars: usize, total: u32) -> Vec<Vec<u32>> {
    if vars == 1 {
        return vec![vec![total]];
    }
    (0..=total)
        .rev()
        .flat_map(|first| {
            compositions(vars - 1, total - first).into_iter().map(move |mut rest| {
                rest.insert(0, first);
                rest
            })
        })
        .collect()
}

impl MonomialBasis {
    /// Affine monomials in `x, y, z` of total degree `≤ degree`.
    pub fn affine(degree: u32) -> Self {
        let exponents = (0..=degree).flat_map(|t| compositions(3, t)).collect();
        Self { vars: 3, degree, homogeneous: false, exponents }
    }

    /// Homogeneous monomials in `x₁, …, x₄` of total degree `degree`.
    pub fn homogeneous(degree: u32) -> Self {
        Self { vars: 4, degree, homogeneous: true, exponents: compositions(4, degree) }
    }

    /// Affine for stereographic images, homogeneous for central ones.
    pub fn for_projection(projection: &Projection, degree: u32) -> Self {
        if projection.is_central() {
            Self::homogeneous(degree)
        } else {
            Self::affine(degree)
        }
    }

    pub fn vars(&self) -> usize {
        self.vars
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn is_homogeneous(&self) -> bool {
        self.homogeneous
    }

    pub fn size(&self) -> usize {
        self.exponents.len()
    }

    pub fn exponents(&self) -> &[Vec<u32>] {
        &self.exponents
    }

    /// Monomial values at an integer point in homogeneous form: `[x₀, x₁, x₂, x₃]` with
    /// `x₀` the common denominator for affine bases, `[x₁, …, x₄]` otherwise.
    fn row(&self, h: &[BigInt]) -> Vec<BigInt> {
        let powers: Vec<Vec<BigInt>> = h
            .iter()
            .map(|x| {
                let mut p = vec![BigInt::one()];
                for k in 1..=self.degree as usize {
                    let next = &p[k - 1] * x;
                    p.push(next);
                }
                p
            })
            .collect();
        self.exponents
            .iter()
            .map(|e| {
                if self.homogeneous {
                    e.iter().enumerate().fold(BigInt::one(), |acc, (i, &k)| acc * &powers[i][k as usize])
                } else {
                    let total: u32 = e.iter().sum();
                    e.iter()
                        .enumerate()
                        .fold(powers[0][(self.degree - total) as usize].clone(), |acc, (i, &k)| acc * &powers[i + 1][k as usize])
                }
            })
            .collect()
    }
}

/// Clears denominators of an affine rational point to `[D, D·x, D·y, D·z]`, or of a
/// homogeneous point to a primitive integer tuple.
fn homogenize(point: &[Rational], homogeneous: bool) -> Vec<BigInt> {
    let lcm = point.iter().fold(BigInt::one(), |l, c| l.lcm(c.denom()));
    let scaled: Vec<BigInt> = point.iter().map(|c| (c * Rational::from_integer(lcm.clone())).to_integer()).collect();
    if homogeneous {
        normalize_integer_vector(scaled)
    } else {
        std::iter::once(lcm).chain(scaled).collect()
    }
}

/// A nonzero polynomial with primitive integer coefficients in a [`MonomialBasis`],
/// the first nonzero coefficient positive.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ImplicitPoly {
    basis: MonomialBasis,
    coeffs: Vec<BigInt>,
}

#[derive(Serialize, Deserialize)]
struct PolyJson {
    vars: usize,
    degree: u32,
    order: String,
    coeffs: Vec<String>,
}

impl ImplicitPoly {
    pub fn new(basis: MonomialBasis, coeffs: Vec<BigInt>) -> Result<Self> {
        if coeffs.len() != basis.size() {
            return Err(Error::Degenerate(format!("{} coefficients for {} monomials", coeffs.len(), basis.size())));
        }
        if coeffs.iter().all(Zero::is_zero) {
            return Err(Error::Degenerate("zero polynomial".into()));
        }
        Ok(Self { basis, coeffs: normalize_integer_vector(coeffs) })
    }

    pub fn basis(&self) -> &MonomialBasis {
        &self.basis
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn degree(&self) -> u32 {
        self.basis.degree
    }

    /// Number of nonzero terms.
    pub fn terms(&self) -> usize {
        self.coeffs.iter().filter(|c| !c.is_zero()).count()
    }

    /// Exact value at a rational point (3 affine or 4 homogeneous coordinates).
    pub fn eval(&self, point: &[Rational]) -> Rational {
        self.eval_with(&self.coeffs, &self.basis.exponents, point)
    }

    fn eval_with(&self, coeffs: &[BigInt], exps: &[Vec<u32>], point: &[Rational]) -> Rational {
        coeffs
            .iter()
            .zip(exps)
            .filter(|(c, _)| !c.is_zero())
            .map(|(c, e)| {
                e.iter().zip(point).fold(Rational::from_integer(c.clone()), |acc, (&k, x)| acc * num_traits::pow(x.clone(), k as usize))
            })
            .fold(Rational::zero(), |a, b| a + b)
    }

    /// Partial derivative in variable `i`, as coefficients over shifted exponents.
    fn derivative(&self, i: usize) -> (Vec<BigInt>, Vec<Vec<u32>>) {
        self.coeffs
            .iter()
            .zip(&self.basis.exponents)
            .filter(|(c, e)| !c.is_zero() && e[i] > 0)
            .map(|(c, e)| {
                let mut e2 = e.clone();
                e2[i] -= 1;
                (c * BigInt::from(e[i]), e2)
            })
            .unzip()
    }

    /// All partial derivatives at a rational point.
    pub fn gradient(&self, point: &[Rational]) -> Vec<Rational> {
        (0..self.basis.vars)
            .map(|i| {
                let (c, e) = self.derivative(i);
                self.eval_with(&c, &e, point)
            })
            .collect()
    }

    pub fn eval_f64(&self, point: &[f64]) -> f64 {
        self.terms_f64(point).0
    }

    /// `|P(x)| / Σ|c_e x^e|`, the residual relative to the coefficient scale.
    pub fn relative_residual(&self, point: &[f64]) -> f64 {
        let (v, scale) = self.terms_f64(point);
        if scale == 0.0 {
            0.0
        } else {
            v.abs() / scale
        }
    }

    fn terms_f64(&self, point: &[f64]) -> (f64, f64) {
        self.coeffs.iter().zip(&self.basis.exponents).filter(|(c, _)| !c.is_zero()).fold((0.0, 0.0), |(s, a), (c, e)| {
            let t = c.to_f64().unwrap_or(f64::NAN) * e.iter().zip(point).map(|(&k, x)| x.powi(k as i32)).product::<f64>();
            (s + t, a + t.abs())
        })
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(PolyJson {
            vars: self.basis.vars,
            degree: self.basis.degree,
            order: "grlex".into(),
            coeffs: self.coeffs.iter().map(|c| format_rational(&Rational::from_integer(c.clone()))).collect(),
        })
        .expect("polynomial serializes")
    }

    pub fn from_json(value: &serde_json::Value) -> Result<Self> {
        let raw: PolyJson = serde_json::from_value(value.clone()).map_err(|e| Error::Parse(e.to_string()))?;
        if raw.order != "grlex" {
            return Err(Error::Parse(format!("unsupported monomial order `{}`", raw.order)));
        }
        let basis = match raw.vars {
            3 => MonomialBasis::affine(raw.degree),
            4 => MonomialBasis::homogeneous(raw.degree),
            v => return Err(Error::Parse(format!("{v} variables"))),
        };
        let coeffs: Vec<Rational> = raw.coeffs.iter().map(|s| parse_rational(s)).collect::<Result<_>>()?;
        let lcm = coeffs.iter().fold(BigInt::one(), |l, c| l.lcm(c.denom()));
        let ints = coeffs.iter().map(|c| (c * Rational::from_integer(lcm.clone())).to_integer()).collect();
        Self::new(basis, ints)
    }
}

impl Serialize for ImplicitPoly {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_json().serialize(s)
    }
}

fn projected_point(surface: &ProductSurface, projection: &Projection, u: (&BigInt, &BigInt), v: (&BigInt, &BigInt)) -> Result<Vec<Rational>> {
    match projection.stereographic() {
        Some(st) => Ok(st.project(&surface.eval_exact(u, v))?.to_vec()),
        None => {
            let (num, _) = surface.eval_int(u, v);
            Ok(normalize_integer_vector(num.into_array().to_vec()).into_iter().map(Rational::from_integer).collect())
        }
    }
}

fn draw_param<R: Rng>(rng: &mut R) -> (BigInt, BigInt) {
    (BigInt::from(rng.random_range(-SAMPLE_HEIGHT..=SAMPLE_HEIGHT)), BigInt::from(rng.random_range(1..=SAMPLE_HEIGHT)))
}

/// `count` distinct exact points of the projected surface at pseudo-random rational
/// parameters; homogeneous points are primitive integer 4-tuples.
pub fn rational_samples(surface: &ProductSurface, projection: &Projection, count: usize, seed: u64) -> Result<Vec<Vec<Rational>>> {
    surface.check_projection(projection)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seen = HashSet::new();
    let mut out = Vec::with_capacity(count);
    let mut misses = 0usize;
    while out.len() < count {
        let (u, v) = (draw_param(&mut rng), draw_param(&mut rng));
        match projected_point(surface, projection, (&u.0, &u.1), (&v.0, &v.1)) {
            Ok(p) => {
                if seen.insert(p.clone()) {
                    out.push(p);
                } else {
                    misses += 1;
                }
            }
            Err(Error::Pole) => misses += 1,
            Err(e) => return Err(e),
        }
        if misses > 100 * (count + 10) {
            return Err(Error::Numerical("cannot draw enough distinct samples".into()));
        }
    }
    Ok(out)
}

/// Exact basis of all polynomials in `basis` vanishing at every point.
///
/// Rows independent modulo a large prime are independent over ℚ, so full column
/// rank modulo `p` proves a trivial kernel; otherwise fraction-free elimination on
/// those rows gives a candidate basis, which is checked exactly against every row.
pub fn vanishing_kernel(points: &[Vec<Rational>], basis: &MonomialBasis) -> Result<Vec<ImplicitPoly>> {
    let n = basis.size();
    if points.len() < n + EXTRA_SAMPLES {
        return Err(Error::Degenerate(format!("{} samples for {} monomials", points.len(), n)));
    }
    let rows: Vec<Vec<BigInt>> = points.par_iter().map(|p| basis.row(&homogenize(p, basis.homogeneous))).collect();
    let p = large_primes(1)[0];
    let reduced: Vec<Vec<u64>> = rows.par_iter().map(|r| r.iter().map(|x| reduce_mod(x, p)).collect()).collect();
    let independent = independent_rows_mod_p(&reduced, n, p);
    if independent.len() == n {
        return Ok(Vec::new());
    }
    let sub: Vec<Vec<BigInt>> = independent.iter().map(|&i| rows[i].clone()).collect();
    let mut kernel = bareiss_nullspace(sub, n);
    let all_vanish = |v: &Vec<BigInt>| {
        rows.par_iter().all(|r| r.iter().zip(v).filter(|(_, c)| !c.is_zero()).map(|(a, c)| a * c).sum::<BigInt>().is_zero())
    };
    if !kernel.iter().all(all_vanish) {
        // the prime saw a spurious dependency; fall back to the full matrix
        kernel = bareiss_nullspace(rows, n);
    }
    kernel.into_iter().map(|c| ImplicitPoly::new(basis.clone(), c)).collect()
}

/// Outcome of a degree search.
#[derive(Clone, Debug, Serialize)]
pub struct DegreeCertificate {
    pub degree: u32,
    pub poly: ImplicitPoly,
    pub kernel_dim: usize,
    /// Kernel dimensions at every degree tried, ascending.
    pub kernel_dims: Vec<(u32, usize)>,
    pub fresh_samples: usize,
    pub seed: u64,
}

/// Smallest degree `≤ d_max` with a vanishing polynomial, re-verified at
/// [`FRESH_SAMPLES`] points drawn from an independent stream.
pub fn certify_degree(surface: &ProductSurface, projection: &Projection, d_max: u32, seed: u64) -> Result<DegreeCertificate> {
    if d_max == 0 {
        return Err(Error::NoVanishingPolynomial(0));
    }
    let mut dims = Vec::new();
    for d in 1..=d_max {
        let basis = MonomialBasis::for_projection(projection, d);
        let points = rational_samples(surface, projection, basis.size() + EXTRA_SAMPLES, seed)?;
        let kernel = vanishing_kernel(&points, &basis)?;
        dims.push((d, kernel.len()));
        if let Some(poly) = kernel.first() {
            let fresh = rational_samples(surface, projection, FRESH_SAMPLES, seed ^ 0x9e37_79b9_7f4a_7c15)?;
            for (k, q) in kernel.iter().enumerate() {
                if let Some(bad) = fresh.iter().position(|x| !q.eval(x).is_zero()) {
                    return Err(Error::Numerical(format!("kernel vector {k} fails at fresh sample {bad}")));
                }
            }
            return Ok(DegreeCertificate {
                degree: d,
                poly: poly.clone(),
                kernel_dim: kernel.len(),
                kernel_dims: dims,
                fresh_samples: FRESH_SAMPLES,
                seed,
            });
        }
    }
    Err(Error::NoVanishingPolynomial(d_max as usize))
}

/// Exact points of the projected circle at small distinct parameters `(v : w)`.
pub fn circle_samples(curve: &RationalCircleParam, projection: &Projection, n_points: usize) -> Result<Vec<Vec<Rational>>> {
    let mut out: Vec<Vec<Rational>> = Vec::new();
    let mut seen = HashSet::new();
    let mut h = 1i64;
    while out.len() < n_points {
        for v in -h..=h {
            for w in 1..=h {
                if out.len() == n_points || v.gcd(&w) != 1 || (v.abs() != h && w != h) {
                    continue;
                }
                let (bv, bw) = (BigInt::from(v), BigInt::from(w));
                let point = match projection.stereographic() {
                    Some(st) => match st.project(&curve.eval_rational(&bv, &bw)) {
                        Ok(p) => p.to_vec(),
                        Err(Error::Pole) => continue,
                        Err(e) => return Err(e),
                    },
                    None => {
                        let (num, _) = curve.eval_int(&bv, &bw);
                        normalize_integer_vector(num.into_array().to_vec()).into_iter().map(Rational::from_integer).collect()
                    }
                };
                if seen.insert(point.clone()) {
                    out.push(point);
                }
            }
        }
        h += 1;
        if h > 1000 {
            return Err(Error::Degenerate("circle has too few distinct projected points".into()));
        }
    }
    Ok(out)
}

/// Whether every partial derivative of `poly` vanishes exactly at `n_points`
/// rational points of the projected circle. Fails with [`Error::NotOnSurface`] if
/// `poly` itself does not vanish at one of them.
pub fn gradient_vanishes_on(poly: &ImplicitPoly, curve: &RationalCircleParam, projection: &Projection, n_points: usize) -> Result<bool> {
    if poly.basis.homogeneous != projection.is_central() {
        return Err(Error::NotApplicable("polynomial variables do not match the projection".into()));
    }
    let points = circle_samples(curve, projection, n_points)?;
    let mut all = true;
    for p in &points {
        if !poly.eval(p).is_zero() {
            return Err(Error::NotOnSurface);
        }
        all &= poly.gradient(p).iter().all(Zero::is_zero);
    }
    Ok(all)
}

/// Largest relative residual of `poly` at an `n × n` float grid of the projected surface.
pub fn float_residual(poly: &ImplicitPoly, surface: &ProductSurface, projection: &Projection, n: usize) -> Result<f64> {
    let st = projection.stereographic();
    let step = std::f64::consts::TAU / n as f64;
    let values: Vec<f64> = (0..n * n)
        .into_par_iter()
        .map(|k| {
            let q: Quaternion<f64> = surface.eval_angle((k / n) as f64 * step + 0.1, (k % n) as f64 * step + 0.2);
            let point: Vec<f64> = match &st {
                Some(st) => st.project(&q).map(|p| p.to_vec()).unwrap_or_default(),
                None => {
                    let a = q.to_array();
                    let m = a.iter().fold(0.0f64, |m, x| m.max(x.abs()));
                    a.iter().map(|x| x / m).collect()
                }
            };
            if point.is_empty() {
                0.0
            } else {
                poly.relative_residual(&point)
            }
        })
        .collect();
    Ok(values.into_iter().fold(0.0, f64::max))
}

/// Height of the largest coefficient in bits.
pub fn coefficient_bits(poly: &ImplicitPoly) -> u64 {
    poly.coeffs.iter().map(|c| c.abs().bits()).max().unwrap_or(0)
}
