//! Products `A⋆B` of two circles as exact rational maps on `ℙ¹ × ℙ¹`, with grid
//! sampling, double-curve tracing and hyperplane sections.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use nalgebra::{Matrix4, Vector4};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::One;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circles::{Preset, RationalCircleParam};
use crate::error::{Error, Result};
use crate::mesh::{dist3, Mesh, PolylineCurve, Vertices};
use crate::moebius::{Projection, Stereographic};
use crate::poly::{BiForm, BinaryForm, ProjRoot};
use crate::quat::{hamilton_product, Quaternion, UnitQuaternion};
use crate::scalar::Rational;

/// Order of the factors in the product.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    /// `σ(u, v) = a(u)⋆b(v)`.
    #[default]
    LeftTimesRight,
    /// `σ(u, v) = b(v)⋆a(u)`.
    RightTimesLeft,
}

impl FromStr for Side {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "left_times_right" => Ok(Side::LeftTimesRight),
            "right_times_left" => Ok(Side::RightTimesLeft),
            other => Err(Error::Parse(format!("unknown side `{other}`"))),
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::LeftTimesRight => "left_times_right",
            Side::RightTimesLeft => "right_times_left",
        })
    }
}

/// `σ(u:s, v:w)`: each coordinate a bidegree-(2,2) integer form over a common
/// denominator. `u` parametrizes the left circle, `v` the right one.
#[derive(Clone, Debug, PartialEq)]
pub struct ProductSurface {
    left: RationalCircleParam,
    right: RationalCircleParam,
    side: Side,
    num: Quaternion<BiForm>,
    den: BiForm,
}

fn lift_u(f: &BinaryForm) -> BiForm {
    BiForm::outer(f, &BinaryForm::new(vec![BigInt::one()]))
}

fn lift_v(g: &BinaryForm) -> BiForm {
    BiForm::outer(&BinaryForm::new(vec![BigInt::one()]), g)
}

/// Integer vector and positive common denominator of a rational vector.
fn clear_denominators(v: &[Rational]) -> (Vec<BigInt>, BigInt) {
    let m = v.iter().fold(BigInt::one(), |l, x| l.lcm(x.denom()));
    (v.iter().map(|x| (x * Rational::from_integer(m.clone())).to_integer()).collect(), m)
}

fn angle_point(theta: f64) -> (f64, f64) {
    (theta / 2.0).sin_cos()
}

impl ProductSurface {
    pub fn build(left: RationalCircleParam, right: RationalCircleParam, side: Side) -> Result<Self> {
        if !left.on_sphere_certificate() || !right.on_sphere_certificate() {
            return Err(Error::InvalidCircle("parametrization does not lie on S³".into()));
        }
        let plane = left.plane_form()?;
        let same = (0..3i64).all(|k| plane.contains(&right.eval_rational(&BigInt::from(k - 1), &BigInt::from(2 * k + 1)).to_array()));
        if same {
            return Err(Error::DegenerateProduct);
        }
        let a = left.num.clone().map(|f| lift_u(&f));
        let b = right.num.clone().map(|g| lift_v(&g));
        let num = match side {
            Side::LeftTimesRight => hamilton_product(&a, &b),
            Side::RightTimesLeft => hamilton_product(&b, &a),
        };
        let den = BiForm::outer(&left.den, &right.den);
        let surface = Self { left, right, side, num, den };
        debug_assert!(surface.on_sphere_certificate());
        Ok(surface)
    }

    /// `A₀⋆P` for a preset `P`.
    pub fn normal_form(p: Preset) -> Result<Self> {
        Self::build(RationalCircleParam::preset(Preset::A0), RationalCircleParam::preset(p), Side::LeftTimesRight)
    }

    pub fn left(&self) -> &RationalCircleParam {
        &self.left
    }

    pub fn right(&self) -> &RationalCircleParam {
        &self.right
    }

    pub fn side(&self) -> Side {
        self.side
    }

    /// Numerators and denominator as bihomogeneous forms.
    pub fn forms(&self) -> (&Quaternion<BiForm>, &BiForm) {
        (&self.num, &self.den)
    }

    /// `Σ numᵢ² ≡ den²` over ℚ[u, s, v, w].
    pub fn on_sphere_certificate(&self) -> bool {
        let (du, dv) = self.den.degrees();
        let sum = self
            .num
            .as_array()
            .into_iter()
            .fold(BiForm::zero(2 * du, 2 * dv), |acc, f| acc + f.clone() * f.clone());
        sum == self.den.clone() * self.den.clone()
    }

    fn combine<T>(&self, a: &Quaternion<T>, b: &Quaternion<T>) -> Quaternion<T>
    where
        T: Clone + std::ops::Add<Output = T> + std::ops::Sub<Output = T> + std::ops::Mul<Output = T>,
    {
        match self.side {
            Side::LeftTimesRight => hamilton_product(a, b),
            Side::RightTimesLeft => hamilton_product(b, a),
        }
    }

    /// Integer numerators and denominator at `(u:s, v:w)`.
    pub fn eval_int(&self, u: (&BigInt, &BigInt), v: (&BigInt, &BigInt)) -> (Quaternion<BigInt>, BigInt) {
        let (a, da) = self.left.eval_int(u.0, u.1);
        let (b, db) = self.right.eval_int(v.0, v.1);
        (self.combine(&a, &b), da * db)
    }

    pub fn eval_exact(&self, u: (&BigInt, &BigInt), v: (&BigInt, &BigInt)) -> Quaternion<Rational> {
        let (n, d) = self.eval_int(u, v);
        let d = Rational::from_integer(d);
        n.map(|x| Rational::from_integer(x) / &d)
    }

    /// Point at angles `(α, β)`, with `(u:s) = (sin α/2 : cos α/2)` and likewise for β.
    pub fn eval_angle(&self, alpha: f64, beta: f64) -> Quaternion<f64> {
        self.combine(&self.left.eval_angle(alpha), &self.right.eval_angle(beta))
    }

    /// Value and the two partial derivatives at `(α, β)`.
    pub fn eval_with_jacobian(&self, alpha: f64, beta: f64) -> [Quaternion<f64>; 3] {
        let (a, da) = self.left.eval_angle_with_derivative(alpha);
        let (b, db) = self.right.eval_angle_with_derivative(beta);
        [self.combine(&a, &b), self.combine(&da, &b), self.combine(&a, &db)]
    }

    /// The circle `v ↦ σ(u, v)` for a fixed rational `u`, a Clifford translate of the right circle.
    pub fn left_fiber(&self, u: (&BigInt, &BigInt)) -> RationalCircleParam {
        let a = UnitQuaternion::new(self.left.eval_rational(u.0, u.1)).expect("rational circle points are unit");
        match self.side {
            Side::LeftTimesRight => self.right.translate_left(&a),
            Side::RightTimesLeft => self.right.translate_right(&a),
        }
    }

    /// The circle `u ↦ σ(u, v)` for a fixed rational `v`, a Clifford translate of the left circle.
    pub fn right_fiber(&self, v: (&BigInt, &BigInt)) -> RationalCircleParam {
        let b = UnitQuaternion::new(self.right.eval_rational(v.0, v.1)).expect("rational circle points are unit");
        match self.side {
            Side::LeftTimesRight => self.left.translate_right(&b),
            Side::RightTimesLeft => self.left.translate_left(&b),
        }
    }

    /// Exact membership of a rational point: `p = a⋆b` iff `ā⋆p ∈ B` (or `p⋆ā ∈ B`),
    /// which is a common real root of two binary quadratics in `u`.
    pub fn contains_exact(&self, p: &Quaternion<Rational>) -> Result<bool> {
        let (pi, m) = clear_denominators(&p.to_array());
        let pq = Quaternion::from_array(std::array::from_fn(|k| BinaryForm::new(vec![pi[k].clone()])));
        let abar = self.left.num.conjugate();
        // b(u) = (numerator quaternion) / (m · den_a(u))
        let b = match self.side {
            Side::LeftTimesRight => hamilton_product(&abar, &pq),
            Side::RightTimesLeft => hamilton_product(&pq, &abar),
        };
        let plane = self.right.plane_form()?;
        let den = self.left.den.scale(&m);
        let mut forms = Vec::new();
        for (n, d) in [(&plane.n1, &plane.d1), (&plane.n2, &plane.d2)] {
            let mut coeffs: Vec<Rational> = n.to_vec();
            coeffs.push(d.clone());
            let (ints, _) = clear_denominators(&coeffs);
            let f = b
                .as_array()
                .into_iter()
                .zip(&ints)
                .fold(BinaryForm::zero(2), |acc, (bk, nk)| acc + bk.scale(nk))
                - den.scale(&ints[4]);
            forms.push(f);
        }
        if forms[0].is_zero() && forms[1].is_zero() {
            return Ok(true);
        }
        let g = forms[0].gcd(&forms[1]);
        Ok(!g.real_roots().unwrap_or_default().is_empty())
    }

    /// Rejects stereographic centers on the surface, exactly and by a float grid distance.
    pub fn check_projection(&self, projection: &Projection) -> Result<()> {
        let Some(st) = projection.stereographic() else { return Ok(()) };
        let c = st.center().to_array();
        if self.contains_exact(&Quaternion::from_array(c.clone()))? {
            return Err(Error::CenterOnSurface(0.0));
        }
        let cf = Quaternion::from_array(c.map(|x| crate::scalar::ratio_to_f64(&x)));
        let n = 96;
        let d = (0..n)
            .into_par_iter()
            .map(|i| {
                (0..n)
                    .map(|j| {
                        let t = std::f64::consts::TAU / n as f64;
                        self.eval_angle(i as f64 * t, j as f64 * t).distance(&cf)
                    })
                    .fold(f64::INFINITY, f64::min)
            })
            .reduce(|| f64::INFINITY, f64::min);
        if d < 1e-6 {
            return Err(Error::CenterOnSurface(d));
        }
        Ok(())
    }

    /// `nu × nv` grid over the parameter torus, projected; vertices row-major in `u`.
    pub fn sample_grid(&self, nu: usize, nv: usize, projection: &Projection) -> Result<Mesh> {
        if nu < 8 || nv < 8 {
            return Err(Error::Resolution(nu.min(nv)));
        }
        self.check_projection(projection)?;
        let (tu, tv) = (std::f64::consts::TAU / nu as f64, std::f64::consts::TAU / nv as f64);
        let params: Vec<(f64, f64)> =
            (0..nu).flat_map(|i| (0..nv).map(move |j| (i as f64 * tu, j as f64 * tv))).collect();
        let points: Vec<Quaternion<f64>> = params.par_iter().map(|&(a, b)| self.eval_angle(a, b)).collect();
        let vertices = match projection.stereographic() {
            Some(st) => Vertices::R3(points.iter().map(|p| st.project(p)).collect::<Result<_>>()?),
            None => Vertices::R4(points.into_iter().map(|p| p.into_array()).collect()),
        };
        Ok(Mesh::torus_grid(nu, nv, vertices, params))
    }

    /// Real self-intersection curves, traced in S³ and projected.
    pub fn double_curve(&self, projection: &Projection) -> Result<Vec<PolylineCurve>> {
        self.double_curve_with(projection, &DoubleCurveOptions::default())
    }

    pub fn double_curve_with(&self, projection: &Projection, opts: &DoubleCurveOptions) -> Result<Vec<PolylineCurve>> {
        let st = projection
            .stereographic()
            .ok_or_else(|| Error::NotApplicable("double curves are traced under stereographic projection".into()))?;
        self.check_projection(projection)?;
        DoubleCurveTracer { surface: self, st, opts }.run()
    }

    /// Section by the hyperplane `n·x = d`: the curve `n·num − d·den = 0` on the
    /// parameter torus. Separable section forms are factored exactly; others are traced
    /// by marching squares.
    pub fn hyperplane_section(&self, n: &[Rational; 4], d: &Rational) -> Result<Section> {
        let mut coeffs = n.to_vec();
        coeffs.push(d.clone());
        let (ints, _) = clear_denominators(&coeffs);
        let poly = self
            .num
            .as_array()
            .into_iter()
            .zip(&ints)
            .fold(BiForm::zero(2, 2), |acc, (f, k)| acc + f.scale(k))
            - self.den.scale(&ints[4]);
        if poly.is_zero() {
            return Err(Error::Degenerate("surface lies in the hyperplane".into()));
        }
        match poly.separate() {
            Some((f, g)) => Ok(self.exact_section(poly, f, g)),
            None => Ok(Section {
                components: marching_squares(&poly, 256)
                    .into_iter()
                    .map(|(params, closed)| SectionComponent {
                        kind: ComponentKind::Traced,
                        root: None,
                        multiplicity: 1,
                        points: params.iter().map(|&(a, b)| self.eval_angle(a, b).into_array()).collect(),
                        params,
                        closed,
                    })
                    .collect(),
                polynomial: poly,
                factors: None,
            }),
        }
    }

    fn exact_section(&self, poly: BiForm, f: BinaryForm, g: BinaryForm) -> Section {
        let left_roots = f.real_roots().unwrap_or_default();
        let right_roots = g.real_roots().unwrap_or_default();
        let n = 64;
        let ts: Vec<f64> = (0..n).map(|k| std::f64::consts::TAU * k as f64 / n as f64).collect();
        let mut components: Vec<SectionComponent> = Vec::new();
        let fibers = left_roots
            .iter()
            .map(|r| (ComponentKind::LeftFixed, r))
            .chain(right_roots.iter().map(|r| (ComponentKind::RightFixed, r)));
        for (kind, root) in fibers {
            let theta = root.angle();
            let params: Vec<(f64, f64)> = match kind {
                ComponentKind::LeftFixed => ts.iter().map(|&t| (theta, t)).collect(),
                _ => ts.iter().map(|&t| (t, theta)).collect(),
            };
            let points: Vec<[f64; 4]> = params.iter().map(|&(a, b)| self.eval_angle(a, b).into_array()).collect();
            if let Some(same) = components.iter_mut().find(|c| same_circle(&c.points, &points)) {
                same.multiplicity += root.multiplicity as usize;
                continue;
            }
            components.push(SectionComponent {
                kind,
                root: Some(root.clone()),
                multiplicity: root.multiplicity as usize,
                points,
                params,
                closed: true,
            });
        }
        Section {
            polynomial: poly,
            factors: Some(SectionFactors { left: f, right: g, left_roots, right_roots }),
            components,
        }
    }
}

/// `b` lies on the circle through the first three points of `a` (both sampled on S³).
fn same_circle(a: &[[f64; 4]], b: &[[f64; 4]]) -> bool {
    let p0 = Vector4::from(a[0]);
    let e1 = Vector4::from(a[a.len() / 3]) - p0;
    let mut e2 = Vector4::from(a[2 * a.len() / 3]) - p0;
    let e1 = e1.normalize();
    e2 -= e1 * e1.dot(&e2);
    let e2 = e2.normalize();
    b.iter().all(|q| {
        let r = Vector4::from(*q) - p0;
        (r - e1 * e1.dot(&r) - e2 * e2.dot(&r)).norm() < 1e-9
    })
}

/// Tuning of the double-curve search.
#[derive(Clone, Debug, PartialEq)]
pub struct DoubleCurveOptions {
    /// Samples per parameter direction for the seed search.
    pub grid: usize,
    /// Largest projected segment length of the returned polylines.
    pub max_segment: f64,
    /// Collision residual `‖σ(p₁) − σ(p₂)‖` accepted as a double point.
    pub tolerance: f64,
    /// Smallest parameter separation of a genuine pair.
    pub min_separation: f64,
}

impl Default for DoubleCurveOptions {
    fn default() -> Self {
        Self { grid: 160, max_segment: 5e-4, tolerance: 1e-8, min_separation: 1e-3 }
    }
}

struct DoubleCurveTracer<'a> {
    surface: &'a ProductSurface,
    st: Stereographic,
    opts: &'a DoubleCurveOptions,
}

type Params = Vector4<f64>;

fn wrap(x: f64) -> f64 {
    let t = std::f64::consts::TAU;
    x - t * (x / t).round()
}

impl DoubleCurveTracer<'_> {
    fn residual(&self, x: &Params) -> (Vector4<f64>, Matrix4<f64>) {
        let [p, pa, pb] = self.surface.eval_with_jacobian(x[0], x[1]);
        let [q, qa, qb] = self.surface.eval_with_jacobian(x[2], x[3]);
        let f = Vector4::from((p - q).into_array());
        let cols = [pa, pb, -qa, -qb].map(|c| Vector4::from(c.into_array()));
        (f, Matrix4::from_columns(&cols))
    }

    fn separation(x: &Params) -> f64 {
        (wrap(x[0] - x[2]).powi(2) + wrap(x[1] - x[3]).powi(2)).sqrt()
    }

    /// Damped Gauss–Newton with an SVD pseudo-inverse.
    fn newton(&self, mut x: Params) -> Option<Params> {
        let (mut f, mut j) = self.residual(&x);
        for _ in 0..60 {
            let fnorm = f.norm();
            if fnorm < 1e-14 {
                break;
            }
            let svd = j.svd(true, true);
            let cutoff = svd.singular_values.max() * 1e-10;
            let dx = -svd.solve(&f, cutoff).ok()?;
            let mut lambda = 1.0;
            let mut improved = false;
            for _ in 0..30 {
                let cand = x + dx * lambda;
                let (fc, jc) = self.residual(&cand);
                if fc.norm() < fnorm {
                    x = cand;
                    f = fc;
                    j = jc;
                    improved = true;
                    break;
                }
                lambda *= 0.5;
            }
            if !improved {
                break;
            }
        }
        (f.norm() < self.opts.tolerance && Self::separation(&x) > self.opts.min_separation).then_some(x)
    }

    fn tangent(&self, x: &Params, prev: Option<&Params>) -> Params {
        let (_, j) = self.residual(x);
        let svd = j.svd(false, true);
        let vt = svd.v_t.expect("requested");
        let k = (0..4)
            .min_by(|&a, &b| svd.singular_values[a].total_cmp(&svd.singular_values[b]))
            .expect("four values");
        let t: Params = vt.row(k).transpose();
        match prev {
            Some(p) if t.dot(p) < 0.0 => -t,
            _ => t,
        }
    }

    fn image(&self, x: &Params) -> Result<[f64; 3]> {
        self.st.project(&self.surface.eval_angle(x[0], x[1]))
    }

    /// Predictor–corrector continuation along the solution curve of `σ(p₁) = σ(p₂)`.
    fn trace(&self, start: Params) -> Result<(Vec<[f64; 3]>, bool)> {
        let max_seg = self.opts.max_segment;
        let mut x = start;
        let mut t = self.tangent(&x, None);
        let first = self.image(&x)?;
        let mut pts = vec![first];
        let mut h = 1e-3;
        for _ in 0..2_000_000 {
            let Some(next) = self.newton(x + t * h) else {
                h *= 0.5;
                if h < 1e-10 {
                    return Ok((pts, false));
                }
                continue;
            };
            let img = self.image(&next)?;
            let last = *pts.last().expect("non-empty");
            let seg = dist3(&img, &last);
            if seg > max_seg || (next - x).norm() > 3.0 * h {
                h *= 0.5;
                if h < 1e-10 {
                    return Ok((pts, false));
                }
                continue;
            }
            if pts.len() > 16 && dist3(&img, &first) < max_seg && dist3(&last, &first) >= dist3(&img, &first) {
                return Ok((pts, true));
            }
            pts.push(img);
            t = self.tangent(&next, Some(&t));
            x = next;
            if seg < 0.5 * max_seg {
                h *= 1.5;
            }
        }
        Ok((pts, false))
    }

    fn seeds(&self) -> Vec<(Params, [f64; 4])> {
        let n = self.opts.grid;
        let step = std::f64::consts::TAU / n as f64;
        let pts: Vec<[f64; 4]> = (0..n * n)
            .into_par_iter()
            .map(|k| self.surface.eval_angle((k / n) as f64 * step, (k % n) as f64 * step).into_array())
            .collect();
        let d4 = |a: &[f64; 4], b: &[f64; 4]| (0..4).map(|i| (a[i] - b[i]).powi(2)).sum::<f64>().sqrt();
        let spacing = (0..n * n)
            .into_par_iter()
            .map(|k| {
                let (i, j) = (k / n, k % n);
                d4(&pts[k], &pts[((i + 1) % n) * n + j]).max(d4(&pts[k], &pts[i * n + (j + 1) % n]))
            })
            .reduce(|| 0.0, f64::max);
        let cell = |p: &[f64; 4]| p.map(|x| (x / spacing).floor() as i64);
        let mut buckets: HashMap<[i64; 4], Vec<usize>> = HashMap::new();
        for (k, p) in pts.iter().enumerate() {
            buckets.entry(cell(p)).or_default().push(k);
        }
        let min_index_gap = (n / 16).max(4);
        let index_gap = |a: usize, b: usize| {
            let d = |x: usize, y: usize| {
                let d = x.abs_diff(y);
                d.min(n - d)
            };
            d(a / n, b / n).max(d(a % n, b % n))
        };
        let mut found: Vec<(usize, usize)> = (0..n * n)
            .into_par_iter()
            .flat_map_iter(|k| {
                let c = cell(&pts[k]);
                let mut out = Vec::new();
                for off in 0..81usize {
                    let o = [off % 3, off / 3 % 3, off / 9 % 3, off / 27].map(|x| x as i64 - 1);
                    let key = std::array::from_fn(|i| c[i] + o[i]);
                    for &m in buckets.get(&key).map(Vec::as_slice).unwrap_or_default() {
                        if m > k && index_gap(k, m) >= min_index_gap && d4(&pts[k], &pts[m]) < spacing {
                            out.push((k, m));
                        }
                    }
                }
                out
            })
            .collect();
        found.sort_unstable();
        found
            .into_iter()
            .map(|(k, m)| {
                let ang = |idx: usize| ((idx / n) as f64 * step, (idx % n) as f64 * step);
                let (a1, b1) = ang(k);
                let (a2, b2) = ang(m);
                (Params::new(a1, b1, a2, b2), pts[k])
            })
            .collect()
    }

    fn run(&self) -> Result<Vec<PolylineCurve>> {
        let seeds = self.seeds();
        let mut curves: Vec<PolylineCurve> = Vec::new();
        let mut covered: Vec<[f64; 4]> = Vec::new();
        let near_covered = |p: &[f64; 4], covered: &[[f64; 4]]| {
            covered.iter().any(|c| (0..4).map(|i| (c[i] - p[i]).powi(2)).sum::<f64>() < 4e-4)
        };
        for (seed, p) in seeds {
            if curves.len() >= 16 {
                break;
            }
            if near_covered(&p, &covered) {
                continue;
            }
            let Some(x) = self.newton(seed) else { continue };
            let q = self.surface.eval_angle(x[0], x[1]).into_array();
            if near_covered(&q, &covered) {
                continue;
            }
            let (pts, closed) = self.trace(x)?;
            if pts.len() < 8 {
                continue;
            }
            let inv = |y: &[f64; 3]| self.st.inverse(y).into_array();
            // coarse cover set: every few points is enough at the 2e-2 radius used above
            covered.extend(pts.iter().step_by(16).map(inv));
            covered.push(inv(pts.last().expect("non-empty")));
            curves.push(PolylineCurve::new(pts, closed)?);
        }
        Ok(curves)
    }
}

/// Which parameter is fixed along an exact section component.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ComponentKind {
    /// `u` fixed at a root of the left factor: a Clifford translate of the right circle.
    LeftFixed,
    /// `v` fixed at a root of the right factor: a Clifford translate of the left circle.
    RightFixed,
    /// Numerically traced branch of a non-separable section.
    Traced,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SectionComponent {
    pub kind: ComponentKind,
    pub root: Option<ProjRoot>,
    /// Sum of root multiplicities of all fibers with this point set.
    pub multiplicity: usize,
    /// Points on S³.
    pub points: Vec<[f64; 4]>,
    /// Parameter angles `(α, β)` of `points`.
    pub params: Vec<(f64, f64)>,
    pub closed: bool,
}

/// `section = left(u:s) · right(v:w)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SectionFactors {
    pub left: BinaryForm,
    pub right: BinaryForm,
    pub left_roots: Vec<ProjRoot>,
    pub right_roots: Vec<ProjRoot>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Section {
    pub polynomial: BiForm,
    pub factors: Option<SectionFactors>,
    pub components: Vec<SectionComponent>,
}

/// Zero set of a bihomogeneous form on the angle torus, as chained parameter polylines.
fn marching_squares(poly: &BiForm, n: usize) -> Vec<(Vec<(f64, f64)>, bool)> {
    let step = std::f64::consts::TAU / n as f64;
    let vals: Vec<f64> = (0..n * n)
        .into_par_iter()
        .map(|k| poly.eval_f64(angle_point((k / n) as f64 * step), angle_point((k % n) as f64 * step)))
        .collect();
    let val = |i: usize, j: usize| vals[(i % n) * n + j % n];
    // edge keys: (i, j, 0) joins (i,j)-(i+1,j); (i, j, 1) joins (i,j)-(i,j+1)
    type Key = (usize, usize, u8);
    let crossing = |k: Key| -> Option<(f64, f64)> {
        let (i, j, dir) = k;
        let (i2, j2) = if dir == 0 { (i + 1, j) } else { (i, j + 1) };
        let (f0, f1) = (val(i, j), val(i2, j2));
        if (f0 < 0.0) == (f1 < 0.0) {
            return None;
        }
        let t = f0 / (f0 - f1);
        let (a, b) = (i as f64 * step, j as f64 * step);
        Some(if dir == 0 { (a + t * step, b) } else { (a, b + t * step) })
    };
    let mut segments: Vec<(Key, Key)> = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let edges: [Key; 4] = [(i, j, 0), ((i + 1) % n, j, 1), (i, (j + 1) % n, 0), (i, j, 1)];
            let hits: Vec<Key> = edges.into_iter().filter(|&e| crossing(e).is_some()).collect();
            match hits.len() {
                2 => segments.push((hits[0], hits[1])),
                4 => {
                    let center = (val(i, j) + val(i + 1, j) + val(i + 1, j + 1) + val(i, j + 1)) / 4.0;
                    if (center < 0.0) == (val(i, j) < 0.0) {
                        segments.push((hits[0], hits[1]));
                        segments.push((hits[2], hits[3]));
                    } else {
                        segments.push((hits[0], hits[3]));
                        segments.push((hits[1], hits[2]));
                    }
                }
                _ => {}
            }
        }
    }
    let mut by_edge: HashMap<Key, Vec<usize>> = HashMap::new();
    for (s, (a, b)) in segments.iter().enumerate() {
        by_edge.entry(*a).or_default().push(s);
        by_edge.entry(*b).or_default().push(s);
    }
    let mut used = vec![false; segments.len()];
    // keys reached by crossing `key` into unused segments, marking them
    let extend = |mut key: Key, used: &mut [bool]| -> Vec<Key> {
        let mut keys = Vec::new();
        while let Some(&t) = by_edge[&key].iter().find(|&&t| !used[t]) {
            used[t] = true;
            let (a, b) = segments[t];
            key = if a == key { b } else { a };
            keys.push(key);
        }
        keys
    };
    let mut out = Vec::new();
    for s0 in 0..segments.len() {
        if used[s0] {
            continue;
        }
        used[s0] = true;
        let (a, b) = segments[s0];
        let mut fwd = extend(b, &mut used);
        let closed = fwd.last() == Some(&a);
        let keys: Vec<Key> = if closed {
            fwd.pop();
            [a, b].into_iter().chain(fwd).collect()
        } else {
            let mut back = extend(a, &mut used);
            back.reverse();
            back.into_iter().chain([a, b]).chain(fwd).collect()
        };
        let params: Vec<(f64, f64)> = keys.iter().filter_map(|&k| crossing(k)).collect();
        if params.len() >= 2 {
            out.push((params, closed));
        }
    }
    out
}

/// Stereographic image of an S³ point list.
pub fn project_points(points: &[[f64; 4]], st: &Stereographic) -> Result<Vec<[f64; 3]>> {
    points.iter().map(|p| st.project(&Quaternion::from_array(*p))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circles::meet_great_circle;
    use crate::scalar::{int, rat};
    use crate::topology::{euler_characteristic, hausdorff_to_circle};

    fn b(x: i64) -> BigInt {
        BigInt::from(x)
    }

    fn nf(p: Preset) -> ProductSurface {
        ProductSurface::normal_form(p).unwrap()
    }

    #[test]
    fn build_examples() {
        let s2 = nf(Preset::B2);
        assert_eq!(s2.eval_exact((&b(0), &b(1)), (&b(1), &b(0))), Quaternion::one());
        let s1 = nf(Preset::B1);
        let bb = RationalCircleParam::preset(Preset::B1).eval_rational(&b(2), &b(3));
        // α = π/2 is (u:s) = (1:1)
        assert_eq!(s1.eval_exact((&b(1), &b(1)), (&b(2), &b(3))), hamilton_product(&Quaternion::i(), &bb));
        for p in [Preset::B1, Preset::B2, Preset::B3, Preset::C] {
            assert!(nf(p).on_sphere_certificate(), "{p}");
        }
        let a0 = RationalCircleParam::preset(Preset::A0);
        assert_eq!(ProductSurface::build(a0.clone(), a0.reparametrize(1, 2, 0, 1).unwrap(), Side::LeftTimesRight), Err(Error::DegenerateProduct));
        assert!(ProductSurface::build(a0.clone(), a0, Side::LeftTimesRight).is_err());
    }

    #[test]
    fn product_formula_in_coordinates() {
        // (cos s + i sin s)⋆(b₀ + b₁i + b₃k) = (b₀c − b₁s, b₀s + b₁c, −b₃s, b₃c)
        let s1 = nf(Preset::B1);
        let b1 = RationalCircleParam::preset(Preset::B1);
        for (alpha, beta) in [(0.3, 1.1), (2.0, -0.4), (4.5, 3.0)] {
            let x = s1.eval_angle(alpha, beta);
            let bb = b1.eval_angle(beta);
            let (c, s) = (f64::cos(alpha), f64::sin(alpha));
            let want = Quaternion::new(bb.w * c - bb.x * s, bb.w * s + bb.x * c, -bb.z * s, bb.z * c);
            assert!((x - want).norm() < 1e-14);
        }
    }

    #[test]
    fn swap_traces_same_points() {
        let a0 = RationalCircleParam::preset(Preset::A0);
        let b1 = RationalCircleParam::preset(Preset::B1);
        let lr = ProductSurface::build(a0.clone(), b1.clone(), Side::LeftTimesRight).unwrap();
        let rl = ProductSurface::build(b1, a0, Side::RightTimesLeft).unwrap();
        let params: Vec<(BigInt, BigInt)> = (0..16).map(|k| (b(k - 8), b(k % 5 + 1))).collect();
        let key = |q: Quaternion<Rational>| q.into_array().map(|x| (x.numer().clone(), x.denom().clone()));
        let mut p1: Vec<_> = params
            .iter()
            .flat_map(|u| params.iter().map(move |v| (u, v)))
            .map(|(u, v)| key(lr.eval_exact((&u.0, &u.1), (&v.0, &v.1))))
            .collect();
        let mut p2: Vec<_> = params
            .iter()
            .flat_map(|u| params.iter().map(move |v| (u, v)))
            .map(|(u, v)| key(rl.eval_exact((&u.0, &u.1), (&v.0, &v.1))))
            .collect();
        p1.sort();
        p2.sort();
        assert_eq!(p1, p2);
    }

    #[test]
    fn fibers_are_circles() {
        let s3 = nf(Preset::B3);
        let a0 = RationalCircleParam::preset(Preset::A0).plane_form().unwrap();
        for k in 0..6i64 {
            let u = (b(2 * k - 5), b(k + 1));
            let fiber = s3.left_fiber((&u.0, &u.1));
            let plane = fiber.plane_form().unwrap();
            for m in 0..8i64 {
                let x = s3.eval_exact((&u.0, &u.1), (&b(m - 3), &b(m + 2)));
                assert!(plane.contains(&x.to_array()));
            }
            assert!(!plane.is_great());
            let v = (b(3 * k - 7), b(2 * k + 1));
            let great = s3.right_fiber((&v.0, &v.1));
            let gp = great.plane_form().unwrap();
            assert!(gp.is_great());
            // a great fiber of A₀⋆B₃ misses A₀ entirely
            assert_eq!(meet_great_circle(&great, &a0).unwrap().q, 0);
        }
    }

    #[test]
    fn great_fibers_meet_a0_only_when_equal() {
        let s1 = nf(Preset::B1);
        let a0 = RationalCircleParam::preset(Preset::A0);
        let a0p = a0.plane_form().unwrap();
        for k in 1..13i64 {
            let v = (b(k), b(13 - k));
            let great = s1.right_fiber((&v.0, &v.1));
            match meet_great_circle(&great, &a0p) {
                Ok(m) => assert_eq!(m.q, 0),
                Err(Error::NotTransversal) => unreachable!("B₁ meets A₀ at irrational parameters only"),
                Err(e) => panic!("{e}"),
            }
            let d = (0..256)
                .map(|i| {
                    let p = great.eval_angle(i as f64 * 0.0245);
                    (0..256).map(|j| (p.clone() - a0.eval_angle(j as f64 * 0.0245)).norm()).fold(f64::INFINITY, f64::min)
                })
                .fold(f64::INFINITY, f64::min);
            assert!(d > 1e-3);
        }
    }

    #[test]
    fn exact_membership() {
        let s1 = nf(Preset::B1);
        let p = s1.eval_exact((&b(3), &b(7)), (&b(-2), &b(5)));
        assert!(s1.contains_exact(&p).unwrap());
        assert!(!s1.contains_exact(&Quaternion::k()).unwrap());
        let j = ProductSurface::normal_form(Preset::J).unwrap();
        assert!(j.contains_exact(&Quaternion::k()).unwrap());
        assert_eq!(j.check_projection(&Projection::Stereo), Err(Error::CenterOnSurface(0.0)));
        assert!(j.check_projection(&Projection::Central).is_ok());
        for p in [Preset::B1, Preset::B2, Preset::B3, Preset::C] {
            assert!(nf(p).check_projection(&Projection::Stereo).is_ok());
        }
    }

    #[test]
    fn grid_mesh() {
        let m = nf(Preset::B3).sample_grid(24, 16, &Projection::Stereo).unwrap();
        assert_eq!(m.vertices.len(), 384);
        assert_eq!(euler_characteristic(&m).unwrap(), 0);
        assert_eq!(nf(Preset::B3).sample_grid(4, 16, &Projection::Stereo), Err(Error::Resolution(4)));
        let c = nf(Preset::B3).sample_grid(8, 8, &Projection::Central).unwrap();
        assert!(matches!(c.vertices, Vertices::R4(_)));
    }

    #[test]
    fn clifford_torus_mesh_is_ring_torus() {
        let m = nf(Preset::C).sample_grid(32, 32, &Projection::Stereo).unwrap();
        for p in m.vertices.as_r3().unwrap() {
            let [x, y, z] = *p;
            let r2 = x * x + y * y + z * z;
            let f = 9.0 * (r2 + 1.0).powi(2) - 100.0 * (x * x + y * y);
            assert!(f.abs() < 1e-9 * (1.0 + r2 * r2));
        }
    }

    #[test]
    fn x4_sections() {
        let zero = int(0);
        let e4 = [int(0), int(0), int(0), int(1)];
        let (a, s) = (BinaryForm::quadratic(-1, 0, 1), BinaryForm::quadratic(1, 0, -1));
        for (p, q, mult) in [(Preset::B1, 2, 2), (Preset::B2, 1, 2), (Preset::B3, 0, 0)] {
            let sec = nf(p).hyperplane_section(&e4, &zero).unwrap();
            let f = sec.factors.as_ref().expect("separable");
            assert!(f.left.primitive() == a.primitive() || f.left.primitive() == s.primitive());
            assert_eq!(f.left_roots.len(), 2);
            assert_eq!(f.right_roots.len(), q);
            let smalls: Vec<_> = sec.components.iter().filter(|c| c.kind == ComponentKind::LeftFixed).collect();
            assert_eq!(smalls.len(), 2);
            for (x, y) in smalls[0].points.iter().zip(&smalls[1].points) {
                assert!((0..4).all(|k| (x[k] + y[k]).abs() < 1e-14));
            }
            let greats: Vec<_> = sec.components.iter().filter(|c| c.kind == ComponentKind::RightFixed).collect();
            assert_eq!(greats.iter().map(|c| c.multiplicity).sum::<usize>(), mult);
            for g in greats {
                assert!(g.points.iter().all(|x| x[2].abs() < 1e-14 && x[3].abs() < 1e-14));
            }
        }
    }

    #[test]
    fn traced_section() {
        let sec = nf(Preset::B1).hyperplane_section(&[int(1), int(0), int(0), int(0)], &rat(1, 2)).unwrap();
        assert!(sec.factors.is_none());
        assert!(!sec.components.is_empty());
        for c in &sec.components {
            for x in &c.points {
                assert!((x[0] - 0.5).abs() < 1e-3);
            }
        }
        let miss = nf(Preset::B1).hyperplane_section(&[int(1), int(0), int(0), int(0)], &int(2)).unwrap();
        assert!(miss.components.is_empty());
    }

    #[test]
    fn double_curves() {
        let curves = nf(Preset::B1).double_curve(&Projection::Stereo).unwrap();
        assert_eq!(curves.len(), 1);
        let c = &curves[0];
        assert!(c.closed);
        assert!(hausdorff_to_circle(c, [0.0; 3], [0.0, 0.0, 1.0], 1.0) < 1e-6);
        assert!(nf(Preset::B3).double_curve(&Projection::Stereo).unwrap().is_empty());
        assert!(nf(Preset::B2).double_curve(&Projection::Stereo).unwrap().is_empty());
        assert!(matches!(nf(Preset::B1).double_curve(&Projection::Central), Err(Error::NotApplicable(_))));
    }
}
