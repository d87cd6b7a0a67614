//! Numerical topology certificates: linking numbers, torus cores, separation
//! margins, the touching-tori decomposition and Euler characteristics.

use std::collections::HashMap;
use std::f64::consts::{PI, TAU};

use rayon::prelude::*;
use serde::Serialize;

use crate::circles::{meet_great_circle, RationalCircleParam};
use crate::error::{Error, Result};
use crate::mesh::{dist3, Mesh};
pub use crate::mesh::PolylineCurve;
use crate::moebius::{Projection, Stereographic};
use crate::product::ProductSurface;

type P3 = [f64; 3];

/// Smallest distance between polylines below which linking numbers are refused.
pub const MIN_CURVE_DISTANCE: f64 = 1e-6;
/// Largest accepted distance of the Gauss sum from an integer.
pub const MAX_LINKING_RESIDUE: f64 = 0.1;

fn sub(a: &P3, b: &P3) -> P3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn dot(a: &P3, b: &P3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross(a: &P3, b: &P3) -> P3 {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn norm(a: &P3) -> f64 {
    dot(a, a).sqrt()
}

/// Distance from `p` to the segment `ab`.
pub fn point_segment_distance(p: &P3, a: &P3, b: &P3) -> f64 {
    let ab = sub(b, a);
    let l2 = dot(&ab, &ab);
    let t = if l2 == 0.0 { 0.0 } else { (dot(&sub(p, a), &ab) / l2).clamp(0.0, 1.0) };
    dist3(p, &[a[0] + t * ab[0], a[1] + t * ab[1], a[2] + t * ab[2]])
}

/// Distance between segments `ab` and `cd`.
pub fn segment_distance(a: &P3, b: &P3, c: &P3, d: &P3) -> f64 {
    let (u, v, w) = (sub(b, a), sub(d, c), sub(a, c));
    let (aa, bb, cc, dd, ee) = (dot(&u, &u), dot(&u, &v), dot(&v, &v), dot(&u, &w), dot(&v, &w));
    let den = aa * cc - bb * bb;
    let mut best = point_segment_distance(a, c, d)
        .min(point_segment_distance(b, c, d))
        .min(point_segment_distance(c, a, b))
        .min(point_segment_distance(d, a, b));
    if den > 1e-300 {
        let s = (bb * ee - cc * dd) / den;
        let t = (aa * ee - bb * dd) / den;
        if (0.0..=1.0).contains(&s) && (0.0..=1.0).contains(&t) {
            let p = [a[0] + s * u[0], a[1] + s * u[1], a[2] + s * u[2]];
            let q = [c[0] + t * v[0], c[1] + t * v[1], c[2] + t * v[2]];
            best = best.min(dist3(&p, &q));
        }
    }
    best
}

/// Bounding-volume hierarchy over polyline segments for nearest-distance queries.
pub struct SegmentIndex {
    segments: Vec<(P3, P3)>,
    nodes: Vec<Node>,
}

struct Node {
    lo: P3,
    hi: P3,
    /// Leaf range into `segments`, or child node indices.
    kind: NodeKind,
}

enum NodeKind {
    Leaf(usize, usize),
    Inner(usize, usize),
}

const LEAF_SIZE: usize = 8;

fn box_distance(p: &P3, lo: &P3, hi: &P3) -> f64 {
    let d: P3 = std::array::from_fn(|i| (lo[i] - p[i]).max(p[i] - hi[i]).max(0.0));
    norm(&d)
}

impl SegmentIndex {
    pub fn new(curve: &PolylineCurve) -> Self {
        let mut segments: Vec<(P3, P3)> = curve.segments().collect();
        let mut nodes = Vec::new();
        let n = segments.len();
        Self::build(&mut segments, 0, n, &mut nodes);
        Self { segments, nodes }
    }

    fn build(segs: &mut [(P3, P3)], start: usize, end: usize, nodes: &mut Vec<Node>) -> usize {
        let slice = &mut segs[start..end];
        let mut lo = [f64::INFINITY; 3];
        let mut hi = [f64::NEG_INFINITY; 3];
        for (a, b) in slice.iter() {
            for i in 0..3 {
                lo[i] = lo[i].min(a[i]).min(b[i]);
                hi[i] = hi[i].max(a[i]).max(b[i]);
            }
        }
        let id = nodes.len();
        nodes.push(Node { lo, hi, kind: NodeKind::Leaf(start, end) });
        if slice.len() > LEAF_SIZE {
            let axis = (0..3).max_by(|&i, &j| (hi[i] - lo[i]).total_cmp(&(hi[j] - lo[j]))).expect("three axes");
            let mid = slice.len() / 2;
            slice.select_nth_unstable_by(mid, |x, y| (x.0[axis] + x.1[axis]).total_cmp(&(y.0[axis] + y.1[axis])));
            let left = Self::build(segs, start, start + mid, nodes);
            let right = Self::build(segs, start + mid, end, nodes);
            nodes[id].kind = NodeKind::Inner(left, right);
        }
        id
    }

    /// Distance from `p` to the indexed polyline.
    pub fn distance(&self, p: &P3) -> f64 {
        let mut best = f64::INFINITY;
        let mut stack = vec![0usize];
        while let Some(k) = stack.pop() {
            let node = &self.nodes[k];
            if box_distance(p, &node.lo, &node.hi) >= best {
                continue;
            }
            match node.kind {
                NodeKind::Leaf(s, e) => {
                    for (a, b) in &self.segments[s..e] {
                        best = best.min(point_segment_distance(p, a, b));
                    }
                }
                NodeKind::Inner(l, r) => {
                    let (dl, dr) = (
                        box_distance(p, &self.nodes[l].lo, &self.nodes[l].hi),
                        box_distance(p, &self.nodes[r].lo, &self.nodes[r].hi),
                    );
                    // visit the nearer child first
                    if dl < dr {
                        stack.extend([r, l]);
                    } else {
                        stack.extend([l, r]);
                    }
                }
            }
        }
        best
    }
}

/// Minimum distance between two polylines.
pub fn curve_distance(c1: &PolylineCurve, c2: &PolylineCurve) -> f64 {
    let s2: Vec<(P3, P3)> = c2.segments().collect();
    c1.segments()
        .collect::<Vec<_>>()
        .par_iter()
        .map(|(a, b)| s2.iter().map(|(c, d)| segment_distance(a, b, c, d)).fold(f64::INFINITY, f64::min))
        .reduce(|| f64::INFINITY, f64::min)
}

/// Symmetric Hausdorff distance between polylines, measured at vertices and segment midpoints.
pub fn hausdorff_distance(c1: &PolylineCurve, c2: &PolylineCurve) -> f64 {
    let one_sided = |a: &PolylineCurve, b: &PolylineCurve| {
        let index = SegmentIndex::new(b);
        let probes: Vec<P3> = a.subdivided(2).points;
        probes.par_iter().map(|p| index.distance(p)).reduce(|| 0.0, f64::max)
    };
    one_sided(c1, c2).max(one_sided(c2, c1))
}

/// Hausdorff distance between a polyline and the circle with the given center,
/// unit normal and radius, using the exact distance to the circle.
pub fn hausdorff_to_circle(curve: &PolylineCurve, center: P3, normal: P3, radius: f64) -> f64 {
    let n = {
        let l = norm(&normal);
        normal.map(|x| x / l)
    };
    let to_circle = |p: &P3| {
        let r = sub(p, &center);
        let h = dot(&r, &n);
        let inplane = norm(&sub(&r, &n.map(|x| x * h)));
        ((inplane - radius).powi(2) + h * h).sqrt()
    };
    let probes = curve.subdivided(4).points;
    let near = probes.iter().map(to_circle).fold(0.0, f64::max);
    // circle frame
    let e1 = {
        let t = if n[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
        let c = cross(&n, &t);
        let l = norm(&c);
        c.map(|x| x / l)
    };
    let e2 = cross(&n, &e1);
    let index = SegmentIndex::new(curve);
    let m = 4 * curve.len().max(1024);
    let far = (0..m)
        .into_par_iter()
        .map(|k| {
            let t = TAU * k as f64 / m as f64;
            let p: P3 = std::array::from_fn(|i| center[i] + radius * (t.cos() * e1[i] + t.sin() * e2[i]));
            index.distance(&p)
        })
        .reduce(|| 0.0, f64::max);
    near.max(far)
}

/// Solid angle subtended by segment pair `(p1p2, p3p4)`, signed; sums to `4π·Lk`.
fn segment_pair_linking(p1: &P3, p2: &P3, p3: &P3, p4: &P3) -> f64 {
    let (r13, r14, r23, r24) = (sub(p3, p1), sub(p4, p1), sub(p3, p2), sub(p4, p2));
    let unit = |v: P3| {
        let l = norm(&v);
        if l < 1e-300 {
            None
        } else {
            Some(v.map(|x| x / l))
        }
    };
    let (Some(n1), Some(n2), Some(n3), Some(n4)) =
        (unit(cross(&r13, &r14)), unit(cross(&r14, &r24)), unit(cross(&r24, &r23)), unit(cross(&r23, &r13)))
    else {
        return 0.0;
    };
    let asin = |x: f64| x.clamp(-1.0, 1.0).asin();
    let omega = asin(dot(&n1, &n2)) + asin(dot(&n2, &n3)) + asin(dot(&n3, &n4)) + asin(dot(&n4, &n1));
    let s = dot(&cross(&sub(p4, p3), &sub(p2, p1)), &r13);
    if s > 0.0 {
        omega
    } else if s < 0.0 {
        -omega
    } else {
        0.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Linking {
    pub value: i64,
    /// Unrounded Gauss sum.
    pub raw: f64,
    pub residue: f64,
}

/// Gauss linking number of two closed polylines, right-handed convention.
pub fn linking_number(c1: &PolylineCurve, c2: &PolylineCurve) -> Result<Linking> {
    if !c1.closed || !c2.closed {
        return Err(Error::NotApplicable("linking numbers need closed curves".into()));
    }
    let d = curve_distance(c1, c2);
    if d < MIN_CURVE_DISTANCE {
        return Err(Error::CurvesTooClose(d));
    }
    let s2: Vec<(P3, P3)> = c2.segments().collect();
    // per-row sums reduced in index order keep the result independent of scheduling
    let rows: Vec<f64> = c1
        .segments()
        .collect::<Vec<_>>()
        .par_iter()
        .map(|(a, b)| s2.iter().map(|(c, dd)| segment_pair_linking(a, b, c, dd)).sum::<f64>())
        .collect();
    let raw = rows.iter().sum::<f64>() / (4.0 * PI);
    let value = raw.round();
    let residue = (raw - value).abs();
    if residue >= MAX_LINKING_RESIDUE {
        return Err(Error::LinkingResidue(residue));
    }
    Ok(Linking { value: value as i64, raw, residue })
}

/// Linking number of two parametrized closed curves on `[0, 2π)`, starting at 256
/// segments and doubling until two successive resolutions agree.
pub fn linking_number_adaptive<F, G>(f: F, g: G) -> Result<Linking>
where
    F: Fn(f64) -> P3,
    G: Fn(f64) -> P3,
{
    let sample = |h: &dyn Fn(f64) -> P3, n: usize| {
        PolylineCurve::new((0..n).map(|k| h(TAU * k as f64 / n as f64)).collect(), true)
    };
    let mut n = 256;
    let mut previous: Option<Linking> = None;
    loop {
        let current = linking_number(&sample(&f, n)?, &sample(&g, n)?);
        match (&previous, &current) {
            (Some(p), Ok(c)) if p.value == c.value => return current,
            _ if n >= 1 << 14 => return current,
            _ => {}
        }
        previous = current.ok();
        n *= 2;
    }
}

/// Resolution of torus cores.
#[derive(Clone, Debug, PartialEq)]
pub struct CoreOptions {
    /// Number of fibers (core vertices).
    pub nu: usize,
    /// Samples per fiber.
    pub nv: usize,
}

impl Default for CoreOptions {
    fn default() -> Self {
        Self { nu: 256, nv: 256 }
    }
}

fn stereo(projection: &Projection) -> Result<Stereographic> {
    projection
        .stereographic()
        .ok_or_else(|| Error::NotApplicable("topology checks use stereographic projection".into()))
}

/// Curve of centroids of the projected small-circle fibers `v ↦ σ(u, v)`.
pub fn torus_core(surface: &ProductSurface, projection: &Projection) -> Result<PolylineCurve> {
    torus_core_range(surface, projection, (0.0, TAU), &CoreOptions::default())
}

/// Centroids of the fiber arcs `β ∈ [lo, hi]`; the full range gives [`torus_core`].
pub fn torus_core_range(
    surface: &ProductSurface,
    projection: &Projection,
    (lo, hi): (f64, f64),
    opts: &CoreOptions,
) -> Result<PolylineCurve> {
    let st = stereo(projection)?;
    surface.check_projection(projection)?;
    let full = (hi - lo - TAU).abs() < 1e-12;
    let betas: Vec<f64> = if full {
        (0..opts.nv).map(|j| lo + TAU * j as f64 / opts.nv as f64).collect()
    } else {
        (0..=opts.nv).map(|j| lo + (hi - lo) * j as f64 / opts.nv as f64).collect()
    };
    let centers: Vec<Result<P3>> = (0..opts.nu)
        .into_par_iter()
        .map(|i| {
            let alpha = TAU * i as f64 / opts.nu as f64;
            let pts: Vec<P3> = betas.iter().map(|&b| st.project(&surface.eval_angle(alpha, b))).collect::<Result<_>>()?;
            let c: P3 = std::array::from_fn(|k| pts.iter().map(|p| p[k]).sum::<f64>() / pts.len() as f64);
            let spread = pts.iter().map(|p| dist3(p, &c)).fold(0.0, f64::max);
            if spread < 1e-6 {
                return Err(Error::DegenerateFiber(spread));
            }
            Ok(c)
        })
        .collect();
    PolylineCurve::new(centers.into_iter().collect::<Result<_>>()?, true)
}

/// Centroids of the `v`-rows of an `nu × nv` torus grid mesh (see [`Mesh::torus_grid`]).
pub fn mesh_core(mesh: &Mesh, nu: usize, nv: usize) -> Result<PolylineCurve> {
    let pts = mesh.vertices.as_r3().ok_or_else(|| Error::NotApplicable("mesh core needs ℝ³ vertices".into()))?;
    if pts.len() != nu * nv {
        return Err(Error::Degenerate(format!("{} vertices for a {nu} × {nv} grid", pts.len())));
    }
    let centers = pts
        .chunks(nv)
        .map(|row| {
            let c: P3 = std::array::from_fn(|k| row.iter().map(|p| p[k]).sum::<f64>() / nv as f64);
            let spread = row.iter().map(|p| dist3(p, &c)).fold(0.0, f64::max);
            if spread < 1e-6 {
                Err(Error::DegenerateFiber(spread))
            } else {
                Ok(c)
            }
        })
        .collect::<Result<_>>()?;
    PolylineCurve::new(centers, true)
}

/// Minimum distance from the projected surface to `curve`: an `n × n` grid search
/// followed by pattern-search refinement of the best grid cells.
pub fn separation(surface: &ProductSurface, projection: &Projection, curve: &PolylineCurve) -> Result<f64> {
    separation_with(surface, projection, curve, 128)
}

pub fn separation_with(surface: &ProductSurface, projection: &Projection, curve: &PolylineCurve, n: usize) -> Result<f64> {
    let st = stereo(projection)?;
    surface.check_projection(projection)?;
    let index = SegmentIndex::new(curve);
    let dist = |a: f64, b: f64| -> f64 {
        st.project(&surface.eval_angle(a, b)).map(|p| index.distance(&p)).unwrap_or(f64::INFINITY)
    };
    let step = TAU / n as f64;
    let mut grid: Vec<(f64, usize)> = (0..n * n)
        .into_par_iter()
        .map(|k| (dist((k / n) as f64 * step, (k % n) as f64 * step), k))
        .collect();
    grid.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));
    let refined = grid
        .iter()
        .take(12)
        .collect::<Vec<_>>()
        .par_iter()
        .map(|&&(d0, k)| {
            let (mut a, mut b, mut best) = ((k / n) as f64 * step, (k % n) as f64 * step, d0);
            let mut h = step;
            while h > 1e-13 {
                let mut moved = false;
                for (da, db) in [(h, 0.0), (-h, 0.0), (0.0, h), (0.0, -h), (h, h), (-h, -h), (h, -h), (-h, h)] {
                    let d = dist(a + da, b + db);
                    if d < best {
                        (a, b, best) = (a + da, b + db, d);
                        moved = true;
                    }
                }
                if !moved {
                    h *= 0.5;
                }
            }
            best
        })
        .reduce(|| f64::INFINITY, f64::min);
    Ok(refined.min(grid[0].0))
}

/// Projected, densely sampled circle.
pub fn project_circle(circle: &RationalCircleParam, projection: &Projection, n: usize) -> Result<PolylineCurve> {
    let st = stereo(projection)?;
    let pts = (0..n).map(|k| st.project(&circle.eval_angle(TAU * k as f64 / n as f64))).collect::<Result<_>>()?;
    PolylineCurve::new(pts, true)
}

/// `V − E + F` of a closed polygon mesh.
pub fn euler_characteristic(mesh: &Mesh) -> Result<i64> {
    let mut edges: HashMap<(usize, usize), usize> = HashMap::new();
    for f in &mesh.faces {
        for k in 0..f.len() {
            let (a, b) = (f[k], f[(k + 1) % f.len()]);
            *edges.entry((a.min(b), a.max(b))).or_default() += 1;
        }
    }
    if !mesh.closed || edges.values().any(|&c| c != 2) {
        return Err(Error::OpenMesh);
    }
    Ok(mesh.vertices.len() as i64 - edges.len() as i64 + mesh.faces.len() as i64)
}

/// One named numerical check.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub value: serde_json::Value,
}

impl Check {
    pub fn new(name: impl Into<String>, pass: bool, value: impl Serialize) -> Self {
        Self { name: name.into(), pass, value: serde_json::to_value(value).expect("check values serialize") }
    }
}

/// `{"type": "I|II|III", "checks": [...]}`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    #[serde(rename = "type")]
    pub kind: String,
    pub checks: Vec<Check>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

/// Tolerance for "meets only along V" in the touching-tori certificate.
pub const TOUCHING_TOLERANCE: f64 = 1e-3;

/// Type I certificate for a product of a great circle `A` and a small circle `B`
/// meeting `A` twice: the torus splits at the two roots into annuli whose boundary
/// circles both lie on `π(V)`, the annuli meet only along `π(V)`, and the annulus
/// cores link.
pub fn touching_tori_certificate(surface: &ProductSurface, projection: &Projection) -> Result<Report> {
    let st = stereo(projection)?;
    let great = surface.left().plane_form()?;
    if !great.is_great() {
        return Err(Error::NotGreat);
    }
    if surface.right().plane_form()?.is_great() {
        return Err(Error::CliffordTorus);
    }
    let meet = meet_great_circle(surface.right(), &great)?;
    if meet.q != 2 {
        return Err(Error::NotApplicable(format!("touching tori need q = 2, found q = {}", meet.q)));
    }
    let mut roots: Vec<f64> = meet.roots.iter().map(|r| r.angle().rem_euclid(TAU)).collect();
    roots.sort_by(f64::total_cmp);
    let (b1, b2) = (roots[0], roots[1]);
    let n = 2048;
    let boundary = |beta: f64| -> Result<PolylineCurve> {
        let pts = (0..n).map(|k| st.project(&surface.eval_angle(TAU * k as f64 / n as f64, beta))).collect::<Result<_>>()?;
        PolylineCurve::new(pts, true)
    };
    let (v1, v2) = (boundary(b1)?, boundary(b2)?);
    let v = project_circle(surface.left(), projection, 1 << 14)?;
    let boundary_gap = hausdorff_distance(&v1, &v).max(hausdorff_distance(&v2, &v));
    let mut checks = vec![Check::new("boundaries_on_double_circle", boundary_gap < TOUCHING_TOLERANCE, boundary_gap)];

    // every real self-intersection lies on π(V) and together they cover it
    let collisions = surface.double_curve(projection)?;
    let on_v = collisions.iter().map(|c| hausdorff_distance(c, &v)).fold(f64::INFINITY, f64::min);
    let on_v = if collisions.is_empty() { f64::INFINITY } else { on_v };
    let stray = collisions
        .iter()
        .map(|c| {
            let index = SegmentIndex::new(&v);
            c.points.iter().map(|p| index.distance(p)).fold(0.0, f64::max)
        })
        .fold(0.0, f64::max);
    checks.push(Check::new("annuli_meet_along_double_circle", on_v < TOUCHING_TOLERANCE && stray < TOUCHING_TOLERANCE, on_v.max(stray)));

    // annulus interiors away from the split stay apart
    let eta = 0.05;
    let margin = interior_margin(surface, &st, (b1 + eta, b2 - eta), (b2 + eta, b1 + TAU - eta))?;
    checks.push(Check::new("interior_margin", margin > 1e-6, margin));

    let opts = CoreOptions::default();
    let t1 = torus_core_range(surface, projection, (b1, b2), &opts)?;
    let t2 = torus_core_range(surface, projection, (b2, b1 + TAU), &opts)?;
    let link = linking_number(&t1, &t2);
    let (pass, value) = match &link {
        Ok(l) => (l.value.abs() == 1, serde_json::json!({"linking": l.value, "residue": l.residue})),
        Err(e) => (false, serde_json::json!(e.to_string())),
    };
    checks.push(Check { name: "cores_linked".into(), pass, value });
    Ok(Report { kind: "I".into(), checks })
}

/// Minimum distance between the images of two `β`-ranges, sampled then refined.
fn interior_margin(surface: &ProductSurface, st: &Stereographic, r1: (f64, f64), r2: (f64, f64)) -> Result<f64> {
    let (nu, nv) = (160, 80);
    let grid = |(lo, hi): (f64, f64)| -> Result<Vec<(P3, f64, f64)>> {
        (0..nu * nv)
            .map(|k| {
                let (a, b) = (TAU * (k / nv) as f64 / nu as f64, lo + (hi - lo) * (k % nv) as f64 / (nv - 1) as f64);
                Ok((st.project(&surface.eval_angle(a, b))?, a, b))
            })
            .collect()
    };
    let (g1, g2) = (grid(r1)?, grid(r2)?);
    let mut pairs: Vec<(f64, usize, usize)> = g1
        .par_iter()
        .enumerate()
        .map(|(i, (p, _, _))| {
            let (j, d) = g2
                .iter()
                .enumerate()
                .map(|(j, (q, _, _))| (j, dist3(p, q)))
                .min_by(|x, y| x.1.total_cmp(&y.1))
                .expect("non-empty");
            (d, i, j)
        })
        .collect();
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));
    let clamp = |x: f64, (lo, hi): (f64, f64)| x.clamp(lo, hi);
    let f = |x: &[f64; 4]| -> f64 {
        match (st.project(&surface.eval_angle(x[0], x[1])), st.project(&surface.eval_angle(x[2], x[3]))) {
            (Ok(p), Ok(q)) => dist3(&p, &q),
            _ => f64::INFINITY,
        }
    };
    let best = pairs
        .iter()
        .take(8)
        .map(|&(d0, i, j)| {
            let mut x = [g1[i].1, g1[i].2, g2[j].1, g2[j].2];
            let mut best = d0;
            let mut h = TAU / nu as f64;
            while h > 1e-12 {
                let mut moved = false;
                for k in 0..4 {
                    for s in [h, -h] {
                        let mut y = x;
                        y[k] += s;
                        y[1] = clamp(y[1], r1);
                        y[3] = clamp(y[3], r2);
                        let d = f(&y);
                        if d < best {
                            (x, best, moved) = (y, d, true);
                        }
                    }
                }
                if !moved {
                    h *= 0.5;
                }
            }
            best
        })
        .fold(f64::INFINITY, f64::min);
    Ok(best)
}

/// Type III certificate: positive separation of `π(V)` from the surface under grid
/// refinement, `π(V)` linked once with the torus core, and a closed mesh of Euler
/// characteristic zero.
pub fn type_iii_certificate(surface: &ProductSurface, projection: &Projection, v: &RationalCircleParam) -> Result<Report> {
    let curve = project_circle(v, projection, 1 << 14)?;
    let margins: Vec<f64> = [64, 128, 256]
        .iter()
        .map(|&n| separation_with(surface, projection, &curve, n))
        .collect::<Result<_>>()?;
    let stable = margins.iter().all(|&m| m > 1e-6)
        && margins.windows(2).all(|w| (w[0] - w[1]).abs() <= 0.5 * w[0].max(w[1]));
    let mut checks = vec![Check::new("separation_margin", stable, &margins)];
    let core = torus_core(surface, projection)?;
    let coarse = project_circle(v, projection, 1024)?;
    let (pass, value) = match linking_number(&coarse, &core) {
        Ok(l) => (l.value.abs() == 1 && l.residue < MAX_LINKING_RESIDUE, serde_json::json!({"linking": l.value, "residue": l.residue})),
        Err(e) => (false, serde_json::json!(e.to_string())),
    };
    checks.push(Check { name: "linked_with_torus".into(), pass, value });
    let mesh = surface.sample_grid(64, 64, projection)?;
    let chi = euler_characteristic(&mesh)?;
    checks.push(Check::new("euler_characteristic", chi == 0, chi));
    Ok(Report { kind: "III".into(), checks })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circles::Preset;
    use crate::mesh::Vertices;
    use crate::product::Side;

    fn circle(center: P3, radius: f64, axis: usize, n: usize) -> PolylineCurve {
        let pts = (0..n)
            .map(|k| {
                let t = TAU * k as f64 / n as f64;
                let (c, s) = (radius * t.cos(), radius * t.sin());
                let mut p = center;
                match axis {
                    2 => {
                        p[0] += c;
                        p[1] += s;
                    }
                    1 => {
                        p[0] += c;
                        p[2] += s;
                    }
                    _ => {
                        p[1] += c;
                        p[2] += s;
                    }
                }
                p
            })
            .collect();
        PolylineCurve::new(pts, true).unwrap()
    }

    fn nf(p: Preset) -> ProductSurface {
        ProductSurface::normal_form(p).unwrap()
    }

    /// Signed crossings of the xy-projections (over minus under convention), halved.
    fn crossing_oracle(c1: &PolylineCurve, c2: &PolylineCurve) -> i64 {
        let mut total = 0i64;
        for (a, b) in c1.segments() {
            for (c, d) in c2.segments() {
                let r = [b[0] - a[0], b[1] - a[1]];
                let s = [d[0] - c[0], d[1] - c[1]];
                let den = r[0] * s[1] - r[1] * s[0];
                if den == 0.0 {
                    continue;
                }
                let qp = [c[0] - a[0], c[1] - a[1]];
                let t = (qp[0] * s[1] - qp[1] * s[0]) / den;
                let u = (qp[0] * r[1] - qp[1] * r[0]) / den;
                if (0.0..1.0).contains(&t) && (0.0..1.0).contains(&u) {
                    let z1 = a[2] + t * (b[2] - a[2]);
                    let z2 = c[2] + u * (d[2] - c[2]);
                    let sign = if den > 0.0 { 1 } else { -1 };
                    total += if z1 > z2 { sign } else { -sign };
                }
            }
        }
        total / 2
    }

    #[test]
    fn unlinked_parallel_circles() {
        let a = circle([0.0; 3], 1.0, 2, 256);
        let b = circle([0.0, 0.0, 3.0], 1.0, 2, 256);
        assert_eq!(linking_number(&a, &b).unwrap().value, 0);
        assert_eq!(crossing_oracle(&a, &b), 0);
    }

    #[test]
    fn hopf_link() {
        let a = circle([0.0; 3], 1.0, 2, 300);
        let b = circle([1.0, 0.0, 0.0], 1.0, 1, 300);
        let l = linking_number(&a, &b).unwrap();
        assert_eq!(l.value.abs(), 1);
        assert!(l.residue < 1e-9);
        assert_eq!(l.value, crossing_oracle(&a, &b));
        assert_eq!(linking_number(&b, &a).unwrap().value, l.value);
        assert_eq!(linking_number(&a.reversed(), &b).unwrap().value, -l.value);
        let touching = circle([1.0, 0.0, 0.0], 1.0, 2, 300);
        assert!(matches!(linking_number(&a, &touching), Err(Error::CurvesTooClose(_))));
    }

    #[test]
    fn hopf_fibers_link() {
        // π(A₀) and π of the great circle through k in the 3–4 plane
        let a0 = RationalCircleParam::preset(Preset::A0);
        let hopf = crate::circles::RationalCircleParam::new(
            [
                crate::poly::BinaryForm::zero(2),
                crate::poly::BinaryForm::zero(2),
                crate::poly::BinaryForm::quadratic(-1, 0, 1),
                crate::poly::BinaryForm::quadratic(0, 2, 0),
            ],
            crate::poly::BinaryForm::quadratic(1, 0, 1),
        )
        .unwrap();
        // the 3–4 great circle passes through the center; move the center off it
        let proj: Projection = "stereo:2/3,1/3,2/3,0".parse().unwrap();
        let c1 = project_circle(&a0, &proj, 512).unwrap();
        let c2 = project_circle(&hopf, &proj, 512).unwrap();
        let l = linking_number(&c1, &c2).unwrap();
        assert_eq!(l.value.abs(), 1);
        assert_eq!(l.value, crossing_oracle(&c1, &c2));
    }

    #[test]
    fn adaptive_linking() {
        let l = linking_number_adaptive(|t| [t.cos(), t.sin(), 0.0], |t| [1.0 + t.cos(), 0.0, t.sin()]).unwrap();
        assert_eq!(l.value.abs(), 1);
    }

    #[test]
    fn distances() {
        let a = circle([0.0; 3], 1.0, 2, 4096);
        let b = circle([0.0, 0.0, 0.5], 1.0, 2, 4096);
        assert!((curve_distance(&a, &b) - 0.5).abs() < 1e-9);
        assert!((hausdorff_distance(&a, &b) - 0.5).abs() < 1e-9);
        assert!(hausdorff_to_circle(&a, [0.0; 3], [0.0, 0.0, 2.0], 1.0) < 1e-6);
        assert!((hausdorff_to_circle(&a, [0.0; 3], [0.0, 0.0, 1.0], 1.1) - 0.1).abs() < 1e-6);
        let index = SegmentIndex::new(&a);
        assert!((index.distance(&[0.0, 0.0, 0.0]) - 1.0).abs() < 1e-6);
        assert!((index.distance(&[10.0, 0.0, 0.0]) - 9.0).abs() < 1e-9);
    }

    #[test]
    fn euler_characteristics() {
        assert_eq!(euler_characteristic(&Mesh::octahedron()).unwrap(), 2);
        let pts: Vec<[f64; 3]> = vec![[0.0; 3]; 100];
        let torus = Mesh::torus_grid(10, 10, Vertices::R3(pts), Vec::new());
        assert_eq!(euler_characteristic(&torus).unwrap(), 0);
        let mut open = Mesh::octahedron();
        open.faces.pop();
        assert_eq!(euler_characteristic(&open), Err(Error::OpenMesh));
    }

    #[test]
    fn ring_torus_mesh_core() {
        let (nu, nv, big_r, r) = (64, 48, 2.0, 0.5);
        let pts: Vec<P3> = (0..nu * nv)
            .map(|k| {
                let (u, v) = (TAU * (k / nv) as f64 / nu as f64, TAU * (k % nv) as f64 / nv as f64);
                let rho = big_r + r * v.cos();
                [rho * u.cos(), rho * u.sin(), r * v.sin()]
            })
            .collect();
        let mesh = Mesh::torus_grid(nu, nv, Vertices::R3(pts), Vec::new());
        let core = mesh_core(&mesh, nu, nv).unwrap();
        assert!(hausdorff_to_circle(&core, [0.0; 3], [0.0, 0.0, 1.0], big_r) < 1e-2);
        assert!(core.points.iter().all(|p| ((p[0].hypot(p[1])) - big_r).abs() < 1e-12 && p[2].abs() < 1e-12));
        let flat = Mesh::torus_grid(8, 8, Vertices::R3(vec![[1.0; 3]; 64]), Vec::new());
        assert!(matches!(mesh_core(&flat, 8, 8), Err(Error::DegenerateFiber(_))));
    }

    #[test]
    fn ring_torus_core_winds_around_axis() {
        let winding = |nu: usize| {
            let opts = CoreOptions { nu, nv: 256 };
            let core = torus_core_range(&nf(Preset::C), &Projection::Stereo, (0.0, TAU), &opts).unwrap();
            let mut turn = 0.0;
            for (a, b) in core.segments() {
                let d = b[1].atan2(b[0]) - a[1].atan2(a[0]);
                turn += (d + PI).rem_euclid(TAU) - PI;
            }
            turn / TAU
        };
        let (w1, w2) = (winding(256), winding(512));
        assert!((w1 - w1.round()).abs() < 1e-9 && w1.round() != 0.0, "{w1}");
        assert_eq!(w1.round(), w2.round());
    }

    #[test]
    fn type_iii_core() {
        let s = nf(Preset::B3);
        let core = torus_core(&s, &Projection::Stereo).unwrap();
        let a0 = project_circle(&RationalCircleParam::preset(Preset::A0), &Projection::Stereo, 2048).unwrap();
        assert!(curve_distance(&core, &a0) > 0.01);
        let l = linking_number(&a0, &core).unwrap();
        assert_eq!(l.value.abs(), 1);
        assert_eq!(l.value, crossing_oracle(&a0, &core));
        let fine = torus_core_range(&s, &Projection::Stereo, (0.0, TAU), &CoreOptions { nu: 256, nv: 512 }).unwrap();
        assert!(hausdorff_distance(&core, &fine) < 1e-3);
    }

    #[test]
    fn separations() {
        let a0 = project_circle(&RationalCircleParam::preset(Preset::A0), &Projection::Stereo, 1 << 14).unwrap();
        let m3 = separation(&nf(Preset::B3), &Projection::Stereo, &a0).unwrap();
        assert!(m3 > 0.01, "{m3}");
        assert!(separation(&nf(Preset::B1), &Projection::Stereo, &a0).unwrap() < 1e-6);
        assert!(separation(&nf(Preset::B2), &Projection::Stereo, &a0).unwrap() < 1e-6);
    }

    #[test]
    fn linking_independent_of_center() {
        let s = nf(Preset::B3);
        let a0 = RationalCircleParam::preset(Preset::A0);
        let mut values = Vec::new();
        for spec in ["stereo:default", "stereo:0,0,3/5,4/5", "stereo:0,0,-3/5,4/5"] {
            let proj: Projection = spec.parse().unwrap();
            let core = torus_core(&s, &proj).unwrap();
            let v = project_circle(&a0, &proj, 2048).unwrap();
            values.push(linking_number(&v, &core).unwrap().value.abs());
        }
        assert_eq!(values, vec![1, 1, 1]);
    }

    #[test]
    fn touching_tori() {
        let report = touching_tori_certificate(&nf(Preset::B1), &Projection::Stereo).unwrap();
        assert!(report.passed(), "{report:?}");
        assert_eq!(report.checks.len(), 4);
        assert!(matches!(touching_tori_certificate(&nf(Preset::B2), &Projection::Stereo), Err(Error::NotApplicable(_))));
        let great = ProductSurface::build(
            RationalCircleParam::preset(Preset::A0),
            RationalCircleParam::preset(Preset::C),
            Side::LeftTimesRight,
        )
        .unwrap();
        assert_eq!(touching_tori_certificate(&great, &Projection::Stereo), Err(Error::CliffordTorus));
    }

    #[test]
    fn type_iii_report() {
        let r = type_iii_certificate(&nf(Preset::B3), &Projection::Stereo, &RationalCircleParam::preset(Preset::A0)).unwrap();
        assert!(r.passed(), "{r:?}");
        let json = serde_json::to_value(&r).unwrap();
        assert_eq!(json["type"], "III");
        assert_eq!(json["checks"].as_array().unwrap().len(), 3);
    }
}
