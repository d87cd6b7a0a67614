//! The full verification battery: exact identities, degree certificates, singular
//! loci, section factorizations, lattice bookkeeping, Möbius properties and the
//! numerical topology certificates, collected into one machine-readable report.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::circles::{meet_great_circle, Preset, RationalCircleParam};
use crate::classify::{classify, GreatType};
use crate::error::{Error, Result};
use crate::implicit::{certify_degree, gradient_vanishes_on, ImplicitPoly, DEFAULT_SEED};
use crate::lattice::{arithmetic_genus, delta_p3, delta_s3, p3_chain, s3_chain, DivisorClass};
use crate::moebius::{
    circle_fit_residual, generator_line, left_translation, random_unit_quaternion, right_translation, Family, Projection,
    LEFT_FIXED_BY_LEFT_TRANSLATIONS,
};
use crate::poly::BinaryForm;
use crate::product::{ComponentKind, ProductSurface, Side};
use crate::quat::{hamilton_product, Quaternion};
use crate::scalar::{int, rat, GaussianRational};
use crate::topology::{hausdorff_to_circle, touching_tori_certificate, type_iii_certificate};

/// Check groups that can be skipped.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Group {
    /// Exact rational arithmetic.
    Exact,
    /// Floating-point certificates.
    Float,
}

impl FromStr for Group {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(Group::Exact),
            "float" => Ok(Group::Float),
            _ => Err(Error::Parse(format!("unknown check group `{s}` (expected exact or float)"))),
        }
    }
}

impl fmt::Display for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Group::Exact => "exact",
            Group::Float => "float",
        })
    }
}

/// Deliberate corruption, for exercising failure reporting.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Fault {
    /// Adds 1 to the `w²` coefficient of the first numerator of a preset.
    CorruptPreset(Preset),
}

#[derive(Clone, Debug, PartialEq)]
pub struct VerifyOptions {
    pub skip: BTreeSet<Group>,
    pub seed: u64,
    pub fault: Option<Fault>,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self { skip: BTreeSet::new(), seed: DEFAULT_SEED, fault: None }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerifyCheck {
    pub criterion: u8,
    pub module: &'static str,
    pub op: &'static str,
    pub name: String,
    pub group: Group,
    pub pass: bool,
    pub value: Value,
    pub seconds: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerifyReport {
    #[serde(rename = "type")]
    pub kind: &'static str,
    /// Some group was skipped.
    pub partial: bool,
    pub skipped: Vec<Group>,
    pub checks: Vec<VerifyCheck>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &VerifyCheck> {
        self.checks.iter().filter(|c| !c.pass)
    }
}

struct Battery<'a> {
    opts: &'a VerifyOptions,
    checks: Vec<VerifyCheck>,
}

impl Battery<'_> {
    /// Runs `f` unless its group is skipped; errors become failed checks.
    fn run<F>(&mut self, criterion: u8, module: &'static str, op: &'static str, name: impl Into<String>, group: Group, f: F)
    where
        F: FnOnce() -> Result<(bool, Value)>,
    {
        if self.opts.skip.contains(&group) {
            return;
        }
        let start = Instant::now();
        let (pass, value) = f().unwrap_or_else(|e| (false, json!({ "error": e.to_string() })));
        self.checks.push(VerifyCheck {
            criterion,
            module,
            op,
            name: name.into(),
            group,
            pass,
            value,
            seconds: start.elapsed().as_secs_f64(),
        });
    }

    fn preset(&self, p: Preset) -> RationalCircleParam {
        let mut c = RationalCircleParam::preset(p);
        if self.opts.fault == Some(Fault::CorruptPreset(p)) {
            let mut num = c.num.clone().into_array();
            num[0] = num[0].clone() + BinaryForm::quadratic(0, 0, 1);
            c.num = Quaternion::from_array(num);
        }
        c
    }

    fn surface(&self, b: Preset) -> Result<ProductSurface> {
        ProductSurface::build(self.preset(Preset::A0), self.preset(b), Side::LeftTimesRight)
    }
}

const SMALLS: [Preset; 3] = [Preset::B1, Preset::B2, Preset::B3];

/// Runs every check not excluded by `opts.skip`.
pub fn run(opts: &VerifyOptions) -> VerifyReport {
    let mut b = Battery { opts, checks: Vec::new() };
    on_sphere(&mut b);
    intersections(&mut b);
    let polys = degrees(&mut b);
    singular_locus(&mut b, &polys);
    sections(&mut b);
    lattice(&mut b);
    type_iii(&mut b);
    type_i(&mut b);
    moebius(&mut b);
    double_curve(&mut b);
    VerifyReport {
        kind: "verify",
        partial: !opts.skip.is_empty(),
        skipped: opts.skip.iter().copied().collect(),
        checks: b.checks,
    }
}

fn on_sphere(b: &mut Battery) {
    for p in [Preset::A0, Preset::B1, Preset::B2, Preset::B3] {
        let c = b.preset(p);
        b.run(1, "circles", "on_sphere_certificate", format!("on_sphere[{p}]"), Group::Exact, || {
            Ok((c.on_sphere_certificate(), json!(true)))
        });
    }
    for p in SMALLS {
        let s = b.surface(p);
        b.run(1, "product_surface", "on_sphere_certificate", format!("on_sphere[A0*{p}]"), Group::Exact, || {
            Ok((s?.on_sphere_certificate(), json!(true)))
        });
    }
}

fn intersections(b: &mut Battery) {
    let expected = [(Preset::B1, 2, false, GreatType::I), (Preset::B2, 1, true, GreatType::II), (Preset::B3, 0, false, GreatType::III)];
    for (p, q, tangent, kind) in expected {
        let (a0, small) = (b.preset(Preset::A0), b.preset(p));
        b.run(2, "circles", "meet_great_circle", format!("meet[{p},A0]"), Group::Exact, || {
            let m = meet_great_circle(&small, &a0.plane_form()?)?;
            Ok((m.q == q && m.tangent == tangent, json!({ "q": m.q, "tangent": m.tangent })))
        });
        b.run(2, "cli", "classify", format!("classify[A0,{p}]"), Group::Exact, || {
            let c = classify(&a0, &small)?;
            Ok((c.kind == kind, json!(c.kind.to_string())))
        });
    }
}

/// Certified polynomials keyed by surface name, for the singular-locus checks.
struct Certified {
    octics: Vec<(Preset, ImplicitPoly)>,
    quartics: Vec<(Preset, ImplicitPoly)>,
}

fn degrees(b: &mut Battery) -> Certified {
    let mut out = Certified { octics: Vec::new(), quartics: Vec::new() };
    let seed = b.opts.seed;
    for p in SMALLS {
        let s = b.surface(p);
        let mut poly = None;
        b.run(3, "implicit", "certify_degree", format!("degree[stereo,A0*{p}]"), Group::Exact, || {
            let c = certify_degree(&s?, &Projection::Stereo, 8, seed)?;
            let below = c.kernel_dims.iter().find(|d| d.0 == 7).map(|d| d.1);
            let pass = c.degree == 8 && c.kernel_dim == 1 && below == Some(0);
            let value = json!({ "degree": c.degree, "kernel_dim": c.kernel_dim, "kernel_dims": c.kernel_dims, "terms": c.poly.terms() });
            poly = Some(c.poly);
            Ok((pass, value))
        });
        out.octics.extend(poly.map(|q| (p, q)));
    }
    let clifford = ProductSurface::build(b.preset(Preset::A0), b.preset(Preset::C), Side::LeftTimesRight);
    b.run(3, "implicit", "certify_degree", "degree[stereo,A0*C]", Group::Exact, || {
        let c = certify_degree(&clifford?, &Projection::Stereo, 5, seed)?;
        Ok((c.degree == 4 && c.kernel_dim == 1, json!({ "degree": c.degree, "kernel_dim": c.kernel_dim })))
    });
    for p in SMALLS {
        let s = b.surface(p);
        let mut poly = None;
        b.run(3, "implicit", "certify_degree", format!("degree[central,A0*{p}]"), Group::Exact, || {
            let c = certify_degree(&s?, &Projection::Central, 5, seed)?;
            let value = json!({ "degree": c.degree, "kernel_dim": c.kernel_dim, "terms": c.poly.terms() });
            let pass = c.degree == 4 && c.kernel_dim == 1;
            poly = Some(c.poly);
            Ok((pass, value))
        });
        out.quartics.extend(poly.map(|q| (p, q)));
    }
    out
}

fn singular_locus(b: &mut Battery, polys: &Certified) {
    let a0 = b.preset(Preset::A0);
    for (p, poly) in &polys.octics {
        b.run(4, "implicit", "gradient_vanishes_on", format!("double_circle[stereo,A0*{p}]"), Group::Exact, || {
            let ok = gradient_vanishes_on(poly, &a0, &Projection::Stereo, 20)?;
            Ok((ok, json!({ "points": 20 })))
        });
    }
    for (p, poly) in &polys.quartics {
        b.run(4, "implicit", "gradient_vanishes_on", format!("double_line[central,A0*{p}]"), Group::Exact, || {
            let ok = gradient_vanishes_on(poly, &a0, &Projection::Central, 20)?;
            Ok((ok, json!({ "points": 20 })))
        });
    }
}

fn sections(b: &mut Battery) {
    for (p, q, mult) in [(Preset::B1, 2, 2), (Preset::B2, 1, 2), (Preset::B3, 0, 0)] {
        let s = b.surface(p);
        b.run(5, "product_surface", "hyperplane_section", format!("x4_section[A0*{p}]"), Group::Exact, || {
            let s = s?;
            let sec = s.hyperplane_section(&[int(0), int(0), int(0), int(1)], &int(0))?;
            let f = sec.factors.as_ref().ok_or_else(|| Error::Numerical("section does not separate".into()))?;
            // left factor must be the cos-numerator w² − v², with roots (±1 : 1)
            let cos_factor = f.left.primitive() == BinaryForm::quadratic(-1, 0, 1).primitive();
            let exact: Vec<(BigInt, BigInt)> = f.left_roots.iter().filter_map(|r| r.exact.clone()).collect();
            let antipodal = exact.len() == 2 && {
                let (c1, c2) = (s.left_fiber((&exact[0].0, &exact[0].1)), s.left_fiber((&exact[1].0, &exact[1].1)));
                (-3i64..=3).all(|v| {
                    let (v, w) = (BigInt::from(v), BigInt::from(2));
                    c1.eval_rational(&v, &w) == -c2.eval_rational(&v, &w)
                })
            };
            let v_mult: usize =
                sec.components.iter().filter(|c| c.kind == ComponentKind::RightFixed).map(|c| c.multiplicity).sum();
            let pass = cos_factor && antipodal && f.right_roots.len() == q && v_mult == mult;
            Ok((pass, json!({ "left_roots": exact.len(), "antipodal": antipodal, "q": f.right_roots.len(), "v_multiplicity": v_mult })))
        });
    }
}

fn lattice(b: &mut Battery) {
    b.run(6, "ns_lattice", "delta_S3", "delta_S3(8,-8)", Group::Exact, || Ok((delta_s3(8, -8) == rat(8, 1), json!(delta_s3(8, -8).to_string()))));
    b.run(6, "ns_lattice", "delta_P3", "delta_P3(4,-6)", Group::Exact, || Ok((delta_p3(4, -6) == rat(3, 1), json!(delta_p3(4, -6).to_string()))));
    b.run(6, "ns_lattice", "arithmetic_genus", "sectional_genus(h,-h)", Group::Exact, || {
        let h = DivisorClass::hyperplane();
        let g = arithmetic_genus(h, -h)?;
        Ok((g == 1, json!(g)))
    });
    for chain in [s3_chain(), p3_chain()] {
        b.run(6, "ns_lattice", "delta_chain", format!("delta_chain[{}]", chain.name), Group::Exact, || {
            Ok((chain.balances(), json!(chain.equation())))
        });
    }
}

fn type_iii(b: &mut Battery) {
    let s = b.surface(Preset::B3);
    let a0 = b.preset(Preset::A0);
    b.run(7, "topology", "type_iii_certificate", "type_iii[A0*B3]", Group::Float, || {
        let r = type_iii_certificate(&s?, &Projection::Stereo, &a0)?;
        Ok((r.passed(), serde_json::to_value(&r).expect("report serializes")))
    });
}

fn type_i(b: &mut Battery) {
    let s = b.surface(Preset::B1);
    b.run(8, "topology", "touching_tori_certificate", "type_i[A0*B1]", Group::Float, || {
        let r = touching_tori_certificate(&s?, &Projection::Stereo)?;
        Ok((r.passed(), serde_json::to_value(&r).expect("report serializes")))
    });
}

fn gaussian(rng: &mut ChaCha8Rng) -> GaussianRational {
    GaussianRational::new(rat(rng.random_range(-20..20), rng.random_range(1..9)), rat(rng.random_range(-20..20), rng.random_range(1..9)))
}

fn moebius(b: &mut Battery) {
    let seed = b.opts.seed;
    b.run(9, "quat_kernel", "isoclinic", "isoclinic_law[100]", Group::Exact, || {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ok = (0..100).all(|_| {
            let a = random_unit_quaternion(&mut rng, 20);
            let x = random_unit_quaternion(&mut rng, 20);
            x.dot(&hamilton_product(&a, &x)) == *a.re()
        });
        Ok((ok, json!({ "samples": 100 })))
    });
    b.run(9, "moebius", "generator_families", "ruling_families[20+20]", Group::Exact, || {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 1);
        let mut ok = true;
        for _ in 0..20 {
            let a = random_unit_quaternion(&mut rng, 15);
            for (map, is_left) in [(left_translation(&a), true), (right_translation(&a), false)] {
                for family in [Family::Left, Family::Right] {
                    let line = generator_line(family, &gaussian(&mut rng));
                    let image = line.map(&map)?;
                    ok &= image.family == family;
                    let fixed = if LEFT_FIXED_BY_LEFT_TRANSLATIONS { is_left } else { !is_left };
                    if (family == Family::Left) == fixed {
                        ok &= image.mu == line.classify()?.mu;
                    }
                }
            }
        }
        Ok((ok, json!({ "left": 20, "right": 20 })))
    });
    b.run(9, "moebius", "stereographic", "circle_fit_residual", Group::Float, || {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 2);
        let mut worst = 0.0f64;
        for _ in 0..20 {
            let a = random_unit_quaternion(&mut rng, 9);
            for p in SMALLS {
                let c = RationalCircleParam::preset(p).translate_left(&a);
                let st = Projection::Stereo.stereographic().expect("stereographic");
                let pts: Vec<[f64; 3]> = (0..24).filter_map(|k| st.project(&c.eval_angle(k as f64 * 0.26)).ok()).collect();
                worst = worst.max(circle_fit_residual(&pts));
            }
        }
        Ok((worst < 1e-10, json!(worst)))
    });
}

fn double_curve(b: &mut Battery) {
    let s = b.surface(Preset::B1);
    b.run(10, "product_surface", "double_curve", "double_curve[A0*B1]", Group::Float, || {
        let curves = s?.double_curve(&Projection::Stereo)?;
        let d = curves.iter().map(|c| hausdorff_to_circle(c, [0.0; 3], [0.0, 0.0, 1.0], 1.0)).fold(0.0, f64::max);
        let pass = curves.len() == 1 && d < 1e-6;
        Ok((pass, json!({ "curves": curves.len(), "hausdorff": d })))
    });
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_only_run() {
        let opts = VerifyOptions { skip: [Group::Exact].into(), ..Default::default() };
        let r = run(&opts);
        assert!(r.partial);
        assert!(r.checks.iter().all(|c| c.group == Group::Float));
        assert!(r.passed(), "{:?}", r.failures().collect::<Vec<_>>());
        let names: Vec<&str> = r.checks.iter().map(|c| c.name.as_str()).collect();
        assert_eq!(names, ["type_iii[A0*B3]", "type_i[A0*B1]", "circle_fit_residual", "double_curve[A0*B1]"]);
    }

    #[test]
    fn corrupted_preset_is_reported() {
        let opts = VerifyOptions { skip: [Group::Float].into(), fault: Some(Fault::CorruptPreset(Preset::B2)), ..Default::default() };
        let mut b = Battery { opts: &opts, checks: Vec::new() };
        on_sphere(&mut b);
        let bad: Vec<&VerifyCheck> = b.checks.iter().filter(|c| !c.pass).collect();
        assert_eq!(bad.len(), 2, "{bad:?}");
        assert_eq!((bad[0].module, bad[0].op, bad[0].name.as_str()), ("circles", "on_sphere_certificate", "on_sphere[B2]"));
        assert_eq!(bad[1].name, "on_sphere[A0*B2]");
    }

    #[test]
    fn group_names() {
        assert_eq!("exact".parse::<Group>().unwrap(), Group::Exact);
        assert!("fast".parse::<Group>().is_err());
        assert_eq!(Group::Float.to_string(), "float");
    }
}
