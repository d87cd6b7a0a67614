//! Shared fixtures for the kernel benchmarks.

use circled_core::topology::{project_circle, torus_core};
use circled_core::{PolylineCurve, Preset, ProductSurface, Projection, Quaternion, RationalCircleParam, Rational};
use num_bigint::BigInt;

/// Normal form `A₀⋆B`.
pub fn surface(b: Preset) -> ProductSurface {
    ProductSurface::normal_form(b).expect("normal forms are valid")
}

/// `n` exact points of `B₁` at parameters `(k : n − k)`.
pub fn rational_points(n: i64) -> Vec<Quaternion<Rational>> {
    let b1 = RationalCircleParam::preset(Preset::B1);
    (0..n).map(|k| b1.eval_rational(&BigInt::from(k), &BigInt::from(n - k))).collect()
}

/// `π(A₀)` and the core of the type III torus, a linked pair.
pub fn linked_pair(samples: usize) -> (PolylineCurve, PolylineCurve) {
    let a0 = RationalCircleParam::preset(Preset::A0);
    let circle = project_circle(&a0, &Projection::Stereo, samples).expect("A0 avoids the pole");
    let core = torus_core(&surface(Preset::B3), &Projection::Stereo).expect("fibers are round");
    (circle, core)
}
