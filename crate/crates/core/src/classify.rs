//! Great types I/II/III of a product of a great and a small circle, read off from
//! the number of real points the small circle shares with the double circle.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::circles::{meet_great_circle, RationalCircleParam};
use crate::error::{Error, Result};
use crate::quat::UnitQuaternion;
use crate::scalar::format_rational;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum GreatType {
    I,
    II,
    III,
}

impl GreatType {
    /// `q = 2, 1, 0` common points give types I, II, III.
    pub fn from_q(q: usize) -> Result<Self> {
        match q {
            2 => Ok(GreatType::I),
            1 => Ok(GreatType::II),
            0 => Ok(GreatType::III),
            _ => Err(Error::Degenerate(format!("{q} common points"))),
        }
    }
}

impl fmt::Display for GreatType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GreatType::I => "I",
            GreatType::II => "II",
            GreatType::III => "III",
        })
    }
}

impl FromStr for GreatType {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "I" => Ok(GreatType::I),
            "II" => Ok(GreatType::II),
            "III" => Ok(GreatType::III),
            _ => Err(Error::Parse(format!("unknown type `{s}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Classification {
    #[serde(rename = "type")]
    pub kind: GreatType,
    pub q: usize,
    pub tangent: bool,
    /// `a⁻¹` for the point `a` of the great circle used to move it through 1, as
    /// `"p/q"` coordinates; `None` when the great circle already passes through 1.
    pub reduction: Option<[String; 4]>,
}

/// Classifies `A⋆B` for a great circle `A` and a small circle `B`.
///
/// With `a ∈ A`, `A⋆B = a·(a⁻¹A ⋆ B)` and `a⁻¹A` is a great circle through 1 that does
/// not depend on the choice of `a`; the type is given by `q = |B ∩ a⁻¹A|`.
pub fn classify(great: &RationalCircleParam, small: &RationalCircleParam) -> Result<Classification> {
    let (g, s) = (great.plane_form()?, small.plane_form()?);
    match (g.is_great(), s.is_great()) {
        (true, true) => return Err(Error::CliffordTorus),
        (false, false) => return Err(Error::BothSmall),
        (false, true) => return Err(Error::NotGreat),
        (true, false) => {}
    }
    let one = [BigInt::one(), BigInt::zero(), BigInt::zero(), BigInt::zero()];
    let through_one = g.contains(&one.map(crate::scalar::Rational::from_integer));
    let (normal, reduction) = if through_one {
        (g, None)
    } else {
        let a = UnitQuaternion::new(great.eval_rational(&BigInt::zero(), &BigInt::one()))?;
        let inv = a.inverse();
        let moved = great.translate_left(&inv).plane_form()?;
        (moved, Some(inv.to_array().map(|x| format_rational(&x))))
    };
    let meet = meet_great_circle(small, &normal).map_err(|e| match e {
        Error::NotTransversal => Error::Degenerate("small circle lies in the plane of the great circle".into()),
        e => e,
    })?;
    let kind = GreatType::from_q(meet.q)?;
    if kind == GreatType::II && !meet.tangent {
        return Err(Error::Degenerate("single transversal common point".into()));
    }
    Ok(Classification { kind, q: meet.q, tangent: meet.tangent, reduction })
}
