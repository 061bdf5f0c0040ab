//! Exact invariants of Seifert fibrations and closed 2-orbifolds.
//!
//! Everything here is rational arithmetic on arbitrary-precision integers.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::InvariantError;
use crate::report::CheckReport;

/// A reduced fraction with positive denominator.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RationalQ(BigRational);

impl RationalQ {
    /// `num/den`, or `None` for a zero denominator.
    pub fn new(num: i64, den: i64) -> Option<RationalQ> {
        if den == 0 {
            return None;
        }
        Some(RationalQ(BigRational::new(num.into(), den.into())))
    }

    pub fn from_big(num: BigInt, den: BigInt) -> Option<RationalQ> {
        if den.is_zero() {
            return None;
        }
        Some(RationalQ(BigRational::new(num, den)))
    }

    pub fn integer(n: i64) -> RationalQ {
        RationalQ(BigRational::from_integer(n.into()))
    }

    pub fn zero() -> RationalQ {
        RationalQ(BigRational::zero())
    }

    pub fn one() -> RationalQ {
        RationalQ(BigRational::one())
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    pub fn abs(&self) -> RationalQ {
        RationalQ(self.0.abs())
    }

    pub fn recip(&self) -> Option<RationalQ> {
        if self.0.is_zero() {
            None
        } else {
            Some(RationalQ(self.0.recip()))
        }
    }

    /// Nearest double (correctly rounded up to the last bit for moderate sizes).
    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    pub fn as_big(&self) -> &BigRational {
        &self.0
    }
}

impl fmt::Display for RationalQ {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_integer() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl std::str::FromStr for RationalQ {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (n, d) = match s.split_once('/') {
            Some((n, d)) => (n.trim(), d.trim()),
            None => (s.trim(), "1"),
        };
        let num: BigInt = n.parse().map_err(|_| format!("bad numerator in {s:?}"))?;
        let den: BigInt = d.parse().map_err(|_| format!("bad denominator in {s:?}"))?;
        RationalQ::from_big(num, den).ok_or_else(|| format!("zero denominator in {s:?}"))
    }
}

macro_rules! rational_op {
    ($tr:ident, $m:ident) => {
        impl $tr for RationalQ {
            type Output = RationalQ;
            fn $m(self, rhs: RationalQ) -> RationalQ {
                RationalQ(self.0.$m(rhs.0))
            }
        }
        impl $tr<&RationalQ> for &RationalQ {
            type Output = RationalQ;
            fn $m(self, rhs: &RationalQ) -> RationalQ {
                RationalQ((&self.0).$m(&rhs.0))
            }
        }
    };
}
rational_op!(Add, add);
rational_op!(Sub, sub);
rational_op!(Mul, mul);

impl Neg for RationalQ {
    type Output = RationalQ;
    fn neg(self) -> RationalQ {
        RationalQ(-self.0)
    }
}

impl std::iter::Sum for RationalQ {
    fn sum<I: Iterator<Item = RationalQ>>(iter: I) -> RationalQ {
        iter.fold(RationalQ::zero(), |a, b| a + b)
    }
}

#[derive(Serialize, Deserialize)]
struct RationalWire {
    num: String,
    den: String,
}

impl Serialize for RationalQ {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        RationalWire {
            num: self.0.numer().to_string(),
            den: self.0.denom().to_string(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for RationalQ {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let w = RationalWire::deserialize(d)?;
        let num: BigInt = w.num.parse().map_err(serde::de::Error::custom)?;
        let den: BigInt = w.den.parse().map_err(serde::de::Error::custom)?;
        RationalQ::from_big(num, den).ok_or_else(|| serde::de::Error::custom("zero denominator"))
    }
}

/// Unnormalized Seifert invariants `(g; (α₁, β₁), …, (αₙ, βₙ))`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "SeifertWire", into = "SeifertWire")]
pub struct SeifertData {
    genus: i64,
    pairs: Vec<(i64, i64)>,
}

#[derive(Serialize, Deserialize)]
struct SeifertWire {
    genus: i64,
    pairs: Vec<[i64; 2]>,
}

impl TryFrom<SeifertWire> for SeifertData {
    type Error = InvariantError;
    fn try_from(w: SeifertWire) -> Result<Self, Self::Error> {
        SeifertData::new(w.genus, w.pairs.into_iter().map(|[a, b]| (a, b)).collect())
    }
}

impl From<SeifertData> for SeifertWire {
    fn from(s: SeifertData) -> Self {
        SeifertWire {
            genus: s.genus,
            pairs: s.pairs.into_iter().map(|(a, b)| [a, b]).collect(),
        }
    }
}

impl SeifertData {
    pub fn new(genus: i64, pairs: Vec<(i64, i64)>) -> Result<SeifertData, InvariantError> {
        if genus < 0 {
            return Err(InvariantError::NegativeGenus(genus));
        }
        for &(alpha, beta) in &pairs {
            if alpha == 0 {
                return Err(InvariantError::ZeroMultiplicity);
            }
            if alpha.gcd(&beta) != 1 {
                return Err(InvariantError::NotCoprime { alpha, beta });
            }
        }
        Ok(SeifertData { genus, pairs })
    }

    pub fn genus(&self) -> i64 {
        self.genus
    }

    pub fn pairs(&self) -> &[(i64, i64)] {
        &self.pairs
    }
}

/// A closed orientable 2-orbifold: genus and cone orders.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "OrbifoldWire", into = "OrbifoldWire")]
pub struct Orbifold2D {
    genus: i64,
    cones: Vec<i64>,
}

#[derive(Serialize, Deserialize)]
struct OrbifoldWire {
    genus: i64,
    cones: Vec<i64>,
}

impl TryFrom<OrbifoldWire> for Orbifold2D {
    type Error = InvariantError;
    fn try_from(w: OrbifoldWire) -> Result<Self, Self::Error> {
        Orbifold2D::new(w.genus, w.cones)
    }
}

impl From<Orbifold2D> for OrbifoldWire {
    fn from(o: Orbifold2D) -> Self {
        OrbifoldWire {
            genus: o.genus,
            cones: o.cones,
        }
    }
}

impl Orbifold2D {
    pub fn new(genus: i64, cones: Vec<i64>) -> Result<Orbifold2D, InvariantError> {
        if genus < 0 {
            return Err(InvariantError::NegativeGenus(genus));
        }
        if let Some(&bad) = cones.iter().find(|&&a| a < 2) {
            return Err(InvariantError::InvalidConeOrder(bad));
        }
        Ok(Orbifold2D { genus, cones })
    }

    pub fn genus(&self) -> i64 {
        self.genus
    }

    pub fn cones(&self) -> &[i64] {
        &self.cones
    }
}

/// Where a zero of a vector field on an orbifold sits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Site {
    Smooth,
    Cone(i64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ZeroDatum {
    pub site: Site,
    pub k: i64,
}

impl ZeroDatum {
    pub fn smooth(k: i64) -> ZeroDatum {
        ZeroDatum { site: Site::Smooth, k }
    }

    pub fn cone(order: i64, k: i64) -> Result<ZeroDatum, InvariantError> {
        if order < 2 {
            return Err(InvariantError::InvalidConeOrder(order));
        }
        Ok(ZeroDatum {
            site: Site::Cone(order),
            k,
        })
    }

    fn order(&self) -> i64 {
        match self.site {
            Site::Smooth => 1,
            Site::Cone(a) => a,
        }
    }
}

/// `e = −Σ βᵢ/αᵢ`.
pub fn euler_number(s: &SeifertData) -> RationalQ {
    -s.pairs
        .iter()
        .map(|&(a, b)| RationalQ::new(b, a).expect("alpha is nonzero"))
        .sum::<RationalQ>()
}

/// Volume of the fibre-period-one field: `−e`.
pub fn vol_from_seifert(s: &SeifertData) -> RationalQ {
    -euler_number(s)
}

/// `m = lcm |αᵢ|` and the integer `m · vol`.
pub fn integrality_certificate(s: &SeifertData) -> Result<(BigInt, RationalQ), InvariantError> {
    let m = s
        .pairs
        .iter()
        .fold(BigInt::one(), |m, &(a, _)| m.lcm(&BigInt::from(a.unsigned_abs())));
    let product = RationalQ(BigRational::from_integer(m.clone())) * vol_from_seifert(s);
    if !product.is_integer() {
        return Err(InvariantError::Integrality(format!("{m} * vol = {product}")));
    }
    Ok((m, product))
}

/// `χ_orb = 2 − 2g − n + Σ 1/αᵢ`.
pub fn chi_orb(o: &Orbifold2D) -> RationalQ {
    let n = o.cones.len() as i64;
    RationalQ::integer(2 - 2 * o.genus - n)
        + o.cones
            .iter()
            .map(|&a| RationalQ::new(1, a).expect("cone order is at least 2"))
            .sum::<RationalQ>()
}

/// Seifert invariants of the unit tangent bundle: `(g; (1, 2g−2), (αᵢ, αᵢ−1))`.
pub fn stb_invariants(o: &Orbifold2D) -> SeifertData {
    let mut pairs = vec![(1, 2 * o.genus - 2)];
    pairs.extend(o.cones.iter().map(|&a| (a, a - 1)));
    SeifertData::new(o.genus, pairs).expect("(a, a-1) is always coprime")
}

/// Index `1/α − k` of a zero at a point of order `α` (`α = 1` is smooth).
pub fn orbifold_index(alpha: i64, k: i64) -> Result<RationalQ, InvariantError> {
    if alpha < 1 {
        return Err(InvariantError::InvalidIndexOrder(alpha));
    }
    Ok(RationalQ::new(1, alpha).expect("alpha >= 1") - RationalQ::integer(k))
}

/// Compares the index sum over `zeros` with `χ_orb(o)`. Every cone point must
/// appear exactly once as a zero of matching order.
pub fn poincare_hopf_check(o: &Orbifold2D, zeros: &[ZeroDatum]) -> Result<CheckReport, InvariantError> {
    let mut remaining: Vec<i64> = o.cones.clone();
    for z in zeros {
        if let Site::Cone(a) = z.site {
            match remaining.iter().position(|&c| c == a) {
                Some(i) => {
                    remaining.swap_remove(i);
                }
                None => return Err(InvariantError::UnknownConeZero(a)),
            }
        }
    }
    if let Some(&a) = remaining.first() {
        return Err(InvariantError::MissingConeZero(a));
    }
    let sum = zeros
        .iter()
        .map(|z| orbifold_index(z.order(), z.k))
        .collect::<Result<Vec<_>, _>>()?
        .into_iter()
        .sum::<RationalQ>();
    let chi = chi_orb(o);
    let terms: Vec<String> = zeros
        .iter()
        .map(|z| format!("ind(order {}, k {}) = {}", z.order(), z.k, orbifold_index(z.order(), z.k).expect("checked")))
        .collect();
    Ok(CheckReport::exact(
        "poincare_hopf",
        sum,
        chi,
        format!("genus {}, cones {:?}; {}", o.genus, o.cones, terms.join(", ")),
    ))
}

/// `α β′ − α′ β = 1`.
pub fn gluing_check(alpha: i64, beta: i64, alpha_p: i64, beta_p: i64) -> bool {
    (alpha as i128) * (beta_p as i128) - (alpha_p as i128) * (beta as i128) == 1
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> RationalQ {
        RationalQ::new(n, d).unwrap()
    }

    #[test]
    fn euler_numbers() {
        let hopf = SeifertData::new(0, vec![(1, 1)]).unwrap();
        assert_eq!(euler_number(&hopf), q(-1, 1));
        assert_eq!(vol_from_seifert(&hopf), q(1, 1));
        assert_eq!(euler_number(&SeifertData::new(4, vec![]).unwrap()), RationalQ::zero());
        let s = SeifertData::new(0, vec![(2, 1), (3, 1), (5, 1)]).unwrap();
        assert_eq!(euler_number(&s), q(-31, 30));
        assert_eq!(vol_from_seifert(&s), q(31, 30));
        assert_eq!(euler_number(&s).to_string(), "-31/30");
    }

    #[test]
    fn integrality_examples() {
        let s = SeifertData::new(0, vec![(2, 1), (3, 1), (5, 1)]).unwrap();
        assert_eq!(integrality_certificate(&s).unwrap(), (BigInt::from(30), q(31, 1)));
        let hopf = SeifertData::new(0, vec![(1, 1)]).unwrap();
        assert_eq!(integrality_certificate(&hopf).unwrap(), (BigInt::from(1), q(1, 1)));
        let empty = SeifertData::new(0, vec![]).unwrap();
        assert_eq!(integrality_certificate(&empty).unwrap(), (BigInt::from(1), RationalQ::zero()));
    }

    #[test]
    fn construction_errors() {
        assert_eq!(SeifertData::new(0, vec![(4, 2)]), Err(InvariantError::NotCoprime { alpha: 4, beta: 2 }));
        assert_eq!(SeifertData::new(0, vec![(0, 1)]), Err(InvariantError::ZeroMultiplicity));
        assert_eq!(Orbifold2D::new(0, vec![1]), Err(InvariantError::InvalidConeOrder(1)));
        assert_eq!(Orbifold2D::new(-1, vec![]), Err(InvariantError::NegativeGenus(-1)));
        assert_eq!(orbifold_index(0, 0), Err(InvariantError::InvalidIndexOrder(0)));
    }

    #[test]
    fn orbifold_characteristics() {
        assert_eq!(chi_orb(&Orbifold2D::new(0, vec![]).unwrap()), q(2, 1));
        assert_eq!(chi_orb(&Orbifold2D::new(0, vec![2, 3, 5]).unwrap()), q(1, 30));
        assert_eq!(chi_orb(&Orbifold2D::new(1, vec![]).unwrap()), RationalQ::zero());
    }

    #[test]
    fn unit_tangent_bundles() {
        assert_eq!(stb_invariants(&Orbifold2D::new(0, vec![]).unwrap()).pairs(), &[(1, -2)]);
        assert_eq!(
            stb_invariants(&Orbifold2D::new(0, vec![2, 3]).unwrap()).pairs(),
            &[(1, -2), (2, 1), (3, 2)]
        );
        let g2 = stb_invariants(&Orbifold2D::new(2, vec![]).unwrap());
        assert_eq!((g2.genus(), g2.pairs()), (2, &[(1, 2)][..]));
    }

    #[test]
    fn indices() {
        assert_eq!(orbifold_index(1, 0).unwrap(), q(1, 1));
        assert_eq!(orbifold_index(3, 0).unwrap(), q(1, 3));
        assert_eq!(orbifold_index(2, 1).unwrap(), q(-1, 2));
    }

    #[test]
    fn poincare_hopf_examples() {
        let sphere = Orbifold2D::new(0, vec![]).unwrap();
        assert!(poincare_hopf_check(&sphere, &[ZeroDatum::smooth(0), ZeroDatum::smooth(0)]).unwrap().passed);
        let spindle = Orbifold2D::new(0, vec![2, 3]).unwrap();
        let zeros = [ZeroDatum::cone(2, 0).unwrap(), ZeroDatum::cone(3, 0).unwrap()];
        let r = poincare_hopf_check(&spindle, &zeros).unwrap();
        assert!(r.passed);
        assert_eq!(r.tolerance, 0.0);
        assert!(poincare_hopf_check(&Orbifold2D::new(1, vec![]).unwrap(), &[]).unwrap().passed);
        assert!(!poincare_hopf_check(&sphere, &[ZeroDatum::smooth(0)]).unwrap().passed);
        assert_eq!(
            poincare_hopf_check(&spindle, &zeros[..1]),
            Err(InvariantError::MissingConeZero(3))
        );
        assert_eq!(
            poincare_hopf_check(&sphere, &[ZeroDatum::cone(5, 0).unwrap()]),
            Err(InvariantError::UnknownConeZero(5))
        );
    }

    #[test]
    fn gluing_determinant() {
        assert!(gluing_check(1, 0, 0, 1));
        for a in 1..20 {
            assert!(gluing_check(a, a - 1, 1, 1));
        }
        assert!(gluing_check(2, 1, 1, 1));
        assert!(!gluing_check(2, 1, 1, 0));
    }

    #[test]
    fn json_round_trip() {
        let s: SeifertData = serde_json::from_str(r#"{"genus":0,"pairs":[[1,1]]}"#).unwrap();
        assert_eq!(s.pairs(), &[(1, 1)]);
        assert!(serde_json::from_str::<SeifertData>(r#"{"genus":0,"pairs":[[4,2]]}"#).is_err());
        let o: Orbifold2D = serde_json::from_str(r#"{"genus":0,"cones":[2,3,5]}"#).unwrap();
        assert_eq!(serde_json::to_string(&o).unwrap(), r#"{"genus":0,"cones":[2,3,5]}"#);
        let r = q(-31, 30);
        let j = serde_json::to_string(&r).unwrap();
        assert_eq!(j, r#"{"num":"-31","den":"30"}"#);
        assert_eq!(serde_json::from_str::<RationalQ>(&j).unwrap(), r);
        assert_eq!("6/4".parse::<RationalQ>().unwrap(), q(3, 2));
    }
}
