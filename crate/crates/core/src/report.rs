//! The check record shared by every verification routine.

use serde::{Deserialize, Serialize, Serializer};

use crate::seifert::RationalQ;

fn real<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
    if v.is_finite() {
        s.serialize_f64(*v)
    } else if v.is_nan() {
        s.serialize_str("nan")
    } else if *v > 0.0 {
        s.serialize_str("inf")
    } else {
        s.serialize_str("-inf")
    }
}

fn de_real<'de, D: serde::Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Num(f64),
        Text(String),
    }
    match Raw::deserialize(d)? {
        Raw::Num(v) => Ok(v),
        Raw::Text(t) => match t.as_str() {
            "nan" => Ok(f64::NAN),
            "inf" => Ok(f64::INFINITY),
            "-inf" => Ok(f64::NEG_INFINITY),
            other => Err(serde::de::Error::custom(format!("not a real: {other}"))),
        },
    }
}

/// A computed or expected value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Quantity {
    Exact {
        value: RationalQ,
    },
    Real {
        #[serde(serialize_with = "real", deserialize_with = "de_real")]
        value: f64,
    },
    Complex {
        #[serde(serialize_with = "real", deserialize_with = "de_real")]
        re: f64,
        #[serde(serialize_with = "real", deserialize_with = "de_real")]
        im: f64,
    },
}

impl Quantity {
    pub fn exact(value: RationalQ) -> Quantity {
        Quantity::Exact { value }
    }

    pub fn real(value: f64) -> Quantity {
        Quantity::Real { value }
    }

    pub fn complex(re: f64, im: f64) -> Quantity {
        Quantity::Complex { re, im }
    }

    fn parts(&self) -> (f64, f64) {
        match self {
            Quantity::Exact { value } => (value.to_f64(), 0.0),
            Quantity::Real { value } => (*value, 0.0),
            Quantity::Complex { re, im } => (*re, *im),
        }
    }

    /// `|self − other|`, exact when both sides are rational.
    pub fn distance(&self, other: &Quantity) -> f64 {
        if let (Quantity::Exact { value: a }, Quantity::Exact { value: b }) = (self, other) {
            return (a.clone() - b.clone()).abs().to_f64();
        }
        let (a, b) = (self.parts(), other.parts());
        (a.0 - b.0).hypot(a.1 - b.1)
    }
}

/// Where a computed number comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum Provenance {
    Exact,
    Quadrature {
        #[serde(serialize_with = "real", deserialize_with = "de_real")]
        error_estimate: f64,
    },
    MonteCarlo {
        #[serde(serialize_with = "real", deserialize_with = "de_real")]
        error_estimate: f64,
    },
    Sampled {
        points: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub name: String,
    pub computed: Quantity,
    pub expected: Quantity,
    #[serde(serialize_with = "real", deserialize_with = "de_real")]
    pub tolerance: f64,
    pub passed: bool,
    pub detail: String,
    pub provenance: Provenance,
}

/// The pass rule: `|computed − expected| ≤ tolerance`, with exact equality
/// for two rationals at tolerance 0.
pub fn passes(computed: &Quantity, expected: &Quantity, tolerance: f64) -> bool {
    if let (Quantity::Exact { value: a }, Quantity::Exact { value: b }) = (computed, expected) {
        if tolerance == 0.0 {
            return a == b;
        }
    }
    computed.distance(expected) <= tolerance
}

impl CheckReport {
    pub fn new(
        name: impl Into<String>,
        computed: Quantity,
        expected: Quantity,
        tolerance: f64,
        detail: impl Into<String>,
        provenance: Provenance,
    ) -> CheckReport {
        let passed = passes(&computed, &expected, tolerance);
        CheckReport {
            name: name.into(),
            computed,
            expected,
            tolerance,
            passed,
            detail: detail.into(),
            provenance,
        }
    }

    pub fn exact(name: impl Into<String>, computed: RationalQ, expected: RationalQ, detail: impl Into<String>) -> CheckReport {
        CheckReport::new(
            name,
            Quantity::exact(computed),
            Quantity::exact(expected),
            0.0,
            detail,
            Provenance::Exact,
        )
    }

    /// A residual that must be at most `tolerance` (expected value 0).
    pub fn residual(name: impl Into<String>, computed: f64, tolerance: f64, points: usize, detail: impl Into<String>) -> CheckReport {
        CheckReport::new(
            name,
            Quantity::real(computed),
            Quantity::real(0.0),
            tolerance,
            detail,
            Provenance::Sampled { points },
        )
    }

    /// Re-derives `passed` from the stored fields.
    pub fn recheck(&self) -> bool {
        passes(&self.computed, &self.expected, self.tolerance)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_comparison_ignores_floating_rounding() {
        let third = RationalQ::new(1, 3).unwrap();
        let r = CheckReport::exact("third", third.clone(), third.clone(), "");
        assert!(r.passed);
        let r = CheckReport::exact("off", third, RationalQ::new(333_333_333, 1_000_000_000).unwrap(), "");
        assert!(!r.passed);
    }

    #[test]
    fn infinite_residual_fails_and_serializes_as_string() {
        let r = CheckReport::residual("w", f64::INFINITY, 1e-8, 3, "zero witness");
        assert!(!r.passed);
        let json = serde_json::to_string(&r).unwrap();
        assert!(json.contains("\"inf\""));
        let back: CheckReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back.computed, Quantity::real(f64::INFINITY));
    }

    #[test]
    fn complex_distance_is_modulus() {
        let a = Quantity::complex(3.0, 4.0);
        assert_eq!(a.distance(&Quantity::real(0.0)), 5.0);
        assert!(!passes(&Quantity::real(f64::NAN), &Quantity::real(0.0), 1.0));
    }
}
