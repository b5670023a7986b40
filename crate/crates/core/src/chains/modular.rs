use std::fmt;
use std::ops::{Add, Neg, Sub};

use serde::Serialize;

use crate::error::{GbcError, Result};

/// An element of `ℝ/cℤ`, stored as its representative in `[0, c)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ModValue {
    value: f64,
    modulus: f64,
}

impl ModValue {
    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn modulus(&self) -> f64 {
        self.modulus
    }

    pub fn zero(modulus: f64) -> Result<Self> {
        mod_reduce(0.0, modulus)
    }

    /// Distance to `0` on the circle.
    pub fn norm(&self) -> f64 {
        self.value.min(self.modulus - self.value)
    }

    pub fn checked_add(&self, other: &ModValue) -> Result<ModValue> {
        same_modulus(self, other)?;
        mod_reduce(self.value + other.value, self.modulus)
    }

    pub fn checked_sub(&self, other: &ModValue) -> Result<ModValue> {
        same_modulus(self, other)?;
        mod_reduce(self.value - other.value, self.modulus)
    }
}

impl fmt::Display for ModValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} mod {}", self.value, self.modulus)
    }
}

fn same_modulus(a: &ModValue, b: &ModValue) -> Result<()> {
    if a.modulus != b.modulus {
        return Err(GbcError::ModulusMismatch(a.modulus, b.modulus));
    }
    Ok(())
}

/// `x − c⌊x/c⌋`.
pub fn mod_reduce(x: f64, modulus: f64) -> Result<ModValue> {
    if !(modulus > 0.0) || !modulus.is_finite() {
        return Err(GbcError::InvalidModulus(modulus));
    }
    if !x.is_finite() {
        return Err(GbcError::InvalidParameter(format!("cannot reduce {x}")));
    }
    let mut value = x - modulus * (x / modulus).floor();
    // rounding can land exactly on c for tiny negative x
    if value >= modulus {
        value = 0.0;
    }
    Ok(ModValue { value, modulus })
}

/// Circle distance `min(|a − b|, c − |a − b|)`.
pub fn mod_distance(a: &ModValue, b: &ModValue) -> Result<f64> {
    same_modulus(a, b)?;
    let d = (a.value - b.value).abs();
    Ok(d.min(a.modulus - d))
}

impl Add for ModValue {
    type Output = ModValue;

    /// Panics on a modulus mismatch; see [`ModValue::checked_add`].
    fn add(self, other: ModValue) -> ModValue {
        self.checked_add(&other).expect("equal moduli")
    }
}

impl Sub for ModValue {
    type Output = ModValue;

    fn sub(self, other: ModValue) -> ModValue {
        self.checked_sub(&other).expect("equal moduli")
    }
}

impl Neg for ModValue {
    type Output = ModValue;

    fn neg(self) -> ModValue {
        mod_reduce(-self.value, self.modulus).expect("valid modulus")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn reductions() {
        assert_eq!(mod_reduce(1.25, 1.0).unwrap().value(), 0.25);
        assert_eq!(mod_reduce(-0.25, 1.0).unwrap().value(), 0.75);
        assert_eq!(mod_reduce(3.0, 1.0).unwrap().value(), 0.0);
        assert_eq!(mod_reduce(-1e-18, 1.0).unwrap().value(), 0.0);
        assert_eq!(mod_reduce(1.0, 0.0), Err(GbcError::InvalidModulus(0.0)));
        assert!(mod_reduce(1.0, -2.0).is_err());
    }

    #[test]
    fn distances() {
        let a = mod_reduce(0.999, 1.0).unwrap();
        let b = mod_reduce(0.001, 1.0).unwrap();
        assert!((mod_distance(&a, &b).unwrap() - 0.002).abs() < 1e-12);
        assert_eq!(mod_distance(&a, &a).unwrap(), 0.0);
        let c = mod_reduce(0.5, 2.0).unwrap();
        assert_eq!(mod_distance(&a, &c), Err(GbcError::ModulusMismatch(1.0, 2.0)));
    }

    #[test]
    fn arithmetic() {
        let a = mod_reduce(0.75, 1.0).unwrap();
        let b = mod_reduce(0.5, 1.0).unwrap();
        assert_eq!((a + b).value(), 0.25);
        assert_eq!((b - a).value(), 0.75);
        assert_eq!((-a).value(), 0.25);
    }

    proptest! {
        #[test]
        fn representative_in_range(x in -1e6f64..1e6, c in 0.01f64..100.0) {
            let v = mod_reduce(x, c).unwrap();
            prop_assert!(v.value() >= 0.0 && v.value() < c);
            // differs from x by a multiple of c
            let k = (x - v.value()) / c;
            prop_assert!((k - k.round()).abs() < 1e-6);
        }

        #[test]
        fn circle_metric(x in -50.0f64..50.0, y in -50.0f64..50.0, z in -50.0f64..50.0, c in 0.1f64..10.0) {
            let (a, b, d) = (mod_reduce(x, c).unwrap(), mod_reduce(y, c).unwrap(), mod_reduce(z, c).unwrap());
            let ab = mod_distance(&a, &b).unwrap();
            prop_assert!(ab <= 0.5 * c + 1e-12);
            prop_assert!((ab - mod_distance(&b, &a).unwrap()).abs() < 1e-12);
            prop_assert!(ab <= mod_distance(&a, &d).unwrap() + mod_distance(&d, &b).unwrap() + 1e-9);
        }
    }
}
