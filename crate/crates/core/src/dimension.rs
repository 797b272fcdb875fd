//! Unit-of-measure algebra over the seven SI base dimensions.
//!
//! Exponents are exact rationals. The surface language only produces integer
//! exponents, but the null-space computation downstream works over the
//! rationals and must not lose exactness.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::dsl::UnitExpr;

pub type Rational = BigRational;

pub const BASE_COUNT: usize = 7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BaseDimension {
    Length,
    Mass,
    Time,
    Current,
    Temperature,
    Amount,
    LuminousIntensity,
}

impl BaseDimension {
    pub const ALL: [BaseDimension; BASE_COUNT] = [
        BaseDimension::Length,
        BaseDimension::Mass,
        BaseDimension::Time,
        BaseDimension::Current,
        BaseDimension::Temperature,
        BaseDimension::Amount,
        BaseDimension::LuminousIntensity,
    ];

    pub fn symbol(self) -> &'static str {
        match self {
            BaseDimension::Length => "L",
            BaseDimension::Mass => "M",
            BaseDimension::Time => "T",
            BaseDimension::Current => "I",
            BaseDimension::Temperature => "Θ",
            BaseDimension::Amount => "N",
            BaseDimension::LuminousIntensity => "J",
        }
    }

    /// SI base unit carrying this dimension.
    pub fn unit_name(self) -> &'static str {
        match self {
            BaseDimension::Length => "meter",
            BaseDimension::Mass => "kilogram",
            BaseDimension::Time => "second",
            BaseDimension::Current => "ampere",
            BaseDimension::Temperature => "kelvin",
            BaseDimension::Amount => "mole",
            BaseDimension::LuminousIntensity => "candela",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

/// Exponents of (L, M, T, I, Θ, N, J).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DimensionVector {
    exponents: [Rational; BASE_COUNT],
}

impl DimensionVector {
    pub fn dimensionless() -> Self {
        DimensionVector { exponents: std::array::from_fn(|_| Rational::zero()) }
    }

    pub fn base(dim: BaseDimension) -> Self {
        let mut v = Self::dimensionless();
        v.exponents[dim.index()] = Rational::one();
        v
    }

    /// Builds a vector from integer exponents in (L, M, T, I, Θ, N, J) order.
    pub fn from_ints(exponents: [i64; BASE_COUNT]) -> Self {
        DimensionVector {
            exponents: exponents.map(|e| Rational::from_integer(BigInt::from(e))),
        }
    }

    pub fn exponent(&self, dim: BaseDimension) -> &Rational {
        &self.exponents[dim.index()]
    }

    pub fn exponents(&self) -> &[Rational; BASE_COUNT] {
        &self.exponents
    }

    pub fn is_dimensionless(&self) -> bool {
        self.exponents.iter().all(Zero::is_zero)
    }

    pub fn pow(&self, n: &Rational) -> Self {
        DimensionVector { exponents: std::array::from_fn(|i| &self.exponents[i] * n) }
    }
}

impl Add<&DimensionVector> for &DimensionVector {
    type Output = DimensionVector;

    fn add(self, rhs: &DimensionVector) -> DimensionVector {
        DimensionVector {
            exponents: std::array::from_fn(|i| &self.exponents[i] + &rhs.exponents[i]),
        }
    }
}

impl Add for DimensionVector {
    type Output = DimensionVector;

    fn add(self, rhs: DimensionVector) -> DimensionVector {
        &self + &rhs
    }
}

impl Mul<i64> for &DimensionVector {
    type Output = DimensionVector;

    fn mul(self, rhs: i64) -> DimensionVector {
        self.pow(&Rational::from_integer(BigInt::from(rhs)))
    }
}

impl Neg for DimensionVector {
    type Output = DimensionVector;

    fn neg(self) -> DimensionVector {
        DimensionVector { exponents: self.exponents.map(|e| -e) }
    }
}

impl fmt::Display for DimensionVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_dimensionless() {
            return f.write_str("1");
        }
        let mut first = true;
        for dim in BaseDimension::ALL {
            let e = self.exponent(dim);
            if e.is_zero() {
                continue;
            }
            if !first {
                f.write_str("·")?;
            }
            first = false;
            if e.is_one() {
                f.write_str(dim.symbol())?;
            } else {
                write!(f, "{}^{}", dim.symbol(), e)?;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DimensionError {
    #[error("`{0}` not found in unit table")]
    NotFound(String),
    #[error("unknown unit `{0}`")]
    UnknownUnit(String),
}

/// A named physical constant with its dimension and SI value.
#[derive(Debug, Clone, PartialEq)]
pub struct PhysicalConstant {
    pub dimension: DimensionVector,
    pub value: f64,
}

/// Name tables for units, signal types and physical constants. Lookups are
/// case-sensitive.
#[derive(Debug, Clone, Default)]
pub struct UnitTable {
    units: BTreeMap<String, DimensionVector>,
    signal_types: BTreeMap<String, DimensionVector>,
    constants: BTreeMap<String, PhysicalConstant>,
}

/// Standard gravity, m/s².
pub const STANDARD_GRAVITY: f64 = 9.80665;

pub const GRAVITY_CONSTANT_NAME: &str = "kNewtonUnithave_AccelerationDueToGravity";

impl UnitTable {
    /// The table behind `include "NewtonBaseSignals.nt"`.
    pub fn builtin_prelude() -> Self {
        use BaseDimension::*;

        let mut table = UnitTable::default();
        for dim in BaseDimension::ALL {
            table.units.insert(dim.unit_name().to_string(), DimensionVector::base(dim));
        }
        //                          L  M  T  I  Θ  N  J
        let derived_units: [(&str, [i64; BASE_COUNT]); 5] = [
            ("newton", [1, 1, -2, 0, 0, 0, 0]),
            ("pascal", [-1, 1, -2, 0, 0, 0, 0]),
            ("hertz", [0, 0, -1, 0, 0, 0, 0]),
            ("joule", [2, 1, -2, 0, 0, 0, 0]),
            ("watt", [2, 1, -3, 0, 0, 0, 0]),
        ];
        for (name, e) in derived_units {
            table.units.insert(name.to_string(), DimensionVector::from_ints(e));
        }

        let base_types = [
            ("distance", Length),
            ("mass", Mass),
            ("time", Time),
            ("current", Current),
            ("temperature", Temperature),
            ("amount", Amount),
            ("luminousIntensity", LuminousIntensity),
        ];
        for (name, dim) in base_types {
            table.signal_types.insert(name.to_string(), DimensionVector::base(dim));
        }
        let derived_types: [(&str, [i64; BASE_COUNT]); 15] = [
            ("speed", [1, 0, -1, 0, 0, 0, 0]),
            ("acceleration", [1, 0, -2, 0, 0, 0, 0]),
            ("force", [1, 1, -2, 0, 0, 0, 0]),
            ("pressure", [-1, 1, -2, 0, 0, 0, 0]),
            ("frequency", [0, 0, -1, 0, 0, 0, 0]),
            ("angle", [0; BASE_COUNT]),
            ("dimensionless", [0; BASE_COUNT]),
            ("area", [2, 0, 0, 0, 0, 0, 0]),
            ("volume", [3, 0, 0, 0, 0, 0, 0]),
            ("density", [-3, 1, 0, 0, 0, 0, 0]),
            ("linearDensity", [-1, 1, 0, 0, 0, 0, 0]),
            ("viscosity", [-1, 1, -1, 0, 0, 0, 0]),
            ("stiffness", [0, 1, -2, 0, 0, 0, 0]),
            ("energy", [2, 1, -2, 0, 0, 0, 0]),
            ("power", [2, 1, -3, 0, 0, 0, 0]),
        ];
        for (name, e) in derived_types {
            table.signal_types.insert(name.to_string(), DimensionVector::from_ints(e));
        }

        table.constants.insert(
            GRAVITY_CONSTANT_NAME.to_string(),
            PhysicalConstant {
                dimension: DimensionVector::from_ints([1, 0, -2, 0, 0, 0, 0]),
                value: STANDARD_GRAVITY,
            },
        );
        table
    }

    pub fn unit(&self, name: &str) -> Option<&DimensionVector> {
        self.units.get(name)
    }

    pub fn signal_type(&self, name: &str) -> Option<&DimensionVector> {
        self.signal_types.get(name)
    }

    pub fn constant(&self, name: &str) -> Option<&PhysicalConstant> {
        self.constants.get(name)
    }

    /// Looks `name` up as a unit, then a signal type, then a constant.
    pub fn lookup(&self, name: &str) -> Result<&DimensionVector, DimensionError> {
        self.unit(name)
            .or_else(|| self.signal_type(name))
            .or_else(|| self.constant(name).map(|c| &c.dimension))
            .ok_or_else(|| DimensionError::NotFound(name.to_string()))
    }

    pub fn signal_type_names(&self) -> impl Iterator<Item = &str> {
        self.signal_types.keys().map(String::as_str)
    }

    pub fn unit_names(&self) -> impl Iterator<Item = &str> {
        self.units.keys().map(String::as_str)
    }
}

/// Sum over factors of exponent × unit dimension.
pub fn eval_unit_expr(expr: &UnitExpr, table: &UnitTable) -> Result<DimensionVector, DimensionError> {
    expr.factors.iter().try_fold(DimensionVector::dimensionless(), |acc, factor| {
        let dim = table
            .unit(&factor.unit)
            .ok_or_else(|| DimensionError::UnknownUnit(factor.unit.clone()))?;
        Ok(&acc + &(dim * factor.exponent))
    })
}
