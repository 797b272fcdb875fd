//! Parametric signed fixed-point arithmetic, bit-for-bit identical to the
//! generated multiply and divide units.
//!
//! A value in format `qI.F` is a W-bit two's-complement integer `raw`
//! (W = I + F + 1) standing for `raw / 2^F`. Products are floored (arithmetic
//! right shift), quotients truncated toward zero, both through a 2W-bit
//! intermediate. Results that do not fit in W bits are errors rather than
//! wrapping or saturating.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const MAX_WIDTH: u32 = 64;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FxError {
    #[error("invalid fixed-point format: {0}")]
    InvalidFormat(String),
    #[error("{value} is not representable in {format}")]
    OutOfRange { value: f64, format: QFormat },
    #[error("raw value {raw} does not fit in {format}")]
    RawOutOfRange { raw: i128, format: QFormat },
    #[error("fixed-point overflow")]
    Overflow,
    #[error("division by zero")]
    DivideByZero,
    #[error("format mismatch: {0} vs {1}")]
    FormatMismatch(QFormat, QFormat),
}

/// Signed format with `width` total bits, of which `frac` are fractional.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct QFormat {
    width: u32,
    frac: u32,
}

impl QFormat {
    /// Q16.15 in a 32-bit word.
    pub const DEFAULT: QFormat = QFormat { width: 32, frac: 15 };

    pub fn new(width: u32, frac: u32) -> Result<Self, FxError> {
        if !(2..=MAX_WIDTH).contains(&width) {
            return Err(FxError::InvalidFormat(format!("width {width} outside 2..={MAX_WIDTH}")));
        }
        if frac > width - 2 {
            return Err(FxError::InvalidFormat(format!(
                "{frac} fractional bits leave no integer bit in a {width}-bit word"
            )));
        }
        Ok(QFormat { width, frac })
    }

    /// `qI.F`: I integer bits, F fractional bits, plus a sign bit.
    pub fn from_int_frac(int_bits: u32, frac: u32) -> Result<Self, FxError> {
        let width = int_bits
            .checked_add(frac)
            .and_then(|w| w.checked_add(1))
            .ok_or_else(|| FxError::InvalidFormat(format!("q{int_bits}.{frac} too wide")))?;
        if int_bits == 0 {
            return Err(FxError::InvalidFormat("at least one integer bit is required".into()));
        }
        Self::new(width, frac)
    }

    pub fn width(self) -> u32 {
        self.width
    }

    pub fn frac(self) -> u32 {
        self.frac
    }

    pub fn int_bits(self) -> u32 {
        self.width - 1 - self.frac
    }

    pub fn min_raw(self) -> i64 {
        (-(1i128 << (self.width - 1))) as i64
    }

    pub fn max_raw(self) -> i64 {
        ((1i128 << (self.width - 1)) - 1) as i64
    }

    pub fn one_raw(self) -> i64 {
        1i64 << self.frac
    }

    /// Smallest positive increment, 2^-F.
    pub fn resolution(self) -> f64 {
        (-(self.frac as f64)).exp2()
    }

    pub fn fits(self, raw: i128) -> bool {
        raw >= self.min_raw() as i128 && raw <= self.max_raw() as i128
    }

    pub fn from_raw(self, raw: i64) -> Result<FxValue, FxError> {
        if self.fits(raw as i128) {
            Ok(FxValue { raw, format: self })
        } else {
            Err(FxError::RawOutOfRange { raw: raw as i128, format: self })
        }
    }
}

impl Default for QFormat {
    fn default() -> Self {
        QFormat::DEFAULT
    }
}

impl fmt::Display for QFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "q{}.{}", self.int_bits(), self.frac)
    }
}

impl FromStr for QFormat {
    type Err = FxError;

    fn from_str(s: &str) -> Result<Self, FxError> {
        let bad = || FxError::InvalidFormat(format!("`{s}` (expected qI.F, e.g. q16.15)"));
        let body = s.strip_prefix(['q', 'Q']).ok_or_else(bad)?;
        let (i, f) = body.split_once('.').ok_or_else(bad)?;
        let int_bits: u32 = i.parse().map_err(|_| bad())?;
        let frac: u32 = f.parse().map_err(|_| bad())?;
        Self::from_int_frac(int_bits, frac)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FxValue {
    raw: i64,
    format: QFormat,
}

impl FxValue {
    pub fn raw(self) -> i64 {
        self.raw
    }

    pub fn format(self) -> QFormat {
        self.format
    }

    /// Two's-complement bit pattern in the low W bits.
    pub fn bits(self) -> u64 {
        let mask = if self.format.width == 64 { u64::MAX } else { (1u64 << self.format.width) - 1 };
        (self.raw as u64) & mask
    }

    pub fn to_f64(self) -> f64 {
        decode(self)
    }
}

impl fmt::Display for FxValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", decode(*self))
    }
}

/// raw = round(x·2^F), ties away from zero.
pub fn encode(x: f64, format: QFormat) -> Result<FxValue, FxError> {
    // Scaling by a power of two is exact; f64::round rounds ties away from zero.
    let scaled = (x * (format.frac as f64).exp2()).round();
    if !scaled.is_finite() || scaled < format.min_raw() as f64 || scaled > format.max_raw() as f64 {
        return Err(FxError::OutOfRange { value: x, format });
    }
    Ok(FxValue { raw: scaled as i64, format })
}

/// raw / 2^F.
pub fn decode(v: FxValue) -> f64 {
    v.raw as f64 * v.format.resolution()
}

fn same_format(a: FxValue, b: FxValue) -> Result<QFormat, FxError> {
    if a.format == b.format {
        Ok(a.format)
    } else {
        Err(FxError::FormatMismatch(a.format, b.format))
    }
}

/// (a·b) >> F with an arithmetic (flooring) shift.
pub fn fx_mul(a: FxValue, b: FxValue) -> Result<FxValue, FxError> {
    let format = same_format(a, b)?;
    let wide = (a.raw as i128 * b.raw as i128) >> format.frac;
    if format.fits(wide) {
        Ok(FxValue { raw: wide as i64, format })
    } else {
        Err(FxError::Overflow)
    }
}

/// (a << F) / b, truncating toward zero.
pub fn fx_div(a: FxValue, b: FxValue) -> Result<FxValue, FxError> {
    let format = same_format(a, b)?;
    if b.raw == 0 {
        return Err(FxError::DivideByZero);
    }
    let wide = ((a.raw as i128) << format.frac) / b.raw as i128;
    if format.fits(wide) {
        Ok(FxValue { raw: wide as i64, format })
    } else {
        Err(FxError::Overflow)
    }
}
