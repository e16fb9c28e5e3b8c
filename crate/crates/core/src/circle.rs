//! The circle `T = R/Z` with angles in turns.
//!
//! A turn is a fraction of a full revolution, so `e(t) = exp(2 pi i t)` and
//! all mod-1 arithmetic stays in the well-conditioned range `[0, 1)`.
//! The half-open convention is used everywhere: reduction maps an exact
//! `1.0` to `0.0`.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CircleError {
    #[error("non-finite real value {0} cannot be reduced mod 1")]
    NonFinite(f64),
    #[error("argument of zero is undefined")]
    ZeroArgument,
    #[error("rotation number must lie in (0, 1), got {0}")]
    RotationOutOfRange(f64),
}

/// A point of `T = R/Z`, stored as a real in `[0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CirclePoint(f64);

impl CirclePoint {
    pub const ZERO: CirclePoint = CirclePoint(0.0);

    /// Reduces a finite real to its fractional part in `[0, 1)`.
    pub fn reduce(t: f64) -> Result<CirclePoint, CircleError> {
        if !t.is_finite() {
            return Err(CircleError::NonFinite(t));
        }
        Ok(CirclePoint(wrap_unit(t)))
    }

    /// Argument of a nonzero complex number, in turns, in `[0, 1)`.
    pub fn arg_turns(z: Complex64) -> Result<CirclePoint, CircleError> {
        if z.re == 0.0 && z.im == 0.0 {
            return Err(CircleError::ZeroArgument);
        }
        // Complex::arg lands in (-pi, pi]; shift the negative half up a turn.
        Ok(CirclePoint(wrap_unit(z.arg() / TAU)))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// Arc-length metric on `T`: `min_m |a - b + m|`, in `[0, 1/2]`.
    pub fn distance(self, other: CirclePoint) -> f64 {
        let d = (self.0 - other.0).abs();
        d.min(1.0 - d)
    }

    /// Advances by an angle (in turns) along the circle.
    pub fn rotate(self, phi: &RotationNumber) -> CirclePoint {
        CirclePoint(wrap_unit(self.0 + phi.value()))
    }

    /// Adds an arbitrary finite offset in turns.
    pub(crate) fn offset(self, turns: f64) -> CirclePoint {
        CirclePoint(wrap_unit(self.0 + turns))
    }

    /// The unit complex number `e(t)` at this angle.
    pub fn to_complex(self) -> Complex64 {
        cis_turns(self.0)
    }
}

/// `e(t) = exp(2 pi i t)` for `t` in turns.
pub fn cis_turns(t: f64) -> Complex64 {
    let (s, c) = (TAU * t).sin_cos();
    Complex64::new(c, s)
}

/// Fractional part in `[0, 1)`. `t - floor(t)` can round up to exactly 1.0
/// for tiny negative inputs, so that case is folded back to 0.
fn wrap_unit(t: f64) -> f64 {
    let mut r = t - t.floor();
    if r >= 1.0 {
        r -= 1.0;
    }
    r
}

/// Named constants that pin down which irrational a rotation represents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RotationTag {
    /// `(sqrt(5) - 1) / 2`, continued fraction `[1, 1, 1, ...]`.
    Golden,
    /// `sqrt(2) - 1`, continued fraction `[2, 2, 2, ...]`.
    Sqrt2Frac,
    /// Any caller-supplied real in `(0, 1)`.
    UserReal,
}

/// The rotation angle `phi`, in turns, in `(0, 1)`.
///
/// Any machine real is technically rational, but orbit behavior matches an
/// irrational rotation for horizons far below `1/ulp`; the dyadic
/// decomposition in [`RotationNumber::times_mod1`] makes orbit points exact
/// for the stored double.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RotationNumber {
    value: f64,
    tag: RotationTag,
    /// Leading continued-fraction partial quotients, when known.
    cf_terms: Option<Vec<u32>>,
    #[serde(skip)]
    dyadic: Option<Dyadic>,
}

/// `value = mantissa / 2^exponent` exactly, with odd mantissa.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Dyadic {
    mantissa: u128,
    exponent: u32,
}

impl RotationNumber {
    /// The golden rotation `(sqrt(5) - 1) / 2`, the default choice.
    pub fn golden() -> RotationNumber {
        let value = (5.0_f64.sqrt() - 1.0) / 2.0;
        RotationNumber {
            value,
            tag: RotationTag::Golden,
            cf_terms: Some(vec![1; 16]),
            dyadic: decompose_dyadic(value),
        }
    }

    /// The fractional part of `sqrt(2)`.
    pub fn sqrt2_frac() -> RotationNumber {
        let value = 2.0_f64.sqrt() - 1.0;
        RotationNumber {
            value,
            tag: RotationTag::Sqrt2Frac,
            cf_terms: Some(vec![2; 16]),
            dyadic: decompose_dyadic(value),
        }
    }

    /// A caller-supplied rotation number in `(0, 1)`.
    pub fn from_value(value: f64) -> Result<RotationNumber, CircleError> {
        if !(value.is_finite() && 0.0 < value && value < 1.0) {
            return Err(CircleError::RotationOutOfRange(value));
        }
        Ok(RotationNumber {
            value,
            tag: RotationTag::UserReal,
            cf_terms: None,
            dyadic: decompose_dyadic(value),
        })
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn tag(&self) -> RotationTag {
        self.tag
    }

    pub fn cf_terms(&self) -> Option<&[u32]> {
        self.cf_terms.as_deref()
    }

    /// `k * phi mod 1`, exact for the stored double whenever the dyadic
    /// decomposition fits in 128-bit arithmetic (always, for values above
    /// ~2^-47); the single final rounding is at most half an ulp.
    pub fn times_mod1(&self, k: u64) -> CirclePoint {
        if let Some(d) = self.dyadic {
            let prod = (k as u128).wrapping_mul(d.mantissa);
            // Guard against overflow of k * mantissa; mantissa < 2^53.
            if k < (1u64 << 63) {
                let rem = prod & ((1u128 << d.exponent) - 1);
                let v = (rem as f64) / 2f64.powi(d.exponent as i32);
                return CirclePoint(if v >= 1.0 { 0.0 } else { v });
            }
        }
        CirclePoint(wrap_unit(k as f64 * self.value))
    }

    /// Scaled-integer orbit support: `(mantissa, exponent)` with
    /// `phi = mantissa / 2^exponent` exactly, when available.
    pub(crate) fn dyadic_parts(&self) -> Option<(u128, u32)> {
        self.dyadic.map(|d| (d.mantissa, d.exponent))
    }
}

impl PartialEq for RotationNumber {
    fn eq(&self, other: &Self) -> bool {
        self.value == other.value && self.tag == other.tag
    }
}

fn decompose_dyadic(value: f64) -> Option<Dyadic> {
    debug_assert!(value > 0.0 && value < 1.0);
    let bits = value.to_bits();
    let raw_exp = ((bits >> 52) & 0x7ff) as i64;
    let frac = bits & ((1u64 << 52) - 1);
    // Normal doubles only; phi in (0,1) is never subnormal in practice.
    if raw_exp == 0 {
        return None;
    }
    let mut mantissa = (frac | (1u64 << 52)) as u128;
    // value = mantissa * 2^(raw_exp - 1075), and raw_exp < 1023 here.
    let mut exponent = (1075 - raw_exp) as u32;
    while mantissa & 1 == 0 {
        mantissa >>= 1;
        exponent -= 1;
    }
    // Keep k * mantissa and the mask within u128.
    if exponent > 100 {
        return None;
    }
    Some(Dyadic { mantissa, exponent })
}

// The spec-level operation names, as free functions.

/// `t - floor(t)`, rejecting non-finite input.
pub fn reduce(t: f64) -> Result<CirclePoint, CircleError> {
    CirclePoint::reduce(t)
}

/// Arc-length distance between two circle points.
pub fn circle_distance(a: CirclePoint, b: CirclePoint) -> f64 {
    a.distance(b)
}

/// Argument in turns of a nonzero complex number.
pub fn arg_turns(z: Complex64) -> Result<CirclePoint, CircleError> {
    CirclePoint::arg_turns(z)
}

/// Rotation by `phi`.
pub fn rotate(theta: CirclePoint, phi: &RotationNumber) -> CirclePoint {
    theta.rotate(phi)
}
