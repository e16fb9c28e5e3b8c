//! Perturbation kernels for translations of complex points: how far a
//! bounded translation can rotate the argument, and how the modulus
//! decomposes into a first-order radial increment plus a controlled
//! remainder. Preconditions are validated eagerly so a returned bound is
//! never silently invalid.

use num_complex::Complex64;
use std::f64::consts::TAU;
use thiserror::Error;

use crate::circle::{arg_turns, circle_distance};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum KernelError {
    #[error("w1 must be nonzero")]
    ZeroW1,
    #[error("w2 must be nonzero")]
    ZeroW2,
    #[error("C must be positive, got {0}")]
    NonPositiveC(f64),
    #[error("|w1| >= 2C violated: |w1| = {abs_w1}, 2C = {two_c}")]
    ModulusBelowTwiceC { abs_w1: f64, two_c: f64 },
    #[error("|w1 - w2| <= C violated: |w1 - w2| = {step}, C = {c}")]
    StepExceedsC { step: f64, c: f64 },
}

/// First-order decomposition of a modulus change `|w2| - |w1|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialDecomposition {
    /// `Re(conj(w2 - w1) * w1 / |w1|)`: the component of the translation
    /// along the ray through `w1`.
    pub linear_part: f64,
    /// `(|w2| - |w1|) - linear_part`.
    pub remainder: f64,
    /// `2 C^2 / |w1|`; always dominates `|remainder|` under the
    /// preconditions.
    pub remainder_bound: f64,
}

/// Outcome of the rotation-error estimate for a bounded translation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotationErrorCheck {
    /// `d_T(arg w2, arg w1)` in turns.
    pub distance: f64,
    /// `C / |w1|`.
    pub bound: f64,
    pub holds: bool,
}

/// Distance between the arguments of `w1` and `w2`, computed through the
/// principal complex logarithm: `|Ln(w1/w2) - ln(|w1|/|w2|)| / 2pi`.
///
/// Agrees with `circle_distance(arg_turns(w1), arg_turns(w2))` to 1e-10;
/// the branch cut of `Ln` sits on the closed side `Im = pi`, which maps to
/// the same distance 1/2 as `Im = -pi`.
pub fn arg_distance_via_log(w1: Complex64, w2: Complex64) -> Result<f64, KernelError> {
    check_nonzero(w1, w2)?;
    let quotient = w1 / w2;
    let log = quotient.ln();
    let radial = (w1.norm() / w2.norm()).ln();
    Ok((log - Complex64::new(radial, 0.0)).norm() / TAU)
}

/// For `|w1| >= 2C` and `|w1 - w2| <= C`, the translation from `w1` to `w2`
/// rotates the argument by at most `C / |w1|` turns.
pub fn rotation_error_bound(
    w1: Complex64,
    w2: Complex64,
    c: f64,
) -> Result<RotationErrorCheck, KernelError> {
    if !c.is_finite() || c <= 0.0 {
        return Err(KernelError::NonPositiveC(c));
    }
    let abs_w1 = w1.norm();
    if abs_w1 < 2.0 * c {
        return Err(KernelError::ModulusBelowTwiceC {
            abs_w1,
            two_c: 2.0 * c,
        });
    }
    let step = (w1 - w2).norm();
    if step > c {
        return Err(KernelError::StepExceedsC { step, c });
    }
    // The preconditions force both points away from the origin.
    let a1 = arg_turns(w1).map_err(|_| KernelError::ZeroW1)?;
    let a2 = arg_turns(w2).map_err(|_| KernelError::ZeroW2)?;
    let distance = circle_distance(a2, a1);
    let bound = c / abs_w1;
    Ok(RotationErrorCheck {
        distance,
        bound,
        holds: distance <= bound,
    })
}

/// Splits `|w2| - |w1|` into the radial projection of the translation and a
/// remainder bounded by `2 C^2 / |w1|`, valid whenever `|w1 - w2| <= C`.
pub fn radial_increment(
    w1: Complex64,
    w2: Complex64,
    c: f64,
) -> Result<RadialDecomposition, KernelError> {
    if !c.is_finite() || c <= 0.0 {
        return Err(KernelError::NonPositiveC(c));
    }
    check_nonzero(w1, w2)?;
    let step = (w1 - w2).norm();
    if step > c {
        return Err(KernelError::StepExceedsC { step, c });
    }
    let abs_w1 = w1.norm();
    // e(arg w1) = w1 / |w1|, computed directly to avoid a trig round trip.
    let direction = w1 / abs_w1;
    let linear_part = ((w2 - w1).conj() * direction).re;
    let remainder = (w2.norm() - abs_w1) - linear_part;
    Ok(RadialDecomposition {
        linear_part,
        remainder,
        remainder_bound: 2.0 * c * c / abs_w1,
    })
}

fn check_nonzero(w1: Complex64, w2: Complex64) -> Result<(), KernelError> {
    if w1.re == 0.0 && w1.im == 0.0 {
        return Err(KernelError::ZeroW1);
    }
    if w2.re == 0.0 && w2.im == 0.0 {
        return Err(KernelError::ZeroW2);
    }
    Ok(())
}
