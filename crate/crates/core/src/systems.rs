//! Registry of concrete perturbation/forcing families for the difference
//! equation `x(n+1) = e(phi) x(n) + f(x(n)) + y(n)`.
//!
//! Two families are stateful by construction: one switches its unit radial
//! push on an integer orbit index, the other on whether the argument lies in
//! `{q phi mod 1 : q rational}`. Neither predicate is decidable from a
//! floating-point argument, so the stepper carries the index or the tag as
//! explicit auxiliary state, and radii that move by exact unit steps are
//! tracked as `(base, integer offset)` pairs so lower bounds can be checked
//! with zero tolerance.

use std::collections::BTreeMap;
use std::f64::consts::TAU;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circle::{cis_turns, CirclePoint, RotationNumber};
use crate::conditions::ClosedFormProfile;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SystemsError {
    #[error("unknown family '{0}'")]
    UnknownFamily(String),
    #[error("family '{family}' does not accept parameter '{key}'")]
    UnknownParam { family: String, key: String },
    #[error("family '{family}' requires parameter '{key}'")]
    MissingParam { family: String, key: String },
    #[error("invalid parameter {key} = {value} for family '{family}': {reason}")]
    InvalidParam {
        family: String,
        key: String,
        value: String,
        reason: String,
    },
    #[error("unknown growth function '{0}'; registry offers one-plus-t | exp")]
    UnknownGrowth(String),
    #[error("resonant amplitude must be nonzero")]
    ZeroResonantAmplitude,
    #[error("auxiliary state does not match the family of this system")]
    AuxMismatch,
}

/// Radius of the form `base + offset` with `base` in `[0, 1)` and integer
/// `offset >= 0`; unit radius steps touch only the offset, so comparisons
/// against integer thresholds are exact.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExactRadius {
    pub base: f64,
    pub offset: i64,
}

impl ExactRadius {
    pub fn from_f64(r: f64) -> ExactRadius {
        assert!(r.is_finite() && r >= 0.0, "radius must be finite and >= 0");
        let floor = r.floor();
        // x - floor(x) is exact for doubles below 2^53.
        ExactRadius {
            base: r - floor,
            offset: floor as i64,
        }
    }

    pub fn value(&self) -> f64 {
        self.base + self.offset as f64
    }

    pub fn is_zero(&self) -> bool {
        self.offset == 0 && self.base == 0.0
    }

    /// Exact comparison `radius <= bound` for an integer bound.
    pub fn le_int(&self, bound: i64) -> bool {
        // base <= bound - offset, both sides exact.
        self.base <= (bound - self.offset) as f64
    }

    /// Exact comparison `radius >= bound` for an integer bound.
    pub fn ge_int(&self, bound: i64) -> bool {
        self.base >= (bound - self.offset) as f64
    }

    fn increment(&mut self) {
        self.offset += 1;
    }

    fn decrement(&mut self) {
        debug_assert!(self.offset >= 1);
        self.offset -= 1;
    }

    /// `radius -> 1 - radius`, valid for radius in (0, 1).
    fn flip_within_unit(&mut self) {
        debug_assert!(self.offset == 0 && self.base > 0.0 && self.base < 1.0);
        self.base = 1.0 - self.base;
    }

    /// Annulus index `N` with radius in `(N, N+1]`, for radius > 0.
    fn annulus(&self) -> i64 {
        if self.base == 0.0 {
            self.offset - 1
        } else {
            self.offset
        }
    }
}

/// Whether the argument of the state is known to be a rational multiple of
/// `phi` (mod 1). Carried symbolically: membership is not decidable from a
/// floating-point argument.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ArgumentTag {
    Generic {
        arg_value: CirclePoint,
    },
    RationalMultiple {
        /// Exact `q` with `arg = q * phi mod 1`.
        q: BigRational,
        arg_value: CirclePoint,
    },
}

impl ArgumentTag {
    pub fn arg_value(&self) -> CirclePoint {
        match self {
            ArgumentTag::Generic { arg_value }
            | ArgumentTag::RationalMultiple { arg_value, .. } => *arg_value,
        }
    }

    /// `|arg_value - reduce(phi * q)|` on the circle; only meaningful while
    /// `q` is small enough that `phi * q` is representable without loss.
    pub fn consistency_error(&self, phi: &RotationNumber) -> Option<f64> {
        match self {
            ArgumentTag::Generic { .. } => None,
            ArgumentTag::RationalMultiple { q, arg_value } => {
                let qf = q.to_f64()?;
                let expected = CirclePoint::reduce(phi.value() * qf).ok()?;
                Some(arg_value.distance(expected))
            }
        }
    }
}

/// Per-trajectory auxiliary state threaded through the stepper.
#[derive(Debug, Clone, PartialEq)]
pub enum AuxState {
    Stateless,
    OrbitSwitch {
        /// Orbit index at the current time step.
        k: i64,
        radius: ExactRadius,
        /// Argument in turns; meaningless while the state sits at the origin.
        arg: CirclePoint,
    },
    DecimalWarp {
        radius: ExactRadius,
        tag: ArgumentTag,
    },
}

impl AuxState {
    pub fn exact_radius(&self) -> Option<ExactRadius> {
        match self {
            AuxState::Stateless => None,
            AuxState::OrbitSwitch { radius, .. } => Some(*radius),
            AuxState::DecimalWarp { radius, .. } => Some(*radius),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Statefulness {
    None,
    OrbitIndex,
    ArgumentTag,
}

/// Growth functions offered for the shrinking-drift family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HGrowth {
    OnePlusT,
    Exp,
}

impl HGrowth {
    pub fn eval(self, t: f64) -> f64 {
        match self {
            HGrowth::OnePlusT => 1.0 + t,
            HGrowth::Exp => t.exp(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            HGrowth::OnePlusT => "one-plus-t",
            HGrowth::Exp => "exp",
        }
    }

    pub fn from_name(name: &str) -> Result<HGrowth, SystemsError> {
        match name {
            "one-plus-t" => Ok(HGrowth::OnePlusT),
            "exp" => Ok(HGrowth::Exp),
            other => Err(SystemsError::UnknownGrowth(other.to_string())),
        }
    }
}

/// Perturbation map `f`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum FMap {
    Zero,
    /// `f(z) = c (z/|z|) e(phi)`.
    RadialConst {
        c: f64,
    },
    /// `f(z) = a cos(2 pi arg z) (z/|z|) e(phi)`: drift profile `a cos(2 pi t)`.
    AngularCosine {
        amplitude: f64,
    },
    /// `f(z) = w(arg z) (z/|z|) e(phi)` with `w = -1` below the threshold,
    /// `+1` at or above it: a piecewise-constant drift profile.
    AngularStep {
        threshold: f64,
    },
    /// Unit inward drift on the arc `Arg z in [0, 1e-2025]` (radians),
    /// a clamped `1/ln ln ln (2 + |z|)` outward drift elsewhere, plus a
    /// bounded tangential ripple.
    ThinArcDrift,
    /// Radial pull `-g(|z|)` with `g(t) = t^-alpha` beyond `law_radius` and
    /// constant continuation below it; optional bounded tangential term.
    PowerLaw {
        alpha: f64,
        law_radius: f64,
        tangential: bool,
    },
    /// Unit push outward while `|z| <= k^2` for the carried orbit index `k`,
    /// unit pull inward otherwise; `f(0) = 1`.
    OrbitSwitch {
        k1: i64,
    },
    /// Unit push outward for tagged rational-multiple arguments and inside
    /// the unit disk; otherwise a digit-truncation warp that lands the
    /// argument on a rational multiple of `phi` and pulls the radius in by
    /// one; `f(0) = 1`.
    DecimalWarp,
    /// `f(z) = -(z/|z|) (1 - 1/h(|z|)) e(phi)`: inward drift approaching
    /// unit strength at a rate set by `h`.
    SlowDrift {
        h: HGrowth,
    },
}

/// Forcing sequence `y(n)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ForcingSeq {
    Zero,
    /// `y(n) = c e(n phi)`: aligned with the rotation, never averages out.
    Resonant {
        c_re: f64,
        c_im: f64,
    },
    /// `y(n) = n^{-1/2} e(n phi)`.
    InverseSqrt,
    /// `y(n) = (1 - 1/n^2) e(n phi)`; `y(1) = 0`.
    SaturatingSquare,
}

/// Parameter value in a family descriptor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ParamValue {
    Real(f64),
    Int(i64),
    Flag(bool),
    Name(String),
}

/// Name + parameters + statefulness of a registered family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyDescriptor {
    pub name: String,
    pub params: BTreeMap<String, ParamValue>,
    pub statefulness: Statefulness,
}

/// A complete system: rotation number plus the `f`/`y` pair and declared
/// sup bounds.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SystemSpec {
    pub phi: RotationNumber,
    pub f: FMap,
    pub y: ForcingSeq,
    /// Declared bound on `sup |f|`, when finite and known.
    pub f_sup: Option<f64>,
    /// Declared bound on `sup |y(n)|`, when known.
    pub y_sup: Option<f64>,
}

// sin(3^t) overflows the exponent range near t = 646; beyond this threshold
// a deterministic bounded surrogate stands in (the construction is
// insensitive to the exact tangential values, only to their bound).
const POW3_SIN_LIMIT: f64 = 640.0;

// The inward-drift arc `Arg z in [0, 1e-2025]` has length 1e-2025 / (2 pi)
// turns, which underflows to zero in doubles: only `arg == 0` lands on it.
const THIN_ARC_TURNS: f64 = 0.0;

// Digit cap for the single floating truncation at a warp capture; beyond
// 15 digits a double carries no further information.
const WARP_DIGIT_CAP: i64 = 15;

impl SystemSpec {
    /// Initial auxiliary state for a trajectory started at `x1`. Stateful
    /// families default to a generic argument tag (index `k1` for the
    /// orbit-switch family); use [`SystemSpec::initial_aux_rational`] to
    /// start on a tagged rational-multiple argument.
    pub fn initial_aux(&self, x1: Complex64) -> AuxState {
        match &self.f {
            FMap::OrbitSwitch { k1 } => {
                let radius = ExactRadius::from_f64(x1.norm());
                let arg = CirclePoint::arg_turns(x1).unwrap_or(CirclePoint::ZERO);
                AuxState::OrbitSwitch {
                    k: *k1,
                    radius,
                    arg,
                }
            }
            FMap::DecimalWarp => {
                let radius = ExactRadius::from_f64(x1.norm());
                let arg = CirclePoint::arg_turns(x1).unwrap_or(CirclePoint::ZERO);
                AuxState::DecimalWarp {
                    radius,
                    tag: ArgumentTag::Generic { arg_value: arg },
                }
            }
            _ => AuxState::Stateless,
        }
    }

    /// Start the warp family on a declared rational-multiple argument
    /// `arg = q phi mod 1` with the given radius.
    pub fn initial_aux_rational(
        &self,
        radius: f64,
        q: BigRational,
    ) -> Result<AuxState, SystemsError> {
        match &self.f {
            FMap::DecimalWarp => {
                let qf = q.to_f64().unwrap_or(0.0);
                let arg_value =
                    CirclePoint::reduce(self.phi.value() * qf).unwrap_or(CirclePoint::ZERO);
                Ok(AuxState::DecimalWarp {
                    radius: ExactRadius::from_f64(radius),
                    tag: ArgumentTag::RationalMultiple { q, arg_value },
                })
            }
            _ => Err(SystemsError::AuxMismatch),
        }
    }

    /// One step `x(n) -> x(n+1)`: returns the new state and auxiliary state.
    /// For the exact-tracked families the auxiliary state is authoritative
    /// and `x` is only its floating reconstruction.
    pub fn step_state(
        &self,
        x: Complex64,
        aux: &AuxState,
        n: u64,
    ) -> Result<(Complex64, AuxState), SystemsError> {
        match (&self.f, aux) {
            (FMap::OrbitSwitch { .. }, AuxState::OrbitSwitch { k, radius, arg }) => {
                let (radius, arg) = step_orbit_switch(&self.phi, *k, *radius, *arg);
                let x_next = reconstruct(radius, arg);
                Ok((
                    x_next,
                    AuxState::OrbitSwitch {
                        k: k + 1,
                        radius,
                        arg,
                    },
                ))
            }
            (FMap::DecimalWarp, AuxState::DecimalWarp { radius, tag }) => {
                let (radius, tag) = step_decimal_warp(&self.phi, *radius, tag.clone());
                let x_next = reconstruct(radius, tag.arg_value());
                Ok((x_next, AuxState::DecimalWarp { radius, tag }))
            }
            (FMap::OrbitSwitch { .. }, _) | (FMap::DecimalWarp, _) => {
                Err(SystemsError::AuxMismatch)
            }
            (_, AuxState::Stateless) => {
                let x_next = cis_turns(self.phi.value()) * x + self.eval_f(x) + self.eval_y(n);
                Ok((x_next, AuxState::Stateless))
            }
            (_, _) => Err(SystemsError::AuxMismatch),
        }
    }

    /// Pointwise evaluation of `f`. Stateful families evaluate under their
    /// default tag (orbit index `k1`; generic argument), which is the
    /// reading used for drift-profile extraction and sup spot checks.
    pub fn eval_f(&self, z: Complex64) -> Complex64 {
        let phase = cis_turns(self.phi.value());
        let r = z.norm();
        let zero = Complex64::new(0.0, 0.0);
        match &self.f {
            FMap::Zero => zero,
            FMap::RadialConst { c } => {
                if r == 0.0 {
                    zero
                } else {
                    *c * (z / r) * phase
                }
            }
            FMap::AngularCosine { amplitude } => {
                if r == 0.0 {
                    zero
                } else {
                    let theta = CirclePoint::arg_turns(z).expect("nonzero").value();
                    amplitude * (TAU * theta).cos() * (z / r) * phase
                }
            }
            FMap::AngularStep { threshold } => {
                if r == 0.0 {
                    zero
                } else {
                    let theta = CirclePoint::arg_turns(z).expect("nonzero").value();
                    let w = if theta < *threshold { -1.0 } else { 1.0 };
                    w * (z / r) * phase
                }
            }
            FMap::ThinArcDrift => {
                if r == 0.0 {
                    return zero;
                }
                let theta = CirclePoint::arg_turns(z).expect("nonzero").value();
                let coeff = if theta <= THIN_ARC_TURNS {
                    let arg_radians = theta * TAU;
                    Complex64::new(-1.0, arg_radians.powi(10).sin())
                } else {
                    Complex64::new(clamped_log_drift(r), pow3_sin(r))
                };
                coeff * (z / r) * phase
            }
            FMap::PowerLaw {
                alpha,
                law_radius,
                tangential,
            } => {
                if r == 0.0 {
                    return zero;
                }
                let g = power_law_g(r, *alpha, *law_radius);
                let tau = if *tangential { r.sin() } else { 0.0 };
                Complex64::new(-g, tau) * (z / r) * phase
            }
            FMap::OrbitSwitch { k1 } => {
                if r == 0.0 {
                    return Complex64::new(1.0, 0.0);
                }
                let k = *k1 as f64;
                let sign = if r <= k * k { 1.0 } else { -1.0 };
                sign * (z / r) * phase
            }
            FMap::DecimalWarp => {
                if r == 0.0 {
                    return Complex64::new(1.0, 0.0);
                }
                if r <= 1.0 {
                    return (z / r) * phase;
                }
                // Generic reading: the warp branch.
                let theta = CirclePoint::arg_turns(z).expect("nonzero").value();
                let annulus = (r.ceil() as i64 - 1).max(1);
                let (_, warped) = warp_argument(&self.phi, theta, annulus);
                let unit = z / r;
                (-unit + (r - 1.0) * (warped.to_complex() - unit)) * phase
            }
            FMap::SlowDrift { h } => {
                if r == 0.0 {
                    zero
                } else {
                    -(z / r) * (1.0 - 1.0 / h.eval(r)) * phase
                }
            }
        }
    }

    /// Forcing term `y(n)`, `n >= 1`.
    pub fn eval_y(&self, n: u64) -> Complex64 {
        match &self.y {
            ForcingSeq::Zero => Complex64::new(0.0, 0.0),
            ForcingSeq::Resonant { c_re, c_im } => {
                Complex64::new(*c_re, *c_im) * self.phi.times_mod1(n).to_complex()
            }
            ForcingSeq::InverseSqrt => (n as f64).powf(-0.5) * self.phi.times_mod1(n).to_complex(),
            ForcingSeq::SaturatingSquare => {
                let nf = n as f64;
                (1.0 - 1.0 / (nf * nf)) * self.phi.times_mod1(n).to_complex()
            }
        }
    }

    /// Closed-form limiting drift profile `Phi(theta)`, when the family
    /// declares one.
    pub fn closed_form_profile(&self) -> Option<ClosedFormProfile> {
        match &self.f {
            FMap::Zero => Some(ClosedFormProfile::Const(0.0)),
            FMap::RadialConst { c } => Some(ClosedFormProfile::Const(*c)),
            FMap::AngularCosine { amplitude } => Some(ClosedFormProfile::Cosine {
                amplitude: *amplitude,
            }),
            FMap::AngularStep { threshold } => Some(ClosedFormProfile::Step {
                threshold: *threshold,
            }),
            FMap::ThinArcDrift => Some(ClosedFormProfile::ThinArc),
            // g -> 0, and the tangential term never enters the profile.
            FMap::PowerLaw { .. } => Some(ClosedFormProfile::Const(0.0)),
            // The convergence of these profiles is pointwise-only or
            // measure-theoretically degenerate: no closed form is declared,
            // so certification sees only finite-radius evidence.
            FMap::OrbitSwitch { .. } | FMap::DecimalWarp | FMap::SlowDrift { .. } => None,
        }
    }

    pub fn statefulness(&self) -> Statefulness {
        match &self.f {
            FMap::OrbitSwitch { .. } => Statefulness::OrbitIndex,
            FMap::DecimalWarp => Statefulness::ArgumentTag,
            _ => Statefulness::None,
        }
    }

    pub fn f_descriptor(&self) -> FamilyDescriptor {
        let mut params = BTreeMap::new();
        let name = match &self.f {
            FMap::Zero => "zero",
            FMap::RadialConst { c } => {
                params.insert("c".into(), ParamValue::Real(*c));
                "radial-const"
            }
            FMap::AngularCosine { amplitude } => {
                params.insert("amplitude".into(), ParamValue::Real(*amplitude));
                "cosine-profile"
            }
            FMap::AngularStep { threshold } => {
                params.insert("threshold".into(), ParamValue::Real(*threshold));
                "step-profile"
            }
            FMap::ThinArcDrift => "thin-arc-drift",
            FMap::PowerLaw {
                alpha,
                law_radius,
                tangential,
            } => {
                params.insert("alpha".into(), ParamValue::Real(*alpha));
                params.insert("law_radius".into(), ParamValue::Real(*law_radius));
                params.insert("tangential".into(), ParamValue::Flag(*tangential));
                "power-law"
            }
            FMap::OrbitSwitch { k1 } => {
                params.insert("k1".into(), ParamValue::Int(*k1));
                "ce-orbit-switch"
            }
            FMap::DecimalWarp => "ce-decimal-warp",
            FMap::SlowDrift { h } => {
                params.insert("h".into(), ParamValue::Name(h.name().into()));
                "ce-slow-drift"
            }
        };
        FamilyDescriptor {
            name: name.into(),
            params,
            statefulness: self.statefulness(),
        }
    }

    pub fn y_descriptor(&self) -> FamilyDescriptor {
        let mut params = BTreeMap::new();
        let name = match &self.y {
            ForcingSeq::Zero => "zero",
            ForcingSeq::Resonant { c_re, c_im } => {
                params.insert("c_re".into(), ParamValue::Real(*c_re));
                params.insert("c_im".into(), ParamValue::Real(*c_im));
                "resonant"
            }
            ForcingSeq::InverseSqrt => "inverse-sqrt",
            ForcingSeq::SaturatingSquare => "saturating-square",
        };
        FamilyDescriptor {
            name: name.into(),
            params,
            statefulness: Statefulness::None,
        }
    }
}

fn reconstruct(radius: ExactRadius, arg: CirclePoint) -> Complex64 {
    if radius.is_zero() {
        Complex64::new(0.0, 0.0)
    } else {
        radius.value() * arg.to_complex()
    }
}

/// One exact step of the orbit-switch family. The index `k` belongs to the
/// current time step; the radius moves by exactly one unit except at the
/// origin (push to radius 1) and inside the unit disk under the inward
/// branch, where `r -> 1 - r` carries a half-turn argument flip.
fn step_orbit_switch(
    phi: &RotationNumber,
    k: i64,
    mut radius: ExactRadius,
    arg: CirclePoint,
) -> (ExactRadius, CirclePoint) {
    if radius.is_zero() {
        // f(0) = 1: the next state is exactly 1.
        return (
            ExactRadius {
                base: 0.0,
                offset: 1,
            },
            CirclePoint::ZERO,
        );
    }
    let ksq = k.saturating_mul(k);
    if radius.le_int(ksq) {
        radius.increment();
        (radius, arg.rotate(phi))
    } else if radius.ge_int(1) && !radius.le_int(1) {
        // radius > 1: move inward one unit, argument just rotates.
        radius.decrement();
        (radius, arg.rotate(phi))
    } else if radius.le_int(1) && radius.ge_int(1) {
        // radius == 1 exactly: the inward branch lands on the origin.
        (
            ExactRadius {
                base: 0.0,
                offset: 0,
            },
            CirclePoint::ZERO,
        )
    } else {
        // radius in (0, 1): the inward unit step overshoots the origin,
        // flipping the direction by half a turn.
        radius.flip_within_unit();
        (radius, arg.rotate(phi).offset(0.5))
    }
}

/// One exact step of the decimal-warp family.
fn step_decimal_warp(
    phi: &RotationNumber,
    mut radius: ExactRadius,
    tag: ArgumentTag,
) -> (ExactRadius, ArgumentTag) {
    if radius.is_zero() {
        // f(0) = 1; the origin maps to 1, whose argument is 0 = 0 * phi.
        return (
            ExactRadius {
                base: 0.0,
                offset: 1,
            },
            ArgumentTag::RationalMultiple {
                q: BigRational::zero(),
                arg_value: CirclePoint::ZERO,
            },
        );
    }
    match tag {
        ArgumentTag::RationalMultiple { q, arg_value } => {
            radius.increment();
            (
                radius,
                ArgumentTag::RationalMultiple {
                    q: q + BigRational::one(),
                    arg_value: arg_value.rotate(phi),
                },
            )
        }
        ArgumentTag::Generic { arg_value } if radius.le_int(1) => {
            radius.increment();
            (
                radius,
                ArgumentTag::Generic {
                    arg_value: arg_value.rotate(phi),
                },
            )
        }
        ArgumentTag::Generic { arg_value } => {
            // Capture: radius in (N, N+1] with N >= 1. Truncate arg/phi to
            // N decimal digits (exact rational), pull the radius in by one,
            // and rotate. The new argument is phi * (q_trunc + 1) mod 1.
            let annulus = radius.annulus();
            let (q_trunc, _) = warp_argument(phi, arg_value.value(), annulus);
            radius.decrement();
            let q = q_trunc + BigRational::one();
            let qf = q.to_f64().unwrap_or(0.0);
            let arg_value = CirclePoint::reduce(phi.value() * qf).unwrap_or(CirclePoint::ZERO);
            (radius, ArgumentTag::RationalMultiple { q, arg_value })
        }
    }
}

/// Truncates `t / phi` to `min(annulus, 15)` decimal digits, returning the
/// exact rational `q` and the warped angle `phi * q mod 1`.
fn warp_argument(phi: &RotationNumber, t: f64, annulus: i64) -> (BigRational, CirclePoint) {
    let digits = annulus.clamp(1, WARP_DIGIT_CAP) as u32;
    let u = t / phi.value();
    let whole = u.floor();
    let frac = u - whole;
    let scale_f = 10f64.powi(digits as i32);
    let scaled = (frac * scale_f).floor();
    let q = BigRational::from_integer(BigInt::from(whole as i64))
        + BigRational::new(BigInt::from(scaled as i64), BigInt::from(10u64.pow(digits)));
    let qf = q.to_f64().unwrap_or(0.0);
    let warped = CirclePoint::reduce(phi.value() * qf).unwrap_or(CirclePoint::ZERO);
    (q, warped)
}

/// `g(t) = t^-alpha` beyond the law radius, constant continuation below.
pub fn power_law_g(t: f64, alpha: f64, law_radius: f64) -> f64 {
    if t >= law_radius {
        t.powf(-alpha)
    } else {
        law_radius.powf(-alpha)
    }
}

/// Radial drift `min(1, 1 / ln ln ln(2 + t))` where the iterated logarithm
/// is defined and positive, and 1 otherwise. Keeps the drift bounded while
/// matching the `1 / ln ln ln` tail beyond `t ~ 3.8e6`.
pub fn clamped_log_drift(t: f64) -> f64 {
    let l1 = (2.0 + t).ln();
    if l1 <= 1.0 {
        return 1.0;
    }
    let l2 = l1.ln();
    if l2 <= 0.0 {
        return 1.0;
    }
    let l3 = l2.ln();
    if l3 <= 0.0 {
        return 1.0;
    }
    (1.0 / l3).min(1.0)
}

/// `sin(3^t)` while `3^t` is representable; a deterministic bounded hash
/// surrogate beyond that.
pub fn pow3_sin(t: f64) -> f64 {
    if t <= POW3_SIN_LIMIT {
        3f64.powf(t).sin()
    } else {
        let mut h = t.to_bits().wrapping_mul(0x9e37_79b9_7f4a_7c15);
        h ^= h >> 31;
        h = h.wrapping_mul(0xbf58_476d_1ce4_e5b9);
        h ^= h >> 29;
        (h as f64 / u64::MAX as f64) * 2.0 - 1.0
    }
}

// ---------------------------------------------------------------------------
// Constructors
// ---------------------------------------------------------------------------

/// `f = 0`, `y = 0`: the bare rotation.
pub fn rotation_only(phi: RotationNumber) -> SystemSpec {
    SystemSpec {
        phi,
        f: FMap::Zero,
        y: ForcingSeq::Zero,
        f_sup: Some(0.0),
        y_sup: Some(0.0),
    }
}

/// `f(z) = c (z/|z|) e(phi)`, `y = 0`: constant drift profile `c`.
pub fn radial_const(phi: RotationNumber, c: f64) -> SystemSpec {
    SystemSpec {
        phi,
        f: FMap::RadialConst { c },
        y: ForcingSeq::Zero,
        f_sup: Some(c.abs()),
        y_sup: Some(0.0),
    }
}

/// Cosine drift profile with the given amplitude, `y = 0`.
pub fn cosine_profile(phi: RotationNumber, amplitude: f64) -> SystemSpec {
    SystemSpec {
        phi,
        f: FMap::AngularCosine { amplitude },
        y: ForcingSeq::Zero,
        f_sup: Some(amplitude.abs()),
        y_sup: Some(0.0),
    }
}

/// Piecewise-constant drift profile (-1 below the threshold angle, +1 at or
/// above it), `y = 0`.
pub fn step_profile(phi: RotationNumber, threshold: f64) -> Result<SystemSpec, SystemsError> {
    if !(0.0..=1.0).contains(&threshold) {
        return Err(SystemsError::InvalidParam {
            family: "step-profile".into(),
            key: "threshold".into(),
            value: threshold.to_string(),
            reason: "must lie in [0, 1]".into(),
        });
    }
    Ok(SystemSpec {
        phi,
        f: FMap::AngularStep { threshold },
        y: ForcingSeq::Zero,
        f_sup: Some(1.0),
        y_sup: Some(0.0),
    })
}

/// The thin-arc drift system with forcing `y(n) = n^{-1/2} e(n phi)`.
pub fn thin_arc_drift(phi: RotationNumber) -> SystemSpec {
    SystemSpec {
        phi,
        f: FMap::ThinArcDrift,
        y: ForcingSeq::InverseSqrt,
        // |f|^2 = drift^2 + ripple^2 <= 1 + 1 under the clamp.
        f_sup: Some(2f64.sqrt()),
        y_sup: Some(1.0),
    }
}

/// Power-law radial pull with optional tangential term, `y = 0`.
pub fn power_law(
    phi: RotationNumber,
    alpha: f64,
    law_radius: f64,
    tangential: bool,
) -> Result<SystemSpec, SystemsError> {
    for (key, value) in [("alpha", alpha), ("law_radius", law_radius)] {
        if !(value > 0.0 && value.is_finite()) {
            return Err(SystemsError::InvalidParam {
                family: "power-law".into(),
                key: key.into(),
                value: value.to_string(),
                reason: "must be positive".into(),
            });
        }
    }
    let g_sup = law_radius.powf(-alpha);
    let tau_sup = if tangential { 1.0 } else { 0.0 };
    Ok(SystemSpec {
        phi,
        f: FMap::PowerLaw {
            alpha,
            law_radius,
            tangential,
        },
        y: ForcingSeq::Zero,
        f_sup: Some((g_sup * g_sup + tau_sup * tau_sup).sqrt()),
        y_sup: Some(0.0),
    })
}

/// The orbit-index switching construction; `k1` is the index assigned to
/// the first time step (the decomposition fixes only relative indices).
pub fn orbit_switch(phi: RotationNumber, k1: i64) -> SystemSpec {
    SystemSpec {
        phi,
        f: FMap::OrbitSwitch { k1 },
        y: ForcingSeq::Zero,
        f_sup: Some(1.0),
        y_sup: Some(0.0),
    }
}

/// The decimal-truncation warp construction.
pub fn decimal_warp(phi: RotationNumber) -> SystemSpec {
    // Warp deviation: (|z|-1) |e(warped) - e(arg)| <= 2 pi phi N 10^(1-N),
    // maximal at N = 1; valid for radii reachable at desk scale.
    let f_sup = 1.0 + TAU * phi.value();
    SystemSpec {
        phi,
        f: FMap::DecimalWarp,
        y: ForcingSeq::Zero,
        f_sup: Some(f_sup),
        y_sup: Some(0.0),
    }
}

/// The shrinking-drift construction with `y(n) = (1 - 1/n^2) e(n phi)`.
pub fn slow_drift(phi: RotationNumber, h: HGrowth) -> SystemSpec {
    SystemSpec {
        phi,
        f: FMap::SlowDrift { h },
        y: ForcingSeq::SaturatingSquare,
        f_sup: Some(1.0),
        y_sup: Some(1.0),
    }
}

/// `f = 0`, `y(n) = c e(n phi)` with `c != 0`.
pub fn resonant(phi: RotationNumber, c: Complex64) -> Result<SystemSpec, SystemsError> {
    if c.norm() == 0.0 {
        return Err(SystemsError::ZeroResonantAmplitude);
    }
    Ok(SystemSpec {
        phi,
        f: FMap::Zero,
        y: ForcingSeq::Resonant {
            c_re: c.re,
            c_im: c.im,
        },
        f_sup: Some(0.0),
        y_sup: Some(c.norm()),
    })
}

/// Builds a system from a registry name and a parameter map, rejecting
/// unknown families, unknown keys, and invalid values.
pub fn from_registry(
    name: &str,
    params: &BTreeMap<String, ParamValue>,
    phi: RotationNumber,
) -> Result<SystemSpec, SystemsError> {
    let family = name.to_string();
    let real = |key: &str| -> Result<f64, SystemsError> {
        match params.get(key) {
            Some(ParamValue::Real(v)) => Ok(*v),
            Some(ParamValue::Int(v)) => Ok(*v as f64),
            Some(other) => Err(SystemsError::InvalidParam {
                family: family.clone(),
                key: key.into(),
                value: format!("{other:?}"),
                reason: "expected a real number".into(),
            }),
            None => Err(SystemsError::MissingParam {
                family: family.clone(),
                key: key.into(),
            }),
        }
    };
    let check_keys = |allowed: &[&str]| -> Result<(), SystemsError> {
        for key in params.keys() {
            if !allowed.contains(&key.as_str()) {
                return Err(SystemsError::UnknownParam {
                    family: family.clone(),
                    key: key.clone(),
                });
            }
        }
        Ok(())
    };
    match name {
        "rotation-only" => {
            check_keys(&[])?;
            Ok(rotation_only(phi))
        }
        "radial-const" => {
            check_keys(&["c"])?;
            Ok(radial_const(phi, real("c")?))
        }
        "cosine-profile" => {
            check_keys(&["amplitude"])?;
            Ok(cosine_profile(phi, real("amplitude")?))
        }
        "step-profile" => {
            check_keys(&["threshold"])?;
            step_profile(phi, real("threshold")?)
        }
        "thin-arc-drift" => {
            check_keys(&[])?;
            Ok(thin_arc_drift(phi))
        }
        "power-law" => {
            check_keys(&["alpha", "law_radius", "tangential"])?;
            let tangential = match params.get("tangential") {
                Some(ParamValue::Flag(b)) => *b,
                Some(other) => {
                    return Err(SystemsError::InvalidParam {
                        family,
                        key: "tangential".into(),
                        value: format!("{other:?}"),
                        reason: "expected a flag".into(),
                    })
                }
                None => false,
            };
            power_law(phi, real("alpha")?, real("law_radius")?, tangential)
        }
        "ce-orbit-switch" => {
            check_keys(&["k1"])?;
            let k1 = match params.get("k1") {
                Some(ParamValue::Int(v)) => *v,
                Some(ParamValue::Real(v)) if v.fract() == 0.0 => *v as i64,
                Some(other) => {
                    return Err(SystemsError::InvalidParam {
                        family,
                        key: "k1".into(),
                        value: format!("{other:?}"),
                        reason: "expected an integer".into(),
                    })
                }
                None => 0,
            };
            Ok(orbit_switch(phi, k1))
        }
        "ce-decimal-warp" => {
            check_keys(&[])?;
            Ok(decimal_warp(phi))
        }
        "ce-slow-drift" => {
            check_keys(&["h"])?;
            let h = match params.get("h") {
                Some(ParamValue::Name(s)) => HGrowth::from_name(s)?,
                Some(other) => {
                    return Err(SystemsError::InvalidParam {
                        family,
                        key: "h".into(),
                        value: format!("{other:?}"),
                        reason: "expected a growth-function name".into(),
                    })
                }
                None => HGrowth::OnePlusT,
            };
            Ok(slow_drift(phi, h))
        }
        "resonant" => {
            check_keys(&["c_re", "c_im"])?;
            let c_im = match params.get("c_im") {
                Some(_) => real("c_im")?,
                None => 0.0,
            };
            resonant(phi, Complex64::new(real("c_re")?, c_im))
        }
        other => Err(SystemsError::UnknownFamily(other.to_string())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn golden() -> RotationNumber {
        RotationNumber::golden()
    }

    fn radial_part(spec: &SystemSpec, z: Complex64) -> f64 {
        // Re(f(z) e(-phi) conj(z)/|z|)
        let r = z.norm();
        (spec.eval_f(z) * cis_turns(-spec.phi.value()) * z.conj() / r).re
    }

    #[test]
    fn thin_arc_branches() {
        let spec = thin_arc_drift(golden());
        assert_eq!(spec.eval_f(Complex64::new(0.0, 0.0)).norm(), 0.0);
        // Positive real axis sits on the thin arc: unit inward drift.
        let z = Complex64::new(25.0, 0.0);
        assert!((radial_part(&spec, z) + 1.0).abs() < 1e-12);
        // Off the arc: clamped positive drift.
        let z = 25.0 * cis_turns(0.3);
        let rp = radial_part(&spec, z);
        assert!((rp - 1.0).abs() < 1e-12, "clamp region gives +1, got {rp}");
        // Far out the clamp releases: 1/lnlnln < 1.
        let z = 5.0e8 * cis_turns(0.3);
        let rp = radial_part(&spec, z);
        assert!(rp > 0.0 && rp < 1.0);
    }

    #[test]
    fn power_law_radial_identity() {
        let spec = power_law(golden(), 0.3, 1.0, true).unwrap();
        let z = 100.0 * cis_turns(0.77);
        // Oracle: -100^{-0.3} = -0.251188643150958.
        assert!((radial_part(&spec, z) + 0.251_188_643_150_958).abs() < 1e-12);
        // Below the law radius: constant continuation.
        let spec2 = power_law(golden(), 0.3, 2.0, false).unwrap();
        let z = 0.5 * cis_turns(0.1);
        assert!((radial_part(&spec2, z) + 2f64.powf(-0.3)).abs() < 1e-12);
        // Tangential off: purely radial in the rotated frame.
        let w = spec2.eval_f(z) * cis_turns(-spec2.phi.value()) * z.conj() / z.norm();
        assert!(w.im.abs() < 1e-12);
    }

    #[test]
    fn power_law_rejects_bad_params() {
        assert!(power_law(golden(), 0.0, 1.0, false).is_err());
        assert!(power_law(golden(), 0.3, -1.0, false).is_err());
    }

    #[test]
    fn orbit_switch_trace_from_one_and_a_half() {
        let spec = orbit_switch(golden(), 0);
        let x1 = Complex64::new(1.5, 0.0);
        let mut aux = spec.initial_aux(x1);
        let mut x = x1;
        let mut radii = vec![aux.exact_radius().unwrap().value()];
        for n in 1..=8 {
            let (xn, auxn) = spec.step_state(x, &aux, n).unwrap();
            x = xn;
            aux = auxn;
            radii.push(aux.exact_radius().unwrap().value());
        }
        assert_eq!(radii, vec![1.5, 0.5, 1.5, 2.5, 3.5, 4.5, 5.5, 6.5, 7.5]);
    }

    #[test]
    fn orbit_switch_unit_decrement_is_exact() {
        // |z| > k^2 branch moves the radius in by exactly 1.
        let spec = orbit_switch(golden(), 0);
        let x1 = 7.25 * cis_turns(0.2);
        let aux = spec.initial_aux(x1);
        let (_, aux2) = spec.step_state(x1, &aux, 1).unwrap();
        let r = aux2.exact_radius().unwrap();
        assert_eq!(r.base, 0.25);
        assert_eq!(r.offset, 6);
    }

    #[test]
    fn orbit_switch_origin_and_flip() {
        let spec = orbit_switch(golden(), 0);
        // Integer start: the inward branch walks onto the origin, then
        // f(0) = 1 restarts at radius exactly 1.
        let x1 = Complex64::new(1.0, 0.0);
        let mut aux = spec.initial_aux(x1);
        let mut x = x1;
        let mut radii = vec![1.0];
        for n in 1..=4 {
            let (xn, auxn) = spec.step_state(x, &aux, n).unwrap();
            x = xn;
            aux = auxn;
            radii.push(aux.exact_radius().unwrap().value());
        }
        // 1 -> 0 (origin) -> 1 -> ... k grows, so from there +1 forever.
        assert_eq!(radii, vec![1.0, 0.0, 1.0, 2.0, 3.0]);

        // Start inside the unit disk with k = 0: inward overshoot flips.
        let x1 = 0.25 * cis_turns(0.1);
        let aux = spec.initial_aux(x1);
        let (x2, aux2) = spec.step_state(x1, &aux, 1).unwrap();
        let r = aux2.exact_radius().unwrap();
        assert_eq!(r.value(), 0.75);
        let expected_arg = CirclePoint::reduce(0.1 + golden().value() + 0.5).unwrap();
        assert!(CirclePoint::arg_turns(x2).unwrap().distance(expected_arg) < 1e-12);
    }

    #[test]
    fn decimal_warp_capture_within_two_steps() {
        let spec = decimal_warp(golden());
        for r0 in [0.3, 0.8, 1.0] {
            let x1 = r0 * cis_turns(0.37);
            let mut aux = spec.initial_aux(x1);
            let mut x = x1;
            let mut captured_at = None;
            for n in 1..=30 {
                let (xn, auxn) = spec.step_state(x, &aux, n).unwrap();
                x = xn;
                aux = auxn;
                if captured_at.is_none() {
                    if let AuxState::DecimalWarp {
                        tag: ArgumentTag::RationalMultiple { .. },
                        ..
                    } = &aux
                    {
                        captured_at = Some(n);
                    }
                }
            }
            let captured_at = captured_at.expect("capture must happen");
            assert!(captured_at <= 2, "capture took {captured_at} steps");
            // After capture the radius climbs by exactly 1 per step.
            let r = aux.exact_radius().unwrap();
            assert_eq!(r.base, ExactRadius::from_f64(r0).base);
        }
    }

    #[test]
    fn decimal_warp_rational_tag_invariant() {
        let spec = decimal_warp(golden());
        let aux = spec
            .initial_aux_rational(3.25, BigRational::new(BigInt::from(7), BigInt::from(2)))
            .unwrap();
        let x = 3.25 * cis_turns(spec.phi.value() * 3.5 % 1.0);
        let (_, aux2) = spec.step_state(x, &aux, 1).unwrap();
        match &aux2 {
            AuxState::DecimalWarp {
                radius,
                tag: tag @ ArgumentTag::RationalMultiple { q, .. },
            } => {
                assert_eq!(radius.value(), 4.25);
                assert_eq!(q, &BigRational::new(BigInt::from(9), BigInt::from(2)));
                assert!(tag.consistency_error(&spec.phi).unwrap() < 1e-12);
            }
            other => panic!("expected rational tag, got {other:?}"),
        }
    }

    #[test]
    fn decimal_warp_origin_restart() {
        let spec = decimal_warp(golden());
        let aux = spec.initial_aux(Complex64::new(0.0, 0.0));
        let (x2, aux2) = spec.step_state(Complex64::new(0.0, 0.0), &aux, 1).unwrap();
        assert_eq!(x2, Complex64::new(1.0, 0.0));
        match aux2 {
            AuxState::DecimalWarp {
                radius,
                tag: ArgumentTag::RationalMultiple { q, .. },
            } => {
                assert_eq!(radius.value(), 1.0);
                assert!(q.is_zero());
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn slow_drift_forcing_starts_at_zero() {
        let spec = slow_drift(golden(), HGrowth::OnePlusT);
        assert_eq!(spec.eval_y(1).norm(), 0.0);
        assert!(spec.eval_y(2).norm() > 0.0);
        assert!(HGrowth::from_name("nope").is_err());
    }

    #[test]
    fn resonant_rejects_zero() {
        assert!(resonant(golden(), Complex64::new(0.0, 0.0)).is_err());
    }

    #[test]
    fn registry_round_trip_and_validation() {
        let mut params = BTreeMap::new();
        params.insert("c".to_string(), ParamValue::Real(-1.0));
        let spec = from_registry("radial-const", &params, golden()).unwrap();
        assert_eq!(spec.f_descriptor().name, "radial-const");

        params.insert("bogus".to_string(), ParamValue::Real(1.0));
        assert!(matches!(
            from_registry("radial-const", &params, golden()),
            Err(SystemsError::UnknownParam { .. })
        ));
        assert!(matches!(
            from_registry("no-such-family", &BTreeMap::new(), golden()),
            Err(SystemsError::UnknownFamily(_))
        ));
        assert!(matches!(
            from_registry("resonant", &BTreeMap::new(), golden()),
            Err(SystemsError::MissingParam { .. })
        ));
    }

    #[test]
    fn declared_sup_bounds_hold_on_samples() {
        let phi = golden();
        let specs = vec![
            radial_const(phi.clone(), -1.0),
            cosine_profile(phi.clone(), 0.7),
            step_profile(phi.clone(), 0.37).unwrap(),
            thin_arc_drift(phi.clone()),
            power_law(phi.clone(), 0.3, 1.0, true).unwrap(),
            orbit_switch(phi.clone(), 0),
            decimal_warp(phi.clone()),
            slow_drift(phi.clone(), HGrowth::OnePlusT),
            slow_drift(phi.clone(), HGrowth::Exp),
            resonant(phi, Complex64::new(0.4, -0.3)).unwrap(),
        ];
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for spec in &specs {
            let f_sup = spec.f_sup.expect("all registered families declare F");
            let y_sup = spec.y_sup.expect("all registered families declare Y");
            for _ in 0..100_000 {
                let r = rng.gen_range(-3.0..8.0f64).exp();
                let z = r * cis_turns(rng.gen_range(0.0..1.0));
                let fz = spec.eval_f(z).norm();
                assert!(
                    fz <= f_sup + 1e-9,
                    "{}: |f| = {fz} exceeds declared {f_sup}",
                    spec.f_descriptor().name
                );
                let n = rng.gen_range(1..1_000_000u64);
                let yn = spec.eval_y(n).norm();
                assert!(
                    yn <= y_sup + 1e-9,
                    "{}: |y({n})| = {yn} exceeds declared {y_sup}",
                    spec.y_descriptor().name
                );
            }
        }
    }

    #[test]
    fn exact_radius_representation() {
        let r = ExactRadius::from_f64(7.25);
        assert_eq!(r.base, 0.25);
        assert_eq!(r.offset, 7);
        assert!(r.le_int(8));
        assert!(!r.le_int(7));
        assert!(r.ge_int(7));
        assert!(ExactRadius::from_f64(0.0).is_zero());
        assert_eq!(ExactRadius::from_f64(3.0).annulus(), 2);
        assert_eq!(ExactRadius::from_f64(3.5).annulus(), 3);
    }
}
