//! Explicit boundedness envelopes.
//!
//! [`quantitative_envelope`] assembles the dense-orbit horizon `N_d`, the
//! height `H`, and the final bound `L = H + (3 N_d + 2)(F + Y) / 2` from the
//! supplied constants and a covering oracle, auditing which constraint was
//! binding. [`powerlaw_envelope`] runs the halving scan over `beta = -2^-j`
//! for systems whose radial pull is a power law, accepting the first
//! candidate whose bound is self-consistent.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circle::RotationNumber;
use crate::ergodic::{self, ErgodicError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EnvelopeError {
    #[error("f_sup and y_sup must be nonnegative with f_sup + y_sup > 0")]
    NoForcingAmplitude,
    #[error("beta must be strictly negative, got {0}")]
    BetaNotNegative(f64),
    #[error("epsilon must lie in (0, min(1, |beta|/16)) = (0, {limit}), got {epsilon}")]
    EpsilonOutOfRange { epsilon: f64, limit: f64 },
    #[error(
        "epsilon must stay below 1/2 so the covering target 1 - 2 epsilon is positive, got {0}"
    )]
    EpsilonCoversNothing(f64),
    #[error("delta_star must lie in (0, 1], got {0}")]
    DeltaStarOutOfRange(f64),
    #[error("delta_star must stay below |beta| / (8 y_sup) = {limit}, got {delta_star}")]
    DeltaStarTooLarge { delta_star: f64, limit: f64 },
    #[error("min_window must be at least 1")]
    MinWindowZero,
    #[error("start_radius and profile_radius must be nonnegative and finite")]
    BadRadiusInput,
    #[error("power-law hypothesis alpha (1 + 1/gamma) < 1 violated: {value}")]
    HypothesisViolated { value: f64 },
    #[error("power-law parameters must be positive and finite")]
    BadPowerLawParams,
    #[error("beta scan exhausted after {evaluated} candidates without acceptance")]
    ScanExhausted { evaluated: usize },
    #[error("covering oracle failed: {0}")]
    Covering(String),
}

impl From<ErgodicError> for EnvelopeError {
    fn from(e: ErgodicError) -> Self {
        EnvelopeError::Covering(e.to_string())
    }
}

/// Inputs to the quantitative envelope.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct EnvelopeInput {
    /// `F = sup |f|`.
    pub f_sup: f64,
    /// `Y = sup |y(n)|`.
    pub y_sup: f64,
    /// The negative drift margin from the windowed-forcing condition.
    pub beta: f64,
    /// Profile-continuity tolerance, in `(0, min(1, |beta|/16))`.
    pub epsilon: f64,
    /// Continuity radius paired with `epsilon`; supplied by the caller
    /// (see [`delta_star_for_lipschitz`] and
    /// [`delta_star_for_constant_profile`]).
    pub delta_star: f64,
    /// Minimum window length `D_0` of the forcing condition.
    pub min_window: u64,
    /// Radius beyond which the drift profile is `epsilon`-uniform.
    pub profile_radius: f64,
    /// `|x(1)|`.
    pub start_radius: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NdSource {
    MinWindow,
    Covering,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HeightSource {
    DriftFloor,
    DensityFloor,
    StartRadius,
    ProfileRadius,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DeltaStarNote {
    Checked,
    /// `y_sup = 0` leaves the `|beta| / (8 Y)` cap vacuous.
    VacuousZeroForcing,
}

/// Which constraint produced each maximum, plus the constraint values.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EnvelopeAudit {
    pub n_dense_source: NdSource,
    pub covering_n: u64,
    pub height_source: HeightSource,
    pub drift_floor: f64,
    pub density_floor: f64,
    pub start_radius: f64,
    pub profile_radius: f64,
    pub delta_star_note: DeltaStarNote,
    /// The supplied delta_star is assumed valid for the true profile; the
    /// envelope is conditional on that assumption.
    pub delta_star_assumed_valid: bool,
}

/// The assembled envelope: `bound = height + (3 n_dense + 2)(F + Y) / 2`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EnvelopeReport {
    pub n_dense: u64,
    pub height: f64,
    pub bound: f64,
    pub audit: EnvelopeAudit,
}

/// `delta_star = epsilon / modulus` for a profile with Lipschitz modulus.
pub fn delta_star_for_lipschitz(epsilon: f64, modulus: f64) -> f64 {
    epsilon / modulus
}

/// Any `delta_star` works for a constant profile; this default mirrors the
/// power-law scan's choice.
pub fn delta_star_for_constant_profile(beta: f64, y_sup: f64) -> f64 {
    beta.abs() / (16.0 * (y_sup + 1.0))
}

/// A covering oracle backed by the rotation's orbit.
pub fn rotation_cover(
    phi: &RotationNumber,
) -> impl Fn(f64, f64) -> Result<u64, EnvelopeError> + '_ {
    move |delta, min_measure| Ok(ergodic::covering_number(phi, delta, min_measure)?.result_n)
}

/// Assembles the envelope from validated inputs and a covering oracle.
pub fn quantitative_envelope(
    input: &EnvelopeInput,
    cover: impl Fn(f64, f64) -> Result<u64, EnvelopeError>,
) -> Result<EnvelopeReport, EnvelopeError> {
    let EnvelopeInput {
        f_sup,
        y_sup,
        beta,
        epsilon,
        delta_star,
        min_window,
        profile_radius,
        start_radius,
    } = *input;
    if !(f_sup >= 0.0 && y_sup >= 0.0 && f_sup + y_sup > 0.0) {
        return Err(EnvelopeError::NoForcingAmplitude);
    }
    if !(beta < 0.0 && beta.is_finite()) {
        return Err(EnvelopeError::BetaNotNegative(beta));
    }
    let eps_limit = (beta.abs() / 16.0).min(1.0);
    if !(epsilon > 0.0 && epsilon < eps_limit) {
        return Err(EnvelopeError::EpsilonOutOfRange {
            epsilon,
            limit: eps_limit,
        });
    }
    if epsilon >= 0.5 {
        return Err(EnvelopeError::EpsilonCoversNothing(epsilon));
    }
    if !(delta_star > 0.0 && delta_star <= 1.0) {
        return Err(EnvelopeError::DeltaStarOutOfRange(delta_star));
    }
    let delta_star_note = if y_sup == 0.0 {
        DeltaStarNote::VacuousZeroForcing
    } else {
        let limit = beta.abs() / (8.0 * y_sup);
        if delta_star >= limit {
            return Err(EnvelopeError::DeltaStarTooLarge { delta_star, limit });
        }
        DeltaStarNote::Checked
    };
    if min_window < 1 {
        return Err(EnvelopeError::MinWindowZero);
    }
    if !(start_radius >= 0.0 && start_radius.is_finite())
        || !(profile_radius >= 0.0 && profile_radius.is_finite())
    {
        return Err(EnvelopeError::BadRadiusInput);
    }

    let covering_n = cover(delta_star / 2.0, 1.0 - 2.0 * epsilon)?;
    let (n_dense, n_dense_source) = if min_window + 1 >= covering_n {
        (min_window + 1, NdSource::MinWindow)
    } else {
        (covering_n, NdSource::Covering)
    };

    let amplitude = f_sup + y_sup;
    let drift_floor = 16.0 * amplitude * amplitude / beta.abs();
    let density_floor = 2.0 * amplitude * n_dense as f64 / delta_star;
    let candidates = [
        (HeightSource::DriftFloor, drift_floor),
        (HeightSource::DensityFloor, density_floor),
        (HeightSource::StartRadius, start_radius),
        (HeightSource::ProfileRadius, profile_radius),
    ];
    let (height_source, height) = candidates
        .into_iter()
        .reduce(|best, cur| if cur.1 > best.1 { cur } else { best })
        .expect("nonempty");

    let bound = height + (3 * n_dense + 2) as f64 * amplitude / 2.0;
    Ok(EnvelopeReport {
        n_dense,
        height,
        bound,
        audit: EnvelopeAudit {
            n_dense_source,
            covering_n,
            height_source,
            drift_floor,
            density_floor,
            start_radius,
            profile_radius,
            delta_star_note,
            delta_star_assumed_valid: true,
        },
    })
}

/// Parameters of a power-law system: radial pull `g(t) = t^-alpha` beyond
/// `law_radius`, forcing windows bounded by
/// `|sum y(n) e(-n phi)| <= forcing_scale (n2 - n1)^{1 - gamma}`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct PowerLawParams {
    pub alpha: f64,
    pub gamma: f64,
    pub forcing_scale: f64,
    pub law_radius: f64,
    pub f_sup: f64,
    pub y_sup: f64,
    pub start_radius: f64,
}

impl PowerLawParams {
    fn validate(&self) -> Result<(), EnvelopeError> {
        let positive = [self.alpha, self.gamma, self.forcing_scale, self.law_radius];
        if positive.iter().any(|v| !(v.is_finite() && *v > 0.0))
            || !(self.f_sup >= 0.0 && self.y_sup >= 0.0 && self.f_sup + self.y_sup > 0.0)
            || !(self.start_radius >= 0.0 && self.start_radius.is_finite())
        {
            return Err(EnvelopeError::BadPowerLawParams);
        }
        let value = self.alpha * (1.0 + 1.0 / self.gamma);
        if value >= 1.0 {
            return Err(EnvelopeError::HypothesisViolated { value });
        }
        Ok(())
    }
}

/// One scan candidate at a fixed `beta`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PowerLawCandidate {
    pub beta: f64,
    pub delta_star: f64,
    pub epsilon: f64,
    /// Window floor `D` with `D = floor((K/|beta|)^{1/gamma}) + 1`.
    pub window_floor: u64,
    pub n_dense: u64,
    pub height: f64,
    pub bound: f64,
    pub g_height: f64,
    pub g_bound: f64,
    pub accepted: bool,
    pub reject_reason: Option<String>,
}

/// Scan result: the accepted `beta` and bound, plus the full audit log.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PowerLawReport {
    pub beta0: f64,
    pub bound_at_beta0: f64,
    pub scan: Vec<PowerLawCandidate>,
}

/// Evaluates one candidate `beta < 0` of the power-law scan. The covering
/// number is 1 for every candidate: the single ball has measure
/// `delta_star > 2 epsilon = 1 - (1 - 2 epsilon)` by construction.
pub fn powerlaw_candidate(params: &PowerLawParams, beta: f64) -> PowerLawCandidate {
    let ab = beta.abs();
    let delta_star = ab / (16.0 * (params.y_sup + 1.0));
    let epsilon = (ab / 32.0).min(delta_star / 4.0);
    let window_floor = (params.forcing_scale / ab).powf(1.0 / params.gamma).floor() as u64 + 1;
    let n_dense = window_floor + 1;
    let amplitude = params.f_sup + params.y_sup;
    let height = (16.0 * amplitude * amplitude / ab)
        .max(2.0 * amplitude * n_dense as f64 / delta_star)
        .max(params.start_radius);
    let bound = height + (3 * n_dense + 2) as f64 * amplitude / 2.0;
    // The exact t^-alpha branch; meaningful once height >= law_radius.
    let g_height = height.powf(-params.alpha);
    let g_bound = bound.powf(-params.alpha);

    let mut reject_reason = None;
    if height < params.law_radius {
        reject_reason = Some(format!(
            "height {height} below law radius {}",
            params.law_radius
        ));
    } else if g_bound <= 2.0 * ab {
        reject_reason = Some(format!(
            "g(bound) = {g_bound} not above 2|beta| = {}",
            2.0 * ab
        ));
    } else if (g_height - g_bound).abs() >= epsilon {
        reject_reason = Some(format!(
            "profile variation {} not below epsilon {epsilon}",
            (g_height - g_bound).abs()
        ));
    }
    PowerLawCandidate {
        beta,
        delta_star,
        epsilon,
        window_floor,
        n_dense,
        height,
        bound,
        g_height,
        g_bound,
        accepted: reject_reason.is_none(),
        reject_reason,
    }
}

/// Halving scan `beta = -2^-j`, `j = 1, 2, ...`: the acceptance region is a
/// one-sided neighborhood of zero, so the first accepted candidate is
/// returned with the full log.
pub fn powerlaw_envelope(params: &PowerLawParams) -> Result<PowerLawReport, EnvelopeError> {
    params.validate()?;
    let mut scan = Vec::new();
    for j in 1..=60 {
        let beta = -(2.0f64.powi(-j));
        let candidate = powerlaw_candidate(params, beta);
        let accepted = candidate.accepted;
        scan.push(candidate);
        if accepted {
            let last = scan.last().expect("just pushed");
            return Ok(PowerLawReport {
                beta0: last.beta,
                bound_at_beta0: last.bound,
                scan,
            });
        }
    }
    Err(EnvelopeError::ScanExhausted {
        evaluated: scan.len(),
    })
}
