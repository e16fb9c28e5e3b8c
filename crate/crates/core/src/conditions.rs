//! Numerical evidence for the boundedness hypotheses: extraction of the
//! radial drift profile `Phi_rho(theta) = Re(conj(f(rho e(theta))) e(phi + theta))`,
//! uniform-convergence gaps across probe radii, Riemann estimates of the
//! mean drift, windowed forcing norms, and the combined certificate.
//!
//! A certificate is finite-horizon evidence, never proof: the uniform
//! convergence of condition-style hypotheses quantifies over all radii and
//! all windows, which no finite computation decides. Grid suprema are lower
//! bounds of true suprema and are reported as such.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circle::{cis_turns, CirclePoint};
use crate::systems::SystemSpec;

/// Window maxima are exact up to this horizon; beyond it the window grid is
/// subsampled and the certificate says so.
pub const WINDOW_EXACT_LIMIT: u64 = 10_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConditionsError {
    #[error("probe radii must be a nonempty increasing positive sequence")]
    BadProbeRadii,
    #[error("grid size must be at least 16, got {0}")]
    GridTooSmall(usize),
    #[error("profile needs at least 2 probe radii for uniform gaps, got {0}")]
    TooFewRadii(usize),
    #[error("forcing window requires 1 <= n1 < n2, got [{n1}, {n2})")]
    BadForcingWindow { n1: u64, n2: u64 },
    #[error("certification needs min_window >= 1 and horizon >= min_window + 1")]
    BadCertifyWindow,
}

/// Closed-form limiting drift profiles declared by families.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ClosedFormProfile {
    Const(f64),
    Cosine {
        amplitude: f64,
    },
    /// `-1` below the threshold angle, `+1` at or above it.
    Step {
        threshold: f64,
    },
    /// `-1` on the vanishingly thin arc at angle zero, `0` elsewhere; the
    /// arc has length 1e-2025/(2 pi) turns, which is zero in doubles.
    ThinArc,
}

impl ClosedFormProfile {
    pub fn eval(&self, theta: f64) -> f64 {
        match self {
            ClosedFormProfile::Const(c) => *c,
            ClosedFormProfile::Cosine { amplitude } => {
                amplitude * (std::f64::consts::TAU * theta).cos()
            }
            ClosedFormProfile::Step { threshold } => {
                if theta < *threshold {
                    -1.0
                } else {
                    1.0
                }
            }
            ClosedFormProfile::ThinArc => {
                if theta <= 0.0 {
                    -1.0
                } else {
                    0.0
                }
            }
        }
    }
}

/// Sampled drift profile across probe radii.
///
/// The grid sits at cell midpoints `(j + 1/2) / G`, so the row mean is the
/// midpoint Riemann rule. `reference` is the declared closed form when the
/// family has one, otherwise a copy of the largest-radius row; `integral`
/// and `sup_abs` are read from it. Uniform gaps are always measured against
/// the largest-radius row, which tracks convergence between probes.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DriftProfile {
    pub grid: Vec<CirclePoint>,
    pub probe_radii: Vec<f64>,
    pub rows: Vec<Vec<f64>>,
    pub reference: Vec<f64>,
    pub reference_is_closed_form: bool,
    /// Grid sup of `|reference|` (a lower bound for the true sup).
    pub sup_abs: f64,
    /// Midpoint-rule estimate of the mean drift over the circle.
    pub integral: f64,
    /// `|estimate(G) - estimate(G/2)|` via the even-index subsample.
    pub refinement_error: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

/// Finite-horizon certificate for the boundedness hypotheses.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConditionCertificate {
    pub profile: DriftProfile,
    /// Per-probe-radius sup deviation from the largest-radius row.
    pub uniform_gaps: Vec<f64>,
    pub integral: f64,
    /// Max over windows of the forcing norm, plus the drift integral.
    pub beta_estimate: f64,
    pub min_window: u64,
    pub horizon: u64,
    /// Whether the window maximum enumerated every window exactly.
    pub window_max_exact: bool,
    pub verdict: Verdict,
}

/// Samples `Phi_rho(theta)` for each probe radius over a midpoint grid.
pub fn drift_profile(
    spec: &SystemSpec,
    probe_radii: &[f64],
    grid_size: usize,
) -> Result<DriftProfile, ConditionsError> {
    if probe_radii.is_empty()
        || probe_radii.windows(2).any(|w| w[0] >= w[1])
        || probe_radii[0] <= 0.0
        || probe_radii.iter().any(|r| !r.is_finite())
    {
        return Err(ConditionsError::BadProbeRadii);
    }
    if grid_size < 16 {
        return Err(ConditionsError::GridTooSmall(grid_size));
    }
    let grid: Vec<CirclePoint> = (0..grid_size)
        .map(|j| {
            CirclePoint::reduce((j as f64 + 0.5) / grid_size as f64).expect("midpoint is finite")
        })
        .collect();
    let rows: Vec<Vec<f64>> = probe_radii
        .iter()
        .map(|&rho| {
            grid.iter()
                .map(|theta| drift_sample(spec, rho, *theta))
                .collect()
        })
        .collect();
    let closed = spec.closed_form_profile();
    let reference: Vec<f64> = match &closed {
        Some(profile) => grid.iter().map(|t| profile.eval(t.value())).collect(),
        None => rows.last().expect("nonempty radii").clone(),
    };
    let integral = mean(&reference);
    let even_subsample: Vec<f64> = reference.iter().step_by(2).copied().collect();
    let refinement_error = (integral - mean(&even_subsample)).abs();
    let sup_abs = reference.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    Ok(DriftProfile {
        grid,
        probe_radii: probe_radii.to_vec(),
        rows,
        reference,
        reference_is_closed_form: closed.is_some(),
        sup_abs,
        integral,
        refinement_error,
    })
}

/// `Phi_rho(theta) = Re(conj(f(rho e(theta))) e(phi + theta))`.
pub fn drift_sample(spec: &SystemSpec, rho: f64, theta: CirclePoint) -> f64 {
    let z = rho * theta.to_complex();
    let f = spec.eval_f(z);
    (f.conj() * cis_turns(spec.phi.value() + theta.value())).re
}

/// Sup over the grid of `|Phi_rho - Phi_ref|` per probe radius, measured
/// against the largest-radius row. Grid suprema are lower bounds of the
/// true suprema.
pub fn uniform_gap(profile: &DriftProfile) -> Result<Vec<f64>, ConditionsError> {
    if profile.rows.len() < 2 {
        return Err(ConditionsError::TooFewRadii(profile.rows.len()));
    }
    let last = profile.rows.last().expect("nonempty");
    Ok(profile
        .rows
        .iter()
        .map(|row| {
            row.iter()
                .zip(last)
                .fold(0.0f64, |acc, (a, b)| acc.max((a - b).abs()))
        })
        .collect())
}

/// Midpoint-rule estimate of the mean of the reference profile.
pub fn riemann_integral(profile: &DriftProfile) -> f64 {
    profile.integral
}

/// `(1 / (n2 - n1)) |sum_{n = n1}^{n2 - 1} y(n) e(-n phi)|`.
pub fn forcing_window_norm(spec: &SystemSpec, n1: u64, n2: u64) -> Result<f64, ConditionsError> {
    if !(1 <= n1 && n1 < n2) {
        return Err(ConditionsError::BadForcingWindow { n1, n2 });
    }
    let mut sum = Complex64::new(0.0, 0.0);
    for n in n1..n2 {
        sum += spec.eval_y(n) * spec.phi.times_mod1(n).to_complex().conj();
    }
    Ok(sum.norm() / (n2 - n1) as f64)
}

/// Certifies the hypotheses over a finite horizon: the drift integral from
/// the profile, the maximum windowed forcing norm over all windows of
/// length at least `min_window` within `[1, horizon]`, and the uniform-gap
/// trend. `pass` requires a strictly negative combined estimate and
/// nonincreasing gaps; a strictly positive estimate fails; anything else is
/// inconclusive.
pub fn certify_conditions(
    spec: &SystemSpec,
    min_window: u64,
    horizon: u64,
    probe_radii: &[f64],
    grid_size: usize,
) -> Result<ConditionCertificate, ConditionsError> {
    if min_window < 1 || horizon < min_window + 1 {
        return Err(ConditionsError::BadCertifyWindow);
    }
    let profile = drift_profile(spec, probe_radii, grid_size)?;
    let uniform_gaps = uniform_gap(&profile)?;
    let (window_max, window_max_exact) = max_window_norm(spec, min_window, horizon);
    let integral = profile.integral;
    let beta_estimate = window_max + integral;

    let gaps_nonincreasing = uniform_gaps.windows(2).all(|w| w[1] <= w[0] + 1e-12);
    let verdict = if beta_estimate > 0.0 {
        Verdict::Fail
    } else if beta_estimate < 0.0 && gaps_nonincreasing {
        Verdict::Pass
    } else {
        Verdict::Inconclusive
    };
    Ok(ConditionCertificate {
        profile,
        uniform_gaps,
        integral,
        beta_estimate,
        min_window,
        horizon,
        window_max_exact,
        verdict,
    })
}

/// Maximum of the windowed forcing norm over all windows `[n1, n2)` inside
/// `[1, horizon]` with `n2 - n1 >= min_window`, by prefix sums. Exact up to
/// [`WINDOW_EXACT_LIMIT`]; subsampled endpoints beyond.
fn max_window_norm(spec: &SystemSpec, min_window: u64, horizon: u64) -> (f64, bool) {
    // prefix[j] = sum_{n=1}^{j} y(n) e(-n phi); window [n1, n2) has sum
    // prefix[n2 - 1] - prefix[n1 - 1].
    let mut prefix = Vec::with_capacity(horizon as usize + 1);
    prefix.push(Complex64::new(0.0, 0.0));
    let mut acc = Complex64::new(0.0, 0.0);
    for n in 1..=horizon {
        acc += spec.eval_y(n) * spec.phi.times_mod1(n).to_complex().conj();
        prefix.push(acc);
    }
    let exact = horizon <= WINDOW_EXACT_LIMIT;
    let step = if exact {
        1
    } else {
        (horizon / WINDOW_EXACT_LIMIT + 1) as usize
    };
    let indices: Vec<u64> = (1..=horizon).step_by(step).chain([horizon]).collect();
    let mut best = 0.0f64;
    for (i, &n1) in indices.iter().enumerate() {
        for &n2 in &indices[i..] {
            if n2 - n1 >= min_window && n2 > n1 {
                let norm =
                    (prefix[n2 as usize - 1] - prefix[n1 as usize - 1]).norm() / (n2 - n1) as f64;
                best = best.max(norm);
            }
        }
    }
    (best, exact)
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::systems;
    use crate::RotationNumber;
    use num_complex::Complex64;

    fn golden() -> RotationNumber {
        RotationNumber::golden()
    }

    #[test]
    fn profile_of_power_law_is_constant_in_theta() {
        let spec = systems::power_law(golden(), 0.3, 1.0, true).unwrap();
        let profile = drift_profile(&spec, &[10.0, 100.0], 64).unwrap();
        for v in &profile.rows[1] {
            // Oracle: -100^{-0.3}.
            assert!((v + 0.251_188_643_150_958).abs() < 1e-12);
        }
        // Closed form declares the limit 0.
        assert!(profile.reference_is_closed_form);
        assert_eq!(profile.integral, 0.0);
    }

    #[test]
    fn profile_of_unit_inward_drift() {
        let spec = systems::radial_const(golden(), -1.0);
        let profile = drift_profile(&spec, &[5.0, 50.0], 64).unwrap();
        for row in &profile.rows {
            for v in row {
                assert!((v + 1.0).abs() < 1e-12);
            }
        }
        assert_eq!(riemann_integral(&profile), -1.0);
        assert_eq!(profile.sup_abs, 1.0);
        let gaps = uniform_gap(&profile).unwrap();
        assert!(gaps.iter().all(|g| *g < 1e-12));
    }

    #[test]
    fn profile_of_zero_map() {
        let spec = systems::rotation_only(golden());
        let profile = drift_profile(&spec, &[1.0, 2.0], 32).unwrap();
        assert!(profile.rows.iter().flatten().all(|v| *v == 0.0));
        assert_eq!(profile.integral, 0.0);
    }

    #[test]
    fn profile_rejects_bad_input() {
        let spec = systems::rotation_only(golden());
        assert!(drift_profile(&spec, &[], 64).is_err());
        assert!(drift_profile(&spec, &[2.0, 1.0], 64).is_err());
        assert!(drift_profile(&spec, &[1.0, 2.0], 8).is_err());
        let p = drift_profile(&spec, &[1.0], 64).unwrap();
        assert!(uniform_gap(&p).is_err());
    }

    #[test]
    fn uniform_gap_power_law_closed_form() {
        // Against the largest-radius row: gap(rho) = rho^-a - rho_ref^-a.
        let spec = systems::power_law(golden(), 0.3, 1.0, false).unwrap();
        let profile = drift_profile(&spec, &[50.0, 100.0], 64).unwrap();
        let gaps = uniform_gap(&profile).unwrap();
        let expected = 50f64.powf(-0.3) - 100f64.powf(-0.3);
        assert!((gaps[0] - expected).abs() < 1e-12);
        assert!(gaps[1] == 0.0);
    }

    #[test]
    fn uniform_gap_slow_drift_matches_h_rate() {
        let spec = systems::slow_drift(golden(), systems::HGrowth::OnePlusT);
        let radii = [4.0, 16.0, 64.0, 256.0];
        let profile = drift_profile(&spec, &radii, 64).unwrap();
        let gaps = uniform_gap(&profile).unwrap();
        let h = |t: f64| 1.0 + t;
        for (i, &rho) in radii.iter().enumerate() {
            let expected = 1.0 / h(rho) - 1.0 / h(radii[3]);
            assert!(
                (gaps[i] - expected).abs() < 1e-12,
                "rho = {rho}: gap {} vs {expected}",
                gaps[i]
            );
        }
    }

    #[test]
    fn riemann_cosine_integrates_to_zero() {
        let spec = systems::cosine_profile(golden(), 1.0);
        let profile = drift_profile(&spec, &[3.0, 9.0], 4096).unwrap();
        assert!(riemann_integral(&profile).abs() < 1e-12);
    }

    #[test]
    fn riemann_thin_arc_limit_vanishes() {
        // The inward arc has length 1e-2025/(2 pi) turns: zero in doubles.
        let spec = systems::thin_arc_drift(golden());
        let profile = drift_profile(&spec, &[1e7, 1e8], 256).unwrap();
        assert!(profile.reference_is_closed_form);
        assert_eq!(riemann_integral(&profile), 0.0);
    }

    #[test]
    fn refinement_error_shrinks_with_grid() {
        let spec = systems::step_profile(golden(), 0.37).unwrap();
        let coarse = drift_profile(&spec, &[2.0, 4.0], 256).unwrap();
        let fine = drift_profile(&spec, &[2.0, 4.0], 512).unwrap();
        assert!(fine.refinement_error <= coarse.refinement_error + 1e-14);

        let spec = systems::cosine_profile(golden(), 1.0);
        let coarse = drift_profile(&spec, &[2.0, 4.0], 256).unwrap();
        let fine = drift_profile(&spec, &[2.0, 4.0], 512).unwrap();
        assert!(fine.refinement_error <= coarse.refinement_error + 1e-14);
    }

    #[test]
    fn forcing_window_examples() {
        let phi = golden();
        let zero = systems::rotation_only(phi.clone());
        assert_eq!(forcing_window_norm(&zero, 5, 25).unwrap(), 0.0);

        let res = systems::resonant(phi.clone(), Complex64::new(1.0, 0.0)).unwrap();
        for (n1, n2) in [(1u64, 2u64), (10, 50), (100, 1000)] {
            let norm = forcing_window_norm(&res, n1, n2).unwrap();
            assert!(
                (norm - 1.0).abs() < 1e-12,
                "window [{n1}, {n2}) gave {norm}"
            );
        }

        // Frozen oracle: (1/100) sum_{n=100}^{199} n^{-1/2}.
        let sqrt = systems::thin_arc_drift(phi);
        let norm = forcing_window_norm(&sqrt, 100, 200).unwrap();
        assert!(
            (norm - 0.082_989_428_434_405_75).abs() < 1e-12,
            "got {norm}"
        );

        assert!(forcing_window_norm(&zero, 5, 5).is_err());
        assert!(forcing_window_norm(&zero, 0, 5).is_err());
    }

    #[test]
    fn certify_unit_inward_drift_passes() {
        let spec = systems::radial_const(golden(), -1.0);
        let cert = certify_conditions(&spec, 1, 200, &[10.0, 100.0], 64).unwrap();
        assert_eq!(cert.integral, -1.0);
        assert_eq!(cert.beta_estimate, -1.0);
        assert_eq!(cert.verdict, Verdict::Pass);
        assert!(cert.window_max_exact);
    }

    #[test]
    fn certify_power_law_is_inconclusive() {
        let spec = systems::power_law(golden(), 0.3, 1.0, true).unwrap();
        let cert = certify_conditions(&spec, 1, 200, &[10.0, 100.0, 1000.0], 64).unwrap();
        assert_eq!(cert.beta_estimate, 0.0);
        assert_eq!(cert.verdict, Verdict::Inconclusive);
    }

    #[test]
    fn certify_resonant_fails() {
        let spec = systems::resonant(golden(), Complex64::new(1.0, 0.0)).unwrap();
        let cert = certify_conditions(&spec, 2, 300, &[5.0, 50.0], 64).unwrap();
        assert!((cert.beta_estimate - 1.0).abs() < 1e-12);
        assert_eq!(cert.verdict, Verdict::Fail);
    }

    #[test]
    fn beta_estimate_monotone_in_min_window() {
        let phi = golden();
        for spec in [
            systems::thin_arc_drift(phi.clone()),
            systems::slow_drift(phi, systems::HGrowth::OnePlusT),
        ] {
            let mut last = f64::INFINITY;
            for d0 in [1u64, 2, 5, 10, 40] {
                let cert = certify_conditions(&spec, d0, 400, &[10.0, 100.0], 32).unwrap();
                assert!(
                    cert.beta_estimate <= last + 1e-12,
                    "window floor {d0} raised the estimate"
                );
                last = cert.beta_estimate;
            }
        }
    }

    #[test]
    fn certify_validates_windows() {
        let spec = systems::rotation_only(golden());
        assert!(certify_conditions(&spec, 0, 10, &[1.0, 2.0], 32).is_err());
        assert!(certify_conditions(&spec, 10, 10, &[1.0, 2.0], 32).is_err());
    }
}
