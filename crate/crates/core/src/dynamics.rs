//! Trajectory iteration and drift diagnostics for
//! `x(n+1) = e(phi) x(n) + f(x(n)) + y(n)`.
//!
//! Indices are 1-based: a trajectory of length `L` records `x(1) ..= x(L)`
//! after `L - 1` steps. States may be stride-sampled to keep memory at
//! `O(L / stride)`; the sup radius is tracked over every step regardless,
//! while the per-index diagnostics require full sampling.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circle::CirclePoint;
use crate::systems::{AuxState, ExactRadius, SystemSpec, SystemsError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DynamicsError {
    #[error("trajectory length must be at least 1")]
    EmptyTrajectory,
    #[error("sample stride must be at least 1")]
    ZeroStride,
    #[error("state became non-finite at index {index}")]
    NonFinite { index: u64 },
    #[error("operation requires a fully sampled trajectory (stride 1), got stride {0}")]
    NeedsFullSampling(u64),
    #[error("window [{n1}, {n2}] is not within 1..={length} or not increasing")]
    BadWindow { n1: u64, n2: u64, length: u64 },
    #[error("index {n} is not sampled (stride {stride})")]
    NotSampled { n: u64, stride: u64 },
    #[error("annulus parameters must be positive: low {low}, width {width}")]
    BadAnnulus { low: f64, width: f64 },
    #[error("probe bound must be positive, got {0}")]
    BadProbeBound(f64),
    #[error(transparent)]
    Family(#[from] SystemsError),
}

/// Recorded trajectory. `states`, `radius_track`, `arg_track` (and
/// `exact_radii` for exact-tracked families) are parallel arrays over the
/// sampled indices `1, 1 + stride, 1 + 2 stride, ...`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Trajectory {
    pub start: Complex64,
    pub stride: u64,
    pub length: u64,
    pub sampled_indices: Vec<u64>,
    pub states: Vec<Complex64>,
    pub radius_track: Vec<f64>,
    pub arg_track: Vec<CirclePoint>,
    /// Exact `(base, offset)` radii for unit-step families.
    pub exact_radii: Option<Vec<ExactRadius>>,
    /// Effective per-step increments `x(n+1) - e(phi) x(n)`, recorded only
    /// at stride 1 (entries for `n = 1 ..= length-1`).
    #[serde(skip)]
    pub increments: Option<Vec<Complex64>>,
    /// Max radius over every step, sampled or not.
    pub sup_radius: f64,
}

impl Trajectory {
    /// Radius at index `n`, if sampled.
    pub fn radius_at(&self, n: u64) -> Result<f64, DynamicsError> {
        if n < 1 || n > self.length {
            return Err(DynamicsError::BadWindow {
                n1: n,
                n2: n,
                length: self.length,
            });
        }
        if !(n - 1).is_multiple_of(self.stride) {
            return Err(DynamicsError::NotSampled {
                n,
                stride: self.stride,
            });
        }
        Ok(self.radius_track[((n - 1) / self.stride) as usize])
    }
}

/// First entry into the annulus `(low, low + width]` from outside.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VisitRecord {
    pub moment: u64,
    pub annulus_low: f64,
    pub annulus_high: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundVerdict {
    Within,
    Violated,
}

/// Outcome of comparing a trajectory against a hypothesized radius bound.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundednessProbe {
    pub verdict: BoundVerdict,
    /// First sampled index whose radius exceeds the bound.
    pub first_violation: Option<u64>,
    /// Least-squares slope of `log radius` vs `log n` over the sampled
    /// tail (second half), reported when the bound is violated.
    pub growth_exponent: Option<f64>,
}

/// One step of the difference equation; `n` is the index of `x`.
pub fn step(
    x: Complex64,
    aux: &AuxState,
    spec: &SystemSpec,
    n: u64,
) -> Result<(Complex64, AuxState), DynamicsError> {
    Ok(spec.step_state(x, aux, n)?)
}

/// Iterates the system from `x1`, recording every `stride`-th state.
pub fn simulate(
    spec: &SystemSpec,
    x1: Complex64,
    length: u64,
    stride: u64,
) -> Result<Trajectory, DynamicsError> {
    let aux = spec.initial_aux(x1);
    simulate_with_aux(spec, x1, aux, length, stride)
}

/// Same as [`simulate`] with an explicit initial auxiliary state (for
/// tagged starts of the stateful families).
pub fn simulate_with_aux(
    spec: &SystemSpec,
    x1: Complex64,
    mut aux: AuxState,
    length: u64,
    stride: u64,
) -> Result<Trajectory, DynamicsError> {
    if length == 0 {
        return Err(DynamicsError::EmptyTrajectory);
    }
    if stride == 0 {
        return Err(DynamicsError::ZeroStride);
    }
    let exact = aux.exact_radius().is_some();
    let record_increments = stride == 1;
    let samples = ((length - 1) / stride + 1) as usize;

    let mut traj = Trajectory {
        start: x1,
        stride,
        length,
        sampled_indices: Vec::with_capacity(samples),
        states: Vec::with_capacity(samples),
        radius_track: Vec::with_capacity(samples),
        arg_track: Vec::with_capacity(samples),
        exact_radii: exact.then(|| Vec::with_capacity(samples)),
        increments: record_increments.then(|| Vec::with_capacity(samples.saturating_sub(1))),
        sup_radius: 0.0,
    };

    let rotation = crate::circle::cis_turns(spec.phi.value());
    let mut x = x1;
    let record = |n: u64, x: Complex64, aux: &AuxState, traj: &mut Trajectory| {
        if (n - 1).is_multiple_of(stride) {
            traj.sampled_indices.push(n);
            traj.states.push(x);
            traj.radius_track.push(x.norm());
            traj.arg_track
                .push(CirclePoint::arg_turns(x).unwrap_or(CirclePoint::ZERO));
            if let (Some(track), Some(r)) = (traj.exact_radii.as_mut(), aux.exact_radius()) {
                track.push(r);
            }
        }
        traj.sup_radius = traj.sup_radius.max(x.norm());
    };

    if !(x.re.is_finite() && x.im.is_finite()) {
        return Err(DynamicsError::NonFinite { index: 1 });
    }
    record(1, x, &aux, &mut traj);

    for n in 1..length {
        let (next, next_aux) = spec.step_state(x, &aux, n)?;
        if !(next.re.is_finite() && next.im.is_finite()) {
            return Err(DynamicsError::NonFinite { index: n + 1 });
        }
        if let Some(incs) = traj.increments.as_mut() {
            incs.push(next - rotation * x);
        }
        x = next;
        aux = next_aux;
        record(n + 1, x, &aux, &mut traj);
    }
    Ok(traj)
}

/// Maximum deviation of the recorded states from the de-rotated closed form
/// `x(n) = e((n-1) phi) (x(1) + sum_{j<n} (f(x(j)) + y(j)) e(-j phi))`,
/// accumulated by prefix sums. Requires stride 1.
pub fn verify_recurrence(traj: &Trajectory, spec: &SystemSpec) -> Result<f64, DynamicsError> {
    if traj.stride != 1 {
        return Err(DynamicsError::NeedsFullSampling(traj.stride));
    }
    let incs = traj
        .increments
        .as_ref()
        .expect("stride-1 trajectories record increments");
    let mut partial = Complex64::new(0.0, 0.0);
    let mut worst: f64 = 0.0;
    for (i, n) in (2..=traj.length).enumerate() {
        // partial accumulates sum_{j <= n-1} w(j) e(-j phi).
        let j = n - 1;
        partial += incs[i] * spec.phi.times_mod1(j).to_complex().conj();
        let predicted = spec.phi.times_mod1(n - 1).to_complex() * (traj.start + partial);
        worst = worst.max((traj.states[i + 1] - predicted).norm());
    }
    Ok(worst)
}

/// All indices `n >= 2` at which the radius enters `(low, low + width]`
/// from outside. Requires stride 1.
pub fn visiting_moments(
    traj: &Trajectory,
    low: f64,
    width: f64,
) -> Result<Vec<VisitRecord>, DynamicsError> {
    if !(low > 0.0 && width > 0.0) {
        return Err(DynamicsError::BadAnnulus { low, width });
    }
    if traj.stride != 1 {
        return Err(DynamicsError::NeedsFullSampling(traj.stride));
    }
    let high = low + width;
    let inside = |r: f64| r > low && r <= high;
    Ok(traj
        .radius_track
        .windows(2)
        .enumerate()
        .filter(|(_, w)| inside(w[1]) && !inside(w[0]))
        .map(|(i, _)| VisitRecord {
            moment: i as u64 + 2,
            annulus_low: low,
            annulus_high: high,
        })
        .collect())
}

/// Average radius change per step over the window `[n1, n2]`.
pub fn window_drift(traj: &Trajectory, n1: u64, n2: u64) -> Result<f64, DynamicsError> {
    if !(1 <= n1 && n1 < n2 && n2 <= traj.length) {
        return Err(DynamicsError::BadWindow {
            n1,
            n2,
            length: traj.length,
        });
    }
    let r1 = traj.radius_at(n1)?;
    let r2 = traj.radius_at(n2)?;
    Ok((r2 - r1) / (n2 - n1) as f64)
}

/// Compares the trajectory against a hypothesized sup bound. The verdict
/// uses the exact sup over every step; the first violation and the growth
/// exponent are read from the sampled track.
pub fn boundedness_probe(traj: &Trajectory, bound: f64) -> Result<BoundednessProbe, DynamicsError> {
    if !bound.is_finite() || bound <= 0.0 {
        return Err(DynamicsError::BadProbeBound(bound));
    }
    if traj.sup_radius <= bound {
        return Ok(BoundednessProbe {
            verdict: BoundVerdict::Within,
            first_violation: None,
            growth_exponent: None,
        });
    }
    let first_violation = traj
        .radius_track
        .iter()
        .position(|&r| r > bound)
        .map(|i| traj.sampled_indices[i]);

    // Tail fit: log radius vs log n over the second half of the samples.
    let half = traj.length / 2;
    let pts: Vec<(f64, f64)> = traj
        .sampled_indices
        .iter()
        .zip(&traj.radius_track)
        .filter(|(&n, &r)| n >= half.max(2) && r > 0.0)
        .map(|(&n, &r)| ((n as f64).ln(), r.ln()))
        .collect();
    let growth_exponent = least_squares_slope(&pts);
    Ok(BoundednessProbe {
        verdict: BoundVerdict::Violated,
        first_violation,
        growth_exponent,
    })
}

fn least_squares_slope(pts: &[(f64, f64)]) -> Option<f64> {
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}
