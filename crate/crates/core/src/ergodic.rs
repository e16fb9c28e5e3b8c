//! Orbit analytics for circle rotations: gap spectra of orbit prefixes,
//! covering measure and covering numbers, Birkhoff averages, occupation
//! fractions, and star discrepancy.
//!
//! Orbit points `k * phi mod 1` are computed in scaled integer arithmetic
//! (`phi` is a dyadic rational as a double), so gap comparisons are exact;
//! a float path with a 1e-12 merge tolerance backs the rare rotations whose
//! dyadic exponent does not fit.
//!
//! Indexing conventions: orbit prefixes run over `k = 1..=n`; Birkhoff sums
//! and occupation counts run over `k = 0..n-1`.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circle::{CirclePoint, RotationNumber};

/// Tolerance for merging float gap lengths into one distinct length.
pub const GAP_MERGE_TOL: f64 = 1e-12;

/// Hard cap for the covering-number search; a rotation this close to a
/// small-denominator rational never covers and must error out instead of
/// spinning.
const COVER_SEARCH_CAP: u64 = 1 << 22;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ErgodicError {
    #[error("orbit prefix length must be at least 1")]
    EmptyPrefix,
    #[error("delta must lie in (0, 1/2], got {0}")]
    DeltaOutOfRange(f64),
    #[error("measure threshold m must lie in (0, 1], got {0}")]
    MeasureOutOfRange(f64),
    #[error("covering search exhausted at n = {cap}; rotation too close to a short rational")]
    SearchExhausted { cap: u64 },
    #[error("malformed arc list: {0}")]
    MalformedArcs(String),
}

/// Circular gap structure of the orbit prefix `{k phi : k = 1..=n}`.
///
/// Distinct gap lengths number at most three for any rotation (the
/// three-distance structure of rotation orbits).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GapSpectrum {
    pub n: u64,
    pub sorted_points: Vec<CirclePoint>,
    /// `(length, multiplicity)` pairs, sorted by increasing length.
    pub gaps: Vec<(f64, u64)>,
}

impl GapSpectrum {
    pub fn distinct_lengths(&self) -> usize {
        self.gaps.len()
    }

    pub fn total_length(&self) -> f64 {
        self.gaps.iter().map(|(len, mult)| len * *mult as f64).sum()
    }
}

/// Result of a covering-number query: the least orbit-prefix length whose
/// delta-neighborhood meets every Borel set of measure at least `min_measure`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoverageQuery {
    pub delta: f64,
    pub min_measure: f64,
    pub result_n: u64,
}

/// An arc `[start, start + length)` on the circle, wrap-aware.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Arc {
    pub start: CirclePoint,
    pub length: f64,
}

impl Arc {
    pub fn new(start: CirclePoint, length: f64) -> Result<Arc, ErgodicError> {
        if !(length.is_finite() && (0.0..=1.0).contains(&length)) {
            return Err(ErgodicError::MalformedArcs(format!(
                "arc length {length} outside [0, 1]"
            )));
        }
        Ok(Arc { start, length })
    }

    pub fn contains(&self, point: CirclePoint) -> bool {
        let mut offset = point.value() - self.start.value();
        if offset < 0.0 {
            offset += 1.0;
        }
        offset < self.length
    }
}

/// Sorted reductions of `{k phi : k = 1..=n}`, duplicates removed.
pub fn orbit_prefix(phi: &RotationNumber, n: u64) -> Result<Vec<CirclePoint>, ErgodicError> {
    if n == 0 {
        return Err(ErgodicError::EmptyPrefix);
    }
    let mut points: Vec<f64> = match scaled_orbit(phi, n) {
        Some((scaled, exponent)) => {
            let scale = 2f64.powi(exponent as i32);
            scaled.iter().map(|&v| v as f64 / scale).collect()
        }
        None => {
            let mut pts: Vec<f64> = (1..=n).map(|k| phi.times_mod1(k).value()).collect();
            pts.sort_by(|a, b| a.partial_cmp(b).expect("orbit points are finite"));
            pts.dedup();
            pts
        }
    };
    points.dedup();
    Ok(points
        .into_iter()
        .map(|v| CirclePoint::reduce(v).expect("orbit point is finite"))
        .collect())
}

/// Orbit prefix as sorted scaled integers `k * mantissa mod 2^exponent`,
/// exact for the stored double. Deduplicated.
fn scaled_orbit(phi: &RotationNumber, n: u64) -> Option<(Vec<u128>, u32)> {
    let (mantissa, exponent) = phi.dyadic_parts()?;
    let mask = (1u128 << exponent) - 1;
    let mut scaled: Vec<u128> = (1..=n as u128).map(|k| (k * mantissa) & mask).collect();
    scaled.sort_unstable();
    scaled.dedup();
    Some((scaled, exponent))
}

/// Circular gaps between consecutive orbit points of the prefix `1..=n`.
pub fn gap_spectrum(phi: &RotationNumber, n: u64) -> Result<GapSpectrum, ErgodicError> {
    if n == 0 {
        return Err(ErgodicError::EmptyPrefix);
    }
    if let Some((scaled, exponent)) = scaled_orbit(phi, n) {
        let modulus = 1u128 << exponent;
        let scale = 2f64.powi(exponent as i32);
        let mut counts: BTreeMap<u128, u64> = BTreeMap::new();
        for i in 0..scaled.len() {
            let next = scaled[(i + 1) % scaled.len()];
            let gap = (next + modulus - scaled[i]) % modulus;
            let gap = if scaled.len() == 1 { modulus } else { gap };
            *counts.entry(gap).or_insert(0) += 1;
        }
        let sorted_points = scaled
            .iter()
            .map(|&v| CirclePoint::reduce(v as f64 / scale).expect("finite"))
            .collect();
        let gaps = merge_float_gaps(
            counts
                .into_iter()
                .map(|(gap, mult)| (gap as f64 / scale, mult)),
        );
        Ok(GapSpectrum {
            n,
            sorted_points,
            gaps,
        })
    } else {
        let sorted_points = orbit_prefix(phi, n)?;
        let m = sorted_points.len();
        let mut raw: Vec<f64> = (0..m)
            .map(|i| {
                let a = sorted_points[i].value();
                let b = sorted_points[(i + 1) % m].value();
                let mut gap = b - a;
                if gap <= 0.0 {
                    gap += 1.0;
                }
                gap
            })
            .collect();
        if m == 1 {
            raw = vec![1.0];
        }
        raw.sort_by(|a, b| a.partial_cmp(b).expect("gaps are finite"));
        let gaps = merge_float_gaps(raw.into_iter().map(|g| (g, 1)));
        Ok(GapSpectrum {
            n,
            sorted_points,
            gaps,
        })
    }
}

fn merge_float_gaps(sorted: impl Iterator<Item = (f64, u64)>) -> Vec<(f64, u64)> {
    let mut merged: Vec<(f64, u64)> = Vec::new();
    for (len, mult) in sorted {
        match merged.last_mut() {
            Some((prev, count)) if (len - *prev).abs() <= GAP_MERGE_TOL => *count += mult,
            _ => merged.push((len, mult)),
        }
    }
    merged
}

/// Distinct-gap counts for every prefix length `1..=n_max`, maintained
/// incrementally (each insertion splits exactly one gap).
pub fn distinct_gap_counts(phi: &RotationNumber, n_max: u64) -> Result<Vec<usize>, ErgodicError> {
    if n_max == 0 {
        return Err(ErgodicError::EmptyPrefix);
    }
    let Some((mantissa, exponent)) = phi.dyadic_parts() else {
        return (1..=n_max)
            .map(|n| Ok(gap_spectrum(phi, n)?.distinct_lengths()))
            .collect();
    };
    let modulus = 1u128 << exponent;
    let mask = modulus - 1;
    let mut points: BTreeSet<u128> = BTreeSet::new();
    let mut gap_counts: BTreeMap<u128, u64> = BTreeMap::new();
    let mut counts = Vec::with_capacity(n_max as usize);
    for k in 1..=n_max as u128 {
        let p = (k * mantissa) & mask;
        if points.insert(p) {
            if points.len() == 1 {
                gap_counts.insert(modulus, 1);
            } else {
                let prev = points
                    .range(..p)
                    .next_back()
                    .or_else(|| points.iter().next_back().filter(|&&q| q != p))
                    .copied()
                    .expect("at least two points");
                let next = points
                    .range(p + 1..)
                    .next()
                    .or_else(|| points.iter().next())
                    .copied()
                    .expect("at least two points");
                let old_gap = (next + modulus - prev) % modulus;
                let old_gap = if old_gap == 0 { modulus } else { old_gap };
                let left = (p + modulus - prev) % modulus;
                let right = (next + modulus - p) % modulus;
                remove_gap(&mut gap_counts, old_gap);
                *gap_counts.entry(left).or_insert(0) += 1;
                *gap_counts.entry(right).or_insert(0) += 1;
            }
        }
        counts.push(gap_counts.len());
    }
    Ok(counts)
}

fn remove_gap(gap_counts: &mut BTreeMap<u128, u64>, gap: u128) {
    match gap_counts.get_mut(&gap) {
        Some(c) if *c > 1 => *c -= 1,
        Some(_) => {
            gap_counts.remove(&gap);
        }
        None => unreachable!("splitting a gap that is not tracked"),
    }
}

/// Lebesgue measure of the union of delta-balls around the orbit prefix:
/// on each circular gap `g` between adjacent points the union covers
/// `min(g, 2 delta)`.
pub fn covering_measure(phi: &RotationNumber, n: u64, delta: f64) -> Result<f64, ErgodicError> {
    check_delta(delta)?;
    let spectrum = gap_spectrum(phi, n)?;
    Ok(spectrum
        .gaps
        .iter()
        .map(|(len, mult)| len.min(2.0 * delta) * *mult as f64)
        .sum())
}

/// Least `n` such that the delta-neighborhood of `{theta + k phi : k <= n}`
/// meets every Borel set of measure at least `min_measure`, for every
/// `theta`. Equivalently (the ball union translates with `theta`): least `n`
/// with `covering_measure(phi, n, delta) > 1 - min_measure`, strict so that
/// a closed complement of measure exactly `min_measure` cannot defeat it.
pub fn covering_number(
    phi: &RotationNumber,
    delta: f64,
    min_measure: f64,
) -> Result<CoverageQuery, ErgodicError> {
    check_delta(delta)?;
    if !(min_measure.is_finite() && 0.0 < min_measure && min_measure <= 1.0) {
        return Err(ErgodicError::MeasureOutOfRange(min_measure));
    }
    let threshold = 1.0 - min_measure;
    let covered =
        |n: u64| -> Result<bool, ErgodicError> { Ok(covering_measure(phi, n, delta)? > threshold) };
    // covering_measure is nondecreasing in n: double to bracket, then bisect.
    let mut hi = 1u64;
    while !covered(hi)? {
        hi *= 2;
        if hi > COVER_SEARCH_CAP {
            return Err(ErgodicError::SearchExhausted {
                cap: COVER_SEARCH_CAP,
            });
        }
    }
    let mut lo = hi / 2; // covered(lo) is false (or lo == 0)
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if covered(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(CoverageQuery {
        delta,
        min_measure,
        result_n: hi,
    })
}

/// Time average `(1/n) sum_{k=0}^{n-1} g(theta + k phi)`.
pub fn birkhoff_average<G: FnMut(CirclePoint) -> f64>(
    mut g: G,
    theta: CirclePoint,
    phi: &RotationNumber,
    n: u64,
) -> Result<f64, ErgodicError> {
    if n == 0 {
        return Err(ErgodicError::EmptyPrefix);
    }
    let mut sum = 0.0;
    for k in 0..n {
        sum += g(theta.offset(phi.times_mod1(k).value()));
    }
    Ok(sum / n as f64)
}

/// Fraction of times `k = 0..n-1` at which the orbit of `theta` lands in the
/// arc union `E`. Arcs must be pairwise disjoint after normalization.
pub fn occupation_fraction(
    arcs: &[Arc],
    theta: CirclePoint,
    phi: &RotationNumber,
    n: u64,
) -> Result<f64, ErgodicError> {
    if n == 0 {
        return Err(ErgodicError::EmptyPrefix);
    }
    validate_disjoint(arcs)?;
    let mut hits = 0u64;
    for k in 0..n {
        let point = theta.offset(phi.times_mod1(k).value());
        if arcs.iter().any(|arc| arc.contains(point)) {
            hits += 1;
        }
    }
    Ok(hits as f64 / n as f64)
}

fn validate_disjoint(arcs: &[Arc]) -> Result<(), ErgodicError> {
    let total: f64 = arcs.iter().map(|a| a.length).sum();
    if total > 1.0 + 1e-12 {
        return Err(ErgodicError::MalformedArcs(format!(
            "total arc length {total} exceeds 1"
        )));
    }
    let mut nonempty: Vec<&Arc> = arcs.iter().filter(|a| a.length > 0.0).collect();
    nonempty.sort_by(|a, b| {
        a.start
            .value()
            .partial_cmp(&b.start.value())
            .expect("finite starts")
    });
    for i in 0..nonempty.len() {
        let cur = nonempty[i];
        let next = nonempty[(i + 1) % nonempty.len()];
        if nonempty.len() == 1 {
            break;
        }
        let mut room = next.start.value() - cur.start.value();
        if room <= 0.0 {
            room += 1.0;
        }
        if cur.length > room + 1e-15 {
            return Err(ErgodicError::MalformedArcs(format!(
                "arcs starting at {} and {} overlap",
                cur.start.value(),
                next.start.value()
            )));
        }
    }
    Ok(())
}

/// Star discrepancy of the orbit prefix `{k phi : k = 1..=n}` via the
/// sorted-points formula `max_i max(x_i - (i-1)/n, i/n - x_i)`.
pub fn discrepancy(phi: &RotationNumber, n: u64) -> Result<f64, ErgodicError> {
    if n == 0 {
        return Err(ErgodicError::EmptyPrefix);
    }
    let mut points: Vec<f64> = (1..=n).map(|k| phi.times_mod1(k).value()).collect();
    points.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    let nf = n as f64;
    let mut worst: f64 = 0.0;
    for (i, &x) in points.iter().enumerate() {
        worst = worst.max(x - i as f64 / nf).max((i + 1) as f64 / nf - x);
    }
    Ok(worst)
}

fn check_delta(delta: f64) -> Result<(), ErgodicError> {
    if !(delta.is_finite() && 0.0 < delta && delta <= 0.5) {
        return Err(ErgodicError::DeltaOutOfRange(delta));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn golden() -> RotationNumber {
        RotationNumber::golden()
    }

    fn point(v: f64) -> CirclePoint {
        CirclePoint::reduce(v).unwrap()
    }

    #[test]
    fn orbit_prefix_small() {
        let one = orbit_prefix(&golden(), 1).unwrap();
        assert_eq!(one.len(), 1);
        assert!((one[0].value() - 0.618_033_988_749_894_9).abs() < 1e-15);

        let two = orbit_prefix(&golden(), 2).unwrap();
        assert!((two[0].value() - 0.236_067_977_499_789_8).abs() < 1e-15);
        assert!((two[1].value() - 0.618_033_988_749_894_9).abs() < 1e-15);

        assert!(orbit_prefix(&golden(), 0).is_err());
    }

    #[test]
    fn orbit_prefix_is_monotone_in_n() {
        let shorter = orbit_prefix(&golden(), 40).unwrap();
        let longer = orbit_prefix(&golden(), 41).unwrap();
        for p in &shorter {
            assert!(longer.iter().any(|q| q.value() == p.value()));
        }
    }

    #[test]
    fn gap_spectrum_golden_five() {
        // Oracle: brute-force sort of the 5 orbit points.
        let s = gap_spectrum(&golden(), 5).unwrap();
        assert_eq!(s.distinct_lengths(), 2);
        assert_eq!(s.gaps[0].1, 2);
        assert_eq!(s.gaps[1].1, 3);
        assert!((s.gaps[0].0 - 0.145_898_033_750_315_3).abs() < 1e-12);
        assert!((s.gaps[1].0 - 0.236_067_977_499_789_8).abs() < 1e-12);
        assert!((s.total_length() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn gap_spectrum_single_point() {
        let s = gap_spectrum(&RotationNumber::from_value(0.3).unwrap(), 1).unwrap();
        assert_eq!(s.gaps, vec![(1.0, 1)]);
    }

    #[test]
    fn gap_spectrum_large_prefix_three_distance() {
        let s = gap_spectrum(&golden(), 2000).unwrap();
        assert!(s.distinct_lengths() <= 3);
        assert!((s.total_length() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sweep_matches_single_shot() {
        let counts = distinct_gap_counts(&golden(), 300).unwrap();
        for n in [1u64, 2, 7, 55, 144, 300] {
            let direct = gap_spectrum(&golden(), n).unwrap().distinct_lengths();
            assert_eq!(counts[n as usize - 1], direct, "n = {n}");
        }
    }

    #[test]
    fn covering_measure_examples() {
        let phi = golden();
        let m1 = covering_measure(&phi, 1, 0.2).unwrap();
        assert!((m1 - 0.4).abs() < 1e-15);
        let m2 = covering_measure(&phi, 2, 0.025).unwrap();
        assert!((m2 - 0.1).abs() < 1e-12);
        let full = covering_measure(&phi, 7, 0.5).unwrap();
        assert!((full - 1.0).abs() < 1e-12);
        assert!(covering_measure(&phi, 3, 0.0).is_err());
        assert!(covering_measure(&phi, 3, 0.6).is_err());
    }

    #[test]
    fn covering_number_worked_example() {
        let q = covering_number(&golden(), 0.025, 0.94).unwrap();
        assert_eq!(q.result_n, 2);
        // Minimality cross-check.
        assert!(covering_measure(&golden(), 2, 0.025).unwrap() > 0.06);
        assert!(covering_measure(&golden(), 1, 0.025).unwrap() <= 0.06);
    }

    #[test]
    fn covering_number_single_ball_regime() {
        // 2 delta > 1 - m: any single ball suffices.
        let q = covering_number(&golden(), 0.3, 0.5).unwrap();
        assert_eq!(q.result_n, 1);
        assert!(covering_number(&golden(), 0.1, 0.0).is_err());
        assert!(covering_number(&golden(), 0.1, -0.2).is_err());
    }

    #[test]
    fn birkhoff_constant_and_indicator() {
        let phi = golden();
        let avg = birkhoff_average(|_| 4.25, point(0.77), &phi, 1234).unwrap();
        assert_eq!(avg, 4.25);

        // Indicator of [0, 1/2): equidistribution, direct enumeration oracle.
        let half = |t: CirclePoint| if t.value() < 0.5 { 1.0 } else { 0.0 };
        let avg = birkhoff_average(half, CirclePoint::ZERO, &phi, 100_000).unwrap();
        assert!((avg - 0.5).abs() < 5e-4, "got {avg}");
    }

    #[test]
    fn birkhoff_cosine_geometric_sum_bound() {
        let phi = golden();
        let n = 10_000u64;
        let avg = birkhoff_average(
            |t: CirclePoint| (std::f64::consts::TAU * t.value()).cos(),
            CirclePoint::ZERO,
            &phi,
            n,
        )
        .unwrap();
        // |sum e(k phi)| = |sin(pi n phi) / sin(pi phi)|.
        let pi = std::f64::consts::PI;
        let bound =
            ((pi * phi.times_mod1(n).value()).sin() / (pi * phi.value()).sin()).abs() / n as f64;
        assert!(
            avg.abs() <= bound + 1e-12,
            "avg {avg} exceeds bound {bound}"
        );
        assert!(bound <= 1.2e-4);
    }

    #[test]
    fn occupation_examples() {
        let phi = golden();
        let whole = [Arc::new(CirclePoint::ZERO, 1.0).unwrap()];
        assert_eq!(
            occupation_fraction(&whole, point(0.3), &phi, 50).unwrap(),
            1.0
        );

        let e = [Arc::new(CirclePoint::ZERO, 0.09).unwrap()];
        let f = occupation_fraction(&e, CirclePoint::ZERO, &phi, 5).unwrap();
        assert_eq!(f, 0.2);

        assert_eq!(occupation_fraction(&[], point(0.1), &phi, 10).unwrap(), 0.0);
    }

    #[test]
    fn occupation_rejects_overlapping_arcs() {
        let arcs = [
            Arc::new(point(0.1), 0.3).unwrap(),
            Arc::new(point(0.2), 0.3).unwrap(),
        ];
        assert!(occupation_fraction(&arcs, point(0.0), &golden(), 5).is_err());
        // Wrap-around overlap.
        let arcs = [
            Arc::new(point(0.9), 0.2).unwrap(),
            Arc::new(point(0.05), 0.1).unwrap(),
        ];
        assert!(occupation_fraction(&arcs, point(0.0), &golden(), 5).is_err());
        // Touching arcs are fine.
        let arcs = [
            Arc::new(point(0.1), 0.2).unwrap(),
            Arc::new(point(0.3), 0.2).unwrap(),
        ];
        assert!(occupation_fraction(&arcs, point(0.0), &golden(), 5).is_ok());
    }

    #[test]
    fn discrepancy_examples() {
        let d1 = discrepancy(&golden(), 1).unwrap();
        assert!((d1 - 0.618_033_988_749_894_9).abs() < 1e-15);
        let d = discrepancy(&golden(), 10_000).unwrap();
        assert!(d <= 0.005, "discrepancy {d}");
    }

    #[test]
    fn discrepancy_exact_grid() {
        // n points {j/n} have star discrepancy exactly 1/n; realize via
        // the sorted-points formula on a synthetic rational rotation.
        let phi = RotationNumber::from_value(0.25).unwrap();
        let d = discrepancy(&phi, 4).unwrap();
        assert!((d - 0.25).abs() < 1e-15);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn covering_measure_monotone(
            f in 0.02..0.98f64,
            n in 1u64..200,
            d in 0.001..0.49f64,
        ) {
            let phi = RotationNumber::from_value(f).unwrap();
            let base = covering_measure(&phi, n, d).unwrap();
            let more_points = covering_measure(&phi, n + 17, d).unwrap();
            let wider = covering_measure(&phi, n, (d * 1.5).min(0.5)).unwrap();
            prop_assert!(more_points >= base - 1e-12);
            prop_assert!(wider >= base - 1e-12);
            prop_assert!(base > 0.0 && base <= 1.0 + 1e-12);
        }

        #[test]
        fn covering_number_minimality(
            f in 0.02..0.98f64,
            d in 0.01..0.4f64,
            m in 0.1..0.99f64,
        ) {
            let phi = RotationNumber::from_value(f).unwrap();
            let q = covering_number(&phi, d, m).unwrap();
            let threshold = 1.0 - m;
            prop_assert!(covering_measure(&phi, q.result_n, d).unwrap() > threshold);
            if q.result_n > 1 {
                prop_assert!(covering_measure(&phi, q.result_n - 1, d).unwrap() <= threshold);
            }
        }

        #[test]
        fn three_distance_random_rotations(f in 0.02..0.98f64, n in 1u64..500) {
            let phi = RotationNumber::from_value(f).unwrap();
            let s = gap_spectrum(&phi, n).unwrap();
            prop_assert!(s.distinct_lengths() <= 3);
            prop_assert!((s.total_length() - 1.0).abs() < 1e-12);
        }
    }
}
