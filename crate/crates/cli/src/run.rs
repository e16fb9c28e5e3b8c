//! One function per subcommand. Every command parses its config, runs the
//! corresponding library operation, writes the requested artifacts, and
//! prints a one-line summary; reports embed the resolved config.

use std::path::Path;

use num_complex::Complex64;
use serde::Serialize;
use serde_json::json;

use rotdyn_core::circle::cis_turns;
use rotdyn_core::conditions;
use rotdyn_core::dynamics::{self, BoundVerdict, DynamicsError, Trajectory};
use rotdyn_core::envelope::{self, EnvelopeInput, PowerLawParams};
use rotdyn_core::ergodic;
use rotdyn_core::systems;
use rotdyn_core::verify;

use crate::config::{self, *};
use crate::output::{canonical_json, trajectory_csv, write_file};
use crate::CliError;

fn numeric_or_precondition(e: DynamicsError) -> CliError {
    match e {
        DynamicsError::NonFinite { .. } => CliError::Numeric(e.to_string()),
        other => CliError::Precondition(other.to_string()),
    }
}

#[derive(Serialize)]
struct Report<C: Serialize, R: Serialize> {
    config: C,
    result: R,
}

fn emit<C: Serialize, R: Serialize>(
    path: &Option<String>,
    config: &C,
    result: &R,
) -> Result<Option<String>, CliError> {
    let text = canonical_json(&Report { config, result })?;
    if let Some(path) = path {
        write_file(path, &text)?;
        return Ok(Some(path.clone()));
    }
    Ok(None)
}

pub fn simulate(path: &Path) -> Result<(), CliError> {
    let cfg: SimulateConfig = config::load(path)?;
    let spec = cfg.system.build()?;
    if cfg.run.steps < 1 {
        return Err(CliError::Config("run.steps must be at least 1".into()));
    }
    let x1 = Complex64::new(cfg.run.x1[0], cfg.run.x1[1]);
    let traj = dynamics::simulate(&spec, x1, cfg.run.steps, cfg.run.stride)
        .map_err(numeric_or_precondition)?;

    let mut summary = json!({
        "family": spec.f_descriptor(),
        "forcing": spec.y_descriptor(),
        "length": traj.length,
        "stride": traj.stride,
        "sup_radius": traj.sup_radius,
        "final": {
            "n": traj.sampled_indices.last(),
            "re": traj.states.last().map(|z| z.re),
            "im": traj.states.last().map(|z| z.im),
            "radius": traj.radius_track.last(),
        },
    });
    if let Some(diag) = &cfg.diagnostics {
        apply_diagnostics(diag, &traj, &spec, &mut summary)?;
    }

    if let Some(csv_path) = &cfg.output.trajectory_csv {
        write_file(csv_path, &trajectory_csv(&traj))?;
    }
    emit(&cfg.output.summary_json, &cfg, &summary)?;
    println!(
        "simulate {}: n={} sup_radius={}",
        cfg.system.family, traj.length, traj.sup_radius
    );
    Ok(())
}

fn apply_diagnostics(
    diag: &DiagnosticsConfig,
    traj: &Trajectory,
    spec: &systems::SystemSpec,
    summary: &mut serde_json::Value,
) -> Result<(), CliError> {
    let obj = summary.as_object_mut().expect("summary is an object");
    if let (Some(low), Some(width)) = (diag.annulus_low, diag.annulus_width) {
        let visits =
            dynamics::visiting_moments(traj, low, width).map_err(numeric_or_precondition)?;
        obj.insert(
            "visiting_moments".into(),
            serde_json::to_value(&visits).expect("serializable"),
        );
    }
    if let Some(bound) = diag.probe_bound {
        let probe = dynamics::boundedness_probe(traj, bound).map_err(numeric_or_precondition)?;
        obj.insert(
            "boundedness_probe".into(),
            serde_json::to_value(&probe).expect("serializable"),
        );
    }
    if diag.verify_recurrence {
        let deviation = dynamics::verify_recurrence(traj, spec).map_err(numeric_or_precondition)?;
        obj.insert("recurrence_deviation".into(), json!(deviation));
        obj.insert(
            "recurrence_tolerance".into(),
            json!(1e-8 * (1.0 + traj.sup_radius)),
        );
    }
    Ok(())
}

pub fn envelope(path: &Path) -> Result<(), CliError> {
    let cfg: EnvelopeConfig = config::load(path)?;
    let phi = cfg.envelope.phi.resolve()?;
    let input = EnvelopeInput {
        f_sup: cfg.envelope.f_sup,
        y_sup: cfg.envelope.y_sup,
        beta: cfg.envelope.beta,
        epsilon: cfg.envelope.epsilon,
        delta_star: cfg.envelope.delta_star,
        min_window: cfg.envelope.min_window,
        profile_radius: cfg.envelope.profile_radius,
        start_radius: cfg.envelope.start_radius,
    };
    let report = envelope::quantitative_envelope(&input, envelope::rotation_cover(&phi))
        .map_err(|e| CliError::Precondition(e.to_string()))?;
    emit(&cfg.output.report_json, &cfg, &report)?;
    println!(
        "envelope: n_dense={} height={} bound={}",
        report.n_dense, report.height, report.bound
    );
    Ok(())
}

pub fn powerlaw(path: &Path) -> Result<(), CliError> {
    let cfg: PowerLawConfig = config::load(path)?;
    cfg.powerlaw.phi.resolve()?;
    let params = PowerLawParams {
        alpha: cfg.powerlaw.alpha,
        gamma: cfg.powerlaw.gamma,
        forcing_scale: cfg.powerlaw.forcing_scale,
        law_radius: cfg.powerlaw.law_radius,
        f_sup: cfg.powerlaw.f_sup,
        y_sup: cfg.powerlaw.y_sup,
        start_radius: cfg.powerlaw.start_radius,
    };
    let report =
        envelope::powerlaw_envelope(&params).map_err(|e| CliError::Precondition(e.to_string()))?;
    emit(&cfg.output.report_json, &cfg, &report)?;
    println!(
        "powerlaw: beta0={} bound={} after {} candidates",
        report.beta0,
        report.bound_at_beta0,
        report.scan.len()
    );
    Ok(())
}

pub fn cover(path: &Path) -> Result<(), CliError> {
    let cfg: CoverConfig = config::load(path)?;
    let phi = cfg.cover.phi.resolve()?;
    let query = ergodic::covering_number(&phi, cfg.cover.delta, cfg.cover.min_measure)
        .map_err(|e| CliError::Precondition(e.to_string()))?;
    emit(&cfg.output.report_json, &cfg, &query)?;
    println!(
        "cover: N(delta={}, m={}) = {}",
        query.delta, query.min_measure, query.result_n
    );
    Ok(())
}

pub fn gaps(path: &Path) -> Result<(), CliError> {
    let cfg: GapsConfig = config::load(path)?;
    let phi = cfg.gaps.phi.resolve()?;
    let spectrum = ergodic::gap_spectrum(&phi, cfg.gaps.n)
        .map_err(|e| CliError::Precondition(e.to_string()))?;
    let result = json!({
        "n": spectrum.n,
        "distinct_lengths": spectrum.distinct_lengths(),
        "gaps": spectrum.gaps,
        "total_length": spectrum.total_length(),
    });
    emit(&cfg.output.report_json, &cfg, &result)?;
    println!(
        "gaps: n={} distinct={} total={}",
        spectrum.n,
        spectrum.distinct_lengths(),
        spectrum.total_length()
    );
    Ok(())
}

pub fn profile(path: &Path) -> Result<(), CliError> {
    let cfg: ProfileConfig = config::load(path)?;
    let spec = cfg.system.build()?;
    let profile = conditions::drift_profile(&spec, &cfg.profile.probe_radii, cfg.profile.grid_size)
        .map_err(|e| CliError::Precondition(e.to_string()))?;
    let gaps = if profile.rows.len() >= 2 {
        Some(conditions::uniform_gap(&profile).map_err(|e| CliError::Precondition(e.to_string()))?)
    } else {
        None
    };
    if let Some(csv_path) = &cfg.output.profile_csv {
        let mut out = String::from("theta");
        for rho in &profile.probe_radii {
            out.push_str(&format!(",rho_{rho}"));
        }
        out.push_str(",reference\n");
        for (j, theta) in profile.grid.iter().enumerate() {
            out.push_str(&theta.value().to_string());
            for row in &profile.rows {
                out.push_str(&format!(",{}", row[j]));
            }
            out.push_str(&format!(",{}\n", profile.reference[j]));
        }
        write_file(csv_path, &out)?;
    }
    let result = json!({
        "sup_abs": profile.sup_abs,
        "integral": profile.integral,
        "refinement_error": profile.refinement_error,
        "reference_is_closed_form": profile.reference_is_closed_form,
        "uniform_gaps": gaps,
    });
    emit(&cfg.output.report_json, &cfg, &result)?;
    println!(
        "phi: integral={} sup_abs={} over {} radii",
        profile.integral,
        profile.sup_abs,
        profile.probe_radii.len()
    );
    Ok(())
}

pub fn certify(path: &Path) -> Result<(), CliError> {
    let cfg: CertifyConfig = config::load(path)?;
    let spec = cfg.system.build()?;
    let cert = conditions::certify_conditions(
        &spec,
        cfg.certify.min_window,
        cfg.certify.horizon,
        &cfg.certify.probe_radii,
        cfg.certify.grid_size,
    )
    .map_err(|e| CliError::Precondition(e.to_string()))?;
    emit(&cfg.output.report_json, &cfg, &cert)?;
    println!(
        "certify: verdict={:?} beta_estimate={} integral={}",
        cert.verdict, cert.beta_estimate, cert.integral
    );
    Ok(())
}

pub fn counterexample(path: &Path) -> Result<(), CliError> {
    let cfg: CounterexampleConfig = config::load(path)?;
    let phi = cfg.counterexample.phi.resolve()?;
    let steps = cfg.counterexample.steps.max(10);
    match cfg.counterexample.which.as_str() {
        "orbit-switch" => {
            let spec = systems::orbit_switch(phi, cfg.counterexample.k1);
            let traj = dynamics::simulate(&spec, Complex64::new(1.5, 0.0), steps, 1)
                .map_err(numeric_or_precondition)?;
            let exact = traj.exact_radii.as_ref().expect("exact track");
            // Index after which every increment is exactly +1.
            let mut onset = 2u64;
            for (i, w) in exact.windows(2).enumerate() {
                if w[1].offset - w[0].offset != 1 || w[1].base != w[0].base {
                    onset = i as u64 + 3;
                }
            }
            let settled = onset < steps;
            let result = json!({
                "which": "orbit-switch",
                "k1": cfg.counterexample.k1,
                "steps": steps,
                "unit_growth_onset": onset,
                "final_radius": exact.last().map(|r| r.value()),
                "unbounded_growth_observed": settled,
            });
            emit(&cfg.output.report_json, &cfg, &result)?;
            println!(
                "counterexample orbit-switch: unit growth from n={onset}, final radius {}",
                exact.last().map(|r| r.value()).unwrap_or(0.0)
            );
            if !settled {
                return Err(CliError::PropertyFailure(
                    "orbit-switch trajectory never settled into unit growth".into(),
                ));
            }
        }
        "decimal-warp" => {
            let spec = systems::decimal_warp(phi);
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(cfg.counterexample.seed);
            let mut starts = vec![(0.0, 0.0), (1.0, 0.37)];
            for _ in 0..8 {
                starts.push((rng.gen_range(1.0..50.0), rng.gen_range(0.0..1.0)));
            }
            let mut min_slack = f64::INFINITY;
            for &(r0, arg) in &starts {
                let x1 = r0 * cis_turns(arg);
                let traj =
                    dynamics::simulate(&spec, x1, steps, 1).map_err(numeric_or_precondition)?;
                let exact = traj.exact_radii.as_ref().expect("exact track");
                for (idx, r) in exact.iter().enumerate() {
                    let n = idx as i64 + 1;
                    let slack = r.base - (n - 2 - r.offset) as f64;
                    min_slack = min_slack.min(slack);
                }
            }
            let holds = min_slack >= 0.0;
            let result = json!({
                "which": "decimal-warp",
                "steps": steps,
                "starts": starts.len(),
                "min_radius_slack": min_slack,
                "lower_bound_holds": holds,
            });
            emit(&cfg.output.report_json, &cfg, &result)?;
            println!("counterexample decimal-warp: min over n of radius - (n - 2) = {min_slack}");
            if !holds {
                return Err(CliError::PropertyFailure(format!(
                    "lower bound violated: min slack {min_slack}"
                )));
            }
        }
        "slow-drift" => {
            let h = match cfg.counterexample.h.as_deref() {
                None => systems::HGrowth::OnePlusT,
                Some(name) => systems::HGrowth::from_name(name)
                    .map_err(|e| CliError::Config(e.to_string()))?,
            };
            let spec = systems::slow_drift(phi, h);
            let traj = dynamics::simulate(&spec, Complex64::new(0.0, 0.0), steps, 1)
                .map_err(numeric_or_precondition)?;
            let pi2_6 = std::f64::consts::PI.powi(2) / 6.0;
            let mut crossings = Vec::new();
            let mut all_exceeded = true;
            for bound in [10.0f64, 100.0] {
                let hl = h.eval(bound);
                let n_star = (hl * (bound + pi2_6)).floor() as u64 + 2;
                if n_star > steps {
                    continue; // crossing out of reach at this horizon
                }
                let max_by_then = traj.radius_track[..n_star as usize]
                    .iter()
                    .cloned()
                    .fold(0.0, f64::max);
                let exceeded = max_by_then > bound;
                all_exceeded &= exceeded;
                crossings.push(json!({
                    "bound": bound,
                    "crossing_index": n_star,
                    "max_radius_by_then": max_by_then,
                    "bound_exceeded": exceeded,
                }));
            }
            let probe = dynamics::boundedness_probe(&traj, (traj.sup_radius / 2.0).max(1.0))
                .map_err(numeric_or_precondition)?;
            let result = json!({
                "which": "slow-drift",
                "h": h.name(),
                "steps": steps,
                "sup_radius": traj.sup_radius,
                "growth_exponent": probe.growth_exponent,
                "crossings": crossings,
            });
            emit(&cfg.output.report_json, &cfg, &result)?;
            println!(
                "counterexample slow-drift: sup radius {} growth exponent {:?}",
                traj.sup_radius, probe.growth_exponent
            );
            if !all_exceeded || probe.verdict == BoundVerdict::Within {
                return Err(CliError::PropertyFailure(
                    "slow-drift growth check failed".into(),
                ));
            }
        }
        other => {
            return Err(CliError::Config(format!(
                "unknown counterexample '{other}'; use orbit-switch | decimal-warp | slow-drift"
            )))
        }
    }
    Ok(())
}

pub fn verify_lemmas(path: &Path) -> Result<(), CliError> {
    let cfg: VerifyConfig = config::load(path)?;
    let report = verify::run_lemma_suite(cfg.verify.seed, cfg.verify.cases);
    emit(&cfg.output.report_json, &cfg, &report)?;
    println!(
        "verify-lemmas: seed={} cases={} failures: identity={} rotation={} radial={}",
        report.seed,
        report.cases,
        report.identity_failures,
        report.rotation_failures,
        report.radial_failures
    );
    if !report.all_pass() {
        return Err(CliError::PropertyFailure(format!(
            "{} kernel property violations",
            report.identity_failures + report.rotation_failures + report.radial_failures
        )));
    }
    Ok(())
}
