//! Report emission: canonical JSON (sorted keys, so identical runs emit
//! byte-identical files and parse -> emit is the identity) and the fixed
//! trajectory CSV schema `n,re,im,radius,arg` with angles in turns.

use std::path::Path;

use serde::Serialize;

use rotdyn_core::dynamics::Trajectory;

use crate::CliError;

/// Serializes through `serde_json::Value`, whose map is ordered, so keys
/// come out sorted regardless of struct declaration order.
pub fn canonical_json<T: Serialize>(value: &T) -> Result<String, CliError> {
    let value = serde_json::to_value(value)
        .map_err(|e| CliError::Config(format!("serialization failed: {e}")))?;
    let mut text = serde_json::to_string_pretty(&value)
        .map_err(|e| CliError::Config(format!("serialization failed: {e}")))?;
    text.push('\n');
    Ok(text)
}

pub fn write_file(path: &str, contents: &str) -> Result<(), CliError> {
    let path = Path::new(path);
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent).map_err(|e| {
                CliError::Config(format!("cannot create {}: {e}", parent.display()))
            })?;
        }
    }
    std::fs::write(path, contents)
        .map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))
}

pub fn trajectory_csv(traj: &Trajectory) -> String {
    let mut out = String::from("n,re,im,radius,arg\n");
    for (i, &n) in traj.sampled_indices.iter().enumerate() {
        let z = traj.states[i];
        out.push_str(&format!(
            "{n},{},{},{},{}\n",
            z.re,
            z.im,
            traj.radius_track[i],
            traj.arg_track[i].value()
        ));
    }
    out
}
