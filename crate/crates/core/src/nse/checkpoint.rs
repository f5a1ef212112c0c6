//! Trajectory checkpoints: stored snapshots in the binary field container plus
//! a JSON sidecar with the solver settings and the diagnostics table.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::trajectory::{Abort, Diagnostics, Trajectory};
use crate::error::{Error, Result};
use crate::field::io::sha256_hex;
use crate::field::FieldContainer;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckpointMeta {
    pub dim: usize,
    pub n: usize,
    pub length: f64,
    pub dt: f64,
    pub scheme: String,
    pub dealias: bool,
    pub snapshot_times: Vec<f64>,
    pub container_sha256: String,
    pub abort: Option<Abort>,
    pub diagnostics: Vec<Diagnostics>,
}

/// Serialized container and pretty JSON sidecar, as written by [`write_checkpoint`].
///
/// Snapshots must be uniformly spaced in time, which holds whenever the run
/// stored every `store_every`-th step and finished.
pub fn checkpoint_bytes(trajectory: &Trajectory, scheme: &str, dealias: bool) -> Result<(Vec<u8>, Vec<u8>)> {
    let times: Vec<f64> = trajectory.snapshots.iter().map(|s| s.0).collect();
    if times.len() > 2 {
        let gap = times[1] - times[0];
        if times.windows(2).any(|w| ((w[1] - w[0]) - gap).abs() > 1e-9 * gap.max(1.0)) {
            return Err(Error::Format("snapshots are not uniformly spaced in time".into()));
        }
    }
    let fields: Vec<_> = trajectory.snapshots.iter().map(|s| s.1.clone()).collect();
    let t_last = *times.last().ok_or_else(|| Error::Format("no snapshots to store".into()))?;
    let container = FieldContainer::from_snapshots(&fields, times[0], t_last)?;
    let bytes = container.to_bytes();
    let g = trajectory.grid;
    let meta = CheckpointMeta {
        dim: g.dim(),
        n: g.n(),
        length: g.length(),
        dt: trajectory.dt,
        scheme: scheme.to_string(),
        dealias,
        snapshot_times: times,
        container_sha256: sha256_hex(&bytes),
        abort: trajectory.abort.clone(),
        diagnostics: trajectory.diagnostics.clone(),
    };
    let json = serde_json::to_vec_pretty(&meta).map_err(|e| Error::Format(e.to_string()))?;
    Ok((bytes, json))
}

/// Writes `<stem>.bin` and `<stem>.json`; returns both paths.
pub fn write_checkpoint(dir: &Path, stem: &str, trajectory: &Trajectory, scheme: &str, dealias: bool) -> Result<(PathBuf, PathBuf)> {
    let (bytes, json) = checkpoint_bytes(trajectory, scheme, dealias)?;
    let bin = dir.join(format!("{stem}.bin"));
    std::fs::write(&bin, bytes)?;
    let meta = dir.join(format!("{stem}.json"));
    std::fs::write(&meta, json)?;
    Ok((bin, meta))
}

pub fn read_checkpoint_meta(path: &Path) -> Result<CheckpointMeta> {
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| Error::Format(e.to_string()))
}
