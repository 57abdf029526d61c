//! Trajectory files: a JSON header next to a little-endian `f32` payload.
//!
//! The payload is `[readouts][samples][4]` row-major, each record being
//! `(k_x, k_y, k_z, w)` with k in cm^-1 and `w` the normalized DCF weight.
//! Readouts shorter than `samples_per_readout` are padded by repeating their
//! last k-space position with weight 0; `readout_lengths` keeps the true
//! lengths. The header's `checksum` is the 64-bit FNV-1a hash of the payload
//! bytes, written as 16 lowercase hex digits.

use std::fs;
use std::hash::Hasher;
use std::path::{Path, PathBuf};

use fnv::FnvHasher;
use serde::{Deserialize, Serialize};

use crate::assembly::{TemplateSpec, Trajectory};
use crate::dcf::DcfTable;
use crate::error::{Error, Result};
use crate::io::DesignConfig;
use crate::paths::PathKind;
use crate::vec3::Vec3;

pub const FORMAT_VERSION: u32 = 1;
pub const PAYLOAD_LAYOUT: &str = "f32le[readouts][samples][4] = (kx, ky, kz, w)";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Units {
    pub k: String,
    pub weight: String,
}

impl Default for Units {
    fn default() -> Self {
        Self {
            k: "cm^-1".into(),
            weight: "normalized DCF, sums to 1".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryFileHeader {
    pub format_version: u32,
    pub kind: PathKind,
    pub readouts: usize,
    pub samples_per_readout: usize,
    pub readout_lengths: Vec<usize>,
    pub units: Units,
    pub layout: String,
    /// Payload file name, relative to the header.
    pub payload: String,
    pub payload_bytes: u64,
    pub checksum: String,
    pub n_real: f64,
    pub offset: f64,
    pub spec: TemplateSpec,
    /// FOV scale picked by the readout-count search, 1 without a target.
    pub fov_scale: f64,
    pub config: Option<DesignConfig>,
}

/// 64-bit FNV-1a.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h = FnvHasher::default();
    h.write(bytes);
    h.finish()
}

fn checksum_string(bytes: &[u8]) -> String {
    format!("{:016x}", fnv1a64(bytes))
}

/// Payload records, padded to a common readout length.
pub fn payload_records(traj: &Trajectory, dcf: &DcfTable) -> Result<Vec<Vec<[f32; 4]>>> {
    if dcf.weights.len() != traj.readouts.len() {
        return Err(Error::invalid(format!(
            "{} weight rows for {} readouts",
            dcf.weights.len(),
            traj.readouts.len()
        )));
    }
    let width = traj.samples_per_readout();
    traj.readouts
        .iter()
        .zip(&dcf.weights)
        .map(|(r, w)| {
            if w.len() != r.k_samples.len() {
                return Err(Error::invalid(format!(
                    "readout {} has {} samples but {} weights",
                    r.index,
                    r.k_samples.len(),
                    w.len()
                )));
            }
            let last = r.k_samples.last().copied().unwrap_or([0.0; 3]);
            Ok((0..width)
                .map(|i| match r.k_samples.get(i) {
                    Some(k) => [k[0] as f32, k[1] as f32, k[2] as f32, w[i] as f32],
                    None => [last[0] as f32, last[1] as f32, last[2] as f32, 0.0],
                })
                .collect())
        })
        .collect()
}

pub fn encode_payload(records: &[Vec<[f32; 4]>]) -> Vec<u8> {
    records
        .iter()
        .flatten()
        .flatten()
        .flat_map(|v| v.to_le_bytes())
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExportedFiles {
    pub header: PathBuf,
    pub payload: PathBuf,
    pub checksum: String,
}

/// Writes `<stem>.json` and `<stem>.bin`.
pub fn export_trajectory(
    traj: &Trajectory,
    dcf: &DcfTable,
    stem: &Path,
    fov_scale: f64,
    config: Option<&DesignConfig>,
) -> Result<ExportedFiles> {
    let records = payload_records(traj, dcf)?;
    let bytes = encode_payload(&records);
    let header_path = stem.with_extension("json");
    let payload_path = stem.with_extension("bin");
    let header = TrajectoryFileHeader {
        format_version: FORMAT_VERSION,
        kind: traj.kind,
        readouts: records.len(),
        samples_per_readout: traj.samples_per_readout(),
        readout_lengths: traj.readouts.iter().map(|r| r.k_samples.len()).collect(),
        units: Units::default(),
        layout: PAYLOAD_LAYOUT.into(),
        payload: payload_path
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default(),
        payload_bytes: bytes.len() as u64,
        checksum: checksum_string(&bytes),
        n_real: traj.meta.n_real,
        offset: traj.meta.offset,
        spec: traj.meta.spec,
        fov_scale,
        config: config.cloned(),
    };
    if let Some(dir) = stem.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(&payload_path, &bytes).map_err(|e| Error::io(&payload_path, e))?;
    write_json(&header_path, &header)?;
    Ok(ExportedFiles {
        header: header_path,
        payload: payload_path,
        checksum: header.checksum,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ImportedTrajectory {
    pub header: TrajectoryFileHeader,
    pub records: Vec<Vec<[f32; 4]>>,
}

impl ImportedTrajectory {
    /// Unpadded samples as `f64` positions and weights.
    pub fn samples(&self) -> (Vec<Vec3>, Vec<f64>) {
        let mut pts = Vec::new();
        let mut w = Vec::new();
        for (row, &n) in self.records.iter().zip(&self.header.readout_lengths) {
            for r in &row[..n] {
                pts.push([r[0] as f64, r[1] as f64, r[2] as f64]);
                w.push(r[3] as f64);
            }
        }
        (pts, w)
    }
}

/// Reads a header and its payload, checking sizes and the checksum.
pub fn import_trajectory(header_path: &Path) -> Result<ImportedTrajectory> {
    let text = fs::read_to_string(header_path).map_err(|e| Error::io(header_path, e))?;
    let header: TrajectoryFileHeader = serde_json::from_str(&text)
        .map_err(|e| Error::Format(format!("{}: {e}", header_path.display())))?;
    if header.format_version != FORMAT_VERSION {
        return Err(Error::Format(format!(
            "unsupported format version {} (expected {FORMAT_VERSION})",
            header.format_version
        )));
    }
    let payload_path = header_path.with_file_name(&header.payload);
    let bytes = fs::read(&payload_path).map_err(|e| Error::io(&payload_path, e))?;
    let expected = header.readouts * header.samples_per_readout * 16;
    if bytes.len() != expected || header.payload_bytes != expected as u64 {
        return Err(Error::Format(format!(
            "payload is {} bytes; header implies {expected}",
            bytes.len()
        )));
    }
    if header.readout_lengths.len() != header.readouts
        || header.readout_lengths.iter().any(|&n| n > header.samples_per_readout)
    {
        return Err(Error::Format("readout_lengths disagree with the counts".into()));
    }
    let sum = checksum_string(&bytes);
    if sum != header.checksum {
        return Err(Error::Format(format!(
            "checksum mismatch: header {} payload {sum}",
            header.checksum
        )));
    }
    let floats: Vec<f32> = bytes
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
        .collect();
    let records = floats
        .chunks_exact(4 * header.samples_per_readout.max(1))
        .take(header.readouts)
        .map(|row| row.chunks_exact(4).map(|c| [c[0], c[1], c[2], c[3]]).collect())
        .collect();
    Ok(ImportedTrajectory { header, records })
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Error::Format(e.to_string()))?;
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fnv_reference_values() {
        assert_eq!(fnv1a64(b""), 0xcbf29ce484222325);
        assert_eq!(fnv1a64(b"a"), 0xaf63dc4c8601ec8c);
        assert_eq!(fnv1a64(b"foobar"), 0x85944171f73967e8);
    }

    #[test]
    fn two_samples_make_32_bytes() {
        let rec = vec![vec![[1.0f32, 2.0, 3.0, 0.5], [-1.0, 0.0, 0.25, 0.5]]];
        let b = encode_payload(&rec);
        assert_eq!(b.len(), 32);
        assert_eq!(&b[..4], &1.0f32.to_le_bytes());
        assert_eq!(&b[28..], &0.5f32.to_le_bytes());
    }
}
