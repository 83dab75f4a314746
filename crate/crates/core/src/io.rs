//! Artifact serialization: CSV with full round-trip precision and JSON
//! metadata, deterministic byte-for-byte for identical inputs.

use std::fs;
use std::io::Write;
use std::path::Path;

use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::fock::{FockVector, PhotonDistribution};
use crate::wavepacket::WavePacket1D;

/// 17 significant digits: enough to round-trip any f64.
pub fn fmt_g17(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_distribution_csv(path: &Path, dist: &PhotonDistribution) -> std::io::Result<()> {
    let mut out = String::from("n,prob\n");
    for (n, p) in dist.probs().iter().enumerate() {
        out.push_str(&format!("{n},{}\n", fmt_g17(*p)));
    }
    fs::write(path, out)
}

/// Metadata attached to a distribution or state artifact.
#[derive(Debug, Serialize)]
pub struct DistributionMeta {
    pub z: [f64; 2],
    pub m: usize,
    pub dim: usize,
    pub deficit: f64,
    pub mean: f64,
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> std::io::Result<()> {
    let mut f = fs::File::create(path)?;
    let text = serde_json::to_string_pretty(value).expect("serializable");
    f.write_all(text.as_bytes())?;
    f.write_all(b"\n")
}

/// State artifact: amplitudes as [re, im] pairs plus metadata.
#[derive(Debug, Serialize)]
pub struct StateArtifact {
    pub amps: Vec<[f64; 2]>,
    pub z: [f64; 2],
    pub m: usize,
    pub dim: usize,
    pub deficit: f64,
}

impl StateArtifact {
    pub fn new(state: &FockVector, z: C64, m: usize) -> Self {
        let dist = state.photon_distribution();
        Self {
            amps: state.amps().iter().map(|c| [c.re, c.im]).collect(),
            z: [z.re, z.im],
            m,
            dim: state.dim(),
            deficit: dist.deficit(),
        }
    }
}

pub fn write_snapshot_csv(path: &Path, wp: &WavePacket1D) -> std::io::Result<()> {
    let mut out = String::from("x,re_psi,im_psi,density\n");
    for (i, c) in wp.psi.iter().enumerate() {
        out.push_str(&format!(
            "{},{},{},{}\n",
            fmt_g17(wp.grid.x(i)),
            fmt_g17(c.re),
            fmt_g17(c.im),
            fmt_g17(c.norm_sqr())
        ));
    }
    fs::write(path, out)
}

/// Metadata header for a wave-packet snapshot.
#[derive(Debug, Serialize)]
pub struct SnapshotMeta {
    pub a: f64,
    pub k0: f64,
    pub t: f64,
    pub grid: crate::wavepacket::Grid1D,
    pub norm_deficit: f64,
}

impl SnapshotMeta {
    pub fn new(wp: &WavePacket1D) -> Self {
        Self {
            a: wp.a,
            k0: wp.k0,
            t: wp.t,
            grid: wp.grid,
            norm_deficit: 1.0 - wp.norm(),
        }
    }
}

pub fn write_path_csv(path: &Path, points: &[nalgebra::Vector3<f64>]) -> std::io::Result<()> {
    let mut out = String::from("px,py,pz\n");
    for p in points {
        out.push_str(&format!(
            "{},{},{}\n",
            fmt_g17(p.x),
            fmt_g17(p.y),
            fmt_g17(p.z)
        ));
    }
    fs::write(path, out)
}

pub fn write_c2_scan_csv(path: &Path, rows: &[(f64, f64, f64)]) -> std::io::Result<()> {
    let mut out = String::from("q,c2,mc_err\n");
    for (q, c2, err) in rows {
        out.push_str(&format!(
            "{},{},{}\n",
            fmt_g17(*q),
            fmt_g17(*c2),
            fmt_g17(*err)
        ));
    }
    fs::write(path, out)
}
