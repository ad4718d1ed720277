//! Artifact directory writer, manifest and trajectory round-trip.

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use landau_core::evolution::{Diagnostics, Snapshot, SolverConfig, StopReason, Trajectory};
use landau_core::snapshot::{read_fields, write_fields};
use landau_core::{Distribution, VelocityGrid};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::CliError;

pub const FORMAT_VERSION: u32 = 1;

/// `sha256("blob <len>\0" ‖ bytes)`, the git object framing with a SHA-256
/// digest.
pub fn blob_hash(bytes: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(format!("blob {}\0", bytes.len()).as_bytes());
    h.update(bytes);
    format!("{:x}", h.finalize())
}

/// One hard assertion of an experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub pass: bool,
}

impl Check {
    /// Passes when `value ≤ threshold` (NaN fails).
    pub fn at_most(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            value,
            threshold,
            pass: value <= threshold,
        }
    }

    /// Passes when `value` is finite; `threshold` is recorded as infinity.
    pub fn finite(name: impl Into<String>, value: f64) -> Self {
        Self {
            name: name.into(),
            value,
            threshold: f64::INFINITY,
            pass: value.is_finite(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub format: u32,
    pub kind: String,
    /// Content hash per input: `config` plus every file the config reads.
    pub inputs: BTreeMap<String, String>,
    /// Hash over the sorted `inputs` map.
    pub inputs_hash: String,
    /// The configuration that reproduces this directory (`config.toml`).
    pub config: String,
    pub checks: Vec<Check>,
    pub status: String,
    pub artifacts: BTreeMap<String, String>,
}

pub fn combined_hash(inputs: &BTreeMap<String, String>) -> String {
    let text: String = inputs.iter().map(|(k, v)| format!("{k} {v}\n")).collect();
    blob_hash(text.as_bytes())
}

/// Collects files under one directory and records their hashes.
pub struct Artifacts {
    root: PathBuf,
    files: BTreeMap<String, String>,
}

impl Artifacts {
    pub fn create(root: &Path) -> io::Result<Self> {
        fs::create_dir_all(root)?;
        Ok(Self {
            root: root.to_path_buf(),
            files: BTreeMap::new(),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn write(&mut self, rel: &str, bytes: &[u8]) -> io::Result<()> {
        let path = self.root.join(rel);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        fs::write(&path, bytes)?;
        self.files.insert(rel.to_string(), blob_hash(bytes));
        Ok(())
    }

    pub fn json<T: Serialize + ?Sized>(&mut self, rel: &str, value: &T) -> io::Result<()> {
        let mut text = serde_json::to_string_pretty(value).map_err(io::Error::other)?;
        text.push('\n');
        self.write(rel, text.as_bytes())
    }

    pub fn csv(
        &mut self,
        rel: &str,
        header: &[String],
        rows: impl IntoIterator<Item = Vec<String>>,
    ) -> io::Result<()> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(header).map_err(io::Error::other)?;
        for row in rows {
            w.write_record(&row).map_err(io::Error::other)?;
        }
        let bytes = w
            .into_inner()
            .map_err(|e| io::Error::other(e.to_string()))?;
        self.write(rel, &bytes)
    }

    /// Writes `manifest.json` last, listing every other artifact.
    pub fn finish(
        self,
        kind: &str,
        config: &str,
        extra_inputs: BTreeMap<String, String>,
        checks: Vec<Check>,
    ) -> io::Result<Manifest> {
        let mut inputs = extra_inputs;
        inputs.insert("config".into(), blob_hash(config.as_bytes()));
        let status = if checks.iter().all(|c| c.pass) {
            "pass"
        } else {
            "fail"
        };
        let manifest = Manifest {
            tool: "landau".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            format: FORMAT_VERSION,
            kind: kind.into(),
            inputs_hash: combined_hash(&inputs),
            inputs,
            config: config.into(),
            checks,
            status: status.into(),
            artifacts: self.files.clone(),
        };
        let mut text = serde_json::to_string_pretty(&manifest).map_err(io::Error::other)?;
        text.push('\n');
        fs::write(self.root.join("manifest.json"), text)?;
        Ok(manifest)
    }
}

/// Shortest round-trip text; exponent form outside `[1e-4, 1e15)`.
pub fn num(x: f64) -> String {
    let a = x.abs();
    if a == 0.0 || !a.is_finite() || (1e-4..1e15).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

pub fn header(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

/// Column names of `diagnostics.csv`.
pub fn diagnostics_header(m_list: &[f64]) -> Vec<String> {
    let mut h = header(&["step", "t", "dt", "sup"]);
    h.extend(m_list.iter().map(|m| format!("weighted_sup_m{m}")));
    h.extend(header(&[
        "mass",
        "momentum_x",
        "momentum_y",
        "momentum_z",
        "energy",
        "entropy",
        "min_value",
        "continuation",
        "clipped_mass",
        "boundary_mass",
        "boundary_momentum_x",
        "boundary_momentum_y",
        "boundary_momentum_z",
        "boundary_energy",
    ]));
    h
}

pub fn diagnostics_row(d: &Diagnostics) -> Vec<String> {
    let mut row = vec![d.step.to_string(), num(d.t), num(d.dt), num(d.sup)];
    row.extend(d.weighted_sup.iter().map(|&x| num(x)));
    let m = &d.moments;
    let b = &d.boundary;
    row.extend(
        [
            m.mass,
            m.momentum[0],
            m.momentum[1],
            m.momentum[2],
            m.energy,
            m.entropy,
            d.min_value,
            d.continuation,
            d.clipped_mass,
            b.mass,
            b.momentum[0],
            b.momentum[1],
            b.momentum[2],
            b.energy,
        ]
        .map(num),
    );
    row
}

/// Everything except the lattice values, which live in `snapshots/`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrajectoryIndex {
    pub n: usize,
    #[serde(rename = "L")]
    pub extent: f64,
    pub solver: SolverConfig,
    pub stop: StopReason,
    pub negativity_flagged: bool,
    /// Each file holds two blocks: `f` and `Q(f)`.
    pub snapshots: Vec<String>,
    pub diagnostics: Vec<Diagnostics>,
}

pub fn save_trajectory(out: &mut Artifacts, traj: &Trajectory) -> io::Result<()> {
    let mut names = Vec::with_capacity(traj.snapshots.len());
    for (k, s) in traj.snapshots.iter().enumerate() {
        let name = format!("snapshots/{k:05}.bin");
        let mut buf = Vec::new();
        write_fields(&mut buf, &traj.grid, s.f.time(), &[s.f.values(), &s.rhs])
            .map_err(io::Error::other)?;
        out.write(&name, &buf)?;
        names.push(name);
    }
    out.csv(
        "diagnostics.csv",
        &diagnostics_header(&traj.config.m_list),
        traj.diagnostics.iter().map(diagnostics_row),
    )?;
    let index = TrajectoryIndex {
        n: traj.grid.n(),
        extent: traj.grid.extent(),
        solver: traj.config.clone(),
        stop: traj.stop,
        negativity_flagged: traj.negativity_flagged,
        snapshots: names,
        diagnostics: traj.diagnostics.clone(),
    };
    out.json("trajectory.json", &index)
}

/// Reads a directory written by [`save_trajectory`]; returns the trajectory
/// and the content hashes of the files it read.
pub fn load_trajectory(dir: &Path) -> Result<(Trajectory, BTreeMap<String, String>), CliError> {
    let mut hashes = BTreeMap::new();
    let read = |rel: &str, hashes: &mut BTreeMap<String, String>| -> Result<Vec<u8>, CliError> {
        let path = dir.join(rel);
        let bytes = fs::read(&path)
            .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
        hashes.insert(format!("trajectory/{rel}"), blob_hash(&bytes));
        Ok(bytes)
    };
    let index: TrajectoryIndex = serde_json::from_slice(&read("trajectory.json", &mut hashes)?)
        .map_err(|e| {
            CliError::Usage(format!(
                "malformed trajectory.json in {}: {e}",
                dir.display()
            ))
        })?;
    let grid =
        VelocityGrid::new(index.n, index.extent).map_err(|e| CliError::Usage(e.to_string()))?;
    let mut snapshots = Vec::with_capacity(index.snapshots.len());
    for name in &index.snapshots {
        let bytes = read(name, &mut hashes)?;
        let (g, time, mut blocks) = read_fields(&mut bytes.as_slice())
            .map_err(|e| CliError::Usage(format!("{name}: {e}")))?;
        if !g.same_as(&grid) || blocks.len() != 2 {
            return Err(CliError::Usage(format!(
                "{name}: expected two blocks on the trajectory grid"
            )));
        }
        let rhs = blocks.pop().expect("two blocks");
        let f = Distribution::new(grid, blocks.pop().expect("two blocks"), time)
            .map_err(|e| CliError::Usage(format!("{name}: {e}")))?;
        snapshots.push(Snapshot { f, rhs });
    }
    Ok((
        Trajectory {
            grid,
            config: index.solver,
            snapshots,
            diagnostics: index.diagnostics,
            stop: index.stop,
            negativity_flagged: index.negativity_flagged,
        },
        hashes,
    ))
}
