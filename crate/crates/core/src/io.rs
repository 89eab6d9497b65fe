//! Artifact formats: CSV tables, the `TCLK` binary field dump and atomic
//! file writes.
//!
//! `TCLK` layout, little endian throughout:
//!
//! ```text
//! b"TCLK"  version:u32  dim:u32  points:u32  levels:u32
//! half_width:f64  start:i64  dt:f64  shift:f64  has_mask:u8
//! values: levels·pointsᵈⁱᵐ × f64      (level-major)
//! mask:   same count × u8 (1 = void)  when has_mask = 1
//! ```

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::experiment::{ConvergenceTable, ExperimentRun};
use crate::wavesolver::{BoundaryTrace, SpacetimeField, SpatialGrid, TimeAxis};

pub const TCLK_MAGIC: &[u8; 4] = b"TCLK";
pub const TCLK_VERSION: u32 = 1;

/// Write through a temporary file in the same directory, then rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    write_atomic_inner(path, bytes)
        .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

fn write_atomic_inner(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

fn cell(v: f64) -> String {
    if v.is_nan() {
        "NaN".into()
    } else {
        format!("{v}")
    }
}

/// One row per time level: `t`, then the Dirichlet value and the force at
/// every boundary sample.
pub fn trace_csv(trace: &BoundaryTrace) -> String {
    let mut s = String::from("t");
    for p in &trace.samples {
        write!(s, ",u_{}_{}", p.face.name(), p.along).unwrap();
    }
    for p in &trace.samples {
        write!(s, ",force_{}_{}", p.face.name(), p.along).unwrap();
    }
    s.push('\n');
    let ns = trace.samples.len();
    for (m, t) in trace.times.iter().enumerate() {
        s.push_str(&cell(*t));
        for v in &trace.dirichlet[m * ns..(m + 1) * ns] {
            s.push(',');
            s.push_str(&cell(*v));
        }
        for v in &trace.force[m * ns..(m + 1) * ns] {
            s.push(',');
            s.push_str(&cell(*v));
        }
        s.push('\n');
    }
    s
}

/// Every `stride`-th level: `t`, then one column per node; void cells are
/// written as `NaN`.
pub fn snapshot_csv(field: &SpacetimeField, stride: usize) -> String {
    let stride = stride.max(1);
    let space = field.space();
    let mut s = String::from("t");
    for k in 0..space.len() {
        let [i, j] = space.axes(k);
        if space.dim() == 1 {
            write!(s, ",n{i}").unwrap();
        } else {
            write!(s, ",n{i}_{j}").unwrap();
        }
    }
    s.push('\n');
    for m in (0..field.levels()).step_by(stride) {
        s.push_str(&cell(field.time(m)));
        for &v in field.level(m) {
            s.push(',');
            s.push_str(&cell(v));
        }
        s.push('\n');
    }
    s
}

pub fn encode_tclk(field: &SpacetimeField) -> Vec<u8> {
    let space = field.space();
    let axis = field.axis();
    let mut out = Vec::with_capacity(64 + field.values().len() * 9);
    out.extend_from_slice(TCLK_MAGIC);
    out.extend_from_slice(&TCLK_VERSION.to_le_bytes());
    out.extend_from_slice(&(space.dim() as u32).to_le_bytes());
    out.extend_from_slice(&(space.points() as u32).to_le_bytes());
    out.extend_from_slice(&(axis.count as u32).to_le_bytes());
    out.extend_from_slice(&space.half_width().to_le_bytes());
    out.extend_from_slice(&axis.start.to_le_bytes());
    out.extend_from_slice(&axis.dt.to_le_bytes());
    out.extend_from_slice(&axis.shift.to_le_bytes());
    out.push(field.void_mask().is_some() as u8);
    for v in field.values() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    if let Some(mask) = field.void_mask() {
        out.extend(mask.iter().map(|&b| b as u8));
    }
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
    at: usize,
}

impl<'a> Reader<'a> {
    fn take<const N: usize>(&mut self) -> Result<[u8; N]> {
        let end = self.at + N;
        let chunk = self
            .bytes
            .get(self.at..end)
            .ok_or_else(|| bad("truncated TCLK stream"))?;
        self.at = end;
        Ok(chunk.try_into().expect("length checked"))
    }
    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take()?))
    }
    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take()?))
    }
}

fn bad(msg: &str) -> Error {
    Error::Io(std::io::Error::new(std::io::ErrorKind::InvalidData, msg.to_string()))
}

pub fn decode_tclk(bytes: &[u8]) -> Result<SpacetimeField> {
    let mut r = Reader { bytes, at: 0 };
    if &r.take::<4>()? != TCLK_MAGIC {
        return Err(bad("not a TCLK stream"));
    }
    let version = r.u32()?;
    if version != TCLK_VERSION {
        return Err(bad(&format!("unsupported TCLK version {version}")));
    }
    let dim = r.u32()? as usize;
    let points = r.u32()? as usize;
    let count = r.u32()? as usize;
    let half_width = r.f64()?;
    let start = i64::from_le_bytes(r.take()?);
    let dt = r.f64()?;
    let shift = r.f64()?;
    let has_mask = r.take::<1>()?[0];
    let space = SpatialGrid::new(dim, half_width, points).map_err(|_| bad("invalid TCLK grid header"))?;
    let n = space.len() * count;
    let mut values = Vec::with_capacity(n);
    for _ in 0..n {
        values.push(r.f64()?);
    }
    let mask = match has_mask {
        0 => None,
        1 => {
            let raw = r.bytes.get(r.at..r.at + n).ok_or_else(|| bad("truncated TCLK mask"))?;
            r.at += n;
            Some(raw.iter().map(|&b| b != 0).collect())
        }
        _ => return Err(bad("invalid TCLK mask flag")),
    };
    if r.at != bytes.len() {
        return Err(bad("trailing bytes after TCLK payload"));
    }
    let axis = TimeAxis {
        start,
        count,
        dt,
        shift,
    };
    Ok(SpacetimeField::from_parts(space, axis, values, mask))
}

pub fn read_tclk(path: &Path) -> Result<SpacetimeField> {
    decode_tclk(&std::fs::read(path)?)
}

fn json_bytes<T: serde::Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut s = serde_json::to_vec_pretty(value)?;
    s.push(b'\n');
    Ok(s)
}

/// Write every artifact of a run into `dir` and return the paths written.
///
/// `report.json`, the CSVs and the binaries depend only on the config;
/// wall-clock times go to `timings.json`.
pub fn write_run_artifacts(dir: &Path, run: &ExperimentRun) -> Result<Vec<PathBuf>> {
    let stride = run.u.levels().div_ceil(run.config.experiment.snapshot_rows.max(1));
    let files: Vec<(&str, Vec<u8>)> = vec![
        ("config.json", run.config.to_json().into_bytes()),
        ("report.json", json_bytes(&run.report)?),
        ("timings.json", json_bytes(&run.timings)?),
        ("traces_u.csv", trace_csv(&run.trace_u).into_bytes()),
        ("traces_v.csv", trace_csv(&run.trace_v).into_bytes()),
        ("snapshots_u.csv", snapshot_csv(&run.u, stride).into_bytes()),
        ("snapshots_v.csv", snapshot_csv(&run.v.field, stride).into_bytes()),
        ("field_u.tclk", encode_tclk(&run.u)),
        ("field_v.tclk", encode_tclk(&run.v.field)),
    ];
    let mut written = Vec::new();
    for (name, bytes) in files {
        let path = dir.join(name);
        write_atomic(&path, &bytes)?;
        written.push(path);
    }
    Ok(written)
}

pub fn write_convergence_artifacts(
    dir: &Path,
    table: &ConvergenceTable,
    timings: &crate::experiment::Timings,
) -> Result<Vec<PathBuf>> {
    let files = [
        ("convergence.csv", table.to_csv().into_bytes()),
        ("convergence.json", json_bytes(table)?),
        ("timings.json", json_bytes(timings)?),
    ];
    let mut written = Vec::new();
    for (name, bytes) in files {
        let path = dir.join(name);
        write_atomic(&path, &bytes)?;
        written.push(path);
    }
    Ok(written)
}
