//! Binary field checkpoints, key-value sidecars, CSV tables and atomic writes.
//!
//! Checkpoint layout (little-endian): magic `B4NLS1\0\0`, `u32` dimension,
//! `u32` points per axis, `f64` extent, `f64` gamma, `f64` sigma, then the
//! values as interleaved `(re, im)` `f64` pairs in row-major order.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::functionals::ModelParams;
use crate::grid::{Field, GridSpec};
use crate::ground_state::{GroundState, SolverTag};
use crate::report::{fmt_f64, Record, Table};

pub const MAGIC: [u8; 8] = *b"B4NLS1\0\0";
const HEADER_LEN: usize = 8 + 4 + 4 + 8 + 8 + 8;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CheckpointMeta {
    pub dim: usize,
    pub points: usize,
    pub extent: f64,
    pub gamma: f64,
    pub sigma: f64,
}

impl CheckpointMeta {
    pub fn grid(&self) -> Result<GridSpec> {
        GridSpec::new(self.dim, self.extent, self.points)
    }
}

/// Writes `bytes` to a sibling temporary file and renames it into place.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path
        .file_name()
        .ok_or_else(|| Error::Io(std::io::Error::other(format!("no file name in {}", path.display()))))?;
    let mut tmp_name = std::ffi::OsString::from(".");
    tmp_name.push(name);
    tmp_name.push(format!(".tmp{}", std::process::id()));
    let tmp = dir.join(tmp_name);
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path).inspect_err(|_| {
        let _ = fs::remove_file(&tmp);
    })?;
    Ok(())
}

pub fn encode_checkpoint(field: &Field, gamma: f64, sigma: f64) -> Vec<u8> {
    let g = field.grid();
    let mut out = Vec::with_capacity(HEADER_LEN + 16 * field.values().len());
    out.extend_from_slice(&MAGIC);
    out.extend_from_slice(&(g.dim() as u32).to_le_bytes());
    out.extend_from_slice(&(g.points() as u32).to_le_bytes());
    out.extend_from_slice(&g.extent().to_le_bytes());
    out.extend_from_slice(&gamma.to_le_bytes());
    out.extend_from_slice(&sigma.to_le_bytes());
    for v in field.values() {
        out.extend_from_slice(&v.re.to_le_bytes());
        out.extend_from_slice(&v.im.to_le_bytes());
    }
    out
}

fn read_u32(b: &[u8], at: usize) -> u32 {
    u32::from_le_bytes(b[at..at + 4].try_into().expect("4 bytes"))
}

fn read_f64(b: &[u8], at: usize) -> f64 {
    f64::from_le_bytes(b[at..at + 8].try_into().expect("8 bytes"))
}

pub fn decode_checkpoint(bytes: &[u8]) -> Result<(Field, CheckpointMeta)> {
    if bytes.len() < MAGIC.len() {
        return Err(Error::TruncatedFile {
            expected: HEADER_LEN,
            found: bytes.len(),
        });
    }
    if bytes[..8] != MAGIC {
        return Err(Error::BadMagic);
    }
    if bytes.len() < HEADER_LEN {
        return Err(Error::TruncatedFile {
            expected: HEADER_LEN,
            found: bytes.len(),
        });
    }
    let dim = read_u32(bytes, 8) as usize;
    let points = read_u32(bytes, 12) as usize;
    if !(1..=2).contains(&dim) {
        return Err(Error::DimensionMismatch(format!("checkpoint dimension {dim}")));
    }
    let meta = CheckpointMeta {
        dim,
        points,
        extent: read_f64(bytes, 16),
        gamma: read_f64(bytes, 24),
        sigma: read_f64(bytes, 32),
    };
    let n = points
        .checked_pow(dim as u32)
        .ok_or_else(|| Error::DimensionMismatch(format!("{points}^{dim} points")))?;
    let expected = HEADER_LEN + 16 * n;
    if bytes.len() < expected {
        return Err(Error::TruncatedFile {
            expected,
            found: bytes.len(),
        });
    }
    let grid = meta.grid()?;
    let values = (0..n)
        .map(|i| {
            let at = HEADER_LEN + 16 * i;
            Complex64::new(read_f64(bytes, at), read_f64(bytes, at + 8))
        })
        .collect();
    Ok((Field::new(&grid, values)?, meta))
}

pub fn write_checkpoint(field: &Field, gamma: f64, sigma: f64, path: &Path) -> Result<()> {
    atomic_write(path, &encode_checkpoint(field, gamma, sigma))
}

pub fn read_checkpoint(path: &Path) -> Result<(Field, CheckpointMeta)> {
    decode_checkpoint(&fs::read(path)?)
}

/// Reads a checkpoint and requires it to live on `grid`.
pub fn read_checkpoint_on(path: &Path, grid: &GridSpec) -> Result<(Field, CheckpointMeta)> {
    let (f, meta) = read_checkpoint(path)?;
    if meta.dim != grid.dim() || meta.points != grid.points() || meta.extent != grid.extent() {
        return Err(Error::DimensionMismatch(format!(
            "checkpoint has dim {}, {} points, extent {}; expected dim {}, {} points, extent {}",
            meta.dim,
            meta.points,
            meta.extent,
            grid.dim(),
            grid.points(),
            grid.extent()
        )));
    }
    Ok((f, meta))
}

/// Parses `key = value` lines; `#` starts a comment.
pub fn parse_record(text: &str) -> Result<Record> {
    let mut r = Record::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| Error::Parse {
            line: i + 1,
            key: line.to_string(),
            message: "expected `key = value`".to_string(),
        })?;
        r.0.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(r)
}

pub fn write_record(record: &Record, path: &Path) -> Result<()> {
    atomic_write(path, record.render().as_bytes())
}

pub fn render_csv(table: &Table) -> String {
    let mut s = table.columns.join(",");
    s.push('\n');
    for row in &table.rows {
        let cells: Vec<String> = row.iter().map(|x| fmt_f64(*x)).collect();
        s.push_str(&cells.join(","));
        s.push('\n');
    }
    s
}

pub fn write_csv(table: &Table, path: &Path) -> Result<()> {
    atomic_write(path, render_csv(table).as_bytes())
}

pub fn ground_state_record(gs: &GroundState, p: &ModelParams) -> Record {
    let mut r = Record::new();
    r.num("alpha", gs.alpha)
        .num("mass", gs.mass)
        .num("energy", gs.energy)
        .num("pohozaev_residual", gs.pohozaev_residual)
        .text("solver_tag", gs.solver_tag.as_str())
        .int("iterations", gs.iterations)
        .int("brackets", gs.brackets)
        .num("gamma", p.gamma)
        .num("sigma", p.sigma)
        .int("dim", p.dim);
    r
}

/// Paths of a ground-state checkpoint and its sidecar for a given stem.
pub fn ground_state_paths(dir: &Path, stem: &str) -> (PathBuf, PathBuf) {
    (dir.join(format!("{stem}.bin")), dir.join(format!("{stem}.txt")))
}

pub fn write_ground_state(gs: &GroundState, p: &ModelParams, dir: &Path, stem: &str) -> Result<Vec<PathBuf>> {
    let (bin, txt) = ground_state_paths(dir, stem);
    write_checkpoint(&gs.field, p.gamma, p.sigma, &bin)?;
    write_record(&ground_state_record(gs, p), &txt)?;
    Ok(vec![bin, txt])
}

fn sidecar_num(r: &Record, key: &str) -> Result<f64> {
    let v = r.get(key).ok_or_else(|| Error::Parse {
        line: 0,
        key: key.to_string(),
        message: "missing from sidecar".to_string(),
    })?;
    v.parse().map_err(|_| Error::Parse {
        line: 0,
        key: key.to_string(),
        message: format!("`{v}` is not a number"),
    })
}

/// Loads a ground state and re-validates it: the field must reproduce the
/// recorded mass, energy and Pohozaev residual, and the invariants must hold.
pub fn read_ground_state(dir: &Path, stem: &str) -> Result<(GroundState, ModelParams)> {
    let (bin, txt) = ground_state_paths(dir, stem);
    let (field, meta) = read_checkpoint(&bin)?;
    let r = parse_record(&fs::read_to_string(&txt)?)?;
    let dim = sidecar_num(&r, "dim")? as usize;
    if dim != meta.dim {
        return Err(Error::DimensionMismatch(format!(
            "sidecar dimension {dim}, checkpoint dimension {}",
            meta.dim
        )));
    }
    let p = ModelParams::new(meta.gamma, meta.sigma, meta.dim)?;
    let tag_text = r.get("solver_tag").unwrap_or("");
    let solver_tag = SolverTag::parse(tag_text).ok_or_else(|| Error::Parse {
        line: 0,
        key: "solver_tag".to_string(),
        message: format!("unknown solver `{tag_text}`"),
    })?;
    let t = crate::functionals::triple(&field, &p);
    let gs = GroundState {
        alpha: sidecar_num(&r, "alpha")?,
        mass: field.norm_sq(),
        energy: crate::functionals::energy_of_triple(&t, &p),
        pohozaev_residual: crate::functionals::pohozaev_of_triple(&t, &p).abs() / (p.gamma * t.lap_sq),
        solver_tag,
        iterations: sidecar_num(&r, "iterations")? as usize,
        brackets: sidecar_num(&r, "brackets")? as usize,
        field,
    };
    let mut problems = Vec::new();
    for (key, value) in [("mass", gs.mass), ("energy", gs.energy)] {
        let recorded = sidecar_num(&r, key)?;
        if (recorded - value).abs() > 1e-12 * value.abs().max(1e-300) {
            problems.push(format!("{key}: sidecar {recorded}, field {value}"));
        }
    }
    if !problems.is_empty() {
        return Err(Error::InvariantViolation(problems.join("; ")));
    }
    gs.check_invariants(&p)?;
    Ok((gs, p))
}
