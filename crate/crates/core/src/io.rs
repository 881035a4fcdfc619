//! Cube files and dataset manifests.
//!
//! Cube file layout (all integers little-endian):
//!
//! | offset | size | field                                            |
//! |-------:|-----:|--------------------------------------------------|
//! | 0      | 4    | magic `RDC1`                                     |
//! | 4      | 4    | version (u32 = 1)                                |
//! | 8      | 4    | frames (u32)                                     |
//! | 12     | 4    | range bins (u32)                                 |
//! | 16     | 4    | azimuth bins (u32)                               |
//! | 20     | 4    | label (i32)                                      |
//! | 24     | 4    | environment code (u32)                           |
//! | 28     | 4    | activity code (u32)                              |
//! | 32     | 2    | layout index (u16, `0xFFFF` = none)              |
//! | 34     | 2    | flags (u16, bit 0 = seed present)                |
//! | 36     | 8    | seed (u64)                                       |
//! | 44     | 4·N  | f32 amplitudes, frame-major, then range, azimuth |

use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::cube::{Activity, Dataset, Environment, RadarCube, SampleMeta, Split};
use crate::error::{Error, Result};

pub const CUBE_MAGIC: &[u8; 4] = b"RDC1";
pub const CUBE_VERSION: u32 = 1;
pub const HEADER_LEN: usize = 44;
const NO_LAYOUT: u16 = 0xFFFF;
const FLAG_SEED: u16 = 1;

fn format_err(offset: usize, reason: impl Into<String>) -> Error {
    Error::Format {
        offset,
        reason: reason.into(),
    }
}

/// Serialize a cube into its on-disk byte representation.
pub fn encode_cube(cube: &RadarCube) -> Result<Vec<u8>> {
    let meta = &cube.meta;
    let layout = match meta.layout {
        Some(l) if l == NO_LAYOUT => return Err(Error::InvalidArgument(format!("layout index {l} is reserved"))),
        Some(l) => l,
        None => NO_LAYOUT,
    };
    let (frames, range, azimuth) = cube.dims();
    let mut out = Vec::with_capacity(HEADER_LEN + cube.data().len() * 4);
    out.extend_from_slice(CUBE_MAGIC);
    for v in [CUBE_VERSION, frames as u32, range as u32, azimuth as u32] {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out.extend_from_slice(&(meta.label as i32).to_le_bytes());
    out.extend_from_slice(&meta.environment.code().to_le_bytes());
    out.extend_from_slice(&meta.activity.code().to_le_bytes());
    out.extend_from_slice(&layout.to_le_bytes());
    let flags = if meta.seed.is_some() { FLAG_SEED } else { 0 };
    out.extend_from_slice(&flags.to_le_bytes());
    out.extend_from_slice(&meta.seed.unwrap_or(0).to_le_bytes());
    debug_assert_eq!(out.len(), HEADER_LEN);
    for v in cube.data() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    Ok(out)
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take<const N: usize>(&mut self, what: &str) -> Result<[u8; N]> {
        let end = self.pos + N;
        let bytes = self
            .buf
            .get(self.pos..end)
            .ok_or_else(|| format_err(self.pos, format!("truncated header while reading {what}")))?;
        self.pos = end;
        Ok(bytes.try_into().expect("slice length checked"))
    }

    fn u32(&mut self, what: &str) -> Result<u32> {
        self.take::<4>(what).map(u32::from_le_bytes)
    }
}

/// Parse a cube from bytes produced by [`encode_cube`].
pub fn decode_cube(buf: &[u8]) -> Result<RadarCube> {
    let mut r = Reader { buf, pos: 0 };
    let magic = r.take::<4>("magic")?;
    if &magic != CUBE_MAGIC {
        return Err(format_err(
            0,
            format!("bad magic {:?}, expected \"RDC1\"", String::from_utf8_lossy(&magic)),
        ));
    }
    let version = r.u32("version")?;
    if version != CUBE_VERSION {
        return Err(format_err(4, format!("unsupported version {version}")));
    }
    let frames = r.u32("frames")? as usize;
    let range = r.u32("range bins")? as usize;
    let azimuth = r.u32("azimuth bins")? as usize;
    if frames == 0 || range == 0 || azimuth == 0 {
        return Err(format_err(
            8,
            format!("dimension mismatch: zero-sized dimension {frames}x{range}x{azimuth}"),
        ));
    }
    let label = i32::from_le_bytes(r.take::<4>("label")?);
    if !(0..=crate::cube::MAX_LABEL as i32).contains(&label) {
        return Err(format_err(20, format!("label {label} outside 0..=3")));
    }
    let env_code = r.u32("environment")?;
    let environment = Environment::from_code(env_code)
        .ok_or_else(|| format_err(24, format!("unknown environment code {env_code}")))?;
    let act_code = r.u32("activity")?;
    let activity =
        Activity::from_code(act_code).ok_or_else(|| format_err(28, format!("unknown activity code {act_code}")))?;
    let layout = u16::from_le_bytes(r.take::<2>("layout")?);
    let flags = u16::from_le_bytes(r.take::<2>("flags")?);
    if flags & !FLAG_SEED != 0 {
        return Err(format_err(34, format!("unknown flag bits {flags:#06x}")));
    }
    let seed = u64::from_le_bytes(r.take::<8>("seed")?);

    let n = frames
        .checked_mul(range)
        .and_then(|v| v.checked_mul(azimuth))
        .ok_or_else(|| format_err(8, "dimension product overflows"))?;
    let payload = &buf[HEADER_LEN..];
    if payload.len() != n * 4 {
        let reason = if payload.len() < n * 4 {
            format!(
                "truncated payload: {frames}x{range}x{azimuth} needs {} bytes, found {}",
                n * 4,
                payload.len()
            )
        } else {
            format!(
                "dimension mismatch: {frames}x{range}x{azimuth} needs {} payload bytes, found {}",
                n * 4,
                payload.len()
            )
        };
        return Err(format_err(HEADER_LEN + payload.len().min(n * 4), reason));
    }
    let data = payload
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().expect("4-byte chunk")))
        .collect();
    let meta = SampleMeta {
        label: label as u8,
        environment,
        activity,
        layout: (layout != NO_LAYOUT).then_some(layout),
        seed: (flags & FLAG_SEED != 0).then_some(seed),
        augmentations: Vec::new(),
    };
    RadarCube::new(frames, range, azimuth, data, meta)
}

pub fn write_cube(cube: &RadarCube, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, encode_cube(cube)?)?;
    Ok(())
}

pub fn read_cube(path: impl AsRef<Path>) -> Result<RadarCube> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|source| Error::MissingFile {
        path: path.to_path_buf(),
        source,
    })?;
    decode_cube(&bytes)
}

/// One manifest line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub path: String,
    pub label: u8,
    pub environment: Environment,
    pub activity: Activity,
    pub split: Option<Split>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub layout: Option<u16>,
}

/// Write every cube of `ds` into `dir` and a `manifest.jsonl` describing them.
/// Returns the manifest path.
pub fn write_dataset(ds: &Dataset, dir: impl AsRef<Path>, stem: &str) -> Result<PathBuf> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir)?;
    let manifest_path = dir.join("manifest.jsonl");
    let mut manifest = std::io::BufWriter::new(fs::File::create(&manifest_path)?);
    for (i, cube) in ds.cubes.iter().enumerate() {
        let name = format!("{stem}_{i:05}.rdc");
        write_cube(cube, dir.join(&name))?;
        let entry = ManifestEntry {
            path: name,
            label: cube.meta.label,
            environment: cube.meta.environment,
            activity: cube.meta.activity,
            split: ds.split_of(i),
            layout: cube.meta.layout,
        };
        serde_json::to_writer(&mut manifest, &entry)?;
        manifest.write_all(b"\n")?;
    }
    manifest.flush()?;
    Ok(manifest_path)
}

pub fn read_manifest(path: impl AsRef<Path>) -> Result<Vec<ManifestEntry>> {
    let path = path.as_ref();
    let file = fs::File::open(path).map_err(|source| Error::MissingFile {
        path: path.to_path_buf(),
        source,
    })?;
    let mut entries = Vec::new();
    for line in BufReader::new(file).lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        entries.push(serde_json::from_str(&line)?);
    }
    Ok(entries)
}

/// Load the dataset described by a manifest. Cube paths are relative to the
/// manifest's directory. Split tags are kept only if every entry has one.
pub fn read_dataset(manifest: impl AsRef<Path>) -> Result<Dataset> {
    let manifest = manifest.as_ref();
    let base = manifest.parent().unwrap_or_else(|| Path::new("."));
    let entries = read_manifest(manifest)?;
    let mut cubes = Vec::with_capacity(entries.len());
    for e in &entries {
        let mut cube = read_cube(base.join(&e.path))?;
        if cube.meta.label != e.label {
            return Err(Error::InvalidArgument(format!(
                "{}: manifest label {} disagrees with file label {}",
                e.path, e.label, cube.meta.label
            )));
        }
        if cube.meta.layout.is_none() {
            cube.meta.layout = e.layout;
        }
        cubes.push(cube);
    }
    let splits = entries
        .iter()
        .map(|e| e.split)
        .collect::<Option<Vec<_>>>()
        .filter(|s| !s.is_empty());
    Ok(Dataset { cubes, splits })
}
