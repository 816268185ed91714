//! On-disk cache of potential tables. The byte layout is described in
//! `docs/cache-format.md`.

use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::table::{PotentialTable, TableSpec};
use crate::error::{Error, Result};
use crate::optics::{MirrorSpec, PolarizabilityModel};
use crate::units::Constants;

pub const CACHE_FORMAT_VERSION: u32 = 1;
const MAGIC: &str = "# cpqr potential table";

/// Everything a table depends on; its JSON form is what gets hashed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct TableKey {
    format: u32,
    mirror: MirrorSpec,
    polarizability: PolarizabilityModel,
    spec: TableSpec,
    constants: Constants,
}

impl TableKey {
    fn json(&self) -> String {
        serde_json::to_string(self).expect("table key serializes")
    }
}

fn hash_json(json: &str) -> String {
    let digest = Sha256::digest(json.as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// Hex SHA-256 of the table key.
pub fn spec_hash(
    mirror: &MirrorSpec,
    polarizability: &PolarizabilityModel,
    spec: &TableSpec,
    constants: &Constants,
) -> String {
    let key = TableKey {
        format: CACHE_FORMAT_VERSION,
        mirror: mirror.clone(),
        polarizability: polarizability.clone(),
        spec: *spec,
        constants: *constants,
    };
    hash_json(&key.json())
}

pub fn cache_path(dir: &Path, hash: &str) -> PathBuf {
    dir.join(format!("potential-{hash}.table"))
}

fn cache_err(path: &Path, what: impl std::fmt::Display) -> Error {
    Error::Cache(format!("{}: {what}", path.display()))
}

/// Writes `table` atomically (temporary file, then rename).
pub fn write_table(table: &PotentialTable, path: &Path) -> Result<()> {
    let key = TableKey {
        format: CACHE_FORMAT_VERSION,
        mirror: table.mirror.clone(),
        polarizability: table.polarizability.clone(),
        spec: table.spec,
        constants: table.constants,
    };
    let json = key.json();
    let tmp = path.with_extension("tmp");
    let write = || -> std::io::Result<()> {
        let mut w = BufWriter::new(File::create(&tmp)?);
        writeln!(w, "{MAGIC}")?;
        writeln!(w, "format {CACHE_FORMAT_VERSION}")?;
        writeln!(w, "hash {}", hash_json(&json))?;
        writeln!(w, "key {json}")?;
        writeln!(w, "c3 {:e}", table.c3)?;
        writeln!(w, "end_slopes {:e} {:e}", table.end_slopes.0, table.end_slopes.1)?;
        writeln!(w, "points {}", table.z_grid.len())?;
        for ((z, v), e) in table.z_grid.iter().zip(&table.values).zip(&table.errors) {
            writeln!(w, "{z:e} {v:e} {e:e}")?;
        }
        writeln!(w, "end")?;
        w.into_inner()?.sync_all()
    };
    write().map_err(|e| cache_err(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| cache_err(path, e))
}

/// Reads a cached table, checking its hash against `expected` when given.
pub fn read_table(path: &Path, expected: Option<&str>) -> Result<PotentialTable> {
    let file = File::open(path).map_err(|e| cache_err(path, e))?;
    let mut lines = BufReader::new(file).lines();
    let mut next = |what: &str| -> Result<String> {
        match lines.next() {
            Some(Ok(l)) => Ok(l),
            Some(Err(e)) => Err(cache_err(path, e)),
            None => Err(cache_err(path, format!("truncated before {what}"))),
        }
    };
    let field = |line: String, name: &str| -> Result<String> {
        line.strip_prefix(name)
            .and_then(|r| r.strip_prefix(' '))
            .map(str::to_owned)
            .ok_or_else(|| cache_err(path, format!("expected `{name}` line")))
    };
    let num = |s: &str| -> Result<f64> { s.parse().map_err(|_| cache_err(path, format!("bad number `{s}`"))) };

    if next("header")? != MAGIC {
        return Err(cache_err(path, "not a potential table"));
    }
    let format = field(next("format")?, "format")?;
    if format != CACHE_FORMAT_VERSION.to_string() {
        return Err(cache_err(path, format!("unsupported format {format}")));
    }
    let hash = field(next("hash")?, "hash")?;
    let json = field(next("key")?, "key")?;
    if hash_json(&json) != hash {
        return Err(cache_err(path, "key does not match its hash"));
    }
    if let Some(want) = expected {
        if want != hash {
            return Err(cache_err(path, "hash differs from the requested table"));
        }
    }
    let key: TableKey = serde_json::from_str(&json).map_err(|e| cache_err(path, e))?;
    let c3 = num(&field(next("c3")?, "c3")?)?;
    let slopes = field(next("end_slopes")?, "end_slopes")?;
    let mut sl = slopes.split_whitespace();
    let end_slopes = (num(sl.next().unwrap_or(""))?, num(sl.next().unwrap_or(""))?);
    let count: usize = field(next("points")?, "points")?
        .parse()
        .map_err(|_| cache_err(path, "bad point count"))?;
    let (mut z, mut v, mut e) = (Vec::with_capacity(count), Vec::with_capacity(count), Vec::with_capacity(count));
    for _ in 0..count {
        let line = next("samples")?;
        let cols: Vec<&str> = line.split_whitespace().collect();
        if cols.len() != 3 {
            return Err(cache_err(path, format!("bad sample line `{line}`")));
        }
        z.push(num(cols[0])?);
        v.push(num(cols[1])?);
        e.push(num(cols[2])?);
    }
    if next("end marker")? != "end" {
        return Err(cache_err(path, "missing end marker"));
    }
    if z != key.spec.grid() {
        return Err(cache_err(path, "grid does not match the table spec"));
    }
    PotentialTable::assemble(key.mirror, key.polarizability, key.spec, key.constants, z, v, e, c3, end_slopes)
}

/// Returns the cached table for this configuration, building and storing
/// it when absent or unreadable. With `dir = None` the cache is bypassed.
/// Concurrent processes are serialized by an advisory lock on a sidecar
/// lock file.
pub fn load_or_build(
    dir: Option<&Path>,
    mirror: &MirrorSpec,
    polarizability: &PolarizabilityModel,
    spec: TableSpec,
    constants: &Constants,
) -> Result<PotentialTable> {
    let Some(dir) = dir else {
        return PotentialTable::build(mirror, polarizability, spec, constants);
    };
    fs::create_dir_all(dir).map_err(|e| cache_err(dir, e))?;
    let hash = spec_hash(mirror, polarizability, &spec, constants);
    let path = cache_path(dir, &hash);
    let lock_path = path.with_extension("lock");
    let lock = OpenOptions::new()
        .create(true)
        .truncate(false)
        .write(true)
        .open(&lock_path)
        .map_err(|e| cache_err(&lock_path, e))?;
    lock.lock().map_err(|e| cache_err(&lock_path, e))?;
    if path.exists() {
        if let Ok(table) = read_table(&path, Some(&hash)) {
            return Ok(table);
        }
    }
    let table = PotentialTable::build(mirror, polarizability, spec, constants)?;
    write_table(&table, &path)?;
    Ok(table)
}
