//! On-disk memo of fundamental units.
//!
//! One record per line, `m x y den norm`, all decimal, `norm` being `1` or
//! `-1`. New units are appended as they are computed; [`UnitCache::compact`]
//! rewrites the file sorted by `m` with duplicates removed. Loaded records
//! must satisfy `x² − m·y² = norm·den²`; others are skipped with a warning.

use std::collections::HashMap;
use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::{Mutex, RwLock};

use num_bigint::BigUint;
use scholz_core::pell::{fundamental_unit, QuadUnit, UnitSource};
use scholz_core::{Result, Sign};

use crate::Error;

pub struct UnitCache {
    units: RwLock<HashMap<u64, QuadUnit>>,
    // The only writer of the file; `None` when running uncached.
    writer: Mutex<Option<BufWriter<File>>>,
    path: Option<PathBuf>,
    warnings: Mutex<Vec<String>>,
}

impl UnitCache {
    /// A cache that lives only for this process.
    pub fn in_memory() -> Self {
        UnitCache { units: RwLock::default(), writer: Mutex::new(None), path: None, warnings: Mutex::default() }
    }

    /// Loads `path` (a missing file is an empty cache) and opens it for
    /// appending. IO problems turn into warnings and an uncached run.
    pub fn open(path: impl AsRef<Path>) -> Self {
        let path = path.as_ref().to_path_buf();
        let mut cache = Self::in_memory();
        let mut warnings = Vec::new();
        match File::open(&path) {
            Ok(f) => match read_records(BufReader::new(f)) {
                Ok((units, skipped)) => {
                    warnings.extend(skipped);
                    *cache.units.get_mut().unwrap() = units;
                }
                Err(e) => warnings.push(format!("cache {}: {e}", path.display())),
            },
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => {}
            Err(e) => warnings.push(format!("cache {}: {e}", path.display())),
        }
        match OpenOptions::new().create(true).append(true).open(&path) {
            Ok(f) => {
                *cache.writer.get_mut().unwrap() = Some(BufWriter::new(f));
                cache.path = Some(path);
            }
            Err(e) => warnings.push(format!("cache {} is not writable ({e}); continuing uncached", path.display())),
        }
        *cache.warnings.get_mut().unwrap() = warnings;
        cache
    }

    pub fn path(&self) -> Option<&Path> {
        self.path.as_deref()
    }

    pub fn len(&self) -> usize {
        self.units.read().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn contains(&self, m: u64) -> bool {
        self.units.read().unwrap().contains_key(&m)
    }

    pub fn take_warnings(&self) -> Vec<String> {
        std::mem::take(&mut self.warnings.lock().unwrap())
    }

    /// Rewrites the file with one sorted record per `m`.
    pub fn compact(&self) -> std::result::Result<(), Error> {
        let Some(path) = &self.path else { return Ok(()) };
        let mut writer = self.writer.lock().unwrap();
        if let Some(w) = writer.as_mut() {
            w.flush()?;
        }
        let units = self.units.read().unwrap();
        let mut ms: Vec<&u64> = units.keys().collect();
        ms.sort_unstable();
        let tmp = path.with_extension("tmp");
        {
            let mut out = BufWriter::new(File::create(&tmp)?);
            for m in ms {
                writeln!(out, "{}", format_record(&units[m]))?;
            }
            out.flush()?;
        }
        fs::rename(&tmp, path)?;
        *writer = Some(BufWriter::new(OpenOptions::new().append(true).open(path)?));
        Ok(())
    }

    fn append(&self, unit: &QuadUnit) {
        let mut writer = self.writer.lock().unwrap();
        let Some(w) = writer.as_mut() else { return };
        let res = writeln!(w, "{}", format_record(unit)).and_then(|_| w.flush());
        if let Err(e) = res {
            self.warnings.lock().unwrap().push(format!("cache write failed ({e}); continuing uncached"));
            *writer = None;
        }
    }
}

impl UnitSource for UnitCache {
    fn unit(&self, m: u64) -> Result<QuadUnit> {
        if let Some(u) = self.units.read().unwrap().get(&m) {
            return Ok(u.clone());
        }
        let unit = fundamental_unit(m)?;
        let fresh = self.units.write().unwrap().insert(m, unit.clone()).is_none();
        if fresh {
            self.append(&unit);
        }
        Ok(unit)
    }
}

pub fn format_record(u: &QuadUnit) -> String {
    format!("{} {} {} {} {}", u.m, u.x, u.y, u.den, u.norm.to_i8())
}

pub fn parse_record(line: &str) -> std::result::Result<QuadUnit, String> {
    let fields: Vec<&str> = line.split_whitespace().collect();
    let [m, x, y, den, norm] = fields[..] else {
        return Err(format!("expected 5 fields, found {}", fields.len()));
    };
    let m: u64 = m.parse().map_err(|_| format!("bad m {m:?}"))?;
    let x: BigUint = x.parse().map_err(|_| format!("bad x {x:?}"))?;
    let y: BigUint = y.parse().map_err(|_| format!("bad y {y:?}"))?;
    let den: u8 = match den {
        "1" => 1,
        "2" => 2,
        _ => return Err(format!("bad den {den:?}")),
    };
    let norm = match norm {
        "1" => Sign::Plus,
        "-1" => Sign::Minus,
        _ => return Err(format!("bad norm {norm:?}")),
    };
    let unit = QuadUnit { m, x, y, den, norm };
    if !unit.norm_relation_holds() {
        return Err(format!("record for m = {m} fails x² − m·y² = norm·den²"));
    }
    Ok(unit)
}

type Loaded = (HashMap<u64, QuadUnit>, Vec<String>);

fn read_records(reader: impl BufRead) -> std::io::Result<Loaded> {
    let mut units = HashMap::new();
    let mut skipped = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        match parse_record(&line) {
            Ok(u) => {
                units.insert(u.m, u);
            }
            Err(msg) => skipped.push(format!("cache line {}: {msg}; skipped", i + 1)),
        }
    }
    Ok((units, skipped))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn record_round_trip() {
        for m in [2, 5, 13, 94, 151, 1001] {
            let u = fundamental_unit(m).unwrap();
            assert_eq!(parse_record(&format_record(&u)).unwrap(), u);
        }
        assert_eq!(format_record(&fundamental_unit(5).unwrap()), "5 1 1 2 -1");
    }

    #[test]
    fn bad_records_are_rejected() {
        assert!(parse_record("5 1 1 2").is_err());
        assert!(parse_record("5 1 1 3 -1").is_err());
        assert!(parse_record("5 2 1 2 -1").is_err());
        assert!(parse_record("5 1 1 2 0").is_err());
    }
}
