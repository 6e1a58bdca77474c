//! On-disk caches of generator expansions and `H(r, N)` values.
//!
//! Series file: `SIEGELQEXP 1`, then `<weight> <traceBound> <count>`, then
//! `count` lines `a b c num/den` in canonical index order. H-table file:
//! `COHENH 1`, then lines `r N num/den`. A JSON `MANIFEST` records the
//! SHA-256 of every file; a mismatch is reported as corruption.

use std::collections::BTreeMap;
use std::fs;
use std::io::{self, BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use siegel_core::engine::GeneratorSource;
use siegel_core::generators::{extend_generator, igusa_generator_with, CohenTable, GeneratorId};
use siegel_core::index::FourierIndex;
use siegel_core::series::TruncatedSeries;

pub const SERIES_HEADER: &str = "SIEGELQEXP 1";
pub const COHEN_HEADER: &str = "COHENH 1";
pub const MANIFEST: &str = "MANIFEST";
const COHEN_FILE: &str = "cohen_h.txt";

#[derive(Debug, thiserror::Error)]
pub enum CacheError {
    #[error("I/O error on {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{0} is missing")]
    Missing(PathBuf),
    #[error("{path} is corrupt: {reason}")]
    Corrupt { path: PathBuf, reason: String },
    #[error(transparent)]
    Core(#[from] siegel_core::Error),
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> CacheError + '_ {
    move |source| {
        if source.kind() == io::ErrorKind::NotFound {
            CacheError::Missing(path.to_path_buf())
        } else {
            CacheError::Io {
                path: path.to_path_buf(),
                source,
            }
        }
    }
}

fn fmt_rational(r: &BigRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Parses `n/d` or `n`; the denominator must be positive.
pub fn parse_rational(s: &str) -> Option<BigRational> {
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n.trim().parse::<BigInt>().ok()?, d.trim().parse::<BigInt>().ok()?),
        None => (s.trim().parse::<BigInt>().ok()?, BigInt::from(1)),
    };
    if d <= BigInt::from(0) {
        return None;
    }
    Some(BigRational::new(n, d))
}

pub fn write_series<W: Write>(mut w: W, s: &TruncatedSeries) -> io::Result<()> {
    writeln!(w, "{SERIES_HEADER}")?;
    writeln!(w, "{} {} {}", s.weight(), s.trace_bound(), s.len())?;
    for (n, v) in s.coefficients() {
        writeln!(w, "{} {} {} {}", n.a, n.b, n.c, fmt_rational(v))?;
    }
    Ok(())
}

pub fn series_to_string(s: &TruncatedSeries) -> String {
    let mut out = Vec::new();
    write_series(&mut out, s).expect("writing to memory");
    String::from_utf8(out).expect("ASCII output")
}

/// Reads a series file; the error string says what is wrong.
pub fn read_series<R: BufRead>(r: R) -> Result<TruncatedSeries, String> {
    let mut lines = r.lines();
    let mut next = || -> Result<Option<String>, String> { lines.next().transpose().map_err(|e| e.to_string()) };
    if next()?.as_deref() != Some(SERIES_HEADER) {
        return Err(format!("first line is not `{SERIES_HEADER}`"));
    }
    let head = next()?.ok_or("missing size line")?;
    let f: Vec<u64> = head
        .split_whitespace()
        .map(|x| x.parse().map_err(|_| format!("bad size line `{head}`")))
        .collect::<Result<_, _>>()?;
    let [weight, bound, count] = f[..] else {
        return Err(format!("bad size line `{head}`"));
    };
    let mut entries = Vec::with_capacity(count as usize);
    let mut prev: Option<FourierIndex> = None;
    for i in 0..count {
        let line = next()?.ok_or_else(|| format!("expected {count} entries, found {i}"))?;
        let p: Vec<&str> = line.split_whitespace().collect();
        if p.len() != 4 {
            return Err(format!("bad entry `{line}`"));
        }
        let num = |x: &str| x.parse::<i64>().map_err(|_| format!("bad entry `{line}`"));
        let n = FourierIndex::new(num(p[0])?, num(p[1])?, num(p[2])?).map_err(|e| e.to_string())?;
        let v = parse_rational(p[3]).ok_or_else(|| format!("bad coefficient `{}`", p[3]))?;
        if prev.is_some_and(|q| q >= n) {
            return Err(format!("entry `{line}` out of canonical order"));
        }
        if n.trace() as u64 > bound {
            return Err(format!("entry `{line}` above the trace bound"));
        }
        prev = Some(n);
        entries.push((n, v));
    }
    if let Some(extra) = next()? {
        if !extra.trim().is_empty() {
            return Err(format!("trailing data `{extra}`"));
        }
    }
    let s = TruncatedSeries::new(weight as u32, bound as u32, entries).map_err(|e| e.to_string())?;
    if s.len() as u64 != count {
        return Err("zero coefficients stored".into());
    }
    Ok(s)
}

pub fn write_cohen<W: Write>(mut w: W, h: &CohenTable) -> io::Result<()> {
    writeln!(w, "{COHEN_HEADER}")?;
    for ((r, n), v) in h.entries() {
        writeln!(w, "{r} {n} {}", fmt_rational(v))?;
    }
    Ok(())
}

pub fn read_cohen<R: BufRead>(r: R, h: &mut CohenTable) -> Result<usize, String> {
    let mut lines = r.lines();
    let first = lines.next().transpose().map_err(|e| e.to_string())?;
    if first.as_deref() != Some(COHEN_HEADER) {
        return Err(format!("first line is not `{COHEN_HEADER}`"));
    }
    let mut count = 0;
    for line in lines {
        let line = line.map_err(|e| e.to_string())?;
        if line.trim().is_empty() {
            continue;
        }
        let p: Vec<&str> = line.split_whitespace().collect();
        let bad = || format!("bad entry `{line}`");
        if p.len() != 3 {
            return Err(bad());
        }
        let r: u32 = p[0].parse().map_err(|_| bad())?;
        let n: u64 = p[1].parse().map_err(|_| bad())?;
        h.insert(r, n, parse_rational(p[2]).ok_or_else(bad)?);
        count += 1;
    }
    Ok(count)
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeriesEntry {
    pub generator: String,
    pub trace_bound: u32,
    pub file: String,
    pub sha256: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CohenEntry {
    pub file: String,
    pub entries: usize,
    pub max_n: u64,
    pub sha256: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub series: Vec<SeriesEntry>,
    pub cohen_h: Option<CohenEntry>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn series_file_name(id: GeneratorId, t: u32) -> String {
    format!("{}_T{t}.qexp", id.name())
}

/// A cache directory with its manifest.
pub struct CacheDir {
    root: PathBuf,
    manifest: Manifest,
}

impl CacheDir {
    /// Opens (creating if needed) the directory; an absent manifest means an
    /// empty cache.
    pub fn open(root: impl Into<PathBuf>) -> Result<CacheDir, CacheError> {
        let root = root.into();
        fs::create_dir_all(&root).map_err(io_err(&root))?;
        let path = root.join(MANIFEST);
        let manifest = match fs::read(&path) {
            Ok(bytes) => serde_json::from_slice(&bytes).map_err(|e| CacheError::Corrupt {
                path: path.clone(),
                reason: e.to_string(),
            })?,
            Err(e) if e.kind() == io::ErrorKind::NotFound => Manifest::default(),
            Err(e) => return Err(io_err(&path)(e)),
        };
        Ok(CacheDir { root, manifest })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn manifest(&self) -> &Manifest {
        &self.manifest
    }

    fn save_manifest(&self) -> Result<(), CacheError> {
        let path = self.root.join(MANIFEST);
        let json = serde_json::to_vec_pretty(&self.manifest).expect("manifest serializes");
        write_atomic(&path, &json)
    }

    fn read_checked(&self, file: &str, sha: &str) -> Result<Vec<u8>, CacheError> {
        let path = self.root.join(file);
        let bytes = fs::read(&path).map_err(io_err(&path))?;
        let got = sha256_hex(&bytes);
        if got != sha {
            return Err(CacheError::Corrupt {
                path,
                reason: format!("checksum {got} does not match the manifest"),
            });
        }
        Ok(bytes)
    }

    /// The largest cached trace bound for `id`.
    pub fn cached_trace(&self, id: GeneratorId) -> Option<u32> {
        self.entries(id).map(|e| e.trace_bound).max()
    }

    fn entries(&self, id: GeneratorId) -> impl Iterator<Item = &SeriesEntry> {
        self.manifest.series.iter().filter(move |e| e.generator == id.name())
    }

    fn read_entry(&self, e: &SeriesEntry) -> Result<TruncatedSeries, CacheError> {
        let bytes = self.read_checked(&e.file, &e.sha256)?;
        let path = self.root.join(&e.file);
        let s = read_series(BufReader::new(&bytes[..])).map_err(|reason| CacheError::Corrupt {
            path: path.clone(),
            reason,
        })?;
        if s.trace_bound() != e.trace_bound || s.weight() != generator_weight(&e.generator) {
            return Err(CacheError::Corrupt {
                path,
                reason: "header disagrees with the manifest".into(),
            });
        }
        Ok(s)
    }

    /// Series for `id` truncated at `t` from the smallest sufficient file.
    pub fn load(&self, id: GeneratorId, t: u32) -> Result<TruncatedSeries, CacheError> {
        let best = self
            .entries(id)
            .filter(|e| e.trace_bound >= t)
            .min_by_key(|e| e.trace_bound)
            .ok_or_else(|| CacheError::Missing(self.root.join(series_file_name(id, t))))?;
        Ok(self.read_entry(best)?.truncate(t))
    }

    /// Series for `id` to trace `t`, extending the largest cached prefix
    /// when needed. Returns the series and whether a file was written.
    pub fn ensure(&mut self, id: GeneratorId, t: u32, h: &mut CohenTable) -> Result<(TruncatedSeries, bool), CacheError> {
        if self.cached_trace(id).is_some_and(|c| c >= t) {
            return Ok((self.load(id, t)?, false));
        }
        let prefix = match self.entries(id).max_by_key(|e| e.trace_bound).cloned() {
            Some(e) => Some(self.read_entry(&e)?),
            None => None,
        };
        let s = match prefix {
            Some(p) => extend_generator(&p, id, t, h)?,
            None => igusa_generator_with(id, t, h)?,
        };
        self.store(id, &s)?;
        Ok((s, true))
    }

    /// Writes `s` as the cache file of `id` at its trace bound.
    pub fn store(&mut self, id: GeneratorId, s: &TruncatedSeries) -> Result<(), CacheError> {
        let file = series_file_name(id, s.trace_bound());
        let text = series_to_string(s);
        write_atomic(&self.root.join(&file), text.as_bytes())?;
        self.manifest.series.retain(|e| e.file != file);
        self.manifest.series.push(SeriesEntry {
            generator: id.name().to_string(),
            trace_bound: s.trace_bound(),
            file,
            sha256: sha256_hex(text.as_bytes()),
        });
        self.manifest
            .series
            .sort_by(|a, b| (&a.generator, a.trace_bound).cmp(&(&b.generator, b.trace_bound)));
        self.save_manifest()
    }

    /// Seeds `h` from the cached table; returns the number of entries read.
    pub fn load_cohen(&self, h: &mut CohenTable) -> Result<usize, CacheError> {
        let Some(e) = &self.manifest.cohen_h else {
            return Ok(0);
        };
        let bytes = self.read_checked(&e.file, &e.sha256)?;
        read_cohen(BufReader::new(&bytes[..]), h).map_err(|reason| CacheError::Corrupt {
            path: self.root.join(&e.file),
            reason,
        })
    }

    /// Writes `h` unless the cached table already has as many entries.
    pub fn store_cohen(&mut self, h: &CohenTable) -> Result<bool, CacheError> {
        if self.manifest.cohen_h.as_ref().is_some_and(|e| e.entries >= h.len()) {
            return Ok(false);
        }
        let mut text = Vec::new();
        write_cohen(&mut text, h).expect("writing to memory");
        write_atomic(&self.root.join(COHEN_FILE), &text)?;
        self.manifest.cohen_h = Some(CohenEntry {
            file: COHEN_FILE.to_string(),
            entries: h.len(),
            max_n: h.entries().map(|((_, n), _)| *n).max().unwrap_or(0),
            sha256: sha256_hex(&text),
        });
        self.save_manifest()?;
        Ok(true)
    }
}

fn generator_weight(name: &str) -> u32 {
    GeneratorId::from_name(name).map_or(u32::MAX, |g| g.weight())
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CacheError> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, bytes).map_err(io_err(&tmp))?;
    fs::rename(&tmp, path).map_err(io_err(path))
}

/// Outcome of materializing all four generators.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExpandReport {
    pub written: Vec<String>,
    pub cohen_written: bool,
}

/// Makes every generator available to trace `t` in `dir`.
pub fn expand_generators(dir: &mut CacheDir, t: u32) -> Result<ExpandReport, CacheError> {
    let mut h = CohenTable::new();
    dir.load_cohen(&mut h)?;
    let mut written = Vec::new();
    for id in GeneratorId::ALL {
        let (_, wrote) = dir.ensure(id, t, &mut h)?;
        if wrote {
            written.push(series_file_name(id, t));
        }
    }
    let cohen_written = dir.store_cohen(&h)?;
    Ok(ExpandReport { written, cohen_written })
}

/// A generator source backed by a cache directory.
pub struct DiskSource {
    dir: CacheDir,
    h: CohenTable,
    loaded: BTreeMap<GeneratorId, TruncatedSeries>,
}

impl DiskSource {
    pub fn new(mut dir: CacheDir) -> Result<DiskSource, CacheError> {
        let mut h = CohenTable::new();
        if let Err(CacheError::Corrupt { .. }) = dir.load_cohen(&mut h) {
            // a bad H table only costs recomputation
            dir.manifest.cohen_h = None;
            h = CohenTable::new();
        }
        Ok(DiskSource {
            dir,
            h,
            loaded: BTreeMap::new(),
        })
    }

    /// Persists the H values computed so far.
    pub fn flush(&mut self) -> Result<(), CacheError> {
        self.dir.store_cohen(&self.h).map(|_| ())
    }

    pub fn dir(&self) -> &CacheDir {
        &self.dir
    }
}

impl GeneratorSource for DiskSource {
    fn generator(&mut self, id: GeneratorId, t: u32) -> Result<&TruncatedSeries, siegel_core::Error> {
        if self.loaded.get(&id).map_or(true, |s| s.trace_bound() < t) {
            let s = match self.dir.ensure(id, t, &mut self.h) {
                Ok((s, _)) => s,
                Err(CacheError::Core(e)) => return Err(e),
                // unusable cache: fall back to building in memory
                Err(_) => igusa_generator_with(id, t, &mut self.h)?,
            };
            self.loaded.insert(id, s);
        }
        Ok(&self.loaded[&id])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use siegel_core::generators::igusa_generator;

    #[test]
    fn series_round_trip_is_bit_exact() {
        let s = igusa_generator(GeneratorId::Chi10, 5).unwrap();
        let text = series_to_string(&s);
        assert!(text.starts_with("SIEGELQEXP 1\n10 5 "));
        let back = read_series(BufReader::new(text.as_bytes())).unwrap();
        assert_eq!(back, s);
        assert_eq!(series_to_string(&back), text);
    }

    #[test]
    fn malformed_series_files() {
        let bad = [
            "SIEGELQEXP 2\n4 0 1\n0 0 0 1/1\n",
            "SIEGELQEXP 1\n4 0 2\n0 0 0 1/1\n",
            "SIEGELQEXP 1\n4 1 2\n1 0 0 240/1\n0 0 0 1/1\n",
            "SIEGELQEXP 1\n4 0 1\n0 0 1 1/1\n",
            "SIEGELQEXP 1\n4 1 1\n1 3 0 1/1\n",
            "SIEGELQEXP 1\n4 1 1\n0 0 0 1/0\n",
            "SIEGELQEXP 1\n4 1 1\n0 0 0 0/1\n",
        ];
        for b in bad {
            assert!(read_series(BufReader::new(b.as_bytes())).is_err(), "{b}");
        }
    }

    #[test]
    fn cohen_round_trip() {
        let mut h = CohenTable::new();
        for n in 0..30 {
            h.h(5, n);
        }
        let mut text = Vec::new();
        write_cohen(&mut text, &h).unwrap();
        let mut back = CohenTable::new();
        assert_eq!(read_cohen(BufReader::new(&text[..]), &mut back).unwrap(), 30);
        assert!(back.entries().eq(h.entries()));
    }
}
