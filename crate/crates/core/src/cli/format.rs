//! Line formats. Datasets: `id x y token...` per line, whitespace separated;
//! blank lines and lines starting with `#` are skipped. Pairs: `id_a id_b`.

use std::collections::HashSet;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::join::JoinStats;
use crate::model::{GeoImage, PairSet};

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

pub fn read_dataset(reader: impl Read) -> Result<Vec<GeoImage>> {
    let mut out = Vec::new();
    let mut ids = HashSet::new();
    for (k, line) in BufReader::new(reader).lines().enumerate() {
        let line = line?;
        let n = k + 1;
        let text = line.trim();
        if text.is_empty() || text.starts_with('#') {
            continue;
        }
        let mut fields = text.split_whitespace();
        let mut next = |what: &str| fields.next().ok_or_else(|| parse_err(n, format!("missing {what}")));
        let id: u64 = next("id")?.parse().map_err(|e| parse_err(n, format!("bad id: {e}")))?;
        let x: f64 = next("x")?.parse().map_err(|e| parse_err(n, format!("bad x: {e}")))?;
        let y: f64 = next("y")?.parse().map_err(|e| parse_err(n, format!("bad y: {e}")))?;
        if !x.is_finite() || !y.is_finite() {
            return Err(parse_err(n, "coordinates must be finite"));
        }
        let tokens = fields
            .map(|f| f.parse::<u32>().map_err(|e| parse_err(n, format!("bad token {f:?}: {e}"))))
            .collect::<Result<Vec<u32>>>()?;
        if !ids.insert(id) {
            return Err(parse_err(n, format!("duplicate id {id}")));
        }
        out.push(GeoImage::new(id, x, y, tokens));
    }
    Ok(out)
}

pub fn read_dataset_file(path: &Path) -> Result<Vec<GeoImage>> {
    read_dataset(File::open(path)?)
}

pub fn write_dataset(mut w: impl Write, records: &[GeoImage]) -> Result<()> {
    for r in records {
        write!(w, "{} {} {}", r.id, r.x, r.y)?;
        for t in &r.tokens {
            write!(w, " {t}")?;
        }
        writeln!(w)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_dataset_file(path: &Path, records: &[GeoImage]) -> Result<()> {
    write_dataset(BufWriter::new(File::create(path)?), records)
}

pub fn write_pairs(mut w: impl Write, pairs: &PairSet) -> Result<()> {
    for (a, b) in pairs.iter() {
        writeln!(w, "{a} {b}")?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_pairs(reader: impl Read) -> Result<PairSet> {
    let mut pairs = Vec::new();
    for (k, line) in BufReader::new(reader).lines().enumerate() {
        let line = line?;
        let text = line.trim();
        if text.is_empty() {
            continue;
        }
        let f: Vec<&str> = text.split_whitespace().collect();
        if f.len() != 2 {
            return Err(parse_err(k + 1, "expected two ids"));
        }
        let a = f[0].parse().map_err(|e| parse_err(k + 1, format!("{e}")))?;
        let b = f[1].parse().map_err(|e| parse_err(k + 1, format!("{e}")))?;
        pairs.push((a, b));
    }
    Ok(PairSet::from_pairs(pairs))
}

/// One-line summary for the side channel.
pub fn format_stats(stats: &JoinStats, seconds: f64) -> String {
    format!(
        "time={seconds:.6}s candidates={} verified={} results={} index_entries={} index_bytes={}",
        stats.candidates, stats.verified, stats.results, stats.index_entries, stats.index_bytes
    )
}
