//! File-level commands behind the `svsjoin` binary: generate, join, check,
//! bench.

pub mod bench;
pub mod format;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::time::Instant;

pub use bench::{run_sweep, BenchParams, BenchReport, BenchRow, Sweep};
pub use format::{format_stats, read_dataset, read_dataset_file, read_pairs, write_dataset, write_dataset_file, write_pairs};

use crate::datagen::{generate, GenSpec};
use crate::error::{Error, Result};
use crate::join::JoinOutput;
use crate::model::{build_vocabulary, Algorithm, JoinConfig, PairSet};
use crate::oracle::brute_force_join;

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const USAGE: i32 = 1;
    pub const RUNTIME: i32 = 2;
    pub const MISMATCH: i32 = 3;
}

/// Exit code for an error: bad input or arguments are usage errors.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Parse { .. }
        | Error::InvalidThreshold { .. }
        | Error::InvalidConfig(_)
        | Error::InvalidSpec(_)
        | Error::ZeroGeoThreshold => exit::USAGE,
        _ => exit::RUNTIME,
    }
}

fn open_out(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(std::io::stdout().lock())),
    })
}

/// Writes a generated dataset; returns the record count.
pub fn cmd_generate(spec: &GenSpec, output: Option<&Path>) -> Result<usize> {
    let data = generate(spec)?;
    write_dataset(open_out(output)?, &data)?;
    Ok(data.len())
}

/// Joins a dataset file and writes `id_a id_b` lines. Returns the output and
/// the wall time of the join itself.
pub fn cmd_join(input: &Path, output: Option<&Path>, config: &JoinConfig) -> Result<(JoinOutput, f64)> {
    let data = read_dataset_file(input)?;
    let start = Instant::now();
    let out = crate::join(&data, config)?;
    let secs = start.elapsed().as_secs_f64();
    write_pairs(open_out(output)?, &out.pairs)?;
    Ok((out, secs))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckReport {
    pub algorithm: Algorithm,
    pub pairs: usize,
    /// In the oracle result but not the algorithm's.
    pub missing: Vec<(u64, u64)>,
    /// In the algorithm's result but not the oracle's.
    pub extra: Vec<(u64, u64)>,
}

impl CheckReport {
    pub fn agrees(&self) -> bool {
        self.missing.is_empty() && self.extra.is_empty()
    }
}

fn diff(a: &PairSet, b: &PairSet) -> Vec<(u64, u64)> {
    a.iter().copied().filter(|&(x, y)| !b.contains(x, y)).collect()
}

/// Runs the configured algorithm and the brute-force join on one file and
/// compares the pair sets.
pub fn cmd_check(input: &Path, config: &JoinConfig) -> Result<CheckReport> {
    let data = read_dataset_file(input)?;
    let vocab = build_vocabulary(&data, config.weight_scheme);
    let got = crate::join_with(&data, &vocab, config)?.pairs;
    let want = brute_force_join(&data, &vocab, config)?.pairs;
    Ok(CheckReport {
        algorithm: config.algorithm,
        pairs: want.len(),
        missing: diff(&want, &got),
        extra: diff(&got, &want),
    })
}

/// Runs one sweep and writes its report.
pub fn cmd_bench(sweep: Sweep, params: &BenchParams, output: Option<&Path>) -> Result<BenchReport> {
    let report = run_sweep(sweep, params)?;
    let mut w = open_out(output)?;
    w.write_all(report.to_tsv().as_bytes())?;
    w.flush()?;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::GeoImage;

    fn fixture(dir: &Path) -> std::path::PathBuf {
        let p = dir.join("three.txt");
        std::fs::write(&p, "0 0 0 1 2 3\n1 3 4 1 2 3 4\n2 100 0 1\n").unwrap();
        p
    }

    #[test]
    fn join_fixture_writes_one_line() {
        let dir = tempfile::tempdir().unwrap();
        let input = fixture(dir.path());
        let out = dir.path().join("pairs.txt");
        let cfg = JoinConfig::new(0.06, 0.7);
        let (res, _) = cmd_join(&input, Some(&out), &cfg).unwrap();
        assert_eq!(res.stats.results, 1);
        assert_eq!(std::fs::read_to_string(&out).unwrap(), "0 1\n");
    }

    #[test]
    fn oracle_and_baseline_files_identical() {
        let dir = tempfile::tempdir().unwrap();
        let input = dir.path().join("d.txt");
        let spec = GenSpec {
            n_records: 400,
            vocab_size: 40,
            tokens_per_record: 5.0,
            ..GenSpec::default()
        };
        assert_eq!(cmd_generate(&spec, Some(&input)).unwrap(), 400);
        let mut files = Vec::new();
        for algo in [Algorithm::Oracle, Algorithm::Baseline] {
            let out = dir.path().join(format!("{algo}.txt"));
            cmd_join(&input, Some(&out), &JoinConfig::new(0.2, 0.5).with_algorithm(algo)).unwrap();
            files.push(std::fs::read(&out).unwrap());
        }
        assert!(!files[0].is_empty());
        assert_eq!(files[0], files[1]);
    }

    #[test]
    fn generate_is_deterministic() {
        let dir = tempfile::tempdir().unwrap();
        let spec = GenSpec {
            n_records: 100,
            ..GenSpec::default()
        };
        let (a, b) = (dir.path().join("a"), dir.path().join("b"));
        cmd_generate(&spec, Some(&a)).unwrap();
        cmd_generate(&spec, Some(&b)).unwrap();
        assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
        assert_eq!(std::fs::read_to_string(&a).unwrap().lines().count(), 100);
    }

    #[test]
    fn check_and_exit_codes() {
        let dir = tempfile::tempdir().unwrap();
        let input = fixture(dir.path());
        let report = cmd_check(&input, &JoinConfig::new(0.06, 0.7).with_algorithm(Algorithm::Grid)).unwrap();
        assert!(report.agrees());
        assert_eq!(report.pairs, 1);

        let bad = dir.path().join("bad.txt");
        std::fs::write(&bad, "0 0 0 1\n1 oops 0 1\n").unwrap();
        let err = cmd_join(&bad, None, &JoinConfig::default()).unwrap_err();
        assert_eq!(exit_code(&err), exit::USAGE);
        assert!(err.to_string().contains('2'));

        let same = dir.path().join("same.txt");
        write_dataset_file(&same, &[GeoImage::new(0, 1.0, 1.0, vec![1]), GeoImage::new(1, 1.0, 1.0, vec![1])]).unwrap();
        let err = cmd_join(&same, None, &JoinConfig::default()).unwrap_err();
        assert_eq!(exit_code(&err), exit::RUNTIME);
    }
}
