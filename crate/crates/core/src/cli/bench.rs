//! Parameter sweeps over synthetic data. Each sweep varies one workload axis
//! and holds the others at their defaults.

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use crate::datagen::{generate, GenSpec};
use crate::error::{Error, Result};
use crate::model::{build_vocabulary, Algorithm, JoinConfig, WeightScheme};

pub const DEFAULT_SIZE: usize = 300_000;
pub const DEFAULT_WORDS: f64 = 60.0;
pub const DEFAULT_GAMMA_G: f64 = 0.06;
pub const DEFAULT_GAMMA_V: f64 = 0.7;
pub const DEFAULT_SCALE: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sweep {
    Size,
    Words,
    GammaG,
    GammaV,
}

impl Sweep {
    pub const ALL: [Sweep; 4] = [Sweep::Size, Sweep::Words, Sweep::GammaG, Sweep::GammaV];

    pub fn points(&self) -> Vec<f64> {
        match self {
            Sweep::Size => vec![100_000.0, 200_000.0, 300_000.0, 400_000.0, 500_000.0],
            Sweep::Words => vec![20.0, 40.0, 60.0, 80.0, 100.0],
            Sweep::GammaG => vec![0.02, 0.04, 0.06, 0.08, 0.10],
            Sweep::GammaV => vec![0.5, 0.6, 0.7, 0.8, 0.9],
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Sweep::Size => "size",
            Sweep::Words => "words",
            Sweep::GammaG => "gamma_g",
            Sweep::GammaV => "gamma_v",
        }
    }
}

impl fmt::Display for Sweep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Sweep {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Sweep::ALL
            .into_iter()
            .find(|w| w.name() == s.to_ascii_lowercase().replace('-', "_"))
            .ok_or_else(|| Error::InvalidConfig(format!("unknown sweep {s:?}; expected size, words, gamma_g or gamma_v")))
    }
}

#[derive(Debug, Clone)]
pub struct BenchParams {
    /// Multiplies the dataset size axis.
    pub scale: f64,
    pub seed: u64,
    pub algorithms: Vec<Algorithm>,
    pub weights: WeightScheme,
    pub threads: usize,
    /// Per-run limit; an exceeded run is reported, not fatal.
    pub timeout: Option<Duration>,
    /// Template for everything the sweep does not set.
    pub base: JoinConfig,
    pub gen: GenSpec,
}

impl Default for BenchParams {
    fn default() -> Self {
        BenchParams {
            scale: DEFAULT_SCALE,
            seed: 42,
            algorithms: Algorithm::INDEXED.to_vec(),
            weights: WeightScheme::Uniform,
            threads: 1,
            timeout: None,
            base: JoinConfig::default(),
            gen: GenSpec::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub algorithm: Algorithm,
    pub value: f64,
    pub records: usize,
    /// `None` when the run timed out.
    pub seconds: Option<f64>,
    pub candidates: u64,
    pub verified: u64,
    pub results: u64,
    pub index_bytes: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchReport {
    pub sweep: Sweep,
    pub rows: Vec<BenchRow>,
}

impl BenchReport {
    pub const HEADER: &'static str = "sweep\talgorithm\tvalue\trecords\tseconds\tcandidates\tverified\tresults\tindex_bytes";

    pub fn to_tsv(&self) -> String {
        let mut s = String::from(Self::HEADER);
        s.push('\n');
        for r in &self.rows {
            let secs = r.seconds.map_or_else(|| "timeout".to_string(), |t| format!("{t:.6}"));
            s.push_str(&format!(
                "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\n",
                self.sweep,
                r.algorithm.short_name(),
                r.value,
                r.records,
                secs,
                r.candidates,
                r.verified,
                r.results,
                r.index_bytes
            ));
        }
        s
    }

    /// Whether every finished run at each sweep point returned the same number of pairs.
    pub fn results_agree(&self) -> bool {
        self.rows.iter().all(|a| {
            self.rows
                .iter()
                .filter(|b| b.value == a.value && a.seconds.is_some() && b.seconds.is_some())
                .all(|b| b.results == a.results)
        })
    }
}

fn spec_for(params: &BenchParams, records: usize, words: f64) -> GenSpec {
    GenSpec {
        n_records: records,
        tokens_per_record: words,
        seed: params.seed,
        ..params.gen.clone()
    }
}

pub fn run_sweep(sweep: Sweep, params: &BenchParams) -> Result<BenchReport> {
    if !(params.scale.is_finite() && params.scale > 0.0) {
        return Err(Error::InvalidConfig("scale must be positive".into()));
    }
    let scaled = |n: f64| ((n * params.scale).round() as usize).max(2);
    let mut rows = Vec::new();
    let fixed = match sweep {
        Sweep::Size => None,
        _ => {
            let words = if sweep == Sweep::Words { None } else { Some(DEFAULT_WORDS) };
            words.map(|w| generate(&spec_for(params, scaled(DEFAULT_SIZE as f64), w))).transpose()?
        }
    };

    for value in sweep.points() {
        let owned;
        let data = match (&fixed, sweep) {
            (Some(d), _) => d,
            (None, Sweep::Size) => {
                owned = generate(&spec_for(params, scaled(value), DEFAULT_WORDS))?;
                &owned
            }
            (None, _) => {
                owned = generate(&spec_for(params, scaled(DEFAULT_SIZE as f64), value))?;
                &owned
            }
        };
        let mut config = JoinConfig {
            gamma_g: DEFAULT_GAMMA_G,
            gamma_v: DEFAULT_GAMMA_V,
            weight_scheme: params.weights,
            threads: params.threads,
            ..params.base.clone()
        };
        match sweep {
            Sweep::GammaG => config.gamma_g = value,
            Sweep::GammaV => config.gamma_v = value,
            _ => {}
        }
        let vocab = build_vocabulary(data, params.weights);
        for &algorithm in &params.algorithms {
            let config = JoinConfig {
                algorithm,
                deadline: params.timeout.map(|t| Instant::now() + t),
                ..config.clone()
            };
            let start = Instant::now();
            let row = match crate::join_with(data, &vocab, &config) {
                Ok(out) => BenchRow {
                    algorithm,
                    value,
                    records: data.len(),
                    seconds: Some(start.elapsed().as_secs_f64()),
                    candidates: out.stats.candidates,
                    verified: out.stats.verified,
                    results: out.stats.results,
                    index_bytes: out.stats.index_bytes,
                },
                Err(Error::Timeout) => BenchRow {
                    algorithm,
                    value,
                    records: data.len(),
                    seconds: None,
                    candidates: 0,
                    verified: 0,
                    results: 0,
                    index_bytes: 0,
                },
                Err(e) => return Err(e),
            };
            rows.push(row);
        }
    }
    Ok(BenchReport { sweep, rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sweep_names_parse() {
        for s in Sweep::ALL {
            assert_eq!(s.name().parse::<Sweep>().unwrap(), s);
        }
        assert_eq!("gamma-g".parse::<Sweep>().unwrap(), Sweep::GammaG);
        assert!("speed".parse::<Sweep>().is_err());
    }

    #[test]
    fn small_gamma_g_sweep_agrees() {
        let params = BenchParams {
            scale: 0.002,
            ..BenchParams::default()
        };
        let report = run_sweep(Sweep::GammaG, &params).unwrap();
        assert_eq!(report.rows.len(), 15);
        assert!(report.results_agree());
        let tsv = report.to_tsv();
        assert_eq!(tsv.lines().count(), 16);
        assert!(tsv.lines().skip(1).all(|l| l.split('\t').count() == 9));
    }

    #[test]
    fn timeout_marks_row() {
        let params = BenchParams {
            scale: 0.002,
            timeout: Some(Duration::ZERO),
            algorithms: vec![Algorithm::Baseline],
            ..BenchParams::default()
        };
        let report = run_sweep(Sweep::GammaV, &params).unwrap();
        assert_eq!(report.rows.len(), 5);
        assert!(report.rows.iter().all(|r| r.seconds.is_none()));
        assert!(report.to_tsv().contains("timeout"));
    }
}
