use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Version written into every record and summary.
pub const SCHEMA: u32 = 1;

/// One observation: a statistic of one polynomial in one region, next to its limit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrialRecord {
    pub schema: u32,
    pub n: usize,
    pub trial: usize,
    pub region: String,
    pub stat: f64,
    #[serde(rename = "ref")]
    pub reference: f64,
    pub kind: String,
    /// `[master, stream, trial]`.
    pub seed: [u64; 3],
    pub flags: Vec<String>,
}

impl TrialRecord {
    pub fn deviation(&self) -> f64 {
        (self.stat - self.reference).abs()
    }

    pub fn has_flag(&self, flag: &str) -> bool {
        self.flags.iter().any(|f| f == flag)
    }
}

/// Writes records as JSON lines.
pub fn write_records<W: Write>(records: &[TrialRecord], mut out: W) -> Result<()> {
    for r in records {
        let line = serde_json::to_string(r).map_err(|e| Error::InvalidArgument(format!("record not serializable: {e}")))?;
        writeln!(out, "{line}")?;
    }
    Ok(())
}

/// Reads JSON-lines records, reporting the first bad line.
pub fn read_records<R: BufRead>(input: R) -> Result<Vec<TrialRecord>> {
    let mut out = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: TrialRecord = serde_json::from_str(&line).map_err(|e| Error::Parse {
            line: i + 1,
            message: e.to_string(),
        })?;
        if rec.schema != SCHEMA {
            return Err(Error::Parse {
                line: i + 1,
                message: format!("unsupported schema {}", rec.schema),
            });
        }
        out.push(rec);
    }
    Ok(out)
}

pub fn persist_records(records: &[TrialRecord], path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_records(records, &mut w)?;
    w.flush()?;
    Ok(())
}

pub fn load_records(path: &Path) -> Result<Vec<TrialRecord>> {
    read_records(BufReader::new(File::open(path)?))
}

/// Aggregates for one `(degree, region, kind)` group.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub degree: usize,
    pub region: String,
    pub kind: String,
    pub trials: usize,
    pub mean_abs_dev: f64,
    /// `P̂[|stat − ref| ≥ ε]`, one entry per ε.
    pub exceed: Vec<f64>,
    /// Standard error of `mean_abs_dev` from batch means (plain when fewer than 10 trials).
    pub se: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SummaryStats {
    pub epsilons: Vec<f64>,
    pub rows: Vec<SummaryRow>,
}

impl SummaryStats {
    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Rows for one region and kind, ordered by degree.
    pub fn series(&self, region: &str, kind: &str) -> Vec<&SummaryRow> {
        self.rows.iter().filter(|r| r.region == region && r.kind == kind).collect()
    }

    pub fn epsilon_index(&self, eps: f64) -> Option<usize> {
        self.epsilons.iter().position(|e| (e - eps).abs() < 1e-12)
    }
}

fn standard_error(devs: &[f64]) -> f64 {
    let n = devs.len();
    if n < 2 {
        return 0.0;
    }
    let batches = if n >= 20 { 10 } else { n };
    let size = n / batches;
    let means: Vec<f64> = (0..batches)
        .map(|b| devs[b * size..(b + 1) * size].iter().sum::<f64>() / size as f64)
        .collect();
    let m = means.iter().sum::<f64>() / batches as f64;
    let var = means.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (batches - 1) as f64;
    (var / batches as f64).sqrt()
}

/// Groups records by `(degree, region, kind)`; output order does not depend on input order.
pub fn summarize(records: &[TrialRecord], epsilons: &[f64]) -> SummaryStats {
    let mut groups: BTreeMap<(usize, String, String), Vec<&TrialRecord>> = BTreeMap::new();
    for r in records {
        groups.entry((r.n, r.region.clone(), r.kind.clone())).or_default().push(r);
    }
    let rows = groups
        .into_iter()
        .map(|((degree, region, kind), mut recs)| {
            recs.sort_by_key(|r| r.trial);
            let devs: Vec<f64> = recs.iter().map(|r| r.deviation()).collect();
            let count = devs.len() as f64;
            SummaryRow {
                degree,
                region,
                kind,
                trials: devs.len(),
                mean_abs_dev: devs.iter().sum::<f64>() / count,
                exceed: epsilons
                    .iter()
                    .map(|e| devs.iter().filter(|d| **d >= *e).count() as f64 / count)
                    .collect(),
                se: standard_error(&devs),
            }
        })
        .collect();
    SummaryStats {
        epsilons: epsilons.to_vec(),
        rows,
    }
}

/// CSV with a `# schema: 1` line, then `degree,region,kind,trials,mean_abs_dev,exceed_<ε>…,se`.
pub fn write_summary<W: Write>(stats: &SummaryStats, mut out: W) -> Result<()> {
    writeln!(out, "# schema: {SCHEMA}")?;
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["degree".to_string(), "region".into(), "kind".into(), "trials".into(), "mean_abs_dev".into()];
    header.extend(stats.epsilons.iter().map(|e| format!("exceed_{e}")));
    header.push("se".into());
    w.write_record(&header).map_err(csv_err)?;
    for r in &stats.rows {
        let mut row = vec![
            r.degree.to_string(),
            r.region.clone(),
            r.kind.clone(),
            r.trials.to_string(),
            format!("{:?}", r.mean_abs_dev),
        ];
        row.extend(r.exceed.iter().map(|x| format!("{x:?}")));
        row.push(format!("{:?}", r.se));
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

pub fn read_summary<R: BufRead>(mut input: R) -> Result<SummaryStats> {
    let mut first = String::new();
    input.read_line(&mut first)?;
    if first.trim() != format!("# schema: {SCHEMA}") {
        return Err(Error::Parse {
            line: 1,
            message: format!("expected '# schema: {SCHEMA}', got {:?}", first.trim()),
        });
    }
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    let header = reader
        .headers()
        .map_err(|e| Error::Parse {
            line: 2,
            message: e.to_string(),
        })?
        .clone();
    let cols: Vec<&str> = header.iter().collect();
    let fixed = ["degree", "region", "kind", "trials", "mean_abs_dev"];
    if cols.len() < fixed.len() + 1 || cols[..5] != fixed || cols[cols.len() - 1] != "se" {
        return Err(Error::Parse {
            line: 2,
            message: format!("unexpected header {cols:?}"),
        });
    }
    let mut epsilons = Vec::new();
    for c in &cols[5..cols.len() - 1] {
        let e = c
            .strip_prefix("exceed_")
            .and_then(|v| v.parse::<f64>().ok())
            .ok_or_else(|| Error::Parse {
                line: 2,
                message: format!("bad exceedance column {c:?}"),
            })?;
        epsilons.push(e);
    }
    let mut rows = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let line = i + 3;
        let rec = rec.map_err(|e| Error::Parse {
            line,
            message: e.to_string(),
        })?;
        let num = |k: usize| -> Result<f64> {
            rec.get(k).and_then(|v| v.parse::<f64>().ok()).ok_or_else(|| Error::Parse {
                line,
                message: format!("column {} is not a number", k + 1),
            })
        };
        let int = |k: usize| -> Result<usize> {
            rec.get(k).and_then(|v| v.parse::<usize>().ok()).ok_or_else(|| Error::Parse {
                line,
                message: format!("column {} is not an integer", k + 1),
            })
        };
        if rec.len() != cols.len() {
            return Err(Error::Parse {
                line,
                message: format!("{} fields, expected {}", rec.len(), cols.len()),
            });
        }
        rows.push(SummaryRow {
            degree: int(0)?,
            region: rec[1].to_string(),
            kind: rec[2].to_string(),
            trials: int(3)?,
            mean_abs_dev: num(4)?,
            exceed: (0..epsilons.len()).map(|k| num(5 + k)).collect::<Result<_>>()?,
            se: num(cols.len() - 1)?,
        });
    }
    Ok(SummaryStats { epsilons, rows })
}

pub fn persist_summary(stats: &SummaryStats, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_summary(stats, &mut w)?;
    w.flush()?;
    Ok(())
}

pub fn load_summary(path: &Path) -> Result<SummaryStats> {
    read_summary(BufReader::new(File::open(path)?))
}

/// Provenance written next to every run's outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub schema: u32,
    pub tool: String,
    pub version: String,
    pub command: String,
    pub config_sha256: String,
    pub seed: u64,
    pub records: usize,
    pub files: Vec<String>,
}

impl Manifest {
    pub fn new(command: &str, config_sha256: String, seed: u64, records: usize, files: Vec<String>) -> Self {
        Manifest {
            schema: SCHEMA,
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            config_sha256,
            seed,
            records,
            files,
        }
    }

    pub fn persist(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self).expect("manifest serializes");
        std::fs::write(path, text + "\n")?;
        Ok(())
    }
}
