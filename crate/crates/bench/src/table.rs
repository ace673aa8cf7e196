//! Long-format result table and its CSV form.
//!
//! One row per `(family, x, method, seed, metric)`. Aggregate rows carry the
//! seed labels `mean` and `stderr`; `stderr` is omitted for single-seed groups.
//! Failed cells keep their row with a NaN value and are listed with a reason
//! in [`ResultTable::missing`].

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use crate::BenchError;

pub const HEADER: [&str; 6] = ["family", "x", "method", "seed", "metric", "value"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SeedLabel {
    Index(u64),
    Mean,
    Stderr,
}

impl fmt::Display for SeedLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SeedLabel::Index(i) => write!(f, "{i}"),
            SeedLabel::Mean => f.write_str("mean"),
            SeedLabel::Stderr => f.write_str("stderr"),
        }
    }
}

impl FromStr for SeedLabel {
    type Err = BenchError;
    fn from_str(s: &str) -> Result<Self, BenchError> {
        match s {
            "mean" => Ok(SeedLabel::Mean),
            "stderr" => Ok(SeedLabel::Stderr),
            _ => s
                .parse()
                .map(SeedLabel::Index)
                .map_err(|_| BenchError::Parse(format!("bad seed label {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub family: String,
    pub x: f64,
    pub method: String,
    pub seed: SeedLabel,
    pub metric: String,
    pub value: f64,
}

impl Row {
    fn key_cmp(&self, other: &Row) -> Ordering {
        self.family
            .cmp(&other.family)
            .then(self.x.total_cmp(&other.x))
            .then(self.method.cmp(&other.method))
            .then(self.seed.cmp(&other.seed))
            .then(self.metric.cmp(&other.metric))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Missing {
    pub family: String,
    pub x: f64,
    pub method: String,
    pub seed: u64,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ResultTable {
    pub rows: Vec<Row>,
    pub missing: Vec<Missing>,
}

impl ResultTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, family: &str, x: f64, method: &str, seed: u64, metric: &str, value: f64) {
        self.rows.push(Row {
            family: family.into(),
            x,
            method: method.into(),
            seed: SeedLabel::Index(seed),
            metric: metric.into(),
            value,
        });
    }

    /// Sorts data rows and appends mean/stderr rows per
    /// `(family, x, method, metric)`. NaN values are left out of the
    /// statistics. Existing aggregate rows are recomputed.
    pub fn finalize(&mut self) {
        self.rows.retain(|r| matches!(r.seed, SeedLabel::Index(_)));
        let mut groups: BTreeMap<(String, u64, String, String), (f64, Vec<f64>)> = BTreeMap::new();
        for r in &self.rows {
            // f64 bit patterns order correctly only for non-negative values, so
            // the key is only used for grouping; rows are sorted afterwards
            let e = groups
                .entry((r.family.clone(), r.x.to_bits(), r.method.clone(), r.metric.clone()))
                .or_insert((r.x, Vec::new()));
            if !r.value.is_nan() {
                e.1.push(r.value);
            }
        }
        for ((family, _, method, metric), (x, vals)) in groups {
            let n = vals.len();
            let mean = if n == 0 { f64::NAN } else { vals.iter().sum::<f64>() / n as f64 };
            let mut add = |seed, value| {
                self.rows.push(Row {
                    family: family.clone(),
                    x,
                    method: method.clone(),
                    seed,
                    metric: metric.clone(),
                    value,
                })
            };
            add(SeedLabel::Mean, mean);
            if n >= 2 {
                let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
                add(SeedLabel::Stderr, (var / n as f64).sqrt());
            }
        }
        self.rows.sort_by(Row::key_cmp);
        self.missing.sort_by(|a, b| {
            a.family
                .cmp(&b.family)
                .then(a.x.total_cmp(&b.x))
                .then(a.method.cmp(&b.method))
                .then(a.seed.cmp(&b.seed))
        });
    }

    pub fn data_rows(&self) -> impl Iterator<Item = &Row> {
        self.rows.iter().filter(|r| matches!(r.seed, SeedLabel::Index(_)))
    }

    /// Aggregate value for one group.
    pub fn aggregate(&self, x: f64, method: &str, metric: &str, label: SeedLabel) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| r.x == x && r.method == method && r.metric == metric && r.seed == label)
            .map(|r| r.value)
    }

    /// Per-seed values of one `(x, method, metric)` group, in seed order.
    pub fn values(&self, x: f64, method: &str, metric: &str) -> Vec<(u64, f64)> {
        let mut v: Vec<(u64, f64)> = self
            .rows
            .iter()
            .filter(|r| r.x == x && r.method == method && r.metric == metric)
            .filter_map(|r| match r.seed {
                SeedLabel::Index(i) => Some((i, r.value)),
                _ => None,
            })
            .collect();
        v.sort_by_key(|p| p.0);
        v
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<(), BenchError> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(HEADER)?;
        for r in &self.rows {
            out.write_record([
                r.family.as_str(),
                &r.x.to_string(),
                &r.method,
                &r.seed.to_string(),
                &r.metric,
                &r.value.to_string(),
            ])?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv output is UTF-8")
    }

    pub fn read_csv<R: Read>(r: R) -> Result<Self, BenchError> {
        let mut rd = csv::Reader::from_reader(r);
        let header: Vec<String> = rd.headers()?.iter().map(str::to_owned).collect();
        if header != HEADER {
            return Err(BenchError::Parse(format!("unexpected header {header:?}")));
        }
        let mut t = ResultTable::new();
        for rec in rd.records() {
            let rec = rec?;
            let num = |s: &str| -> Result<f64, BenchError> {
                s.parse().map_err(|_| BenchError::Parse(format!("bad number {s:?}")))
            };
            t.rows.push(Row {
                family: rec[0].to_owned(),
                x: num(&rec[1])?,
                method: rec[2].to_owned(),
                seed: rec[3].parse()?,
                metric: rec[4].to_owned(),
                value: num(&rec[5])?,
            });
        }
        Ok(t)
    }

    pub fn write_missing<W: Write>(&self, w: W) -> Result<(), BenchError> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["family", "x", "method", "seed", "reason"])?;
        for m in &self.missing {
            out.write_record([
                m.family.as_str(),
                &m.x.to_string(),
                &m.method,
                &m.seed.to_string(),
                &m.reason,
            ])?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Writes `table` as CSV to `path`.
pub fn emit_csv(table: &ResultTable, path: &Path) -> Result<(), BenchError> {
    let f = std::fs::File::create(path)?;
    table.write_csv(std::io::BufWriter::new(f))
}
