//! Analysis of a controlled search experiment: does solving time drift
//! with the order in which participants took part, and how similar are
//! the queries participants typed?
//!
//! Input is a CSV with header `order,group,task,trivial,seconds,queries`,
//! one row per participant and task; `queries` holds the participant's
//! queries for that task joined by `|`, first query first.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::{cosine_similarity, pearson_critical_value, pearson_r};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Group {
    Control,
    Experimental,
}

impl Group {
    pub const ALL: [Group; 2] = [Group::Control, Group::Experimental];

    pub fn as_str(self) -> &'static str {
        match self {
            Group::Control => "control",
            Group::Experimental => "experimental",
        }
    }
}

impl FromStr for Group {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "control" => Ok(Group::Control),
            "experimental" => Ok(Group::Experimental),
            other => Err(Error::InvalidParameter(format!("unknown group `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    /// 1-based position of the participant within their group.
    pub order: u32,
    pub group: Group,
    pub task: String,
    pub trivial: bool,
    pub seconds: f64,
    pub queries: Vec<String>,
}

#[derive(Deserialize)]
struct CsvRow {
    order: u32,
    group: String,
    task: String,
    trivial: String,
    seconds: f64,
    #[serde(default)]
    queries: String,
}

fn parse_bool(s: &str) -> Option<bool> {
    match s.trim().to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" | "y" => Some(true),
        "false" | "no" | "0" | "n" => Some(false),
        _ => None,
    }
}

pub fn read_experiment_csv<R: Read>(reader: R) -> Result<Vec<ExperimentRecord>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let mut out = Vec::new();
    for (i, row) in rdr.deserialize::<CsvRow>().enumerate() {
        let line = i + 2;
        let row = row.map_err(|e| Error::parse(line, e.to_string()))?;
        let trivial = parse_bool(&row.trivial).ok_or_else(|| Error::parse(line, "trivial must be true/false"))?;
        if row.order < 1 {
            return Err(Error::parse(line, "order starts at 1"));
        }
        if !(row.seconds.is_finite() && row.seconds > 0.0) {
            return Err(Error::parse(line, "seconds must be positive"));
        }
        out.push(ExperimentRecord {
            order: row.order,
            group: row.group.parse().map_err(|e: Error| Error::parse(line, e.to_string()))?,
            task: row.task,
            trivial,
            seconds: row.seconds,
            queries: row.queries.split('|').map(str::trim).filter(|q| !q.is_empty()).map(String::from).collect(),
        });
    }
    Ok(out)
}

pub fn write_experiment_csv<W: Write>(records: &[ExperimentRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let err = |e: csv::Error| Error::Config(e.to_string());
    w.write_record(["order", "group", "task", "trivial", "seconds", "queries"]).map_err(err)?;
    for r in records {
        w.write_record([
            r.order.to_string(),
            r.group.as_str().to_string(),
            r.task.clone(),
            r.trivial.to_string(),
            r.seconds.to_string(),
            r.queries.join("|"),
        ])
        .map_err(err)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TimeMeasure {
    Total,
    Average,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationRow {
    pub group: Group,
    pub trivial: bool,
    pub measure: TimeMeasure,
    pub n: usize,
    /// `None` when undefined, e.g. constant times.
    pub r: Option<f64>,
    pub significant_10: bool,
    pub significant_5: bool,
}

/// Mean pairwise cosine similarities for one task; `None` where no pair
/// had queries on both sides.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SimilarityRow {
    pub task: String,
    pub control_first: Option<f64>,
    pub experimental_first: Option<f64>,
    pub cross_first: Option<f64>,
    pub control_all: Option<f64>,
    pub experimental_all: Option<f64>,
    pub cross_all: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub correlations: Vec<CorrelationRow>,
    pub similarities: Vec<SimilarityRow>,
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (s, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| s / n as f64)
}

fn mean_cosine<'a>(pairs: impl Iterator<Item = (&'a [String], &'a [String])>) -> Option<f64> {
    mean(pairs.filter_map(|(a, b)| cosine_similarity(a, b).ok()))
}

fn correlation(group: Group, trivial: bool, measure: TimeMeasure, points: &[(f64, f64)]) -> Result<CorrelationRow> {
    let xs: Vec<f64> = points.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1).collect();
    let r = match pearson_r(&xs, &ys) {
        Ok(r) => Some(r),
        Err(Error::UndefinedCorrelation(_)) => None,
        Err(e) => return Err(e),
    };
    let n = points.len();
    let crit10 = pearson_critical_value(n, 0.10)?;
    let crit5 = pearson_critical_value(n, 0.05)?;
    let mag = r.map_or(0.0, f64::abs);
    Ok(CorrelationRow {
        group,
        trivial,
        measure,
        n,
        r,
        significant_10: r.is_some() && mag >= crit10,
        significant_5: r.is_some() && mag >= crit5,
    })
}

pub fn analyze_experiment(records: &[ExperimentRecord]) -> Result<ExperimentReport> {
    let mut seen = BTreeSet::new();
    for r in records {
        if !seen.insert((r.group, r.order, r.task.as_str())) {
            return Err(Error::InvalidParameter(format!(
                "participant {} of the {} group has two rows for task {}",
                r.order,
                r.group.as_str(),
                r.task
            )));
        }
    }
    let mut correlations = Vec::new();
    for group in Group::ALL {
        let participants: BTreeSet<u32> = records.iter().filter(|r| r.group == group).map(|r| r.order).collect();
        if participants.len() < 3 {
            return Err(Error::NoData(format!(
                "{} group has {} participants, need at least 3",
                group.as_str(),
                participants.len()
            )));
        }
        for trivial in [true, false] {
            // order -> (total seconds, tasks)
            let mut per: BTreeMap<u32, (f64, usize)> = BTreeMap::new();
            for r in records.iter().filter(|r| r.group == group && r.trivial == trivial) {
                let e = per.entry(r.order).or_default();
                e.0 += r.seconds;
                e.1 += 1;
            }
            if per.len() < 3 {
                continue;
            }
            let total: Vec<(f64, f64)> = per.iter().map(|(&o, &(s, _))| (o as f64, s)).collect();
            let avg: Vec<(f64, f64)> = per.iter().map(|(&o, &(s, c))| (o as f64, s / c as f64)).collect();
            correlations.push(correlation(group, trivial, TimeMeasure::Total, &total)?);
            correlations.push(correlation(group, trivial, TimeMeasure::Average, &avg)?);
        }
    }

    let mut by_task: BTreeMap<&str, Vec<&ExperimentRecord>> = BTreeMap::new();
    for r in records {
        by_task.entry(r.task.as_str()).or_default().push(r);
    }
    let mut similarities = Vec::new();
    for (task, rows) in by_task {
        let firsts = |g: Group| -> Vec<&[String]> {
            rows.iter().filter(|r| r.group == g).map(|r| &r.queries[..r.queries.len().min(1)]).collect()
        };
        let alls = |g: Group| -> Vec<&[String]> {
            rows.iter().filter(|r| r.group == g).map(|r| r.queries.as_slice()).collect()
        };
        let within = |lists: &[&[String]]| {
            mean_cosine(
                (0..lists.len()).flat_map(|i| (i + 1..lists.len()).map(move |j| (i, j))).map(|(i, j)| (lists[i], lists[j])),
            )
        };
        let cross = |a: &[&[String]], b: &[&[String]]| {
            mean_cosine(a.iter().flat_map(|x| b.iter().map(move |y| (*x, *y))))
        };
        let (cf, ef) = (firsts(Group::Control), firsts(Group::Experimental));
        let (ca, ea) = (alls(Group::Control), alls(Group::Experimental));
        similarities.push(SimilarityRow {
            task: task.to_string(),
            control_first: within(&cf),
            experimental_first: within(&ef),
            cross_first: cross(&cf, &ef),
            control_all: within(&ca),
            experimental_all: within(&ea),
            cross_all: cross(&ca, &ea),
        });
    }
    Ok(ExperimentReport { correlations, similarities })
}

fn cell(v: Option<f64>) -> String {
    v.map_or_else(|| "undefined".into(), |v| format!("{v:.4}"))
}

impl ExperimentReport {
    /// Two TSV blocks separated by a blank line. Correlations carry `*`
    /// when significant at 10% and `**` at 5%.
    pub fn write_tsv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "group\ttasks\tmeasure\tn\tr\tsignificance")?;
        for c in &self.correlations {
            let sig = if c.significant_5 {
                "**"
            } else if c.significant_10 {
                "*"
            } else {
                ""
            };
            writeln!(
                out,
                "{}\t{}\t{}\t{}\t{}\t{sig}",
                c.group.as_str(),
                if c.trivial { "trivial" } else { "non-trivial" },
                match c.measure {
                    TimeMeasure::Total => "total",
                    TimeMeasure::Average => "average",
                },
                c.n,
                cell(c.r)
            )?;
        }
        writeln!(out)?;
        writeln!(out, "task\tcontrol_first\texperimental_first\tcross_first\tcontrol_all\texperimental_all\tcross_all")?;
        for s in &self.similarities {
            writeln!(
                out,
                "{}\t{}\t{}\t{}\t{}\t{}\t{}",
                s.task,
                cell(s.control_first),
                cell(s.experimental_first),
                cell(s.cross_first),
                cell(s.control_all),
                cell(s.experimental_all),
                cell(s.cross_all)
            )?;
        }
        Ok(())
    }
}

impl fmt::Display for ExperimentReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut buf = Vec::new();
        self.write_tsv(&mut buf).map_err(|_| fmt::Error)?;
        f.write_str(&String::from_utf8_lossy(&buf))
    }
}
