use std::collections::{BTreeMap, HashMap};
use std::fmt::{self, Write as _};
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::intent::IntentLabel;
use crate::metrics::{macro_average, micro_average, GroupBy, ScoreRecord};
use crate::pheromone::Flavor;

use super::monte_carlo::SimOutcome;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Dataset {
    Whole,
    Navigational,
    NonNavigational,
}

impl Dataset {
    pub const ALL: [Dataset; 3] = [Dataset::Whole, Dataset::Navigational, Dataset::NonNavigational];

    pub fn as_str(self) -> &'static str {
        match self {
            Dataset::Whole => "whole",
            Dataset::Navigational => "navigational",
            Dataset::NonNavigational => "non-navigational",
        }
    }

    fn admits(self, label: Option<IntentLabel>) -> bool {
        match self {
            Dataset::Whole => true,
            Dataset::Navigational => label == Some(IntentLabel::Navigational),
            Dataset::NonNavigational => label == Some(IntentLabel::NonNavigational),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Averaging {
    Micro,
    MacroUser,
    MacroQuery,
}

impl Averaging {
    pub const ALL: [Averaging; 3] = [Averaging::Micro, Averaging::MacroUser, Averaging::MacroQuery];

    pub fn as_str(self) -> &'static str {
        match self {
            Averaging::Micro => "micro",
            Averaging::MacroUser => "macro-user",
            Averaging::MacroQuery => "macro-query",
        }
    }

    fn apply(self, records: &[ScoreRecord], cutoff: usize) -> Option<f64> {
        match self {
            Averaging::Micro => micro_average(records, cutoff),
            Averaging::MacroUser => macro_average(records, GroupBy::User, cutoff),
            Averaging::MacroQuery => macro_average(records, GroupBy::Query, cutoff),
        }
        .ok()
    }
}

/// How large a relative change is: under 5% is noise, over 10% material.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Significance {
    None,
    Noticeable,
    Material,
}

impl Significance {
    pub fn of(delta_pct: f64) -> Self {
        match delta_pct.abs() {
            d if d > 10.0 => Significance::Material,
            d if d >= 5.0 => Significance::Noticeable,
            _ => Significance::None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub dataset: Dataset,
    pub averaging: Averaging,
    pub cutoff: usize,
    pub baseline: Option<f64>,
    pub flavors: BTreeMap<Flavor, f64>,
}

impl ReportRow {
    /// Relative change of `flavor` over the baseline, in percent.
    pub fn delta_pct(&self, flavor: Flavor) -> Option<f64> {
        let b = self.baseline?;
        let v = *self.flavors.get(&flavor)?;
        (b > 0.0).then(|| (v - b) / b * 100.0)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub rows: Vec<ReportRow>,
}

/// Per-session baseline and simulated scores, each the mean over the
/// session's iterations.
pub fn session_scores(outcomes: &[SimOutcome]) -> (Vec<ScoreRecord>, Vec<ScoreRecord>) {
    struct Acc<'a> {
        first: &'a SimOutcome,
        n: usize,
        sim: BTreeMap<usize, f64>,
    }
    let mut by_session: BTreeMap<usize, Acc> = BTreeMap::new();
    for o in outcomes {
        let acc = by_session.entry(o.session_index).or_insert(Acc { first: o, n: 0, sim: BTreeMap::new() });
        acc.n += 1;
        for (&p, &v) in &o.sim_ndcg {
            *acc.sim.entry(p).or_default() += v;
        }
    }
    let mut baseline = Vec::new();
    let mut sim = Vec::new();
    for acc in by_session.values() {
        let rec = |cutoff, value| ScoreRecord {
            query: acc.first.query.clone(),
            user_id: acc.first.user_id.clone(),
            session_time: acc.first.start_time,
            cutoff,
            value,
        };
        baseline.extend(acc.first.baseline_ndcg.iter().map(|(&p, &v)| rec(p, v)));
        sim.extend(acc.sim.iter().map(|(&p, &v)| rec(p, v / acc.n as f64)));
    }
    (baseline, sim)
}

fn subset(records: &[ScoreRecord], dataset: Dataset, labels: &HashMap<String, IntentLabel>) -> Vec<ScoreRecord> {
    records
        .iter()
        .filter(|r| dataset.admits(labels.get(&r.query).copied()))
        .cloned()
        .collect()
}

/// Builds the nine tables (query subset x averaging scheme), one row per
/// cutoff. The baseline comes from the first run; every run is expected to
/// share the same test sessions. Queries missing from `labels` only count
/// towards the whole set.
pub fn summarize(
    runs: &[(Flavor, Vec<SimOutcome>)],
    labels: &HashMap<String, IntentLabel>,
    cutoffs: &[usize],
) -> Result<Report> {
    if runs.iter().all(|(_, o)| o.is_empty()) {
        return Err(Error::NoData("no simulation outcomes".into()));
    }
    let scored: Vec<(Flavor, Vec<ScoreRecord>, Vec<ScoreRecord>)> = runs
        .iter()
        .map(|(f, o)| {
            let (b, s) = session_scores(o);
            (*f, b, s)
        })
        .collect();
    let mut rows = Vec::new();
    for dataset in Dataset::ALL {
        let base = scored.first().map(|(_, b, _)| subset(b, dataset, labels)).unwrap_or_default();
        let sims: Vec<(Flavor, Vec<ScoreRecord>)> =
            scored.iter().map(|(f, _, s)| (*f, subset(s, dataset, labels))).collect();
        for averaging in Averaging::ALL {
            for &cutoff in cutoffs {
                rows.push(ReportRow {
                    dataset,
                    averaging,
                    cutoff,
                    baseline: averaging.apply(&base, cutoff),
                    flavors: sims
                        .iter()
                        .filter_map(|(f, s)| Some((*f, averaging.apply(s, cutoff)?)))
                        .collect(),
                });
            }
        }
    }
    Ok(Report { rows })
}

fn fmt_value(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".into(), |v| format!("{v:.6}"))
}

fn fmt_delta(d: Option<f64>) -> String {
    match d {
        None => "NA".into(),
        Some(d) => match Significance::of(d) {
            Significance::Material => format!("{d:+.2}%**"),
            Significance::Noticeable => format!("{d:+.2}%*"),
            Significance::None => format!("{d:+.2}%"),
        },
    }
}

impl Report {
    pub const TSV_HEADER: &'static str =
        "dataset\taveraging\tcutoff\tbaseline\tnaive\tnaive_delta_pct\tranking_bias\trb_delta_pct\telaborate\telab_delta_pct";

    pub fn row(&self, dataset: Dataset, averaging: Averaging, cutoff: usize) -> Option<&ReportRow> {
        self.rows
            .iter()
            .find(|r| r.dataset == dataset && r.averaging == averaging && r.cutoff == cutoff)
    }

    /// Deltas carry `*` when noticeable (5-10%) and `**` when material.
    pub fn write_tsv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "{}", Self::TSV_HEADER)?;
        for r in &self.rows {
            write!(out, "{}\t{}\t{}\t{}", r.dataset.as_str(), r.averaging.as_str(), r.cutoff, fmt_value(r.baseline))?;
            for f in Flavor::ALL {
                write!(out, "\t{}\t{}", fmt_value(r.flavors.get(&f).copied()), fmt_delta(r.delta_pct(f)))?;
            }
            writeln!(out)?;
        }
        Ok(())
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for dataset in Dataset::ALL {
            for averaging in Averaging::ALL {
                let rows: Vec<&ReportRow> =
                    self.rows.iter().filter(|r| r.dataset == dataset && r.averaging == averaging).collect();
                if rows.is_empty() {
                    continue;
                }
                writeln!(f, "== {} queries, {} averaging ==", dataset.as_str(), averaging.as_str())?;
                let mut line = format!("{:>8} {:>10}", "nDCG@", "baseline");
                for fl in Flavor::ALL {
                    let _ = write!(line, " {:>24}", fl.as_str());
                }
                writeln!(f, "{line}")?;
                for r in rows {
                    let mut line = format!("{:>8} {:>10}", r.cutoff, fmt_value(r.baseline));
                    for fl in Flavor::ALL {
                        let cell = format!("{} ({})", fmt_value(r.flavors.get(&fl).copied()), fmt_delta(r.delta_pct(fl)));
                        let _ = write!(line, " {cell:>24}");
                    }
                    writeln!(f, "{line}")?;
                }
                writeln!(f)?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn outcome(idx: usize, user: &str, query: &str, iter: usize, base: f64, sim: f64) -> SimOutcome {
        SimOutcome {
            session_index: idx,
            user_id: user.into(),
            query: query.into(),
            start_time: idx as i64,
            iteration: iter,
            recommended: vec![],
            injected_page: vec![],
            original_ranks: vec![1],
            alleged_ranks: vec![1],
            baseline_ndcg: BTreeMap::from([(1, base)]),
            sim_ndcg: BTreeMap::from([(1, sim)]),
        }
    }

    #[test]
    fn averages_iterations_then_sessions() {
        let runs = vec![(
            Flavor::Naive,
            vec![
                outcome(0, "a", "ebay", 0, 0.5, 1.0),
                outcome(0, "a", "ebay", 1, 0.5, 0.0),
                outcome(1, "a", "ants", 0, 0.25, 0.25),
                outcome(2, "b", "ants", 0, 0.25, 1.0),
            ],
        )];
        let labels = HashMap::from([
            ("ebay".to_string(), IntentLabel::Navigational),
            ("ants".to_string(), IntentLabel::NonNavigational),
        ]);
        let report = summarize(&runs, &labels, &[1]).unwrap();
        assert_eq!(report.rows.len(), 9);
        let micro = report.row(Dataset::Whole, Averaging::Micro, 1).unwrap();
        assert!((micro.baseline.unwrap() - 1.0 / 3.0).abs() < 1e-12);
        assert!((micro.flavors[&Flavor::Naive] - 1.75 / 3.0).abs() < 1e-12);
        let by_user = report.row(Dataset::Whole, Averaging::MacroUser, 1).unwrap();
        assert!((by_user.flavors[&Flavor::Naive] - (0.375 + 1.0) / 2.0).abs() < 1e-12);
        let nav = report.row(Dataset::Navigational, Averaging::MacroQuery, 1).unwrap();
        assert_eq!(nav.baseline, Some(0.5));
        assert_eq!(nav.delta_pct(Flavor::Naive), Some(0.0));
        assert_eq!(nav.delta_pct(Flavor::Elaborate), None);
    }

    #[test]
    fn empty_outcomes_are_an_error() {
        assert!(matches!(summarize(&[], &HashMap::new(), &[1]), Err(Error::NoData(_))));
        assert!(summarize(&[(Flavor::Naive, vec![])], &HashMap::new(), &[1]).is_err());
    }

    #[test]
    fn tsv_marks_significance_and_missing_values() {
        let runs = vec![(Flavor::Naive, vec![outcome(0, "a", "q", 0, 0.5, 0.56)])];
        let report = summarize(&runs, &HashMap::new(), &[1]).unwrap();
        let mut buf = Vec::new();
        report.write_tsv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 10);
        assert_eq!(lines[1], "whole\tmicro\t1\t0.500000\t0.560000\t+12.00%**\tNA\tNA\tNA\tNA");
        assert!(lines[4].starts_with("navigational\tmicro\t1\tNA\t"));
        assert_eq!(Significance::of(-7.0), Significance::Noticeable);
        assert_eq!(Significance::of(4.99), Significance::None);
        assert!(report.to_string().contains("whole queries, micro averaging"));
    }
}
