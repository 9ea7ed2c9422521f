//! Navigational versus non-navigational query intent, using three rules:
//! short queries, queries naming a known entity, and queries carrying a
//! domain suffix are navigational.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pheromone::normalize_query;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum IntentLabel {
    Navigational,
    NonNavigational,
}

impl IntentLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            IntentLabel::Navigational => "navigational",
            IntentLabel::NonNavigational => "non-navigational",
        }
    }
}

impl fmt::Display for IntentLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for IntentLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "navigational" | "nav" => Ok(IntentLabel::Navigational),
            "non-navigational" | "nonnavigational" | "non-nav" => Ok(IntentLabel::NonNavigational),
            other => Err(Error::InvalidParameter(format!("unknown intent label `{other}`"))),
        }
    }
}

/// Writes `query<TAB>label` lines sorted by query.
pub fn write_labels<W: Write>(labels: &HashMap<String, IntentLabel>, mut out: W) -> Result<()> {
    let sorted: BTreeMap<&String, &IntentLabel> = labels.iter().collect();
    for (q, l) in sorted {
        writeln!(out, "{q}\t{l}")?;
    }
    Ok(())
}

pub fn read_labels<R: BufRead>(reader: R) -> Result<HashMap<String, IntentLabel>> {
    let mut out = HashMap::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let (q, l) = line.rsplit_once('\t').ok_or_else(|| Error::parse(i + 1, "expected query<TAB>label"))?;
        out.insert(q.to_string(), l.parse().map_err(|e: Error| Error::parse(i + 1, e.to_string()))?);
    }
    Ok(out)
}

/// Generic domain suffixes, used when no suffix list is supplied.
pub const COMMON_SUFFIXES: &[&str] = &[".com", ".net", ".org", ".edu", ".gov", ".info", ".biz", ".us", ".co.uk"];

/// Entity names (companies, organizations, websites, given names and
/// surnames) and domain suffixes.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct NameLexicon {
    names: BTreeSet<String>,
    suffixes: BTreeSet<String>,
    longest_name: usize,
}

impl NameLexicon {
    pub fn new<N, S>(names: N, suffixes: S) -> Self
    where
        N: IntoIterator,
        N::Item: AsRef<str>,
        S: IntoIterator,
        S::Item: AsRef<str>,
    {
        let mut lexicon = Self::default();
        lexicon.extend_names(names);
        for s in suffixes {
            let s = s.as_ref().trim().to_lowercase();
            if !s.is_empty() {
                lexicon.suffixes.insert(s);
            }
        }
        lexicon
    }

    fn extend_names<N>(&mut self, names: N)
    where
        N: IntoIterator,
        N::Item: AsRef<str>,
    {
        for n in names {
            let n = normalize_query(n.as_ref());
            if !n.is_empty() {
                self.longest_name = self.longest_name.max(n.split(' ').count());
                self.names.insert(n);
            }
        }
    }

    pub fn names(&self) -> &BTreeSet<String> {
        &self.names
    }

    pub fn suffixes(&self) -> &BTreeSet<String> {
        &self.suffixes
    }

    fn names_any_window(&self, tokens: &[&str]) -> bool {
        (1..=self.longest_name.min(tokens.len()))
            .any(|n| tokens.windows(n).any(|w| self.names.contains(&w.join(" "))))
    }
}

fn read_terms(path: &Path) -> Result<Vec<String>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut terms = Vec::new();
    for line in BufReader::new(file).lines() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let term = line.trim();
        if !term.is_empty() && !term.starts_with('#') {
            terms.push(term.to_string());
        }
    }
    Ok(terms)
}

/// Loads name lists and an optional suffix list: UTF-8, one term per line,
/// `#` comments. Entries are case-folded and deduplicated.
pub fn load_lexicon<P: AsRef<Path>>(name_files: &[P], suffix_file: Option<&Path>) -> Result<NameLexicon> {
    let mut lexicon = NameLexicon::default();
    for path in name_files {
        lexicon.extend_names(read_terms(path.as_ref())?);
    }
    if let Some(path) = suffix_file {
        lexicon = NameLexicon::new(lexicon.names.clone(), read_terms(path)?);
    }
    Ok(lexicon)
}

pub fn classify(query: &str, lexicon: &NameLexicon) -> Result<IntentLabel> {
    let normalized = normalize_query(query);
    if normalized.is_empty() {
        return Err(Error::InvalidQuery);
    }
    let tokens: Vec<&str> = normalized.split(' ').collect();
    let navigational = tokens.len() < 3
        || lexicon.names_any_window(&tokens)
        || lexicon
            .suffixes
            .iter()
            .any(|s| tokens.iter().any(|t| t.ends_with(s.as_str())) || normalized.contains(s.as_str()));
    Ok(if navigational { IntentLabel::Navigational } else { IntentLabel::NonNavigational })
}

/// Labels every distinct query once.
pub fn classify_all<'a, I>(queries: I, lexicon: &NameLexicon) -> HashMap<String, IntentLabel>
where
    I: IntoIterator<Item = &'a str>,
{
    let mut seen = HashSet::new();
    queries
        .into_iter()
        .filter(|q| seen.insert(*q))
        .filter_map(|q| classify(q, lexicon).ok().map(|l| (q.to_string(), l)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn labels_round_trip() {
        let labels = HashMap::from([
            ("ants".to_string(), IntentLabel::Navigational),
            ("who discovered first antibiotic".to_string(), IntentLabel::NonNavigational),
        ]);
        let mut buf = Vec::new();
        write_labels(&labels, &mut buf).unwrap();
        assert_eq!(read_labels(buf.as_slice()).unwrap(), labels);
        assert!(read_labels("ants\tmaybe\n".as_bytes()).is_err());
    }
    use std::io::Write;

    fn sample_lexicon() -> NameLexicon {
        NameLexicon::new(
            [
                "alsa bus company",
                "cajastur",
                "microsoft corporation",
                "uc los angeles",
                "uk labour party",
                "unicef",
                "blogger",
                "craigslist",
                "digg",
                "john",
                "william",
                "james",
                "moore",
                "jackson",
            ],
            [".com", ".org"],
        )
    }

    #[test]
    fn classify_examples() {
        let lex = sample_lexicon();
        assert_eq!(classify("ants", &lex).unwrap(), IntentLabel::Navigational);
        assert_eq!(classify("who discovered first antibiotic", &lex).unwrap(), IntentLabel::NonNavigational);
        assert_eq!(classify("cajastur mortgage rates info", &lex).unwrap(), IntentLabel::Navigational);
        assert_eq!(classify("cheap tickets at amazon.com", &lex).unwrap(), IntentLabel::Navigational);
        assert_eq!(classify("john smith bakery hours", &lex).unwrap(), IntentLabel::Navigational);
        assert_eq!(classify("johnson family bakery hours", &lex).unwrap(), IntentLabel::NonNavigational);
        assert_eq!(classify("the uk labour party manifesto", &lex).unwrap(), IntentLabel::Navigational);
        assert!(matches!(classify("   ", &lex), Err(Error::InvalidQuery)));
    }

    #[test]
    fn load_lexicon_folds_case_and_skips_comments() {
        let dir = tempfile::tempdir().unwrap();
        let names = dir.path().join("names.txt");
        let suffixes = dir.path().join("suffixes.txt");
        std::fs::File::create(&names).unwrap().write_all(b"Audi\naudi\n# comment\n\n").unwrap();
        std::fs::File::create(&suffixes).unwrap();
        let lex = load_lexicon(&[&names], Some(suffixes.as_path())).unwrap();
        assert_eq!(lex.names().len(), 1);
        assert!(lex.names().contains("audi"));
        assert!(lex.suffixes().is_empty());
        assert_eq!(classify("audi dealers near me", &lex).unwrap(), IntentLabel::Navigational);

        let err = load_lexicon(&[dir.path().join("missing.txt")], None).unwrap_err();
        assert!(err.to_string().contains("missing.txt"));
    }

    proptest! {
        #[test]
        fn short_queries_are_always_navigational(q in "[a-z]{1,8}( [a-z]{1,8})?") {
            prop_assert_eq!(classify(&q, &NameLexicon::default()).unwrap(), IntentLabel::Navigational);
        }

        #[test]
        fn growing_the_lexicon_never_demotes(q in "[a-z]{1,5}( [a-z]{1,5}){0,5}", extra in proptest::collection::vec("[a-z]{1,5}", 0..5)) {
            let small = sample_lexicon();
            let mut names: Vec<String> = small.names().iter().cloned().collect();
            names.extend(extra);
            let big = NameLexicon::new(names, small.suffixes().iter());
            if classify(&q, &small).unwrap() == IntentLabel::Navigational {
                prop_assert_eq!(classify(&q, &big).unwrap(), IntentLabel::Navigational);
            }
        }
    }
}
