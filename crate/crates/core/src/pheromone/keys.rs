use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Lowercase, trim and collapse internal whitespace. No stemming.
pub fn normalize_query(raw: &str) -> String {
    raw.split_whitespace()
        .map(str::to_lowercase)
        .collect::<Vec<_>>()
        .join(" ")
}

/// A normalized query string used as a trail key.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct QueryKey(String);

impl QueryKey {
    pub fn new(raw: &str) -> Result<Self> {
        let text = normalize_query(raw);
        if text.is_empty() {
            return Err(Error::InvalidQuery);
        }
        Ok(QueryKey(text))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn tokens(&self) -> impl Iterator<Item = &str> {
        self.0.split(' ')
    }
}

impl fmt::Display for QueryKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl TryFrom<String> for QueryKey {
    type Error = Error;

    fn try_from(value: String) -> Result<Self> {
        QueryKey::new(&value)
    }
}

impl From<QueryKey> for String {
    fn from(k: QueryKey) -> String {
        k.0
    }
}

/// How a query maps onto trail keys.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KeyMode {
    /// The whole normalized query is the only key.
    #[default]
    Exact,
    /// Every contiguous token n-gram of the query is a key.
    Ngram,
}

impl FromStr for KeyMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "exact" => Ok(KeyMode::Exact),
            "ngram" | "n-gram" => Ok(KeyMode::Ngram),
            other => Err(Error::Config(format!("unknown key mode `{other}`"))),
        }
    }
}

impl fmt::Display for KeyMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            KeyMode::Exact => "exact",
            KeyMode::Ngram => "ngram",
        })
    }
}

pub fn expand_query_keys(query: &str, mode: KeyMode) -> Result<BTreeSet<QueryKey>> {
    let full = QueryKey::new(query)?;
    match mode {
        KeyMode::Exact => Ok(BTreeSet::from([full])),
        KeyMode::Ngram => {
            let tokens: Vec<&str> = full.tokens().collect();
            let mut keys = BTreeSet::new();
            for n in 1..=tokens.len() {
                for window in tokens.windows(n) {
                    keys.insert(QueryKey(window.join(" ")));
                }
            }
            Ok(keys)
        }
    }
}
