use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A ranked list with unjudged documents removed; gains are binary.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CondensedList {
    pub gains: Vec<u8>,
}

impl CondensedList {
    pub fn new(gains: Vec<u8>) -> Self {
        Self { gains }
    }

    pub fn ideal(&self) -> Self {
        let mut gains = self.gains.clone();
        gains.sort_unstable_by(|a, b| b.cmp(a));
        Self { gains }
    }

    pub fn len(&self) -> usize {
        self.gains.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gains.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NdcgConfig {
    /// Log base of the discount; the first `base - 1` positions are not
    /// discounted.
    pub base: u32,
    pub cutoffs: Vec<usize>,
}

impl NdcgConfig {
    pub fn new(base: u32, cutoffs: Vec<usize>) -> Result<Self> {
        if base < 2 {
            return Err(Error::InvalidParameter(format!("log base must be >= 2, got {base}")));
        }
        if cutoffs.is_empty() || cutoffs[0] == 0 || cutoffs.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidParameter(format!(
                "cutoffs must be positive and strictly ascending, got {cutoffs:?}"
            )));
        }
        Ok(Self { base, cutoffs })
    }
}

impl Default for NdcgConfig {
    fn default() -> Self {
        Self { base: 2, cutoffs: vec![1, 3, 10] }
    }
}

/// Click > Skip above judgments: clicked results are relevant, results
/// skipped above the last click are not, everything below the last click
/// is unjudged and dropped.
pub fn condensed_list(page_len: usize, clicked_ranks: &BTreeSet<usize>) -> Result<CondensedList> {
    let &last = clicked_ranks.last().ok_or(Error::EmptyJudgments)?;
    if clicked_ranks.contains(&0) || last > page_len {
        return Err(Error::InvalidParameter(format!(
            "clicked ranks {clicked_ranks:?} fall outside a page of {page_len}"
        )));
    }
    Ok(CondensedList::new((1..=last).map(|r| u8::from(clicked_ranks.contains(&r))).collect()))
}

/// `CG_{b-1} + sum_{i=b..p} G_i / log_b(i)`; positions past the end of the
/// list contribute nothing.
pub fn dcg(list: &CondensedList, p: usize, cfg: &NdcgConfig) -> Result<f64> {
    if p < 1 {
        return Err(Error::InvalidCutoff(p));
    }
    let base = cfg.base as usize;
    let log_base = (cfg.base as f64).ln();
    Ok(list
        .gains
        .iter()
        .take(p)
        .enumerate()
        .map(|(idx, &g)| {
            let i = idx + 1;
            let g = f64::from(g);
            if i < base {
                g
            } else {
                g * log_base / (i as f64).ln()
            }
        })
        .sum())
}

/// DCG normalized by the DCG of the same gains sorted descending.
pub fn ndcg(list: &CondensedList, p: usize, cfg: &NdcgConfig) -> Result<f64> {
    if p < 1 {
        return Err(Error::InvalidCutoff(p));
    }
    if list.gains.iter().all(|&g| g == 0) {
        return Err(Error::UndefinedNormalization);
    }
    let ideal = dcg(&list.ideal(), p, cfg)?;
    Ok(dcg(list, p, cfg)? / ideal)
}
