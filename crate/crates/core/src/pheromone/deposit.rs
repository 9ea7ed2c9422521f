//! Deposit increments for each flavor.

use std::collections::BTreeSet;

use super::{DocRef, ExaminationTable, Flavor};
use crate::error::{Error, Result};

/// Naive flavor: one unit per click, wherever the click landed.
pub fn increment_naive() -> f64 {
    1.0
}

/// Ranking-bias flavor: the reciprocal of the probability that a user
/// examined `position` given their last click was at `last_clicked`.
pub fn increment_ranking_bias(position: u32, last_clicked: u32, table: &ExaminationTable) -> Result<f64> {
    if position == 0 || last_clicked >= position {
        return Err(Error::InvalidParameter(format!(
            "ranking-bias increment needs 0 <= last_clicked < position, got ({position}, {last_clicked})"
        )));
    }
    table
        .get(position, last_clicked)
        .map(|p| 1.0 / p)
        .ok_or(Error::MissingExamination { position, last_clicked })
}

/// Click > Skip above, with two extra assumptions: the user is happy with
/// the order of their clicks, and nothing below the last click was read.
///
/// Returns clicked documents in click-rank order followed by the documents
/// skipped above the last click, each paired with its 1-based preferred
/// position.
pub fn derive_elaborate_order(page: &[DocRef], clicked_ranks: &BTreeSet<usize>) -> Result<Vec<(DocRef, u32)>> {
    let last = *clicked_ranks.last().ok_or(Error::NoPreference)?;
    if clicked_ranks.contains(&0) || last > page.len() {
        return Err(Error::InvalidParameter(format!(
            "clicked ranks must lie in 1..={}, got {clicked_ranks:?}",
            page.len()
        )));
    }
    let clicked = clicked_ranks.iter().map(|&r| &page[r - 1]);
    let skipped = (1..last)
        .filter(|r| !clicked_ranks.contains(r))
        .map(|r| &page[r - 1]);
    Ok(clicked
        .chain(skipped)
        .zip(1u32..)
        .map(|(doc, pos)| (doc.clone(), pos))
        .collect())
}

/// One deposit derived from a session's clicks.
#[derive(Debug, Clone, PartialEq)]
pub struct PlannedDeposit {
    pub doc: DocRef,
    pub position: Option<u32>,
    pub increment: f64,
}

/// Deposits implied by the clicks (1-based ranks in log order, repeats
/// allowed) on `page` under `flavor`. Placeholder documents never receive
/// pheromone. A session without clicks yields no deposits.
pub fn deposition_plan(
    flavor: Flavor,
    page: &[DocRef],
    clicks: &[usize],
    table: Option<&ExaminationTable>,
) -> Result<Vec<PlannedDeposit>> {
    if let Some(&bad) = clicks.iter().find(|&&r| r == 0 || r > page.len()) {
        return Err(Error::InvalidParameter(format!(
            "click at rank {bad} outside a page of {} results",
            page.len()
        )));
    }
    let real = |doc: &DocRef| !doc.is_placeholder();
    match flavor {
        Flavor::Naive => Ok(clicks
            .iter()
            .map(|&r| &page[r - 1])
            .filter(|d| real(d))
            .map(|doc| PlannedDeposit { doc: doc.clone(), position: None, increment: increment_naive() })
            .collect()),
        Flavor::RankingBias => {
            let table = table.ok_or_else(|| Error::Config("ranking-bias needs an examination table".into()))?;
            let mut ranks = clicks.to_vec();
            ranks.sort_unstable();
            let mut plan = Vec::with_capacity(ranks.len());
            let mut last_below = 0usize;
            let mut prev = 0usize;
            for r in ranks {
                if r != prev {
                    last_below = prev;
                    prev = r;
                }
                let increment = increment_ranking_bias(r as u32, last_below as u32, table)?;
                let doc = &page[r - 1];
                if real(doc) {
                    plan.push(PlannedDeposit { doc: doc.clone(), position: None, increment });
                }
            }
            Ok(plan)
        }
        Flavor::Elaborate => {
            let set: BTreeSet<usize> = clicks.iter().copied().collect();
            if set.is_empty() {
                return Ok(Vec::new());
            }
            Ok(derive_elaborate_order(page, &set)?
                .into_iter()
                .filter(|(d, _)| real(d))
                .map(|(doc, pos)| PlannedDeposit { doc, position: Some(pos), increment: 1.0 })
                .collect())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn page(n: usize) -> Vec<DocRef> {
        (1..=n).map(|i| DocRef::new(format!("d{i}")).unwrap()).collect()
    }

    fn ranks(r: &[usize]) -> BTreeSet<usize> {
        r.iter().copied().collect()
    }

    fn names(order: &[(DocRef, u32)]) -> Vec<(String, u32)> {
        order.iter().map(|(d, p)| (d.to_string(), *p)).collect()
    }

    #[test]
    fn ranking_bias_increments() {
        let mut table = ExaminationTable::new();
        table.insert(4, 0, 0.82).unwrap();
        table.insert(1, 0, 1.0).unwrap();
        table.insert(3, 2, 0.5).unwrap();
        assert!((increment_ranking_bias(4, 0, &table).unwrap() - 1.2195).abs() < 1e-3);
        assert_eq!(increment_ranking_bias(1, 0, &table).unwrap(), 1.0);
        assert_eq!(increment_ranking_bias(3, 2, &table).unwrap(), 2.0);
        assert!(matches!(
            increment_ranking_bias(5, 0, &table),
            Err(Error::MissingExamination { position: 5, last_clicked: 0 })
        ));
        assert!(increment_ranking_bias(2, 2, &table).is_err());
    }

    #[test]
    fn naive_increment_is_constant() {
        assert_eq!(increment_naive(), 1.0);
        let plan = deposition_plan(Flavor::Naive, &page(30), &[1, 30], None).unwrap();
        assert!(plan.iter().all(|p| p.increment == 1.0 && p.position.is_none()));
    }

    #[test]
    fn elaborate_order_examples() {
        let order = derive_elaborate_order(&page(10), &ranks(&[1, 3, 5])).unwrap();
        assert_eq!(
            names(&order),
            vec![("d1".into(), 1), ("d3".into(), 2), ("d5".into(), 3), ("d2".into(), 4), ("d4".into(), 5)]
        );
        let order = derive_elaborate_order(&page(10), &ranks(&[1])).unwrap();
        assert_eq!(names(&order), vec![("d1".into(), 1)]);
        let order = derive_elaborate_order(&page(5), &ranks(&[2, 3])).unwrap();
        assert_eq!(names(&order), vec![("d2".into(), 1), ("d3".into(), 2), ("d1".into(), 3)]);
    }

    #[test]
    fn elaborate_order_errors() {
        assert!(matches!(derive_elaborate_order(&page(3), &ranks(&[])), Err(Error::NoPreference)));
        assert!(derive_elaborate_order(&page(3), &ranks(&[4])).is_err());
        assert!(derive_elaborate_order(&page(3), &ranks(&[0, 1])).is_err());
    }

    #[test]
    fn ranking_bias_plan_uses_previous_click() {
        let table = ExaminationTable::bundled();
        let plan = deposition_plan(Flavor::RankingBias, &page(10), &[4, 1, 4], Some(&table)).unwrap();
        let incs: Vec<f64> = plan.iter().map(|p| p.increment).collect();
        assert_eq!(incs[0], 1.0 / table.get(1, 0).unwrap());
        assert_eq!(incs[1], 1.0 / table.get(4, 1).unwrap());
        assert_eq!(incs[2], 1.0 / table.get(4, 1).unwrap());
        assert!(deposition_plan(Flavor::RankingBias, &page(10), &[1], None).is_err());
    }

    #[test]
    fn placeholders_receive_nothing() {
        let mut p = page(5);
        p[1] = DocRef::placeholder(2);
        let plan = deposition_plan(Flavor::Elaborate, &p, &[3], None).unwrap();
        let docs: Vec<(String, Option<u32>)> = plan.iter().map(|d| (d.doc.to_string(), d.position)).collect();
        assert_eq!(docs, vec![("d3".into(), Some(1)), ("d1".into(), Some(2))]);
        assert!(deposition_plan(Flavor::Naive, &p, &[2], None).unwrap().is_empty());
        assert!(deposition_plan(Flavor::Naive, &p, &[6], None).is_err());
        assert!(deposition_plan(Flavor::Elaborate, &p, &[], None).unwrap().is_empty());
    }
}
