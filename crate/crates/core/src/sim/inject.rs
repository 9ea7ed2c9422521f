use std::collections::{BTreeSet, HashMap, HashSet};

use crate::pheromone::DocRef;
use crate::querylog::{Click, Session, PAGE_SIZE};

/// Rebuilds the result list a session was shown. Logs only record clicked
/// results, so the page covers ranks `1..=max(10, deepest click)` with the
/// clicked URLs at their ranks and placeholders everywhere else.
pub fn reconstruct_page(session: &Session) -> Vec<DocRef> {
    let len = session.deepest_click().unwrap_or(0).max(PAGE_SIZE) as usize;
    let mut page: Vec<Option<DocRef>> = vec![None; len];
    for c in &session.clicks {
        let slot = &mut page[c.rank as usize - 1];
        if slot.is_none() {
            *slot = Some(c.url.clone());
        }
    }
    page.into_iter()
        .enumerate()
        .map(|(i, d)| d.unwrap_or_else(|| DocRef::placeholder(i + 1)))
        .collect()
}

/// Puts `recs` on top, removing them from wherever they sat below; the
/// remaining results keep their relative order.
pub fn inject_recommendations(page: &[DocRef], recs: &[DocRef]) -> Vec<DocRef> {
    let mut seen = HashSet::new();
    let top: Vec<&DocRef> = recs.iter().filter(|d| seen.insert(*d)).collect();
    top.iter()
        .copied()
        .chain(page.iter().filter(|d| !seen.contains(d)))
        .cloned()
        .collect()
}

/// Ranks the user is assumed to click on `injected`. Only originally
/// clicked documents are ever clicked. Such a document keeps its click if
/// it now sits at or above its original rank, or if it was pushed down only
/// by other documents the user wanted: the number of never-clicked
/// results above it must not grow.
pub fn alleged_clicks(original: &[Click], injected: &[DocRef]) -> BTreeSet<usize> {
    let wanted: HashSet<&DocRef> = original.iter().map(|c| &c.url).collect();
    let clicked_ranks: BTreeSet<u32> = original.iter().map(|c| c.rank).collect();
    let mut first_rank: HashMap<&DocRef, u32> = HashMap::new();
    for c in original {
        let r = first_rank.entry(&c.url).or_insert(c.rank);
        *r = (*r).min(c.rank);
    }
    first_rank
        .into_iter()
        .filter_map(|(doc, p)| {
            let idx = injected.iter().position(|d| d == doc)?;
            let unwanted_before = (p as usize - 1) - clicked_ranks.range(..p).count();
            let unwanted_now = injected[..idx].iter().filter(|d| !wanted.contains(d)).count();
            (idx + 1 <= p as usize || unwanted_now <= unwanted_before).then_some(idx + 1)
        })
        .collect()
}
