use std::collections::BTreeSet;

use swarmsearch_core::metrics::{condensed_list, ndcg, NdcgConfig};
use swarmsearch_core::pheromone::DocRef;
use swarmsearch_core::querylog::Click;
use swarmsearch_core::sim::{alleged_clicks, inject_recommendations};

fn score(page_len: usize, clicks: &BTreeSet<usize>, p: usize, cfg: &NdcgConfig) -> f64 {
    if clicks.is_empty() {
        return 0.0;
    }
    ndcg(&condensed_list(page_len, clicks).unwrap(), p, cfg).unwrap()
}

fn subsets(n: usize, max: usize) -> Vec<Vec<usize>> {
    (1u32..1 << n)
        .filter(|m| m.count_ones() as usize <= max)
        .map(|m| (0..n).filter(|i| m & (1 << i) != 0).map(|i| i + 1).collect())
        .collect()
}

fn arrangements(items: &[usize], max: usize) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = vec![vec![]];
    let mut frontier: Vec<Vec<usize>> = vec![vec![]];
    for _ in 0..max {
        let mut next = Vec::new();
        for seq in &frontier {
            for &x in items.iter().filter(|&x| !seq.contains(x)) {
                let mut s: Vec<usize> = seq.clone();
                s.push(x);
                next.push(s);
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

#[test]
fn recommending_clicked_documents_never_hurts() {
    let cfg = NdcgConfig::default();
    let mut checked = 0;
    for len in 1..=10usize {
        let page: Vec<DocRef> = (1..=len).map(|i| DocRef::new(format!("d{i}")).unwrap()).collect();
        for ranks in subsets(len, 3) {
            let clicks: Vec<Click> = ranks.iter().map(|&r| Click { rank: r as u32, url: page[r - 1].clone() }).collect();
            let original: BTreeSet<usize> = ranks.iter().copied().collect();
            for recs in arrangements(&ranks, 3) {
                let recs: Vec<DocRef> = recs.iter().map(|&r| page[r - 1].clone()).collect();
                let injected = inject_recommendations(&page, &recs);
                assert_eq!(injected.len(), page.len());
                let alleged = alleged_clicks(&clicks, &injected);
                assert!(alleged.iter().all(|&r| r <= injected.len()));
                for &p in &cfg.cutoffs {
                    let base = score(page.len(), &original, p, &cfg);
                    let sim = score(injected.len(), &alleged, p, &cfg);
                    assert!(sim >= base - 1e-12, "len {len} clicks {ranks:?} recs {recs:?} @{p}: {sim} < {base}");
                }
                checked += 1;
            }
        }
    }
    assert!(checked > 1000);
}
