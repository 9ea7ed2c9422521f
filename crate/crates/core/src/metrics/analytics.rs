use std::collections::HashMap;

use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};
use crate::pheromone::normalize_query;

fn term_counts<S: AsRef<str>>(queries: &[S]) -> HashMap<String, f64> {
    let mut counts = HashMap::new();
    for q in queries {
        for token in normalize_query(q.as_ref()).split(' ').filter(|t| !t.is_empty()) {
            *counts.entry(token.to_string()).or_insert(0.0) += 1.0;
        }
    }
    counts
}

/// Cosine of the term-frequency vectors of two query lists.
pub fn cosine_similarity<A: AsRef<str>, B: AsRef<str>>(queries_a: &[A], queries_b: &[B]) -> Result<f64> {
    let a = term_counts(queries_a);
    let b = term_counts(queries_b);
    if a.is_empty() || b.is_empty() {
        return Err(Error::UndefinedSimilarity);
    }
    // Folding from +0.0 (f64's Sum starts at -0.0) and taking one square root
    // keeps the identical, disjoint and half-overlap cases exact.
    let dot = a.iter().filter_map(|(t, x)| b.get(t).map(|y| x * y)).fold(0.0, |acc, v| acc + v);
    let sq = |v: &HashMap<String, f64>| v.values().fold(0.0, |acc, x| acc + x * x);
    Ok((dot / (sq(&a) * sq(&b)).sqrt()).min(1.0))
}

/// Sample Pearson correlation coefficient.
pub fn pearson_r(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() {
        return Err(Error::InvalidParameter(format!("length mismatch: {} vs {}", xs.len(), ys.len())));
    }
    if xs.len() < 3 {
        return Err(Error::NoData("Pearson's r needs at least 3 pairs".into()));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::UndefinedCorrelation("zero variance"));
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Smallest |r| significant at two-sided level `alpha` for `n` pairs.
pub fn pearson_critical_value(n: usize, alpha: f64) -> Result<f64> {
    if n < 3 {
        return Err(Error::NoData("critical value needs at least 3 pairs".into()));
    }
    let df = (n - 2) as f64;
    let t = StudentsT::new(0.0, 1.0, df)
        .map_err(|e| Error::InvalidParameter(e.to_string()))?
        .inverse_cdf(1.0 - alpha / 2.0);
    Ok(t / (df + t * t).sqrt())
}
