//! Exhaustive split search straight from the definitions.

#![allow(dead_code)]

pub fn gini_of(labels: &[usize]) -> f64 {
    let n = labels.len() as f64;
    let max = labels.iter().copied().max().unwrap_or(0);
    let mut g = 1.0;
    for c in 0..=max {
        let p = labels.iter().filter(|&&l| l == c).count() as f64 / n;
        g -= p * p;
    }
    g
}

/// `(feature, threshold)` minimizing weighted child Gini over every midpoint
/// of every feature; earlier (feature, threshold) pairs win ties. `None`
/// unless the best beats the parent by more than 1e-12.
pub fn exhaustive_split(x: &[Vec<f64>], y: &[usize], features: &[usize]) -> Option<(usize, f64)> {
    let parent = gini_of(y);
    let mut best: Option<(usize, f64, f64)> = None;
    for &f in features {
        let mut vals: Vec<f64> = x.iter().map(|r| r[f]).collect();
        vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
        vals.dedup();
        for w in vals.windows(2) {
            let t = (w[0] + w[1]) / 2.0;
            let left: Vec<usize> = (0..x.len()).filter(|&i| x[i][f] <= t).map(|i| y[i]).collect();
            let right: Vec<usize> = (0..x.len()).filter(|&i| x[i][f] > t).map(|i| y[i]).collect();
            let n = x.len() as f64;
            let score = left.len() as f64 / n * gini_of(&left) + right.len() as f64 / n * gini_of(&right);
            let better = match best {
                None => true,
                Some((_, _, b)) => score < b - 1e-12,
            };
            if better {
                best = Some((f, t, score));
            }
        }
    }
    best.filter(|b| b.2 < parent - 1e-12).map(|(f, t, _)| (f, t))
}
