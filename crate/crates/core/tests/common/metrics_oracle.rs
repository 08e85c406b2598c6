//! Brute-force metrics from full confusion tables.

#![allow(dead_code)]

/// `table[g][p]` counts posts with gold `g` and prediction `p`.
fn table(gold: &[bool], pred: &[bool]) -> [[usize; 2]; 2] {
    let mut t = [[0; 2]; 2];
    for (&g, &p) in gold.iter().zip(pred) {
        t[g as usize][p as usize] += 1;
    }
    t
}

/// F1 of class `c` read off a 2×2 table as 2·TP / (2·TP + FP + FN).
fn f1_of(t: &[[usize; 2]; 2], c: usize) -> f64 {
    let o = 1 - c;
    let tp = t[c][c] as f64;
    let denom = 2.0 * tp + t[o][c] as f64 + t[c][o] as f64;
    if tp == 0.0 {
        0.0
    } else {
        2.0 * tp / denom
    }
}

/// Support-weighted F1 over both classes of a binary problem.
pub fn weighted_binary_f1(gold: &[bool], pred: &[bool]) -> f64 {
    let t = table(gold, pred);
    let n = gold.len() as f64;
    (0..2).map(|c| (t[c][0] + t[c][1]) as f64 * f1_of(&t, c)).sum::<f64>() / n
}

pub fn coarse(gold: &[[bool; 4]], pred: &[[bool; 4]]) -> f64 {
    let g: Vec<bool> = gold.iter().map(|s| s.contains(&true)).collect();
    let p: Vec<bool> = pred.iter().map(|s| s.contains(&true)).collect();
    weighted_binary_f1(&g, &p)
}

/// Per-class positive F1, supports, and the support-weighted mean (`None`
/// when no class has gold positives).
pub fn fine(gold: &[[bool; 4]], pred: &[[bool; 4]]) -> ([f64; 4], [usize; 4], Option<f64>) {
    let mut f = [0.0; 4];
    let mut s = [0; 4];
    for c in 0..4 {
        let g: Vec<bool> = gold.iter().map(|x| x[c]).collect();
        let p: Vec<bool> = pred.iter().map(|x| x[c]).collect();
        let t = table(&g, &p);
        f[c] = f1_of(&t, 1);
        s[c] = t[1][0] + t[1][1];
    }
    let total: usize = s.iter().sum();
    let weighted = (total > 0).then(|| (0..4).map(|c| s[c] as f64 * f[c]).sum::<f64>() / total as f64);
    (f, s, weighted)
}
