#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// 40 points in the unit square: class 0 below the anti-diagonal band,
/// class 1 above it, with a 0.2 gap.
pub fn separable_points() -> (Vec<Vec<f64>>, Vec<usize>) {
    let mut rng = ChaCha8Rng::seed_from_u64(40);
    let mut x = Vec::new();
    let mut y = Vec::new();
    while x.len() < 40 {
        let p = vec![rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0)];
        let s = p[0] + p[1];
        let class = if s < 0.9 {
            0
        } else if s > 1.1 {
            1
        } else {
            continue;
        };
        if y.iter().filter(|&&c| c == class).count() < 20 {
            x.push(p);
            y.push(class);
        }
    }
    (x, y)
}
