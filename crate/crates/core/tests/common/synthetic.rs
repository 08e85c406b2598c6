//! Synthetic corpora with known structure.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `n` sequences of `len` tokens cycling through 3,4,5,6, each starting at
/// a seeded random phase and prefixed with the bos id 2.
pub fn repeating_pattern(n: usize, len: usize, seed: u64) -> Vec<Vec<usize>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let phase = rng.gen_range(0..4);
            std::iter::once(2).chain((0..len).map(|i| 3 + (phase + i) % 4)).collect()
        })
        .collect()
}

/// Two classes: class 0 documents draw from tokens 3..=5, class 1 from
/// 6..=8, both sprinkled with shared tokens 9 and 10.
pub fn separable(n: usize, seed: u64) -> (Vec<Vec<usize>>, Vec<usize>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut docs = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let class = i % 2;
        let len = rng.gen_range(3..8);
        let mut doc = vec![2];
        for _ in 0..len {
            if rng.gen_bool(0.3) {
                doc.push(rng.gen_range(9..=10));
            } else {
                doc.push(3 + 3 * class + rng.gen_range(0..3));
            }
        }
        doc.push(3 + 3 * class);
        docs.push(doc);
        labels.push(class);
    }
    (docs, labels)
}
