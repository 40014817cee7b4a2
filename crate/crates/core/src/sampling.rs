// SPDX-License-Identifier: Apache-2.0

//! Row and sequence selection over the sequence blocks of a bundle.

use rand::seq::index;
use rand::Rng;

use crate::rng::seeded;

/// Deterministic row subset of at most `cap` rows, allocated to sequences in
/// proportion to their lengths (largest remainder, ties to the earlier
/// sequence) and drawn uniformly without replacement inside each sequence.
/// Returned indices are ascending. All rows are returned when `m ≤ cap`.
pub fn stratified_rows(sequence_lengths: &[usize], cap: usize, seed: u64) -> Vec<usize> {
    let m: usize = sequence_lengths.iter().sum();
    if m <= cap {
        return (0..m).collect();
    }
    let mut quotas: Vec<usize> = Vec::with_capacity(sequence_lengths.len());
    let mut remainders: Vec<(u128, usize)> = Vec::with_capacity(sequence_lengths.len());
    for (k, &len) in sequence_lengths.iter().enumerate() {
        let exact = cap as u128 * len as u128;
        quotas.push((exact / m as u128) as usize);
        remainders.push((exact % m as u128, k));
    }
    let mut missing = cap - quotas.iter().sum::<usize>();
    remainders.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
    for &(_, k) in &remainders {
        if missing == 0 {
            break;
        }
        if quotas[k] < sequence_lengths[k] {
            quotas[k] += 1;
            missing -= 1;
        }
    }

    let mut rng = seeded(seed);
    let mut rows = Vec::with_capacity(cap);
    let mut offset = 0;
    for (&len, &q) in sequence_lengths.iter().zip(&quotas) {
        if q > 0 {
            let mut picked = index::sample(&mut rng, len, q).into_vec();
            picked.sort_unstable();
            rows.extend(picked.into_iter().map(|r| offset + r));
        }
        offset += len;
    }
    rows
}

/// Sequence indices drawn uniformly with replacement, `n` of them.
pub fn resample_sequences<R: Rng + ?Sized>(num_sequences: usize, n: usize, rng: &mut R) -> Vec<usize> {
    (0..n).map(|_| rng.random_range(0..num_sequences)).collect()
}

/// `n` distinct sequence indices drawn without replacement, in draw order.
pub fn subsample_sequences<R: Rng + ?Sized>(num_sequences: usize, n: usize, rng: &mut R) -> Vec<usize> {
    index::sample(rng, num_sequences, n).into_vec()
}

/// Row indices covering the chosen sequences whole, in the given order.
pub fn rows_for_sequences(offsets: &[usize], sequences: &[usize]) -> Vec<usize> {
    let mut rows = Vec::new();
    for &s in sequences {
        rows.extend(offsets[s]..offsets[s + 1]);
    }
    rows
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_inputs_keep_every_row() {
        assert_eq!(stratified_rows(&[2, 3], 10, 1), vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn quotas_are_proportional() {
        let lens = [100, 300, 600];
        let rows = stratified_rows(&lens, 100, 7);
        assert_eq!(rows.len(), 100);
        let in_first = rows.iter().filter(|&&r| r < 100).count();
        let in_second = rows.iter().filter(|&&r| (100..400).contains(&r)).count();
        assert_eq!(in_first, 10);
        assert_eq!(in_second, 30);
        assert!(rows.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(rows, stratified_rows(&lens, 100, 7));
    }

    #[test]
    fn remainders_fill_the_cap() {
        let lens = [1, 1, 1, 1, 1, 1, 1];
        let rows = stratified_rows(&lens, 3, 0);
        assert_eq!(rows, vec![0, 1, 2]);
    }

    #[test]
    fn sequence_rows_are_whole_blocks() {
        let offsets = [0, 2, 5, 6];
        assert_eq!(rows_for_sequences(&offsets, &[1, 0, 1]), vec![2, 3, 4, 0, 1, 2, 3, 4]);
    }
}
