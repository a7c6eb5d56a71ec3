use rand::seq::SliceRandom;

use super::generate::Dataset;
use crate::error::{Error, Result};
use crate::seed;

fn indices_by_class(labels: &[usize], classes: usize) -> Vec<Vec<usize>> {
    let mut groups = vec![Vec::new(); classes];
    for (i, &l) in labels.iter().enumerate() {
        groups[l].push(i);
    }
    groups
}

/// Splits every class so that `round(count · test_fraction)` of its samples go
/// to the test set. Both halves are shuffled deterministically by `seed`.
pub fn stratified_split(ds: &Dataset, test_fraction: f64, seed: u64) -> Result<(Dataset, Dataset)> {
    if !(0.0..1.0).contains(&test_fraction) {
        return Err(Error::InvalidParameter(format!(
            "test fraction {test_fraction} outside [0, 1)"
        )));
    }
    let groups = indices_by_class(&ds.labels(), ds.class_count());
    let mut train = Vec::new();
    let mut test = Vec::new();
    for (class, mut members) in groups.into_iter().enumerate() {
        if members.is_empty() {
            continue;
        }
        let n_test = (members.len() as f64 * test_fraction).round() as usize;
        if n_test > 0 && members.len() < 2 {
            return Err(Error::Dataset(format!(
                "class `{}` has fewer than two samples and cannot be split",
                ds.class_names[class]
            )));
        }
        members.shuffle(&mut seed::rng(seed, &[class as u64]));
        test.extend_from_slice(&members[..n_test]);
        train.extend_from_slice(&members[n_test..]);
    }
    train.shuffle(&mut seed::rng(seed, &[u64::MAX, 0]));
    test.shuffle(&mut seed::rng(seed, &[u64::MAX, 1]));
    Ok((ds.subset(&train), ds.subset(&test)))
}

/// Stratified subsample of `size` samples with per-class shares proportional
/// to the class counts (largest-remainder rounding, ties to the lower ID).
pub fn stratified_subsample(ds: &Dataset, size: usize, seed: u64) -> Result<Dataset> {
    if size > ds.len() {
        return Err(Error::InvalidParameter(format!(
            "cannot draw {size} samples from a dataset of {}",
            ds.len()
        )));
    }
    let groups = indices_by_class(&ds.labels(), ds.class_count());
    let quotas = proportional_quotas(&groups.iter().map(Vec::len).collect::<Vec<_>>(), size);
    let mut chosen = Vec::with_capacity(size);
    for (class, (mut members, quota)) in groups.into_iter().zip(quotas).enumerate() {
        members.shuffle(&mut seed::rng(seed, &[class as u64]));
        chosen.extend_from_slice(&members[..quota]);
    }
    chosen.shuffle(&mut seed::rng(seed, &[u64::MAX]));
    Ok(ds.subset(&chosen))
}

fn proportional_quotas(counts: &[usize], size: usize) -> Vec<usize> {
    let total: usize = counts.iter().sum();
    if total == 0 {
        return vec![0; counts.len()];
    }
    let mut quotas: Vec<usize> = counts.iter().map(|&c| c * size / total).collect();
    let mut remainders: Vec<(usize, usize)> = counts.iter().enumerate().map(|(i, &c)| (c * size % total, i)).collect();
    remainders.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
    let missing = size - quotas.iter().sum::<usize>();
    for &(_, i) in remainders.iter().take(missing) {
        quotas[i] += 1;
    }
    quotas
}

/// Assigns every sample to one of `k` folds so that each class is spread as
/// evenly as possible. Returns the fold index of each sample.
pub fn stratified_folds(labels: &[usize], k: usize, seed: u64) -> Result<Vec<usize>> {
    if k < 2 {
        return Err(Error::InvalidParameter(format!("need at least 2 folds, got {k}")));
    }
    if labels.len() < k {
        return Err(Error::Dataset(format!(
            "{} samples cannot fill {k} folds",
            labels.len()
        )));
    }
    let classes = labels.iter().max().map_or(0, |m| m + 1);
    let mut fold = vec![0; labels.len()];
    let mut offset = 0;
    for (class, mut members) in indices_by_class(labels, classes).into_iter().enumerate() {
        members.shuffle(&mut seed::rng(seed, &[class as u64]));
        // Continue the round-robin where the previous class stopped so that
        // fold sizes differ by at most one overall.
        for (j, &i) in members.iter().enumerate() {
            fold[i] = (offset + j) % k;
        }
        offset = (offset + members.len()) % k;
    }
    Ok(fold)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datagen::ProbabilitySample;
    use proptest::prelude::*;

    fn toy(per_class: &[usize]) -> Dataset {
        let mut samples = Vec::new();
        for (label, &n) in per_class.iter().enumerate() {
            for i in 0..n {
                samples.push(ProbabilitySample {
                    label,
                    features: vec![label as f64, i as f64],
                });
            }
        }
        let names = (0..per_class.len()).map(|i| format!("c{i}")).collect();
        Dataset::new(samples, names, 2).unwrap()
    }

    #[test]
    fn full_size_split() {
        let ds = toy(&[300; 6]);
        let (train, test) = stratified_split(&ds, 0.2, 5).unwrap();
        assert_eq!(train.len(), 1440);
        assert_eq!(test.len(), 360);
        assert_eq!(train.class_counts(), [240; 6]);
        assert_eq!(test.class_counts(), [60; 6]);
    }

    #[test]
    fn degenerate_and_small_splits() {
        let ds = toy(&[10, 10]);
        let (train, test) = stratified_split(&ds, 0.0, 1).unwrap();
        assert_eq!((train.len(), test.len()), (20, 0));
        let (_, test) = stratified_split(&ds, 0.2, 1).unwrap();
        assert_eq!(test.class_counts(), [2, 2]);
        assert!(stratified_split(&toy(&[1, 5]), 0.5, 1).is_err());
    }

    #[test]
    fn subsample_quotas() {
        assert_eq!(proportional_quotas(&[240, 240, 240], 100), [34, 33, 33]);
        assert_eq!(proportional_quotas(&[5, 5], 10), [5, 5]);
        let sub = stratified_subsample(&toy(&[240; 4]), 96, 3).unwrap();
        assert_eq!(sub.class_counts(), [24; 4]);
        assert!(stratified_subsample(&toy(&[2]), 3, 0).is_err());
    }

    #[test]
    fn folds_are_balanced() {
        let labels: Vec<usize> = (0..97).map(|i| i % 3).collect();
        let folds = stratified_folds(&labels, 10, 0).unwrap();
        let mut sizes = [0usize; 10];
        for &f in &folds {
            sizes[f] += 1;
        }
        assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
        assert!(stratified_folds(&labels, 1, 0).is_err());
        assert!(stratified_folds(&labels[..5], 10, 0).is_err());
    }

    proptest! {
        #[test]
        fn split_is_a_stratified_partition(
            counts in proptest::collection::vec(2usize..40, 1..5),
            fraction in 0.0f64..0.9,
            seed in any::<u64>(),
        ) {
            let ds = toy(&counts);
            let (train, test) = stratified_split(&ds, fraction, seed).unwrap();
            prop_assert_eq!(train.len() + test.len(), ds.len());
            for (c, &n) in counts.iter().enumerate() {
                let expected = (n as f64 * fraction).round() as usize;
                prop_assert_eq!(test.class_counts()[c], expected);
                prop_assert_eq!(train.class_counts()[c], n - expected);
            }
            let mut all: Vec<_> = train.samples.iter().chain(&test.samples).map(|s| (s.label, s.features[1] as usize)).collect();
            all.sort();
            all.dedup();
            prop_assert_eq!(all.len(), ds.len());
        }
    }
}
