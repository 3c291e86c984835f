use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::distance::DistanceKind;
use crate::error::{Error, Result};
use crate::types::LabeledInstance;

/// Reorders a dataset into locality chunks: a random remaining anchor is
/// emitted first, followed by its `chunk - 1` nearest remaining neighbors
/// (Euclidean, ties by input order). Sequence numbers are reassigned to the
/// output order.
pub fn induce_virtual_drift(
    dataset: Vec<LabeledInstance>,
    chunk: usize,
    seed: u64,
) -> Result<Vec<LabeledInstance>> {
    if chunk == 0 {
        return Err(Error::config("virtual drift chunk size must be positive"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = dataset.len();
    let mut slots: Vec<Option<LabeledInstance>> = dataset.into_iter().map(Some).collect();
    // indices that are still unemitted, kept in input order
    let mut remaining: Vec<usize> = (0..n).collect();
    let mut out = Vec::with_capacity(n);

    while !remaining.is_empty() {
        let anchor_pos = rng.random_range(0..remaining.len());
        let anchor = remaining.remove(anchor_pos);
        let centre = slots[anchor].as_ref().expect("anchor not yet emitted").features.clone();

        let take = (chunk - 1).min(remaining.len());
        let mut scored: Vec<(f64, usize)> = remaining
            .iter()
            .map(|&i| {
                let f = &slots[i].as_ref().expect("remaining").features;
                (DistanceKind::Euclidean.distance_unchecked(&centre, f), i)
            })
            .collect();
        let by_distance = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
        if take < scored.len() && take > 0 {
            scored.select_nth_unstable_by(take - 1, by_distance);
        }
        scored.truncate(take);
        scored.sort_unstable_by(by_distance);

        out.push(slots[anchor].take().expect("anchor"));
        for &(_, i) in &scored {
            out.push(slots[i].take().expect("neighbor"));
        }
        remaining.retain(|&i| slots[i].is_some());
    }

    for (seq, inst) in out.iter_mut().enumerate() {
        inst.seq = seq as u64;
    }
    Ok(out)
}
