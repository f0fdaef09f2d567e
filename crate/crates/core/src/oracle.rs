//! Brute-force reference computations for the test suite.
//!
//! Everything here recomputes quantities straight from their definitions,
//! deliberately avoiding the packed codecs, scan plans, and incremental
//! bookkeeping of the production paths, so the two can check each other.

use std::collections::HashMap;

use crate::counts::CountTable;
use crate::lattice::{window, Neighborhood, Site};
use crate::sampler::Sample;

/// Naive block counts keyed by (neighborhood symbols, center symbol).
///
/// Visits every window site, checks offset by offset that the neighborhood
/// translate stays inside the sample region, and reads each symbol through
/// the coordinate interface.
pub fn naive_block_counts(
    sample: &Sample,
    gamma: &Neighborhood,
) -> HashMap<(Vec<u8>, u8), u64> {
    let region = sample.region();
    let mut counts = HashMap::new();
    let Some(win) = window(region) else {
        return counts;
    };
    'sites: for center in win.sites() {
        let mut tuple = Vec::with_capacity(gamma.len());
        for offset in gamma.offsets() {
            let shifted = Site::new(
                center
                    .coords()
                    .iter()
                    .zip(offset.coords())
                    .map(|(&c, &v)| c + v)
                    .collect(),
            );
            if !region.contains(&shifted) {
                continue 'sites;
            }
            tuple.push(sample.symbol_at(&shifted).unwrap());
        }
        let center_symbol = sample.symbol_at(&center).unwrap();
        *counts.entry((tuple, center_symbol)).or_insert(0) += 1;
    }
    counts
}

/// Decodes a count table into the same map shape as [`naive_block_counts`].
pub fn table_as_map(table: &CountTable) -> HashMap<(Vec<u8>, u8), u64> {
    table
        .iter()
        .map(|(key, count)| {
            let mut tuple = table.codec().decode(key);
            let center = tuple.pop().expect("tables store the center symbol");
            ((tuple, center), count)
        })
        .collect()
}

/// Log pseudo-likelihood of a sample under arbitrary conditional
/// probabilities, computed site by site from the definition.
pub fn naive_log_pl(
    sample: &Sample,
    gamma: &Neighborhood,
    conditional: impl Fn(&[u8], u8) -> f64,
) -> f64 {
    let mut sum = 0.0;
    for ((tuple, center), count) in naive_block_counts(sample, gamma) {
        sum += count as f64 * conditional(&tuple, center).ln();
    }
    sum
}
