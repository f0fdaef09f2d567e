//! Pseudo-likelihood scoring and the penalized selection criterion.
//!
//! A candidate neighborhood is scored by the largest log pseudo-likelihood
//! any conditional table could achieve on the observed counts, minus a
//! penalty that grows with the number of conditional parameters. The
//! maximizer is the empirical conditional, so the score needs only counts.

use thiserror::Error;

use crate::counts::{count_blocks_within, CountTable};
use crate::lattice::Neighborhood;
use crate::model::Specification;
use crate::sampler::Sample;

/// Errors from criterion evaluation.
#[derive(Debug, Error, PartialEq)]
pub enum PseudoLikError {
    /// Table and conditional table condition on different neighborhoods.
    #[error("table neighborhood {table} does not match the conditional's {spec}")]
    GammaMismatch {
        /// Neighborhood of the count table.
        table: String,
        /// Neighborhood of the conditional table.
        spec: String,
    },
    /// The penalty needs `log` of the sample volume to be positive.
    #[error("sample volume {0} is too small for the penalty (need at least 2)")]
    VolumeTooSmall(u64),
    /// `alphabet^gamma_size` exceeded the double-precision range.
    #[error("penalty overflow: {alphabet}^{gamma_size} is not finite")]
    PenaltyOverflow {
        /// Alphabet size.
        alphabet: usize,
        /// Number of neighborhood offsets.
        gamma_size: usize,
    },
    /// The penalty multiplier must be positive.
    #[error("penalty multiplier {0} is not positive")]
    NonPositiveScale(f64),
}

/// Neumaier-compensated running sum; deterministic for a fixed push order.
#[derive(Clone, Copy, Debug, Default)]
pub(crate) struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub(crate) fn push(&mut self, term: f64) {
        let t = self.sum + term;
        if self.sum.abs() >= term.abs() {
            self.comp += (self.sum - t) + term;
        } else {
            self.comp += (term - t) + self.sum;
        }
        self.sum = t;
    }

    pub(crate) fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// The three parts of one candidate's criterion value.
#[derive(Clone, Debug)]
pub struct CriterionValue {
    /// Candidate neighborhood.
    pub gamma: Neighborhood,
    /// Maximum log pseudo-likelihood of the counted blocks.
    pub log_mpl: f64,
    /// Penalty `c * alphabet^{|gamma|} * ln(sample volume)`.
    pub penalty: f64,
    /// Criterion `-log_mpl + penalty`; smaller is better.
    pub pic: f64,
    /// Volume of the sample region the penalty was computed from.
    pub sample_volume: u64,
}

/// Log pseudo-likelihood of counted blocks under a given conditional table.
///
/// Sums `N(block, center) * ln Q(center | block)` over observed blocks.
/// Returns negative infinity when a zero-probability block was observed.
pub fn log_pl(table: &CountTable, spec: &Specification) -> Result<f64, PseudoLikError> {
    if table.gamma() != spec.gamma() {
        return Err(PseudoLikError::GammaMismatch {
            table: table.gamma().to_string(),
            spec: spec.gamma().to_string(),
        });
    }
    let mut acc = CompensatedSum::default();
    let mut block = vec![0u8; table.gamma().len()];
    let marginal_codec = crate::counts::BlockCodec::new(table.alphabet(), table.gamma().len());
    for (key, n) in table.iter() {
        let (block_key, center) = table.codec().split_last(key);
        marginal_codec.decode_into(&block_key, &mut block);
        let q = spec.prob(spec.block_code(&block), center);
        if q == 0.0 {
            // An observed block of probability zero sinks the whole score;
            // compensation arithmetic cannot carry infinities.
            return Ok(f64::NEG_INFINITY);
        }
        acc.push(n as f64 * q.ln());
    }
    Ok(acc.value())
}

/// Maximum log pseudo-likelihood achievable on the counted blocks.
///
/// Equals `sum N(block, center) * ln( N(block, center) / N(block) )` over
/// observed blocks; the maximizing conditional is the empirical one.
/// Always nonpositive; zero exactly when each conditioning block appears
/// with a single center symbol. An empty table scores zero.
pub fn log_mpl(table: &CountTable) -> f64 {
    if table.is_empty() {
        return 0.0;
    }
    let marginals = table.center_marginals();
    let mut acc = CompensatedSum::default();
    for (key, n) in table.iter() {
        let (block_key, _) = table.codec().split_last(key);
        let nm = marginals[&block_key];
        acc.push(n as f64 * ((n as f64) / (nm as f64)).ln());
    }
    acc.value()
}

/// Penalty `c * alphabet^{gamma_size} * ln(sample_volume)`.
pub fn penalty(
    alphabet: usize,
    gamma_size: usize,
    sample_volume: u64,
    c: f64,
) -> Result<f64, PseudoLikError> {
    if c.is_nan() || c <= 0.0 {
        return Err(PseudoLikError::NonPositiveScale(c));
    }
    if sample_volume < 2 {
        return Err(PseudoLikError::VolumeTooSmall(sample_volume));
    }
    let parameters = (alphabet as f64).powi(gamma_size as i32);
    let value = c * parameters * (sample_volume as f64).ln();
    if !value.is_finite() {
        return Err(PseudoLikError::PenaltyOverflow {
            alphabet,
            gamma_size,
        });
    }
    Ok(value)
}

/// Criterion value of one candidate neighborhood on one sample.
pub fn pic(
    sample: &Sample,
    gamma: &Neighborhood,
    c: f64,
) -> Result<CriterionValue, PseudoLikError> {
    let region = sample.region();
    let w = crate::lattice::window_width(region.volume(), region.dim());
    pic_within(sample, gamma, c, w)
}

/// Criterion value counted over the region shrunk by `width` per axis.
///
/// Recomputes what a search with `width` as its largest radius assigns to
/// `gamma`; the penalty still uses the full region volume.
pub fn pic_within(
    sample: &Sample,
    gamma: &Neighborhood,
    c: f64,
    width: i64,
) -> Result<CriterionValue, PseudoLikError> {
    let table = count_blocks_within(sample, gamma, width);
    let log_mpl = log_mpl(&table);
    let penalty = penalty(
        sample.alphabet_size(),
        gamma.len(),
        sample.region().volume(),
        c,
    )?;
    Ok(CriterionValue {
        gamma: gamma.clone(),
        log_mpl,
        penalty,
        pic: -log_mpl + penalty,
        sample_volume: sample.region().volume(),
    })
}

/// Criterion value from a precomputed maximum log pseudo-likelihood.
pub(crate) fn criterion_from_parts(
    gamma: &Neighborhood,
    log_mpl: f64,
    alphabet: usize,
    sample_volume: u64,
    c: f64,
) -> Result<CriterionValue, PseudoLikError> {
    let penalty = penalty(alphabet, gamma.len(), sample_volume, c)?;
    Ok(CriterionValue {
        gamma: gamma.clone(),
        log_mpl,
        penalty,
        pic: -log_mpl + penalty,
        sample_volume,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::counts::{count_blocks, BlockKey};
    use crate::lattice::{ball, enumerate_neighborhoods, Region, Site};
    use crate::model::Potential;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_sample(dims: &[usize], alphabet: usize, seed: u64) -> Sample {
        let region = Region::from_dims(dims).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let symbols = (0..region.volume())
            .map(|_| rng.gen_range(0..alphabet) as u8)
            .collect();
        Sample::new(region, alphabet, symbols).unwrap()
    }

    fn chain_sample(symbols: Vec<u8>) -> Sample {
        let region = Region::from_dims(&[symbols.len()]).unwrap();
        Sample::new(region, 2, symbols).unwrap()
    }

    /// Row index of a table key in a dense conditional table.
    fn key_row(table: &CountTable, key: &BlockKey) -> (usize, u8) {
        let (block_key, center) = table.codec().split_last(key);
        match block_key {
            BlockKey::Packed(code) => (code as usize, center),
            BlockKey::Wide(_) => panic!("wide keys do not index conditional tables"),
        }
    }

    /// Empirical conditional of a table, uniform on unobserved blocks.
    fn empirical_rows(table: &CountTable) -> Vec<f64> {
        let m = table.alphabet();
        let rows = m.pow(table.gamma().len() as u32);
        let mut probs = vec![0.0f64; rows * m];
        let marginals = table.center_marginals();
        let mut seen = vec![false; rows];
        for key in table.sorted_keys() {
            let n = table.get(&key);
            let (block_key, center) = table.codec().split_last(&key);
            let (row, _) = key_row(table, &key);
            probs[row * m + center as usize] = n as f64 / marginals[&block_key] as f64;
            seen[row] = true;
        }
        for (row, seen) in seen.iter().enumerate() {
            if !seen {
                for sym in 0..m {
                    probs[row * m + sym] = 1.0 / m as f64;
                }
            }
        }
        probs
    }

    #[test]
    fn compensated_sum_recovers_cancellation() {
        let mut acc = CompensatedSum::default();
        acc.push(1.0);
        acc.push(1e100);
        acc.push(1.0);
        acc.push(-1e100);
        assert_eq!(acc.value(), 2.0);
    }

    #[test]
    fn homogeneous_conditional_scores_count_times_log_p() {
        let sample = chain_sample(vec![0; 10]);
        let gamma = ball(1, 1);
        let table = count_blocks(&sample, &gamma);
        let rows = 4;
        let mut probs = Vec::new();
        for _ in 0..rows {
            probs.extend_from_slice(&[0.7, 0.3]);
        }
        let spec = Specification::from_table(gamma, 2, probs).unwrap();
        let got = log_pl(&table, &spec).unwrap();
        assert_abs_diff_eq!(got, table.total() as f64 * 0.7f64.ln(), epsilon = 1e-12);
    }

    #[test]
    fn certain_conditional_scores_zero() {
        let sample = chain_sample(vec![0; 10]);
        let gamma = ball(1, 1);
        let table = count_blocks(&sample, &gamma);
        let mut probs = vec![0.0; 8];
        for row in 0..4 {
            probs[row * 2] = 1.0;
        }
        let spec = Specification::from_table(gamma, 2, probs).unwrap();
        assert_eq!(log_pl(&table, &spec).unwrap(), 0.0);
    }

    #[test]
    fn alternating_chain_under_the_true_conditional() {
        // Four contributing sites, each scoring ln(1/(1+e)).
        let sample = chain_sample(vec![0, 1, 0, 1, 0, 1]);
        let gamma = ball(1, 1);
        let table = count_blocks(&sample, &gamma);
        let spec =
            Specification::from_potential(&Potential::ising(1, 0.25).unwrap()).unwrap();
        let got = log_pl(&table, &spec).unwrap();
        assert_abs_diff_eq!(got, -5.253046750072891, epsilon = 1e-12);
    }

    #[test]
    fn zero_probability_block_scores_negative_infinity() {
        let sample = chain_sample(vec![0, 1, 0, 1, 0, 1]);
        let gamma = ball(1, 1);
        let table = count_blocks(&sample, &gamma);
        // Certainty on the wrong symbol: observed blocks get probability 0.
        let mut probs = vec![0.0; 8];
        for row in 0..4 {
            probs[row * 2] = 1.0;
        }
        let spec = Specification::from_table(gamma, 2, probs).unwrap();
        assert_eq!(log_pl(&table, &spec).unwrap(), f64::NEG_INFINITY);
    }

    #[test]
    fn gamma_mismatch_is_rejected() {
        let sample = chain_sample(vec![0, 1, 0, 1, 0, 1]);
        let table = count_blocks(&sample, &ball(1, 1));
        let spec = Specification::from_table(Neighborhood::empty(1), 2, vec![0.5, 0.5]).unwrap();
        assert!(matches!(
            log_pl(&table, &spec),
            Err(PseudoLikError::GammaMismatch { .. })
        ));
    }

    #[test]
    fn deterministic_centers_score_zero() {
        let sample = chain_sample(vec![0, 1, 0, 1, 0, 1]);
        let table = count_blocks(&sample, &ball(1, 1));
        assert_eq!(log_mpl(&table), 0.0);
    }

    #[test]
    fn three_one_split_matches_hand_value() {
        // Window symbols 0,0,1,0: with the empty neighborhood the single
        // conditioning block has center counts (3, 1).
        let sample = chain_sample(vec![1, 0, 0, 1, 0, 1]);
        let table = count_blocks(&sample, &Neighborhood::empty(1));
        assert_eq!(table.total(), 4);
        assert_abs_diff_eq!(log_mpl(&table), -2.249340578475233, epsilon = 1e-12);
    }

    #[test]
    fn empty_table_scores_zero() {
        let sample = random_sample(&[2, 9], 2, 1);
        let table = count_blocks(&sample, &Neighborhood::empty(2));
        assert_eq!(table.total(), 0);
        assert_eq!(log_mpl(&table), 0.0);
    }

    #[test]
    fn mpl_is_nonpositive_on_random_samples() {
        for seed in 0..5 {
            let sample = random_sample(&[14, 14], 3, seed);
            for gamma in enumerate_neighborhoods(1, 2).unwrap() {
                assert!(log_mpl(&count_blocks(&sample, &gamma)) <= 0.0);
            }
        }
    }

    #[test]
    fn mpl_bounds_every_conditional_table() {
        let sample = random_sample(&[20, 20], 2, 42);
        let gamma = ball(1, 2);
        let table = count_blocks(&sample, &gamma);
        let mpl = log_mpl(&table);
        let maximizer = empirical_rows(&table);
        let spec =
            Specification::from_table(gamma.clone(), 2, maximizer.clone()).unwrap();
        assert_abs_diff_eq!(log_pl(&table, &spec).unwrap(), mpl, epsilon = 1e-9);

        let m = 2;
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            // Mix toward uniform and tilt, keeping every entry positive.
            let t: f64 = rng.gen_range(0.05..0.95);
            let mut probs = maximizer.clone();
            for row in probs.chunks_mut(m) {
                let mut sum = 0.0;
                for p in row.iter_mut() {
                    *p = ((1.0 - t) * *p + t / m as f64)
                        * (0.5 * rng.gen_range(-1.0..1.0f64)).exp();
                    sum += *p;
                }
                for p in row.iter_mut() {
                    *p /= sum;
                }
            }
            let spec = Specification::from_table(gamma.clone(), 2, probs).unwrap();
            assert!(log_pl(&table, &spec).unwrap() <= mpl + 1e-9);
        }
    }

    #[test]
    fn mpl_is_monotone_under_neighborhood_inclusion() {
        // All radius-1 candidates fit inside the window, so their counts
        // run over identical sites and nesting orders their maxima.
        let sample = random_sample(&[16, 16], 2, 3);
        let candidates = enumerate_neighborhoods(1, 2).unwrap();
        let scores: Vec<f64> = candidates
            .iter()
            .map(|g| log_mpl(&count_blocks(&sample, g)))
            .collect();
        for (i, a) in candidates.iter().enumerate() {
            for (j, b) in candidates.iter().enumerate() {
                if a.is_subset_of(b) {
                    assert!(
                        scores[j] >= scores[i] - 1e-12,
                        "{b} should score at least {a}"
                    );
                }
            }
        }
    }

    #[test]
    fn penalty_matches_hand_value() {
        let p = penalty(2, 4, 256, 1.0).unwrap();
        assert_abs_diff_eq!(p, 88.722839111673, epsilon = 1e-9);
        assert_eq!(penalty(2, 4, 256, 2.0).unwrap(), 2.0 * p);
        assert_abs_diff_eq!(
            penalty(3, 0, 100, 0.5).unwrap(),
            0.5 * 100.0f64.ln(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn penalty_guards_its_inputs() {
        assert_eq!(
            penalty(2, 4, 1, 1.0).unwrap_err(),
            PseudoLikError::VolumeTooSmall(1)
        );
        assert_eq!(
            penalty(2, 4, 256, 0.0).unwrap_err(),
            PseudoLikError::NonPositiveScale(0.0)
        );
        assert_eq!(
            penalty(2, 4000, 256, 1.0).unwrap_err(),
            PseudoLikError::PenaltyOverflow {
                alphabet: 2,
                gamma_size: 4000
            }
        );
    }

    #[test]
    fn pic_of_constant_sample_is_pure_penalty() {
        let sample = chain_sample(vec![0; 12]);
        let value = pic(&sample, &Neighborhood::empty(1), 1.0).unwrap();
        assert_eq!(value.log_mpl, 0.0);
        assert_eq!(value.pic, value.penalty);
        assert_eq!(value.sample_volume, 12);
    }

    #[test]
    fn pic_decomposition_is_exact() {
        let sample = random_sample(&[16, 16], 2, 5);
        for gamma in enumerate_neighborhoods(1, 2).unwrap() {
            let v = pic(&sample, &gamma, 1.0).unwrap();
            assert_eq!(v.pic, -v.log_mpl + v.penalty);
            assert!(v.log_mpl <= 0.0);
            assert!(v.penalty > 0.0);
        }
    }

    #[test]
    fn fair_coin_prefers_the_empty_neighborhood() {
        // The parameter-count gap makes the penalty difference dwarf any
        // in-sample gain from conditioning on a neighbor.
        let axis = Neighborhood::new(2, vec![Site::new(vec![-1, 0]), Site::new(vec![1, 0])])
            .unwrap();
        for seed in 0..20 {
            let sample = random_sample(&[102, 102], 2, 1000 + seed);
            let empty = pic(&sample, &Neighborhood::empty(2), 1.0).unwrap();
            let coin = pic(&sample, &axis, 1.0).unwrap();
            assert!(
                empty.pic < coin.pic,
                "seed {seed}: {} vs {}",
                empty.pic,
                coin.pic
            );
        }
    }
}
