//! Neighborhood selection by criterion minimization, the empirical
//! conditional table at a chosen neighborhood, and a concentration
//! diagnostic for empirical conditionals.

use std::collections::BTreeMap;

use rayon::prelude::*;
use thiserror::Error;

use crate::counts::{count_blocks, count_blocks_within, project, CountTable, CountsError};
use crate::lattice::{
    ball, enumerate_neighborhoods_capped, window_width, LatticeError, Neighborhood,
    DEFAULT_CANDIDATE_CAP,
};
use crate::model::Specification;
use crate::pseudolik::{criterion_from_parts, log_mpl, CriterionValue, PseudoLikError};
use crate::sampler::Sample;

/// Two criterion values within this distance count as tied; soaks up
/// summation-order noise between evaluation routes.
pub const TIE_TOLERANCE: f64 = 1e-9;

/// Errors from estimation and diagnostics.
#[derive(Debug, Error)]
pub enum EstimatorError {
    /// Candidate radius reaches beyond the window, so candidates would be
    /// scored on differing site sets.
    #[error(
        "radius {radius} exceeds the window width {window_width}; \
         enable force_radius to search anyway"
    )]
    RadiusExceedsWindow {
        /// Requested candidate radius.
        radius: i64,
        /// Window shrink width of the sample.
        window_width: i64,
    },
    /// Candidate enumeration failed or exceeded its cap.
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    /// Projection failed.
    #[error(transparent)]
    Counts(#[from] CountsError),
    /// Criterion evaluation failed.
    #[error(transparent)]
    Criterion(#[from] PseudoLikError),
    /// No site contributed any counts.
    #[error("no contributing sites in the sample window")]
    EmptyCounts,
    /// A conditional table conditions on a different neighborhood.
    #[error("conditional table is on {spec}, expected {expected}")]
    SpecMismatch {
        /// Neighborhood the caller asked about.
        expected: String,
        /// Neighborhood of the supplied table.
        spec: String,
    },
}

/// How candidate criterion values are computed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Evaluation {
    /// Project from one full-ball table when the radius fits the window,
    /// otherwise count per candidate.
    Auto,
    /// Count the full ball once and marginalize per candidate.
    Projected,
    /// Run a separate counting scan per candidate.
    PerCandidate,
}

/// Settings for [`estimate`].
#[derive(Clone, Debug)]
pub struct EstimateConfig {
    /// Candidate radius: the search covers all central-symmetric offset
    /// sets inside the max-norm ball of this radius.
    pub radius: i64,
    /// Penalty multiplier.
    pub penalty_scale: f64,
    /// Search even when the radius exceeds the window width. Counts then
    /// run over the region shrunk by the full radius, so every candidate
    /// still scores the same site set.
    pub force_radius: bool,
    /// Evaluation route.
    pub evaluation: Evaluation,
    /// Upper bound on the number of candidates.
    pub candidate_cap: u64,
}

impl EstimateConfig {
    /// Defaults: penalty multiplier 1, no radius override, automatic route.
    pub fn new(radius: i64) -> Self {
        EstimateConfig {
            radius,
            penalty_scale: 1.0,
            force_radius: false,
            evaluation: Evaluation::Auto,
            candidate_cap: DEFAULT_CANDIDATE_CAP,
        }
    }
}

/// Outcome of a candidate search.
#[derive(Clone, Debug)]
pub struct PicReport {
    /// Every candidate's criterion value, in canonical candidate order.
    pub candidates: Vec<CriterionValue>,
    /// Index of the winner in `candidates`.
    pub selected_index: usize,
    /// Indices of all candidates within [`TIE_TOLERANCE`] of the best
    /// criterion value (always contains the winner).
    pub tie_indices: Vec<usize>,
    /// Candidate radius searched.
    pub radius: i64,
    /// Penalty multiplier used.
    pub penalty_scale: f64,
    /// Whether the radius override was exercised.
    pub forced: bool,
    /// Route that produced the values (never `Auto`).
    pub evaluation: Evaluation,
    /// Window shrink width of the sample.
    pub window_width: i64,
}

impl PicReport {
    /// The selected neighborhood.
    pub fn selected(&self) -> &Neighborhood {
        &self.candidates[self.selected_index].gamma
    }

    /// Criterion value of the selected neighborhood.
    pub fn selected_value(&self) -> &CriterionValue {
        &self.candidates[self.selected_index]
    }

    /// Gap from the winner to the best other candidate; `None` with fewer
    /// than two candidates.
    pub fn runner_up_margin(&self) -> Option<f64> {
        let best = self.candidates[self.selected_index].pic;
        self.candidates
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != self.selected_index)
            .map(|(_, v)| v.pic - best)
            .min_by(|a, b| a.total_cmp(b))
    }
}

/// Searches every central-symmetric neighborhood of radius at most
/// `config.radius` for the smallest criterion value.
///
/// Ties within [`TIE_TOLERANCE`] go to the fewest offsets, then the
/// smallest radius, then canonical candidate order.
pub fn estimate(sample: &Sample, config: &EstimateConfig) -> Result<PicReport, EstimatorError> {
    let d = sample.region().dim();
    let w = window_width(sample.region().volume(), d);
    if config.radius > w && !config.force_radius {
        return Err(EstimatorError::RadiusExceedsWindow {
            radius: config.radius,
            window_width: w,
        });
    }
    let evaluation = match config.evaluation {
        // Projecting a forced full-ball table decodes every long block per
        // candidate, which costs more than rescanning; prefer direct scans.
        Evaluation::Auto => {
            if config.radius <= w {
                Evaluation::Projected
            } else {
                Evaluation::PerCandidate
            }
        }
        explicit => explicit,
    };
    // All candidates must score the same sites; a forced radius widens the
    // scan shrink from the window width to the radius itself.
    let scan_width = w.max(config.radius);
    let candidates = enumerate_neighborhoods_capped(config.radius, d, config.candidate_cap)?;

    let alphabet = sample.alphabet_size();
    let volume = sample.region().volume();
    let c = config.penalty_scale;
    let values: Vec<CriterionValue> = match evaluation {
        Evaluation::Projected => {
            let full = count_blocks_within(sample, &ball(config.radius, d), scan_width);
            candidates
                .par_iter()
                .map(|gamma| {
                    let table = project(&full, gamma)?;
                    Ok(criterion_from_parts(
                        gamma,
                        log_mpl(&table),
                        alphabet,
                        volume,
                        c,
                    )?)
                })
                .collect::<Result<_, EstimatorError>>()?
        }
        _ => candidates
            .par_iter()
            .map(|gamma| {
                let table = count_blocks_within(sample, gamma, scan_width);
                Ok(criterion_from_parts(
                    gamma,
                    log_mpl(&table),
                    alphabet,
                    volume,
                    c,
                )?)
            })
            .collect::<Result<_, EstimatorError>>()?,
    };

    let best = values
        .iter()
        .map(|v| v.pic)
        .min_by(f64::total_cmp)
        .expect("candidate list is never empty");
    let tie_indices: Vec<usize> = values
        .iter()
        .enumerate()
        .filter(|(_, v)| v.pic <= best + TIE_TOLERANCE)
        .map(|(i, _)| i)
        .collect();
    let selected_index = tie_indices
        .iter()
        .copied()
        .min_by_key(|&i| {
            let g = &values[i].gamma;
            (g.len(), g.radius(), i)
        })
        .expect("tie set contains the minimum");

    Ok(PicReport {
        candidates: values,
        selected_index,
        tie_indices,
        radius: config.radius,
        penalty_scale: c,
        forced: config.radius > w,
        evaluation,
        window_width: w,
    })
}

/// One conditioning block's empirical conditional row.
#[derive(Clone, Debug)]
pub struct EmpiricalRow {
    /// How often the conditioning block was observed.
    pub block_count: u64,
    /// Empirical conditional probability of each center symbol; sums to
    /// one, single entries may be zero.
    pub probs: Vec<f64>,
}

/// Empirical conditional table at a neighborhood, over observed
/// conditioning blocks only.
#[derive(Clone, Debug)]
pub struct EmpiricalTable {
    /// Conditioning neighborhood.
    pub gamma: Neighborhood,
    /// Alphabet size.
    pub alphabet: usize,
    /// Rows keyed by the conditioning block's symbols in canonical offset
    /// order; unobserved blocks are absent.
    pub rows: BTreeMap<Vec<u8>, EmpiricalRow>,
}

impl EmpiricalTable {
    /// Largest entrywise distance to a full conditional table, over the
    /// observed rows.
    pub fn max_deviation(&self, spec: &Specification) -> Result<f64, EstimatorError> {
        if spec.gamma() != &self.gamma {
            return Err(EstimatorError::SpecMismatch {
                expected: self.gamma.to_string(),
                spec: spec.gamma().to_string(),
            });
        }
        let mut worst: f64 = 0.0;
        for (block, row) in &self.rows {
            let code = spec.block_code(block);
            for (center, &p) in row.probs.iter().enumerate() {
                worst = worst.max((p - spec.prob(code, center as u8)).abs());
            }
        }
        Ok(worst)
    }
}

/// Empirical conditional probabilities of the center symbol given each
/// observed conditioning block.
pub fn empirical_specification(
    sample: &Sample,
    gamma: &Neighborhood,
) -> Result<EmpiricalTable, EstimatorError> {
    let table = count_blocks(sample, gamma);
    empirical_from_table(&table)
}

fn empirical_from_table(table: &CountTable) -> Result<EmpiricalTable, EstimatorError> {
    if table.total() == 0 {
        return Err(EstimatorError::EmptyCounts);
    }
    let m = table.alphabet();
    let mut rows: BTreeMap<Vec<u8>, EmpiricalRow> = BTreeMap::new();
    let mut block = vec![0u8; table.gamma().len()];
    let marginal_codec = crate::counts::BlockCodec::new(m, table.gamma().len());
    for (key, n) in table.iter() {
        let (block_key, center) = table.codec().split_last(key);
        marginal_codec.decode_into(&block_key, &mut block);
        let row = rows.entry(block.clone()).or_insert_with(|| EmpiricalRow {
            block_count: 0,
            probs: vec![0.0; m],
        });
        row.block_count += n;
        row.probs[center as usize] = n as f64;
    }
    for row in rows.values_mut() {
        for p in &mut row.probs {
            *p /= row.block_count as f64;
        }
    }
    Ok(EmpiricalTable {
        gamma: table.gamma().clone(),
        alphabet: m,
        rows,
    })
}

/// Choice of the concentration constant for [`typicality_check`].
#[derive(Clone, Copy, Debug)]
pub enum KappaMode {
    /// Just above the smallest constant the concentration argument needs:
    /// `1.01 * 2^{3d} * e * alpha * ln(m^2 + 1)`.
    Auto {
        /// Sieve-density parameter in `(0, 1]`.
        alpha: f64,
    },
    /// Explicit constant.
    Fixed(f64),
}

/// The auto constant of [`KappaMode`] spelled out.
pub fn kappa_auto(alpha: f64, dim: usize, alphabet: usize) -> f64 {
    let cells = 2f64.powi(3 * dim as i32);
    1.01 * cells * std::f64::consts::E * alpha * ((alphabet * alphabet + 1) as f64).ln()
}

/// One conditioning block and center symbol of a typicality check.
#[derive(Clone, Debug)]
pub struct TypicalityRecord {
    /// Conditioning block symbols in canonical offset order.
    pub block: Vec<u8>,
    /// Center symbol.
    pub center: u8,
    /// How often the conditioning block was observed.
    pub block_count: u64,
    /// Empirical conditional probability.
    pub ratio: f64,
    /// Reference conditional probability.
    pub q: f64,
    /// `|ratio - q|`.
    pub deviation: f64,
    /// `sqrt(kappa * ln(block_count) / block_count)`.
    pub bound: f64,
    /// Whether the deviation stayed below the bound.
    pub pass: bool,
}

/// Result of comparing empirical conditionals against a reference table.
#[derive(Clone, Debug)]
pub struct TypicalityReport {
    /// Neighborhood checked.
    pub gamma: Neighborhood,
    /// Constant used in the bound.
    pub kappa: f64,
    /// One record per observed conditioning block (seen at least twice)
    /// and center symbol, in block order.
    pub records: Vec<TypicalityRecord>,
    /// Smallest `bound - deviation` over all records; negative when some
    /// record failed.
    pub worst_margin: f64,
    /// Whether every record passed.
    pub all_pass: bool,
}

/// Checks every empirical conditional against a reference conditional
/// table with the bound `sqrt(kappa * ln N / N)`, `N` the conditioning
/// block's count.
///
/// Blocks observed fewer than two times are skipped (the bound exceeds one
/// there). Failing records are diagnostics, not errors: the bound is only
/// guaranteed for large samples from the reference model itself.
pub fn typicality_check(
    sample: &Sample,
    gamma: &Neighborhood,
    spec: &Specification,
    kappa: KappaMode,
) -> Result<TypicalityReport, EstimatorError> {
    if spec.gamma() != gamma {
        return Err(EstimatorError::SpecMismatch {
            expected: gamma.to_string(),
            spec: spec.gamma().to_string(),
        });
    }
    let kappa = match kappa {
        KappaMode::Auto { alpha } => kappa_auto(alpha, sample.region().dim(), spec.alphabet()),
        KappaMode::Fixed(k) => k,
    };
    let empirical = empirical_specification(sample, gamma)?;
    let mut records = Vec::new();
    let mut worst_margin = f64::INFINITY;
    let mut all_pass = true;
    for (block, row) in &empirical.rows {
        if row.block_count < 2 {
            continue;
        }
        let n = row.block_count as f64;
        let bound = (kappa * n.ln() / n).sqrt();
        let code = spec.block_code(block);
        for (center, &ratio) in row.probs.iter().enumerate() {
            let q = spec.prob(code, center as u8);
            let deviation = (ratio - q).abs();
            let pass = deviation < bound;
            worst_margin = worst_margin.min(bound - deviation);
            all_pass &= pass;
            records.push(TypicalityRecord {
                block: block.clone(),
                center: center as u8,
                block_count: row.block_count,
                ratio,
                q,
                deviation,
                bound,
                pass,
            });
        }
    }
    if records.is_empty() {
        worst_margin = 0.0;
    }
    Ok(TypicalityReport {
        gamma: gamma.clone(),
        kappa,
        records,
        worst_margin,
        all_pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{Region, Site};
    use crate::model::Potential;
    use crate::pseudolik::{pic, pic_within};
    use crate::sampler::gibbs_sample;
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

    fn site(coords: &[i64]) -> Site {
        Site::new(coords.to_vec())
    }

    #[test]
    fn oversized_radius_needs_the_override() {
        let sample = random_sample(&[16, 16], 2, 1);
        let err = estimate(&sample, &EstimateConfig::new(2)).unwrap_err();
        assert!(matches!(
            err,
            EstimatorError::RadiusExceedsWindow {
                radius: 2,
                window_width: 1
            }
        ));
        let mut config = EstimateConfig::new(2);
        config.force_radius = true;
        let report = estimate(&sample, &config).unwrap();
        assert!(report.forced);
        assert_eq!(report.evaluation, Evaluation::PerCandidate);
        assert_eq!(report.candidates.len(), 4096);
    }

    #[test]
    fn selected_value_is_reproducible_from_scratch() {
        let sample = random_sample(&[16, 16], 2, 2);
        let report = estimate(&sample, &EstimateConfig::new(1)).unwrap();
        assert_eq!(report.candidates.len(), 16);
        for value in &report.candidates {
            let again = pic(&sample, &value.gamma, 1.0).unwrap();
            assert_abs_diff_eq!(value.pic, again.pic, epsilon = 1e-12);
            assert_abs_diff_eq!(value.log_mpl, again.log_mpl, epsilon = 1e-12);
            assert_eq!(value.penalty, again.penalty);
        }
    }

    #[test]
    fn projected_and_per_candidate_routes_agree() {
        for seed in 0..4 {
            let sample = random_sample(&[16, 16], 2, 100 + seed);
            let mut config = EstimateConfig::new(1);
            config.evaluation = Evaluation::Projected;
            let fast = estimate(&sample, &config).unwrap();
            config.evaluation = Evaluation::PerCandidate;
            let slow = estimate(&sample, &config).unwrap();
            assert_eq!(fast.selected(), slow.selected());
            assert_eq!(fast.tie_indices, slow.tie_indices);
            for (a, b) in fast.candidates.iter().zip(&slow.candidates) {
                assert_abs_diff_eq!(a.pic, b.pic, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn forced_routes_agree_on_a_shared_box() {
        // Forcing radius 2 past the width-1 window must still score every
        // candidate on the same sites, whichever route computes the values.
        let sample = random_sample(&[16, 16], 2, 3);
        let mut config = EstimateConfig::new(2);
        config.force_radius = true;
        config.evaluation = Evaluation::Projected;
        let fast = estimate(&sample, &config).unwrap();
        config.evaluation = Evaluation::PerCandidate;
        let slow = estimate(&sample, &config).unwrap();
        assert!(fast.forced && slow.forced);
        assert_eq!(fast.selected(), slow.selected());
        for (a, b) in fast.candidates.iter().zip(&slow.candidates) {
            assert_abs_diff_eq!(a.pic, b.pic, epsilon = 1e-12);
            let again = pic_within(&sample, &a.gamma, 1.0, 2).unwrap();
            assert_abs_diff_eq!(a.pic, again.pic, epsilon = 1e-12);
        }
    }

    #[test]
    fn checkerboard_ties_break_canonically() {
        // Every two-offset candidate determines the center exactly, so all
        // four tie at pure-penalty criterion values; the lexicographically
        // first offset pair must win.
        let region = Region::from_dims(&[8, 8]).unwrap();
        let symbols = (0..8)
            .flat_map(|i| (0..8).map(move |j| ((i + j) % 2) as u8))
            .collect();
        let sample = Sample::new(region, 2, symbols).unwrap();
        let report = estimate(&sample, &EstimateConfig::new(1)).unwrap();
        assert_eq!(
            report.selected(),
            &Neighborhood::new(2, vec![site(&[-1, -1]), site(&[1, 1])]).unwrap()
        );
        assert_eq!(report.tie_indices.len(), 4);
        for &i in &report.tie_indices {
            assert_eq!(report.candidates[i].gamma.len(), 2);
        }
    }

    #[test]
    fn constant_sample_never_selects_a_superset() {
        // All maxima are equal (zero), so the penalty orders candidates and
        // anything containing the winner scores strictly worse.
        let region = Region::from_dims(&[12, 12]).unwrap();
        let sample = Sample::new(region, 2, vec![1; 144]).unwrap();
        let report = estimate(&sample, &EstimateConfig::new(1)).unwrap();
        assert!(report.selected().is_empty());
        let winner_pic = report.selected_value().pic;
        for value in &report.candidates {
            if !value.gamma.is_empty() {
                assert!(value.pic > winner_pic + TIE_TOLERANCE);
            }
        }
    }

    #[test]
    fn relabeling_symbols_preserves_the_selection() {
        let sample = random_sample(&[40], 3, 17);
        let permuted: Vec<u8> = sample.symbols().iter().map(|&s| (s + 1) % 3).collect();
        let permuted =
            Sample::new(sample.region().clone(), 3, permuted).unwrap();
        let a = estimate(&sample, &EstimateConfig::new(1)).unwrap();
        let b = estimate(&permuted, &EstimateConfig::new(1)).unwrap();
        assert_eq!(a.selected(), b.selected());
        for (x, y) in a.candidates.iter().zip(&b.candidates) {
            assert_abs_diff_eq!(x.log_mpl, y.log_mpl, epsilon = 1e-12);
        }
    }

    #[test]
    fn independent_field_selects_the_empty_neighborhood() {
        let p = Potential::new(2, 2, vec![], vec![0.0, 0.0], None).unwrap();
        let sample = gibbs_sample(&p, &[64, 64], 30, 30, 4242).unwrap();
        let report = estimate(&sample, &EstimateConfig::new(1)).unwrap();
        assert!(report.selected().is_empty());
    }

    #[test]
    fn strong_chain_recovers_its_neighbor_pair() {
        let p = Potential::ising(1, 0.6).unwrap();
        let sample = gibbs_sample(&p, &[10_000], 60, 600, 99).unwrap();
        let report = estimate(&sample, &EstimateConfig::new(3)).unwrap();
        assert_eq!(report.evaluation, Evaluation::Projected);
        assert_eq!(report.candidates.len(), 8);
        assert_eq!(
            report.selected(),
            &Neighborhood::new(1, vec![site(&[-1]), site(&[1])]).unwrap()
        );
    }

    #[test]
    fn empirical_table_of_constant_sample_is_certain() {
        let region = Region::from_dims(&[10]).unwrap();
        let sample = Sample::new(region, 2, vec![1; 10]).unwrap();
        let table = empirical_specification(&sample, &ball(1, 1)).unwrap();
        assert_eq!(table.rows.len(), 1);
        let row = table.rows.get(&vec![1u8, 1]).unwrap();
        assert_eq!(row.probs, vec![0.0, 1.0]);
        assert_eq!(row.block_count, 8);
    }

    #[test]
    fn empirical_table_of_alternating_chain() {
        let sample = chain_sample(vec![0, 1, 0, 1, 0, 1]);
        let table = empirical_specification(&sample, &ball(1, 1)).unwrap();
        let row = table.rows.get(&vec![1u8, 1]).unwrap();
        assert_eq!(row.probs, vec![1.0, 0.0]);
        let row = table.rows.get(&vec![0u8, 0]).unwrap();
        assert_eq!(row.probs, vec![0.0, 1.0]);
    }

    #[test]
    fn empirical_table_needs_counts() {
        let sample = random_sample(&[2, 9], 2, 1);
        assert!(matches!(
            empirical_specification(&sample, &Neighborhood::empty(2)),
            Err(EstimatorError::EmptyCounts)
        ));
    }

    #[test]
    fn empirical_rows_sum_to_one() {
        let sample = random_sample(&[18, 18], 3, 8);
        let table = empirical_specification(&sample, &ball(1, 2)).unwrap();
        for row in table.rows.values() {
            let sum: f64 = row.probs.iter().sum();
            assert_abs_diff_eq!(sum, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn typicality_worked_example() {
        // Volume 1004 shrinks by width 2 to a 1000-site window; 520 zeros
        // and 480 ones inside it give ratio 0.52 against the fair
        // reference.
        let mut symbols = vec![0u8; 1004];
        for s in symbols.iter_mut().take(482).skip(2) {
            *s = 1;
        }
        let sample = chain_sample(symbols);
        let gamma = Neighborhood::empty(1);
        let spec = Specification::from_table(gamma.clone(), 2, vec![0.5, 0.5]).unwrap();
        let report =
            typicality_check(&sample, &gamma, &spec, KappaMode::Fixed(2.0)).unwrap();
        assert_eq!(report.records.len(), 2);
        let record = &report.records[0];
        assert_eq!(record.block_count, 1000);
        assert_abs_diff_eq!(record.deviation, 0.02, epsilon = 1e-12);
        assert_abs_diff_eq!(record.bound, 0.11753940002383997, epsilon = 1e-9);
        assert!(record.pass);
        assert!(report.all_pass);
        assert_abs_diff_eq!(report.worst_margin, record.bound - 0.02, epsilon = 1e-12);
    }

    #[test]
    fn certain_rows_always_pass() {
        let region = Region::from_dims(&[30]).unwrap();
        let sample = Sample::new(region, 2, vec![0; 30]).unwrap();
        let gamma = ball(1, 1);
        let mut probs = vec![0.0; 8];
        for row in 0..4 {
            probs[row * 2] = 1.0;
        }
        let spec = Specification::from_table(gamma.clone(), 2, probs).unwrap();
        let report =
            typicality_check(&sample, &gamma, &spec, KappaMode::Fixed(0.001)).unwrap();
        assert!(report.all_pass);
        for record in &report.records {
            assert_eq!(record.deviation, 0.0);
        }
    }

    #[test]
    fn kappa_auto_matches_hand_value() {
        assert_abs_diff_eq!(
            kappa_auto(1e-4, 2, 2),
            0.02827939129418689,
            epsilon = 1e-12
        );
        let report_kappa = {
            let sample = chain_sample(vec![0, 1, 0, 1, 0, 1, 0, 1]);
            let gamma = Neighborhood::empty(1);
            let spec = Specification::from_table(gamma.clone(), 2, vec![0.5, 0.5]).unwrap();
            typicality_check(&sample, &gamma, &spec, KappaMode::Auto { alpha: 1e-4 })
                .unwrap()
                .kappa
        };
        assert_abs_diff_eq!(report_kappa, kappa_auto(1e-4, 1, 2), epsilon = 1e-15);
    }

    #[test]
    fn scarce_blocks_are_skipped() {
        // Window has four sites and four distinct conditioning blocks, so
        // every block count is one.
        let sample = chain_sample(vec![0, 1, 0, 1, 1, 0]);
        let gamma = ball(1, 1);
        let spec = Specification::from_potential(&Potential::ising(1, 0.1).unwrap()).unwrap();
        let report = typicality_check(&sample, &gamma, &spec, KappaMode::Fixed(2.0)).unwrap();
        assert!(report.records.is_empty());
        assert_eq!(report.worst_margin, 0.0);
    }
}
