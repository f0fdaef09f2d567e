//! Translation-invariant pair potentials, their one-point specifications,
//! and an exact joint-distribution oracle for tiny tori.
//!
//! A potential assigns one coupling per unordered offset pair plus a
//! per-symbol field. For a two-letter alphabet the pair term is a spin
//! product (symbols mapped to -1, +1); for larger alphabets it is an
//! agreement indicator. The one-point specification normalizes the
//! exponential of the local energy, so every conditional probability is
//! strictly positive.

use thiserror::Error;

use crate::lattice::{Neighborhood, Site};

/// Largest dense table (entries) a specification may occupy.
pub const SPEC_TABLE_CAP: u64 = 1 << 20;

/// Largest configuration space the exact tiny-torus oracle will enumerate.
pub const EXACT_JOINT_CAP: u64 = 1 << 20;

/// Errors from model construction and the exact oracle.
#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    /// Alphabet size below two.
    #[error("alphabet must have at least two symbols, got {0}")]
    AlphabetTooSmall(usize),
    /// Alphabet size above the `u8` symbol range.
    #[error("alphabet must fit in u8, got {0}")]
    AlphabetTooLarge(usize),
    /// A pair offset had the wrong dimension.
    #[error("offset dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch {
        /// Expected dimension.
        expected: usize,
        /// Offending dimension.
        got: usize,
    },
    /// A pair offset was the origin.
    #[error("pair offsets must be nonzero")]
    ZeroPairOffset,
    /// Two pair terms collapsed to the same unordered offset.
    #[error("duplicate pair offset {0} (offsets are identified with their negations)")]
    DuplicatePairOffset(String),
    /// Field vector length did not match the alphabet.
    #[error("field must have one entry per symbol: expected {expected}, got {got}")]
    FieldLengthMismatch {
        /// Expected length.
        expected: usize,
        /// Offending length.
        got: usize,
    },
    /// A coupling or field value was NaN or infinite.
    #[error("potential parameters must be finite")]
    NonFiniteParameter,
    /// Declared range below one.
    #[error("declared range must be at least 1, got {0}")]
    RangeTooSmall(i64),
    /// A pair offset fell outside the declared range.
    #[error("pair offset {offset} exceeds declared range {range}")]
    OffsetBeyondRange {
        /// Offending offset.
        offset: String,
        /// Declared range.
        range: i64,
    },
    /// A conditioning neighborhood was missing basic offsets.
    #[error("neighborhood {gamma} does not contain the basic neighborhood {basic}")]
    NeighborhoodLacksBasic {
        /// Requested conditioning neighborhood.
        gamma: String,
        /// Basic neighborhood of the potential.
        basic: String,
    },
    /// The specification table would exceed [`SPEC_TABLE_CAP`].
    #[error("specification table needs {needed} entries, above the cap {cap}")]
    TableTooLarge {
        /// Entries required.
        needed: u128,
        /// Configured cap.
        cap: u64,
    },
    /// The exact oracle would exceed [`EXACT_JOINT_CAP`] configurations.
    #[error("exact joint needs {needed} configurations, above the cap {cap}")]
    TooManyConfigurations {
        /// Configurations required.
        needed: u128,
        /// Configured cap.
        cap: u64,
    },
    /// A periodic axis was too short for the interaction range.
    #[error("axis {axis} has extent {extent}, need more than {minimum} for range {range}")]
    AxisTooSmall {
        /// Axis index.
        axis: usize,
        /// Axis extent.
        extent: i64,
        /// Required strict lower bound (twice the range).
        minimum: i64,
        /// Interaction range.
        range: i64,
    },
    /// A hand-built specification row did not sum to one.
    #[error("specification row {row} sums to {sum}, not 1")]
    RowNotNormalized {
        /// Row (conditioning block) code.
        row: usize,
        /// Observed sum.
        sum: f64,
    },
    /// A hand-built specification entry was negative or non-finite.
    #[error("specification entries must be finite and nonnegative (row {row})")]
    BadEntry {
        /// Row (conditioning block) code.
        row: usize,
    },
}

/// Conditional law of the center symbol given a neighborhood block.
///
/// `block` lists the symbols at the neighborhood's offsets in canonical
/// order; implementations return `P(center | block)`.
pub trait ConditionalModel {
    /// Conditioning neighborhood.
    fn gamma(&self) -> &Neighborhood;
    /// Alphabet size.
    fn alphabet_size(&self) -> usize;
    /// Conditional probability of `center` given `block`.
    fn conditional(&self, block: &[u8], center: u8) -> f64;
}

/// A translation-invariant pair potential with a per-symbol field.
///
/// Pair offsets are stored as their lexicographically positive
/// representatives; a coupling of exactly zero excludes the offset.
#[derive(Clone, Debug, PartialEq)]
pub struct Potential {
    dim: usize,
    alphabet: usize,
    pairs: Vec<(Site, f64)>,
    field: Vec<f64>,
    range: i64,
}

impl Potential {
    /// Validates a potential. `range` defaults to the largest offset norm
    /// (at least 1) and must dominate every offset when given.
    pub fn new(
        dim: usize,
        alphabet: usize,
        pairs: Vec<(Site, f64)>,
        field: Vec<f64>,
        range: Option<i64>,
    ) -> Result<Self, ModelError> {
        if alphabet < 2 {
            return Err(ModelError::AlphabetTooSmall(alphabet));
        }
        if alphabet > 256 {
            return Err(ModelError::AlphabetTooLarge(alphabet));
        }
        let field = if field.is_empty() {
            vec![0.0; alphabet]
        } else if field.len() == alphabet {
            field
        } else {
            return Err(ModelError::FieldLengthMismatch {
                expected: alphabet,
                got: field.len(),
            });
        };
        if field.iter().any(|v| !v.is_finite()) {
            return Err(ModelError::NonFiniteParameter);
        }
        let mut canonical: Vec<(Site, f64)> = Vec::with_capacity(pairs.len());
        for (offset, coupling) in pairs {
            if offset.dim() != dim {
                return Err(ModelError::DimensionMismatch {
                    expected: dim,
                    got: offset.dim(),
                });
            }
            if offset.is_zero() {
                return Err(ModelError::ZeroPairOffset);
            }
            if !coupling.is_finite() {
                return Err(ModelError::NonFiniteParameter);
            }
            let rep = if offset.is_lex_positive() {
                offset
            } else {
                offset.negated()
            };
            canonical.push((rep, coupling));
        }
        canonical.sort_unstable_by(|a, b| a.0.cmp(&b.0));
        for pair in canonical.windows(2) {
            if pair[0].0 == pair[1].0 {
                return Err(ModelError::DuplicatePairOffset(pair[0].0.to_string()));
            }
        }
        canonical.retain(|(_, coupling)| *coupling != 0.0);
        let max_norm = canonical.iter().map(|(v, _)| v.norm()).max().unwrap_or(0);
        let range = match range {
            Some(r) if r < 1 => return Err(ModelError::RangeTooSmall(r)),
            Some(r) => {
                if max_norm > r {
                    let offender = canonical
                        .iter()
                        .find(|(v, _)| v.norm() > r)
                        .map(|(v, _)| v.to_string())
                        .unwrap_or_default();
                    return Err(ModelError::OffsetBeyondRange {
                        offset: offender,
                        range: r,
                    });
                }
                r
            }
            None => max_norm.max(1),
        };
        Ok(Potential {
            dim,
            alphabet,
            pairs: canonical,
            field,
            range,
        })
    }

    /// Nearest-neighbor spin model on `Z^dim` with coupling `beta` on every
    /// unit offset and zero field.
    pub fn ising(dim: usize, beta: f64) -> Result<Self, ModelError> {
        let pairs = (0..dim)
            .map(|k| {
                let mut coords = vec![0i64; dim];
                coords[k] = 1;
                (Site::new(coords), beta)
            })
            .collect();
        Potential::new(dim, 2, pairs, Vec::new(), None)
    }

    /// Nearest-neighbor agreement model with `alphabet` symbols, coupling
    /// `beta` on every unit offset, and zero field.
    pub fn potts(dim: usize, alphabet: usize, beta: f64) -> Result<Self, ModelError> {
        let pairs = (0..dim)
            .map(|k| {
                let mut coords = vec![0i64; dim];
                coords[k] = 1;
                (Site::new(coords), beta)
            })
            .collect();
        Potential::new(dim, alphabet, pairs, Vec::new(), None)
    }

    /// Lattice dimension.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Alphabet size.
    pub fn alphabet_size(&self) -> usize {
        self.alphabet
    }

    /// Declared interaction range.
    pub fn range(&self) -> i64 {
        self.range
    }

    /// Canonical pair terms (lexicographically positive offsets, sorted).
    pub fn pairs(&self) -> &[(Site, f64)] {
        &self.pairs
    }

    /// Per-symbol field.
    pub fn field(&self) -> &[f64] {
        &self.field
    }

    /// Offsets with nonzero coupling together with their negations: the
    /// smallest neighborhood whose blocks determine the conditional law.
    pub fn basic_neighborhood(&self) -> Neighborhood {
        let mut offsets: Vec<Site> = Vec::with_capacity(self.pairs.len() * 2);
        for (v, _) in &self.pairs {
            offsets.push(v.clone());
            offsets.push(v.negated());
        }
        Neighborhood::new(self.dim, offsets).expect("canonical pairs are symmetric and distinct")
    }

    /// Pair interaction between two symbols: spin product for a two-letter
    /// alphabet, agreement indicator otherwise.
    pub fn interaction(&self, a: u8, b: u8) -> f64 {
        if self.alphabet == 2 {
            let spin = |s: u8| if s == 0 { -1.0 } else { 1.0 };
            spin(a) * spin(b)
        } else if a == b {
            1.0
        } else {
            0.0
        }
    }

    /// Compact single-token description used for sample provenance.
    pub fn describe(&self) -> String {
        let pairs = self
            .pairs
            .iter()
            .map(|(v, j)| format!("{v}={j}"))
            .collect::<Vec<_>>()
            .join(";");
        let field = self
            .field
            .iter()
            .map(|v| v.to_string())
            .collect::<Vec<_>>()
            .join(",");
        format!(
            "m={};range={};pairs[{}];field[{}]",
            self.alphabet, self.range, pairs, field
        )
    }
}

/// Dense one-point specification: `P(center | block)` for every block over a
/// neighborhood, stored row-major by block code.
///
/// Block codes are base-`alphabet` integers where the symbol at canonical
/// offset position `j` carries weight `alphabet^j`.
#[derive(Clone, Debug, PartialEq)]
pub struct Specification {
    gamma: Neighborhood,
    alphabet: usize,
    probs: Vec<f64>,
    q_min: f64,
}

impl Specification {
    /// One-point specification of a potential over its basic neighborhood.
    pub fn from_potential(p: &Potential) -> Result<Self, ModelError> {
        let gamma = p.basic_neighborhood();
        let m = p.alphabet_size();
        let needed = (m as u128)
            .checked_pow(gamma.len() as u32 + 1)
            .unwrap_or(u128::MAX);
        if needed > SPEC_TABLE_CAP as u128 {
            return Err(ModelError::TableTooLarge {
                needed,
                cap: SPEC_TABLE_CAP,
            });
        }
        // Coupling per offset position in canonical order; each pair term
        // contributes to both its offset and the negation.
        let mut coupling = vec![0.0f64; gamma.len()];
        for (v, j) in p.pairs() {
            for w in [v.clone(), v.negated()] {
                let pos = gamma
                    .offsets()
                    .binary_search(&w)
                    .expect("basic neighborhood contains both signs");
                coupling[pos] = *j;
            }
        }
        let rows = m.pow(gamma.len() as u32);
        let mut probs = vec![0.0f64; rows * m];
        let mut block = vec![0u8; gamma.len()];
        let mut q_min = f64::INFINITY;
        for code in 0..rows {
            let mut rem = code;
            for digit in block.iter_mut() {
                *digit = (rem % m) as u8;
                rem /= m;
            }
            let row = &mut probs[code * m..(code + 1) * m];
            for (a, slot) in row.iter_mut().enumerate() {
                let mut energy = p.field()[a];
                for (pos, b) in block.iter().enumerate() {
                    energy += coupling[pos] * p.interaction(a as u8, *b);
                }
                *slot = energy;
            }
            let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let mut sum = 0.0;
            for slot in row.iter_mut() {
                *slot = (*slot - max).exp();
                sum += *slot;
            }
            for slot in row.iter_mut() {
                *slot /= sum;
                q_min = q_min.min(*slot);
            }
        }
        Ok(Specification {
            gamma,
            alphabet: m,
            probs,
            q_min,
        })
    }

    /// One-point specification of a potential spread onto a superset of
    /// its basic neighborhood: the conditional reads only the basic
    /// offsets, so rows repeat across the extra positions.
    pub fn from_potential_on(p: &Potential, gamma: &Neighborhood) -> Result<Self, ModelError> {
        let base = Self::from_potential(p)?;
        if base.gamma == *gamma {
            return Ok(base);
        }
        if gamma.dim() != p.dim() {
            return Err(ModelError::DimensionMismatch {
                expected: p.dim(),
                got: gamma.dim(),
            });
        }
        if !base.gamma.is_subset_of(gamma) {
            return Err(ModelError::NeighborhoodLacksBasic {
                gamma: gamma.to_string(),
                basic: base.gamma.to_string(),
            });
        }
        let m = base.alphabet;
        let needed = (m as u128)
            .checked_pow(gamma.len() as u32 + 1)
            .unwrap_or(u128::MAX);
        if needed > SPEC_TABLE_CAP as u128 {
            return Err(ModelError::TableTooLarge {
                needed,
                cap: SPEC_TABLE_CAP,
            });
        }
        let positions: Vec<usize> = base
            .gamma
            .offsets()
            .iter()
            .map(|v| {
                gamma
                    .offsets()
                    .binary_search(v)
                    .expect("basic offsets are a subset")
            })
            .collect();
        let mut base_pow = vec![1usize; positions.len()];
        for j in 1..positions.len() {
            base_pow[j] = base_pow[j - 1] * m;
        }
        let rows = m.pow(gamma.len() as u32);
        let mut probs = Vec::with_capacity(rows * m);
        let mut block = vec![0u8; gamma.len()];
        for code in 0..rows {
            let mut rem = code;
            for digit in block.iter_mut() {
                *digit = (rem % m) as u8;
                rem /= m;
            }
            let base_code: usize = positions
                .iter()
                .zip(&base_pow)
                .map(|(&pos, &pow)| block[pos] as usize * pow)
                .sum();
            probs.extend_from_slice(base.row(base_code));
        }
        Ok(Specification {
            gamma: gamma.clone(),
            alphabet: m,
            probs,
            q_min: base.q_min,
        })
    }

    /// Wraps an explicit table. Rows must be nonnegative and sum to one
    /// within `1e-12`; zero entries are allowed.
    pub fn from_table(
        gamma: Neighborhood,
        alphabet: usize,
        probs: Vec<f64>,
    ) -> Result<Self, ModelError> {
        if alphabet < 2 {
            return Err(ModelError::AlphabetTooSmall(alphabet));
        }
        let needed = (alphabet as u128)
            .checked_pow(gamma.len() as u32 + 1)
            .unwrap_or(u128::MAX);
        if needed > SPEC_TABLE_CAP as u128 {
            return Err(ModelError::TableTooLarge {
                needed,
                cap: SPEC_TABLE_CAP,
            });
        }
        let rows = (alphabet as u64).pow(gamma.len() as u32) as usize;
        if probs.len() != rows * alphabet {
            return Err(ModelError::FieldLengthMismatch {
                expected: rows * alphabet,
                got: probs.len(),
            });
        }
        let mut q_min = f64::INFINITY;
        for row in 0..rows {
            let slice = &probs[row * alphabet..(row + 1) * alphabet];
            if slice.iter().any(|p| !p.is_finite() || *p < 0.0) {
                return Err(ModelError::BadEntry { row });
            }
            let sum: f64 = slice.iter().sum();
            if (sum - 1.0).abs() > 1e-12 {
                return Err(ModelError::RowNotNormalized { row, sum });
            }
            for p in slice {
                q_min = q_min.min(*p);
            }
        }
        Ok(Specification {
            gamma,
            alphabet,
            probs,
            q_min,
        })
    }

    /// Conditioning neighborhood.
    pub fn gamma(&self) -> &Neighborhood {
        &self.gamma
    }

    /// Alphabet size.
    pub fn alphabet(&self) -> usize {
        self.alphabet
    }

    /// Smallest conditional probability in the table.
    pub fn q_min(&self) -> f64 {
        self.q_min
    }

    /// Base-`alphabet` code of a block (canonical offset order).
    pub fn block_code(&self, block: &[u8]) -> usize {
        debug_assert_eq!(block.len(), self.gamma.len());
        let mut code = 0usize;
        for &sym in block.iter().rev() {
            code = code * self.alphabet + sym as usize;
        }
        code
    }

    /// Conditional probability by block code.
    pub fn prob(&self, block_code: usize, center: u8) -> f64 {
        self.probs[block_code * self.alphabet + center as usize]
    }

    /// One conditional row (all center symbols) by block code.
    pub fn row(&self, block_code: usize) -> &[f64] {
        &self.probs[block_code * self.alphabet..(block_code + 1) * self.alphabet]
    }

    /// Number of conditioning blocks.
    pub fn rows(&self) -> usize {
        self.probs.len() / self.alphabet
    }
}

impl ConditionalModel for Specification {
    fn gamma(&self) -> &Neighborhood {
        &self.gamma
    }

    fn alphabet_size(&self) -> usize {
        self.alphabet
    }

    fn conditional(&self, block: &[u8], center: u8) -> f64 {
        self.prob(self.block_code(block), center)
    }
}

/// Largest admissible schedule coefficient for a field with the given
/// minimum conditional probability:
/// `q_min / (2^(3 dim) e) * (m - 1) / (m^2 ln(m^2 + 1))`.
pub fn alpha_bound(q_min: f64, dim: usize, alphabet: usize) -> f64 {
    assert!(q_min > 0.0 && q_min <= 1.0, "q_min must lie in (0, 1]");
    assert!(dim >= 1 && alphabet >= 2);
    let m = alphabet as f64;
    let sites = 2f64.powi(3 * dim as i32) * std::f64::consts::E;
    q_min / sites * (m - 1.0) / (m * m * (m * m + 1.0).ln())
}

/// Exact joint distribution of a potential on a small box, by full
/// enumeration. Configurations are coded base-`alphabet` with the symbol at
/// flat site `f` (row-major, last axis fastest) carrying weight
/// `alphabet^f`.
#[derive(Clone, Debug)]
pub struct ExactJoint {
    dims: Vec<usize>,
    alphabet: usize,
    periodic: bool,
    probs: Vec<f64>,
    site_pow: Vec<usize>,
}

/// Enumerates every configuration of `p` on the box `dims` and normalizes
/// the exponential of the total energy.
///
/// With `periodic` boundary each axis must exceed twice the declared range,
/// so wraparound never identifies two interaction partners; with free
/// boundary, pair terms crossing the border are dropped.
pub fn exact_joint_tiny(
    p: &Potential,
    dims: &[usize],
    periodic: bool,
) -> Result<ExactJoint, ModelError> {
    if dims.len() != p.dim() {
        return Err(ModelError::DimensionMismatch {
            expected: p.dim(),
            got: dims.len(),
        });
    }
    let m = p.alphabet_size();
    let volume: usize = dims.iter().product();
    let configs = (m as u128)
        .checked_pow(volume as u32)
        .unwrap_or(u128::MAX);
    if configs > EXACT_JOINT_CAP as u128 {
        return Err(ModelError::TooManyConfigurations {
            needed: configs,
            cap: EXACT_JOINT_CAP,
        });
    }
    if periodic {
        for (axis, &len) in dims.iter().enumerate() {
            if (len as i64) <= 2 * p.range() {
                return Err(ModelError::AxisTooSmall {
                    axis,
                    extent: len as i64,
                    minimum: 2 * p.range(),
                    range: p.range(),
                });
            }
        }
    }
    let configs = configs as usize;
    let d = dims.len();
    // Row-major strides, last axis fastest.
    let mut strides = vec![1usize; d];
    for k in (0..d.saturating_sub(1)).rev() {
        strides[k] = strides[k + 1] * dims[k + 1];
    }
    // Directed bond list: (site, partner, coupling), one per pair term and
    // site, so each unordered pair is counted once.
    let mut bonds: Vec<(usize, usize, f64)> = Vec::new();
    let mut coords = vec![0i64; d];
    for flat in 0..volume {
        for (site, partner, coupling) in p.pairs().iter().filter_map(|(v, j)| {
            let mut tcoords = vec![0i64; d];
            for k in 0..d {
                let len = dims[k] as i64;
                let mut c = coords[k] + v.coords()[k];
                if periodic {
                    c = c.rem_euclid(len);
                } else if c < 0 || c >= len {
                    return None;
                }
                tcoords[k] = c;
            }
            let partner: usize = (0..d).map(|k| tcoords[k] as usize * strides[k]).sum();
            Some((flat, partner, *j))
        }) {
            bonds.push((site, partner, coupling));
        }
        for k in (0..d).rev() {
            coords[k] += 1;
            if coords[k] < dims[k] as i64 {
                break;
            }
            coords[k] = 0;
        }
    }
    let mut site_pow = vec![1usize; volume];
    for f in 1..volume {
        site_pow[f] = site_pow[f - 1] * m;
    }
    let mut energies = vec![0.0f64; configs];
    let mut symbols = vec![0u8; volume];
    for (code, slot) in energies.iter_mut().enumerate() {
        let mut rem = code;
        for sym in symbols.iter_mut() {
            *sym = (rem % m) as u8;
            rem /= m;
        }
        let mut energy: f64 = symbols.iter().map(|&s| p.field()[s as usize]).sum();
        for &(i, t, j) in &bonds {
            energy += j * p.interaction(symbols[i], symbols[t]);
        }
        *slot = energy;
    }
    let max = energies.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for slot in energies.iter_mut() {
        *slot = (*slot - max).exp();
        sum += *slot;
    }
    for slot in energies.iter_mut() {
        *slot /= sum;
    }
    Ok(ExactJoint {
        dims: dims.to_vec(),
        alphabet: m,
        periodic,
        probs: energies,
        site_pow,
    })
}

impl ExactJoint {
    /// Box dimensions.
    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    /// Alphabet size.
    pub fn alphabet(&self) -> usize {
        self.alphabet
    }

    /// Whether the boundary is periodic.
    pub fn periodic(&self) -> bool {
        self.periodic
    }

    /// Number of sites.
    pub fn volume(&self) -> usize {
        self.dims.iter().product()
    }

    /// Probability of every configuration, indexed by configuration code.
    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Probability of one configuration.
    pub fn prob(&self, config: usize) -> f64 {
        self.probs[config]
    }

    /// Flat index of a site from box coordinates.
    pub fn site_index(&self, coords: &[usize]) -> usize {
        debug_assert_eq!(coords.len(), self.dims.len());
        let d = self.dims.len();
        let mut stride = 1usize;
        let mut flat = 0usize;
        for k in (0..d).rev() {
            debug_assert!(coords[k] < self.dims[k]);
            flat += coords[k] * stride;
            stride *= self.dims[k];
        }
        flat
    }

    /// Symbol at a site within a configuration code.
    pub fn symbol_at(&self, config: usize, site: usize) -> u8 {
        (config / self.site_pow[site] % self.alphabet) as u8
    }

    /// Configuration code with one site's symbol replaced.
    pub fn with_symbol(&self, config: usize, site: usize, symbol: u8) -> usize {
        let old = (config / self.site_pow[site] % self.alphabet) as i64;
        (config as i64 + (symbol as i64 - old) * self.site_pow[site] as i64) as usize
    }

    /// Marginal probability of a partial assignment.
    pub fn marginal(&self, assignment: &[(usize, u8)]) -> f64 {
        let mut total = 0.0;
        'configs: for (code, p) in self.probs.iter().enumerate() {
            for &(site, sym) in assignment {
                if self.symbol_at(code, site) != sym {
                    continue 'configs;
                }
            }
            total += p;
        }
        total
    }

    /// Conditional probability `P(target | given)` for disjoint partial
    /// assignments.
    pub fn conditional(&self, target: &[(usize, u8)], given: &[(usize, u8)]) -> f64 {
        debug_assert!(target
            .iter()
            .all(|(s, _)| given.iter().all(|(t, _)| s != t)));
        let mut joint: Vec<(usize, u8)> = target.to_vec();
        joint.extend_from_slice(given);
        self.marginal(&joint) / self.marginal(given)
    }

    /// Conditional probability of the configuration's own symbol at `site`
    /// given the rest of the configuration.
    pub fn site_conditional(&self, config: usize, site: usize) -> f64 {
        let mut denom = 0.0;
        for a in 0..self.alphabet {
            denom += self.probs[self.with_symbol(config, site, a as u8)];
        }
        self.probs[config] / denom
    }
}
