//! Lattice geometry: sites of `Z^d`, box regions, symmetric neighborhoods,
//! the shrunken counting window, and the candidate-family combinatorics.
//!
//! Distances are always max-norm. A neighborhood is a finite set of nonzero
//! offsets closed under negation; the empty set is a legal neighborhood.

use std::fmt;

use thiserror::Error;

/// Errors from lattice construction and enumeration.
#[derive(Debug, Error, PartialEq)]
pub enum LatticeError {
    /// A region axis had non-positive extent.
    #[error("region axis {axis} has non-positive extent ({lo}..{hi})")]
    EmptyAxis {
        /// Axis index.
        axis: usize,
        /// Lower bound.
        lo: i64,
        /// Upper bound (exclusive).
        hi: i64,
    },
    /// Region volume does not fit in 64 bits.
    #[error("region volume overflows u64")]
    VolumeOverflow,
    /// Mismatched dimensions between two lattice objects.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch {
        /// Expected dimension.
        expected: usize,
        /// Offending dimension.
        got: usize,
    },
    /// A neighborhood offset was the origin.
    #[error("neighborhood offsets must be nonzero")]
    ZeroOffset,
    /// A neighborhood offset appeared twice.
    #[error("duplicate neighborhood offset {0}")]
    DuplicateOffset(String),
    /// An offset was present without its negation.
    #[error("offset set is not closed under negation (missing {0})")]
    MissingNegation(String),
    /// The schedule coefficient was outside (0, 1].
    #[error("alpha must lie in (0, 1], got {0}")]
    InvalidAlpha(f64),
    /// The candidate family would exceed the configured cap.
    #[error("candidate family has 2^{half_ball} members, above the cap {cap}")]
    CandidateCapExceeded {
        /// Size of the lexicographically positive half-ball.
        half_ball: u32,
        /// Configured cap on the family size.
        cap: u64,
    },
    /// The exact block count does not fit in 128 bits.
    #[error("block count overflows u128 (radius {radius}, dim {dim}, alphabet {alphabet})")]
    BlockCountOverflow {
        /// Ball radius.
        radius: i64,
        /// Lattice dimension.
        dim: usize,
        /// Alphabet size.
        alphabet: usize,
    },
}

/// A point of `Z^d`, also used for neighborhood offsets.
///
/// Ordering is lexicographic on coordinates, which fixes every canonical
/// ordering used in this crate.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Site(Vec<i64>);

impl Site {
    /// Wraps a coordinate vector.
    pub fn new(coords: Vec<i64>) -> Self {
        Site(coords)
    }

    /// Coordinate slice.
    pub fn coords(&self) -> &[i64] {
        &self.0
    }

    /// Number of coordinates.
    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// Max-norm.
    pub fn norm(&self) -> i64 {
        self.0.iter().map(|c| c.abs()).max().unwrap_or(0)
    }

    /// Coordinate-wise negation.
    pub fn negated(&self) -> Site {
        Site(self.0.iter().map(|c| -c).collect())
    }

    /// True when all coordinates are zero.
    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }

    /// True when the first nonzero coordinate is positive, so exactly one of
    /// `v`, `-v` is positive for every nonzero `v`.
    pub fn is_lex_positive(&self) -> bool {
        for &c in &self.0 {
            if c != 0 {
                return c > 0;
            }
        }
        false
    }
}

impl fmt::Display for Site {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (k, c) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// A half-open box `[lo_1, hi_1) x ... x [lo_d, hi_d)` in `Z^d`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Region {
    lo: Site,
    hi: Site,
}

impl Region {
    /// Builds a box, requiring positive extent on every axis.
    pub fn new(lo: Site, hi: Site) -> Result<Self, LatticeError> {
        if lo.dim() != hi.dim() {
            return Err(LatticeError::DimensionMismatch {
                expected: lo.dim(),
                got: hi.dim(),
            });
        }
        let mut volume: u64 = 1;
        for (axis, (&l, &h)) in lo.coords().iter().zip(hi.coords()).enumerate() {
            if h <= l {
                return Err(LatticeError::EmptyAxis { axis, lo: l, hi: h });
            }
            volume = volume
                .checked_mul((h - l) as u64)
                .ok_or(LatticeError::VolumeOverflow)?;
        }
        Ok(Region { lo, hi })
    }

    /// Box anchored at the origin with the given axis lengths.
    pub fn from_dims(dims: &[usize]) -> Result<Self, LatticeError> {
        let lo = Site::new(vec![0; dims.len()]);
        let hi = Site::new(dims.iter().map(|&l| l as i64).collect());
        Region::new(lo, hi)
    }

    /// Lower corner.
    pub fn lo(&self) -> &Site {
        &self.lo
    }

    /// Upper corner (exclusive).
    pub fn hi(&self) -> &Site {
        &self.hi
    }

    /// Number of axes.
    pub fn dim(&self) -> usize {
        self.lo.dim()
    }

    /// Extent of one axis.
    pub fn extent(&self, axis: usize) -> i64 {
        self.hi.coords()[axis] - self.lo.coords()[axis]
    }

    /// Number of sites.
    pub fn volume(&self) -> u64 {
        (0..self.dim()).map(|k| self.extent(k) as u64).product()
    }

    /// Membership test.
    pub fn contains(&self, site: &Site) -> bool {
        site.dim() == self.dim()
            && site
                .coords()
                .iter()
                .zip(self.lo.coords())
                .zip(self.hi.coords())
                .all(|((&c, &l), &h)| l <= c && c < h)
    }

    /// Box shrunk by `width` on every face, or `None` when an axis is
    /// exhausted.
    pub fn shrink(&self, width: i64) -> Option<Region> {
        let lo: Vec<i64> = self.lo.coords().iter().map(|&l| l + width).collect();
        let hi: Vec<i64> = self.hi.coords().iter().map(|&h| h - width).collect();
        if lo.iter().zip(&hi).any(|(&l, &h)| h <= l) {
            None
        } else {
            Some(Region {
                lo: Site::new(lo),
                hi: Site::new(hi),
            })
        }
    }

    /// All sites in row-major order (last axis fastest). Intended for small
    /// regions and tests; counting loops use flat indices instead.
    pub fn sites(&self) -> impl Iterator<Item = Site> + '_ {
        let d = self.dim();
        let volume = self.volume();
        let mut cursor: Vec<i64> = self.lo.coords().to_vec();
        let mut emitted = 0u64;
        std::iter::from_fn(move || {
            if emitted == volume {
                return None;
            }
            let out = Site::new(cursor.clone());
            emitted += 1;
            for k in (0..d).rev() {
                cursor[k] += 1;
                if cursor[k] < self.hi.coords()[k] {
                    break;
                }
                cursor[k] = self.lo.coords()[k];
            }
            Some(out)
        })
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for k in 0..self.dim() {
            if k > 0 {
                write!(f, "x")?;
            }
            write!(f, "[{},{})", self.lo.coords()[k], self.hi.coords()[k])?;
        }
        Ok(())
    }
}

/// Shrink width for the counting window of a region with the given volume:
/// `floor((ln volume)^(1/(2 dim)))`.
pub fn window_width(volume: u64, dim: usize) -> i64 {
    assert!(volume >= 1, "window width needs a positive volume");
    assert!(dim >= 1, "window width needs a positive dimension");
    (volume as f64).ln().powf(1.0 / (2.0 * dim as f64)).floor() as i64
}

/// Counting window of a region: the sites whose max-norm ball of radius
/// [`window_width`] lies inside the region. `None` marks an exhausted window.
pub fn window(region: &Region) -> Option<Region> {
    region.shrink(window_width(region.volume(), region.dim()))
}

/// Radius schedule `floor(alpha^(1/(2 dim)) * ceil(ln volume)^(1/(2 dim)))`,
/// evaluated at the window volume.
pub fn radius_schedule(window_volume: u64, alpha: f64, dim: usize) -> Result<i64, LatticeError> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(LatticeError::InvalidAlpha(alpha));
    }
    assert!(window_volume >= 1, "radius schedule needs a positive volume");
    let exponent = 1.0 / (2.0 * dim as f64);
    let r = alpha.powf(exponent) * (window_volume as f64).ln().ceil().powf(exponent);
    Ok(r.floor() as i64)
}

/// A finite set of nonzero offsets closed under negation, stored sorted in
/// lexicographic order.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Neighborhood {
    dim: usize,
    offsets: Vec<Site>,
    radius: i64,
}

impl Neighborhood {
    /// The empty neighborhood in `Z^dim`.
    pub fn empty(dim: usize) -> Self {
        Neighborhood {
            dim,
            offsets: Vec::new(),
            radius: 0,
        }
    }

    /// Validates and sorts an offset set; offsets must be nonzero, distinct,
    /// and closed under negation.
    pub fn new(dim: usize, mut offsets: Vec<Site>) -> Result<Self, LatticeError> {
        for v in &offsets {
            if v.dim() != dim {
                return Err(LatticeError::DimensionMismatch {
                    expected: dim,
                    got: v.dim(),
                });
            }
            if v.is_zero() {
                return Err(LatticeError::ZeroOffset);
            }
        }
        offsets.sort_unstable();
        for pair in offsets.windows(2) {
            if pair[0] == pair[1] {
                return Err(LatticeError::DuplicateOffset(pair[0].to_string()));
            }
        }
        for v in &offsets {
            if offsets.binary_search(&v.negated()).is_err() {
                return Err(LatticeError::MissingNegation(v.negated().to_string()));
            }
        }
        let radius = offsets.iter().map(Site::norm).max().unwrap_or(0);
        Ok(Neighborhood {
            dim,
            offsets,
            radius,
        })
    }

    /// Closes an offset set under negation and validates it. The flag reports
    /// whether the input was already symmetric.
    pub fn symmetrized(dim: usize, offsets: Vec<Site>) -> Result<(Self, bool), LatticeError> {
        let mut closed = offsets.clone();
        for v in &offsets {
            let neg = v.negated();
            if !closed.contains(&neg) {
                closed.push(neg);
            }
        }
        let was_symmetric = closed.len() == offsets.len();
        Ok((Neighborhood::new(dim, closed)?, was_symmetric))
    }

    /// Builds `S` together with its negations from lexicographically positive
    /// offsets. No validation; callers guarantee distinct positive offsets.
    fn from_half(dim: usize, half: &[&Site]) -> Self {
        let mut offsets: Vec<Site> = Vec::with_capacity(half.len() * 2);
        for v in half {
            offsets.push((*v).clone());
            offsets.push(v.negated());
        }
        offsets.sort_unstable();
        let radius = offsets.iter().map(Site::norm).max().unwrap_or(0);
        Neighborhood {
            dim,
            offsets,
            radius,
        }
    }

    /// Number of offsets.
    pub fn len(&self) -> usize {
        self.offsets.len()
    }

    /// True for the empty neighborhood.
    pub fn is_empty(&self) -> bool {
        self.offsets.is_empty()
    }

    /// Ambient dimension.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Max-norm radius; zero for the empty neighborhood.
    pub fn radius(&self) -> i64 {
        self.radius
    }

    /// Offsets in canonical (lexicographic) order.
    pub fn offsets(&self) -> &[Site] {
        &self.offsets
    }

    /// Membership test.
    pub fn contains(&self, offset: &Site) -> bool {
        self.offsets.binary_search(offset).is_ok()
    }

    /// True when every offset of `self` belongs to `other`.
    pub fn is_subset_of(&self, other: &Neighborhood) -> bool {
        self.offsets.iter().all(|v| other.contains(v))
    }

    /// Largest absolute coordinate per axis; bounds how far a translate
    /// reaches along each axis.
    pub fn axis_reach(&self) -> Vec<i64> {
        let mut reach = vec![0i64; self.dim];
        for v in &self.offsets {
            for (k, &c) in v.coords().iter().enumerate() {
                reach[k] = reach[k].max(c.abs());
            }
        }
        reach
    }

    /// Canonical comparison: cardinality first, then lexicographic on the
    /// sorted offset list.
    pub fn canonical_cmp(&self, other: &Neighborhood) -> std::cmp::Ordering {
        self.len()
            .cmp(&other.len())
            .then_with(|| self.offsets.cmp(&other.offsets))
    }
}

impl fmt::Display for Neighborhood {
    /// Canonical string: offsets joined by `;`, or `-` for the empty set.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.offsets.is_empty() {
            return write!(f, "-");
        }
        for (j, v) in self.offsets.iter().enumerate() {
            if j > 0 {
                write!(f, ";")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Default cap on the enumerated candidate-family size.
pub const DEFAULT_CANDIDATE_CAP: u64 = 1 << 20;

/// Lexicographically positive offsets of max-norm at most `radius`, sorted.
pub fn half_ball(radius: i64, dim: usize) -> Vec<Site> {
    assert!(radius >= 0, "half ball needs a nonnegative radius");
    let mut half = Vec::new();
    let width = 2 * radius + 1;
    let count = (width as u64).pow(dim as u32);
    let mut cursor = vec![-radius; dim];
    for _ in 0..count {
        let site = Site::new(cursor.clone());
        if site.is_lex_positive() {
            half.push(site);
        }
        for k in (0..dim).rev() {
            cursor[k] += 1;
            if cursor[k] <= radius {
                break;
            }
            cursor[k] = -radius;
        }
    }
    half.sort_unstable();
    half
}

/// All nonzero offsets of max-norm at most `radius`, as a neighborhood.
pub fn ball(radius: i64, dim: usize) -> Neighborhood {
    let half = half_ball(radius, dim);
    let refs: Vec<&Site> = half.iter().collect();
    Neighborhood::from_half(dim, &refs)
}

/// Every neighborhood of radius at most `radius` in `Z^dim`, in canonical
/// order (cardinality, then lexicographic). There are `2^h` of them, where
/// `h` is the half-ball size; the call fails above `cap`.
pub fn enumerate_neighborhoods_capped(
    radius: i64,
    dim: usize,
    cap: u64,
) -> Result<Vec<Neighborhood>, LatticeError> {
    let half = half_ball(radius, dim);
    let h = half.len() as u32;
    if h >= 63 || (1u64 << h) > cap {
        return Err(LatticeError::CandidateCapExceeded { half_ball: h, cap });
    }
    let mut family: Vec<Neighborhood> = Vec::with_capacity(1 << h);
    for mask in 0u64..(1u64 << h) {
        let chosen: Vec<&Site> = half
            .iter()
            .enumerate()
            .filter(|(j, _)| mask >> j & 1 == 1)
            .map(|(_, v)| v)
            .collect();
        family.push(Neighborhood::from_half(dim, &chosen));
    }
    family.sort_unstable_by(|a, b| a.canonical_cmp(b));
    Ok(family)
}

/// [`enumerate_neighborhoods_capped`] with the default cap.
pub fn enumerate_neighborhoods(radius: i64, dim: usize) -> Result<Vec<Neighborhood>, LatticeError> {
    enumerate_neighborhoods_capped(radius, dim, DEFAULT_CANDIDATE_CAP)
}

/// Exact number of distinct center-plus-conditioning blocks over all
/// neighborhoods of radius at most `radius`:
/// `alphabet * (alphabet^2 + 1)^h` for the half-ball size `h`.
pub fn block_count_exact(radius: i64, dim: usize, alphabet: usize) -> Result<u128, LatticeError> {
    let h = half_ball(radius, dim).len() as u32;
    let m = alphabet as u128;
    let overflow = || LatticeError::BlockCountOverflow {
        radius,
        dim,
        alphabet,
    };
    let base = m.checked_mul(m).and_then(|s| s.checked_add(1)).ok_or_else(overflow)?;
    base.checked_pow(h)
        .and_then(|p| p.checked_mul(m))
        .ok_or_else(overflow)
}

/// Closed-form upper bound `(alphabet^2 + 1)^((2 radius + 1)^dim / 2)` for
/// [`block_count_exact`].
pub fn block_count_bound(radius: i64, dim: usize, alphabet: usize) -> f64 {
    let m = alphabet as f64;
    let cells = (2 * radius + 1).pow(dim as u32) as f64;
    (m * m + 1.0).powf(cells / 2.0)
}
