//! Observed configurations over box regions and a seeded heat-bath sampler.
//!
//! The sampler runs single-site heat-bath updates in raster order on a torus
//! and returns the final configuration. Every draw comes from one seeded
//! stream, so a (potential, dims, sweeps, burn-in, seed) tuple reproduces the
//! sample bit for bit.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::lattice::{Region, Site};
use crate::model::{ModelError, Potential, Specification};

/// Errors from sample construction and the Gibbs sampler.
#[derive(Debug, Error, PartialEq)]
pub enum SamplerError {
    /// Dimensions of the potential and the requested box disagree.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch {
        /// Expected dimension.
        expected: usize,
        /// Offending dimension.
        got: usize,
    },
    /// Symbol buffer length did not match the region volume.
    #[error("expected {expected} symbols, got {got}")]
    SymbolCountMismatch {
        /// Region volume.
        expected: u64,
        /// Buffer length.
        got: usize,
    },
    /// A symbol was outside the alphabet.
    #[error("symbol {symbol} at index {index} is outside the {alphabet}-letter alphabet")]
    SymbolOutOfRange {
        /// Flat index of the offending symbol.
        index: usize,
        /// The symbol.
        symbol: u8,
        /// Alphabet size.
        alphabet: usize,
    },
    /// An axis was too short for the interaction range on a torus.
    #[error("axis {axis} has extent {extent}; torus sampling needs more than {minimum}")]
    AxisTooSmall {
        /// Axis index.
        axis: usize,
        /// Axis extent.
        extent: i64,
        /// Required strict lower bound (twice the interaction range).
        minimum: i64,
    },
    /// Zero retained sweeps requested.
    #[error("sweeps must be at least 1")]
    ZeroSweeps,
    /// Specification construction failed.
    #[error(transparent)]
    Model(#[from] ModelError),
    /// Underlying region construction failed.
    #[error(transparent)]
    Lattice(#[from] crate::lattice::LatticeError),
}

/// How a synthetic sample was produced.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Provenance {
    /// Model description, one whitespace-free token.
    pub model: String,
    /// Seed of the sampler stream.
    pub seed: u64,
    /// Retained sweeps after burn-in.
    pub sweeps: u32,
    /// Discarded initial sweeps.
    pub burn_in: u32,
}

/// A configuration of symbols observed on a box region, stored row-major
/// with the last axis fastest.
#[derive(Clone, Debug, PartialEq)]
pub struct Sample {
    region: Region,
    alphabet: usize,
    symbols: Vec<u8>,
    provenance: Option<Provenance>,
}

impl Sample {
    /// Validates symbol count and range.
    pub fn new(region: Region, alphabet: usize, symbols: Vec<u8>) -> Result<Self, SamplerError> {
        if symbols.len() as u64 != region.volume() {
            return Err(SamplerError::SymbolCountMismatch {
                expected: region.volume(),
                got: symbols.len(),
            });
        }
        if let Some(index) = symbols.iter().position(|&s| s as usize >= alphabet) {
            return Err(SamplerError::SymbolOutOfRange {
                index,
                symbol: symbols[index],
                alphabet,
            });
        }
        Ok(Sample {
            region,
            alphabet,
            symbols,
            provenance: None,
        })
    }

    /// Attaches provenance.
    pub fn with_provenance(mut self, provenance: Provenance) -> Self {
        self.provenance = Some(provenance);
        self
    }

    /// Observation region.
    pub fn region(&self) -> &Region {
        &self.region
    }

    /// Alphabet size.
    pub fn alphabet_size(&self) -> usize {
        self.alphabet
    }

    /// Symbols in row-major order (last axis fastest).
    pub fn symbols(&self) -> &[u8] {
        &self.symbols
    }

    /// Provenance, when the sample came from the sampler.
    pub fn provenance(&self) -> Option<&Provenance> {
        self.provenance.as_ref()
    }

    /// Number of sites.
    pub fn volume(&self) -> u64 {
        self.region.volume()
    }

    /// Row-major strides of the region (last axis stride 1).
    pub fn strides(&self) -> Vec<i64> {
        let d = self.region.dim();
        let mut strides = vec![1i64; d];
        for k in (0..d.saturating_sub(1)).rev() {
            strides[k] = strides[k + 1] * self.region.extent(k + 1);
        }
        strides
    }

    /// Flat index of an absolute site, or `None` outside the region.
    pub fn flat_index(&self, site: &Site) -> Option<usize> {
        if !self.region.contains(site) {
            return None;
        }
        let strides = self.strides();
        let mut flat = 0i64;
        for (k, &stride) in strides.iter().enumerate() {
            flat += (site.coords()[k] - self.region.lo().coords()[k]) * stride;
        }
        Some(flat as usize)
    }

    /// Symbol at an absolute site, or `None` outside the region.
    pub fn symbol_at(&self, site: &Site) -> Option<u8> {
        self.flat_index(site).map(|f| self.symbols[f])
    }
}

/// Default burn-in: ten times the retained sweeps.
pub fn default_burn_in(sweeps: u32) -> u32 {
    sweeps.saturating_mul(10)
}

/// Derives the seed of one replicate from a master seed by a splitmix-style
/// integer mix, so replicate streams are decided by the index alone.
pub fn replicate_seed(master: u64, index: u64) -> u64 {
    let mut z = master.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Draws one sample of the potential on a torus with the given axis lengths
/// by heat-bath Gibbs sampling: a seeded uniform start, `burn_in` discarded
/// sweeps, then `sweeps` retained sweeps; the final configuration is the
/// sample. Each axis must exceed twice the declared interaction range.
pub fn gibbs_sample(
    p: &Potential,
    dims: &[usize],
    sweeps: u32,
    burn_in: u32,
    seed: u64,
) -> Result<Sample, SamplerError> {
    gibbs_sample_observed(p, dims, sweeps, burn_in, seed, |_, _| {})
}

/// [`gibbs_sample`] with a hook that sees the configuration after every
/// retained sweep (indices `0..sweeps`, row-major symbols). The hook does
/// not touch the random stream, so the returned sample is identical to
/// [`gibbs_sample`] with the same arguments.
pub fn gibbs_sample_observed(
    p: &Potential,
    dims: &[usize],
    sweeps: u32,
    burn_in: u32,
    seed: u64,
    mut observe: impl FnMut(u32, &[u8]),
) -> Result<Sample, SamplerError> {
    if dims.len() != p.dim() {
        return Err(SamplerError::DimensionMismatch {
            expected: p.dim(),
            got: dims.len(),
        });
    }
    for (axis, &len) in dims.iter().enumerate() {
        if (len as i64) <= 2 * p.range() {
            return Err(SamplerError::AxisTooSmall {
                axis,
                extent: len as i64,
                minimum: 2 * p.range(),
            });
        }
    }
    if sweeps == 0 {
        return Err(SamplerError::ZeroSweeps);
    }
    let spec = Specification::from_potential(p)?;
    let gamma = spec.gamma().clone();
    let m = p.alphabet_size();
    let d = dims.len();
    let volume: usize = dims.iter().product();

    let mut strides = vec![1usize; d];
    for k in (0..d.saturating_sub(1)).rev() {
        strides[k] = strides[k + 1] * dims[k + 1];
    }
    // Wrapped neighbor indices, one row per site in raster order.
    let g = gamma.len();
    let mut neighbors = vec![0u32; volume * g];
    let mut coords = vec![0i64; d];
    for flat in 0..volume {
        for (j, v) in gamma.offsets().iter().enumerate() {
            let mut partner = 0usize;
            for k in 0..d {
                let len = dims[k] as i64;
                let c = (coords[k] + v.coords()[k]).rem_euclid(len);
                partner += c as usize * strides[k];
            }
            neighbors[flat * g + j] = partner as u32;
        }
        for k in (0..d).rev() {
            coords[k] += 1;
            if coords[k] < dims[k] as i64 {
                break;
            }
            coords[k] = 0;
        }
    }
    let mut code_pow = vec![1usize; g.max(1)];
    for j in 1..g {
        code_pow[j] = code_pow[j - 1] * m;
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut symbols: Vec<u8> = (0..volume).map(|_| rng.gen_range(0..m) as u8).collect();
    for sweep in 0..(burn_in as u64 + sweeps as u64) {
        for flat in 0..volume {
            let mut code = 0usize;
            for j in 0..g {
                code += symbols[neighbors[flat * g + j] as usize] as usize * code_pow[j];
            }
            let row = spec.row(code);
            let u: f64 = rng.gen();
            let mut acc = 0.0;
            let mut pick = m - 1;
            for (a, &prob) in row.iter().enumerate() {
                acc += prob;
                if u < acc {
                    pick = a;
                    break;
                }
            }
            symbols[flat] = pick as u8;
        }
        if sweep >= burn_in as u64 {
            observe((sweep - burn_in as u64) as u32, &symbols);
        }
    }

    let region = Region::from_dims(dims)?;
    Ok(Sample::new(region, m, symbols)?.with_provenance(Provenance {
        model: p.describe(),
        seed,
        sweeps,
        burn_in,
    }))
}
