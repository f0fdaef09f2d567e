//! Window-restricted block counting, projection onto sub-neighborhoods, and
//! sieve partitions.
//!
//! A block is the symbol tuple a sample shows at `i + v` for the offsets `v`
//! of a neighborhood, together with the center symbol at `i`. Counts run
//! over the sites of the shrunken window whose full neighborhood translate
//! stays inside the sample region. Tables are keyed by packed base-`m`
//! codes; hashing is deterministic so iteration order, and hence every
//! floating-point reduction downstream, is reproducible run to run.

use std::collections::{BTreeMap, HashMap};
use std::hash::{BuildHasherDefault, Hasher};

use thiserror::Error;

use crate::lattice::{window_width, Neighborhood, Site};
use crate::sampler::Sample;

/// Errors from table projection.
#[derive(Debug, Error, PartialEq)]
pub enum CountsError {
    /// The target neighborhood had an offset outside the source table's.
    #[error("offset {offset} is not contained in the source neighborhood")]
    OffsetNotContained {
        /// Offending offset.
        offset: String,
    },
    /// The source neighborhood reached beyond the window, so contributing
    /// sites of source and target may differ and marginalizing is unsound.
    #[error("source radius {radius} exceeds the window width {window_width}")]
    SourceExceedsWindow {
        /// Source neighborhood radius.
        radius: i64,
        /// Window shrink width of the counted sample.
        window_width: i64,
    },
}

/// Deterministic multiply-rotate hasher; fixed constants make table
/// iteration order a pure function of insertion order.
#[derive(Clone, Default)]
pub struct FixedHasher {
    hash: u64,
}

const FIXED_HASH_SEED: u64 = 0x517c_c1b7_2722_0a95;

impl FixedHasher {
    #[inline]
    fn add(&mut self, word: u64) {
        self.hash = (self.hash.rotate_left(5) ^ word).wrapping_mul(FIXED_HASH_SEED);
    }
}

impl Hasher for FixedHasher {
    #[inline]
    fn finish(&self) -> u64 {
        self.hash
    }

    #[inline]
    fn write(&mut self, bytes: &[u8]) {
        for chunk in bytes.chunks(8) {
            let mut word = [0u8; 8];
            word[..chunk.len()].copy_from_slice(chunk);
            self.add(u64::from_le_bytes(word));
        }
    }

    #[inline]
    fn write_u8(&mut self, n: u8) {
        self.add(n as u64);
    }

    #[inline]
    fn write_u32(&mut self, n: u32) {
        self.add(n as u64);
    }

    #[inline]
    fn write_u64(&mut self, n: u64) {
        self.add(n);
    }

    #[inline]
    fn write_u128(&mut self, n: u128) {
        self.add(n as u64);
        self.add((n >> 64) as u64);
    }

    #[inline]
    fn write_usize(&mut self, n: usize) {
        self.add(n as u64);
    }
}

/// Hash state for deterministic tables.
pub type FixedState = BuildHasherDefault<FixedHasher>;

/// Key of one block: the symbol tuple packed base-`m` when it fits in 128
/// bits, or the raw symbol bytes otherwise. The symbol at canonical offset
/// position `j` carries weight `m^j`; the center symbol comes last.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum BlockKey {
    /// Packed base-`m` code.
    Packed(u128),
    /// Raw symbol bytes for tuples too wide to pack.
    Wide(Box<[u8]>),
}

/// Encoder and decoder between symbol tuples of a fixed length and
/// [`BlockKey`]s.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockCodec {
    alphabet: usize,
    len: usize,
    /// `alphabet^j` for each position, present when packing fits.
    powers: Option<Vec<u128>>,
    /// Bits per digit when the alphabet size is a power of two.
    bits: Option<u32>,
}

impl BlockCodec {
    /// Codec for tuples of `len` symbols from an `alphabet`-letter alphabet.
    pub fn new(alphabet: usize, len: usize) -> Self {
        let mut powers = Vec::with_capacity(len);
        let mut acc: u128 = 1;
        let mut fits = true;
        for _ in 0..len {
            powers.push(acc);
            match acc.checked_mul(alphabet as u128) {
                Some(next) => acc = next,
                None => {
                    fits = false;
                    break;
                }
            }
        }
        let bits = if fits && alphabet.is_power_of_two() {
            Some(alphabet.trailing_zeros())
        } else {
            None
        };
        BlockCodec {
            alphabet,
            len,
            powers: fits.then_some(powers),
            bits,
        }
    }

    /// Tuple length.
    pub fn len(&self) -> usize {
        self.len
    }

    /// True for the zero-length tuple codec.
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Alphabet size.
    pub fn alphabet(&self) -> usize {
        self.alphabet
    }

    /// Whether tuples pack into a 128-bit code.
    pub fn is_packed(&self) -> bool {
        self.powers.is_some()
    }

    /// Number of distinct codes, when packed.
    pub fn code_count(&self) -> Option<u128> {
        let powers = self.powers.as_ref()?;
        let top = *powers.last().unwrap_or(&1);
        top.checked_mul(self.alphabet as u128)
    }

    /// Encodes a tuple.
    pub fn encode(&self, symbols: &[u8]) -> BlockKey {
        debug_assert_eq!(symbols.len(), self.len);
        match &self.powers {
            Some(powers) => {
                let mut code: u128 = 0;
                for (j, &s) in symbols.iter().enumerate() {
                    code += s as u128 * powers[j];
                }
                BlockKey::Packed(code)
            }
            None => BlockKey::Wide(symbols.into()),
        }
    }

    /// Decodes a key into a tuple buffer of length [`Self::len`].
    pub fn decode_into(&self, key: &BlockKey, out: &mut [u8]) {
        debug_assert_eq!(out.len(), self.len);
        match key {
            BlockKey::Packed(code) => {
                let mut rem = *code;
                let m = self.alphabet as u128;
                for slot in out.iter_mut() {
                    *slot = (rem % m) as u8;
                    rem /= m;
                }
            }
            BlockKey::Wide(bytes) => out.copy_from_slice(bytes),
        }
    }

    /// Decodes a key into a fresh tuple.
    pub fn decode(&self, key: &BlockKey) -> Vec<u8> {
        let mut out = vec![0u8; self.len];
        self.decode_into(key, &mut out);
        out
    }

    /// Splits a key into the leading `len - 1` positions and the final one.
    pub fn split_last(&self, key: &BlockKey) -> (BlockKey, u8) {
        assert!(self.len > 0, "cannot split an empty tuple");
        match (key, &self.powers) {
            (BlockKey::Packed(code), Some(powers)) => {
                let top = powers[self.len - 1];
                // 64-bit division when the code fits; 128-bit division is
                // an order of magnitude slower and this sits in hot loops.
                if top <= u64::MAX as u128 && *code <= u64::MAX as u128 {
                    let code = *code as u64;
                    let top = top as u64;
                    (BlockKey::Packed((code % top) as u128), (code / top) as u8)
                } else {
                    (BlockKey::Packed(code % top), (code / top) as u8)
                }
            }
            (BlockKey::Wide(bytes), _) => (
                BlockKey::Wide(bytes[..self.len - 1].into()),
                bytes[self.len - 1],
            ),
            (BlockKey::Packed(_), None) => unreachable!("packed key from a wide codec"),
        }
    }
}

/// Counts of every observed block of a neighborhood over one sample.
#[derive(Clone, Debug)]
pub struct CountTable {
    gamma: Neighborhood,
    alphabet: usize,
    codec: BlockCodec,
    counts: HashMap<BlockKey, u64, FixedState>,
    total: u64,
    window_width: i64,
    window_volume: u64,
}

impl CountTable {
    /// Conditioning neighborhood.
    pub fn gamma(&self) -> &Neighborhood {
        &self.gamma
    }

    /// Alphabet size.
    pub fn alphabet(&self) -> usize {
        self.alphabet
    }

    /// Codec for the stored keys (neighborhood symbols, then the center).
    pub fn codec(&self) -> &BlockCodec {
        &self.codec
    }

    /// Sum of all counts: the number of contributing sites.
    pub fn total(&self) -> u64 {
        self.total
    }

    /// Window shrink width of the counted sample.
    pub fn window_width(&self) -> i64 {
        self.window_width
    }

    /// Window volume of the counted sample (zero when exhausted).
    pub fn window_volume(&self) -> u64 {
        self.window_volume
    }

    /// Number of distinct observed blocks.
    pub fn len(&self) -> usize {
        self.counts.len()
    }

    /// True when nothing was counted.
    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    /// Count of one block.
    pub fn get(&self, key: &BlockKey) -> u64 {
        self.counts.get(key).copied().unwrap_or(0)
    }

    /// Iterates observed blocks in deterministic (insertion-derived) order.
    pub fn iter(&self) -> impl Iterator<Item = (&BlockKey, u64)> {
        self.counts.iter().map(|(k, &v)| (k, v))
    }

    /// Counts of the conditioning blocks alone (center marginalized out).
    pub fn center_marginals(&self) -> HashMap<BlockKey, u64, FixedState> {
        let mut marginals: HashMap<BlockKey, u64, FixedState> =
            HashMap::with_capacity_and_hasher(self.counts.len(), FixedState::default());
        for (key, count) in self.iter() {
            let (block, _) = self.codec.split_last(key);
            *marginals.entry(block).or_insert(0) += count;
        }
        marginals
    }

    /// Keys sorted ascending; handy for deterministic reports.
    pub fn sorted_keys(&self) -> Vec<BlockKey> {
        let mut keys: Vec<BlockKey> = self.counts.keys().cloned().collect();
        keys.sort_unstable();
        keys
    }
}

/// Geometry shared by all scans of one (sample, neighborhood) pair.
struct ScanPlan {
    /// Flat deltas of the neighborhood offsets, canonical order.
    deltas: Vec<i64>,
    /// Contributing box, as half-open coordinate ranges per axis.
    box_lo: Vec<i64>,
    box_hi: Vec<i64>,
    window_width: i64,
    window_volume: u64,
    /// True when the contributing box is empty.
    empty: bool,
}

fn scan_plan(sample: &Sample, gamma: &Neighborhood) -> ScanPlan {
    let w = window_width(sample.region().volume(), sample.region().dim());
    scan_plan_within(sample, gamma, w)
}

fn scan_plan_within(sample: &Sample, gamma: &Neighborhood, width: i64) -> ScanPlan {
    let region = sample.region();
    let d = region.dim();
    assert_eq!(gamma.dim(), d, "neighborhood dimension mismatch");
    assert!(width >= 0, "scan width must be nonnegative");
    let strides = sample.strides();
    let deltas: Vec<i64> = gamma
        .offsets()
        .iter()
        .map(|v| v.coords().iter().zip(&strides).map(|(&c, &s)| c * s).sum())
        .collect();
    match region.shrink(width) {
        Some(win) => {
            let reach = gamma.axis_reach();
            let mut box_lo = Vec::with_capacity(d);
            let mut box_hi = Vec::with_capacity(d);
            let mut empty = false;
            for (k, &r) in reach.iter().enumerate() {
                let lo = win.lo().coords()[k].max(region.lo().coords()[k] + r);
                let hi = win.hi().coords()[k].min(region.hi().coords()[k] - r);
                if hi <= lo {
                    empty = true;
                }
                box_lo.push(lo);
                box_hi.push(hi);
            }
            ScanPlan {
                deltas,
                box_lo,
                box_hi,
                window_width: width,
                window_volume: win.volume(),
                empty,
            }
        }
        None => ScanPlan {
            deltas,
            box_lo: vec![0; d],
            box_hi: vec![0; d],
            window_width: width,
            window_volume: 0,
            empty: true,
        },
    }
}

/// Walks the contributing sites in row-major order and hands each block's
/// packed code to `sink`. Requires a packed codec.
fn scan_packed(sample: &Sample, plan: &ScanPlan, codec: &BlockCodec, mut sink: impl FnMut(u128)) {
    debug_assert!(codec.is_packed());
    if plan.empty {
        return;
    }
    let region = sample.region();
    let d = region.dim();
    let strides = sample.strides();
    let symbols = sample.symbols();
    let powers = codec.powers.as_ref().expect("packed codec");
    let g = plan.deltas.len();

    let inner_lo = plan.box_lo[d - 1];
    let inner_hi = plan.box_hi[d - 1];
    let mut prefix: Vec<i64> = plan.box_lo[..d - 1].to_vec();
    loop {
        // Flat index of (prefix..., inner_lo) relative to the region corner.
        let mut base: i64 = (inner_lo - region.lo().coords()[d - 1]) * strides[d - 1];
        for k in 0..d - 1 {
            base += (prefix[k] - region.lo().coords()[k]) * strides[k];
        }
        for step in 0..(inner_hi - inner_lo) {
            let flat = (base + step * strides[d - 1]) as usize;
            let mut code: u128 = 0;
            for j in 0..g {
                let sym = symbols[(flat as i64 + plan.deltas[j]) as usize];
                code += sym as u128 * powers[j];
            }
            code += symbols[flat] as u128 * powers[g];
            sink(code);
        }
        // Odometer over the prefix axes.
        let mut k = d - 1;
        loop {
            if k == 0 {
                return;
            }
            k -= 1;
            prefix[k] += 1;
            if prefix[k] < plan.box_hi[k] {
                break;
            }
            prefix[k] = plan.box_lo[k];
        }
    }
}

/// Walks the contributing sites for tuples too wide to pack.
fn scan_wide(sample: &Sample, plan: &ScanPlan, codec: &BlockCodec, mut sink: impl FnMut(&[u8])) {
    if plan.empty {
        return;
    }
    let region = sample.region();
    let d = region.dim();
    let strides = sample.strides();
    let symbols = sample.symbols();
    let g = plan.deltas.len();
    let mut buf = vec![0u8; codec.len()];

    let inner_lo = plan.box_lo[d - 1];
    let inner_hi = plan.box_hi[d - 1];
    let mut prefix: Vec<i64> = plan.box_lo[..d - 1].to_vec();
    loop {
        let mut base: i64 = (inner_lo - region.lo().coords()[d - 1]) * strides[d - 1];
        for k in 0..d - 1 {
            base += (prefix[k] - region.lo().coords()[k]) * strides[k];
        }
        for step in 0..(inner_hi - inner_lo) {
            let flat = (base + step * strides[d - 1]) as usize;
            for j in 0..g {
                buf[j] = symbols[(flat as i64 + plan.deltas[j]) as usize];
            }
            buf[g] = symbols[flat];
            sink(&buf);
        }
        let mut k = d - 1;
        loop {
            if k == 0 {
                return;
            }
            k -= 1;
            prefix[k] += 1;
            if prefix[k] < plan.box_hi[k] {
                break;
            }
            prefix[k] = plan.box_lo[k];
        }
    }
}

/// Counts every block of `gamma` over the window of the sample.
///
/// A site contributes exactly when it lies in the window and its full
/// neighborhood translate stays inside the sample region; when the
/// neighborhood radius is at most the window width the second condition is
/// automatic and the counts sum to the window volume.
pub fn count_blocks(sample: &Sample, gamma: &Neighborhood) -> CountTable {
    let w = window_width(sample.region().volume(), sample.region().dim());
    count_blocks_within(sample, gamma, w)
}

/// Counts every block of `gamma` over the sample region shrunk by `width`
/// per axis instead of the default window width.
///
/// Candidates of different radii stay comparable when scored against one
/// another only if they share one contributing site set; passing the
/// largest radius in play as `width` guarantees that whenever every
/// neighborhood reaches at most `width`. Panics if `width` is negative.
pub fn count_blocks_within(sample: &Sample, gamma: &Neighborhood, width: i64) -> CountTable {
    let plan = scan_plan_within(sample, gamma, width);
    let codec = BlockCodec::new(sample.alphabet_size(), gamma.len() + 1);
    let mut counts: HashMap<BlockKey, u64, FixedState> = HashMap::default();
    let mut total = 0u64;
    if codec.is_packed() {
        scan_packed(sample, &plan, &codec, |code| {
            *counts.entry(BlockKey::Packed(code)).or_insert(0) += 1;
            total += 1;
        });
    } else {
        scan_wide(sample, &plan, &codec, |tuple| {
            *counts.entry(BlockKey::Wide(tuple.into())).or_insert(0) += 1;
            total += 1;
        });
    }
    CountTable {
        gamma: gamma.clone(),
        alphabet: sample.alphabet_size(),
        codec,
        counts,
        total,
        window_width: plan.window_width,
        window_volume: plan.window_volume,
    }
}

/// Marginalizes a full table onto a sub-neighborhood by summing counts over
/// the dropped coordinates.
///
/// Sound only when the source neighborhood fits inside the window (then the
/// contributing sites of source and target coincide), and the target's
/// offsets are a subset of the source's; the result equals
/// [`count_blocks`] for the target neighborhood.
pub fn project(full: &CountTable, gamma: &Neighborhood) -> Result<CountTable, CountsError> {
    if full.gamma.radius() > full.window_width {
        return Err(CountsError::SourceExceedsWindow {
            radius: full.gamma.radius(),
            window_width: full.window_width,
        });
    }
    // Source position of every target position, center last.
    let mut positions = Vec::with_capacity(gamma.len() + 1);
    for v in gamma.offsets() {
        match full.gamma.offsets().binary_search(v) {
            Ok(pos) => positions.push(pos),
            Err(_) => {
                return Err(CountsError::OffsetNotContained {
                    offset: v.to_string(),
                })
            }
        }
    }
    positions.push(full.codec.len() - 1);

    let codec = BlockCodec::new(full.alphabet, gamma.len() + 1);
    let mut counts: HashMap<BlockKey, u64, FixedState> =
        HashMap::with_capacity_and_hasher(full.counts.len().min(1 << 16), FixedState::default());
    let mut src = vec![0u8; full.codec.len()];
    let mut dst = vec![0u8; codec.len()];
    for (key, count) in full.iter() {
        full.codec.decode_into(key, &mut src);
        for (slot, &pos) in dst.iter_mut().zip(&positions) {
            *slot = src[pos];
        }
        *counts.entry(codec.encode(&dst)).or_insert(0) += count;
    }
    Ok(CountTable {
        gamma: gamma.clone(),
        alphabet: full.alphabet,
        codec,
        counts,
        total: full.total,
        window_width: full.window_width,
        window_volume: full.window_volume,
    })
}

/// Block counts split by sieve class: window sites with congruent
/// coordinates modulo `4 r + 1`, labeled by the centered residue vector.
#[derive(Debug)]
pub struct SieveCounts {
    /// Sieve radius parameter.
    pub r: i64,
    /// Congruence period `4 r + 1`.
    pub period: i64,
    /// Per-class tables, keyed by the class representative of max-norm at
    /// most `2 r`.
    pub classes: BTreeMap<Site, CountTable>,
}

impl SieveCounts {
    /// Sum of all class totals.
    pub fn total(&self) -> u64 {
        self.classes.values().map(CountTable::total).sum()
    }
}

/// Counts blocks separately on every sieve class of the window.
///
/// Classes partition the contributing sites, so per-block counts summed
/// over classes reproduce [`count_blocks`] exactly.
pub fn count_sieves(sample: &Sample, gamma: &Neighborhood, r: i64) -> SieveCounts {
    assert!(r >= 0, "sieve radius must be nonnegative");
    let period = 4 * r + 1;
    let plan = scan_plan(sample, gamma);
    let codec = BlockCodec::new(sample.alphabet_size(), gamma.len() + 1);
    let d = sample.region().dim();

    // Re-derive each contributing site's coordinates alongside the scan by
    // walking the same box in the same order.
    type ClassTally = (HashMap<BlockKey, u64, FixedState>, u64);
    let mut tallies: BTreeMap<Vec<i64>, ClassTally> = BTreeMap::new();
    if !plan.empty {
        let mut coords: Vec<i64> = plan.box_lo.clone();
        let mut class = vec![0i64; d];
        let volume: u64 = (0..d)
            .map(|k| (plan.box_hi[k] - plan.box_lo[k]) as u64)
            .product();
        let strides = sample.strides();
        let region_lo = sample.region().lo().coords().to_vec();
        let symbols = sample.symbols();
        let powers_or_wide = codec.is_packed();
        let mut buf = vec![0u8; codec.len()];
        for _ in 0..volume {
            for k in 0..d {
                let residue = coords[k].rem_euclid(period);
                class[k] = if residue > 2 * r { residue - period } else { residue };
            }
            let mut flat: i64 = 0;
            for k in 0..d {
                flat += (coords[k] - region_lo[k]) * strides[k];
            }
            for (j, delta) in plan.deltas.iter().enumerate() {
                buf[j] = symbols[(flat + delta) as usize];
            }
            buf[plan.deltas.len()] = symbols[flat as usize];
            let key = if powers_or_wide {
                codec.encode(&buf)
            } else {
                BlockKey::Wide(buf.as_slice().into())
            };
            let entry = tallies
                .entry(class.clone())
                .or_insert_with(|| (HashMap::default(), 0));
            *entry.0.entry(key).or_insert(0) += 1;
            entry.1 += 1;
            for k in (0..d).rev() {
                coords[k] += 1;
                if coords[k] < plan.box_hi[k] {
                    break;
                }
                coords[k] = plan.box_lo[k];
            }
        }
    }

    let classes = tallies
        .into_iter()
        .map(|(class, (counts, total))| {
            (
                Site::new(class),
                CountTable {
                    gamma: gamma.clone(),
                    alphabet: sample.alphabet_size(),
                    codec: codec.clone(),
                    counts,
                    total,
                    window_width: plan.window_width,
                    window_volume: plan.window_volume,
                },
            )
        })
        .collect();
    SieveCounts {
        r,
        period,
        classes,
    }
}
