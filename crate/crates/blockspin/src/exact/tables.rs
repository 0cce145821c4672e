//! Exact finite-size Gibbs laws of the block magnetizations, as dense tables
//! of log-weights over the integer plus-count grid.
//!
//! Construction notes that apply to all three builders:
//!
//! * Each grid point is computed independently (parallelized with rayon);
//!   the final normalization is a sequential log-sum-exp in index order, so
//!   results are identical for any thread count.
//! * Only the canonical half of the grid is computed; the other half is
//!   copied from it. The global spin flip maps index `i` to `len - 1 - i`
//!   (digit-wise complement), so flip symmetry holds bit-for-bit by
//!   construction.
//! * Per-point formulas use exact integer spin sums and permutation-sorted
//!   multinomials, which also makes block-exchange symmetry bit-exact for
//!   the two-block and three-block models.

use std::fs;
use std::io::Write as _;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::numerics::{LogFactorials, LogSumExp};
use crate::exact::paircount::{cross_term_int, feasible_pair_range};
use crate::model::{
    counts_from, Counts, DilutedSpec, MagnetizationPoint, ModelSpec, ThreeBlockSpec, TwoBlockSpec,
};
use crate::util::sig12;

/// Hard limits on exact-table work. Exceeding a limit is an error, never a
/// silent truncation; raise the budget explicitly to go bigger.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Budget {
    /// Largest total spin count for which the two-block table is built.
    pub max_two_block_n: usize,
    /// Cap on `(n_outer + 1)^2 (b + 1)` grid cells for three-block tables.
    /// Each cell costs 8 bytes of table memory.
    pub max_three_block_cells: u64,
    /// Cap on the estimated five-index term count for diluted tables
    /// (grid cells times the retained-pair triple sum).
    pub max_diluted_terms: u64,
}

impl Default for Budget {
    fn default() -> Self {
        Self {
            max_two_block_n: 2000,
            max_three_block_cells: 1_000_000_000,
            max_diluted_terms: 1_000_000_000,
        }
    }
}

/// Dense log-weight table over the plus-count grid of a block layout.
///
/// Weights are unnormalized Gibbs weights of whole magnetization fibers;
/// `log_partition` is their log-sum. Probabilities are only ever formed as
/// `exp(log_weight - log_partition)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LogWeightTable {
    block_sizes: Counts,
    log_weights: Vec<f64>,
    log_partition: f64,
}

impl LogWeightTable {
    fn from_parts(block_sizes: Counts, log_weights: Vec<f64>) -> Self {
        // Normalization is a fixed-order sequential reduction (determinism).
        let mut z = LogSumExp::new();
        for &w in &log_weights {
            z.add(w);
        }
        Self {
            block_sizes,
            log_weights,
            log_partition: z.total(),
        }
    }

    pub fn block_sizes(&self) -> &[usize] {
        &self.block_sizes
    }

    pub fn num_blocks(&self) -> usize {
        self.block_sizes.len()
    }

    pub fn len(&self) -> usize {
        self.log_weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.log_weights.is_empty()
    }

    pub fn log_partition(&self) -> f64 {
        self.log_partition
    }

    /// Flat index of a plus-count vector (row-major over blocks).
    pub fn index_of(&self, counts: &[usize]) -> Result<usize> {
        if counts.len() != self.block_sizes.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} counts for {} blocks",
                counts.len(),
                self.block_sizes.len()
            )));
        }
        let mut idx = 0usize;
        for (&k, &n) in counts.iter().zip(&self.block_sizes) {
            if k > n {
                return Err(Error::Inadmissible(format!(
                    "plus-count {k} exceeds block size {n}"
                )));
            }
            idx = idx * (n + 1) + k;
        }
        Ok(idx)
    }

    /// Plus-count vector at a flat index.
    pub fn counts_of(&self, mut idx: usize) -> Counts {
        debug_assert!(idx < self.len());
        let mut rev = Counts::new();
        for &n in self.block_sizes.iter().rev() {
            rev.push(idx % (n + 1));
            idx /= n + 1;
        }
        rev.iter().rev().copied().collect()
    }

    /// Magnetization coordinates at a flat index.
    pub fn magnetizations_of(&self, idx: usize) -> arrayvec::ArrayVec<f64, 3> {
        self.counts_of(idx)
            .iter()
            .zip(&self.block_sizes)
            .map(|(&k, &n)| (2 * k as i64 - n as i64) as f64 / n as f64)
            .collect()
    }

    pub fn point_of(&self, idx: usize) -> MagnetizationPoint {
        MagnetizationPoint::new(&self.counts_of(idx), &self.block_sizes)
            .expect("internal index always admissible")
    }

    pub fn log_weight_at(&self, idx: usize) -> f64 {
        self.log_weights[idx]
    }

    pub fn log_prob_at(&self, idx: usize) -> f64 {
        self.log_weights[idx] - self.log_partition
    }

    pub fn prob_at(&self, idx: usize) -> f64 {
        self.log_prob_at(idx).exp()
    }

    pub fn log_prob(&self, counts: &[usize]) -> Result<f64> {
        Ok(self.log_prob_at(self.index_of(counts)?))
    }

    pub fn prob(&self, counts: &[usize]) -> Result<f64> {
        Ok(self.log_prob(counts)?.exp())
    }

    /// Index of the global-flip image of `idx`. With row-major mixed-radix
    /// indexing the complement in every digit is `len - 1 - idx`.
    pub fn flip_index(&self, idx: usize) -> usize {
        self.len() - 1 - idx
    }

    /// Sum of all normalized probabilities (a 1.0-within-rounding check).
    pub fn total_probability(&self) -> f64 {
        self.log_weights
            .iter()
            .map(|&w| (w - self.log_partition).exp())
            .sum()
    }

    /// Marginal law of one block's plus-count.
    pub fn marginal(&self, block: usize) -> Result<Vec<f64>> {
        self.conditional_marginal(block, |_| true).map(|(m, _)| m)
    }

    /// Marginal law of `block`'s plus-count conditioned on a predicate over
    /// magnetization coordinates. Returns the normalized conditional law and
    /// the probability of the conditioning event.
    pub fn conditional_marginal(
        &self,
        block: usize,
        keep: impl Fn(&[f64]) -> bool,
    ) -> Result<(Vec<f64>, f64)> {
        if block >= self.block_sizes.len() {
            return Err(Error::ShapeMismatch(format!(
                "block {block} of {}",
                self.block_sizes.len()
            )));
        }
        let mut marg = vec![0.0f64; self.block_sizes[block] + 1];
        let mut total = 0.0f64;
        for idx in 0..self.len() {
            let m = self.magnetizations_of(idx);
            if keep(&m) {
                let p = self.prob_at(idx);
                marg[self.counts_of(idx)[block]] += p;
                total += p;
            }
        }
        if total > 0.0 {
            for q in &mut marg {
                *q /= total;
            }
        }
        Ok((marg, total))
    }

    // -- text and binary artifacts -----------------------------------------

    /// CSV with one row per grid point: plus-counts, magnetizations,
    /// unnormalized log-weight, probability. Floats carry 12 significant
    /// digits; identical tables serialize byte-identically.
    pub fn write_csv(&self, out: &mut dyn std::io::Write) -> std::io::Result<()> {
        let nb = self.num_blocks();
        for j in 0..nb {
            write!(out, "k{},", j + 1)?;
        }
        for j in 0..nb {
            write!(out, "m{},", j + 1)?;
        }
        writeln!(out, "log_weight,probability")?;
        for idx in 0..self.len() {
            let counts = self.counts_of(idx);
            for &k in &counts {
                write!(out, "{k},")?;
            }
            for m in self.magnetizations_of(idx) {
                write!(out, "{},", sig12(m))?;
            }
            writeln!(
                out,
                "{},{}",
                sig12(self.log_weight_at(idx)),
                sig12(self.prob_at(idx))
            )?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv is ascii")
    }

    const CACHE_MAGIC: &'static [u8; 8] = b"BLKSPNTB";
    const CACHE_VERSION: u32 = 1;

    /// Compact binary cache of the table (bit-exact round trip).
    pub fn save_cache(&self, path: &Path) -> Result<()> {
        let mut buf =
            Vec::with_capacity(32 + 8 * (self.block_sizes.len() + self.log_weights.len()));
        buf.extend_from_slice(Self::CACHE_MAGIC);
        buf.extend_from_slice(&Self::CACHE_VERSION.to_le_bytes());
        buf.extend_from_slice(&(self.block_sizes.len() as u32).to_le_bytes());
        for &n in &self.block_sizes {
            buf.extend_from_slice(&(n as u64).to_le_bytes());
        }
        buf.extend_from_slice(&self.log_partition.to_bits().to_le_bytes());
        buf.extend_from_slice(&(self.log_weights.len() as u64).to_le_bytes());
        for &w in &self.log_weights {
            buf.extend_from_slice(&w.to_bits().to_le_bytes());
        }
        let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
        f.write_all(&buf).map_err(|e| Error::io(path, e))
    }

    pub fn load_cache(path: &Path) -> Result<Self> {
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        let mut off = 0usize;
        let mut take = |n: usize| -> Result<&[u8]> {
            if off + n > bytes.len() {
                return Err(Error::Cache("truncated file".into()));
            }
            let s = &bytes[off..off + n];
            off += n;
            Ok(s)
        };
        if take(8)? != Self::CACHE_MAGIC {
            return Err(Error::Cache("bad magic".into()));
        }
        let version = u32::from_le_bytes(take(4)?.try_into().unwrap());
        if version != Self::CACHE_VERSION {
            return Err(Error::Cache(format!("unsupported version {version}")));
        }
        let nb = u32::from_le_bytes(take(4)?.try_into().unwrap()) as usize;
        if nb == 0 || nb > 3 {
            return Err(Error::Cache(format!("{nb} blocks out of range")));
        }
        let mut block_sizes = Counts::new();
        let mut expected_len = 1usize;
        for _ in 0..nb {
            let n = u64::from_le_bytes(take(8)?.try_into().unwrap()) as usize;
            expected_len = expected_len
                .checked_mul(n + 1)
                .ok_or_else(|| Error::Cache("table size overflow".into()))?;
            block_sizes.push(n);
        }
        let log_partition = f64::from_bits(u64::from_le_bytes(take(8)?.try_into().unwrap()));
        let len = u64::from_le_bytes(take(8)?.try_into().unwrap()) as usize;
        if len != expected_len {
            return Err(Error::Cache(format!(
                "length {len} does not match block sizes (expected {expected_len})"
            )));
        }
        let mut log_weights = Vec::with_capacity(len);
        for _ in 0..len {
            log_weights.push(f64::from_bits(u64::from_le_bytes(take(8)?.try_into().unwrap())));
        }
        if off != bytes.len() {
            return Err(Error::Cache("trailing bytes".into()));
        }
        Ok(Self {
            block_sizes,
            log_weights,
            log_partition,
        })
    }
}

/// Fill the canonical half of a grid in parallel and mirror it onto the
/// flip-image half.
fn build_mirrored(len: usize, fill: impl Fn(usize) -> f64 + Sync) -> Vec<f64> {
    let mut values = vec![0.0f64; len];
    let canonical = len / 2 + len % 2;
    values[..canonical]
        .par_iter_mut()
        .enumerate()
        .for_each(|(idx, w)| *w = fill(idx));
    for idx in 0..len / 2 {
        values[len - 1 - idx] = values[idx];
    }
    values
}

// ---------------------------------------------------------------------------
// Two-block
// ---------------------------------------------------------------------------

/// Exact two-block law. Weight of the fiber with plus-counts `(a, b)`:
/// mean-field factor `exp((beta/2N)(T1^2 + T2^2))` times the sum over the
/// matched-pair count `n` of `count(n) exp(alpha S(n))`.
pub fn exact_two_block(spec: &TwoBlockSpec, budget: &Budget) -> Result<LogWeightTable> {
    if spec.n() > budget.max_two_block_n {
        return Err(Error::BudgetExceeded {
            work: spec.n() as u64,
            budget: budget.max_two_block_n as u64,
            unit: "total spins",
        });
    }
    let half = spec.pairs();
    let dims = half + 1;
    let lf = LogFactorials::with_limit(half);
    let (beta, alpha) = (spec.beta(), spec.alpha());
    let two_n = 2.0 * spec.n() as f64;
    let weights = build_mirrored(dims * dims, |idx| {
        let (a, b) = (idx / dims, idx % dims);
        let d1 = 2 * a as i64 - half as i64;
        let d2 = 2 * b as i64 - half as i64;
        let mean_field = beta * (d1 * d1 + d2 * d2) as f64 / two_n;
        let (lo, hi) = feasible_pair_range(half, a, b);
        let mut acc = LogSumExp::new();
        for n in lo..=hi {
            let count = lf.multinomial4(half, [n, a - n, b - n, half + n - a - b]);
            acc.add(count + alpha * cross_term_int(half, a, b, n) as f64);
        }
        mean_field + acc.total()
    });
    Ok(LogWeightTable::from_parts(
        counts_from(&[half, half]),
        weights,
    ))
}

// ---------------------------------------------------------------------------
// Diluted two-block
// ---------------------------------------------------------------------------

/// Exact diluted law. The quenched law depends on the mask only through the
/// number `M` of retained pairs (retained sites are exchangeable with free
/// ones), so the fiber weight sums over `j`/`l` pluses on the retained sites
/// of each block and `n` retained `(+,+)` pairs, with cross term
/// `S = 4n + M - 2j - 2l`.
pub fn exact_diluted(spec: &DilutedSpec, budget: &Budget) -> Result<LogWeightTable> {
    let half = spec.pairs();
    let m = spec.retained();
    let dims = half + 1;

    // Work estimate: grid cells times the full retained triple sum.
    let mut core = 0u64;
    for j in 0..=m {
        for l in 0..=m {
            core += (j.min(l) - (j + l).saturating_sub(m) + 1) as u64;
        }
    }
    let work = (dims as u64 * dims as u64).saturating_mul(core);
    if work > budget.max_diluted_terms {
        return Err(Error::BudgetExceeded {
            work,
            budget: budget.max_diluted_terms,
            unit: "sum terms",
        });
    }

    let lf = LogFactorials::with_limit(half);
    let (beta, alpha) = (spec.beta(), spec.alpha());
    let two_n = 2.0 * spec.n() as f64;
    let free = half - m;
    let weights = build_mirrored(dims * dims, |idx| {
        let (a, b) = (idx / dims, idx % dims);
        let d1 = 2 * a as i64 - half as i64;
        let d2 = 2 * b as i64 - half as i64;
        let mean_field = beta * (d1 * d1 + d2 * d2) as f64 / two_n;
        let mut acc = LogSumExp::new();
        for j in a.saturating_sub(free)..=m.min(a) {
            let first = lf.binomial(free, a - j);
            for l in b.saturating_sub(free)..=m.min(b) {
                let unmatched = first + lf.binomial(free, b - l);
                for n in (j + l).saturating_sub(m)..=j.min(l) {
                    let s = 4 * n as i64 + m as i64 - 2 * j as i64 - 2 * l as i64;
                    acc.add(
                        lf.multinomial4(m, [n, j - n, l - n, m + n - j - l])
                            + unmatched
                            + alpha * s as f64,
                    );
                }
            }
        }
        mean_field + acc.total()
    });
    Ok(LogWeightTable::from_parts(
        counts_from(&[half, half]),
        weights,
    ))
}

// ---------------------------------------------------------------------------
// Three-block
// ---------------------------------------------------------------------------

/// Exact three-block law: per grid cell, minus the magnetization energy plus
/// the log of the fiber size (a product of three binomials).
pub fn exact_three_block(spec: &ThreeBlockSpec, budget: &Budget) -> Result<LogWeightTable> {
    let n_o = spec.n_outer();
    let b = spec.b();
    let cells = ((n_o + 1) as u64).pow(2) * (b + 1) as u64;
    if cells > budget.max_three_block_cells {
        return Err(Error::BudgetExceeded {
            work: cells,
            budget: budget.max_three_block_cells,
            unit: "grid cells",
        });
    }
    let lf = LogFactorials::with_limit(n_o.max(b));
    let (beta, alpha) = (spec.beta(), spec.alpha());
    let cross_scale = spec.cross_scale();
    let (outer_f, middle_f) = (n_o as f64, b as f64);
    let d_mid = b + 1;
    let d_out = n_o + 1;
    let weights = build_mirrored(d_out * d_mid * d_out, |idx| {
        let k3 = idx % d_out;
        let rest = idx / d_out;
        let k2 = rest % d_mid;
        let k1 = rest / d_mid;
        let m1 = (2 * k1 as i64 - n_o as i64) as f64 / outer_f;
        let m2 = (2 * k2 as i64 - b as i64) as f64 / middle_f;
        let m3 = (2 * k3 as i64 - n_o as i64) as f64 / outer_f;
        // Outer-symmetric grouping keeps k1 <-> k3 exchange bit-exact.
        let mean_field = 0.5 * beta * (outer_f * (m1 * m1 + m3 * m3) + middle_f * m2 * m2);
        let cross = alpha * cross_scale * (m1 + m3) * m2;
        let entropy = (lf.binomial(n_o, k1) + lf.binomial(n_o, k3)) + lf.binomial(b, k2);
        mean_field + cross + entropy
    });
    Ok(LogWeightTable::from_parts(
        counts_from(&[n_o, b, n_o]),
        weights,
    ))
}

/// Build the exact table for any model, dispatching on the spec kind.
pub fn exact_table(spec: &ModelSpec, budget: &Budget) -> Result<LogWeightTable> {
    match spec {
        ModelSpec::TwoBlock(s) => exact_two_block(s, budget),
        ModelSpec::Diluted(s) => exact_diluted(s, budget),
        ModelSpec::ThreeBlock(s) => exact_three_block(s, budget),
    }
}
