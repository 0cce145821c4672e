//! Model definitions: block layouts, spin configurations, exact magnetization
//! coordinates, and energy functions.
//!
//! Three models share one site convention. Sites are 0-based and blocks are
//! laid out contiguously in declaration order:
//!
//! * two-block: blocks `{0..N/2}` and `{N/2..N}`, site `i` in the first block
//!   matched with site `i + N/2`;
//! * diluted: the two-block layout with a quenched boolean mask selecting
//!   which matched pairs keep their bond;
//! * three-block: outer block `{0..n_outer}`, middle block
//!   `{n_outer..n_outer+b}`, outer block `{n_outer+b..N}`.
//!
//! Magnetizations are always represented by the number of `+1` spins per
//! block, so admissibility checks are integer comparisons and the flip
//! `m -> -m` is exact.

use arrayvec::ArrayVec;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Maximum number of blocks across all models.
pub const MAX_BLOCKS: usize = 3;

/// Per-block integer vector (plus-counts, block sizes, spin sums, ...).
pub type Counts = ArrayVec<usize, MAX_BLOCKS>;

pub(crate) fn counts_from(slice: &[usize]) -> Counts {
    let mut c = Counts::new();
    c.try_extend_from_slice(slice).expect("at most MAX_BLOCKS entries");
    c
}

// ---------------------------------------------------------------------------
// Magnetization points
// ---------------------------------------------------------------------------

/// A point on the admissible magnetization grid of a block layout, stored as
/// the number of `+1` spins in each block.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MagnetizationPoint {
    plus_counts: Counts,
    block_sizes: Counts,
}

impl MagnetizationPoint {
    pub fn new(plus_counts: &[usize], block_sizes: &[usize]) -> Result<Self> {
        if plus_counts.len() != block_sizes.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} plus-counts for {} blocks",
                plus_counts.len(),
                block_sizes.len()
            )));
        }
        if block_sizes.is_empty() || block_sizes.len() > MAX_BLOCKS {
            return Err(Error::InvalidParameter(format!(
                "need between 1 and {MAX_BLOCKS} blocks, got {}",
                block_sizes.len()
            )));
        }
        for (j, (&k, &n)) in plus_counts.iter().zip(block_sizes).enumerate() {
            if n == 0 {
                return Err(Error::InvalidParameter(format!("block {j} is empty")));
            }
            if k > n {
                return Err(Error::Inadmissible(format!(
                    "block {j} has {k} plus spins but only {n} sites"
                )));
            }
        }
        Ok(Self {
            plus_counts: counts_from(plus_counts),
            block_sizes: counts_from(block_sizes),
        })
    }

    pub fn plus_counts(&self) -> &[usize] {
        &self.plus_counts
    }

    pub fn block_sizes(&self) -> &[usize] {
        &self.block_sizes
    }

    pub fn num_blocks(&self) -> usize {
        self.block_sizes.len()
    }

    /// Per-block magnetization `m_j = (2 k_j - n_j) / n_j`.
    ///
    /// The numerator is formed in integers, so flipping every spin negates
    /// each coordinate exactly (no rounding asymmetry).
    pub fn magnetizations(&self) -> ArrayVec<f64, MAX_BLOCKS> {
        self.plus_counts
            .iter()
            .zip(&self.block_sizes)
            .map(|(&k, &n)| (2 * k as i64 - n as i64) as f64 / n as f64)
            .collect()
    }

    /// The image of this point under the global spin flip.
    pub fn flipped(&self) -> Self {
        Self {
            plus_counts: self
                .plus_counts
                .iter()
                .zip(&self.block_sizes)
                .map(|(&k, &n)| n - k)
                .collect(),
            block_sizes: self.block_sizes.clone(),
        }
    }
}

/// Convert a real magnetization into the plus-count of a block of `size`
/// sites, requiring `size * (1 + mu) / 2` to be an integer (within 1e-9).
pub fn plus_count_from_mu(size: usize, mu: f64) -> Result<usize> {
    if !mu.is_finite() || !(-1.0..=1.0).contains(&mu) {
        return Err(Error::InvalidParameter(format!(
            "magnetization {mu} outside [-1, 1]"
        )));
    }
    let k = 0.5 * (1.0 + mu) * size as f64;
    let rounded = k.round();
    if (k - rounded).abs() > 1e-9 {
        return Err(Error::Inadmissible(format!(
            "mu = {mu} is not representable on a block of {size} sites"
        )));
    }
    Ok(rounded as usize)
}

// ---------------------------------------------------------------------------
// Spin configurations
// ---------------------------------------------------------------------------

/// A full spin configuration. Spins are `+1` or `-1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpinConfig {
    spins: Vec<i8>,
    block_sizes: Counts,
}

impl SpinConfig {
    pub fn new(spins: Vec<i8>, block_sizes: &[usize]) -> Result<Self> {
        if block_sizes.is_empty() || block_sizes.len() > MAX_BLOCKS {
            return Err(Error::InvalidParameter(format!(
                "need between 1 and {MAX_BLOCKS} blocks, got {}",
                block_sizes.len()
            )));
        }
        let total: usize = block_sizes.iter().sum();
        if spins.len() != total {
            return Err(Error::ConfigLength {
                expected: total,
                found: spins.len(),
            });
        }
        if let Some(&bad) = spins.iter().find(|&&s| s != 1 && s != -1) {
            return Err(Error::InvalidParameter(format!(
                "spin value {bad} is not +1/-1"
            )));
        }
        Ok(Self {
            spins,
            block_sizes: counts_from(block_sizes),
        })
    }

    pub fn spins(&self) -> &[i8] {
        &self.spins
    }

    pub fn block_sizes(&self) -> &[usize] {
        &self.block_sizes
    }

    pub fn len(&self) -> usize {
        self.spins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.spins.is_empty()
    }

    /// Site range occupied by block `j`.
    pub fn block_range(&self, j: usize) -> std::ops::Range<usize> {
        let start: usize = self.block_sizes[..j].iter().sum();
        start..start + self.block_sizes[j]
    }

    /// Sum of spins in block `j` (an integer in `[-n_j, n_j]`).
    pub fn block_spin_sum(&self, j: usize) -> i64 {
        self.spins[self.block_range(j)]
            .iter()
            .map(|&s| s as i64)
            .sum()
    }

    pub fn magnetization(&self) -> MagnetizationPoint {
        magnetization(self)
    }

    pub fn flipped(&self) -> Self {
        Self {
            spins: self.spins.iter().map(|&s| -s).collect(),
            block_sizes: self.block_sizes.clone(),
        }
    }
}

/// Block-wise magnetization coordinates of a configuration.
pub fn magnetization(config: &SpinConfig) -> MagnetizationPoint {
    let plus_counts: Counts = (0..config.block_sizes.len())
        .map(|j| {
            config.spins[config.block_range(j)]
                .iter()
                .filter(|&&s| s == 1)
                .count()
        })
        .collect();
    MagnetizationPoint {
        plus_counts,
        block_sizes: config.block_sizes.clone(),
    }
}

// ---------------------------------------------------------------------------
// Model specifications
// ---------------------------------------------------------------------------

fn require(cond: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::InvalidParameter(msg()))
    }
}

/// Two mean-field blocks of `N/2` spins each, with in-block coupling `beta`
/// and a perfect matching of strength `alpha` across the blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoBlockSpec {
    n: usize,
    beta: f64,
    alpha: f64,
}

impl TwoBlockSpec {
    /// `n` must be even and at least 4, `beta > 2` (the ordered phase of each
    /// half at effective temperature `beta/2`), and `0 <= alpha <= beta`.
    pub fn new(n: usize, beta: f64, alpha: f64) -> Result<Self> {
        require(n >= 4 && n % 2 == 0, || format!("N = {n} must be even and >= 4"))?;
        require(beta.is_finite() && beta > 2.0, || {
            format!("beta = {beta} must be finite and > 2")
        })?;
        require(alpha.is_finite() && (0.0..=beta).contains(&alpha), || {
            format!("alpha = {alpha} must lie in [0, beta]")
        })?;
        Ok(Self { n, beta, alpha })
    }

    /// Construction without the domain checks. Test-only escape hatch for
    /// probing degenerate couplings (e.g. `beta -> 0` product measures).
    #[allow(dead_code)]
    pub(crate) fn new_unchecked(n: usize, beta: f64, alpha: f64) -> Self {
        Self { n, beta, alpha }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of matched pairs, `N/2`.
    pub fn pairs(&self) -> usize {
        self.n / 2
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn block_sizes(&self) -> Counts {
        counts_from(&[self.n / 2, self.n / 2])
    }
}

/// Two-block model with a quenched dilution of the matching: pair `i` keeps
/// its bond iff `mask[i]` is true. Each mask entry is meant to be drawn
/// independently with probability `p`, but any fixed mask is accepted.
#[derive(Debug, Clone, PartialEq)]
pub struct DilutedSpec {
    base: TwoBlockSpec,
    p: f64,
    mask: Vec<bool>,
    mask_seed: Option<u64>,
}

impl DilutedSpec {
    pub fn with_mask(base: TwoBlockSpec, p: f64, mask: Vec<bool>) -> Result<Self> {
        require(p.is_finite() && (0.0..=1.0).contains(&p), || {
            format!("p = {p} must lie in [0, 1]")
        })?;
        if mask.len() != base.pairs() {
            return Err(Error::MaskLength {
                expected: base.pairs(),
                found: mask.len(),
            });
        }
        Ok(Self {
            base,
            p,
            mask,
            mask_seed: None,
        })
    }

    /// Draw the mask reproducibly from `seed` with retention probability `p`.
    pub fn from_seed(base: TwoBlockSpec, p: f64, seed: u64) -> Result<Self> {
        let sample = crate::sampler::sample_mask(base.n(), p, seed)?;
        let mut spec = Self::with_mask(base, p, sample.mask)?;
        spec.mask_seed = Some(seed);
        Ok(spec)
    }

    pub fn base(&self) -> &TwoBlockSpec {
        &self.base
    }

    pub fn n(&self) -> usize {
        self.base.n()
    }

    pub fn pairs(&self) -> usize {
        self.base.pairs()
    }

    pub fn beta(&self) -> f64 {
        self.base.beta()
    }

    pub fn alpha(&self) -> f64 {
        self.base.alpha()
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn mask_seed(&self) -> Option<u64> {
        self.mask_seed
    }

    /// Number of retained bonds `M`.
    pub fn retained(&self) -> usize {
        self.mask.iter().filter(|&&b| b).count()
    }

    pub fn block_sizes(&self) -> Counts {
        self.base.block_sizes()
    }
}

/// Two outer mean-field blocks of `n_outer` spins tied together only through
/// a middle block of `b` spins (`b <= n_outer`): the bottleneck geometry.
#[derive(Debug, Clone, PartialEq)]
pub struct ThreeBlockSpec {
    n_outer: usize,
    b: usize,
    beta: f64,
    alpha: f64,
}

impl ThreeBlockSpec {
    /// `beta > 1` (ordered phase of every block), `alpha >= 0`,
    /// `1 <= b <= n_outer`.
    pub fn new(n_outer: usize, b: usize, beta: f64, alpha: f64) -> Result<Self> {
        require(n_outer >= 1, || "n_outer must be >= 1".to_string())?;
        require(b >= 1 && b <= n_outer, || {
            format!("middle block size b = {b} must lie in [1, n_outer = {n_outer}]")
        })?;
        require(beta.is_finite() && beta > 1.0, || {
            format!("beta = {beta} must be finite and > 1")
        })?;
        require(alpha.is_finite() && alpha >= 0.0, || {
            format!("alpha = {alpha} must be finite and >= 0")
        })?;
        Ok(Self {
            n_outer,
            b,
            beta,
            alpha,
        })
    }

    pub fn n_outer(&self) -> usize {
        self.n_outer
    }

    pub fn b(&self) -> usize {
        self.b
    }

    pub fn n(&self) -> usize {
        2 * self.n_outer + self.b
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Block sizes in site order: outer, middle, outer.
    pub fn block_sizes(&self) -> Counts {
        counts_from(&[self.n_outer, self.b, self.n_outer])
    }

    /// Geometric mean coupling scale `sqrt(n_outer * b)` shared by both
    /// outer-to-middle interactions.
    pub fn cross_scale(&self) -> f64 {
        ((self.n_outer * self.b) as f64).sqrt()
    }
}

/// Any of the three supported models.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelSpec {
    TwoBlock(TwoBlockSpec),
    Diluted(DilutedSpec),
    ThreeBlock(ThreeBlockSpec),
}

impl ModelSpec {
    pub fn n_total(&self) -> usize {
        match self {
            ModelSpec::TwoBlock(s) => s.n(),
            ModelSpec::Diluted(s) => s.n(),
            ModelSpec::ThreeBlock(s) => s.n(),
        }
    }

    pub fn block_sizes(&self) -> Counts {
        match self {
            ModelSpec::TwoBlock(s) => s.block_sizes(),
            ModelSpec::Diluted(s) => s.block_sizes(),
            ModelSpec::ThreeBlock(s) => s.block_sizes(),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            ModelSpec::TwoBlock(_) => "two_block",
            ModelSpec::Diluted(_) => "diluted",
            ModelSpec::ThreeBlock(_) => "three_block",
        }
    }

    pub fn energy(&self, config: &SpinConfig) -> Result<f64> {
        match self {
            ModelSpec::TwoBlock(s) => energy_two_block(s, config),
            ModelSpec::Diluted(s) => energy_diluted(s, config),
            ModelSpec::ThreeBlock(s) => energy_three_block_config(s, config),
        }
    }

    /// Stable content hash used to key binary table caches. Couplings enter
    /// through their exact bit patterns; diluted specs include the full mask.
    pub fn cache_key(&self) -> String {
        let mut h = Sha256::new();
        match self {
            ModelSpec::TwoBlock(s) => {
                h.update(b"two_block");
                h.update(s.n().to_le_bytes());
                h.update(s.beta().to_bits().to_le_bytes());
                h.update(s.alpha().to_bits().to_le_bytes());
            }
            ModelSpec::Diluted(s) => {
                h.update(b"diluted");
                h.update(s.n().to_le_bytes());
                h.update(s.beta().to_bits().to_le_bytes());
                h.update(s.alpha().to_bits().to_le_bytes());
                h.update(s.p().to_bits().to_le_bytes());
                let bits: Vec<u8> = s.mask().iter().map(|&b| b as u8).collect();
                h.update(&bits);
            }
            ModelSpec::ThreeBlock(s) => {
                h.update(b"three_block");
                h.update(s.n_outer().to_le_bytes());
                h.update(s.b().to_le_bytes());
                h.update(s.beta().to_bits().to_le_bytes());
                h.update(s.alpha().to_bits().to_le_bytes());
            }
        }
        let digest = h.finalize();
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

// ---------------------------------------------------------------------------
// Human-readable model config (TOML)
// ---------------------------------------------------------------------------

/// Flat on-disk representation of a model spec.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelConfigFile {
    model: String,
    #[serde(rename = "N")]
    n: usize,
    beta: f64,
    alpha: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    b: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    mask_seed: Option<u64>,
}

impl ModelSpec {
    /// Serialize to the TOML config format
    /// (keys: `model`, `N`, `beta`, `alpha`, `b`, `p`, `mask_seed`).
    ///
    /// Diluted specs are serializable only when the mask came from a seed;
    /// an ad-hoc mask has no compact config representation.
    pub fn to_config_toml(&self) -> Result<String> {
        let file = match self {
            ModelSpec::TwoBlock(s) => ModelConfigFile {
                model: "two_block".into(),
                n: s.n(),
                beta: s.beta(),
                alpha: s.alpha(),
                b: None,
                p: None,
                mask_seed: None,
            },
            ModelSpec::Diluted(s) => ModelConfigFile {
                model: "diluted".into(),
                n: s.n(),
                beta: s.beta(),
                alpha: s.alpha(),
                b: None,
                p: Some(s.p()),
                mask_seed: Some(s.mask_seed().ok_or_else(|| {
                    Error::Config(
                        "diluted spec with an explicit mask cannot be written as a config; \
                         construct it with DilutedSpec::from_seed"
                            .into(),
                    )
                })?),
            },
            ModelSpec::ThreeBlock(s) => ModelConfigFile {
                model: "three_block".into(),
                n: s.n(),
                beta: s.beta(),
                alpha: s.alpha(),
                b: Some(s.b()),
                p: None,
                mask_seed: None,
            },
        };
        toml::to_string(&file).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_config_toml(text: &str) -> Result<Self> {
        let file: ModelConfigFile =
            toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        match file.model.as_str() {
            "two_block" => {
                let spec = TwoBlockSpec::new(file.n, file.beta, file.alpha)?;
                Ok(ModelSpec::TwoBlock(spec))
            }
            "diluted" => {
                let base = TwoBlockSpec::new(file.n, file.beta, file.alpha)?;
                let p = file
                    .p
                    .ok_or_else(|| Error::Config("diluted model requires p".into()))?;
                let seed = file
                    .mask_seed
                    .ok_or_else(|| Error::Config("diluted model requires mask_seed".into()))?;
                Ok(ModelSpec::Diluted(DilutedSpec::from_seed(base, p, seed)?))
            }
            "three_block" => {
                let b = file
                    .b
                    .ok_or_else(|| Error::Config("three_block model requires b".into()))?;
                if file.n < b || (file.n - b) % 2 != 0 {
                    return Err(Error::Config(format!(
                        "N = {} and b = {b} leave no integer outer-block size",
                        file.n
                    )));
                }
                let spec = ThreeBlockSpec::new((file.n - b) / 2, b, file.beta, file.alpha)?;
                Ok(ModelSpec::ThreeBlock(spec))
            }
            other => Err(Error::Config(format!("unknown model kind '{other}'"))),
        }
    }
}

// ---------------------------------------------------------------------------
// Energies
// ---------------------------------------------------------------------------

fn check_layout(config: &SpinConfig, sizes: &[usize]) -> Result<()> {
    if config.block_sizes() != sizes {
        return Err(Error::ConfigLength {
            expected: sizes.iter().sum(),
            found: config.len(),
        });
    }
    Ok(())
}

/// Sum of `s_i * s_{i+N/2}` over retained pairs (`mask = None` keeps all).
fn cross_sum(config: &SpinConfig, half: usize, mask: Option<&[bool]>) -> i64 {
    let spins = config.spins();
    (0..half)
        .filter(|&i| mask.map_or(true, |m| m[i]))
        .map(|i| (spins[i] * spins[i + half]) as i64)
        .sum()
}

/// Two-block energy
/// `H = -(beta N / 8) (m1^2 + m2^2) - alpha * sum_i s_i s_{i+N/2}`.
///
/// The mean-field part is evaluated as `-(beta / 2N) (T1^2 + T2^2)` with
/// integer block sums `T_j`, which equals the double-sum form (self-pairs
/// included) exactly.
pub fn energy_two_block(spec: &TwoBlockSpec, config: &SpinConfig) -> Result<f64> {
    check_layout(config, &spec.block_sizes())?;
    let t1 = config.block_spin_sum(0);
    let t2 = config.block_spin_sum(1);
    let cross = cross_sum(config, spec.pairs(), None);
    Ok(-spec.beta() * (t1 * t1 + t2 * t2) as f64 / (2.0 * spec.n() as f64)
        - spec.alpha() * cross as f64)
}

/// Diluted two-block energy: only masked-in pairs contribute to the cross sum.
pub fn energy_diluted(spec: &DilutedSpec, config: &SpinConfig) -> Result<f64> {
    check_layout(config, &spec.block_sizes())?;
    let t1 = config.block_spin_sum(0);
    let t2 = config.block_spin_sum(1);
    let cross = cross_sum(config, spec.pairs(), Some(spec.mask()));
    Ok(-spec.beta() * (t1 * t1 + t2 * t2) as f64 / (2.0 * spec.n() as f64)
        - spec.alpha() * cross as f64)
}

/// Three-block energy as a function of block magnetizations only:
/// `H = -(beta/2) sum_k |B_k| m_k^2 - alpha sqrt(n_outer b) (m1 + m3) m2`.
///
/// Terms are grouped symmetrically in the outer blocks, so exchanging the
/// outer coordinates returns a bit-identical value, and all coordinates enter
/// through exact integer counts, so the global flip is bit-exact too.
pub fn energy_three_block(spec: &ThreeBlockSpec, point: &MagnetizationPoint) -> Result<f64> {
    if point.block_sizes() != spec.block_sizes().as_slice() {
        return Err(Error::Inadmissible(format!(
            "point with block sizes {:?} for a model with sizes {:?}",
            point.block_sizes(),
            spec.block_sizes()
        )));
    }
    let m = point.magnetizations();
    let (m1, m2, m3) = (m[0], m[1], m[2]);
    let outer = spec.n_outer() as f64;
    let middle = spec.b() as f64;
    Ok(-0.5 * spec.beta() * (outer * (m1 * m1 + m3 * m3) + middle * m2 * m2)
        - spec.alpha() * spec.cross_scale() * (m1 + m3) * m2)
}

/// Three-block energy of a full configuration; constant on magnetization
/// fibers by construction.
pub fn energy_three_block_config(spec: &ThreeBlockSpec, config: &SpinConfig) -> Result<f64> {
    check_layout(config, &spec.block_sizes())?;
    energy_three_block(spec, &config.magnetization())
}

/// Reference two-block surrogate used in coarse free-energy comparisons:
/// `H_ref = -(N/2) [ (alpha/2) m1 m2 + (beta/4) m1^2 + (beta/4) m2^2 ]`.
pub fn energy_reference(spec: &TwoBlockSpec, point: &MagnetizationPoint) -> Result<f64> {
    if point.block_sizes() != spec.block_sizes().as_slice() {
        return Err(Error::Inadmissible(format!(
            "point with block sizes {:?} for a model with sizes {:?}",
            point.block_sizes(),
            spec.block_sizes()
        )));
    }
    let m = point.magnetizations();
    let (m1, m2) = (m[0], m[1]);
    let n = spec.n() as f64;
    Ok(-(n / 2.0)
        * (0.5 * spec.alpha() * m1 * m2 + 0.25 * spec.beta() * (m1 * m1 + m2 * m2)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(spins: &[i8], sizes: &[usize]) -> SpinConfig {
        SpinConfig::new(spins.to_vec(), sizes).unwrap()
    }

    #[test]
    fn magnetization_examples() {
        let m = cfg(&[1, 1, -1, -1], &[2, 2]).magnetization();
        assert_eq!(m.plus_counts(), &[2, 0]);
        assert_eq!(m.magnetizations().as_slice(), &[1.0, -1.0]);

        let m = cfg(&[-1, -1, -1, -1], &[4]).magnetization();
        assert_eq!(m.magnetizations().as_slice(), &[-1.0]);

        let m = cfg(&[1, -1, 1, -1], &[1, 2, 1]).magnetization();
        assert_eq!(m.magnetizations().as_slice(), &[1.0, 0.0, -1.0]);
    }

    #[test]
    fn magnetization_flip_is_exact() {
        for sizes in [vec![3, 3], vec![5, 2, 5]] {
            for trial in 0..50 {
                let spins: Vec<i8> = (0..sizes.iter().sum::<usize>())
                    .map(|i| if (i * 31 + trial * 17) % 3 == 0 { 1 } else { -1 })
                    .collect();
                let c = cfg(&spins, &sizes);
                let m = c.magnetization().magnetizations();
                let mf = c.flipped().magnetization().magnetizations();
                for (a, b) in m.iter().zip(&mf) {
                    // Zero magnetization flips to itself (+0.0 on both
                    // sides); everything else negates bit-exactly.
                    if *b == 0.0 {
                        assert_eq!(a.to_bits(), b.to_bits());
                    } else {
                        assert_eq!(a.to_bits(), (-b).to_bits());
                    }
                }
            }
        }
    }

    #[test]
    fn two_block_energy_hand_values() {
        let spec = TwoBlockSpec::new(4, 4.0, 1.0).unwrap();
        let all_plus = cfg(&[1, 1, 1, 1], &[2, 2]);
        assert_eq!(energy_two_block(&spec, &all_plus).unwrap(), -6.0);

        let split = cfg(&[1, 1, -1, -1], &[2, 2]);
        assert_eq!(energy_two_block(&spec, &split).unwrap(), -2.0);

        let spec0 = TwoBlockSpec::new(4, 4.0, 0.0).unwrap();
        let mixed = cfg(&[1, -1, 1, 1], &[2, 2]);
        assert_eq!(energy_two_block(&spec0, &mixed).unwrap(), -2.0);
    }

    #[test]
    fn diluted_energy_hand_value() {
        let base = TwoBlockSpec::new(4, 4.0, 1.0).unwrap();
        let spec = DilutedSpec::with_mask(base, 0.5, vec![true, false]).unwrap();
        let all_plus = cfg(&[1, 1, 1, 1], &[2, 2]);
        assert_eq!(energy_diluted(&spec, &all_plus).unwrap(), -5.0);
        assert_eq!(spec.retained(), 1);
    }

    #[test]
    fn three_block_energy_hand_value() {
        let spec = ThreeBlockSpec::new(2, 2, 1.5, 0.1).unwrap();
        let point = MagnetizationPoint::new(&[2, 2, 2], &[2, 2, 2]).unwrap();
        let e = energy_three_block(&spec, &point).unwrap();
        assert!((e - (-4.9)).abs() < 1e-12, "e = {e}");
    }

    #[test]
    fn reference_energy_hand_value() {
        let spec = TwoBlockSpec::new(4, 4.0, 2.0).unwrap();
        let point = MagnetizationPoint::new(&[2, 2], &[2, 2]).unwrap();
        assert_eq!(energy_reference(&spec, &point).unwrap(), -6.0);
    }

    #[test]
    fn energies_are_flip_invariant() {
        let two = ModelSpec::TwoBlock(TwoBlockSpec::new(8, 3.0, 0.7).unwrap());
        let dil = ModelSpec::Diluted(
            DilutedSpec::with_mask(
                TwoBlockSpec::new(8, 3.0, 0.7).unwrap(),
                0.5,
                vec![true, false, true, true],
            )
            .unwrap(),
        );
        let three = ModelSpec::ThreeBlock(ThreeBlockSpec::new(3, 2, 1.5, 0.3).unwrap());
        for model in [two, dil, three] {
            let n = model.n_total();
            for trial in 0..200u64 {
                let spins: Vec<i8> = (0..n)
                    .map(|i| {
                        if (trial >> (i % 60)) & 1 == 1 || (i + trial as usize) % 5 == 0 {
                            1
                        } else {
                            -1
                        }
                    })
                    .collect();
                let c = SpinConfig::new(spins, &model.block_sizes()).unwrap();
                let e = model.energy(&c).unwrap();
                let ef = model.energy(&c.flipped()).unwrap();
                assert_eq!(e.to_bits(), ef.to_bits());
            }
        }
    }

    /// Literal double-sum Hamiltonian (self-pairs included), kept independent
    /// of the production energy path.
    fn raw_two_block(beta: f64, alpha: f64, mask: Option<&[bool]>, spins: &[i8]) -> f64 {
        let n = spins.len();
        let half = n / 2;
        let mut intra = 0i64;
        for block in [0..half, half..n] {
            for i in block.clone() {
                for j in block.clone() {
                    intra += (spins[i] * spins[j]) as i64;
                }
            }
        }
        let mut cross = 0i64;
        for i in 0..half {
            if mask.map_or(true, |m| m[i]) {
                cross += (spins[i] * spins[i + half]) as i64;
            }
        }
        -beta / (2.0 * n as f64) * intra as f64 - alpha * cross as f64
    }

    #[test]
    fn two_block_energy_matches_raw_double_sum() {
        let spec = TwoBlockSpec::new(8, 2.5, 0.4).unwrap();
        let mask = [true, false, true, false];
        let dspec = DilutedSpec::with_mask(spec.clone(), 0.5, mask.to_vec()).unwrap();
        for bits in 0..(1u32 << 8) {
            let spins: Vec<i8> = (0..8)
                .map(|i| if bits >> i & 1 == 1 { 1 } else { -1 })
                .collect();
            let c = cfg(&spins, &[4, 4]);
            let e = energy_two_block(&spec, &c).unwrap();
            let raw = raw_two_block(2.5, 0.4, None, &spins);
            assert!((e - raw).abs() < 1e-12);
            let ed = energy_diluted(&dspec, &c).unwrap();
            let rawd = raw_two_block(2.5, 0.4, Some(&mask), &spins);
            assert!((ed - rawd).abs() < 1e-12);
        }
    }

    #[test]
    fn three_block_energy_constant_on_fibers() {
        let spec = ThreeBlockSpec::new(3, 2, 1.5, 0.25).unwrap();
        let sizes = [3usize, 2, 3];
        let mut seen: std::collections::HashMap<Vec<usize>, f64> = Default::default();
        for bits in 0..(1u32 << 8) {
            let spins: Vec<i8> = (0..8)
                .map(|i| if bits >> i & 1 == 1 { 1 } else { -1 })
                .collect();
            let c = cfg(&spins, &sizes);
            let e = energy_three_block_config(&spec, &c).unwrap();
            let key = c.magnetization().plus_counts().to_vec();
            if let Some(&prev) = seen.get(&key) {
                assert_eq!(prev.to_bits(), e.to_bits());
            } else {
                seen.insert(key, e);
            }
        }
        assert_eq!(seen.len(), 4 * 3 * 4);
    }

    #[test]
    fn three_block_outer_exchange_is_bit_exact() {
        let spec = ThreeBlockSpec::new(5, 3, 1.2, 0.8).unwrap();
        for k1 in 0..=5 {
            for k2 in 0..=3 {
                for k3 in 0..=5 {
                    let a = MagnetizationPoint::new(&[k1, k2, k3], &[5, 3, 5]).unwrap();
                    let b = MagnetizationPoint::new(&[k3, k2, k1], &[5, 3, 5]).unwrap();
                    let ea = energy_three_block(&spec, &a).unwrap();
                    let eb = energy_three_block(&spec, &b).unwrap();
                    assert_eq!(ea.to_bits(), eb.to_bits());
                }
            }
        }
    }

    #[test]
    fn validation_rejects_bad_parameters() {
        assert!(TwoBlockSpec::new(5, 4.0, 0.1).is_err());
        assert!(TwoBlockSpec::new(2, 4.0, 0.1).is_err());
        assert!(TwoBlockSpec::new(8, 2.0, 0.1).is_err());
        assert!(TwoBlockSpec::new(8, 4.0, -0.1).is_err());
        assert!(TwoBlockSpec::new(8, 4.0, 4.5).is_err());
        assert!(TwoBlockSpec::new(8, f64::NAN, 0.1).is_err());

        let base = TwoBlockSpec::new(8, 4.0, 0.1).unwrap();
        assert!(DilutedSpec::with_mask(base.clone(), 1.5, vec![true; 4]).is_err());
        assert!(DilutedSpec::with_mask(base, 0.5, vec![true; 3]).is_err());

        assert!(ThreeBlockSpec::new(4, 5, 1.5, 0.1).is_err());
        assert!(ThreeBlockSpec::new(4, 0, 1.5, 0.1).is_err());
        assert!(ThreeBlockSpec::new(4, 2, 1.0, 0.1).is_err());
        assert!(ThreeBlockSpec::new(4, 2, 1.5, -0.1).is_err());

        assert!(SpinConfig::new(vec![1, 0, 1, 1], &[2, 2]).is_err());
        assert!(SpinConfig::new(vec![1, 1, 1], &[2, 2]).is_err());
    }

    #[test]
    fn plus_count_from_mu_checks_grid() {
        assert_eq!(plus_count_from_mu(50, 0.2).unwrap(), 30);
        assert_eq!(plus_count_from_mu(4, -1.0).unwrap(), 0);
        assert!(plus_count_from_mu(50, 0.21).is_err());
        assert!(plus_count_from_mu(50, 1.2).is_err());
    }

    #[test]
    fn config_round_trips() {
        let two = ModelSpec::TwoBlock(TwoBlockSpec::new(400, 4.0, 0.05).unwrap());
        let text = two.to_config_toml().unwrap();
        assert_eq!(ModelSpec::from_config_toml(&text).unwrap(), two);

        let three = ModelSpec::ThreeBlock(ThreeBlockSpec::new(100, 20, 1.5, 0.01).unwrap());
        let text = three.to_config_toml().unwrap();
        assert_eq!(ModelSpec::from_config_toml(&text).unwrap(), three);

        let base = TwoBlockSpec::new(60, 4.0, 0.2).unwrap();
        let dil = ModelSpec::Diluted(DilutedSpec::from_seed(base, 0.3, 7).unwrap());
        let text = dil.to_config_toml().unwrap();
        assert_eq!(ModelSpec::from_config_toml(&text).unwrap(), dil);

        assert!(ModelSpec::from_config_toml("model = \"pentablock\"\nN = 4").is_err());
        // Mismatched parity between N and b leaves no integer outer size.
        assert!(ModelSpec::from_config_toml(
            "model = \"three_block\"\nN = 9\nb = 2\nbeta = 1.5\nalpha = 0.0"
        )
        .is_err());
    }

    #[test]
    fn cache_keys_separate_specs() {
        let a = ModelSpec::TwoBlock(TwoBlockSpec::new(8, 4.0, 0.1).unwrap());
        let b = ModelSpec::TwoBlock(TwoBlockSpec::new(8, 4.0, 0.2).unwrap());
        assert_ne!(a.cache_key(), b.cache_key());
        assert_eq!(a.cache_key(), a.cache_key());
        assert_eq!(a.cache_key().len(), 64);
    }
}
