//! Single-spin-flip MCMC for all three models, quenched-mask generation, and
//! uniform sampling on fixed-magnetization fibers.
//!
//! One chain is strictly sequential; parallelism happens across chains, each
//! on its own RNG stream, so every trajectory is reproducible independently
//! of scheduling.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{plus_count_from_mu, Counts, MagnetizationPoint, ModelSpec, SpinConfig};

/// Single-flip update rule. Both satisfy detailed balance for the Gibbs law;
/// heat-bath is the default, Metropolis is kept as a cross-check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Dynamics {
    #[default]
    Glauber,
    Metropolis,
}

/// Initial spin state of a chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Init {
    #[default]
    Random,
    AllPlus,
    AllMinus,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ChainConfig {
    pub seed: u64,
    /// RNG stream; parallel chains use one stream each under a shared seed.
    pub stream: u64,
    pub sweeps: usize,
    pub burn_in: usize,
    pub thin: usize,
    pub dynamics: Dynamics,
    pub init: Init,
}

impl Default for ChainConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            stream: 0,
            sweeps: 10_000,
            burn_in: 1_000,
            thin: 1,
            dynamics: Dynamics::Glauber,
            init: Init::Random,
        }
    }
}

impl ChainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.sweeps <= self.burn_in {
            return Err(Error::InvalidParameter(format!(
                "sweeps ({}) must exceed burn_in ({})",
                self.sweeps, self.burn_in
            )));
        }
        if self.thin == 0 {
            return Err(Error::InvalidParameter("thin must be at least 1".into()));
        }
        Ok(())
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        rng
    }
}

/// Probability of accepting a proposed flip with energy change `delta_h`.
pub fn flip_probability(delta_h: f64, dynamics: Dynamics) -> f64 {
    match dynamics {
        Dynamics::Glauber => 1.0 / (1.0 + delta_h.exp()),
        Dynamics::Metropolis => {
            if delta_h <= 0.0 {
                1.0
            } else {
                (-delta_h).exp()
            }
        }
    }
}

/// Thinned record of block plus-counts along a chain.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    block_sizes: Counts,
    sample_sweeps: Vec<u64>,
    samples: Vec<MagnetizationPoint>,
    acceptance_rate: Option<f64>,
}

impl Trajectory {
    pub fn block_sizes(&self) -> &[usize] {
        &self.block_sizes
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn samples(&self) -> &[MagnetizationPoint] {
        &self.samples
    }

    pub fn sample_sweeps(&self) -> &[u64] {
        &self.sample_sweeps
    }

    /// Acceptance fraction; tracked for Metropolis only (heat-bath has no
    /// accept/reject notion).
    pub fn acceptance_rate(&self) -> Option<f64> {
        self.acceptance_rate
    }

    pub fn magnetization_vectors(&self) -> Vec<Vec<f64>> {
        self.samples
            .iter()
            .map(|p| p.magnetizations().to_vec())
            .collect()
    }

    pub fn mean_magnetization(&self, block: usize) -> f64 {
        let total: f64 = self
            .samples
            .iter()
            .map(|p| p.magnetizations()[block])
            .sum();
        total / self.samples.len() as f64
    }

    /// CSV of (sweep index, plus-counts per block).
    pub fn write_csv(&self, out: &mut dyn std::io::Write) -> std::io::Result<()> {
        write!(out, "sweep")?;
        for j in 0..self.block_sizes.len() {
            write!(out, ",k{}", j + 1)?;
        }
        writeln!(out)?;
        for (sweep, point) in self.sample_sweeps.iter().zip(&self.samples) {
            write!(out, "{sweep}")?;
            for &k in point.plus_counts() {
                write!(out, ",{k}")?;
            }
            writeln!(out)?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv is ascii")
    }
}

fn block_bounds(sizes: &[usize]) -> [usize; 4] {
    let mut bounds = [0usize; 4];
    for (j, &s) in sizes.iter().enumerate() {
        bounds[j + 1] = bounds[j] + s;
    }
    bounds
}

fn block_of(bounds: &[usize; 4], num_blocks: usize, site: usize) -> usize {
    (1..num_blocks).take_while(|&j| site >= bounds[j]).count()
}

/// Energy change of flipping `site`, in O(1) from block spin sums and (for
/// matching models) the partner spin.
fn delta_h(spec: &ModelSpec, spins: &[i8], sums: &[i64; 3], bounds: &[usize; 4], site: usize) -> f64 {
    let s = spins[site] as f64;
    match spec {
        ModelSpec::TwoBlock(m) => {
            let half = m.pairs();
            let t = sums[usize::from(site >= half)] as f64;
            let partner = if site < half { site + half } else { site - half };
            2.0 * m.beta() / m.n() as f64 * (s * t - 1.0)
                + 2.0 * m.alpha() * s * spins[partner] as f64
        }
        ModelSpec::Diluted(d) => {
            let half = d.pairs();
            let t = sums[usize::from(site >= half)] as f64;
            let mean_field = 2.0 * d.beta() / d.n() as f64 * (s * t - 1.0);
            if d.mask()[site % half] {
                let partner = if site < half { site + half } else { site - half };
                mean_field + 2.0 * d.alpha() * s * spins[partner] as f64
            } else {
                mean_field
            }
        }
        ModelSpec::ThreeBlock(m) => {
            let scale = m.cross_scale();
            if site >= bounds[1] && site < bounds[2] {
                2.0 * m.beta() / m.b() as f64 * (s * sums[1] as f64 - 1.0)
                    + 2.0 * m.alpha() * s * (sums[0] + sums[2]) as f64 / scale
            } else {
                let j = if site < bounds[1] { 0 } else { 2 };
                2.0 * m.beta() / m.n_outer() as f64 * (s * sums[j] as f64 - 1.0)
                    + 2.0 * m.alpha() * s * sums[1] as f64 / scale
            }
        }
    }
}

/// Incremental flip energy difference for an explicit configuration.
/// `run_chain` uses the same arithmetic internally; tests compare this
/// against full energy recomputation.
pub fn energy_difference(spec: &ModelSpec, config: &SpinConfig, site: usize) -> Result<f64> {
    if config.block_sizes() != spec.block_sizes().as_slice() {
        return Err(Error::ShapeMismatch(
            "configuration blocks do not match the model".into(),
        ));
    }
    if site >= spec.n_total() {
        return Err(Error::InvalidParameter(format!(
            "site {site} out of range for N = {}",
            spec.n_total()
        )));
    }
    let sizes = spec.block_sizes();
    let bounds = block_bounds(&sizes);
    let mut sums = [0i64; 3];
    for j in 0..sizes.len() {
        sums[j] = config.block_spin_sum(j);
    }
    Ok(delta_h(spec, config.spins(), &sums, &bounds, site))
}

/// Detailed-balance residual `|ln p(σ→σ') − ln p(σ'→σ) + H(σ') − H(σ)|` for
/// the single-flip move at `site`, with the energies recomputed from scratch.
/// Exact balance makes this vanish up to rounding.
pub fn detailed_balance_residual(
    spec: &ModelSpec,
    config: &SpinConfig,
    site: usize,
    dynamics: Dynamics,
) -> Result<f64> {
    let dh = energy_difference(spec, config, site)?;
    let forward = flip_probability(dh, dynamics).ln();
    let backward = flip_probability(-dh, dynamics).ln();
    let mut spins = config.spins().to_vec();
    spins[site] = -spins[site];
    let flipped = SpinConfig::new(spins, config.block_sizes())?;
    let e0 = spec.energy(config)?;
    let e1 = spec.energy(&flipped)?;
    Ok((forward - backward + (e1 - e0)).abs())
}

/// Uniformly random configuration of the given block layout.
pub fn random_config(block_sizes: &[usize], rng: &mut impl Rng) -> SpinConfig {
    let n: usize = block_sizes.iter().sum();
    let spins: Vec<i8> = (0..n).map(|_| if rng.random() { 1 } else { -1 }).collect();
    SpinConfig::new(spins, block_sizes).expect("layout is valid by construction")
}

/// Run one single-spin-flip chain. A sweep proposes `N` flips at uniformly
/// random sites; plus-counts are recorded every `thin` sweeps after burn-in.
pub fn run_chain(spec: &ModelSpec, chain: &ChainConfig) -> Result<Trajectory> {
    chain.validate()?;
    let sizes = spec.block_sizes();
    let num_blocks = sizes.len();
    let n = spec.n_total();
    let bounds = block_bounds(&sizes);
    let mut rng = chain.rng();

    let mut spins: Vec<i8> = match chain.init {
        Init::AllPlus => vec![1; n],
        Init::AllMinus => vec![-1; n],
        Init::Random => (0..n).map(|_| if rng.random() { 1 } else { -1 }).collect(),
    };
    let mut sums = [0i64; 3];
    for j in 0..num_blocks {
        sums[j] = spins[bounds[j]..bounds[j + 1]]
            .iter()
            .map(|&s| i64::from(s))
            .sum();
    }

    let kept = (chain.sweeps - chain.burn_in) / chain.thin;
    let mut samples = Vec::with_capacity(kept);
    let mut sample_sweeps = Vec::with_capacity(kept);
    let mut accepted = 0u64;

    for sweep in 1..=chain.sweeps {
        for _ in 0..n {
            let site = rng.random_range(0..n);
            let dh = delta_h(spec, &spins, &sums, &bounds, site);
            // One uniform per proposal keeps the random stream aligned
            // across dynamics choices.
            let u: f64 = rng.random();
            if u < flip_probability(dh, chain.dynamics) {
                let j = block_of(&bounds, num_blocks, site);
                sums[j] -= 2 * i64::from(spins[site]);
                spins[site] = -spins[site];
                accepted += 1;
            }
        }
        if sweep > chain.burn_in && (sweep - chain.burn_in) % chain.thin == 0 {
            let counts: Counts = (0..num_blocks)
                .map(|j| ((sums[j] + sizes[j] as i64) / 2) as usize)
                .collect();
            samples.push(MagnetizationPoint::new(&counts, &sizes)?);
            sample_sweeps.push(sweep as u64);
        }
    }

    let acceptance_rate = (chain.dynamics == Dynamics::Metropolis)
        .then(|| accepted as f64 / (chain.sweeps as u64 * n as u64) as f64);
    Ok(Trajectory {
        block_sizes: sizes,
        sample_sweeps,
        samples,
        acceptance_rate,
    })
}

// ---------------------------------------------------------------------------
// Quenched masks
// ---------------------------------------------------------------------------

/// A Bernoulli matching mask together with its count statistics.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MaskSample {
    pub mask: Vec<bool>,
    /// Number of retained pairs M.
    pub retained: usize,
    /// Mean retained count (N/2)·p.
    pub expected: f64,
    /// |M − (N/2)·p|.
    pub deviation: f64,
}

/// Draw the iid Bernoulli(p) matching mask for a system of `n_total` spins.
pub fn sample_mask(n_total: usize, p: f64, seed: u64) -> Result<MaskSample> {
    if n_total < 2 || n_total % 2 != 0 {
        return Err(Error::InvalidParameter(format!(
            "mask needs an even positive spin count, got {n_total}"
        )));
    }
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "retention probability must lie in (0, 1], got {p}"
        )));
    }
    let pairs = n_total / 2;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mask: Vec<bool> = (0..pairs).map(|_| rng.random::<f64>() < p).collect();
    let retained = mask.iter().filter(|&&e| e).count();
    let expected = pairs as f64 * p;
    Ok(MaskSample {
        deviation: (retained as f64 - expected).abs(),
        retained,
        expected,
        mask,
    })
}

pub fn mask_bitstring(mask: &[bool]) -> String {
    mask.iter().map(|&e| if e { '1' } else { '0' }).collect()
}

pub fn mask_from_bitstring(s: &str) -> Result<Vec<bool>> {
    s.trim()
        .chars()
        .map(|c| match c {
            '1' => Ok(true),
            '0' => Ok(false),
            other => Err(Error::Config(format!("mask bit {other:?} is not 0/1"))),
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Conditional-uniform sampling
// ---------------------------------------------------------------------------

/// Uniform draw from the configurations with exactly the given block
/// plus-counts (independent uniform placement within each block).
pub fn sample_conditional_uniform_with(
    point: &MagnetizationPoint,
    rng: &mut impl Rng,
) -> SpinConfig {
    let sizes = point.block_sizes();
    let mut spins = Vec::with_capacity(sizes.iter().sum());
    for (&k, &size) in point.plus_counts().iter().zip(sizes) {
        let mut block: Vec<i8> = (0..size).map(|i| if i < k { 1 } else { -1 }).collect();
        block.shuffle(rng);
        spins.extend_from_slice(&block);
    }
    SpinConfig::new(spins, sizes).expect("constructed with matching layout")
}

pub fn sample_conditional_uniform(point: &MagnetizationPoint, seed: u64) -> SpinConfig {
    sample_conditional_uniform_with(point, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// Two-equal-block convenience wrapper taking magnetizations instead of
/// counts.
pub fn sample_conditional_uniform_mu(
    n_total: usize,
    mu1: f64,
    mu2: f64,
    seed: u64,
) -> Result<SpinConfig> {
    let point = two_block_point(n_total, mu1, mu2)?;
    Ok(sample_conditional_uniform(&point, seed))
}

fn two_block_point(n_total: usize, mu1: f64, mu2: f64) -> Result<MagnetizationPoint> {
    if n_total == 0 || n_total % 2 != 0 {
        return Err(Error::InvalidParameter(format!(
            "two equal blocks need an even positive N, got {n_total}"
        )));
    }
    let half = n_total / 2;
    let a = plus_count_from_mu(half, mu1)?;
    let b = plus_count_from_mu(half, mu2)?;
    MagnetizationPoint::new(&[a, b], &[half, half])
}

// ---------------------------------------------------------------------------
// Thinned cross-term concentration
// ---------------------------------------------------------------------------

/// Empirical law of the retained-pair statistic
/// `(1/M) Σ_{mask} σ_i σ_{i+N/2} − μ₁μ₂` over independent (config, mask)
/// draws.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThinnedCrossReport {
    pub deviations: Vec<f64>,
    /// Draws whose mask retained nothing (statistic undefined).
    pub discarded: usize,
}

impl ThinnedCrossReport {
    pub fn draws(&self) -> usize {
        self.deviations.len() + self.discarded
    }

    pub fn mean_deviation(&self) -> f64 {
        self.deviations.iter().sum::<f64>() / self.deviations.len() as f64
    }

    /// Fraction of kept draws with |deviation| > eps.
    pub fn tail_frequency(&self, eps: f64) -> f64 {
        let hits = self.deviations.iter().filter(|d| d.abs() > eps).count();
        hits as f64 / self.deviations.len() as f64
    }
}

/// Sample configurations from the fixed-magnetization uniform law and masks
/// from Bernoulli(p) (one of each per seed; separate RNG streams), and report
/// the deviation statistic per draw.
pub fn thinned_cross_term_check(
    n_total: usize,
    mu1: f64,
    mu2: f64,
    p: f64,
    seeds: &[u64],
) -> Result<ThinnedCrossReport> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "retention probability must lie in (0, 1], got {p}"
        )));
    }
    let point = two_block_point(n_total, mu1, mu2)?;
    let half = n_total / 2;
    let mus = point.magnetizations();
    // Use the on-grid product so the statistic is exactly zero at μ = (1,1).
    let target = mus[0] * mus[1];
    let mut deviations = Vec::with_capacity(seeds.len());
    let mut discarded = 0usize;
    for &seed in seeds {
        let mut config_rng = ChaCha8Rng::seed_from_u64(seed);
        let config = sample_conditional_uniform_with(&point, &mut config_rng);
        let mut mask_rng = ChaCha8Rng::seed_from_u64(seed);
        mask_rng.set_stream(1);
        let spins = config.spins();
        let mut m = 0usize;
        let mut cross = 0i64;
        for i in 0..half {
            if mask_rng.random::<f64>() < p {
                m += 1;
                cross += i64::from(spins[i] * spins[i + half]);
            }
        }
        if m == 0 {
            discarded += 1;
        } else {
            deviations.push(cross as f64 / m as f64 - target);
        }
    }
    Ok(ThinnedCrossReport {
        deviations,
        discarded,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::paircount::pair_count_law;
    use crate::exact::tables::{exact_two_block, Budget};
    use crate::model::{DilutedSpec, ThreeBlockSpec, TwoBlockSpec};

    fn three_specs() -> Vec<ModelSpec> {
        vec![
            ModelSpec::TwoBlock(TwoBlockSpec::new(12, 4.0, 0.7).unwrap()),
            ModelSpec::Diluted(
                DilutedSpec::from_seed(TwoBlockSpec::new(12, 4.0, 0.7).unwrap(), 0.6, 3).unwrap(),
            ),
            ModelSpec::ThreeBlock(ThreeBlockSpec::new(4, 3, 1.6, 0.4).unwrap()),
        ]
    }

    #[test]
    fn chains_are_reproducible_and_thinned() {
        let spec = ModelSpec::TwoBlock(TwoBlockSpec::new(16, 4.0, 0.3).unwrap());
        let cfg = ChainConfig {
            seed: 9,
            sweeps: 500,
            burn_in: 100,
            thin: 4,
            ..ChainConfig::default()
        };
        let a = run_chain(&spec, &cfg).unwrap();
        let b = run_chain(&spec, &cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 100);
        assert_eq!(a.sample_sweeps().first(), Some(&104));
        assert_eq!(a.sample_sweeps().last(), Some(&500));
        assert!(a.acceptance_rate().is_none());

        let other_stream = ChainConfig {
            stream: 1,
            ..cfg.clone()
        };
        assert_ne!(a.samples(), run_chain(&spec, &other_stream).unwrap().samples());

        let metro = ChainConfig {
            dynamics: Dynamics::Metropolis,
            ..cfg
        };
        let rate = run_chain(&spec, &metro).unwrap().acceptance_rate().unwrap();
        assert!(rate > 0.0 && rate < 1.0);
    }

    #[test]
    fn invalid_chain_configs_are_rejected() {
        let spec = ModelSpec::TwoBlock(TwoBlockSpec::new(8, 4.0, 0.0).unwrap());
        let bad_sweeps = ChainConfig {
            sweeps: 100,
            burn_in: 100,
            ..ChainConfig::default()
        };
        assert!(run_chain(&spec, &bad_sweeps).is_err());
        let bad_thin = ChainConfig {
            thin: 0,
            ..ChainConfig::default()
        };
        assert!(run_chain(&spec, &bad_thin).is_err());
    }

    #[test]
    fn free_spins_have_symmetric_time_average() {
        // With all couplings zero the chain samples a product measure.
        let spec = ModelSpec::TwoBlock(TwoBlockSpec::new_unchecked(100, 0.0, 0.0));
        let cfg = ChainConfig {
            seed: 11,
            sweeps: 2000,
            burn_in: 0,
            ..ChainConfig::default()
        };
        let traj = run_chain(&spec, &cfg).unwrap();
        assert_eq!(traj.len(), 2000);
        let bound = 4.0 / ((traj.len() * 50) as f64).sqrt();
        assert!(traj.mean_magnetization(0).abs() < bound);
        assert!(traj.mean_magnetization(1).abs() < bound);
    }

    #[test]
    fn incremental_delta_matches_full_recomputation() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for spec in three_specs() {
            for _ in 0..200 {
                let config = random_config(&spec.block_sizes(), &mut rng);
                let site = rng.random_range(0..spec.n_total());
                let fast = energy_difference(&spec, &config, site).unwrap();
                let mut spins = config.spins().to_vec();
                spins[site] = -spins[site];
                let flipped = SpinConfig::new(spins, config.block_sizes()).unwrap();
                let slow = spec.energy(&flipped).unwrap() - spec.energy(&config).unwrap();
                assert!(
                    (fast - slow).abs() < 1e-9,
                    "{}: site {site}: {fast} vs {slow}",
                    spec.kind()
                );
            }
        }
    }

    #[test]
    fn detailed_balance_holds_for_both_dynamics() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for spec in three_specs() {
            for dynamics in [Dynamics::Glauber, Dynamics::Metropolis] {
                for _ in 0..500 {
                    let config = random_config(&spec.block_sizes(), &mut rng);
                    let site = rng.random_range(0..spec.n_total());
                    let residual =
                        detailed_balance_residual(&spec, &config, site, dynamics).unwrap();
                    assert!(residual < 1e-9, "{}: residual {residual}", spec.kind());
                }
            }
        }
    }

    #[test]
    fn corrupted_cross_sign_breaks_detailed_balance() {
        // Mutation check: flipping the sign of the matching term in ΔH must
        // be caught by the balance identity against recomputed energies.
        let two = TwoBlockSpec::new(8, 4.0, 0.5).unwrap();
        let spec = ModelSpec::TwoBlock(two.clone());
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let config = random_config(&spec.block_sizes(), &mut rng);
        let site = 2usize;
        let partner = site + two.pairs();
        let good = energy_difference(&spec, &config, site).unwrap();
        let cross =
            2.0 * two.alpha() * f64::from(config.spins()[site]) * f64::from(config.spins()[partner]);
        let corrupted = good - 2.0 * cross;

        let mut spins = config.spins().to_vec();
        spins[site] = -spins[site];
        let flipped = SpinConfig::new(spins, config.block_sizes()).unwrap();
        let true_dh = spec.energy(&flipped).unwrap() - spec.energy(&config).unwrap();
        for dynamics in [Dynamics::Glauber, Dynamics::Metropolis] {
            let residual = (flip_probability(corrupted, dynamics).ln()
                - flip_probability(-corrupted, dynamics).ln()
                + true_dh)
                .abs();
            assert!(residual > 1.0, "sign corruption went unnoticed: {residual}");
        }
    }

    #[test]
    fn small_system_histogram_matches_exact_law() {
        let two = TwoBlockSpec::new(8, 4.0, 0.5).unwrap();
        let spec = ModelSpec::TwoBlock(two.clone());
        let table = exact_two_block(&two, &Budget::default()).unwrap();
        let cfg = ChainConfig {
            seed: 5,
            sweeps: 1_000_000,
            burn_in: 1_000,
            ..ChainConfig::default()
        };
        let traj = run_chain(&spec, &cfg).unwrap();
        let mut hist = vec![0u64; table.len()];
        for p in traj.samples() {
            hist[table.index_of(p.plus_counts()).unwrap()] += 1;
        }
        let total = traj.len() as f64;
        let tv = 0.5
            * (0..table.len())
                .map(|idx| (hist[idx] as f64 / total - table.prob_at(idx)).abs())
                .sum::<f64>();
        assert!(tv <= 0.01, "TV {tv}");
    }

    #[test]
    fn trajectory_csv_is_stable() {
        let spec = ModelSpec::ThreeBlock(ThreeBlockSpec::new(3, 2, 1.5, 0.2).unwrap());
        let cfg = ChainConfig {
            seed: 1,
            sweeps: 12,
            burn_in: 9,
            ..ChainConfig::default()
        };
        let csv = run_chain(&spec, &cfg).unwrap().to_csv_string();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("sweep,k1,k2,k3"));
        assert_eq!(csv.lines().count(), 4);
        assert_eq!(csv, run_chain(&spec, &cfg).unwrap().to_csv_string());
    }

    #[test]
    fn mask_statistics_and_bitstrings() {
        let full = sample_mask(16, 1.0, 4).unwrap();
        assert_eq!(full.retained, 8);
        assert_eq!(full.deviation, 0.0);
        assert!(full.mask.iter().all(|&e| e));

        let a = sample_mask(1000, 0.3, 7).unwrap();
        let b = sample_mask(1000, 0.3, 7).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.mask, sample_mask(1000, 0.3, 8).unwrap().mask);
        assert_eq!(a.expected, 150.0);
        assert_eq!(a.deviation, (a.retained as f64 - 150.0).abs());

        let bits = mask_bitstring(&a.mask);
        assert_eq!(mask_from_bitstring(&bits).unwrap(), a.mask);
        assert!(mask_from_bitstring("0012").is_err());

        assert!(sample_mask(15, 0.5, 0).is_err());
        assert!(sample_mask(16, 0.0, 0).is_err());
        assert!(sample_mask(16, 1.5, 0).is_err());
    }

    #[test]
    fn mask_counts_concentrate() {
        // Chernoff-style check: relative deviation beyond 5% should be
        // essentially impossible at this size.
        let n = 1_000_000usize;
        let p = 0.5f64;
        let np = n as f64 * p;
        let mut bad = 0usize;
        for seed in 0..100u64 {
            let sample = sample_mask(n, p, seed).unwrap();
            if sample.deviation > 0.05 * np / 2.0 {
                bad += 1;
            }
        }
        let bound = 2.0 * (-0.0025 * np / 6.0).exp() * 10.0;
        assert!((bad as f64 / 100.0) <= bound);
    }

    #[test]
    fn conditional_uniform_hits_the_fiber_exactly() {
        let point = MagnetizationPoint::new(&[4, 1], &[6, 6]).unwrap();
        for seed in 0..50 {
            let config = sample_conditional_uniform(&point, seed);
            assert_eq!(config.magnetization(), point);
        }
        let three = MagnetizationPoint::new(&[2, 3, 0], &[5, 3, 5]).unwrap();
        assert_eq!(sample_conditional_uniform(&three, 1).magnetization(), three);

        assert!(sample_conditional_uniform_mu(8, 0.3, 0.0, 0).is_err());
        let cfg = sample_conditional_uniform_mu(8, 0.5, 0.0, 0).unwrap();
        let m = cfg.magnetization();
        assert_eq!(m.plus_counts(), &[3, 2]);
    }

    #[test]
    fn conditional_uniform_reproduces_pair_count_law() {
        // n_{++} over draws at N=8, μ=(0,0) against the counting law,
        // chi-square with 2 degrees of freedom at level 1e-3.
        let law = pair_count_law(8, 0.0, 0.0).unwrap();
        let point = MagnetizationPoint::new(&[2, 2], &[4, 4]).unwrap();
        let draws = 100_000usize;
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let mut observed = [0u64; 3];
        for _ in 0..draws {
            let config = sample_conditional_uniform_with(&point, &mut rng);
            let spins = config.spins();
            let n_pp = (0..4)
                .filter(|&i| spins[i] == 1 && spins[i + 4] == 1)
                .count();
            observed[n_pp] += 1;
        }
        let mut chi2 = 0.0;
        for n in 0..=2usize {
            let expected = draws as f64 * law.log_prob(n).exp();
            let diff = observed[n] as f64 - expected;
            chi2 += diff * diff / expected;
        }
        // 0.999 quantile of chi-square(2) = -2 ln(0.001).
        assert!(chi2 < -2.0 * 0.001f64.ln(), "chi2 {chi2}");
    }

    #[test]
    fn cross_term_concentrates_at_large_n() {
        let point = two_block_point(10_000, 0.9, 0.9).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(20);
        let draws = 1000usize;
        let mut mean = 0.0f64;
        for _ in 0..draws {
            let config = sample_conditional_uniform_with(&point, &mut rng);
            let spins = config.spins();
            let s: i64 = (0..5000).map(|i| i64::from(spins[i] * spins[i + 5000])).sum();
            mean += s as f64 / 10_000.0;
        }
        mean /= draws as f64;
        assert!((mean - 0.5 * 0.81).abs() < 0.01, "mean S/N {mean}");
    }

    #[test]
    fn thinned_statistic_with_full_retention() {
        let seeds: Vec<u64> = (0..200).collect();
        let report = thinned_cross_term_check(10_000, 0.9, 0.9, 1.0, &seeds).unwrap();
        assert_eq!(report.discarded, 0);
        assert_eq!(report.draws(), 200);
        assert!(report.mean_deviation().abs() < 0.01);
    }

    #[test]
    fn thinned_statistic_is_exact_at_saturated_magnetization() {
        let seeds: Vec<u64> = (0..50).collect();
        let report = thinned_cross_term_check(200, 1.0, 1.0, 0.3, &seeds).unwrap();
        for d in &report.deviations {
            assert_eq!(*d, 0.0);
        }
    }

    #[test]
    fn thinned_tail_frequency_decreases_with_n() {
        let seeds: Vec<u64> = (0..300).collect();
        let mut tails = Vec::new();
        for n in [1000usize, 10_000, 100_000] {
            let report = thinned_cross_term_check(n, 0.9, 0.9, 0.1, &seeds).unwrap();
            assert_eq!(report.discarded, 0);
            tails.push(report.tail_frequency(0.05));
        }
        assert!(tails[0] > tails[1], "{tails:?}");
        assert!(tails[1] > tails[2], "{tails:?}");
    }
}
