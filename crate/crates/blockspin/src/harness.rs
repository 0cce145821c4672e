//! Experiment driver: computes finite-size well masses along a growing list
//! of system sizes, compares them against the predicted limit law, and writes
//! CSV / JSON / SVG artifacts. Reruns with the same config are byte-identical
//! (wall-clock timings stay in memory and out of every artifact).

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{
    exact_table, well_masses_empirical, well_masses_exact, Budget, WellMassReport, WellSpec,
};
use crate::plot::LineChart;
use crate::predictions::{
    classify, limit_law, LimitLaw, RegimeClassification, ScheduleModel, ScheduleSpec,
    DEFAULT_AS_LOG_CONSTANT,
};
use crate::sampler::{run_chain, ChainConfig, Init};
use crate::util::sig12;

/// Total-variation distance between observed well masses and a limit law
/// whose atoms the wells were built around: half the l1 gap on the wells,
/// plus half the mass the law assigns nowhere (the residual).
pub fn tv_distance(observed: &WellMassReport, law: &LimitLaw) -> Result<f64> {
    if observed.well_masses.len() != law.weights.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} well masses vs {} limit atoms",
            observed.well_masses.len(),
            law.weights.len()
        )));
    }
    let gap: f64 = observed
        .well_masses
        .iter()
        .zip(&law.weights)
        .map(|(p, q)| (p - q).abs())
        .sum();
    Ok(0.5 * (gap + observed.residual_mass))
}

/// How well masses are computed at each size.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Full enumeration of the block-magnetization law; errors over budget.
    Exact,
    /// Monte Carlo chains, one per seed.
    Mcmc,
    /// Exact while it fits the budget, Monte Carlo beyond.
    #[default]
    Auto,
}

impl Method {
    pub fn label(self) -> &'static str {
        match self {
            Method::Exact => "exact",
            Method::Mcmc => "mcmc",
            Method::Auto => "auto",
        }
    }
}

fn default_seeds() -> Vec<u64> {
    vec![1, 2, 3, 4, 5]
}

fn default_as_log_constant() -> f64 {
    DEFAULT_AS_LOG_CONSTANT
}

/// Everything a convergence experiment needs. Deserializes from TOML with
/// defaults for all tuning knobs; `schedule` and `n_list` are required.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schedule: ScheduleSpec,
    /// System sizes, strictly increasing.
    pub n_list: Vec<usize>,
    #[serde(default)]
    pub method: Method,
    /// Half-width of the well boxes; defaults to a scale set by the limiting
    /// block magnetization.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wells_eps: Option<f64>,
    /// Explicit well centers; defaults to the limit law's atoms.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub well_centers: Option<Vec<Vec<f64>>>,
    /// One entry per Monte Carlo chain, and per dilution mask for diluted
    /// models (quenched averaging).
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    /// Chain shape for the Monte Carlo path; seed/stream/init are overridden
    /// per chain.
    #[serde(default)]
    pub chain: ChainConfig,
    #[serde(default)]
    pub budget: Budget,
    /// Constant in the `p(N)·N ≥ C·log N` mask-density growth condition;
    /// sizes below it get flagged in the report notes.
    #[serde(default = "default_as_log_constant")]
    pub as_log_constant: f64,
    /// Where to write rows.csv / report.json / config.toml / SVG plots.
    /// In-memory only when unset.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn new(schedule: ScheduleSpec, n_list: Vec<usize>) -> Self {
        Self {
            schedule,
            n_list,
            method: Method::default(),
            wells_eps: None,
            well_centers: None,
            seeds: default_seeds(),
            chain: ChainConfig::default(),
            budget: Budget::default(),
            as_log_constant: DEFAULT_AS_LOG_CONSTANT,
            output_dir: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.schedule.validate()?;
        self.chain.validate()?;
        if self.n_list.is_empty() {
            return Err(Error::InvalidParameter("n_list must not be empty".into()));
        }
        if !self.n_list.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::InvalidParameter(
                "n_list must be strictly increasing".into(),
            ));
        }
        if self.seeds.is_empty() {
            return Err(Error::InvalidParameter("seeds must not be empty".into()));
        }
        if let Some(eps) = self.wells_eps {
            if !(eps > 0.0 && eps.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "wells_eps must be positive and finite, got {eps}"
                )));
            }
        }
        if !(self.as_log_constant > 0.0 && self.as_log_constant.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "as_log_constant must be positive and finite, got {}",
                self.as_log_constant
            )));
        }
        Ok(())
    }
}

/// One size's worth of results.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub n: usize,
    /// Method actually used at this size (`auto` resolves before recording).
    pub method: Method,
    pub well_masses: Vec<f64>,
    pub residual_mass: f64,
    /// Distance to the limit law; absent when no law covers the schedule.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tv: Option<f64>,
    /// Wall-clock seconds; never serialized so reruns stay byte-identical.
    #[serde(skip)]
    pub wall_time_secs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentOutcome {
    pub schedule: ScheduleSpec,
    pub classification: RegimeClassification,
    pub well_centers: Vec<Vec<f64>>,
    pub wells_eps: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub law: Option<LimitLaw>,
    pub rows: Vec<ConvergenceRow>,
    pub notes: Vec<String>,
}

impl ExperimentOutcome {
    /// Fixed-layout CSV: size, one mass column per well, residual, distance
    /// to the limit law (empty when uncovered), method. Floats carry 12
    /// significant digits.
    pub fn rows_csv(&self) -> String {
        let mut out = String::from("N");
        for i in 1..=self.well_centers.len() {
            out.push_str(&format!(",mass_{i}"));
        }
        out.push_str(",residual,tv,method\n");
        for row in &self.rows {
            out.push_str(&row.n.to_string());
            for m in &row.well_masses {
                out.push(',');
                out.push_str(&sig12(*m));
            }
            out.push(',');
            out.push_str(&sig12(row.residual_mass));
            out.push(',');
            if let Some(tv) = row.tv {
                out.push_str(&sig12(tv));
            }
            out.push(',');
            out.push_str(row.method.label());
            out.push('\n');
        }
        out
    }

    fn masses_chart(&self) -> LineChart {
        let mut chart =
            LineChart::new("well masses vs system size", "N", "probability mass").with_log_x();
        for i in 0..self.well_centers.len() {
            let points = self
                .rows
                .iter()
                .map(|r| (r.n as f64, r.well_masses[i]))
                .collect();
            chart.add_series(format!("well {}", i + 1), points);
        }
        chart.add_series(
            "residual",
            self.rows
                .iter()
                .map(|r| (r.n as f64, r.residual_mass))
                .collect(),
        );
        chart
    }

    fn tv_chart(&self) -> LineChart {
        let mut chart = LineChart::new(
            "distance to the limit law",
            "N",
            "total variation",
        )
        .with_log_x();
        let points = self
            .rows
            .iter()
            .filter_map(|r| r.tv.map(|tv| (r.n as f64, tv)))
            .collect();
        chart.add_series("tv", points);
        chart
    }
}

fn sign_centers(m: f64, model: ScheduleModel) -> Vec<Vec<f64>> {
    // All ± sign combinations of the block magnetization, all-plus first --
    // the candidate phases when no single limit law is proven.
    let dim = match model {
        ScheduleModel::ThreeBlock => 3,
        _ => 2,
    };
    let mut centers = Vec::with_capacity(1 << dim);
    for bits in 0..1u32 << dim {
        let mut c = Vec::with_capacity(dim);
        for d in 0..dim {
            c.push(if bits >> d & 1 == 0 { m } else { -m });
        }
        centers.push(c);
    }
    centers
}

fn resolve_wells(config: &ExperimentConfig, law: Option<&LimitLaw>) -> Result<WellSpec> {
    let m_star = config.schedule.block_m_star()?;
    let centers = match (&config.well_centers, law) {
        (Some(centers), _) => centers.clone(),
        (None, Some(law)) => law.atoms.clone(),
        (None, None) => sign_centers(m_star, config.schedule.model),
    };
    let epsilon = config
        .wells_eps
        .unwrap_or_else(|| WellSpec::default_epsilon(m_star));
    WellSpec::new(centers, epsilon)
}

/// Index of each well's image under the global spin flip, or `None` if the
/// center set is not closed under it.
fn flip_partners(wells: &WellSpec) -> Option<Vec<usize>> {
    let centers = wells.centers();
    let mut partner = Vec::with_capacity(centers.len());
    for c in centers {
        let neg: Vec<f64> = c.iter().map(|x| -x).collect();
        partner.push(
            centers
                .iter()
                .position(|d| d.iter().zip(&neg).all(|(a, b)| a == b))?,
        );
    }
    Some(partner)
}

/// Average each well's empirical mass with its sign-flipped partner's. The
/// finite-size law is exactly flip-invariant, but a finite chain splits its
/// time unevenly between the two orbits; averaging removes that artifact
/// without touching the residual.
fn symmetrize_flip(report: &mut WellMassReport, wells: &WellSpec) {
    if let Some(partner) = flip_partners(wells) {
        let raw = report.well_masses.clone();
        for (i, mass) in report.well_masses.iter_mut().enumerate() {
            *mass = 0.5 * (raw[i] + raw[partner[i]]);
        }
    }
}

fn exact_masses_at(
    config: &ExperimentConfig,
    n: usize,
    wells: &WellSpec,
) -> Result<WellMassReport> {
    if config.schedule.model == ScheduleModel::Diluted {
        // Quenched average: one mask per seed, equal weight.
        let mut masses = vec![0.0; wells.centers().len()];
        let mut residual = 0.0;
        for &seed in &config.seeds {
            let spec = config.schedule.instantiate(n, seed)?;
            let report = well_masses_exact(&exact_table(&spec, &config.budget)?, wells)?;
            for (acc, m) in masses.iter_mut().zip(&report.well_masses) {
                *acc += m;
            }
            residual += report.residual_mass;
        }
        let k = config.seeds.len() as f64;
        for m in &mut masses {
            *m /= k;
        }
        Ok(WellMassReport {
            well_masses: masses,
            residual_mass: residual / k,
        })
    } else {
        let spec = config.schedule.instantiate(n, 0)?;
        well_masses_exact(&exact_table(&spec, &config.budget)?, wells)
    }
}

fn mcmc_masses_at(
    config: &ExperimentConfig,
    n: usize,
    wells: &WellSpec,
) -> Result<WellMassReport> {
    let trajectories = config
        .seeds
        .par_iter()
        .enumerate()
        .map(|(i, &seed)| {
            let spec = config.schedule.instantiate(n, seed)?;
            let chain = ChainConfig {
                seed,
                stream: i as u64,
                // Alternate ordered starts so both aligned wells are seeded
                // even before the chains cross between them.
                init: if i % 2 == 0 {
                    Init::AllPlus
                } else {
                    Init::AllMinus
                },
                ..config.chain.clone()
            };
            run_chain(&spec, &chain)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut points = Vec::new();
    for trajectory in &trajectories {
        points.extend(trajectory.magnetization_vectors());
    }
    let mut report = well_masses_empirical(&points, wells)?;
    symmetrize_flip(&mut report, wells);
    Ok(report)
}

fn masses_at(
    config: &ExperimentConfig,
    n: usize,
    wells: &WellSpec,
) -> Result<(WellMassReport, Method)> {
    match config.method {
        Method::Exact => Ok((exact_masses_at(config, n, wells)?, Method::Exact)),
        Method::Mcmc => Ok((mcmc_masses_at(config, n, wells)?, Method::Mcmc)),
        Method::Auto => match exact_masses_at(config, n, wells) {
            Ok(report) => Ok((report, Method::Exact)),
            Err(Error::BudgetExceeded { .. }) => {
                Ok((mcmc_masses_at(config, n, wells)?, Method::Mcmc))
            }
            Err(e) => Err(e),
        },
    }
}

/// Run the full convergence experiment described by `config`, writing
/// artifacts to `config.output_dir` when set.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentOutcome> {
    config.validate()?;
    let classification = classify(&config.schedule)?;
    let law = if classification.covered {
        Some(limit_law(&config.schedule)?)
    } else {
        None
    };
    let wells = resolve_wells(config, law.as_ref())?;

    let mut notes = vec![classification.note.clone()];
    if !classification.covered {
        notes.push(
            "no proven limit law for this schedule: wells cover every sign combination and the tv column stays empty"
                .into(),
        );
    }
    if config.schedule.model == ScheduleModel::Diluted {
        let thin: Vec<usize> = config
            .n_list
            .iter()
            .copied()
            .filter(|&n| {
                let p = config.schedule.dilution_at(n).unwrap_or(0.0);
                p * n as f64 > 0.0
                    && p * n as f64 <= config.as_log_constant * (n as f64).ln()
            })
            .collect();
        if !thin.is_empty() {
            notes.push(format!(
                "mask density below the {}·ln N growth threshold at N = {:?}: quenched masses at these sizes hinge on few retained pairs",
                config.as_log_constant, thin
            ));
        }
    }

    let mut rows = Vec::with_capacity(config.n_list.len());
    let mut used_mcmc = false;
    for &n in &config.n_list {
        let start = Instant::now();
        let (report, method) = masses_at(config, n, &wells)?;
        let total = report.total();
        assert!(
            (total - 1.0).abs() <= 1e-9,
            "well masses and residual must sum to 1, got {total}"
        );
        used_mcmc |= method == Method::Mcmc;
        let tv = match &law {
            Some(law) => Some(tv_distance(&report, law)?),
            None => None,
        };
        rows.push(ConvergenceRow {
            n,
            method,
            well_masses: report.well_masses,
            residual_mass: report.residual_mass,
            tv,
            wall_time_secs: start.elapsed().as_secs_f64(),
        });
    }
    if used_mcmc {
        notes.push(
            "mcmc masses are averaged over the global spin flip; ratios between wells not related by that flip converge only as fast as the chains mix"
                .into(),
        );
    }

    let outcome = ExperimentOutcome {
        schedule: config.schedule.clone(),
        classification,
        well_centers: wells.centers().to_vec(),
        wells_eps: wells.epsilon(),
        law,
        rows,
        notes,
    };
    if let Some(dir) = &config.output_dir {
        write_artifacts(config, &outcome, dir)?;
    }
    Ok(outcome)
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn write_artifacts(
    config: &ExperimentConfig,
    outcome: &ExperimentOutcome,
    dir: &Path,
) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    write_text(&dir.join("rows.csv"), &outcome.rows_csv())?;
    let mut report = serde_json::to_string_pretty(outcome)
        .map_err(|e| Error::Config(format!("report serialization failed: {e}")))?;
    report.push('\n');
    write_text(&dir.join("report.json"), &report)?;
    // Echo the fully resolved config (defaults included) next to the results.
    let echo = toml::to_string_pretty(config)
        .map_err(|e| Error::Config(format!("config serialization failed: {e}")))?;
    write_text(&dir.join("config.toml"), &echo)?;
    write_text(
        &dir.join("masses_vs_n.svg"),
        &outcome.masses_chart().render_svg(),
    )?;
    if outcome.rows.iter().any(|r| r.tv.is_some()) {
        write_text(&dir.join("tv_vs_n.svg"), &outcome.tv_chart().render_svg())?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn law_from_weights(weights: Vec<f64>) -> LimitLaw {
        let atoms = (0..weights.len())
            .map(|i| vec![i as f64, -(i as f64)])
            .collect();
        LimitLaw { atoms, weights }
    }

    fn report(masses: Vec<f64>, residual: f64) -> WellMassReport {
        WellMassReport {
            well_masses: masses,
            residual_mass: residual,
        }
    }

    #[test]
    fn tv_distance_matches_hand_computation() {
        let law = law_from_weights(vec![0.5, 0.5]);
        let obs = report(vec![0.4, 0.45], 0.15);
        // 0.5·(0.1 + 0.05) + 0.5·0.15
        assert!((tv_distance(&obs, &law).unwrap() - 0.15).abs() < 1e-15);

        let mismatched = report(vec![1.0], 0.0);
        assert!(matches!(
            tv_distance(&mismatched, &law),
            Err(Error::ShapeMismatch(_))
        ));
    }

    #[test]
    fn tv_distance_is_a_metric_on_full_support_masses() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut random_masses = || {
            let raw: Vec<f64> = (0..4).map(|_| rng.random::<f64>() + 1e-3).collect();
            let total: f64 = raw.iter().sum();
            raw.into_iter().map(|x| x / total).collect::<Vec<f64>>()
        };
        for _ in 0..50 {
            let (p, q, r) = (random_masses(), random_masses(), random_masses());
            let d = |a: &Vec<f64>, b: &Vec<f64>| {
                tv_distance(&report(a.clone(), 0.0), &law_from_weights(b.clone())).unwrap()
            };
            assert!((d(&p, &q) - d(&q, &p)).abs() < 1e-15);
            assert!(d(&p, &p) < 1e-15);
            assert!(d(&p, &r) <= d(&p, &q) + d(&q, &r) + 1e-15);
            assert!(d(&p, &q) <= 1.0);
        }
    }

    #[test]
    fn exact_two_block_experiment_tracks_the_limit_law() {
        let schedule = ScheduleSpec::two_block(4.0, 1.0, 0.5).unwrap();
        let mut config = ExperimentConfig::new(schedule, vec![40, 80, 160]);
        config.method = Method::Exact;
        let outcome = run_experiment(&config).unwrap();

        assert!(outcome.classification.covered);
        assert_eq!(outcome.law.as_ref().unwrap().weights, vec![0.5, 0.5]);
        assert_eq!(outcome.rows.len(), 3);
        for row in &outcome.rows {
            assert_eq!(row.method, Method::Exact);
            let total = row.well_masses.iter().sum::<f64>() + row.residual_mass;
            assert!((total - 1.0).abs() < 1e-12);
            // Exactly flip-symmetric law, flip-paired wells.
            assert!((row.well_masses[0] - row.well_masses[1]).abs() < 1e-12);
        }
        let tvs: Vec<f64> = outcome.rows.iter().map(|r| r.tv.unwrap()).collect();
        assert!(tvs[2] < tvs[1] && tvs[1] < tvs[0], "tv not decreasing: {tvs:?}");
    }

    #[test]
    fn auto_method_falls_back_to_mcmc_over_budget() {
        let schedule = ScheduleSpec::two_block(4.0, 1.0, 0.5).unwrap();
        let mut config = ExperimentConfig::new(schedule, vec![16]);
        config.budget.max_two_block_n = 10;
        config.seeds = vec![1, 2];
        config.chain.sweeps = 3_000;
        config.chain.burn_in = 500;
        let outcome = run_experiment(&config).unwrap();
        assert_eq!(outcome.rows[0].method, Method::Mcmc);
        let total = outcome.rows[0].well_masses.iter().sum::<f64>()
            + outcome.rows[0].residual_mass;
        assert!((total - 1.0).abs() < 1e-9);
        // Flip averaging makes paired wells exactly equal.
        assert_eq!(
            outcome.rows[0].well_masses[0],
            outcome.rows[0].well_masses[1]
        );
        assert!(outcome.notes.iter().any(|n| n.contains("mcmc")));

        config.method = Method::Exact;
        assert!(matches!(
            run_experiment(&config),
            Err(Error::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn uncovered_schedule_reports_masses_without_tv() {
        // N·alpha_N → 1: between the decoupled and aligned regimes.
        let schedule = ScheduleSpec::two_block(4.0, 1.0, 1.0).unwrap();
        let mut config = ExperimentConfig::new(schedule, vec![12]);
        config.method = Method::Exact;
        let outcome = run_experiment(&config).unwrap();
        assert!(!outcome.classification.covered);
        assert!(outcome.law.is_none());
        assert_eq!(outcome.well_centers.len(), 4);
        assert!(outcome.rows[0].tv.is_none());
        assert!(outcome.notes.iter().any(|n| n.contains("no proven limit law")));
        assert!(!outcome.rows_csv().contains("auto"));
    }

    #[test]
    fn diluted_experiment_averages_masks_and_flags_sparse_ones() {
        let schedule = ScheduleSpec::diluted(4.0, 1.0, 0.2, 1.0, 0.9).unwrap();
        let mut config = ExperimentConfig::new(schedule, vec![20]);
        config.method = Method::Exact;
        config.seeds = vec![1, 2, 3];
        let outcome = run_experiment(&config).unwrap();
        // p(20)·20 = 20^0.1 ≈ 1.35 < ln 20 ≈ 3.0: sparse-mask note fires.
        assert!(outcome.notes.iter().any(|n| n.contains("mask density")));
        let total = outcome.rows[0].well_masses.iter().sum::<f64>()
            + outcome.rows[0].residual_mass;
        assert!((total - 1.0).abs() < 1e-12);
        assert!(outcome.rows[0].tv.is_some());
    }

    #[test]
    fn artifacts_rerun_byte_identical() {
        let dir = tempfile::tempdir().unwrap();
        let schedule = ScheduleSpec::two_block(4.0, 1.0, 0.5).unwrap();
        let mut config = ExperimentConfig::new(schedule, vec![20, 40]);
        config.method = Method::Exact;
        config.output_dir = Some(dir.path().to_path_buf());
        run_experiment(&config).unwrap();

        let names = ["rows.csv", "report.json", "config.toml", "masses_vs_n.svg", "tv_vs_n.svg"];
        let first: Vec<Vec<u8>> = names
            .iter()
            .map(|n| fs::read(dir.path().join(n)).unwrap())
            .collect();
        run_experiment(&config).unwrap();
        for (name, bytes) in names.iter().zip(&first) {
            assert_eq!(&fs::read(dir.path().join(name)).unwrap(), bytes, "{name} changed");
        }

        let csv = String::from_utf8(first[0].clone()).unwrap();
        assert!(csv.starts_with("N,mass_1,mass_2,residual,tv,method\n"));
        assert_eq!(csv.lines().count(), 3);
        let json: serde_json::Value =
            serde_json::from_slice(&first[1]).unwrap();
        assert_eq!(json["rows"].as_array().unwrap().len(), 2);
        assert!(json["rows"][0].get("wall_time_secs").is_none());
        let echoed: ExperimentConfig =
            toml::from_str(std::str::from_utf8(&first[2]).unwrap()).unwrap();
        assert_eq!(echoed, config);
    }
}
