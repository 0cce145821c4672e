//! Coupling-schedule classification and predicted limit laws of the block
//! magnetizations.
//!
//! Regimes are decided symbolically from the power-law exponents — never by
//! numerically extrapolating sequences — with the constants `c` and `C`
//! computed from the prefactors exactly when an exponent vanishes.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::wells::WellSpec;
use crate::fixedpoint::{m_of_c, solve_cw, LimitConstant};
use crate::model::{DilutedSpec, ModelSpec, ThreeBlockSpec, TwoBlockSpec};

/// Exponent window treated as exactly zero when deciding whether a power-law
/// sequence tends to 0, ∞, or its prefactor.
const EXPONENT_TOL: f64 = 1e-12;

/// Default constant in the `p(N)·N ≥ C·log N` mask-density growth condition
/// that backs the almost-sure convergence flag; the theory fixes no value.
pub const DEFAULT_AS_LOG_CONSTANT: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScheduleModel {
    TwoBlock,
    Diluted,
    ThreeBlock,
}

/// Power-law coupling schedule: `alpha_N = A·N^(-rho)`, plus
/// `b_N = max(1, floor(B·N^gamma))` for the three-block model and
/// `p(N) = min(1, P·N^(-pi))` for the diluted one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleSpec {
    pub model: ScheduleModel,
    pub beta: f64,
    #[serde(rename = "A")]
    pub a: f64,
    pub rho: f64,
    #[serde(rename = "B", default, skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(rename = "P", default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pi: Option<f64>,
}

impl ScheduleSpec {
    pub fn two_block(beta: f64, a: f64, rho: f64) -> Result<Self> {
        let s = Self {
            model: ScheduleModel::TwoBlock,
            beta,
            a,
            rho,
            b: None,
            gamma: None,
            p: None,
            pi: None,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn diluted(beta: f64, a: f64, rho: f64, p: f64, pi: f64) -> Result<Self> {
        let s = Self {
            model: ScheduleModel::Diluted,
            beta,
            a,
            rho,
            b: None,
            gamma: None,
            p: Some(p),
            pi: Some(pi),
        };
        s.validate()?;
        Ok(s)
    }

    pub fn three_block(beta: f64, a: f64, rho: f64, b: f64, gamma: f64) -> Result<Self> {
        let s = Self {
            model: ScheduleModel::ThreeBlock,
            beta,
            a,
            rho,
            b: Some(b),
            gamma: Some(gamma),
            p: None,
            pi: None,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.a > 0.0) || !self.a.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "prefactor A = {} must be finite and positive",
                self.a
            )));
        }
        if !(self.rho > 0.0) || !self.rho.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "rho = {} must be positive: the coupling must vanish",
                self.rho
            )));
        }
        let forbid = |name: &str, present: bool| {
            if present {
                Err(Error::InvalidParameter(format!(
                    "{name} does not apply to the {:?} schedule",
                    self.model
                )))
            } else {
                Ok(())
            }
        };
        match self.model {
            ScheduleModel::TwoBlock | ScheduleModel::Diluted => {
                if !(self.beta > 2.0) {
                    return Err(Error::InvalidParameter(format!(
                        "beta = {} must exceed 2 so each half is supercritical",
                        self.beta
                    )));
                }
                forbid("B", self.b.is_some())?;
                forbid("gamma", self.gamma.is_some())?;
                if self.model == ScheduleModel::TwoBlock {
                    forbid("P", self.p.is_some())?;
                    forbid("pi", self.pi.is_some())?;
                } else {
                    let p = self
                        .p
                        .ok_or_else(|| Error::InvalidParameter("diluted schedule needs P".into()))?;
                    let pi = self.pi.ok_or_else(|| {
                        Error::InvalidParameter("diluted schedule needs pi".into())
                    })?;
                    if !(p > 0.0) || !p.is_finite() {
                        return Err(Error::InvalidParameter(format!(
                            "prefactor P = {p} must be finite and positive"
                        )));
                    }
                    if !(pi >= 0.0) || !pi.is_finite() {
                        return Err(Error::InvalidParameter(format!(
                            "pi = {pi} must be finite and nonnegative"
                        )));
                    }
                }
            }
            ScheduleModel::ThreeBlock => {
                if !(self.beta > 1.0) {
                    return Err(Error::InvalidParameter(format!(
                        "beta = {} must exceed 1 so each block is supercritical",
                        self.beta
                    )));
                }
                forbid("P", self.p.is_some())?;
                forbid("pi", self.pi.is_some())?;
                let b = self
                    .b
                    .ok_or_else(|| Error::InvalidParameter("three-block schedule needs B".into()))?;
                let gamma = self.gamma.ok_or_else(|| {
                    Error::InvalidParameter("three-block schedule needs gamma".into())
                })?;
                if !(b > 0.0) || !b.is_finite() {
                    return Err(Error::InvalidParameter(format!(
                        "prefactor B = {b} must be finite and positive"
                    )));
                }
                // gamma = 0 would freeze the middle block size, which the
                // limit laws exclude (b_N must grow); gamma >= 1 would stop
                // it from being asymptotically negligible.
                if !(gamma > 0.0 && gamma < 1.0) {
                    return Err(Error::InvalidParameter(format!(
                        "gamma = {gamma} must lie strictly inside (0, 1)"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn alpha_at(&self, n: usize) -> f64 {
        self.a * (n as f64).powf(-self.rho)
    }

    /// Middle-block size `b_N` (three-block schedules).
    pub fn block_size_at(&self, n: usize) -> Result<usize> {
        let (b, gamma) = match (self.model, self.b, self.gamma) {
            (ScheduleModel::ThreeBlock, Some(b), Some(g)) => (b, g),
            _ => {
                return Err(Error::InvalidParameter(
                    "only three-block schedules have a middle-block size".into(),
                ))
            }
        };
        Ok(((b * (n as f64).powf(gamma)).floor() as usize).max(1))
    }

    /// Mask retention probability `p(N)` (diluted schedules).
    pub fn dilution_at(&self, n: usize) -> Result<f64> {
        let (p, pi) = match (self.model, self.p, self.pi) {
            (ScheduleModel::Diluted, Some(p), Some(pi)) => (p, pi),
            _ => {
                return Err(Error::InvalidParameter(
                    "only diluted schedules have a retention probability".into(),
                ))
            }
        };
        Ok((p * (n as f64).powf(-pi)).min(1.0))
    }

    /// Concrete finite-size model at total size `n`. The mask seed is used
    /// by diluted schedules and ignored otherwise.
    pub fn instantiate(&self, n: usize, mask_seed: u64) -> Result<ModelSpec> {
        self.validate()?;
        match self.model {
            ScheduleModel::TwoBlock => Ok(ModelSpec::TwoBlock(TwoBlockSpec::new(
                n,
                self.beta,
                self.alpha_at(n),
            )?)),
            ScheduleModel::Diluted => {
                let base = TwoBlockSpec::new(n, self.beta, self.alpha_at(n))?;
                Ok(ModelSpec::Diluted(DilutedSpec::from_seed(
                    base,
                    self.dilution_at(n)?,
                    mask_seed,
                )?))
            }
            ScheduleModel::ThreeBlock => {
                let b = self.block_size_at(n)?;
                if n <= b || (n - b) % 2 != 0 {
                    return Err(Error::Inadmissible(format!(
                        "N = {n} leaves no integer outer-block size for b_N = {b}; \
                         adjust N by one"
                    )));
                }
                Ok(ModelSpec::ThreeBlock(ThreeBlockSpec::new(
                    (n - b) / 2,
                    b,
                    self.beta,
                    self.alpha_at(n),
                )?))
            }
        }
    }

    /// Spontaneous magnetization of a single block in the decoupled limit.
    pub fn block_m_star(&self) -> Result<f64> {
        let gamma = match self.model {
            // Each half of a two-block system is Curie–Weiss at beta/2.
            ScheduleModel::TwoBlock | ScheduleModel::Diluted => self.beta / 2.0,
            ScheduleModel::ThreeBlock => self.beta,
        };
        Ok(solve_cw(gamma)?.value)
    }
}

/// Limit of `prefactor · N^exponent`, decided from the exponent sign.
fn power_limit(prefactor: f64, exponent: f64) -> LimitConstant {
    if exponent > EXPONENT_TOL {
        LimitConstant::Infinite
    } else if exponent < -EXPONENT_TOL {
        LimitConstant::Finite(0.0)
    } else {
        LimitConstant::Finite(prefactor)
    }
}

/// The limiting regimes with a proven limit law.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LimitRegime {
    /// `N·alpha_N → ∞`: the two blocks align; two atoms.
    TwoBlockAligned,
    /// `N·alpha_N → 0`: the blocks decouple; four atoms of weight 1/4.
    TwoBlockDecoupled,
    /// `p(N)·N·alpha_N → ∞`: alignment survives dilution (quenched).
    DilutedAligned,
    /// `p(N)·N·alpha_N → 0`: dilution kills the coupling (quenched).
    DilutedDecoupled,
    /// `alpha_N·sqrt(N/b_N) → ∞`: the middle block saturates at ±1.
    ThreeBlockPinnedMiddle,
    /// `alpha_N·sqrt(N/b_N) → c ∈ (0,∞)`: the middle block feels an
    /// effective field `sqrt(2)·c·m*`.
    ThreeBlockMiddleField,
    /// `alpha_N·sqrt(N/b_N) → 0` but `alpha_N·sqrt(b_N·N) → ∞`: all three
    /// blocks align at ±m*.
    ThreeBlockFullyAligned,
    /// `alpha_N·sqrt(b_N·N) → C ∈ (0,∞)`: eight sign atoms with
    /// C-dependent weights.
    ThreeBlockWeightedSigns,
    /// `alpha_N·sqrt(b_N·N) → 0`: three independent sign choices, 1/8 each.
    ThreeBlockIndependentSigns,
}

/// Outcome of the symbolic regime decision.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegimeClassification {
    pub case: Option<LimitRegime>,
    pub covered: bool,
    /// `lim N·alpha_N` (two-block).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_alpha_limit: Option<LimitConstant>,
    /// `lim p(N)·N·alpha_N` (diluted).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pn_alpha_limit: Option<LimitConstant>,
    /// `lim alpha_N·sqrt(N/b_N)` (three-block).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c_limit: Option<LimitConstant>,
    /// `lim alpha_N·sqrt(b_N·N)` (three-block).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub big_c_limit: Option<LimitConstant>,
    /// Whether the mask grows fast enough (`p(N)·N / log N → ∞`) for the
    /// almost-sure version of the diluted limit to be plausible.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub as_convergence_plausible: Option<bool>,
    pub note: String,
}

impl RegimeClassification {
    fn uncovered(note: impl Into<String>) -> Self {
        Self {
            case: None,
            covered: false,
            n_alpha_limit: None,
            pn_alpha_limit: None,
            c_limit: None,
            big_c_limit: None,
            as_convergence_plausible: None,
            note: note.into(),
        }
    }

    fn covered(case: LimitRegime, note: impl Into<String>) -> Self {
        Self {
            case: Some(case),
            covered: true,
            n_alpha_limit: None,
            pn_alpha_limit: None,
            c_limit: None,
            big_c_limit: None,
            as_convergence_plausible: None,
            note: note.into(),
        }
    }
}

/// Decide the limiting regime of a schedule from its exponents.
pub fn classify(schedule: &ScheduleSpec) -> Result<RegimeClassification> {
    schedule.validate()?;
    Ok(match schedule.model {
        ScheduleModel::TwoBlock => {
            let lim = power_limit(schedule.a, 1.0 - schedule.rho);
            let mut c = match lim {
                LimitConstant::Infinite => RegimeClassification::covered(
                    LimitRegime::TwoBlockAligned,
                    "N·alpha_N → ∞: matching dominates",
                ),
                LimitConstant::Finite(v) if v == 0.0 => RegimeClassification::covered(
                    LimitRegime::TwoBlockDecoupled,
                    "N·alpha_N → 0: matching vanishes",
                ),
                LimitConstant::Finite(v) => RegimeClassification::uncovered(format!(
                    "N·alpha_N → {v}: finite nonzero coupling limits are not covered"
                )),
            };
            c.n_alpha_limit = Some(lim);
            c
        }
        ScheduleModel::Diluted => {
            let (p, pi) = (schedule.p.unwrap(), schedule.pi.unwrap());
            // For pi > 0 the min(1, ·) clamp is eventually inactive; at
            // pi = 0 the retention stays at the clamped constant.
            let eff_p = if pi > 0.0 { p } else { p.min(1.0) };
            let lim = power_limit(schedule.a * eff_p, 1.0 - schedule.rho - pi);
            let plausible = pi < 1.0;
            let mut c = if pi >= 1.0 {
                RegimeClassification::uncovered(format!(
                    "p(N)·N must diverge for the quenched limits, but pi = {pi} ≥ 1"
                ))
            } else {
                match lim {
                    LimitConstant::Infinite => RegimeClassification::covered(
                        LimitRegime::DilutedAligned,
                        "p(N)·N·alpha_N → ∞: diluted matching dominates",
                    ),
                    LimitConstant::Finite(v) if v == 0.0 => RegimeClassification::covered(
                        LimitRegime::DilutedDecoupled,
                        "p(N)·N·alpha_N → 0: diluted matching vanishes",
                    ),
                    LimitConstant::Finite(v) => RegimeClassification::uncovered(format!(
                        "p(N)·N·alpha_N → {v}: finite nonzero coupling limits are not covered"
                    )),
                }
            };
            c.pn_alpha_limit = Some(lim);
            c.as_convergence_plausible = Some(plausible);
            c
        }
        ScheduleModel::ThreeBlock => {
            let (b, gamma) = (schedule.b.unwrap(), schedule.gamma.unwrap());
            let c_lim = power_limit(schedule.a / b.sqrt(), -schedule.rho + (1.0 - gamma) / 2.0);
            let big_c_lim = power_limit(schedule.a * b.sqrt(), -schedule.rho + (1.0 + gamma) / 2.0);
            let mut c = match (c_lim, big_c_lim) {
                (LimitConstant::Infinite, _) => RegimeClassification::covered(
                    LimitRegime::ThreeBlockPinnedMiddle,
                    "alpha_N·sqrt(N/b_N) → ∞: outer blocks pin the middle at ±1",
                ),
                (LimitConstant::Finite(c), _) if c > 0.0 => RegimeClassification::covered(
                    LimitRegime::ThreeBlockMiddleField,
                    format!("alpha_N·sqrt(N/b_N) → {c}: middle block in field sqrt(2)·c·m*"),
                ),
                (_, LimitConstant::Infinite) => RegimeClassification::covered(
                    LimitRegime::ThreeBlockFullyAligned,
                    "alpha_N·sqrt(b_N·N) → ∞: all blocks align",
                ),
                (_, LimitConstant::Finite(v)) if v > 0.0 => RegimeClassification::covered(
                    LimitRegime::ThreeBlockWeightedSigns,
                    format!("alpha_N·sqrt(b_N·N) → {v}: weighted sign mixture"),
                ),
                _ => RegimeClassification::covered(
                    LimitRegime::ThreeBlockIndependentSigns,
                    "alpha_N·sqrt(b_N·N) → 0: blocks decouple",
                ),
            };
            c.c_limit = Some(c_lim);
            c.big_c_limit = Some(big_c_lim);
            c
        }
    })
}

/// Weight of the sign vector `(chi1, chi2, chi3)` in the weighted-signs
/// three-block limit with constant `C`, at inverse temperature `beta`.
pub fn a_weight(chi1: i8, chi2: i8, chi3: i8, big_c: LimitConstant, beta: f64) -> Result<f64> {
    for chi in [chi1, chi2, chi3] {
        if chi != 1 && chi != -1 {
            return Err(Error::InvalidParameter(format!(
                "sign {chi} must be +1 or -1"
            )));
        }
    }
    let m_star = solve_cw(beta)?.value;
    if m_star == 0.0 {
        return Err(Error::InvalidParameter(format!(
            "beta = {beta} must exceed 1 for a nonzero block magnetization"
        )));
    }
    let all_equal = chi1 == chi2 && chi2 == chi3;
    match big_c {
        LimitConstant::Infinite => Ok(if all_equal { 0.5 } else { 0.0 }),
        LimitConstant::Finite(c) => {
            if !(c >= 0.0) || !c.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "C = {c} must be nonnegative"
                )));
            }
            let q = (-std::f64::consts::SQRT_2 * c * m_star * m_star).exp();
            let norm = 2.0 * (1.0 + q) * (1.0 + q);
            Ok(if all_equal {
                1.0 / norm
            } else if chi1 == chi3 {
                // Outer blocks agree against the middle one.
                q * q / norm
            } else {
                q / norm
            })
        }
    }
}

/// The eight sign vectors in lexicographically decreasing order.
pub fn sign_vectors() -> [[i8; 3]; 8] {
    [
        [1, 1, 1],
        [1, 1, -1],
        [1, -1, 1],
        [1, -1, -1],
        [-1, 1, 1],
        [-1, 1, -1],
        [-1, -1, 1],
        [-1, -1, -1],
    ]
}

/// A finite mixture of point masses in magnetization space. Atoms are listed
/// in lexicographically decreasing coordinate order (all-plus first).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitLaw {
    pub atoms: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
}

impl LimitLaw {
    fn two_atoms(plus: Vec<f64>) -> Self {
        let minus = plus.iter().map(|x| -x).collect();
        Self {
            atoms: vec![plus, minus],
            weights: vec![0.5, 0.5],
        }
    }

    pub fn dim(&self) -> usize {
        self.atoms.first().map_or(0, Vec::len)
    }

    pub fn num_atoms(&self) -> usize {
        self.atoms.len()
    }

    /// Weight of the flip image of atom `i` (exact coordinate negation).
    pub fn flipped_weight(&self, i: usize) -> Option<f64> {
        let target: Vec<f64> = self.atoms[i].iter().map(|x| -x).collect();
        self.atoms
            .iter()
            .position(|a| a.iter().zip(&target).all(|(x, y)| x == y))
            .map(|j| self.weights[j])
    }

    /// Wells of half-width `epsilon` centered at the atoms.
    pub fn well_spec(&self, epsilon: f64) -> Result<WellSpec> {
        WellSpec::new(self.atoms.clone(), epsilon)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("law serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("limit law JSON: {e}")))
    }
}

/// The proven limit law for a covered schedule.
pub fn limit_law(schedule: &ScheduleSpec) -> Result<LimitLaw> {
    let classification = classify(schedule)?;
    let Some(case) = classification.case else {
        return Err(Error::UncoveredRegime(classification.note));
    };
    let m = schedule.block_m_star()?;
    Ok(match case {
        LimitRegime::TwoBlockAligned | LimitRegime::DilutedAligned => {
            LimitLaw::two_atoms(vec![m, m])
        }
        LimitRegime::TwoBlockDecoupled | LimitRegime::DilutedDecoupled => LimitLaw {
            atoms: vec![vec![m, m], vec![m, -m], vec![-m, m], vec![-m, -m]],
            weights: vec![0.25; 4],
        },
        LimitRegime::ThreeBlockPinnedMiddle => LimitLaw::two_atoms(vec![m, 1.0, m]),
        LimitRegime::ThreeBlockMiddleField => {
            let c = classification.c_limit.expect("three-block classification");
            LimitLaw::two_atoms(vec![m, m_of_c(schedule.beta, c)?, m])
        }
        LimitRegime::ThreeBlockFullyAligned => LimitLaw::two_atoms(vec![m, m, m]),
        LimitRegime::ThreeBlockWeightedSigns | LimitRegime::ThreeBlockIndependentSigns => {
            let big_c = classification
                .big_c_limit
                .expect("three-block classification");
            let mut atoms = Vec::with_capacity(8);
            let mut weights = Vec::with_capacity(8);
            for chi in sign_vectors() {
                atoms.push(chi.iter().map(|&s| f64::from(s) * m).collect());
                weights.push(a_weight(chi[0], chi[1], chi[2], big_c, schedule.beta)?);
            }
            LimitLaw { atoms, weights }
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const M_STAR_2: f64 = 0.957504024077269;
    const M_STAR_15: f64 = 0.858559636640110;
    /// Largest root of x = tanh(1.5x + sqrt(2)·m*(1.5)), frozen from an
    /// independent bisection.
    const M_FIELD_15_C1: f64 = 0.991020283821855;

    #[test]
    fn validation_rejects_malformed_schedules() {
        assert!(ScheduleSpec::two_block(4.0, 1.0, 0.0).is_err());
        assert!(ScheduleSpec::two_block(4.0, -1.0, 0.5).is_err());
        assert!(ScheduleSpec::two_block(1.9, 1.0, 0.5).is_err());
        assert!(ScheduleSpec::diluted(4.0, 1.0, 0.5, 0.0, 0.5).is_err());
        assert!(ScheduleSpec::diluted(4.0, 1.0, 0.5, 0.5, -0.1).is_err());
        assert!(ScheduleSpec::three_block(1.0, 1.0, 0.5, 1.0, 0.5).is_err());
        assert!(ScheduleSpec::three_block(1.5, 1.0, 0.5, 0.0, 0.5).is_err());
        // The middle block must grow, but slower than N.
        assert!(ScheduleSpec::three_block(1.5, 1.0, 0.5, 1.0, 0.0).is_err());
        assert!(ScheduleSpec::three_block(1.5, 1.0, 0.5, 1.0, 1.0).is_err());

        // Fields from the wrong model family are rejected.
        let mut stray = ScheduleSpec::two_block(4.0, 1.0, 0.5).unwrap();
        stray.gamma = Some(0.5);
        assert!(stray.validate().is_err());
    }

    #[test]
    fn classify_two_block() {
        let aligned = classify(&ScheduleSpec::two_block(4.0, 1.0, 0.5).unwrap()).unwrap();
        assert_eq!(aligned.case, Some(LimitRegime::TwoBlockAligned));
        assert!(aligned.covered);
        assert_eq!(aligned.n_alpha_limit, Some(LimitConstant::Infinite));

        let decoupled = classify(&ScheduleSpec::two_block(4.0, 1.0, 1.5).unwrap()).unwrap();
        assert_eq!(decoupled.case, Some(LimitRegime::TwoBlockDecoupled));
        assert_eq!(decoupled.n_alpha_limit, Some(LimitConstant::Finite(0.0)));

        // N·alpha_N → 3: a finite nonzero limit has no proven law.
        let borderline = classify(&ScheduleSpec::two_block(4.0, 3.0, 1.0).unwrap()).unwrap();
        assert!(!borderline.covered);
        assert_eq!(borderline.case, None);
        assert_eq!(borderline.n_alpha_limit, Some(LimitConstant::Finite(3.0)));
    }

    #[test]
    fn classify_diluted() {
        let aligned = classify(&ScheduleSpec::diluted(4.0, 1.0, 0.3, 1.0, 0.4).unwrap()).unwrap();
        assert_eq!(aligned.case, Some(LimitRegime::DilutedAligned));
        assert_eq!(aligned.pn_alpha_limit, Some(LimitConstant::Infinite));
        assert_eq!(aligned.as_convergence_plausible, Some(true));

        let decoupled = classify(&ScheduleSpec::diluted(4.0, 1.0, 0.3, 1.0, 0.9).unwrap()).unwrap();
        assert_eq!(decoupled.case, Some(LimitRegime::DilutedDecoupled));

        let finite = classify(&ScheduleSpec::diluted(4.0, 2.0, 0.2, 3.0, 0.8).unwrap()).unwrap();
        assert!(!finite.covered);
        assert_eq!(finite.pn_alpha_limit, Some(LimitConstant::Finite(6.0)));

        // pi ≥ 1 starves the mask: p(N)·N no longer diverges.
        let starved = classify(&ScheduleSpec::diluted(4.0, 1.0, 0.1, 1.0, 1.2).unwrap()).unwrap();
        assert!(!starved.covered);
        assert_eq!(starved.as_convergence_plausible, Some(false));

        // pi = 0 keeps the clamp active: effective retention is min(1, P).
        let clamped = classify(&ScheduleSpec::diluted(4.0, 1.0, 1.0, 7.0, 0.0).unwrap()).unwrap();
        assert_eq!(clamped.pn_alpha_limit, Some(LimitConstant::Finite(1.0)));
    }

    #[test]
    fn classify_three_block() {
        let pinned = classify(&ScheduleSpec::three_block(1.5, 1.0, 0.1, 1.0, 0.5).unwrap()).unwrap();
        assert_eq!(pinned.case, Some(LimitRegime::ThreeBlockPinnedMiddle));
        assert_eq!(pinned.c_limit, Some(LimitConstant::Infinite));

        let field = classify(&ScheduleSpec::three_block(1.5, 2.0, 0.25, 4.0, 0.5).unwrap()).unwrap();
        assert_eq!(field.case, Some(LimitRegime::ThreeBlockMiddleField));
        assert_eq!(field.c_limit, Some(LimitConstant::Finite(1.0)));

        let aligned = classify(&ScheduleSpec::three_block(1.5, 1.0, 0.5, 1.0, 0.5).unwrap()).unwrap();
        assert_eq!(aligned.case, Some(LimitRegime::ThreeBlockFullyAligned));
        assert_eq!(aligned.c_limit, Some(LimitConstant::Finite(0.0)));
        assert_eq!(aligned.big_c_limit, Some(LimitConstant::Infinite));

        let weighted =
            classify(&ScheduleSpec::three_block(1.5, 1.0, 0.75, 1.0, 0.5).unwrap()).unwrap();
        assert_eq!(weighted.case, Some(LimitRegime::ThreeBlockWeightedSigns));
        assert_eq!(weighted.big_c_limit, Some(LimitConstant::Finite(1.0)));

        let indep = classify(&ScheduleSpec::three_block(1.5, 1.0, 1.0, 1.0, 0.5).unwrap()).unwrap();
        assert_eq!(indep.case, Some(LimitRegime::ThreeBlockIndependentSigns));

        // Every three-block power schedule lands in exactly one case.
        for rho in [0.05, 0.25, 0.3, 0.5, 0.75, 0.9, 2.0] {
            let c = classify(&ScheduleSpec::three_block(1.5, 1.0, rho, 1.0, 0.5).unwrap()).unwrap();
            assert!(c.covered, "rho = {rho}");
        }
    }

    #[test]
    fn schedule_sequences_and_instantiation() {
        let two = ScheduleSpec::two_block(4.0, 1.0, 0.5).unwrap();
        assert_eq!(two.alpha_at(100), 0.1);
        assert_eq!(two.block_m_star().unwrap(), solve_cw(2.0).unwrap().value);
        match two.instantiate(100, 0).unwrap() {
            ModelSpec::TwoBlock(s) => {
                assert_eq!(s.n(), 100);
                assert_eq!(s.alpha(), 0.1);
            }
            other => panic!("wrong model {other:?}"),
        }

        let dil = ScheduleSpec::diluted(4.0, 1.0, 0.3, 2.0, 0.4).unwrap();
        assert_eq!(dil.dilution_at(2).unwrap(), 1.0, "clamp active at tiny N");
        match dil.instantiate(60, 9).unwrap() {
            ModelSpec::Diluted(s) => {
                assert_eq!(s.mask().len(), 30);
                assert_eq!(s.mask_seed(), Some(9));
                assert!((s.p() - 2.0 * 60f64.powf(-0.4)).abs() < 1e-15);
            }
            other => panic!("wrong model {other:?}"),
        }

        let three = ScheduleSpec::three_block(1.5, 1.0, 0.75, 1.381, 0.5).unwrap();
        assert_eq!(three.block_size_at(840).unwrap(), 40);
        match three.instantiate(840, 0).unwrap() {
            ModelSpec::ThreeBlock(s) => {
                assert_eq!(s.n_outer(), 400);
                assert_eq!(s.b(), 40);
            }
            other => panic!("wrong model {other:?}"),
        }
        // N - b_N odd: no integer outer size.
        assert!(three.instantiate(841, 0).is_err());
    }

    #[test]
    fn a_weight_closed_cases() {
        // C = 0: eight equal weights, exactly.
        for chi in sign_vectors() {
            let w = a_weight(chi[0], chi[1], chi[2], LimitConstant::Finite(0.0), 1.5).unwrap();
            assert_eq!(w, 0.125);
        }
        // C = ∞: mass on the two fully aligned vectors only.
        for chi in sign_vectors() {
            let w = a_weight(chi[0], chi[1], chi[2], LimitConstant::Infinite, 1.5).unwrap();
            let aligned = chi[0] == chi[1] && chi[1] == chi[2];
            assert_eq!(w, if aligned { 0.5 } else { 0.0 });
        }
        // C tuned so the exponential factor is exactly 1/2.
        let m = solve_cw(1.5).unwrap().value;
        let c = std::f64::consts::LN_2 / (std::f64::consts::SQRT_2 * m * m);
        let c = LimitConstant::Finite(c);
        assert!((a_weight(1, 1, 1, c, 1.5).unwrap() - 2.0 / 9.0).abs() < 1e-12);
        assert!((a_weight(1, -1, 1, c, 1.5).unwrap() - 1.0 / 18.0).abs() < 1e-12);
        assert!((a_weight(1, 1, -1, c, 1.5).unwrap() - 1.0 / 9.0).abs() < 1e-12);

        assert!(a_weight(0, 1, 1, c, 1.5).is_err());
        assert!(a_weight(1, 1, 1, c, 0.9).is_err());
        assert!(a_weight(1, 1, 1, LimitConstant::Finite(-1.0), 1.5).is_err());
    }

    #[test]
    fn a_weight_sums_to_one_and_grows_with_c() {
        let mut cs = vec![LimitConstant::Finite(0.0), LimitConstant::Infinite];
        for k in 0..12 {
            cs.push(LimitConstant::Finite(0.02 * 3f64.powi(k)));
        }
        for &c in &cs {
            let total: f64 = sign_vectors()
                .iter()
                .map(|chi| a_weight(chi[0], chi[1], chi[2], c, 1.5).unwrap())
                .sum();
            assert!((total - 1.0).abs() < 1e-12, "C = {c:?}: total {total}");
        }
        let mut last = 0.125;
        for c in [0.5, 1.0, 2.0, 10.0] {
            let w = a_weight(1, 1, 1, LimitConstant::Finite(c), 1.5).unwrap();
            assert!(w > last);
            last = w;
        }
        assert!(last < 0.5);
    }

    #[test]
    fn limit_law_two_block_cases() {
        let aligned = limit_law(&ScheduleSpec::two_block(4.0, 1.0, 0.5).unwrap()).unwrap();
        assert_eq!(aligned.num_atoms(), 2);
        assert!((aligned.atoms[0][0] - M_STAR_2).abs() < 1e-9);
        assert_eq!(aligned.atoms[0][0], aligned.atoms[0][1]);
        assert_eq!(aligned.weights, vec![0.5, 0.5]);

        let four = limit_law(&ScheduleSpec::two_block(4.0, 1.0, 1.5).unwrap()).unwrap();
        assert_eq!(four.num_atoms(), 4);
        assert_eq!(four.weights, vec![0.25; 4]);
        // Lexicographically decreasing atom order.
        assert!(four.atoms[0][1] > 0.0 && four.atoms[1][1] < 0.0);
        assert!(four.atoms[0][0] > 0.0 && four.atoms[3][0] < 0.0);

        assert!(limit_law(&ScheduleSpec::two_block(4.0, 3.0, 1.0).unwrap()).is_err());
    }

    #[test]
    fn limit_law_three_block_cases() {
        let pinned = limit_law(&ScheduleSpec::three_block(1.5, 1.0, 0.1, 1.0, 0.5).unwrap()).unwrap();
        assert_eq!(pinned.atoms[0][1], 1.0);
        assert!((pinned.atoms[0][0] - M_STAR_15).abs() < 1e-9);
        assert_eq!(pinned.atoms[1][1], -1.0);

        let field =
            limit_law(&ScheduleSpec::three_block(1.5, 2.0, 0.25, 4.0, 0.5).unwrap()).unwrap();
        assert!((field.atoms[0][1] - M_FIELD_15_C1).abs() < 1e-9);
        assert!((field.atoms[0][0] - M_STAR_15).abs() < 1e-9);

        let aligned =
            limit_law(&ScheduleSpec::three_block(1.5, 1.0, 0.5, 1.0, 0.5).unwrap()).unwrap();
        assert_eq!(aligned.atoms[0], vec![aligned.atoms[0][0]; 3]);
        assert_eq!(aligned.weights, vec![0.5, 0.5]);

        let weighted =
            limit_law(&ScheduleSpec::three_block(1.5, 1.0, 0.75, 1.0, 0.5).unwrap()).unwrap();
        assert_eq!(weighted.num_atoms(), 8);
        let total: f64 = weighted.weights.iter().sum();
        assert!((total - 1.0).abs() < 1e-12);
        // Frozen all-plus weight at C = 1, beta = 1.5.
        assert!((weighted.weights[0] - 0.273299087751823).abs() < 1e-12);

        let indep = limit_law(&ScheduleSpec::three_block(1.5, 1.0, 2.0, 1.0, 0.5).unwrap()).unwrap();
        assert_eq!(indep.weights, vec![0.125; 8]);
    }

    #[test]
    fn limit_laws_are_flip_symmetric_and_normalized() {
        let schedules = vec![
            ScheduleSpec::two_block(4.0, 1.0, 0.5).unwrap(),
            ScheduleSpec::two_block(4.0, 1.0, 1.5).unwrap(),
            ScheduleSpec::diluted(4.0, 1.0, 0.3, 1.0, 0.4).unwrap(),
            ScheduleSpec::diluted(4.0, 1.0, 0.3, 1.0, 0.9).unwrap(),
            ScheduleSpec::three_block(1.5, 1.0, 0.1, 1.0, 0.5).unwrap(),
            ScheduleSpec::three_block(1.5, 2.0, 0.25, 4.0, 0.5).unwrap(),
            ScheduleSpec::three_block(1.5, 1.0, 0.5, 1.0, 0.5).unwrap(),
            ScheduleSpec::three_block(1.5, 1.0, 0.75, 1.0, 0.5).unwrap(),
            ScheduleSpec::three_block(1.5, 1.0, 2.0, 1.0, 0.5).unwrap(),
        ];
        for s in schedules {
            let law = limit_law(&s).unwrap();
            let total: f64 = law.weights.iter().sum();
            assert!((total - 1.0).abs() < 1e-12);
            assert!(law.weights.iter().all(|&w| w >= 0.0));
            for i in 0..law.num_atoms() {
                let flipped = law.flipped_weight(i).expect("law closed under flip");
                assert_eq!(flipped, law.weights[i]);
            }
        }
    }

    #[test]
    fn limit_law_json_round_trip_and_wells() {
        let law = limit_law(&ScheduleSpec::two_block(4.0, 1.0, 0.5).unwrap()).unwrap();
        let json = law.to_json();
        assert_eq!(LimitLaw::from_json(&json).unwrap(), law);
        assert!(LimitLaw::from_json("{]").is_err());

        let wells = law.well_spec(0.1).unwrap();
        assert_eq!(wells.num_wells(), 2);
        assert_eq!(wells.centers()[0], law.atoms[0]);
        // Overlapping wells (epsilon too large) are refused.
        assert!(law.well_spec(1.0).is_err());
    }

    #[test]
    fn schedule_serde_round_trip() {
        let s = ScheduleSpec::three_block(1.5, 1.0, 0.75, 1.381, 0.5).unwrap();
        let text = toml::to_string(&s).unwrap();
        assert!(text.contains("A = 1"));
        assert!(text.contains("B = 1.381"));
        let back: ScheduleSpec = toml::from_str(&text).unwrap();
        assert_eq!(back, s);
        assert!(toml::from_str::<ScheduleSpec>("model = \"two_block\"\nbeta = 4.0\nA = 1.0\nrho = 0.5\nzeta = 2").is_err());
    }
}
