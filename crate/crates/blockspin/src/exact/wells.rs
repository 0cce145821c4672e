//! Wells: small boxes around candidate limit atoms in magnetization space,
//! and the mass a law (exact table or empirical sample) puts into each.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::tables::LogWeightTable;

/// A family of axis-aligned boxes `[c_j - eps, c_j + eps]` around centers in
/// `[-1, 1]^d`. Interiors must be pairwise disjoint; closed boxes may touch.
#[derive(Debug, Clone, PartialEq)]
pub struct WellSpec {
    centers: Vec<Vec<f64>>,
    epsilon: f64,
}

impl WellSpec {
    pub fn new(centers: Vec<Vec<f64>>, epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "well half-width must be positive, got {epsilon}"
            )));
        }
        let Some(first) = centers.first() else {
            return Err(Error::InvalidParameter("no well centers given".into()));
        };
        let dim = first.len();
        if dim == 0 {
            return Err(Error::InvalidParameter("zero-dimensional well center".into()));
        }
        for c in &centers {
            if c.len() != dim {
                return Err(Error::ShapeMismatch(format!(
                    "well centers of mixed dimension ({} vs {dim})",
                    c.len()
                )));
            }
            if c.iter().any(|x| !x.is_finite() || x.abs() > 1.0) {
                return Err(Error::InvalidParameter(format!(
                    "well center {c:?} outside [-1, 1]"
                )));
            }
        }
        for i in 0..centers.len() {
            for j in i + 1..centers.len() {
                let interiors_meet = centers[i]
                    .iter()
                    .zip(&centers[j])
                    .all(|(a, b)| (a - b).abs() < 2.0 * epsilon);
                if interiors_meet {
                    return Err(Error::OverlappingWells(i, j));
                }
            }
        }
        Ok(Self { centers, epsilon })
    }

    /// Standard half-width: 0.1, shrunk when the spontaneous magnetization is
    /// small so that sign-symmetric wells at `±m` stay disjoint.
    pub fn default_epsilon(m_star: f64) -> f64 {
        if m_star > 0.0 {
            (m_star / 2.0).min(0.1)
        } else {
            0.1
        }
    }

    pub fn centers(&self) -> &[Vec<f64>] {
        &self.centers
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn dim(&self) -> usize {
        self.centers[0].len()
    }

    pub fn num_wells(&self) -> usize {
        self.centers.len()
    }

    fn contains(&self, well: usize, m: &[f64]) -> bool {
        self.centers[well]
            .iter()
            .zip(m)
            .all(|(c, x)| (x - c).abs() <= self.epsilon)
    }

    fn dist2(&self, well: usize, m: &[f64]) -> f64 {
        self.centers[well]
            .iter()
            .zip(m)
            .map(|(c, x)| (x - c) * (x - c))
            .sum()
    }

    /// Deposit `weight` at point `m`: into the containing well, to the
    /// nearest center when boxes touch (exact distance ties split evenly),
    /// or into the residual when no well contains `m`.
    pub fn accumulate(&self, m: &[f64], weight: f64, masses: &mut [f64], residual: &mut f64) {
        debug_assert_eq!(masses.len(), self.num_wells());
        debug_assert_eq!(m.len(), self.dim());
        let mut best = f64::INFINITY;
        let mut ties = 0usize;
        for w in 0..self.num_wells() {
            if self.contains(w, m) {
                let d = self.dist2(w, m);
                if d < best {
                    best = d;
                    ties = 1;
                } else if d == best {
                    ties += 1;
                }
            }
        }
        if ties == 0 {
            *residual += weight;
            return;
        }
        let share = weight / ties as f64;
        for w in 0..self.num_wells() {
            if self.contains(w, m) && self.dist2(w, m) == best {
                masses[w] += share;
            }
        }
    }
}

/// Mass captured by each well plus the leftover outside all wells.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WellMassReport {
    pub well_masses: Vec<f64>,
    pub residual_mass: f64,
}

impl WellMassReport {
    pub fn total(&self) -> f64 {
        self.well_masses.iter().sum::<f64>() + self.residual_mass
    }
}

/// Exact well masses of a finite-size law.
pub fn well_masses_exact(table: &LogWeightTable, wells: &WellSpec) -> Result<WellMassReport> {
    if wells.dim() != table.num_blocks() {
        return Err(Error::ShapeMismatch(format!(
            "{}-dimensional wells for a {}-block law",
            wells.dim(),
            table.num_blocks()
        )));
    }
    let mut masses = vec![0.0f64; wells.num_wells()];
    let mut residual = 0.0f64;
    for idx in 0..table.len() {
        let m = table.magnetizations_of(idx);
        wells.accumulate(&m, table.prob_at(idx), &mut masses, &mut residual);
    }
    Ok(WellMassReport {
        well_masses: masses,
        residual_mass: residual,
    })
}

/// Empirical well masses of a list of magnetization points, each with equal
/// weight `1 / len`.
pub fn well_masses_empirical(points: &[Vec<f64>], wells: &WellSpec) -> Result<WellMassReport> {
    if points.is_empty() {
        return Err(Error::InvalidParameter(
            "empirical well masses need at least one sample".into(),
        ));
    }
    let w = 1.0 / points.len() as f64;
    let mut masses = vec![0.0f64; wells.num_wells()];
    let mut residual = 0.0f64;
    for p in points {
        if p.len() != wells.dim() {
            return Err(Error::ShapeMismatch(format!(
                "{}-dimensional sample for {}-dimensional wells",
                p.len(),
                wells.dim()
            )));
        }
        wells.accumulate(p, w, &mut masses, &mut residual);
    }
    Ok(WellMassReport {
        well_masses: masses,
        residual_mass: residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::tables::{exact_two_block, Budget};
    use crate::model::TwoBlockSpec;

    #[test]
    fn validation_rejects_bad_specs() {
        assert!(WellSpec::new(vec![], 0.1).is_err());
        assert!(WellSpec::new(vec![vec![0.0]], 0.0).is_err());
        assert!(WellSpec::new(vec![vec![0.0], vec![0.1, 0.2]], 0.1).is_err());
        assert!(WellSpec::new(vec![vec![1.5]], 0.1).is_err());
        // Interiors overlap: |0.15| < 2 * 0.1.
        let err = WellSpec::new(vec![vec![0.0], vec![0.15]], 0.1).unwrap_err();
        assert!(matches!(err, Error::OverlappingWells(0, 1)));
        // Touching closed boxes are fine.
        assert!(WellSpec::new(vec![vec![0.0], vec![0.2]], 0.1).is_ok());
    }

    #[test]
    fn default_epsilon_shrinks_with_small_magnetization() {
        assert_eq!(WellSpec::default_epsilon(0.9), 0.1);
        assert_eq!(WellSpec::default_epsilon(0.08), 0.04);
        assert_eq!(WellSpec::default_epsilon(0.0), 0.1);
    }

    #[test]
    fn boundary_points_split_between_touching_wells() {
        let wells = WellSpec::new(vec![vec![-0.5], vec![0.5]], 0.5).unwrap();
        let mut masses = vec![0.0; 2];
        let mut residual = 0.0;
        wells.accumulate(&[0.0], 1.0, &mut masses, &mut residual);
        assert_eq!(masses, vec![0.5, 0.5]);
        assert_eq!(residual, 0.0);
        wells.accumulate(&[0.3], 1.0, &mut masses, &mut residual);
        assert_eq!(masses, vec![0.5, 1.5]);
    }

    #[test]
    fn shared_boundary_in_2d_goes_to_nearest_center() {
        // Boxes touch along x; distance then decides by the y offset.
        let wells = WellSpec::new(vec![vec![0.0, 0.0], vec![0.4, 0.3]], 0.2).unwrap();
        let mut masses = vec![0.0; 2];
        let mut residual = 0.0;
        wells.accumulate(&[0.2, 0.1], 1.0, &mut masses, &mut residual);
        assert_eq!(masses, vec![1.0, 0.0]);
        wells.accumulate(&[0.2, 0.2], 1.0, &mut masses, &mut residual);
        assert_eq!(masses, vec![1.0, 1.0]);
        wells.accumulate(&[0.2, 0.15], 1.0, &mut masses, &mut residual);
        assert_eq!(masses, vec![1.5, 1.5]);
        assert_eq!(residual, 0.0);
        // Outside every box.
        wells.accumulate(&[-0.9, -0.9], 1.0, &mut masses, &mut residual);
        assert_eq!(residual, 1.0);
    }

    #[test]
    fn exact_masses_account_for_everything() {
        let spec = TwoBlockSpec::new(60, 4.0, 0.5).unwrap();
        let table = exact_two_block(&spec, &Budget::default()).unwrap();
        // Spontaneous magnetization near tanh-fixed-point of 4m; wells at the
        // four sign combinations.
        let m = 0.9697;
        let wells = WellSpec::new(
            vec![
                vec![m, m],
                vec![m, -m],
                vec![-m, m],
                vec![-m, -m],
            ],
            0.1,
        )
        .unwrap();
        let report = well_masses_exact(&table, &wells).unwrap();
        assert!((report.total() - 1.0).abs() < 1e-10);
        // Flip symmetry of the law pairs up opposite wells exactly.
        assert_eq!(report.well_masses[0], report.well_masses[3]);
        assert_eq!(report.well_masses[1], report.well_masses[2]);
        // At this coupling the aligned wells dominate.
        assert!(report.well_masses[0] > report.well_masses[1]);
        assert!(report.well_masses[0] > 0.3);
    }

    #[test]
    fn empirical_masses_match_hand_count() {
        let wells = WellSpec::new(vec![vec![-0.8], vec![0.8]], 0.1).unwrap();
        let pts = vec![vec![-0.85], vec![0.75], vec![0.82], vec![0.0]];
        let report = well_masses_empirical(&pts, &wells).unwrap();
        assert_eq!(report.well_masses, vec![0.25, 0.5]);
        assert_eq!(report.residual_mass, 0.25);
        assert!(well_masses_empirical(&[], &wells).is_err());
    }
}
