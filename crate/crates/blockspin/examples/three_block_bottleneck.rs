//! Sign-vector weights of the three-block chain with a small middle block.
//!
//! Two large outer blocks talk only through a middle block of b_N =
//! floor(sqrt(N)) spins. With coupling alpha_N = C / sqrt(b_N * N) the
//! product alpha * sqrt(b*N) -> C stays finite, and each of the eight sign
//! vectors (chi1, chi2, chi3) keeps a positive limiting weight that depends
//! on C. Compares exact finite-N well masses against those weights.

use blockspin::{
    a_weight, exact_table, solve_cw, Budget, LimitConstant, ScheduleSpec, WellSpec,
};

fn main() -> blockspin::Result<()> {
    let beta = 1.5;
    let n = 399; // b = floor(sqrt(399)) = 19, outer blocks 190 each
    let m = solve_cw(beta)?.value;

    for big_c in [0.5, 2.0] {
        // A = C / sqrt(B) with B = 1, gamma = 1/2, rho = 3/4 keeps
        // alpha * sqrt(b * N) -> C.
        let schedule = ScheduleSpec::three_block(beta, big_c, 0.75, 1.0, 0.5)?;
        let spec = schedule.instantiate(n, 0)?;
        let table = exact_table(&spec, &Budget::default())?;

        let signs = [1i8, -1];
        let mut centers = Vec::new();
        let mut predicted = Vec::new();
        for &s1 in &signs {
            for &s2 in &signs {
                for &s3 in &signs {
                    centers.push(vec![m * s1 as f64, m * s2 as f64, m * s3 as f64]);
                    predicted.push(a_weight(s1, s2, s3, LimitConstant::Finite(big_c), beta)?);
                }
            }
        }
        let wells = WellSpec::new(centers.clone(), 0.4)?;
        let report = blockspin::well_masses_exact(&table, &wells)?;

        println!("C = {big_c}: N = {n}, blocks {:?}, m* = {m:.4}", spec.block_sizes());
        println!("  signs      exact    limit");
        let mut worst: f64 = 0.0;
        for (i, center) in centers.iter().enumerate() {
            let signs: Vec<&str> = center.iter().map(|&c| if c > 0.0 { "+" } else { "-" }).collect();
            let gap = (report.well_masses[i] - predicted[i]).abs();
            worst = worst.max(gap);
            println!(
                "  ({} {} {})    {:.4}   {:.4}",
                signs[0], signs[1], signs[2], report.well_masses[i], predicted[i]
            );
        }
        println!("  worst |exact - limit| = {worst:.4}\n");
    }
    Ok(())
}
