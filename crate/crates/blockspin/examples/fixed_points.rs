//! Fixed points behind every limiting law in this crate.
//!
//! Prints the spontaneous magnetization m*(gamma) solving m = tanh(gamma*m)
//! across couplings, and the tilted value m(c) solving m = tanh(beta*m +
//! sqrt(2)*c*m*) that governs a middle block feeling an aligned outer
//! field of strength c.

use blockspin::{free_energy, m_of_c, solve_cw, LimitConstant};

fn main() -> blockspin::Result<()> {
    println!("spontaneous magnetization m = tanh(gamma*m):");
    println!("  gamma   m*        free energy at m*");
    for gamma in [1.05, 1.2, 1.5, 2.0, 3.0, 5.0] {
        let root = solve_cw(gamma)?;
        println!(
            "  {gamma:<6} {:.6}  {:+.6}",
            root.value,
            free_energy(gamma, root.value)?
        );
    }
    // Below and at the critical coupling only m = 0 solves the equation.
    for gamma in [0.5, 1.0] {
        assert_eq!(solve_cw(gamma)?.value, 0.0);
    }
    println!("  (gamma <= 1 has no positive root: the solver returns 0)");

    let beta = 1.5;
    let m_star = solve_cw(beta)?.value;
    println!("\ntilted fixed point m(c) at beta = {beta} (m* = {m_star:.6}):");
    println!("  c       m(c)");
    for c in [0.0, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0] {
        let m = m_of_c(beta, LimitConstant::Finite(c))?;
        println!("  {c:<6}  {m:.6}");
    }
    println!("  inf     {:.6}", m_of_c(beta, LimitConstant::Infinite)?);
    println!("(c = 0 recovers m*; c -> inf saturates at full alignment)");
    Ok(())
}
