//! The outer blocks act on the middle block as an effective field.
//!
//! Condition the three-block law on both outer blocks sitting in their
//! positive wells. In the limit the middle block sees an effective field
//! sqrt(2)*c*m* with c = lim alpha*sqrt(N/b), so its conditional
//! magnetization should peak at the tilted fixed point m(c) solving
//! m = tanh(beta*m + sqrt(2)*c*m*), above the zero-field value m*(beta).

use blockspin::{exact_table, m_of_c, solve_cw, Budget, ScheduleSpec};

fn main() -> blockspin::Result<()> {
    let beta = 1.5;
    // alpha_N = A * N^(-1/4) with b_N = sqrt(N): alpha*sqrt(N/b) -> A.
    // Using the schedule's own classification keeps the bookkeeping honest.
    let c_target = 1.0;
    let schedule = ScheduleSpec::three_block(beta, c_target, 0.25, 1.0, 0.5)?;
    let n = 400;

    let classification = blockspin::classify(&schedule)?;
    println!("{}", classification.note);

    let spec = schedule.instantiate(n, 0)?;
    let table = exact_table(&spec, &Budget::default())?;
    let sizes = spec.block_sizes();
    let b = sizes[1];
    let m_star = solve_cw(beta)?.value;

    // Conditional law of the middle block's magnetization given aligned
    // outer blocks.
    let (marginal, event_mass) = table.conditional_marginal(1, |m| {
        (m[0] - m_star).abs() <= 0.2 && (m[2] - m_star).abs() <= 0.2
    })?;
    let peak_k = marginal
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(k, _)| k)
        .unwrap();
    let peak_m = 2.0 * peak_k as f64 / b as f64 - 1.0;

    println!("N = {n}, blocks {sizes:?}, conditioning event mass {event_mass:.4}");
    println!("middle-block conditional law (top of the peak):");
    let lo = peak_k.saturating_sub(3);
    let hi = (peak_k + 3).min(b);
    for k in lo..=hi {
        let m = 2.0 * k as f64 / b as f64 - 1.0;
        let bar = "#".repeat((marginal[k] * 120.0).round() as usize);
        println!("  m2 = {m:+.3}: {:.4} {bar}", marginal[k]);
    }

    // Compare against the limiting tilted fixed point at this schedule's c.
    let c_limit = classification
        .c_limit
        .expect("three-block schedules always report c");
    let c = c_limit
        .as_finite()
        .expect("finite bottleneck constant for this schedule");
    let m_tilted = m_of_c(beta, c_limit)?;
    println!("conditional peak at m2 = {peak_m:+.4}");
    println!("tilted fixed point m(c = {c:.4}) = {m_tilted:+.4}");
    println!("zero-field value  m*({beta}) = {m_star:+.4}");
    Ok(())
}
