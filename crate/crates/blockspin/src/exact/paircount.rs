//! Distribution of the number of matched `(+,+)` pairs over a uniform
//! magnetization fiber, and the closed form of the matching cross term.
//!
//! Fix plus-counts `(a, b)` on the two blocks of `N/2` sites. Drawing a
//! configuration uniformly from that fiber, the number `n` of matched pairs
//! with both spins `+1` determines all four pair types:
//! `(+,+) = n`, `(+,-) = a - n`, `(-,+) = b - n`, `(-,-) = N/2 - a - b + n`,
//! so the fiber count factorizes through a single multinomial in `n` and the
//! cross term `sum_i s_i s_{i+N/2}` is the linear function
//! `S(n) = 4n + N/2 - 2a - 2b`.

use crate::error::{Error, Result};
use crate::exact::numerics::{LogFactorials, LogSumExp};
use crate::model::plus_count_from_mu;

/// Feasible range of the `(+,+)` pair count for plus-counts `(a, b)` on
/// blocks of `half` sites: `max(0, a + b - half) <= n <= min(a, b)`.
pub fn feasible_pair_range(half: usize, a: usize, b: usize) -> (usize, usize) {
    ((a + b).saturating_sub(half), a.min(b))
}

/// Cross term of the perfect matching on the fiber `(a, b)` at pair count
/// `n`, as an exact integer.
#[inline]
pub(crate) fn cross_term_int(half: usize, a: usize, b: usize, n: usize) -> i64 {
    4 * n as i64 + half as i64 - 2 * a as i64 - 2 * b as i64
}

/// The law of the `(+,+)` pair count on a fixed fiber.
#[derive(Debug, Clone)]
pub struct PairCountLaw {
    half: usize,
    a: usize,
    b: usize,
    n_min: usize,
    n_max: usize,
    /// `ln` of the number of fiber configurations with each pair count,
    /// indexed by `n - n_min`.
    log_counts: Vec<f64>,
    /// `ln` of the fiber size, accumulated from `log_counts`.
    log_total: f64,
}

impl PairCountLaw {
    pub fn half(&self) -> usize {
        self.half
    }

    pub fn plus_counts(&self) -> (usize, usize) {
        (self.a, self.b)
    }

    /// Inclusive feasible range of the pair count.
    pub fn range(&self) -> (usize, usize) {
        (self.n_min, self.n_max)
    }

    /// `ln` of the number of fiber configurations with exactly `n` plus-plus
    /// pairs; negative infinity outside the feasible range.
    pub fn log_count(&self, n: usize) -> f64 {
        if n < self.n_min || n > self.n_max {
            f64::NEG_INFINITY
        } else {
            self.log_counts[n - self.n_min]
        }
    }

    /// `ln P(n)` under the uniform fiber measure.
    pub fn log_prob(&self, n: usize) -> f64 {
        self.log_count(n) - self.log_total
    }

    /// `ln` of the total fiber size `C(N/2, a) C(N/2, b)`.
    pub fn log_total(&self) -> f64 {
        self.log_total
    }

    /// Pair count maximizing the fiber count (the law's mode).
    pub fn argmax(&self) -> usize {
        let mut best = (f64::NEG_INFINITY, self.n_min);
        for (i, &lc) in self.log_counts.iter().enumerate() {
            if lc > best.0 {
                best = (lc, self.n_min + i);
            }
        }
        best.1
    }

    /// Cross-term value `S(n)` at pair count `n`.
    pub fn cross_term(&self, n: usize) -> Result<f64> {
        if n < self.n_min || n > self.n_max {
            return Err(Error::InvalidParameter(format!(
                "pair count {n} outside the feasible range [{}, {}]",
                self.n_min, self.n_max
            )));
        }
        Ok(cross_term_int(self.half, self.a, self.b, n) as f64)
    }

    /// `ln E[exp(alpha S)]` under the uniform fiber measure: the exact tilted
    /// expectation that exponential cross-coupling contributes on this fiber.
    pub fn log_tilted_expectation(&self, alpha: f64) -> f64 {
        let mut acc = LogSumExp::new();
        for (i, &lc) in self.log_counts.iter().enumerate() {
            let n = self.n_min + i;
            acc.add(lc - self.log_total
                + alpha * cross_term_int(self.half, self.a, self.b, n) as f64);
        }
        acc.total()
    }
}

/// Build the pair-count law for total size `n_total` and block
/// magnetizations `(mu1, mu2)`, which must sit on the admissible grid.
pub fn pair_count_law(n_total: usize, mu1: f64, mu2: f64) -> Result<PairCountLaw> {
    if n_total < 2 || n_total % 2 != 0 {
        return Err(Error::InvalidParameter(format!(
            "N = {n_total} must be even and >= 2"
        )));
    }
    let half = n_total / 2;
    let a = plus_count_from_mu(half, mu1)?;
    let b = plus_count_from_mu(half, mu2)?;
    pair_count_law_counts(half, a, b)
}

/// Same as [`pair_count_law`], addressed by exact plus-counts.
pub fn pair_count_law_counts(half: usize, a: usize, b: usize) -> Result<PairCountLaw> {
    if a > half || b > half {
        return Err(Error::Inadmissible(format!(
            "plus-counts ({a}, {b}) exceed the block size {half}"
        )));
    }
    let lf = LogFactorials::with_limit(half);
    let (n_min, n_max) = feasible_pair_range(half, a, b);
    let mut log_counts = Vec::with_capacity(n_max - n_min + 1);
    let mut total = LogSumExp::new();
    for n in n_min..=n_max {
        let lc = lf.multinomial4(half, [n, a - n, b - n, half + n - a - b]);
        log_counts.push(lc);
        total.add(lc);
    }
    Ok(PairCountLaw {
        half,
        a,
        b,
        n_min,
        n_max,
        log_counts,
        log_total: total.total(),
    })
}

/// Rescaled location of the fiber-count maximum:
/// `gamma* = (mu1 + mu2 + mu1 mu2 + 1) / 2`, so the maximizing pair count is
/// `gamma* N / 4`.
pub fn gamma_star(mu1: f64, mu2: f64) -> f64 {
    0.5 * (mu1 + mu2 + mu1 * mu2 + 1.0)
}

/// Companion point `gamma** = (-mu1 - mu2 + mu1 mu2 + 1) / 2`, the rescaled
/// count of `(-,-)` pairs at the maximizer.
pub fn gamma_star_star(mu1: f64, mu2: f64) -> f64 {
    0.5 * (-mu1 - mu2 + mu1 * mu2 + 1.0)
}

/// Matching cross term `S = 4n - N/2 - N (mu1 + mu2) / 2` on the fiber
/// `(mu1, mu2)` at pair count `n`. Evaluated through the exact integer form,
/// so the result is an integer whenever the fiber is admissible.
pub fn cross_term_value(n_total: usize, mu1: f64, mu2: f64, n: usize) -> Result<f64> {
    if n_total < 2 || n_total % 2 != 0 {
        return Err(Error::InvalidParameter(format!(
            "N = {n_total} must be even and >= 2"
        )));
    }
    let half = n_total / 2;
    let a = plus_count_from_mu(half, mu1)?;
    let b = plus_count_from_mu(half, mu2)?;
    let (n_min, n_max) = feasible_pair_range(half, a, b);
    if n < n_min || n > n_max {
        return Err(Error::InvalidParameter(format!(
            "pair count {n} outside the feasible range [{n_min}, {n_max}]"
        )));
    }
    Ok(cross_term_int(half, a, b, n) as f64)
}
