//! Log-domain numerics: a streaming log-sum-exp accumulator and a cached
//! log-factorial table.
//!
//! Everything downstream sums astronomically large weight counts, so no sum
//! is ever formed in linear space before normalization; all accumulation goes
//! through [`LogSumExp`].

use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{Error, Result};

/// Streaming log-sum-exp: feeds of `x_i` produce `ln(sum_i exp(x_i))`
/// without overflow, keeping a running maximum.
#[derive(Debug, Clone)]
pub struct LogSumExp {
    max: f64,
    /// Sum of `exp(x_i - max)`; at least 1 once a finite term has arrived.
    sum: f64,
}

impl Default for LogSumExp {
    fn default() -> Self {
        Self::new()
    }
}

impl LogSumExp {
    pub fn new() -> Self {
        Self {
            max: f64::NEG_INFINITY,
            sum: 0.0,
        }
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        debug_assert!(!x.is_nan());
        if x == f64::NEG_INFINITY {
            return; // a zero-weight term
        }
        if x <= self.max {
            self.sum += (x - self.max).exp();
        } else {
            // New maximum: rescale what we have and count the new term as 1.
            self.sum = self.sum * (self.max - x).exp() + 1.0;
            self.max = x;
        }
    }

    /// `ln(sum exp(x_i))`; negative infinity if nothing finite was added.
    #[inline]
    pub fn total(&self) -> f64 {
        if self.max == f64::NEG_INFINITY {
            f64::NEG_INFINITY
        } else {
            self.max + self.sum.ln()
        }
    }
}

/// Log-sum-exp over a slice, accumulated in slice order.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let mut acc = LogSumExp::new();
    for &x in xs {
        acc.add(x);
    }
    acc.total()
}

// ---------------------------------------------------------------------------
// Log-factorials
// ---------------------------------------------------------------------------

struct LfCache {
    values: Arc<Vec<f64>>,
    /// Kahan compensation carried past the last entry so the table can be
    /// extended without re-summing from scratch.
    carry: f64,
}

static LF_CACHE: OnceLock<Mutex<LfCache>> = OnceLock::new();

fn lf_cache() -> &'static Mutex<LfCache> {
    LF_CACHE.get_or_init(|| {
        Mutex::new(LfCache {
            values: Arc::new(vec![0.0]), // ln 0! = 0
            carry: 0.0,
        })
    })
}

fn ensure_lf(max_n: usize) -> Arc<Vec<f64>> {
    let mut cache = lf_cache().lock().expect("log-factorial cache poisoned");
    if cache.values.len() > max_n {
        return Arc::clone(&cache.values);
    }
    // Grow geometrically so repeated small extensions stay amortized.
    let target = (max_n + 1).max(cache.values.len() * 2);
    let mut values = Vec::with_capacity(target);
    values.extend_from_slice(&cache.values);
    let mut sum = *values.last().expect("cache is never empty");
    let mut carry = cache.carry;
    for k in values.len()..target {
        // Kahan-compensated running sum of ln k keeps each entry within a
        // few ulps of the correctly rounded log-factorial.
        let y = (k as f64).ln() - carry;
        let t = sum + y;
        carry = (t - sum) - y;
        sum = t;
        values.push(sum);
    }
    cache.values = Arc::new(values);
    cache.carry = carry;
    Arc::clone(&cache.values)
}

/// An immutable snapshot of the global log-factorial table, valid for
/// arguments up to the limit it was requested with. Cheap to clone and safe
/// to use from parallel workers without locking.
#[derive(Clone)]
pub struct LogFactorials {
    values: Arc<Vec<f64>>,
}

impl LogFactorials {
    /// Snapshot covering `0..=max_n`.
    pub fn with_limit(max_n: usize) -> Self {
        Self {
            values: ensure_lf(max_n),
        }
    }

    #[inline]
    pub fn factorial(&self, n: usize) -> f64 {
        self.values[n]
    }

    /// `ln C(n, k)`; negative infinity when `k > n` (an empty choice).
    ///
    /// The two subtracted terms are added first, so `binomial(n, k)` and
    /// `binomial(n, n-k)` are bit-identical.
    #[inline]
    pub fn binomial(&self, n: usize, k: usize) -> f64 {
        if k > n {
            return f64::NEG_INFINITY;
        }
        self.values[n] - (self.values[k] + self.values[n - k])
    }

    /// Log multinomial coefficient `ln n! / (p0! p1! p2! p3!)`.
    ///
    /// Parts are sorted before summation, so any permutation of the parts
    /// produces a bit-identical result — the keystone of the exact flip and
    /// block-exchange symmetries of the weight tables.
    #[inline]
    pub fn multinomial4(&self, n: usize, parts: [usize; 4]) -> f64 {
        debug_assert_eq!(parts.iter().sum::<usize>(), n);
        let mut p = parts;
        p.sort_unstable();
        self.values[n]
            - ((self.values[p[0]] + self.values[p[1]]) + (self.values[p[2]] + self.values[p[3]]))
    }
}

/// `ln C(n, k)` through the shared cache.
pub fn log_binomial(n: usize, k: usize) -> Result<f64> {
    if k > n {
        return Err(Error::InvalidParameter(format!(
            "binomial coefficient C({n}, {k}) needs k <= n"
        )));
    }
    Ok(LogFactorials::with_limit(n).binomial(n, k))
}
